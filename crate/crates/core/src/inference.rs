//! Localizing discontinuities from a set of observed count patterns.
//!
//! For a reference index `l`, the discontinuity `D_i` sits at the signed
//! length of the regions between it and `D_l`. Summing the observed counts
//! over those regions gives one or two values. Two values `{c - 1, c}`
//! pin `D_i` to an open interval of width `T`; a single value `s` only
//! bounds it to width `2T`.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::rational::{int, Rational};
use crate::sampler::{PatternAtlas, SamplingPattern};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InferenceError {
    #[error("observation set is empty")]
    Empty,
    #[error("pattern {pattern} has length {len}, expected {m}")]
    LengthMismatch {
        pattern: String,
        len: usize,
        m: usize,
    },
    #[error("pattern {0} appears more than once")]
    Duplicate(String),
    #[error("pattern {0} has a zero count; every region holds at least one sample")]
    ZeroCount(String),
    #[error("{got} amplitudes supplied for {m} regions")]
    AmplitudeCount { got: usize, m: usize },
    #[error("reference index {l} out of range 0..={m}")]
    ReferenceOutOfRange { l: usize, m: usize },
    #[error("InconsistentObservations: cumulative sums for l={l}, i={i} take values {values:?}")]
    Inconsistent {
        l: usize,
        i: usize,
        values: Vec<i64>,
    },
}

/// Distinct observed patterns together with the known amplitudes
/// `g_1 .. g_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationSet {
    patterns: Vec<SamplingPattern>,
    amplitudes: Vec<Rational>,
}

impl ObservationSet {
    pub fn new(
        patterns: Vec<SamplingPattern>,
        amplitudes: Vec<Rational>,
    ) -> Result<Self, InferenceError> {
        let m = amplitudes.len();
        if patterns.is_empty() {
            return Err(InferenceError::Empty);
        }
        let mut seen = BTreeSet::new();
        for p in &patterns {
            if p.len() != m {
                return Err(
                    if seen.is_empty() && patterns.iter().all(|q| q.len() == p.len()) {
                        InferenceError::AmplitudeCount { got: m, m: p.len() }
                    } else {
                        InferenceError::LengthMismatch {
                            pattern: p.to_string(),
                            len: p.len(),
                            m,
                        }
                    },
                );
            }
            if p.0.contains(&0) {
                return Err(InferenceError::ZeroCount(p.to_string()));
            }
            if !seen.insert(p.clone()) {
                return Err(InferenceError::Duplicate(p.to_string()));
            }
        }
        Ok(ObservationSet {
            patterns,
            amplitudes,
        })
    }

    /// Every pattern of the atlas.
    pub fn from_atlas(atlas: &PatternAtlas, amplitudes: Vec<Rational>) -> Self {
        Self::new(atlas.patterns(), amplitudes).expect("atlas patterns are distinct")
    }

    pub fn m(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn patterns(&self) -> &[SamplingPattern] {
        &self.patterns
    }

    pub fn amplitudes(&self) -> &[Rational] {
        &self.amplitudes
    }

    /// `[g_0 = 0, g_1, .., g_m, g_{m+1} = 0]`.
    pub fn padded_amplitudes(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.m() + 2);
        out.push(Rational::zero());
        out.extend(self.amplitudes.iter().cloned());
        out.push(Rational::zero());
        out
    }

    /// True when region `i` (1-based) holds exactly one sample in every
    /// observation.
    pub fn always_single(&self, i: usize) -> bool {
        self.patterns.iter().all(|p| p.eta(i) == 1)
    }

    /// True when region `i` holds more than one sample in some observation.
    pub fn sometimes_multiple(&self, i: usize) -> bool {
        self.patterns.iter().any(|p| p.eta(i) > 1)
    }

    /// The same observations read right to left.
    pub fn reversed(&self) -> ObservationSet {
        ObservationSet {
            patterns: self
                .patterns
                .iter()
                .map(SamplingPattern::reversed)
                .collect(),
            amplitudes: self.amplitudes.iter().rev().cloned().collect(),
        }
    }
}

/// Set of values of the count sum between discontinuities `l` and `i`
/// across all observations: `η_{i+1} + .. + η_l` for `i < l`, or
/// `η_{l+1} + .. + η_i` for `i > l`.
pub fn cumulative_values(
    obs: &ObservationSet,
    l: usize,
    i: usize,
) -> Result<BTreeSet<i64>, InferenceError> {
    let m = obs.m();
    if l > m || i > m {
        return Err(InferenceError::ReferenceOutOfRange { l: l.max(i), m });
    }
    assert_ne!(i, l, "the reference discontinuity has no count sum");
    let (a, b) = if i < l { (i + 1, l) } else { (l + 1, i) };
    let values: BTreeSet<i64> = obs.patterns.iter().map(|p| p.range_sum(a, b)).collect();
    let consistent = match values.len() {
        1 => true,
        2 => {
            let lo = *values.first().unwrap();
            let hi = *values.last().unwrap();
            hi == lo + 1
        }
        _ => false,
    };
    if !consistent {
        return Err(InferenceError::Inconsistent {
            l,
            i,
            values: values.into_iter().collect(),
        });
    }
    Ok(values)
}

/// Open interval `(lo, hi)` in units of `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn width(&self) -> i64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        *x > int(self.lo) && *x < int(self.hi)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainDirection {
    /// Right of the reference: anchor is the leftmost member.
    Plus,
    /// Left of the reference: anchor is the rightmost member.
    Minus,
}

/// A run of width-`2T` discontinuities linked by regions that hold one
/// sample in every observation (and hence have length between `T` and `2T`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub direction: ChainDirection,
    /// `t_j`.
    pub anchor: usize,
    /// `λ_j`.
    pub lambda: usize,
    /// `B_j`: number of cells strictly between the two boundary cells, plus one.
    pub b: i64,
}

impl Chain {
    /// `V_j` in increasing index order.
    pub fn members(&self) -> Vec<usize> {
        match self.direction {
            ChainDirection::Plus => (self.anchor..=self.anchor + self.lambda).collect(),
            ChainDirection::Minus => (self.anchor - self.lambda..=self.anchor).collect(),
        }
    }

    /// Lowest and highest discontinuity index in the chain.
    pub fn bounds(&self) -> (usize, usize) {
        match self.direction {
            ChainDirection::Plus => (self.anchor, self.anchor + self.lambda),
            ChainDirection::Minus => (self.anchor - self.lambda, self.anchor),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChainStructure {
    /// Chains right of the reference, anchors increasing.
    pub plus: Vec<Chain>,
    /// Chains left of the reference, anchors decreasing.
    pub minus: Vec<Chain>,
    /// Width-`2T` discontinuities outside every chain.
    pub v: BTreeSet<usize>,
}

impl ChainStructure {
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }

    pub fn chains(&self) -> impl Iterator<Item = &Chain> {
        self.plus.iter().chain(self.minus.iter())
    }

    pub fn in_chain(&self, i: usize) -> bool {
        self.chains().any(|c| {
            let (lo, hi) = c.bounds();
            (lo..=hi).contains(&i)
        })
    }
}

/// What a set of observations says about every discontinuity, relative to
/// reference index `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncertaintyModel {
    pub l: usize,
    /// `C_0 .. C_m`, with `C_l = 0`.
    pub c: Vec<i64>,
    /// Indices known only to within `2T`.
    pub uncertain: BTreeSet<usize>,
    /// `(G_{i,L}, G_{i,R})` for each `i`; the reference entry is `(0, 0)`.
    pub intervals: Vec<Interval>,
    pub chains: ChainStructure,
}

impl UncertaintyModel {
    pub fn m(&self) -> usize {
        self.c.len() - 1
    }

    /// `U^c`, which includes `l`.
    pub fn known(&self) -> BTreeSet<usize> {
        (0..=self.m())
            .filter(|i| !self.uncertain.contains(i))
            .collect()
    }

    pub fn is_full(&self) -> bool {
        self.uncertain.is_empty()
    }

    /// Interval widths in units of `T`, reference entry included as 0.
    pub fn widths(&self) -> Vec<i64> {
        self.intervals.iter().map(Interval::width).collect()
    }

    pub fn span(&self) -> Interval {
        Interval {
            lo: self.intervals[0].lo,
            hi: self.intervals[self.m()].hi,
        }
    }
}

/// Builds the uncertainty model for reference index `l`.
pub fn infer_model(obs: &ObservationSet, l: usize) -> Result<UncertaintyModel, InferenceError> {
    let m = obs.m();
    if l > m {
        return Err(InferenceError::ReferenceOutOfRange { l, m });
    }
    let mut c = vec![0i64; m + 1];
    let mut uncertain = BTreeSet::new();
    let mut intervals = vec![Interval { lo: 0, hi: 0 }; m + 1];
    for i in (0..=m).filter(|&i| i != l) {
        let values = cumulative_values(obs, l, i)?;
        let top = *values.last().unwrap();
        c[i] = top;
        let (lo, hi) = if values.len() == 2 {
            (top - 1, top)
        } else {
            uncertain.insert(i);
            (top - 1, top + 1)
        };
        intervals[i] = if i > l {
            Interval { lo, hi }
        } else {
            Interval { lo: -hi, hi: -lo }
        };
    }
    let chains = chain_analysis(obs, l, &uncertain, &intervals);
    Ok(UncertaintyModel {
        l,
        c,
        uncertain,
        intervals,
        chains,
    })
}

/// Groups width-`2T` discontinuities into chains coupled through regions
/// that contain a single sample in every observation.
pub fn chain_analysis(
    obs: &ObservationSet,
    l: usize,
    uncertain: &BTreeSet<usize>,
    intervals: &[Interval],
) -> ChainStructure {
    let m = obs.m();
    let in_u = |i: usize| uncertain.contains(&i);
    let mut plus = Vec::new();
    let mut i = l + 1;
    while i < m {
        let anchor_ok =
            in_u(i) && in_u(i + 1) && obs.sometimes_multiple(i) && obs.always_single(i + 1);
        if !anchor_ok {
            i += 1;
            continue;
        }
        let mut lambda = 1;
        while i + lambda < m && obs.always_single(i + lambda + 1) {
            lambda += 1;
        }
        let b = intervals[i + lambda].hi - intervals[i].lo - 1;
        plus.push(Chain {
            direction: ChainDirection::Plus,
            anchor: i,
            lambda,
            b,
        });
        i += lambda + 1;
    }

    let mut minus = Vec::new();
    let mut i = l.saturating_sub(1);
    while i >= 1 {
        let anchor_ok =
            in_u(i) && in_u(i - 1) && obs.sometimes_multiple(i + 1) && obs.always_single(i);
        if !anchor_ok {
            i -= 1;
            continue;
        }
        let mut lambda = 1;
        while i + 1 - lambda > 1 && obs.always_single(i - lambda) {
            lambda += 1;
        }
        let b = intervals[i].hi - intervals[i - lambda].lo - 1;
        minus.push(Chain {
            direction: ChainDirection::Minus,
            anchor: i,
            lambda,
            b,
        });
        if i < lambda + 1 {
            break;
        }
        i -= lambda + 1;
    }

    let mut structure = ChainStructure {
        plus,
        minus,
        v: BTreeSet::new(),
    };
    structure.v = uncertain
        .iter()
        .copied()
        .filter(|&i| !structure.in_chain(i))
        .collect();
    structure
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::sampler::enumerate_atlas;
    use crate::signal::{Region, SignalSpec};

    fn p(v: &[u32]) -> SamplingPattern {
        SamplingPattern(v.to_vec())
    }

    fn running_obs() -> ObservationSet {
        ObservationSet::new(
            vec![p(&[2, 3]), p(&[2, 2]), p(&[1, 3])],
            vec![int(4), int(2)],
        )
        .unwrap()
    }

    fn two_patterns(eta1: u32, eta2: u32, n3: u32) -> ObservationSet {
        ObservationSet::new(
            vec![p(&[eta1, eta2, n3]), p(&[eta1, eta2, n3 - 1])],
            vec![int(3), int(1), int(2)],
        )
        .unwrap()
    }

    #[test]
    fn cumulative_sum_sets() {
        let obs = running_obs();
        assert_eq!(
            cumulative_values(&obs, 0, 1).unwrap(),
            BTreeSet::from([1, 2])
        );
        assert_eq!(
            cumulative_values(&obs, 0, 2).unwrap(),
            BTreeSet::from([4, 5])
        );
        assert_eq!(
            cumulative_values(&obs, 2, 0).unwrap(),
            BTreeSet::from([4, 5])
        );
        let ex = two_patterns(3, 2, 4);
        assert_eq!(cumulative_values(&ex, 0, 1).unwrap(), BTreeSet::from([3]));
    }

    #[test]
    fn inconsistent_sets_are_rejected() {
        let obs = ObservationSet::new(vec![p(&[2, 3]), p(&[4, 3])], vec![int(1), int(2)]).unwrap();
        assert!(matches!(
            cumulative_values(&obs, 0, 1),
            Err(InferenceError::Inconsistent { .. })
        ));
        let obs = ObservationSet::new(
            vec![p(&[2, 3]), p(&[3, 3]), p(&[4, 3])],
            vec![int(1), int(2)],
        )
        .unwrap();
        assert!(matches!(
            infer_model(&obs, 0),
            Err(InferenceError::Inconsistent { l: 0, i: 1, .. })
        ));
    }

    #[test]
    fn observation_set_validation() {
        assert_eq!(
            ObservationSet::new(vec![], vec![int(1)]),
            Err(InferenceError::Empty)
        );
        assert!(matches!(
            ObservationSet::new(vec![p(&[2, 2]), p(&[2])], vec![int(1), int(2)]),
            Err(InferenceError::LengthMismatch { .. })
        ));
        assert!(matches!(
            ObservationSet::new(vec![p(&[2, 2]), p(&[2, 2])], vec![int(1), int(2)]),
            Err(InferenceError::Duplicate(_))
        ));
        assert!(matches!(
            ObservationSet::new(vec![p(&[2, 0])], vec![int(1), int(2)]),
            Err(InferenceError::ZeroCount(_))
        ));
        assert!(matches!(
            ObservationSet::new(vec![p(&[2, 2])], vec![int(1)]),
            Err(InferenceError::AmplitudeCount { .. })
        ));
    }

    #[test]
    fn full_atlas_running_example() {
        let spec = SignalSpec::unit(vec![
            Region::new(int(4), 2, rat(1, 4)),
            Region::new(int(2), 3, rat(1, 2)),
        ])
        .unwrap();
        let obs = ObservationSet::from_atlas(&enumerate_atlas(&spec).unwrap(), spec.amplitudes());
        let model = infer_model(&obs, 0).unwrap();
        assert_eq!(model.c, vec![0, 2, 5]);
        assert!(model.uncertain.is_empty());
        assert_eq!(model.intervals[1], Interval { lo: 1, hi: 2 });
        assert_eq!(model.intervals[2], Interval { lo: 4, hi: 5 });
        let d = spec.translation(0).positions;
        assert!(model.intervals[1].contains(&d[1]));
        assert!(model.intervals[2].contains(&d[2]));
        assert!(model.chains.is_empty() && model.chains.v.is_empty());
    }

    #[test]
    fn widths_depend_on_reference() {
        let obs = two_patterns(3, 2, 4);
        let left = infer_model(&obs, 0).unwrap();
        assert_eq!(left.widths(), vec![0, 2, 2, 1]);
        assert_eq!(left.uncertain, BTreeSet::from([1, 2]));
        assert_eq!(left.chains.v, BTreeSet::from([1, 2]));
        let right = infer_model(&obs, 3).unwrap();
        assert_eq!(right.widths(), vec![1, 1, 1, 0]);
        assert!(right.uncertain.is_empty());
    }

    #[test]
    fn single_pattern_chain() {
        let obs = ObservationSet::new(vec![p(&[3, 1])], vec![int(4), int(2)]).unwrap();
        let model = infer_model(&obs, 0).unwrap();
        assert_eq!(model.c, vec![0, 3, 4]);
        assert_eq!(model.uncertain, BTreeSet::from([1, 2]));
        assert_eq!(model.intervals[1], Interval { lo: 2, hi: 4 });
        assert_eq!(model.intervals[2], Interval { lo: 3, hi: 5 });
        assert_eq!(
            model.chains.plus,
            vec![Chain {
                direction: ChainDirection::Plus,
                anchor: 1,
                lambda: 1,
                b: 2
            }]
        );
        assert!(model.chains.minus.is_empty());
        assert!(model.chains.v.is_empty());
        assert_eq!(model.chains.plus[0].members(), vec![1, 2]);
    }

    #[test]
    fn mirrored_chain() {
        let obs = ObservationSet::new(vec![p(&[1, 3])], vec![int(2), int(4)]).unwrap();
        let model = infer_model(&obs, 2).unwrap();
        assert_eq!(model.intervals[0], Interval { lo: -5, hi: -3 });
        assert_eq!(model.intervals[1], Interval { lo: -4, hi: -2 });
        assert_eq!(
            model.chains.minus,
            vec![Chain {
                direction: ChainDirection::Minus,
                anchor: 1,
                lambda: 1,
                b: 2
            }]
        );
        assert_eq!(model.chains.minus[0].members(), vec![0, 1]);
    }

    #[test]
    fn longer_chain_and_termination() {
        // regions 2, 3 always single; region 4 sometimes double
        let obs = ObservationSet::new(
            vec![p(&[3, 1, 1, 2]), p(&[3, 1, 1, 3])],
            vec![int(1), int(2), int(3), int(4)],
        )
        .unwrap();
        let model = infer_model(&obs, 0).unwrap();
        assert_eq!(model.uncertain, BTreeSet::from([1, 2, 3]));
        assert_eq!(model.chains.plus.len(), 1);
        let chain = &model.chains.plus[0];
        assert_eq!((chain.anchor, chain.lambda), (1, 2));
        assert_eq!(chain.b, 3);
        assert!(model.chains.v.is_empty());
        assert_eq!(model.widths(), vec![0, 2, 2, 2, 1]);
    }
}
