//! Sample counting on a uniform grid and enumeration of every achievable
//! count pattern.
//!
//! The grid offset is parameterised by `Δ_1 ∈ [0, 1)`, the distance from the
//! left end of the support to the first sample inside it. Every downstream
//! offset `Δ_i` is a function of `Δ_1`, so the cells of [`PatternAtlas`]
//! cover all grid positions.

use std::fmt;

use num_traits::{One, Zero};

use crate::rational::{floor_i64, frac, int, Rational};
use crate::signal::SignalSpec;

/// Per-region sample counts `(η_1, .., η_m)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SamplingPattern(pub Vec<u32>);

impl SamplingPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `η_i`, 1-based.
    pub fn eta(&self, i: usize) -> u32 {
        self.0[i - 1]
    }

    /// `η_a + .. + η_b` (1-based, inclusive); zero when `a > b`.
    pub fn range_sum(&self, a: usize, b: usize) -> i64 {
        if a > b {
            return 0;
        }
        self.0[a - 1..b].iter().map(|&e| e as i64).sum()
    }

    pub fn reversed(&self) -> SamplingPattern {
        SamplingPattern(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for SamplingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplerError {
    #[error("IndexError: regions {i}..={end} exceed m={m}", end = i + k)]
    Index { i: usize, k: usize, m: usize },
    #[error("GenericityViolation: count thresholds at k={a} and k={b} coincide")]
    CoincidentThresholds { a: usize, b: usize },
}

/// Counts the samples `delta1 + k` (`k >= 0`) falling in each region by
/// direct comparison against the region endpoints.
pub fn count_direct(spec: &SignalSpec, delta1: &Rational) -> SamplingPattern {
    assert!(
        *delta1 >= Rational::zero() && *delta1 < Rational::one(),
        "delta1 must lie in [0, 1)"
    );
    let ends = spec.translation(0).positions;
    let mut counts = vec![0u32; spec.m()];
    let mut sample = delta1.clone();
    let mut region = 0usize;
    let last = &ends[spec.m()];
    while sample < *last {
        while sample >= ends[region + 1] {
            region += 1;
        }
        counts[region] += 1;
        sample += Rational::one();
    }
    SamplingPattern(counts)
}

/// `κ(i, K) = ⌊f_i + .. + f_{i+K}⌋` and `d_{i,K} = n_i + .. + n_{i+K} − κ`.
pub fn kappa_d(spec: &SignalSpec, i: usize, k: usize) -> Result<(i64, i64), SamplerError> {
    check_span(spec, i, k)?;
    let (f_sum, n_sum) = span_sums(spec, i, k);
    let kappa = floor_i64(&f_sum);
    Ok((kappa, n_sum - kappa))
}

/// `Δ_i` value at and above which the cumulative count over regions
/// `i..=i+K` drops from `d` to `d − 1`: `1 + κ − Σf`.
pub fn count_threshold(spec: &SignalSpec, i: usize, k: usize) -> Result<Rational, SamplerError> {
    check_span(spec, i, k)?;
    let (f_sum, _) = span_sums(spec, i, k);
    Ok(Rational::one() - frac(&f_sum))
}

/// Closed-form number of samples over regions `i..=i+K` when the first
/// sample in region `i` sits `delta_i` after its left end.
pub fn cumulative_count(
    spec: &SignalSpec,
    i: usize,
    k: usize,
    delta_i: &Rational,
) -> Result<i64, SamplerError> {
    let (_, d) = kappa_d(spec, i, k)?;
    let threshold = count_threshold(spec, i, k)?;
    Ok(if *delta_i < threshold { d } else { d - 1 })
}

/// `Δ_1 .. Δ_m` for a given `Δ_1`; `Δ_{i+1} = (Δ_i + f_i) mod 1`.
pub fn delta_chain(spec: &SignalSpec, delta1: &Rational) -> Vec<Rational> {
    let mut out = Vec::with_capacity(spec.m());
    let mut delta = delta1.clone();
    for r in spec.regions() {
        out.push(delta.clone());
        delta = frac(&(delta + &r.f));
    }
    out
}

fn check_span(spec: &SignalSpec, i: usize, k: usize) -> Result<(), SamplerError> {
    if i == 0 || i + k > spec.m() {
        return Err(SamplerError::Index { i, k, m: spec.m() });
    }
    Ok(())
}

fn span_sums(spec: &SignalSpec, i: usize, k: usize) -> (Rational, i64) {
    let regions = &spec.regions()[i - 1..i + k];
    let f_sum: Rational = regions.iter().map(|r| r.f.clone()).sum();
    let n_sum = regions.iter().map(|r| r.n as i64).sum();
    (f_sum, n_sum)
}

/// One subinterval `[lo, hi)` of `Δ_1` values sharing a count pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtlasCell {
    pub lo: Rational,
    pub hi: Rational,
    pub pattern: SamplingPattern,
}

/// All `m + 1` patterns, ordered by `Δ_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternAtlas {
    pub cells: Vec<AtlasCell>,
}

impl PatternAtlas {
    pub fn patterns(&self) -> Vec<SamplingPattern> {
        self.cells.iter().map(|c| c.pattern.clone()).collect()
    }

    pub fn contains(&self, pattern: &SamplingPattern) -> bool {
        self.cells.iter().any(|c| &c.pattern == pattern)
    }

    /// Pattern for grid offset `delta1`.
    pub fn lookup(&self, delta1: &Rational) -> Option<&SamplingPattern> {
        self.cells
            .iter()
            .find(|c| c.lo <= *delta1 && *delta1 < c.hi)
            .map(|c| &c.pattern)
    }
}

/// Splits `[0, 1)` at the `m` thresholds of the cumulative counts from
/// region 1 and reads one pattern per piece.
pub fn enumerate_atlas(spec: &SignalSpec) -> Result<PatternAtlas, SamplerError> {
    let m = spec.m();
    let mut thresholds: Vec<(Rational, usize)> = Vec::with_capacity(m);
    let mut full_counts = Vec::with_capacity(m);
    for k in 1..=m {
        thresholds.push((count_threshold(spec, 1, k - 1)?, k));
        full_counts.push(kappa_d(spec, 1, k - 1)?.1);
    }
    thresholds.sort();
    for pair in thresholds.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(SamplerError::CoincidentThresholds {
                a: pair[0].1.min(pair[1].1),
                b: pair[0].1.max(pair[1].1),
            });
        }
    }
    debug_assert!(thresholds
        .iter()
        .all(|(t, _)| *t > Rational::zero() && *t < Rational::one()));

    // Start left of every threshold: all cumulative counts at their maximum.
    let mut cumulative = full_counts.clone();
    let mut lo = Rational::zero();
    let mut cells = Vec::with_capacity(m + 1);
    for (threshold, k) in thresholds.into_iter().chain(std::iter::once((int(1), 0))) {
        cells.push(AtlasCell {
            lo: lo.clone(),
            hi: threshold.clone(),
            pattern: difference(&cumulative),
        });
        if k > 0 {
            cumulative[k - 1] -= 1;
        }
        lo = threshold;
    }
    Ok(PatternAtlas { cells })
}

fn difference(cumulative: &[i64]) -> SamplingPattern {
    let mut prev = 0;
    SamplingPattern(
        cumulative
            .iter()
            .map(|&c| {
                let eta = c - prev;
                prev = c;
                u32::try_from(eta).expect("negative sample count")
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::signal::Region;

    fn running() -> SignalSpec {
        SignalSpec::unit(vec![
            Region::new(int(4), 2, rat(1, 4)),
            Region::new(int(2), 3, rat(1, 2)),
        ])
        .unwrap()
    }

    fn p(v: &[u32]) -> SamplingPattern {
        SamplingPattern(v.to_vec())
    }

    #[test]
    fn direct_counts() {
        let spec = running();
        assert_eq!(count_direct(&spec, &rat(1, 10)), p(&[2, 3]));
        assert_eq!(count_direct(&spec, &rat(3, 10)), p(&[2, 2]));
        assert_eq!(count_direct(&spec, &rat(4, 5)), p(&[1, 3]));
        // sample exactly on the region boundary belongs to the right region
        assert_eq!(count_direct(&spec, &rat(3, 4)), p(&[1, 3]));
    }

    #[test]
    fn kappa_and_d() {
        let spec = running();
        assert_eq!(kappa_d(&spec, 1, 1).unwrap(), (0, 5));
        assert_eq!(kappa_d(&spec, 1, 0).unwrap(), (0, 2));
        let wide = SignalSpec::unit(vec![
            Region::new(int(1), 4, rat(3, 5)),
            Region::new(int(2), 3, rat(3, 5)),
        ])
        .unwrap();
        assert_eq!(kappa_d(&wide, 1, 1).unwrap(), (1, 6));
        assert_eq!(
            kappa_d(&spec, 2, 1),
            Err(SamplerError::Index { i: 2, k: 1, m: 2 })
        );
        assert!(kappa_d(&spec, 0, 0).is_err());
    }

    #[test]
    fn cumulative_counts_and_tie_convention() {
        let spec = running();
        assert_eq!(cumulative_count(&spec, 1, 1, &rat(1, 10)).unwrap(), 5);
        assert_eq!(cumulative_count(&spec, 1, 1, &rat(3, 10)).unwrap(), 4);
        assert_eq!(cumulative_count(&spec, 1, 1, &rat(1, 4)).unwrap(), 4);
        assert_eq!(cumulative_count(&spec, 1, 0, &rat(3, 4)).unwrap(), 1);
        assert_eq!(cumulative_count(&spec, 1, 0, &rat(74, 100)).unwrap(), 2);
    }

    #[test]
    fn running_atlas() {
        let atlas = enumerate_atlas(&running()).unwrap();
        let expected = vec![
            (int(0), rat(1, 4), p(&[2, 3])),
            (rat(1, 4), rat(3, 4), p(&[2, 2])),
            (rat(3, 4), int(1), p(&[1, 3])),
        ];
        let got: Vec<_> = atlas
            .cells
            .iter()
            .map(|c| (c.lo.clone(), c.hi.clone(), c.pattern.clone()))
            .collect();
        assert_eq!(got, expected);
        assert_eq!(atlas.lookup(&rat(1, 2)), Some(&p(&[2, 2])));
    }

    #[test]
    fn single_region_atlas() {
        let spec = SignalSpec::unit(vec![Region::new(int(5), 3, rat(1, 2))]).unwrap();
        let atlas = enumerate_atlas(&spec).unwrap();
        assert_eq!(atlas.patterns(), vec![p(&[3]), p(&[2])]);
        assert_eq!(atlas.cells[0].hi, rat(1, 2));
    }

    #[test]
    fn delta_chain_matches_direct_offset() {
        let spec = running();
        let chain = delta_chain(&spec, &rat(1, 10));
        assert_eq!(chain, vec![rat(1, 10), rat(7, 20)]);
        assert_eq!(delta_chain(&spec, &int(0))[0], int(0));
    }

    #[test]
    fn pattern_sums() {
        let pat = p(&[3, 1, 4]);
        assert_eq!(pat.range_sum(1, 3), 8);
        assert_eq!(pat.range_sum(2, 2), 1);
        assert_eq!(pat.range_sum(3, 2), 0);
        assert_eq!(pat.to_string(), "(3,1,4)");
    }
}
