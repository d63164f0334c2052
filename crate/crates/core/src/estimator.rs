//! Minimax estimates of a translated signal from its uncertainty model.
//!
//! The estimate is constant on every grid cell `(n - 1, n)` (units of `T`).
//! Cells between localized discontinuities carry the known amplitude,
//! cells inside a localization interval carry the midpoint of the two
//! amplitudes that can occur there, and cells inside a chain carry the
//! midpoint of the smallest and largest of the three amplitudes that can
//! occur there.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::inference::{Chain, ChainDirection, Interval, UncertaintyModel};
use crate::rational::{int, Rational};
use crate::signal::PiecewiseFunction;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EstimatorError {
    #[error("PartialObservations: discontinuities {0:?} are only known to within 2T")]
    PartialObservations(Vec<usize>),
    #[error("{got} amplitudes supplied for {m} regions")]
    AmplitudeCount { got: usize, m: usize },
    #[error("{got} per-interval constants supplied, expected {expected}")]
    ConstantCount { got: usize, expected: usize },
}

/// Why a cell holds the value it does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// The signal is known on the cell: amplitude `g_region`.
    Known { region: usize },
    /// Inside the localization interval of discontinuity `index`.
    Midpoint { index: usize },
    /// Inside a chain; the cell can hold any of three consecutive amplitudes.
    ChainInterior { anchor: usize, regions: [usize; 3] },
    /// Not covered by any rule (overlapping intervals): centre of the
    /// amplitudes that can occur on the cell.
    Fallback { regions: Vec<usize> },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Known { .. } => "known",
            Provenance::Midpoint { .. } => "midpoint",
            Provenance::ChainInterior { .. } => "chainInterior",
            Provenance::Fallback { .. } => "fallback",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            Provenance::Known { region } => format!("g_{region}"),
            Provenance::Midpoint { index } => format!("D_{index}"),
            Provenance::ChainInterior { anchor, regions } => format!(
                "t={anchor}:g_{},g_{},g_{}",
                regions[0], regions[1], regions[2]
            ),
            Provenance::Fallback { regions } => {
                let names: Vec<String> = regions.iter().map(|r| format!("g_{r}")).collect();
                names.join(",")
            }
        }
    }
}

/// Value on the unit cell `(lo, lo + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimateCell {
    pub lo: i64,
    pub value: Rational,
    pub provenance: Provenance,
}

impl EstimateCell {
    pub fn hi(&self) -> i64 {
        self.lo + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimate {
    pub l: usize,
    /// `[G_{0,L}, G_{m,R}]`; the estimate is zero outside.
    pub span: Interval,
    pub cells: Vec<EstimateCell>,
    /// Cells claimed by more than one rule; the first claim is kept.
    pub conflicts: Vec<i64>,
    /// Values at the integers `span.lo ..= span.hi`.
    point_values: Vec<Rational>,
    function: PiecewiseFunction,
}

impl Estimate {
    /// The per-cell constants `γ_n`.
    pub fn gamma(&self) -> Vec<Rational> {
        self.cells.iter().map(|c| c.value.clone()).collect()
    }

    /// The estimate as a step function with a breakpoint at every integer
    /// of the span.
    pub fn function(&self) -> &PiecewiseFunction {
        &self.function
    }

    /// Evaluates the estimate, using the closed known spans at integer
    /// points so that grid values match the signal.
    pub fn evaluate(&self, t: &Rational) -> Rational {
        if t.is_integer() && *t >= int(self.span.lo) && *t <= int(self.span.hi) {
            let k = i64::try_from(t.to_integer()).expect("grid point fits in i64") - self.span.lo;
            return self.point_values[k as usize].clone();
        }
        self.function.evaluate(t)
    }

    /// Copy with the value of cell `index` replaced.
    pub fn with_cell_value(&self, index: usize, value: Rational) -> Estimate {
        let mut out = self.clone();
        out.cells[index].value = value;
        out.function = cells_to_function(out.span, &out.cells);
        out
    }

    pub fn cell_index(&self, lo: i64) -> Option<usize> {
        let k = lo - self.span.lo;
        (0..self.cells.len() as i64)
            .contains(&k)
            .then_some(k as usize)
    }
}

fn cells_to_function(span: Interval, cells: &[EstimateCell]) -> PiecewiseFunction {
    PiecewiseFunction::new(
        (span.lo..=span.hi).map(int).collect(),
        cells.iter().map(|c| c.value.clone()).collect(),
    )
}

fn pad(model: &UncertaintyModel, amplitudes: &[Rational]) -> Result<Vec<Rational>, EstimatorError> {
    let m = model.m();
    if amplitudes.len() != m {
        return Err(EstimatorError::AmplitudeCount {
            got: amplitudes.len(),
            m,
        });
    }
    let mut g = Vec::with_capacity(m + 2);
    g.push(Rational::zero());
    g.extend(amplitudes.iter().cloned());
    g.push(Rational::zero());
    Ok(g)
}

fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

/// `(min + max) / 2` of a set of amplitudes.
fn centre<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Rational {
    let values: Vec<&Rational> = values.into_iter().collect();
    let lo = values.iter().copied().min().expect("non-empty");
    let hi = values.iter().copied().max().expect("non-empty");
    midpoint(lo, hi)
}

/// Estimate from the complete pattern set; requires every discontinuity
/// to be localized to within `T`.
pub fn estimate_full(
    model: &UncertaintyModel,
    amplitudes: &[Rational],
) -> Result<Estimate, EstimatorError> {
    if !model.is_full() {
        return Err(EstimatorError::PartialObservations(
            model.uncertain.iter().copied().collect(),
        ));
    }
    estimate_partial(model, amplitudes)
}

struct Builder<'a> {
    span: Interval,
    slots: Vec<Option<(Rational, Provenance)>>,
    conflicts: BTreeSet<i64>,
    g: &'a [Rational],
}

impl Builder<'_> {
    fn assign(&mut self, lo: i64, hi: i64, value: &Rational, provenance: Provenance) {
        for n in lo.max(self.span.lo)..hi.min(self.span.hi) {
            let slot = &mut self.slots[(n - self.span.lo) as usize];
            match slot {
                None => *slot = Some((value.clone(), provenance.clone())),
                Some((existing, _)) if existing != value => {
                    self.conflicts.insert(n);
                }
                Some(_) => {}
            }
        }
    }

    fn chain(&mut self, chain: &Chain, intervals: &[Interval]) {
        let g = self.g;
        let t = chain.anchor;
        match chain.direction {
            ChainDirection::Plus => {
                let start = intervals[t].lo;
                let end = t + chain.lambda;
                let end_hi = intervals[end].hi;
                self.assign(
                    start,
                    start + 1,
                    &midpoint(&g[t], &g[t + 1]),
                    Provenance::Midpoint { index: t },
                );
                self.assign(
                    end_hi - 1,
                    end_hi,
                    &midpoint(&g[end], &g[end + 1]),
                    Provenance::Midpoint { index: end },
                );
                for k in 2..=chain.b {
                    let k_us = k as usize;
                    let regions = [t + k_us - 2, t + k_us - 1, t + k_us];
                    let value = centre(regions.iter().map(|&r| &g[r]));
                    self.assign(
                        start + k - 1,
                        start + k,
                        &value,
                        Provenance::ChainInterior { anchor: t, regions },
                    );
                }
            }
            ChainDirection::Minus => {
                let end = intervals[t].hi;
                let first = t - chain.lambda;
                let first_lo = intervals[first].lo;
                self.assign(
                    end - 1,
                    end,
                    &midpoint(&g[t], &g[t + 1]),
                    Provenance::Midpoint { index: t },
                );
                self.assign(
                    first_lo,
                    first_lo + 1,
                    &midpoint(&g[first], &g[first + 1]),
                    Provenance::Midpoint { index: first },
                );
                for k in 2..=chain.b {
                    let k_us = k as usize;
                    let regions = [t + 1 - k_us, t + 2 - k_us, t + 3 - k_us];
                    let value = centre(regions.iter().map(|&r| &g[r]));
                    self.assign(
                        end - k,
                        end - k + 1,
                        &value,
                        Provenance::ChainInterior { anchor: t, regions },
                    );
                }
            }
        }
    }
}

/// Worst-case-optimal estimate on the grid-cell class for any
/// observation set, full or partial.
pub fn estimate_partial(
    model: &UncertaintyModel,
    amplitudes: &[Rational],
) -> Result<Estimate, EstimatorError> {
    let g = pad(model, amplitudes)?;
    let m = model.m();
    let l = model.l;
    let iv = &model.intervals;
    let span = model.span();
    let known = model.known();
    let chains = &model.chains;

    let mut known_right: BTreeSet<usize> = known.union(&chains.v).copied().collect();
    let mut known_left = known_right.clone();
    for c in &chains.plus {
        known_left.insert(c.anchor);
        known_right.insert(c.anchor + c.lambda);
    }
    for c in &chains.minus {
        known_left.insert(c.anchor - c.lambda);
        known_right.insert(c.anchor);
    }

    let mut b = Builder {
        span,
        slots: vec![None; (span.hi - span.lo) as usize],
        conflicts: BTreeSet::new(),
        g: &g,
    };

    // Closed spans where the signal is known; the span left of the
    // reference is open at zero.
    let mut known_spans: Vec<(i64, i64, bool, usize)> = Vec::new();
    for i in 1..=m {
        if known_right.contains(&(i - 1)) && known_left.contains(&i) {
            let (lo, hi) = (iv[i - 1].hi, iv[i].lo);
            if lo <= hi {
                known_spans.push((lo, hi, i != l, i));
                b.assign(lo, hi, &g[i], Provenance::Known { region: i });
            }
        }
    }

    for &i in known.iter().chain(&chains.v).filter(|&&i| i != l) {
        b.assign(
            iv[i].lo,
            iv[i].hi,
            &midpoint(&g[i], &g[i + 1]),
            Provenance::Midpoint { index: i },
        );
    }
    for chain in chains.chains() {
        b.chain(chain, iv);
    }

    let conflicts: Vec<i64> = b.conflicts.into_iter().collect();
    let cells: Vec<EstimateCell> = b
        .slots
        .into_iter()
        .enumerate()
        .map(|(k, slot)| {
            let lo = span.lo + k as i64;
            let (value, provenance) = slot.unwrap_or_else(|| fallback_cell(model, &g, lo));
            EstimateCell {
                lo,
                value,
                provenance,
            }
        })
        .collect();

    let point_values = (span.lo..=span.hi)
        .map(|x| {
            let hit = known_spans
                .iter()
                .find(|&&(lo, hi, closed, _)| lo <= x && (x < hi || (closed && x == hi)));
            match hit {
                Some(&(_, _, _, region)) => g[region].clone(),
                None if x <= span.lo || x >= span.hi => Rational::zero(),
                None => cells[(x - span.lo) as usize].value.clone(),
            }
        })
        .collect();

    let function = cells_to_function(span, &cells);
    Ok(Estimate {
        l,
        span,
        cells,
        conflicts,
        point_values,
        function,
    })
}

/// Amplitudes that can occur on cell `(lo, lo + 1)` when each
/// discontinuity ranges over its interval independently.
pub fn possible_regions(model: &UncertaintyModel, lo: i64) -> Vec<usize> {
    let iv = &model.intervals;
    (0..=model.m() + 1)
        .filter(|&r| {
            let left_ok = r == 0 || iv[r - 1].lo < lo + 1;
            let right_ok = r == model.m() + 1 || iv[r].hi > lo;
            left_ok && right_ok
        })
        .collect()
}

fn fallback_cell(model: &UncertaintyModel, g: &[Rational], lo: i64) -> (Rational, Provenance) {
    let regions = possible_regions(model, lo);
    let value = centre(regions.iter().map(|&r| &g[r]));
    (value, Provenance::Fallback { regions })
}

/// `((g_i − g_{i+1}) / 2)^2`.
fn half_jump_sq(g: &[Rational], i: usize) -> Rational {
    let h = (&g[i] - &g[i + 1]) / int(2);
    &h * &h
}

/// Outcome of [`closed_form_energy`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedForm {
    /// Worst-case error energy in units of `amplitude^2 · T`.
    Exact(Rational),
    /// Chains couple neighbouring cells; no closed form is known.
    ChainsPresent,
    /// Two localization intervals overlap outside any chain (a
    /// single-sample region next to the reference), so the per-interval
    /// sum does not apply.
    OverlappingIntervals(usize, usize),
}

impl ClosedForm {
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            ClosedForm::Exact(e) => Some(e),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ClosedForm::Exact(e) => crate::rational::format_rational(e),
            ClosedForm::ChainsPresent => "unavailable: chains present".to_string(),
            ClosedForm::OverlappingIntervals(a, b) => {
                format!("unavailable: intervals of D_{a} and D_{b} overlap")
            }
        }
    }
}

/// First pair of non-reference discontinuities whose intervals overlap.
pub fn overlapping_intervals(model: &UncertaintyModel) -> Option<(usize, usize)> {
    let free: Vec<usize> = (0..=model.m()).filter(|&i| i != model.l).collect();
    free.windows(2)
        .map(|w| (w[0], w[1]))
        .find(|&(a, b)| model.intervals[a].overlaps(&model.intervals[b]))
}

/// Worst-case error energy when a closed form exists: always for complete
/// localization, and for partial models whose width-`2T` intervals are
/// disjoint and unchained, where they count twice.
pub fn closed_form_energy(
    model: &UncertaintyModel,
    amplitudes: &[Rational],
) -> Result<ClosedForm, EstimatorError> {
    let g = pad(model, amplitudes)?;
    if !model.chains.is_empty() {
        return Ok(ClosedForm::ChainsPresent);
    }
    if let Some((a, b)) = overlapping_intervals(model) {
        return Ok(ClosedForm::OverlappingIntervals(a, b));
    }
    let mut total = Rational::zero();
    for i in (0..=model.m()).filter(|&i| i != model.l) {
        let weight = if model.uncertain.contains(&i) { 2 } else { 1 };
        total += half_jump_sq(&g, i) * int(weight);
    }
    Ok(ClosedForm::Exact(total))
}

/// Complete-localization energy for reference `l` straight from the
/// amplitudes: `Σ_{i≠l} ((g_i − g_{i+1})/2)^2`.
pub fn full_energy_for_reference(amplitudes: &[Rational], l: usize) -> Rational {
    let mut g = vec![Rational::zero()];
    g.extend(amplitudes.iter().cloned());
    g.push(Rational::zero());
    (0..=amplitudes.len())
        .filter(|&i| i != l)
        .map(|i| half_jump_sq(&g, i))
        .sum()
}

/// Reference index with the smallest complete-localization energy: the
/// largest jump `|g_k − g_{k+1}|`, ties to the smallest `k`.
pub fn best_reference(amplitudes: &[Rational]) -> usize {
    let mut g = vec![Rational::zero()];
    g.extend(amplitudes.iter().cloned());
    g.push(Rational::zero());
    let mut best = 0;
    let mut best_jump = Rational::zero();
    for k in 0..=amplitudes.len() {
        let jump = (&g[k] - &g[k + 1]).abs();
        if jump > best_jump {
            best = k;
            best_jump = jump;
        }
    }
    best
}

/// Worst-case absolute error `Σ_{i≠l} max(|ĝ_i − g_i|, |ĝ_i − g_{i+1}|)`
/// (units of `amplitude · T`) for an estimate that is constant on each
/// width-`T` interval. `constants[i]` is `ĝ_i`; the reference entry is
/// ignored.
pub fn absolute_error_bound(
    model: &UncertaintyModel,
    amplitudes: &[Rational],
    constants: &[Rational],
) -> Result<Rational, EstimatorError> {
    if !model.is_full() {
        return Err(EstimatorError::PartialObservations(
            model.uncertain.iter().copied().collect(),
        ));
    }
    let g = pad(model, amplitudes)?;
    if constants.len() != model.m() + 1 {
        return Err(EstimatorError::ConstantCount {
            got: constants.len(),
            expected: model.m() + 1,
        });
    }
    Ok((0..=model.m())
        .filter(|&i| i != model.l)
        .map(|i| {
            let left = (&constants[i] - &g[i]).abs();
            let right = (&constants[i] - &g[i + 1]).abs();
            left.max(right)
        })
        .sum())
}

/// `ĝ_i = (g_i + g_{i+1}) / 2` for every `i`.
pub fn midpoint_constants(amplitudes: &[Rational]) -> Vec<Rational> {
    let mut g = vec![Rational::zero()];
    g.extend(amplitudes.iter().cloned());
    g.push(Rational::zero());
    (0..=amplitudes.len())
        .map(|i| midpoint(&g[i], &g[i + 1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{infer_model, ObservationSet};
    use crate::rational::rat;
    use crate::sampler::{enumerate_atlas, SamplingPattern};
    use crate::signal::{Region, SignalSpec};

    fn running() -> SignalSpec {
        SignalSpec::unit(vec![
            Region::new(int(4), 2, rat(1, 4)),
            Region::new(int(2), 3, rat(1, 2)),
        ])
        .unwrap()
    }

    fn full_model(spec: &SignalSpec, l: usize) -> UncertaintyModel {
        let obs = ObservationSet::from_atlas(&enumerate_atlas(spec).unwrap(), spec.amplitudes());
        infer_model(&obs, l).unwrap()
    }

    fn values(est: &Estimate) -> Vec<(i64, Rational, &'static str)> {
        est.cells
            .iter()
            .map(|c| (c.lo, c.value.clone(), c.provenance.tag()))
            .collect()
    }

    #[test]
    fn full_estimate_running_example() {
        let spec = running();
        let est = estimate_full(&full_model(&spec, 0), &spec.amplitudes()).unwrap();
        assert_eq!(est.span, Interval { lo: 0, hi: 5 });
        assert_eq!(
            values(&est),
            vec![
                (0, int(4), "known"),
                (1, int(3), "midpoint"),
                (2, int(2), "known"),
                (3, int(2), "known"),
                (4, int(1), "midpoint"),
            ]
        );
        assert!(est.conflicts.is_empty());
        // grid values equal the signal
        let truth = spec.truth_function(0);
        for n in -2..8 {
            assert_eq!(est.evaluate(&int(n)), truth.evaluate(&int(n)), "n={n}");
        }
    }

    #[test]
    fn full_estimate_refuses_partial_models() {
        let obs =
            ObservationSet::new(vec![SamplingPattern(vec![3, 1])], vec![int(4), int(2)]).unwrap();
        let model = infer_model(&obs, 0).unwrap();
        assert_eq!(
            estimate_full(&model, obs.amplitudes()),
            Err(EstimatorError::PartialObservations(vec![1, 2]))
        );
    }

    #[test]
    fn chain_estimate_cells() {
        let obs =
            ObservationSet::new(vec![SamplingPattern(vec![3, 1])], vec![int(4), int(2)]).unwrap();
        let model = infer_model(&obs, 0).unwrap();
        let est = estimate_partial(&model, obs.amplitudes()).unwrap();
        assert_eq!(
            values(&est),
            vec![
                (0, int(4), "known"),
                (1, int(4), "known"),
                (2, int(3), "midpoint"),
                (3, int(2), "chainInterior"),
                (4, int(1), "midpoint"),
            ]
        );
        assert_eq!(
            est.cells[3].provenance,
            Provenance::ChainInterior {
                anchor: 1,
                regions: [1, 2, 3]
            }
        );
        assert_eq!(
            closed_form_energy(&model, obs.amplitudes()).unwrap(),
            ClosedForm::ChainsPresent
        );
    }

    #[test]
    fn mirrored_chain_estimate() {
        let obs =
            ObservationSet::new(vec![SamplingPattern(vec![1, 3])], vec![int(2), int(4)]).unwrap();
        let model = infer_model(&obs, 2).unwrap();
        let est = estimate_partial(&model, obs.amplitudes()).unwrap();
        assert_eq!(
            values(&est),
            vec![
                (-5, int(1), "midpoint"),
                (-4, int(2), "chainInterior"),
                (-3, int(3), "midpoint"),
                (-2, int(4), "known"),
                (-1, int(4), "known"),
            ]
        );
    }

    #[test]
    fn closed_form_energies() {
        let spec = running();
        let g = spec.amplitudes();
        assert_eq!(
            closed_form_energy(&full_model(&spec, 0), &g).unwrap(),
            ClosedForm::Exact(int(2))
        );
        assert_eq!(
            closed_form_energy(&full_model(&spec, 1), &g).unwrap(),
            ClosedForm::Exact(int(5))
        );
        assert_eq!(full_energy_for_reference(&g, 1), int(5));
        assert_eq!(full_energy_for_reference(&g, 2), int(5));
    }

    #[test]
    fn wide_intervals_count_twice_in_energy() {
        let obs = ObservationSet::new(
            vec![
                SamplingPattern(vec![3, 2, 4]),
                SamplingPattern(vec![3, 2, 3]),
            ],
            vec![int(3), int(1), int(2)],
        )
        .unwrap();
        let model = infer_model(&obs, 0).unwrap();
        // U = V = {1, 2}, U^c \ {0} = {3}
        let expected = int(1) + int(2) * (int(1) + rat(1, 4));
        assert_eq!(
            closed_form_energy(&model, obs.amplitudes()).unwrap(),
            ClosedForm::Exact(expected)
        );
        let est = estimate_partial(&model, obs.amplitudes()).unwrap();
        let wide = est
            .cells
            .iter()
            .filter(|c| matches!(c.provenance, Provenance::Midpoint { index: 1 | 2 }))
            .count();
        assert_eq!(wide, 4);
    }

    #[test]
    fn overlapping_wide_intervals_have_no_closed_form() {
        // regions 1 and 2 always hold one sample: (0, 2) and (1, 3) overlap
        let obs = ObservationSet::new(
            vec![SamplingPattern(vec![1, 1, 2, 4, 3])],
            vec![int(1), int(2), int(3), int(4), int(5)],
        )
        .unwrap();
        let model = infer_model(&obs, 0).unwrap();
        assert!(model.chains.is_empty());
        assert_eq!(
            closed_form_energy(&model, obs.amplitudes()).unwrap(),
            ClosedForm::OverlappingIntervals(1, 2)
        );
        let est = estimate_partial(&model, obs.amplitudes()).unwrap();
        assert_eq!(est.conflicts, vec![1]);
    }

    #[test]
    fn best_reference_picks_largest_jump() {
        assert_eq!(best_reference(&[int(4), int(2)]), 0);
        assert_eq!(best_reference(&[int(1), int(5)]), 2);
        assert_eq!(best_reference(&[int(7)]), 0);
        assert_eq!(best_reference(&[int(-7)]), 0);
    }

    #[test]
    fn absolute_error_bounds() {
        let spec = running();
        let g = spec.amplitudes();
        let model = full_model(&spec, 0);
        let mids = midpoint_constants(&g);
        assert_eq!(absolute_error_bound(&model, &g, &mids).unwrap(), int(2));
        let left: Vec<Rational> = (0..=2).map(|i| spec.amplitude(i)).collect();
        assert_eq!(absolute_error_bound(&model, &g, &left).unwrap(), int(4));
        assert!(matches!(
            absolute_error_bound(&model, &g, &mids[..2]),
            Err(EstimatorError::ConstantCount { .. })
        ));
    }
}
