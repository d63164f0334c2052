//! Brute-force checks that do not share code paths with the estimator:
//! exact error integration between step functions and exhaustive search
//! over feasible discontinuity placements.

mod perturb;
mod sweep;

pub use perturb::{
    perturbation_minimax_check, relative_deltas, CellSelection, PerturbationEntry,
    PerturbationReport,
};
pub use sweep::{
    exhaustive_consistency_sweep, Counterexample, SweepCheck, SweepOptions, SweepSummary,
};

use num_traits::{Signed, Zero};

use crate::estimator::Estimate;
use crate::inference::{ChainDirection, Interval, ObservationSet, UncertaintyModel};
use crate::par::{self, Execution};
use crate::rational::{int, rat, Rational};
use crate::signal::PiecewiseFunction;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("EmptyFeasibleSet: no grid placement satisfies the constraints on D_{lo}..=D_{hi}")]
    EmptyFeasibleSet { lo: usize, hi: usize },
    #[error("grid resolution must be at least 2 per T, got {0}")]
    ResolutionTooSmall(u32),
    #[error("joint search over D_{lo}..=D_{hi} exceeds {limit} placements")]
    TooManyPlacements { lo: usize, hi: usize, limit: usize },
    #[error("{got} amplitudes supplied for {m} regions")]
    AmplitudeCount { got: usize, m: usize },
}

/// `∫ (a − b)^2` over the real line, exactly.
pub fn energy_between(a: &PiecewiseFunction, b: &PiecewiseFunction) -> Rational {
    let mut points: Vec<&Rational> = a.breakpoints().iter().chain(b.breakpoints()).collect();
    points.sort();
    points.dedup();
    integrate_sq_diff(a, b, &points)
}

/// `∫_lo^hi (a − b)^2`, exactly.
pub fn energy_between_on(
    a: &PiecewiseFunction,
    b: &PiecewiseFunction,
    lo: &Rational,
    hi: &Rational,
) -> Rational {
    let mut points: Vec<&Rational> = a
        .breakpoints()
        .iter()
        .chain(b.breakpoints())
        .filter(|x| *x > lo && *x < hi)
        .chain([lo, hi])
        .collect();
    points.sort();
    points.dedup();
    integrate_sq_diff(a, b, &points)
}

fn integrate_sq_diff(
    a: &PiecewiseFunction,
    b: &PiecewiseFunction,
    points: &[&Rational],
) -> Rational {
    let mut total = Rational::zero();
    for w in points.windows(2) {
        let diff = a.evaluate(w[0]) - b.evaluate(w[0]);
        if !diff.is_zero() {
            total += &diff * &diff * (w[1] - w[0]);
        }
    }
    total
}

/// `∫ |a − b|` over the real line, exactly.
pub fn abs_error_between(a: &PiecewiseFunction, b: &PiecewiseFunction) -> Rational {
    let mut points: Vec<&Rational> = a.breakpoints().iter().chain(b.breakpoints()).collect();
    points.sort();
    points.dedup();
    points
        .windows(2)
        .map(|w| (a.evaluate(w[0]) - b.evaluate(w[0])).abs() * (w[1] - w[0]))
        .sum()
}

/// Signal with amplitudes `g_1..g_m` and discontinuities at `positions`
/// (`D_0..D_m`, strictly increasing).
pub fn truth_from_positions(amplitudes: &[Rational], positions: &[Rational]) -> PiecewiseFunction {
    PiecewiseFunction::new(positions.to_vec(), amplitudes.to_vec())
}

/// Placements of the discontinuities consistent with an uncertainty model:
/// each `D_i` in its open interval, and `T < D_{k+1} − D_k < 2T` across
/// every region that holds one sample in all observations inside a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleBox {
    pub l: usize,
    pub intervals: Vec<Interval>,
    /// `k` such that region `k + 1` links `D_k` and `D_{k+1}`.
    pub links: Vec<usize>,
}

impl FeasibleBox {
    /// Independent intervals plus the chain spacing constraints.
    pub fn from_model(model: &UncertaintyModel) -> Self {
        let mut links = Vec::new();
        for chain in model.chains.chains() {
            match chain.direction {
                ChainDirection::Plus => links.extend(chain.anchor..chain.anchor + chain.lambda),
                ChainDirection::Minus => links.extend(chain.anchor - chain.lambda..chain.anchor),
            }
        }
        links.sort_unstable();
        FeasibleBox {
            l: model.l,
            intervals: model.intervals.clone(),
            links,
        }
    }

    /// Adds spacing constraints for every region that holds one sample in
    /// every observation, chain or not.
    pub fn with_single_sample_links(mut self, obs: &ObservationSet) -> Self {
        for k in 0..self.m() {
            if obs.always_single(k + 1) && !self.links.contains(&k) {
                self.links.push(k);
            }
        }
        self.links.sort_unstable();
        self
    }

    pub fn m(&self) -> usize {
        self.intervals.len() - 1
    }

    /// Groups of consecutive indices whose placements interact: overlapping
    /// intervals or a spacing link. Each group is returned as `(lo, hi)`.
    pub fn components(&self) -> Vec<(usize, usize)> {
        let free: Vec<usize> = (0..=self.m()).filter(|&i| i != self.l).collect();
        let mut groups: Vec<(usize, usize)> = free.iter().map(|&i| (i, i)).collect();
        loop {
            let mut merged = false;
            let mut out: Vec<(usize, usize)> = Vec::new();
            for g in groups {
                if let Some(last) = out.last_mut() {
                    if self.interact(*last, g) {
                        last.1 = g.1;
                        merged = true;
                        continue;
                    }
                }
                out.push(g);
            }
            groups = out;
            if !merged {
                return groups;
            }
        }
    }

    fn window(&self, (lo, hi): (usize, usize)) -> Interval {
        let members = lo..=hi;
        Interval {
            lo: members.clone().map(|i| self.intervals[i].lo).min().unwrap(),
            hi: members.map(|i| self.intervals[i].hi).max().unwrap(),
        }
    }

    fn interact(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        // groups are adjacent in index order, except across the reference
        if a.1 + 1 != b.0 {
            return false;
        }
        self.window(a).overlaps(&self.window(b)) || self.links.contains(&a.1)
    }

    fn grid(&self, i: usize, resolution: u32) -> Vec<Rational> {
        let iv = self.intervals[i];
        let steps = iv.width() * resolution as i64;
        (1..steps)
            .map(|k| int(iv.lo) + rat(k, resolution as i64))
            .collect()
    }

    fn admissible(&self, prev_index: usize, prev: &Rational, next: &Rational) -> bool {
        if next <= prev {
            return false;
        }
        if self.links.contains(&prev_index) {
            let gap = next - prev;
            return gap > int(1) && gap < int(2);
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Grid points per `T`: placements are `lo + k / resolution`, strictly
    /// inside each interval.
    pub resolution: u32,
    /// Cap on joint placements per component.
    pub max_placements: usize,
    pub execution: Execution,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            resolution: 50,
            max_placements: 2_000_000,
            execution: Execution::default(),
        }
    }
}

impl OracleConfig {
    pub fn with_resolution(resolution: u32) -> Self {
        OracleConfig {
            resolution,
            ..Self::default()
        }
    }
}

/// Search result for one group of interacting discontinuities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentResult {
    pub lo: usize,
    pub hi: usize,
    pub window: Interval,
    pub max: Rational,
    pub min: Rational,
    /// Placement of `D_lo..=D_hi` attaining `max`.
    pub witness: Vec<Rational>,
    pub placements: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorstCase {
    /// Largest error energy over the grid.
    pub value: Rational,
    /// Smallest error energy over the grid.
    pub min: Rational,
    /// Full placement `D_0..D_m` attaining `value`.
    pub witness: Vec<Rational>,
    pub components: Vec<ComponentResult>,
}

impl WorstCase {
    /// True when the error energy does not depend on the placement.
    pub fn is_constant(&self) -> bool {
        self.value == self.min
    }

    pub fn placements(&self) -> usize {
        self.components.iter().map(|c| c.placements).sum()
    }
}

/// Largest error energy of `est` over all grid placements in `fbox`.
///
/// The energy splits into a placement-independent part plus one term per
/// component window, so each component is searched on its own; members of
/// a component are searched jointly.
pub fn worst_case_energy(
    est: &Estimate,
    amplitudes: &[Rational],
    fbox: &FeasibleBox,
    config: &OracleConfig,
) -> Result<WorstCase, OracleError> {
    if config.resolution < 2 {
        return Err(OracleError::ResolutionTooSmall(config.resolution));
    }
    let m = fbox.m();
    if amplitudes.len() != m {
        return Err(OracleError::AmplitudeCount {
            got: amplitudes.len(),
            m,
        });
    }
    let mut g = vec![Rational::zero()];
    g.extend(amplitudes.iter().cloned());
    g.push(Rational::zero());

    let estimate = est.function();
    let mut components = Vec::new();
    for group in fbox.components() {
        components.push(search_component(estimate, &g, fbox, group, config)?);
    }

    let mut witness = vec![Rational::zero(); m + 1];
    for c in &components {
        for (k, d) in c.witness.iter().enumerate() {
            witness[c.lo + k] = d.clone();
        }
    }
    let truth = truth_from_positions(amplitudes, &witness);
    let value = energy_between(&truth, estimate);
    let spread: Rational = components.iter().map(|c| &c.max - &c.min).sum();
    let min = &value - spread;
    Ok(WorstCase {
        value,
        min,
        witness,
        components,
    })
}

struct Extremes {
    max: Rational,
    min: Rational,
    witness: Vec<Rational>,
    count: usize,
}

impl Extremes {
    fn merge(self, other: Extremes) -> Extremes {
        let (max, witness) = if other.max > self.max {
            (other.max, other.witness)
        } else {
            (self.max, self.witness)
        };
        Extremes {
            max,
            witness,
            min: self.min.min(other.min),
            count: self.count + other.count,
        }
    }
}

fn search_component(
    estimate: &PiecewiseFunction,
    g: &[Rational],
    fbox: &FeasibleBox,
    (lo, hi): (usize, usize),
    config: &OracleConfig,
) -> Result<ComponentResult, OracleError> {
    let window = fbox.window((lo, hi));
    let grids: Vec<Vec<Rational>> = (lo..=hi).map(|i| fbox.grid(i, config.resolution)).collect();
    // a linked member has fewer than `resolution` admissible positions per
    // placement of its predecessor
    let estimated: usize = grids
        .iter()
        .enumerate()
        .map(|(k, grid)| {
            if k > 0 && fbox.links.contains(&(lo + k - 1)) {
                grid.len().min(config.resolution as usize)
            } else {
                grid.len()
            }
        })
        .fold(1usize, |acc, n| acc.saturating_mul(n));
    if estimated > config.max_placements {
        return Err(OracleError::TooManyPlacements {
            lo,
            hi,
            limit: config.max_placements,
        });
    }
    let wlo = int(window.lo);
    let whi = int(window.hi);
    let values: Vec<Rational> = g[lo..=hi + 1].to_vec();

    let evaluate = |placement: &[Rational]| -> Rational {
        let mut breakpoints = Vec::with_capacity(placement.len() + 2);
        breakpoints.push(wlo.clone());
        breakpoints.extend(placement.iter().cloned());
        breakpoints.push(whi.clone());
        let truth = PiecewiseFunction::new(breakpoints, values.clone());
        energy_between_on(&truth, estimate, &wlo, &whi)
    };

    let firsts = &grids[0];
    let partials = par::map(config.execution, firsts, |first| {
        let mut best: Option<Extremes> = None;
        let mut placement = vec![first.clone()];
        enumerate(fbox, lo, &grids, &mut placement, &mut |p| {
            let e = evaluate(p);
            let this = Extremes {
                max: e.clone(),
                min: e,
                witness: p.to_vec(),
                count: 1,
            };
            best = Some(match best.take() {
                Some(b) => b.merge(this),
                None => this,
            });
        });
        best
    });
    let total = partials
        .into_iter()
        .flatten()
        .reduce(Extremes::merge)
        .ok_or(OracleError::EmptyFeasibleSet { lo, hi })?;
    Ok(ComponentResult {
        lo,
        hi,
        window,
        max: total.max,
        min: total.min,
        witness: total.witness,
        placements: total.count,
    })
}

fn enumerate(
    fbox: &FeasibleBox,
    lo: usize,
    grids: &[Vec<Rational>],
    placement: &mut Vec<Rational>,
    visit: &mut dyn FnMut(&[Rational]),
) {
    let depth = placement.len();
    if depth == grids.len() {
        visit(placement);
        return;
    }
    let prev_index = lo + depth - 1;
    for candidate in &grids[depth] {
        if fbox.admissible(prev_index, &placement[depth - 1], candidate) {
            placement.push(candidate.clone());
            enumerate(fbox, lo, grids, placement, visit);
            placement.pop();
        }
    }
}

/// Error energy at one explicit placement `D_0..D_m`.
pub fn energy_at(est: &Estimate, amplitudes: &[Rational], positions: &[Rational]) -> Rational {
    energy_between(&truth_from_positions(amplitudes, positions), est.function())
}
