use std::collections::BTreeSet;
use std::fmt;

use super::{worst_case_energy, FeasibleBox, OracleConfig};
use crate::estimator::{best_reference, closed_form_energy, estimate_full};
use crate::inference::{infer_model, ObservationSet};
use crate::par::{self, Execution};
use crate::random::{random_specs, RandomSpecParams};
use crate::rational::{int, rat, Rational};
use crate::sampler::{count_direct, count_threshold, delta_chain, enumerate_atlas, kappa_d};
use crate::signal::SignalSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepCheck {
    AtlasCardinality,
    CountFormula,
    FullAtlasRoundTrip,
    GridAgreement,
    ReferenceSweep,
    MinimaxEquality,
}

impl SweepCheck {
    pub const ALL: [SweepCheck; 6] = [
        SweepCheck::AtlasCardinality,
        SweepCheck::CountFormula,
        SweepCheck::FullAtlasRoundTrip,
        SweepCheck::GridAgreement,
        SweepCheck::ReferenceSweep,
        SweepCheck::MinimaxEquality,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepCheck::AtlasCardinality => "atlas-cardinality",
            SweepCheck::CountFormula => "count-formula",
            SweepCheck::FullAtlasRoundTrip => "full-atlas-round-trip",
            SweepCheck::GridAgreement => "grid-agreement",
            SweepCheck::ReferenceSweep => "reference-sweep",
            SweepCheck::MinimaxEquality => "minimax-equality",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOptions {
    pub params: RandomSpecParams,
    pub trials: usize,
    pub seed: u64,
    /// Offsets `k / delta_grid`, `k = 0..delta_grid`, for the count check.
    pub delta_grid: u32,
    /// Also run the grid-search minimax equality per reference index;
    /// `None` skips it.
    pub oracle_resolution: Option<u32>,
    pub execution: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            params: RandomSpecParams::default(),
            trials: 100,
            seed: 7,
            delta_grid: 1000,
            oracle_resolution: None,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub trial: usize,
    pub check: SweepCheck,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trial {} [{}]: {}",
            self.trial,
            self.check.name(),
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSummary {
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    /// Checks run per trial (minimax equality only when requested).
    pub checks: BTreeSet<SweepCheck>,
    pub first_counterexample: Option<Counterexample>,
}

impl SweepSummary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Runs the structural property checks on `trials` seeded random specs.
pub fn exhaustive_consistency_sweep(options: &SweepOptions) -> SweepSummary {
    let specs = random_specs(&options.params, options.trials, options.seed);
    let outcomes = par::map(options.execution, &specs, |spec| check_spec(spec, options));
    let mut checks: BTreeSet<SweepCheck> = SweepCheck::ALL.into_iter().collect();
    if options.oracle_resolution.is_none() {
        checks.remove(&SweepCheck::MinimaxEquality);
    }
    let mut summary = SweepSummary {
        trials: specs.len(),
        passed: 0,
        failed: 0,
        checks,
        first_counterexample: None,
    };
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(()) => summary.passed += 1,
            Err((check, detail)) => {
                summary.failed += 1;
                if summary.first_counterexample.is_none() {
                    summary.first_counterexample = Some(Counterexample {
                        trial,
                        check,
                        detail,
                    });
                }
            }
        }
    }
    summary
}

type CheckResult = Result<(), (SweepCheck, String)>;

fn fail<T: Into<String>>(check: SweepCheck, detail: T) -> CheckResult {
    Err((check, detail.into()))
}

fn check_spec(spec: &SignalSpec, options: &SweepOptions) -> CheckResult {
    let m = spec.m();
    let atlas = match enumerate_atlas(spec) {
        Ok(a) => a,
        Err(e) => return fail(SweepCheck::AtlasCardinality, e.to_string()),
    };
    let distinct: BTreeSet<_> = atlas.patterns().into_iter().collect();
    if atlas.cells.len() != m + 1 || distinct.len() != m + 1 {
        return fail(
            SweepCheck::AtlasCardinality,
            format!(
                "m={m}: {} cells, {} distinct",
                atlas.cells.len(),
                distinct.len()
            ),
        );
    }

    check_count_formula(spec, options.delta_grid)?;

    let obs = ObservationSet::from_atlas(&atlas, spec.amplitudes());
    let g = spec.amplitudes();
    let mut energies = Vec::with_capacity(m + 1);
    for l in 0..=m {
        let model =
            infer_model(&obs, l).map_err(|e| (SweepCheck::FullAtlasRoundTrip, e.to_string()))?;
        if !model.is_full() {
            return fail(
                SweepCheck::FullAtlasRoundTrip,
                format!("l={l}: U={:?}", model.uncertain),
            );
        }
        let d = spec.translation(l).positions;
        for i in (0..=m).filter(|&i| i != l) {
            let iv = model.intervals[i];
            if iv.width() != 1 || !iv.contains(&d[i]) {
                return fail(
                    SweepCheck::FullAtlasRoundTrip,
                    format!("l={l}, i={i}: D={} not inside ({}, {})", d[i], iv.lo, iv.hi),
                );
            }
        }
        let est =
            estimate_full(&model, &g).map_err(|e| (SweepCheck::GridAgreement, e.to_string()))?;
        let truth = spec.truth_function(l);
        for n in est.span.lo - 1..=est.span.hi + 1 {
            if est.evaluate(&int(n)) != truth.evaluate(&int(n)) {
                return fail(SweepCheck::GridAgreement, format!("l={l}, n={n}"));
            }
        }
        let energy = closed_form_energy(&model, &g)
            .map_err(|e| (SweepCheck::ReferenceSweep, e.to_string()))?
            .exact()
            .cloned()
            .ok_or((SweepCheck::ReferenceSweep, format!("l={l}: no closed form")))?;
        if let Some(resolution) = options.oracle_resolution {
            let config = OracleConfig {
                resolution,
                execution: Execution::Sequential,
                ..OracleConfig::default()
            };
            let wc = worst_case_energy(&est, &g, &FeasibleBox::from_model(&model), &config)
                .map_err(|e| (SweepCheck::MinimaxEquality, e.to_string()))?;
            if !wc.is_constant() || wc.value != energy {
                return fail(
                    SweepCheck::MinimaxEquality,
                    format!(
                        "l={l}: oracle [{}, {}] vs closed form {energy}",
                        wc.min, wc.value
                    ),
                );
            }
        }
        energies.push(energy);
    }
    let argmin = energies
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(l, _)| l)
        .unwrap();
    let best = best_reference(&g);
    if argmin != best {
        return fail(
            SweepCheck::ReferenceSweep,
            format!("argmin energy l={argmin}, largest jump k={best}"),
        );
    }
    Ok(())
}

/// Direct counting against the closed-form cumulative counts for every
/// `(i, K)` on the offset grid.
fn check_count_formula(spec: &SignalSpec, grid: u32) -> CheckResult {
    let m = spec.m();
    let mut table = Vec::new();
    for i in 1..=m {
        for k in 0..=m - i {
            let (_, d) = kappa_d(spec, i, k).expect("span in range");
            let threshold = count_threshold(spec, i, k).expect("span in range");
            table.push((i, k, d, threshold));
        }
    }
    for step in 0..grid {
        let delta1: Rational = rat(step as i64, grid as i64);
        let pattern = count_direct(spec, &delta1);
        let deltas = delta_chain(spec, &delta1);
        for (i, k, d, threshold) in &table {
            let formula = if deltas[i - 1] < *threshold {
                *d
            } else {
                d - 1
            };
            let direct = pattern.range_sum(*i, i + k);
            if formula != direct {
                return fail(
                    SweepCheck::CountFormula,
                    format!("delta1={delta1}, i={i}, K={k}: formula {formula}, direct {direct}"),
                );
            }
        }
    }
    Ok(())
}
