use serde_json::{json, Value};

use pcsamp_core::estimator::{
    best_reference, closed_form_energy, estimate_full, estimate_partial, ClosedForm, Estimate,
    Provenance,
};
use pcsamp_core::inference::{
    infer_model, ChainDirection, InferenceError, ObservationSet, UncertaintyModel,
};
use pcsamp_core::oracle::{
    exhaustive_consistency_sweep, perturbation_minimax_check, relative_deltas, worst_case_energy,
    CellSelection, FeasibleBox, OracleConfig, SweepOptions,
};
use pcsamp_core::rational::{int, rat, Rational};
use pcsamp_core::sampler::enumerate_atlas;
use pcsamp_core::scenarios;
use pcsamp_core::signal::SignalSpec;

use crate::output::{Output, Style, Table};
use crate::scenario::{ObservationSource, Scenario};
use crate::CliError;

fn output(before: Vec<String>, table: Table, after: Vec<String>, json: Value) -> Output {
    Output {
        before,
        table,
        after,
        csv_columns: None,
        json,
    }
}

fn infer(obs: &ObservationSet, l: usize) -> Result<UncertaintyModel, CliError> {
    if l > obs.m() {
        return Err(CliError::invalid(format!(
            "reference index {l} out of range 0..={}",
            obs.m()
        )));
    }
    infer_model(obs, l).map_err(|e| match e {
        InferenceError::Inconsistent { .. } => CliError::inconsistent(e.to_string()),
        other => CliError::invalid(other.to_string()),
    })
}

fn pattern_json(obs: &ObservationSet) -> Value {
    json!(obs
        .patterns()
        .iter()
        .map(|p| p.0.clone())
        .collect::<Vec<_>>())
}

pub fn validate(scenario: &Scenario, style: &Style) -> Result<Output, CliError> {
    let spec = &scenario.spec;
    let obs = scenario.observations(None)?;
    let mut table = Table::new(["i", "g", "n", "f", "length", "length_phys"]);
    let mut regions = Vec::new();
    for (k, r) in spec.regions().iter().enumerate() {
        let len = r.length();
        table.push(vec![
            (k + 1).to_string(),
            style.num(&r.amplitude),
            r.n.to_string(),
            style.num(&r.f),
            style.num(&len),
            style.num(&style.phys(&len)),
        ]);
        regions.push(json!({
            "i": k + 1,
            "g": style.json(&r.amplitude),
            "n": r.n,
            "f": style.json(&r.f),
            "length": style.json(&len),
        }));
    }
    let source = match scenario.observations {
        ObservationSource::All => "all".to_string(),
        ObservationSource::List(_) => format!("{} listed", obs.patterns().len()),
    };
    let total = spec.total_length();
    Ok(output(
        vec![format!(
            "valid: m={}, T={}, support length {} T, observations {source}",
            spec.m(),
            style.num(&style.t),
            style.num(&total)
        )],
        table,
        vec![],
        json!({
            "valid": true,
            "m": spec.m(),
            "T": style.json(&style.t),
            "total_length": style.json(&total),
            "regions": regions,
            "observations": pattern_json(&obs),
        }),
    ))
}

pub fn patterns(scenario: &Scenario, style: &Style) -> Result<Output, CliError> {
    let atlas = scenario.atlas()?;
    let m = scenario.spec.m();
    let mut headers = vec!["delta_lo".to_string(), "delta_hi".to_string()];
    headers.extend((1..=m).map(|i| format!("eta_{i}")));
    let mut table = Table::new(headers);
    let mut cells = Vec::new();
    for cell in &atlas.cells {
        let mut row = vec![style.num(&cell.lo), style.num(&cell.hi)];
        row.extend(cell.pattern.0.iter().map(u32::to_string));
        table.push(row);
        cells.push(json!({
            "delta_lo": style.json(&cell.lo),
            "delta_hi": style.json(&cell.hi),
            "eta": cell.pattern.0,
        }));
    }
    let observations: Vec<Vec<u32>> = atlas.cells.iter().map(|c| c.pattern.0.clone()).collect();
    Ok(output(
        vec![format!(
            "{} patterns; offsets of the first sample in units of T",
            atlas.cells.len()
        )],
        table,
        vec![],
        json!({ "cells": cells, "observations": observations }),
    ))
}

fn chain_label(model: &UncertaintyModel, i: usize) -> String {
    model
        .chains
        .chains()
        .find(|c| c.members().contains(&i))
        .map(|c| {
            let sign = match c.direction {
                ChainDirection::Plus => '+',
                ChainDirection::Minus => '-',
            };
            format!("{sign}t={},lambda={}", c.anchor, c.lambda)
        })
        .unwrap_or_default()
}

pub fn infer_cmd(
    scenario: &Scenario,
    l: usize,
    observations: Option<&str>,
    style: &Style,
) -> Result<Output, CliError> {
    let obs = scenario.observations(observations)?;
    let model = infer(&obs, l)?;
    let mut table = Table::new([
        "i", "C_i", "lo", "hi", "width", "lo_phys", "hi_phys", "state", "chain",
    ]);
    let mut rows = Vec::new();
    for i in 0..=model.m() {
        let iv = model.intervals[i];
        let state = if i == l {
            "reference"
        } else if model.uncertain.contains(&i) {
            "uncertain"
        } else {
            "known"
        };
        let chain = chain_label(&model, i);
        table.push(vec![
            i.to_string(),
            model.c[i].to_string(),
            style.int(iv.lo),
            style.int(iv.hi),
            style.int(iv.width()),
            style.num(&style.phys(&int(iv.lo))),
            style.num(&style.phys(&int(iv.hi))),
            state.to_string(),
            chain.clone(),
        ]);
        rows.push(json!({
            "i": i,
            "C": model.c[i],
            "lo": iv.lo,
            "hi": iv.hi,
            "width": iv.width(),
            "lo_phys": style.json(&style.phys(&int(iv.lo))),
            "hi_phys": style.json(&style.phys(&int(iv.hi))),
            "state": state,
            "chain": chain,
        }));
    }
    let uncertain: Vec<usize> = model.uncertain.iter().copied().collect();
    Ok(output(
        vec![format!(
            "reference l={l}, {} observations, uncertain discontinuities {uncertain:?}",
            obs.patterns().len()
        )],
        table,
        vec![],
        json!({
            "l": l,
            "observations": pattern_json(&obs),
            "uncertain": uncertain,
            "discontinuities": rows,
        }),
    ))
}

fn describe_energy(closed: &ClosedForm, style: &Style) -> (String, Value) {
    match closed {
        ClosedForm::Exact(e) => (
            format!(
                "{} (units of T), {} physical",
                style.num(e),
                style.num(&style.phys(e))
            ),
            style.json(e),
        ),
        other => (other.describe(), Value::Null),
    }
}

pub fn estimate(
    scenario: &Scenario,
    l: usize,
    observations: Option<&str>,
    style: &Style,
) -> Result<Output, CliError> {
    let obs = scenario.observations(observations)?;
    let model = infer(&obs, l)?;
    let g = obs.amplitudes();
    let est = estimate_partial(&model, g).map_err(|e| CliError::invalid(e.to_string()))?;
    let closed = closed_form_energy(&model, g).map_err(|e| CliError::invalid(e.to_string()))?;
    let mut table = Table::new([
        "cell_lo",
        "cell_hi",
        "value",
        "provenance",
        "cell_lo_phys",
        "cell_hi_phys",
        "detail",
    ]);
    let mut cells = Vec::new();
    for cell in &est.cells {
        let (lo, hi) = (int(cell.lo), int(cell.hi()));
        table.push(vec![
            style.num(&lo),
            style.num(&hi),
            style.num(&cell.value),
            cell.provenance.tag().to_string(),
            style.num(&style.phys(&lo)),
            style.num(&style.phys(&hi)),
            cell.provenance.detail(),
        ]);
        cells.push(json!({
            "cell_lo": cell.lo,
            "cell_hi": cell.hi(),
            "value": style.json(&cell.value),
            "provenance": cell.provenance.tag(),
            "detail": cell.provenance.detail(),
            "cell_lo_phys": style.json(&style.phys(&lo)),
            "cell_hi_phys": style.json(&style.phys(&hi)),
        }));
    }
    let (energy_text, energy_json) = describe_energy(&closed, style);
    let mut after = vec![format!("energy: {energy_text}")];
    if !est.conflicts.is_empty() {
        after.push(format!(
            "overlapping rules on cells starting at {:?}; first rule kept",
            est.conflicts
        ));
    }
    let mut out = output(
        vec![format!(
            "estimate for reference l={l}, zero outside [{}, {}]",
            est.span.lo, est.span.hi
        )],
        table,
        after,
        json!({
            "l": l,
            "span": [est.span.lo, est.span.hi],
            "cells": cells,
            "energy": energy_json,
            "energy_status": closed.describe(),
            "energy_phys": closed.exact().map(|e| style.json(&style.phys(e))),
            "conflicts": est.conflicts,
        }),
    );
    out.csv_columns = Some(4);
    Ok(out)
}

pub fn sweep(
    scenario: &Scenario,
    observations: Option<&str>,
    style: &Style,
) -> Result<Output, CliError> {
    let obs = scenario.observations(observations)?;
    let g = obs.amplitudes();
    let mut table = Table::new(["l", "energy", "energy_phys", "status"]);
    let mut rows = Vec::new();
    let mut argmin: Option<(Rational, usize)> = None;
    for l in 0..=obs.m() {
        let model = infer(&obs, l)?;
        let closed = closed_form_energy(&model, g).map_err(|e| CliError::invalid(e.to_string()))?;
        let (energy, phys) = match closed.exact() {
            Some(e) => (style.num(e), style.num(&style.phys(e))),
            None => (String::new(), String::new()),
        };
        let status = match &closed {
            ClosedForm::Exact(_) => "exact".to_string(),
            other => other.describe(),
        };
        if let Some(e) = closed.exact() {
            if argmin.as_ref().is_none_or(|(b, _)| e < b) {
                argmin = Some((e.clone(), l));
            }
        }
        table.push(vec![l.to_string(), energy, phys, status.clone()]);
        rows.push(json!({
            "l": l,
            "energy": closed.exact().map(|e| style.json(e)),
            "status": status,
        }));
    }
    let best = best_reference(g);
    let argmin = argmin.map(|(_, l)| l);
    let agree = argmin == Some(best);
    let argmin_text = argmin.map_or("none".to_string(), |l| l.to_string());
    Ok(output(
        vec![format!("closed-form energy per reference index")],
        table,
        vec![
            format!("argmin l={argmin_text}"),
            format!(
                "best_reference k={best} (largest jump); {}",
                if agree { "agrees" } else { "differs" }
            ),
        ],
        json!({
            "energies": rows,
            "argmin": argmin,
            "best_reference": best,
            "agree": agree,
        }),
    ))
}

pub fn demo_example6() -> Result<Output, CliError> {
    let (_, obs) = scenarios::last_region_pair();
    let mut table = Table::new(["l", "widths"]);
    let mut refs = Vec::new();
    for l in [0, obs.m()] {
        let model = infer(&obs, l)?;
        let widths: Vec<i64> = (0..=model.m())
            .filter(|&i| i != l)
            .map(|i| model.intervals[i].width())
            .collect();
        let text: Vec<String> = widths
            .iter()
            .map(|&w| if w == 1 { "T".into() } else { format!("{w}T") })
            .collect();
        table.push(vec![l.to_string(), format!("({})", text.join(", "))]);
        refs.push(json!({ "l": l, "widths": widths }));
    }
    let patterns: Vec<String> = obs.patterns().iter().map(ToString::to_string).collect();
    Ok(output(
        vec![format!(
            "observations {} on g = (3, 1, 2), n = (3, 3, 3), f = (1/5, 1/5, 1/5)",
            patterns.join(" and ")
        )],
        table,
        vec![],
        json!({ "observations": pattern_json(&obs), "references": refs }),
    ))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub grid: u32,
    pub trials: usize,
    pub seed: u64,
    pub delta_grid: u32,
    /// Replace every midpoint cell by its left amplitude, to show that the
    /// checks catch a wrong estimator.
    pub inject_fault: bool,
}

struct Check {
    name: String,
    passed: bool,
    detail: String,
}

fn estimate_under_test(est: Estimate, g: &[Rational], fault: bool) -> Estimate {
    if !fault {
        return est;
    }
    let mut padded = vec![Rational::from_integer(0.into())];
    padded.extend(g.iter().cloned());
    let mut out = est.clone();
    for (k, cell) in est.cells.iter().enumerate() {
        if let Provenance::Midpoint { index } = cell.provenance {
            out = out.with_cell_value(k, padded[index].clone());
        }
    }
    out
}

fn oracle_config(grid: u32) -> OracleConfig {
    OracleConfig::with_resolution(grid)
}

fn fmt_entry(l: usize, e: &pcsamp_core::oracle::PerturbationEntry, baseline: &Rational) -> String {
    format!(
        "l={l}: cell ({}, {}) {} shifted by {} gives worst case {} against {}",
        e.cell_lo,
        e.cell_lo + 1,
        e.tag,
        e.delta,
        e.worst,
        baseline
    )
}

fn full_atlas_checks(
    name: &str,
    spec: &SignalSpec,
    opts: &VerifyOptions,
) -> Result<Vec<Check>, CliError> {
    let atlas = enumerate_atlas(spec).map_err(|e| CliError::invalid(e.to_string()))?;
    let obs = ObservationSet::from_atlas(&atlas, spec.amplitudes());
    let g = obs.amplitudes();
    let config = oracle_config(opts.grid);
    let deltas = relative_deltas(g, &[rat(1, 10), rat(1, 2)]);
    let mut equality: Result<usize, String> = Ok(0);
    let mut perturb: Result<usize, String> = Ok(0);
    for l in 0..=spec.m() {
        let model = infer(&obs, l)?;
        let est = estimate_full(&model, g).map_err(|e| CliError::invalid(e.to_string()))?;
        let est = estimate_under_test(est, g, opts.inject_fault);
        let fbox = FeasibleBox::from_model(&model);
        let oracle_err = |e: pcsamp_core::OracleError| CliError::invalid(e.to_string());
        if let Ok(count) = equality {
            let closed =
                closed_form_energy(&model, g).map_err(|e| CliError::invalid(e.to_string()))?;
            let wc = worst_case_energy(&est, g, &fbox, &config).map_err(oracle_err)?;
            equality = match closed.exact() {
                Some(e) if wc.value == *e && wc.min == *e => Ok(count + wc.placements()),
                _ => Err(format!(
                    "l={l}: oracle energy ranges over [{}, {}], closed form {}",
                    wc.min,
                    wc.value,
                    closed.describe()
                )),
            };
        }
        if let Ok(count) = perturb {
            let report =
                perturbation_minimax_check(&est, g, &fbox, &deltas, CellSelection::All, &config)
                    .map_err(oracle_err)?;
            perturb = match report
                .entries
                .iter()
                .find(|e| e.change <= Rational::from_integer(0.into()))
            {
                None => Ok(count + report.entries.len()),
                Some(e) => Err(fmt_entry(l, e, &report.baseline)),
            };
        }
    }
    let refs = spec.m() + 1;
    Ok(vec![
        Check {
            name: format!("{name}: minimax-equality"),
            passed: equality.is_ok(),
            detail: equality
                .map(|n| format!("{refs} references, {n} placements at the closed form"))
                .unwrap_or_else(|w| w),
        },
        Check {
            name: format!("{name}: perturbation"),
            passed: perturb.is_ok(),
            detail: perturb
                .map(|n| format!("{n} perturbations, all strictly worse"))
                .unwrap_or_else(|w| w),
        },
    ])
}

fn partial_checks(
    name: &str,
    obs: &ObservationSet,
    opts: &VerifyOptions,
) -> Result<Check, CliError> {
    let g = obs.amplitudes();
    let config = oracle_config(opts.grid);
    let mut tested = Vec::new();
    for l in 0..=obs.m() {
        let model = infer(obs, l)?;
        let Some(expected) = closed_form_energy(&model, g)
            .map_err(|e| CliError::invalid(e.to_string()))?
            .exact()
            .cloned()
        else {
            continue;
        };
        if model.is_full() {
            continue;
        }
        let est = estimate_partial(&model, g).map_err(|e| CliError::invalid(e.to_string()))?;
        let est = estimate_under_test(est, g, opts.inject_fault);
        let wc = worst_case_energy(&est, g, &FeasibleBox::from_model(&model), &config)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        if wc.value != expected || wc.min != expected {
            return Ok(Check {
                name: format!("{name}: partial-closed-form"),
                passed: false,
                detail: format!(
                    "l={l}: oracle energy ranges over [{}, {}], closed form {expected}",
                    wc.min, wc.value
                ),
            });
        }
        tested.push(l);
    }
    Ok(Check {
        name: format!("{name}: partial-closed-form"),
        passed: true,
        detail: if tested.is_empty() {
            "no reference with a partial closed form".to_string()
        } else {
            format!("references {tested:?} match the closed form")
        },
    })
}

fn chain_check(opts: &VerifyOptions) -> Result<Check, CliError> {
    let obs = scenarios::single_sample_chain();
    let g = obs.amplitudes();
    let model = infer(&obs, 0)?;
    let est = estimate_partial(&model, g).map_err(|e| CliError::invalid(e.to_string()))?;
    let est = estimate_under_test(est, g, opts.inject_fault);
    let deltas = relative_deltas(g, &[rat(1, 10), rat(1, 2)]);
    let report = perturbation_minimax_check(
        &est,
        g,
        &FeasibleBox::from_model(&model),
        &deltas,
        CellSelection::All,
        &oracle_config(opts.grid),
    )
    .map_err(|e| CliError::invalid(e.to_string()))?;
    let passed = report.violations().is_empty();
    let detail = match report.violations().first() {
        Some(e) => fmt_entry(0, e, &report.baseline),
        None => format!(
            "worst case {}, {} perturbations, none lower it",
            report.baseline,
            report.entries.len()
        ),
    };
    Ok(Check {
        name: "chain (3,1): perturbation".to_string(),
        passed,
        detail,
    })
}

/// Runs the property suite. Returns the report and whether every check passed.
pub fn verify(
    scenario: Option<&Scenario>,
    opts: &VerifyOptions,
) -> Result<(Output, bool), CliError> {
    if opts.grid < 2 {
        return Err(CliError::invalid("--grid must be at least 2"));
    }
    if opts.trials == 0 {
        return Err(CliError::invalid("--trials must be at least 1"));
    }
    let mut checks = Vec::new();
    let summary = exhaustive_consistency_sweep(&SweepOptions {
        trials: opts.trials,
        seed: opts.seed,
        delta_grid: opts.delta_grid,
        oracle_resolution: Some(opts.grid),
        ..SweepOptions::default()
    });
    for check in &summary.checks {
        let failure = summary
            .first_counterexample
            .as_ref()
            .filter(|c| c.check == *check);
        checks.push(Check {
            name: format!("random: {}", check.name()),
            passed: failure.is_none(),
            detail: match failure {
                Some(c) => c.to_string(),
                None => format!("{} trials", summary.trials),
            },
        });
    }
    checks.extend(full_atlas_checks(
        "two-region",
        &scenarios::two_region(),
        opts,
    )?);
    checks.extend(full_atlas_checks(
        "three-region",
        &scenarios::three_region(),
        opts,
    )?);
    let (_, example) = scenarios::last_region_pair();
    checks.push(partial_checks("two-pattern", &example, opts)?);
    checks.push(chain_check(opts)?);
    if let Some(s) = scenario {
        checks.extend(full_atlas_checks("scenario", &s.spec, opts)?);
        if let ObservationSource::List(_) = s.observations {
            checks.push(partial_checks("scenario", &s.observations(None)?, opts)?);
        }
    }

    let mut table = Table::new(["check", "status", "detail"]);
    let mut rows = Vec::new();
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        table.push(vec![c.name.clone(), status.into(), c.detail.clone()]);
        rows.push(json!({ "check": c.name, "passed": c.passed, "detail": c.detail }));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let out = output(
        vec![format!(
            "verify: trials={} seed={} grid={} (step T/{})",
            opts.trials, opts.seed, opts.grid, opts.grid
        )],
        table,
        vec![format!(
            "{} of {} checks passed",
            checks.len() - failed,
            checks.len()
        )],
        json!({
            "trials": opts.trials,
            "seed": opts.seed,
            "grid": opts.grid,
            "checks": rows,
            "passed": failed == 0,
        }),
    );
    Ok((out, failed == 0))
}
