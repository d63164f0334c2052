use num_traits::{One, Signed, Zero};

use super::{worst_case_energy, FeasibleBox, OracleConfig, OracleError};
use crate::estimator::{Estimate, EstimateCell, Provenance};
use crate::par;
use crate::rational::Rational;

/// Which cells of an estimate are perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellSelection {
    /// Cells whose value is not the known amplitude.
    Adjustable,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationEntry {
    pub cell_lo: i64,
    pub tag: &'static str,
    pub delta: Rational,
    pub worst: Rational,
    /// `worst − baseline`.
    pub change: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationReport {
    pub baseline: Rational,
    pub entries: Vec<PerturbationEntry>,
}

impl PerturbationReport {
    /// Entries where the perturbed estimate has a smaller worst case.
    pub fn violations(&self) -> Vec<&PerturbationEntry> {
        self.entries
            .iter()
            .filter(|e| e.change < Rational::zero())
            .collect()
    }

    /// Every nonzero perturbation strictly raised the worst case.
    pub fn all_strict(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.delta.is_zero() || e.change > Rational::zero())
    }

    /// Smallest `change` among nonzero perturbations.
    pub fn min_margin(&self) -> Option<Rational> {
        self.entries
            .iter()
            .filter(|e| !e.delta.is_zero())
            .map(|e| e.change.clone())
            .min()
    }
}

/// Deltas `±fraction · spread` for each fraction, where `spread` is the
/// range of amplitudes the cell can take (1 for known cells).
pub fn relative_deltas(
    amplitudes: &[Rational],
    fractions: &[Rational],
) -> impl Fn(&EstimateCell) -> Vec<Rational> {
    let mut g = vec![Rational::zero()];
    g.extend(amplitudes.iter().cloned());
    g.push(Rational::zero());
    let fractions = fractions.to_vec();
    move |cell: &EstimateCell| {
        let regions: Vec<usize> = match &cell.provenance {
            Provenance::Known { .. } => Vec::new(),
            Provenance::Midpoint { index } => vec![*index, index + 1],
            Provenance::ChainInterior { regions, .. } => regions.to_vec(),
            Provenance::Fallback { regions } => regions.clone(),
        };
        let spread = match (
            regions.iter().map(|&r| &g[r]).max(),
            regions.iter().map(|&r| &g[r]).min(),
        ) {
            (Some(hi), Some(lo)) if hi != lo => hi - lo,
            _ => Rational::one(),
        };
        fractions
            .iter()
            .flat_map(|f| {
                let d = (f * &spread).abs();
                [d.clone(), -d]
            })
            .collect()
    }
}

/// Rebuilds `est` with one cell shifted by each delta and recomputes the
/// grid worst case. A minimax-optimal estimate never improves.
pub fn perturbation_minimax_check(
    est: &Estimate,
    amplitudes: &[Rational],
    fbox: &FeasibleBox,
    deltas: &(dyn Fn(&EstimateCell) -> Vec<Rational> + Sync),
    selection: CellSelection,
    config: &OracleConfig,
) -> Result<PerturbationReport, OracleError> {
    let baseline = worst_case_energy(est, amplitudes, fbox, config)?.value;
    let jobs: Vec<(usize, Rational)> = est
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            selection == CellSelection::All || !matches!(c.provenance, Provenance::Known { .. })
        })
        .flat_map(|(k, c)| deltas(c).into_iter().map(move |d| (k, d)))
        .collect();
    let results = par::map(config.execution, &jobs, |(k, delta)| {
        let cell = &est.cells[*k];
        let perturbed = est.with_cell_value(*k, &cell.value + delta);
        worst_case_energy(&perturbed, amplitudes, fbox, config).map(|wc| PerturbationEntry {
            cell_lo: cell.lo,
            tag: cell.provenance.tag(),
            delta: delta.clone(),
            change: &wc.value - &baseline,
            worst: wc.value,
        })
    });
    let entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(PerturbationReport { baseline, entries })
}
