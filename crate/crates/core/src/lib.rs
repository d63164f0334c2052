//! Exact simulation of uniform-grid sampling of piecewise constant signals,
//! localization of their discontinuities from observed sample-count
//! patterns, and worst-case-optimal reconstruction.
//!
//! All positions are rationals in units of the grid interval `T`.
//!
//! ```
//! use pcsamp_core::{enumerate_atlas, estimate_full, infer_model, scenarios, ObservationSet};
//! use pcsamp_core::rational::int;
//!
//! let spec = scenarios::two_region();
//! let atlas = enumerate_atlas(&spec).unwrap();
//! assert_eq!(atlas.cells.len(), spec.m() + 1);
//!
//! let obs = ObservationSet::from_atlas(&atlas, spec.amplitudes());
//! let model = infer_model(&obs, 0).unwrap();
//! let est = estimate_full(&model, obs.amplitudes()).unwrap();
//! assert_eq!(est.evaluate(&int(1)), int(4));
//! ```

pub mod estimator;
pub mod inference;
pub mod oracle;
pub mod par;
pub mod random;
pub mod rational;
pub mod sampler;
pub mod scenarios;
pub mod signal;

pub use estimator::{
    absolute_error_bound, best_reference, closed_form_energy, estimate_full, estimate_partial,
    full_energy_for_reference, midpoint_constants, overlapping_intervals, ClosedForm, Estimate,
    EstimateCell, EstimatorError, Provenance,
};
pub use inference::{
    cumulative_values, infer_model, Chain, ChainDirection, ChainStructure, InferenceError,
    Interval, ObservationSet, UncertaintyModel,
};
pub use oracle::{
    energy_between, worst_case_energy, FeasibleBox, OracleConfig, OracleError, WorstCase,
};
pub use par::Execution;
pub use rational::Rational;
pub use sampler::{
    count_direct, cumulative_count, delta_chain, enumerate_atlas, kappa_d, AtlasCell, PatternAtlas,
    SamplerError, SamplingPattern,
};
pub use signal::{PiecewiseFunction, Region, SignalSpec, SpecError, Translation};
