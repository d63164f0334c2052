//! Small named instances used by the demos, the CLI and the test suites.

use crate::inference::ObservationSet;
use crate::rational::{int, rat};
use crate::sampler::{enumerate_atlas, SamplingPattern};
use crate::signal::{Region, SignalSpec};

/// `g = (4, 2)`, `n = (2, 3)`, `f = (1/4, 1/2)`: region lengths `7/4` and `5/2`.
pub fn two_region() -> SignalSpec {
    SignalSpec::unit(vec![
        Region::new(int(4), 2, rat(1, 4)),
        Region::new(int(2), 3, rat(1, 2)),
    ])
    .expect("valid spec")
}

/// Three regions with `n = (3, 3, 3)` and `f = (1/5, 1/5, 1/5)`. Its atlas
/// holds `(3,3,3)` and `(3,3,2)`, two patterns that agree on the first two
/// regions and differ by one sample in the last.
pub fn three_region() -> SignalSpec {
    SignalSpec::unit(vec![
        Region::new(int(3), 3, rat(1, 5)),
        Region::new(int(1), 3, rat(1, 5)),
        Region::new(int(2), 3, rat(1, 5)),
    ])
    .expect("valid spec")
}

/// The two atlas patterns of [`three_region`] that differ only in `η_3`.
pub fn last_region_pair() -> (SignalSpec, ObservationSet) {
    let spec = three_region();
    let atlas = enumerate_atlas(&spec).expect("generic spec");
    let patterns = vec![
        SamplingPattern(vec![3, 3, 3]),
        SamplingPattern(vec![3, 3, 2]),
    ];
    debug_assert!(patterns.iter().all(|p| atlas.contains(p)));
    let obs = ObservationSet::new(patterns, spec.amplitudes()).expect("distinct patterns");
    (spec, obs)
}

/// A single observation `(3, 1)` with amplitudes `(4, 2)`: the second
/// region holds one sample, so both discontinuities are coupled.
pub fn single_sample_chain() -> ObservationSet {
    ObservationSet::new(vec![SamplingPattern(vec![3, 1])], vec![int(4), int(2)])
        .expect("valid observation")
}
