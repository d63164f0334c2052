use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pcsamp_core::estimator::estimate_partial;
use pcsamp_core::inference::{infer_model, ObservationSet};
use pcsamp_core::oracle::{
    exhaustive_consistency_sweep, perturbation_minimax_check, relative_deltas, worst_case_energy,
    CellSelection, FeasibleBox, OracleConfig, SweepOptions,
};
use pcsamp_core::rational::{int, rat};
use pcsamp_core::sampler::SamplingPattern;
use pcsamp_core::{scenarios, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, execution) in MODES {
        let options = SweepOptions {
            trials: 20,
            delta_grid: 200,
            execution,
            ..SweepOptions::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &options, |b, o| {
            b.iter(|| black_box(exhaustive_consistency_sweep(o)))
        });
    }
    group.finish();
}

fn worst_case(c: &mut Criterion) {
    // a chain of length two: three coupled discontinuities searched jointly
    let obs = ObservationSet::new(
        vec![SamplingPattern(vec![4, 1, 1])],
        vec![int(3), int(-1), int(2)],
    )
    .unwrap();
    let model = infer_model(&obs, 0).unwrap();
    let est = estimate_partial(&model, obs.amplitudes()).unwrap();
    let fbox = FeasibleBox::from_model(&model);
    let mut group = c.benchmark_group("worst_case");
    group.sample_size(10);
    for (name, execution) in MODES {
        let config = OracleConfig {
            resolution: 20,
            execution,
            ..OracleConfig::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| black_box(worst_case_energy(&est, obs.amplitudes(), &fbox, &config).unwrap()))
        });
    }
    group.finish();
}

fn perturbation(c: &mut Criterion) {
    let obs = scenarios::single_sample_chain();
    let model = infer_model(&obs, 0).unwrap();
    let est = estimate_partial(&model, obs.amplitudes()).unwrap();
    let fbox = FeasibleBox::from_model(&model);
    let deltas = relative_deltas(obs.amplitudes(), &[rat(1, 10), rat(1, 2)]);
    let mut group = c.benchmark_group("perturbation");
    group.sample_size(10);
    for (name, execution) in MODES {
        let config = OracleConfig {
            resolution: 20,
            execution,
            ..OracleConfig::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| {
                black_box(
                    perturbation_minimax_check(
                        &est,
                        obs.amplitudes(),
                        &fbox,
                        &deltas,
                        CellSelection::All,
                        &config,
                    )
                    .unwrap(),
                )
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, worst_case, perturbation);
criterion_main!(benches);
