use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use lbra_core::analytic::{self, AnalyticPoint};
use lbra_core::geometry::{assign_nearest, nearest_gateway_pairs};
use lbra_core::lbra::regroup;
use lbra_core::montecarlo::{run_trial, sample_snapshot};
use lbra_core::{compute_k_alpha, DeploymentParams, ExperimentSpec, Policy, RadioParams, SpectrumPlan};

fn deployment(window: f64) -> DeploymentParams {
    DeploymentParams::new(2e-3, 1e-4, window, 7).unwrap()
}

fn k_alpha(c: &mut Criterion) {
    c.bench_function("k_alpha/alpha=3", |b| b.iter(|| compute_k_alpha(black_box(3.0))));
    c.bench_function("k_alpha/alpha=5", |b| b.iter(|| compute_k_alpha(black_box(5.0))));
}

fn geometry(c: &mut Criterion) {
    let (snap, _) = sample_snapshot(&deployment(1000.0), 0).unwrap();
    let mut g = c.benchmark_group("geometry");
    for res in [128, 256] {
        g.bench_function(format!("assign_nearest/res={res}"), |b| {
            b.iter(|| assign_nearest(black_box(&snap), res).unwrap())
        });
    }
    g.bench_function("nearest_gateway_pairs", |b| b.iter(|| nearest_gateway_pairs(black_box(&snap))));
    let grouping = assign_nearest(&snap, 128).unwrap();
    g.bench_function("regroup/lbra", |b| {
        b.iter_batched(|| grouping.clone(), |gr| regroup(&gr, &snap, Policy::Lbra), BatchSize::SmallInput)
    });
    g.finish();
}

fn trial(c: &mut Criterion) {
    let mut g = c.benchmark_group("trial");
    for (window, res) in [(500.0, 128), (1000.0, 256)] {
        for policy in Policy::ALL {
            let spec = ExperimentSpec {
                deployment: deployment(window),
                radio: RadioParams::default(),
                plan: SpectrumPlan::default(),
                policy,
                trials: 1,
                resolution: res,
            };
            let mut i = 0u64;
            g.bench_function(format!("{policy}/L={window}"), |b| {
                b.iter(|| {
                    i += 1;
                    run_trial(&spec, i).unwrap()
                })
            });
        }
    }
    g.finish();
}

fn analytic_outage(c: &mut Criterion) {
    let point = AnalyticPoint {
        radio: RadioParams::default(),
        plan: SpectrumPlan::default(),
        lambda_d: 2e-3,
        lambda_g: 1e-4,
        window: 1000.0,
        samples: 1000,
        seed: 7,
    };
    let mut g = c.benchmark_group("analytic");
    g.sample_size(20);
    for policy in Policy::ALL {
        g.bench_function(format!("outage/{policy}/1000 samples"), |b| {
            b.iter(|| analytic::outage(black_box(&point), policy).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, k_alpha, geometry, trial, analytic_outage);
criterion_main!(benches);
