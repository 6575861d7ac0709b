use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qcc_core::exec::Execution;
use qcc_core::norms::{estimate, Estimator, EstimatorConfig, FractionalNormSpec};
use qcc_core::radial_maps::{jacobian_power_integral_with, Ball, MonteCarloConfig, RadialStretch};
use qcc_core::RadialProfile;

const MODES: [(&str, Execution); 2] =
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn gagliardo(c: &mut Criterion) {
    let mut g = c.benchmark_group("gagliardo");
    let prof = RadialProfile::singular(0.25).unwrap();
    let spec = FractionalNormSpec::new(0.5, 2.0, 2, Estimator::GagliardoDoubleIntegral).unwrap();
    for (name, execution) in MODES {
        let cfg = EstimatorConfig { execution, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| estimate(black_box(&prof), &spec, &cfg).unwrap())
        });
    }
    g.finish();
}

fn modulus(c: &mut Criterion) {
    let mut g = c.benchmark_group("modulus");
    g.sample_size(10);
    let prof = RadialProfile::singular(0.25).unwrap();
    let spec = FractionalNormSpec::new(0.5, 2.0, 2, Estimator::ModulusOfSmoothness).unwrap();
    for (name, execution) in MODES {
        let cfg = EstimatorConfig { execution, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| estimate(black_box(&prof), &spec, &cfg).unwrap())
        });
    }
    g.finish();
}

fn jacobian_monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("jacobian_monte_carlo");
    let map = RadialStretch::new(1.5, 3).unwrap();
    let ball = Ball::new(vec![0.5, 0.0, 0.0], 1.0).unwrap();
    let mc = MonteCarloConfig::default();
    for (name, execution) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| jacobian_power_integral_with(&map, black_box(&ball), -0.5, &mc, execution).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, gagliardo, modulus, jacobian_monte_carlo);
criterion_main!(benches);
