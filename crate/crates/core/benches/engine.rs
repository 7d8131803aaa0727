//! Monte Carlo throughput, single worker against the thread pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use pnc::montecarlo::SnrSweep;
use pnc::{Phase, Scheme, SimConfig, Simulator};

const TRIALS: u64 = 1 << 16;

fn config(scheme: Scheme, n_r: usize, phase: Phase, workers: usize) -> SimConfig {
    SimConfig {
        n_a: 2,
        n_b: 2,
        n_r,
        scheme,
        phase,
        sweep: SnrSweep::single(10.0),
        max_trials: TRIALS,
        // never reached, so every run does exactly TRIALS trials
        target_errors: u64::MAX,
        seed: 1,
        workers,
        ..SimConfig::default()
    }
}

fn engine(c: &mut Criterion) {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut group = c.benchmark_group("point");
    group.throughput(Throughput::Elements(TRIALS));
    group.sample_size(10);
    let cases = [
        ("tas1-2x2x2", Scheme::Tas1, 2, Phase::Ma),
        ("tas2-2x2x2", Scheme::Tas2, 2, Phase::Ma),
        ("jas-2x2x2", Scheme::Jas, 2, Phase::Ma),
        ("tas2-e2e-2x2x1", Scheme::Tas2, 1, Phase::E2e),
    ];
    for (name, scheme, n_r, phase) in cases {
        let seq = Simulator::new(config(scheme, n_r, phase, 1)).unwrap();
        group.bench_function(BenchmarkId::new("sequential", name), |b| {
            b.iter(|| seq.run_point(10.0))
        });
        if cfg!(feature = "parallel") {
            let par = Simulator::new(config(scheme, n_r, phase, 0)).unwrap();
            group.bench_function(BenchmarkId::new(format!("parallel-{cores}"), name), |b| {
                b.iter(|| par.run_point(10.0))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, engine);
criterion_main!(benches);
