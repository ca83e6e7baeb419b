//! Parallel versus sequential execution of the two main trial workloads:
//! public-project revelation runs and verification-event sampling. Both
//! paths map the same per-trial function over trial indices; the parallel
//! side uses the rayon pool, the sequential side a plain iterator.

use criterion::{criterion_group, criterion_main, Criterion};

use osplab_core::exec::{indexed_map, indexed_map_seq};
use osplab_core::public_project::{tau_trial, SelectionRule};
use osplab_core::rng::stream;
use osplab_core::verification::{
    sample_verification, AgentScheme, FineSpec, ProbSpec, VerificationScheme,
};

fn bench_tau_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("tau_trials_n200_c15");
    group.sample_size(20);
    let rule = SelectionRule::Uniform;
    let trials = 2_000usize;
    group.bench_function("parallel", |b| {
        b.iter(|| -> u64 {
            indexed_map(trials, |t| tau_trial(200, 15, &rule, 5, t as u64) as u64)
                .iter()
                .sum()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| -> u64 {
            indexed_map_seq(trials, |t| tau_trial(200, 15, &rule, 5, t as u64) as u64)
                .iter()
                .sum()
        })
    });
    group.finish();
}

fn bench_verification_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("caught_sampling_n100");
    group.sample_size(20);
    let n = 100;
    let scheme = VerificationScheme {
        agents: (0..n)
            .map(|_| AgentScheme {
                verifiable: true,
                prob: ProbSpec::Theorem1 { gamma: 2.0 },
                fine: FineSpec::Theorem1 { gamma: 2.0 },
                revealing: None,
            })
            .collect(),
    };
    let truths: Vec<usize> = vec![0; n];
    let reports: Vec<usize> = vec![1; n];
    let trials = 5_000usize;
    let trial = |t: usize| -> u64 {
        let mut rng = stream(11, 0, t as u64);
        sample_verification(&scheme, &truths, &reports, &mut rng).len() as u64
    };
    group.bench_function("parallel", |b| {
        b.iter(|| -> u64 { indexed_map(trials, trial).iter().sum() })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| -> u64 { indexed_map_seq(trials, trial).iter().sum() })
    });
    group.finish();
}

criterion_group!(benches, bench_tau_trials, bench_verification_sampling);
criterion_main!(benches);
