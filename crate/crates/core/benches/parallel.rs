use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setid::artstein::{selection_feasible, ChoiceFrequencies, ChoiceParamVector};
use setid::exec::ExecutionMode;
use setid::sim::{simulate, Family, PopulationSpec, PreferenceModel, SelectionRule};
use setid::Rational;

const MODES: [ExecutionMode; 2] = [ExecutionMode::Sequential, ExecutionMode::Parallel];

fn population(size: u64) -> PopulationSpec {
    PopulationSpec {
        alternatives: 4,
        preferences: PreferenceModel::Interval {
            midpoints: (0..4).map(|a| Family::Normal { mean: 0.1 * a as f64, sd: 1.0 }).collect(),
            half_widths: (0..4).map(|_| Family::Exponential { rate: 2.0 }).collect(),
        },
        rule: SelectionRule::Uniform,
        instrument: Vec::new(),
        size,
        seed: Some(1),
    }
}

fn simulation(c: &mut Criterion) {
    let spec = population(200_000);
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    for mode in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| simulate(black_box(&spec), mode).unwrap())
        });
    }
    group.finish();
}

fn random_pairs(n: usize, count: usize) -> Vec<(ChoiceParamVector, ChoiceFrequencies)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = (1usize << n) - 1;
    (0..count)
        .map(|_| {
            let w: Vec<i64> = (0..dim).map(|_| rng.random_range(1..20)).collect();
            let total: i64 = w.iter().sum();
            let theta = ChoiceParamVector::new(n, w.iter().map(|&x| Rational::new(x, total)).collect()).unwrap();
            let pw: Vec<i64> = (0..n).map(|_| rng.random_range(1..20)).collect();
            let pt: i64 = pw.iter().sum();
            (theta, ChoiceFrequencies::new(pw.iter().map(|&x| Rational::new(x, pt)).collect()).unwrap())
        })
        .collect()
}

fn oracle_sweep(c: &mut Criterion) {
    let pairs = random_pairs(4, 400);
    let mut group = c.benchmark_group("oracle_sweep");
    group.sample_size(10);
    for mode in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| {
                mode.map_range(pairs.len(), |i| selection_feasible(&pairs[i].0, &pairs[i].1).unwrap().feasible)
                    .into_iter()
                    .filter(|&f| f)
                    .count()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, simulation, oracle_sweep);
criterion_main!(benches);
