use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use walkembed::classic::{hall_rule, minimal_embed_rule};
use walkembed::engine::StoppingRule;
use walkembed::par::Execution;
use walkembed::sim::{simulate, SimOptions};
use walkembed::ui::brute_force_oracle;
use walkembed::{IntegerMeasure, Rational};

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn measure() -> IntegerMeasure {
    IntegerMeasure::new([
        (-3, Rational::frac(2, 9)),
        (0, Rational::frac(4, 9)),
        (2, Rational::frac(1, 3)),
    ])
    .unwrap()
}

fn bench_simulate(c: &mut Criterion) {
    let mu = measure();
    let rules = [
        (
            "pairs",
            StoppingRule::RandomizedPair(hall_rule(&mu).unwrap()),
        ),
        ("general", StoppingRule::Minimal(minimal_embed_rule(&mu))),
    ];
    let mut group = c.benchmark_group("simulate_20k");
    group.sample_size(10);
    for (name, rule) in &rules {
        for (mode, execution) in MODES {
            let options = SimOptions {
                execution,
                stage_cap: 10_000,
                ..SimOptions::new(20_000, 1)
            };
            group.bench_with_input(BenchmarkId::new(*name, mode), &options, |b, o| {
                b.iter(|| simulate(black_box(rule), Some(&mu), *o).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for horizon in [8, 10] {
        for (mode, execution) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, horizon), &horizon, |b, &h| {
                b.iter(|| brute_force_oracle(black_box(h), execution).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_simulate, bench_oracle);
criterion_main!(benches);
