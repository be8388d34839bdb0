use std::hint::black_box;

use cayley_potts::model::{
    check_consistency_with, finite_volume_measure_with, propagate_fields, random_fields, ModelParams,
};
use cayley_potts::scan::scan_theta_with;
use cayley_potts::solver::DEFAULT_GRID;
use cayley_potts::{build_tree, Execution};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan_theta");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "k3_steps19"), |b| {
            b.iter(|| scan_theta_with(3, 0.05, 0.95, 19, DEFAULT_GRID, black_box(exec)).unwrap())
        });
    }
    group.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    // (k, q, n): 3^10 and 2^15 configurations
    for (k, q, n) in [(2, 3, 2), (2, 2, 3)] {
        let tree = build_tree(k, n).unwrap();
        let params = ModelParams::from_theta(k, q, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let leaf = random_fields(tree.leaves().len(), q, 2.0, &mut rng);
        let fields = propagate_fields(&tree, &leaf, &params).unwrap();
        let label = format!("k{k}_q{q}_n{n}");

        let mut group = c.benchmark_group("check_consistency");
        for (name, exec) in MODES {
            group.bench_function(BenchmarkId::new(name, &label), |b| {
                b.iter(|| check_consistency_with(&tree, &fields, &params, black_box(exec)).unwrap())
            });
        }
        group.finish();

        let mut group = c.benchmark_group("finite_volume_measure");
        for (name, exec) in MODES {
            group.bench_function(BenchmarkId::new(name, &label), |b| {
                b.iter(|| finite_volume_measure_with(&tree, &leaf, &params, black_box(exec)).unwrap())
            });
        }
        group.finish();
    }
}

criterion_group!(benches, bench_scan, bench_enumeration);
criterion_main!(benches);
