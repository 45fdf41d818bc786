use algocompare::engine::{run_grid, NoProgress};
use algocompare::{
    CenterMode, DistributionPair, DistributionSpec, Family, GridConfig, TestId, TestSettings,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn one_cell(test: TestId, n: usize) -> GridConfig {
    let normal = DistributionSpec::new(Family::Normal, CenterMode::Mean, 1.0, 0.0).unwrap();
    let lognormal = DistributionSpec::new(Family::lognormal(), CenterMode::Mean, 1.0, 0.0).unwrap();
    GridConfig {
        pairs: vec![DistributionPair::new("normal/lognormal", normal, lognormal)],
        tests: vec![test],
        effect_sizes: vec![1.0],
        sample_sizes: vec![n],
        n_repetitions: 1000,
        alpha: 0.05,
        base_seed: 0,
        settings: TestSettings::reference(),
    }
}

fn cells(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_cell_1000_reps");
    group.sample_size(10);
    for (test, n) in [
        (TestId::Welch, 20),
        (TestId::MannWhitney, 20),
        (TestId::BootstrapCi, 20),
        (TestId::Permutation, 10),
    ] {
        let config = one_cell(test, n);
        group.bench_function(format!("{}_n{n}", test.name()), |b| {
            b.iter(|| run_grid(&config, &NoProgress).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, cells);
criterion_main!(benches);
