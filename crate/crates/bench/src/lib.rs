//! Shared fixtures for the criterion benchmarks.

use algocompare::{CenterMode, DistributionSpec, Family, RngStream};

/// Paired standard normal samples of size `n` drawn from a fixed stream.
pub fn normal_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let spec = DistributionSpec::new(Family::Normal, CenterMode::Mean, 1.0, 0.0)
        .expect("standard normal spec");
    let mut rng = RngStream::new(seed, 0);
    let a = spec.sample(n, &mut rng).expect("n > 0").into_values();
    let b = spec
        .shifted(0.5)
        .sample(n, &mut rng)
        .expect("n > 0")
        .into_values();
    (a, b)
}
