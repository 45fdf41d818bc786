//! Monte Carlo calibration of difference tests.
//!
//! A grid cell is one `(distribution pair, test, effect size, sample size)`
//! combination. For every cell both laws are recentered on the tendency the
//! test compares, the second law is shifted by `ε·σ_pool`, and `N_r`
//! repetitions of *sample, test, record rejection* are run. The rejection
//! rate at `ε = 0` is the false positive rate α*, otherwise it is the power
//! 1-β*.
//!
//! Each repetition owns a random stream derived from the base seed and the
//! cell's *content* (not its position), so results do not depend on thread
//! count, execution order, or which other cells are in the grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::numerics::{fingerprint, mix64, RngStream};
use crate::stattests::{run_test, TestId, TestSettings, MIN_RESAMPLES};
use crate::{Error, Result};

/// Repetitions for full power tables.
pub const DEFAULT_TABLE_REPETITIONS: usize = 10_000;
/// Repetitions behind the false-positive-rate curves.
pub const DEFAULT_CURVE_REPETITIONS: usize = 1_000;
/// Power at or above which a table entry is marked.
pub const POWER_TARGET: f64 = 0.8;
/// Sample sizes used throughout the power tables.
pub const SAMPLE_SIZE_LADDER: [usize; 10] = [2, 3, 5, 10, 15, 20, 30, 40, 50, 100];

/// Two laws to compare; the second one receives the shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionPair {
    pub label: String,
    pub first: DistributionSpec,
    pub second: DistributionSpec,
}

impl DistributionPair {
    pub fn new(
        label: impl Into<String>,
        first: DistributionSpec,
        second: DistributionSpec,
    ) -> Self {
        Self {
            label: label.into(),
            first,
            second,
        }
    }

    /// `√((σ1² + σ2²)/2)` of the two population spreads.
    pub fn sigma_pool(&self) -> f64 {
        (0.5 * (self.first.sigma().powi(2) + self.second.sigma().powi(2))).sqrt()
    }

    /// Content hash of both laws; where an empirical sample was loaded from
    /// does not matter.
    fn fingerprint(&self) -> u64 {
        let anonymous = |spec: &DistributionSpec| {
            let mut spec = spec.clone();
            spec.clear_source();
            spec
        };
        let bytes = serde_json::to_vec(&(anonymous(&self.first), anonymous(&self.second)))
            .expect("distribution specs always serialize");
        fingerprint(&bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub pairs: Vec<DistributionPair>,
    pub tests: Vec<TestId>,
    /// Relative effect sizes ε; 0 measures the false positive rate.
    pub effect_sizes: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub n_repetitions: usize,
    pub alpha: f64,
    pub base_seed: u64,
    #[serde(default = "TestSettings::reference")]
    pub settings: TestSettings,
}

impl GridConfig {
    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.pairs.is_empty() {
            problems.push("no distribution pairs given".to_string());
        }
        if self.tests.is_empty() {
            problems.push("test list is empty".to_string());
        }
        if self.effect_sizes.is_empty() {
            problems.push("effect size list is empty".to_string());
        }
        for e in &self.effect_sizes {
            if !(e.is_finite() && *e >= 0.0) {
                problems.push(format!(
                    "effect size {e} is not a finite non-negative number"
                ));
            }
        }
        if self.sample_sizes.is_empty() {
            problems.push("sample size list is empty".to_string());
        }
        for n in &self.sample_sizes {
            if *n < 2 {
                problems.push(format!("sample size {n} is below 2"));
            }
        }
        if self.n_repetitions == 0 {
            problems.push("number of repetitions must be positive".to_string());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            problems.push(format!("alpha {} is outside (0, 1)", self.alpha));
        }
        if self.tests.contains(&TestId::BootstrapCi) && self.settings.n_boot < MIN_RESAMPLES {
            problems.push(format!(
                "n_boot {} is below the minimum of {MIN_RESAMPLES}",
                self.settings.n_boot
            ));
        }
        if self.tests.contains(&TestId::Permutation) && self.settings.n_perm < MIN_RESAMPLES {
            problems.push(format!(
                "n_perm {} is below the minimum of {MIN_RESAMPLES}",
                self.settings.n_perm
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn n_cells(&self) -> usize {
        self.pairs.len() * self.tests.len() * self.effect_sizes.len() * self.sample_sizes.len()
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub pair: usize,
    pub pair_label: String,
    pub test: TestId,
    pub effect_size: f64,
    pub sample_size: usize,
    pub rejections: u64,
    pub rejection_rate: f64,
    /// `√(r(1-r)/N_r)`.
    pub standard_error: f64,
}

/// Rejection rates for every cell, stored row-major over
/// `(pair, test, effect, sample size)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsGrid {
    pub config: GridConfig,
    pub cells: Vec<CellResult>,
}

impl ResultsGrid {
    pub fn shape(&self) -> [usize; 4] {
        let c = &self.config;
        [
            c.pairs.len(),
            c.tests.len(),
            c.effect_sizes.len(),
            c.sample_sizes.len(),
        ]
    }

    pub fn cell(&self, pair: usize, test: usize, effect: usize, size: usize) -> &CellResult {
        let [_, nt, ne, nn] = self.shape();
        &self.cells[((pair * nt + test) * ne + effect) * nn + size]
    }

    pub fn rejection_rate(&self, pair: usize, test: usize, effect: usize, size: usize) -> f64 {
        self.cell(pair, test, effect, size).rejection_rate
    }

    pub fn standard_error(&self, pair: usize, test: usize, effect: usize, size: usize) -> f64 {
        self.cell(pair, test, effect, size).standard_error
    }

    /// Cells measured without a shift, i.e. false positive rates.
    pub fn false_positive_cells(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.effect_size == 0.0)
    }
}

/// Receives a callback after every finished cell.
pub trait ProgressSink: Sync {
    fn cell_finished(&self, done: usize, total: usize, cell: &CellResult);
}

/// Discards progress reports.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoProgress;

impl ProgressSink for NoProgress {
    fn cell_finished(&self, _: usize, _: usize, _: &CellResult) {}
}

fn cell_key(pair_fp: u64, test: TestId, effect: f64, n: usize) -> u64 {
    let mut h = mix64(pair_fp);
    h = mix64(h ^ test.code());
    h = mix64(h ^ effect.to_bits());
    mix64(h ^ n as u64)
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    pair: &DistributionPair,
    pair_fp: u64,
    test: TestId,
    effect: f64,
    n: usize,
    config: &GridConfig,
) -> Result<u64> {
    let mode = test.compares().center_mode();
    let first = pair.first.with_center_mode(mode);
    let second = pair
        .second
        .with_center_mode(mode)
        .shifted(effect * pair.sigma_pool());
    let key = cell_key(pair_fp, test, effect, n);
    (0..config.n_repetitions as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(x1, x2), rep| {
                let mut rng = RngStream::derived(config.base_seed, key, rep);
                first.fill(x1, &mut rng);
                second.fill(x2, &mut rng);
                let outcome = run_test(test, x1, x2, config.alpha, &config.settings, &mut rng)?;
                Ok(u64::from(outcome.reject))
            },
        )
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Runs every cell of the grid.
pub fn run_grid(config: &GridConfig, progress: &dyn ProgressSink) -> Result<ResultsGrid> {
    config.validate()?;
    let total = config.n_cells();
    let reps = config.n_repetitions as f64;
    let mut cells = Vec::with_capacity(total);
    for (pi, pair) in config.pairs.iter().enumerate() {
        let fp = pair.fingerprint();
        for &test in &config.tests {
            for &effect in &config.effect_sizes {
                for &n in &config.sample_sizes {
                    let rejections = run_cell(pair, fp, test, effect, n, config)?;
                    let rate = rejections as f64 / reps;
                    let cell = CellResult {
                        pair: pi,
                        pair_label: pair.label.clone(),
                        test,
                        effect_size: effect,
                        sample_size: n,
                        rejections,
                        rejection_rate: rate,
                        standard_error: (rate * (1.0 - rate) / reps).sqrt(),
                    };
                    progress.cell_finished(cells.len() + 1, total, &cell);
                    cells.push(cell);
                }
            }
        }
    }
    Ok(ResultsGrid {
        config: config.clone(),
        cells,
    })
}

/// One point of a false-positive-rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FprPoint {
    pub sample_size: usize,
    pub false_positive_rate: f64,
    pub standard_error: f64,
}

/// α* as a function of the sample size for one pair and one test.
pub fn fpr_curve(
    pair: &DistributionPair,
    test: TestId,
    sample_sizes: &[usize],
    n_repetitions: usize,
    alpha: f64,
    base_seed: u64,
    settings: &TestSettings,
) -> Result<Vec<FprPoint>> {
    let config = GridConfig {
        pairs: vec![pair.clone()],
        tests: vec![test],
        effect_sizes: vec![0.0],
        sample_sizes: sample_sizes.to_vec(),
        n_repetitions,
        alpha,
        base_seed,
        settings: *settings,
    };
    let grid = run_grid(&config, &NoProgress)?;
    Ok(grid
        .cells
        .iter()
        .map(|c| FprPoint {
            sample_size: c.sample_size,
            false_positive_rate: c.rejection_rate,
            standard_error: c.standard_error,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub sample_size: usize,
    pub power: Vec<f64>,
    pub standard_error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBlock {
    pub effect_size: f64,
    pub rows: Vec<PowerRow>,
}

/// Power per sample size (rows) and test (columns), one block per effect size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub pair_label: String,
    pub tests: Vec<TestId>,
    pub n_repetitions: usize,
    pub blocks: Vec<PowerBlock>,
}

impl PowerTable {
    /// Arranges the cells of one pair of a grid as a power table.
    pub fn from_grid(grid: &ResultsGrid, pair: usize) -> Self {
        let c = &grid.config;
        let blocks = c
            .effect_sizes
            .iter()
            .enumerate()
            .map(|(ei, &effect_size)| PowerBlock {
                effect_size,
                rows: c
                    .sample_sizes
                    .iter()
                    .enumerate()
                    .map(|(ni, &sample_size)| PowerRow {
                        sample_size,
                        power: (0..c.tests.len())
                            .map(|ti| grid.rejection_rate(pair, ti, ei, ni))
                            .collect(),
                        standard_error: (0..c.tests.len())
                            .map(|ti| grid.standard_error(pair, ti, ei, ni))
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            pair_label: c.pairs[pair].label.clone(),
            tests: c.tests.clone(),
            n_repetitions: c.n_repetitions,
            blocks,
        }
    }

    /// Power of `test` at `(effect_size, sample_size)`, if tabulated.
    pub fn power(&self, test: TestId, effect_size: f64, sample_size: usize) -> Option<f64> {
        let ti = self.tests.iter().position(|&t| t == test)?;
        let block = self.blocks.iter().find(|b| b.effect_size == effect_size)?;
        let row = block.rows.iter().find(|r| r.sample_size == sample_size)?;
        Some(row.power[ti])
    }
}

/// Whether a power entry reaches the conventional 0.8 target.
pub fn meets_power_target(power: f64) -> bool {
    power >= POWER_TARGET
}

/// Power of `tests` over `effect_sizes × sample_sizes` for one pair.
#[allow(clippy::too_many_arguments)]
pub fn power_table(
    pair: &DistributionPair,
    tests: &[TestId],
    effect_sizes: &[f64],
    sample_sizes: &[usize],
    n_repetitions: usize,
    alpha: f64,
    base_seed: u64,
    settings: &TestSettings,
) -> Result<PowerTable> {
    if let Some(e) = effect_sizes.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::config(format!(
            "power tables need positive effect sizes, got {e}"
        )));
    }
    let config = GridConfig {
        pairs: vec![pair.clone()],
        tests: tests.to_vec(),
        effect_sizes: effect_sizes.to_vec(),
        sample_sizes: sample_sizes.to_vec(),
        n_repetitions,
        alpha,
        base_seed,
        settings: *settings,
    };
    let grid = run_grid(&config, &NoProgress)?;
    Ok(PowerTable::from_grid(&grid, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{CenterMode, Family};

    fn normal(sigma: f64) -> DistributionSpec {
        DistributionSpec::new(Family::Normal, CenterMode::Mean, sigma, 0.0).unwrap()
    }

    fn small_config() -> GridConfig {
        GridConfig {
            pairs: vec![
                DistributionPair::new("n/n", normal(1.0), normal(1.0)),
                DistributionPair::new("n/2n", normal(1.0), normal(2.0)),
            ],
            tests: vec![TestId::TTest, TestId::MannWhitney, TestId::Permutation],
            effect_sizes: vec![0.0, 1.0],
            sample_sizes: vec![3, 10],
            n_repetitions: 300,
            alpha: 0.05,
            base_seed: 11,
            settings: TestSettings::reference(),
        }
    }

    #[test]
    fn validation_lists_every_problem() {
        let mut c = small_config();
        c.tests.clear();
        c.sample_sizes = vec![1];
        c.alpha = 2.0;
        match c.validate() {
            Err(Error::Config(p)) => assert_eq!(p.len(), 3, "{p:?}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn grid_is_deterministic_across_thread_counts() {
        let c = small_config();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_grid(&c, &NoProgress).unwrap());
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_grid(&c, &NoProgress).unwrap());
        assert_eq!(one, four);
        assert_eq!(one.cells.len(), c.n_cells());
    }

    #[test]
    fn cells_do_not_depend_on_their_neighbours() {
        let full = run_grid(&small_config(), &NoProgress).unwrap();
        let mut sub = small_config();
        sub.pairs.remove(0);
        sub.tests = vec![TestId::Permutation];
        sub.effect_sizes = vec![1.0];
        let part = run_grid(&sub, &NoProgress).unwrap();
        for (ni, _) in sub.sample_sizes.iter().enumerate() {
            assert_eq!(
                part.cell(0, 0, 0, ni).rejections,
                full.cell(1, 2, 1, ni).rejections
            );
        }
    }

    #[test]
    fn standard_error_identity() {
        let g = run_grid(&small_config(), &NoProgress).unwrap();
        for c in &g.cells {
            assert!((0.0..=1.0).contains(&c.rejection_rate));
            let r = c.rejection_rate;
            assert_eq!(c.standard_error, (r * (1.0 - r) / 300.0).sqrt());
        }
        assert_eq!(g.false_positive_cells().count(), g.cells.len() / 2);
    }

    #[test]
    fn power_table_layout_and_lookup() {
        let pair = DistributionPair::new("n/n", normal(1.0), normal(1.0));
        let t = power_table(
            &pair,
            &[TestId::TTest, TestId::Welch],
            &[2.0],
            &[10],
            500,
            0.05,
            3,
            &TestSettings::reference(),
        )
        .unwrap();
        assert_eq!(t.blocks.len(), 1);
        assert!(t.power(TestId::TTest, 2.0, 10).unwrap() > 0.9);
        assert!(t.power(TestId::MannWhitney, 2.0, 10).is_none());
        assert!(power_table(
            &pair,
            &[TestId::TTest],
            &[0.0],
            &[10],
            10,
            0.05,
            3,
            &TestSettings::default()
        )
        .is_err());
    }

    #[test]
    fn grid_json_round_trip() {
        let mut c = small_config();
        c.n_repetitions = 20;
        let g = run_grid(&c, &NoProgress).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: ResultsGrid = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }
}
