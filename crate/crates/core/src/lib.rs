//! Statistical comparison of two algorithms from per-seed performance samples.
//!
//! The crate has three layers:
//!
//! * [`stattests`]: six two-sample difference tests (Student's t, Welch's t,
//!   Mann-Whitney U, ranked t, bootstrap confidence interval and permutation)
//!   behind one interface, plus relative effect-size estimation.
//! * [`engine`]: a Monte Carlo engine measuring the false positive rate and
//!   statistical power of those tests over grids of distribution pairs, effect
//!   sizes and sample sizes.
//! * [`advisor`]: sample-size recommendations, Bonferroni correction and
//!   multiple-comparison-aware comparison of whole learning curves.
//!
//! [`numerics`] and [`distributions`] supply the special functions, seeded
//! random streams and generative models the rest is built on. [`io`] handles
//! file formats, configuration and report rendering.
//!
//! ```
//! use algocompare::stattests::{welch_test, effect_estimate};
//!
//! let sac = [10.2, 11.5, 9.8, 12.1, 10.9, 11.7];
//! let td3 = [8.1, 9.0, 7.7, 9.9, 8.4, 8.8];
//! let outcome = welch_test(&sac, &td3, 0.05).unwrap();
//! assert!(outcome.reject);
//! let effect = effect_estimate(&sac, &td3).unwrap();
//! assert!(effect.epsilon_mean > 1.0);
//! ```

pub mod advisor;
pub mod distributions;
pub mod engine;
mod error;
pub mod io;
pub mod numerics;
pub mod stattests;

pub use distributions::{CenterMode, DistributionSpec, Family, Sample};
pub use engine::{DistributionPair, GridConfig, ResultsGrid};
pub use error::{Error, Result};
pub use numerics::RngStream;
pub use stattests::{Comparison, TestId, TestOutcome, TestSettings};

/// Tool version embedded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
