//! Generative models of algorithm performance.
//!
//! Each [`DistributionSpec`] is a standardized law: a raw family draw is
//! centered (by its mean or its median), rescaled to a target standard
//! deviation and then translated by `shift`. Centers and spreads of the
//! analytic families are computed in closed form.

use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numerics::RngStream;
use crate::{Error, Result};

/// Default log-scale sigma of the log-normal family.
pub const DEFAULT_SIGMA_LN: f64 = 1.0;
/// Default mode position of the bimodal family, as a fraction of its spread.
pub const DEFAULT_SEPARATION: f64 = 0.9;

/// Which central tendency is placed at zero before shifting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterMode {
    Mean,
    Median,
}

/// Distribution family together with its shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Normal,
    /// `exp(sigma_ln · Z)`.
    Lognormal {
        sigma_ln: f64,
    },
    /// Even mixture of `N(±separation, 1 - separation²)`.
    Bimodal {
        separation: f64,
    },
    /// Resampling with replacement from a finite source sample.
    Empirical {
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
    },
}

impl Family {
    pub fn lognormal() -> Self {
        Family::Lognormal {
            sigma_ln: DEFAULT_SIGMA_LN,
        }
    }

    pub fn bimodal() -> Self {
        Family::Bimodal {
            separation: DEFAULT_SEPARATION,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Lognormal { .. } => "lognormal",
            Family::Bimodal { .. } => "bimodal",
            Family::Empirical { .. } => "empirical",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Family::Normal => Ok(()),
            Family::Lognormal { sigma_ln } => {
                if sigma_ln.is_finite() && *sigma_ln > 0.0 && *sigma_ln < 20.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!(
                        "lognormal sigma_ln must lie in (0, 20), got {sigma_ln}"
                    )))
                }
            }
            Family::Bimodal { separation } => {
                if (0.0..1.0).contains(separation) {
                    Ok(())
                } else {
                    Err(Error::domain(format!(
                        "bimodal separation must lie in [0, 1), got {separation}"
                    )))
                }
            }
            Family::Empirical { values, .. } => {
                if values.len() < 2 {
                    return Err(Error::domain(format!(
                        "empirical source needs at least 2 values, got {}",
                        values.len()
                    )));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::domain(format!(
                        "empirical source contains non-finite value {v}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Mean, median and standard deviation of the raw (unstandardized) law.
    fn raw_moments(&self) -> (f64, f64, f64) {
        match self {
            Family::Normal | Family::Bimodal { .. } => (0.0, 0.0, 1.0),
            Family::Lognormal { sigma_ln } => {
                let s2 = sigma_ln * sigma_ln;
                let mean = (0.5 * s2).exp();
                let sd = (s2.exp_m1() * s2.exp()).sqrt();
                (mean, 1.0, sd)
            }
            Family::Empirical { values, .. } => {
                let mean = mean(values);
                let var =
                    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
                (mean, median(values), var.sqrt())
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    #[serde(flatten)]
    family: Family,
    center_mode: CenterMode,
    sigma: f64,
    #[serde(default)]
    shift: f64,
}

/// A standardized, shiftable performance distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct DistributionSpec {
    family: Family,
    center_mode: CenterMode,
    sigma: f64,
    shift: f64,
    // raw-law statistics, cached at construction
    raw_mean: f64,
    raw_median: f64,
    raw_sd: f64,
}

impl TryFrom<SpecRepr> for DistributionSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        DistributionSpec::new(r.family, r.center_mode, r.sigma, r.shift)
    }
}

impl From<DistributionSpec> for SpecRepr {
    fn from(s: DistributionSpec) -> Self {
        SpecRepr {
            family: s.family,
            center_mode: s.center_mode,
            sigma: s.sigma,
            shift: s.shift,
        }
    }
}

impl DistributionSpec {
    /// Builds a spec whose chosen center is at `shift` and whose standard
    /// deviation is `sigma`.
    pub fn new(family: Family, center_mode: CenterMode, sigma: f64, shift: f64) -> Result<Self> {
        family.validate()?;
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !shift.is_finite() {
            return Err(Error::domain(format!("shift must be finite, got {shift}")));
        }
        let (raw_mean, raw_median, raw_sd) = family.raw_moments();
        if !(raw_sd > 0.0) {
            return Err(Error::domain(
                "source distribution has zero spread and cannot be standardized",
            ));
        }
        Ok(Self {
            family,
            center_mode,
            sigma,
            shift,
            raw_mean,
            raw_median,
            raw_sd,
        })
    }

    /// Empirical spec over `values`, keeping their own spread unless `sigma`
    /// is given.
    pub fn empirical(
        values: Vec<f64>,
        source: Option<String>,
        center_mode: CenterMode,
        sigma: Option<f64>,
    ) -> Result<Self> {
        let family = Family::Empirical { values, source };
        family.validate()?;
        let sigma = match sigma {
            Some(s) => s,
            None => family.raw_moments().2,
        };
        Self::new(family, center_mode, sigma, 0.0)
    }

    pub(crate) fn clear_source(&mut self) {
        if let Family::Empirical { source, .. } = &mut self.family {
            *source = None;
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn center_mode(&self) -> CenterMode {
        self.center_mode
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Same law with `delta` added to every draw.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            shift: self.shift + delta,
            ..self.clone()
        }
    }

    /// Same family, spread and shift, recentered on another tendency.
    pub fn with_center_mode(&self, center_mode: CenterMode) -> Self {
        Self {
            center_mode,
            ..self.clone()
        }
    }

    /// Same family, center and shift, with another standard deviation.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.family.clone(), self.center_mode, sigma, self.shift)
    }

    fn scale(&self) -> f64 {
        self.sigma / self.raw_sd
    }

    fn raw_center(&self) -> f64 {
        match self.center_mode {
            CenterMode::Mean => self.raw_mean,
            CenterMode::Median => self.raw_median,
        }
    }

    /// Population mean of the law.
    pub fn mean(&self) -> f64 {
        (self.raw_mean - self.raw_center()) * self.scale() + self.shift
    }

    /// Population median of the law (the sample median of the source for
    /// empirical specs).
    pub fn median(&self) -> f64 {
        (self.raw_median - self.raw_center()) * self.scale() + self.shift
    }

    /// Values an empirical spec can emit; `None` for analytic families.
    pub fn support(&self) -> Option<Vec<f64>> {
        match &self.family {
            Family::Empirical { values, .. } => {
                Some(values.iter().map(|&v| self.transform(v)).collect())
            }
            _ => None,
        }
    }

    #[inline]
    fn transform(&self, raw: f64) -> f64 {
        (raw - self.raw_center()) * self.scale() + self.shift
    }

    #[inline]
    fn draw_raw(&self, rng: &mut RngStream) -> f64 {
        match &self.family {
            Family::Normal => rng.standard_normal(),
            Family::Lognormal { sigma_ln } => (sigma_ln * rng.standard_normal()).exp(),
            Family::Bimodal { separation } => {
                let spread = (1.0 - separation * separation).sqrt();
                let mode = if rng.coin() { *separation } else { -separation };
                mode + spread * rng.standard_normal()
            }
            Family::Empirical { values, .. } => values[rng.index(values.len())],
        }
    }

    /// Overwrites `out` with i.i.d. draws.
    pub fn fill(&self, out: &mut [f64], rng: &mut RngStream) {
        for v in out.iter_mut() {
            *v = self.transform(self.draw_raw(rng));
        }
    }

    /// Draws a sample of `n` i.i.d. values.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Sample> {
        if n == 0 {
            return Err(Error::domain("cannot draw a sample of size 0"));
        }
        let mut values = vec![0.0; n];
        self.fill(&mut values, rng);
        Ok(Sample {
            values,
            label: self.family.name().to_string(),
        })
    }

    /// One-line human description, e.g. `lognormal(σ_ln=1) sd=2 shift=0.5`.
    pub fn describe(&self) -> String {
        let family = match &self.family {
            Family::Normal => "normal".to_string(),
            Family::Lognormal { sigma_ln } => format!("lognormal(sigma_ln={sigma_ln})"),
            Family::Bimodal { separation } => format!("bimodal(separation={separation})"),
            Family::Empirical { values, source } => match source {
                Some(s) => format!("empirical({s}, n={})", values.len()),
                None => format!("empirical(n={})", values.len()),
            },
        };
        format!("{family} sd={} shift={}", self.sigma, self.shift)
    }
}

/// Builds a standardized spec; see [`DistributionSpec::new`].
pub fn make_standardized(
    family: Family,
    center_mode: CenterMode,
    sigma: f64,
    shift: f64,
) -> Result<DistributionSpec> {
    DistributionSpec::new(family, center_mode, sigma, shift)
}

/// Loads a sample file into an empirical spec centered per `center_mode`.
pub fn empirical_from_file(path: &Path, center_mode: CenterMode) -> Result<DistributionSpec> {
    let sample = crate::io::read_sample_file(path)?;
    if sample.len() < 2 {
        return Err(Error::Ingest {
            path: path.to_path_buf(),
            row: sample.len(),
            message: "need at least 2 values".into(),
        });
    }
    DistributionSpec::empirical(
        sample.into_values(),
        Some(path.display().to_string()),
        center_mode,
        None,
    )
}

/// An ordered collection of finite performance measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
    #[serde(default)]
    label: String,
}

impl Sample {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("a sample needs at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "sample value #{} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn median(&self) -> f64 {
        median(&self.values)
    }

    /// Bessel-corrected standard deviation (0 for a single value).
    pub fn std_dev(&self) -> f64 {
        variance(&self.values).sqrt()
    }
}

impl Deref for Sample {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Bessel-corrected variance; 0 for fewer than two values.
pub(crate) fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
