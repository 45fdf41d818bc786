//! Compact distribution descriptions for the command line, e.g.
//! `normal`, `lognormal:sigma_ln=0.5,sd=2` or `empirical:path=sac.txt`.

use std::path::Path;

use algocompare::distributions::{empirical_from_file, DEFAULT_SEPARATION, DEFAULT_SIGMA_LN};
use algocompare::{CenterMode, DistributionPair, DistributionSpec, Family};
use anyhow::{bail, Context, Result};

pub fn parse_spec(text: &str) -> Result<DistributionSpec> {
    let (family, params) = match text.split_once(':') {
        Some((f, p)) => (f.trim(), p),
        None => (text.trim(), ""),
    };
    let mut sd = None;
    let mut shift = 0.0;
    let mut sigma_ln = DEFAULT_SIGMA_LN;
    let mut separation = DEFAULT_SEPARATION;
    let mut path = None;
    let mut center = CenterMode::Mean;
    for kv in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = kv
            .split_once('=')
            .with_context(|| format!("expected key=value in '{text}', got '{kv}'"))?;
        let num = || {
            value
                .trim()
                .parse::<f64>()
                .with_context(|| format!("'{key}' needs a number, got '{value}'"))
        };
        match key.trim() {
            "sd" | "sigma" => sd = Some(num()?),
            "shift" => shift = num()?,
            "sigma_ln" => sigma_ln = num()?,
            "separation" => separation = num()?,
            "path" => path = Some(value.trim().to_string()),
            "center" => {
                center = match value.trim() {
                    "mean" => CenterMode::Mean,
                    "median" => CenterMode::Median,
                    other => bail!("center must be mean or median, got '{other}'"),
                }
            }
            other => bail!("unknown distribution parameter '{other}' in '{text}'"),
        }
    }
    let spec = match family {
        "normal" => DistributionSpec::new(Family::Normal, center, sd.unwrap_or(1.0), shift)?,
        "lognormal" => DistributionSpec::new(
            Family::Lognormal { sigma_ln },
            center,
            sd.unwrap_or(1.0),
            shift,
        )?,
        "bimodal" => DistributionSpec::new(
            Family::Bimodal { separation },
            center,
            sd.unwrap_or(1.0),
            shift,
        )?,
        "empirical" => {
            let path = path.with_context(|| format!("'{text}' needs path=FILE"))?;
            let spec = empirical_from_file(Path::new(&path), center)?;
            let spec = match sd {
                Some(s) => spec.with_sigma(s)?,
                None => spec,
            };
            spec.shifted(shift)
        }
        other => bail!("unknown distribution family '{other}'"),
    };
    Ok(spec)
}

pub fn parse_pair(first: &str, second: &str) -> Result<DistributionPair> {
    let a = parse_spec(first).with_context(|| format!("first distribution '{first}'"))?;
    let b = parse_spec(second).with_context(|| format!("second distribution '{second}'"))?;
    let label = format!("{}/{}", a.family().name(), b.family().name());
    Ok(DistributionPair::new(label, a, b))
}
