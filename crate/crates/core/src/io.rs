//! File formats: sample and learning-curve ingestion, grid configuration
//! files, result artifacts and table rendering.
//!
//! Every artifact carries a [`RunManifest`] so that the exact computation can
//! be replayed. CSV artifacts hold it on a leading `# manifest: {...}` line;
//! JSON artifacts wrap the result as `{"manifest": ..., "result": ...}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::advisor::{LearningCurveSet, StepSummary};
use crate::distributions::{CenterMode, DistributionSpec, Family, Sample};
use crate::engine::{meets_power_target, DistributionPair, GridConfig, PowerTable, ResultsGrid};
use crate::stattests::{PermutationRule, TestId, TestSettings};
use crate::{Error, Result};

const MANIFEST_PREFIX: &str = "# manifest: ";
const MD_MANIFEST_PREFIX: &str = "<!-- manifest: ";
const MD_MANIFEST_SUFFIX: &str = " -->";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ingest(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn parse_value(field: &str) -> Option<f64> {
    let field = field.trim().trim_matches('"').trim();
    field.parse::<f64>().ok()
}

/// Reads one value per line (or a single-column CSV). A non-numeric first
/// line is taken as a header; blank lines are skipped.
pub fn read_sample_file(path: &Path) -> Result<Sample> {
    parse_sample(&read_text(path)?, path)
}

/// Parses sample text; `path` only labels errors and the sample.
pub fn parse_sample(text: &str, path: &Path) -> Result<Sample> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.iter().filter(|f| !f.trim().is_empty()).count() > 1 {
            return Err(ingest(
                path,
                row,
                format!("expected a single column, got '{line}'"),
            ));
        }
        let field = fields
            .iter()
            .find(|f| !f.trim().is_empty())
            .copied()
            .unwrap_or("");
        match parse_value(field) {
            Some(v) if v.is_finite() => values.push(v),
            Some(v) => return Err(ingest(path, row, format!("non-finite value {v}"))),
            None if row == 1 => {}
            None => {
                return Err(ingest(
                    path,
                    row,
                    format!("cannot parse '{line}' as a number"),
                ))
            }
        }
    }
    if values.is_empty() {
        return Err(ingest(path, 0, "file contains no values"));
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Sample::new(values, label)
}

/// Reads a learning-curve CSV with header `step,run_0,run_1,...`.
pub fn read_curve_file(path: &Path) -> Result<LearningCurveSet> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| ingest(path, 1, e.to_string()))?
        .clone();
    if header.get(0) != Some("step") {
        return Err(ingest(path, 1, "header must start with 'step'"));
    }
    let n_runs = header.len() - 1;
    if n_runs == 0 {
        return Err(ingest(path, 1, "no run columns"));
    }
    let mut steps = Vec::new();
    let mut runs = vec![Vec::new(); n_runs];
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| ingest(path, row, e.to_string()))?;
        if record.len() != n_runs + 1 {
            return Err(ingest(
                path,
                row,
                format!("expected {} fields, got {}", n_runs + 1, record.len()),
            ));
        }
        let step = record[0]
            .parse::<u64>()
            .map_err(|_| ingest(path, row, format!("invalid step '{}'", &record[0])))?;
        steps.push(step);
        for (j, field) in record.iter().skip(1).enumerate() {
            match parse_value(field) {
                Some(v) if v.is_finite() => runs[j].push(v),
                _ => {
                    return Err(ingest(
                        path,
                        row,
                        format!("invalid value '{field}' in column {}", &header[j + 1]),
                    ))
                }
            }
        }
    }
    if steps.is_empty() {
        return Err(ingest(path, 2, "no evaluation steps"));
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    LearningCurveSet::new(steps, runs, label)
}

/// Writes a learning-curve set in the `step,run_0,...` layout.
pub fn curves_to_csv(set: &LearningCurveSet) -> String {
    let mut out = String::from("step");
    for i in 0..set.n_runs() {
        let _ = write!(out, ",run_{i}");
    }
    out.push('\n');
    for (i, step) in set.eval_steps.iter().enumerate() {
        let _ = write!(out, "{step}");
        for run in &set.runs {
            let _ = write!(out, ",{}", run[i]);
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// grid configuration files

struct Collector {
    problems: Vec<String>,
}

impl Collector {
    fn push(&mut self, msg: String) {
        self.problems.push(msg);
    }

    fn unknown_keys(&mut self, table: &Table, allowed: &[&str], ctx: &str) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.push(format!("{ctx}unknown key '{key}'"));
            }
        }
    }

    fn number(&mut self, v: &Value, what: &str) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.push(format!("{what} must be a number, got {}", v.type_str()));
                None
            }
        }
    }

    fn count(&mut self, v: &Value, what: &str) -> Option<u64> {
        match v {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                self.push(format!("{what} must be a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn array<'a>(&mut self, v: &'a Value, what: &str) -> Option<&'a Vec<Value>> {
        match v {
            Value::Array(a) => Some(a),
            _ => {
                self.push(format!("{what} must be a list, got {}", v.type_str()));
                None
            }
        }
    }

    fn string<'a>(&mut self, v: &'a Value, what: &str) -> Option<&'a str> {
        match v {
            Value::String(s) => Some(s),
            _ => {
                self.push(format!("{what} must be a string, got {}", v.type_str()));
                None
            }
        }
    }
}

const GRID_KEYS: [&str; 10] = [
    "description",
    "pairs",
    "tests",
    "effect_sizes",
    "sample_sizes",
    "n_repetitions",
    "alpha",
    "seed",
    "settings",
    "permutation_rule",
];
const SETTINGS_KEYS: [&str; 4] = ["n_boot", "n_perm", "exact_cap", "permutation_rule"];
const PAIR_KEYS: [&str; 3] = ["label", "first", "second"];
const SPEC_KEYS: [&str; 8] = [
    "family",
    "sigma",
    "shift",
    "center_mode",
    "sigma_ln",
    "separation",
    "path",
    "values",
];

fn placeholder_spec() -> DistributionSpec {
    DistributionSpec::new(Family::Normal, CenterMode::Mean, 1.0, 0.0).expect("valid normal spec")
}

fn parse_rule(c: &mut Collector, v: &Value, ctx: &str) -> Option<PermutationRule> {
    match c.string(v, &format!("{ctx}permutation_rule"))? {
        "inclusive" => Some(PermutationRule::Inclusive),
        "strict" => Some(PermutationRule::Strict),
        other => {
            c.push(format!(
                "{ctx}permutation_rule must be 'inclusive' or 'strict', got '{other}'"
            ));
            None
        }
    }
}

fn parse_spec(
    c: &mut Collector,
    v: &Value,
    ctx: &str,
    base_dir: &Path,
) -> Option<DistributionSpec> {
    let Value::Table(t) = v else {
        c.push(format!("{ctx} must be a table, got {}", v.type_str()));
        return None;
    };
    let prefix = format!("{ctx}: ");
    c.unknown_keys(t, &SPEC_KEYS, &prefix);
    let mut ok = true;
    let mut num = |c: &mut Collector, key: &str| -> Option<f64> {
        let v = t.get(key)?;
        let x = c.number(v, &format!("{ctx}.{key}"));
        ok &= x.is_some();
        x
    };
    let sigma = num(c, "sigma");
    let shift = num(c, "shift").unwrap_or(0.0);
    let sigma_ln = num(c, "sigma_ln");
    let separation = num(c, "separation");
    let center_mode = match t.get("center_mode") {
        None => CenterMode::Mean,
        Some(v) => match c.string(v, &format!("{ctx}.center_mode")) {
            Some("mean") => CenterMode::Mean,
            Some("median") => CenterMode::Median,
            Some(other) => {
                c.push(format!(
                    "{ctx}.center_mode must be 'mean' or 'median', got '{other}'"
                ));
                return None;
            }
            None => return None,
        },
    };
    let Some(family) = t.get("family") else {
        c.push(format!("{ctx}: missing key 'family'"));
        return None;
    };
    let family = c.string(family, &format!("{ctx}.family"))?;
    let misplaced = |c: &mut Collector, key: &str| {
        if t.contains_key(key) {
            c.push(format!(
                "{ctx}: key '{key}' does not apply to family '{family}'"
            ));
        }
    };
    let family = match family {
        "normal" => {
            for k in ["sigma_ln", "separation", "path", "values"] {
                misplaced(c, k);
            }
            Family::Normal
        }
        "lognormal" => {
            for k in ["separation", "path", "values"] {
                misplaced(c, k);
            }
            Family::Lognormal {
                sigma_ln: sigma_ln.unwrap_or(crate::distributions::DEFAULT_SIGMA_LN),
            }
        }
        "bimodal" => {
            for k in ["sigma_ln", "path", "values"] {
                misplaced(c, k);
            }
            Family::Bimodal {
                separation: separation.unwrap_or(crate::distributions::DEFAULT_SEPARATION),
            }
        }
        "empirical" => {
            for k in ["sigma_ln", "separation"] {
                misplaced(c, k);
            }
            let loaded = match (t.get("path"), t.get("values")) {
                (Some(p), None) => {
                    let p = c.string(p, &format!("{ctx}.path"))?;
                    match read_sample_file(&base_dir.join(p)) {
                        Ok(s) => Some((s.into_values(), Some(p.to_string()))),
                        Err(e) => {
                            c.push(format!("{ctx}.path: {e}"));
                            None
                        }
                    }
                }
                (None, Some(v)) => {
                    let arr = c.array(v, &format!("{ctx}.values"))?;
                    let vals: Vec<f64> = arr
                        .iter()
                        .filter_map(|x| c.number(x, &format!("{ctx}.values entry")))
                        .collect();
                    (vals.len() == arr.len()).then_some((vals, None))
                }
                _ => {
                    c.push(format!(
                        "{ctx}: empirical family needs exactly one of 'path' or 'values'"
                    ));
                    None
                }
            };
            let (values, source) = loaded?;
            if !ok {
                return None;
            }
            return match DistributionSpec::empirical(values, source, center_mode, sigma) {
                Ok(s) => Some(s.shifted(shift)),
                Err(e) => {
                    c.push(format!("{ctx}: {e}"));
                    None
                }
            };
        }
        other => {
            c.push(format!(
                "{ctx}.family must be one of normal, lognormal, bimodal, empirical; got '{other}'"
            ));
            return None;
        }
    };
    if !ok {
        return None;
    }
    match DistributionSpec::new(family, center_mode, sigma.unwrap_or(1.0), shift) {
        Ok(s) => Some(s),
        Err(e) => {
            c.push(format!("{ctx}: {e}"));
            None
        }
    }
}

/// Parses a grid configuration, reporting every problem found. Relative
/// empirical sample paths resolve against `base_dir`.
pub fn parse_grid_config(text: &str, base_dir: &Path) -> Result<GridConfig> {
    let table: Table = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
    let mut c = Collector {
        problems: Vec::new(),
    };
    c.unknown_keys(&table, &GRID_KEYS, "");

    let mut settings = TestSettings::reference();
    if let Some(v) = table.get("settings") {
        match v {
            Value::Table(s) => {
                c.unknown_keys(s, &SETTINGS_KEYS, "settings: ");
                if let Some(n) = s.get("n_boot").and_then(|v| c.count(v, "settings.n_boot")) {
                    settings.n_boot = n as usize;
                }
                if let Some(n) = s.get("n_perm").and_then(|v| c.count(v, "settings.n_perm")) {
                    settings.n_perm = n as usize;
                }
                if let Some(n) = s
                    .get("exact_cap")
                    .and_then(|v| c.count(v, "settings.exact_cap"))
                {
                    settings.exact_cap = n;
                }
                if let Some(r) = s
                    .get("permutation_rule")
                    .and_then(|v| parse_rule(&mut c, v, "settings."))
                {
                    settings.permutation_rule = r;
                }
            }
            other => c.push(format!(
                "settings must be a table, got {}",
                other.type_str()
            )),
        }
    }
    if let Some(r) = table
        .get("permutation_rule")
        .and_then(|v| parse_rule(&mut c, v, ""))
    {
        settings.permutation_rule = r;
    }

    let mut pairs = vec![DistributionPair::new(
        "placeholder",
        placeholder_spec(),
        placeholder_spec(),
    )];
    match table.get("pairs") {
        None => c.push("missing key 'pairs'".into()),
        Some(v) => {
            if let Some(arr) = c.array(v, "pairs") {
                let mut parsed = Vec::new();
                let mut all_ok = true;
                for (i, p) in arr.iter().enumerate() {
                    let ctx = format!("pairs[{i}]");
                    let Value::Table(pt) = p else {
                        c.push(format!("{ctx} must be a table"));
                        all_ok = false;
                        continue;
                    };
                    c.unknown_keys(pt, &PAIR_KEYS, &format!("{ctx}: "));
                    let side = |key: &str, c: &mut Collector| match pt.get(key) {
                        Some(v) => parse_spec(c, v, &format!("{ctx}.{key}"), base_dir),
                        None => {
                            c.push(format!("{ctx}: missing key '{key}'"));
                            None
                        }
                    };
                    let first = side("first", &mut c);
                    let second = side("second", &mut c);
                    let label = match pt.get("label") {
                        Some(v) => c.string(v, &format!("{ctx}.label")).map(str::to_string),
                        None => None,
                    };
                    match (first, second) {
                        (Some(a), Some(b)) => {
                            let label = label.unwrap_or_else(|| {
                                format!("{}/{}", a.family().name(), b.family().name())
                            });
                            parsed.push(DistributionPair::new(label, a, b));
                        }
                        _ => all_ok = false,
                    }
                }
                if all_ok {
                    pairs = parsed;
                }
            }
        }
    }

    let mut tests = vec![TestId::TTest];
    match table.get("tests") {
        None => c.push("missing key 'tests'".into()),
        Some(v) => {
            if let Some(arr) = c.array(v, "tests") {
                let parsed: Vec<Option<TestId>> = arr
                    .iter()
                    .map(|t| {
                        let s = c.string(t, "tests entry")?;
                        s.parse::<TestId>().map_err(|e| c.push(e.to_string())).ok()
                    })
                    .collect();
                if parsed.iter().all(Option::is_some) {
                    tests = parsed.into_iter().flatten().collect();
                }
            }
        }
    }

    let mut effect_sizes = vec![0.0];
    match table.get("effect_sizes") {
        None => c.push("missing key 'effect_sizes'".into()),
        Some(v) => {
            if let Some(arr) = c.array(v, "effect_sizes") {
                let parsed: Vec<Option<f64>> = arr
                    .iter()
                    .map(|x| c.number(x, "effect_sizes entry"))
                    .collect();
                if parsed.iter().all(Option::is_some) {
                    effect_sizes = parsed.into_iter().flatten().collect();
                }
            }
        }
    }

    let mut sample_sizes = vec![2];
    match table.get("sample_sizes") {
        None => c.push("missing key 'sample_sizes'".into()),
        Some(v) => {
            if let Some(arr) = c.array(v, "sample_sizes") {
                let parsed: Vec<Option<u64>> = arr
                    .iter()
                    .map(|x| c.count(x, "sample_sizes entry"))
                    .collect();
                if parsed.iter().all(Option::is_some) {
                    sample_sizes = parsed.into_iter().flatten().map(|n| n as usize).collect();
                }
            }
        }
    }

    let mut n_repetitions = 1;
    match table.get("n_repetitions") {
        None => c.push("missing key 'n_repetitions'".into()),
        Some(v) => {
            if let Some(n) = c.count(v, "n_repetitions") {
                n_repetitions = n as usize;
            }
        }
    }
    let alpha = table
        .get("alpha")
        .and_then(|v| c.number(v, "alpha"))
        .unwrap_or(0.05);
    let base_seed = table
        .get("seed")
        .and_then(|v| c.count(v, "seed"))
        .unwrap_or(0);
    if let Some(v) = table.get("description") {
        c.string(v, "description");
    }

    let config = GridConfig {
        pairs,
        tests,
        effect_sizes,
        sample_sizes,
        n_repetitions,
        alpha,
        base_seed,
        settings,
    };
    if let Err(Error::Config(more)) = config.validate() {
        c.problems.extend(more);
    }
    if c.problems.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(c.problems))
    }
}

/// Reads a grid configuration file.
pub fn read_grid_config(path: &Path) -> Result<GridConfig> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_grid_config(&text, base)
}

// ---------------------------------------------------------------------------
// artifacts

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Test,
    Grid,
    FprCurve,
    PowerTable,
    Advise,
    CompareCurves,
    Describe,
}

/// Everything needed to recompute an artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    /// Full parameter set of the command, seeds and resampling counts included.
    pub config: serde_json::Value,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: Command, inputs: Vec<PathBuf>, config: impl Serialize) -> Result<Self> {
        Ok(Self {
            command,
            inputs,
            config: serde_json::to_value(config)?,
            tool_version: crate::VERSION.to_string(),
        })
    }

    /// The manifest as a CSV comment line, newline included.
    pub fn comment_line(&self) -> Result<String> {
        Ok(format!(
            "{MANIFEST_PREFIX}{}\n",
            serde_json::to_string(self)?
        ))
    }
}

/// Prepends the manifest to a rendered report, as an HTML comment for
/// markdown and as a `#` line otherwise.
pub fn embed_manifest(report: &str, manifest: &RunManifest, markdown: bool) -> Result<String> {
    let head = if markdown {
        format!(
            "{MD_MANIFEST_PREFIX}{}{MD_MANIFEST_SUFFIX}\n",
            serde_json::to_string(manifest)?
        )
    } else {
        manifest.comment_line()?
    };
    Ok(head + report)
}

/// A result together with the manifest that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub manifest: RunManifest,
    pub result: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Extracts the manifest from a JSON or CSV artifact.
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let artifact: Artifact<serde_json::Value> = serde_json::from_str(&text)?;
        return Ok(artifact.manifest);
    }
    for line in text.lines() {
        if let Some(json) = line.strip_prefix(MANIFEST_PREFIX) {
            return Ok(serde_json::from_str(json)?);
        }
        if let Some(json) = line
            .strip_prefix(MD_MANIFEST_PREFIX)
            .and_then(|l| l.strip_suffix(MD_MANIFEST_SUFFIX))
        {
            return Ok(serde_json::from_str(json)?);
        }
    }
    Err(ingest(path, 1, "no run manifest found"))
}

fn csv_string(manifest: &RunManifest, header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::config(format!("csv output failed: {e}"));
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        writer.write_record(&row).map_err(csv_err)?;
    }
    let body = writer
        .into_inner()
        .map_err(|e| Error::config(format!("csv output failed: {e}")))?;
    let mut out = manifest.comment_line()?;
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

/// One row per grid cell, floats in shortest round-trip form.
pub fn grid_to_csv(grid: &ResultsGrid, manifest: &RunManifest) -> Result<String> {
    let reps = grid.config.n_repetitions.to_string();
    let rows = grid
        .cells
        .iter()
        .map(|c| {
            vec![
                c.pair.to_string(),
                c.pair_label.clone(),
                c.test.name().to_string(),
                c.effect_size.to_string(),
                c.sample_size.to_string(),
                reps.clone(),
                c.rejections.to_string(),
                c.rejection_rate.to_string(),
                c.standard_error.to_string(),
            ]
        })
        .collect();
    csv_string(
        manifest,
        &[
            "pair",
            "pair_label",
            "test",
            "effect_size",
            "sample_size",
            "n_repetitions",
            "rejections",
            "rejection_rate",
            "standard_error",
        ],
        rows,
    )
}

/// False positive rates of every `ε = 0` cell of a grid.
pub fn fpr_to_csv(grid: &ResultsGrid, manifest: &RunManifest) -> Result<String> {
    let rows = grid
        .false_positive_cells()
        .map(|c| {
            vec![
                c.pair_label.clone(),
                c.test.name().to_string(),
                c.sample_size.to_string(),
                c.rejection_rate.to_string(),
                c.standard_error.to_string(),
            ]
        })
        .collect();
    csv_string(
        manifest,
        &[
            "pair_label",
            "test",
            "sample_size",
            "false_positive_rate",
            "standard_error",
        ],
        rows,
    )
}

/// Per-step curve summaries.
pub fn describe_to_csv(rows: &[StepSummary], manifest: &RunManifest) -> Result<String> {
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                r.center.to_string(),
                r.low.to_string(),
                r.high.to_string(),
            ]
        })
        .collect();
    csv_string(manifest, &["step", "center", "low", "high"], rows)
}

/// Power tables in long form: one row per `(effect, N, test)`.
pub fn power_table_to_csv(table: &PowerTable, manifest: &RunManifest) -> Result<String> {
    let mut rows = Vec::new();
    for block in &table.blocks {
        for row in &block.rows {
            for (i, test) in table.tests.iter().enumerate() {
                rows.push(vec![
                    block.effect_size.to_string(),
                    row.sample_size.to_string(),
                    test.name().to_string(),
                    row.power[i].to_string(),
                    row.standard_error[i].to_string(),
                ]);
            }
        }
    }
    csv_string(
        manifest,
        &[
            "effect_size",
            "sample_size",
            "test",
            "power",
            "standard_error",
        ],
        rows,
    )
}

/// Aligned plain-text rendering; entries reaching the power target carry `*`.
pub fn power_table_to_text(table: &PowerTable) -> String {
    let width = table
        .tests
        .iter()
        .map(|t| t.column_label().len())
        .max()
        .unwrap_or(0)
        .max(6);
    let mut out = format!(
        "{} ({} repetitions, * marks power >= 0.8)\n",
        table.pair_label, table.n_repetitions
    );
    for block in &table.blocks {
        let _ = writeln!(out, "\nepsilon = {}", block.effect_size);
        let _ = write!(out, "{:>5}", "N");
        for t in &table.tests {
            let _ = write!(out, "  {:>width$}", t.column_label());
        }
        out.push('\n');
        for row in &block.rows {
            let _ = write!(out, "{:>5}", row.sample_size);
            for p in &row.power {
                let mark = if meets_power_target(*p) { "*" } else { " " };
                let _ = write!(out, "  {:>w$}{mark}", format!("{p:.3}"), w = width - 1);
            }
            out.push('\n');
        }
    }
    out
}

/// Markdown rendering; entries reaching the power target are bold.
pub fn power_table_to_markdown(table: &PowerTable) -> String {
    let mut out = format!(
        "**{}** ({} repetitions, bold marks power >= 0.8)\n",
        table.pair_label, table.n_repetitions
    );
    for block in &table.blocks {
        let _ = writeln!(out, "\nepsilon = {}\n", block.effect_size);
        out.push_str("| N |");
        for t in &table.tests {
            let _ = write!(out, " {} |", t.column_label());
        }
        out.push_str("\n|---:|");
        for _ in &table.tests {
            out.push_str("---:|");
        }
        out.push('\n');
        for row in &block.rows {
            let _ = write!(out, "| {} |", row.sample_size);
            for p in &row.power {
                if meets_power_target(*p) {
                    let _ = write!(out, " **{p:.3}** |");
                } else {
                    let _ = write!(out, " {p:.3} |");
                }
            }
            out.push('\n');
        }
    }
    out
}
