//! Command requests, their execution and their renderings.
//!
//! A request holds every parameter of a run. It is echoed into the run
//! manifest, so replaying an artifact only needs to deserialize it again.

use std::fmt::Write as _;
use std::io::IsTerminal;
use std::path::PathBuf;

use algocompare::advisor::{
    compare_learning_curves, describe_curves, recommend_sample_size, Band, Center, CurveComparison,
    CurveComparisonCriterion, SampleSizeRecommendation, StepSummary,
};
use algocompare::engine::{run_grid, CellResult, PowerTable, ProgressSink};
use algocompare::io::{
    self, describe_to_csv, embed_manifest, fpr_to_csv, grid_to_csv, power_table_to_markdown,
    power_table_to_text, read_curve_file, read_sample_file, Artifact, Command, RunManifest,
};
use algocompare::stattests::{effect_estimate, run_test, EffectEstimate};
use algocompare::{
    DistributionPair, GridConfig, ResultsGrid, RngStream, TestId, TestOutcome, TestSettings,
};
use anyhow::{bail, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
    Md,
}

impl Format {
    pub fn from_extension(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "md" => Some(Format::Md),
            "txt" => Some(Format::Text),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRequest {
    pub sample1: PathBuf,
    pub sample2: PathBuf,
    pub tests: Vec<TestId>,
    pub alpha: f64,
    pub seed: u64,
    pub settings: TestSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdviseRequest {
    pub epsilon: f64,
    pub target_power: f64,
    pub test: TestId,
    pub pair: DistributionPair,
    pub alpha: f64,
    pub n_repetitions: usize,
    pub seed: u64,
    pub settings: TestSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRequest {
    pub curves_a: PathBuf,
    pub curves_b: PathBuf,
    pub criterion: CurveComparisonCriterion,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescribeRequest {
    pub curves: PathBuf,
    pub band: Band,
    pub center: Center,
}

/// A fully specified run of one command.
#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    Test(TestRequest),
    Grid(GridConfig),
    FprCurve(GridConfig),
    PowerTable(GridConfig),
    Advise(AdviseRequest),
    CompareCurves(CompareRequest),
    Describe(DescribeRequest),
}

impl Request {
    pub fn manifest(&self) -> Result<RunManifest> {
        Ok(match self {
            Request::Test(r) => {
                RunManifest::new(Command::Test, vec![r.sample1.clone(), r.sample2.clone()], r)?
            }
            Request::Grid(c) => RunManifest::new(Command::Grid, vec![], c)?,
            Request::FprCurve(c) => RunManifest::new(Command::FprCurve, vec![], c)?,
            Request::PowerTable(c) => RunManifest::new(Command::PowerTable, vec![], c)?,
            Request::Advise(r) => RunManifest::new(Command::Advise, vec![], r)?,
            Request::CompareCurves(r) => RunManifest::new(
                Command::CompareCurves,
                vec![r.curves_a.clone(), r.curves_b.clone()],
                r,
            )?,
            Request::Describe(r) => RunManifest::new(Command::Describe, vec![r.curves.clone()], r)?,
        })
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        let c = m.config.clone();
        Ok(match m.command {
            Command::Test => Request::Test(serde_json::from_value(c)?),
            Command::Grid => Request::Grid(serde_json::from_value(c)?),
            Command::FprCurve => Request::FprCurve(serde_json::from_value(c)?),
            Command::PowerTable => Request::PowerTable(serde_json::from_value(c)?),
            Command::Advise => Request::Advise(serde_json::from_value(c)?),
            Command::CompareCurves => Request::CompareCurves(serde_json::from_value(c)?),
            Command::Describe => Request::Describe(serde_json::from_value(c)?),
        })
    }

    pub fn default_format(&self) -> Format {
        match self {
            Request::Grid(_) | Request::FprCurve(_) | Request::Describe(_) => Format::Csv,
            _ => Format::Text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub sample1: SampleSummary,
    pub sample2: SampleSummary,
    /// Absent when both samples have zero spread.
    pub effect: Option<EffectEstimate>,
    pub outcomes: Vec<TestOutcome>,
}

/// Computed result of a request.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Test(TestReport),
    Grid(ResultsGrid),
    FprCurve(ResultsGrid),
    PowerTable(ResultsGrid),
    Advise(SampleSizeRecommendation),
    CompareCurves(CurveComparison),
    Describe(Vec<StepSummary>),
}

struct StderrProgress;

impl ProgressSink for StderrProgress {
    fn cell_finished(&self, done: usize, total: usize, cell: &CellResult) {
        eprint!(
            "\r\x1b[2Kcell {done}/{total}: {} {} eps={} N={}",
            cell.pair_label, cell.test, cell.effect_size, cell.sample_size
        );
        if done == total {
            eprintln!();
        }
    }
}

fn grid(config: &GridConfig) -> Result<ResultsGrid> {
    let quiet = algocompare::engine::NoProgress;
    let progress: &dyn ProgressSink = if std::io::stderr().is_terminal() {
        &StderrProgress
    } else {
        &quiet
    };
    Ok(run_grid(config, progress)?)
}

fn summarize(s: &algocompare::Sample) -> SampleSummary {
    SampleSummary {
        label: s.label().to_string(),
        n: s.len(),
        mean: s.mean(),
        median: s.median(),
        std_dev: s.std_dev(),
    }
}

pub fn execute(request: &Request) -> Result<Output> {
    Ok(match request {
        Request::Test(r) => {
            let x1 = read_sample_file(&r.sample1)?;
            let x2 = read_sample_file(&r.sample2)?;
            let outcomes = r
                .tests
                .iter()
                .map(|&t| {
                    let mut rng = RngStream::new(r.seed, t.code());
                    run_test(t, &x1, &x2, r.alpha, &r.settings, &mut rng)
                })
                .collect::<algocompare::Result<Vec<_>>>()?;
            let effect = if x1.len() >= 2 && x2.len() >= 2 {
                effect_estimate(&x1, &x2).ok()
            } else {
                None
            };
            Output::Test(TestReport {
                sample1: summarize(&x1),
                sample2: summarize(&x2),
                effect,
                outcomes,
            })
        }
        Request::Grid(c) => Output::Grid(grid(c)?),
        Request::FprCurve(c) => Output::FprCurve(grid(c)?),
        Request::PowerTable(c) => Output::PowerTable(grid(c)?),
        Request::Advise(r) => Output::Advise(recommend_sample_size(
            r.epsilon,
            r.target_power,
            r.test,
            &r.pair,
            r.alpha,
            r.n_repetitions,
            r.seed,
            &r.settings,
        )?),
        Request::CompareCurves(r) => {
            let a = read_curve_file(&r.curves_a)?;
            let b = read_curve_file(&r.curves_b)?;
            let mut rng = RngStream::new(r.seed, 0);
            Output::CompareCurves(compare_learning_curves(&a, &b, &r.criterion, &mut rng)?)
        }
        Request::Describe(r) => {
            let set = read_curve_file(&r.curves)?;
            Output::Describe(describe_curves(&set, r.band, r.center)?)
        }
    })
}

fn json<T: Serialize>(manifest: &RunManifest, result: T) -> Result<String> {
    Ok(Artifact {
        manifest: manifest.clone(),
        result,
    }
    .to_json()?)
}

fn power_tables(g: &ResultsGrid) -> Vec<PowerTable> {
    (0..g.config.pairs.len())
        .map(|p| PowerTable::from_grid(g, p))
        .collect()
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

fn test_text(r: &TestReport) -> String {
    let mut out = String::new();
    for (name, s) in [("sample 1", &r.sample1), ("sample 2", &r.sample2)] {
        let _ = writeln!(
            out,
            "{name}: {} (n={}, mean={:.6}, median={:.6}, sd={:.6})",
            s.label, s.n, s.mean, s.median, s.std_dev
        );
    }
    match &r.effect {
        Some(e) => {
            let _ = writeln!(
                out,
                "effect: mean diff {:.6} (epsilon {:.3}), median diff {:.6} (epsilon {:.3}), pooled sd {:.6}",
                e.delta_mean, e.epsilon_mean, e.delta_median, e.epsilon_median, e.sigma_pool
            );
        }
        None => out.push_str("effect: undefined (zero pooled spread)\n"),
    }
    let alpha = r.outcomes.first().map_or(0.05, |o| o.alpha);
    let _ = writeln!(
        out,
        "\n{:<14}{:>9}{:>14}{:>12}  {:<26}reject at {alpha}",
        "test", "compares", "statistic", "p-value", "confidence interval"
    );
    for o in &r.outcomes {
        let ci = match (o.ci_low, o.ci_high) {
            (Some(l), Some(h)) => format!("[{l:.6}, {h:.6}]"),
            _ => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<14}{:>9}{:>14.6}{:>12}  {:<26}{}",
            o.test_id.name(),
            match o.compares {
                algocompare::Comparison::Means => "means",
                algocompare::Comparison::Medians => "medians",
            },
            o.statistic,
            fmt_opt(o.p_value, 6),
            ci,
            if o.reject { "yes" } else { "no" }
        );
    }
    out
}

fn advise_text(r: &SampleSizeRecommendation) -> String {
    let mut out = match (r.sample_size, r.power, r.standard_error) {
        (Some(n), Some(p), Some(se)) => format!(
            "recommended sample size: {n} (power {p:.3} +/- {se:.3} for epsilon {} with {})\n",
            r.expected_epsilon, r.test
        ),
        _ => format!(
            "no sample size on the ladder reaches power {} for epsilon {} with {}\n",
            r.target_power, r.expected_epsilon, r.test
        ),
    };
    out.push_str("\n    N   power      se\n");
    for p in &r.ladder {
        let mark = if p.power >= r.target_power { "*" } else { "" };
        let _ = writeln!(
            out,
            "{:>5}  {:.3}{mark:<1}  {:.4}",
            p.sample_size, p.power, p.standard_error
        );
    }
    out
}

fn compare_text(r: &CurveComparison) -> String {
    let c = &r.criterion;
    let mut out = format!(
        "verdict: {}\n{} of the last {} steps reject with {} at corrected alpha {} (need more than {})\n",
        r.verdict, r.n_rejections, c.n_comparisons, c.test, r.corrected_alpha, c.n_required
    );
    if let Some(d) = r.median_difference {
        let _ = writeln!(out, "median difference (a - b) over rejecting steps: {d}");
    }
    let _ = writeln!(
        out,
        "\n{:>12}{:>14}{:>12}  reject",
        "step", "a - b", "p-value"
    );
    for s in &r.steps {
        let _ = writeln!(
            out,
            "{:>12}{:>14.6}{:>12}  {}",
            s.step,
            s.difference,
            fmt_opt(s.outcome.p_value, 6),
            if s.outcome.reject { "yes" } else { "no" }
        );
    }
    out
}

fn grid_text(g: &ResultsGrid, markdown: bool) -> String {
    power_tables(g)
        .iter()
        .map(|t| {
            if markdown {
                power_table_to_markdown(t)
            } else {
                power_table_to_text(t)
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Renders `output` in `format`, embedding the manifest when `artifact` is
/// set (always for CSV and JSON).
pub fn render(
    output: &Output,
    manifest: &RunManifest,
    format: Format,
    artifact: bool,
) -> Result<String> {
    let unsupported =
        |what: &str| -> Result<String> { bail!("format {format:?} is not available for {what}") };
    let text = match (output, format) {
        (_, Format::Json) => {
            return match output {
                Output::Test(r) => json(manifest, r),
                Output::Grid(g) | Output::FprCurve(g) => json(manifest, g),
                Output::PowerTable(g) => json(manifest, power_tables(g)),
                Output::Advise(r) => json(manifest, r),
                Output::CompareCurves(r) => json(manifest, r),
                Output::Describe(r) => json(manifest, r),
            }
        }
        (Output::Grid(g) | Output::PowerTable(g), Format::Csv) => {
            return Ok(grid_to_csv(g, manifest)?)
        }
        (Output::FprCurve(g), Format::Csv) => return Ok(fpr_to_csv(g, manifest)?),
        (Output::Describe(rows), Format::Csv) => return Ok(describe_to_csv(rows, manifest)?),
        (
            Output::Grid(g) | Output::PowerTable(g) | Output::FprCurve(g),
            Format::Text | Format::Md,
        ) => grid_text(g, format == Format::Md),
        (Output::Test(r), Format::Text) => test_text(r),
        (Output::Advise(r), Format::Text) => advise_text(r),
        (Output::CompareCurves(r), Format::Text) => compare_text(r),
        (Output::Describe(rows), Format::Text) => {
            let mut out = format!(
                "{:>12}{:>14}{:>14}{:>14}\n",
                "step", "center", "low", "high"
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:>12}{:>14.6}{:>14.6}{:>14.6}",
                    r.step, r.center, r.low, r.high
                );
            }
            out
        }
        (Output::Test(_), _) => return unsupported("test"),
        (Output::Advise(_), _) => return unsupported("advise"),
        (Output::CompareCurves(_), _) => return unsupported("compare-curves"),
        (Output::Describe(_), _) => return unsupported("describe"),
    };
    if artifact {
        Ok(embed_manifest(&text, manifest, format == Format::Md)?)
    } else {
        Ok(text)
    }
}

/// Reads the manifest of an artifact and rebuilds its request.
pub fn replay_request(path: &std::path::Path) -> Result<(Request, Format)> {
    let manifest = io::read_manifest(path)?;
    let request = Request::from_manifest(&manifest)?;
    let text = std::fs::read_to_string(path)?;
    let format = if text.trim_start().starts_with('{') {
        Format::Json
    } else if text.starts_with("<!--") {
        Format::Md
    } else {
        Format::from_extension(path).unwrap_or_else(|| request.default_format())
    };
    Ok((request, format))
}
