//! `algocompare`: statistical difference testing for comparing the
//! performance of learning algorithms over random seeds.

mod commands;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};

use algocompare::advisor::{Band, Center, CurveComparisonCriterion};
use algocompare::engine::{
    DEFAULT_CURVE_REPETITIONS, DEFAULT_TABLE_REPETITIONS, SAMPLE_SIZE_LADDER,
};
use algocompare::io::{read_curve_file, read_grid_config};
use algocompare::stattests::PermutationRule;
use algocompare::{GridConfig, TestId, TestSettings};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{
    execute, render, replay_request, AdviseRequest, CompareRequest, DescribeRequest, Format,
    Request, TestRequest,
};

/// Overrides the number of worker threads.
const THREADS_ENV: &str = "ALGOCOMPARE_THREADS";

#[derive(Parser)]
#[command(
    name = "algocompare",
    version,
    about = "Statistical difference testing for comparing algorithm performance"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Write the result to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the --out extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Inclusive,
    Strict,
}

#[derive(Args, Clone)]
struct ResamplingArgs {
    /// Bootstrap resamples.
    #[arg(long)]
    boot: Option<usize>,
    /// Random relabelings when exact enumeration is too large.
    #[arg(long)]
    perm: Option<usize>,
    /// How relabelings tying the observed difference are counted.
    #[arg(long, value_enum)]
    permutation_rule: Option<Rule>,
}

impl ResamplingArgs {
    fn apply(&self, mut settings: TestSettings) -> TestSettings {
        if let Some(b) = self.boot {
            settings.n_boot = b;
        }
        if let Some(p) = self.perm {
            settings.n_perm = p;
        }
        match self.permutation_rule {
            Some(Rule::Inclusive) => settings.permutation_rule = PermutationRule::Inclusive,
            Some(Rule::Strict) => settings.permutation_rule = PermutationRule::Strict,
            None => {}
        }
        settings
    }
}

#[derive(Args, Clone)]
struct SimulationArgs {
    /// Grid configuration file (TOML); replaces the distribution and axis flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First distribution, e.g. `normal` or `lognormal:sigma_ln=1,sd=1`.
    #[arg(long, default_value = "normal")]
    first: String,
    /// Second distribution; it receives the effect shift.
    #[arg(long, default_value = "normal")]
    second: String,
    /// Comma-separated tests, or `all`.
    #[arg(long, default_value = "all")]
    tests: String,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    resampling: ResamplingArgs,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run difference tests on two sample files.
    Test {
        sample1: PathBuf,
        sample2: PathBuf,
        /// Comma-separated tests, or `all`.
        #[arg(long, default_value = "all")]
        tests: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        resampling: ResamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a simulation grid described by a configuration file.
    Grid {
        config: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        resampling: ResamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// False positive rate as a function of the sample size.
    FprCurve {
        #[command(flatten)]
        sim: SimulationArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Statistical power per test, effect size and sample size.
    PowerTable {
        #[command(flatten)]
        sim: SimulationArgs,
        /// Comma-separated relative effect sizes.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        effects: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recommend a number of seeds for an expected effect size.
    Advise {
        /// Expected relative effect size.
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.8)]
        power: f64,
        #[arg(long, default_value = "welch")]
        test: String,
        #[arg(long, default_value = "normal")]
        first: String,
        #[arg(long, default_value = "normal")]
        second: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TABLE_REPETITIONS)]
        reps: usize,
        #[command(flatten)]
        resampling: ResamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare two sets of learning curves step by step.
    CompareCurves {
        curves_a: PathBuf,
        curves_b: PathBuf,
        /// Number of final steps compared [default: all steps].
        #[arg(long)]
        n_comparisons: Option<usize>,
        /// Conclude when more than this many steps reject [default: half].
        #[arg(long)]
        n_required: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value = "welch")]
        test: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        resampling: ResamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Per-step center and band of a set of learning curves.
    Describe {
        curves: PathBuf,
        /// `sd`, `se` or a percentile range such as `10,90`.
        #[arg(long, default_value = "sd")]
        band: String,
        #[arg(long, value_enum, default_value = "mean")]
        center: CenterArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute an artifact from its embedded manifest.
    Replay {
        artifact: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CenterArg {
    Mean,
    Median,
}

fn parse_tests(list: &str) -> Result<Vec<TestId>> {
    if list.trim() == "all" {
        return Ok(TestId::ALL.to_vec());
    }
    list.split(',').map(|t| Ok(t.parse::<TestId>()?)).collect()
}

fn parse_band(text: &str) -> Result<Band> {
    Ok(match text.trim() {
        "sd" => Band::Sd,
        "se" => Band::Se,
        other => {
            let (lo, hi) = other.split_once(',').with_context(|| {
                format!("band must be sd, se or LOW,HIGH percentiles, got '{other}'")
            })?;
            Band::Interpercentile {
                low: lo.trim().parse().context("low percentile")?,
                high: hi.trim().parse().context("high percentile")?,
            }
        }
    })
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::path::absolute(path).with_context(|| format!("resolving {}", path.display()))
}

fn simulation_config(
    sim: &SimulationArgs,
    effects: Vec<f64>,
    default_reps: usize,
) -> Result<GridConfig> {
    let mut config = match &sim.config {
        Some(path) => read_grid_config(path)?,
        None => GridConfig {
            pairs: vec![spec::parse_pair(&sim.first, &sim.second)?],
            tests: parse_tests(&sim.tests)?,
            effect_sizes: effects.clone(),
            sample_sizes: SAMPLE_SIZE_LADDER.to_vec(),
            n_repetitions: default_reps,
            alpha: 0.05,
            base_seed: 0,
            settings: TestSettings::reference(),
        },
    };
    if sim.config.is_some() && !effects.is_empty() && effects.iter().all(|e| *e == 0.0) {
        config.effect_sizes = effects;
    }
    if let Some(s) = &sim.sizes {
        config.sample_sizes = s.clone();
    }
    if let Some(r) = sim.reps {
        config.n_repetitions = r;
    }
    if let Some(a) = sim.alpha {
        config.alpha = a;
    }
    if let Some(s) = sim.seed {
        config.base_seed = s;
    }
    config.settings = sim.resampling.apply(config.settings);
    config.validate()?;
    Ok(config)
}

fn build(cmd: Cmd) -> Result<(Request, OutputArgs)> {
    Ok(match cmd {
        Cmd::Test {
            sample1,
            sample2,
            tests,
            alpha,
            seed,
            resampling,
            output,
        } => (
            Request::Test(TestRequest {
                sample1: absolute(&sample1)?,
                sample2: absolute(&sample2)?,
                tests: parse_tests(&tests)?,
                alpha,
                seed,
                settings: resampling.apply(TestSettings::default()),
            }),
            output,
        ),
        Cmd::Grid {
            config,
            reps,
            alpha,
            seed,
            resampling,
            output,
        } => {
            let mut c = read_grid_config(&config)?;
            if let Some(r) = reps {
                c.n_repetitions = r;
            }
            if let Some(a) = alpha {
                c.alpha = a;
            }
            if let Some(s) = seed {
                c.base_seed = s;
            }
            c.settings = resampling.apply(c.settings);
            c.validate()?;
            (Request::Grid(c), output)
        }
        Cmd::FprCurve { sim, output } => (
            Request::FprCurve(simulation_config(
                &sim,
                vec![0.0],
                DEFAULT_CURVE_REPETITIONS,
            )?),
            output,
        ),
        Cmd::PowerTable {
            sim,
            effects,
            output,
        } => {
            if sim.config.is_none() && effects.iter().any(|e| !(*e > 0.0)) {
                bail!("power tables need positive effect sizes");
            }
            let effects = if sim.config.is_some() {
                vec![]
            } else {
                effects
            };
            (
                Request::PowerTable(simulation_config(&sim, effects, DEFAULT_TABLE_REPETITIONS)?),
                output,
            )
        }
        Cmd::Advise {
            epsilon,
            power,
            test,
            first,
            second,
            alpha,
            seed,
            reps,
            resampling,
            output,
        } => (
            Request::Advise(AdviseRequest {
                epsilon,
                target_power: power,
                test: test.parse()?,
                pair: spec::parse_pair(&first, &second)?,
                alpha,
                n_repetitions: reps,
                seed,
                settings: resampling.apply(TestSettings::reference()),
            }),
            output,
        ),
        Cmd::CompareCurves {
            curves_a,
            curves_b,
            n_comparisons,
            n_required,
            alpha,
            test,
            seed,
            resampling,
            output,
        } => {
            let n_c = match n_comparisons {
                Some(n) => n,
                None => read_curve_file(&curves_a)?.eval_steps.len(),
            };
            let criterion = CurveComparisonCriterion {
                n_comparisons: n_c,
                n_required: n_required.unwrap_or((n_c / 2).max(1)),
                alpha,
                test: test.parse()?,
                settings: resampling.apply(TestSettings::default()),
            };
            criterion.validate()?;
            (
                Request::CompareCurves(CompareRequest {
                    curves_a: absolute(&curves_a)?,
                    curves_b: absolute(&curves_b)?,
                    criterion,
                    seed,
                }),
                output,
            )
        }
        Cmd::Describe {
            curves,
            band,
            center,
            output,
        } => (
            Request::Describe(DescribeRequest {
                curves: absolute(&curves)?,
                band: parse_band(&band)?,
                center: match center {
                    CenterArg::Mean => Center::Mean,
                    CenterArg::Median => Center::Median,
                },
            }),
            output,
        ),
        Cmd::Replay { .. } => unreachable!("replay is handled separately"),
    })
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{value}'"))?;
        if n == 0 {
            bail!("{THREADS_ENV} must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    let (request, output, replayed_format) = match cli.command {
        Cmd::Replay { artifact, output } => {
            let (request, format) = replay_request(&artifact)?;
            (request, output, Some(format))
        }
        other => {
            let (request, output) = build(other)?;
            (request, output, None)
        }
    };
    let format = output
        .format
        .or_else(|| output.out.as_deref().and_then(Format::from_extension))
        .or(replayed_format)
        .unwrap_or_else(|| request.default_format());
    let manifest = request.manifest()?;
    let result = execute(&request)?;
    let text = render(&result, &manifest, format, output.out.is_some())?;
    match &output.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> std::process::ExitCode {
    match run() {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
