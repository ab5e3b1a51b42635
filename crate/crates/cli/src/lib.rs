//! `wsnloc` command line: scenario generation, localization, benchmark
//! sweeps and chart emission.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use wsnloc::bench::io::{self, SummaryRow, TrialRow, SUMMARY_HEADER, TRIAL_HEADER};
use wsnloc::bench::{self, svg, SweptParameter, DEFAULT_M, DEFAULT_N};
use wsnloc::{sim, ChannelParams, ExperimentConfig, MeasurementSet, Method, Scenario, SolverOptions};

pub mod config;

#[derive(Parser, Debug)]
#[command(name = "wsnloc", version, about = "Connectivity-regularized SDP localization for sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a connected deployment and its range measurements.
    Gen(GenArgs),
    /// Localize the unknown nodes of a measurement set.
    Solve(SolveArgs),
    /// Run a Monte-Carlo sweep and write per-trial and summary CSVs.
    Bench(BenchArgs),
    /// Render a trial or summary CSV as SVG.
    Plot(PlotArgs),
}

/// Network and channel overrides; unset values fall back to the defaults.
#[derive(Args, Debug, Default)]
struct ParamArgs {
    /// Unknown nodes [default: 15]
    #[arg(long)]
    n: Option<usize>,
    /// Anchors [default: 5]
    #[arg(long)]
    m: Option<usize>,
    /// Path-loss exponent [default: 3]
    #[arg(long)]
    gamma_p: Option<f64>,
    /// Shadowing standard deviation in dB [default: 3.5]
    #[arg(long)]
    sigma_db: Option<f64>,
    /// Anchor position error scale [default: 0.01]
    #[arg(long)]
    eps: Option<f64>,
    /// Communication range [default: 0.5]
    #[arg(long)]
    dmax: Option<f64>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Measurement JSON, bare or as written by `gen`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "proposed")]
    method: Method,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// `key = value` or JSON experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// exp1..exp4 or the swept parameter name.
    #[arg(long)]
    experiment: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[command(flatten)]
    params: ParamArgs,
    /// Trials per setting [default: 50]
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to one method; both run by default.
    #[arg(long)]
    method: Option<Method>,
    /// Output directory for `<name>_trials.csv` and `<name>_summary.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "WSNLOC_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// File written by `gen`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Generated {
    pub scenario: Scenario,
    pub measurements: MeasurementSet,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Failures print one line to stderr.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("wsnloc: {}", line.trim_start_matches("error: "));
            return 2;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("wsnloc: {}", format!("{e:#}").replace('\n', " "));
            1
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Plot(a) => plot(a),
    }
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, contents).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn apply_params(base: &mut ChannelParams, p: &ParamArgs) {
    if let Some(v) = p.gamma_p {
        base.gamma_p = v;
    }
    if let Some(v) = p.sigma_db {
        base.sigma_db = v;
    }
    if let Some(v) = p.eps {
        base.epsilon = v;
    }
    if let Some(v) = p.dmax {
        base.d_max = v;
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let mut params = ChannelParams::default();
    apply_params(&mut params, &a.params);
    params.validate()?;
    let n = a.params.n.unwrap_or(DEFAULT_N);
    let m = a.params.m.unwrap_or(DEFAULT_M);
    let scenario = sim::generate_scenario(n, m, &params, a.seed)?;
    let measurements = sim::make_measurements(&scenario, &params, &mut sim::measurement_rng(a.seed))?;
    emit(a.out.as_deref(), &to_json(&Generated { scenario, measurements })?)
}

/// Accepts either a bare measurement set or the `gen` output.
fn load_measurements(text: &str) -> Result<MeasurementSet> {
    let value: serde_json::Value = serde_json::from_str(text).context("input is not valid JSON")?;
    let inner = match value.get("measurements") {
        Some(m) => m.clone(),
        None => value,
    };
    serde_json::from_value(inner).context("invalid measurement set")
}

fn solve(a: SolveArgs) -> Result<()> {
    let meas = load_measurements(&read(&a.input)?)?;
    let result = wsnloc::localize(&meas, a.method, &SolverOptions::default())?;
    emit(a.out.as_deref(), &to_json(&result)?)
}

/// Flags override the config file, which overrides the defaults.
fn bench_config(a: &BenchArgs) -> Result<(ExperimentConfig, Option<usize>)> {
    let file = match &a.config {
        Some(path) => config::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?,
        None => config::BenchFile::default(),
    };
    let experiment = a
        .experiment
        .clone()
        .or(file.experiment)
        .ok_or_else(|| anyhow!("no experiment given (use --experiment or 'experiment' in --config)"))?;
    let swept: SweptParameter = experiment.parse()?;
    let mut cfg = ExperimentConfig::preset(swept);
    if let Some(name) = file.name {
        cfg.name = name;
    }
    if let Some(v) = a.values.clone().or(file.values.map(config::OneOrMany::into_vec)) {
        cfg.sweep_values = v;
    }
    let file_params = ParamArgs {
        n: file.n,
        m: file.m,
        gamma_p: file.gamma_p,
        sigma_db: file.sigma_db,
        eps: file.eps,
        dmax: file.d_max,
    };
    for p in [&file_params, &a.params] {
        apply_params(&mut cfg.params, p);
        cfg.n = p.n.unwrap_or(cfg.n);
        cfg.m = p.m.unwrap_or(cfg.m);
    }
    cfg.trials = a.trials.or(file.trials).unwrap_or(cfg.trials);
    cfg.base_seed = a.seed.or(file.seed).unwrap_or(cfg.base_seed);
    if let Some(m) = a.method {
        cfg.methods = vec![m];
    } else if let Some(ms) = file.methods {
        cfg.methods = ms.into_vec().iter().map(|s| s.parse()).collect::<wsnloc::Result<_>>()?;
    }
    cfg.validate()?;
    Ok((cfg, a.jobs.or(file.jobs)))
}

fn write_rows<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    io::write_csv(rows, std::io::BufWriter::new(file))?;
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let (cfg, jobs) = bench_config(&a)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let report = pool.install(|| bench::run_experiment(&cfg))?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_rows(&a.out.join(format!("{}_trials.csv", cfg.name)), &io::trial_rows(&report))?;
    write_rows(&a.out.join(format!("{}_summary.csv", cfg.name)), &io::summary_rows(&report))?;
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let text = read(&a.input)?;
    let header = text.lines().next().unwrap_or("").trim();
    let svg = if header == SUMMARY_HEADER {
        svg::summary_figure(&io::read_csv::<SummaryRow, _>(text.as_bytes())?)?
    } else if header == TRIAL_HEADER {
        svg::trials_figure(&io::read_csv::<TrialRow, _>(text.as_bytes())?)?
    } else {
        bail!("{}: unrecognized CSV header '{header}'", a.input.display());
    };
    emit(a.out.as_deref(), &svg)
}
