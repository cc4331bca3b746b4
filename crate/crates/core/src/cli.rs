//! Experiment harness behind the `sleepcolor` binary.
//!
//! Exit codes: 0 when every run completed with a proper total coloring (and,
//! for `oracle`, every probability is at least 1/4); 2 when a run hit its
//! round cap; 1 for usage, instance and every other error. Errors go to
//! standard error as `error: <kind>: <message>`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::coloring::{run_pipeline, PipelineConfig, PipelineRun};
use crate::error::{Error, Result};
use crate::graph::{generate, read_instance, Family};
use crate::graph::{ColoringInstance, Validity};
use crate::metrics::{decimal6, RunMetrics};
use crate::oracle::{exact_adoption_probabilities, exact_expected_uncolored_after_one_iteration, tiny_catalog};
use crate::simcore::Round;

/// Number of decay-histogram columns in the CSV.
pub const CSV_DECAY_COLUMNS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "sleepcolor", version, about = "Sleeping-model (deg+1)-list-coloring experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline over a seed sweep and write one CSV row per run.
    Run(RunArgs),
    /// Run a size sweep and fit worst-case awake rounds against log2 log2 n.
    Scaling(ScalingArgs),
    /// Exact single-iteration adoption probabilities on tiny instances.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Path,
    Cycle,
    Clique,
    Gnp,
    Regular,
    Star,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Number of seeds; runs use seeds base..base+k-1.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Multiplier of log2 log2 n in the phase-1 iteration budget.
    #[arg(long, default_value_t = 3.0)]
    pub k1_coef: f64,
    #[arg(long)]
    pub phase2_threshold: Option<usize>,
    #[arg(long, default_value_t = 40)]
    pub phase2_cap: u32,
    #[arg(long)]
    pub round_cap: Option<Round>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trace destination.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, conflicts_with = "instance")]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability for gnp (default 8/n) or degree for regular
    /// (default 3).
    #[arg(long)]
    pub param: Option<f64>,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[arg(long, value_enum, default_value = "gnp")]
    pub family: FamilyArg,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub param: Option<f64>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: Option<PathBuf>,
}

fn family(arg: FamilyArg, n: usize, param: Option<f64>) -> Result<Family> {
    Ok(match arg {
        FamilyArg::Path => Family::Path,
        FamilyArg::Cycle => Family::Cycle,
        FamilyArg::Clique => Family::Clique,
        FamilyArg::Star => Family::Star,
        FamilyArg::Gnp => Family::Gnp(param.unwrap_or(8.0 / n.max(1) as f64).min(1.0)),
        FamilyArg::Regular => {
            let d = param.unwrap_or(3.0);
            if d < 0.0 || d.fract() != 0.0 {
                return Err(Error::Usage(format!("regular degree must be a whole number, got {d}")));
            }
            Family::RandomRegular(d as usize)
        }
    })
}

fn pipeline_config(args: &PipelineArgs, seed: u64) -> PipelineConfig {
    PipelineConfig {
        k1_coefficient: args.k1_coef,
        phase2_threshold: args.phase2_threshold,
        phase2_iteration_cap: args.phase2_cap,
        round_cap: args.round_cap,
        trace: args.trace.is_some(),
        ..PipelineConfig::with_seed(seed)
    }
}

fn check_pipeline_args(args: &PipelineArgs) -> Result<()> {
    if args.seeds == 0 {
        return Err(Error::Usage("--seeds must be at least 1".into()));
    }
    if args.seed_base.checked_add(args.seeds - 1).is_none() {
        return Err(Error::Usage("seed range overflows 64 bits".into()));
    }
    if !(args.k1_coef.is_finite() && args.k1_coef >= 0.0) {
        return Err(Error::Usage("--k1-coef must be a finite non-negative number".into()));
    }
    if args.phase2_threshold == Some(0) {
        return Err(Error::Usage("--phase2-threshold must be at least 1".into()));
    }
    Ok(())
}

/// Where a run's graph comes from.
#[derive(Debug, Clone)]
enum Source {
    Generated(Family),
    File(ColoringInstance),
}

/// One completed or capped run.
#[derive(Debug)]
struct Row {
    seed: u64,
    family: String,
    n: usize,
    param: String,
    k: u32,
    threshold: usize,
    metrics: RunMetrics,
    complete: bool,
    trace: Option<String>,
}

fn execute(source: &Source, n: usize, config: PipelineConfig) -> Result<Row> {
    let seed = config.seed;
    let (family_name, param, instance) = match source {
        Source::Generated(f) => (
            f.name().to_string(),
            f.param().map(|p| p.to_string()).unwrap_or_default(),
            ColoringInstance::with_default_lists(generate(*f, n, seed)?),
        ),
        Source::File(inst) => ("file".to_string(), String::new(), inst.clone()),
    };
    let n = instance.node_count();
    let row = |metrics: RunMetrics, complete: bool, trace: Option<String>| Row {
        seed,
        family: family_name.clone(),
        n,
        param: param.clone(),
        k: config.iterations(n),
        threshold: config.threshold(n),
        metrics,
        complete,
        trace,
    };
    match run_pipeline(&instance, &config) {
        Ok(PipelineRun { metrics, trace, .. }) => Ok(row(metrics, true, trace.map(|t| t.render()))),
        Err(Error::RunIncomplete { partial, .. }) => Ok(row(partial.metrics, false, None)),
        Err(e) => Err(e),
    }
}

fn csv_header() -> String {
    let mut h = String::from(
        "seed,family,n,param,K,threshold,worst_awake,avg_awake,total_rounds,valid,phase2_incomplete",
    );
    for i in 1..=CSV_DECAY_COLUMNS {
        write!(h, ",x{i}").unwrap();
    }
    h
}

fn csv_row(r: &Row) -> String {
    let m = &r.metrics;
    let valid = r.complete && m.validity == Validity::ProperTotal;
    let mut line = format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.seed,
        r.family,
        r.n,
        r.param,
        r.k,
        r.threshold,
        m.worst_case_awake,
        decimal6(&m.average_awake),
        m.total_rounds,
        valid as u8,
        m.phase2_incomplete as u8
    );
    for i in 0..CSV_DECAY_COLUMNS {
        write!(line, ",{}", m.decay_histogram.get(i).copied().unwrap_or(0)).unwrap();
    }
    line
}

fn render_csv(meta: &[(String, String)], rows: &[Row]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        writeln!(out, "# {k}={v}").unwrap();
    }
    writeln!(out, "{}", csv_header()).unwrap();
    for r in rows {
        writeln!(out, "{}", csv_row(r)).unwrap();
    }
    out
}

fn render_traces(rows: &[Row]) -> String {
    let mut out = String::new();
    for r in rows {
        writeln!(out, "# seed={} n={}", r.seed, r.n).unwrap();
        match &r.trace {
            Some(t) => out.push_str(t),
            None => out.push_str("# run incomplete, no trace\n"),
        }
    }
    out
}

fn emit(path: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sweep(source: &Source, n: usize, args: &PipelineArgs) -> Result<Vec<Row>> {
    let seeds: Vec<u64> = (0..args.seeds).map(|k| args.seed_base + k).collect();
    seeds
        .par_iter()
        .map(|&seed| execute(source, n, pipeline_config(args, seed)))
        .collect()
}

/// Outcome of a sweep: exit code 0, or 2 when some run was capped, or 1
/// when some completed run was not a proper total coloring.
fn sweep_status(rows: &[Row], stderr: &mut dyn Write) -> Result<i32> {
    let capped = rows.iter().filter(|r| !r.complete).count();
    let invalid = rows
        .iter()
        .filter(|r| r.complete && r.metrics.validity != Validity::ProperTotal)
        .count();
    if invalid > 0 {
        writeln!(stderr, "error: invalid: {invalid} run(s) produced an improper or partial coloring")?;
        return Ok(1);
    }
    if capped > 0 {
        writeln!(stderr, "error: run-incomplete: {capped} run(s) hit the round cap")?;
        return Ok(2);
    }
    Ok(0)
}

fn pipeline_meta(args: &PipelineArgs) -> Vec<(String, String)> {
    let auto = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
    vec![
        ("seeds".into(), args.seeds.to_string()),
        ("seed_base".into(), args.seed_base.to_string()),
        ("k1_coefficient".into(), args.k1_coef.to_string()),
        ("phase2_threshold".into(), auto(args.phase2_threshold.map(|t| t.to_string()))),
        ("phase2_iteration_cap".into(), args.phase2_cap.to_string()),
        ("round_cap".into(), auto(args.round_cap.map(|r| r.to_string()))),
    ]
}

pub fn cmd_run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    check_pipeline_args(&args.pipeline)?;
    let (source, n) = match (&args.instance, args.family) {
        (Some(path), None) => {
            if args.n.is_some() || args.param.is_some() {
                return Err(Error::Usage("--n and --param do not apply to --instance".into()));
            }
            let inst = read_instance(path)?;
            let n = inst.node_count();
            (Source::File(inst), n)
        }
        (None, Some(f)) => {
            let n = args.n.ok_or_else(|| Error::Usage("--family needs --n".into()))?;
            (Source::Generated(family(f, n, args.param)?), n)
        }
        _ => return Err(Error::Usage("give exactly one of --family or --instance".into())),
    };
    let rows = sweep(&source, n, &args.pipeline)?;
    let mut meta = vec![("command".to_string(), "run".to_string())];
    match &source {
        Source::Generated(f) => {
            meta.push(("family".into(), f.name().into()));
            meta.push(("n".into(), n.to_string()));
            meta.push(("param".into(), f.param().map(|p| p.to_string()).unwrap_or_default()));
        }
        Source::File(_) => {
            meta.push(("family".into(), "file".into()));
            meta.push(("n".into(), n.to_string()));
        }
    }
    meta.extend(pipeline_meta(&args.pipeline));
    emit(args.pipeline.out.as_ref(), &render_csv(&meta, &rows), stdout)?;
    if let Some(p) = &args.pipeline.trace {
        fs::write(p, render_traces(&rows))?;
    }
    if args.pipeline.out.is_some() {
        let worst = rows.iter().map(|r| r.metrics.worst_case_awake).max().unwrap_or(0);
        let avg = rows.iter().map(|r| r.metrics.average_awake_f64()).sum::<f64>() / rows.len() as f64;
        writeln!(
            stdout,
            "{} run(s), n={n}: max worst_awake={worst}, mean avg_awake={avg:.3}",
            rows.len()
        )?;
    }
    sweep_status(&rows, stderr)
}

/// Least-squares line `y = a x + b`; `None` unless there are two distinct `x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if xs.len() < 2 || sxx <= f64::EPSILON {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    Some((a, my - a * mx))
}

/// `log2 log2 n`, zero when `log2 n <= 1`.
pub fn loglog(n: usize) -> f64 {
    let l = (n.max(1) as f64).log2();
    if l <= 1.0 {
        0.0
    } else {
        l.log2()
    }
}

pub fn cmd_scaling(args: &ScalingArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    check_pipeline_args(&args.pipeline)?;
    if args.sizes.is_empty() {
        return Err(Error::Usage("--sizes is empty".into()));
    }
    if let Some(&bad) = args.sizes.iter().find(|&&n| n == 0) {
        return Err(Error::Usage(format!("size {bad} is not positive")));
    }
    // Resolve the family per size so that gnp defaults to expected degree 8.
    let mut rows = Vec::new();
    for &n in &args.sizes {
        let source = Source::Generated(family(args.family, n, args.param)?);
        rows.extend(sweep(&source, n, &args.pipeline)?);
    }
    let mut meta = vec![
        ("command".to_string(), "scaling".to_string()),
        ("family".into(), format!("{:?}", args.family).to_lowercase()),
        (
            "sizes".into(),
            args.sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "),
        ),
        ("param".into(), args.param.map(|p| p.to_string()).unwrap_or_else(|| "auto".into())),
    ];
    meta.extend(pipeline_meta(&args.pipeline));
    let csv = render_csv(&meta, &rows);
    if let Some(p) = &args.pipeline.out {
        fs::write(p, &csv)?;
    }
    if let Some(p) = &args.pipeline.trace {
        fs::write(p, render_traces(&rows))?;
    }

    let mut report = String::from(
        "n,loglog_n,runs,mean_avg_awake,max_worst_awake,p95_worst_awake,max_total_rounds,all_valid,phase2_incomplete_runs\n",
    );
    let (mut xs, mut worst, mut avg) = (Vec::new(), Vec::new(), Vec::new());
    for &n in &args.sizes {
        let group: Vec<RunMetrics> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.metrics.clone())
            .collect();
        let s = crate::metrics::aggregate(&group)?;
        writeln!(
            report,
            "{n},{:.4},{},{:.6},{},{},{},{},{}",
            loglog(n),
            s.runs,
            s.average_awake.mean,
            s.worst_awake.max,
            s.worst_awake.p95,
            s.total_rounds.max,
            s.all_valid as u8,
            s.phase2_incomplete_runs
        )
        .unwrap();
        xs.push(loglog(n));
        worst.push(s.worst_awake.max);
        avg.push(s.average_awake.mean);
    }
    match least_squares(&xs, &worst) {
        Some((a, b)) => {
            let residual = xs
                .iter()
                .zip(&worst)
                .map(|(x, y)| (y - (a * x + b)).abs())
                .fold(0.0, f64::max);
            writeln!(
                report,
                "fit max_worst_awake = a*log2log2(n) + b: a={a:.4} b={b:.4} max_residual={residual:.4}"
            )
            .unwrap();
            let (slope, _) = least_squares(&xs, &avg).expect("same abscissae");
            writeln!(report, "fit mean_avg_awake slope={slope:.4}").unwrap();
        }
        None => report.push_str("fit: needs at least two distinct sizes\n"),
    }
    stdout.write_all(report.as_bytes())?;
    if args.pipeline.out.is_none() {
        stdout.write_all(csv.as_bytes())?;
    }
    sweep_status(&rows, stderr)
}

fn quarter() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(4))
}

pub fn cmd_oracle(args: &OracleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let entries: Vec<(String, ColoringInstance)> = match &args.instance {
        Some(p) => vec![(p.display().to_string(), read_instance(p)?)],
        None => tiny_catalog().into_iter().map(|e| (e.name, e.instance)).collect(),
    };
    let mut below = 0usize;
    for (name, inst) in &entries {
        let probs = exact_adoption_probabilities(inst)?;
        for (v, p) in &probs {
            writeln!(stdout, "{name} node={v} p={p}")?;
            if *p < quarter() {
                below += 1;
            }
        }
        writeln!(
            stdout,
            "{name} expected_uncolored={}",
            exact_expected_uncolored_after_one_iteration(inst)?
        )?;
    }
    if below > 0 {
        writeln!(stderr, "error: bound: {below} node(s) adopt with probability below 1/4")?;
        return Ok(1);
    }
    Ok(0)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Instance(_) => "instance",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
        Error::Program(_) => "program",
        Error::RunIncomplete { .. } => "run-incomplete",
        Error::TooLargeForOracle { .. } => "oracle",
        Error::Usage(_) => "usage",
        Error::Internal(_) => "internal",
    }
}

fn error_message(e: &Error) -> String {
    match e {
        Error::Instance(x) => x.to_string(),
        Error::Parse(x) => x.to_string(),
        Error::Io(x) => x.to_string(),
        Error::Program(x) => x.to_string(),
        Error::Usage(x) | Error::Internal(x) => x.clone(),
        other => other.to_string(),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
                    let _ = writeln!(stderr, "error: usage: {first}");
                    1
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, stdout, stderr),
        Command::Scaling(a) => cmd_scaling(a, stdout, stderr),
        Command::Oracle(a) => cmd_oracle(a, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {}", error_kind(&e), error_message(&e));
            if matches!(e, Error::RunIncomplete { .. }) {
                2
            } else {
                1
            }
        }
    }
}
