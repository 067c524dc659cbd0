//! The `quicktail` command line.
//!
//! Parameters come from built-in defaults, then an optional TOML config file
//! (`--config`), then flags. The thread count is read from `--threads`, the
//! config's `threads` key, or the `QUICKTAIL_THREADS` environment variable,
//! in that order. Every JSON report embeds the effective configuration.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, input or I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{self, Slacks};
use crate::error::{Error, Result};
use crate::exactdist::{self, ArithMode, PmfCaps};
use crate::limitmgf;
use crate::plot::{self, PlotOptions};
use crate::sampler;
use crate::specfun;
use crate::verify::{self, Suite, VerifyConfig, SCHEMA_VERSION};

pub const THREADS_ENV: &str = "QUICKTAIL_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "quicktail", version, about = "QuickSort comparison-count distributions and tail bounds")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (also QUICKTAIL_THREADS); results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact law of X_n: PMF CSV and a summary JSON.
    Exact(ExactArgs),
    /// Run a verification suite and write its JSON report.
    Verify(VerifyArgs),
    /// Tail-bound exponents at the given abscissae.
    Bounds(BoundsArgs),
    /// Fixed-point table of ln ψ.
    Psi(PsiArgs),
    /// Monte Carlo batch of Z_n.
    Sample(SampleArgs),
    /// SVG line chart from CSV tables.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// rational or float.
    #[arg(long)]
    pub mode: Option<ArithMode>,
    /// Largest n in rational mode.
    #[arg(long)]
    pub cap_rational: Option<usize>,
    /// Largest n in float mode.
    #[arg(long)]
    pub cap_float: Option<usize>,
    /// PMF CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// lemma, sandwich, chernoff, ks, extremes, ld or all.
    #[arg(long)]
    pub suite: Suite,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixed-point grid size for the sandwich and chernoff suites.
    #[arg(long)]
    pub psi_grid: Option<usize>,
    /// Monte Carlo repetitions for the ld suite.
    #[arg(long)]
    pub ld_mc_reps: Option<usize>,
    /// Report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Abscissae x ≥ 2e, comma-separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
    #[arg(long)]
    pub slack_a: Option<f64>,
    /// Constant of the conjectured asymptotics.
    #[arg(long)]
    pub slack_conj: Option<f64>,
    /// √(x ln x) slack of the k-th derivative bound.
    #[arg(long)]
    pub slack_c: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub slack_xa: Option<f64>,
    #[arg(long)]
    pub slack_left_upper: Option<f64>,
    #[arg(long)]
    pub slack_left_lower: Option<f64>,
    /// Add base-10 versions of every exponent.
    #[arg(long)]
    pub log10: bool,
    /// Report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Table of exponents against x, for plotting.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Table CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tail thresholds for Z_n, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<f64>,
    /// CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Batch JSON path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV inputs (stdin when absent).
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// SVG path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub x_label: Option<String>,
    #[arg(long)]
    pub y_label: Option<String>,
    /// Logarithmic abscissa.
    #[arg(long)]
    pub log_x: bool,
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct ExactConfig {
    pub n: Option<usize>,
    pub mode: ArithMode,
    pub cap_rational: usize,
    pub cap_float: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        let caps = PmfCaps::default();
        Self { n: None, mode: ArithMode::Rational, cap_rational: caps.rational, cap_float: caps.float }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct BoundsConfig {
    pub x: Vec<f64>,
    pub slacks: Slacks,
    pub log10: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { x: vec![20.0], slacks: Slacks::default(), log10: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct PsiConfig {
    pub t_max: f64,
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PsiConfig {
    fn default() -> Self {
        Self { t_max: 12.0, grid: 256, tol: 1e-9, max_iter: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct SampleConfig {
    pub n: Option<u64>,
    pub reps: usize,
    pub seed: u64,
    pub thresholds: Vec<f64>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { n: None, reps: 10_000, seed: 2024, thresholds: vec![1.0, 2.0, 3.0] }
    }
}

/// Contents of a config file; every section and key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub exact: ExactConfig,
    pub bounds: BoundsConfig,
    pub psi: PsiConfig,
    pub sample: SampleConfig,
    pub verify: VerifyConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Error::Parse { line, msg: format!("{}: {}", path.display(), e.message()) }
        })
    }
}

/// The effective configuration of one run, as embedded in its reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub threads: usize,
    pub parameters: Value,
    pub outputs: Vec<PathBuf>,
}

// ---------------------------------------------------------------------------
// Entry points

/// Parses `args`, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn thread_count(flag: Option<usize>, file: Option<usize>) -> Result<usize> {
    if let Some(t) = flag.or(file) {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("{THREADS_ENV}={s:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let threads = thread_count(cli.threads, file.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    pool.install(|| match cli.command {
        Command::Exact(a) => cmd_exact(a, file.exact, threads),
        Command::Verify(a) => cmd_verify(a, file.verify, threads),
        Command::Bounds(a) => cmd_bounds(a, file.bounds, threads),
        Command::Psi(a) => cmd_psi(a, file.psi, threads),
        Command::Sample(a) => cmd_sample(a, file.sample, threads),
        Command::Plot(a) => cmd_plot(a),
    })
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &Value) -> Result<()> {
    let mut w = writer(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run_config<P: Serialize>(command: &str, threads: usize, params: &P, outputs: &[&Option<PathBuf>]) -> Result<Value> {
    Ok(serde_json::to_value(RunConfig {
        command: command.into(),
        threads,
        parameters: serde_json::to_value(params)?,
        outputs: outputs.iter().filter_map(|p| p.as_ref().cloned()).collect(),
    })?)
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Invalid(format!("missing --{flag} (or its config key)")))
}

fn cmd_exact(a: ExactArgs, mut c: ExactConfig, threads: usize) -> Result<i32> {
    c.n = a.n.or(c.n);
    c.mode = a.mode.unwrap_or(c.mode);
    c.cap_rational = a.cap_rational.unwrap_or(c.cap_rational);
    c.cap_float = a.cap_float.unwrap_or(c.cap_float);
    let n = required(c.n, "n")?;
    let caps = PmfCaps { rational: c.cap_rational, float: c.cap_float };
    let pmf = exactdist::exact_pmf_with_caps(n, c.mode, caps)?;
    let mut w = writer(a.out.as_deref())?;
    pmf.write_csv(&mut w)?;
    w.flush()?;
    drop(w);
    if a.summary.is_some() {
        let mu = specfun::mu_exact(n as u64);
        let (mean, variance, matches) = match (pmf.mean_exact(), pmf.variance_exact()) {
            (Some(m), Some(v)) => {
                (exactdist::format_rational(&m), exactdist::format_rational(&v), m == mu)
            }
            _ => {
                let m = pmf.mean();
                let mu_f = specfun::mu(n as u64);
                (format!("{m:?}"), format!("{:?}", pmf.variance()), (m - mu_f).abs() <= 1e-9 * mu_f.abs().max(1.0))
            }
        };
        let summary = json!({
            "schemaVersion": SCHEMA_VERSION,
            "config": run_config("exact", threads, &c, &[&a.out, &a.summary])?,
            "n": n,
            "mode": c.mode,
            "support": [pmf.offset(), pmf.max_value()],
            "totalMass": pmf.total_mass(),
            "mean": mean,
            "mu": exactdist::format_rational(&mu),
            "meanMatchesMu": matches,
            "meanF64": pmf.mean(),
            "variance": variance,
            "varianceF64": pmf.variance(),
            "extremes": exactdist::extremes(n),
        });
        write_json(a.summary.as_deref(), &summary)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs, mut c: VerifyConfig, threads: usize) -> Result<i32> {
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(g) = a.psi_grid {
        c.psi_grid = g;
    }
    if let Some(r) = a.ld_mc_reps {
        c.ld_mc_reps = r;
    }
    let report = verify::run(a.suite, &c)?;
    let mut value = serde_json::to_value(&report)?;
    value["runConfig"] = run_config("verify", threads, &json!({ "suite": a.suite }), &[&a.out])?;
    write_json(a.out.as_deref(), &value)?;
    if report.passed {
        Ok(EXIT_OK)
    } else {
        for f in report.failures() {
            eprintln!("FAILED {}: {}", f.name, serde_json::to_string(f)?);
        }
        Ok(EXIT_FAILED)
    }
}

fn log10_exponent(key: &str, v: f64) -> f64 {
    let ln10 = std::f64::consts::LN_10;
    if key.starts_with("left") {
        // ln(−ln P) to log10(−log10 P)
        v / ln10 - ln10.log10()
    } else {
        v / ln10
    }
}

fn cmd_bounds(a: BoundsArgs, mut c: BoundsConfig, threads: usize) -> Result<i32> {
    if !a.x.is_empty() {
        c.x = a.x.clone();
    }
    let s = &mut c.slacks;
    s.a = a.slack_a.unwrap_or(s.a);
    s.c_conj = a.slack_conj.unwrap_or(s.c_conj);
    s.c = a.slack_c.unwrap_or(s.c);
    s.k = a.k.unwrap_or(s.k);
    s.c_xa = a.slack_xa.unwrap_or(s.c_xa);
    s.c_upper = a.slack_left_upper.unwrap_or(s.c_upper);
    s.c_lower = a.slack_left_lower.unwrap_or(s.c_lower);
    c.log10 |= a.log10;
    let reports = c
        .x
        .iter()
        .map(|&x| bounds::bound_report(x, &c.slacks))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r)?;
            if c.log10 {
                let l: serde_json::Map<String, Value> = r
                    .exponents
                    .iter()
                    .map(|(k, &e)| (k.clone(), json!(log10_exponent(k, e))))
                    .collect();
                v["exponentsLog10"] = Value::Object(l);
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let mut sorted = c.x.clone();
    sorted.sort_by(f64::total_cmp);
    let report = json!({
        "schemaVersion": SCHEMA_VERSION,
        "config": run_config("bounds", threads, &c, &[&a.out, &a.csv])?,
        "units": "natural log; left* entries are ln(-ln P)",
        "reports": rows,
        "newUpperXaCrossover": bounds::new_upper_xa_crossover(&sorted)?,
        "jansonXaCrossover": bounds::janson_xa_crossover(),
    });
    write_json(a.out.as_deref(), &report)?;
    if let Some(p) = &a.csv {
        let mut w = writer(Some(p))?;
        let keys: Vec<&String> = reports.first().map(|r| r.exponents.keys().collect()).unwrap_or_default();
        write!(w, "x")?;
        for k in &keys {
            write!(w, ",{k}")?;
        }
        writeln!(w)?;
        for r in &reports {
            write!(w, "{:?}", r.x)?;
            for k in &keys {
                write!(w, ",{:?}", r.exponents[*k])?;
            }
            writeln!(w)?;
        }
        w.flush()?;
    }
    Ok(EXIT_OK)
}

fn cmd_psi(a: PsiArgs, mut c: PsiConfig, threads: usize) -> Result<i32> {
    c.t_max = a.t_max.unwrap_or(c.t_max);
    c.grid = a.grid.unwrap_or(c.grid);
    c.tol = a.tol.unwrap_or(c.tol);
    c.max_iter = a.max_iter.unwrap_or(c.max_iter);
    let table = limitmgf::fixpoint_psi(c.t_max, c.grid, c.tol, c.max_iter)?;
    let mut w = writer(a.out.as_deref())?;
    table.write_csv(&mut w)?;
    w.flush()?;
    drop(w);
    if a.report.is_some() {
        let slack = (c.t_max >= 1.0).then(|| limitmgf::fit_slack(&table, 1.0)).transpose()?;
        let report = json!({
            "schemaVersion": SCHEMA_VERSION,
            "config": run_config("psi", threads, &c, &[&a.out, &a.report])?,
            "converged": table.converged,
            "iterations": table.iterations,
            "residual": table.residual,
            "lnPsi0": table.ln_psi[0],
            "minSecondDifference": table.min_second_difference(),
            "nondecreasing": table.is_nondecreasing(),
            "slackA": slack,
        });
        write_json(a.report.as_deref(), &report)?;
    }
    if table.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("fixed point did not reach tol {} (residual {})", c.tol, table.residual);
        Ok(EXIT_FAILED)
    }
}

fn cmd_sample(a: SampleArgs, mut c: SampleConfig, threads: usize) -> Result<i32> {
    c.n = a.n.or(c.n);
    c.reps = a.reps.unwrap_or(c.reps);
    c.seed = a.seed.unwrap_or(c.seed);
    if !a.thresholds.is_empty() {
        c.thresholds = a.thresholds.clone();
    }
    let n = required(c.n, "n")?;
    let batch = sampler::sample_batch(n, c.reps, c.seed, &c.thresholds)?;
    let mut w = writer(a.out.as_deref())?;
    batch.write_csv(&mut w)?;
    w.flush()?;
    drop(w);
    if a.json.is_some() {
        let mut v = serde_json::to_value(&batch)?;
        v["schemaVersion"] = json!(SCHEMA_VERSION);
        v["variance"] = json!(batch.variance());
        v["stdErr"] = json!(batch.std_err());
        v["config"] = run_config("sample", threads, &c, &[&a.out, &a.json])?;
        write_json(a.json.as_deref(), &v)?;
    }
    Ok(EXIT_OK)
}

fn cmd_plot(a: PlotArgs) -> Result<i32> {
    let mut series = Vec::new();
    let mut x_name = String::new();
    let label_files = a.input.len() > 1;
    if a.input.is_empty() {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        let (x, s) = plot::read_series(text.as_bytes(), None)?;
        x_name = x;
        series = s;
    }
    for p in &a.input {
        let f = File::open(p).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?;
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned());
        let (x, s) = plot::read_series(f, label_files.then_some(stem.as_deref()).flatten())
            .map_err(|e| match e {
                Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", p.display()) },
                other => other,
            })?;
        if x_name.is_empty() {
            x_name = x;
        }
        series.extend(s);
    }
    let opts = PlotOptions {
        title: a.title.unwrap_or_default(),
        x_label: a.x_label.unwrap_or(x_name),
        y_label: a.y_label.unwrap_or_default(),
        log_x: a.log_x,
        ..Default::default()
    };
    let mut w = writer(a.out.as_deref())?;
    w.write_all(plot::render_svg(&series, &opts).as_bytes())?;
    w.flush()?;
    Ok(EXIT_OK)
}
