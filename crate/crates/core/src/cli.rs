//! Command-line front end.
//!
//! `expofit (fit|gof|plotdata|report) --input <path> --model (exp1|exp2) ...`
//!
//! Reports go to stdout as JSON, diagnostics to stderr. Exit codes: 0 ok,
//! 1 usage, 2 data validation, 3 fit did not converge (report still printed).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::EcdfDataset;
use crate::dist::{ExpModel, ModelKind};
use crate::error::Error;
use crate::fit::{self, FitConfig, FitResult};
use crate::gof::{self, GofConfig, GofResult};
use crate::inequality::{self, InequalityReport, LorenzPoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Caps the bootstrap thread count. Never changes numeric output.
pub const THREADS_ENV: &str = "EXPOFIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "expofit", version, about = "Fit exponential income models to empirical CDF data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Least-squares fit; prints the fit section.
    Fit(RunArgs),
    /// Fit plus parametric-bootstrap KS test.
    Gof(RunArgs),
    /// CSV of the fitted CDF against the data, or of the Lorenz curve.
    Plotdata(RunArgs),
    /// Fit, bootstrap test and inequality measures in one report.
    Report(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    significance: f64,
    #[arg(long, value_enum, default_value_t = Curve::Cdf)]
    curve: Curve,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..))]
    grid: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Exp1,
    Exp2,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Exp1 => ModelKind::OneParam,
            ModelArg::Exp2 => ModelKind::TwoParam,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Curve {
    Cdf,
    Lorenz,
}

/// Machine-readable result of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset_name: String,
    pub model_kind: String,
    pub fit: FitSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gof: Option<GofSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequality: Option<InequalitySection>,
    pub tool_version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSection {
    pub sigma: f64,
    pub theta: f64,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofSection {
    pub ks: f64,
    pub p_value: f64,
    pub replicates: usize,
    pub exceed_count: usize,
    pub seed: u64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySection {
    pub gini: f64,
    pub lorenz: Vec<LorenzPoint>,
}

impl From<&FitResult> for FitSection {
    fn from(r: &FitResult) -> Self {
        FitSection {
            sigma: r.model.sigma(),
            theta: r.model.theta(),
            sse: r.sse,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

impl From<&GofResult> for GofSection {
    fn from(r: &GofResult) -> Self {
        GofSection {
            ks: r.ks_empirical,
            p_value: r.p_value,
            replicates: r.replicates,
            exceed_count: r.exceed_count,
            seed: r.seed,
            reject: r.reject,
        }
    }
}

impl From<&InequalityReport> for InequalitySection {
    fn from(r: &InequalityReport) -> Self {
        InequalitySection {
            gini: r.gini,
            lorenz: r.lorenz_points.clone(),
        }
    }
}

impl RunReport {
    pub fn new(dataset: &EcdfDataset, fit: &FitResult) -> Self {
        RunReport {
            dataset_name: dataset.name().to_string(),
            model_kind: fit.model.kind().label().to_string(),
            fit: fit.into(),
            gof: None,
            inequality: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Runs the tool with `args` (including the program name); returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };

    let (name, args) = match &cli.command {
        Command::Fit(a) => ("fit", a),
        Command::Gof(a) => ("gof", a),
        Command::Plotdata(a) => ("plotdata", a),
        Command::Report(a) => ("report", a),
    };
    match execute(&cli.command, args) {
        Ok(outcome) => {
            if let Err(e) = emit(args, &outcome.body, stdout) {
                let _ = writeln!(stderr, "expofit {name}: cannot write output: {e}");
                return EXIT_USAGE;
            }
            if !outcome.converged {
                let _ = writeln!(
                    stderr,
                    "expofit {name}: fit did not converge within {} iterations",
                    FitConfig::DEFAULT_MAX_ITERATIONS
                );
                return EXIT_NOT_CONVERGED;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "expofit {name}: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => EXIT_USAGE,
        Error::Validation { .. } | Error::DegenerateData(_) | Error::Io(_) => EXIT_DATA,
    }
}

struct Outcome {
    body: String,
    converged: bool,
}

fn execute(command: &Command, args: &RunArgs) -> Result<Outcome, Error> {
    let ds = EcdfDataset::load(&args.input).map_err(|e| match e {
        Error::Io(msg) => Error::Io(format!("{}: {msg}", args.input.display())),
        other => other,
    })?;
    let kind: ModelKind = args.model.into();
    let fit_cfg = FitConfig::new(kind);
    let gof_cfg = GofConfig {
        replicates: args.replicates as usize,
        seed: args.seed,
        significance: args.significance,
    };
    gof_cfg.validate()?;

    let fitted = fit::fit(&ds, &fit_cfg)?;
    let converged = fitted.converged;
    let mut report = RunReport::new(&ds, &fitted);

    let body = match command {
        Command::Fit(_) => report.to_json(),
        Command::Gof(_) => {
            let g = with_thread_cap(|| gof::bootstrap_fitted(&ds, &fitted, &fit_cfg, &gof_cfg))?;
            report.gof = Some((&g).into());
            report.to_json()
        }
        Command::Report(_) => {
            let g = with_thread_cap(|| gof::bootstrap_fitted(&ds, &fitted, &fit_cfg, &gof_cfg))?;
            report.gof = Some((&g).into());
            let ineq = InequalityReport::new(&fitted.model, args.grid as usize)?;
            report.inequality = Some((&ineq).into());
            report.to_json()
        }
        Command::Plotdata(_) => match args.curve {
            Curve::Cdf => cdf_plot_csv(&ds, &fitted.model, args.grid as usize),
            Curve::Lorenz => lorenz_plot_csv(&fitted.model, args.grid as usize)?,
        },
    };
    Ok(Outcome { body, converged })
}

fn emit(args: &RunArgs, body: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match &args.output {
        Some(path) => std::fs::write(path, body),
        None => stdout.write_all(body.as_bytes()),
    }
}

/// `x,F_model,F_empirical`: `grid` evenly spaced rows over
/// `[max(θ, x_min/2), 1.05 x_max]` with a blank empirical column, merged by
/// `x` with one row per observed point.
pub fn cdf_plot_csv(ds: &EcdfDataset, model: &ExpModel, grid: usize) -> String {
    let lo = model.theta().max(0.5 * ds.x_min());
    let hi = 1.05 * ds.x_max();
    let step = (hi - lo) / (grid.max(2) - 1) as f64;
    let mut grid_x = (0..grid).map(|i| if i + 1 == grid { hi } else { lo + i as f64 * step });
    let mut observed = ds.points().iter().peekable();

    let mut out = String::from("x,F_model,F_empirical\n");
    let mut next_grid = grid_x.next();
    loop {
        let take_grid = match (next_grid, observed.peek()) {
            (Some(g), Some(p)) => g <= p.x,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if take_grid {
            let x = next_grid.unwrap();
            let _ = writeln!(out, "{x},{},", model.cdf_unchecked(x));
            next_grid = grid_x.next();
        } else {
            let p = observed.next().unwrap();
            let _ = writeln!(out, "{},{},{}", p.x, model.cdf_unchecked(p.x), p.f);
        }
    }
    out
}

/// `p,L` at `p = i / segments`, `i = 0..=segments`.
pub fn lorenz_plot_csv(model: &ExpModel, segments: usize) -> Result<String, Error> {
    let report = InequalityReport::new(model, segments)?;
    let mut out = String::from("p,L\n");
    for pt in &report.lorenz_points {
        let _ = writeln!(out, "{},{}", pt.p, pt.l);
    }
    debug_assert_eq!(report.gini, inequality::gini(model));
    Ok(out)
}

#[cfg(feature = "parallel")]
fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(e) => {
                    log::warn!("cannot build a {n}-thread pool ({e}); using the default");
                    f()
                }
            },
            _ => {
                log::warn!("ignoring {THREADS_ENV}={raw:?}: expected a positive integer");
                f()
            }
        },
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    f()
}
