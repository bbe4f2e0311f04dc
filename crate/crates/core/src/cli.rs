//! The `hconc` command line.
//!
//! Exit codes: 0 when no check failed, 1 when a check failed or a computation
//! errored (a JSON error record goes to stdout), 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cube::FunctionFile;
use crate::error::{Error, Result};
use crate::extremal::{maximize_beta, sharpness_report, SearchConfig};
use crate::functionals::{DeltaStrategy, GradientMode, NormProfile};
use crate::matrix::{run_matrix_suite, MatrixSuiteConfig};
use crate::report::{to_canonical_json, Report};
use crate::spaces::SpaceDescriptor;
use crate::verify::{default_tau, gamma_fn, run_suite, sqrtp_bound, SuiteConfig};

/// Environment variable capping the worker count (0 = automatic).
pub const THREADS_ENV: &str = "HCONC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "hconc", version, about = "Concentration inequalities on the Hamming cube, checked by enumeration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the randomized inequality suite and write a JSON report.
    Verify(VerifyArgs),
    /// Moment curve of a function file as CSV.
    Moments(MomentsArgs),
    /// Matrix-valued checks and Khintchine ratios.
    Matrix(MatrixArgs),
    /// Search for Lipschitz functions with large moments.
    Extremal(ExtremalArgs),
    /// Dump the space and cotype registry.
    Info(InfoArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceArg {
    Scalar,
    Euclidean,
    Schatten,
    Operator,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Gamma,
    PExact,
    Weak,
}

impl ModeArg {
    fn mode(self) -> GradientMode {
        match self {
            ModeArg::Gamma => GradientMode::Gamma,
            ModeArg::PExact => GradientMode::P(DeltaStrategy::Exact),
            ModeArg::Weak => GradientMode::Weak,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SpaceFlags {
    #[arg(long, value_enum, default_value = "scalar")]
    space: SpaceArg,
    /// Vector or matrix dimension.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Schatten exponent of the target space.
    #[arg(long, default_value_t = 3.0)]
    schatten_p: f64,
}

impl SpaceFlags {
    fn descriptor(&self) -> Result<SpaceDescriptor> {
        match self.space {
            SpaceArg::Scalar => Ok(SpaceDescriptor::scalar()),
            SpaceArg::Euclidean => SpaceDescriptor::euclidean(self.d),
            SpaceArg::Schatten => SpaceDescriptor::schatten(self.schatten_p, self.d),
            SpaceArg::Operator => SpaceDescriptor::operator(self.d),
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[command(flatten)]
    space: SpaceFlags,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exponent grid `start:end:step`.
    #[arg(long, default_value = "2:8:2")]
    p_grid: String,
    #[arg(long, value_enum, default_value = "gamma")]
    mode: ModeArg,
    /// Exponential-moment parameter; defaults to 1/(4e).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    #[arg(long, default_value_t = 2.0)]
    kappa2: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    /// Function file (JSON).
    #[arg(long = "fn")]
    function: PathBuf,
    /// Used when the file carries no space.
    #[command(flatten)]
    space: SpaceFlags,
    #[arg(long, default_value = "2:16:1")]
    p_grid: String,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// Schatten exponents `start:end:step`.
    #[arg(long, default_value = "2:2.5:0.5")]
    p_grid: String,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtremalArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[command(flatten)]
    space: SpaceFlags,
    /// Moment exponent.
    #[arg(long, default_value_t = 8.0)]
    p: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "p-exact")]
    mode: ModeArg,
    /// Target moment for the sharpness comparison at p = tau·Q².
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Witness file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InfoArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 3.0)]
    schatten_p: f64,
}

/// Parses `start:end:step` into `start, start + step, …` up to `end`.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    match nums[..] {
        [v] if v.is_finite() => Ok(vec![v]),
        [a, b, step] => {
            if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
                return Err(format!("`{s}` needs finite start <= end and step > 0"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(format!("`{s}` has too many points"));
            }
            Ok((0..count).map(|k| a + k as f64 * step).collect())
        }
        _ => Err(format!("expected start:end:step, got `{s}`")),
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV} must be a non-negative integer, got `{raw}`"))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Outcome of a command: whether any check failed.
enum Outcome {
    Clean,
    Failed,
}

fn outcome_of(report: &Report) -> Outcome {
    if report.summary.fail > 0 {
        Outcome::Failed
    } else {
        Outcome::Clean
    }
}

/// Usage problems found after parsing, before any computation.
fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn run_verify(a: VerifyArgs) -> std::result::Result<Result<Outcome>, Error> {
    let cfg = SuiteConfig {
        n: a.n,
        space: a.space.descriptor()?,
        trials: a.trials as usize,
        seed: a.seed,
        p_grid: parse_grid(&a.p_grid).map_err(usage)?,
        mode: a.mode.mode(),
        tau: a.tau.unwrap_or_else(default_tau),
        c0_report: a.c0,
        kappa2_report: a.kappa2,
        ..SuiteConfig::default()
    };
    cfg.validate()?;
    Ok((|| {
        let report = run_suite(&cfg)?;
        emit(a.out.as_deref(), &to_canonical_json(&report)?)?;
        eprintln!(
            "verify: {} pass, {} fail, {} report",
            report.summary.pass, report.summary.fail, report.summary.report
        );
        Ok(outcome_of(&report))
    })())
}

fn run_moments(a: MomentsArgs) -> std::result::Result<Result<Outcome>, Error> {
    let grid = parse_grid(&a.p_grid).map_err(usage)?;
    if let Some(p) = grid.iter().find(|p| **p < 1.0) {
        return Err(Error::InvalidExponent(*p));
    }
    let fallback = a.space.descriptor()?;
    Ok((|| {
        let file: FunctionFile = serde_json::from_slice(&fs::read(&a.function)?)?;
        let space = file.space.unwrap_or(fallback);
        let f = file.to_function()?;
        if f.dim() != space.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.ambient_dim(),
                got: f.dim(),
            });
        }
        let (q, c) = space.cotype()?;
        let prof = NormProfile::new(&f, &space, true)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["p", "a_p", "beta_p", "gamma_p", "sqrtp_bound"]).map_err(csv_err)?;
        for &p in &grid {
            let a_p = prof.moment(p)?;
            let beta_p = match prof.beta(p) {
                Ok(b) => fmt_num(b),
                Err(Error::ZeroMoment) => String::new(),
                Err(e) => return Err(e),
            };
            let gamma_p = if p >= q { fmt_num(gamma_fn(p, q, c)) } else { String::new() };
            w.write_record([
                fmt_num(p),
                fmt_num(a_p),
                beta_p,
                gamma_p,
                fmt_num(sqrtp_bound(p, q, c)),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        emit(a.csv.as_deref(), &bytes)?;
        Ok(Outcome::Clean)
    })())
}

fn run_matrix(a: MatrixArgs) -> std::result::Result<Result<Outcome>, Error> {
    let p_list = parse_grid(&a.p_grid).map_err(usage)?;
    if let Some(p) = p_list.iter().find(|p| **p < 2.0) {
        return Err(usage(format!("matrix exponents must be >= 2, got {p}")));
    }
    if a.d == 0 || a.n == 0 || a.n > crate::functionals::MAX_EXACT_N {
        return Err(usage("need d >= 1 and 1 <= n <= 20"));
    }
    let cfg = MatrixSuiteConfig {
        n: a.n,
        d: a.d,
        p_list,
        trials: a.trials as usize,
        seed: a.seed,
        c2: a.c2,
        ..MatrixSuiteConfig::default()
    };
    Ok((|| {
        let report = run_matrix_suite(&cfg)?;
        let kh: Vec<_> = report.rows("khintchine").collect();
        let min = kh.iter().filter_map(|r| r.param_f64("min_ratio")).fold(f64::INFINITY, f64::min);
        let max = kh.iter().filter_map(|r| r.param_f64("max_ratio")).fold(f64::NEG_INFINITY, f64::max);
        let mut doc = serde_json::to_value(&report)?;
        if let Value::Object(map) = &mut doc {
            map.insert(
                "khintchine".into(),
                json!({ "rows": kh.len(), "min_ratio": min, "max_ratio": max }),
            );
        }
        emit(a.out.as_deref(), &to_canonical_json(&doc)?)?;
        eprintln!(
            "matrix: {} pass, {} fail, {} report",
            report.summary.pass, report.summary.fail, report.summary.report
        );
        Ok(outcome_of(&report))
    })())
}

fn run_extremal(a: ExtremalArgs) -> std::result::Result<Result<Outcome>, Error> {
    let cfg = SearchConfig {
        n: a.n,
        space: a.space.descriptor()?,
        p: a.p,
        mode: a.mode.mode(),
        iterations: a.iters,
        restarts: a.restarts as usize,
        seed: a.seed,
        ..SearchConfig::default()
    };
    cfg.validate()?;
    if let Some(q) = a.q {
        if !(q > 0.0) {
            return Err(usage("--q must be positive"));
        }
    }
    let tau = a.tau.unwrap_or_else(default_tau);
    if !(tau > 0.0) {
        return Err(usage("--tau must be positive"));
    }
    Ok((|| {
        let w = maximize_beta(&cfg)?;
        let mut summary = json!({
            "achieved": w.achieved,
            "p": w.p,
            "residual": w.constraint_residual,
            "history": w.history,
        });
        if let Some(q) = a.q {
            summary["sharpness"] = serde_json::to_value(sharpness_report(q, tau, &w)?)?;
        }
        match a.out.as_deref() {
            Some(path) => {
                emit(Some(path), &to_canonical_json(&w.to_file())?)?;
                emit(None, &to_canonical_json(&summary)?)?;
            }
            None => {
                let mut doc = serde_json::to_value(w.to_file())?;
                if let (Value::Object(map), Some(s)) = (&mut doc, summary.get("sharpness")) {
                    map.insert("sharpness".into(), s.clone());
                }
                emit(None, &to_canonical_json(&doc)?)?;
            }
        }
        Ok(Outcome::Clean)
    })())
}

fn registry_entry(space: Result<SpaceDescriptor>, label: &str) -> Value {
    match space {
        Ok(s) => match s.cotype() {
            Ok((q, c)) => json!({
                "space": s.to_string(),
                "ambient_dim": s.ambient_dim(),
                "hilbert": s.is_hilbert(),
                "cotype_q": q,
                "cotype_c": c,
            }),
            Err(e) => json!({ "space": s.to_string(), "error": e.to_string() }),
        },
        Err(e) => json!({ "space": label, "error": e.to_string() }),
    }
}

fn run_info(a: InfoArgs) -> std::result::Result<Result<Outcome>, Error> {
    Ok((|| {
        let spaces = vec![
            registry_entry(Ok(SpaceDescriptor::scalar()), "scalar"),
            registry_entry(SpaceDescriptor::euclidean(a.d), "euclidean"),
            registry_entry(SpaceDescriptor::schatten(a.schatten_p, a.d), "schatten"),
            registry_entry(SpaceDescriptor::operator(a.d), "operator"),
        ];
        let doc = json!({
            "spaces": spaces,
            "defaults": { "c0": 1.0, "kappa2": 2.0, "c2": 1.0, "tau": default_tau() },
            "threads_env": THREADS_ENV,
        });
        emit(None, &to_canonical_json(&doc)?)?;
        Ok(Outcome::Clean)
    })())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    let staged = match cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Moments(a) => run_moments(a),
        Command::Matrix(a) => run_matrix(a),
        Command::Extremal(a) => run_extremal(a),
        Command::Info(a) => run_info(a),
    };
    match staged {
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
        Ok(Ok(Outcome::Clean)) => 0,
        Ok(Ok(Outcome::Failed)) => 1,
        Ok(Err(e)) => {
            let record = json!({ "error": error_kind(&e), "message": e.to_string() });
            match to_canonical_json(&record) {
                Ok(bytes) => {
                    let _ = std::io::stdout().write_all(&bytes);
                }
                Err(_) => println!("{record}"),
            }
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("2:16:1").unwrap().len(), 15);
        assert_eq!(parse_grid("2:2.5:0.5").unwrap(), vec![2.0, 2.5]);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_grid("4").unwrap(), vec![4.0]);
        for bad in ["2:1:1", "2:4:0", "a:b:c", "1:2", ""] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["hconc", "verify", "--trials", "0"]), 2);
        assert_eq!(run(["hconc", "verify", "--p-grid", "3:1:1"]), 2);
        assert_eq!(run(["hconc", "verify", "--n", "0"]), 2);
        assert_eq!(run(["hconc", "bogus"]), 2);
        assert_eq!(run(["hconc", "extremal", "--n", "12"]), 2);
    }

    #[test]
    fn error_kind_names_variant() {
        assert_eq!(error_kind(&Error::ZeroMoment), "ZeroMoment");
        assert_eq!(error_kind(&Error::NTooLarge(30)), "NTooLarge");
        assert_eq!(error_kind(&Error::NotLipschitz { sup: 2.0 }), "NotLipschitz");
    }
}
