//! Command-line front end. Every subcommand parses and validates its flags,
//! calls into the library, and formats the result; no numerics live here.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bounds::{bounds_table, entropy_table, EntropyMethod, ModelConfig};
use crate::experiments::{certify, CertifyConfig, ConfigError};
use crate::sim::{
    fou_from_fbm, sample_fbm, write_path_dump, DumpHeader, SamplerConfig, SamplingMethod, TimeGrid,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fou-bounds",
    version,
    about = "Hitting-time tail bounds for the fractional Ornstein-Uhlenbeck process"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate both tail bounds at one or more barrier levels.
    Bounds {
        #[arg(long = "H")]
        hurst: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Barrier levels (repeat the flag or separate with commas).
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        u: Vec<f64>,
    },
    /// Expected-supremum constants for fBm from the entropy and moment routes.
    Entropy {
        #[arg(long = "H")]
        hurst: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
    },
    /// Sample fBm or fOU paths and write them as comma-separated lines.
    Simulate {
        #[arg(long = "H")]
        hurst: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        /// Grid points including t = 0.
        #[arg(long, default_value_t = 257)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Cholesky)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = ProcessArg::Fbm)]
        process: ProcessArg,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        jitter: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a certification config and write `<out>.csv` and `<out>.json`.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the seed of every experiment in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cholesky,
    #[value(alias = "circulant-embedding")]
    Circulant,
}

impl From<MethodArg> for SamplingMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cholesky => SamplingMethod::Cholesky,
            MethodArg::Circulant => SamplingMethod::CirculantEmbedding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    Fbm,
    Fou,
}

/// Six significant digits, switching to scientific notation outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        format!("{x:.5e}")
    } else {
        format!("{x:.*}", (5 - mag).max(0) as usize)
    }
}

fn opt6(x: Option<f64>, missing: &str) -> String {
    x.map(sig6).unwrap_or_else(|| missing.to_string())
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Bounds {
            hurst,
            horizon,
            eps,
            u,
        } => cmd_bounds(hurst, horizon, eps, &u, out),
        Command::Entropy { hurst, horizon } => cmd_entropy(hurst, horizon, out),
        Command::Simulate {
            hurst,
            horizon,
            n,
            count,
            method,
            process,
            eps,
            seed,
            jitter,
            out: path,
        } => cmd_simulate(
            SimulateArgs {
                hurst,
                horizon,
                n,
                count,
                method: method.into(),
                process,
                eps,
                seed,
                jitter,
                path,
            },
            out,
        ),
        Command::Certify {
            config,
            out: prefix,
            seed,
        } => cmd_certify(&config, &prefix, seed, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn io_failure(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_IO,
        message: message.to_string(),
    }
}

fn cmd_bounds(hurst: f64, horizon: f64, eps: f64, us: &[f64], out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = ModelConfig::new(hurst, horizon, eps).map_err(usage)?;
    if let Some(bad) = us.iter().find(|u| !u.is_finite()) {
        return Err(usage(format!("u must be finite, got {bad}")));
    }
    let rows = bounds_table(&cfg, us).map_err(usage)?;
    let mut text = format!(
        "{:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}  status\n",
        "u", "threshold_t1", "threshold_t2", "bound_t1", "bound_t2", "raw_t1", "raw_t2"
    );
    for r in &rows {
        let t1_missing = if r.threshold_t1.is_none() { "n/a" } else { "-" };
        let status = if r.below_threshold() {
            "below-threshold"
        } else if r.bound_t2.is_none() {
            "below-threshold-t2"
        } else {
            "ok"
        };
        text.push_str(&format!(
            "{:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}  {status}\n",
            sig6(r.u),
            opt6(r.threshold_t1, "n/a"),
            sig6(r.threshold_t2),
            opt6(r.bound_t1, t1_missing),
            opt6(r.bound_t2, "-"),
            opt6(r.raw_t1, t1_missing),
            opt6(r.raw_t2, "-"),
        ));
    }
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    Ok(EXIT_OK)
}

fn cmd_entropy(hurst: f64, horizon: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    // Validates H and T the same way the bounds do.
    ModelConfig::new(hurst, horizon, 1.0).map_err(usage)?;
    let rows = entropy_table(hurst, horizon).map_err(usage)?;
    let mut text = format!("{:>8} {:>12} {:>12} {:>9}\n", "method", "constant", "bound", "valid_H");
    for r in &rows {
        text.push_str(&format!(
            "{:>8} {:>12} {:>12} {:>9}\n",
            r.method.name(),
            sig6(r.constant),
            opt6(r.bound, "n/a"),
            r.method.valid_hurst().to_string(),
        ));
    }
    let bound = |m: EntropyMethod| rows.iter().find(|r| r.method == m).and_then(|r| r.bound);
    let dudley = bound(EntropyMethod::Dudley);
    let pisier = bound(EntropyMethod::Pisier);
    match (bound(EntropyMethod::Debicki), pisier, dudley) {
        (Some(d), Some(p), Some(u)) => text.push_str(&format!(
            "ordering debicki < pisier < dudley: {}\n",
            d < p && p < u
        )),
        (None, Some(p), Some(u)) => text.push_str(&format!(
            "ordering pisier < dudley: {} (debicki n/a for H < 1/2)\n",
            p < u
        )),
        _ => {}
    }
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    Ok(EXIT_OK)
}

struct SimulateArgs {
    hurst: f64,
    horizon: f64,
    n: usize,
    count: usize,
    method: SamplingMethod,
    process: ProcessArg,
    eps: f64,
    seed: u64,
    jitter: f64,
    path: PathBuf,
}

fn cmd_simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = ModelConfig::new(args.hurst, args.horizon, args.eps).map_err(usage)?;
    let grid = TimeGrid::new(cfg.horizon(), args.n).map_err(usage)?;
    if args.count < 1 {
        return Err(usage("count must be at least 1"));
    }
    if !(args.jitter >= 0.0 && args.jitter.is_finite()) {
        return Err(usage(format!("jitter must be nonnegative, got {}", args.jitter)));
    }
    let sampler = SamplerConfig {
        method: args.method,
        seed: args.seed,
        jitter: args.jitter,
    };
    let mut paths = sample_fbm(&grid, cfg.hurst(), &sampler, args.count).map_err(usage)?;
    let (process, eps) = match args.process {
        ProcessArg::Fbm => ("fbm", None),
        ProcessArg::Fou => {
            paths = paths.iter().map(|p| fou_from_fbm(p, cfg.eps())).collect();
            ("fou", Some(cfg.eps()))
        }
    };
    let header = DumpHeader {
        process: process.to_string(),
        hurst: cfg.hurst(),
        horizon: cfg.horizon(),
        grid_n: grid.len(),
        count: args.count,
        method: args.method,
        seed: args.seed,
        eps,
    };
    let file = File::create(&args.path)
        .map_err(|e| io_failure(format!("cannot create {}: {e}", args.path.display())))?;
    write_path_dump(BufWriter::new(file), &header, &paths)
        .map_err(|e| io_failure(format!("cannot write {}: {e}", args.path.display())))?;
    writeln!(
        out,
        "wrote {} {process} paths on a {}-point grid over [0, {}] (seed {}) to {}",
        args.count,
        grid.len(),
        cfg.horizon(),
        args.seed,
        args.path.display()
    )
    .map_err(io_failure)?;
    Ok(EXIT_OK)
}

fn with_extension(prefix: &std::path::Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn cmd_certify(
    config_path: &std::path::Path,
    prefix: &std::path::Path,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let mut config = CertifyConfig::from_path(config_path).map_err(|e| match e {
        ConfigError::Io { .. } => io_failure(e),
        ConfigError::Invalid { .. } => usage(e),
    })?;
    if let Some(seed) = seed {
        for spec in &mut config.experiments {
            spec.sampler.seed = seed;
        }
    }
    let report = certify(&config).map_err(usage)?;

    let csv_path = with_extension(prefix, "csv");
    let json_path = with_extension(prefix, "json");
    let csv_file = File::create(&csv_path)
        .map_err(|e| io_failure(format!("cannot create {}: {e}", csv_path.display())))?;
    report
        .write_csv(BufWriter::new(csv_file))
        .map_err(|e| io_failure(format!("cannot write {}: {e}", csv_path.display())))?;
    std::fs::write(&json_path, report.to_json() + "\n")
        .map_err(|e| io_failure(format!("cannot write {}: {e}", json_path.display())))?;

    let mut text = format!(
        "{:>5} {:>8} {:>8} {:>8} {:>10} {:>12} {:>12} {:>12}  verdict\n",
        "H", "u", "grid_n", "p_hat", "ci_high", "bound_t1", "bound_t2", "applicable"
    );
    for r in &report.rows {
        text.push_str(&format!(
            "{:>5} {:>8} {:>8} {:>8} {:>10} {:>12} {:>12} {:>12}  {}\n",
            sig6(r.hurst),
            sig6(r.u),
            r.grid_n,
            opt6(r.p_hat.map(|p| p.mean), "-"),
            opt6(r.p_hat.map(|p| p.ci_high), "-"),
            opt6(r.bound_t1, "n/a"),
            opt6(r.bound_t2, "-"),
            opt6(r.applicable_bound(), "-"),
            r.verdict.as_str(),
        ));
    }
    let violations = report.violations();
    text.push_str(&format!(
        "{} rows, {violations} violations; wrote {} and {}\n",
        report.rows.len(),
        csv_path.display(),
        json_path.display()
    ));
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    Ok(if violations > 0 { EXIT_VIOLATION } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["fou-bounds"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(3.5449077018), "3.54491");
        assert_eq!(sig6(0.7978845608), "0.797885");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(2.5e-7), "2.50000e-7");
    }

    #[test]
    fn bounds_rejects_bad_hurst() {
        let (code, _, err) = run_capture(&["bounds", "--H", "1.5", "--T", "1", "--u", "5"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("H must be in (0, 1]"));
    }

    #[test]
    fn bounds_small_hurst_marks_theorem1_na() {
        let (code, out, _) = run_capture(&["bounds", "--H", "0.3", "--T", "1", "--u", "9"]);
        assert_eq!(code, EXIT_OK);
        let row = out.lines().nth(1).unwrap();
        assert_eq!(row.split_whitespace().nth(1), Some("n/a"));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, _) = run_capture(&["bounds", "--nope"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn entropy_small_hurst() {
        let (code, out, _) = run_capture(&["entropy", "--H", "0.2", "--T", "1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.lines().any(|l| l.trim_start().starts_with("debicki") && l.contains("n/a")));
    }
}
