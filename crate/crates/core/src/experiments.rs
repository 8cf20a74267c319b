//! Monte Carlo certification of the tail bounds.
//!
//! Every estimator simulates fBm on a *master* grid (the finest grid of the
//! experiment when the requested grid subdivides it) and evaluates coarser
//! grids by subsampling the same paths, so results at different resolutions
//! share their randomness exactly.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use thiserror::Error;

use crate::bounds::{
    self, max_variance_on_grid, sigma_sq_bound, sigma_step_gap, BoundsError, ModelConfig, Regime,
};
use crate::sim::{FbmSampler, FouTransform, SamplerConfig, SamplingMethod, SimError, TimeGrid};

/// Fewer paths than this make the intervals meaningless.
pub const MIN_PATHS: usize = 100;
/// Default certification margin in standard errors.
pub const DEFAULT_MARGIN_SE: f64 = 3.0;
/// Time points used to locate `sup_t Var(X_t)` for the report.
const VARIANCE_SCAN_POINTS: usize = 101;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{field}: {message}")]
    InvalidSpec { field: String, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ExperimentError {
    ExperimentError::InvalidSpec {
        field: field.into(),
        message: message.into(),
    }
}

/// A Monte Carlo point estimate with its standard error and interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
}

/// Two-sided coverage of a `±z` normal interval.
pub fn coverage_of(z: f64) -> f64 {
    erf(z / std::f64::consts::SQRT_2)
}

impl MCEstimate {
    /// Sample mean with `stderr = sd / sqrt(n)` and a `mean ± z·stderr` interval.
    pub fn from_samples(samples: &[f64], z: f64) -> Self {
        let n = samples.len();
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };
        let stderr = (var / nf).sqrt();
        Self {
            mean,
            stderr,
            n_samples: n,
            ci_low: mean - z * stderr,
            ci_high: mean + z * stderr,
            ci_level: coverage_of(z),
        }
    }

    /// Binomial proportion with the Wilson score interval.
    pub fn proportion(successes: usize, n: usize, z: f64) -> Self {
        let nf = n as f64;
        let p = successes as f64 / nf;
        let z2 = z * z;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        Self {
            mean: p,
            stderr: (p * (1.0 - p) / nf).sqrt(),
            n_samples: n,
            ci_low: (center - half).max(0.0).min(p),
            ci_high: (center + half).min(1.0).max(p),
            ci_level: coverage_of(z),
        }
    }
}

/// A barrier level; diagnostic-only levels are reported without a bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UValue {
    pub u: f64,
    pub diagnostic_only: bool,
}

impl From<f64> for UValue {
    fn from(u: f64) -> Self {
        Self {
            u,
            diagnostic_only: false,
        }
    }
}

impl<'de> Deserialize<'de> for UValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Plain(f64),
            Tagged {
                u: f64,
                #[serde(default)]
                diagnostic_only: bool,
            },
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Plain(u) => u.into(),
            Repr::Tagged { u, diagnostic_only } => Self { u, diagnostic_only },
        })
    }
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN_SE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub cfg: ModelConfig,
    pub u_values: Vec<UValue>,
    pub n_paths: usize,
    pub grid_sizes: Vec<usize>,
    #[serde(default)]
    pub sampler: SamplerConfig,
    /// Half-width of the intervals, in standard errors.
    #[serde(default = "default_margin")]
    pub margin_se: f64,
}

impl ExperimentSpec {
    pub fn new(cfg: ModelConfig, u_values: Vec<UValue>, n_paths: usize, grid_sizes: Vec<usize>) -> Self {
        Self {
            cfg,
            u_values,
            n_paths,
            grid_sizes,
            sampler: SamplerConfig::default(),
            margin_se: DEFAULT_MARGIN_SE,
        }
    }

    /// Checks everything an estimator needs: path count, margin and sampler.
    fn validate_sampling(&self) -> Result<(), ExperimentError> {
        if self.n_paths < MIN_PATHS {
            return Err(invalid(
                "n_paths",
                format!("must be at least {MIN_PATHS}, got {}", self.n_paths),
            ));
        }
        if !(self.margin_se > 0.0 && self.margin_se.is_finite()) {
            return Err(invalid("margin_se", format!("must be positive, got {}", self.margin_se)));
        }
        if self.sampler.method == SamplingMethod::CirculantEmbedding && self.cfg.hurst() == 1.0 {
            return Err(invalid(
                "sampler.method",
                "circulant-embedding does not support H = 1; use cholesky",
            ));
        }
        if !(self.sampler.jitter >= 0.0 && self.sampler.jitter.is_finite()) {
            return Err(invalid("sampler.jitter", "must be a nonnegative number"));
        }
        Ok(())
    }

    /// Full validation, naming the first offending field.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.validate_sampling()?;
        if self.grid_sizes.len() < 2 {
            return Err(invalid(
                "grid_sizes",
                "need at least two grid resolutions to expose discretization bias",
            ));
        }
        for (i, &n) in self.grid_sizes.iter().enumerate() {
            if n < 2 {
                return Err(invalid(format!("grid_sizes[{i}]"), format!("need n >= 2, got {n}")));
            }
        }
        let threshold = bounds::threshold(&self.cfg, Regime::Theorem2AllH)?;
        for (i, u) in self.u_values.iter().enumerate() {
            if !(u.u > 0.0 && u.u.is_finite()) {
                return Err(invalid(format!("u_values[{i}]"), format!("must be positive, got {}", u.u)));
            }
            if !u.diagnostic_only && !(u.u > threshold) {
                return Err(invalid(
                    format!("u_values[{i}]"),
                    format!(
                        "u = {} is not above the all-H threshold {threshold}; mark it diagnostic_only",
                        u.u
                    ),
                ));
            }
        }
        Ok(())
    }

    fn grid(&self, n: usize) -> Result<TimeGrid, ExperimentError> {
        TimeGrid::new(self.cfg.horizon(), n).map_err(|e| invalid("grid_sizes", e.to_string()))
    }

    /// The grid to simulate on for `grid_n`, and the subsampling stride.
    fn master_for(&self, grid_n: usize) -> Result<(TimeGrid, usize), ExperimentError> {
        let target = self.grid(grid_n)?;
        if let Some(&finest) = self.grid_sizes.iter().max() {
            if finest >= 2 {
                let master = self.grid(finest)?;
                if let Some(stride) = master.stride_to(&target) {
                    return Ok((master, stride));
                }
            }
        }
        Ok((target, 1))
    }
}

/// Which functional of the path to take the supremum of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Process {
    /// The fOU path `X`.
    Fou,
    /// The driving fBm `B^H`.
    Fbm,
    /// `|B^H|`.
    FbmAbs,
}

/// Grid suprema of `process` at each stride, for every simulated path.
fn simulate_sups(
    spec: &ExperimentSpec,
    master: &TimeGrid,
    strides: &[usize],
    process: Process,
) -> Result<Vec<Vec<f64>>, ExperimentError> {
    let sampler = FbmSampler::new(master, spec.cfg.hurst(), &spec.sampler)?;
    let transform = FouTransform::new(master);
    let eps = spec.cfg.eps();
    Ok(sampler.map_paths(spec.sampler.seed, spec.n_paths, |fbm| {
        let mut sups = vec![0.0_f64; strides.len()];
        let mut visit = |i: usize, x: f64| {
            for (s, &stride) in sups.iter_mut().zip(strides) {
                if i.is_multiple_of(stride) && x > *s {
                    *s = x;
                }
            }
        };
        match process {
            Process::Fou => transform.for_each(fbm, eps, visit),
            Process::Fbm => fbm.iter().enumerate().for_each(|(i, &x)| visit(i, x)),
            Process::FbmAbs => fbm.iter().enumerate().for_each(|(i, &x)| visit(i, x.abs())),
        }
        sups
    }))
}

fn sups_on(spec: &ExperimentSpec, process: Process, grid_n: usize) -> Result<Vec<f64>, ExperimentError> {
    spec.validate_sampling()?;
    let (master, stride) = spec.master_for(grid_n)?;
    Ok(simulate_sups(spec, &master, &[stride], process)?
        .into_iter()
        .map(|s| s[0])
        .collect())
}

/// `P(tau_u < T)` estimated as the fraction of fOU paths whose grid maximum
/// exceeds `u`, with a Wilson interval.
pub fn estimate_tail(spec: &ExperimentSpec, u: f64, grid_n: usize) -> Result<MCEstimate, ExperimentError> {
    if !(u > 0.0) {
        return Err(invalid("u", format!("must be positive, got {u}")));
    }
    let sups = sups_on(spec, Process::Fou, grid_n)?;
    let hits = sups.iter().filter(|&&s| s > u).count();
    Ok(MCEstimate::proportion(hits, sups.len(), spec.margin_se))
}

/// `E[sup process]` on the grid.
pub fn estimate_mean_sup(
    spec: &ExperimentSpec,
    process: Process,
    grid_n: usize,
) -> Result<MCEstimate, ExperimentError> {
    estimate_sup_moment(spec, process, grid_n, 1)
}

/// `E[(sup process)^power]` on the grid.
pub fn estimate_sup_moment(
    spec: &ExperimentSpec,
    process: Process,
    grid_n: usize,
    power: i32,
) -> Result<MCEstimate, ExperimentError> {
    let samples: Vec<f64> = sups_on(spec, process, grid_n)?
        .into_iter()
        .map(|s| s.powi(power))
        .collect();
    Ok(MCEstimate::from_samples(&samples, spec.margin_se))
}

/// `E[X(t_i)^2]` at grid index `t_index` of the `grid_n`-point grid.
pub fn estimate_variance_at(
    spec: &ExperimentSpec,
    t_index: usize,
    grid_n: usize,
) -> Result<MCEstimate, ExperimentError> {
    spec.validate_sampling()?;
    if t_index >= grid_n {
        return Err(invalid("t_index", format!("{t_index} is outside a grid of {grid_n} points")));
    }
    let (master, stride) = spec.master_for(grid_n)?;
    let sampler = FbmSampler::new(&master, spec.cfg.hurst(), &spec.sampler)?;
    let transform = FouTransform::new(&master);
    let eps = spec.cfg.eps();
    let target = t_index * stride;
    let samples = sampler.map_paths(spec.sampler.seed, spec.n_paths, |fbm| {
        let mut value = 0.0;
        transform.for_each(&fbm[..=target], eps, |i, x| {
            if i == target {
                value = x;
            }
        });
        value * value
    });
    Ok(MCEstimate::from_samples(&samples, spec.margin_se))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Violation,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Consistent => "consistent",
            Self::Violation => "violation",
            Self::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "H")]
    pub hurst: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub eps: f64,
    pub u: f64,
    pub diagnostic_only: bool,
    pub grid_n: usize,
    pub p_hat: Option<MCEstimate>,
    pub threshold_t1: Option<f64>,
    pub threshold_t2: f64,
    pub bound_t1: Option<f64>,
    pub bound_t2: Option<f64>,
    pub raw_t1: Option<f64>,
    pub raw_t2: Option<f64>,
    pub sigma_sq_bound: f64,
    /// Largest exact `Var(X_t)` over a scan of `[0, T]`.
    pub sigma_sq_exact_max: f64,
    /// The intermediate variance majorant exceeds `eps^2 T^{2H+1}`.
    pub sigma_step_gap: bool,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl ReportRow {
    /// The tightest bound that applies to this row.
    pub fn applicable_bound(&self) -> Option<f64> {
        match (self.bound_t1, self.bound_t2) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Column order of [`ExperimentReport::write_csv`].
pub const CSV_COLUMNS: [&str; 25] = [
    "H",
    "T",
    "eps",
    "u",
    "diagnostic_only",
    "grid_n",
    "p_hat",
    "stderr",
    "n_samples",
    "ci_low",
    "ci_high",
    "ci_level",
    "threshold_t1",
    "threshold_t2",
    "bound_t1",
    "bound_t2",
    "raw_t1",
    "raw_t2",
    "applicable_bound",
    "sigma_sq_bound",
    "sigma_sq_exact_max",
    "sigma_step_gap",
    "verdict",
    "note",
    "margin_se",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    /// Interval half-width used for the verdicts, in standard errors.
    pub margin_se: f64,
}

impl ExperimentReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.verdict == Verdict::Violation).count()
    }

    pub fn extend(&mut self, other: ExperimentReport) {
        self.margin_se = other.margin_se;
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            let p = r.p_hat;
            w.write_record([
                r.hurst.to_string(),
                r.horizon.to_string(),
                r.eps.to_string(),
                r.u.to_string(),
                r.diagnostic_only.to_string(),
                r.grid_n.to_string(),
                opt(p.map(|p| p.mean)),
                opt(p.map(|p| p.stderr)),
                p.map(|p| p.n_samples.to_string()).unwrap_or_default(),
                opt(p.map(|p| p.ci_low)),
                opt(p.map(|p| p.ci_high)),
                opt(p.map(|p| p.ci_level)),
                opt(r.threshold_t1),
                r.threshold_t2.to_string(),
                opt(r.bound_t1),
                opt(r.bound_t2),
                opt(r.raw_t1),
                opt(r.raw_t2),
                opt(r.applicable_bound()),
                r.sigma_sq_bound.to_string(),
                r.sigma_sq_exact_max.to_string(),
                r.sigma_step_gap.to_string(),
                r.verdict.as_str().to_string(),
                r.note.clone().unwrap_or_default(),
                self.margin_se.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every `(u, grid_n)` combination of `spec`.
///
/// Spec-level problems are errors. Problems confined to one grid (e.g. a
/// sampler that cannot be built there) produce `not-applicable` rows with a
/// note instead of aborting the run.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, ExperimentError> {
    spec.validate()?;
    let cfg = &spec.cfg;
    let mut report = ExperimentReport {
        rows: Vec::new(),
        margin_se: spec.margin_se,
    };
    if spec.u_values.is_empty() {
        return Ok(report);
    }

    // Group grids by the simulation that serves them.
    let finest = *spec.grid_sizes.iter().max().expect("validated non-empty");
    let master = spec.grid(finest)?;
    let mut strides = Vec::new();
    let mut standalone = Vec::new();
    for (g, &n) in spec.grid_sizes.iter().enumerate() {
        match master.stride_to(&spec.grid(n)?) {
            Some(stride) => strides.push((g, stride)),
            None => standalone.push(g),
        }
    }
    let mut sups: Vec<Result<Vec<f64>, String>> = vec![Err(String::new()); spec.grid_sizes.len()];
    let shared_strides: Vec<usize> = strides.iter().map(|&(_, s)| s).collect();
    match simulate_sups(spec, &master, &shared_strides, Process::Fou) {
        Ok(per_path) => {
            for (k, &(g, _)) in strides.iter().enumerate() {
                sups[g] = Ok(per_path.iter().map(|s| s[k]).collect());
            }
        }
        Err(e) => {
            for &(g, _) in &strides {
                sups[g] = Err(e.to_string());
            }
        }
    }
    for g in standalone {
        let grid = spec.grid(spec.grid_sizes[g])?;
        sups[g] = simulate_sups(spec, &grid, &[1], Process::Fou)
            .map(|v| v.into_iter().map(|s| s[0]).collect())
            .map_err(|e| e.to_string());
    }

    let t1_applies = Regime::Theorem1HalfToOne.valid_hurst().contains(cfg.hurst());
    let threshold_t1 = if t1_applies {
        Some(bounds::threshold(cfg, Regime::Theorem1HalfToOne)?)
    } else {
        None
    };
    let threshold_t2 = bounds::threshold(cfg, Regime::Theorem2AllH)?;
    let sigma_sq = sigma_sq_bound(cfg);
    let sigma_sq_exact_max = max_variance_on_grid(cfg, VARIANCE_SCAN_POINTS)?;
    let gap = sigma_step_gap(cfg);

    for u in &spec.u_values {
        let raw_t1 = if t1_applies {
            bounds::tail_bound_raw(cfg, u.u, Regime::Theorem1HalfToOne).ok()
        } else {
            None
        };
        let raw_t2 = bounds::tail_bound_raw(cfg, u.u, Regime::Theorem2AllH).ok();
        for (g, &grid_n) in spec.grid_sizes.iter().enumerate() {
            let mut row = ReportRow {
                hurst: cfg.hurst(),
                horizon: cfg.horizon(),
                eps: cfg.eps(),
                u: u.u,
                diagnostic_only: u.diagnostic_only,
                grid_n,
                p_hat: None,
                threshold_t1,
                threshold_t2,
                bound_t1: raw_t1.map(|p| p.min(1.0)),
                bound_t2: raw_t2.map(|p| p.min(1.0)),
                raw_t1,
                raw_t2,
                sigma_sq_bound: sigma_sq,
                sigma_sq_exact_max,
                sigma_step_gap: gap,
                verdict: Verdict::NotApplicable,
                note: None,
            };
            match &sups[g] {
                Ok(s) => {
                    let hits = s.iter().filter(|&&x| x > u.u).count();
                    let p = MCEstimate::proportion(hits, s.len(), spec.margin_se);
                    row.p_hat = Some(p);
                    if u.diagnostic_only {
                        row.note = Some("diagnostic-only level".to_string());
                    } else if let Some(bound) = row.applicable_bound() {
                        row.verdict = if p.ci_low > bound {
                            Verdict::Violation
                        } else {
                            Verdict::Consistent
                        };
                    } else {
                        row.note = Some("u is not above any applicable threshold".to_string());
                    }
                }
                Err(e) => row.note = Some(e.clone()),
            }
            report.rows.push(row);
        }
    }
    Ok(report)
}

/// A certification run: one experiment per parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub experiments: Vec<ExperimentSpec>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl CertifyConfig {
    /// Parses and validates a JSON config, naming the first offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: CertifyConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            ConfigError::Invalid {
                field: if field == "." { "<root>".to_string() } else { field },
                message: e.into_inner().to_string(),
            }
        })?;
        for (i, spec) in config.experiments.iter().enumerate() {
            spec.validate().map_err(|e| match e {
                ExperimentError::InvalidSpec { field, message } => ConfigError::Invalid {
                    field: format!("experiments[{i}].{field}"),
                    message,
                },
                other => ConfigError::Invalid {
                    field: format!("experiments[{i}]"),
                    message: other.to_string(),
                },
            })?;
        }
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Runs every experiment of `config` and concatenates the rows.
pub fn certify(config: &CertifyConfig) -> Result<ExperimentReport, ExperimentError> {
    let mut report = ExperimentReport {
        rows: Vec::new(),
        margin_se: DEFAULT_MARGIN_SE,
    };
    for spec in &config.experiments {
        report.extend(run_experiment(spec)?);
    }
    Ok(report)
}
