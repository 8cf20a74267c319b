//! Exact Gaussian sampling of fractional Brownian motion on a uniform grid,
//! and the fractional Ornstein-Uhlenbeck path built from it.
//!
//! Two samplers produce the exact finite-dimensional law of `B^H` on the grid:
//!
//! * **Cholesky** of the full covariance matrix `1/2 (t^{2H} + s^{2H} - |t-s|^{2H})`
//!   (`O(n^3)` setup, `O(n^2)` per path). Used as the reference.
//! * **Circulant embedding** of the stationary increment (fGn) sequence,
//!   one FFT of size `2(n-1)` per *pair* of paths (real and imaginary parts
//!   are independent draws), followed by a cumulative sum.
//!
//! At `H = 1` the law is rank one, `B_t = t Z`, and is sampled directly.
//!
//! Randomness is split into fixed batches of [`BATCH_PATHS`] paths; batch `b`
//! draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `b`. Output is
//! therefore identical regardless of how many worker threads run the batches.

use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Paths per independent RNG stream.
pub const BATCH_PATHS: usize = 256;
/// Relative size below which negative circulant eigenvalues count as round-off.
const EIGEN_TOLERANCE: f64 = 1e-10;
/// Number of times the Cholesky jitter is multiplied by 10 before giving up.
const JITTER_ESCALATIONS: u32 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("Hurst exponent must be in (0, 1], got {0}")]
    InvalidHurst(f64),
    #[error("{0}")]
    Unsupported(String),
    #[error(
        "covariance factorization failed at leading minor {minor} even with diagonal jitter {jitter:e}"
    )]
    Factorization { minor: usize, jitter: f64 },
    #[error(
        "circulant embedding has eigenvalue {value:e} at index {index}; use the cholesky sampler instead"
    )]
    NegativeEigenvalue { index: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Uniform grid `t_i = i T / (n - 1)`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    horizon: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n: usize) -> Result<Self, SimError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(SimError::InvalidGrid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if n < 2 {
            return Err(SimError::InvalidGrid(format!(
                "need at least 2 points, got {n}"
            )));
        }
        Ok(Self { horizon, n })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.horizon / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.horizon
        } else {
            self.horizon * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Stride `k` such that every `k`-th point of `self` is a point of `coarse`,
    /// if `coarse` is a subgrid of `self`.
    pub fn stride_to(&self, coarse: &TimeGrid) -> Option<usize> {
        if coarse.horizon != self.horizon || coarse.n > self.n {
            return None;
        }
        let (fine, coarse_steps) = (self.n - 1, coarse.n - 1);
        (fine % coarse_steps == 0).then_some(fine / coarse_steps)
    }
}

/// Process values on a [`TimeGrid`]; `values[0]` is always 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl GaussianPath {
    /// The path restricted to a coarser grid that divides this one.
    pub fn subsample(&self, coarse: &TimeGrid) -> Option<GaussianPath> {
        let stride = self.grid.stride_to(coarse)?;
        Some(GaussianPath {
            grid: *coarse,
            values: self.values.iter().step_by(stride).copied().collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMethod {
    Cholesky,
    #[serde(alias = "circulant")]
    CirculantEmbedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub method: SamplingMethod,
    #[serde(default)]
    pub seed: u64,
    /// Diagonal regularization for Cholesky, relative to the largest variance.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

fn default_jitter() -> f64 {
    1e-12
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            method: SamplingMethod::CirculantEmbedding,
            seed: 0,
            jitter: default_jitter(),
        }
    }
}

impl SamplerConfig {
    pub fn new(method: SamplingMethod, seed: u64) -> Self {
        Self {
            method,
            seed,
            ..Self::default()
        }
    }
}

/// `E[B_s B_t] = 1/2 (t^{2H} + s^{2H} - |t - s|^{2H})`.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Lower-triangular factor stored row by row.
#[derive(Debug, Clone)]
struct LowerTriangular {
    dim: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.data[start..start + i + 1]
    }
}

/// Cholesky factorization of a symmetric matrix given by `entry(i, j)`, `j <= i`.
/// Returns the index of the first non-positive leading minor on failure.
fn cholesky(dim: usize, entry: impl Fn(usize, usize) -> f64) -> Result<LowerTriangular, usize> {
    let mut data = vec![0.0; dim * (dim + 1) / 2];
    for i in 0..dim {
        let row_i = i * (i + 1) / 2;
        for j in 0..=i {
            let row_j = j * (j + 1) / 2;
            let dot: f64 = (0..j).map(|k| data[row_i + k] * data[row_j + k]).sum();
            let v = entry(i, j) - dot;
            if i == j {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(i + 1);
                }
                data[row_i + i] = v.sqrt();
            } else {
                data[row_i + j] = v / data[row_j + j];
            }
        }
    }
    Ok(LowerTriangular { dim, data })
}

struct Circulant {
    /// `sqrt(lambda_k / m)` for the size-`m` circulant embedding.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    /// `dt^H`, the increment scale for a grid step `dt`.
    step_scale: f64,
}

impl std::fmt::Debug for Circulant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Circulant")
            .field("size", &self.scale.len())
            .field("step_scale", &self.step_scale)
            .finish()
    }
}

impl Circulant {
    fn new(increments: usize, hurst: f64, dt: f64) -> Result<Self, SimError> {
        let m = 2 * increments;
        let mut row: Vec<Complex<f64>> = (0..=increments)
            .chain((1..increments).rev())
            .map(|k| Complex::new(fgn_autocovariance(k, hurst), 0.0))
            .collect();
        debug_assert_eq!(row.len(), m);
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let largest = row.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let mut scale = Vec::with_capacity(m);
        for (index, z) in row.iter().enumerate() {
            let value = z.re;
            if value < -EIGEN_TOLERANCE * largest {
                return Err(SimError::NegativeEigenvalue { index, value });
            }
            scale.push((value.max(0.0) / m as f64).sqrt());
        }
        Ok(Self {
            scale,
            fft,
            step_scale: dt.powf(hurst),
        })
    }

    /// Fills `first` and `second` with two independent fBm paths.
    fn sample_pair<R: Rng>(
        &self,
        rng: &mut R,
        buffer: &mut [Complex<f64>],
        scratch: &mut [Complex<f64>],
        first: &mut [f64],
        second: &mut [f64],
    ) {
        for (w, &s) in buffer.iter_mut().zip(&self.scale) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *w = Complex::new(s * re, s * im);
        }
        self.fft.process_with_scratch(buffer, scratch);
        first[0] = 0.0;
        second[0] = 0.0;
        for i in 1..first.len() {
            let z = buffer[i - 1];
            first[i] = first[i - 1] + self.step_scale * z.re;
            second[i] = second[i - 1] + self.step_scale * z.im;
        }
    }
}

#[derive(Debug)]
enum Kernel {
    /// `B_t = t Z` (H = 1).
    Line,
    Cholesky(LowerTriangular),
    Circulant(Circulant),
}

/// A prepared fBm sampler for one `(grid, H)` pair.
///
/// Construction does all factorization work; [`FbmSampler::map_paths`] can then
/// be called any number of times and from any thread.
#[derive(Debug)]
pub struct FbmSampler {
    grid: TimeGrid,
    hurst: f64,
    points: Vec<f64>,
    kernel: Kernel,
}

impl FbmSampler {
    pub fn new(grid: &TimeGrid, hurst: f64, cfg: &SamplerConfig) -> Result<Self, SimError> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            return Err(SimError::InvalidHurst(hurst));
        }
        if !(cfg.jitter >= 0.0 && cfg.jitter.is_finite()) {
            return Err(SimError::InvalidArgument(format!(
                "jitter must be a nonnegative number, got {}",
                cfg.jitter
            )));
        }
        let points = grid.points();
        let kernel = match cfg.method {
            SamplingMethod::CirculantEmbedding if hurst == 1.0 => {
                return Err(SimError::Unsupported(
                    "circulant embedding is degenerate at H = 1; use the cholesky method, \
                     which samples H = 1 directly as B_t = t Z"
                        .to_string(),
                ))
            }
            _ if hurst == 1.0 => Kernel::Line,
            SamplingMethod::Cholesky => Kernel::Cholesky(factor_covariance(&points, hurst, cfg.jitter)?),
            SamplingMethod::CirculantEmbedding => {
                Kernel::Circulant(Circulant::new(grid.len() - 1, hurst, grid.step())?)
            }
        };
        Ok(Self {
            grid: *grid,
            hurst,
            points,
            kernel,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Draws `count` paths from `seed` and maps each through `f`, in path order.
    ///
    /// `f` sees the fBm values on the grid (length `n`, first entry 0).
    pub fn map_paths<R, F>(&self, seed: u64, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(&[f64]) -> R + Sync,
    {
        let batches = count.div_ceil(BATCH_PATHS);
        let per_batch: Vec<Vec<R>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let in_batch = BATCH_PATHS.min(count - b * BATCH_PATHS);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                self.run_batch(&mut rng, in_batch, &f)
            })
            .collect();
        per_batch.into_iter().flatten().collect()
    }

    fn run_batch<R, F>(&self, rng: &mut ChaCha8Rng, in_batch: usize, f: &F) -> Vec<R>
    where
        F: Fn(&[f64]) -> R,
    {
        let n = self.grid.len();
        let mut out = Vec::with_capacity(in_batch);
        let mut path = vec![0.0; n];
        match &self.kernel {
            Kernel::Line => {
                for _ in 0..in_batch {
                    let z: f64 = rng.sample(StandardNormal);
                    for (v, &t) in path.iter_mut().zip(&self.points) {
                        *v = t * z;
                    }
                    out.push(f(&path));
                }
            }
            Kernel::Cholesky(l) => {
                let mut z = vec![0.0; l.dim];
                for _ in 0..in_batch {
                    for zi in z.iter_mut() {
                        *zi = rng.sample(StandardNormal);
                    }
                    path[0] = 0.0;
                    for i in 0..l.dim {
                        path[i + 1] = l.row(i).iter().zip(&z).map(|(a, b)| a * b).sum();
                    }
                    out.push(f(&path));
                }
            }
            Kernel::Circulant(c) => {
                let m = c.scale.len();
                let mut buffer = vec![Complex::new(0.0, 0.0); m];
                let mut scratch = vec![Complex::new(0.0, 0.0); c.fft.get_inplace_scratch_len()];
                let mut second = vec![0.0; n];
                while out.len() < in_batch {
                    c.sample_pair(rng, &mut buffer, &mut scratch, &mut path, &mut second);
                    out.push(f(&path));
                    if out.len() < in_batch {
                        out.push(f(&second));
                    }
                }
            }
        }
        out
    }
}

fn factor_covariance(points: &[f64], hurst: f64, jitter: f64) -> Result<LowerTriangular, SimError> {
    let free = &points[1..];
    let largest = free.iter().map(|&t| t.powf(2.0 * hurst)).fold(0.0, f64::max);
    let mut jitter = jitter;
    let mut last_minor = 0;
    for _ in 0..=JITTER_ESCALATIONS {
        let shift = jitter * largest;
        match cholesky(free.len(), |i, j| {
            fbm_covariance(free[i], free[j], hurst) + if i == j { shift } else { 0.0 }
        }) {
            Ok(l) => return Ok(l),
            Err(minor) => last_minor = minor,
        }
        jitter *= 10.0;
    }
    Err(SimError::Factorization {
        minor: last_minor,
        jitter: jitter / 10.0,
    })
}

/// `count` independent fBm paths on `grid`; a deterministic function of
/// `(cfg.seed, count, grid, hurst)`.
pub fn sample_fbm(
    grid: &TimeGrid,
    hurst: f64,
    cfg: &SamplerConfig,
    count: usize,
) -> Result<Vec<GaussianPath>, SimError> {
    if count < 1 {
        return Err(SimError::InvalidArgument("count must be at least 1".to_string()));
    }
    let sampler = FbmSampler::new(grid, hurst, cfg)?;
    Ok(sampler.map_paths(cfg.seed, count, |v| GaussianPath {
        grid: *grid,
        values: v.to_vec(),
    }))
}

/// Precomputed trapezoidal weights for turning fBm values into an fOU path.
///
/// With `R_i = e^{-t_i} int_0^{t_i} e^u B_u du` approximated by the trapezoid
/// rule, `R_i = e^{-dt} R_{i-1} + dt/2 (e^{-dt} B_{i-1} + B_i)` and
/// `X_i = eps (B_i - R_i)`.
#[derive(Debug, Clone, Copy)]
pub struct FouTransform {
    decay: f64,
    half_step: f64,
}

impl FouTransform {
    pub fn new(grid: &TimeGrid) -> Self {
        let dt = grid.step();
        Self {
            decay: (-dt).exp(),
            half_step: 0.5 * dt,
        }
    }

    pub fn apply(&self, fbm: &[f64], eps: f64, out: &mut [f64]) {
        debug_assert_eq!(fbm.len(), out.len());
        self.for_each(fbm, eps, |i, x| out[i] = x);
    }

    /// Streams `(i, X_i)` without storing the path.
    pub fn for_each(&self, fbm: &[f64], eps: f64, mut visit: impl FnMut(usize, f64)) {
        if fbm.is_empty() {
            return;
        }
        visit(0, 0.0);
        let mut running = 0.0;
        for i in 1..fbm.len() {
            running = self.decay * running + self.half_step * (self.decay * fbm[i - 1] + fbm[i]);
            visit(i, eps * (fbm[i] - running));
        }
    }
}

/// `X_t = eps (B_t - e^{-t} int_0^t e^u B_u du)`, with the integral taken by
/// the trapezoid rule on the path's grid.
pub fn fou_from_fbm(path: &GaussianPath, eps: f64) -> GaussianPath {
    let mut values = vec![0.0; path.values.len()];
    FouTransform::new(&path.grid).apply(&path.values, eps, &mut values);
    GaussianPath {
        grid: path.grid,
        values,
    }
}

/// Maximum of a slice; 0 for an empty slice.
pub fn sup_of(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Grid maximum of the path, including the pinned `0` at `t = 0`.
pub fn path_sup(path: &GaussianPath) -> f64 {
    sup_of(&path.values)
}

/// `tau_u < T`, i.e. the grid supremum strictly exceeds `u`.
pub fn hitting_indicator(path: &GaussianPath, u: f64) -> bool {
    path_sup(path) > u
}

/// Metadata written as the first line of a path dump.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub process: String,
    pub hurst: f64,
    pub horizon: f64,
    pub grid_n: usize,
    pub count: usize,
    pub method: SamplingMethod,
    pub seed: u64,
    pub eps: Option<f64>,
}

impl DumpHeader {
    pub fn line(&self) -> String {
        let method = match self.method {
            SamplingMethod::Cholesky => "cholesky",
            SamplingMethod::CirculantEmbedding => "circulant-embedding",
        };
        let mut line = format!(
            "# process={},H={},T={},grid_n={},count={},method={},seed={}",
            self.process, self.hurst, self.horizon, self.grid_n, self.count, method, self.seed
        );
        if let Some(eps) = self.eps {
            line.push_str(&format!(",eps={eps}"));
        }
        line
    }
}

/// Writes the header line then one comma-separated line of values per path.
pub fn write_path_dump<W: Write>(
    mut out: W,
    header: &DumpHeader,
    paths: &[GaussianPath],
) -> io::Result<()> {
    writeln!(out, "{}", header.line())?;
    for path in paths {
        let mut first = true;
        for v in &path.values {
            if !first {
                out.write_all(b",")?;
            }
            write!(out, "{v}")?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t, n).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = grid(2.0, 5);
        assert_eq!(g.points(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 4).is_err());
        let fine = grid(1.0, 4097);
        assert_eq!(fine.stride_to(&grid(1.0, 257)), Some(16));
        assert_eq!(fine.stride_to(&grid(1.0, 100)), None);
        assert_eq!(fine.stride_to(&grid(2.0, 257)), None);
    }

    #[test]
    fn covariance_examples() {
        for h in [0.2, 0.5, 0.9] {
            assert!((fbm_covariance(1.0, 1.0, h) - 1.0).abs() < 1e-15);
            assert!((fbm_covariance(1.3, 1.3, h) - 1.3f64.powf(2.0 * h)).abs() < 1e-15);
            assert_eq!(fbm_covariance(0.4, 1.1, h), fbm_covariance(1.1, 0.4, h));
        }
        assert!((fbm_covariance(1.0, 2.0, 0.5) - 1.0).abs() < 1e-15);
        assert!((fbm_covariance(1.0, 2.0, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn circulant_rejects_unit_hurst() {
        let cfg = SamplerConfig::new(SamplingMethod::CirculantEmbedding, 0);
        match FbmSampler::new(&grid(1.0, 8), 1.0, &cfg) {
            Err(SimError::Unsupported(msg)) => assert!(msg.contains("cholesky")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_hurst_paths_are_lines() {
        let cfg = SamplerConfig::new(SamplingMethod::Cholesky, 3);
        let g = grid(2.0, 9);
        for p in sample_fbm(&g, 1.0, &cfg, 20).unwrap() {
            let slope = p.values[1] / g.point(1);
            for i in 1..g.len() {
                assert!((p.values[i] / g.point(i) - slope).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn paths_start_at_zero_and_are_deterministic() {
        for method in [SamplingMethod::Cholesky, SamplingMethod::CirculantEmbedding] {
            let cfg = SamplerConfig::new(method, 11);
            let g = grid(1.0, 33);
            let a = sample_fbm(&g, 0.3, &cfg, 600).unwrap();
            let b = sample_fbm(&g, 0.3, &cfg, 600).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 600);
            assert!(a.iter().all(|p| p.values[0] == 0.0 && p.values.len() == 33));
            let c = sample_fbm(&g, 0.3, &SamplerConfig::new(method, 12), 600).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn prefix_of_a_larger_draw_is_stable() {
        let cfg = SamplerConfig::default();
        let g = grid(1.0, 17);
        let small = sample_fbm(&g, 0.7, &cfg, 300).unwrap();
        let large = sample_fbm(&g, 0.7, &cfg, 1000).unwrap();
        assert_eq!(small[..], large[..300]);
    }

    #[test]
    fn zero_count_is_rejected() {
        assert!(sample_fbm(&grid(1.0, 4), 0.5, &SamplerConfig::default(), 0).is_err());
    }

    #[test]
    fn cholesky_reports_failing_minor() {
        // A singular matrix: every entry 1.
        assert_eq!(cholesky(3, |_, _| 1.0).unwrap_err(), 2);
        let l = cholesky(2, |i, j| if i == j { 4.0 } else { 2.0 }).unwrap();
        assert_eq!(l.row(0), &[2.0]);
        assert!((l.row(1)[0] - 1.0).abs() < 1e-15 && (l.row(1)[1] - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jitter_rescues_near_singular_covariance() {
        // Very fine grid at H close to 1 is numerically rank-deficient.
        let g = grid(1.0, 200);
        let cfg = SamplerConfig {
            method: SamplingMethod::Cholesky,
            seed: 0,
            jitter: 1e-12,
        };
        assert!(FbmSampler::new(&g, 0.999, &cfg).is_ok());
        let no_jitter = SamplerConfig { jitter: 0.0, ..cfg };
        match FbmSampler::new(&g, 0.999, &no_jitter) {
            Err(SimError::Factorization { minor, .. }) => assert!(minor > 1),
            Ok(_) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn single_free_point_has_exact_marginal_variance() {
        let g = grid(2.0, 2);
        let h = 0.7;
        let target = 2f64.powf(2.0 * h);
        for method in [SamplingMethod::Cholesky, SamplingMethod::CirculantEmbedding] {
            let sampler = FbmSampler::new(&g, h, &SamplerConfig::new(method, 5)).unwrap();
            let sq: Vec<f64> = sampler.map_paths(5, 100_000, |v| v[1] * v[1]);
            let n = sq.len() as f64;
            let mean = sq.iter().sum::<f64>() / n;
            let sd = (sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let se = sd / n.sqrt();
            assert!((mean - target).abs() < 3.0 * se, "{method:?}: {mean} vs {target} (se {se})");
        }
    }

    #[test]
    fn fou_of_zero_is_zero() {
        let g = grid(1.0, 10);
        let zero = GaussianPath {
            grid: g,
            values: vec![0.0; 10],
        };
        assert_eq!(fou_from_fbm(&zero, 2.0).values, vec![0.0; 10]);
    }

    #[test]
    fn fou_scales_exactly_with_eps() {
        let g = grid(1.0, 65);
        let paths = sample_fbm(&g, 0.6, &SamplerConfig::default(), 5).unwrap();
        for p in &paths {
            let one = fou_from_fbm(p, 1.0);
            for eps in [2.0, 0.37, 3.1] {
                let scaled = fou_from_fbm(p, eps);
                for (a, b) in scaled.values.iter().zip(&one.values) {
                    assert_eq!(a.to_bits(), (eps * b).to_bits());
                }
            }
        }
    }

    #[test]
    fn fou_of_linear_path_matches_closed_form() {
        // B_t = t: e^{-t} int_0^t u e^u du = t - 1 + e^{-t}, so X_t = 1 - e^{-t}.
        let g = grid(1.0, 2049);
        let path = GaussianPath {
            grid: g,
            values: g.points(),
        };
        let x = fou_from_fbm(&path, 1.0);
        for (i, v) in x.values.iter().enumerate() {
            let t = g.point(i);
            assert!((v - (1.0 - (-t).exp())).abs() < 1e-7);
        }
    }

    #[test]
    fn sup_and_hitting_examples() {
        let g = grid(1.0, 3);
        let p = |v: Vec<f64>| GaussianPath { grid: g, values: v };
        assert_eq!(path_sup(&p(vec![0.0, 0.0, 0.0])), 0.0);
        assert_eq!(path_sup(&p(vec![0.0, -1.0, -2.0])), 0.0);
        assert_eq!(path_sup(&p(vec![0.0, 0.3, 0.1])), 0.3);
        assert!(hitting_indicator(&p(vec![0.0, 0.3, 0.1]), 0.2));
        assert!(!hitting_indicator(&p(vec![0.0, 0.3, 0.1]), 0.3));
        assert!(!hitting_indicator(&p(vec![0.0, 0.0, 0.0]), 0.1));
    }

    #[test]
    fn subsampled_sup_never_exceeds_fine_sup() {
        let fine = grid(1.0, 4097);
        let paths = sample_fbm(&fine, 0.4, &SamplerConfig::default(), 50).unwrap();
        for p in &paths {
            let s257 = path_sup(&p.subsample(&grid(1.0, 257)).unwrap());
            let s1025 = path_sup(&p.subsample(&grid(1.0, 1025)).unwrap());
            let s4097 = path_sup(p);
            assert!(s257 <= s1025 && s1025 <= s4097);
        }
    }

    #[test]
    fn dump_format() {
        let g = grid(1.0, 4);
        let paths = sample_fbm(&g, 0.5, &SamplerConfig::new(SamplingMethod::Cholesky, 0), 3).unwrap();
        let header = DumpHeader {
            process: "fbm".into(),
            hurst: 0.5,
            horizon: 1.0,
            grid_n: 4,
            count: 3,
            method: SamplingMethod::Cholesky,
            seed: 0,
            eps: None,
        };
        let mut buf = Vec::new();
        write_path_dump(&mut buf, &header, &paths).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("# process=fbm,H=0.5,T=1,grid_n=4"));
        for (line, p) in lines[1..].iter().zip(&paths) {
            let parsed: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(parsed, p.values);
        }
    }
}
