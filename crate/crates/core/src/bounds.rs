//! Closed-form tail bounds for the hitting time of the fractional
//! Ornstein-Uhlenbeck process `dX = -X dt + eps dB^H`, `X_0 = 0`.
//!
//! Everything here is a pure function of a validated [`ModelConfig`]. The
//! tail bounds have the Borell shape `exp{-a (u/eps)^2 + b (u/eps) - c}`,
//! obtained by plugging an upper bound on `E sup X` and the variance bound
//! `sigma_T^2 <= eps^2 T^{2H+1}` into the Borell inequality. Two regimes exist:
//! one for `H in [1/2, 1]` (reflected-fBm moment estimate, constant `2`) and
//! one for all `H in (0, 1]` (Pisier entropy estimate, constant `2 pi sqrt 2`).

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::quadrature::{integrate_1d, QuadratureError, QuadratureSpec};

/// `sqrt(2 / pi)`: `E|N(0,1)|`, and the expected supremum of standard Brownian
/// motion on `[0, 1]`.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("{what} requires H in {valid}, got H = {hurst}")]
    HurstOutOfRange {
        what: &'static str,
        valid: HurstRange,
        hurst: f64,
    },
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),
    #[error("{0} is outside its domain")]
    Domain(String),
    #[error("u = {u} must be strictly above the expected-supremum threshold {threshold}")]
    BelowThreshold { u: f64, threshold: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Range of Hurst exponents a formula is valid for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HurstRange {
    /// `[1/2, 1]`
    HalfToOne,
    /// `(0, 1]`
    ZeroToOne,
}

impl HurstRange {
    pub fn contains(self, hurst: f64) -> bool {
        match self {
            Self::HalfToOne => (0.5..=1.0).contains(&hurst),
            Self::ZeroToOne => hurst > 0.0 && hurst <= 1.0,
        }
    }
}

impl std::fmt::Display for HurstRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::HalfToOne => f.write_str("[1/2, 1]"),
            Self::ZeroToOne => f.write_str("(0, 1]"),
        }
    }
}

fn require_hurst(what: &'static str, valid: HurstRange, hurst: f64) -> Result<(), BoundsError> {
    if valid.contains(hurst) {
        Ok(())
    } else {
        Err(BoundsError::HurstOutOfRange { what, valid, hurst })
    }
}

/// Model parameters. The mean-reversion rate is fixed to 1 and the process
/// starts at 0; [`ModelConfig::with_dynamics`] rejects anything else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelConfig {
    #[serde(rename = "H")]
    hurst: f64,
    #[serde(rename = "T")]
    horizon: f64,
    eps: f64,
}

impl ModelConfig {
    pub fn new(hurst: f64, horizon: f64, eps: f64) -> Result<Self, BoundsError> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            return Err(BoundsError::InvalidModel(format!(
                "H must be in (0, 1], got {hurst}"
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(BoundsError::InvalidModel(format!(
                "T must be positive and finite, got {horizon}"
            )));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(BoundsError::InvalidModel(format!(
                "eps must be positive and finite, got {eps}"
            )));
        }
        Ok(Self {
            hurst,
            horizon,
            eps,
        })
    }

    pub fn with_dynamics(
        hurst: f64,
        horizon: f64,
        eps: f64,
        lambda: f64,
        x0: f64,
    ) -> Result<Self, BoundsError> {
        if lambda != 1.0 {
            return Err(BoundsError::InvalidModel(format!(
                "lambda is fixed to 1, got {lambda}"
            )));
        }
        if x0 != 0.0 {
            return Err(BoundsError::InvalidModel(format!(
                "x0 is fixed to 0, got {x0}"
            )));
        }
        Self::new(hurst, horizon, eps)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn lambda(&self) -> f64 {
        1.0
    }

    pub fn x0(&self) -> f64 {
        0.0
    }

    fn check_time(&self, t: f64) -> Result<(), BoundsError> {
        if t.is_finite() && (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(BoundsError::Domain(format!(
                "t = {t} (valid range [0, {}])",
                self.horizon
            )))
        }
    }
}

#[derive(Deserialize)]
struct ModelConfigRepr {
    #[serde(rename = "H")]
    hurst: f64,
    #[serde(rename = "T")]
    horizon: f64,
    eps: f64,
    #[serde(default = "one")]
    lambda: f64,
    #[serde(default)]
    x0: f64,
}

fn one() -> f64 {
    1.0
}

impl<'de> Deserialize<'de> for ModelConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = ModelConfigRepr::deserialize(d)?;
        ModelConfig::with_dynamics(r.hurst, r.horizon, r.eps, r.lambda, r.x0)
            .map_err(serde::de::Error::custom)
    }
}

/// Which of the two tail-bound regimes to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `H in [1/2, 1]`, constant `k = 2`.
    Theorem1HalfToOne,
    /// `H in (0, 1]`, constant `k = 2 pi sqrt 2`.
    Theorem2AllH,
}

impl Regime {
    pub fn valid_hurst(self) -> HurstRange {
        match self {
            Self::Theorem1HalfToOne => HurstRange::HalfToOne,
            Self::Theorem2AllH => HurstRange::ZeroToOne,
        }
    }

    /// The constant bounding `E sup |B^H| / (sqrt(2/pi) T^H)`.
    pub fn sup_constant(self) -> f64 {
        match self {
            Self::Theorem1HalfToOne => 2.0,
            Self::Theorem2AllH => 2.0 * PI * SQRT_2,
        }
    }

    pub fn proposition_part(self) -> PropositionPart {
        match self {
            Self::Theorem1HalfToOne => PropositionPart::A,
            Self::Theorem2AllH => PropositionPart::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub regime: Regime,
}

impl BoundCoefficients {
    /// `-a x^2 + b x - c` at `x = u / eps`.
    pub fn exponent(&self, u_over_eps: f64) -> f64 {
        -self.a * u_over_eps * u_over_eps + self.b * u_over_eps - self.c
    }
}

/// Coefficients `(a, b, c)` of the tail bound in the given regime.
///
/// `b = sqrt(2/pi) (k(H+1) + T) / ((H+1) T^{H+1})` and
/// `c = (k + T/(H+1))^2 / (pi T)` with `k` from [`Regime::sup_constant`].
pub fn coefficients(cfg: &ModelConfig, regime: Regime) -> Result<BoundCoefficients, BoundsError> {
    require_hurst("this bound regime", regime.valid_hurst(), cfg.hurst)?;
    let h = cfg.hurst;
    let t = cfg.horizon;
    let k = regime.sup_constant();
    Ok(BoundCoefficients {
        a: 1.0 / (2.0 * t.powf(2.0 * h + 1.0)),
        b: SQRT_2_OVER_PI * (k * (h + 1.0) + t) / ((h + 1.0) * t.powf(h + 1.0)),
        c: (k + t / (h + 1.0)).powi(2) / (PI * t),
        regime,
    })
}

/// The `u` level above which the tail bound of `regime` is valid: the
/// matching expected-supremum upper bound.
pub fn threshold(cfg: &ModelConfig, regime: Regime) -> Result<f64, BoundsError> {
    Ok(expected_sup_bound(cfg, regime.proposition_part())?.value)
}

/// Natural log of the unclamped tail bound, `-a (u/eps)^2 + b (u/eps) - c`.
pub fn tail_log_bound(cfg: &ModelConfig, u: f64, regime: Regime) -> Result<f64, BoundsError> {
    let coeffs = coefficients(cfg, regime)?;
    let threshold = threshold(cfg, regime)?;
    if !(u > threshold) {
        return Err(BoundsError::BelowThreshold { u, threshold });
    }
    Ok(coeffs.exponent(u / cfg.eps))
}

/// Unclamped `exp{-a (u/eps)^2 + b (u/eps) - c}`; may exceed 1 near the threshold.
pub fn tail_bound_raw(cfg: &ModelConfig, u: f64, regime: Regime) -> Result<f64, BoundsError> {
    tail_log_bound(cfg, u, regime).map(f64::exp)
}

/// Upper bound on `P(tau_u < T)`, clamped to `[0, 1]`.
pub fn tail_bound(cfg: &ModelConfig, u: f64, regime: Regime) -> Result<f64, BoundsError> {
    tail_bound_raw(cfg, u, regime).map(|p| p.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupremumMethod {
    PropositionA,
    PropositionB,
    Dudley,
    Pisier,
    Debicki,
    MomentTheorem,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupremumBound {
    pub value: f64,
    pub method: SupremumMethod,
    pub valid_hurst: HurstRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropositionPart {
    /// `H in [1/2, 1]`
    A,
    /// `H in (0, 1]`
    B,
}

/// Upper bound on `E sup_{[0,T]} X_t`:
/// `sqrt(2/pi) T^H [k + T/(H+1)] eps` with `k = 2` (part A) or `2 pi sqrt 2` (part B).
///
/// Comes from `sup X <= eps sup|B^H| + eps int_0^T |B^H_u| du`; the first term
/// is bounded through the reflected-fBm moment estimate (A) or the Pisier
/// entropy estimate (B), and `E|B^H_u| = sqrt(2/pi) u^H` integrates exactly.
pub fn expected_sup_bound(
    cfg: &ModelConfig,
    part: PropositionPart,
) -> Result<SupremumBound, BoundsError> {
    let (k, method, valid) = match part {
        PropositionPart::A => (2.0, SupremumMethod::PropositionA, HurstRange::HalfToOne),
        PropositionPart::B => (
            2.0 * PI * SQRT_2,
            SupremumMethod::PropositionB,
            HurstRange::ZeroToOne,
        ),
    };
    require_hurst("expected-supremum bound", valid, cfg.hurst)?;
    let h = cfg.hurst;
    let t = cfg.horizon;
    Ok(SupremumBound {
        value: SQRT_2_OVER_PI * t.powf(h) * (k + t / (h + 1.0)) * cfg.eps,
        method,
        valid_hurst: valid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    Dudley,
    Pisier,
    Debicki,
}

impl EntropyMethod {
    pub const ALL: [EntropyMethod; 3] = [Self::Dudley, Self::Pisier, Self::Debicki];

    pub fn valid_hurst(self) -> HurstRange {
        match self {
            Self::Debicki => HurstRange::HalfToOne,
            _ => HurstRange::ZeroToOne,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Dudley => "dudley",
            Self::Pisier => "pisier",
            Self::Debicki => "debicki",
        }
    }
}

/// `int_lo^hi sqrt(log(1/x)) dx`, the normalized entropy integral for fBm.
pub fn entropy_integral(hi: f64, spec: &QuadratureSpec) -> Result<f64, BoundsError> {
    Ok(integrate_1d(|x: f64| (-x.ln()).max(0.0).sqrt(), 0.0, hi, spec)?)
}

/// The constant `C` in `E sup_{[0,T]} B^H <= C T^H`.
///
/// Dudley: `4 sqrt 2 int_0^{1/2} sqrt(log 1/x) dx`; Pisier:
/// `4 int_0^1 sqrt(log 1/x) dx = 2 sqrt(pi)`; Debicki: `sqrt(2/pi)`. The two
/// entropy constants are computed by quadrature.
pub fn entropy_constant(method: EntropyMethod) -> Result<f64, BoundsError> {
    let spec = QuadratureSpec::default();
    Ok(match method {
        EntropyMethod::Dudley => 4.0 * SQRT_2 * entropy_integral(0.5, &spec)?,
        EntropyMethod::Pisier => 4.0 * entropy_integral(1.0, &spec)?,
        EntropyMethod::Debicki => SQRT_2_OVER_PI,
    })
}

/// Upper bound on `E sup_{[0,T]} B^H` by the requested route.
pub fn fbm_sup_bound(
    hurst: f64,
    horizon: f64,
    method: EntropyMethod,
) -> Result<SupremumBound, BoundsError> {
    check_hurst_horizon(hurst, horizon)?;
    require_hurst(method.name(), method.valid_hurst(), hurst)?;
    let constant = entropy_constant(method)?;
    Ok(SupremumBound {
        value: constant * horizon.powf(hurst),
        method: match method {
            EntropyMethod::Dudley => SupremumMethod::Dudley,
            EntropyMethod::Pisier => SupremumMethod::Pisier,
            EntropyMethod::Debicki => SupremumMethod::Debicki,
        },
        valid_hurst: method.valid_hurst(),
    })
}

fn check_hurst_horizon(hurst: f64, horizon: f64) -> Result<(), BoundsError> {
    if !(hurst > 0.0 && hurst <= 1.0) {
        return Err(BoundsError::InvalidModel(format!(
            "H must be in (0, 1], got {hurst}"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(BoundsError::InvalidModel(format!(
            "T must be positive and finite, got {horizon}"
        )));
    }
    Ok(())
}

/// Covering number `N(eps) = T^H / eps` of `[0, T]` under `d(s,t) = |t-s|^H`.
///
/// Kept real-valued; take the ceiling for an integer count.
pub fn covering_number(epsilon: f64, hurst: f64, horizon: f64) -> Result<f64, BoundsError> {
    if !(epsilon > 0.0) {
        return Err(BoundsError::Domain(format!("covering radius {epsilon}")));
    }
    check_hurst_horizon(hurst, horizon)?;
    Ok(horizon.powf(hurst) / epsilon)
}

/// Canonical fBm metric `d(s,t) = |t - s|^H`.
pub fn canonical_metric(s: f64, t: f64, hurst: f64) -> f64 {
    (t - s).abs().powf(hurst)
}

/// `E X_t^2 = eps^2 [t^{2H} e^{-t} + 1/2 int_0^t u^{2H} (e^{-u} - e^{u-2t}) du]`.
pub fn variance_exact(cfg: &ModelConfig, t: f64) -> Result<f64, BoundsError> {
    cfg.check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let two_h = 2.0 * cfg.hurst;
    let spec = QuadratureSpec::default();
    let integral = integrate_1d(
        |u: f64| u.powf(two_h) * ((-u).exp() - (u - 2.0 * t).exp()),
        0.0,
        t,
        &spec,
    )?;
    let eps2 = cfg.eps * cfg.eps;
    Ok(eps2 * (t.powf(two_h) * (-t).exp() + 0.5 * integral))
}

/// Independent evaluation of `E X_t^2` from the unsimplified expansion
/// `eps^2 [t^{2H} - 2 e^{-t} E(B_t Y_t) + e^{-2t} E(Y_t^2)]`,
/// `Y_t = int_0^t e^u B_u du`.
///
/// The cross moment is a 1-D quadrature of the fBm covariance against `e^u`,
/// and the square moment is the covariance double integral over the triangle
/// `0 <= s <= u <= t`. Neither uses the simplified closed form, so agreement
/// with [`variance_exact`] checks that simplification.
pub fn variance_oracle(cfg: &ModelConfig, t: f64) -> Result<f64, BoundsError> {
    cfg.check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let two_h = 2.0 * cfg.hurst;
    let t2h = t.powf(two_h);
    let spec = QuadratureSpec::default();
    let cross = integrate_1d(
        |u: f64| 0.5 * (t2h + u.powf(two_h) - (t - u).abs().powf(two_h)) * u.exp(),
        0.0,
        t,
        &spec,
    )?;
    let square = crate::quadrature::integrate_2d_triangle(
        |u: f64, s: f64| {
            (u.powf(two_h) + s.powf(two_h) - (u - s).abs().powf(two_h)) * (u + s).exp()
        },
        t,
        &spec,
    )?
    .value;
    let eps2 = cfg.eps * cfg.eps;
    Ok(eps2 * (t2h - 2.0 * (-t).exp() * cross + (-2.0 * t).exp() * square))
}

/// `eps^2 [t^{2H} e^{-t} + 1/2 (1 - e^{-2t}) t^{2H+1} / (2H+1)]`, an upper
/// bound on [`variance_exact`] at every `t`.
pub fn variance_upper(cfg: &ModelConfig, t: f64) -> Result<f64, BoundsError> {
    cfg.check_time(t)?;
    let h = cfg.hurst;
    let eps2 = cfg.eps * cfg.eps;
    Ok(eps2
        * (t.powf(2.0 * h) * (-t).exp()
            + 0.5 * (1.0 - (-2.0 * t).exp()) * t.powf(2.0 * h + 1.0) / (2.0 * h + 1.0)))
}

/// `sigma_T^2 <= eps^2 T^{2H+1}`.
pub fn sigma_sq_bound(cfg: &ModelConfig) -> f64 {
    cfg.eps * cfg.eps * cfg.horizon.powf(2.0 * cfg.hurst + 1.0)
}

/// `eps^2 [T^{2H} + 1/2 T^{2H+1} / (2H+1)]`, the intermediate majorant that
/// precedes [`sigma_sq_bound`]. It exceeds `eps^2 T^{2H+1}` whenever
/// `T < 2(2H+1)/(4H+1)`; see [`sigma_step_gap`].
pub fn sigma_sq_intermediate(cfg: &ModelConfig) -> f64 {
    let h = cfg.hurst;
    let t = cfg.horizon;
    cfg.eps * cfg.eps * (t.powf(2.0 * h) + 0.5 * t.powf(2.0 * h + 1.0) / (2.0 * h + 1.0))
}

/// True when [`sigma_sq_intermediate`] is larger than [`sigma_sq_bound`], i.e.
/// the last step of the variance bound does not hold as written.
pub fn sigma_step_gap(cfg: &ModelConfig) -> bool {
    sigma_sq_intermediate(cfg) > sigma_sq_bound(cfg)
}

/// Largest [`variance_exact`] over `points` equally spaced times in `[0, T]`.
pub fn max_variance_on_grid(cfg: &ModelConfig, points: usize) -> Result<f64, BoundsError> {
    let points = points.max(2);
    let mut best: f64 = 0.0;
    for i in 0..points {
        let t = cfg.horizon * i as f64 / (points - 1) as f64;
        best = best.max(variance_exact(cfg, t.min(cfg.horizon))?);
    }
    Ok(best)
}

/// Unclamped Borell bound `exp{-(u - m)^2 / (2 sigma^2)}`.
pub fn borell_bound_raw(u: f64, mean_sup: f64, sigma_sq: f64) -> Result<f64, BoundsError> {
    if !(sigma_sq > 0.0) {
        return Err(BoundsError::Domain(format!("sigma^2 = {sigma_sq}")));
    }
    if !(u > mean_sup) {
        return Err(BoundsError::BelowThreshold {
            u,
            threshold: mean_sup,
        });
    }
    let d = u - mean_sup;
    Ok((-(d * d) / (2.0 * sigma_sq)).exp())
}

/// `P(sup X > u) <= exp{-(u - E sup X)^2 / (2 sigma^2)}`, clamped to `[0, 1]`.
pub fn borell_bound(u: f64, mean_sup: f64, sigma_sq: f64) -> Result<f64, BoundsError> {
    borell_bound_raw(u, mean_sup, sigma_sq).map(|p| p.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentDirection {
    /// Super-additive variance (`H >= 1/2`).
    Upper,
    /// Sub-additive variance (`H <= 1/2`).
    Lower,
}

/// Bound on `E[(sup_{[0,T]} B^H)^gamma]`:
/// `(T^{2H})^{gamma/2} 2^{gamma/2} Gamma((gamma+1)/2) / sqrt(pi)`.
///
/// This is an upper bound when `t^{2H}` is super-additive (`H >= 1/2`) and a
/// lower bound when it is sub-additive (`H <= 1/2`). Supported `gamma` range
/// is `(0, 10]`.
pub fn moment_bound(
    gamma_exp: f64,
    hurst: f64,
    horizon: f64,
    direction: MomentDirection,
) -> Result<f64, BoundsError> {
    if !(gamma_exp > 0.0 && gamma_exp <= 10.0) {
        return Err(BoundsError::Domain(format!(
            "moment order gamma = {gamma_exp} (supported: (0, 10])"
        )));
    }
    check_hurst_horizon(hurst, horizon)?;
    match direction {
        MomentDirection::Upper if hurst < 0.5 => {
            return Err(BoundsError::Domain(format!(
                "upper moment bound needs a super-additive variance t^(2H) (H >= 1/2), got H = {hurst}"
            )))
        }
        MomentDirection::Lower if hurst > 0.5 => {
            return Err(BoundsError::Domain(format!(
                "lower moment bound needs a sub-additive variance t^(2H) (H <= 1/2), got H = {hurst}"
            )))
        }
        _ => {}
    }
    let variance = horizon.powf(2.0 * hurst);
    Ok(variance.powf(gamma_exp / 2.0) * 2f64.powf(gamma_exp / 2.0) * gamma((gamma_exp + 1.0) / 2.0)
        / PI.sqrt())
}

/// One row of the `bounds` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub u: f64,
    pub threshold_t1: Option<f64>,
    pub threshold_t2: f64,
    pub bound_t1: Option<f64>,
    pub bound_t2: Option<f64>,
    pub raw_t1: Option<f64>,
    pub raw_t2: Option<f64>,
}

impl BoundsRow {
    /// `u` is at or below every applicable threshold.
    pub fn below_threshold(&self) -> bool {
        self.bound_t1.is_none() && self.bound_t2.is_none()
    }
}

/// Both regimes' thresholds and bounds at each `u`; regimes whose threshold
/// is not exceeded (or whose H range excludes `cfg`) are `None`.
pub fn bounds_table(cfg: &ModelConfig, us: &[f64]) -> Result<Vec<BoundsRow>, BoundsError> {
    let t1_applies = Regime::Theorem1HalfToOne.valid_hurst().contains(cfg.hurst);
    let threshold_t1 = if t1_applies {
        Some(threshold(cfg, Regime::Theorem1HalfToOne)?)
    } else {
        None
    };
    let threshold_t2 = threshold(cfg, Regime::Theorem2AllH)?;
    us.iter()
        .map(|&u| {
            let raw_t1 = if t1_applies {
                tail_bound_raw(cfg, u, Regime::Theorem1HalfToOne).ok()
            } else {
                None
            };
            let raw_t2 = tail_bound_raw(cfg, u, Regime::Theorem2AllH).ok();
            Ok(BoundsRow {
                u,
                threshold_t1,
                threshold_t2,
                bound_t1: raw_t1.map(|p| p.min(1.0)),
                bound_t2: raw_t2.map(|p| p.min(1.0)),
                raw_t1,
                raw_t2,
            })
        })
        .collect()
}

/// One row of the `entropy` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub method: EntropyMethod,
    pub constant: f64,
    /// `None` when `H` is outside the method's range.
    pub bound: Option<f64>,
}

pub fn entropy_table(hurst: f64, horizon: f64) -> Result<Vec<EntropyRow>, BoundsError> {
    check_hurst_horizon(hurst, horizon)?;
    EntropyMethod::ALL
        .iter()
        .map(|&method| {
            let bound = if method.valid_hurst().contains(hurst) {
                Some(fbm_sup_bound(hurst, horizon, method)?.value)
            } else {
                None
            };
            Ok(EntropyRow {
                method,
                constant: entropy_constant(method)?,
                bound,
            })
        })
        .collect()
}
