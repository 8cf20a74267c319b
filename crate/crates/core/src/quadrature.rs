//! Deterministic 1-D and triangle quadrature.
//!
//! Two schemes are provided. [`Scheme::AdaptiveSimpson`] is plain adaptive
//! Simpson with interval bisection and Richardson correction; it evaluates the
//! integrand at both endpoints. [`Scheme::GradedMeshSimpson`] first splits the
//! interval into geometrically shrinking cells toward *both* endpoints and runs
//! adaptive Simpson on each cell, so that integrands like `u^{2H}` (H < 1/2) or
//! `sqrt(log(1/x))` whose value or derivative blows up at an endpoint converge
//! quickly. The two innermost cells are handled with an open two-point
//! Gauss-Legendre rule, so the endpoints themselves are never evaluated.

use std::cell::Cell;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ratio between consecutive graded cells.
const GRADING_RATIO: f64 = 0.5;
/// Width of the innermost graded cell relative to the absolute tolerance.
const INNER_CELL_FRACTION: f64 = 1e-2;
const MAX_GRADED_CELLS: usize = 1000;
const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    AdaptiveSimpson,
    GradedMeshSimpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tolerance: f64,
    pub max_subdivisions: usize,
    pub scheme: Scheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tolerance: 1e-10,
            max_subdivisions: 1_000_000,
            scheme: Scheme::GradedMeshSimpson,
        }
    }
}

impl QuadratureSpec {
    pub fn new(
        abs_tolerance: f64,
        max_subdivisions: usize,
        scheme: Scheme,
    ) -> Result<Self, QuadratureError> {
        let spec = Self {
            abs_tolerance,
            max_subdivisions,
            scheme,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn with_tolerance(self, abs_tolerance: f64) -> Self {
        Self {
            abs_tolerance,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tolerance > 0.0 && self.abs_tolerance.is_finite()) {
            return Err(QuadratureError::InvalidSpec(format!(
                "abs_tolerance must be positive and finite, got {}",
                self.abs_tolerance
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidSpec(
                "max_subdivisions must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("invalid integration interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error(
        "subdivision budget of {budget} exhausted; best estimate {estimate:e} with error bound {error_bound:e}"
    )]
    BudgetExhausted {
        budget: usize,
        estimate: f64,
        error_bound: f64,
    },
}

/// A quadrature result together with the error bound the scheme achieved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_bound: f64,
}

/// Integrates `f` over `[lo, hi]`.
///
/// Returns exactly `0.0` when `lo == hi`. With the graded scheme `f` is never
/// evaluated at `lo` or `hi`, so it may be infinite there.
pub fn integrate_1d<F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    integrate_1d_detailed(f, lo, hi, spec).map(|r| r.value)
}

/// Like [`integrate_1d`] but also reports the achieved error bound.
pub fn integrate_1d_detailed<F>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(QuadratureError::InvalidInterval { lo, hi });
    }
    if lo == hi {
        return Ok(Integral {
            value: 0.0,
            error_bound: 0.0,
        });
    }
    let mut budget = Budget::new(spec.max_subdivisions);
    let result = match spec.scheme {
        Scheme::AdaptiveSimpson => adaptive_simpson(&f, lo, hi, spec.abs_tolerance, &mut budget)?,
        Scheme::GradedMeshSimpson => graded_simpson(&f, lo, hi, spec.abs_tolerance, &mut budget)?,
    };
    budget.finish(result)
}

/// Integrates `f(u, s)` over the triangle `0 <= s <= u <= t`.
///
/// Evaluated as an iterated integral: the inner `s`-integral on `[0, u]` and
/// the outer `u`-integral on `[0, t]` both use the graded Simpson mesh, which
/// refines toward the corners where `u^{2H}`, `s^{2H}` and `(u - s)^{2H}` lose
/// smoothness. The returned error bound combines the outer bound with `t`
/// times the worst inner bound.
pub fn integrate_2d_triangle<F>(
    f: F,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError>
where
    F: Fn(f64, f64) -> f64,
{
    spec.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(QuadratureError::InvalidInterval { lo: 0.0, hi: t });
    }
    if t == 0.0 {
        return Ok(Integral {
            value: 0.0,
            error_bound: 0.0,
        });
    }
    let outer_tol = spec.abs_tolerance / 2.0;
    let inner_spec = QuadratureSpec {
        abs_tolerance: spec.abs_tolerance / (2.0 * t.max(1.0)),
        scheme: Scheme::GradedMeshSimpson,
        ..*spec
    };
    let outer_spec = QuadratureSpec {
        abs_tolerance: outer_tol,
        scheme: Scheme::GradedMeshSimpson,
        ..*spec
    };

    let inner_error: Cell<Option<QuadratureError>> = Cell::new(None);
    let worst_inner = Cell::new(0.0_f64);
    let outer = integrate_1d_detailed(
        |u| {
            match integrate_1d_detailed(|s| f(u, s), 0.0, u, &inner_spec) {
                Ok(r) => {
                    worst_inner.set(worst_inner.get().max(r.error_bound));
                    r.value
                }
                Err(e) => {
                    let first = inner_error.take().unwrap_or(e);
                    inner_error.set(Some(first));
                    0.0
                }
            }
        },
        0.0,
        t,
        &outer_spec,
    );
    if let Some(e) = inner_error.take() {
        return Err(e);
    }
    let outer = outer?;
    Ok(Integral {
        value: outer.value,
        error_bound: outer.error_bound + t * worst_inner.get(),
    })
}

struct Budget {
    limit: usize,
    used: usize,
    exhausted: bool,
}

impl Budget {
    fn new(limit: usize) -> Self {
        Self {
            limit,
            used: 0,
            exhausted: false,
        }
    }

    fn take(&mut self) -> bool {
        if self.used >= self.limit {
            self.exhausted = true;
            false
        } else {
            self.used += 1;
            true
        }
    }

    fn finish(self, result: Integral) -> Result<Integral, QuadratureError> {
        if self.exhausted {
            Err(QuadratureError::BudgetExhausted {
                budget: self.limit,
                estimate: result.value,
                error_bound: result.error_bound,
            })
        } else {
            Ok(result)
        }
    }
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, QuadratureError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(QuadratureError::NonFinite { x })
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    budget: &mut Budget,
) -> Result<Integral, QuadratureError> {
    let fa = eval(f, a)?;
    let fb = eval(f, b)?;
    let m = 0.5 * (a + b);
    let fm = eval(f, m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, [a, m, b], [fa, fm, fb], whole, tol, 0, budget)
}

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    [a, m, b]: [f64; 3],
    [fa, fm, fb]: [f64; 3],
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut Budget,
) -> Result<Integral, QuadratureError> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(f, lm)?;
    let frm = eval(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let converged = delta.abs() <= 15.0 * tol;
    // Midpoints no longer distinct in floating point.
    let degenerate = lm <= a || rm >= b || m <= lm || m >= rm;
    if converged || degenerate || depth >= MAX_DEPTH || !budget.take() {
        if !converged && depth >= MAX_DEPTH {
            budget.exhausted = true;
        }
        return Ok(Integral {
            value: left + right + delta / 15.0,
            error_bound: delta.abs() / 15.0,
        });
    }
    let l = simpson_step(f, [a, lm, m], [fa, flm, fm], left, tol / 2.0, depth + 1, budget)?;
    let r = simpson_step(f, [m, rm, b], [fm, frm, fb], right, tol / 2.0, depth + 1, budget)?;
    Ok(Integral {
        value: l.value + r.value,
        error_bound: l.error_bound + r.error_bound,
    })
}

/// Two-point Gauss-Legendre on `[a, b]`; never touches the endpoints.
fn gauss2<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<f64, QuadratureError> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let off = half / 3.0_f64.sqrt();
    Ok(half * (eval(f, mid - off)? + eval(f, mid + off)?))
}

fn graded_simpson<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    budget: &mut Budget,
) -> Result<Integral, QuadratureError> {
    let half = 0.5 * (hi - lo);
    let inner_width = (tol * INNER_CELL_FRACTION).max(half * 1e-280).min(half);
    let cells = ((half / inner_width).log2() / -GRADING_RATIO.log2())
        .ceil()
        .clamp(0.0, MAX_GRADED_CELLS as f64) as usize;
    // Each Simpson cell gets a share of half the tolerance proportional to its
    // width; the rest covers the two Gauss end cells.
    let tol_density = 0.5 * tol / (hi - lo);

    let mut total = Integral {
        value: 0.0,
        error_bound: 0.0,
    };
    let mut add = |r: Integral| {
        total.value += r.value;
        total.error_bound += r.error_bound;
    };

    // Offsets from each endpoint: half, half*q, half*q^2, ..., half*q^cells.
    let offsets: Vec<f64> = (0..=cells)
        .map(|k| half * GRADING_RATIO.powi(k as i32))
        .collect();
    for side in [Side::Lo, Side::Hi] {
        let at = |offset: f64| match side {
            Side::Lo => lo + offset,
            Side::Hi => hi - offset,
        };
        for pair in offsets.windows(2) {
            let (a, b) = ordered(at(pair[0]), at(pair[1]));
            if b > a {
                add(adaptive_simpson(f, a, b, tol_density * (b - a), budget)?);
            }
        }
        let (a, b) = ordered(at(offsets[cells]), at(0.0));
        if b > a {
            let inner = gauss2(f, a, b)?;
            add(Integral {
                value: inner,
                error_bound: inner.abs(),
            });
        }
    }
    Ok(total)
}

#[derive(Clone, Copy)]
enum Side {
    Lo,
    Hi,
}

fn ordered(x: f64, y: f64) -> (f64, f64) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn polynomial_is_exact() {
        for scheme in [Scheme::AdaptiveSimpson, Scheme::GradedMeshSimpson] {
            let s = spec().with_scheme(scheme);
            let v = integrate_1d(|x| x * x, 0.0, 1.0, &s).unwrap();
            assert!((v - 1.0 / 3.0).abs() < 1e-12, "{scheme:?}: {v}");
        }
    }

    #[test]
    fn empty_interval_is_zero() {
        let v = integrate_1d(|_| f64::NAN, 2.0, 2.0, &spec()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn reversed_interval_is_rejected() {
        assert!(matches!(
            integrate_1d(|x| x, 1.0, 0.0, &spec()),
            Err(QuadratureError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn log_singularity_matches_half_sqrt_pi() {
        let v = integrate_1d(|x: f64| (1.0 / x).ln().sqrt(), 0.0, 1.0, &spec()).unwrap();
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn log_singularity_on_half_interval() {
        let v = integrate_1d(|x: f64| (1.0 / x).ln().sqrt(), 0.0, 0.5, &spec()).unwrap();
        assert!((v - 0.628114).abs() < 1e-6, "{v}");
    }

    #[test]
    fn plain_simpson_refuses_infinite_endpoint() {
        let s = spec().with_scheme(Scheme::AdaptiveSimpson);
        assert!(matches!(
            integrate_1d(|x: f64| (1.0 / x).ln().sqrt(), 0.0, 1.0, &s),
            Err(QuadratureError::NonFinite { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let s = QuadratureSpec::new(1e-14, 3, Scheme::AdaptiveSimpson).unwrap();
        match integrate_1d(|x: f64| x.sqrt(), 0.0, 1.0, &s) {
            Err(QuadratureError::BudgetExhausted {
                estimate,
                error_bound,
                ..
            }) => {
                assert!((estimate - 2.0 / 3.0).abs() < 0.05);
                assert!(error_bound > 0.0);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(QuadratureSpec::new(0.0, 10, Scheme::AdaptiveSimpson).is_err());
        assert!(QuadratureSpec::new(1e-8, 0, Scheme::AdaptiveSimpson).is_err());
        assert!(QuadratureSpec::new(f64::NAN, 10, Scheme::AdaptiveSimpson).is_err());
    }

    #[test]
    fn power_integrals_for_several_hurst_values() {
        for h in [0.1, 0.5, 1.0] {
            for t in [0.5, 1.0, 2.0] {
                let v = integrate_1d(|u: f64| u.powf(2.0 * h), 0.0, t, &spec()).unwrap();
                let exact = t.powf(2.0 * h + 1.0) / (2.0 * h + 1.0);
                assert!((v - exact).abs() <= 1e-10, "h={h} t={t}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn triangle_of_constant_is_its_area() {
        let r = integrate_2d_triangle(|_, _| 1.0, 2.0, &spec()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn triangle_of_separable_exponential() {
        let r = integrate_2d_triangle(|u, s| (u + s).exp(), 1.0, &spec()).unwrap();
        let exact = (E - 1.0).powi(2) / 2.0;
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
        assert!(r.error_bound < 1e-9);
    }

    #[test]
    fn triangle_at_zero_is_zero() {
        let r = integrate_2d_triangle(|_, _| 1.0, 0.0, &spec()).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
