//! Tail bounds for the first time a fractional Ornstein-Uhlenbeck process
//! crosses a level, and a Monte Carlo harness that checks them.
//!
//! The process is `dX_t = -X_t dt + eps dB^H_t`, `X_0 = 0`, driven by a
//! fractional Brownian motion with Hurst exponent `H in (0, 1]`. Because
//! `{tau_u < T} = {sup_{[0,T]} X > u}`, every bound here is a bound on the
//! tail of the running supremum.
//!
//! * [`bounds`]: closed-form coefficients, tail bounds, expected-supremum and
//!   variance bounds, entropy constants, moment bounds.
//! * [`quadrature`]: the 1-D and triangle integrators those formulas need.
//! * [`sim`]: exact fBm samplers (Cholesky, circulant embedding) and the fOU
//!   path construction.
//! * [`experiments`]: Monte Carlo estimators and violation-checked reports.
//! * [`cli`]: the `fou-bounds` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod experiments;
pub mod quadrature;
pub mod sim;

pub use bounds::{BoundCoefficients, ModelConfig, Regime, SupremumBound};
pub use experiments::{ExperimentReport, ExperimentSpec, MCEstimate};
pub use sim::{GaussianPath, SamplerConfig, SamplingMethod, TimeGrid};
