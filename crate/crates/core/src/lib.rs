//! Numerical laboratory for the two-dimensional Tarry singular integral
//!
//! ```text
//! θ_k = ∫_{ℝ^N} | ∫₀¹∫₀¹ e^{2πi F(x,y)} dx dy |^{2k} dα
//! ```
//!
//! where `F(x,y) = Σ α_ij x^i y^j` ranges over bivariate polynomials of
//! degree at most `n` in `x` and `m` in `y` without constant term. The crate
//! evaluates the inner oscillatory integral, estimates truncated versions of
//! `θ_k` by coefficient-space Monte Carlo and by a thin-shell measure on the
//! solution variety of the associated power-sum system, and checks the
//! algebraic identities that link the two routes.

pub mod error;
pub mod lowerbound;
pub mod output;
pub mod poly;
pub mod quad;
pub mod rng;
pub mod theta;
pub mod variety;

pub use error::{Error, Result};
pub use poly::{CoeffVector, MonomialIndex, PolySpec};
pub use quad::{osc_integral, QuadConfig, QuadResult};
pub use theta::{GrowthReport, ThetaEstimate};
pub use variety::{PointConfig, SurfaceMeasureEstimate};


