//! The oscillatory integral `J(ᾱ) = ∫₀¹∫₀¹ e^{2πi F(x,y)} dx dy`.
//!
//! The unit square is cut into panels on which the phase `F` moves by at
//! most [`QuadConfig::cycles_per_panel`] cycles, using the bounds
//! `|∂F/∂x| ≤ Σ i|α_ij|` and `|∂F/∂y| ≤ Σ j|α_ij|`. Each panel is integrated
//! with a 12-point Gauss–Legendre rule and the per-panel difference against
//! the 8-point rule is summed into the error estimate. Panels are halved
//! uniformly until the estimate meets the tolerance or the panel cap is hit.
//!
//! When `F` is affine in one variable the inner integral has the closed form
//! `∫₀¹ e^{2πi(a + b t)} dt = e^{iπ(2a+b)} sin(πb)/(πb)`, and only the outer
//! variable is discretised.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::PolySpec;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the three-term Legendre recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[order - 1 - i] = z;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[0, 1]`.
    pub fn unit(&self) -> (Vec<f64>, Vec<f64>) {
        let nodes = self.nodes.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let weights = self.weights.iter().map(|w| 0.5 * w).collect();
        (nodes, weights)
    }

    /// `∫_a^b f` with this rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }
}

fn legendre(order: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = order as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

struct UnitRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn rules() -> &'static (UnitRule, UnitRule) {
    static RULES: OnceLock<(UnitRule, UnitRule)> = OnceLock::new();
    RULES.get_or_init(|| {
        let make = |order| {
            let (nodes, weights) = GaussLegendre::new(order).unit();
            UnitRule { nodes, weights }
        };
        (make(HIGH_ORDER), make(LOW_ORDER))
    })
}

const HIGH_ORDER: usize = 12;
const LOW_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Upper bound on the phase change across one panel, in cycles.
    pub cycles_per_panel: f64,
    /// Cap on the total number of panels (product over both axes in the
    /// tensor-product path).
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            cycles_per_panel: 0.5,
            max_panels: 1 << 22,
        }
    }
}

/// Which variable, if any, is integrated in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadPath {
    /// `F` affine in `y`; closed-form inner integral over `y`.
    InnerY,
    /// `F` affine in `x`; closed-form inner integral over `x`.
    InnerX,
    /// Full tensor-product rule.
    Tensor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    /// `[re, im]`.
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub n_evals: u64,
    /// Panels along each axis at the accepted refinement level.
    pub panels: (usize, usize),
    pub path: QuadPath,
}

/// `J(ᾱ)` with the default configuration.
pub fn osc_integral(f: &PolySpec, tol: f64) -> Result<QuadResult> {
    osc_integral_with(f, tol, &QuadConfig::default())
}

pub fn osc_integral_with(f: &PolySpec, tol: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let path = if f.m() == 1 && (f.n() > 1 || outer_variation(f, QuadPath::InnerY) <= outer_variation(f, QuadPath::InnerX)) {
        QuadPath::InnerY
    } else if f.n() == 1 {
        QuadPath::InnerX
    } else {
        QuadPath::Tensor
    };
    osc_integral_path(f, tol, cfg, path)
}

/// `J(ᾱ)` along an explicitly chosen path. Closed-form paths require `F` to
/// be affine in the inner variable.
pub fn osc_integral_path(
    f: &PolySpec,
    tol: f64,
    cfg: &QuadConfig,
    path: QuadPath,
) -> Result<QuadResult> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if cfg.cycles_per_panel.is_nan() || cfg.cycles_per_panel <= 0.0 || cfg.max_panels == 0 {
        return Err(Error::invalid("quadrature configuration must be positive"));
    }
    match path {
        QuadPath::InnerY if f.m() != 1 => {
            return Err(Error::invalid("closed-form y integral needs m = 1"))
        }
        QuadPath::InnerX if f.n() != 1 => {
            return Err(Error::invalid("closed-form x integral needs n = 1"))
        }
        _ => {}
    }
    if f.coeffs().as_slice().iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("coefficients must be finite"));
    }
    if f.coeffs().as_slice().iter().all(|&c| c == 0.0) {
        return Ok(QuadResult {
            value: Complex64::new(1.0, 0.0),
            abs_error_estimate: 0.0,
            n_evals: 1,
            panels: (1, 1),
            path,
        });
    }

    let (vx, vy) = variations(f);
    let base = |v: f64| ((v / cfg.cycles_per_panel).ceil() as usize).max(1);
    let (mut px, mut py) = match path {
        QuadPath::InnerY => (base(vx), 1),
        QuadPath::InnerX => (1, base(vy)),
        QuadPath::Tensor => (base(vx), base(vy)),
    };
    let grid = f.dense_grid();
    let mut n_evals = 0u64;
    let mut best_err = f64::INFINITY;
    loop {
        let total = px.saturating_mul(py);
        if total > cfg.max_panels {
            return Err(Error::BudgetExceeded {
                needed: total,
                cap: cfg.max_panels,
            });
        }
        let (value, err, evals) = match path {
            QuadPath::InnerY => reduced(&grid, f.n(), f.m(), px, Axis::X),
            QuadPath::InnerX => reduced(&grid, f.n(), f.m(), py, Axis::Y),
            QuadPath::Tensor => tensor(&grid, f.n(), f.m(), px, py),
        };
        n_evals += evals;
        best_err = best_err.min(err);
        if best_err <= tol {
            return Ok(QuadResult {
                value,
                abs_error_estimate: best_err,
                n_evals,
                panels: (px, py),
                path,
            });
        }
        match path {
            QuadPath::InnerY => px *= 2,
            QuadPath::InnerX => py *= 2,
            QuadPath::Tensor => {
                px *= 2;
                py *= 2;
            }
        }
    }
}

/// `(Σ i|α_ij|, Σ j|α_ij|)`: bounds on `|∂F/∂x|`, `|∂F/∂y|` over the unit square.
pub fn variations(f: &PolySpec) -> (f64, f64) {
    f.basis()
        .iter()
        .zip(f.coeffs().as_slice())
        .fold((0.0, 0.0), |(vx, vy), (mono, c)| {
            (vx + mono.i as f64 * c.abs(), vy + mono.j as f64 * c.abs())
        })
}

fn outer_variation(f: &PolySpec, path: QuadPath) -> f64 {
    let (vx, vy) = variations(f);
    match path {
        QuadPath::InnerY => vx,
        QuadPath::InnerX => vy,
        QuadPath::Tensor => vx + vy,
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// `∫₀¹ e^{2πi(a + b t)} dt`.
#[inline]
pub fn linear_phase_integral(a: f64, b: f64) -> Complex64 {
    let z = PI * b;
    let sinc = if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    };
    let (s, c) = (PI * (2.0 * a + b)).sin_cos();
    Complex64::new(c * sinc, s * sinc)
}

/// One-dimensional rule over the outer variable; the integrand at outer
/// coordinate `t` is `∫₀¹ e^{2πi(a(t) + b(t) s)} ds` in closed form.
fn reduced(grid: &[f64], n: u32, m: u32, panels: usize, outer: Axis) -> (Complex64, f64, u64) {
    let w = (m + 1) as usize;
    // a(t) and b(t) as polynomials in the outer variable.
    let (a, b): (Vec<f64>, Vec<f64>) = match outer {
        Axis::X => (0..=n as usize).map(|i| (grid[i * w], grid[i * w + 1])).unzip(),
        Axis::Y => (0..w).map(|j| (grid[j], grid[w + j])).unzip(),
    };
    let horner = |c: &[f64], t: f64| c.iter().rev().fold(0.0, |acc, v| acc * t + v);
    let integrand = |t: f64| linear_phase_integral(horner(&a, t), horner(&b, t));

    let (hi, lo) = rules();
    let h = 1.0 / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for p in 0..panels {
        let x0 = p as f64 * h;
        let mut q_hi = Complex64::new(0.0, 0.0);
        for (t, wt) in hi.nodes.iter().zip(&hi.weights) {
            q_hi += integrand(x0 + h * t) * *wt;
        }
        let mut q_lo = Complex64::new(0.0, 0.0);
        for (t, wt) in lo.nodes.iter().zip(&lo.weights) {
            q_lo += integrand(x0 + h * t) * *wt;
        }
        total += q_hi * h;
        err += (q_hi - q_lo).norm() * h;
    }
    (total, err, (panels * (HIGH_ORDER + LOW_ORDER)) as u64)
}

fn tensor(grid: &[f64], n: u32, m: u32, px: usize, py: usize) -> (Complex64, f64, u64) {
    let w = (m + 1) as usize;
    let (hi, lo) = rules();
    let (hx, hy) = (1.0 / px as f64, 1.0 / py as f64);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;

    // c_j(x) for every x node of a panel, for both rules.
    let mut cy_hi = vec![0.0; HIGH_ORDER * w];
    let mut cy_lo = vec![0.0; LOW_ORDER * w];
    let fill = |out: &mut [f64], nodes: &[f64], x0: f64| {
        for (a, t) in nodes.iter().enumerate() {
            let x = x0 + hx * t;
            for j in 0..w {
                let mut acc = 0.0;
                for i in (0..=n as usize).rev() {
                    acc = acc * x + grid[i * w + j];
                }
                out[a * w + j] = acc;
            }
        }
    };
    let phase = |c: &[f64], y: f64| {
        let f = c.iter().rev().fold(0.0, |acc, v| acc * y + v);
        let (s, co) = (2.0 * PI * f).sin_cos();
        Complex64::new(co, s)
    };
    let rule_sum = |coeffs: &[f64], rule: &UnitRule, y0: f64| {
        let mut q = Complex64::new(0.0, 0.0);
        for (a, wx) in rule.weights.iter().enumerate() {
            let c = &coeffs[a * w..(a + 1) * w];
            let mut row = Complex64::new(0.0, 0.0);
            for (t, wy) in rule.nodes.iter().zip(&rule.weights) {
                row += phase(c, y0 + hy * t) * *wy;
            }
            q += row * *wx;
        }
        q
    };
    for ix in 0..px {
        let x0 = ix as f64 * hx;
        fill(&mut cy_hi, &hi.nodes, x0);
        fill(&mut cy_lo, &lo.nodes, x0);
        for iy in 0..py {
            let y0 = iy as f64 * hy;
            let q_hi = rule_sum(&cy_hi, hi, y0);
            let q_lo = rule_sum(&cy_lo, lo, y0);
            total += q_hi * (hx * hy);
            err += (q_hi - q_lo).norm() * hx * hy;
        }
    }
    let evals = (px * py * (HIGH_ORDER * HIGH_ORDER + LOW_ORDER * LOW_ORDER)) as u64;
    (total, err, evals)
}
