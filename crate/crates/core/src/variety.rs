//! The power-sum system
//!
//! ```text
//! Σ_{s≤k} x_s^i y_s^j − Σ_{s>k} x_s^i y_s^j = 0,   0 ≤ i ≤ n, 0 ≤ j ≤ m, i + j > 0
//! ```
//!
//! on `2k` planar points, its Jacobi matrix `A₀` and Gram determinant
//! `G₀ = det(A₀ A₀ᵀ)`, and Monte Carlo estimators for the thin-shell volume
//! `(2h)^{-N} vol{ |f(x̄) − ū| ≤ h }`, which tends to `∫_{f = ū} ds/√G₀` as
//! `h → 0`.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{monomials, CoeffVector, MonomialIndex};
use crate::rng::{stream_id, CounterRng};

/// Gram determinants below this fraction of the Hadamard bound `Π ‖row‖²`
/// are reported as zero.
pub const GRAM_ZERO_RATIO: f64 = 1e-12;

const TAG_ELLIPSOID: u32 = 0x454c;
const TAG_SHELL: u32 = 0x5348;
const BLOCK: u64 = 1 << 14;

/// `2k` points of the plane; the first `k` carry sign `+1`, the rest `-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointFile", into = "PointFile")]
pub struct PointConfig {
    k: usize,
    points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub k: usize,
    pub points: Vec<[f64; 2]>,
}

impl TryFrom<PointFile> for PointConfig {
    type Error = Error;
    fn try_from(file: PointFile) -> Result<Self> {
        PointConfig::new(file.k, file.points.into_iter().map(|[x, y]| (x, y)).collect())
    }
}

impl From<PointConfig> for PointFile {
    fn from(cfg: PointConfig) -> Self {
        PointFile {
            k: cfg.k,
            points: cfg.points.into_iter().map(|(x, y)| [x, y]).collect(),
        }
    }
}

impl PointConfig {
    pub fn new(k: usize, points: Vec<(f64, f64)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if points.len() != 2 * k {
            return Err(Error::invalid(format!(
                "expected {} points for k = {k}, got {}",
                2 * k,
                points.len()
            )));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(PointConfig { k, points })
    }

    /// Points `s` and `k + s` coincide, so every equation holds trivially.
    pub fn mirror(first_half: &[(f64, f64)]) -> Result<Self> {
        let mut points = first_half.to_vec();
        points.extend_from_slice(first_half);
        PointConfig::new(first_half.len(), points)
    }

    /// Uniform in the `4k`-cube.
    pub fn random(k: usize, rng: &mut impl Rng) -> Result<Self> {
        let points = (0..2 * k).map(|_| (rng.random(), rng.random())).collect();
        PointConfig::new(k, points)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// `ε_s`: `+1` for the first half, `-1` for the second (0-based `s`).
    pub fn sign(&self, s: usize) -> f64 {
        if s < self.k {
            1.0
        } else {
            -1.0
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        PointConfig {
            k: self.k,
            points: self.points.iter().map(|&(x, y)| (lambda * x, lambda * y)).collect(),
        }
    }

    pub fn in_unit_cube(&self) -> bool {
        self.points
            .iter()
            .all(|&(x, y)| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y))
    }
}

/// Component `(i,j)` is `Σ_s ε_s x_s^i y_s^j`, in graded order.
pub fn residual(config: &PointConfig, n: u32, m: u32) -> Result<CoeffVector> {
    let basis = monomials(n, m)?;
    let out = basis
        .iter()
        .map(|mono| {
            config
                .points
                .iter()
                .enumerate()
                .map(|(s, &(x, y))| config.sign(s) * x.powi(mono.i as i32) * y.powi(mono.j as i32))
                .sum()
        })
        .collect();
    Ok(CoeffVector::from_vec(out))
}

/// Shift every point by `(a, b)`. Solutions stay solutions.
pub fn translate_solution(config: &PointConfig, a: f64, b: f64) -> PointConfig {
    PointConfig {
        k: config.k,
        points: config.points.iter().map(|&(x, y)| (x + a, y + b)).collect(),
    }
}

/// `N × 4k` Jacobi matrix of the system. Row `(i,j)`; columns `2s`, `2s+1`
/// hold `ε_s ∂/∂x_s` and `ε_s ∂/∂y_s` of `x_s^i y_s^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiA0 {
    pub basis: Vec<MonomialIndex>,
    pub matrix: DMatrix<f64>,
}

fn monomial_partials(mono: MonomialIndex, x: f64, y: f64) -> (f64, f64) {
    let (i, j) = (mono.i as i32, mono.j as i32);
    let dx = if i == 0 { 0.0 } else { i as f64 * x.powi(i - 1) * y.powi(j) };
    let dy = if j == 0 { 0.0 } else { j as f64 * x.powi(i) * y.powi(j - 1) };
    (dx, dy)
}

fn jacobian(basis: &[MonomialIndex], points: &[(f64, f64)], signs: impl Fn(usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(basis.len(), 2 * points.len(), |r, c| {
        let s = c / 2;
        let (x, y) = points[s];
        let (dx, dy) = monomial_partials(basis[r], x, y);
        signs(s) * if c % 2 == 0 { dx } else { dy }
    })
}

pub fn jacobi_a0(config: &PointConfig, n: u32, m: u32) -> Result<JacobiA0> {
    let basis = monomials(n, m)?;
    let matrix = jacobian(&basis, &config.points, |s| config.sign(s));
    Ok(JacobiA0 { basis, matrix })
}

/// Gram determinant `det(A Aᵀ)` of the rows of `a`, together with the
/// Hadamard bound `Π ‖row‖²` used for the zero threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramValue {
    pub g0: f64,
    pub hadamard_bound: f64,
}

impl GramValue {
    pub fn is_degenerate(&self) -> bool {
        self.g0 == 0.0
    }
}

/// `det(A Aᵀ)` from a Householder QR of `Aᵀ`: the product of squared
/// diagonal entries of `R`. More rows than columns gives zero.
pub fn gram_of_rows(a: &DMatrix<f64>) -> GramValue {
    let rows = a.nrows();
    let hadamard_bound: f64 = a.row_iter().map(|r| r.norm_squared()).product();
    if rows > a.ncols() {
        return GramValue {
            g0: 0.0,
            hadamard_bound,
        };
    }
    let qr = a.transpose().qr();
    let r = qr.r();
    let g: f64 = (0..rows).map(|i| r[(i, i)] * r[(i, i)]).product();
    let g0 = if g < GRAM_ZERO_RATIO * hadamard_bound || hadamard_bound == 0.0 {
        0.0
    } else {
        g
    };
    GramValue { g0, hadamard_bound }
}

pub fn gram_g0(config: &PointConfig, n: u32, m: u32) -> Result<GramValue> {
    Ok(gram_of_rows(&jacobi_a0(config, n, m)?.matrix))
}

/// `(4k d²)^N` with `d = n + m`.
pub fn gram_upper_bound(n: u32, m: u32, k: usize) -> Result<f64> {
    let big_n = monomials(n, m)?.len() as i32;
    let d = (n + m) as f64;
    Ok((4.0 * k as f64 * d * d).powi(big_n))
}

/// Gram determinants of the full system and of the two `k`-point systems
/// `Σ_{s≤k} x_s^i y_s^j` and `Σ_{s>k} x_s^i y_s^j` taken separately.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramSplit {
    pub full: GramValue,
    pub first: GramValue,
    pub second: GramValue,
}

impl GramSplit {
    pub fn halves_nondegenerate(&self) -> bool {
        !self.first.is_degenerate() && !self.second.is_degenerate()
    }

    /// `G₀ ≥ G + G′` up to a relative rounding allowance.
    pub fn superadditive(&self) -> bool {
        let sum = self.first.g0 + self.second.g0;
        self.full.g0 >= sum * (1.0 - 1e-9)
    }
}

pub fn gram_split(config: &PointConfig, n: u32, m: u32) -> Result<GramSplit> {
    let basis = monomials(n, m)?;
    let k = config.k;
    let full = gram_of_rows(&jacobian(&basis, &config.points, |s| config.sign(s)));
    let first = gram_of_rows(&jacobian(&basis, &config.points[..k], |_| 1.0));
    let second = gram_of_rows(&jacobian(&basis, &config.points[k..], |_| 1.0));
    Ok(GramSplit { full, first, second })
}

/// `π^{N/2} / Γ(N/2 + 1)`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2} · 2π/d.
    let mut v = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut d = if dim.is_multiple_of(2) { 2 } else { 3 };
    while d <= dim {
        v *= 2.0 * std::f64::consts::PI / d as f64;
        d += 2;
    }
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidCheck {
    /// Monte Carlo volume of `{ᾱ : ‖Aᵀ ᾱ‖ ≤ 1}`.
    pub mc_volume: f64,
    pub std_error: f64,
    /// `π^{N/2}/Γ(N/2+1) · G^{-1/2}`.
    pub closed_form: f64,
    pub g0: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl EllipsoidCheck {
    /// `|mc − closed| / std_error`.
    pub fn z_score(&self) -> f64 {
        (self.mc_volume - self.closed_form).abs() / self.std_error
    }

    /// `mc · Γ(N/2+1)/π^{N/2} · √G`, which should be 1.
    pub fn normalized(&self, dim: usize) -> f64 {
        self.mc_volume / unit_ball_volume(dim) * self.g0.sqrt()
    }
}

/// Estimate the volume of `{ᾱ ∈ ℝ^N : ‖Aᵀ ᾱ‖₂ ≤ 1}` by uniform sampling over
/// its bounding box `|α_r| ≤ √((A Aᵀ)^{-1})_rr`.
pub fn ellipsoid_volume_mc(a: &DMatrix<f64>, n_samples: u64, seed: u64) -> Result<EllipsoidCheck> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    let gram = gram_of_rows(a);
    if gram.g0 <= 0.0 {
        return Err(Error::Singular(gram.g0));
    }
    let dim = a.nrows();
    let metric = a * a.transpose();
    let inv = metric
        .clone()
        .try_inverse()
        .ok_or(Error::Singular(gram.g0))?;
    let half: Vec<f64> = (0..dim).map(|r| inv[(r, r)].sqrt()).collect();
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();

    let rng = CounterRng::new(seed);
    let blocks = n_samples.div_ceil(BLOCK);
    let hits: Vec<u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = rng.at(stream_id(TAG_ELLIPSOID, 0), b);
            let count = BLOCK.min(n_samples - b * BLOCK);
            let mut alpha = vec![0.0; dim];
            let mut hits = 0;
            for _ in 0..count {
                for (v, h) in alpha.iter_mut().zip(&half) {
                    *v = h * (2.0 * r.random::<f64>() - 1.0);
                }
                let mut q = 0.0;
                for i in 0..dim {
                    let mut row = 0.0;
                    for j in 0..dim {
                        row += metric[(i, j)] * alpha[j];
                    }
                    q += alpha[i] * row;
                }
                if q <= 1.0 {
                    hits += 1;
                }
            }
            hits
        })
        .collect();
    let hits: u64 = hits.iter().sum();
    let p = hits as f64 / n_samples as f64;
    Ok(EllipsoidCheck {
        mc_volume: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / n_samples as f64).sqrt(),
        closed_form: unit_ball_volume(dim) / gram.g0.sqrt(),
        g0: gram.g0,
        n_samples,
        seed,
    })
}

pub fn ellipsoid_volume_check(
    config: &PointConfig,
    n: u32,
    m: u32,
    n_samples: u64,
    seed: u64,
) -> Result<EllipsoidCheck> {
    ellipsoid_volume_mc(&jacobi_a0(config, n, m)?.matrix, n_samples, seed)
}

/// Per-sample weight in the thin-shell estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellWeight {
    /// Plain volume; estimates `∫ ds/√G₀`.
    None,
    /// Accepted samples weighted by `√G₀`; estimates the surface area `∫ ds`.
    SqrtG0,
}

impl std::str::FromStr for ShellWeight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ShellWeight::None),
            "sqrtG0" | "sqrtg0" | "sqrt_g0" => Ok(ShellWeight::SqrtG0),
            other => Err(Error::invalid(format!("unknown weight '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeasureEstimate {
    pub n: u32,
    pub m: u32,
    pub k: usize,
    pub h: f64,
    pub target: CoeffVector,
    pub weight: ShellWeight,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub n_accepted: u64,
    /// `std_error / value`; `None` when nothing was accepted.
    pub relative_error: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Copy, Default)]
struct ShellSums {
    accepted: u64,
    sum: f64,
    sum_sq: f64,
}

/// Monte Carlo estimate of `(2h)^{-N} vol{x̄ ∈ [0,1]^{4k} : |f_ij(x̄) − u_ij| ≤ h}`
/// for the signed system, optionally weighting accepted samples by `√G₀`.
#[allow(clippy::too_many_arguments)]
pub fn thin_shell_measure(
    n: u32,
    m: u32,
    k: usize,
    target: &CoeffVector,
    h: f64,
    n_samples: u64,
    seed: u64,
    weight: ShellWeight,
) -> Result<SurfaceMeasureEstimate> {
    let basis = monomials(n, m)?;
    let dim = basis.len();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::invalid(format!("h must be positive, got {h}")));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    if target.len() != dim {
        return Err(Error::invalid(format!(
            "target has {} components, expected {dim}",
            target.len()
        )));
    }

    let rng = CounterRng::new(seed);
    let blocks = n_samples.div_ceil(BLOCK);
    let partials: Vec<ShellSums> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK.min(n_samples - b * BLOCK);
            shell_block(&basis, n, m, k, target, h, weight, rng.at(stream_id(TAG_SHELL, 0), b), count)
        })
        .collect();
    let mut total = ShellSums::default();
    for p in &partials {
        total.accepted += p.accepted;
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
    }

    let scale = (2.0 * h).powi(-(dim as i32));
    let nf = n_samples as f64;
    let mean = total.sum / nf;
    let var = if n_samples > 1 {
        ((total.sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let value = scale * mean;
    let std_error = scale * (var / nf).sqrt();
    Ok(SurfaceMeasureEstimate {
        n,
        m,
        k,
        h,
        target: target.clone(),
        weight,
        value,
        std_error,
        n_samples,
        n_accepted: total.accepted,
        relative_error: (total.accepted > 0 && value > 0.0).then(|| std_error / value),
        seed,
    })
}

#[allow(clippy::too_many_arguments)]
fn shell_block(
    basis: &[MonomialIndex],
    n: u32,
    m: u32,
    k: usize,
    target: &CoeffVector,
    h: f64,
    weight: ShellWeight,
    mut r: impl Rng,
    count: u64,
) -> ShellSums {
    let npts = 2 * k;
    let (nu, mu) = (n as usize, m as usize);
    let mut xs = vec![0.0; npts];
    let mut ys = vec![0.0; npts];
    let mut xpow = vec![0.0; npts * (nu + 1)];
    let mut ypow = vec![0.0; npts * (mu + 1)];
    // Pure-x equations (i, 0) screen samples before any y is drawn.
    let x_only: Vec<(usize, usize)> = basis
        .iter()
        .enumerate()
        .filter(|(_, b)| b.j == 0)
        .map(|(p, b)| (p, b.i as usize))
        .collect();
    let mut sums = ShellSums::default();
    'sample: for _ in 0..count {
        for x in xs.iter_mut() {
            *x = r.random();
        }
        for s in 0..npts {
            let row = &mut xpow[s * (nu + 1)..(s + 1) * (nu + 1)];
            row[0] = 1.0;
            for i in 1..=nu {
                row[i] = row[i - 1] * xs[s];
            }
        }
        for &(p, i) in &x_only {
            let mut acc = 0.0;
            for s in 0..npts {
                let v = xpow[s * (nu + 1) + i];
                acc += if s < k { v } else { -v };
            }
            if (acc - target[p]).abs() > h {
                for y in ys.iter_mut() {
                    *y = r.random();
                }
                continue 'sample;
            }
        }
        for y in ys.iter_mut() {
            *y = r.random();
        }
        for s in 0..npts {
            let row = &mut ypow[s * (mu + 1)..(s + 1) * (mu + 1)];
            row[0] = 1.0;
            for j in 1..=mu {
                row[j] = row[j - 1] * ys[s];
            }
        }
        for (p, mono) in basis.iter().enumerate() {
            if mono.j == 0 {
                continue;
            }
            let (i, j) = (mono.i as usize, mono.j as usize);
            let mut acc = 0.0;
            for s in 0..npts {
                let v = xpow[s * (nu + 1) + i] * ypow[s * (mu + 1) + j];
                acc += if s < k { v } else { -v };
            }
            if (acc - target[p]).abs() > h {
                continue 'sample;
            }
        }
        sums.accepted += 1;
        let w = match weight {
            ShellWeight::None => 1.0,
            ShellWeight::SqrtG0 => {
                let points: Vec<_> = xs.iter().copied().zip(ys.iter().copied()).collect();
                let a = jacobian(basis, &points, |s| if s < k { 1.0 } else { -1.0 });
                gram_of_rows(&a).g0.sqrt()
            }
        };
        sums.sum += w;
        sums.sum_sq += w * w;
    }
    sums
}

/// Thin-shell estimate at `ū = 0` of the doubled system, which approximates
/// `∫_Π ds/√G₀` and, through the Plancherel identity, the full `θ_k`.
/// Requires `2k ≥ N`.
pub fn theta_via_thin_shell(
    n: u32,
    m: u32,
    k: usize,
    h: f64,
    n_samples: u64,
    seed: u64,
) -> Result<SurfaceMeasureEstimate> {
    let dim = monomials(n, m)?.len();
    if 2 * k < dim {
        return Err(Error::HypothesisViolation(format!(
            "thin-shell representation needs 2k >= N, got 2k = {} < N = {dim}",
            2 * k
        )));
    }
    thin_shell_measure(n, m, k, &CoeffVector::zeros(dim), h, n_samples, seed, ShellWeight::None)
}

/// Rows `(1,0,1,0)`, `(0,1,0,1)`, `(y,x,v,u)`, `(2x,0,2u,0)`: the Jacobian of
/// `(x+u, y+v, xy+uv, x²+u²)` with respect to `(x, y, u, v)`.
pub fn case21_matrix(x: f64, y: f64, u: f64, v: f64) -> [[f64; 4]; 4] {
    [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [y, x, v, u],
        [2.0 * x, 0.0, 2.0 * u, 0.0],
    ]
}

/// `det case21_matrix(x, y, u, v) = −2(u − x)²`.
pub fn jacobian_d_case21(x: f64, _y: f64, u: f64, _v: f64) -> f64 {
    let d = u - x;
    -2.0 * d * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cofactor_det(a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        if n == 1 {
            return a[0][0];
        }
        (0..n)
            .map(|c| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][c] * cofactor_det(&minor)
            })
            .sum()
    }

    /// `Σ` of squared maximal minors of the columns of `a` (Cauchy–Binet).
    fn cauchy_binet_gram(a: &DMatrix<f64>) -> f64 {
        fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for c in start..n {
                cur.push(c);
                subsets(n, k, c + 1, cur, out);
                cur.pop();
            }
        }
        let mut all = Vec::new();
        subsets(a.ncols(), a.nrows(), 0, &mut Vec::new(), &mut all);
        all.iter()
            .map(|cols| {
                let sub: Vec<Vec<f64>> = (0..a.nrows()).map(|r| cols.iter().map(|&c| a[(r, c)]).collect()).collect();
                cofactor_det(&sub).powi(2)
            })
            .sum()
    }

    #[test]
    fn residual_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..4 {
            let half: Vec<_> = (0..k).map(|_| (rng.random(), rng.random())).collect();
            let cfg = PointConfig::mirror(&half).unwrap();
            assert!(residual(&cfg, 3, 2).unwrap().max_abs() < 1e-15);
            let moved = translate_solution(&cfg, 0.3, -0.7);
            assert!(residual(&moved, 3, 2).unwrap().max_abs() < 1e-12);
        }
        let cfg = PointConfig::new(1, vec![(0.5, 0.5), (0.25, 1.0)]).unwrap();
        let r = residual(&cfg, 1, 1).unwrap(); // (0,1), (1,0), (1,1)
        assert_eq!(r.as_slice(), &[-0.5, 0.25, 0.0]);
    }

    #[test]
    fn translation_of_non_solutions_matches_direct_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = PointConfig::random(2, &mut rng).unwrap();
        assert_eq!(translate_solution(&cfg, 0.0, 0.0), cfg);
        let (a, b) = (0.4, -0.9);
        let moved = translate_solution(&cfg, a, b);
        let got = residual(&moved, 2, 2).unwrap();
        for (p, mono) in monomials(2, 2).unwrap().iter().enumerate() {
            let direct: f64 = cfg
                .points()
                .iter()
                .enumerate()
                .map(|(s, &(x, y))| cfg.sign(s) * (x + a).powi(mono.i as i32) * (y + b).powi(mono.j as i32))
                .sum();
            assert!((got[p] - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_small_case_by_hand() {
        let (x1, y1, x2, y2) = (0.2, 0.7, 0.9, 0.4);
        let cfg = PointConfig::new(1, vec![(x1, y1), (x2, y2)]).unwrap();
        let a = jacobi_a0(&cfg, 1, 1).unwrap().matrix;
        // graded order: (0,1), (1,0), (1,1)
        let want = [[0.0, 1.0, 0.0, -1.0], [1.0, 0.0, -1.0, 0.0], [y1, x1, -y2, -x2]];
        for r in 0..3 {
            for c in 0..4 {
                assert_eq!(a[(r, c)], want[r][c]);
            }
        }
    }

    #[test]
    fn jacobi_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let step = 1e-5;
        for (n, m, k) in [(1, 1, 2), (2, 1, 2), (2, 2, 3), (3, 1, 2)] {
            let cfg = PointConfig::random(k, &mut rng).unwrap();
            let a = jacobi_a0(&cfg, n, m).unwrap().matrix;
            for c in 0..4 * k {
                let bump = |d: f64| {
                    let mut pts = cfg.points().to_vec();
                    if c % 2 == 0 {
                        pts[c / 2].0 += d;
                    } else {
                        pts[c / 2].1 += d;
                    }
                    residual(&PointConfig::new(k, pts).unwrap(), n, m).unwrap()
                };
                let (p, q) = (bump(step), bump(-step));
                for r in 0..a.nrows() {
                    let fd = (p[r] - q[r]) / (2.0 * step);
                    assert!((a[(r, c)] - fd).abs() <= 1e-6, "({n},{m},{k}) r{r} c{c}");
                }
            }
            // second-half columns are negated first-half columns at the same point
            let mut pts = cfg.points().to_vec();
            pts[k] = pts[0];
            let b = jacobi_a0(&PointConfig::new(k, pts).unwrap(), n, m).unwrap().matrix;
            for r in 0..b.nrows() {
                assert_eq!(b[(r, 2 * k)], -b[(r, 0)]);
                assert_eq!(b[(r, 2 * k + 1)], -b[(r, 1)]);
            }
        }
    }

    #[test]
    fn gram_matches_cauchy_binet_and_vanishes_on_degenerate_fixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, m, k) in [(1, 1, 2), (2, 1, 3), (1, 2, 3)] {
            for _ in 0..20 {
                let cfg = PointConfig::random(k, &mut rng).unwrap();
                let a = jacobi_a0(&cfg, n, m).unwrap().matrix;
                let g = gram_g0(&cfg, n, m).unwrap().g0;
                let cb = cauchy_binet_gram(&a);
                assert!((g - cb).abs() <= 1e-10 * cb, "{g} vs {cb}");
            }
        }
        // k = 1, n = m = 1: third row = y·row(1,0) + x·row(0,1) on any solution.
        for _ in 0..20 {
            let p: (f64, f64) = (rng.random(), rng.random());
            let cfg = PointConfig::mirror(&[p]).unwrap();
            assert_eq!(gram_g0(&cfg, 1, 1).unwrap().g0, 0.0);
        }
    }

    #[test]
    fn gram_translation_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, m, k) in [(1, 1, 2), (2, 1, 3)] {
            let ainv = crate::poly::alpha_inverse(n, m).unwrap() as i32;
            for _ in 0..50 {
                let cfg = PointConfig::random(k, &mut rng).unwrap();
                let g = gram_g0(&cfg, n, m).unwrap().g0;
                let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let gt = gram_g0(&translate_solution(&cfg, a, b), n, m).unwrap().g0;
                assert!((gt - g).abs() <= 1e-9 * g, "translation {gt} vs {g}");
                for lambda in [0.5, 2.0, 3.0] {
                    let gs = gram_g0(&cfg.scaled(lambda), n, m).unwrap().g0;
                    let want = lambda.powi(2 * ainv) * g;
                    assert!((gs - want).abs() <= 1e-9 * want, "scaling {gs} vs {want}");
                }
            }
        }
    }

    #[test]
    fn unit_ball_volumes() {
        let pi = std::f64::consts::PI;
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - pi).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - pi * pi / 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(5) - 8.0 * pi * pi / 15.0).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_with_orthonormal_rows_is_the_unit_ball() {
        let mut a = DMatrix::zeros(3, 8);
        a[(0, 1)] = 1.0;
        a[(1, 4)] = 1.0;
        a[(2, 6)] = 1.0;
        let r = ellipsoid_volume_mc(&a, 400_000, 9).unwrap();
        assert_eq!(r.closed_form, unit_ball_volume(3));
        assert!(r.z_score() < 4.0, "{r:?}");
    }

    #[test]
    fn ellipsoid_rejects_singular_configs() {
        let cfg = PointConfig::mirror(&[(0.3, 0.6)]).unwrap();
        assert!(matches!(ellipsoid_volume_check(&cfg, 1, 1, 100, 1), Err(Error::Singular(_))));
    }

    #[test]
    fn thin_shell_unreachable_target_is_zero() {
        let target = CoeffVector::from_vec(vec![2.5, 0.0, 0.0]);
        let est = thin_shell_measure(1, 1, 2, &target, 0.05, 50_000, 3, ShellWeight::None).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.n_accepted, 0);
        assert_eq!(est.relative_error, None);
    }

    #[test]
    fn thin_shell_value_bounded_by_box_factor() {
        let est = theta_via_thin_shell(1, 1, 2, 0.05, 200_000, 4).unwrap();
        assert!(est.value <= (2.0f64 * 0.05).powi(-3));
        assert!(est.value > 0.0);
    }

    #[test]
    fn thin_shell_hypothesis_check() {
        assert!(matches!(
            theta_via_thin_shell(2, 1, 2, 0.05, 100, 1),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn thin_shell_is_worker_count_invariant() {
        let run = |w| {
            crate::rng::with_workers(w, || theta_via_thin_shell(1, 1, 2, 0.05, 300_000, 77).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.n_accepted, b.n_accepted);
    }

    #[test]
    fn case21_determinant_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert_eq!(jacobian_d_case21(0.0, 0.3, 1.0, -0.8), -2.0);
        for _ in 0..1000 {
            let (x, y, u, v): (f64, f64, f64, f64) = (rng.random(), rng.random(), rng.random(), rng.random());
            let mat: Vec<Vec<f64>> = case21_matrix(x, y, u, v).iter().map(|r| r.to_vec()).collect();
            let oracle = cofactor_det(&mat);
            assert!((jacobian_d_case21(x, y, u, v) - oracle).abs() < 1e-12);
            let (y2, v2) = (rng.random::<f64>(), rng.random::<f64>());
            assert_eq!(jacobian_d_case21(x, y, u, v), jacobian_d_case21(x, y2, u, v2));
            assert_eq!(jacobian_d_case21(x, y, x, v), 0.0);
        }
    }

    fn unit_points(k: usize) -> impl Strategy<Value = PointConfig> {
        proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2 * k)
            .prop_map(move |pts| PointConfig::new(k, pts).unwrap())
    }

    proptest! {
        #[test]
        fn gram_is_superadditive_and_bounded(cfg in unit_points(3), small in unit_points(2)) {
            for (c, n, m) in [(&cfg, 2, 1), (&cfg, 1, 2), (&small, 1, 1), (&small, 2, 1)] {
                let split = gram_split(c, n, m).unwrap();
                prop_assert!(split.superadditive(), "{split:?}");
                prop_assert!(split.full.g0 <= gram_upper_bound(n, m, c.k()).unwrap());
                prop_assert_eq!(split.full.g0, gram_g0(c, n, m).unwrap().g0);
            }
        }

        #[test]
        fn json_round_trip(cfg in unit_points(2)) {
            let text = serde_json::to_string(&cfg).unwrap();
            let back: PointConfig = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }

    #[test]
    fn json_layout_and_rejections() {
        let cfg: PointConfig = serde_json::from_str(r#"{"k":1,"points":[[0.1,0.2],[0.3,0.4]]}"#).unwrap();
        assert_eq!(cfg.points(), &[(0.1, 0.2), (0.3, 0.4)]);
        assert!(serde_json::from_str::<PointConfig>(r#"{"k":1,"points":[[0.1,0.2]]}"#).is_err());
        assert!(serde_json::from_str::<PointConfig>(r#"{"k":0,"points":[]}"#).is_err());
        assert!(serde_json::from_str::<PointConfig>(r#"{"k":1,"points":[[0.1,0.2],[0.3,0.4]],"x":1}"#).is_err());
    }
}
