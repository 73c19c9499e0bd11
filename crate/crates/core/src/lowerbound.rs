//! The divergence construction: for each dyadic scale `P` and grid square
//! with upper-right corner `ū = (ν/P, μ/P)`, a box of recentered
//! coefficients `β` on which `|∇F|² ≤ 1/(2k)` over the square. The boxes are
//! pairwise disjoint in coefficient space and their volumes grow like a
//! power of `P` that outpaces the decay of `|J|^{2k}` when `4k` is at most
//! the critical threshold.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{monomials, position, recoeff_matrix, validate_degrees, CoeffVector, MonomialIndex, PolySpec};
use crate::rng::{stream_id, CounterRng};
use crate::theta::shell_series_term;

const TAG_BOX: u32 = 0x4258;
const GRID: usize = 32;

/// `1 / (n m √(2k(n² + m²)))`.
pub fn c_constant(n: u32, m: u32, k: u32) -> Result<f64> {
    if n == 0 || m == 0 || k == 0 {
        return Err(Error::invalid("n, m, k must all be at least 1"));
    }
    let (nf, mf, kf) = (n as f64, m as f64, k as f64);
    Ok(1.0 / (nf * mf * (2.0 * kf * (nf * nf + mf * mf)).sqrt()))
}

/// A coefficient box in `β`-coordinates, recentered at `ū = (ν/P, μ/P)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    #[serde(rename = "P")]
    pub p: u32,
    pub nu: u32,
    pub mu: u32,
    pub c: f64,
    /// Graded order, matching `lower` and `upper`.
    pub basis: Vec<MonomialIndex>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxRegion {
    pub fn center(&self) -> (f64, f64) {
        (self.nu as f64 / self.p as f64, self.mu as f64 / self.p as f64)
    }

    pub fn id(&self) -> BoxId {
        (self.p, self.nu, self.mu)
    }

    /// The `β_nm` interval `[cP^{n+m−1}/2, cP^{n+m−1}]`.
    pub fn top_interval(&self) -> (f64, f64) {
        let t = self.lower.len() - 1;
        (self.lower[t], self.upper[t])
    }

    pub fn sample_beta(&self, rng: &mut impl Rng) -> CoeffVector {
        CoeffVector::from_vec(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(&a, &b)| a + (b - a) * rng.random::<f64>())
                .collect(),
        )
    }

    /// `F` in ordinary coefficients for the recentered coefficients `beta`.
    pub fn to_alpha(&self, beta: &CoeffVector) -> Result<PolySpec> {
        let (u1, u2) = self.center();
        let alpha = recoeff_matrix(self.n, self.m, u1, u2)?.apply(beta);
        PolySpec::from_coeffs(self.n, self.m, alpha)
    }
}

/// Intervals `±0.1cP^{i+j−1}` for `(i,j) ≠ (n,m)` and `[cP^{n+m−1}/2, cP^{n+m−1}]`.
pub fn box_bounds(n: u32, m: u32, k: u32, p: u32, nu: u32, mu: u32) -> Result<BoxRegion> {
    validate_degrees(n, m)?;
    if p == 0 {
        return Err(Error::invalid("P must be at least 1"));
    }
    if !(1..=p).contains(&nu) || !(1..=p).contains(&mu) {
        return Err(Error::invalid(format!("(nu, mu) = ({nu}, {mu}) outside 1..={p}")));
    }
    let c = c_constant(n, m, k)?;
    let basis = monomials(n, m)?;
    let pf = p as f64;
    let mut lower = Vec::with_capacity(basis.len());
    let mut upper = Vec::with_capacity(basis.len());
    for b in &basis {
        let scale = c * pf.powi((b.i + b.j) as i32 - 1);
        if b.i == n && b.j == m {
            lower.push(0.5 * scale);
            upper.push(scale);
        } else {
            lower.push(-0.1 * scale);
            upper.push(0.1 * scale);
        }
    }
    Ok(BoxRegion {
        n,
        m,
        k,
        p,
        nu,
        mu,
        c,
        basis,
        lower,
        upper,
    })
}

/// Product of the interval lengths.
pub fn box_volume(region: &BoxRegion) -> f64 {
    region.lower.iter().zip(&region.upper).map(|(a, b)| b - a).product()
}

/// The power of `P` in [`box_volume`], summed term by term:
/// `(n+m−1) + Σ_{(i,j) ≠ (0,0),(n,m)} (i+j−1)`.
pub fn box_volume_exponent(n: u32, m: u32) -> Result<i64> {
    Ok(monomials(n, m)?
        .iter()
        .map(|b| b.i as i64 + b.j as i64 - 1)
        .sum())
}

/// `max (F_x² + F_y²) − 1/(2k)` over a 32 × 32 grid (corners included) on
/// `[u₁ − 1/P, u₁] × [u₂ − 1/P, u₂] ∩ [0,1]²`.
pub fn e_set_margin(f: &PolySpec, k: u32, u1: f64, u2: f64, p: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if p == 0 {
        return Err(Error::invalid("P must be at least 1"));
    }
    let side = 1.0 / p as f64;
    let (x0, x1) = ((u1 - side).max(0.0), u1.min(1.0));
    let (y0, y1) = ((u2 - side).max(0.0), u2.min(1.0));
    if !(x0 <= x1 && y0 <= y1) {
        return Err(Error::invalid(format!("square at ({u1}, {u2}) with P = {p} misses the unit square")));
    }
    let at = |a: f64, b: f64, t: usize| a + (b - a) * t as f64 / (GRID - 1) as f64;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..GRID {
        for j in 0..GRID {
            let (gx, gy) = f.grad(at(x0, x1, i), at(y0, y1, j));
            worst = worst.max(gx * gx + gy * gy);
        }
    }
    Ok(worst - 1.0 / (2.0 * k as f64))
}

/// Lower bound on the distance separating two same-scale boxes along the
/// ordinary coefficient `α(n−1, m)` (centers differing in `ν`) or
/// `α(n, m−1)` (same `ν`, differing `μ`), given a shared `α_nm = β_nm`.
/// Positive certifies disjointness; `None` for identical centers.
pub fn same_scale_gap(a: &BoxRegion, b: &BoxRegion) -> Option<f64> {
    let (du, weight) = if a.nu != b.nu {
        ((a.nu as f64 - b.nu as f64) / a.p as f64, a.n as f64)
    } else if a.mu != b.mu {
        ((a.mu as f64 - b.mu as f64) / a.p as f64, a.m as f64)
    } else {
        return None;
    };
    // α(n−1,m) = β(n−1,m) − n·u₁·β_nm on both boxes; a common point needs
    // n·|Δu₁|·β_nm = |Δβ(n−1,m)| ≤ 0.2cP^{n+m−2}.
    let (t_lo, _) = a.top_interval();
    let slack = 0.2 * a.c * (a.p as f64).powi((a.n + a.m) as i32 - 2);
    Some(weight * du.abs() * t_lo - slack)
}

/// Certified disjointness of two boxes: for the same scale via
/// [`same_scale_gap`], across scales by the `β_nm` intervals (touching at an
/// endpoint counts as disjoint).
pub fn boxes_disjoint(a: &BoxRegion, b: &BoxRegion) -> bool {
    if a.p == b.p {
        return same_scale_gap(a, b).is_some_and(|g| g > 0.0);
    }
    let (small, large) = if a.p < b.p { (a, b) } else { (b, a) };
    small.top_interval().1 <= large.top_interval().0
}

/// `(P, ν, μ)` naming one box.
pub type BoxId = (u32, u32, u32);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessReport {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub scales: Vec<u32>,
    pub boxes: usize,
    pub pairs_checked: usize,
    /// Smallest certified same-scale gap, if any pair was checked.
    pub min_same_scale_gap: Option<f64>,
    pub violations: Vec<(BoxId, BoxId)>,
}

impl DisjointnessReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_scales(scales: &[u32]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::invalid("at least one scale is required"));
    }
    if let Some(p) = scales.iter().find(|p| !p.is_power_of_two()) {
        return Err(Error::invalid(format!("scale {p} is not a power of two")));
    }
    let mut sorted = scales.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != scales.len() {
        return Err(Error::invalid("scales must be distinct"));
    }
    Ok(())
}

pub fn all_boxes(n: u32, m: u32, k: u32, scales: &[u32]) -> Result<Vec<BoxRegion>> {
    let mut out = Vec::new();
    for &p in scales {
        for nu in 1..=p {
            for mu in 1..=p {
                out.push(box_bounds(n, m, k, p, nu, mu)?);
            }
        }
    }
    Ok(out)
}

/// Every pair of boxes over all centers and the given dyadic scales.
pub fn disjointness_check(n: u32, m: u32, k: u32, scales: &[u32]) -> Result<DisjointnessReport> {
    check_scales(scales)?;
    let boxes = all_boxes(n, m, k, scales)?;
    let pairs: Vec<(usize, usize)> = (0..boxes.len())
        .flat_map(|i| (i + 1..boxes.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<(bool, Option<f64>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&boxes[i], &boxes[j]);
            let gap = (a.p == b.p).then(|| same_scale_gap(a, b)).flatten();
            (boxes_disjoint(a, b), gap)
        })
        .collect();
    let violations = pairs
        .iter()
        .zip(&results)
        .filter(|(_, r)| !r.0)
        .map(|(&(i, j), _)| (boxes[i].id(), boxes[j].id()))
        .collect();
    let min_same_scale_gap = results
        .iter()
        .filter_map(|r| r.1)
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));
    Ok(DisjointnessReport {
        n,
        m,
        k,
        scales: scales.to_vec(),
        boxes: boxes.len(),
        pairs_checked: pairs.len(),
        min_same_scale_gap,
        violations,
    })
}

/// `Σ_{l=1}^{L} (2^l)^{threshold − 4k}`; zero for `L = 0`.
pub fn divergence_partial_sum(n: u32, m: u32, k: u32, levels: u32) -> Result<f64> {
    (1..=levels).map(|l| shell_series_term(n, m, k, l)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSweepRow {
    #[serde(rename = "P")]
    pub p: u32,
    pub nu: u32,
    pub mu: u32,
    pub volume: f64,
    /// Largest [`e_set_margin`] over the sampled `β`.
    pub margin_max: f64,
}

/// For every box at every scale, draw `n_beta` coefficient vectors and
/// record the worst E-set margin on the box's square.
pub fn box_sweep(n: u32, m: u32, k: u32, scales: &[u32], n_beta: u64, seed: u64) -> Result<Vec<BoxSweepRow>> {
    check_scales(scales)?;
    if n_beta == 0 {
        return Err(Error::invalid("n_beta must be at least 1"));
    }
    let rng = CounterRng::new(seed);
    let boxes = all_boxes(n, m, k, scales)?;
    boxes
        .par_iter()
        .map(|b| {
            let mut r = rng.at(stream_id(TAG_BOX, b.p), ((b.nu - 1) * b.p + (b.mu - 1)) as u64);
            let (u1, u2) = b.center();
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..n_beta {
                let f = b.to_alpha(&b.sample_beta(&mut r))?;
                worst = worst.max(e_set_margin(&f, k, u1, u2, b.p)?);
            }
            Ok(BoxSweepRow {
                p: b.p,
                nu: b.nu,
                mu: b.mu,
                volume: box_volume(b),
                margin_max: worst,
            })
        })
        .collect()
}

/// Index of `(i, j)` in a box's coordinate vectors.
pub fn coordinate(region: &BoxRegion, i: u32, j: u32) -> Option<usize> {
    position(region.n, region.m, i, j)
}
