//! Truncated singular integrals
//!
//! ```text
//! θ_k(R) = ∫_{[−R,R]^N} |J(ᾱ)|^{2k} dᾱ
//! ```
//!
//! by Monte Carlo stratified over dyadic max-norm shells, the `n = m = 1`
//! Plancherel mass by nested quadrature, and growth diagnostics across radii.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{critical_threshold, monomial_count, validate_degrees, CoeffVector, PolySpec};
use crate::quad::{osc_integral_with, GaussLegendre, QuadConfig};
use crate::rng::{stream_id, CounterRng};

const TAG_PILOT: u32 = 0x5049;
const TAG_MAIN: u32 = 0x4d41;
const PILOT_FRACTION: f64 = 0.01;
const MIN_PER_SHELL: u64 = 2;
const BLOCK: u64 = 256;
/// Increments count as resolved when their standard error is below this
/// fraction of the value.
const RESOLVED: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    #[serde(rename = "R")]
    pub radius: f64,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// One max-norm shell `r_lo < ‖ᾱ‖_∞ ≤ r_hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shell {
    pub r_lo: f64,
    pub r_hi: f64,
}

impl Shell {
    pub fn volume(&self, dim: usize) -> f64 {
        let d = dim as i32;
        (2.0 * self.r_hi).powi(d) - (2.0 * self.r_lo).powi(d)
    }

    /// Uniform draw from the shell: the max-norm radius from its `ρ^{N−1}`
    /// law, then a uniform point on one of the `2N` faces of that cube.
    pub fn sample(&self, dim: usize, rng: &mut impl Rng, out: &mut [f64]) {
        let d = dim as i32;
        let (lo, hi) = (self.r_lo.powi(d), self.r_hi.powi(d));
        let u: f64 = rng.random();
        let rho = (lo + u * (hi - lo)).powf(1.0 / dim as f64);
        let face = rng.random_range(0..dim);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for (c, v) in out.iter_mut().enumerate() {
            let t: f64 = rng.random();
            *v = if c == face { sign * rho } else { rho * (2.0 * t - 1.0) };
        }
    }
}

/// The core `‖ᾱ‖_∞ ≤ min(1, R)` followed by `(2^{l−1}, min(2^l, R)]`.
pub fn dyadic_shells(radius: f64) -> Vec<Shell> {
    let mut shells = vec![Shell {
        r_lo: 0.0,
        r_hi: radius.min(1.0),
    }];
    let mut lo = 1.0;
    while lo < radius {
        let hi = (2.0 * lo).min(radius);
        shells.push(Shell { r_lo: lo, r_hi: hi });
        lo *= 2.0;
    }
    shells
}

/// `|J(ᾱ)|^{2k}`.
pub fn integrand(n: u32, m: u32, k: u32, alpha: &[f64], tol: f64, cfg: &QuadConfig) -> Result<f64> {
    let f = PolySpec::from_coeffs(n, m, CoeffVector::from_vec(alpha.to_vec()))?;
    let j = osc_integral_with(&f, tol, cfg)?;
    Ok(j.value.norm_sqr().powi(k as i32))
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let c = self.count as f64;
        let mean = self.sum / c;
        ((self.sum_sq - c * mean * mean) / (c - 1.0)).max(0.0)
    }
}

struct Sampler<'a> {
    n: u32,
    m: u32,
    k: u32,
    dim: usize,
    tol: f64,
    cfg: &'a QuadConfig,
    rng: CounterRng,
}

impl Sampler<'_> {
    /// Moments of `count` draws from `shell`, one counter per draw, merged in
    /// block order.
    fn run(&self, tag: u32, index: usize, shell: &Shell, count: u64) -> Result<Moments> {
        let stream = stream_id(tag, index as u32);
        let blocks = count.div_ceil(BLOCK);
        let parts: Vec<Moments> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut acc = Moments::default();
                let mut alpha = vec![0.0; self.dim];
                for c in b * BLOCK..((b + 1) * BLOCK).min(count) {
                    let mut r = self.rng.at(stream, c);
                    shell.sample(self.dim, &mut r, &mut alpha);
                    let v = integrand(self.n, self.m, self.k, &alpha, self.tol, self.cfg)?;
                    acc.count += 1;
                    acc.sum += v;
                    acc.sum_sq += v * v;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut total = Moments::default();
        for p in &parts {
            total.merge(p);
        }
        Ok(total)
    }
}

/// Split `total` across shells proportionally to `weights`, at least
/// `MIN_PER_SHELL` each, by largest remainders.
fn allocate(total: u64, weights: &[f64]) -> Vec<u64> {
    let s = weights.len() as u64;
    let spare = total - MIN_PER_SHELL * s;
    let wsum: f64 = weights.iter().sum();
    let share: Vec<f64> = if wsum > 0.0 && wsum.is_finite() {
        weights.iter().map(|w| spare as f64 * w / wsum).collect()
    } else {
        vec![spare as f64 / s as f64; weights.len()]
    };
    let mut alloc: Vec<u64> = share.iter().map(|x| x.floor() as u64).collect();
    let mut left = spare - alloc.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = share[a] - share[a].floor();
        let rb = share[b] - share[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }
    alloc.iter().map(|a| a + MIN_PER_SHELL).collect()
}

/// Stratified estimate of `∫_{[−R,R]^N} |J|^{2k}`. One percent of the budget
/// runs a pilot whose shell means set the main allocation (proportional to
/// shell volume times pilot mean); only the main samples enter the estimate.
pub fn theta_truncated(
    n: u32,
    m: u32,
    k: u32,
    radius: f64,
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<ThetaEstimate> {
    theta_truncated_with(n, m, k, radius, n_samples, seed, tol, &QuadConfig::default())
}

#[allow(clippy::too_many_arguments)]
pub fn theta_truncated_with(
    n: u32,
    m: u32,
    k: u32,
    radius: f64,
    n_samples: u64,
    seed: u64,
    tol: f64,
    cfg: &QuadConfig,
) -> Result<ThetaEstimate> {
    validate_degrees(n, m)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::invalid(format!("R must be positive and finite, got {radius}")));
    }
    let dim = monomial_count(n, m)?;
    let shells = dyadic_shells(radius);
    let s = shells.len() as u64;
    if n_samples < 4 * MIN_PER_SHELL * s {
        return Err(Error::invalid(format!(
            "n_samples = {n_samples} is too small for {s} shells (need at least {})",
            4 * MIN_PER_SHELL * s
        )));
    }
    let sampler = Sampler {
        n,
        m,
        k,
        dim,
        tol,
        cfg,
        rng: CounterRng::new(seed),
    };

    let pilot_each = ((PILOT_FRACTION * n_samples as f64 / s as f64).floor() as u64).max(MIN_PER_SHELL);
    let mut weights = Vec::with_capacity(shells.len());
    for (l, shell) in shells.iter().enumerate() {
        let p = sampler.run(TAG_PILOT, l, shell, pilot_each)?;
        weights.push(shell.volume(dim) * p.mean());
    }
    let main_total = n_samples - pilot_each * s;
    let alloc = allocate(main_total, &weights);

    let mut value = 0.0;
    let mut var = 0.0;
    for (l, (shell, &count)) in shells.iter().zip(&alloc).enumerate() {
        let mo = sampler.run(TAG_MAIN, l, shell, count)?;
        let vol = shell.volume(dim);
        value += vol * mo.mean();
        var += vol * vol * mo.variance() / mo.count as f64;
    }
    Ok(ThetaEstimate {
        n,
        m,
        k,
        radius,
        value,
        std_error: var.sqrt(),
        n_samples,
        seed,
    })
}

/// `∫_{[−R,R]²} |J(α, β, γ)|² dα dβ` for `F = αy + βx + γxy`, by Gauss–Legendre
/// on unit-width panels in both directions. Tends to `∫₀¹∫₀¹ 1 = 1` as `R → ∞`.
pub fn parseval_check(gamma: f64, radius: f64, tol: f64) -> Result<f64> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::invalid(format!("R must be positive and finite, got {radius}")));
    }
    if !gamma.is_finite() {
        return Err(Error::invalid("gamma must be finite"));
    }
    let panels = (2.0 * radius).ceil().max(1.0) as usize;
    let width = 2.0 * radius / panels as f64;
    let (un, uw) = GaussLegendre::new(12).unit();
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let a = -radius + p as f64 * width;
            un.iter()
                .zip(&uw)
                .map(move |(&t, &w)| (a + t * width, w * width))
                .collect::<Vec<_>>()
        })
        .collect();
    let cfg = QuadConfig::default();
    let rows: Vec<f64> = nodes
        .par_iter()
        .map(|&(alpha, wa)| {
            let mut row = 0.0;
            for &(beta, wb) in &nodes {
                // graded order: (0,1), (1,0), (1,1)
                let v = integrand(1, 1, 1, &[alpha, beta, gamma], tol, &cfg)?;
                row += wb * v;
            }
            Ok(wa * row)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub radii: Vec<f64>,
    pub values: Vec<ThetaEstimate>,
    /// Slope of `log value` against `log R`.
    pub fitted_exponent: f64,
    pub exponent_std_error: f64,
    /// `(v_{i+1} − v_i) / log(R_{i+1}/R_i)`, the per-octave growth.
    pub log_increments: Vec<f64>,
    pub log_increment_std_errors: Vec<f64>,
    pub classification: Classification,
    /// `4k − threshold`: negative or zero predicts divergence, positive
    /// convergence.
    pub predicted_margin: i64,
    pub predicted: Classification,
}

/// Least-squares slope of `y` on `x` and its standard error, combining the
/// residual scatter with the propagated per-point errors `sy`.
fn fit_slope(x: &[f64], y: &[f64], sy: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let resid_var = if x.len() > 2 { rss / (n - 2.0) / sxx } else { 0.0 };
    let prop_var: f64 = x.iter().zip(sy).map(|(a, s)| ((a - xm) * s).powi(2)).sum::<f64>() / (sxx * sxx);
    (slope, (resid_var + prop_var).sqrt())
}

/// Classify growth of `θ_k(R)` across `radii`:
///
/// * convergent when every increment after the first is within three combined
///   standard errors of zero (and those errors are below 5% of the value), or when the per-octave growth at the last step
///   falls below that at the first by more than two combined standard errors;
/// * otherwise divergent when the fitted exponent exceeds zero by more than
///   twice its standard error and the per-octave growth at the last step is
///   itself more than two standard errors above zero;
/// * otherwise inconclusive.
pub fn growth_diagnostic(
    n: u32,
    m: u32,
    k: u32,
    radii: &[f64],
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<GrowthReport> {
    if radii.len() < 3 {
        return Err(Error::invalid("growth diagnostic needs at least 3 radii"));
    }
    if radii.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::invalid("radii must be strictly increasing"));
    }
    let values = radii
        .iter()
        .map(|&r| theta_truncated(n, m, k, r, n_samples, seed, tol))
        .collect::<Result<Vec<_>>>()?;
    classify(n, m, k, radii, values)
}

/// Classification of precomputed estimates; see [`growth_diagnostic`].
pub fn classify(n: u32, m: u32, k: u32, radii: &[f64], values: Vec<ThetaEstimate>) -> Result<GrowthReport> {
    if radii.len() != values.len() || radii.len() < 3 {
        return Err(Error::invalid("need at least 3 radii with one estimate each"));
    }
    if values.iter().any(|v| v.value.is_nan() || v.value <= 0.0) {
        return Err(Error::invalid("growth fit needs positive estimates"));
    }
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.value.ln()).collect();
    let sy: Vec<f64> = values.iter().map(|v| v.std_error / v.value).collect();
    let (slope, slope_se) = fit_slope(&lx, &ly, &sy);

    let mut inc = Vec::new();
    let mut inc_se = Vec::new();
    for i in 0..values.len() - 1 {
        let step = lx[i + 1] - lx[i];
        let d = values[i + 1].value - values[i].value;
        let se = values[i + 1].std_error.hypot(values[i].std_error);
        inc.push(d / step);
        inc_se.push(se / step);
    }
    let flat = (1..inc.len()).all(|i| {
        inc[i].abs() <= 3.0 * inc_se[i] && inc_se[i] * (lx[i + 1] - lx[i]) <= RESOLVED * values[i].value
    });
    let last = inc.len() - 1;
    let slowing = inc[0] - inc[last] > 2.0 * inc_se[0].hypot(inc_se[last]);
    let classification = if flat || slowing {
        Classification::Convergent
    } else if slope > 2.0 * slope_se && inc[last] > 2.0 * inc_se[last] {
        Classification::Divergent
    } else {
        Classification::Inconclusive
    };
    let margin = 4 * k as i64 - critical_threshold(n, m)? as i64;
    Ok(GrowthReport {
        n,
        m,
        k,
        radii: radii.to_vec(),
        values,
        fitted_exponent: slope,
        exponent_std_error: slope_se,
        log_increments: inc,
        log_increment_std_errors: inc_se,
        classification,
        predicted_margin: margin,
        predicted: if margin > 0 {
            Classification::Convergent
        } else {
            Classification::Divergent
        },
    })
}

/// `−4k + threshold`, the exponent of `2^l` in the lower-bound series.
pub fn shell_series_exponent(n: u32, m: u32, k: u32) -> Result<i64> {
    Ok(critical_threshold(n, m)? as i64 - 4 * k as i64)
}

/// `(2^l)^{−4k + 2 + (n+m)(n+1)(m+1)/2}`.
pub fn shell_series_term(n: u32, m: u32, k: u32, l: u32) -> Result<f64> {
    if l == 0 {
        return Err(Error::invalid("l must be at least 1"));
    }
    let e = shell_series_exponent(n, m, k)?;
    Ok(2f64.powf(l as f64 * e as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shells_tile_the_box() {
        for r in [0.3, 1.0, 5.0, 8.0, 40.0] {
            let shells = dyadic_shells(r);
            assert_eq!(shells[0].r_lo, 0.0);
            assert_eq!(shells.last().unwrap().r_hi, r);
            for w in shells.windows(2) {
                assert_eq!(w[0].r_hi, w[1].r_lo);
            }
            for dim in [3, 5] {
                let total: f64 = shells.iter().map(|s| s.volume(dim)).sum();
                assert!((total - (2.0 * r).powi(dim as i32)).abs() <= 1e-9 * total);
            }
        }
        assert_eq!(dyadic_shells(5.0).len(), 4);
    }

    #[test]
    fn shell_samples_stay_in_shell_and_fill_faces() {
        let sh = Shell { r_lo: 2.0, r_hi: 4.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v = [0.0; 3];
        let mut inner = 0;
        let draws = 100_000;
        for _ in 0..draws {
            sh.sample(3, &mut rng, &mut v);
            let norm = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(norm > 2.0 && norm <= 4.0);
            if norm <= 3.0 {
                inner += 1;
            }
        }
        // P(‖α‖∞ ≤ 3) = (27 − 8)/(64 − 8)
        let p = inner as f64 / draws as f64;
        let want = 19.0 / 56.0;
        assert!((p - want).abs() < 4.0 * (want * (1.0 - want) / draws as f64).sqrt());
    }

    #[test]
    fn allocation_sums_and_respects_floor() {
        let a = allocate(1000, &[0.0, 1.0, 3.0, 0.5]);
        assert_eq!(a.iter().sum::<u64>(), 1000);
        assert!(a.iter().all(|&x| x >= MIN_PER_SHELL));
        assert!(a[2] > a[1] && a[1] > a[3] && a[3] > a[0]);
        assert_eq!(allocate(10, &[0.0, 0.0]).iter().sum::<u64>(), 10);
    }

    #[test]
    fn shell_series_examples() {
        assert_eq!(shell_series_term(1, 1, 1, 3).unwrap(), 64.0);
        assert_eq!(shell_series_exponent(2, 1, 2).unwrap(), 3);
        for l in 1..20 {
            let t = shell_series_term(1, 1, 2, l).unwrap();
            assert_eq!(t, 2f64.powi(-2 * l as i32));
        }
        assert!(shell_series_term(1, 1, 1, 0).is_err());
    }

    #[test]
    fn tiny_radius_gives_tiny_value() {
        let e = theta_truncated(1, 1, 2, 1e-3, 200, 5, 1e-10).unwrap();
        assert!(e.value >= 0.0 && e.value <= 8e-9 * (1.0 + 1e-9));
        assert!((e.value - 8e-9).abs() < 1e-11);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(theta_truncated(1, 1, 0, 1.0, 1000, 1, 1e-8).is_err());
        assert!(theta_truncated(1, 1, 1, 0.0, 1000, 1, 1e-8).is_err());
        assert!(theta_truncated(1, 1, 1, f64::NAN, 1000, 1, 1e-8).is_err());
        assert!(theta_truncated(1, 1, 1, 40.0, 10, 1, 1e-8).is_err());
        assert!(parseval_check(0.0, -1.0, 1e-8).is_err());
        assert!(growth_diagnostic(1, 1, 1, &[1.0, 2.0], 100, 1, 1e-8).is_err());
        assert!(growth_diagnostic(1, 1, 1, &[1.0, 3.0, 2.0], 100, 1, 1e-8).is_err());
    }

    #[test]
    fn reflection_leaves_integrand_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = QuadConfig::default();
        for (n, m) in [(1, 1), (2, 1), (2, 2)] {
            let dim = monomial_count(n, m).unwrap();
            for _ in 0..50 {
                let a: Vec<f64> = (0..dim).map(|_| rng.random_range(-8.0..8.0)).collect();
                let neg: Vec<f64> = a.iter().map(|x| -x).collect();
                let p = integrand(n, m, 2, &a, 1e-10, &cfg).unwrap();
                let q = integrand(n, m, 2, &neg, 1e-10, &cfg).unwrap();
                assert_eq!(p, q);
            }
        }
    }

    #[test]
    fn estimates_are_reproducible_and_worker_invariant() {
        let run = |w| crate::rng::with_workers(w, || theta_truncated(1, 1, 2, 6.0, 4000, 11, 1e-9).unwrap());
        let (a, b, c) = (run(1), run(1), run(3));
        assert_eq!(a, b);
        assert_eq!(a.value.to_bits(), c.value.to_bits());
        assert_eq!(a.std_error.to_bits(), c.std_error.to_bits());
        assert!(a.value >= 0.0 && a.std_error >= 0.0);
    }

    #[test]
    fn monotone_in_radius() {
        let a = theta_truncated(1, 1, 2, 10.0, 20_000, 3, 1e-9).unwrap();
        let b = theta_truncated(1, 1, 2, 20.0, 20_000, 4, 1e-9).unwrap();
        assert!(a.value <= b.value + 3.0 * a.std_error.hypot(b.std_error), "{a:?} {b:?}");
    }

    /// Uniform sampling over the whole box with an unrelated generator.
    fn plain_mc(n: u32, m: u32, k: u32, r: f64, samples: u64, seed: u64) -> (f64, f64) {
        let dim = monomial_count(n, m).unwrap();
        let cfg = QuadConfig::default();
        let chunks = 64u64;
        let parts: Vec<(f64, f64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
                let mut s = (0.0, 0.0);
                let mut a = vec![0.0; dim];
                for _ in 0..samples / chunks {
                    for v in a.iter_mut() {
                        *v = rng.random_range(-r..r);
                    }
                    let x = integrand(n, m, k, &a, 1e-9, &cfg).unwrap();
                    s.0 += x;
                    s.1 += x * x;
                }
                s
            })
            .collect();
        let total = (samples / chunks * chunks) as f64;
        let sum: f64 = parts.iter().map(|p| p.0).sum();
        let sq: f64 = parts.iter().map(|p| p.1).sum();
        let mean = sum / total;
        let var = (sq / total - mean * mean) * total / (total - 1.0);
        let vol = (2.0 * r).powi(dim as i32);
        (vol * mean, vol * (var / total).sqrt())
    }

    #[test]
    fn stratified_matches_plain_monte_carlo() {
        let (oracle, oracle_se) = plain_mc(1, 1, 2, 10.0, 2_000_000, 2024);
        let est = theta_truncated(1, 1, 2, 10.0, 100_000, 7, 1e-9).unwrap();
        let combined = oracle_se.hypot(est.std_error);
        assert!((est.value - oracle).abs() <= 3.0 * combined, "{est:?} vs {oracle} ± {oracle_se}");
    }

    #[test]
    fn parseval_without_cross_term_is_separable_sinc_squared() {
        // ∫_{−R}^{R} sinc²(πα) dα per axis, by a fine independent rule.
        let one_d = |r: f64| {
            let g = GaussLegendre::new(20);
            let panels = (8.0 * r) as usize;
            let w = 2.0 * r / panels as f64;
            (0..panels)
                .map(|p| {
                    let a = -r + p as f64 * w;
                    g.integrate(a, a + w, |t| {
                        let z = std::f64::consts::PI * t;
                        if z == 0.0 {
                            1.0
                        } else {
                            (z.sin() / z).powi(2)
                        }
                    })
                })
                .sum::<f64>()
        };
        let r = 10.0;
        let got = parseval_check(0.0, r, 1e-11).unwrap();
        let want = one_d(r).powi(2);
        assert!((got - want).abs() < 1e-7, "{got} vs {want}");
        assert!((got - 1.0).abs() < 0.05);
    }

    #[test]
    fn classification_rules_on_synthetic_series() {
        let est = |r: f64, v: f64| ThetaEstimate {
            n: 1,
            m: 1,
            k: 1,
            radius: r,
            value: v,
            std_error: 1e-3 * v,
            n_samples: 1,
            seed: 0,
        };
        let radii = [5.0, 10.0, 20.0, 40.0];
        let linear = classify(1, 1, 1, &radii, radii.iter().map(|&r| est(r, 2.0 * r)).collect()).unwrap();
        assert_eq!(linear.classification, Classification::Divergent);
        assert!((linear.fitted_exponent - 1.0).abs() < 1e-12);
        assert_eq!(linear.predicted, Classification::Divergent);
        let settling = classify(1, 1, 2, &radii, radii.iter().map(|&r| est(r, 3.0 - 2.0 / r)).collect()).unwrap();
        assert_eq!(settling.classification, Classification::Convergent);
        assert_eq!(settling.predicted, Classification::Convergent);
        let noisy = classify(1, 1, 1, &radii, radii.iter().map(|&r| ThetaEstimate { std_error: 4.0 * r, ..est(r, 2.0 * r) }).collect()).unwrap();
        assert_eq!(noisy.classification, Classification::Inconclusive);
    }
}
