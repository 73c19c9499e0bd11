//! Bivariate polynomials without constant term, stored densely over the
//! admissible monomials `x^i y^j` with `0 ≤ i ≤ n`, `0 ≤ j ≤ m`, `i + j > 0`.
//!
//! Coefficient vectors are laid out in the graded order of [`MonomialIndex`]:
//! lower total degree first, then smaller `i`, then smaller `j`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree accepted in either variable. Binomials and power tables stay
/// exact in `f64` well beyond this.
pub const MAX_DEGREE: u32 = 40;

/// Exponent pair `(i, j)` of the monomial `x^i y^j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialIndex {
    pub i: u32,
    pub j: u32,
}

impl MonomialIndex {
    pub const fn new(i: u32, j: u32) -> Self {
        MonomialIndex { i, j }
    }

    pub const fn degree(self) -> u32 {
        self.i + self.j
    }
}

impl Ord for MonomialIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }
}

impl PartialOrd for MonomialIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn validate_degrees(n: u32, m: u32) -> Result<()> {
    if n < 1 || m < 1 {
        return Err(Error::invalid(format!(
            "degrees must satisfy n >= 1 and m >= 1, got (n, m) = ({n}, {m})"
        )));
    }
    if n > MAX_DEGREE || m > MAX_DEGREE {
        return Err(Error::invalid(format!(
            "degrees above {MAX_DEGREE} are not supported, got (n, m) = ({n}, {m})"
        )));
    }
    Ok(())
}

/// All admissible monomial indices in ascending graded order.
pub fn monomials(n: u32, m: u32) -> Result<Vec<MonomialIndex>> {
    validate_degrees(n, m)?;
    let mut out = Vec::with_capacity(((n + 1) * (m + 1) - 1) as usize);
    for d in 1..=(n + m) {
        for i in 0..=n.min(d) {
            let j = d - i;
            if j <= m {
                out.push(MonomialIndex::new(i, j));
            }
        }
    }
    Ok(out)
}

/// Number of non-constant monomials, `(n+1)(m+1) - 1`.
pub fn monomial_count(n: u32, m: u32) -> Result<usize> {
    validate_degrees(n, m)?;
    Ok(((n + 1) * (m + 1) - 1) as usize)
}

/// `2 + (n+m)(n+1)(m+1)/2`. The product `(n+m)(n+1)(m+1)` is always even,
/// so the threshold is an integer.
pub fn critical_threshold(n: u32, m: u32) -> Result<u64> {
    validate_degrees(n, m)?;
    let (n, m) = (n as u64, m as u64);
    let prod = (n + m) * (n + 1) * (m + 1);
    debug_assert_eq!(prod % 2, 0);
    Ok(2 + prod / 2)
}

/// `1 + (n+m-2)(n+1)(m+1)/2`, the total homogeneity degree `Σ (i+j-1)` of the
/// rows of the Jacobi matrix of the power-sum system.
pub fn alpha_inverse(n: u32, m: u32) -> Result<u64> {
    validate_degrees(n, m)?;
    let (n, m) = (n as u64, m as u64);
    let prod = (n + m - 2) * (n + 1) * (m + 1);
    debug_assert_eq!(prod % 2, 0);
    Ok(1 + prod / 2)
}

/// Divergence test for `θ_k`: true when `4k ≤ critical_threshold(n, m)`.
pub fn is_divergent(n: u32, m: u32, k: u32) -> Result<bool> {
    Ok(4 * k as u64 <= critical_threshold(n, m)?)
}

/// Dense coefficient vector over the admissible monomials, in graded order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoeffVector(Vec<f64>);

impl CoeffVector {
    pub fn zeros(len: usize) -> Self {
        CoeffVector(vec![0.0; len])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        CoeffVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

impl std::ops::Index<usize> for CoeffVector {
    type Output = f64;
    fn index(&self, idx: usize) -> &f64 {
        &self.0[idx]
    }
}

impl std::ops::IndexMut<usize> for CoeffVector {
    fn index_mut(&mut self, idx: usize) -> &mut f64 {
        &mut self.0[idx]
    }
}

/// Polynomial `F(x,y) = Σ α_ij x^i y^j` with `i ≤ n`, `j ≤ m`, no constant term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyFile", into = "PolyFile")]
pub struct PolySpec {
    n: u32,
    m: u32,
    coeffs: CoeffVector,
    basis: Vec<MonomialIndex>,
}

impl PolySpec {
    pub fn zero(n: u32, m: u32) -> Result<Self> {
        let basis = monomials(n, m)?;
        Ok(PolySpec {
            n,
            m,
            coeffs: CoeffVector::zeros(basis.len()),
            basis,
        })
    }

    /// Build from a dense vector in graded order.
    pub fn from_coeffs(n: u32, m: u32, coeffs: CoeffVector) -> Result<Self> {
        let basis = monomials(n, m)?;
        if coeffs.len() != basis.len() {
            return Err(Error::invalid(format!(
                "expected {} coefficients for (n, m) = ({n}, {m}), got {}",
                basis.len(),
                coeffs.len()
            )));
        }
        Ok(PolySpec { n, m, coeffs, basis })
    }

    /// Build from sparse `(i, j, value)` terms; unspecified coefficients are zero.
    pub fn from_terms(n: u32, m: u32, terms: &[(u32, u32, f64)]) -> Result<Self> {
        let mut poly = PolySpec::zero(n, m)?;
        for &(i, j, v) in terms {
            poly.set(i, j, v)?;
        }
        Ok(poly)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `N = (n+1)(m+1) - 1`.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[MonomialIndex] {
        &self.basis
    }

    pub fn coeffs(&self) -> &CoeffVector {
        &self.coeffs
    }

    pub fn position(&self, i: u32, j: u32) -> Option<usize> {
        position(self.n, self.m, i, j)
    }

    pub fn get(&self, i: u32, j: u32) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.coeffs[p])
    }

    pub fn set(&mut self, i: u32, j: u32, value: f64) -> Result<()> {
        if i == 0 && j == 0 {
            return Err(Error::invalid("the constant term (0,0) is not a coefficient"));
        }
        let p = self.position(i, j).ok_or_else(|| {
            Error::invalid(format!(
                "monomial ({i},{j}) outside degree bounds (n, m) = ({}, {})",
                self.n, self.m
            ))
        })?;
        self.coeffs[p] = value;
        Ok(())
    }

    /// Coefficients on the full `(n+1) × (m+1)` grid, row-major in `i`,
    /// with a zero at `(0,0)`.
    pub fn dense_grid(&self) -> Vec<f64> {
        let w = (self.m + 1) as usize;
        let mut grid = vec![0.0; (self.n as usize + 1) * w];
        for (idx, mono) in self.basis.iter().enumerate() {
            grid[mono.i as usize * w + mono.j as usize] = self.coeffs[idx];
        }
        grid
    }

    /// Negated polynomial `-F`.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.as_mut_slice() {
            *v = -*v;
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let grid = self.dense_grid();
        eval_grid(&grid, self.n, self.m, x, y)
    }

    /// Exact partial derivatives `(∂F/∂x, ∂F/∂y)`.
    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let grid = self.dense_grid();
        grad_grid(&grid, self.n, self.m, x, y)
    }
}

/// Slot of `(i, j)` in the graded order, or `None` if not admissible.
pub fn position(n: u32, m: u32, i: u32, j: u32) -> Option<usize> {
    if i > n || j > m || i + j == 0 {
        return None;
    }
    // Count monomials of total degree < d, then those of degree d with smaller i.
    let d = i + j;
    let mut before = 0usize;
    for e in 1..d {
        before += per_degree(n, m, e);
    }
    let i_lo = d.saturating_sub(m);
    Some(before + (i - i_lo) as usize)
}

fn per_degree(n: u32, m: u32, d: u32) -> usize {
    let lo = d.saturating_sub(m);
    let hi = n.min(d);
    if hi < lo {
        0
    } else {
        (hi - lo + 1) as usize
    }
}

/// Horner evaluation on a dense `(n+1) × (m+1)` grid.
pub(crate) fn eval_grid(grid: &[f64], n: u32, m: u32, x: f64, y: f64) -> f64 {
    let w = (m + 1) as usize;
    let mut acc = 0.0;
    for i in (0..=n as usize).rev() {
        let row = &grid[i * w..(i + 1) * w];
        let mut cy = 0.0;
        for j in (0..w).rev() {
            cy = cy * y + row[j];
        }
        acc = acc * x + cy;
    }
    acc
}

pub(crate) fn grad_grid(grid: &[f64], n: u32, m: u32, x: f64, y: f64) -> (f64, f64) {
    let w = (m + 1) as usize;
    let mut fx = 0.0;
    let mut fy = 0.0;
    for i in (0..=n as usize).rev() {
        let row = &grid[i * w..(i + 1) * w];
        let mut cy = 0.0;
        let mut dcy = 0.0;
        for j in (0..w).rev() {
            dcy = dcy * y + cy;
            cy = cy * y + row[j];
        }
        // fx accumulates Σ i c_i(y) x^{i-1}; Horner over i for the derivative.
        if i > 0 {
            fx = fx * x + i as f64 * cy;
        }
        fy = fy * x + dcy;
    }
    (fx, fy)
}

fn binomial_table(size: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; size + 1]; size + 1];
    for p in 0..=size {
        c[p][0] = 1.0;
        for s in 1..=p {
            c[p][s] = c[p - 1][s - 1] + if s < p { c[p - 1][s] } else { 0.0 };
        }
    }
    c
}

/// Coefficients of `F` re-expanded around a point, `F(x,y) = β₀₀ + Σ β(s) (x-u₁)^{s₁} (y-u₂)^{s₂}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recentered {
    pub n: u32,
    pub m: u32,
    pub u1: f64,
    pub u2: f64,
    /// `β₀₀ = F(u₁, u₂)`.
    pub constant: f64,
    /// `β(s)` for the admissible indices, in graded order.
    pub coeffs: CoeffVector,
}

impl Recentered {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let basis = monomials(self.n, self.m).expect("validated on construction");
        let mut grid = vec![0.0; ((self.n + 1) * (self.m + 1)) as usize];
        let w = (self.m + 1) as usize;
        grid[0] = self.constant;
        for (idx, mono) in basis.iter().enumerate() {
            grid[mono.i as usize * w + mono.j as usize] = self.coeffs[idx];
        }
        eval_grid(&grid, self.n, self.m, x - self.u1, y - self.u2)
    }
}

/// Shift a polynomial with constant term: returns the coefficients of
/// `G(X, Y) = c + F(X + u₁, Y + u₂)` in powers of `X, Y`.
pub fn taylor_shift(
    n: u32,
    m: u32,
    constant: f64,
    coeffs: &CoeffVector,
    u1: f64,
    u2: f64,
) -> Result<Recentered> {
    let basis = monomials(n, m)?;
    if coeffs.len() != basis.len() {
        return Err(Error::invalid(format!(
            "expected {} coefficients, got {}",
            basis.len(),
            coeffs.len()
        )));
    }
    let (nu, mu) = (n as usize, m as usize);
    let w = mu + 1;
    let mut grid = vec![0.0; (nu + 1) * w];
    grid[0] = constant;
    for (idx, mono) in basis.iter().enumerate() {
        grid[mono.i as usize * w + mono.j as usize] = coeffs[idx];
    }
    let binom = binomial_table(nu.max(mu));
    let pow = |u: f64, e: usize| u.powi(e as i32);

    // Shift in x for every fixed y-power, then in y for every fixed x-power.
    let mut tmp = vec![0.0; (nu + 1) * w];
    for q in 0..=mu {
        for s in 0..=nu {
            let mut acc = 0.0;
            for p in s..=nu {
                acc += grid[p * w + q] * binom[p][s] * pow(u1, p - s);
            }
            tmp[s * w + q] = acc;
        }
    }
    let mut out = vec![0.0; (nu + 1) * w];
    for s in 0..=nu {
        for t in 0..=mu {
            let mut acc = 0.0;
            for q in t..=mu {
                acc += tmp[s * w + q] * binom[q][t] * pow(u2, q - t);
            }
            out[s * w + t] = acc;
        }
    }
    let beta = basis
        .iter()
        .map(|mono| out[mono.i as usize * w + mono.j as usize])
        .collect();
    Ok(Recentered {
        n,
        m,
        u1,
        u2,
        constant: out[0],
        coeffs: CoeffVector::from_vec(beta),
    })
}

/// Taylor coefficients of `F` at `(u₁, u₂)`.
pub fn taylor_recenter(f: &PolySpec, u1: f64, u2: f64) -> Recentered {
    taylor_shift(f.n, f.m, 0.0, &f.coeffs, u1, u2).expect("PolySpec is validated")
}

/// Linear map `ᾱ = U β̄` from Taylor coefficients at `(u₁, u₂)` back to the
/// original coefficients.
///
/// Entry `(s,t), (p,q)` is `(-1)^{p-s+q-t} C(p,s) C(q,t) u₁^{p-s} u₂^{q-t}` for
/// `p ≥ s, q ≥ t` and zero otherwise. Rows and columns are stored in
/// *descending* graded order, which makes `U` unit lower triangular.
/// [`RecoeffMatrix::apply`] takes and returns vectors in the usual ascending
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoeffMatrix {
    order: Vec<MonomialIndex>,
    entries: Vec<f64>,
}

pub fn recoeff_matrix(n: u32, m: u32, u1: f64, u2: f64) -> Result<RecoeffMatrix> {
    let mut order = monomials(n, m)?;
    order.reverse();
    let dim = order.len();
    let binom = binomial_table(n.max(m) as usize);
    let mut entries = vec![0.0; dim * dim];
    for (r, row) in order.iter().enumerate() {
        for (c, col) in order.iter().enumerate() {
            if col.i < row.i || col.j < row.j {
                continue;
            }
            let (dp, dq) = (col.i - row.i, col.j - row.j);
            let sign = if (dp + dq) % 2 == 0 { 1.0 } else { -1.0 };
            entries[r * dim + c] = sign
                * binom[col.i as usize][row.i as usize]
                * binom[col.j as usize][row.j as usize]
                * u1.powi(dp as i32)
                * u2.powi(dq as i32);
        }
    }
    Ok(RecoeffMatrix { order, entries })
}

impl RecoeffMatrix {
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    /// Row and column labels, in descending graded order.
    pub fn order(&self) -> &[MonomialIndex] {
        &self.order
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    /// `U β̄`, with `β̄` and the result in ascending graded order.
    pub fn apply(&self, beta: &CoeffVector) -> CoeffVector {
        let dim = self.dim();
        assert_eq!(beta.len(), dim, "coefficient vector length mismatch");
        let mut out = vec![0.0; dim];
        for r in 0..dim {
            let mut acc = 0.0;
            for c in 0..=r {
                acc += self.entries[r * dim + c] * beta[dim - 1 - c];
            }
            out[dim - 1 - r] = acc;
        }
        CoeffVector::from_vec(out)
    }

    /// Zero strict upper triangle and unit diagonal, checked exactly.
    pub fn is_unit_lower_triangular(&self) -> bool {
        let dim = self.dim();
        (0..dim).all(|r| {
            self.entries[r * dim + r] == 1.0
                && self.entries[r * dim + r + 1..(r + 1) * dim].iter().all(|&v| v == 0.0)
        })
    }

    /// Determinant read off the triangular structure: `Some(1.0)` when the
    /// matrix is unit lower triangular, `None` if the structure is broken.
    pub fn structural_determinant(&self) -> Option<f64> {
        self.is_unit_lower_triangular().then_some(1.0)
    }
}

/// On-disk layout: `{"n":…, "m":…, "coeffs":[{"i":…, "j":…, "value":…}, …]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub n: u32,
    pub m: u32,
    #[serde(default)]
    pub coeffs: Vec<PolyTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub i: u32,
    pub j: u32,
    pub value: f64,
}

impl TryFrom<PolyFile> for PolySpec {
    type Error = Error;

    fn try_from(file: PolyFile) -> Result<Self> {
        let mut poly = PolySpec::zero(file.n, file.m)?;
        let mut seen = vec![false; poly.len()];
        for term in &file.coeffs {
            if term.i == 0 && term.j == 0 {
                return Err(Error::invalid("coefficient at (0,0) is not allowed"));
            }
            let p = poly.position(term.i, term.j).ok_or_else(|| {
                Error::invalid(format!(
                    "coefficient ({},{}) outside degree bounds ({}, {})",
                    term.i, term.j, file.n, file.m
                ))
            })?;
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid(format!(
                    "duplicate coefficient ({},{})",
                    term.i, term.j
                )));
            }
            if !term.value.is_finite() {
                return Err(Error::invalid("coefficients must be finite"));
            }
            poly.coeffs[p] = term.value;
        }
        Ok(poly)
    }
}

impl From<PolySpec> for PolyFile {
    fn from(poly: PolySpec) -> Self {
        let coeffs = poly
            .basis
            .iter()
            .zip(poly.coeffs.as_slice())
            .map(|(mono, &value)| PolyTerm {
                i: mono.i,
                j: mono.j,
                value,
            })
            .collect();
        PolyFile {
            n: poly.n,
            m: poly.m,
            coeffs,
        }
    }
}
