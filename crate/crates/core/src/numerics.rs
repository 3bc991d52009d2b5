//! Dense complex matrix kernel.
//!
//! Everything the coding, detection and certification layers need lives
//! here: products, adjoints, a one-sided Jacobi SVD, the Moore-Penrose
//! pseudo-inverse, numerical rank, and orthogonal projectors built from a
//! greedily pivoted orthonormal basis.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative tolerance for rank decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

pub type C64 = Complex64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Column vector from a slice.
    pub fn column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_col(&mut self, c: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows, "column length mismatch");
        for (r, &x) in v.iter().enumerate() {
            self[(r, c)] = x;
        }
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |r, k| self[(r, cols[k])])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, |k, c| self[(rows[k], c)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "shape {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul(self, other)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// `self^H v` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "adjoint of {}x{} matrix times length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (r, &x) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * x;
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:>9.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn matmul(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = CMat::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, &bkj) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

pub fn vec_norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    vec_norm_sqr(v).sqrt()
}

/// `sum_i conj(a_i) b_i`
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Thin singular value decomposition `a = U diag(s) V^H`.
///
/// `u` is rows x k, `v` is cols x k with k = min(rows, cols); singular
/// values are sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

/// One-sided Jacobi SVD (Hestenes). Accurate to working precision for the
/// small dense matrices used throughout the crate.
pub fn svd(a: &CMat) -> Svd {
    if a.rows < a.cols {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let (m, n) = a.shape();
    // Work column-major for cache-friendly rotations.
    let mut w: Vec<Vec<C64>> = (0..n).map(|c| a.col(c)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|c| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[c] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = vec_norm_sqr(&w[p]);
                let beta = vec_norm_sqr(&w[q]);
                let gamma = dot_conj(&w[p], &w[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotation that zeroes the (p, q) entry of the Gram matrix.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s, phase);
                rotate_pair(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|c| vec_norm(c)).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut u = CMat::zeros(m, n);
    let mut vm = CMat::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &idx) in order.iter().enumerate() {
        let sigma = norms[idx];
        s.push(sigma);
        if sigma > 0.0 {
            for r in 0..m {
                u[(r, k)] = w[idx][r] / sigma;
            }
        }
        for r in 0..n {
            vm[(r, k)] = v[idx][r];
        }
    }
    Svd { u, s, v: vm }
}

// Columns p, q <- [p, q] * [[c, s*phase], [-s*conj(phase), c]] applied so the
// rotated pair becomes orthogonal.
fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = xp * c - yq * phase.conj() * s;
        *y = xp * phase * s + yq * c;
    }
}

/// Singular values in decreasing order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    svd(a).s
}

/// Number of singular values above `tol` times the largest one.
pub fn rank(a: &CMat, tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > tol * smax).count(),
        _ => 0,
    }
}

/// Moore-Penrose pseudo-inverse; singular values at or below `tol` times the
/// largest are treated as zero.
pub fn pinv(a: &CMat, tol: f64) -> CMat {
    let Svd { u, s, v } = svd(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(a.cols, a.rows);
    for (k, &sigma) in s.iter().enumerate() {
        if smax == 0.0 || sigma <= tol * smax {
            continue;
        }
        let inv = 1.0 / sigma;
        for i in 0..a.cols {
            let vik = v[(i, k)] * inv;
            for j in 0..a.rows {
                out[(i, j)] += vik * u[(j, k)].conj();
            }
        }
    }
    out
}

/// Least-squares solution of `a x = b` (minimum norm if rank deficient).
pub fn least_squares(a: &CMat, b: &[C64], tol: f64) -> Result<Vec<C64>> {
    if b.len() != a.rows {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    pinv(a, tol).mul_vec(b)
}

/// Orthonormal basis (as columns) of the span of `a`'s columns, built by
/// modified Gram-Schmidt with greedy pivoting on the residual norm.
///
/// Also returns the selected column indices, which form a maximal linearly
/// independent subset of `a`'s columns. Columns whose residual falls to
/// `tol` times the largest column norm or below are considered dependent.
pub fn pivoted_basis(a: &CMat, tol: f64) -> (CMat, Vec<usize>) {
    let (m, n) = a.shape();
    let mut resid: Vec<Vec<C64>> = (0..n).map(|c| a.col(c)).collect();
    let scale = resid.iter().map(|c| vec_norm(c)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut chosen = Vec::new();
    let mut remaining: Vec<usize> = (0..n).collect();
    if scale == 0.0 {
        return (CMat::zeros(m, 0), chosen);
    }
    while !remaining.is_empty() && basis.len() < m {
        let (pos, best_norm) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &c)| (pos, vec_norm(&resid[c])))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_norm <= tol * scale {
            break;
        }
        let col = remaining.remove(pos);
        let mut q = resid[col].clone();
        // Second pass against the accepted basis keeps q orthogonal to
        // working precision.
        for b in &basis {
            let proj = dot_conj(b, &q);
            for (qi, bi) in q.iter_mut().zip(b) {
                *qi -= proj * bi;
            }
        }
        let nq = vec_norm(&q);
        if nq <= tol * scale {
            continue;
        }
        for qi in q.iter_mut() {
            *qi /= nq;
        }
        for &c in &remaining {
            let proj = dot_conj(&q, &resid[c]);
            for (ri, qi) in resid[c].iter_mut().zip(&q) {
                *ri -= proj * qi;
            }
        }
        basis.push(q);
        chosen.push(col);
    }
    let mut u = CMat::zeros(m, basis.len());
    for (k, b) in basis.iter().enumerate() {
        u.set_col(k, b);
    }
    (u, chosen)
}

/// Orthogonal projector onto the complement of the column space of `a`:
/// `I - A pinv(A)` where `A` is a maximal independent column subset.
pub fn null_projector(a: &CMat, tol: f64) -> CMat {
    let m = a.rows;
    let (u, _) = pivoted_basis(a, tol);
    let mut q = CMat::identity(m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..u.cols() {
                acc += u[(i, k)] * u[(j, k)].conj();
            }
            q[(i, j)] -= acc;
        }
    }
    q
}

/// Applies `I - U U^H` to `v` in place, for `u` with orthonormal columns.
pub fn project_out(u: &CMat, v: &mut [C64]) {
    for k in 0..u.cols() {
        let mut proj = C64::new(0.0, 0.0);
        for (r, x) in v.iter().enumerate() {
            proj += u[(r, k)].conj() * x;
        }
        if proj == C64::new(0.0, 0.0) {
            continue;
        }
        for (r, x) in v.iter_mut().enumerate() {
            *x -= u[(r, k)] * proj;
        }
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &CMat) -> Result<C64> {
    if a.rows != a.cols {
        return Err(Error::Dimension(format!(
            "determinant of non-square {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut d = C64::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[(i, k)].norm().partial_cmp(&m[(j, k)].norm()).unwrap())
            .unwrap_or(k);
        if m[(piv, k)].norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        if piv != k {
            for c in 0..n {
                let tmp = m[(k, c)];
                m[(k, c)] = m[(piv, c)];
                m[(piv, c)] = tmp;
            }
            d = -d;
        }
        let pivot = m[(k, k)];
        d *= pivot;
        for i in (k + 1)..n {
            let f = m[(i, k)] / pivot;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for c in k..n {
                let mkc = m[(k, c)];
                m[(i, c)] -= f * mkc;
            }
        }
    }
    Ok(d)
}

/// Solves `a x = b` for square nonsingular `a` by partial-pivot elimination.
pub fn solve(a: &CMat, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::Dimension(format!(
            "solve needs a square matrix and matching right-hand side, got {}x{} and {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.max_abs();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[(i, k)].norm().partial_cmp(&m[(j, k)].norm()).unwrap())
            .unwrap_or(k);
        if m[(piv, k)].norm() <= f64::EPSILON * scale {
            return Err(Error::RankDeficient(format!(
                "singular system at pivot {k}"
            )));
        }
        if piv != k {
            for c in 0..n {
                let tmp = m[(k, c)];
                m[(k, c)] = m[(piv, c)];
                m[(piv, c)] = tmp;
            }
            x.swap(k, piv);
        }
        let pivot = m[(k, k)];
        for i in (k + 1)..n {
            let f = m[(i, k)] / pivot;
            for c in k..n {
                let mkc = m[(k, c)];
                m[(i, c)] -= f * mkc;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for c in (k + 1)..n {
            acc -= m[(k, c)] * x[c];
        }
        x[k] = acc / m[(k, k)];
    }
    Ok(x)
}

/// Householder QR returning `R` (upper trapezoidal, min(m, n) x n) and
/// `Q^H b` truncated to the same number of rows.
pub fn qr_reduce(a: &CMat, b: &[C64]) -> (CMat, Vec<C64>) {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut y = b.to_vec();
    let k_max = m.min(n);
    for k in 0..k_max {
        let norm_x: f64 = (k..m).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vn = vec_norm_sqr(&v);
        if vn == 0.0 {
            continue;
        }
        for c in k..n {
            let mut d = C64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                d += vi.conj() * r[(k + idx, c)];
            }
            let f = d * 2.0 / vn;
            for (idx, vi) in v.iter().enumerate() {
                r[(k + idx, c)] -= vi * f;
            }
        }
        let mut d = C64::new(0.0, 0.0);
        for (idx, vi) in v.iter().enumerate() {
            d += vi.conj() * y[k + idx];
        }
        let f = d * 2.0 / vn;
        for (idx, vi) in v.iter().enumerate() {
            y[k + idx] -= vi * f;
        }
    }
    let rr = CMat::from_fn(k_max, n, |i, j| {
        if j >= i {
            r[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    y.truncate(k_max);
    (rr, y)
}
