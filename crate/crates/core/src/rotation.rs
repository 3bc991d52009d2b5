//! Constellation rotations for signal-space diversity.
//!
//! Two families: the 2x2 real Givens rotation and the Vandermonde-type
//! cyclotomic matrix whose row `i` is `zeta_K^{k (1 + n_i m)}` for
//! `k = 1..dim`, with `K = m * dim` and `n_1 = 0`. Cyclotomic matrices are
//! scaled by `1/sqrt(dim)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::numerics::{matmul, CMat};

/// Default cap on `|delta|^dim` in [`min_product_component`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Angle of the default 2x2 rotation.
pub const DEFAULT_GIVENS_THETA: f64 = 1.02;

#[derive(Debug, Clone, PartialEq)]
pub enum RotationKind {
    Givens { theta: f64 },
    Cyclotomic { m: u64, n_list: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    dim: usize,
    mat: CMat,
    kind: RotationKind,
}

impl RotationMatrix {
    /// `[[cos t, sin t], [-sin t, cos t]]`
    pub fn givens(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            dim: 2,
            mat: CMat::from_real_rows(&[&[c, s], &[-s, c]]),
            kind: RotationKind::Givens { theta },
        }
    }

    /// Cyclotomic rotation of size `dim` with `K = m * dim`.
    ///
    /// `n_list` holds `n_2, ..., n_dim`; every multiplier `1 + n_i m` must be
    /// coprime with `K` and the multipliers must be distinct modulo `K`.
    pub fn cyclotomic(dim: usize, m: u64, n_list: &[i64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Rotation("dimension must be at least 1".into()));
        }
        if n_list.len() != dim - 1 {
            return Err(Error::Rotation(format!(
                "dimension {dim} needs {} entries in n_list, got {}",
                dim - 1,
                n_list.len()
            )));
        }
        if m == 0 {
            return Err(Error::Rotation("m must be positive (K = m * dim)".into()));
        }
        let k = m
            .checked_mul(dim as u64)
            .filter(|&k| k <= i64::MAX as u64)
            .ok_or_else(|| Error::Rotation("K = m * dim overflows".into()))? as i64;

        let mut multipliers = vec![1i64];
        for &n in n_list {
            let mult = n
                .checked_mul(m as i64)
                .and_then(|x| x.checked_add(1))
                .ok_or_else(|| Error::Rotation(format!("1 + {n}*{m} overflows")))?;
            if mult.gcd(&k) != 1 {
                return Err(Error::Rotation(format!(
                    "1 + n*m = {mult} (n = {n}) is not coprime with K = {k}"
                )));
            }
            multipliers.push(mult);
        }
        let mut residues: Vec<i64> = multipliers.iter().map(|x| x.rem_euclid(k)).collect();
        residues.sort_unstable();
        residues.dedup();
        if residues.len() != dim {
            return Err(Error::Rotation(format!(
                "row multipliers {multipliers:?} are not distinct modulo K = {k}"
            )));
        }

        let scale = 1.0 / (dim as f64).sqrt();
        let mat = CMat::from_fn(dim, dim, |i, col| {
            let e = ((col as i64 + 1) * multipliers[i]).rem_euclid(k);
            Complex64::from_polar(scale, 2.0 * PI * e as f64 / k as f64)
        });
        Ok(Self {
            dim,
            mat,
            kind: RotationKind::Cyclotomic {
                m,
                n_list: n_list.to_vec(),
            },
        })
    }

    /// Shipped default for layers of length `dim`: the identity-like
    /// `[1]` for 1, Givens(1.02) for 2, and for other powers of two the
    /// cyclotomic matrix with `m = 4`, `n_list = 1..dim-1` (`K = 4 dim`).
    /// Any other size uses `m = dim`, `n_list = 1..dim-1` (`K = dim^2`).
    pub fn default_for_dim(dim: usize) -> Result<Self> {
        match dim {
            1 => Self::cyclotomic(1, 1, &[]),
            2 => Ok(Self::givens(DEFAULT_GIVENS_THETA)),
            d if d.is_power_of_two() => {
                let n_list: Vec<i64> = (1..d as i64).collect();
                Self::cyclotomic(d, 4, &n_list)
            }
            d => {
                let n_list: Vec<i64> = (1..d as i64).collect();
                Self::cyclotomic(d, d as u64, &n_list)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn kind(&self) -> &RotationKind {
        &self.kind
    }

    /// Largest entry of `|R R^H - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let g = matmul(&self.mat, &self.mat.adjoint()).expect("square");
        g.sub(&CMat::identity(self.dim))
            .expect("same shape")
            .max_abs()
    }

    /// `R x` for a layer of length `dim`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.mat
            .mul_vec(x)
            .expect("layer length equals rotation dimension")
    }
}

/// Smallest `|sum_k a_k theta_{j,k}|` over rows `j` and nonzero
/// `a in delta^dim`.
///
/// A positive value certifies that every rotated nonzero difference vector
/// has all components nonzero.
pub fn min_product_component(rot: &RotationMatrix, delta: &[Complex64], cap: u64) -> Result<f64> {
    let dim = rot.dim();
    let count = (delta.len() as u64)
        .checked_pow(dim as u32)
        .filter(|&c| c <= cap)
        .ok_or_else(|| {
            Error::Guard(format!(
                "|delta|^dim = {}^{dim} exceeds the cap of {cap}",
                delta.len()
            ))
        })?;
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; dim];
    let mut a = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..count {
        for (ak, &i) in a.iter_mut().zip(&idx) {
            *ak = delta[i];
        }
        if a.iter().any(|z| z.norm() > 0.0) {
            for j in 0..dim {
                let v: Complex64 = rot.mat().row(j).iter().zip(&a).map(|(t, x)| t * x).sum();
                best = best.min(v.norm());
            }
        }
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < delta.len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(best)
}
