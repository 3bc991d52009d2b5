//! Alamouti-block diagonal-layer space-time code.
//!
//! For `M` transmit antennas (even) and `P` diagonal layers the codeword is
//! the `T x M` matrix
//!
//! ```text
//! B = [  C1    C2  ]
//!     [ -C2*   C1* ]
//! ```
//!
//! where each `C_i` is `(T/2) x (M/2)` and carries `P` rotated layers of
//! `M/2` symbols along its diagonals: entry `j` of layer `p` sits at row
//! `p + j`, column `j`. `T = 2P + M - 2`, so `L = M P` symbols are sent per
//! codeword. Symbol `S_{q + k}` with `q = (i P + p) M/2` feeds layer `p` of
//! `C_{i+1}`.
//!
//! Odd `M` uses the `M + 1` construction with the last column dropped.

use num_complex::Complex64;
use num_rational::Ratio;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::grouping::GroupingScheme;
use crate::numerics::CMat;
use crate::rotation::RotationMatrix;

#[derive(Debug, Clone)]
pub struct CodeSpec {
    m: usize,
    t: usize,
    p: usize,
    rotation: RotationMatrix,
    constellation: Constellation,
}

impl CodeSpec {
    pub fn new(
        m: usize,
        t: usize,
        rotation: RotationMatrix,
        constellation: Constellation,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::CodeParams("M must be at least 1".into()));
        }
        let m_even = m + (m % 2);
        if t < m_even || !(t - m_even).is_multiple_of(2) {
            return Err(Error::CodeParams(format!(
                "T = {t} does not satisfy T = 2P + M - 2 with P >= 1 (M = {m_even})"
            )));
        }
        let p = (t - m_even) / 2 + 1;
        if rotation.dim() != m_even / 2 {
            return Err(Error::CodeParams(format!(
                "rotation has dimension {}, layers need {}",
                rotation.dim(),
                m_even / 2
            )));
        }
        Ok(Self {
            m,
            t,
            p,
            rotation,
            constellation,
        })
    }

    /// Spec with the default rotation for its layer length.
    pub fn with_default_rotation(m: usize, t: usize, constellation: Constellation) -> Result<Self> {
        let m_even = m + (m % 2);
        Self::new(
            m,
            t,
            RotationMatrix::default_for_dim(m_even / 2)?,
            constellation,
        )
    }

    /// Block length for `m` antennas and `p` layers.
    pub fn block_length(m: usize, p: usize) -> usize {
        2 * p + m + (m % 2) - 2
    }

    /// Same code with a different rotation.
    pub fn with_rotation(&self, rotation: RotationMatrix) -> Result<Self> {
        Self::new(self.m, self.t, rotation, self.constellation.clone())
    }

    pub fn with_constellation(&self, constellation: Constellation) -> Self {
        Self {
            constellation,
            ..self.clone()
        }
    }

    /// Transmit antennas actually used.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Antenna count of the underlying even construction.
    pub fn m_even(&self) -> usize {
        self.m + (self.m % 2)
    }

    pub fn half(&self) -> usize {
        self.m_even() / 2
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_odd(&self) -> bool {
        self.m % 2 == 1
    }

    /// Information symbols per codeword.
    pub fn num_symbols(&self) -> usize {
        self.m_even() * self.p
    }

    pub fn rotation(&self) -> &RotationMatrix {
        &self.rotation
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    /// Offset of layer `p` of block `i` (both zero-based) in the symbol vector.
    pub fn layer_offset(&self, i: usize, p: usize) -> usize {
        (i * self.p + p) * self.half()
    }

    /// `Theta s` for every layer, in `(i, p)` order with `i` major.
    pub fn rotated_layers(&self, s: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        self.check_len(s)?;
        let h = self.half();
        Ok((0..2)
            .flat_map(|i| (0..self.p).map(move |p| (i, p)))
            .map(|(i, p)| {
                let q = self.layer_offset(i, p);
                self.rotation.apply(&s[q..q + h])
            })
            .collect())
    }

    fn check_len(&self, s: &[Complex64]) -> Result<()> {
        if s.len() != self.num_symbols() {
            return Err(Error::Dimension(format!(
                "code carries {} symbols, got {}",
                self.num_symbols(),
                s.len()
            )));
        }
        Ok(())
    }

    /// Builds the `T x M` codeword for the symbol vector `s`.
    pub fn encode(&self, s: &[Complex64]) -> Result<Codeword> {
        let layers = self.rotated_layers(s)?;
        let h = self.half();
        let rows = self.t / 2;
        let m_even = self.m_even();
        let mut b = CMat::zeros(self.t, m_even);
        for i in 0..2 {
            for p in 0..self.p {
                let x = &layers[i * self.p + p];
                for (j, &v) in x.iter().enumerate() {
                    let r = p + j;
                    if i == 0 {
                        // C1: top-left, conj in bottom-right
                        b[(r, j)] = v;
                        b[(rows + r, h + j)] = v.conj();
                    } else {
                        // C2: top-right, -conj in bottom-left
                        b[(r, h + j)] = v;
                        b[(rows + r, j)] = -v.conj();
                    }
                }
            }
        }
        if self.is_odd() {
            let keep: Vec<usize> = (0..self.m).collect();
            b = b.select_cols(&keep);
        }
        Ok(Codeword { mat: b })
    }

    /// `M P / (2P + M - 2)` with the true antenna count in the numerator.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new((self.m * self.p) as u64, self.t as u64)
    }

    /// Information symbols per channel use, `L / T`.
    pub fn symbol_rate(&self) -> Ratio<u64> {
        Ratio::new(self.num_symbols() as u64, self.t as u64)
    }

    /// Average transmitted energy per symbol period, `E ||B||_F^2 / T`.
    ///
    /// With a unitary rotation every layer keeps its energy and each symbol
    /// appears twice (once conjugated), giving `2 M P E_s / T`. For odd `M`
    /// the dropped column carries `2 P E_s`, so `M` here is the true count.
    pub fn normalization_mu(&self) -> f64 {
        2.0 * (self.m * self.p) as f64 * self.constellation.avg_energy() / self.t as f64
    }

    /// Codeword layout in terms of rotated layer entries, recovered by
    /// encoding one rotated entry at a time. Entry `(r, c)` is `"0"` or a
    /// token such as `"X2,1"`, `"-X3,2*"` (layers numbered `i P + p + 1`).
    pub fn symbolic_layout(&self) -> Result<Vec<Vec<String>>> {
        let h = self.half();
        let (t, m) = (self.t, self.m);
        let mut cells = vec![vec![Vec::<String>::new(); m]; t];
        let theta_h = self.rotation.mat().adjoint();
        let z = Complex64::new(0.3, 0.7);
        for layer in 0..2 * self.p {
            for j in 0..h {
                let mut x = vec![Complex64::new(0.0, 0.0); h];
                x[j] = z;
                let mut s = vec![Complex64::new(0.0, 0.0); self.num_symbols()];
                s[layer * h..(layer + 1) * h].copy_from_slice(&theta_h.mul_vec(&x)?);
                let b = self.encode(&s)?;
                let name = format!("X{},{}", layer + 1, j + 1);
                for (r, row) in cells.iter_mut().enumerate() {
                    for (c, cell) in row.iter_mut().enumerate() {
                        let v = b.mat[(r, c)];
                        if v.norm() < 1e-9 {
                            continue;
                        }
                        let token = [(z, ""), (-z, "-")]
                            .iter()
                            .find_map(|&(w, sign)| {
                                ((v - w).norm() < 1e-9).then(|| format!("{sign}{name}"))
                            })
                            .or_else(|| {
                                [(z.conj(), ""), (-z.conj(), "-")]
                                    .iter()
                                    .find_map(|&(w, sign)| {
                                        ((v - w).norm() < 1e-9).then(|| format!("{sign}{name}*"))
                                    })
                            })
                            .unwrap_or_else(|| format!("({v})*{name}"));
                        cell.push(token);
                    }
                }
            }
        }
        Ok(cells
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|c| {
                        if c.is_empty() {
                            "0".to_string()
                        } else {
                            c.join(" + ")
                        }
                    })
                    .collect()
            })
            .collect())
    }

    /// `2P` consecutive groups of `M/2` symbols.
    pub fn default_grouping(&self) -> GroupingScheme {
        GroupingScheme::consecutive(2 * self.p, self.half())
    }
}

/// A `T x M` codeword matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub mat: CMat,
}

impl Codeword {
    /// Checks the lower half equals `[-C2*, C1*]` of the upper half.
    /// Only meaningful for even `M`.
    pub fn has_alamouti_structure(&self, tol: f64) -> bool {
        let (t, m) = self.mat.shape();
        if t % 2 != 0 || m % 2 != 0 {
            return false;
        }
        let (rows, h) = (t / 2, m / 2);
        (0..rows).all(|r| {
            (0..h).all(|j| {
                let c1 = self.mat[(r, j)];
                let c2 = self.mat[(r, h + j)];
                (self.mat[(rows + r, j)] + c2.conj()).norm() <= tol
                    && (self.mat[(rows + r, h + j)] - c1.conj()).norm() <= tol
            })
        })
    }

    pub fn energy(&self) -> f64 {
        self.mat.frobenius_norm().powi(2)
    }

    /// Positions of entries with magnitude above `tol`.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize)> {
        let (t, m) = self.mat.shape();
        (0..t)
            .flat_map(|r| (0..m).map(move |c| (r, c)))
            .filter(|&(r, c)| self.mat[(r, c)].norm() > tol)
            .collect()
    }
}
