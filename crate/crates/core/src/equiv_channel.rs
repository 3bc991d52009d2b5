//! Equivalent channel of the layered Alamouti-block code.
//!
//! After the receive-side transform (keep the first `T/2` samples of each
//! antenna, replace the last `T/2` by their negated conjugates) the matrix
//! model `Y = B(s) H + W` becomes the linear model `y = Hc s + w` with
//! `Hc` of size `T N x L`. Rows are stacked antenna-major.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grouping::GroupingScheme;
use crate::numerics::CMat;
use crate::stbc::CodeSpec;

/// `M x N` flat-fading channel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: CMat,
}

impl ChannelRealization {
    pub fn new(h: CMat) -> Result<Self> {
        if h.as_slice()
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidArgument(
                "channel entries must be finite".into(),
            ));
        }
        Ok(Self { h })
    }

    pub fn tx(&self) -> usize {
        self.h.rows()
    }

    pub fn rx(&self) -> usize {
        self.h.cols()
    }

    /// Single receive antenna channel from a coefficient vector.
    pub fn miso(h: &[Complex64]) -> Self {
        Self { h: CMat::column(h) }
    }
}

/// Receive-side transform applied before detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preprocess {
    /// Per antenna: keep the first `half_rows` samples, replace the rest by
    /// their negated conjugates.
    ConjugateLowerHalf { half_rows: usize },
}

#[derive(Debug, Clone)]
pub struct EquivalentChannel {
    pub hc: CMat,
    pub grouping: GroupingScheme,
    pub preprocess: Preprocess,
}

impl EquivalentChannel {
    pub fn num_symbols(&self) -> usize {
        self.hc.cols()
    }

    pub fn rows(&self) -> usize {
        self.hc.rows()
    }
}

fn check_channel(spec: &CodeSpec, ch: &ChannelRealization) -> Result<()> {
    if ch.tx() != spec.m() {
        return Err(Error::Dimension(format!(
            "channel has {} transmit rows, code uses {} antennas",
            ch.tx(),
            spec.m()
        )));
    }
    if ch.rx() == 0 {
        return Err(Error::Dimension("channel has no receive antennas".into()));
    }
    Ok(())
}

/// Closed-form construction: per receive antenna, block `(i, p)` of the
/// upper half is `diag(h_i) Theta` shifted down by `p` rows; the lower half
/// carries `conj(h_1)` on the second-block layers and `-conj(h_2)` on the
/// first-block layers.
pub fn build_structured(spec: &CodeSpec, ch: &ChannelRealization) -> Result<EquivalentChannel> {
    check_channel(spec, ch)?;
    let n_rx = ch.rx();
    let t = spec.t();
    let rows = t / 2;
    let half = spec.half();
    let theta = spec.rotation().mat();
    let mut hc = CMat::zeros(t * n_rx, spec.num_symbols());
    for n in 0..n_rx {
        // virtual (M+1)-th antenna of the odd construction has zero gain
        let coef = |a: usize| -> Complex64 {
            if a < spec.m() {
                ch.h[(a, n)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let base = n * t;
        for i in 0..2 {
            for p in 0..spec.p() {
                let q = spec.layer_offset(i, p);
                for j in 0..half {
                    let h_upper = coef(i * half + j);
                    let h_lower = if i == 0 {
                        -coef(half + j).conj()
                    } else {
                        coef(j).conj()
                    };
                    for k in 0..half {
                        let th = theta[(j, k)];
                        hc[(base + p + j, q + k)] = h_upper * th;
                        hc[(base + rows + p + j, q + k)] = h_lower * th;
                    }
                }
            }
        }
    }
    Ok(EquivalentChannel {
        hc,
        grouping: spec.default_grouping(),
        preprocess: Preprocess::ConjugateLowerHalf { half_rows: rows },
    })
}

/// Stacks `[y_1; -conj(y_2)]` for every receive antenna.
pub fn preprocess_rx(spec: &CodeSpec, y: &CMat) -> Result<Vec<Complex64>> {
    let t = spec.t();
    if y.rows() != t {
        return Err(Error::Dimension(format!(
            "received block has {} rows, code has T = {t}",
            y.rows()
        )));
    }
    let rows = t / 2;
    let mut out = Vec::with_capacity(t * y.cols());
    for n in 0..y.cols() {
        for r in 0..t {
            let v = y[(r, n)];
            out.push(if r < rows { v } else { -v.conj() });
        }
    }
    Ok(out)
}

/// Column-by-column oracle: column `l` is the preprocessed noiseless
/// response to the `l`-th unit symbol vector.
pub fn build_probe(spec: &CodeSpec, ch: &ChannelRealization) -> Result<EquivalentChannel> {
    check_channel(spec, ch)?;
    let l = spec.num_symbols();
    let mut hc = CMat::zeros(spec.t() * ch.rx(), l);
    let mut e = vec![Complex64::new(0.0, 0.0); l];
    for col in 0..l {
        e[col] = Complex64::new(1.0, 0.0);
        let y = spec.encode(&e)?.mat.matmul(&ch.h)?;
        hc.set_col(col, &preprocess_rx(spec, &y)?);
        e[col] = Complex64::new(0.0, 0.0);
    }
    Ok(EquivalentChannel {
        hc,
        grouping: spec.default_grouping(),
        preprocess: Preprocess::ConjugateLowerHalf {
            half_rows: spec.t() / 2,
        },
    })
}

/// Column blocks `G_p` of `ec.hc` for each group of `g`, in group order.
pub fn group_columns(ec: &EquivalentChannel, g: &GroupingScheme) -> Result<Vec<CMat>> {
    if g.num_symbols() != ec.num_symbols() {
        return Err(Error::Grouping(format!(
            "grouping covers {} symbols, channel has {} columns",
            g.num_symbols(),
            ec.num_symbols()
        )));
    }
    // re-validate in case the scheme was built for another size
    GroupingScheme::new(g.groups().to_vec(), ec.num_symbols())?;
    Ok(g.groups()
        .iter()
        .map(|idx| ec.hc.select_cols(idx))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;
    use crate::numerics::{c64, matmul};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(m: usize, t: usize) -> CodeSpec {
        CodeSpec::with_default_rotation(m, t, Constellation::qam(4).unwrap()).unwrap()
    }

    fn random_channel(rng: &mut impl Rng, m: usize, n: usize) -> ChannelRealization {
        ChannelRealization::new(CMat::from_fn(m, n, |_, _| {
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }))
        .unwrap()
    }

    #[test]
    fn zero_channel_gives_zero_matrix() {
        let s = spec(4, 6);
        let ch = ChannelRealization::new(CMat::zeros(4, 2)).unwrap();
        assert_eq!(build_structured(&s, &ch).unwrap().hc, CMat::zeros(12, 8));
        assert_eq!(build_probe(&s, &ch).unwrap().hc, CMat::zeros(12, 8));
    }

    #[test]
    fn dimension_errors() {
        let s = spec(4, 6);
        let ch = ChannelRealization::new(CMat::zeros(3, 1)).unwrap();
        assert!(build_structured(&s, &ch).is_err());
        assert!(preprocess_rx(&s, &CMat::zeros(5, 1)).is_err());
    }

    #[test]
    fn preprocess_lower_half() {
        let s = spec(4, 6);
        let mut y = CMat::zeros(6, 1);
        for r in 0..3 {
            y[(r, 0)] = c64(r as f64 + 1.0, 1.0);
        }
        let v = preprocess_rx(&s, &y).unwrap();
        assert!(v[3..].iter().all(|z| *z == c64(0.0, 0.0)));
        // conjugate-and-negate twice is the identity
        let mut y2 = CMat::zeros(6, 1);
        for r in 0..6 {
            y2[(r, 0)] = c64(r as f64, -2.0 * r as f64);
        }
        let once = preprocess_rx(&s, &y2).unwrap();
        let twice = preprocess_rx(&s, &CMat::column(&once)).unwrap();
        assert_eq!(twice, y2.col(0));
    }

    #[test]
    fn probe_matches_structured_with_complex_rotation() {
        // (8,10,2) uses a complex cyclotomic rotation
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (m, t, n) in [(8, 10, 2), (4, 6, 3), (3, 6, 2), (5, 8, 1)] {
            let s = spec(m, t);
            for _ in 0..10 {
                let ch = random_channel(&mut rng, m, n);
                let a = build_structured(&s, &ch).unwrap().hc;
                let b = build_probe(&s, &ch).unwrap().hc;
                assert!(a.sub(&b).unwrap().max_abs() < 1e-12, "({m},{t}) N={n}");
            }
        }
    }

    #[test]
    fn central_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let s = spec(4, 6);
        for _ in 0..50 {
            let ch = random_channel(&mut rng, 4, 2);
            let sym: Vec<Complex64> = (0..8).map(|_| c64(rng.gen(), rng.gen())).collect();
            let y = matmul(&s.encode(&sym).unwrap().mat, &ch.h).unwrap();
            let lhs = preprocess_rx(&s, &y).unwrap();
            let rhs = build_structured(&s, &ch).unwrap().hc.mul_vec(&sym).unwrap();
            let err: f64 = lhs
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-10);
        }
    }

    #[test]
    fn group_columns_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let s = spec(4, 6);
        let ec = build_structured(&s, &random_channel(&mut rng, 4, 1)).unwrap();
        let whole = group_columns(&ec, &GroupingScheme::single(8)).unwrap();
        assert_eq!(whole, vec![ec.hc.clone()]);
        let singles = group_columns(&ec, &GroupingScheme::singletons(8)).unwrap();
        assert_eq!(singles.len(), 8);
        assert!(singles.iter().all(|g| g.shape() == (6, 1)));
        let blocks = group_columns(&ec, &s.default_grouping()).unwrap();
        assert_eq!(blocks.len(), 4);
        for (p, g) in blocks.iter().enumerate() {
            assert_eq!(*g, ec.hc.select_cols(&[2 * p, 2 * p + 1]));
        }
        assert!(group_columns(&ec, &GroupingScheme::single(6)).is_err());
    }

    #[test]
    fn alamouti_partner_groups_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for (m, t) in [(4, 6), (8, 10)] {
            let s = spec(m, t);
            for n in [1, 3] {
                let ec = build_structured(&s, &random_channel(&mut rng, m, n)).unwrap();
                let g = group_columns(&ec, &s.default_grouping()).unwrap();
                for (a, b) in [(0, 2), (1, 3)] {
                    let cross = matmul(&g[a].adjoint(), &g[b]).unwrap();
                    assert!(
                        cross.max_abs() < 1e-10,
                        "({m},{t}) N={n}: G{} vs G{}",
                        a + 1,
                        b + 1
                    );
                }
            }
        }
    }
}
