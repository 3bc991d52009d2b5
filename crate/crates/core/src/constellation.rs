//! Signal constellations with Gray labels.
//!
//! Points sit on the odd-integer grid (`±1, ±3, ...`) and are not
//! normalized; transmit power is handled by the code's normalization factor.
//! `points[label]` is the point carrying bit pattern `label`, so labels are a
//! bijection by construction.
//!
//! Square QAM labels are `(gray_i << k) | gray_q` where `k = bits / 2` and
//! `gray_*` is the binary-reflected Gray code of the level index counted
//! from the most negative level. Bits are taken MSB-first. For 4QAM this
//! gives `00 -> -1-1j`, `01 -> -1+1j`, `10 -> 1-1j`, `11 -> 1+1j`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
    avg_energy: f64,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn pam_levels(k: usize) -> Vec<f64> {
    (0..k).map(|i| (2 * i) as f64 - (k as f64 - 1.0)).collect()
}

impl Constellation {
    /// BPSK for order 2, square Gray QAM for 4, 16 and 64.
    pub fn qam(order: usize) -> Result<Self> {
        let (name, points, bits) = match order {
            2 => (
                "bpsk".to_string(),
                vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
                1,
            ),
            4 | 16 | 64 => {
                let bits = order.trailing_zeros() as usize;
                let half = bits / 2;
                let side = 1usize << half;
                let levels = pam_levels(side);
                let mut points = vec![Complex64::new(0.0, 0.0); order];
                for i in 0..side {
                    for q in 0..side {
                        let label = (gray(i) << half) | gray(q);
                        points[label] = Complex64::new(levels[i], levels[q]);
                    }
                }
                (format!("qam{order}"), points, bits)
            }
            other => return Err(Error::UnsupportedOrder(other)),
        };
        let avg_energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
        Ok(Self {
            name,
            points,
            bits_per_symbol: bits,
            avg_energy,
        })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        name.parse()
    }

    /// The same labelled points multiplied by `exp(j phi)`.
    pub fn rotated(&self, phi: f64) -> Self {
        let r = Complex64::from_polar(1.0, phi);
        Self {
            name: format!("{}@{phi}", self.name),
            points: self.points.iter().map(|&p| p * r).collect(),
            bits_per_symbol: self.bits_per_symbol,
            avg_energy: self.avg_energy,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn avg_energy(&self) -> f64 {
        self.avg_energy
    }

    /// Label of the point nearest to `z`; ties go to the lower label.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }

    pub fn quantize(&self, z: Complex64) -> Complex64 {
        self.points[self.nearest(z)]
    }

    /// Maps bits (MSB first within each symbol) to points.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol;
        if !bits.len().is_multiple_of(k) {
            return Err(Error::Dimension(format!(
                "{} bits is not a multiple of {k} bits per symbol",
                bits.len()
            )));
        }
        Ok(bits
            .chunks(k)
            .map(|chunk| {
                let label = chunk
                    .iter()
                    .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
                self.points[label]
            })
            .collect())
    }

    /// Hard-decision demapping of each symbol to its nearest point's label.
    pub fn demap(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut bits = Vec::with_capacity(symbols.len() * self.bits_per_symbol);
        for &z in symbols {
            self.push_label_bits(self.nearest(z), &mut bits);
        }
        bits
    }

    pub fn push_label_bits(&self, label: usize, out: &mut Vec<u8>) {
        for b in (0..self.bits_per_symbol).rev() {
            out.push(((label >> b) & 1) as u8);
        }
    }

    /// All pairwise differences `a - b`, deduplicated, zero included.
    /// Values closer than 1e-9 are merged.
    pub fn difference_set(&self) -> Vec<Complex64> {
        let key = |z: Complex64| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64);
        let mut seen = std::collections::BTreeMap::new();
        for a in &self.points {
            for b in &self.points {
                let d = a - b;
                seen.entry(key(d)).or_insert(d);
            }
        }
        seen.into_values().collect()
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" | "qam2" => Self::qam(2),
            "qam4" | "4qam" | "qpsk" => Self::qam(4),
            "qam16" | "16qam" => Self::qam(16),
            "qam64" | "64qam" => Self::qam(64),
            other => Err(Error::InvalidArgument(format!(
                "unknown constellation {other:?} (expected bpsk, qam4, qam16 or qam64)"
            ))),
        }
    }
}

impl fmt::Debug for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constellation")
            .field("name", &self.name)
            .field("size", &self.points.len())
            .field("avg_energy", &self.avg_energy)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn qam4_points_and_energy() {
        let c = Constellation::qam(4).unwrap();
        assert_eq!(c.size(), 4);
        assert_eq!(c.avg_energy(), 2.0);
        for p in c.points() {
            assert_eq!(p.re.abs(), 1.0);
            assert_eq!(p.im.abs(), 1.0);
        }
        assert_eq!(
            c.modulate(&[0, 0]).unwrap(),
            vec![Complex64::new(-1.0, -1.0)]
        );
        assert_eq!(c.modulate(&[1, 1]).unwrap(), vec![Complex64::new(1.0, 1.0)]);
    }

    #[test]
    fn bpsk_points() {
        let c = Constellation::qam(2).unwrap();
        assert_eq!(
            c.points(),
            &[Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]
        );
        assert_eq!(c.avg_energy(), 1.0);
    }

    #[test]
    fn qam16_grid_and_energy() {
        let c = Constellation::qam(16).unwrap();
        // mean of a^2 + b^2 over a, b in {±1, ±3}
        let levels = [-3.0f64, -1.0, 1.0, 3.0];
        let oracle: f64 = levels
            .iter()
            .flat_map(|a| levels.iter().map(move |b| a * a + b * b))
            .sum::<f64>()
            / 16.0;
        assert_eq!(oracle, 10.0);
        assert_eq!(c.avg_energy(), oracle);
        for p in c.points() {
            assert!(levels.contains(&p.re) && levels.contains(&p.im));
        }
    }

    #[test]
    fn unsupported_order() {
        assert_eq!(
            Constellation::qam(8).unwrap_err(),
            Error::UnsupportedOrder(8)
        );
        assert!(Constellation::by_name("psk8").is_err());
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for order in [4, 16, 64] {
            let c = Constellation::qam(order).unwrap();
            for (la, a) in c.points().iter().enumerate() {
                for (lb, b) in c.points().iter().enumerate() {
                    if ((a - b).norm() - 2.0).abs() < 1e-12 {
                        assert_eq!((la ^ lb).count_ones(), 1, "order {order}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn modulate_edge_cases() {
        let c = Constellation::qam(16).unwrap();
        assert!(c.modulate(&[]).unwrap().is_empty());
        assert!(c.modulate(&[1, 0, 1]).is_err());
    }

    #[test]
    fn difference_sets() {
        let b = Constellation::qam(2).unwrap().difference_set();
        assert_eq!(b.len(), 3);
        for v in [-2.0, 0.0, 2.0] {
            assert!(b.contains(&Complex64::new(v, 0.0)));
        }
        let q = Constellation::qam(4).unwrap();
        let d = q.difference_set();
        // Enumerate the 16 ordered pairs and dedupe by hand.
        let mut oracle: Vec<(i64, i64)> = Vec::new();
        for a in q.points() {
            for c in q.points() {
                let k = ((a - c).re as i64, (a - c).im as i64);
                if !oracle.contains(&k) {
                    oracle.push(k);
                }
            }
        }
        assert_eq!(oracle.len(), 9);
        assert_eq!(d.len(), 9);
        for (re, im) in oracle {
            assert!(d.contains(&Complex64::new(re as f64, im as f64)));
        }
        for order in [2, 4, 16, 64] {
            let c = Constellation::qam(order).unwrap();
            let d = c.difference_set();
            assert!(d.len() <= c.size() * c.size());
            for z in &d {
                assert!(
                    d.contains(&-z),
                    "difference set not symmetric for order {order}"
                );
            }
        }
    }

    #[test]
    fn demap_round_trip_all_labels() {
        for order in [2, 4, 16, 64] {
            let c = Constellation::qam(order).unwrap();
            for label in 0..order {
                let mut bits = Vec::new();
                c.push_label_bits(label, &mut bits);
                let sym = c.modulate(&bits).unwrap();
                assert_eq!(sym[0], c.point(label));
                assert_eq!(c.demap(&sym), bits);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn demap_inverts_modulate_qam16(bits in proptest::collection::vec(0u8..2, 0..64usize).prop_map(|mut v| { v.truncate(v.len() / 4 * 4); v })) {
            let c = Constellation::qam(16).unwrap();
            let syms = c.modulate(&bits).unwrap();
            prop_assert_eq!(c.demap(&syms), bits);
        }
    }
}
