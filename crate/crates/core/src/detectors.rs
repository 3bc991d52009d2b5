//! Receivers for the linear model `y = scale * Hc s + w`.
//!
//! Every detector returns hard decisions as points of the constellation.
//! The `*_labels` variants return constellation labels instead, which is
//! what the simulator consumes.
//!
//! Exhaustive searches enumerate candidates as an odometer over label
//! indices with the first symbol most significant, and keep the first
//! strict minimum, so ties resolve to the lowest lexicographic candidate.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::equiv_channel::EquivalentChannel;
use crate::error::{Error, Result};
use crate::grouping::GroupingScheme;
use crate::numerics::{
    pinv, pivoted_basis, project_out, qr_reduce, rank, solve, CMat, DEFAULT_TOL,
};

/// Default limit on `L * log2 |A|` for exhaustive ML.
pub const DEFAULT_ML_GUARD_BITS: u32 = 24;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Ml,
    Zf,
    Mmse,
    Blast,
    Pic,
    PicSic,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::Ml,
        DetectorKind::Zf,
        DetectorKind::Mmse,
        DetectorKind::Blast,
        DetectorKind::Pic,
        DetectorKind::PicSic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Ml => "ml",
            DetectorKind::Zf => "zf",
            DetectorKind::Mmse => "mmse",
            DetectorKind::Blast => "blast",
            DetectorKind::Pic => "pic",
            DetectorKind::PicSic => "pic-sic",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "ml" => Ok(DetectorKind::Ml),
            "zf" => Ok(DetectorKind::Zf),
            "mmse" => Ok(DetectorKind::Mmse),
            "blast" => Ok(DetectorKind::Blast),
            "pic" => Ok(DetectorKind::Pic),
            "pic-sic" | "picsic" => Ok(DetectorKind::PicSic),
            other => Err(Error::InvalidArgument(format!(
                "unknown detector {other:?} (expected ml, zf, mmse, blast, pic or pic-sic)"
            ))),
        }
    }
}

/// How the ML detector searches `A^L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlMethod {
    /// Plain enumeration, subject to the guard.
    Exhaustive,
    /// Exact depth-first branch-and-bound on the triangularized problem.
    Tree,
}

#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    /// Used by PIC and PIC-SIC; `None` means the code's default grouping.
    pub grouping: Option<GroupingScheme>,
    /// Linear SNR `rho`.
    pub snr_rho: f64,
    pub tol: f64,
    pub ml_method: MlMethod,
    pub ml_guard_bits: u32,
    /// Let ZF and BLAST fall back to the minimum-norm pseudo-inverse when
    /// `Hc` has fewer independent columns than symbols.
    pub allow_rank_deficient: bool,
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind) -> Self {
        Self {
            kind,
            grouping: None,
            snr_rho: 1.0,
            tol: DEFAULT_TOL,
            ml_method: MlMethod::Tree,
            ml_guard_bits: DEFAULT_ML_GUARD_BITS,
            allow_rank_deficient: false,
        }
    }

    pub fn with_grouping(mut self, g: GroupingScheme) -> Self {
        self.grouping = Some(g);
        self
    }
}

/// Runs the configured detector and returns labels.
pub fn detect_labels(
    cfg: &DetectorConfig,
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    noise_var: f64,
) -> Result<Vec<usize>> {
    let grouping = || cfg.grouping.as_ref().unwrap_or(&ec.grouping);
    match cfg.kind {
        DetectorKind::Ml => match cfg.ml_method {
            MlMethod::Exhaustive => ml_labels(ec, y, c, scale, cfg.ml_guard_bits),
            MlMethod::Tree => ml_tree_labels(ec, y, c, scale),
        },
        DetectorKind::Zf => zf_labels(ec, y, c, scale, cfg.tol, cfg.allow_rank_deficient),
        DetectorKind::Mmse => mmse_labels(ec, y, c, scale, noise_var),
        DetectorKind::Blast => {
            blast_labels(ec, y, c, scale, cfg.tol, cfg.allow_rank_deficient).map(|(l, _)| l)
        }
        DetectorKind::Pic => pic_group_labels(ec, y, c, scale, grouping(), cfg.tol),
        DetectorKind::PicSic => pic_sic_labels(ec, y, c, scale, grouping(), cfg.tol),
    }
}

pub fn detect(
    cfg: &DetectorConfig,
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    noise_var: f64,
) -> Result<Vec<C64>> {
    detect_labels(cfg, ec, y, c, scale, noise_var).map(|l| to_points(c, &l))
}

fn to_points(c: &Constellation, labels: &[usize]) -> Vec<C64> {
    labels.iter().map(|&l| c.point(l)).collect()
}

fn check_y(ec: &EquivalentChannel, y: &[C64]) -> Result<()> {
    if y.len() != ec.rows() {
        return Err(Error::Dimension(format!(
            "received vector has length {}, channel has {} rows",
            y.len(),
            ec.rows()
        )));
    }
    Ok(())
}

/// Minimizes `||z - A s||^2` over `s in A^cols` by enumeration.
///
/// Returns the first strict minimum in lexicographic label order.
fn enumerate_min(a: &CMat, z: &[C64], c: &Constellation) -> Vec<usize> {
    let n = a.cols();
    let rows = a.rows();
    if n == 0 {
        return Vec::new();
    }
    let q = c.size();
    // contributions[k][label] = A[:, k] * point
    let contributions: Vec<Vec<Vec<C64>>> = (0..n)
        .map(|k| {
            let col = a.col(k);
            c.points()
                .iter()
                .map(|&pt| col.iter().map(|&x| x * pt).collect())
                .collect()
        })
        .collect();
    let mut residuals = vec![vec![C64::new(0.0, 0.0); rows]; n + 1];
    residuals[0].copy_from_slice(z);
    let mut idx = vec![0usize; n];
    let mut best = vec![0usize; n];
    let mut best_metric = f64::INFINITY;
    // depth of the first digit whose residual needs refreshing
    let mut depth = 0;
    loop {
        for k in depth..n {
            let (done, rest) = residuals.split_at_mut(k + 1);
            let src = &done[k];
            let dst = &mut rest[0];
            for ((d, s), v) in dst.iter_mut().zip(src).zip(&contributions[k][idx[k]]) {
                *d = s - v;
            }
        }
        let metric: f64 = residuals[n].iter().map(|x| x.norm_sqr()).sum();
        if metric < best_metric {
            best_metric = metric;
            best.copy_from_slice(&idx);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < q {
                break;
            }
            idx[k] = 0;
        }
        depth = k;
    }
}

/// Same minimizer as [`enumerate_min`], computed on the triangularized
/// problem when `A` is tall.
fn group_ml(a: &CMat, z: &[C64], c: &Constellation) -> Vec<usize> {
    if a.rows() > a.cols() {
        let (r, zr) = qr_reduce(a, z);
        enumerate_min(&r, &zr, c)
    } else {
        enumerate_min(a, z, c)
    }
}

fn search_bits(l: usize, c: &Constellation) -> u32 {
    (l as u32).saturating_mul(c.bits_per_symbol() as u32)
}

/// Exhaustive ML over `A^L` with the default guard.
pub fn ml_decode(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
) -> Result<Vec<C64>> {
    ml_labels(ec, y, c, scale, DEFAULT_ML_GUARD_BITS).map(|l| to_points(c, &l))
}

pub fn ml_labels(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    guard_bits: u32,
) -> Result<Vec<usize>> {
    check_y(ec, y)?;
    let bits = search_bits(ec.num_symbols(), c);
    if bits > guard_bits {
        return Err(Error::Guard(format!(
            "exhaustive ML over {} symbols of {} needs 2^{bits} candidates (limit 2^{guard_bits})",
            ec.num_symbols(),
            c.name()
        )));
    }
    Ok(enumerate_min(&ec.hc.scale_real(scale), y, c))
}

/// Exact ML by depth-first branch-and-bound; no guard.
pub fn ml_tree_decode(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
) -> Result<Vec<C64>> {
    ml_tree_labels(ec, y, c, scale).map(|l| to_points(c, &l))
}

pub fn ml_tree_labels(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
) -> Result<Vec<usize>> {
    check_y(ec, y)?;
    let (r, z) = qr_reduce(&ec.hc.scale_real(scale), y);
    Ok(TreeSearch::new(&r, &z, c).run())
}

struct TreeSearch<'a> {
    r: &'a CMat,
    z: &'a [C64],
    points: &'a [C64],
    n: usize,
    labels: Vec<usize>,
    best: Vec<usize>,
    best_metric: f64,
}

impl<'a> TreeSearch<'a> {
    fn new(r: &'a CMat, z: &'a [C64], c: &'a Constellation) -> Self {
        let n = r.cols();
        Self {
            r,
            z,
            points: c.points(),
            n,
            labels: vec![0; n],
            best: vec![0; n],
            best_metric: f64::INFINITY,
        }
    }

    fn run(mut self) -> Vec<usize> {
        if self.n > 0 {
            self.descend(self.n - 1, 0.0);
        }
        self.best
    }

    // Symbols are fixed from the last index down; row i of R only involves
    // symbols i.. so its term is known once symbol i is chosen.
    fn descend(&mut self, level: usize, partial: f64) {
        let mut children: Vec<(f64, usize)> = if level < self.r.rows() {
            let mut interference = C64::new(0.0, 0.0);
            for j in (level + 1)..self.n {
                interference += self.r[(level, j)] * self.points[self.labels[j]];
            }
            let target = self.z[level] - interference;
            let diag = self.r[(level, level)];
            self.points
                .iter()
                .enumerate()
                .map(|(l, &p)| (partial + (target - diag * p).norm_sqr(), l))
                .collect()
        } else {
            (0..self.points.len()).map(|l| (partial, l)).collect()
        };
        children.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        for (metric, label) in children {
            if metric >= self.best_metric {
                break;
            }
            self.labels[level] = label;
            if level == 0 {
                self.best_metric = metric;
                self.best.copy_from_slice(&self.labels);
            } else {
                self.descend(level - 1, metric);
            }
        }
    }
}

fn quantize_all(c: &Constellation, est: &[C64]) -> Vec<usize> {
    est.iter().map(|&z| c.nearest(z)).collect()
}

/// Zero-forcing: quantize `pinv(scale Hc) y`. Errors if `Hc` is not full
/// column rank.
pub fn zf_decode(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    tol: f64,
) -> Result<Vec<C64>> {
    zf_labels(ec, y, c, scale, tol, false).map(|l| to_points(c, &l))
}

/// Unquantized zero-forcing estimate.
pub fn zf_estimate(
    ec: &EquivalentChannel,
    y: &[C64],
    scale: f64,
    tol: f64,
    allow_rank_deficient: bool,
) -> Result<Vec<C64>> {
    check_y(ec, y)?;
    let a = ec.hc.scale_real(scale);
    if !allow_rank_deficient {
        let r = rank(&a, tol);
        if r < a.cols() {
            return Err(Error::RankDeficient(format!(
                "ZF needs full column rank, equivalent channel has rank {r} < {}",
                a.cols()
            )));
        }
    }
    pinv(&a, tol).mul_vec(y)
}

pub fn zf_labels(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    tol: f64,
    allow_rank_deficient: bool,
) -> Result<Vec<usize>> {
    Ok(quantize_all(
        c,
        &zf_estimate(ec, y, scale, tol, allow_rank_deficient)?,
    ))
}

/// Unquantized linear MMSE estimate
/// `(scale^2 Hc^H Hc + (noise_var / E_s) I)^{-1} scale Hc^H y`.
pub fn mmse_estimate(
    ec: &EquivalentChannel,
    y: &[C64],
    es: f64,
    scale: f64,
    noise_var: f64,
) -> Result<Vec<C64>> {
    check_y(ec, y)?;
    if !(noise_var > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "MMSE needs noise_var > 0, got {noise_var}"
        )));
    }
    let a = ec.hc.scale_real(scale);
    let mut gram = a.adjoint().matmul(&a)?;
    let reg = noise_var / es;
    for i in 0..gram.rows() {
        gram[(i, i)] += reg;
    }
    solve(&gram, &a.adjoint_mul_vec(y)?)
}

pub fn mmse_decode(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    noise_var: f64,
) -> Result<Vec<C64>> {
    mmse_labels(ec, y, c, scale, noise_var).map(|l| to_points(c, &l))
}

pub fn mmse_labels(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    noise_var: f64,
) -> Result<Vec<usize>> {
    Ok(quantize_all(
        c,
        &mmse_estimate(ec, y, c.avg_energy(), scale, noise_var)?,
    ))
}

/// Decodes the symbols in `group` after projecting `y` onto the orthogonal
/// complement of the columns in `interferers`.
fn decode_group_projected(
    hc: &CMat,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    group: &[usize],
    interferers: &[usize],
    tol: f64,
) -> Vec<usize> {
    let mut z = y.to_vec();
    let mut a = hc.select_cols(group).scale_real(scale);
    if !interferers.is_empty() {
        let (u, _) = pivoted_basis(&hc.select_cols(interferers), tol);
        project_out(&u, &mut z);
        for k in 0..a.cols() {
            let mut col = a.col(k);
            project_out(&u, &mut col);
            a.set_col(k, &col);
        }
    }
    group_ml(&a, &z, c)
}

/// PIC group decoding: each group is decoded independently after its
/// interference from all other groups is projected out.
pub fn pic_group_decode(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    g: &GroupingScheme,
) -> Result<Vec<C64>> {
    pic_group_labels(ec, y, c, scale, g, DEFAULT_TOL).map(|l| to_points(c, &l))
}

fn check_grouping(ec: &EquivalentChannel, g: &GroupingScheme) -> Result<()> {
    if g.num_symbols() != ec.num_symbols() {
        return Err(Error::Grouping(format!(
            "grouping covers {} symbols, channel carries {}",
            g.num_symbols(),
            ec.num_symbols()
        )));
    }
    Ok(())
}

pub fn pic_group_labels(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    g: &GroupingScheme,
    tol: f64,
) -> Result<Vec<usize>> {
    check_y(ec, y)?;
    check_grouping(ec, g)?;
    let mut out = vec![0usize; ec.num_symbols()];
    for (p, group) in g.groups().iter().enumerate() {
        let dec = decode_group_projected(&ec.hc, y, c, scale, group, &g.complement(p), tol);
        for (&i, l) in group.iter().zip(dec) {
            out[i] = l;
        }
    }
    Ok(out)
}

/// PIC with successive cancellation: groups are decoded in order, each
/// against the not-yet-decoded groups only, and its contribution is
/// subtracted before moving on.
pub fn pic_sic_decode(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    g: &GroupingScheme,
) -> Result<Vec<C64>> {
    pic_sic_labels(ec, y, c, scale, g, DEFAULT_TOL).map(|l| to_points(c, &l))
}

pub fn pic_sic_labels(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    g: &GroupingScheme,
    tol: f64,
) -> Result<Vec<usize>> {
    check_y(ec, y)?;
    check_grouping(ec, g)?;
    let mut out = vec![0usize; ec.num_symbols()];
    let mut residual = y.to_vec();
    for (k, group) in g.groups().iter().enumerate() {
        let dec = decode_group_projected(&ec.hc, &residual, c, scale, group, &g.later(k), tol);
        for (&i, &l) in group.iter().zip(&dec) {
            out[i] = l;
            let s = c.point(l) * scale;
            for (r, row) in residual.iter_mut().enumerate() {
                *row -= ec.hc[(r, i)] * s;
            }
        }
    }
    Ok(out)
}

/// Zero-forcing V-BLAST: repeatedly null with the pseudo-inverse of the
/// remaining columns, detect the symbol with the smallest nulling-vector
/// norm (largest post-detection SNR), cancel it, and drop its column.
pub fn blast_decode(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    tol: f64,
) -> Result<Vec<C64>> {
    blast_labels(ec, y, c, scale, tol, false).map(|(l, _)| to_points(c, &l))
}

/// Returns labels and the detection order (symbol indices).
pub fn blast_labels(
    ec: &EquivalentChannel,
    y: &[C64],
    c: &Constellation,
    scale: f64,
    tol: f64,
    allow_rank_deficient: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    check_y(ec, y)?;
    let l = ec.num_symbols();
    let mut remaining: Vec<usize> = (0..l).collect();
    let mut residual = y.to_vec();
    let mut out = vec![0usize; l];
    let mut order = Vec::with_capacity(l);
    while !remaining.is_empty() {
        let a = ec.hc.select_cols(&remaining).scale_real(scale);
        if !allow_rank_deficient {
            let r = rank(&a, tol);
            if r < a.cols() {
                return Err(Error::RankDeficient(format!(
                    "BLAST needs full column rank, {} remaining columns have rank {r}",
                    a.cols()
                )));
            }
        }
        let w = pinv(&a, tol);
        // Alamouti pairs produce exactly equal norms; the relative margin
        // keeps the lowest position among those regardless of rounding.
        let (pos, _) = (0..w.rows())
            .map(|k| (k, w.row(k).iter().map(|x| x.norm_sqr()).sum::<f64>()))
            .fold((0, f64::INFINITY), |acc, x| {
                if x.1 < acc.1 * (1.0 - 1e-9) {
                    x
                } else {
                    acc
                }
            });
        let est: C64 = w.row(pos).iter().zip(&residual).map(|(a, b)| a * b).sum();
        let label = c.nearest(est);
        let idx = remaining.remove(pos);
        out[idx] = label;
        order.push(idx);
        let s = c.point(label);
        for (r, row) in residual.iter_mut().enumerate() {
            *row -= a[(r, pos)] * s;
        }
    }
    Ok((out, order))
}

/// Search cost `sum_p |A|^{l_p}` of a grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Complexity {
    pub value: u128,
    /// The exact value exceeded `u128::MAX` and `value` is saturated.
    pub saturated: bool,
}

pub fn complexity_estimate(g: &GroupingScheme, alphabet_size: usize) -> Complexity {
    let mut total: u128 = 0;
    let mut saturated = false;
    for size in g.sizes() {
        let term = u32::try_from(size)
            .ok()
            .and_then(|e| (alphabet_size as u128).checked_pow(e));
        match term.and_then(|t| total.checked_add(t)) {
            Some(v) => total = v,
            None => {
                saturated = true;
                total = u128::MAX;
                break;
            }
        }
    }
    Complexity {
        value: total,
        saturated,
    }
}
