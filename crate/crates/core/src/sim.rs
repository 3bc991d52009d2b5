//! Monte Carlo BER over i.i.d. Rayleigh block fading.
//!
//! Trial `t` of point `k` draws everything (symbols, channel, noise) from a
//! generator seeded by a hash of `(seed, k, t)`. Trials run in parallel in
//! fixed-size batches and the stopping rule is only evaluated between
//! batches, so counts do not depend on the number of threads.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{detect_labels, DetectorConfig};
use crate::equiv_channel::{build_structured, preprocess_rx, ChannelRealization};
use crate::error::{Error, Result};
use crate::numerics::CMat;
use crate::stbc::CodeSpec;

pub const DEFAULT_TARGET_FRAME_ERRORS: u64 = 200;
pub const DEFAULT_BATCH: u64 = 256;

pub const CSV_HEADER: &str = "snr_db,trials,bits,bit_errors,frame_errors,ber,fer,ci95";

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: CodeSpec,
    pub n_rx: usize,
    pub detector: DetectorConfig,
    pub snr_db_list: Vec<f64>,
    pub seed: u64,
    pub max_trials: u64,
    pub target_frame_errors: u64,
    pub min_trials: u64,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Trials per batch between stopping-rule checks.
    pub batch: u64,
    /// Standard deviation multiplier on the unit-variance noise.
    pub noise_scale: f64,
}

impl SimConfig {
    pub fn new(
        spec: CodeSpec,
        n_rx: usize,
        detector: DetectorConfig,
        snr_db_list: Vec<f64>,
    ) -> Self {
        Self {
            spec,
            n_rx,
            detector,
            snr_db_list,
            seed: 1,
            max_trials: 100_000,
            target_frame_errors: DEFAULT_TARGET_FRAME_ERRORS,
            min_trials: 0,
            threads: 0,
            batch: DEFAULT_BATCH,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db_list.is_empty() {
            return Err(Error::InvalidArgument("snr list is empty".into()));
        }
        if let Some(x) = self.snr_db_list.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("snr {x} dB is not finite")));
        }
        if self.n_rx == 0 {
            return Err(Error::InvalidArgument(
                "need at least one receive antenna".into(),
            ));
        }
        if self.max_trials == 0 {
            return Err(Error::InvalidArgument("max_trials must be positive".into()));
        }
        if self.min_trials > self.max_trials {
            return Err(Error::InvalidArgument(format!(
                "min_trials {} exceeds max_trials {}",
                self.min_trials, self.max_trials
            )));
        }
        if self.batch == 0 {
            return Err(Error::InvalidArgument("batch must be positive".into()));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::InvalidArgument(
                "noise_scale must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    /// Half-width of the normal-approximation 95% interval on the BER,
    /// from the spread of per-frame error fractions.
    pub ci95_halfwidth: f64,
}

impl BerPoint {
    pub fn ci_low(&self) -> f64 {
        (self.ber - self.ci95_halfwidth).max(0.0)
    }

    pub fn ci_high(&self) -> f64 {
        self.ber + self.ci95_halfwidth
    }
}

/// `(g1 + j g2) / sqrt(2)` with standard normal `g`.
pub fn cn01(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `M x N` matrix of i.i.d. CN(0, 1) entries.
pub fn draw_channel(rng: &mut impl Rng, m: usize, n: usize) -> ChannelRealization {
    ChannelRealization {
        h: CMat::from_fn(m, n, |_, _| cn01(rng)),
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the generator for trial `t` at point `k`.
pub fn trial_seed(seed: u64, k: u64, t: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ k) ^ t)
}

pub fn snr_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    bit_errors: u64,
    bit_errors_sq: u64,
    frame_errors: u64,
}

impl Tally {
    fn add(&mut self, errors: u64) {
        self.trials += 1;
        self.bit_errors += errors;
        self.bit_errors_sq += errors * errors;
        self.frame_errors += u64::from(errors > 0);
    }
}

/// One codeword: returns the number of bit errors.
fn run_trial(cfg: &SimConfig, rho: f64, rng: &mut ChaCha8Rng) -> Result<u64> {
    let spec = &cfg.spec;
    let c = spec.constellation();
    let labels: Vec<usize> = (0..spec.num_symbols())
        .map(|_| rng.gen_range(0..c.size()))
        .collect();
    let s: Vec<Complex64> = labels.iter().map(|&l| c.point(l)).collect();
    let b = spec.encode(&s)?;
    let ch = draw_channel(rng, spec.m(), cfg.n_rx);
    let scale = (rho / spec.normalization_mu()).sqrt();
    let mut y = b.mat.matmul(&ch.h)?.scale_real(scale);
    for z in y.as_mut_slice() {
        *z += cn01(rng) * cfg.noise_scale;
    }
    let ec = build_structured(spec, &ch)?;
    let yv = preprocess_rx(spec, &y)?;
    let noise_var = (cfg.noise_scale * cfg.noise_scale).max(f64::MIN_POSITIVE);
    let decided = detect_labels(&cfg.detector, &ec, &yv, c, scale, noise_var)?;
    Ok(labels
        .iter()
        .zip(&decided)
        .map(|(&a, &b)| u64::from((a ^ b).count_ones()))
        .sum())
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn point_at(cfg: &SimConfig, k: u64, snr_db: f64) -> Result<BerPoint> {
    let rho = snr_linear(snr_db);
    let mut tally = Tally::default();
    while tally.trials < cfg.max_trials {
        let start = tally.trials;
        let n = cfg.batch.min(cfg.max_trials - start);
        let outcomes: Vec<Result<u64>> = (start..start + n)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, k, t));
                run_trial(cfg, rho, &mut rng)
            })
            .collect();
        for o in outcomes {
            tally.add(o?);
        }
        if tally.trials >= cfg.min_trials && tally.frame_errors >= cfg.target_frame_errors {
            break;
        }
    }
    let bits_per_frame =
        (cfg.spec.num_symbols() * cfg.spec.constellation().bits_per_symbol()) as u64;
    Ok(finish(snr_db, tally, bits_per_frame))
}

fn finish(snr_db: f64, t: Tally, bits_per_frame: u64) -> BerPoint {
    let n = t.trials as f64;
    let bpf = bits_per_frame as f64;
    let bits = t.trials * bits_per_frame;
    let ber = t.bit_errors as f64 / bits as f64;
    let ci95_halfwidth = if t.trials > 1 {
        // sample variance of e_t = errors_t / bits_per_frame
        let mean = t.bit_errors as f64 / n;
        let var = ((t.bit_errors_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0) / (bpf * bpf);
        1.96 * (var / n).sqrt()
    } else {
        0.0
    };
    BerPoint {
        snr_db,
        trials: t.trials,
        bits,
        bit_errors: t.bit_errors,
        frame_errors: t.frame_errors,
        ber,
        fer: t.frame_errors as f64 / n,
        ci95_halfwidth,
    }
}

/// Simulates a single SNR as point index 0 of the stream layout.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<BerPoint> {
    cfg.validate()?;
    with_pool(cfg.threads, || point_at(cfg, 0, snr_db))?
}

/// Simulates every SNR of the list; point `k` uses stream index `k`.
pub fn sweep(cfg: &SimConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    with_pool(cfg.threads, || {
        cfg.snr_db_list
            .iter()
            .enumerate()
            .map(|(k, &snr)| point_at(cfg, k as u64, snr))
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn write_csv(points: &[BerPoint], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{:.6e},{:.6e},{:.6e}",
            p.snr_db,
            p.trials,
            p.bits,
            p.bit_errors,
            p.frame_errors,
            p.ber,
            p.fer,
            p.ci95_halfwidth
        )?;
    }
    Ok(())
}

pub fn csv_string(points: &[BerPoint]) -> String {
    let mut buf = Vec::new();
    write_csv(points, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

/// SNR (dB) at which the log-BER curve crosses `target`, by linear
/// interpolation of `log10(ber)` between neighbouring points.
pub fn snr_at_ber(points: &[BerPoint], target: f64) -> Option<f64> {
    let lt = target.log10();
    points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.ber <= 0.0 || b.ber <= 0.0 {
            return None;
        }
        let (la, lb) = (a.ber.log10(), b.ber.log10());
        let (lo, hi) = if la < lb { (la, lb) } else { (lb, la) };
        if lt < lo || lt > hi || la == lb {
            return None;
        }
        Some(a.snr_db + (lt - la) / (lb - la) * (b.snr_db - a.snr_db))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;
    use crate::detectors::DetectorKind;

    fn spec(m: usize, t: usize, order: usize) -> CodeSpec {
        CodeSpec::with_default_rotation(m, t, Constellation::qam(order).unwrap()).unwrap()
    }

    #[test]
    fn channel_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let (mut p, mut cov, mut mre, mut mim) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = draw_channel(&mut rng, 1, 1).h[(0, 0)];
            p += z.norm_sqr();
            cov += z.re * z.im;
            mre += z.re;
            mim += z.im;
        }
        let nf = n as f64;
        assert!((p / nf - 1.0).abs() < 0.02);
        assert!((cov / nf - (mre / nf) * (mim / nf)).abs() < 0.01);
        let a = draw_channel(&mut ChaCha8Rng::seed_from_u64(9), 4, 2);
        let b = draw_channel(&mut ChaCha8Rng::seed_from_u64(9), 4, 2);
        assert_eq!(a, b);
    }

    #[test]
    fn trial_seeds_distinct() {
        let mut seen = std::collections::HashSet::new();
        for k in 0..8 {
            for t in 0..1000 {
                assert!(seen.insert(trial_seed(1, k, t)));
            }
        }
        assert_ne!(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
    }

    #[test]
    fn transmit_energy_matches_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (m, t) in [(4, 6), (8, 10), (3, 6)] {
            let s = spec(m, t, 16);
            let c = s.constellation();
            let rho = 7.0;
            let scale2 = rho / s.normalization_mu();
            let trials = 20_000;
            let mut acc = 0.0;
            for _ in 0..trials {
                let sym: Vec<Complex64> = (0..s.num_symbols())
                    .map(|_| c.point(rng.gen_range(0..c.size())))
                    .collect();
                acc += scale2 * s.encode(&sym).unwrap().energy() / s.t() as f64;
            }
            let mean = acc / trials as f64;
            // per receive antenna, E|row of B H|^2 sums over the M transmit antennas
            assert!((mean - rho).abs() / rho < 0.01, "({m},{t}): {mean}");
        }
    }

    #[test]
    fn noiseless_runs_are_error_free() {
        for kind in DetectorKind::ALL {
            let mut det = DetectorConfig::new(kind);
            det.allow_rank_deficient = true;
            let mut cfg = SimConfig::new(spec(4, 6, 4), 2, det, vec![10.0]);
            cfg.noise_scale = 1e-12;
            cfg.max_trials = 100;
            cfg.target_frame_errors = u64::MAX;
            let p = run_point(&cfg, 10.0).unwrap();
            assert_eq!(p.trials, 100);
            assert_eq!(p.bit_errors, 0, "{kind}");
        }
    }

    #[test]
    fn pure_noise_is_chance_level() {
        let mut cfg = SimConfig::new(
            spec(4, 6, 2),
            1,
            DetectorConfig::new(DetectorKind::Zf),
            vec![0.0],
        );
        cfg.detector.allow_rank_deficient = true;
        cfg.max_trials = 4000;
        cfg.target_frame_errors = u64::MAX;
        let p = run_point(&cfg, -400.0).unwrap();
        assert!((p.ber - 0.5).abs() < 0.02, "{}", p.ber);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut cfg = SimConfig::new(
            spec(4, 6, 4),
            1,
            DetectorConfig::new(DetectorKind::Pic),
            vec![0.0, 4.0, 8.0],
        );
        cfg.max_trials = 2000;
        cfg.target_frame_errors = 50;
        cfg.batch = 64;
        cfg.threads = 1;
        let a = sweep(&cfg).unwrap();
        cfg.threads = 3;
        let b = sweep(&cfg).unwrap();
        assert_eq!(csv_string(&a), csv_string(&b));
        assert_eq!(a, b);
    }

    #[test]
    fn ci_shrinks_with_trials() {
        let mut cfg = SimConfig::new(
            spec(4, 6, 4),
            1,
            DetectorConfig::new(DetectorKind::Pic),
            vec![6.0],
        );
        cfg.target_frame_errors = u64::MAX;
        cfg.max_trials = 4000;
        let a = run_point(&cfg, 6.0).unwrap();
        cfg.max_trials = 8000;
        let b = run_point(&cfg, 6.0).unwrap();
        let ratio = b.ci95_halfwidth / a.ci95_halfwidth;
        assert!(
            (ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.1,
            "{ratio}"
        );
    }

    #[test]
    fn ber_decreases_with_snr() {
        let mut cfg = SimConfig::new(
            spec(4, 6, 4),
            2,
            DetectorConfig::new(DetectorKind::Pic),
            vec![0.0, 5.0, 10.0],
        );
        cfg.max_trials = 3000;
        let pts = sweep(&cfg).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].ber <= w[0].ber + w[0].ci95_halfwidth + w[1].ci95_halfwidth);
        }
        for p in &pts {
            assert_eq!(p.bits, p.trials * 16);
            assert!((p.ber - p.bit_errors as f64 / p.bits as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::new(
            spec(4, 6, 4),
            1,
            DetectorConfig::new(DetectorKind::Zf),
            vec![],
        );
        assert!(cfg.validate().is_err());
        cfg.snr_db_list = vec![1.0];
        cfg.min_trials = cfg.max_trials + 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn guard_errors_propagate() {
        let mut det = DetectorConfig::new(DetectorKind::Ml);
        det.ml_method = crate::detectors::MlMethod::Exhaustive;
        let mut cfg = SimConfig::new(spec(4, 6, 16), 1, det, vec![1.0]);
        cfg.max_trials = 1;
        assert!(matches!(sweep(&cfg), Err(Error::Guard(_))));
    }

    #[test]
    fn interpolated_crossing() {
        let mk = |snr: f64, ber: f64| BerPoint {
            snr_db: snr,
            trials: 1,
            bits: 1,
            bit_errors: 0,
            frame_errors: 0,
            ber,
            fer: 0.0,
            ci95_halfwidth: 0.0,
        };
        let pts = vec![mk(0.0, 1e-2), mk(10.0, 1e-4)];
        assert!((snr_at_ber(&pts, 1e-3).unwrap() - 5.0).abs() < 1e-12);
        assert!(snr_at_ber(&pts, 1e-6).is_none());
        let mut out = Vec::new();
        write_csv(&pts, &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with(CSV_HEADER));
    }
}
