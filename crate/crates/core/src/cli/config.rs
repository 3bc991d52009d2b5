//! INI-like run configuration.
//!
//! ```text
//! # comment            ; also a comment
//! [section]
//! key = value
//! ```
//!
//! Section and key names are case-insensitive. Every key must be known, may
//! appear once, and is validated before any computation starts. Environment
//! variables `STBCPIC_<SECTION>_<KEY>` override file values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::constellation::Constellation;
use crate::detectors::{DetectorConfig, DetectorKind, MlMethod};
use crate::error::{Error, Result};
use crate::grouping::GroupingScheme;
use crate::numerics::DEFAULT_TOL;
use crate::rotation::{RotationMatrix, DEFAULT_GIVENS_THETA};
use crate::sim::{SimConfig, DEFAULT_BATCH, DEFAULT_TARGET_FRAME_ERRORS};
use crate::stbc::CodeSpec;

pub const ENV_PREFIX: &str = "STBCPIC_";

const SCHEMA: &[(&str, &[&str])] = &[
    ("code", &["m", "t", "constellation"]),
    ("rotation", &["kind", "theta", "m", "n_list"]),
    ("channel", &["n"]),
    (
        "detector",
        &["kind", "groups", "tol", "ml", "allow_rank_deficient"],
    ),
    (
        "sim",
        &[
            "snr_db",
            "seed",
            "max_trials",
            "min_trials",
            "target_frame_errors",
            "threads",
            "batch",
            "detectors",
        ],
    ),
    ("analyze", &["channels", "samples", "n"]),
    ("output", &["dir", "csv", "plot", "report"]),
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Origin {
    File { line: usize, col: usize },
    Env(String),
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { line, col } => write!(f, "line {line}, column {col}"),
            Origin::Env(var) => write!(f, "environment variable {var}"),
            Origin::Flag(flag) => write!(f, "option --{flag}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Value {
    text: String,
    origin: Origin,
}

/// Parsed but untyped key/value tree.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), Value>,
}

fn parse_err(line: usize, col: usize, msg: impl fmt::Display) -> Error {
    Error::Config(format!("line {line}, column {col}: {msg}"))
}

fn known_keys(section: &str) -> Option<&'static [&'static str]> {
    SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = strip_comment(line);
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            if let Some(rest) = trimmed.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(parse_err(
                        lineno,
                        indent + trimmed.len() + 1,
                        "expected `]` to close the section header",
                    ));
                };
                let name = name.trim().to_ascii_lowercase();
                if known_keys(&name).is_none() {
                    return Err(parse_err(
                        lineno,
                        indent + 2,
                        format!("unknown section [{name}]"),
                    ));
                }
                section = Some(name);
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(parse_err(
                    lineno,
                    indent + 1,
                    "expected `key = value` or `[section]`",
                ));
            };
            let key = content[..eq].trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(parse_err(lineno, indent + 1, "missing key before `=`"));
            }
            let Some(sec) = &section else {
                return Err(parse_err(
                    lineno,
                    indent + 1,
                    format!("key `{key}` appears before any [section]"),
                ));
            };
            let after = &content[eq + 1..];
            let value_col = eq + 2 + (after.len() - after.trim_start().len());
            let origin = Origin::File {
                line: lineno,
                col: value_col,
            };
            raw.insert(sec, &key, after.trim(), origin, Some((lineno, indent + 1)))?;
        }
        Ok(raw)
    }

    fn insert(
        &mut self,
        section: &str,
        key: &str,
        text: &str,
        origin: Origin,
        pos: Option<(usize, usize)>,
    ) -> Result<()> {
        let keys = known_keys(section)
            .ok_or_else(|| Error::Config(format!("unknown section [{section}]")))?;
        if !keys.contains(&key) {
            let msg = format!(
                "unknown key `{key}` in [{section}] (known: {})",
                keys.join(", ")
            );
            return Err(match pos {
                Some((l, c)) => parse_err(l, c, msg),
                None => Error::Config(format!("{origin}: {msg}")),
            });
        }
        let slot = (section.to_string(), key.to_string());
        if let (Some(prev), Some((l, c))) = (self.entries.get(&slot), pos) {
            return Err(parse_err(
                l,
                c,
                format!(
                    "duplicate key [{section}] {key} (first set at {})",
                    prev.origin
                ),
            ));
        }
        self.entries.insert(
            slot,
            Value {
                text: text.to_string(),
                origin,
            },
        );
        Ok(())
    }

    /// Applies `STBCPIC_<SECTION>_<KEY>` variables; others are ignored.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut vars: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(k, _)| k.as_ref().starts_with(ENV_PREFIX))
            .map(|(k, v)| (k.as_ref().to_string(), v.as_ref().to_string()))
            .collect();
        vars.sort();
        for (name, value) in vars {
            let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
            let Some((section, key)) = rest.split_once('_') else {
                return Err(Error::Config(format!(
                    "{name}: expected {ENV_PREFIX}<SECTION>_<KEY>"
                )));
            };
            if known_keys(section).is_none() {
                return Err(Error::Config(format!(
                    "{name}: unknown section [{section}]"
                )));
            }
            self.insert(section, key, value.trim(), Origin::Env(name.clone()), None)?;
        }
        Ok(())
    }

    /// Overrides a value from a command-line option named `flag`.
    pub fn set(&mut self, section: &str, key: &str, value: &str, flag: &str) -> Result<()> {
        self.insert(section, key, value, Origin::Flag(flag.into()), None)
    }

    fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn typed<T>(
        &self,
        section: &str,
        key: &str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => parse(&v.text).map(Some).ok_or_else(|| {
                Error::Config(format!(
                    "[{section}] {key} ({}): expected {what}, got {:?}",
                    v.origin, v.text
                ))
            }),
        }
    }

    fn key_err(&self, section: &str, key: &str, err: impl fmt::Display) -> Error {
        match self.get(section, key) {
            Some(v) => Error::Config(format!("[{section}] {key} ({}): {err}", v.origin)),
            None => Error::Config(format!("[{section}] {key}: {err}")),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub snr_db: Vec<f64>,
    pub seed: u64,
    pub max_trials: u64,
    pub min_trials: u64,
    pub target_frame_errors: u64,
    pub threads: usize,
    pub batch: u64,
    pub detectors: Vec<DetectorKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub csv: String,
    pub plot: Option<String>,
    pub report: String,
}

/// Fully validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: CodeSpec,
    pub n_rx: usize,
    pub detector: DetectorConfig,
    pub sim: SimSettings,
    pub analyze_channels: u64,
    pub analyze_samples: u64,
    /// Receive antennas used by the PIC certificates.
    pub analyze_n_rx: usize,
    pub output: OutputSettings,
}

impl RunConfig {
    pub fn sim_config(&self, kind: DetectorKind) -> SimConfig {
        let mut detector = self.detector.clone();
        detector.kind = kind;
        SimConfig {
            spec: self.spec.clone(),
            n_rx: self.n_rx,
            detector,
            snr_db_list: self.sim.snr_db.clone(),
            seed: self.sim.seed,
            max_trials: self.sim.max_trials,
            target_frame_errors: self.sim.target_frame_errors,
            min_trials: self.sim.min_trials,
            threads: self.sim.threads,
            batch: self.sim.batch,
            noise_scale: 1.0,
        }
    }
}

/// Parses and validates without environment overrides.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    RawConfig::parse(text)?.build()
}

impl RawConfig {
    pub fn build(&self) -> Result<RunConfig> {
        let u64_ = |s: &str| s.parse::<u64>().ok();
        let usize_ = |s: &str| s.parse::<usize>().ok();

        // [code]
        let m = self
            .typed("code", "m", "a positive integer", usize_)?
            .unwrap_or(4);
        if m == 0 {
            return Err(self.key_err("code", "m", "M must be at least 1"));
        }
        let m_even = m + m % 2;
        let constellation = match self.get("code", "constellation") {
            None => Constellation::qam(16)?,
            Some(v) => v
                .text
                .parse::<Constellation>()
                .map_err(|e| self.key_err("code", "constellation", e))?,
        };
        let t = self
            .typed("code", "t", "a positive integer", usize_)?
            .unwrap_or_else(|| CodeSpec::block_length(m, 2));

        // [rotation]
        let rotation = self.build_rotation(m_even / 2)?;
        let spec = CodeSpec::new(m, t, rotation, constellation)
            .map_err(|e| self.key_err("code", "t", e))?;

        // [channel]
        let n_rx = self
            .typed("channel", "n", "a positive integer", usize_)?
            .unwrap_or(4);
        if n_rx == 0 {
            return Err(self.key_err("channel", "n", "need at least one receive antenna"));
        }

        // [detector]
        let kind = self
            .typed(
                "detector",
                "kind",
                "ml, zf, mmse, blast, pic or pic-sic",
                |s| s.parse().ok(),
            )?
            .unwrap_or(DetectorKind::Pic);
        let mut detector = DetectorConfig::new(kind);
        if let Some(v) = self.get("detector", "groups") {
            let g = GroupingScheme::parse(&v.text, spec.num_symbols())
                .map_err(|e| self.key_err("detector", "groups", e))?;
            detector.grouping = Some(g);
        }
        detector.tol = self
            .typed("detector", "tol", "a positive number", |s| {
                s.parse::<f64>().ok().filter(|x| *x > 0.0 && x.is_finite())
            })?
            .unwrap_or(DEFAULT_TOL);
        detector.ml_method = self
            .typed("detector", "ml", "tree or exhaustive", |s| {
                match s.to_ascii_lowercase().as_str() {
                    "tree" => Some(MlMethod::Tree),
                    "exhaustive" => Some(MlMethod::Exhaustive),
                    _ => None,
                }
            })?
            .unwrap_or(MlMethod::Tree);
        detector.allow_rank_deficient = self
            .typed(
                "detector",
                "allow_rank_deficient",
                "true or false",
                parse_bool,
            )?
            .unwrap_or(false);

        // [sim]
        let snr_db = self
            .typed("sim", "snr_db", "a comma-separated list of numbers", |s| {
                parse_list::<f64>(s).filter(|v| !v.is_empty() && v.iter().all(|x| x.is_finite()))
            })?
            .unwrap_or_else(|| vec![8.0, 10.0, 12.0, 14.0]);
        let max_trials = self
            .typed("sim", "max_trials", "a positive integer", |s| {
                u64_(s).filter(|&x| x > 0)
            })?
            .unwrap_or(100_000);
        let analyze_n_rx = self
            .typed("analyze", "n", "a positive integer", |s| {
                s.parse::<usize>().ok().filter(|&x| x > 0)
            })?
            .unwrap_or(1);
        let min_trials = self
            .typed("sim", "min_trials", "an integer", u64_)?
            .unwrap_or(0);
        if min_trials > max_trials {
            return Err(self.key_err(
                "sim",
                "min_trials",
                format!("{min_trials} exceeds max_trials {max_trials}"),
            ));
        }
        let detectors = self
            .typed(
                "sim",
                "detectors",
                "a comma-separated list of detectors",
                parse_list::<DetectorKind>,
            )?
            .unwrap_or_else(|| vec![kind]);
        let sim = SimSettings {
            snr_db,
            seed: self
                .typed("sim", "seed", "an unsigned 64-bit integer", u64_)?
                .unwrap_or(1),
            max_trials,
            min_trials,
            target_frame_errors: self
                .typed("sim", "target_frame_errors", "an integer", u64_)?
                .unwrap_or(DEFAULT_TARGET_FRAME_ERRORS),
            threads: self
                .typed("sim", "threads", "an integer", usize_)?
                .unwrap_or(0),
            batch: self
                .typed("sim", "batch", "a positive integer", |s| {
                    u64_(s).filter(|&x| x > 0)
                })?
                .unwrap_or(DEFAULT_BATCH),
            detectors,
        };

        // [analyze]
        let analyze_channels = self
            .typed("analyze", "channels", "an integer", u64_)?
            .unwrap_or(1000);
        let analyze_samples = self
            .typed("analyze", "samples", "a positive integer", |s| {
                u64_(s).filter(|&x| x > 0)
            })?
            .unwrap_or(100_000);

        // [output]
        let text = |key: &str, default: &str| {
            self.get("output", key)
                .map_or(default.to_string(), |v| v.text.clone())
        };
        let plot = text("plot", "ber.svg");
        let output = OutputSettings {
            dir: PathBuf::from(text("dir", ".")),
            csv: text("csv", "ber.csv"),
            plot: (!plot.is_empty() && !plot.eq_ignore_ascii_case("none")).then_some(plot),
            report: text("report", "report.json"),
        };
        if output.csv.is_empty() {
            return Err(self.key_err("output", "csv", "file name is empty"));
        }

        Ok(RunConfig {
            spec,
            n_rx,
            detector,
            sim,
            analyze_channels,
            analyze_samples,
            analyze_n_rx,
            output,
        })
    }

    fn build_rotation(&self, dim: usize) -> Result<RotationMatrix> {
        let kind = self
            .get("rotation", "kind")
            .map_or("auto".to_string(), |v| v.text.to_ascii_lowercase());
        let theta = self.typed("rotation", "theta", "a finite number", |s| {
            s.parse::<f64>().ok().filter(|x| x.is_finite())
        })?;
        let m = self.typed("rotation", "m", "a positive integer", |s| {
            s.parse::<u64>().ok()
        })?;
        let n_list = self.typed(
            "rotation",
            "n_list",
            "a comma-separated list of integers",
            |s| {
                if s.trim().is_empty() {
                    Some(Vec::new())
                } else {
                    parse_list::<i64>(s)
                }
            },
        )?;
        match kind.as_str() {
            "auto" | "default" => {
                if theta.is_some() || m.is_some() || n_list.is_some() {
                    let key = if theta.is_some() {
                        "theta"
                    } else if m.is_some() {
                        "m"
                    } else {
                        "n_list"
                    };
                    return Err(self.key_err(
                        "rotation",
                        key,
                        "set [rotation] kind to givens or cyclotomic to use this key",
                    ));
                }
                RotationMatrix::default_for_dim(dim)
                    .map_err(|e| self.key_err("rotation", "kind", e))
            }
            "givens" => {
                if dim != 2 {
                    return Err(self.key_err(
                        "rotation",
                        "kind",
                        format!("givens is 2x2 but layers have length {dim}"),
                    ));
                }
                if m.is_some() || n_list.is_some() {
                    let key = if m.is_some() { "m" } else { "n_list" };
                    return Err(self.key_err(
                        "rotation",
                        key,
                        "only applies to cyclotomic rotations",
                    ));
                }
                Ok(RotationMatrix::givens(
                    theta.unwrap_or(DEFAULT_GIVENS_THETA),
                ))
            }
            "cyclotomic" => {
                if theta.is_some() {
                    return Err(self.key_err(
                        "rotation",
                        "theta",
                        "only applies to givens rotations",
                    ));
                }
                let m = m.ok_or_else(|| {
                    self.key_err("rotation", "m", "required for cyclotomic rotations")
                })?;
                let n_list = n_list.ok_or_else(|| {
                    self.key_err("rotation", "n_list", "required for cyclotomic rotations")
                })?;
                RotationMatrix::cyclotomic(dim, m, &n_list)
                    .map_err(|e| self.key_err("rotation", "n_list", e))
            }
            other => Err(self.key_err(
                "rotation",
                "kind",
                format!("unknown rotation {other:?} (expected auto, givens or cyclotomic)"),
            )),
        }
    }
}
