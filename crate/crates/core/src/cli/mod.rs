//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration or usage
//! error, 3 search-size guard, 4 certification failure.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constellation::Constellation;
use crate::detectors::{complexity_estimate, DetectorKind};
use crate::diversity::{
    pic_criterion_check_with, pic_sic_criterion_check_with, rank_criterion_check, CertReport,
    PicCertOptions, RankMode,
};
use crate::error::{Error, Result};
use crate::sim::{sweep, write_csv, BerPoint};
use config::{RawConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_CERT_FAIL: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::CodeParams(_)
        | Error::Rotation(_)
        | Error::Grouping(_)
        | Error::UnsupportedOrder(_)
        | Error::InvalidArgument(_) => EXIT_CONFIG,
        Error::Guard(_) => EXIT_GUARD,
        _ => EXIT_RUNTIME,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stbc-pic",
    version,
    about = "Alamouti-block space-time codes with PIC group decoding"
)]
pub struct Cli {
    /// INI-style configuration file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Random seed (overrides [sim] seed)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides [output] dir)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CodeArgs {
    /// Transmit antennas
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Block length
    #[arg(long = "T")]
    pub t: Option<usize>,
    /// Shorthand for --M and --T, e.g. `4,6`
    #[arg(long, value_name = "M,T")]
    pub spec: Option<String>,
    /// auto | givens[:THETA] | cyclotomic:M:N2,N3,...
    #[arg(long)]
    pub rotation: Option<String>,
    /// bpsk | qam4 | qam16 | qam64
    #[arg(long)]
    pub constellation: Option<String>,
    /// Receive antennas
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// PIC grouping override, e.g. `1,2|3,4|5,6|7,8`
    #[arg(long)]
    pub groups: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Rank,
    Pic,
    PicSic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the codeword layout and one numeric codeword
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        /// Comma-separated constellation labels, one per symbol (random
        /// labels from the seed otherwise)
        #[arg(long)]
        labels: Option<String>,
    },
    /// Print rate, normalization and group-decoding complexity
    Rate {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Certify a diversity criterion numerically
    Analyze {
        check: Check,
        #[command(flatten)]
        code: CodeArgs,
        /// Enumerate every difference vector (rank check)
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        /// Number of sampled difference vectors (rank check)
        #[arg(long)]
        samples: Option<u64>,
        /// Number of random channels (pic, pic-sic)
        #[arg(long)]
        channels: Option<u64>,
    },
    /// Simulate the configured detector over the SNR list
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        detector: Option<String>,
        /// Comma-separated SNR values in dB
        #[arg(long)]
        snr: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Simulate several detectors and plot the curves
    Sweep {
        #[command(flatten)]
        code: CodeArgs,
        /// Comma-separated detector list
        #[arg(long)]
        detectors: Option<String>,
        #[arg(long)]
        snr: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(
    args: I,
    env: Vec<(String, String)>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, env, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load(cli: &Cli, env: Vec<(String, String)>, code: &CodeArgs) -> Result<(RawConfig, RunConfig)> {
    let text = match &cli.config {
        Some(p) => {
            fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => String::new(),
    };
    let mut raw = RawConfig::parse(&text)?;
    raw.apply_env(env)?;
    if let Some(s) = cli.seed {
        raw.set("sim", "seed", &s.to_string(), "seed")?;
    }
    if let Some(o) = &cli.out {
        raw.set("output", "dir", &o.to_string_lossy(), "out")?;
    }
    if let Some(spec) = &code.spec {
        let (m, t) = spec
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("--spec expects M,T, got {spec:?}")))?;
        raw.set("code", "m", m.trim(), "spec")?;
        raw.set("code", "t", t.trim(), "spec")?;
    }
    if let Some(m) = code.m {
        raw.set("code", "m", &m.to_string(), "M")?;
    }
    if let Some(t) = code.t {
        raw.set("code", "t", &t.to_string(), "T")?;
    }
    if let Some(c) = &code.constellation {
        raw.set("code", "constellation", c, "constellation")?;
    }
    if let Some(n) = code.n {
        raw.set("channel", "n", &n.to_string(), "N")?;
    }
    if let Some(g) = &code.groups {
        raw.set("detector", "groups", g, "groups")?;
    }
    if let Some(r) = &code.rotation {
        let mut parts = r.splitn(3, ':');
        let kind = parts.next().unwrap_or_default();
        raw.set("rotation", "kind", kind, "rotation")?;
        match kind.to_ascii_lowercase().as_str() {
            "givens" => {
                if let Some(theta) = parts.next() {
                    raw.set("rotation", "theta", theta, "rotation")?;
                }
            }
            "cyclotomic" => {
                let m = parts.next().ok_or_else(|| {
                    Error::Config("--rotation cyclotomic:M:N2,... needs M".into())
                })?;
                raw.set("rotation", "m", m, "rotation")?;
                raw.set("rotation", "n_list", parts.next().unwrap_or(""), "rotation")?;
            }
            _ => {}
        }
    }
    let cfg = raw.build()?;
    Ok((raw, cfg))
}

fn execute(cli: &Cli, env: Vec<(String, String)>, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Encode { code, labels } => {
            let (_, cfg) = load(cli, env, code)?;
            cmd_encode(&cfg, labels.as_deref(), out)
        }
        Command::Rate { code } => {
            let (_, cfg) = load(cli, env, code)?;
            cmd_rate(&cfg, out)
        }
        Command::Analyze {
            check,
            code,
            exhaustive,
            samples,
            channels,
        } => {
            let (mut raw, _) = load(cli, env, code)?;
            if let Some(n) = code.n {
                raw.set("analyze", "n", &n.to_string(), "N")?;
            }
            if let Some(n) = samples {
                raw.set("analyze", "samples", &n.to_string(), "samples")?;
            }
            if let Some(n) = channels {
                raw.set("analyze", "channels", &n.to_string(), "channels")?;
            }
            cmd_analyze(&raw.build()?, *check, *exhaustive, out)
        }
        Command::Simulate {
            code,
            detector,
            snr,
            threads,
        } => {
            let (mut raw, _) = load(cli, env, code)?;
            if let Some(d) = detector {
                raw.set("detector", "kind", d, "detector")?;
            }
            apply_sim_flags(&mut raw, snr.as_deref(), *threads)?;
            let cfg = raw.build()?;
            cmd_simulate(&cfg, &[cfg.detector.kind], false, out)
        }
        Command::Sweep {
            code,
            detectors,
            snr,
            threads,
        } => {
            let (mut raw, _) = load(cli, env, code)?;
            if let Some(d) = detectors {
                raw.set("sim", "detectors", d, "detectors")?;
            }
            apply_sim_flags(&mut raw, snr.as_deref(), *threads)?;
            let cfg = raw.build()?;
            let kinds = cfg.sim.detectors.clone();
            cmd_simulate(&cfg, &kinds, true, out)
        }
    }
}

fn apply_sim_flags(raw: &mut RawConfig, snr: Option<&str>, threads: Option<usize>) -> Result<()> {
    if let Some(s) = snr {
        raw.set("sim", "snr_db", s, "snr")?;
    }
    if let Some(t) = threads {
        raw.set("sim", "threads", &t.to_string(), "threads")?;
    }
    Ok(())
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn cmd_encode(cfg: &RunConfig, labels: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let spec = &cfg.spec;
    writeln!(
        out,
        "B_{{{},{},{}}}: T = {}, M = {}, P = {}, L = {}",
        spec.m(),
        spec.t(),
        spec.p(),
        spec.t(),
        spec.m(),
        spec.p(),
        spec.num_symbols()
    )
    .map_err(io)?;
    let layout = spec.symbolic_layout()?;
    let width = layout.iter().flatten().map(String::len).max().unwrap_or(1);
    for row in &layout {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        writeln!(out, "  {}", cells.join("  ")).map_err(io)?;
    }
    writeln!(out, "rotation:").map_err(io)?;
    let theta = spec.rotation().mat();
    for r in 0..theta.rows() {
        let cells: Vec<String> = theta
            .row(r)
            .iter()
            .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
            .collect();
        writeln!(out, "  {}", cells.join("  ")).map_err(io)?;
    }
    let c = spec.constellation();
    let l = spec.num_symbols();
    let labels: Vec<usize> = match labels {
        Some(text) => text
            .split(',')
            .map(|x| x.trim().parse::<usize>().ok().filter(|&v| v < c.size()))
            .collect::<Option<Vec<_>>>()
            .filter(|v| v.len() == l)
            .ok_or_else(|| {
                Error::Config(format!("--labels expects {l} integers below {}", c.size()))
            })?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.sim.seed);
            (0..l).map(|_| rng.gen_range(0..c.size())).collect()
        }
    };
    let s: Vec<_> = labels.iter().map(|&v| c.point(v)).collect();
    let b = spec.encode(&s)?;
    let text: Vec<String> = labels.iter().map(usize::to_string).collect();
    writeln!(out, "labels = {}", text.join(",")).map_err(io)?;
    writeln!(out, "codeword:").map_err(io)?;
    for r in 0..b.mat.rows() {
        let cells: Vec<String> = b
            .mat
            .row(r)
            .iter()
            .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
            .collect();
        writeln!(out, "  {}", cells.join("  ")).map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn cmd_rate(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let spec = &cfg.spec;
    let r = spec.rate();
    let sr = spec.symbol_rate();
    let c = spec.constellation();
    let g = cfg
        .detector
        .grouping
        .clone()
        .unwrap_or_else(|| spec.default_grouping());
    let cx = complexity_estimate(&g, c.size());
    let lines = [
        format!("code = B_{{{},{},{}}}", spec.m(), spec.t(), spec.p()),
        format!(
            "rate = {}/{} ({:.4}) symbols per channel use",
            r.numer(),
            r.denom(),
            *r.numer() as f64 / *r.denom() as f64
        ),
        format!("symbol_rate = {}/{} (L / T)", sr.numer(), sr.denom()),
        format!("mu = {:.6}", spec.normalization_mu()),
        format!("grouping = {g}"),
        format!(
            "pic_complexity = {}{} ({} groups, |A| = {})",
            cx.value,
            if cx.saturated { " (saturated)" } else { "" },
            g.len(),
            c.size()
        ),
        format!(
            "bits_per_channel_use = {:.4}",
            spec.num_symbols() as f64 * c.bits_per_symbol() as f64 / spec.t() as f64
        ),
    ];
    for l in lines {
        writeln!(out, "{l}").map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn write_report(cfg: &RunConfig, report: &CertReport) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output.dir)?;
    let path = cfg.output.dir.join(&cfg.output.report);
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn cmd_analyze(
    cfg: &RunConfig,
    check: Check,
    exhaustive: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let spec = &cfg.spec;
    let c: &Constellation = spec.constellation();
    let report = match check {
        Check::Rank => {
            let mode = if exhaustive {
                RankMode::Exhaustive
            } else {
                RankMode::Sampled {
                    n: cfg.analyze_samples,
                    seed: cfg.sim.seed,
                }
            };
            rank_criterion_check(spec, c, mode)?
        }
        Check::Pic | Check::PicSic => {
            let mut opts = PicCertOptions::new(cfg.analyze_channels, cfg.sim.seed);
            opts.grouping = cfg.detector.grouping.clone();
            opts.threads = cfg.sim.threads;
            opts.n_rx = cfg.analyze_n_rx;
            if check == Check::Pic {
                pic_criterion_check_with(spec, c, &opts)?
            } else {
                pic_sic_criterion_check_with(spec, c, &opts)?
            }
        }
    };
    let path = write_report(cfg, &report)?;
    let fmt_opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6e}"));
    let lines = [
        format!("check = {}", report.check),
        format!(
            "code = B_{{{},{},{}}} {}",
            spec.m(),
            spec.t(),
            spec.p(),
            c.name()
        ),
        format!("trials = {}", report.trials),
        format!(
            "min_rank = {}",
            report.min_rank.map_or("n/a".to_string(), |r| r.to_string())
        ),
        format!("min_residual = {}", fmt_opt(report.min_residual)),
        format!("tol = {:e}", report.tol),
        format!("witnesses = {}", report.witnesses.len()),
        format!("pass = {}", report.pass),
        format!("report = {}", path.display()),
    ];
    for l in lines {
        writeln!(out, "{l}").map_err(io)?;
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_CERT_FAIL })
}

fn csv_path(dir: &Path, base: &str, kind: DetectorKind, many: bool) -> PathBuf {
    if !many {
        return dir.join(base);
    }
    let p = Path::new(base);
    let stem = p
        .file_stem()
        .map_or("ber".into(), |s| s.to_string_lossy().into_owned());
    let ext = p
        .extension()
        .map_or("csv".into(), |s| s.to_string_lossy().into_owned());
    dir.join(format!("{stem}_{}.{ext}", kind.name()))
}

fn cmd_simulate(
    cfg: &RunConfig,
    kinds: &[DetectorKind],
    plot: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    fs::create_dir_all(&cfg.output.dir)?;
    let mut series: Vec<(String, Vec<BerPoint>)> = Vec::new();
    for &kind in kinds {
        let points = sweep(&cfg.sim_config(kind))?;
        let path = csv_path(&cfg.output.dir, &cfg.output.csv, kind, plot);
        let mut buf = Vec::new();
        write_csv(&points, &mut buf)?;
        fs::write(&path, &buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        writeln!(out, "# {kind} -> {}", path.display()).map_err(io)?;
        out.write_all(&buf).map_err(io)?;
        series.push((kind.name().to_string(), points));
    }
    if plot {
        if let Some(name) = &cfg.output.plot {
            let path = cfg.output.dir.join(name);
            match plot::emit_plot(&series, &path) {
                Ok(()) => writeln!(out, "# plot -> {}", path.display()).map_err(io)?,
                Err(Error::InvalidArgument(msg)) => {
                    writeln!(out, "# plot skipped: {msg}").map_err(io)?
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Outcome {
        code: i32,
        out: String,
        err: String,
    }

    fn call(args: &[&str], env: &[(&str, &str)]) -> Outcome {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("stbc-pic").chain(args.iter().copied());
        let env = env
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let code = run(argv, env, &mut out, &mut err);
        Outcome {
            code,
            out: String::from_utf8(out).unwrap(),
            err: String::from_utf8(err).unwrap(),
        }
    }

    fn field<'a>(out: &'a str, key: &str) -> &'a str {
        out.lines()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
            .unwrap_or_else(|| panic!("no {key} in {out}"))
    }

    #[test]
    fn encode_prints_layout() {
        let r = call(&["encode", "--spec", "4,6"], &[]);
        assert_eq!(r.code, 0, "{}", r.err);
        assert!(r.out.contains("-X4,1*  -X3,2*   X2,1*   X1,2*"));
        let r = call(
            &[
                "encode",
                "--M",
                "4",
                "--T",
                "6",
                "--constellation",
                "bpsk",
                "--labels",
                "0,1,0,1,1,1,0,0",
            ],
            &[],
        );
        assert_eq!(r.code, 0, "{}", r.err);
        assert_eq!(r.out.lines().skip_while(|l| *l != "codeword:").count(), 7);
        let r = call(
            &[
                "encode",
                "--spec",
                "4,6",
                "--constellation",
                "bpsk",
                "--labels",
                "0,2",
            ],
            &[],
        );
        assert_eq!(r.code, EXIT_CONFIG);
    }

    #[test]
    fn rate_fields() {
        let r = call(&["rate", "--spec", "8,10"], &[]);
        assert_eq!(r.code, 0);
        assert_eq!(
            field(&r.out, "rate"),
            "8/5 (1.6000) symbols per channel use"
        );
        assert_eq!(
            field(&r.out, "pic_complexity"),
            "262144 (4 groups, |A| = 16)"
        );
        let r = call(&["rate", "--spec", "4,6", "--groups", "1,2,3,4|5,6,7,8"], &[]);
        assert_eq!(field(&r.out, "pic_complexity"), "131072 (2 groups, |A| = 16)");
        let r = call(&["rate", "--spec", "4,6", "--groups", "1,2|3"], &[]);
        assert_eq!(r.code, EXIT_CONFIG);
        let r = call(&["rate", "--spec", "3,6"], &[]);
        assert_eq!(
            field(&r.out, "rate"),
            "1/1 (1.0000) symbols per channel use"
        );
        assert_eq!(field(&r.out, "symbol_rate"), "4/3 (L / T)");
    }

    #[test]
    fn usage_and_config_errors_exit_2() {
        assert_eq!(call(&["frobnicate"], &[]).code, EXIT_CONFIG);
        assert_eq!(call(&["--help"], &[]).code, EXIT_OK);
        let r = call(&["rate", "--M", "4", "--T", "5"], &[]);
        assert_eq!(r.code, EXIT_CONFIG);
        assert!(r.err.contains("T = 2P + M - 2"), "{}", r.err);
        let r = call(&["rate"], &[("STBCPIC_CODE_CONSTELLATION", "qam8")]);
        assert_eq!(r.code, EXIT_CONFIG);
        assert!(r.err.contains("STBCPIC_CODE_CONSTELLATION"), "{}", r.err);
        let r = call(&["simulate", "--detector", "sphere"], &[]);
        assert_eq!(r.code, EXIT_CONFIG);
        let r = call(&["rate", "--config", "/nonexistent/x.ini"], &[]);
        assert_eq!(r.code, EXIT_CONFIG);
    }

    #[test]
    fn env_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        fs::write(&path, "[code]\nm = 8\nt = 10\n").unwrap();
        let p = path.to_str().unwrap();
        assert!(call(&["rate", "--config", p], &[])
            .out
            .contains("B_{8,10,2}"));
        let r = call(
            &["rate", "--config", p],
            &[("STBCPIC_CODE_M", "4"), ("STBCPIC_CODE_T", "6")],
        );
        assert!(r.out.contains("B_{4,6,2}"), "{}", r.err);
        // flags beat the environment
        let r = call(
            &["rate", "--config", p, "--T", "8"],
            &[("STBCPIC_CODE_M", "4")],
        );
        assert!(r.out.contains("B_{4,8,3}"), "{}", r.err);
    }

    #[test]
    fn analyze_writes_report_and_flags_failure() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let r = call(
            &[
                "analyze",
                "rank",
                "--spec",
                "4,6",
                "--constellation",
                "bpsk",
                "--exhaustive",
                "--out",
                out,
            ],
            &[],
        );
        assert_eq!(r.code, 0, "{}", r.err);
        assert_eq!(field(&r.out, "trials"), "6560");
        assert_eq!(field(&r.out, "min_rank"), "4");
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert_eq!(json["pass"], true);
        assert_eq!(json["min_rank"], 4);

        let args = [
            "analyze",
            "pic-sic",
            "--spec",
            "4,8",
            "--constellation",
            "qam4",
            "--channels",
            "20",
            "--out",
            out,
        ];
        let r = call(&args, &[]);
        assert_eq!(r.code, EXIT_CERT_FAIL, "{}", r.err);
        assert_eq!(field(&r.out, "pass"), "false");
        let mut two = args.to_vec();
        two.extend(["--N", "2"]);
        assert_eq!(call(&two, &[]).code, EXIT_OK);
    }

    #[test]
    fn guard_maps_to_exit_3() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.ini");
        fs::write(&path, "[code]\nm = 8\nt = 10\nconstellation = qam64\n[detector]\nkind = ml\nml = exhaustive\n[sim]\nsnr_db = 10\n").unwrap();
        let r = call(
            &[
                "simulate",
                "--config",
                path.to_str().unwrap(),
                "--out",
                dir.path().to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(r.code, EXIT_GUARD, "{}", r.err);
    }

    #[test]
    fn simulate_and_sweep_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let common = [
            "--spec",
            "4,6",
            "--constellation",
            "qam4",
            "--N",
            "2",
            "--snr",
            "0,3,6",
            "--seed",
            "9",
            "--out",
            out,
        ];
        let mut args = vec!["simulate"];
        args.extend(common);
        let r = call(&args, &[("STBCPIC_SIM_TARGET_FRAME_ERRORS", "20")]);
        assert_eq!(r.code, 0, "{}", r.err);
        let csv = fs::read_to_string(dir.path().join("ber.csv")).unwrap();
        assert_eq!(csv.lines().next().unwrap(), crate::sim::CSV_HEADER);
        assert_eq!(csv.lines().count(), 4);

        let mut args = vec!["sweep", "--detectors", "pic,zf", "--threads", "2"];
        args.extend(common);
        let r = call(&args, &[("STBCPIC_SIM_TARGET_FRAME_ERRORS", "20")]);
        assert_eq!(r.code, 0, "{}", r.err);
        let pic = fs::read_to_string(dir.path().join("ber_pic.csv")).unwrap();
        assert!(dir.path().join("ber_zf.csv").exists());
        let svg = fs::read_to_string(dir.path().join("ber.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        // same seed, different thread count: same bytes as the single-detector run
        assert_eq!(pic, csv);
    }
}
