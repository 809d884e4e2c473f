// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `run`, `sweep` and `verify`.
//!
//! Every option can also come from a flat `key = value` file given with
//! `--config`; keys are the long flag names without the leading `--`
//! (`_` and `-` are interchangeable), and flags win.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::schedule::{Pairing, DEFAULT_FREE_ANGLE};
use crate::transfer::{
    parse_pairing, run, Backend, Case, FidelityReport, TransferConfig, CSV_HEADER,
};
use crate::verify::{run_suites, Level};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const SWEEP_HEADER: &str = "m,n,F";

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "QST_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "qst",
    version,
    about = "Two-stage quantum walk state transfer on K_{m,n}"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one transfer and print its CSV row.
    Run(RunArgs),
    /// Sweep an (m, n) grid and write `m,n,F` rows.
    Sweep(SweepArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub eps2: Option<f64>,
    /// full, subspace or both.
    #[arg(long)]
    pub backend: Option<String>,
    /// box or theorem.
    #[arg(long)]
    pub pairing: Option<String>,
    /// Value of the unconstrained angles, in radians.
    #[arg(long, allow_negative_numbers = true)]
    pub free_angle: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sender: Option<usize>,
    #[arg(long)]
    pub receiver: Option<usize>,
    #[arg(long)]
    pub h1: Option<usize>,
    #[arg(long)]
    pub h2: Option<usize>,
    /// Print the CSV header before the row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Inclusive range `A..B`.
    #[arg(long)]
    pub m_range: Option<String>,
    /// Inclusive range `A..B`.
    #[arg(long)]
    pub n_range: Option<String>,
    /// same, diff or both.
    #[arg(long)]
    pub case: Option<String>,
    /// Output CSV path; `both` writes `<stem>_same` and `<stem>_diff`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// fast or full.
    #[arg(long, default_value = "fast")]
    pub level: String,
}

/// Parsed `key = value` pairs; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: "expected `key = value`".into(),
            })?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: "empty key".into(),
                });
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let mut unknown: Vec<_> = self
            .values
            .keys()
            .filter(|k| !allowed.contains(&k.as_str()) && k.as_str() != "config")
            .cloned()
            .collect();
        unknown.sort();
        match unknown.first() {
            Some(k) => Err(Error::InvalidConfig(format!("unknown config key {k:?}"))),
            None => Ok(()),
        }
    }

    fn typed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad value {v:?} for {key}")))
            })
            .transpose()
    }
}

const COMMON_KEYS: [&str; 5] = ["eps1", "eps2", "backend", "pairing", "free-angle"];
const RUN_KEYS: [&str; 7] = ["m", "n", "sender", "receiver", "h1", "h2", "header"];
const SWEEP_KEYS: [&str; 4] = ["m-range", "n-range", "case", "out"];

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.typed(key),
    }
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidConfig(format!("missing --{key}")))
}

fn load_file(path: &Option<PathBuf>, extra: &[&str]) -> Result<ConfigFile> {
    let file = match path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let allowed: Vec<&str> = COMMON_KEYS.iter().chain(extra).copied().collect();
    file.check_keys(&allowed)?;
    Ok(file)
}

struct Shared {
    eps1: f64,
    eps2: f64,
    backend: Backend,
    pairing: Pairing,
    free_angle: f64,
}

fn shared(args: &CommonArgs, file: &ConfigFile) -> Result<Shared> {
    let backend = match pick(args.backend.clone(), file, "backend")? {
        Some(b) => b.parse()?,
        None => Backend::default(),
    };
    let pairing = match pick(args.pairing.clone(), file, "pairing")? {
        Some(p) => parse_pairing(&p)?,
        None => Pairing::default(),
    };
    Ok(Shared {
        eps1: required(pick(args.eps1, file, "eps1")?, "eps1")?,
        eps2: required(pick(args.eps2, file, "eps2")?, "eps2")?,
        backend,
        pairing,
        free_angle: pick(args.free_angle, file, "free-angle")?.unwrap_or(DEFAULT_FREE_ANGLE),
    })
}

/// Resolves `run` flags and config file into a validated configuration.
pub fn run_config(args: &RunArgs) -> Result<(TransferConfig, bool)> {
    let file = load_file(&args.common.config, &RUN_KEYS)?;
    let s = shared(&args.common, &file)?;
    let header = args.header || pick(None, &file, "header")?.unwrap_or(false);
    let cfg = TransferConfig::new(
        required(pick(args.m, &file, "m")?, "m")?,
        required(pick(args.n, &file, "n")?, "n")?,
        required(pick(args.sender, &file, "sender")?, "sender")?,
        required(pick(args.receiver, &file, "receiver")?, "receiver")?,
        s.eps1,
        s.eps2,
    )
    .with_backend(s.backend)
    .with_pairing(s.pairing)
    .with_free_angle(s.free_angle)
    .with_steps(pick(args.h1, &file, "h1")?, pick(args.h2, &file, "h2")?);
    cfg.validate()?;
    Ok((cfg, header))
}

/// Parses an inclusive `A..B` range.
pub fn parse_range(text: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::InvalidConfig(format!("bad range {text:?} (expected A..B)"));
    let (a, b) = text.trim().split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(Error::InvalidConfig(format!(
            "range {text:?} must be non-empty with positive bounds"
        )));
    }
    Ok(a..=b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseFilter {
    Same,
    Diff,
    Both,
}

impl FromStr for CaseFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "same" => Ok(CaseFilter::Same),
            "diff" => Ok(CaseFilter::Diff),
            "both" => Ok(CaseFilter::Both),
            other => Err(Error::InvalidConfig(format!(
                "unknown case {other:?} (expected same, diff or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub m_range: RangeInclusive<usize>,
    pub n_range: RangeInclusive<usize>,
    pub eps1: f64,
    pub eps2: f64,
    pub case: CaseFilter,
    pub backend: Backend,
    pub pairing: Pairing,
    pub free_angle: f64,
    pub out: PathBuf,
}

impl SweepSpec {
    /// Cases to run, each with its output path.
    pub fn outputs(&self) -> Vec<(Case, PathBuf)> {
        match self.case {
            CaseFilter::Same => vec![(Case::SamePartition, self.out.clone())],
            CaseFilter::Diff => vec![(Case::DiffPartition, self.out.clone())],
            CaseFilter::Both => vec![
                (Case::SamePartition, suffixed(&self.out, "same")),
                (Case::DiffPartition, suffixed(&self.out, "diff")),
            ],
        }
    }

    /// Checks the per-case minimum partition sizes.
    pub fn validate(&self) -> Result<()> {
        let (m0, n0) = (*self.m_range.start(), *self.n_range.start());
        let same = matches!(self.case, CaseFilter::Same | CaseFilter::Both);
        let diff = matches!(self.case, CaseFilter::Diff | CaseFilter::Both);
        if same && m0 < 2 {
            return Err(Error::InvalidConfig(
                "same-partition sweeps need m >= 2".into(),
            ));
        }
        if diff && self.backend != Backend::FullSpace && (m0 < 2 || n0 < 2) {
            return Err(Error::InvalidConfig(
                "reduced diff-partition sweeps need m, n >= 2".into(),
            ));
        }
        Ok(())
    }

    /// The canonical configuration at one grid point.
    pub fn config(&self, case: Case, m: usize, n: usize) -> TransferConfig {
        let receiver = match case {
            Case::SamePartition => 1,
            Case::DiffPartition => m,
        };
        TransferConfig::new(m, n, 0, receiver, self.eps1, self.eps2)
            .with_backend(self.backend)
            .with_pairing(self.pairing)
            .with_free_angle(self.free_angle)
    }
}

fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

pub fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec> {
    let file = load_file(&args.common.config, &SWEEP_KEYS)?;
    let s = shared(&args.common, &file)?;
    let range = |flag: &Option<String>, key: &str| -> Result<RangeInclusive<usize>> {
        parse_range(&required(pick(flag.clone(), &file, key)?, key)?)
    };
    let case = match pick(args.case.clone(), &file, "case")? {
        Some(c) => c.parse()?,
        None => CaseFilter::Both,
    };
    let spec = SweepSpec {
        m_range: range(&args.m_range, "m-range")?,
        n_range: range(&args.n_range, "n-range")?,
        eps1: s.eps1,
        eps2: s.eps2,
        case,
        backend: s.backend,
        pairing: s.pairing,
        free_angle: s.free_angle,
        out: required(pick(args.out.clone(), &file, "out")?, "out")?,
    };
    spec.validate()?;
    Ok(spec)
}

fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

/// All grid points of one case in m-major order.
pub fn sweep_case(spec: &SweepSpec, case: Case) -> Result<Vec<FidelityReport>> {
    let points: Vec<(usize, usize)> = spec
        .m_range
        .clone()
        .flat_map(|m| spec.n_range.clone().map(move |n| (m, n)))
        .collect();
    let work = || -> Result<Vec<FidelityReport>> {
        points
            .par_iter()
            .map(|&(m, n)| run(&spec.config(case, m, n)))
            .collect()
    };
    match threads_from_env() {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn grid_csv(reports: &[FidelityReport]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!("{},{},{:.16e}\n", r.m, r.n, r.f));
    }
    out
}

/// Writes via a sibling temporary file so a failed write leaves nothing behind.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents.as_bytes())?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = run_config(args).and_then(|(cfg, header)| Ok((run(&cfg)?, header)));
    match result {
        Ok((report, header)) => {
            if header {
                let _ = writeln!(out, "{CSV_HEADER}");
            }
            let _ = writeln!(out, "{}", report.csv_row());
            if report.bound_satisfied {
                EXIT_PASS
            } else {
                let _ = writeln!(
                    err,
                    "fidelity {} is not above the bound {}",
                    report.f, report.bound
                );
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_sweep(args: &SweepArgs, err: &mut dyn Write) -> i32 {
    let spec = match sweep_spec(args) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut code = EXIT_PASS;
    for (case, path) in spec.outputs() {
        let reports = match sweep_case(&spec, case) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
        };
        if let Err(e) = write_atomic(&path, &grid_csv(&reports)) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
        let failures = reports.iter().filter(|r| !r.bound_satisfied).count();
        let (lo, hi) = reports
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.f), hi.max(r.f))
            });
        let _ = writeln!(
            err,
            "{case}: {} points, F in [{lo:.6}, {hi:.6}], {failures} below bound -> {}",
            reports.len(),
            path.display()
        );
        if failures > 0 {
            code = EXIT_FAIL;
        }
    }
    code
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let level: Level = match args.level.parse() {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let results = run_suites(level);
    for r in &results {
        let _ = writeln!(out, "{r}");
    }
    if results.iter().all(|r| r.passed) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Dispatches a parsed command and returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, err),
        Command::Verify(a) => cmd_verify(a, out, err),
    }
}

/// Parses `args` (including the program name) and runs; usage errors map to 2.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(
            std::iter::once("qst").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn config_file_parsing() {
        let f = ConfigFile::parse("# comment\nm = 4\n free_angle= -0.5 # trailing\n\n").unwrap();
        assert_eq!(f.get("m"), Some("4"));
        assert_eq!(f.get("free-angle"), Some("-0.5"));
        assert!(matches!(
            ConfigFile::parse("m 4"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(f.check_keys(&["m"]).is_err());
        assert!(f.check_keys(&["m", "free-angle"]).is_ok());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..40").unwrap(), 3..=40);
        assert_eq!(parse_range(" 2..=5 ").unwrap(), 2..=5);
        assert_eq!(parse_range("7..7").unwrap(), 7..=7);
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("0..3").is_err());
        assert!(parse_range("3-5").is_err());
    }

    #[test]
    fn suffixes() {
        assert_eq!(
            suffixed(Path::new("out/grid.csv"), "same"),
            PathBuf::from("out/grid_same.csv")
        );
        assert_eq!(
            suffixed(Path::new("grid"), "diff"),
            PathBuf::from("grid_diff")
        );
    }

    #[test]
    fn run_prints_row_and_passes() {
        let (code, out, _) = call(&[
            "run",
            "--m",
            "6",
            "--n",
            "4",
            "--sender",
            "0",
            "--receiver",
            "1",
            "--eps1",
            "0.04",
            "--eps2",
            "0.04",
        ]);
        assert_eq!(code, EXIT_PASS);
        assert_eq!(out.lines().count(), 1);
        assert!(out.starts_with("same,6,4,0,1,"));
    }

    #[test]
    fn run_header_and_both_backends() {
        let (code, out, _) = call(&[
            "run",
            "--m",
            "5",
            "--n",
            "5",
            "--sender",
            "0",
            "--receiver",
            "5",
            "--eps1",
            "0.04",
            "--eps2",
            "0.04",
            "--backend",
            "both",
            "--header",
        ]);
        assert_eq!(code, EXIT_PASS);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        let last: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
        assert!(last < 1e-10);
    }

    #[test]
    fn run_usage_errors_exit_two() {
        let (code, _, err) = call(&[
            "run",
            "--m",
            "4",
            "--n",
            "3",
            "--sender",
            "0",
            "--receiver",
            "0",
            "--eps1",
            "0.1",
            "--eps2",
            "0.1",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("sender and receiver"));
        let (code, _, err) = call(&["run", "--m", "4"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("missing"));
        let (code, _, _) = call(&["run", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = call(&[
            "run",
            "--m",
            "4",
            "--n",
            "3",
            "--sender",
            "0",
            "--receiver",
            "1",
            "--eps1",
            "0.1",
            "--eps2",
            "0.1",
            "--h1",
            "4",
        ]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn run_reports_bound_failure() {
        // h1 = 3 on a large side leaves stage 1 far from its target.
        let (code, out, _) = call(&[
            "run",
            "--m",
            "60",
            "--n",
            "3",
            "--sender",
            "0",
            "--receiver",
            "1",
            "--eps1",
            "0.01",
            "--eps2",
            "0.01",
            "--h1",
            "3",
            "--h2",
            "3",
        ]);
        assert_eq!(code, EXIT_FAIL);
        assert!(out.contains(",false,"));
    }

    #[test]
    fn sweep_spec_validation() {
        let args = SweepArgs {
            common: CommonArgs {
                eps1: Some(0.01),
                eps2: Some(0.01),
                backend: Some("subspace".into()),
                ..CommonArgs::default()
            },
            m_range: Some("1..4".into()),
            n_range: Some("1..4".into()),
            case: Some("same".into()),
            out: Some(PathBuf::from("x.csv")),
        };
        assert!(sweep_spec(&args).is_err());
        let args = SweepArgs {
            m_range: Some("2..4".into()),
            case: Some("diff".into()),
            ..args
        };
        assert!(sweep_spec(&args).is_err());
        let args = SweepArgs {
            n_range: Some("2..4".into()),
            ..args
        };
        let spec = sweep_spec(&args).unwrap();
        assert_eq!(
            spec.outputs(),
            vec![(Case::DiffPartition, PathBuf::from("x.csv"))]
        );
        assert_eq!(spec.config(Case::DiffPartition, 3, 2).receiver.0, 3);
    }

    #[test]
    fn grid_is_m_major() {
        let spec = SweepSpec {
            m_range: 3..=4,
            n_range: 1..=3,
            eps1: 0.04,
            eps2: 0.04,
            case: CaseFilter::Same,
            backend: Backend::Subspace,
            pairing: Pairing::default(),
            free_angle: 0.0,
            out: PathBuf::from("unused"),
        };
        let reports = sweep_case(&spec, Case::SamePartition).unwrap();
        let order: Vec<_> = reports.iter().map(|r| (r.m, r.n)).collect();
        assert_eq!(order, vec![(3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3)]);
        let csv = grid_csv(&reports);
        assert!(csv.starts_with("m,n,F\n3,1,"));
        assert_eq!(csv.lines().count(), 7);
    }
}
