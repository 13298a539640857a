//! Command line and config file parsing into a validated [`RunPlan`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use circmix_core::{Kernel, Rat};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the directory for artifacts when `--out` is
/// not given.
pub const OUT_DIR_ENV: &str = "CIRCMIX_OUT_DIR";

#[derive(Debug)]
pub enum PlanError {
    Usage(String),
    Io(String),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::Usage(m) | PlanError::Io(m) => f.write_str(m),
        }
    }
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    s.parse::<Rat>().map_err(|e| e.to_string())
}

fn parse_m(s: &str) -> Result<usize, String> {
    let m: usize = s.parse().map_err(|_| format!("{s:?} is not a cell count"))?;
    check_m(m)?;
    Ok(m)
}

fn check_m(m: usize) -> Result<(), String> {
    if m == 0 || !m.is_multiple_of(30) {
        return Err(format!("cell count {m} must be a positive multiple of 30"));
    }
    Ok(())
}

/// `lo:hi` with rational endpoints.
fn parse_range(s: &str) -> Result<(Rat, Rat), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("{s:?} is not of the form lo:hi"))?;
    let (lo, hi) = (parse_rat(lo)?, parse_rat(hi)?);
    if lo.is_negative() || lo > hi || hi > Rat::one() {
        return Err(format!("{s:?} is not a subinterval of [0, 1]"));
    }
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "circmix", version, about = "Noisy circle map x -> x/2 + b + U[0, w] (mod 1)")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Map offset b, as p/q
    #[arg(long, global = true, value_parser = parse_rat)]
    pub b: Option<Rat>,
    /// Noise width w, as p/q
    #[arg(long, global = true, value_parser = parse_rat)]
    pub width: Option<Rat>,
    /// Ulam cell count, a multiple of 30
    #[arg(long, global = true, value_parser = parse_m)]
    pub m: Option<usize>,
    /// Number of steps
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Number of Monte Carlo samples or runs
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; defaults to stdout, or a file under $CIRCMIX_OUT_DIR
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value file supplying defaults for the flags above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact branch table, fixed points and rotation averages of g^n
    Map(MapArgs),
    /// Sample paths, or estimate K^n(x0, target)
    Simulate(SimulateArgs),
    /// Ulam transition matrix, or a propagated cell density
    Ulam(UlamArgs),
    /// Meeting-time histogram of the coupled pair
    Couple(CoupleArgs),
    /// Exact verification of the lower-bound catalog and rate constants
    Certify,
    /// Stationary law, mixing curves and decay-factor estimate
    Spectrum(SpectrumArgs),
    /// Three-band snapshots for n = 1..N and the long-horizon decay
    ReproduceLm(ReproduceArgs),
}

#[derive(Args, Debug)]
pub struct MapArgs {
    /// Iterate count (same as --n)
    #[arg(long)]
    pub iterate: Option<usize>,
    /// Emit the branch table (the default when nothing else is asked)
    #[arg(long)]
    pub table: bool,
    #[arg(long)]
    pub fixed_points: bool,
    /// Start of an orbit for the rotation average
    #[arg(long, value_parser = parse_rat)]
    pub orbit: Option<Rat>,
    /// Orbit length for the rotation average
    #[arg(long, default_value_t = 10_000)]
    pub orbit_len: usize,
    /// Reference arc lo:hi; defaults to the wrap set of g
    #[arg(long, value_parser = parse_range)]
    pub arc: Option<(Rat, Rat)>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_rat, default_value = "0")]
    pub x0: Rat,
    /// Target interval lo:hi; switches to probability estimation
    #[arg(long, value_parser = parse_range)]
    pub target: Option<(Rat, Rat)>,
}

#[derive(Args, Debug)]
pub struct UlamArgs {
    /// Write the cell density after --n steps instead of the matrix
    #[arg(long)]
    pub propagate: bool,
    /// Start from the cell containing this point instead of uniform
    #[arg(long, value_parser = parse_rat)]
    pub x0: Option<Rat>,
}

#[derive(Args, Debug)]
pub struct CoupleArgs {
    #[arg(long, value_parser = parse_rat, default_value = "0")]
    pub x0: Rat,
    #[arg(long, value_parser = parse_rat, default_value = "1/10")]
    pub y0: Rat,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// Steps discarded before the decay-factor fit
    #[arg(long, default_value_t = 50)]
    pub burnin: usize,
    /// Length of the decay-factor fit window
    #[arg(long, default_value_t = 200)]
    pub window: usize,
    /// Stationary residual tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Length of the decay curve
    #[arg(long, default_value_t = 500)]
    pub horizon: usize,
    /// Band length cap, as p/q
    #[arg(long, value_parser = parse_rat, default_value = "1/6")]
    pub band: Rat,
    /// Where to write the decay curve; defaults next to --out
    #[arg(long)]
    pub decay_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sub {
    Map,
    Simulate,
    Ulam,
    Couple,
    Certify,
    Spectrum,
    ReproduceLm,
}

impl Sub {
    pub fn name(self) -> &'static str {
        match self {
            Sub::Map => "map",
            Sub::Simulate => "simulate",
            Sub::Ulam => "ulam",
            Sub::Couple => "couple",
            Sub::Certify => "certify",
            Sub::Spectrum => "spectrum",
            Sub::ReproduceLm => "reproduce-lm",
        }
    }

    fn default_n(self) -> usize {
        match self {
            Sub::Map => 1,
            Sub::Simulate => 100,
            Sub::Ulam => 10,
            Sub::Couple => 1000,
            Sub::Certify => 15,
            Sub::Spectrum => 500,
            Sub::ReproduceLm => 12,
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Sub::Simulate => 1,
            Sub::Couple => 100_000,
            _ => 0,
        }
    }

    fn default_format(self) -> Format {
        match self {
            Sub::Certify => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Everything needed to run one subcommand, fully resolved.
#[derive(Debug)]
pub struct RunPlan {
    pub sub: Sub,
    pub b: Rat,
    pub width: Rat,
    pub m: usize,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub command: Command,
}

impl RunPlan {
    pub fn kernel(&self) -> Kernel {
        Kernel::with_params(self.b.clone(), self.width.clone()).expect("validated in parse")
    }

    /// Single line with every resolved parameter that can affect output.
    pub fn header(&self) -> String {
        let mut s = format!(
            "circmix {} b={} width={} m={} n={} samples={} seed={} format={}",
            self.sub.name(),
            self.b,
            self.width,
            self.m,
            self.n,
            self.samples,
            self.seed,
            self.format.as_str()
        );
        for (k, v) in self.extra_params() {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }

    fn extra_params(&self) -> Vec<(&'static str, String)> {
        match &self.command {
            Command::Map(a) => {
                let mut v = vec![("table", a.table.to_string()), ("fixed_points", a.fixed_points.to_string())];
                if let Some(x) = &a.orbit {
                    v.push(("orbit", x.to_string()));
                    v.push(("orbit_len", a.orbit_len.to_string()));
                }
                if let Some((lo, hi)) = &a.arc {
                    v.push(("arc", format!("{lo}:{hi}")));
                }
                v
            }
            Command::Simulate(a) => {
                let mut v = vec![("x0", a.x0.to_string())];
                if let Some((lo, hi)) = &a.target {
                    v.push(("target", format!("{lo}:{hi}")));
                }
                v
            }
            Command::Ulam(a) => {
                let mut v = vec![("propagate", a.propagate.to_string())];
                if let Some(x) = &a.x0 {
                    v.push(("x0", x.to_string()));
                }
                v
            }
            Command::Couple(a) => vec![("x0", a.x0.to_string()), ("y0", a.y0.to_string())],
            Command::Certify => Vec::new(),
            Command::Spectrum(a) => vec![
                ("burnin", a.burnin.to_string()),
                ("window", a.window.to_string()),
                ("tol", format!("{:e}", a.tol)),
            ],
            Command::ReproduceLm(a) => vec![("horizon", a.horizon.to_string()), ("band", a.band.to_string())],
        }
    }
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, PlanError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PlanError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            PlanError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn from_config<T>(
    config: &BTreeMap<String, String>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>, PlanError> {
    config
        .get(key)
        .map(|v| parse(v).map_err(|e| PlanError::Usage(format!("config key {key}: {e}"))))
        .transpose()
}

const CONFIG_KEYS: [&str; 8] = ["b", "width", "m", "n", "samples", "seed", "format", "out"];

/// Resolves flags over config values over defaults, and validates.
pub fn resolve(cli: Cli) -> Result<RunPlan, PlanError> {
    let config = match &cli.global.config {
        Some(p) => read_config(p)?,
        None => BTreeMap::new(),
    };
    if let Some(k) = config.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(PlanError::Usage(format!("unknown config key {k:?}")));
    }
    let sub = match &cli.command {
        Command::Map(_) => Sub::Map,
        Command::Simulate(_) => Sub::Simulate,
        Command::Ulam(_) => Sub::Ulam,
        Command::Couple(_) => Sub::Couple,
        Command::Certify => Sub::Certify,
        Command::Spectrum(_) => Sub::Spectrum,
        Command::ReproduceLm(_) => Sub::ReproduceLm,
    };
    let g = cli.global;
    let parse_usize = |s: &str| s.parse::<usize>().map_err(|_| format!("{s:?} is not a count"));
    let b = g.b.map_or_else(|| from_config(&config, "b", parse_rat), |v| Ok(Some(v)))?;
    let width = g.width.map_or_else(|| from_config(&config, "width", parse_rat), |v| Ok(Some(v)))?;
    let m = g.m.map_or_else(|| from_config(&config, "m", parse_m), |v| Ok(Some(v)))?;
    let iterate = match &cli.command {
        Command::Map(a) => a.iterate,
        _ => None,
    };
    if let (Some(i), Some(n)) = (iterate, g.n) {
        if i != n {
            return Err(PlanError::Usage(format!("--iterate {i} conflicts with --n {n}")));
        }
    }
    let n = g.n.or(iterate).map_or_else(|| from_config(&config, "n", parse_usize), |v| Ok(Some(v)))?;
    let samples = g.samples.map_or_else(|| from_config(&config, "samples", parse_usize), |v| Ok(Some(v)))?;
    let seed = g.seed.map_or_else(
        || from_config(&config, "seed", |s| s.parse::<u64>().map_err(|_| format!("{s:?} is not a seed"))),
        |v| Ok(Some(v)),
    )?;
    let format = g.format.map_or_else(
        || from_config(&config, "format", |s| Format::from_str(s, false)),
        |v| Ok(Some(v)),
    )?;
    let out = g.out.or_else(|| config.get("out").map(PathBuf::from));

    let b = b.unwrap_or_else(|| Rat::new(17, 30));
    let width = width.unwrap_or_else(|| Rat::new(1, 15));
    let m = m.unwrap_or(1440);
    check_m(m).map_err(PlanError::Usage)?;
    Kernel::with_params(b.clone(), width.clone()).map_err(|e| PlanError::Usage(e.to_string()))?;
    let plan = RunPlan {
        sub,
        b,
        width,
        m,
        n: n.unwrap_or(sub.default_n()),
        samples: samples.unwrap_or(sub.default_samples()),
        seed: seed.unwrap_or(circmix_core::Seed::default().0),
        format: format.unwrap_or(sub.default_format()),
        out,
        threads: g.threads,
        command: cli.command,
    };
    validate(&plan)?;
    Ok(plan)
}

fn validate(plan: &RunPlan) -> Result<(), PlanError> {
    let usage = |m: String| Err(PlanError::Usage(m));
    if plan.threads == Some(0) {
        return usage("--threads must be positive".into());
    }
    match &plan.command {
        Command::Map(_) if plan.n == 0 => usage("--iterate must be at least 1".into()),
        Command::Simulate(_) | Command::Couple(_) if plan.samples == 0 => {
            usage("--samples must be at least 1".into())
        }
        Command::Spectrum(a) if a.window < 10 => usage("--window must be at least 10".into()),
        Command::Spectrum(a) if a.tol.is_nan() || a.tol <= 0.0 => usage("--tol must be positive".into()),
        Command::ReproduceLm(a) if !a.band.is_positive() || a.band > Rat::new(1, 3) => {
            usage("--band must be in (0, 1/3]".into())
        }
        Command::ReproduceLm(_) | Command::Spectrum(_) if plan.n == 0 => usage("--n must be at least 1".into()),
        _ => Ok(()),
    }
}

/// Parses `argv` into a plan. Clap errors are returned unchanged so the
/// caller can print them with their own exit status.
pub fn parse<I, T>(argv: I) -> Result<Result<RunPlan, PlanError>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(resolve(cli))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(args: &[&str]) -> RunPlan {
        let mut argv = vec!["circmix"];
        argv.extend_from_slice(args);
        parse(argv).unwrap().unwrap()
    }

    fn usage_error(args: &[&str]) -> bool {
        let mut argv = vec!["circmix"];
        argv.extend_from_slice(args);
        match parse(argv) {
            Err(e) => e.exit_code() == 2,
            Ok(Err(PlanError::Usage(_))) => true,
            _ => false,
        }
    }

    #[test]
    fn defaults() {
        let p = plan(&["certify", "--format", "json"]);
        assert_eq!(p.b, Rat::new(17, 30));
        assert_eq!(p.width, Rat::new(1, 15));
        assert_eq!(p.m, 1440);
        assert_eq!(p.format, Format::Json);
        assert_eq!(plan(&["certify"]).format, Format::Json);
        assert_eq!(plan(&["ulam"]).format, Format::Csv);
    }

    #[test]
    fn global_flags_on_either_side() {
        let p = plan(&["--b", "19/30", "map", "--iterate", "3"]);
        assert_eq!(p.b, Rat::new(19, 30));
        assert_eq!(p.n, 3);
        let q = plan(&["map", "--b", "17/30", "--iterate", "3", "--table"]);
        assert_eq!(q.b, Rat::new(17, 30));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(usage_error(&["ulam", "--m", "1000"]));
        assert!(usage_error(&["map", "--b", "0.5"]));
        assert!(usage_error(&["map", "--bogus"]));
        assert!(usage_error(&["map", "--iterate", "0"]));
        assert!(usage_error(&["map", "--iterate", "2", "--n", "3"]));
        assert!(usage_error(&["certify", "--width", "2"]));
        assert!(usage_error(&["reproduce-lm", "--band", "1/2"]));
        assert!(usage_error(&["frobnicate"]));
    }

    #[test]
    fn header_lists_resolved_values() {
        let p = plan(&["simulate", "--seed", "9", "--threads", "4"]);
        assert_eq!(
            p.header(),
            "circmix simulate b=17/30 width=1/15 m=1440 n=100 samples=1 seed=9 format=csv x0=0/1"
        );
    }

    #[test]
    fn config_values_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\nb = 19/30\nm=60\nseed=3\n").unwrap();
        let cfg = path.to_str().unwrap();
        let p = plan(&["--config", cfg, "ulam", "--seed", "4"]);
        assert_eq!(p.b, Rat::new(19, 30));
        assert_eq!(p.m, 60);
        assert_eq!(p.seed, 4);
        std::fs::write(&path, "m=100\n").unwrap();
        assert!(usage_error(&["--config", cfg, "ulam"]));
        std::fs::write(&path, "colour=red\n").unwrap();
        assert!(usage_error(&["--config", cfg, "ulam"]));
        let missing = dir.path().join("nope.conf");
        let argv = ["circmix", "--config", missing.to_str().unwrap(), "ulam"];
        assert!(matches!(parse(argv).unwrap(), Err(PlanError::Io(_))));
    }
}
