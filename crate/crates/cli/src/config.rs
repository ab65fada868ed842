//! Merging command-line flags with an optional JSON config file into a
//! fully resolved [`RunConfig`].

use crate::args::{BallArgs, Cli, Command, GridArgs};
use anyhow::{Context, Result};
use hypangle_core::ballenum::{stabilizer_order, BallMode};
use hypangle_core::modgroup::BasePoint;
use hypangle_core::rational::parse_rational;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Invalid or missing arguments; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Contents of `--config`: the same names as the long flags, with `_` for `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub omega: Option<String>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub q: Option<serde_json::Value>,
    pub mode: Option<String>,
    pub max_elements: Option<u64>,
    pub elliptic: Option<u32>,
    pub bin_width: Option<f64>,
    pub xi_max: Option<f64>,
    pub t_cut: Option<serde_json::Value>,
    pub emit: Option<String>,
    pub m: Option<String>,
    pub xi: Option<f64>,
    pub method: Option<String>,
    pub samples: Option<u64>,
    pub delta: Option<u64>,
    pub delta_max: Option<u64>,
    pub x: Option<f64>,
    pub t_grid: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }
}

/// Rationals may be written as JSON numbers or strings.
fn value_str(v: &Option<serde_json::Value>) -> Option<String> {
    match v {
        Some(serde_json::Value::String(s)) => Some(s.clone()),
        Some(other) => Some(other.to_string()),
        None => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BallConfig {
    /// Q as given (exact rational text).
    pub q: String,
    pub mode: BallMode,
    pub max_elements: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridConfig {
    pub elliptic: u32,
    pub bin_width: f64,
    pub xi_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethodArg {
    Mc,
    Closed,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Count,
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Params {
    Enumerate { ball: BallConfig, emit: Emit },
    Paircorr { ball: BallConfig, grid: GridConfig },
    Density { t_cut: String, grid: GridConfig },
    Compare { ball: BallConfig, t_cut: String, grid: GridConfig },
    Volumes { m: [i128; 4], xi: f64, method: VolumeMethodArg, samples: u64, emit: Emit },
    Geodesics { delta: Option<u64>, delta_max: Option<u64> },
    Selberg { x: f64, t_start: f64, t_stop: f64, t_step: f64 },
}

/// Everything a run depends on. `threads` and `out` do not affect results and
/// are kept out of the CSV header.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub omega: String,
    pub seed: u64,
    #[serde(flatten)]
    pub params: Params,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_MAX_ELEMENTS: u64 = 400_000_000;

fn parse_mode(s: &str) -> Result<BallMode> {
    s.parse().map_err(|e: hypangle_core::Error| UsageError(e.to_string()).into())
}

fn check_rational(name: &str, s: &str) -> Result<String> {
    let r = parse_rational(s).map_err(|e| UsageError(format!("--{name}: {e}")))?;
    if r <= num_rational::BigRational::from_integer(0.into()) {
        return usage(format!("--{name} must be positive"));
    }
    Ok(s.trim().to_string())
}

fn ball(a: &BallArgs, f: &FileConfig) -> Result<BallConfig> {
    let q = match a.q.clone().or_else(|| value_str(&f.q)) {
        Some(q) => check_rational("q", &q)?,
        None => return usage("--q is required"),
    };
    let mode = parse_mode(a.mode.as_deref().or(f.mode.as_deref()).unwrap_or("full"))?;
    let max_elements = a.max_elements.or(f.max_elements).unwrap_or(DEFAULT_MAX_ELEMENTS);
    Ok(BallConfig { q, mode, max_elements })
}

fn grid(a: &GridArgs, f: &FileConfig, omega: &BasePoint) -> Result<GridConfig> {
    let order = stabilizer_order(omega);
    let elliptic = a.elliptic.or(f.elliptic).unwrap_or(order);
    if elliptic != 1 && elliptic != order {
        return usage(format!("--elliptic {elliptic} does not match omega (stabilizer order {order}); use 1 or {order}"));
    }
    let bin_width = a.bin_width.or(f.bin_width).unwrap_or(0.05);
    let xi_max = a.xi_max.or(f.xi_max).unwrap_or(4.0);
    if !(bin_width > 0.0 && bin_width.is_finite()) || !(xi_max > 0.0 && xi_max.is_finite()) {
        return usage("--bin-width and --xi-max must be positive");
    }
    if xi_max / bin_width > 1e7 {
        return usage("grid has more than 10^7 bins");
    }
    Ok(GridConfig { elliptic, bin_width, xi_max })
}

fn t_cut(a: &Option<String>, f: &FileConfig) -> Result<String> {
    check_rational("t-cut", &a.clone().or_else(|| value_str(&f.t_cut)).unwrap_or_else(|| "10000".into()))
}

fn emit(s: Option<&str>, default: Emit, allowed: &[Emit]) -> Result<Emit> {
    let e = match s {
        None => default,
        Some("count") => Emit::Count,
        Some("csv") => Emit::Csv,
        Some("json") => Emit::Json,
        Some(other) => return usage(format!("unknown --emit value `{other}`")),
    };
    if !allowed.contains(&e) {
        return usage(format!("--emit {e:?} is not available here").to_lowercase());
    }
    Ok(e)
}

fn parse_matrix(s: &str) -> Result<[i128; 4]> {
    let v: Vec<i128> = s
        .split(',')
        .map(|p| p.trim().parse::<i128>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| UsageError(format!("--m expects four integers a,b,c,d, got `{s}`")))?;
    match v.as_slice() {
        &[a, b, c, d] => Ok([a, b, c, d]),
        _ => usage(format!("--m expects four integers a,b,c,d, got `{s}`")),
    }
}

fn parse_t_grid(s: &str) -> Result<(f64, f64, f64)> {
    let v: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| UsageError(format!("--t-grid expects start:stop:step, got `{s}`")))?;
    match v.as_slice() {
        &[a, b, h] if h > 0.0 && b >= a && a.is_finite() && b.is_finite() && (b - a) / h <= 1e6 => Ok((a, b, h)),
        _ => usage(format!("--t-grid expects start:stop:step with step > 0 and stop ≥ start, got `{s}`")),
    }
}

/// Applies config-file values under the flags and fills defaults.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let omega_s = cli.omega.clone().or(file.omega.clone()).unwrap_or_else(|| "i".into());
    let omega = BasePoint::parse(&omega_s).map_err(|e| UsageError(format!("--omega: {e}")))?;
    let threads = cli.threads.or(file.threads);
    if threads == Some(0) {
        return usage("--threads must be at least 1");
    }
    let f = &file;
    let params = match &cli.command {
        Command::Enumerate(a) => Params::Enumerate {
            ball: ball(&a.ball, f)?,
            emit: emit(a.emit.as_deref().or(f.emit.as_deref()), Emit::Count, &[Emit::Count, Emit::Csv])?,
        },
        Command::Paircorr(a) => Params::Paircorr { ball: ball(&a.ball, f)?, grid: grid(&a.grid, f, &omega)? },
        Command::Density(a) => Params::Density { t_cut: t_cut(&a.t_cut, f)?, grid: grid(&a.grid, f, &omega)? },
        Command::Compare(a) => Params::Compare {
            ball: ball(&a.ball, f)?,
            t_cut: t_cut(&a.t_cut, f)?,
            grid: grid(&a.grid, f, &omega)?,
        },
        Command::Volumes(a) => {
            let m = match a.m.as_deref().or(f.m.as_deref()) {
                Some(s) => parse_matrix(s)?,
                None => return usage("--m is required"),
            };
            let xi = match a.xi.or(f.xi) {
                Some(x) if x > 0.0 && x.is_finite() => x,
                Some(_) => return usage("--xi must be positive"),
                None => return usage("--xi is required"),
            };
            let method = match a.method.as_deref().or(f.method.as_deref()).unwrap_or("both") {
                "mc" => VolumeMethodArg::Mc,
                "closed" => VolumeMethodArg::Closed,
                "both" => VolumeMethodArg::Both,
                other => return usage(format!("unknown --method `{other}`")),
            };
            let samples = a.samples.or(f.samples).unwrap_or(1_000_000);
            if method != VolumeMethodArg::Closed && samples < 1000 {
                return usage("--samples must be at least 1000");
            }
            let emit = emit(a.emit.as_deref().or(f.emit.as_deref()), Emit::Json, &[Emit::Json, Emit::Csv])?;
            Params::Volumes { m, xi, method, samples, emit }
        }
        Command::Geodesics(a) => {
            let (delta, delta_max) = match (a.delta, a.delta_max) {
                (None, None) => (f.delta, f.delta_max),
                given => given,
            };
            if delta.is_some() == delta_max.is_some() {
                return usage("give exactly one of --delta and --delta-max");
            }
            Params::Geodesics { delta, delta_max }
        }
        Command::Selberg(a) => {
            let x = match a.x.or(f.x) {
                Some(x) if x > 0.0 && x.is_finite() => x,
                Some(_) => return usage("--x must be positive"),
                None => return usage("--x is required"),
            };
            emit(a.emit.as_deref().or(f.emit.as_deref()), Emit::Csv, &[Emit::Csv])?;
            let (t_start, t_stop, t_step) = parse_t_grid(a.t_grid.as_deref().or(f.t_grid.as_deref()).unwrap_or("0:10:0.5"))?;
            Params::Selberg { x, t_start, t_stop, t_step }
        }
    };
    Ok(RunConfig {
        omega: omega.to_string(),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        params,
        threads,
        out: cli.out.clone().or(file.out),
    })
}
