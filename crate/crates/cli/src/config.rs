use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anisohardy::dilation::{parse_point, DilatedBall, ExpansiveDilation};
use anisohardy::error::{Error, Result};
use anisohardy::spaces::{parse_space, BallSpace, ExponentBundle};
use clap::Args;

pub const DEFAULT_MATRIX: &str = "2";
pub const DEFAULT_SPACE: &str = "lebesgue:p=0.75";
pub const DEFAULT_SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

/// Flags shared by every command. Each may also come from a `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Dilation matrix, rows separated by ';' and entries by ','.
    #[arg(long, global = true)]
    pub matrix: Option<String>,
    /// Space descriptor such as `lebesgue:p=0.75`.
    #[arg(long, global = true)]
    pub space: Option<String>,
    #[arg(long, global = true)]
    pub theta0: Option<f64>,
    /// Atom size exponent.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Vanishing-moment order.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Cells per axis for atom and probe grids.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Inclusive shell range `lo..hi`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub shells: Option<String>,
    /// Seeds as `a..b` (inclusive), a single value or a comma list.
    #[arg(long, global = true)]
    pub seeds: Option<String>,
    /// Directory receiving the CSV and JSON outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// `key=value` file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Atoms per random decomposition.
    #[arg(long, global = true)]
    pub atoms: Option<usize>,
    /// Evaluate with the transpose of the matrix.
    #[arg(long, global = true)]
    pub transpose: bool,
    /// Point such as `0.5,1`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Ball scale.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k: Option<i32>,
    /// Ball center such as `0,0`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// Frequency samples per shell.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Grid function CSV file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
}

/// Fully merged experiment settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub matrix: String,
    pub space: String,
    pub theta0: Option<f64>,
    pub q: Option<f64>,
    pub d: Option<usize>,
    pub grid: Option<usize>,
    pub shells: Option<(i32, i32)>,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub atoms: Option<usize>,
    pub transpose: bool,
    pub point: Option<Vec<f64>>,
    pub k: i32,
    pub center: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub input: Option<PathBuf>,
}

pub struct Setup {
    pub dilation: Arc<ExpansiveDilation>,
    pub space: Arc<BallSpace>,
    pub exponents: ExponentBundle,
}

impl ExperimentConfig {
    pub fn resolve(flags: GlobalArgs) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => GlobalArgs::default(),
        };
        let shells = flags.shells.or(file.shells).map(|s| parse_range(&s)).transpose()?;
        let seeds = match flags.seeds.or(file.seeds) {
            Some(s) => parse_seeds(&s)?,
            None => DEFAULT_SEEDS.collect(),
        };
        Ok(ExperimentConfig {
            matrix: flags.matrix.or(file.matrix).unwrap_or_else(|| DEFAULT_MATRIX.into()),
            space: flags.space.or(file.space).unwrap_or_else(|| DEFAULT_SPACE.into()),
            theta0: flags.theta0.or(file.theta0),
            q: flags.q.or(file.q),
            d: flags.d.or(file.d),
            grid: flags.grid.or(file.grid),
            shells,
            seeds,
            out: flags.out.or(file.out),
            json: flags.json || file.json,
            atoms: flags.atoms.or(file.atoms),
            transpose: flags.transpose || file.transpose,
            point: flags.point.or(file.point).map(|p| parse_point(&p)).transpose()?,
            k: flags.k.or(file.k).unwrap_or(0),
            center: flags.center.or(file.center).map(|p| parse_point(&p)).transpose()?,
            samples: flags.samples.or(file.samples),
            input: flags.input.or(file.input),
        })
    }

    pub fn dilation(&self) -> Result<Arc<ExpansiveDilation>> {
        let d = ExpansiveDilation::from_text(&self.matrix)?;
        Ok(Arc::new(if self.transpose { d.transposed()? } else { d }))
    }

    /// The configured space, without checking its exponent bundle.
    pub fn space(&self, dilation: &Arc<ExpansiveDilation>) -> Result<BallSpace> {
        let space = parse_space(&self.space, dilation.clone())?;
        Ok(match self.theta0 {
            Some(t) => space.with_theta0(t),
            None => space,
        })
    }

    pub fn setup(&self) -> Result<Setup> {
        let dilation = self.dilation()?;
        let space = self.space(&dilation)?;
        let exponents = space.exponents()?;
        Ok(Setup {
            dilation,
            space: Arc::new(space),
            exponents,
        })
    }

    pub fn ball(&self, dilation: &Arc<ExpansiveDilation>) -> Result<DilatedBall> {
        let center = self.center.clone().unwrap_or_else(|| vec![0.0; dilation.n]);
        DilatedBall::new(center, self.k, dilation.clone())
    }

    pub fn shells_or(&self, lo: i32, hi: i32) -> (i32, i32) {
        self.shells.unwrap_or((lo, hi))
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("config line {}: cannot parse '{}' for key '{}'", line, v, key)))
}

fn parse_flag(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Parse(format!("config line {}: '{}' is not a boolean for key '{}'", line, v, key))),
    }
}

/// Read a `key=value` file into the same shape as the command line flags.
pub fn read_config(path: &Path) -> Result<GlobalArgs> {
    let text = fs::read_to_string(path)?;
    let mut args = GlobalArgs::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value, got '{}'", line, body)))?;
        let (key, value) = (key.trim(), value.trim().to_string());
        match key {
            "matrix" => args.matrix = Some(value),
            "space" => args.space = Some(value),
            "theta0" => args.theta0 = Some(parse_value(line, key, &value)?),
            "q" => args.q = Some(parse_value(line, key, &value)?),
            "d" => args.d = Some(parse_value(line, key, &value)?),
            "grid" => args.grid = Some(parse_value(line, key, &value)?),
            "shells" => {
                parse_range(&value).map_err(|e| Error::Parse(format!("config line {}: {}", line, e)))?;
                args.shells = Some(value)
            }
            "seeds" => {
                parse_seeds(&value).map_err(|e| Error::Parse(format!("config line {}: {}", line, e)))?;
                args.seeds = Some(value)
            }
            "out" => args.out = Some(PathBuf::from(value)),
            "json" => args.json = parse_flag(line, key, &value)?,
            "atoms" => args.atoms = Some(parse_value(line, key, &value)?),
            "transpose" => args.transpose = parse_flag(line, key, &value)?,
            "point" => args.point = Some(value),
            "k" => args.k = Some(parse_value(line, key, &value)?),
            "center" => args.center = Some(value),
            "samples" => args.samples = Some(parse_value(line, key, &value)?),
            "input" => args.input = Some(PathBuf::from(value)),
            _ => return Err(Error::Parse(format!("config line {}: unknown key '{}'", line, key))),
        }
    }
    Ok(args)
}

/// `lo..hi` or `lo..=hi`, both inclusive.
pub fn parse_range(text: &str) -> Result<(i32, i32)> {
    let bad = || Error::Parse(format!("range '{}' must look like lo..hi", text));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo: i32 = a.trim().parse().map_err(|_| bad())?;
    let hi: i32 = b.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Error::InvalidParameter(format!("range '{}' is empty", text)));
    }
    Ok((lo, hi))
}

pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Parse(format!("seeds '{}' must be a..b, a single seed or a comma list", text));
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo: u64 = a.trim().parse().map_err(|_| bad())?;
        let hi: u64 = b.trim().parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}
