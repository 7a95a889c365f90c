//! Experiment configuration: defaults, then a flat JSON file, then flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::Value;

use crate::exit::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("threads must be a positive integer or \"auto\", got {s:?}")),
            Ok(n) => Ok(Threads::Fixed(n)),
        }
    }
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threads::Auto => f.write_str("auto"),
            Threads::Fixed(n) => write!(f, "{n}"),
        }
    }
}

/// One layer of settings. Every field is optional so that layers can be
/// stacked; the same struct backs the command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Layer {
    /// Base size N (sieve limit for `sieve`).
    #[arg(long = "N", global = true)]
    pub n: Option<u64>,
    /// Interval lengths, comma separated.
    #[arg(long = "H", global = true, value_delimiter = ',')]
    pub h: Option<Vec<u64>>,
    /// Power of the prime in the exponential sum (1 or 2).
    #[arg(long, global = true)]
    pub ell: Option<u32>,
    /// Truncation tolerance for the damped series.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// File of zeta-zero ordinates, one per line.
    #[arg(long, global = true)]
    pub zeros: Option<PathBuf>,
    /// Number of zeros to use.
    #[arg(long = "K", global = true)]
    pub k: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Worker threads, or "auto".
    #[arg(long, global = true)]
    pub threads: Option<Threads>,
    /// Directory for cached sieve tables.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Exponents for the Laplace check, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    /// Explicit list of n values, comma separated.
    #[arg(long = "n", global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<u64>>,
    /// Half-widths of the frequency window, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub xi: Option<Vec<f64>>,
    /// Rungs of the doubling ladder for `laplace`.
    #[arg(long, global = true)]
    pub rungs: Option<u32>,
    /// Frequency points on each side of zero for `explicit`.
    #[arg(long = "alpha-points", global = true)]
    pub alpha_points: Option<u32>,
    /// The `explicit` grid spans |α| <= width/N.
    #[arg(long = "alpha-width", global = true)]
    pub alpha_width: Option<f64>,
    /// Largest acceptable zero-sum tail bound.
    #[arg(long = "tail-tol", global = true)]
    pub tail_tol: Option<f64>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long = "rel-tol", global = true)]
    pub rel_tol: Option<f64>,
    /// Flat JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

fn scalar_text(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(CliError::Config(format!("config key {key:?} must be a scalar")).into()),
    }
}

fn parse_one<T: FromStr>(key: &str, text: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    text.trim()
        .parse::<T>()
        .map_err(|e| CliError::Config(format!("config key {key:?}: cannot parse {text:?}: {e}")).into())
}

/// Lists may be given as a JSON array of scalars or a comma-separated string.
fn parse_list<T: FromStr>(key: &str, v: &Value) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    match v {
        Value::Array(items) => items.iter().map(|x| parse_one(key, &scalar_text(key, x)?)).collect(),
        _ => scalar_text(key, v)?.split(',').map(|s| parse_one(key, s)).collect(),
    }
}

impl Layer {
    /// Parse a flat JSON object. Unknown keys and nested objects are errors.
    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config is not JSON: {e}")))?;
        let Value::Object(map) = root else {
            return Err(CliError::Config("config must be a JSON object".into()).into());
        };
        let mut l = Layer::default();
        for (key, v) in &map {
            if v.is_null() {
                continue;
            }
            let one = || scalar_text(key, v);
            match key.as_str() {
                "N" => l.n = Some(parse_one(key, &one()?)?),
                "H" => l.h = Some(parse_list(key, v)?),
                "ell" => l.ell = Some(parse_one(key, &one()?)?),
                "eps" => l.eps = Some(parse_one(key, &one()?)?),
                "zeros" => l.zeros = Some(PathBuf::from(one()?)),
                "K" => l.k = Some(parse_one(key, &one()?)?),
                "out" => l.out = Some(PathBuf::from(one()?)),
                "format" => l.format = Some(parse_one(key, &one()?)?),
                "threads" => l.threads = Some(parse_one(key, &one()?)?),
                "cache" => l.cache = Some(PathBuf::from(one()?)),
                "mu" => l.mu = Some(parse_list(key, v)?),
                "n" => l.n_list = Some(parse_list(key, v)?),
                "xi" => l.xi = Some(parse_list(key, v)?),
                "rungs" => l.rungs = Some(parse_one(key, &one()?)?),
                "alpha_points" => l.alpha_points = Some(parse_one(key, &one()?)?),
                "alpha_width" => l.alpha_width = Some(parse_one(key, &one()?)?),
                "tail_tol" => l.tail_tol = Some(parse_one(key, &one()?)?),
                "rel_tol" => l.rel_tol = Some(parse_one(key, &one()?)?),
                other => return Err(CliError::Config(format!("unknown config key {other:?}")).into()),
            }
        }
        Ok(l)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).with_context(|| format!("in config file {}", path.display()))
    }

    /// `self` with every unset field taken from `below`.
    pub fn over(self, below: Layer) -> Layer {
        Layer {
            n: self.n.or(below.n),
            h: self.h.or(below.h),
            ell: self.ell.or(below.ell),
            eps: self.eps.or(below.eps),
            zeros: self.zeros.or(below.zeros),
            k: self.k.or(below.k),
            out: self.out.or(below.out),
            format: self.format.or(below.format),
            threads: self.threads.or(below.threads),
            cache: self.cache.or(below.cache),
            mu: self.mu.or(below.mu),
            n_list: self.n_list.or(below.n_list),
            xi: self.xi.or(below.xi),
            rungs: self.rungs.or(below.rungs),
            alpha_points: self.alpha_points.or(below.alpha_points),
            alpha_width: self.alpha_width.or(below.alpha_width),
            tail_tol: self.tail_tol.or(below.tail_tol),
            rel_tol: self.rel_tol.or(below.rel_tol),
            config: self.config.or(below.config),
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: u64,
    pub h: Vec<u64>,
    pub ell: u32,
    pub eps: f64,
    pub zeros_path: Option<PathBuf>,
    pub k: usize,
    pub output_dir: PathBuf,
    pub format: Format,
    pub threads: Threads,
    pub cache_dir: PathBuf,
    pub mu: Vec<f64>,
    pub n_list: Vec<u64>,
    pub xi: Vec<f64>,
    pub rungs: u32,
    pub alpha_points: u32,
    pub alpha_width: f64,
    pub tail_tol: f64,
    pub rel_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            h: vec![100],
            ell: 1,
            eps: 1e-14,
            zeros_path: None,
            k: 100_000,
            output_dir: PathBuf::from("."),
            format: Format::Csv,
            threads: Threads::Auto,
            cache_dir: PathBuf::from("cache"),
            mu: vec![1.0, 2.0],
            n_list: Vec::new(),
            xi: vec![0.5],
            rungs: 6,
            alpha_points: 4,
            alpha_width: 1.0,
            tail_tol: 0.1,
            rel_tol: 1e-12,
        }
    }
}

fn positive(name: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive")).into())
    }
}

impl ExperimentConfig {
    /// Flags over the config file (named by the flags, if at all) over defaults.
    pub fn resolve(flags: Layer) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => Layer::from_file(p)?,
            None => Layer::default(),
        };
        Self::from_layer(flags.over(file))
    }

    pub fn from_layer(l: Layer) -> Result<Self> {
        let d = ExperimentConfig::default();
        let cfg = ExperimentConfig {
            n: l.n.unwrap_or(d.n),
            h: l.h.unwrap_or(d.h),
            ell: l.ell.unwrap_or(d.ell),
            eps: l.eps.unwrap_or(d.eps),
            zeros_path: l.zeros.or(d.zeros_path),
            k: l.k.unwrap_or(d.k),
            output_dir: l.out.unwrap_or(d.output_dir),
            format: l.format.unwrap_or(d.format),
            threads: l.threads.unwrap_or(d.threads),
            cache_dir: l.cache.unwrap_or(d.cache_dir),
            mu: l.mu.unwrap_or(d.mu),
            n_list: l.n_list.unwrap_or(d.n_list),
            xi: l.xi.unwrap_or(d.xi),
            rungs: l.rungs.unwrap_or(d.rungs),
            alpha_points: l.alpha_points.unwrap_or(d.alpha_points),
            alpha_width: l.alpha_width.unwrap_or(d.alpha_width),
            tail_tol: l.tail_tol.unwrap_or(d.tail_tol),
            rel_tol: l.rel_tol.unwrap_or(d.rel_tol),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        positive("N", self.n > 0)?;
        positive("every H", !self.h.is_empty() && self.h.iter().all(|&h| h > 0))?;
        positive("ell", self.ell > 0)?;
        positive("eps", self.eps > 0.0 && self.eps < 1.0)?;
        positive("K", self.k > 0)?;
        positive("every mu", self.mu.iter().all(|&m| m > 0.0 && m.is_finite()))?;
        positive("every n", self.n_list.iter().all(|&n| n > 0))?;
        positive("every xi", self.xi.iter().all(|&x| x > 0.0))?;
        positive("rungs", self.rungs > 0)?;
        positive("alpha-width", self.alpha_width > 0.0 && self.alpha_width.is_finite())?;
        positive("tail-tol", self.tail_tol > 0.0)?;
        positive("rel-tol", self.rel_tol > 0.0)?;
        Ok(())
    }

    /// Resolved settings as manifest parameters, in a fixed key order.
    pub fn parameters(&self) -> Vec<(&'static str, Value)> {
        vec![
            ("N", self.n.into()),
            ("H", self.h.clone().into()),
            ("ell", self.ell.into()),
            ("eps", self.eps.into()),
            (
                "zeros",
                self.zeros_path
                    .as_ref()
                    .map_or(Value::Null, |p| p.display().to_string().into()),
            ),
            ("K", self.k.into()),
            ("format", self.format.to_string().into()),
            ("threads", self.threads.to_string().into()),
            ("mu", self.mu.clone().into()),
            ("n", self.n_list.clone().into()),
            ("xi", self.xi.clone().into()),
            ("rungs", self.rungs.into()),
            ("alpha_points", self.alpha_points.into()),
            ("alpha_width", self.alpha_width.into()),
            ("tail_tol", self.tail_tol.into()),
            ("rel_tol", self.rel_tol.into()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = Layer::from_json(r#"{"N": 5000, "H": "10,20", "format": "json", "eps": 1e-10}"#).unwrap();
        let flags = Layer {
            n: Some(7000),
            ..Layer::default()
        };
        let cfg = ExperimentConfig::from_layer(flags.over(file)).unwrap();
        assert_eq!(cfg.n, 7000);
        assert_eq!(cfg.h, vec![10, 20]);
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.eps, 1e-10);
        assert_eq!(cfg.ell, 1);
        assert_eq!(cfg.threads, Threads::Auto);
    }

    #[test]
    fn lists_from_arrays() {
        let l = Layer::from_json(r#"{"mu": [1, 2.5], "n": [3, 10], "threads": 4}"#).unwrap();
        assert_eq!(l.mu, Some(vec![1.0, 2.5]));
        assert_eq!(l.n_list, Some(vec![3, 10]));
        assert_eq!(l.threads, Some(Threads::Fixed(4)));
    }

    #[test]
    fn bad_config_files() {
        assert!(Layer::from_json("[1, 2]").is_err());
        assert!(Layer::from_json(r#"{"N": {"x": 1}}"#).is_err());
        assert!(Layer::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(Layer::from_json(r#"{"N": "ten"}"#).is_err());
        assert!(Layer::from_json(r#"{"N": -5}"#).is_err());
        assert!(Layer::from_json("{").is_err());
    }

    #[test]
    fn nonpositive_values_are_rejected() {
        for l in [
            Layer { n: Some(0), ..Layer::default() },
            Layer { h: Some(vec![10, 0]), ..Layer::default() },
            Layer { eps: Some(0.0), ..Layer::default() },
            Layer { k: Some(0), ..Layer::default() },
            Layer { mu: Some(vec![-1.0]), ..Layer::default() },
        ] {
            assert!(ExperimentConfig::from_layer(l).is_err());
        }
    }

    #[test]
    fn threads_parse() {
        assert_eq!("auto".parse::<Threads>().unwrap(), Threads::Auto);
        assert_eq!("3".parse::<Threads>().unwrap(), Threads::Fixed(3));
        assert!("0".parse::<Threads>().is_err());
        assert!("many".parse::<Threads>().is_err());
    }
}
