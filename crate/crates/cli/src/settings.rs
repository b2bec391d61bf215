//! Flag, config-file and default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `beta = N^2`, `alpha = N`.
    Ginibre,
    /// `beta = N`, `alpha = N`.
    Crossover,
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Regime as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the subcommand defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// `key = value` file supplying any of the flags below.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Particle count.
    #[arg(long)]
    pub n: Option<usize>,
    /// Speed parameter; overrides the regime value.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Inverse temperature; overrides the regime value.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub regime: Option<Regime>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mollification radius of the pair force; 0 disables it.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "record-every")]
    pub record_every: Option<usize>,
    /// Grid intervals per axis (marginals) or table rows (cir).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Comma-separated particle counts.
    #[arg(long = "n-list", value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Closed-form checks only (verify).
    #[arg(long)]
    pub quick: bool,
    /// Initial configuration, one `x,y` pair per line (simulate).
    #[arg(long, value_name = "FILE")]
    pub initial: Option<PathBuf>,
    /// Initial value of the CIR process (cir).
    #[arg(long)]
    pub r0: Option<f64>,
    /// First point of the pair densities, as `x,y` (marginals).
    #[arg(long, value_name = "X,Y")]
    pub anchor: Option<String>,
}

const KEYS: &[&str] = &[
    "n",
    "alpha",
    "beta",
    "regime",
    "dt",
    "t-end",
    "paths",
    "seed",
    "epsilon",
    "record-every",
    "grid",
    "n-list",
    "out",
    "format",
    "quick",
    "initial",
    "r0",
    "anchor",
];

/// Parses `key = value` lines. Blank lines and text after `#` are ignored;
/// `_` in keys is read as `-`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{}`", i + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

/// Fully resolved parameters of one run, as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub regime: Regime,
    pub dt: f64,
    pub t_end: f64,
    pub paths: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub record_every: usize,
    pub grid: usize,
    pub n_list: Vec<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub quick: bool,
    pub initial: Option<PathBuf>,
    pub r0: f64,
    pub anchor: (f64, f64),
}

/// Built-in defaults of one subcommand.
#[derive(Debug, Clone)]
pub struct Defaults {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub paths: usize,
    pub grid: usize,
}

struct Resolver<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Resolver<'_> {
    fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|e| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`: {e}")))
            }
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"))).collect()
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let x = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((x, y))
}

impl Settings {
    pub fn resolve(args: &CommonArgs, defaults: &Defaults) -> Result<Settings, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let r = Resolver { file: &file };

        let n = r.get("n", args.n)?.unwrap_or(defaults.n);
        let regime = r.get("regime", args.regime)?.unwrap_or(Regime::Ginibre);
        let nf = n as f64;
        let (alpha0, beta0) = match regime {
            Regime::Ginibre => (nf, nf * nf),
            Regime::Crossover => (nf, nf),
        };
        let n_list = match &args.n_list {
            Some(v) => v.clone(),
            None => match file.get("n-list") {
                Some(s) => parse_list(s).map_err(|e| CliError::Usage(format!("config key `n-list`: {e}")))?,
                None => vec![8, 16, 32, 64],
            },
        };
        let anchor_src = args.anchor.clone().or_else(|| file.get("anchor").cloned());
        let anchor = match anchor_src {
            Some(s) => parse_pair(&s).map_err(|e| CliError::Usage(format!("anchor: {e}")))?,
            None => (0.25, 0.0),
        };
        let quick = args.quick || r.get::<bool>("quick", None)?.unwrap_or(false);

        let s = Settings {
            n,
            alpha: r.get("alpha", args.alpha)?.unwrap_or(alpha0),
            beta: r.get("beta", args.beta)?.unwrap_or(beta0),
            regime,
            dt: r.get("dt", args.dt)?.unwrap_or(defaults.dt),
            t_end: r.get("t-end", args.t_end)?.unwrap_or(defaults.t_end),
            paths: r.get("paths", args.paths)?.unwrap_or(defaults.paths),
            seed: r.get("seed", args.seed)?.unwrap_or(0),
            epsilon: r.get("epsilon", args.epsilon)?.unwrap_or(0.0),
            record_every: r.get("record-every", args.record_every)?.unwrap_or(1),
            grid: r.get("grid", args.grid)?.unwrap_or(defaults.grid),
            n_list,
            out: r.get("out", args.out.clone())?,
            format: r.get("format", args.format)?.unwrap_or(Format::Csv),
            quick,
            initial: r.get("initial", args.initial.clone())?,
            r0: r.get("r0", args.r0)?.unwrap_or(1.0),
            anchor,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.n == 0 {
            return bad("--n must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("alpha and beta must be finite and > 0, got {} and {}", self.alpha, self.beta));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("--dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("--t-end must be >= 0, got {}", self.t_end));
        }
        if self.paths == 0 {
            return bad("--paths must be >= 1".into());
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("--epsilon must be >= 0, got {}", self.epsilon));
        }
        if self.record_every == 0 {
            return bad("--record-every must be >= 1".into());
        }
        if self.grid == 0 {
            return bad("--grid must be >= 1".into());
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return bad("--n-list must be nonempty with entries >= 1".into());
        }
        if !(self.r0 >= 0.0 && self.r0.is_finite()) {
            return bad(format!("--r0 must be >= 0, got {}", self.r0));
        }
        Ok(())
    }

    /// Flags that reproduce this run.
    pub fn to_args(&self, subcommand: &str) -> Vec<String> {
        let mut v = vec![
            subcommand.to_string(),
            format!("--n={}", self.n),
            format!("--alpha={}", self.alpha),
            format!("--beta={}", self.beta),
            format!("--regime={}", if self.regime == Regime::Ginibre { "ginibre" } else { "crossover" }),
            format!("--dt={}", self.dt),
            format!("--t-end={}", self.t_end),
            format!("--paths={}", self.paths),
            format!("--seed={}", self.seed),
            format!("--epsilon={}", self.epsilon),
            format!("--record-every={}", self.record_every),
            format!("--grid={}", self.grid),
            format!("--n-list={}", self.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")),
            format!("--format={}", if self.format == Format::Csv { "csv" } else { "json" }),
            format!("--r0={}", self.r0),
            format!("--anchor={},{}", self.anchor.0, self.anchor.1),
        ];
        if let Some(out) = &self.out {
            v.push(format!("--out={}", out.display()));
        }
        if let Some(init) = &self.initial {
            v.push(format!("--initial={}", init.display()));
        }
        if self.quick {
            v.push("--quick".into());
        }
        v
    }

    pub fn out_dir(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Defaults {
        Defaults { n: 8, dt: 1e-3, t_end: 1.0, paths: 10, grid: 40 }
    }

    #[test]
    fn config_parsing_skips_comments_and_normalizes_keys() {
        let m = parse_config("# header\n n = 16 # trailing\n\nt_end=2.5\nregime = crossover\n").unwrap();
        assert_eq!(m["n"], "16");
        assert_eq!(m["t-end"], "2.5");
        assert_eq!(m["regime"], "crossover");
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_lines() {
        assert!(matches!(parse_config("foo = 1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config("n 3"), Err(CliError::Usage(_))));
    }

    #[test]
    fn regime_sets_alpha_beta() {
        let args = CommonArgs { n: Some(8), ..Default::default() };
        let s = Settings::resolve(&args, &defaults()).unwrap();
        assert_eq!((s.alpha, s.beta), (8.0, 64.0));
        let args = CommonArgs { n: Some(8), regime: Some(Regime::Crossover), ..Default::default() };
        let s = Settings::resolve(&args, &defaults()).unwrap();
        assert_eq!((s.alpha, s.beta), (8.0, 8.0));
        let args = CommonArgs { n: Some(8), beta: Some(3.0), ..Default::default() };
        let s = Settings::resolve(&args, &defaults()).unwrap();
        assert_eq!((s.alpha, s.beta), (8.0, 3.0));
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = std::env::temp_dir().join(format!("cg-settings-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "n = 4\ndt = 0.01\nn-list = 2,3\n").unwrap();
        let args = CommonArgs { config: Some(path), n: Some(6), ..Default::default() };
        let s = Settings::resolve(&args, &defaults()).unwrap();
        assert_eq!(s.n, 6);
        assert_eq!(s.dt, 0.01);
        assert_eq!(s.t_end, 1.0);
        assert_eq!(s.n_list, vec![2, 3]);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let args = CommonArgs { dt: Some(-1.0), ..Default::default() };
        assert!(matches!(Settings::resolve(&args, &defaults()), Err(CliError::Usage(_))));
        let args = CommonArgs { anchor: Some("1;2".into()), ..Default::default() };
        assert!(matches!(Settings::resolve(&args, &defaults()), Err(CliError::Usage(_))));
    }
}
