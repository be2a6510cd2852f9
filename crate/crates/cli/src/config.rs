//! Run configuration: built-in defaults, then an optional TOML file, then flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use eqgc::zxparity::MAX_ENUM_N;

pub const DEFAULT_DEPTHS: std::ops::RangeInclusive<usize> = 1..=14;
pub const DEFAULT_SEEDS: usize = 10;
pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_LR: f64 = 0.01;
pub const DEFAULT_DECAY: f64 = 0.99;
pub const DEFAULT_POINTS: usize = 201;
pub const DEFAULT_PARITY_N: usize = 6;
pub const DEFAULT_DIMS_N_MAX: usize = 12;
pub const MAX_DEPTH: usize = 64;
pub const MAX_NODE_DIM: usize = 16;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("config file {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },

    #[error("{key}: {msg}")]
    Invalid { key: &'static str, msg: String },
}

fn invalid(key: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, msg: msg.into() }
}

/// Either an explicit list or the text form accepted by `--depths`.
#[derive(Debug, Deserialize, Clone, PartialEq)]
#[serde(untagged)]
pub enum ListValue {
    List(Vec<usize>),
    Text(String),
}

impl ListValue {
    fn resolve(&self, key: &'static str) -> Result<Vec<usize>, ConfigError> {
        match self {
            ListValue::List(v) => Ok(v.clone()),
            ListValue::Text(s) => parse_list(s).map_err(|m| invalid(key, m)),
        }
    }
}

/// Keys of the optional flat config file; every key is optional.
#[derive(Debug, Default, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub depths: Option<ListValue>,
    pub seeds: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub decay: Option<f64>,
    pub points: Option<usize>,
    pub n: Option<usize>,
    pub n_max: Option<usize>,
    pub s: Option<ListValue>,
    pub inject_fault: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Toml { path: path.into(), source })
    }
}

/// Fully resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub depths: Vec<usize>,
    pub seeds: usize,
    pub epochs: usize,
    pub lr: f64,
    pub decay: f64,
    pub points: usize,
    pub n: usize,
    pub n_max: usize,
    pub s: Vec<usize>,
    pub inject_fault: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out: None,
            seed: 0,
            tol: None,
            depths: DEFAULT_DEPTHS.collect(),
            seeds: DEFAULT_SEEDS,
            epochs: DEFAULT_EPOCHS,
            lr: DEFAULT_LR,
            decay: DEFAULT_DECAY,
            points: DEFAULT_POINTS,
            n: DEFAULT_PARITY_N,
            n_max: DEFAULT_DIMS_N_MAX,
            s: vec![2, 3, 4],
            inject_fault: false,
        }
    }
}

impl RunConfig {
    /// Overlay `layer` on `self`; keys absent from `layer` are kept.
    pub fn merge(mut self, layer: &FileConfig) -> Result<Self, ConfigError> {
        if let Some(v) = &layer.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = layer.seed {
            self.seed = v;
        }
        if let Some(v) = layer.tol {
            self.tol = Some(v);
        }
        if let Some(v) = &layer.depths {
            self.depths = v.resolve("depths")?;
        }
        if let Some(v) = &layer.s {
            self.s = v.resolve("s")?;
        }
        macro_rules! take {
            ($($field:ident),*) => { $(if let Some(v) = layer.$field { self.$field = v; })* };
        }
        take!(seeds, epochs, lr, decay, points, n, n_max, inject_fault);
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("tol", format!("{t} must be positive")));
            }
        }
        if self.depths.is_empty() || self.depths.iter().any(|&d| d == 0 || d > MAX_DEPTH) {
            return Err(invalid("depths", format!("need a non-empty list of depths in 1..={MAX_DEPTH}")));
        }
        if self.seeds == 0 {
            return Err(invalid("seeds", "must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(invalid("lr", format!("{} must be positive", self.lr)));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(invalid("decay", format!("{} must lie in (0, 1]", self.decay)));
        }
        if self.points == 0 {
            return Err(invalid("points", "must be at least 1"));
        }
        if !(3..=MAX_ENUM_N).contains(&self.n) {
            return Err(invalid("n", format!("{} must lie in 3..={MAX_ENUM_N}", self.n)));
        }
        if !(1..=eqgc::report::MAX_DIMS_N).contains(&self.n_max) {
            return Err(invalid("n_max", format!("{} must lie in 1..={}", self.n_max, eqgc::report::MAX_DIMS_N)));
        }
        if self.s.is_empty() || self.s.iter().any(|&s| !(2..=MAX_NODE_DIM).contains(&s)) {
            return Err(invalid("s", format!("need a non-empty list of node dimensions in 2..={MAX_NODE_DIM}")));
        }
        Ok(())
    }

    /// Sorted, deduplicated depths.
    pub fn sorted_depths(&self) -> Vec<usize> {
        let mut d = self.depths.clone();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.seed + i).collect()
    }
}

/// Parse `1,4,8`, `1-14` or a mix such as `1-3,10`.
pub fn parse_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("`{s}` is not a non-negative integer"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err(format!("no values in `{text}`"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_syntax() {
        assert_eq!(parse_list("1,4,8").unwrap(), vec![1, 4, 8]);
        assert_eq!(parse_list("1-3, 10").unwrap(), vec![1, 2, 3, 10]);
        assert!(parse_list("3-1").is_err());
        assert!(parse_list("x").is_err());
        assert!(parse_list("").is_err());
    }

    #[test]
    fn defaults_match_the_training_setup() {
        let c = RunConfig::default();
        assert_eq!(c.depths, (1..=14).collect::<Vec<_>>());
        assert_eq!((c.seeds, c.epochs, c.lr, c.decay, c.points), (10, 100, 0.01, 0.99, 201));
        c.validate().unwrap();
    }

    #[test]
    fn file_layer_overrides() {
        let f: FileConfig = toml::from_str("depths = \"1-2\"\nepochs = 5\nlr = 0.1\ns = [2]").unwrap();
        let c = RunConfig::default().merge(&f).unwrap();
        assert_eq!((c.depths.clone(), c.epochs, c.lr, c.s.clone()), (vec![1, 2], 5, 0.1, vec![2]));
        assert_eq!(c.seeds, 10);
        let f: FileConfig = toml::from_str("depths = [3, 1, 3]").unwrap();
        assert_eq!(RunConfig::default().merge(&f).unwrap().sorted_depths(), vec![1, 3]);
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }

    #[test]
    fn validation() {
        let bad = [
            RunConfig { decay: 0.0, ..Default::default() },
            RunConfig { lr: -1.0, ..Default::default() },
            RunConfig { epochs: 0, ..Default::default() },
            RunConfig { depths: vec![0], ..Default::default() },
            RunConfig { n: 2, ..Default::default() },
            RunConfig { s: vec![1], ..Default::default() },
            RunConfig { tol: Some(0.0), ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        let c = RunConfig { seed: 5, seeds: 3, ..Default::default() };
        assert_eq!(c.seed_list(), vec![5, 6, 7]);
    }
}
