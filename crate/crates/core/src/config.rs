//! Flat `key = value` configuration shared by every command.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys and repeated keys are
//! errors so that a typo never silently falls back to a default.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nn::TrainConfig;
use crate::raster::DEFAULT_MAX_SPUR;
use crate::structural::StructuralConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub structural: StructuralConfig,
    /// Longest spur removed before normalization.
    pub max_spur: usize,
    pub train: TrainConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            structural: StructuralConfig::default(),
            max_spur: DEFAULT_MAX_SPUR,
            train: TrainConfig::default(),
        }
    }
}

pub const KEYS: [&str; 15] = [
    "step_tol",
    "drift_tol_frac",
    "full_span",
    "partial_span",
    "spine_height_frac",
    "mid_mass_tol",
    "max_consecutive_up",
    "max_spur",
    "learning_rate",
    "momentum",
    "min_gradient",
    "max_epochs",
    "trainer",
    "n_hidden",
    "seed",
];

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: bad value {value:?} for {key}")))
}

impl Config {
    /// A missing file yields the defaults; any other read failure is an error.
    pub fn load(path: &Path) -> Result<Self> {
        match fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {n}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(Error::Config(format!("line {n}: duplicate key {key}")));
            }
            seen.push(key);
            let s = &mut cfg.structural;
            let t = &mut cfg.train;
            match key {
                "step_tol" => s.step_tol = parse(n, key, value)?,
                "drift_tol_frac" => s.drift_tol_frac = parse(n, key, value)?,
                "full_span" => s.full_span = parse(n, key, value)?,
                "partial_span" => s.partial_span = parse(n, key, value)?,
                "spine_height_frac" => s.spine_height_frac = parse(n, key, value)?,
                "mid_mass_tol" => s.mid_mass_tol = parse(n, key, value)?,
                "max_consecutive_up" => s.max_consecutive_up = parse(n, key, value)?,
                "max_spur" => cfg.max_spur = parse(n, key, value)?,
                "learning_rate" => t.learning_rate = parse(n, key, value)?,
                "momentum" => t.momentum = parse(n, key, value)?,
                "min_gradient" => t.min_gradient = parse(n, key, value)?,
                "max_epochs" => t.max_epochs = parse(n, key, value)?,
                "trainer" => t.trainer = value.parse()?,
                "n_hidden" => t.n_hidden = parse(n, key, value)?,
                "seed" => t.seed = parse(n, key, value)?,
                other => return Err(Error::Config(format!("line {n}: unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.structural.validate()?;
        self.train.validate()
    }

    /// Every key with its current value, parseable by [`Config::parse`].
    pub fn to_text(&self) -> String {
        let s = &self.structural;
        let t = &self.train;
        format!(
            "step_tol = {}\ndrift_tol_frac = {:?}\nfull_span = {:?}\npartial_span = {:?}\n\
             spine_height_frac = {:?}\nmid_mass_tol = {}\nmax_consecutive_up = {}\nmax_spur = {}\n\
             learning_rate = {:?}\nmomentum = {:?}\nmin_gradient = {:?}\nmax_epochs = {}\n\
             trainer = {}\nn_hidden = {}\nseed = {}\n",
            s.step_tol,
            s.drift_tol_frac,
            s.full_span,
            s.partial_span,
            s.spine_height_frac,
            s.mid_mass_tol,
            s.max_consecutive_up,
            self.max_spur,
            t.learning_rate,
            t.momentum,
            t.min_gradient,
            t.max_epochs,
            t.trainer,
            t.n_hidden,
            t.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Trainer;

    #[test]
    fn defaults() {
        let c = Config::default();
        assert_eq!(c.structural.step_tol, 2);
        assert_eq!(c.structural.drift_tol_frac, 0.10);
        assert_eq!(c.structural.spine_height_frac, 0.75);
        assert_eq!(c.max_spur, 3);
        assert_eq!(c.train.learning_rate, 0.01);
        assert_eq!(c.train.momentum, 0.95);
        assert_eq!(c.train.min_gradient, 1e-8);
        assert_eq!(c.train.n_hidden, 40);
    }

    #[test]
    fn empty_text_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert_eq!(Config::parse("# nothing\n\n").unwrap(), Config::default());
    }

    #[test]
    fn missing_file_is_default() {
        let dir = tempfile::tempdir().unwrap();
        let c = Config::load(&dir.path().join("absent.cfg")).unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn round_trips_through_text() {
        let mut c = Config::default();
        c.structural.step_tol = 3;
        c.structural.full_span = 0.9;
        c.train.trainer = Trainer::MomentumGd;
        c.train.seed = 17;
        c.max_spur = 5;
        assert_eq!(Config::parse(&c.to_text()).unwrap(), c);
        assert_eq!(Config::parse(&Config::default().to_text()).unwrap(), Config::default());
    }

    #[test]
    fn every_key_is_written() {
        let text = Config::default().to_text();
        for k in KEYS {
            assert!(text.lines().any(|l| l.starts_with(&format!("{k} ="))), "{k}");
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let err = Config::parse("step_toll = 2\n").unwrap_err();
        assert!(err.to_string().contains("step_toll"));
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(Config::parse("step_tol 2").is_err());
        assert!(Config::parse("step_tol = two").is_err());
        assert!(Config::parse("step_tol = 2\nstep_tol = 3").is_err());
        assert!(Config::parse("trainer = adam").is_err());
        assert!(Config::parse("momentum = 1.5").is_err());
        assert!(Config::parse("partial_span = 0.9\nfull_span = 0.5").is_err());
    }
}
