//! Flat `key = value` configuration shared by the CLI and the suite.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected so that typos do not silently fall back to defaults.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{PlancherelWeight, WeightForm, PLANCHEREL_CONSTANT};

/// Environment variable naming the configuration file.
pub const CONFIG_ENV: &str = "CROWNKIT_CONFIG";

pub const DEFAULT_SEED: u64 = 20_231_107;

const DEFAULT_ORACLE: &str =
    "parseval calibration of exp(-rho^2) against the Abel-route transform on the standard 400-node grid";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub seed: u64,
    pub plancherel_form: WeightForm,
    pub plancherel_constant: f64,
    /// How `plancherel_constant` was obtained.
    pub plancherel_oracle: String,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            plancherel_form: WeightForm::HalfAngle,
            plancherel_constant: PLANCHEREL_CONSTANT,
            plancherel_oracle: DEFAULT_ORACLE.to_string(),
            abs_tol: None,
            rel_tol: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidInput(format!("config key {key}: cannot parse {value:?}")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "seed" => cfg.seed = parse_num(key, value)?,
                "plancherel_form" => {
                    cfg.plancherel_form = match value {
                        "half_angle" => WeightForm::HalfAngle,
                        "full_angle" => WeightForm::FullAngle,
                        _ => {
                            return Err(Error::InvalidInput(format!(
                                "unknown plancherel_form {value:?}"
                            )))
                        }
                    }
                }
                "plancherel_constant" => cfg.plancherel_constant = parse_num(key, value)?,
                "plancherel_oracle" => cfg.plancherel_oracle = value.to_string(),
                "abs_tol" => cfg.abs_tol = Some(parse_num(key, value)?),
                "rel_tol" => cfg.rel_tol = Some(parse_num(key, value)?),
                _ => return Err(Error::InvalidInput(format!("unknown config key {key:?}"))),
            }
        }
        cfg.weight()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Reads the file named by `CROWNKIT_CONFIG`, or the defaults if unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn to_text(&self) -> String {
        let form = match self.plancherel_form {
            WeightForm::HalfAngle => "half_angle",
            WeightForm::FullAngle => "full_angle",
        };
        let mut out = format!(
            "seed = {}\nplancherel_form = {form}\nplancherel_constant = {:?}\nplancherel_oracle = {}\n",
            self.seed, self.plancherel_constant, self.plancherel_oracle
        );
        if let Some(t) = self.abs_tol {
            out += &format!("abs_tol = {t:?}\n");
        }
        if let Some(t) = self.rel_tol {
            out += &format!("rel_tol = {t:?}\n");
        }
        out
    }

    pub fn weight(&self) -> Result<PlancherelWeight> {
        PlancherelWeight::new(self.plancherel_form, self.plancherel_constant)
    }

    /// `base` with the configured tolerances applied.
    pub fn quadrature(
        &self,
        base: crate::numerics::QuadratureConfig,
    ) -> crate::numerics::QuadratureConfig {
        let (a, r) = (base.abs_tol, base.rel_tol);
        base.with_tolerances(self.abs_tol.unwrap_or(a), self.rel_tol.unwrap_or(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = Config {
            seed: 7,
            abs_tol: Some(1e-12),
            ..Config::default()
        };
        assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn parse_and_reject() {
        let cfg = Config::parse(
            "# frozen\n seed=3 \nplancherel_form = full_angle\nplancherel_constant = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(
            cfg.weight().unwrap().value(1.0),
            0.5 * (std::f64::consts::PI).tanh()
        );
        assert!(Config::parse("sede = 3").is_err());
        assert!(Config::parse("seed").is_err());
        assert!(Config::parse("plancherel_constant = -1").is_err());
        assert!(Config::parse("plancherel_form = other").is_err());
    }

    #[test]
    fn loads_from_file() {
        let path = std::env::temp_dir().join(format!("crownkit-config-{}.txt", std::process::id()));
        std::fs::write(&path, "seed = 11\nrel_tol = 1e-8\n").unwrap();
        let cfg = Config::load(&path).unwrap();
        std::fs::remove_file(&path).unwrap();
        assert_eq!((cfg.seed, cfg.rel_tol), (11, Some(1e-8)));
        let q = cfg.quadrature(crate::numerics::QuadratureConfig::geometry());
        assert_eq!((q.abs_tol, q.rel_tol), (1e-10, 1e-8));
    }
}
