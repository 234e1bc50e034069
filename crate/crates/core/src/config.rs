//! Run configuration.
//!
//! The file format is flat `key = value` text. Blank lines and lines starting
//! with `#` are ignored. Tolerances are set with `tol.<test> = <value>`.
//! Environment variables use the prefix `SBQ_`, upper case, with `.` written
//! as `__` (so `tol.zeta_identity` becomes `SBQ_TOL__ZETA_IDENTITY`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::GroupSpec;

/// Prefix for environment overrides.
pub const ENV_PREFIX: &str = "SBQ_";

/// Default tolerances, keyed by test name.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("zeta_identity", 1e-10),
    ("zeta_identity.runtime_ms", 1000.0),
    ("measure_identity", 1e-12),
    ("kappa_one_form", 1e-8),
    ("kappa_one_form.abelian", 1e-14),
    ("oracle.casimir", 1e-5),
    ("oracle.pushforward", 1e-6),
    ("oracle.quadrature", 1e-10),
    ("isometry.circle", 1e-8),
    ("isometry.su2", 1e-4),
    ("isometry.runtime_ms", 60_000.0),
    ("pairing_unitarity", 1e-4),
    ("inversion.circle", 1e-8),
    ("inversion.su2", 1e-4),
    ("inversion_constant.circle", 1e-6),
    ("inversion_constant.su2", 1e-4),
    ("flat.unitarity", 1e-6),
    ("flat.pistarinv", 1e-10),
    ("flat.backward_heat", 1e-5),
    ("geodesic.circle", 1e-10),
    ("geodesic.su2", 1e-8),
    ("geodesic.factorial", 0.1),
    ("reduction.circle", 1e-6),
    ("reduction.su2.z_score", 3.0),
    ("reduction.su2.relative_stderr", 5e-2),
    ("reduction.runtime_ms", 300_000.0),
    ("measure_limits", 1e-2),
];

/// Settings shared by every suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub group: String,
    pub hbar: f64,
    /// Irrep cutoff for random band-limited test functions.
    pub band_limit: u32,
    /// Order of the Haar rule on K.
    pub quad_order: usize,
    /// Gauss–Hermite order per fiber direction.
    pub fiber_order: usize,
    pub seed: u64,
    /// Regularization parameter for the reduction checks.
    pub s: f64,
    /// Links of the SU(2) lattice.
    pub links: usize,
    /// Monte Carlo sample count.
    pub samples: usize,
    /// Noise sub-links per link for Monte Carlo.
    pub substeps: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            group: "su2".into(),
            hbar: 0.5,
            band_limit: 2,
            quad_order: 16,
            fiber_order: 24,
            seed: 42,
            s: 5.0,
            links: 2,
            samples: 1_000_000,
            substeps: 32,
            tolerances: DEFAULT_TOLERANCES
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            output_dir: PathBuf::from("sbq-out"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Sets one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "group" => {
                value.trim().parse::<GroupSpec>()?;
                self.group = value.trim().to_string();
            }
            "hbar" => self.hbar = parse(key, value)?,
            "band_limit" => self.band_limit = parse(key, value)?,
            "quad_order" => self.quad_order = parse(key, value)?,
            "fiber_order" => self.fiber_order = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "s" => self.s = parse(key, value)?,
            "links" => self.links = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "substeps" => self.substeps = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            _ => match key.strip_prefix("tol.") {
                Some(name) if self.tolerances.contains_key(name) => {
                    let v: f64 = parse(key, value)?;
                    self.tolerances.insert(name.to_string(), v);
                }
                _ => return Err(Error::Config(format!("unknown key `{key}`"))),
            },
        }
        Ok(())
    }

    /// Applies `key = value` lines.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Applies `SBQ_*` variables from `vars`. Unknown names are rejected.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            if let Some(name) = k.as_ref().strip_prefix(ENV_PREFIX) {
                self.set(&env_to_key(name), v.as_ref())?;
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, test: &str) -> f64 {
        self.tolerances
            .get(test)
            .copied()
            .unwrap_or_else(|| panic!("no tolerance for `{test}`"))
    }

    /// Checks cross-field constraints.
    pub fn validate(&self) -> Result<()> {
        self.group.parse::<GroupSpec>()?;
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::Config(format!(
                "hbar = {} must be positive",
                self.hbar
            )));
        }
        if self.s.is_nan() || self.s <= self.hbar / 2.0 {
            return Err(Error::Config(format!(
                "need s > hbar/2, got s = {}, hbar = {}",
                self.s, self.hbar
            )));
        }
        if self.fiber_order < 4 || self.quad_order < 2 {
            return Err(Error::Config("quadrature orders too small".into()));
        }
        if self.links == 0 || self.samples < 2 {
            return Err(Error::Config("links and samples must be positive".into()));
        }
        if self.substeps == 0 || self.substeps % 2 == 1 {
            return Err(Error::Config(format!(
                "substeps = {} must be even",
                self.substeps
            )));
        }
        if let Some((k, v)) = self
            .tolerances
            .iter()
            .find(|(_, v)| v.is_nan() || **v < 0.0)
        {
            return Err(Error::Config(format!("tolerance `{k}` = {v}")));
        }
        Ok(())
    }

    /// The config in file format; parsing it back gives the same config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "group = {}", self.group);
        let _ = writeln!(out, "hbar = {:?}", self.hbar);
        let _ = writeln!(out, "band_limit = {}", self.band_limit);
        let _ = writeln!(out, "quad_order = {}", self.quad_order);
        let _ = writeln!(out, "fiber_order = {}", self.fiber_order);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "s = {:?}", self.s);
        let _ = writeln!(out, "links = {}", self.links);
        let _ = writeln!(out, "samples = {}", self.samples);
        let _ = writeln!(out, "substeps = {}", self.substeps);
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        for (k, v) in &self.tolerances {
            let _ = writeln!(out, "tol.{k} = {v:?}");
        }
        out
    }
}

fn env_to_key(name: &str) -> String {
    name.to_ascii_lowercase().replace("__", ".")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.set("hbar", "0.25").unwrap();
        c.set("tol.isometry.su2", "2e-4").unwrap();
        let mut d = RunConfig::default();
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut c = RunConfig::default();
        assert!(c.set("hbarr", "1").is_err());
        assert!(c.set("tol.nonexistent", "1").is_err());
        assert!(c.set("hbar", "one").is_err());
        assert!(c.set("group", "so3").is_err());
        assert!(c.apply_text("hbar 1").is_err());
        assert!(c.apply_env([("SBQ_NOPE", "1")]).is_err());
    }

    #[test]
    fn env_names_map_to_keys() {
        let mut c = RunConfig::default();
        c.apply_env([
            ("SBQ_TOL__ZETA_IDENTITY", "1e-9"),
            ("SBQ_HBAR", "2"),
            ("PATH", "/bin"),
        ])
        .unwrap();
        assert_eq!(c.tolerance("zeta_identity"), 1e-9);
        assert_eq!(c.hbar, 2.0);
    }

    #[test]
    fn validate_catches_regularization() {
        let mut c = RunConfig {
            hbar: 12.0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        c.s = 7.0;
        assert!(c.validate().is_ok());
        c.substeps = 3;
        assert!(c.validate().is_err());
    }
}
