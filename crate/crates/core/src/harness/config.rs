//! Scenario configuration (JSON, schema version 1).
//!
//! Floating-point inputs are written as decimal strings (`"0.0125"`) so
//! the value that reaches the solver is exactly what `str::parse` yields.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::pml::AuxSupport;

pub const SCHEMA_VERSION: u32 = 1;

/// A float carried as a decimal string.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Dec(pub f64);

impl TryFrom<String> for Dec {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("not a decimal number: {s:?}"))?;
        if !v.is_finite() {
            return Err(format!("not a finite number: {s:?}"));
        }
        Ok(Dec(v))
    }
}

impl From<Dec> for String {
    fn from(d: Dec) -> String {
        d.to_string()
    }
}

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<f64> for Dec {
    fn from(v: f64) -> Self {
        Dec(v)
    }
}

/// Physical block `[-P, -1]^d` in lattice coordinates followed by `layer_cells`
/// cells of damping layer, periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub dx: Dec,
    pub physical_cells: usize,
    pub layer_cells: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        GridSpec::with_layer(self.d, self.dx.0, self.physical_cells, self.layer_cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingKind {
    None,
    Constant,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingConfig {
    pub kind: DampingKind,
    /// `σΔx` (constant) or its upper bound (random).
    #[serde(default = "zero")]
    pub level: Dec,
    /// Defaults to the whole layer.
    #[serde(default)]
    pub thickness: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub support: AuxSupport,
}

fn zero() -> Dec {
    Dec(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Zero,
    Bump {
        center: Vec<Dec>,
        width: Dec,
        peak: Dec,
    },
    Noise {
        center: Vec<Dec>,
        radius: Dec,
        variance: Dec,
        seed: Option<u64>,
    },
    /// `U = e^{𝕚Σk_δΔx i_δ}`, `V = −𝕚ωU` on the whole grid, `ω > 0` from
    /// the dispersion relation. Runs with complex scalars.
    PlaneWave { k_dx: Vec<Dec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: Dec,
    #[serde(default = "default_safety")]
    pub safety: Dec,
    /// Overrides the stability-derived step; still rounded down so that
    /// `t_end` is hit exactly.
    #[serde(default)]
    pub dt: Option<Dec>,
    #[serde(default = "one")]
    pub energy_period: usize,
    #[serde(default = "one")]
    pub reflection_period: usize,
}

fn default_safety() -> Dec {
    Dec(0.5)
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    Binary,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub snapshot: Option<SnapshotFormat>,
    #[serde(default)]
    pub write_profile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Enlargement factor `ℓ` of the reference grid.
    pub enlargement: Dec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub grid: GridConfig,
    pub damping: DampingConfig,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("scenario")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != SCHEMA_VERSION {
            return bad(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.version));
        }
        let grid = self.grid.build().map_err(|e| Error::Config(format!("grid: {e}")))?;
        let d = grid.dim();
        match self.damping.kind {
            DampingKind::Random if self.damping.seed.is_none() => {
                return bad("damping: random profiles need an explicit seed".into())
            }
            _ => {}
        }
        if self.damping.level.0 < 0.0 {
            return bad("damping: level must be >= 0".into());
        }
        if let Some(m) = self.damping.thickness {
            if m > self.grid.layer_cells {
                return bad(format!("damping: thickness {m} exceeds layer of {}", self.grid.layer_cells));
            }
        }
        match &self.initial {
            InitialConfig::Zero => {}
            InitialConfig::Bump { center, width, .. } => {
                if center.len() != d {
                    return bad(format!("initial: center needs {d} coordinates"));
                }
                if width.0 <= 0.0 {
                    return bad("initial: width must be positive".into());
                }
            }
            InitialConfig::Noise {
                center,
                radius,
                variance,
                seed,
            } => {
                if center.len() != d {
                    return bad(format!("initial: center needs {d} coordinates"));
                }
                if radius.0 <= 0.0 || variance.0 < 0.0 {
                    return bad("initial: radius must be positive and variance >= 0".into());
                }
                if seed.is_none() {
                    return bad("initial: noise needs an explicit seed".into());
                }
            }
            InitialConfig::PlaneWave { k_dx } => {
                if k_dx.len() != d {
                    return bad(format!("initial: k_dx needs {d} components"));
                }
            }
        }
        if self.time.t_end.0 < 0.0 {
            return bad("time: t_end must be >= 0".into());
        }
        if !(self.time.safety.0 > 0.0 && self.time.safety.0 <= 1.0) {
            return bad("time: safety must lie in (0, 1]".into());
        }
        if let Some(dt) = self.time.dt {
            if dt.0 <= 0.0 {
                return bad("time: dt must be positive".into());
            }
        }
        if self.time.energy_period == 0 || self.time.reflection_period == 0 {
            return bad("time: observer periods must be >= 1".into());
        }
        if let Some(r) = &self.reference {
            if r.enlargement.0 < 1.0 {
                return bad("reference: enlargement must be >= 1".into());
            }
            if matches!(self.initial, InitialConfig::PlaneWave { .. }) {
                return bad("reference: not supported for plane-wave initial data".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "version": 1,
        "grid": {"d": 2, "dx": "0.0125", "physical_cells": 80, "layer_cells": 80},
        "damping": {"kind": "constant", "level": "2"},
        "initial": {"type": "bump", "center": ["-0.5", "-0.5"], "width": "0.1", "peak": "2"},
        "time": {"t_end": "0.5"},
        "reference": {"enlargement": "5"}
    }"#;

    #[test]
    fn parses_and_defaults() {
        let c = ScenarioConfig::from_json(SAMPLE).unwrap();
        assert_eq!(c.grid.dx.0, 0.0125);
        assert_eq!(c.time.safety.0, 0.5);
        assert_eq!(c.time.energy_period, 1);
        assert_eq!(c.damping.support, AuxSupport::Full);
        let again = ScenarioConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn numbers_must_be_strings() {
        let text = SAMPLE.replace("\"0.0125\"", "0.0125");
        assert!(matches!(ScenarioConfig::from_json(&text), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_configs() {
        for (from, to) in [
            ("\"version\": 1", "\"version\": 2"),
            ("\"constant\"", "\"random\""),
            ("\"width\": \"0.1\"", "\"width\": \"0\""),
            ("[\"-0.5\", \"-0.5\"]", "[\"-0.5\"]"),
            ("\"enlargement\": \"5\"", "\"enlargement\": \"0.5\""),
            ("\"t_end\": \"0.5\"", "\"t_end\": \"0.5\", \"safety\": \"1.5\""),
            ("\"dx\": \"0.0125\"", "\"dx\": \"abc\""),
            ("\"layer_cells\": 80", "\"layer_cells\": 80, \"extra\": 1"),
        ] {
            let text = SAMPLE.replace(from, to);
            assert!(ScenarioConfig::from_json(&text).is_err(), "{to}");
        }
    }
}
