//! Experiment configuration: a flat `key = value` file with section headers
//! (parsed as TOML).

use std::path::{Path, PathBuf};

use acmorse_core::potential::DoubleWellPotential;
use acmorse_core::solver::SolverSettings;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Syntax { path: PathBuf, source: toml::de::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub spectrum: SpectrumSection,
    pub nodal: NodalSection,
    #[serde(default)]
    pub coloring: ColoringSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "standard")]
    pub potential: String,
    /// Configuration text file, relative to the experiment file.
    pub configuration: PathBuf,
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn standard() -> String {
    "standard".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Half-width of the square `[−L, L]²`.
    #[serde(rename = "L")]
    pub half_width: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub residual_tol: f64,
    pub max_iter: usize,
    pub fallback_steps: usize,
    pub min_step: f64,
    /// Accuracy of the heteroclinic quadrature.
    pub profile_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self { residual_tol: s.residual_tol, max_iter: s.max_iter, fallback_steps: s.fallback_steps, min_step: s.min_step, profile_tol: 1e-10 }
    }
}

impl SolverSection {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings { residual_tol: self.residual_tol, max_iter: self.max_iter, fallback_steps: self.fallback_steps, min_step: self.min_step }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub radii: Vec<f64>,
    #[serde(default = "four")]
    pub eigenpairs: usize,
    /// Nullity window; the default scales with `h²`.
    pub null_window: Option<f64>,
}

fn four() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalSection {
    /// Radius of the disk on which the nodal graph is extracted.
    pub truncation: f64,
    /// Angle of the differentiation direction `e`, in radians.
    pub direction: f64,
    pub eps_v: Option<f64>,
    pub eps_g: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ColoringSection {
    /// Balanced random configurations checked for the configuration's `k`.
    pub trials: usize,
}

impl Default for ColoringSection {
    fn default() -> Self {
        Self { trials: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Nullity window for the partition inequality.
    pub courant_null_window: f64,
    /// Layers added to a nodal domain before looking for instability.
    pub enlarge_steps: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { courant_null_window: 1e-3, enlarge_steps: 3 }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(text).map_err(|source| ConfigError::Syntax { path: path.to_path_buf(), source })?;
        if cfg.experiment.configuration.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.experiment.configuration = dir.join(&cfg.experiment.configuration);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn potential(&self) -> Result<DoubleWellPotential, ConfigError> {
        match self.experiment.potential.as_str() {
            "standard" => Ok(DoubleWellPotential::standard()),
            other => Err(ConfigError::Invalid(format!("unknown potential {other:?} (available: standard)"))),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.potential()?;
        let positive = [
            ("grid.L", self.grid.half_width),
            ("grid.h", self.grid.h),
            ("solver.residual_tol", self.solver.residual_tol),
            ("solver.min_step", self.solver.min_step),
            ("solver.profile_tol", self.solver.profile_tol),
            ("nodal.truncation", self.nodal.truncation),
            ("verify.courant_null_window", self.verify.courant_null_window),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, v) in [("nodal.eps_v", self.nodal.eps_v), ("nodal.eps_g", self.nodal.eps_g), ("spectrum.null_window", self.spectrum.null_window)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive and finite, got {v}"));
                }
            }
        }
        if !self.nodal.direction.is_finite() {
            return bad("nodal.direction must be finite".into());
        }
        for (name, v) in [("solver.max_iter", self.solver.max_iter), ("coloring.trials", self.coloring.trials), ("verify.enlarge_steps", self.verify.enlarge_steps)] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        let limit = self.grid.half_width - 2.0;
        let radii = &self.spectrum.radii;
        if radii.is_empty() {
            return bad("spectrum.radii is empty".into());
        }
        if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return bad(format!("spectrum.radii must be positive and strictly increasing, got {radii:?}"));
        }
        if let Some(r) = radii.iter().find(|&&r| !(r <= limit)) {
            return bad(format!("spectrum radius {r} exceeds L - 2 = {limit}"));
        }
        if !(self.nodal.truncation <= limit) {
            return bad(format!("nodal.truncation {} exceeds L - 2 = {limit}", self.nodal.truncation));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[experiment]
configuration = "saddle.cfg"
output = "out"

[grid]
L = 20.0
h = 0.1

[spectrum]
radii = [5.0, 10.0, 15.0, 18.0]

[nodal]
truncation = 15.0
direction = 0.2
"#;

    #[test]
    fn defaults_fill_optional_sections() {
        let c = ExperimentConfig::parse(BASE, Path::new("configs/x.toml")).unwrap();
        assert_eq!(c.experiment.configuration, Path::new("configs/saddle.cfg"));
        assert_eq!(c.solver.settings(), SolverSettings::default());
        assert_eq!(c.coloring.trials, 10_000);
        assert_eq!(c.spectrum.eigenpairs, 4);
    }

    #[test]
    fn radii_must_fit_and_increase() {
        for radii in ["[5.0, 18.0, 18.5]", "[5.0, 25.0]", "[10.0, 5.0]", "[0.0, 5.0]", "[]"] {
            let text = BASE.replace("[5.0, 10.0, 15.0, 18.0]", radii);
            assert!(matches!(ExperimentConfig::parse(&text, Path::new("x")), Err(ConfigError::Invalid(_))), "{radii}");
        }
    }

    #[test]
    fn nonpositive_and_unknown_values_are_rejected() {
        let text = BASE.replace("h = 0.1", "h = -0.1");
        assert!(matches!(ExperimentConfig::parse(&text, Path::new("x")), Err(ConfigError::Invalid(_))));
        let text = BASE.replace("h = 0.1", "h = 0.1\nn = 3");
        assert!(matches!(ExperimentConfig::parse(&text, Path::new("x")), Err(ConfigError::Syntax { .. })));
        let text = BASE.replace("[experiment]", "[experiment]\npotential = \"quartic\"");
        assert!(matches!(ExperimentConfig::parse(&text, Path::new("x")), Err(ConfigError::Invalid(_))));
    }
}
