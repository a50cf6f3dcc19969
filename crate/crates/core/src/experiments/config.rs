use super::amr::AmrConfig;
use super::neel::NeelConfig;
use super::nist::NistConfig;
use super::units::PhysicalUnits;
use super::ExperimentError;
use crate::linalg::SolverConfig;
use crate::mimetic::InnerProductConfig;
use crate::solver::Theta;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ConvergenceExplicit,
    ConvergenceImplicit,
    ConvergenceDirichlet,
    Nist4,
    NeelWall,
    AmrSteady,
}

impl ExperimentKind {
    pub fn needs_physical(self) -> bool {
        matches!(self, ExperimentKind::Nist4 | ExperimentKind::NeelWall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFamily {
    /// Squares.
    Uniform,
    /// Squares with randomly shifted nodes.
    Randomized,
    /// Squares under a smooth sine map.
    Smooth,
    /// Clipped Voronoi cells.
    Polygonal,
    /// Logically square mesh of the disk inscribed in the unit square.
    Circular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub family: MeshFamily,
    /// Values of `1/h`.
    pub resolutions: Vec<usize>,
    /// Node shift of the randomized family, in units of `h`.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    0.2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeStepRule {
    /// `k = c h^2`
    Scaled(f64),
    /// Fixed `k`.
    Absolute(f64),
}

impl TimeStepRule {
    pub fn step(&self, h: f64) -> f64 {
        match *self {
            TimeStepRule::Scaled(c) => c * h * h,
            TimeStepRule::Absolute(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    #[serde(default)]
    pub theta: Theta,
    pub step: TimeStepRule,
    pub final_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaterialConfig {
    pub alpha: f64,
    pub eta: f64,
    pub q_aniso: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig {
            alpha: 1.0,
            eta: 1.0,
            q_aniso: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write VTK snapshots where the experiment defines them.
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("output"),
            snapshots: true,
        }
    }
}

/// One experiment, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mesh: Option<MeshConfig>,
    #[serde(default)]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub inner_product: InnerProductConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub physical: Option<PhysicalUnits>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub nist: Option<NistConfig>,
    #[serde(default)]
    pub neel: Option<NeelConfig>,
    #[serde(default)]
    pub amr: Option<AmrConfig>,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, ExperimentError> {
        toml::to_string(self).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.kind.needs_physical() != self.physical.is_some() {
            return bad("a [physical] block is required for nist4 and neel-wall and not allowed otherwise");
        }
        match self.kind {
            ExperimentKind::ConvergenceExplicit
            | ExperimentKind::ConvergenceImplicit
            | ExperimentKind::ConvergenceDirichlet => {
                let Some(mesh) = &self.mesh else { return bad("[mesh] missing") };
                let Some(time) = &self.time else { return bad("[time] missing") };
                if mesh.resolutions.len() < 2 || mesh.resolutions.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("resolutions must be increasing with at least two entries");
                }
                let want = if self.kind == ExperimentKind::ConvergenceExplicit {
                    Theta::Explicit
                } else {
                    Theta::Implicit
                };
                if time.theta != want {
                    return bad("theta does not match the experiment kind");
                }
                if !(time.final_time >= 0.0) {
                    return bad("final_time must be non-negative");
                }
            }
            ExperimentKind::Nist4 if self.nist.is_none() => return bad("[nist] missing"),
            ExperimentKind::NeelWall if self.neel.is_none() => return bad("[neel] missing"),
            ExperimentKind::AmrSteady if self.amr.is_none() => return bad("[amr] missing"),
            _ => {}
        }
        if !(self.material.alpha >= 0.0 && self.material.eta > 0.0) {
            return bad("alpha must be >= 0 and eta > 0");
        }
        Ok(())
    }
}
