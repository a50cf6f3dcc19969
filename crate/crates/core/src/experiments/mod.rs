//! Drivers for the numerical experiments: convergence studies, the fourth
//! standard problem, Néel wall relaxation, and locally refined meshes.

mod amr;
mod config;
mod convergence;
mod neel;
mod nist;
mod output;
mod units;

pub use amr::{amr_meshes, run_amr_comparison, run_steady_case, AmrConfig, AmrRow, SteadyRun};
pub use config::{
    ExperimentKind, MaterialConfig, MeshConfig, MeshFamily, OutputConfig, SimConfig, TimeConfig, TimeStepRule,
};
pub use convergence::{
    family_mesh, run_convergence, run_exact_case, CaseResult, ConvergenceTable, ExactBoundary, ExactCase,
};
pub use neel::{detect_vortices, run_neel_case, run_neel_wall, two_domain_state, NeelConfig, NeelRun, VortexReport};
pub use nist::{film_setup, run_nist4, run_nist_case, FilmSetup, NistConfig, NistRun};
pub use output::{write_snapshot, CsvTable};
pub use units::{neel_units, nist4_units, Nondimensional, PhysicalUnits, TimeScaling, MU0};

use crate::mesh::MeshError;
use crate::solver::StepError;
use crate::stray::StrayError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Stray(#[from] StrayError),
    #[error("resolution {n}: {source}")]
    Resolution {
        n: usize,
        #[source]
        source: Box<ExperimentError>,
    },
}
