//! Mimetic finite difference solver for the Landau–Lifshitz equation on polygonal meshes.

pub mod analytic;
pub mod experiments;
pub mod linalg;
pub mod mesh;
pub mod mimetic;
pub mod solver;
pub mod stray;
pub mod vec3;

pub use mesh::{BoundaryCondition, Mesh, Point};
pub use mimetic::{CellVectorField, EdgeVectorField, FluxField, InnerProductConfig, MimeticOperators};
pub use solver::{LLSolver, LLState, MaterialParams, ThetaScheme};
pub use vec3::Vec3;
