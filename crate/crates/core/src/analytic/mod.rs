//! Closed-form solutions, interpolants and error norms.

mod exact;
mod norms;
mod project;
mod sstate;
mod steady;

pub use exact::{exact_gradient, exact_solution, ExactSolutionParams};
pub use norms::{cell_errors, convergence_rate, error_norms, flux_error, ErrorNorms};
pub use project::{project_flux, project_to_cells};
pub use sstate::{generate_s_state, SState, SStateProtocol};
pub use steady::{steady_external_field, steady_gradient, steady_solution, SteadySolutionParams};
