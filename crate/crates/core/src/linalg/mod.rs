//! Sparse matrices and Krylov solvers.

mod csr;
mod krylov;
mod precond;

pub use csr::SparseMatrix;
pub use krylov::{solve, solve_preconditioned, solve_with_guess, Method, SolveError, SolveStats, SolverConfig};
pub use precond::{build_preconditioner, Identity, Ilu0, Jacobi, Preconditioner, PreconditionerKind};
