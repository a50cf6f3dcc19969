//! Stray (demagnetizing) field of a piecewise-constant magnetization.

mod direct;
mod fft;
mod tensor;

pub use direct::{apply_direct, gauss_legendre, DirectQuadrature, DirectStrayField};
pub use fft::DemagKernel;
pub use tensor::demag_tensor_entry;

use crate::vec3::Vec3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StrayError {
    #[error("grid mismatch: {0}")]
    Grid(String),
    #[error("kernel cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that maps a cell magnetization to the stray field.
pub trait StrayField: Send + Sync {
    fn field(&self, m: &[Vec3]) -> Result<Vec<Vec3>, StrayError>;
}

impl StrayField for DemagKernel {
    fn field(&self, m: &[Vec3]) -> Result<Vec<Vec3>, StrayError> {
        self.apply_fft(m)
    }
}

impl StrayField for DirectStrayField {
    fn field(&self, m: &[Vec3]) -> Result<Vec<Vec3>, StrayError> {
        self.apply(m)
    }
}
