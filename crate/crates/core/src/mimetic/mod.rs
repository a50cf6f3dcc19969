//! Mimetic inner products and the discrete divergence and gradient.

mod fields;
mod local;
mod operators;

pub use fields::{CellVectorField, EdgeVectorField, FluxField};
pub use local::{
    assemble_nr, inner_product_matrix, inverse_inner_product_matrix, is_m_matrix, GammaRule,
    GammaTildeRule, InnerProductConfig, LocalInnerProduct, MimeticError,
};
pub use operators::{
    discrete_divergence, inner_product_f, inner_product_q, local_flux, local_gradient,
    MimeticOperators,
};
