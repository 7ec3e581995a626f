//! Generalized singular numbers, submajorization and symmetric-space norms.

mod norms;
mod singular;

pub use norms::{
    luxemburg_norm, lorentz_norm, marcinkiewicz_norm, one_in_space, orlicz_modular, step_norm, sym_norm,
    ConcaveWeight, OrliczFunction, PiecewiseLinear, SymmetricSpace, UnitMembership,
};
pub use singular::{mu, submajorization_gap, submajorize, submajorize_within, SingularFunction, Step};
