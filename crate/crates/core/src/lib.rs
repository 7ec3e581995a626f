//! Desk-scale noncommutative ergodic theory.
//!
//! A finite direct sum of matrix blocks with a weighted trace stands in for a
//! semifinite von Neumann algebra. On top of it the crate provides generalized
//! singular numbers and symmetric-space norms, certified positive
//! Dunford-Schwartz maps and their Markov semigroups, Besicovitch weights, the
//! ergodic averages `A_n`, `A_t`, `B_t`, and constructive certificates for
//! maximal inequalities and almost-uniform convergence.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(a <= b)` is the NaN-rejecting form used for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algebra;
pub mod averaging;
pub mod certify;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod quadrature;
pub mod rearrangement;
pub mod sampling;
pub mod weights;

pub use algebra::{AlgElement, Block, Interval, Projection, TraceAlgebra};
pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
