//! Seeded random instances.
//!
//! Every random object is drawn from a ChaCha stream seeded from a `u64`, so a
//! seed fully determines the instance on every platform.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgElement, Block, TraceAlgebra};
use crate::linalg::{CMatrix, C64};
use crate::Result;

pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of the `index`-th independent stream derived from `master` (splitmix64).
pub fn stream_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng))
}

/// Random algebra with `1..=max_blocks` blocks of dimension `1..=max_dim` and
/// weights log-uniform in `[0.25, 4]`.
pub fn random_algebra<R: Rng + ?Sized>(rng: &mut R, max_blocks: usize, max_dim: usize) -> Result<Arc<TraceAlgebra>> {
    let nb = rng.random_range(1..=max_blocks.max(1));
    let blocks: Vec<Block> = (0..nb)
        .map(|_| Block {
            dim: rng.random_range(1..=max_dim.max(1)),
            weight: 2f64.powf(rng.random_range(-2.0..=2.0)),
        })
        .collect();
    TraceAlgebra::new(blocks)
}

/// Element with i.i.d. complex Gaussian entries scaled by `1/sqrt(n)` per block.
pub fn random_element<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TraceAlgebra>) -> AlgElement {
    AlgElement::from_fn(algebra, |_, n| gaussian_matrix(rng, n).scale_real(1.0 / (n as f64).sqrt()))
}

/// Positive element `g g* / n` per block.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TraceAlgebra>) -> AlgElement {
    AlgElement::from_fn(algebra, |_, n| {
        let g = gaussian_matrix(rng, n);
        (&g * &g.adjoint()).scale_real(1.0 / n as f64).hermitian_part()
    })
}

/// Hermitian element `(g + g*)/(2 sqrt(n))` per block.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TraceAlgebra>) -> AlgElement {
    AlgElement::from_fn(algebra, |_, n| {
        gaussian_matrix(rng, n).hermitian_part().scale_real(1.0 / (n as f64).sqrt())
    })
}

/// Unitary per block: eigenvectors of a random Hermitian element.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TraceAlgebra>) -> AlgElement {
    AlgElement::from_fn(algebra, |_, n| crate::linalg::hermitian_eigen(&gaussian_matrix(rng, n).hermitian_part()).vectors)
}

/// Random orthogonal projection: spectral cut of a random Hermitian element at 0.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TraceAlgebra>) -> crate::Projection {
    random_hermitian(rng, algebra)
        .spectral_projection(crate::Interval::above(0.0))
        .expect("Hermitian by construction")
}
