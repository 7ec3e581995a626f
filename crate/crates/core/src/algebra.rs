//! The model algebra `⊕_k M_{n_k}(ℂ)` with trace `τ = Σ_k α_k Tr`.
//!
//! Elements are block-diagonal; every operation acts blockwise and never mixes
//! blocks. Taking all blocks of dimension one gives the commutative case of a
//! weighted finite measure space.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::linalg::{self, hermitian_eigen, singular_values, CMatrix, C64};
use crate::{Error, Result};

/// Tolerance for self-adjointness and idempotency of projections.
pub const TOL_PROJ: f64 = 1e-10;

/// Default cap on block dimensions.
pub const MAX_BLOCK_DIM: usize = 64;

/// Relative tolerance used to decide whether an eigenvalue sits on an interval endpoint.
pub const EIG_REL_TOL: f64 = 1e-12;

/// Threshold below which an eigenvalue of `Σ (1 - e_i)` counts as zero when
/// intersecting projection ranges.
const MEET_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

/// Direct sum of full matrix algebras with positive trace weights.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceAlgebra {
    blocks: Vec<Block>,
    total_trace: f64,
}

impl TraceAlgebra {
    pub fn new(blocks: Vec<Block>) -> Result<Arc<Self>> {
        if blocks.is_empty() {
            return Err(Error::Structural("algebra needs at least one block".into()));
        }
        for (k, b) in blocks.iter().enumerate() {
            if b.dim == 0 || b.dim > MAX_BLOCK_DIM {
                return Err(Error::Structural(format!(
                    "blocks[{k}].dim = {} outside 1..={MAX_BLOCK_DIM}",
                    b.dim
                )));
            }
            if !(b.weight > 0.0 && b.weight.is_finite()) {
                return Err(Error::Structural(format!(
                    "blocks[{k}].weight = {} must be positive and finite",
                    b.weight
                )));
            }
        }
        let total_trace = blocks.iter().map(|b| b.weight * b.dim as f64).sum();
        Ok(Arc::new(Self { blocks, total_trace }))
    }

    /// Convenience constructor from `(dim, weight)` pairs.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Arc<Self>> {
        Self::new(pairs.iter().map(|&(dim, weight)| Block { dim, weight }).collect())
    }

    /// All blocks of dimension one: a weighted finite measure space.
    pub fn commutative(weights: &[f64]) -> Result<Arc<Self>> {
        Self::new(weights.iter().map(|&weight| Block { dim: 1, weight }).collect())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `τ(1) = Σ_k α_k n_k`
    pub fn total_trace(&self) -> f64 {
        self.total_trace
    }

    pub fn min_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).fold(f64::INFINITY, f64::min)
    }

    /// `Σ_k n_k²`, the complex dimension of the algebra.
    pub fn vector_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == 1)
    }
}

/// An element of a [`TraceAlgebra`], stored as one dense matrix per block.
#[derive(Clone, Debug)]
pub struct AlgElement {
    algebra: Arc<TraceAlgebra>,
    blocks: Vec<CMatrix>,
}

impl PartialEq for AlgElement {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.blocks == other.blocks
    }
}

impl AlgElement {
    pub fn new(algebra: &Arc<TraceAlgebra>, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::Structural(format!(
                "{} blocks given, algebra has {}",
                blocks.len(),
                algebra.num_blocks()
            )));
        }
        for (k, (m, b)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if m.rows() != b.dim || m.cols() != b.dim {
                return Err(Error::Structural(format!(
                    "block {k} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    b.dim,
                    b.dim
                )));
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    pub fn zero(algebra: &Arc<TraceAlgebra>) -> Self {
        Self::from_fn(algebra, |_, d| CMatrix::zeros(d, d))
    }

    pub fn identity(algebra: &Arc<TraceAlgebra>) -> Self {
        Self::from_fn(algebra, |_, d| CMatrix::identity(d))
    }

    /// Builds each block from its index and dimension.
    pub fn from_fn(algebra: &Arc<TraceAlgebra>, mut f: impl FnMut(usize, usize) -> CMatrix) -> Self {
        let blocks = algebra
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let m = f(k, b.dim);
                assert_eq!((m.rows(), m.cols()), (b.dim, b.dim), "block {k} has the wrong shape");
                m
            })
            .collect();
        Self {
            algebra: algebra.clone(),
            blocks,
        }
    }

    /// Diagonal element with the given real entries, block after block.
    pub fn from_real_diagonal(algebra: &Arc<TraceAlgebra>, diag: &[f64]) -> Result<Self> {
        let n: usize = algebra.blocks().iter().map(|b| b.dim).sum();
        if diag.len() != n {
            return Err(Error::Structural(format!("{} diagonal entries given, algebra needs {n}", diag.len())));
        }
        let mut offset = 0;
        Ok(Self::from_fn(algebra, |_, d| {
            let m = CMatrix::from_real_diag(&diag[offset..offset + d]);
            offset += d;
            m
        }))
    }

    pub fn algebra(&self) -> &Arc<TraceAlgebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    pub fn same_algebra(&self, other: &AlgElement) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra
    }

    fn check_same(&self, other: &AlgElement) -> Result<()> {
        if self.same_algebra(other) {
            Ok(())
        } else {
            Err(Error::Structural("operands live in different algebras".into()))
        }
    }

    fn zip_with(&self, other: &AlgElement, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &AlgElement) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &AlgElement) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &AlgElement) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `self += s · other`
    pub fn axpy(&mut self, s: C64, other: &AlgElement) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.axpy(s, b);
        }
        Ok(())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|m| m.scale(s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map_blocks(|m| m.scale_real(s))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(CMatrix::adjoint)
    }

    /// `(x + x*)/2`
    pub fn real_part(&self) -> Self {
        self.map_blocks(CMatrix::hermitian_part)
    }

    /// `(x - x*)/(2i)`
    pub fn imag_part(&self) -> Self {
        let half_over_i = C64::new(0.0, -0.5);
        self.map_blocks(|m| (m - &m.adjoint()).scale(half_over_i))
    }

    /// `τ(x) = Σ_k α_k Tr(x_k)`
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(m, b)| m.trace() * b.weight)
            .sum()
    }

    /// `⟨a, b⟩_τ = τ(a* b)`
    pub fn inner(&self, other: &AlgElement) -> Result<C64> {
        self.check_same(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .zip(self.algebra.blocks())
            .map(|((a, b), blk)| {
                let s: C64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x.conj() * y).sum();
                s * blk.weight
            })
            .sum())
    }

    /// Uniform norm: the largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().map(CMatrix::spectral_norm).fold(0.0, f64::max)
    }

    /// Trace norm `τ(|x|)`.
    pub fn l1_norm(&self) -> f64 {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(m, b)| b.weight * singular_values(m).iter().sum::<f64>())
            .sum()
    }

    /// Weighted Schatten norm `(Σ_k α_k Σ_j σ_{k,j}^p)^{1/p}`, computed directly from the blocks.
    pub fn schatten_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.op_norm();
        }
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(m, b)| b.weight * singular_values(m).iter().map(|s| s.powf(p)).sum::<f64>())
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// `sqrt(τ(x* x))`, from the entries rather than singular values.
    pub fn hilbert_schmidt_norm(&self) -> f64 {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(m, b)| b.weight * m.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise deviation from self-adjointness.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(CMatrix::hermitian_defect).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Smallest eigenvalue of the Hermitian part over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| hermitian_eigen(m).values.first().copied().unwrap_or(f64::INFINITY))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol.max(TOL_PROJ)) && self.min_eigenvalue() >= -tol
    }

    /// Splits `x = (x1 - x2) + i (x3 - x4)` with each `xj ≥ 0`, using the
    /// positive and negative parts of `Re x` and `Im x`.
    pub fn abs_decompose(&self) -> [AlgElement; 4] {
        let (x1, x2) = self.real_part().jordan_split();
        let (x3, x4) = self.imag_part().jordan_split();
        [x1, x2, x3, x4]
    }

    /// Positive and negative parts of a Hermitian element.
    pub fn jordan_split(&self) -> (AlgElement, AlgElement) {
        let mut pos = Vec::with_capacity(self.blocks.len());
        let mut neg = Vec::with_capacity(self.blocks.len());
        for m in &self.blocks {
            let e = hermitian_eigen(m);
            let p = spectral_combination(&e, |l| l.max(0.0));
            let n = spectral_combination(&e, |l| (-l).max(0.0));
            pos.push(p);
            neg.push(n);
        }
        (
            Self {
                algebra: self.algebra.clone(),
                blocks: pos,
            },
            Self {
                algebra: self.algebra.clone(),
                blocks: neg,
            },
        )
    }

    /// Spectral projection of a Hermitian element onto eigenvalues in `interval`.
    ///
    /// Eigenvalues within `1e-12·‖x‖∞` of a closed endpoint are included, and
    /// within the same distance of an open endpoint excluded.
    pub fn spectral_projection(&self, interval: Interval) -> Result<Projection> {
        let defect = self.hermitian_defect();
        if defect > TOL_PROJ {
            return Err(Error::Domain(format!(
                "spectral projection of a non-Hermitian element (defect {defect:.3e})"
            )));
        }
        let eigs: Vec<_> = self.blocks.iter().map(hermitian_eigen).collect();
        let scale = eigs
            .iter()
            .flat_map(|e| e.values.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = EIG_REL_TOL * scale;
        let blocks = eigs.iter().map(|e| e.projection(|l| interval.contains(l, tol))).collect();
        Ok(Projection(Self {
            algebra: self.algebra.clone(),
            blocks,
        }))
    }

    /// `e x e`
    pub fn compress(&self, e: &Projection) -> Result<Self> {
        self.zip_with(&e.0, |x, p| &(p * x) * p)
    }

    /// `x e`
    pub fn right_compress(&self, e: &Projection) -> Result<Self> {
        self.zip_with(&e.0, |x, p| x * p)
    }

    /// Maximum entrywise distance between two elements.
    pub fn max_abs_diff(&self, other: &AlgElement) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max))
    }

    /// Concatenation of the row-major block entries.
    pub fn to_vector(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|m| m.as_slice().iter().copied()).collect()
    }

    pub fn from_vector(algebra: &Arc<TraceAlgebra>, v: &[C64]) -> Result<Self> {
        if v.len() != algebra.vector_dim() {
            return Err(Error::Structural(format!(
                "vector of length {} for algebra of dimension {}",
                v.len(),
                algebra.vector_dim()
            )));
        }
        let mut offset = 0;
        Ok(Self::from_fn(algebra, |_, d| {
            let m = CMatrix::from_row_major(d, d, v[offset..offset + d * d].to_vec()).expect("length checked");
            offset += d * d;
            m
        }))
    }
}

fn spectral_combination(e: &linalg::HermitianEigen, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = e.values.len();
    let mut out = CMatrix::zeros(n, n);
    for (k, &l) in e.values.iter().enumerate() {
        let w = f(l);
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = e.vectors[(i, k)] * w;
            for j in 0..n {
                out[(i, j)] += vi * e.vectors[(j, k)].conj();
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    Closed(f64),
    Open(f64),
    Unbounded,
}

/// A real interval with closed, open or missing endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo: Endpoint::Closed(lo),
            hi: Endpoint::Closed(hi),
        }
    }

    pub fn all() -> Self {
        Self {
            lo: Endpoint::Unbounded,
            hi: Endpoint::Unbounded,
        }
    }

    /// `(λ, ∞)`
    pub fn above(lambda: f64) -> Self {
        Self {
            lo: Endpoint::Open(lambda),
            hi: Endpoint::Unbounded,
        }
    }

    /// `(-∞, λ)`
    pub fn below(lambda: f64) -> Self {
        Self {
            lo: Endpoint::Unbounded,
            hi: Endpoint::Open(lambda),
        }
    }

    /// `[-λ, λ]`
    pub fn symmetric(lambda: f64) -> Self {
        Self::closed(-lambda, lambda)
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        let lo_ok = match self.lo {
            Endpoint::Closed(a) => v >= a - tol,
            Endpoint::Open(a) => v > a + tol,
            Endpoint::Unbounded => true,
        };
        let hi_ok = match self.hi {
            Endpoint::Closed(b) => v <= b + tol,
            Endpoint::Open(b) => v < b - tol,
            Endpoint::Unbounded => true,
        };
        lo_ok && hi_ok
    }
}

/// A self-adjoint idempotent element.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection(AlgElement);

impl Projection {
    /// Validates `p = p*` and `p² = p` to [`TOL_PROJ`] in operator norm.
    pub fn new(p: AlgElement) -> Result<Self> {
        let sa = p.sub(&p.adjoint())?.op_norm();
        if sa > TOL_PROJ {
            return Err(Error::Domain(format!("not self-adjoint: ‖p - p*‖ = {sa:.3e}")));
        }
        let idem = p.mul(&p)?.sub(&p)?.op_norm();
        if idem > TOL_PROJ {
            return Err(Error::Domain(format!("not idempotent: ‖p² - p‖ = {idem:.3e}")));
        }
        Ok(Self(p))
    }

    /// Wraps an element already known to be a projection by construction.
    pub(crate) fn from_spectral(p: AlgElement) -> Self {
        Self(p)
    }

    pub fn one(algebra: &Arc<TraceAlgebra>) -> Self {
        Self(AlgElement::identity(algebra))
    }

    pub fn zero(algebra: &Arc<TraceAlgebra>) -> Self {
        Self(AlgElement::zero(algebra))
    }

    pub fn as_element(&self) -> &AlgElement {
        &self.0
    }

    pub fn into_element(self) -> AlgElement {
        self.0
    }

    pub fn algebra(&self) -> &Arc<TraceAlgebra> {
        self.0.algebra()
    }

    /// `e⊥ = 1 - e`
    pub fn complement(&self) -> Projection {
        Projection(self.0.map_blocks(|m| &CMatrix::identity(m.rows()) - m))
    }

    /// `τ(e)`
    pub fn tau(&self) -> f64 {
        self.0.trace().re
    }

    /// `τ(e⊥)`
    pub fn tau_perp(&self) -> f64 {
        self.complement().tau()
    }

    /// `e - f` for a subprojection `f ≤ e`.
    pub fn minus(&self, f: &Projection) -> Result<Projection> {
        Ok(Projection(self.0.sub(&f.0)?))
    }

    /// Projection onto the intersection of the ranges.
    pub fn meet(es: &[Projection]) -> Result<Projection> {
        let first = es
            .first()
            .ok_or_else(|| Error::Structural("meet of an empty family".into()))?;
        let algebra = first.algebra().clone();
        let mut blocks = Vec::with_capacity(algebra.num_blocks());
        for (k, b) in algebra.blocks().iter().enumerate() {
            let mut sum = CMatrix::zeros(b.dim, b.dim);
            for e in es {
                if !e.0.same_algebra(&first.0) {
                    return Err(Error::Structural("meet across different algebras".into()));
                }
                sum += &(&CMatrix::identity(b.dim) - e.0.block(k));
            }
            let eig = hermitian_eigen(&sum);
            blocks.push(eig.projection(|l| l <= MEET_TOL));
        }
        let meet = Projection(AlgElement { algebra, blocks });
        debug_assert!(meet.tau_perp() <= es.iter().map(Projection::tau_perp).sum::<f64>() + 1e-9);
        Ok(meet)
    }
}

impl AsRef<AlgElement> for Projection {
    fn as_ref(&self) -> &AlgElement {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn trace_of_identity_is_total_trace() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        assert_eq!(AlgElement::identity(&a).trace(), c(2.0, 0.0));
        let b = TraceAlgebra::from_pairs(&[(3, 0.25), (2, 2.0)]).unwrap();
        assert_eq!(AlgElement::identity(&b).trace().re, b.total_trace());
    }

    #[test]
    fn trace_weighted_sum() {
        let a = TraceAlgebra::commutative(&[0.5, 2.0]).unwrap();
        let x = AlgElement::from_real_diagonal(&a, &[4.0, 2.0]).unwrap();
        assert_eq!(x.trace(), c(6.0, 0.0));
        assert_eq!(AlgElement::zero(&a).trace(), c(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_blocks() {
        assert!(TraceAlgebra::from_pairs(&[(2, -1.0)]).is_err());
        assert!(TraceAlgebra::from_pairs(&[(0, 1.0)]).is_err());
        assert!(TraceAlgebra::from_pairs(&[(65, 1.0)]).is_err());
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        assert!(AlgElement::new(&a, vec![CMatrix::zeros(3, 3)]).is_err());
    }

    #[test]
    fn norms_of_small_examples() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        assert_eq!(AlgElement::identity(&a).op_norm(), 1.0);
        let d = AlgElement::from_real_diagonal(&a, &[3.0, -1.0]).unwrap();
        assert!((d.op_norm() - 3.0).abs() < 1e-15);
        let nil = AlgElement::new(&a, vec![CMatrix::from_row_major(2, 2, vec![c(0., 0.), c(2., 0.), c(0., 0.), c(0., 0.)]).unwrap()]).unwrap();
        assert!((nil.op_norm() - 2.0).abs() < 1e-15);
        assert!((nil.l1_norm() - 2.0).abs() < 1e-15);
        assert!((nil.adjoint().l1_norm() - nil.l1_norm()).abs() < 1e-15);
        let d31 = AlgElement::from_real_diagonal(&a, &[3.0, 1.0]).unwrap();
        assert!((d31.l1_norm() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn abs_decompose_examples() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        let i1 = AlgElement::identity(&a).scale(c(0.0, 1.0));
        let [x1, x2, x3, x4] = i1.abs_decompose();
        assert!(x1.op_norm() < 1e-15 && x2.op_norm() < 1e-15 && x4.op_norm() < 1e-15);
        assert!(x3.sub(&AlgElement::identity(&a)).unwrap().op_norm() < 1e-15);

        let d = AlgElement::from_real_diagonal(&a, &[1.0, -2.0]).unwrap();
        let [x1, x2, x3, x4] = d.abs_decompose();
        let want1 = AlgElement::from_real_diagonal(&a, &[1.0, 0.0]).unwrap();
        let want2 = AlgElement::from_real_diagonal(&a, &[0.0, 2.0]).unwrap();
        assert!(x1.max_abs_diff(&want1).unwrap() < 1e-15);
        assert!(x2.max_abs_diff(&want2).unwrap() < 1e-15);
        assert!(x3.op_norm() < 1e-15 && x4.op_norm() < 1e-15);

        let psd = AlgElement::from_real_diagonal(&a, &[2.0, 0.5]).unwrap();
        let [y1, y2, y3, y4] = psd.abs_decompose();
        assert!(y1.max_abs_diff(&psd).unwrap() < 1e-15);
        assert!(y2.op_norm() + y3.op_norm() + y4.op_norm() < 1e-15);
    }

    #[test]
    fn spectral_projection_examples() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        let x = AlgElement::from_real_diagonal(&a, &[3.0, 1.0]).unwrap();
        let p = x.spectral_projection(Interval::closed(0.0, 2.0)).unwrap();
        let want = AlgElement::from_real_diagonal(&a, &[0.0, 1.0]).unwrap();
        assert!(p.as_element().max_abs_diff(&want).unwrap() < 1e-15);
        let full = x.spectral_projection(Interval::closed(0.0, 5.0)).unwrap();
        assert!((full.tau() - 2.0).abs() < 1e-15);
        // closed endpoint is included
        let edge = x.spectral_projection(Interval::closed(1.0, 2.0)).unwrap();
        assert!(edge.as_element().max_abs_diff(&want).unwrap() < 1e-15);
        let open = x.spectral_projection(Interval::above(1.0)).unwrap();
        let want3 = AlgElement::from_real_diagonal(&a, &[1.0, 0.0]).unwrap();
        assert!(open.as_element().max_abs_diff(&want3).unwrap() < 1e-15);
    }

    #[test]
    fn spectral_projection_rejects_non_hermitian() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        let nil = AlgElement::new(&a, vec![CMatrix::from_row_major(2, 2, vec![c(0., 0.), c(2., 0.), c(0., 0.), c(0., 0.)]).unwrap()]).unwrap();
        assert!(matches!(nil.spectral_projection(Interval::all()), Err(Error::Domain(_))));
    }

    #[test]
    fn meet_examples() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        let e = Projection::new(AlgElement::from_real_diagonal(&a, &[1.0, 0.0]).unwrap()).unwrap();
        let f = Projection::new(AlgElement::from_real_diagonal(&a, &[0.0, 1.0]).unwrap()).unwrap();
        let ee = Projection::meet(&[e.clone(), e.clone()]).unwrap();
        assert!(ee.as_element().max_abs_diff(e.as_element()).unwrap() < 1e-15);
        let ef = Projection::meet(&[e.clone(), f]).unwrap();
        assert!(ef.as_element().op_norm() < 1e-15);
        let e1 = Projection::meet(&[e.clone(), Projection::one(&a)]).unwrap();
        assert!(e1.as_element().max_abs_diff(e.as_element()).unwrap() < 1e-15);
    }

    #[test]
    fn projection_validation() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        assert!(Projection::new(AlgElement::from_real_diagonal(&a, &[0.5, 1.0]).unwrap()).is_err());
        assert!(Projection::new(AlgElement::identity(&a)).is_ok());
    }
}
