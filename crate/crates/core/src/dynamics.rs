//! Positive Dunford-Schwartz maps in Kraus form and the Markov semigroups
//! `T_t = exp(t c (Φ - id))` they generate.
//!
//! A Kraus map `Φ(x) = Σ K_i x K_i*` with block-diagonal `K_i` is completely
//! positive. It is a contraction in `‖·‖∞` when `Σ K_i K_i* ≤ 1` and in `‖·‖₁`
//! when `Σ K_i* K_i ≤ 1`. Because blocks never mix, the trace weight of a block
//! multiplies both sides of its trace inequality and cancels, so both
//! conditions are checked block by block without weights.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::algebra::{AlgElement, TraceAlgebra};
use crate::linalg::{hermitian_eigen, CMatrix, C64};
use crate::sampling::{gaussian_matrix, random_unitary, rng_from_seed};
use crate::{Error, Result};

/// Slack for the certification inequalities.
pub const CERT_TOL: f64 = 1e-10;

/// Poisson tail mass left out of the semigroup series; kept well under 1e-12
/// so that truncation stays below rounding for unit-norm inputs.
pub const POISSON_TAIL: f64 = 1e-15;

/// A certified completely positive, doubly substochastic Kraus map.
#[derive(Clone, Debug, PartialEq)]
pub struct DsMap {
    algebra: Arc<TraceAlgebra>,
    kraus: Vec<AlgElement>,
    subunital_margin: f64,
    trace_margin: f64,
}

fn min_eig_of_defect(algebra: &Arc<TraceAlgebra>, kraus: &[AlgElement], left: bool) -> f64 {
    algebra
        .blocks()
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let mut defect = CMatrix::identity(b.dim);
            for op in kraus {
                let m = op.block(k);
                let prod = if left { m * &m.adjoint() } else { &m.adjoint() * m };
                defect -= &prod;
            }
            hermitian_eigen(&defect).values[0]
        })
        .fold(f64::INFINITY, f64::min)
}

impl DsMap {
    /// Certifies `Σ K K* ≤ 1` and `Σ K* K ≤ 1` blockwise.
    pub fn new(algebra: &Arc<TraceAlgebra>, kraus: Vec<AlgElement>) -> Result<Self> {
        for (i, k) in kraus.iter().enumerate() {
            if !k.algebra().as_ref().eq(algebra.as_ref()) {
                return Err(Error::Structural(format!("Kraus operator {i} lives in another algebra")));
            }
        }
        let subunital_margin = min_eig_of_defect(algebra, &kraus, true);
        let trace_margin = min_eig_of_defect(algebra, &kraus, false);
        if subunital_margin < -CERT_TOL || trace_margin < -CERT_TOL {
            return Err(Error::Certification {
                subunital_margin,
                trace_margin,
            });
        }
        Ok(Self {
            algebra: algebra.clone(),
            kraus,
            subunital_margin,
            trace_margin,
        })
    }

    pub fn identity(algebra: &Arc<TraceAlgebra>) -> Self {
        Self::new(algebra, alloc::vec![AlgElement::identity(algebra)]).expect("identity is DS")
    }

    /// `Φ = 0` (no Kraus operators).
    pub fn zero(algebra: &Arc<TraceAlgebra>) -> Self {
        Self::new(algebra, Vec::new()).expect("zero map is DS")
    }

    /// `Φ(x) = s x` for `0 ≤ s ≤ 1`.
    pub fn scalar(algebra: &Arc<TraceAlgebra>, s: f64) -> Result<Self> {
        if s < 0.0 {
            return Err(Error::Domain(format!("scalar map needs s ≥ 0, got {s}")));
        }
        Self::new(algebra, alloc::vec![AlgElement::identity(algebra).scale_real(s.sqrt())])
    }

    pub fn algebra(&self) -> &Arc<TraceAlgebra> {
        &self.algebra
    }

    pub fn kraus(&self) -> &[AlgElement] {
        &self.kraus
    }

    /// Smallest eigenvalue of `1 - Σ K K*`.
    pub fn subunital_margin(&self) -> f64 {
        self.subunital_margin
    }

    /// Smallest eigenvalue of `1 - Σ K* K`.
    pub fn trace_margin(&self) -> f64 {
        self.trace_margin
    }

    /// The same map with every Kraus operator multiplied by `s`, i.e. `s² Φ`.
    pub fn damped(&self, s: f64) -> Result<Self> {
        Self::new(&self.algebra, self.kraus.iter().map(|k| k.scale_real(s)).collect())
    }

    /// `Φ(x) = Σ K_i x K_i*`
    pub fn apply(&self, x: &AlgElement) -> Result<AlgElement> {
        if !(Arc::ptr_eq(x.algebra(), &self.algebra) || **x.algebra() == *self.algebra) {
            return Err(Error::Structural("element lives in another algebra".into()));
        }
        let out = AlgElement::from_fn(&self.algebra, |k, d| {
            let xk = x.block(k);
            let mut acc = CMatrix::zeros(d, d);
            for op in &self.kraus {
                let m = op.block(k);
                acc += &(&(m * xk) * &m.adjoint());
            }
            acc
        });
        debug_assert!(out.l1_norm() <= x.l1_norm() * (1.0 + 1e-9) + 1e-12);
        debug_assert!(out.op_norm() <= x.op_norm() * (1.0 + 1e-9) + 1e-12);
        Ok(out)
    }

    /// `Φ^k(x)`
    pub fn power(&self, k: usize, x: &AlgElement) -> Result<AlgElement> {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.apply(&y)?;
        }
        Ok(y)
    }

    /// Matrix of `Φ` restricted to block `k` on row-major vectorizations:
    /// `Σ_i K_i ⊗ conj(K_i)`.
    pub fn vectorized_block(&self, k: usize) -> CMatrix {
        let d = self.algebra.blocks()[k].dim;
        let mut out = CMatrix::zeros(d * d, d * d);
        for op in &self.kraus {
            let m = op.block(k);
            out += &m.kron(&m.conj());
        }
        out
    }
}

/// Draws `n_kraus` complex Gaussian block-diagonal Kraus operators and rescales
/// them by `1/sqrt(max(‖Σ K K*‖∞, ‖Σ K* K‖∞))`.
pub fn random_ds(algebra: &Arc<TraceAlgebra>, seed: u64, n_kraus: usize) -> Result<DsMap> {
    if n_kraus == 0 {
        return Err(Error::Domain("random_ds needs at least one Kraus operator".into()));
    }
    let mut rng = rng_from_seed(seed);
    let raw: Vec<AlgElement> = (0..n_kraus)
        .map(|_| AlgElement::from_fn(algebra, |_, d| gaussian_matrix(&mut rng, d)))
        .collect();
    let mut worst = 0.0f64;
    for (k, b) in algebra.blocks().iter().enumerate() {
        let mut left = CMatrix::zeros(b.dim, b.dim);
        let mut right = CMatrix::zeros(b.dim, b.dim);
        for op in &raw {
            let m = op.block(k);
            left += &(m * &m.adjoint());
            right += &(&m.adjoint() * m);
        }
        let top = |h: &CMatrix| *hermitian_eigen(h).values.last().expect("nonempty block");
        worst = worst.max(top(&left)).max(top(&right));
    }
    let s = 1.0 / worst.sqrt();
    DsMap::new(algebra, raw.iter().map(|k| k.scale_real(s)).collect())
}

/// Mixed-unitary channel `Φ(x) = (1/n) Σ U_i x U_i*` with random unitaries:
/// unital and trace preserving, so its semigroup has a nonzero fixed-point
/// algebra.
pub fn random_unital_ds(algebra: &Arc<TraceAlgebra>, seed: u64, n_kraus: usize) -> Result<DsMap> {
    if n_kraus == 0 {
        return Err(Error::Domain("random_unital_ds needs at least one Kraus operator".into()));
    }
    let mut rng = rng_from_seed(seed);
    let s = 1.0 / (n_kraus as f64).sqrt();
    let kraus = (0..n_kraus).map(|_| random_unitary(&mut rng, algebra).scale_real(s)).collect();
    DsMap::new(algebra, kraus)
}

/// `T_t = exp(t c (Φ - id))`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovSemigroup {
    phi: DsMap,
    rate: f64,
}

impl MarkovSemigroup {
    pub fn new(phi: DsMap, rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("rate must be finite and nonnegative, got {rate}")));
        }
        Ok(Self { phi, rate })
    }

    pub fn phi(&self) -> &DsMap {
        &self.phi
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn algebra(&self) -> &Arc<TraceAlgebra> {
        self.phi.algebra()
    }

    /// `T_t(x) = e^{-ct} Σ_k (ct)^k/k! Φ^k(x)`, truncated once the Poisson tail
    /// mass is below [`POISSON_TAIL`].
    pub fn semigroup_at(&self, t: f64, x: &AlgElement) -> Result<AlgElement> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("semigroup time must be nonnegative, got {t}")));
        }
        let lam = self.rate * t;
        if lam == 0.0 {
            return Ok(x.clone());
        }
        let mut acc = AlgElement::zero(self.algebra());
        let mut term = x.clone();
        for (k, w) in poisson_weights(lam).into_iter().enumerate() {
            if k > 0 {
                term = self.phi.apply(&term)?;
            }
            if w > 0.0 {
                acc.axpy(C64::new(w, 0.0), &term)?;
            }
        }
        Ok(acc)
    }

    /// Generator of block `k` on vectorizations: `c (Σ K ⊗ conj K - I)`.
    pub fn generator_block(&self, k: usize) -> CMatrix {
        let mut g = self.phi.vectorized_block(k);
        g -= &CMatrix::identity(g.rows());
        g.scale_real(self.rate)
    }
}

/// Poisson(`lam`) probabilities `P(N = k)` up to the first `K` with
/// `P(N > K) ≤ POISSON_TAIL`, computed in log space.
pub fn poisson_weights(lam: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if lam <= 0.0 {
        out.push(1.0);
        return out;
    }
    let ln_lam = lam.ln();
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let ln_p = -lam + kf * ln_lam - libm::lgamma(kf + 1.0);
        let p = ln_p.exp();
        out.push(p);
        // P(N > k) ≤ p_{k+1} / (1 - lam/(k+2)) once k + 2 > lam
        let next = p * lam / (kf + 1.0);
        if kf + 2.0 > lam {
            let tail = next / (1.0 - lam / (kf + 2.0));
            if tail <= POISSON_TAIL {
                break;
            }
        }
        k += 1;
    }
    out
}

/// One sample for [`verify_ds_semigroup`]: check `T_t`, `T_s`, `T_{t+s}` on `x`.
#[derive(Clone, Debug)]
pub struct DsSample {
    pub t: f64,
    pub s: f64,
    pub x: AlgElement,
}

/// Worst-case figures over a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct DsReport {
    /// `1 - max ‖T_t x‖₁ / ‖x‖₁`; negative means an `L¹` violation.
    pub l1_margin: f64,
    /// `1 - max ‖T_t x‖∞ / ‖x‖∞`; negative means an `L^∞` violation.
    pub linf_margin: f64,
    /// Smallest eigenvalue of `T_t(x₊)` relative to `‖x₊‖∞`.
    pub positivity_margin: f64,
    /// `max ‖T_{t+s} x - T_t T_s x‖∞`
    pub semigroup_error: f64,
    /// `max ‖T_h x - x‖₁ / (h ‖x‖₁)` at `h = CONTINUITY_STEP`.
    pub continuity_modulus: f64,
    /// `(e^{2ch} - 1)/h`, the bound the modulus must respect.
    pub continuity_bound: f64,
    pub samples: usize,
    pub pass: bool,
}

pub const CONTINUITY_STEP: f64 = 1e-3;

pub fn verify_ds_semigroup(sg: &MarkovSemigroup, samples: &[DsSample]) -> Result<DsReport> {
    let mut l1_ratio = 0.0f64;
    let mut linf_ratio = 0.0f64;
    let mut positivity = f64::INFINITY;
    let mut semigroup_error = 0.0f64;
    let mut modulus = 0.0f64;
    let h = CONTINUITY_STEP;
    for smp in samples {
        let x = &smp.x;
        let tx = sg.semigroup_at(smp.t, x)?;
        let (n1, ninf) = (x.l1_norm(), x.op_norm());
        if n1 > 0.0 {
            l1_ratio = l1_ratio.max(tx.l1_norm() / n1);
            modulus = modulus.max(sg.semigroup_at(h, x)?.sub(x)?.l1_norm() / (h * n1));
        }
        if ninf > 0.0 {
            linf_ratio = linf_ratio.max(tx.op_norm() / ninf);
        }
        let [pos, ..] = x.abs_decompose();
        let pn = pos.op_norm();
        if pn > 0.0 {
            positivity = positivity.min(sg.semigroup_at(smp.t, &pos)?.min_eigenvalue() / pn);
        }
        let both = sg.semigroup_at(smp.t + smp.s, x)?;
        let stepwise = sg.semigroup_at(smp.t, &sg.semigroup_at(smp.s, x)?)?;
        semigroup_error = semigroup_error.max(both.sub(&stepwise)?.op_norm());
    }
    if positivity == f64::INFINITY {
        positivity = 0.0;
    }
    let continuity_bound = (2.0 * sg.rate() * h).exp_m1() / h;
    let l1_margin = 1.0 - l1_ratio;
    let linf_margin = 1.0 - linf_ratio;
    let pass = l1_margin >= -1e-10
        && linf_margin >= -1e-10
        && positivity >= -1e-10
        && semigroup_error <= 1e-9
        && modulus <= continuity_bound * (1.0 + 1e-9) + 1e-12;
    Ok(DsReport {
        l1_margin,
        linf_margin,
        positivity_margin: positivity,
        semigroup_error,
        continuity_modulus: modulus,
        continuity_bound,
        samples: samples.len(),
        pass,
    })
}
