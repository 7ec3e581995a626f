//! Ergodic averages `A_n`, `A_t` and the Besicovitch-weighted `B_t`.
//!
//! Two exact evaluators are provided. The augmented exponential integrates
//! `e^{s(G + iθ)} vec(x)` over `[0, t]` as the last column of
//! `exp(t [[G + iθ, vec x], [0, 0]])`. The Poisson series expands
//! `T_s = Σ_k e^{-cs} (cs)^k / k! Φ^k` and integrates each Poisson density in
//! closed form, so a whole grid of times shares one list of powers `Φ^k(x)`.
//! Both are exact up to rounding and the `1e-15` Poisson tail.
//! [`quadrature_weighted_average`] is an independent oracle for both.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::algebra::{AlgElement, TraceAlgebra};
use crate::dynamics::{poisson_weights, DsMap, MarkovSemigroup};
use crate::linalg::{expm, CMatrix, C64};
use crate::quadrature::{integrate, oscillation_panel, QuadratureConfig};
use crate::weights::{BesicovitchWeight, Perturbation};
use crate::{Error, Result};

/// Relative slack on `‖B_t(x)‖₁ ≤ C ‖x‖₁`.
const CONTRACTION_SLACK: f64 = 1e-9;

/// `A_n(x) = (1/n) Σ_{k<n} Φ^k(x)`
pub fn discrete_average(phi: &DsMap, x: &AlgElement, n: usize) -> Result<AlgElement> {
    discrete_average_with(x, n, |y| phi.apply(y))
}

/// `(1/n) Σ_{k<n} T^k(x)` for an arbitrary linear step `T`.
pub fn discrete_average_with(
    x: &AlgElement,
    n: usize,
    mut step: impl FnMut(&AlgElement) -> Result<AlgElement>,
) -> Result<AlgElement> {
    if n == 0 {
        return Err(Error::Domain("discrete average needs n ≥ 1".into()));
    }
    let mut acc = x.clone();
    let mut term = x.clone();
    for _ in 1..n {
        term = step(&term)?;
        acc.axpy(C64::new(1.0, 0.0), &term)?;
    }
    Ok(acc.scale_real(1.0 / n as f64))
}

/// Every discrete average `A_1(x), …, A_n(x)` in one pass.
pub fn discrete_averages(phi: &DsMap, x: &AlgElement, n: usize) -> Result<Vec<AlgElement>> {
    let mut out = Vec::with_capacity(n);
    let mut sum = AlgElement::zero(x.algebra());
    let mut term = x.clone();
    for k in 0..n {
        if k > 0 {
            term = phi.apply(&term)?;
        }
        sum.axpy(C64::new(1.0, 0.0), &term)?;
        out.push(sum.scale_real(1.0 / (k + 1) as f64));
    }
    Ok(out)
}

/// Vectorized generators `G_k = c (Σ K ⊗ conj K - I)` of a semigroup, one
/// per block, built once.
#[derive(Clone, Debug)]
pub struct VectorizedSemigroup {
    algebra: Arc<TraceAlgebra>,
    generators: Vec<CMatrix>,
}

impl VectorizedSemigroup {
    pub fn new(sg: &MarkovSemigroup) -> Self {
        let algebra = sg.algebra().clone();
        let generators = (0..algebra.num_blocks()).map(|k| sg.generator_block(k)).collect();
        Self { algebra, generators }
    }

    pub fn generator(&self, k: usize) -> &CMatrix {
        &self.generators[k]
    }

    /// Largest `‖G_k‖₁` (induced on vectorizations), a bound for `‖G‖`.
    pub fn generator_norm(&self) -> f64 {
        self.generators.iter().map(|g| g.norm_1()).fold(0.0, f64::max)
    }

    /// `∫_0^t e^{iθs} T_s(x) ds` through the augmented exponential.
    pub fn integral(&self, x: &AlgElement, theta: f64, t: f64) -> Result<AlgElement> {
        if !x.same_algebra_as(&self.algebra) {
            return Err(Error::Structural("element lives in another algebra".into()));
        }
        if t == 0.0 {
            return Ok(AlgElement::zero(&self.algebra));
        }
        let blocks = x
            .blocks()
            .iter()
            .zip(&self.generators)
            .map(|(xb, g)| {
                let n = xb.rows();
                if xb.max_abs() == 0.0 {
                    return CMatrix::zeros(n, n);
                }
                let d = n * n;
                let shift = C64::new(0.0, theta);
                let v = xb.as_slice();
                let aug = CMatrix::from_fn(d + 1, d + 1, |i, j| {
                    if i == d {
                        C64::new(0.0, 0.0)
                    } else if j == d {
                        v[i] * t
                    } else if i == j {
                        (g[(i, j)] + shift) * t
                    } else {
                        g[(i, j)] * t
                    }
                });
                let e = expm(&aug);
                CMatrix::from_fn(n, n, |i, j| e[(i * n + j, d)])
            })
            .collect();
        AlgElement::new(&self.algebra, blocks)
    }

    /// `A_t(x) = (1/t) ∫_0^t T_s(x) ds`
    pub fn average(&self, x: &AlgElement, t: f64) -> Result<AlgElement> {
        check_time(t)?;
        Ok(self.integral(x, 0.0, t)?.scale_real(1.0 / t))
    }
}

trait SameAlgebra {
    fn same_algebra_as(&self, a: &Arc<TraceAlgebra>) -> bool;
}

impl SameAlgebra for AlgElement {
    fn same_algebra_as(&self, a: &Arc<TraceAlgebra>) -> bool {
        Arc::ptr_eq(self.algebra(), a) || **self.algebra() == **a
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("averaging time must be positive and finite, got {t}")));
    }
    Ok(())
}

/// `(e^w - 1) / w`, accurate near `w = 0`.
fn phi1(w: C64) -> C64 {
    if w.norm() < 1e-8 {
        return C64::new(1.0, 0.0) + w * 0.5;
    }
    let em = libm::expm1(w.re);
    let s = (0.5 * w.im).sin();
    let expm1 = C64::new(em * w.im.cos() - 2.0 * s * s, (em + 1.0) * w.im.sin());
    expm1 / w
}

/// `J_k = ∫_0^t e^{iθs} e^{-cs} (cs)^k / k! ds` for `k < len`.
///
/// With `z = c - iθ`, integration by parts gives `J_0 = (1 - e^{-zt}) / z` and
/// `J_k = (c J_{k-1} - e^{-zt} (ct)^k / k!) / z`; `|c / z| ≤ 1` keeps the
/// recurrence stable.
fn gamma_coefficients(c: f64, theta: f64, t: f64, len: usize) -> Vec<C64> {
    let mut out = alloc::vec![C64::new(0.0, 0.0); len.max(1)];
    if c == 0.0 {
        out[0] = phi1(C64::new(0.0, theta * t)) * t;
        return out;
    }
    let z = C64::new(c, -theta);
    out[0] = phi1(-z * t) * t;
    let phase = C64::new(0.0, theta * t).exp();
    let lam = c * t;
    let ln_lam = lam.ln();
    for k in 1..out.len() {
        let kf = k as f64;
        let pmf = (-lam + kf * ln_lam - libm::lgamma(kf + 1.0)).exp();
        out[k] = (out[k - 1] * c - phase * pmf) / z;
    }
    out
}

/// Powers `Φ^k(x)` long enough for every time up to `t_max`.
#[derive(Clone, Debug)]
pub struct PoissonSeries {
    rate: f64,
    powers: Vec<AlgElement>,
}

impl PoissonSeries {
    pub fn new(sg: &MarkovSemigroup, x: &AlgElement, t_max: f64) -> Result<Self> {
        let len = if sg.rate() == 0.0 { 1 } else { poisson_weights(sg.rate() * t_max).len() };
        let mut powers = Vec::with_capacity(len);
        powers.push(x.clone());
        for k in 1..len {
            let next = sg.phi().apply(&powers[k - 1])?;
            powers.push(next);
        }
        Ok(Self {
            rate: sg.rate(),
            powers,
        })
    }

    fn combine(&self, coeffs: &[C64]) -> AlgElement {
        let mut acc = AlgElement::zero(self.powers[0].algebra());
        for (c, p) in coeffs.iter().zip(&self.powers) {
            if *c != C64::new(0.0, 0.0) {
                acc.axpy(*c, p).expect("powers share the algebra");
            }
        }
        acc
    }

    /// `T_s(x)` for `s ≤ t_max`.
    pub fn semigroup_at(&self, s: f64) -> AlgElement {
        let w: Vec<C64> = poisson_weights(self.rate * s).into_iter().map(|p| C64::new(p, 0.0)).collect();
        self.combine(&w)
    }

    /// `∫_0^t e^{iθs} T_s(x) ds` for `t ≤ t_max`.
    pub fn integral(&self, theta: f64, t: f64) -> AlgElement {
        if t == 0.0 {
            return AlgElement::zero(self.powers[0].algebra());
        }
        let len = if self.rate == 0.0 { 1 } else { poisson_weights(self.rate * t).len() };
        self.combine(&gamma_coefficients(self.rate, theta, t, len.min(self.powers.len())))
    }
}

/// `A_t(x) = (1/t) ∫_0^t T_s(x) ds` by the augmented exponential.
pub fn continuous_average(sg: &MarkovSemigroup, x: &AlgElement, t: f64) -> Result<AlgElement> {
    VectorizedSemigroup::new(sg).average(x, t)
}

/// Exact evaluator choice for [`AverageRequest::evaluate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactMethod {
    AugmentedExponential,
    PoissonSeries,
}

/// Inputs of `B_t(x) = (1/t) ∫_0^t β(s) T_s(x) ds` over a list of times.
#[derive(Clone, Debug)]
pub struct AverageRequest {
    semigroup: MarkovSemigroup,
    weight: Option<BesicovitchWeight>,
    x: AlgElement,
    times: Vec<f64>,
    vectorized: VectorizedSemigroup,
}

impl AverageRequest {
    /// `weight = None` means `β ≡ 1`.
    pub fn new(semigroup: MarkovSemigroup, weight: Option<BesicovitchWeight>, x: AlgElement, times: Vec<f64>) -> Result<Self> {
        if !x.same_algebra_as(semigroup.algebra()) {
            return Err(Error::Structural("x and the semigroup live in different algebras".into()));
        }
        for (i, &t) in times.iter().enumerate() {
            check_time(t)?;
            if i > 0 && t <= times[i - 1] {
                return Err(Error::Precondition(format!("times must increase strictly, times[{i}] = {t}")));
            }
        }
        let vectorized = VectorizedSemigroup::new(&semigroup);
        Ok(Self {
            semigroup,
            weight,
            x,
            times,
            vectorized,
        })
    }

    pub fn semigroup(&self) -> &MarkovSemigroup {
        &self.semigroup
    }

    pub fn weight(&self) -> Option<&BesicovitchWeight> {
        self.weight.as_ref()
    }

    pub fn x(&self) -> &AlgElement {
        &self.x
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn vectorized(&self) -> &VectorizedSemigroup {
        &self.vectorized
    }

    /// `C` with `‖B_t‖ ≤ C` on `L¹` and `L∞`.
    pub fn bound(&self) -> f64 {
        self.weight.as_ref().map_or(1.0, |w| w.bound())
    }

    fn beta(&self, s: f64) -> C64 {
        self.weight.as_ref().map_or(C64::new(1.0, 0.0), |w| w.eval(s))
    }

    /// `B_t(x)` at every requested time.
    pub fn evaluate(&self, method: ExactMethod) -> Result<Vec<AlgElement>> {
        match method {
            ExactMethod::AugmentedExponential => self.times.iter().map(|&t| weighted_average(self, t)).collect(),
            ExactMethod::PoissonSeries => {
                let Some(&t_max) = self.times.last() else {
                    return Ok(Vec::new());
                };
                let series = PoissonSeries::new(&self.semigroup, &self.x, t_max)?;
                self.times.iter().map(|&t| self.series_average(&series, t)).collect()
            }
        }
    }

    /// `B_t(x)` from precomputed powers; `t` must not exceed the series horizon.
    pub fn series_average(&self, series: &PoissonSeries, t: f64) -> Result<AlgElement> {
        check_time(t)?;
        self.assemble(t, |theta, u| Ok(series.integral(theta, u)), |s| Ok(series.semigroup_at(s)))
    }

    /// `t B_t(x)`: exact trigonometric terms, exact bump, quadrature for decaying tails.
    fn assemble(
        &self,
        t: f64,
        integral: impl Fn(f64, f64) -> Result<AlgElement>,
        semigroup: impl Fn(f64) -> Result<AlgElement>,
    ) -> Result<AlgElement> {
        let alg = self.x.algebra();
        let mut acc = AlgElement::zero(alg);
        match &self.weight {
            None => acc = integral(0.0, t)?,
            Some(w) => {
                for term in w.poly().terms() {
                    acc.axpy(term.weight, &integral(term.theta, t)?)?;
                }
                match *w.perturbation() {
                    Perturbation::None => {}
                    Perturbation::Bump { height, start, end } => {
                        if start < t {
                            let hi = integral(0.0, end.min(t))?;
                            let lo = integral(0.0, start)?;
                            acc.axpy(C64::new(height, 0.0), &hi.sub(&lo)?)?;
                        }
                    }
                    g @ Perturbation::Decaying { .. } => {
                        let tol = 1e-12 * t * self.x.op_norm().max(f64::MIN_POSITIVE);
                        let panel = decay_panel(self.semigroup.rate());
                        let cfg = QuadratureConfig::new(tol, panel).with_breakpoints(g.breakpoints(t));
                        let mut failure = None;
                        let out = integrate(0.0, t, &cfg, |s| match semigroup(s) {
                            Ok(y) => y.scale_real(g.eval(s)).to_vector(),
                            Err(e) => {
                                failure.get_or_insert(e);
                                alloc::vec![C64::new(0.0, 0.0); alg.vector_dim()]
                            }
                        });
                        if let Some(e) = failure {
                            return Err(e);
                        }
                        acc.axpy(C64::new(1.0, 0.0), &AlgElement::from_vector(alg, &out.value)?)?;
                    }
                }
            }
        }
        let avg = acc.scale_real(1.0 / t);
        debug_assert!(
            avg.l1_norm() <= self.bound() * self.x.l1_norm() * (1.0 + CONTRACTION_SLACK) + 1e-12,
            "‖B_t(x)‖₁ exceeds C‖x‖₁"
        );
        Ok(avg)
    }
}

/// Initial panel for `g(s) T_s(x)`. The spectrum of `c(Φ - id)` lies in the
/// disc of radius `c` about `-c`, so over `2/c` the phase of `T_s` turns by at
/// most 2 radians; bisection covers the rest.
fn decay_panel(rate: f64) -> f64 {
    if rate > 0.0 {
        (2.0 / rate).min(8.0)
    } else {
        8.0
    }
}

/// `B_t(x) = (1/t) ∫_0^t β(s) T_s(x) ds` by the augmented exponential.
pub fn weighted_average(req: &AverageRequest, t: f64) -> Result<AlgElement> {
    check_time(t)?;
    let vs = &req.vectorized;
    let sg = &req.semigroup;
    req.assemble(t, |theta, u| vs.integral(&req.x, theta, u), |s| sg.semigroup_at(s, &req.x))
}

/// `B_t(x)` by adaptive Gauss–Legendre on `s ↦ β(s) T_s(x)` with the
/// semigroup evaluated at every node; `tol` bounds the error of the average
/// entrywise.
pub fn quadrature_weighted_average(req: &AverageRequest, t: f64, tol: f64) -> Result<AlgElement> {
    check_time(t)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let alg = req.x.algebra();
    let (theta_max, breaks) = match &req.weight {
        None => (0.0, Vec::new()),
        Some(w) => (w.poly().theta_max(), w.perturbation().breakpoints(t)),
    };
    let cfg = QuadratureConfig::new(tol * t, oscillation_panel(theta_max)).with_breakpoints(breaks);
    let mut failure = None;
    let out = integrate(0.0, t, &cfg, |s| match req.semigroup.semigroup_at(s, &req.x) {
        Ok(y) => y.scale(req.beta(s)).to_vector(),
        Err(e) => {
            failure.get_or_insert(e);
            alloc::vec![C64::new(0.0, 0.0); alg.vector_dim()]
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let avg = AlgElement::from_vector(alg, &out.value)?.scale_real(1.0 / t);
    if !out.converged {
        return Err(Error::QuadratureBudget {
            achieved: out.error_estimate / t,
            requested: tol,
            best: Some(alloc::boxed::Box::new(avg)),
        });
    }
    Ok(avg)
}
