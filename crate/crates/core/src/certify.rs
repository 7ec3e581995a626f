//! Constructive certificates for maximal inequalities and almost-uniform
//! convergence.
//!
//! A certificate is a projection `e` together with the family it controls:
//! `τ(e⊥)` stays within a trace budget while every member satisfies
//! `‖e y e‖∞ ≤ λ` (two-sided) or `‖y e‖∞ ≤ λ` (one-sided). Projections are
//! found by greedy spectral shaving; "for all `t > 0`" is sampled on a finite
//! grid that is stored with the certificate.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::algebra::{AlgElement, Interval, Projection};
use crate::averaging::{discrete_averages, weighted_average, AverageRequest, ExactMethod};
use crate::dynamics::{DsMap, MarkovSemigroup};
use crate::linalg::{hermitian_eigen, CMatrix, C64};
use crate::rearrangement::{mu, submajorization_gap};
use crate::weights::{geometric_grid, mean_at_zero, BesicovitchWeight};
use crate::{Error, Result};

/// Cap on shaving steps.
pub const MAX_SHAVES: usize = 10_000;

/// Relative slack on `λ` before a member counts as violating.
pub const SHAVE_REL_TOL: f64 = 1e-12;

/// Rounding allowance, relative to the member's own norm.
const SHAVE_ABS_TOL: f64 = 1e-13;

/// Relative slack on the certified threshold for theorem-backed checks.
pub const THEOREM_REL_TOL: f64 = 1e-9;

/// Bisection steps on the threshold in [`au_cauchy_certify`].
pub const BISECTION_STEPS: usize = 40;

/// Which compression the bound controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// `‖y e‖∞`
    OneSided,
    /// `‖e y e‖∞`
    TwoSided,
}

/// Compressed norm of one family member; `label` is its time or index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub label: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AUCertificate {
    pub projection: Projection,
    pub eps_budget: f64,
    pub achieved_tau_perp: f64,
    pub bound_kind: BoundKind,
    pub threshold: f64,
    /// Maximum of the witness values.
    pub achieved_sup: f64,
    pub witnesses: Vec<Witness>,
    pub shaves: usize,
}

impl AUCertificate {
    /// `budget - τ(e⊥)`
    pub fn trace_margin(&self) -> f64 {
        self.eps_budget - self.achieved_tau_perp
    }

    /// `threshold - sup`
    pub fn sup_margin(&self) -> f64 {
        self.threshold - self.achieved_sup
    }
}

/// `‖e y e‖∞` or `‖y e‖∞`.
pub fn compressed_norm(y: &AlgElement, e: &Projection, kind: BoundKind) -> Result<f64> {
    Ok(match kind {
        BoundKind::TwoSided => y.compress(e)?.op_norm(),
        BoundKind::OneSided => y.right_compress(e)?.op_norm(),
    })
}

/// Witness values of `e` against a labelled family.
pub fn measure(family: &[(f64, AlgElement)], e: &Projection, kind: BoundKind) -> Result<Vec<Witness>> {
    family
        .iter()
        .map(|(label, y)| {
            Ok(Witness {
                label: *label,
                value: compressed_norm(y, e, kind)?,
            })
        })
        .collect()
}

fn sup_of(witnesses: &[Witness]) -> f64 {
    witnesses.iter().map(|w| w.value).fold(0.0, f64::max)
}

/// Removes from `e` the spectral part on which `y` exceeds `λ`.
///
/// Two-sided Hermitian members cut `|spec(e y e)| > λ`; every other member
/// cuts `spec(z* z) > λ²` with `z = e y e` or `z = y e`. Either cut commutes
/// with the compressed operator, so the member satisfies the bound afterwards.
fn shave_once(y: &AlgElement, e: &Projection, lambda: f64, kind: BoundKind) -> Result<Projection> {
    let z = match kind {
        BoundKind::TwoSided => y.compress(e)?,
        BoundKind::OneSided => y.right_compress(e)?,
    };
    let hermitian = kind == BoundKind::TwoSided && y.hermitian_defect() <= 1e-14 * y.op_norm().max(f64::MIN_POSITIVE);
    let blocks: Vec<CMatrix> = z
        .blocks()
        .iter()
        .zip(e.as_element().blocks())
        .map(|(zb, eb)| {
            let cut = if hermitian {
                hermitian_eigen(zb).projection(|v| v.abs() > lambda)
            } else {
                hermitian_eigen(&(&zb.adjoint() * zb)).projection(|v| v > lambda * lambda)
            };
            // re-project e - P to absorb rounding
            hermitian_eigen(&(eb - &cut)).projection(|v| v > 0.5)
        })
        .collect();
    Ok(Projection::from_spectral(AlgElement::new(e.algebra(), blocks)?))
}

fn violates(value: f64, lambda: f64, scale: f64) -> bool {
    value > lambda * (1.0 + SHAVE_REL_TOL) + SHAVE_ABS_TOL * scale
}

/// Greedy spectral shaving from `e = 1` until every member of `family`
/// satisfies its bound at `λ` or `τ(e⊥)` exceeds `budget`.
///
/// Shaving only shrinks `e` and a smaller `e` never raises a compressed norm,
/// so each member is shaved at most once up to rounding.
pub fn shave_projection(family: &[(f64, AlgElement)], lambda: f64, budget: f64, kind: BoundKind) -> Result<AUCertificate> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("threshold must be positive, got {lambda}")));
    }
    let Some((_, first)) = family.first() else {
        return Err(Error::Precondition("empty family".into()));
    };
    let alg = first.algebra().clone();
    for (i, (_, y)) in family.iter().enumerate() {
        if !y.same_algebra(first) {
            return Err(Error::Structural(format!("family member {i} lives in another algebra")));
        }
    }
    let scales: Vec<f64> = family.iter().map(|(_, y)| y.op_norm()).collect();
    let mut e = Projection::one(&alg);
    let mut shaves = 0usize;
    let finish = |e: Projection, shaves: usize| -> Result<AUCertificate> {
        let witnesses = measure(family, &e, kind)?;
        Ok(AUCertificate {
            achieved_tau_perp: e.tau_perp(),
            achieved_sup: sup_of(&witnesses),
            projection: e,
            eps_budget: budget,
            bound_kind: kind,
            threshold: lambda,
            witnesses,
            shaves,
        })
    };
    loop {
        let mut clean = true;
        for ((_, y), &scale) in family.iter().zip(&scales) {
            // members below λ stay below it for every subprojection
            if !violates(scale, lambda, scale) {
                continue;
            }
            let value = compressed_norm(y, &e, kind)?;
            if !violates(value, lambda, scale) {
                continue;
            }
            clean = false;
            e = shave_once(y, &e, lambda, kind)?;
            shaves += 1;
            let tau_perp = e.tau_perp();
            if tau_perp > budget || shaves >= MAX_SHAVES {
                let best = finish(e, shaves)?;
                return Err(Error::Exhausted {
                    tau_perp,
                    budget,
                    iterations: shaves,
                    best: Box::new(best),
                });
            }
        }
        if clean {
            return finish(e, shaves);
        }
    }
}

/// Outcome of recomputing a certificate from its projection and family.
#[derive(Clone, Debug, PartialEq)]
pub struct Revalidation {
    pub is_projection: bool,
    pub tau_perp: f64,
    pub sup: f64,
    pub within_budget: bool,
    pub within_threshold: bool,
    /// Recomputed witnesses equal the stored ones bit for bit.
    pub witnesses_match: bool,
    pub pass: bool,
}

/// Recomputes `τ(e⊥)` and every compressed norm from scratch.
pub fn revalidate(cert: &AUCertificate, family: &[(f64, AlgElement)]) -> Result<Revalidation> {
    let is_projection = Projection::new(cert.projection.as_element().clone()).is_ok();
    let tau_perp = cert.projection.tau_perp();
    let witnesses = measure(family, &cert.projection, cert.bound_kind)?;
    let sup = sup_of(&witnesses);
    let witnesses_match = witnesses.len() == cert.witnesses.len()
        && witnesses
            .iter()
            .zip(&cert.witnesses)
            .all(|(a, b)| a.label.to_bits() == b.label.to_bits() && a.value.to_bits() == b.value.to_bits())
        && tau_perp.to_bits() == cert.achieved_tau_perp.to_bits()
        && sup.to_bits() == cert.achieved_sup.to_bits();
    let within_budget = tau_perp <= cert.eps_budget;
    let within_threshold = sup <= cert.threshold * (1.0 + THEOREM_REL_TOL);
    Ok(Revalidation {
        is_projection,
        tau_perp,
        sup,
        within_budget,
        within_threshold,
        witnesses_match,
        pass: is_projection && within_budget && within_threshold && witnesses_match,
    })
}

/// Geometric grid with `per_decade` points per decade from `lo` to `hi`.
pub fn decade_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let n = ((hi / lo).log10() * per_decade as f64).round() as usize + 1;
    geometric_grid(lo, hi, n.max(2))
}

/// The default sampling of `t > 0`: 64 points per decade over `[1e-4, 1e4]`.
pub fn default_time_grid() -> Vec<f64> {
    decade_grid(1e-4, 1e4, 64)
}

fn require_psd(x: &AlgElement) -> Result<()> {
    let tol = 1e-10 * x.op_norm().max(1.0);
    if x.hermitian_defect() > tol || x.min_eigenvalue() < -tol {
        return Err(Error::Domain("maximal inequality needs a positive x".into()));
    }
    Ok(())
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn require_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Precondition("time grid must be nonempty with positive finite points".into()));
    }
    Ok(())
}

/// `τ(e⊥) ≤ ‖x‖₁/λ` and `sup_{n ≤ N} ‖e A_n(x) e‖∞ ≤ λ` for positive `x`.
pub fn check_yeadon(phi: &DsMap, x: &AlgElement, lambda: f64, n_max: usize) -> Result<AUCertificate> {
    require_psd(x)?;
    require_positive("λ", lambda)?;
    if n_max == 0 {
        return Err(Error::Precondition("N_max must be at least 1".into()));
    }
    let family: Vec<(f64, AlgElement)> = discrete_averages(phi, x, n_max)?
        .into_iter()
        .enumerate()
        .map(|(k, a)| ((k + 1) as f64, a))
        .collect();
    shave_projection(&family, lambda, x.l1_norm() / lambda, BoundKind::TwoSided)
}

/// `{A_t(x) : t ∈ grid}` by the Poisson series.
pub fn continuous_family(sg: &MarkovSemigroup, x: &AlgElement, t_grid: &[f64]) -> Result<Vec<(f64, AlgElement)>> {
    weighted_family(sg, None, x, t_grid)
}

/// `{B_t(x) : t ∈ grid}` by the Poisson series.
pub fn weighted_family(
    sg: &MarkovSemigroup,
    beta: Option<&BesicovitchWeight>,
    x: &AlgElement,
    t_grid: &[f64],
) -> Result<Vec<(f64, AlgElement)>> {
    require_grid(t_grid)?;
    let mut times = t_grid.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let req = AverageRequest::new(sg.clone(), beta.cloned(), x.clone(), times)?;
    let avgs = req.evaluate(ExactMethod::PoissonSeries)?;
    Ok(req.times().iter().copied().zip(avgs).collect())
}

/// `τ(e⊥) ≤ 2‖x‖₁/λ` and `sup_{t ∈ grid} ‖e A_t(x) e‖∞ ≤ λ` for positive `x`.
pub fn check_continuous_maximal(sg: &MarkovSemigroup, x: &AlgElement, lambda: f64, t_grid: &[f64]) -> Result<AUCertificate> {
    require_psd(x)?;
    require_positive("λ", lambda)?;
    let family = continuous_family(sg, x, t_grid)?;
    shave_projection(&family, lambda, 2.0 * x.l1_norm() / lambda, BoundKind::TwoSided)
}

/// `τ(e⊥) ≤ 4‖x‖₁/ε` and `sup_{t ∈ grid} ‖e B_t(x) e‖∞ ≤ 48 C ε`.
pub fn check_weighted_maximal(
    sg: &MarkovSemigroup,
    beta: &BesicovitchWeight,
    x: &AlgElement,
    eps: f64,
    t_grid: &[f64],
) -> Result<AUCertificate> {
    require_positive("ε", eps)?;
    let family = weighted_family(sg, Some(beta), x, t_grid)?;
    shave_projection(&family, 48.0 * beta.bound() * eps, 4.0 * x.l1_norm() / eps, BoundKind::TwoSided)
}

/// Smallest threshold (to `steps` bisection steps) that greedy shaving
/// certifies within `budget`, searched over `(0, sup ‖y‖∞]`.
pub fn minimal_threshold(family: &[(f64, AlgElement)], budget: f64, kind: BoundKind, steps: usize) -> Result<AUCertificate> {
    let top = family.iter().map(|(_, y)| y.op_norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return shave_projection(family, 1.0, budget, kind).map(|mut c| {
            c.threshold = 0.0;
            c
        });
    }
    let mut best = shave_projection(family, top, budget, kind)?;
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        match shave_projection(family, mid, budget, kind) {
            Ok(c) => {
                hi = mid;
                best = c;
            }
            Err(Error::Exhausted { .. }) => lo = mid,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub certificate: AUCertificate,
    pub t0: f64,
    /// `sup_{t, t' ≥ t0} ‖(x_t - x_{t'}) e‖∞` over the sampled pairs.
    pub cauchy_sup: f64,
    pub limit_estimate: Option<AlgElement>,
    pub alpha_estimate: Option<C64>,
}

/// Differences `x_{t'} - x_t` for sampled `t0 ≤ t < t'`, labelled by `t`.
pub fn cauchy_pairs(net: &[(f64, AlgElement)], t0: f64) -> Result<Vec<(f64, AlgElement)>> {
    let tail: Vec<&(f64, AlgElement)> = net.iter().filter(|(t, _)| *t >= t0).collect();
    let mut pairs = Vec::new();
    for (i, (ti, xi)) in tail.iter().enumerate() {
        for (_, xj) in &tail[i + 1..] {
            pairs.push((*ti, xj.sub(xi)?));
        }
    }
    Ok(pairs)
}

/// One-sided a.u. Cauchy certificate for a net sampled at increasing times.
///
/// The threshold is bisected over `(0, max pairwise norm]` down to the
/// smallest value greedy shaving certifies with `τ(e⊥) ≤ ε`.
pub fn au_cauchy_certify(net: &[(f64, AlgElement)], eps: f64, t0: f64) -> Result<ConvergenceReport> {
    require_positive("ε", eps)?;
    require_positive("t0", t0)?;
    if net.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Precondition("net times must increase strictly".into()));
    }
    let Some((t_last, last)) = net.last() else {
        return Err(Error::Precondition("empty net".into()));
    };
    if *t_last < 16.0 * t0 {
        return Err(Error::Precondition(format!(
            "net reaches t = {t_last}, needs at least 16·t0 = {}",
            16.0 * t0
        )));
    }
    let pairs = cauchy_pairs(net, t0)?;
    let certificate = if pairs.is_empty() {
        let e = Projection::one(last.algebra());
        AUCertificate {
            achieved_tau_perp: e.tau_perp(),
            projection: e,
            eps_budget: eps,
            bound_kind: BoundKind::OneSided,
            threshold: 0.0,
            achieved_sup: 0.0,
            witnesses: Vec::new(),
            shaves: 0,
        }
    } else {
        minimal_threshold(&pairs, eps, BoundKind::OneSided, BISECTION_STEPS)?
    };
    Ok(ConvergenceReport {
        cauchy_sup: certificate.achieved_sup,
        certificate,
        t0,
        limit_estimate: Some(last.clone()),
        alpha_estimate: None,
    })
}

/// Limit identification as `t → 0` along a descending head grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalReport {
    pub report: ConvergenceReport,
    /// `(t, α̂(t))` along the grid.
    pub alphas: Vec<(f64, C64)>,
    /// `(t, ‖B_t(x) - α̂ x‖∞)` with `α̂` taken at the smallest `t`.
    pub residuals: Vec<(f64, f64)>,
    /// `mean_at_zero(β)`.
    pub predicted_alpha: C64,
}

impl LocalReport {
    /// Residuals never grow along the grid by more than the factor `slack`.
    pub fn residuals_decrease(&self, slack: f64) -> bool {
        self.residuals.windows(2).all(|w| w[1].1 <= w[0].1 * slack)
    }
}

/// `B_t(x)` by the augmented exponential at each point of a head grid.
pub fn head_averages(
    sg: &MarkovSemigroup,
    beta: Option<&BesicovitchWeight>,
    x: &AlgElement,
    t_head_grid: &[f64],
) -> Result<Vec<(f64, AlgElement)>> {
    let mut times = t_head_grid.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let req = AverageRequest::new(sg.clone(), beta.cloned(), x.clone(), times)?;
    t_head_grid.iter().map(|&t| Ok((t, weighted_average(&req, t)?))).collect()
}

/// `B_t(x) - α x` for each sampled average.
pub fn residual_family(avgs: &[(f64, AlgElement)], x: &AlgElement, alpha: C64) -> Result<Vec<(f64, AlgElement)>> {
    let ax = x.scale(alpha);
    avgs.iter().map(|(t, b)| Ok((*t, b.sub(&ax)?))).collect()
}

/// `α̂ = ⟨x, B_t x⟩_τ / ⟨x, x⟩_τ` at the smallest grid point, and residuals
/// `‖B_t(x) - α̂ x‖∞` along the grid.
pub fn local_limit_identify(
    sg: &MarkovSemigroup,
    beta: Option<&BesicovitchWeight>,
    x: &AlgElement,
    t_head_grid: &[f64],
) -> Result<LocalReport> {
    require_grid(t_head_grid)?;
    if t_head_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("head grid must decrease strictly".into()));
    }
    let norm2 = x.inner(x)?.re;
    if norm2 == 0.0 {
        return Err(Error::Domain("α(x) is undefined for x = 0".into()));
    }
    let avgs = head_averages(sg, beta, x, t_head_grid)?;
    let mut alphas = Vec::with_capacity(avgs.len());
    for (t, b) in &avgs {
        alphas.push((*t, x.inner(b)? / norm2));
    }
    let alpha = alphas.last().expect("nonempty grid").1;
    let family = residual_family(&avgs, x, alpha)?;
    let residuals = family.iter().map(|(t, r)| (*t, r.op_norm())).collect();
    let e = Projection::one(x.algebra());
    let witnesses = measure(&family, &e, BoundKind::OneSided)?;
    let sup = sup_of(&witnesses);
    let certificate = AUCertificate {
        achieved_tau_perp: e.tau_perp(),
        projection: e,
        eps_budget: 0.0,
        bound_kind: BoundKind::OneSided,
        threshold: sup,
        achieved_sup: sup,
        witnesses,
        shaves: 0,
    };
    let t0 = *t_head_grid.last().expect("nonempty grid");
    Ok(LocalReport {
        report: ConvergenceReport {
            certificate,
            t0,
            cauchy_sup: sup,
            limit_estimate: Some(x.scale(alpha)),
            alpha_estimate: Some(alpha),
        },
        alphas,
        residuals,
        predicted_alpha: beta.map_or(C64::new(1.0, 0.0), mean_at_zero),
    })
}

/// Limit `x̂` satisfies `μ(x̂) ≺≺ μ(C x)`; returns the submajorization gap,
/// which is `≤ 0` exactly when the relation holds.
pub fn limit_submajorization_gap(limit: &AlgElement, x: &AlgElement, c: f64) -> f64 {
    submajorization_gap(&mu(limit), &mu(&x.scale_real(c)))
}

/// Equicontinuity at zero: constants, the chosen input and its certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct BuemReport {
    /// `‖x‖₁ < γ` suffices.
    pub gamma: f64,
    /// `λ' = δ / (48 C)`.
    pub lambda_prime: f64,
    /// First index with `‖x_m‖₁ < γ`.
    pub m0: usize,
    pub certificate: AUCertificate,
}

/// From the weighted maximal inequality with `λ' = δ / (48 C)`:
/// `‖x‖₁ < γ = ε λ' / 4` gives `τ(e⊥) ≤ 4‖x‖₁/λ' < ε` and
/// `sup_t ‖e B_t(x) e‖∞ ≤ δ`. Certifies this for the first `x_m` below `γ`.
pub fn check_buem(
    sg: &MarkovSemigroup,
    beta: Option<&BesicovitchWeight>,
    t_grid: &[f64],
    eps: f64,
    delta: f64,
    shrinking_xs: &[AlgElement],
) -> Result<BuemReport> {
    require_positive("ε", eps)?;
    require_positive("δ", delta)?;
    let c = beta.map_or(1.0, BesicovitchWeight::bound);
    let lambda_prime = delta / (48.0 * c);
    let gamma = eps * lambda_prime / 4.0;
    let m0 = shrinking_xs
        .iter()
        .position(|x| x.l1_norm() < gamma)
        .ok_or_else(|| Error::Precondition(format!("no x_m with ‖x_m‖₁ < γ = {gamma:.6e}")))?;
    let x = &shrinking_xs[m0];
    let family = weighted_family(sg, beta, x, t_grid)?;
    let budget = (4.0 * x.l1_norm() / lambda_prime).min(eps);
    let certificate = shave_projection(&family, delta, budget, BoundKind::TwoSided)?;
    Ok(BuemReport {
        gamma,
        lambda_prime,
        m0,
        certificate,
    })
}

/// Spectral cut of a Hermitian element: `1_{[-λ, λ]}(y)`.
pub fn spectral_cut(y: &AlgElement, lambda: f64) -> Result<Projection> {
    y.real_part().spectral_projection(Interval::symmetric(lambda))
}
