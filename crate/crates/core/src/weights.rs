//! Besicovitch weights: trigonometric polynomials plus a perturbation from a
//! closed menu, with Cesàro-mean error estimators at infinity and at zero.
//!
//! `λ^t` for `λ = e^{iθ}` on the unit circle is read as `e^{iθt}` with
//! `θ ∈ (-π, π]`, the branch that is continuous in `t`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::linalg::C64;
use crate::quadrature::{integrate, oscillation_panel, QuadratureConfig};
use crate::{Error, Result};

/// Relative slack when checking the declared bound `C`.
const BOUND_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    pub weight: C64,
    /// Frequency in `(-π, π]`.
    pub theta: f64,
}

/// `p(t) = Σ_j w_j e^{iθ_j t}`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrigPolynomial {
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn new(terms: Vec<TrigTerm>) -> Result<Self> {
        for (j, t) in terms.iter().enumerate() {
            if !(t.theta > -PI && t.theta <= PI) {
                return Err(Error::Domain(format!(
                    "terms[{j}].theta = {} outside (-π, π]",
                    t.theta
                )));
            }
            if !(t.weight.re.is_finite() && t.weight.im.is_finite()) {
                return Err(Error::Domain(format!("terms[{j}].weight is not finite")));
            }
        }
        Ok(Self { terms })
    }

    /// The constant polynomial `c`.
    pub fn constant(c: C64) -> Self {
        Self {
            terms: alloc::vec![TrigTerm { weight: c, theta: 0.0 }],
        }
    }

    /// Builds a polynomial from weights and unit-circle points `λ_j`,
    /// taking `θ_j = arg λ_j`.
    pub fn from_unit_points(pairs: &[(C64, C64)]) -> Result<Self> {
        let mut terms = Vec::with_capacity(pairs.len());
        for (j, &(w, lam)) in pairs.iter().enumerate() {
            if (lam.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!("λ_{j} = {lam} is not on the unit circle")));
            }
            // arg lies in [-π, π]; fold -π onto π
            let mut theta = lam.arg();
            if theta <= -PI {
                theta = PI;
            }
            terms.push(TrigTerm { weight: w, theta });
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .map(|term| term.weight * C64::new(0.0, term.theta * t).exp())
            .sum()
    }

    /// `p(0) = Σ w_j`
    pub fn at_zero(&self) -> C64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// `Σ |w_j|`, an upper bound for `sup |p|`.
    pub fn abs_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.norm()).sum()
    }

    /// `Σ |w_j θ_j|`, an upper bound for `sup |p'|`.
    pub fn derivative_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.norm() * t.theta.abs()).sum()
    }

    pub fn theta_max(&self) -> f64 {
        self.terms.iter().map(|t| t.theta.abs()).fold(0.0, f64::max)
    }

    /// `self - other` as a polynomial.
    pub fn minus(&self, other: &TrigPolynomial) -> TrigPolynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| TrigTerm {
            weight: -t.weight,
            theta: t.theta,
        }));
        TrigPolynomial { terms }
    }
}

/// Sign of a decaying perturbation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignPattern {
    Positive,
    /// `+1` on `[2kP, (2k+1)P)`, `-1` on `[(2k+1)P, (2k+2)P)`.
    Alternating { period: f64 },
}

/// Perturbation added to the trigonometric part of a weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Perturbation {
    None,
    /// `h · 1_{[a, b)}`
    Bump { height: f64, start: f64, end: f64 },
    /// `σ(t) h / (1 + t)^γ`
    Decaying { height: f64, gamma: f64, sign: SignPattern },
}

impl Perturbation {
    fn validate(&self) -> Result<()> {
        match *self {
            Perturbation::None => Ok(()),
            Perturbation::Bump { height, start, end } => {
                if !(height.is_finite() && start >= 0.0 && end > start && end.is_finite()) {
                    return Err(Error::Domain(format!("bump needs finite h and 0 ≤ a < b, got h={height}, [{start}, {end}]")));
                }
                Ok(())
            }
            Perturbation::Decaying { height, gamma, sign } => {
                if !(height.is_finite() && gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Domain(format!("decaying perturbation needs finite h and γ > 0, got h={height}, γ={gamma}")));
                }
                if let SignPattern::Alternating { period } = sign {
                    if !(period > 0.0 && period.is_finite()) {
                        return Err(Error::Domain(format!("alternating period must be positive, got {period}")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Bump { height, start, end } => {
                if t >= start && t < end {
                    height
                } else {
                    0.0
                }
            }
            Perturbation::Decaying { height, gamma, sign } => {
                let s = match sign {
                    SignPattern::Positive => 1.0,
                    SignPattern::Alternating { period } => {
                        if ((t / period).floor() as i64) % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                s * height / (1.0 + t).powf(gamma)
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Bump { height, .. } | Perturbation::Decaying { height, .. } => height.abs(),
        }
    }

    /// Jump points inside `[0, t]`.
    pub fn breakpoints(&self, t: f64) -> Vec<f64> {
        match *self {
            Perturbation::None => Vec::new(),
            Perturbation::Bump { start, end, .. } => [start, end].into_iter().filter(|&p| p <= t).collect(),
            Perturbation::Decaying { sign, .. } => match sign {
                SignPattern::Positive => Vec::new(),
                SignPattern::Alternating { period } => {
                    let n = (t / period).floor() as usize;
                    (1..=n).map(|k| k as f64 * period).collect()
                }
            },
        }
    }

    /// `lim_{t→0} (1/t) ∫_0^t g`.
    pub fn density_at_zero(&self) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Bump { height, start, .. } => {
                if start == 0.0 {
                    height
                } else {
                    0.0
                }
            }
            Perturbation::Decaying { height, .. } => height,
        }
    }

    /// Support of the perturbation intersected with `[0, t]`, if bounded.
    pub fn support_within(&self, t: f64) -> Option<(f64, f64)> {
        match *self {
            Perturbation::None => None,
            Perturbation::Bump { start, end, .. } => (start < t).then(|| (start, end.min(t))),
            Perturbation::Decaying { .. } => Some((0.0, t)),
        }
    }
}

/// `β = p + g` with `sup |β| ≤ C`.
#[derive(Clone, Debug, PartialEq)]
pub struct BesicovitchWeight {
    poly: TrigPolynomial,
    perturbation: Perturbation,
    bound: f64,
}

impl BesicovitchWeight {
    /// Checks `Σ |w_j| + sup |g| ≤ C`, which certifies `sup |β| ≤ C`.
    pub fn new(poly: TrigPolynomial, perturbation: Perturbation, bound: f64) -> Result<Self> {
        perturbation.validate()?;
        let certified = poly.abs_bound() + perturbation.sup_abs();
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::Domain(format!("bound C must be positive and finite, got {bound}")));
        }
        if certified > bound * (1.0 + BOUND_TOL) {
            return Err(Error::Domain(format!(
                "Σ|w_j| + sup|g| = {certified} exceeds the declared bound C = {bound}"
            )));
        }
        Ok(Self {
            poly,
            perturbation,
            bound,
        })
    }

    /// `β ≡ 1` with `C = 1`.
    pub fn unit() -> Self {
        Self::new(TrigPolynomial::constant(C64::new(1.0, 0.0)), Perturbation::None, 1.0).expect("valid")
    }

    /// `β = p` with the smallest certified bound.
    pub fn from_poly(poly: TrigPolynomial) -> Self {
        let c = poly.abs_bound().max(f64::MIN_POSITIVE);
        Self::new(poly, Perturbation::None, c).expect("bound is certified")
    }

    pub fn poly(&self) -> &TrigPolynomial {
        &self.poly
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    /// Declared `C` with `sup |β| ≤ C`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.poly.eval(t) + self.perturbation.eval(t)
    }

    /// Panel width for oscillatory quadrature of anything carrying this weight.
    pub fn panel_width(&self) -> f64 {
        oscillation_panel(self.poly.theta_max())
    }
}

/// `(1/t) ∫_0^t |β(s) - p(s)| ds` by adaptive Gauss–Legendre, absolute error
/// target `1e-9 · t` on the integral.
pub fn cesaro_error(beta: &BesicovitchWeight, p: &TrigPolynomial, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("Cesàro error needs t > 0, got {t}")));
    }
    let diff = beta.poly().minus(p);
    let theta_max = diff.theta_max();
    let g = *beta.perturbation();
    let cfg = QuadratureConfig::new(1e-9 * t, oscillation_panel(theta_max)).with_breakpoints(g.breakpoints(t));
    let out = integrate(0.0, t, &cfg, |s| (diff.eval(s) + g.eval(s)).norm());
    if !out.converged {
        return Err(Error::QuadratureBudget {
            achieved: out.error_estimate,
            requested: 1e-9 * t,
            best: None,
        });
    }
    Ok(out.value / t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `t → ∞`, condition on long-run means.
    AtInfinity,
    /// `t → 0`, condition on short-run means.
    AtZero,
}

/// Cesàro errors over a grid, summarized by their maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct LimsupEstimate {
    pub side: Side,
    pub value: f64,
    pub argmax: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Minimum number of grid points for [`estimate_limsup`].
pub const MIN_GRID: usize = 16;

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo * (r * i as f64).exp() }).collect()
}

/// Maximum of the Cesàro error over a tail grid (`[T, 32T]` at infinity) or a
/// head grid (`[τ₀/32, τ₀]` at zero).
pub fn estimate_limsup(beta: &BesicovitchWeight, p: &TrigPolynomial, side: Side, grid: &[f64]) -> Result<LimsupEstimate> {
    if grid.len() < MIN_GRID {
        return Err(Error::Precondition(format!(
            "limsup grid needs at least {MIN_GRID} points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Precondition("limsup grid points must be positive and finite".into()));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for &t in grid {
        samples.push((t, cesaro_error(beta, p, t)?));
    }
    let (argmax, value) = samples
        .iter()
        .copied()
        .fold((grid[0], f64::NEG_INFINITY), |acc, s| if s.1 > acc.1 { s } else { acc });
    Ok(LimsupEstimate {
        side,
        value,
        argmax,
        samples,
    })
}

/// `lim_{t→0} (1/t) ∫_0^t β = p(0) + density of g at 0`.
///
/// This is the scalar `α` that the local averages `B_t(x)` approach as a
/// multiple of `x`.
pub fn mean_at_zero(beta: &BesicovitchWeight) -> C64 {
    beta.poly().at_zero() + beta.perturbation().density_at_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        let one = TrigPolynomial::constant(c(1.0));
        assert_eq!(one.eval(3.7), c(1.0));
        let p = TrigPolynomial::new(vec![TrigTerm { weight: c(2.0), theta: PI }]).unwrap();
        assert!((p.eval(1.0) - c(-2.0)).norm() < 1e-15);
        let q = TrigPolynomial::new(vec![TrigTerm { weight: c(1.0), theta: 0.4 }, TrigTerm { weight: c(3.0), theta: -1.1 }]).unwrap();
        assert_eq!(q.eval(0.0), c(4.0));
        assert!(TrigPolynomial::new(vec![TrigTerm { weight: c(1.0), theta: -PI }]).is_err());
    }

    #[test]
    fn unit_points_take_principal_argument() {
        let p = TrigPolynomial::from_unit_points(&[(c(1.0), c(-1.0)), (c(1.0), C64::new(0.0, 1.0))]).unwrap();
        assert_eq!(p.terms()[0].theta, PI);
        assert!((p.terms()[1].theta - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn bound_is_checked() {
        let p = TrigPolynomial::constant(c(1.5));
        assert!(BesicovitchWeight::new(p.clone(), Perturbation::Bump { height: 1.0, start: 0.0, end: 1.0 }, 2.0).is_err());
        assert!(BesicovitchWeight::new(p, Perturbation::Bump { height: 0.5, start: 0.0, end: 1.0 }, 2.0).is_ok());
    }

    #[test]
    fn cesaro_examples() {
        let p = TrigPolynomial::new(vec![TrigTerm { weight: c(0.5), theta: 1.0 }, TrigTerm { weight: C64::new(0.0, 0.5), theta: -2.0 }]).unwrap();
        let pure = BesicovitchWeight::from_poly(p.clone());
        assert!(cesaro_error(&pure, &p, 10.0).unwrap() <= 1e-9);
        let bumped = BesicovitchWeight::new(p.clone(), Perturbation::Bump { height: 1.0, start: 0.0, end: 1.0 }, 2.0).unwrap();
        assert!((cesaro_error(&bumped, &p, 10.0).unwrap() - 0.1).abs() < 1e-9);
        assert!((cesaro_error(&bumped, &p, 0.01).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn limsup_examples() {
        let p = TrigPolynomial::constant(c(0.5));
        let pure = BesicovitchWeight::from_poly(p.clone());
        let grid = geometric_grid(100.0, 3200.0, 16);
        assert!(estimate_limsup(&pure, &p, Side::AtInfinity, &grid).unwrap().value <= 1e-9);
        let early = BesicovitchWeight::new(p.clone(), Perturbation::Bump { height: 1.0, start: 0.0, end: 1.0 }, 2.0).unwrap();
        let est = estimate_limsup(&early, &p, Side::AtInfinity, &grid).unwrap();
        assert!(est.value <= 0.01 + 1e-9);
        assert_eq!(est.argmax, 100.0);
        let late = BesicovitchWeight::new(p.clone(), Perturbation::Bump { height: 1.0, start: 2.0, end: 3.0 }, 2.0).unwrap();
        let head = geometric_grid(1.0 / 32.0, 1.0, 16);
        assert!(estimate_limsup(&late, &p, Side::AtZero, &head).unwrap().value <= 1e-12);
        assert!(estimate_limsup(&late, &p, Side::AtZero, &head[..8]).is_err());
    }

    #[test]
    fn mean_at_zero_examples() {
        let p = TrigPolynomial::new(vec![TrigTerm { weight: c(0.25), theta: 1.0 }, TrigTerm { weight: C64::new(0.5, 0.5), theta: 0.3 }]).unwrap();
        assert_eq!(mean_at_zero(&BesicovitchWeight::from_poly(p.clone())), p.at_zero());
        let b = BesicovitchWeight::new(p.clone(), Perturbation::Bump { height: 1.0, start: 2.0, end: 3.0 }, 3.0).unwrap();
        assert_eq!(mean_at_zero(&b), p.at_zero());
        let zero = BesicovitchWeight::new(TrigPolynomial::default(), Perturbation::None, 1.0).unwrap();
        assert_eq!(mean_at_zero(&zero), c(0.0));
    }
}
