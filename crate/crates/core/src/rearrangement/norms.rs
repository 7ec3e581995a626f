//! Norms of fully symmetric spaces evaluated on step functions.
//!
//! Every norm is a closed-form expression in the steps of `μ(x)` except the
//! Luxemburg norm, which needs a one-dimensional root search.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::singular::{mu, SingularFunction};
use crate::algebra::{AlgElement, TraceAlgebra};
use crate::{Error, Result};

/// Convexity / concavity slack allowed when validating tables.
const TABLE_TOL: f64 = 1e-12;

/// Continuous piecewise-linear function through `(0, 0)` and the given knots,
/// extended beyond the last knot with the last slope.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    fn new(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.first() != Some(&(0.0, 0.0)) {
            knots.insert(0, (0.0, 0.0));
        }
        if knots.len() < 2 {
            return Err(Error::Domain("table needs at least one knot beyond the origin".into()));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() || !w[1].1.is_finite() {
                return Err(Error::Domain(format!("table abscissae must increase: {:?} -> {:?}", w[0], w[1])));
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let idx = k.partition_point(|&(kx, _)| kx <= x);
        let (a, b) = if idx == 0 {
            (k[0], k[1])
        } else if idx >= k.len() {
            (k[k.len() - 2], k[k.len() - 1])
        } else {
            (k[idx - 1], k[idx])
        };
        a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0)
    }

    fn first_slope(&self) -> f64 {
        self.slopes()[0]
    }

    fn last_slope(&self) -> f64 {
        *self.slopes().last().expect("at least one segment")
    }
}

/// Young function `Φ` of an Orlicz space.
#[derive(Clone, Debug, PartialEq)]
pub enum OrliczFunction {
    /// `u^p`, `p ≥ 1`
    Power(f64),
    /// `e^u - 1`
    ExpMinusOne,
    /// Convex nondecreasing table.
    Table(PiecewiseLinear),
}

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!("Orlicz power needs 1 ≤ p < ∞, got {p}")));
        }
        Ok(Self::Power(p))
    }

    /// Validates convexity, monotonicity and unboundedness of the table.
    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        let t = PiecewiseLinear::new(knots)?;
        let slopes = t.slopes();
        if slopes[0] < 0.0 {
            return Err(Error::Domain("Orlicz table must be nondecreasing".into()));
        }
        for w in slopes.windows(2) {
            if w[1] < w[0] - TABLE_TOL * w[0].abs().max(1.0) {
                return Err(Error::Domain(format!("Orlicz table is not convex: slope {} after {}", w[1], w[0])));
            }
        }
        if t.last_slope() <= 0.0 {
            return Err(Error::Domain("Orlicz table must be unbounded".into()));
        }
        Ok(Self::Table(t))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Power(p) => u.powf(*p),
            Self::ExpMinusOne => u.exp_m1(),
            Self::Table(t) => t.eval(u),
        }
    }

    /// `Φ(u) > 0` for every `u > 0`.
    pub fn positive_off_zero(&self) -> bool {
        match self {
            Self::Power(_) | Self::ExpMinusOne => true,
            Self::Table(t) => t.first_slope() > 0.0,
        }
    }
}

/// Concave increasing weight `ψ` of a Lorentz or Marcinkiewicz space.
#[derive(Clone, Debug, PartialEq)]
pub enum ConcaveWeight {
    /// `t^γ`, `0 < γ ≤ 1`
    Power(f64),
    /// `log(1 + t)`
    Log1p,
    /// Concave nondecreasing table with positive initial slope.
    Table(PiecewiseLinear),
}

impl ConcaveWeight {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Domain(format!("concave power needs 0 < γ ≤ 1, got {gamma}")));
        }
        Ok(Self::Power(gamma))
    }

    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        let t = PiecewiseLinear::new(knots)?;
        let slopes = t.slopes();
        if slopes[0] <= 0.0 {
            return Err(Error::Domain("concave table needs ψ(t) > 0 for t > 0".into()));
        }
        for w in slopes.windows(2) {
            if w[1] > w[0] + TABLE_TOL * w[0].abs().max(1.0) {
                return Err(Error::Domain(format!("concave table is not concave: slope {} after {}", w[1], w[0])));
            }
        }
        if t.last_slope() < 0.0 {
            return Err(Error::Domain("concave table must be nondecreasing".into()));
        }
        Ok(Self::Table(t))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Power(g) => t.powf(*g),
            Self::Log1p => t.ln_1p(),
            Self::Table(tab) => tab.eval(t),
        }
    }

    /// `ψ(∞) = ∞`
    pub fn unbounded(&self) -> bool {
        match self {
            Self::Power(_) | Self::Log1p => true,
            Self::Table(t) => t.last_slope() > 0.0,
        }
    }

    /// `ψ(t)/t → 0` as `t → ∞`
    pub fn sublinear(&self) -> bool {
        match self {
            Self::Power(g) => *g < 1.0,
            Self::Log1p => true,
            Self::Table(t) => t.last_slope() == 0.0,
        }
    }
}

/// A fully symmetric function space, evaluated through `μ(x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum SymmetricSpace {
    /// `L^p`, `1 ≤ p ≤ ∞`
    Lp(f64),
    /// `L¹ ∩ L^∞` with norm `max(‖·‖₁, ‖·‖∞)`
    L1CapLinf,
    /// `L¹ + L^∞` with norm `∫_0^1 μ`
    L1PlusLinf,
    Orlicz(OrliczFunction),
    Lorentz(ConcaveWeight),
    Marcinkiewicz(ConcaveWeight),
}

impl SymmetricSpace {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("L^p needs p ≥ 1, got {p}")));
        }
        Ok(Self::Lp(p))
    }

    pub fn name(&self) -> alloc::string::String {
        match self {
            Self::Lp(p) if p.is_infinite() => "Linf".into(),
            Self::Lp(p) => format!("L{p}"),
            Self::L1CapLinf => "L1capLinf".into(),
            Self::L1PlusLinf => "L1plusLinf".into(),
            Self::Orlicz(OrliczFunction::Power(p)) => format!("Orlicz(u^{p})"),
            Self::Orlicz(OrliczFunction::ExpMinusOne) => "Orlicz(e^u-1)".into(),
            Self::Orlicz(OrliczFunction::Table(_)) => "Orlicz(table)".into(),
            Self::Lorentz(w) => format!("Lorentz({})", weight_name(w)),
            Self::Marcinkiewicz(w) => format!("Marcinkiewicz({})", weight_name(w)),
        }
    }

    /// Whether the function-space version on `(0, ∞)` excludes the constant `1`.
    ///
    /// This is an asymptotic property and cannot be observed on a finite trace;
    /// it records which hypothesis a configuration stands in for.
    pub fn excludes_unit(&self) -> bool {
        match self {
            Self::Lp(p) => p.is_finite(),
            Self::L1CapLinf => true,
            Self::L1PlusLinf => false,
            Self::Orlicz(phi) => phi.positive_off_zero(),
            Self::Lorentz(psi) => psi.unbounded(),
            Self::Marcinkiewicz(psi) => psi.sublinear(),
        }
    }
}

fn weight_name(w: &ConcaveWeight) -> alloc::string::String {
    match w {
        ConcaveWeight::Power(g) => format!("t^{g}"),
        ConcaveWeight::Log1p => "log(1+t)".into(),
        ConcaveWeight::Table(_) => "table".into(),
    }
}

/// Membership of the unit in a symmetric space over a given algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitMembership {
    /// `1 ∈ E(M, τ)` for the finite model; always true since `τ(1) < ∞`.
    pub in_finite_model: bool,
    /// The modelled function space on `(0, ∞)` excludes `1`.
    pub models_unit_excluded: bool,
}

pub fn one_in_space(space: &SymmetricSpace, algebra: &TraceAlgebra) -> UnitMembership {
    UnitMembership {
        in_finite_model: algebra.total_trace().is_finite(),
        models_unit_excluded: space.excludes_unit(),
    }
}

/// `‖x‖_{E(M)} = ‖μ(x)‖_E`
pub fn sym_norm(x: &AlgElement, space: &SymmetricSpace) -> Result<f64> {
    step_norm(&mu(x), space)
}

/// The norm of `space` evaluated on a step function.
pub fn step_norm(f: &SingularFunction, space: &SymmetricSpace) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    Ok(match space {
        SymmetricSpace::Lp(p) if p.is_infinite() => f.sup(),
        SymmetricSpace::Lp(p) if *p == 1.0 => f.integral(),
        SymmetricSpace::Lp(p) => lp_norm(f, *p),
        SymmetricSpace::L1CapLinf => f.integral().max(f.sup()),
        SymmetricSpace::L1PlusLinf => f.integral_to(1.0),
        SymmetricSpace::Orlicz(phi) => luxemburg_norm(f, phi)?,
        SymmetricSpace::Lorentz(psi) => lorentz_norm(f, psi),
        SymmetricSpace::Marcinkiewicz(psi) => marcinkiewicz_norm(f, psi),
    })
}

fn lp_norm(f: &SingularFunction, p: f64) -> f64 {
    // factor out the sup to avoid overflow for large p
    let m = f.sup();
    let s: f64 = f.steps().iter().map(|st| (st.value / m).powf(p) * st.width).sum();
    m * s.powf(1.0 / p)
}

/// `∫ Φ(μ_t / a) dt`
pub fn orlicz_modular(f: &SingularFunction, phi: &OrliczFunction, a: f64) -> f64 {
    f.steps().iter().map(|s| phi.eval(s.value / a) * s.width).sum()
}

/// Luxemburg norm `inf{a > 0 : ∫Φ(μ/a) ≤ 1}` by bisection on the monotone modular.
pub fn luxemburg_norm(f: &SingularFunction, phi: &OrliczFunction) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    let modular = |a: f64| orlicz_modular(f, phi, a);
    let mut hi = f.integral() + f.sup();
    let mut lo = hi;
    let mut grow = 0;
    while modular(hi) > 1.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return Err(Error::Bracket(format!(
                "Luxemburg modular stays above 1 up to a = {hi:.3e}"
            )));
        }
    }
    let mut shrink = 0;
    while modular(lo) <= 1.0 {
        lo *= 0.5;
        shrink += 1;
        if shrink > 2000 || lo == 0.0 {
            return Err(Error::Bracket(format!(
                "Luxemburg modular stays below 1 down to a = {lo:.3e}"
            )));
        }
    }
    if lo > hi {
        lo = hi * 0.5;
    }
    // invariant: modular(lo) > 1 ≥ modular(hi)
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

/// `∫ μ dψ = Σ_i v_i (ψ(t_{i+1}) - ψ(t_i))`, exact at the step boundaries.
pub fn lorentz_norm(f: &SingularFunction, psi: &ConcaveWeight) -> f64 {
    f.rows().map(|(a, b, v)| v * (psi.eval(b) - psi.eval(a))).sum()
}

/// `sup_{s>0} ψ(s)⁻¹ ∫_0^s μ`.
///
/// On each step the objective is (linear)/(concave), whose derivative changes
/// sign at most once and from negative to positive, so interior critical
/// points are minima and the supremum over a step sits at one of its ends.
/// As `s → 0⁺` the objective tends to `v_1 · lim s/ψ(s)`, bounded by its value
/// at the first breakpoint because `s/ψ(s)` is nondecreasing. Past the support
/// the numerator is constant and `ψ` nondecreasing, so nothing beyond the last
/// breakpoint can exceed it.
pub fn marcinkiewicz_norm(f: &SingularFunction, psi: &ConcaveWeight) -> f64 {
    let mut acc = 0.0;
    let mut best = 0.0f64;
    for (start, end, v) in f.rows() {
        acc += v * (end - start);
        best = best.max(acc / psi.eval(end));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrangement::singular::Step;
    use crate::TraceAlgebra;
    use alloc::vec;

    #[test]
    fn luxemburg_of_square_is_l2() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        let x = AlgElement::from_real_diagonal(&a, &[3.0, 4.0]).unwrap();
        let n = sym_norm(&x, &SymmetricSpace::Orlicz(OrliczFunction::power(2.0).unwrap())).unwrap();
        assert!((n - 5.0).abs() < 1e-10);
    }

    #[test]
    fn lorentz_and_marcinkiewicz_of_unit() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        let one = AlgElement::identity(&a);
        let sqrt = ConcaveWeight::power(0.5).unwrap();
        let l = sym_norm(&one, &SymmetricSpace::Lorentz(sqrt.clone())).unwrap();
        let m = sym_norm(&one, &SymmetricSpace::Marcinkiewicz(sqrt)).unwrap();
        assert!((l - 2f64.sqrt()).abs() < 1e-15);
        assert!((m - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn l1_plus_linf_example() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        let x = AlgElement::from_real_diagonal(&a, &[3.0, 1.0]).unwrap();
        assert_eq!(sym_norm(&x, &SymmetricSpace::L1PlusLinf).unwrap(), 3.0);
        assert_eq!(sym_norm(&x, &SymmetricSpace::L1CapLinf).unwrap(), 4.0);
    }

    #[test]
    fn unit_membership_flags() {
        let a = TraceAlgebra::from_pairs(&[(2, 1.0)]).unwrap();
        let lp = one_in_space(&SymmetricSpace::lp(2.0).unwrap(), &a);
        assert!(lp.in_finite_model && lp.models_unit_excluded);
        let sqrt = ConcaveWeight::power(0.5).unwrap();
        assert!(one_in_space(&SymmetricSpace::Lorentz(sqrt.clone()), &a).models_unit_excluded);
        assert!(one_in_space(&SymmetricSpace::Marcinkiewicz(sqrt), &a).models_unit_excluded);
        let lin = ConcaveWeight::power(1.0).unwrap();
        assert!(!one_in_space(&SymmetricSpace::Marcinkiewicz(lin), &a).models_unit_excluded);
        assert!(!one_in_space(&SymmetricSpace::L1PlusLinf, &a).models_unit_excluded);
        assert!(!SymmetricSpace::Lp(f64::INFINITY).excludes_unit());
    }

    #[test]
    fn table_validation() {
        assert!(OrliczFunction::table(vec![(1.0, 1.0), (2.0, 3.0)]).is_ok());
        assert!(OrliczFunction::table(vec![(1.0, 2.0), (2.0, 3.0)]).is_err());
        assert!(ConcaveWeight::table(vec![(1.0, 2.0), (3.0, 3.0)]).is_ok());
        assert!(ConcaveWeight::table(vec![(1.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(ConcaveWeight::table(vec![(1.0, 0.0)]).is_err());
        assert!(OrliczFunction::power(0.5).is_err());
        assert!(ConcaveWeight::power(1.5).is_err());
    }

    #[test]
    fn flat_start_orlicz_table_keeps_unit() {
        let phi = OrliczFunction::table(vec![(1.0, 0.0), (2.0, 1.0)]).unwrap();
        assert!(!SymmetricSpace::Orlicz(phi).excludes_unit());
    }

    #[test]
    fn marcinkiewicz_matches_dense_scan() {
        let f = SingularFunction::from_steps(vec![
            Step { value: 5.0, width: 0.3 },
            Step { value: 2.0, width: 1.1 },
            Step { value: 0.5, width: 2.0 },
        ])
        .unwrap();
        for psi in [ConcaveWeight::power(0.3).unwrap(), ConcaveWeight::Log1p, ConcaveWeight::power(1.0).unwrap()] {
            let got = marcinkiewicz_norm(&f, &psi);
            let scan = (1..=200_000)
                .map(|i| {
                    let s = i as f64 * 5e-5;
                    f.integral_to(s) / psi.eval(s)
                })
                .fold(0.0, f64::max);
            assert!(got >= scan - 1e-12, "{got} < {scan}");
            assert!(got - scan < 1e-3, "{got} vs {scan}");
        }
    }

    #[test]
    fn luxemburg_residual_is_tight() {
        let f = SingularFunction::from_steps(vec![Step { value: 3.0, width: 0.7 }, Step { value: 0.2, width: 5.0 }]).unwrap();
        for phi in [OrliczFunction::ExpMinusOne, OrliczFunction::power(3.5).unwrap(), OrliczFunction::table(vec![(0.5, 0.1), (1.0, 1.0), (4.0, 10.0)]).unwrap()] {
            let a = luxemburg_norm(&f, &phi).unwrap();
            let r = orlicz_modular(&f, &phi, a);
            assert!((r - 1.0).abs() <= 1e-8, "{phi:?}: residual {r}");
        }
    }
}
