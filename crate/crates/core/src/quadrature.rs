//! Adaptive composite Gauss–Legendre quadrature.
//!
//! Panels are first laid out no wider than `max_panel` and split at caller
//! supplied breakpoints (jumps of the integrand). Each panel is compared with
//! the sum over its two halves and bisected until the difference falls under
//! its share of the absolute tolerance.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::linalg::C64;

/// Nodes per panel.
pub const NODES: usize = 16;

/// Values that can be integrated: a vector space with a distance.
pub trait Integrand: Clone {
    fn zero_like(&self) -> Self;
    /// `self += s · other`
    fn add_scaled(&mut self, s: f64, other: &Self);
    fn distance(&self, other: &Self) -> f64;
}

impl Integrand for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, s: f64, other: &Self) {
        *self += s * other;
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl Integrand for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, s: f64, other: &Self) {
        *self += other * s;
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl Integrand for Vec<C64> {
    fn zero_like(&self) -> Self {
        alloc::vec![C64::new(0.0, 0.0); self.len()]
    }
    fn add_scaled(&mut self, s: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b * s;
        }
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter().zip(other).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single-panel rule on `[a, b]`.
    pub fn panel<V: Integrand>(&self, a: f64, b: f64, f: &mut impl FnMut(f64) -> V) -> V {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc: Option<V> = None;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            match acc.as_mut() {
                None => {
                    let mut z = v.zero_like();
                    z.add_scaled(w * half, &v);
                    acc = Some(z);
                }
                Some(s) => s.add_scaled(w * half, &v),
            }
        }
        acc.expect("at least one node")
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings for [`integrate`].
#[derive(Clone, Debug)]
pub struct QuadratureConfig {
    /// Absolute error target for the whole interval.
    pub abs_tol: f64,
    /// Widest initial panel.
    pub max_panel: f64,
    /// Cap on evaluated panels.
    pub max_panels: usize,
    /// Points where the integrand may jump; panels never straddle them.
    pub breakpoints: Vec<f64>,
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, max_panel: f64) -> Self {
        Self {
            abs_tol,
            max_panel,
            max_panels: 200_000,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, pts: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(pts);
        self
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureOutcome<V> {
    pub value: V,
    /// Sum of accepted panel error estimates.
    pub error_estimate: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Panel width keeping at most a quarter period of the fastest oscillation per panel.
pub fn oscillation_panel(theta_max: f64) -> f64 {
    if theta_max > 0.0 {
        0.25f64.min(PI / (4.0 * theta_max))
    } else {
        0.25
    }
}

/// Adaptive composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate<V: Integrand>(a: f64, b: f64, cfg: &QuadratureConfig, mut f: impl FnMut(f64) -> V) -> QuadratureOutcome<V> {
    let rule = GaussLegendre::new(NODES);
    let total = (b - a).abs();
    let mut cuts: Vec<f64> = cfg
        .breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut stack: Vec<(f64, f64, V)> = Vec::new();
    let mut panels = 0usize;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let n = (((hi - lo) / cfg.max_panel).ceil() as usize).max(1);
        let h = (hi - lo) / n as f64;
        for i in 0..n {
            let pa = lo + h * i as f64;
            let pb = if i + 1 == n { hi } else { pa + h };
            let q = rule.panel(pa, pb, &mut f);
            panels += 1;
            stack.push((pa, pb, q));
        }
    }

    let mut value: Option<V> = None;
    let mut err = 0.0;
    let mut converged = true;
    while let Some((pa, pb, whole)) = stack.pop() {
        let mid = 0.5 * (pa + pb);
        let left = rule.panel(pa, mid, &mut f);
        let right = rule.panel(mid, pb, &mut f);
        panels += 2;
        let mut halves = left.clone();
        halves.add_scaled(1.0, &right);
        let diff = halves.distance(&whole);
        let share = if total > 0.0 { cfg.abs_tol * (pb - pa) / total } else { cfg.abs_tol };
        let unresolvable = mid <= pa || mid >= pb;
        if diff <= share || unresolvable || panels >= cfg.max_panels {
            if diff > share {
                converged = false;
            }
            err += diff;
            match value.as_mut() {
                None => value = Some(halves),
                Some(v) => v.add_scaled(1.0, &halves),
            }
        } else {
            stack.push((pa, mid, left));
            stack.push((mid, pb, right));
        }
    }
    QuadratureOutcome {
        value: value.expect("at least one panel"),
        error_estimate: err,
        panels,
        converged: converged && err <= cfg.abs_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(NODES);
        let total: f64 = gl.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // degree 31 is the exactness limit for 16 nodes
        let v: f64 = gl.panel(0.0, 1.0, &mut |x: f64| x.powi(30));
        assert!((v - 1.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integral() {
        let theta = 40.0;
        let cfg = QuadratureConfig::new(1e-12, oscillation_panel(theta));
        let out = integrate(0.0, 10.0, &cfg, |s| C64::new(0.0, theta * s).exp());
        let want = (C64::new(0.0, theta * 10.0).exp() - 1.0) / C64::new(0.0, theta);
        assert!((out.value - want).norm() < 1e-12);
        assert!(out.converged);
    }

    #[test]
    fn jump_at_breakpoint() {
        let cfg = QuadratureConfig::new(1e-12, 0.25).with_breakpoints([1.3]);
        let out = integrate(0.0, 3.0, &cfg, |s| if s < 1.3 { 2.0 } else { 0.5 });
        assert!((out.value - (2.6 + 0.85)).abs() < 1e-13);
    }
}
