use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::algebra::AlgElement;
use crate::linalg::singular_values;
use crate::{Error, Result};

/// One constant piece of a [`SingularFunction`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub value: f64,
    pub width: f64,
}

/// The nonincreasing right-continuous step function `t ↦ μ_t(x)`.
///
/// Values are strictly decreasing and positive; the function vanishes beyond
/// [`support_end`](Self::support_end).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SingularFunction {
    steps: Vec<Step>,
}

impl SingularFunction {
    /// Builds a step function from nonincreasing `(value, width)` pieces.
    ///
    /// Equal neighbours are merged and zero values dropped.
    pub fn from_steps(steps: impl IntoIterator<Item = Step>) -> Result<Self> {
        let mut out: Vec<Step> = Vec::new();
        for (i, s) in steps.into_iter().enumerate() {
            if !(s.width > 0.0 && s.width.is_finite()) {
                return Err(Error::Domain(format!("step {i} has width {}", s.width)));
            }
            if !(s.value >= 0.0 && s.value.is_finite()) {
                return Err(Error::Domain(format!("step {i} has value {}", s.value)));
            }
            if let Some(last) = out.last_mut() {
                if s.value > last.value {
                    return Err(Error::Domain(format!(
                        "step {i} increases from {} to {}",
                        last.value, s.value
                    )));
                }
                if s.value == last.value {
                    last.width += s.width;
                    continue;
                }
            }
            if s.value > 0.0 {
                out.push(s);
            }
        }
        Ok(Self { steps: out })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_zero(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn support_end(&self) -> f64 {
        self.steps.iter().map(|s| s.width).sum()
    }

    /// `μ_0`, i.e. the uniform norm.
    pub fn sup(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.value)
    }

    /// Right endpoints of the steps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.steps
            .iter()
            .map(|s| {
                t += s.width;
                t
            })
            .collect()
    }

    /// `(t_start, t_end, value)` for every step, e.g. for plotting.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let mut t = 0.0;
        self.steps.iter().map(move |s| {
            let start = t;
            t += s.width;
            (start, t, s.value)
        })
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let mut end = 0.0;
        for s in &self.steps {
            end += s.width;
            if t < end {
                return s.value;
            }
        }
        0.0
    }

    /// `∫_0^s μ_t dt`
    pub fn integral_to(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        let mut start = 0.0;
        for st in &self.steps {
            if s <= start {
                break;
            }
            let w = st.width.min(s - start);
            acc += st.value * w;
            start += st.width;
        }
        acc
    }

    /// `∫_0^∞ μ_t dt`, the trace norm.
    pub fn integral(&self) -> f64 {
        self.steps.iter().map(|s| s.value * s.width).sum()
    }

    /// `∫_0^∞ μ_t^p dt`
    pub fn power_integral(&self, p: f64) -> f64 {
        self.steps.iter().map(|s| s.value.powf(p) * s.width).sum()
    }

    /// `t ↦ c μ_t` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    value: s.value * c,
                    width: s.width,
                })
                .collect(),
        }
    }

    /// Pointwise `self ≤ other` on `[0, ∞)`, up to slivers narrower than
    /// `1e-12` of the support where breakpoints differ only by rounding.
    pub fn pointwise_le(&self, other: &SingularFunction) -> bool {
        let mut cuts = self.breakpoints();
        cuts.extend(other.breakpoints());
        cuts.push(0.0);
        cuts.sort_by(f64::total_cmp);
        let sliver = 1e-12 * cuts.last().copied().unwrap_or(0.0);
        cuts.windows(2)
            .filter(|w| w[1] - w[0] > sliver)
            .all(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.value_at(mid) <= other.value_at(mid)
            })
    }
}

/// Generalized singular numbers of `x`: singular values of every block,
/// sorted descending, each occupying a width equal to its block's weight.
pub fn mu(x: &AlgElement) -> SingularFunction {
    let mut pieces: Vec<(f64, usize, f64)> = Vec::new();
    for (k, (m, b)) in x.blocks().iter().zip(x.algebra().blocks()).enumerate() {
        pieces.extend(singular_values(m).into_iter().map(|s| (s, k, b.weight)));
    }
    // stable by block index on ties
    pieces.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    SingularFunction::from_steps(pieces.into_iter().map(|(value, _, width)| Step { value, width }))
        .expect("singular values are finite and sorted")
}

/// `max_s (∫_0^s μ(y) - ∫_0^s μ(x))` over all breakpoints of both functions.
///
/// Both integrals are piecewise linear with kinks only at breakpoints, so the
/// maximum over `s > 0` is attained there (or at `s → ∞`, which equals the
/// last breakpoint).
pub fn submajorization_gap(y: &SingularFunction, x: &SingularFunction) -> f64 {
    let mut cuts = y.breakpoints();
    cuts.extend(x.breakpoints());
    cuts.iter()
        .map(|&s| y.integral_to(s) - x.integral_to(s))
        .fold(0.0, f64::max)
}

/// `y ≺≺ x`: `∫_0^s μ(y) ≤ ∫_0^s μ(x)` for every `s > 0`.
pub fn submajorize(y: &SingularFunction, x: &SingularFunction) -> bool {
    submajorization_gap(y, x) <= 0.0
}

/// [`submajorize`] with slack `rel_tol · ‖x‖₁`.
pub fn submajorize_within(y: &SingularFunction, x: &SingularFunction, rel_tol: f64) -> bool {
    submajorization_gap(y, x) <= rel_tol * x.integral().max(f64::MIN_POSITIVE)
}
