use alloc::boxed::Box;
use alloc::string::String;

use crate::algebra::AlgElement;
use crate::certify::AUCertificate;

/// Errors raised by the core numerics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Shapes or algebras of the operands do not match.
    #[error("structural error: {0}")]
    Structural(String),
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A Kraus family failed one of the Dunford-Schwartz inequalities.
    #[error("certification failed: subunital margin {subunital_margin:.3e}, trace margin {trace_margin:.3e}")]
    Certification {
        /// Smallest eigenvalue of `1 - Σ K K*`; negative means violated.
        subunital_margin: f64,
        /// Smallest eigenvalue of `1 - Σ K* K`; negative means violated.
        trace_margin: f64,
    },
    /// A root bracket could not be established.
    #[error("bracket failure: {0}")]
    Bracket(String),
    /// Adaptive quadrature ran out of panels before reaching its tolerance.
    #[error("quadrature budget exceeded: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureBudget {
        achieved: f64,
        requested: f64,
        /// Estimate at the point the budget ran out, when one exists.
        best: Option<Box<AlgElement>>,
    },
    /// Projection search ran past its trace budget or iteration cap.
    #[error("projection search exhausted: τ(e⊥) = {tau_perp:.6e} against budget {budget:.6e} after {iterations} shaves")]
    Exhausted {
        tau_perp: f64,
        budget: f64,
        iterations: usize,
        /// Projection reached when the search stopped.
        best: Box<AUCertificate>,
    },
    /// A precondition on grids or sequences does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
