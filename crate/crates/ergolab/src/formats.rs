//! JSON shapes for algebras, elements, Kraus sets and weights.
//!
//! Algebras are `[[dim, weight], …]`; matrices are row-major nested arrays of
//! `[re, im]` pairs; weights are `{"poly": [[re, im, theta], …],
//! "perturbation": {…}, "C": …}`.

use std::sync::Arc;

use ergolab_core::dynamics::DsMap;
use ergolab_core::linalg::{CMatrix, C64};
use ergolab_core::weights::{BesicovitchWeight, Perturbation, SignPattern, TrigPolynomial, TrigTerm};
use ergolab_core::{AlgElement, Block, TraceAlgebra};
use serde::{Deserialize, Serialize};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn algebra_to_json(a: &TraceAlgebra) -> Vec<(usize, f64)> {
    a.blocks().iter().map(|b| (b.dim, b.weight)).collect()
}

pub fn algebra_from_json(blocks: &[(usize, f64)]) -> ergolab_core::Result<Arc<TraceAlgebra>> {
    TraceAlgebra::new(blocks.iter().map(|&(dim, weight)| Block { dim, weight }).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub blocks: Vec<MatrixJson>,
}

impl ElementJson {
    pub fn from_element(x: &AlgElement) -> Self {
        let blocks = x
            .blocks()
            .iter()
            .map(|m| {
                (0..m.rows())
                    .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
                    .collect()
            })
            .collect();
        Self { blocks }
    }

    pub fn to_element(&self, algebra: &Arc<TraceAlgebra>) -> ergolab_core::Result<AlgElement> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (k, rows) in self.blocks.iter().enumerate() {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(ergolab_core::Error::Structural(format!("block {k} is not square")));
            }
            let data = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
            blocks.push(CMatrix::from_row_major(n, n, data).expect("square by check"));
        }
        AlgElement::new(algebra, blocks)
    }
}

/// A Kraus set stored with its algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausJson {
    pub algebra: Vec<(usize, f64)>,
    pub kraus: Vec<ElementJson>,
}

impl KrausJson {
    pub fn from_map(phi: &DsMap) -> Self {
        Self {
            algebra: algebra_to_json(phi.algebra()),
            kraus: phi.kraus().iter().map(ElementJson::from_element).collect(),
        }
    }

    pub fn to_map(&self) -> ergolab_core::Result<DsMap> {
        let algebra = algebra_from_json(&self.algebra)?;
        let kraus = self.kraus.iter().map(|k| k.to_element(&algebra)).collect::<ergolab_core::Result<_>>()?;
        DsMap::new(&algebra, kraus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignJson {
    #[default]
    Positive,
    Alternating {
        period: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationJson {
    #[default]
    None,
    Bump {
        height: f64,
        start: f64,
        end: f64,
    },
    Decaying {
        height: f64,
        gamma: f64,
        #[serde(default)]
        sign: SignJson,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightJson {
    pub poly: Vec<[f64; 3]>,
    #[serde(default)]
    pub perturbation: PerturbationJson,
    #[serde(rename = "C")]
    pub bound: f64,
}

impl WeightJson {
    pub fn from_weight(b: &BesicovitchWeight) -> Self {
        let poly = b.poly().terms().iter().map(|t| [t.weight.re, t.weight.im, t.theta]).collect();
        let perturbation = match *b.perturbation() {
            Perturbation::None => PerturbationJson::None,
            Perturbation::Bump { height, start, end } => PerturbationJson::Bump { height, start, end },
            Perturbation::Decaying { height, gamma, sign } => PerturbationJson::Decaying {
                height,
                gamma,
                sign: match sign {
                    SignPattern::Positive => SignJson::Positive,
                    SignPattern::Alternating { period } => SignJson::Alternating { period },
                },
            },
        };
        Self {
            poly,
            perturbation,
            bound: b.bound(),
        }
    }

    pub fn to_weight(&self) -> ergolab_core::Result<BesicovitchWeight> {
        let terms = self
            .poly
            .iter()
            .map(|&[re, im, theta]| TrigTerm {
                weight: C64::new(re, im),
                theta,
            })
            .collect();
        let perturbation = match self.perturbation {
            PerturbationJson::None => Perturbation::None,
            PerturbationJson::Bump { height, start, end } => Perturbation::Bump { height, start, end },
            PerturbationJson::Decaying { height, gamma, sign } => Perturbation::Decaying {
                height,
                gamma,
                sign: match sign {
                    SignJson::Positive => SignPattern::Positive,
                    SignJson::Alternating { period } => SignPattern::Alternating { period },
                },
            },
        };
        BesicovitchWeight::new(TrigPolynomial::new(terms)?, perturbation, self.bound)
    }
}
