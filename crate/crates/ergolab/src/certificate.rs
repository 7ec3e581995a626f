//! Self-contained certificate files.
//!
//! A file stores the instance, the family description and the projection, so
//! [`CertificateFile::revalidate`] can rebuild the family with the same core
//! routines and recompute every witness without the originating config.

use ergolab_core::averaging::discrete_averages;
use ergolab_core::certify::{
    cauchy_pairs, head_averages, residual_family, revalidate, weighted_family, AUCertificate, BoundKind, Revalidation,
    Witness,
};
use ergolab_core::{AlgElement, Projection, C64};
use serde::{Deserialize, Serialize};

use crate::formats::{algebra_from_json, algebra_to_json, ElementJson, KrausJson, WeightJson};
use crate::runner::Instance;
use crate::LabError;

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub algebra: Vec<(usize, f64)>,
    pub kraus: Vec<ElementJson>,
    pub rate: f64,
    #[serde(default)]
    pub weight: Option<WeightJson>,
    pub x: ElementJson,
}

impl InstanceJson {
    pub fn from_instance(inst: &Instance) -> Self {
        let phi = inst.semigroup.phi();
        Self {
            algebra: algebra_to_json(phi.algebra()),
            kraus: KrausJson::from_map(phi).kraus,
            rate: inst.semigroup.rate(),
            weight: inst.weight.as_ref().map(WeightJson::from_weight),
            x: ElementJson::from_element(&inst.x),
        }
    }

    pub fn to_instance(&self) -> Result<Instance, LabError> {
        let algebra = algebra_from_json(&self.algebra)?;
        let phi = KrausJson {
            algebra: self.algebra.clone(),
            kraus: self.kraus.clone(),
        }
        .to_map()?;
        Ok(Instance {
            semigroup: ergolab_core::dynamics::MarkovSemigroup::new(phi, self.rate)?,
            weight: self.weight.as_ref().map(WeightJson::to_weight).transpose()?,
            x: self.x.to_element(&algebra)?,
        })
    }
}

/// How to rebuild the certified family from the instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `A_n(x)` for `n = 1..=n_max`, labelled by `n`.
    Discrete { n_max: usize },
    /// `B_t(x)` on the grid (`A_t(x)` without a weight).
    Weighted { grid: Vec<f64> },
    /// `x_{t'} - x_t` for grid points `t0 ≤ t < t'`.
    Cauchy { grid: Vec<f64>, t0: f64 },
    /// `B_t(x) - α x` on a descending head grid.
    Local { grid: Vec<f64>, alpha: [f64; 2] },
}

impl FamilySpec {
    pub fn build(&self, inst: &Instance) -> ergolab_core::Result<Vec<(f64, AlgElement)>> {
        let sg = &inst.semigroup;
        let beta = inst.weight.as_ref();
        match self {
            FamilySpec::Discrete { n_max } => Ok(discrete_averages(sg.phi(), &inst.x, *n_max)?
                .into_iter()
                .enumerate()
                .map(|(k, a)| ((k + 1) as f64, a))
                .collect()),
            FamilySpec::Weighted { grid } => weighted_family(sg, beta, &inst.x, grid),
            FamilySpec::Cauchy { grid, t0 } => cauchy_pairs(&weighted_family(sg, beta, &inst.x, grid)?, *t0),
            FamilySpec::Local { grid, alpha } => {
                let avgs = head_averages(sg, beta, &inst.x, grid)?;
                residual_family(&avgs, &inst.x, C64::new(alpha[0], alpha[1]))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKindJson {
    OneSided,
    TwoSided,
}

impl From<BoundKind> for BoundKindJson {
    fn from(k: BoundKind) -> Self {
        match k {
            BoundKind::OneSided => Self::OneSided,
            BoundKind::TwoSided => Self::TwoSided,
        }
    }
}

impl From<BoundKindJson> for BoundKind {
    fn from(k: BoundKindJson) -> Self {
        match k {
            BoundKindJson::OneSided => Self::OneSided,
            BoundKindJson::TwoSided => Self::TwoSided,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub trace: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub schema_version: u32,
    pub task: String,
    pub unit: usize,
    pub seed: Option<u64>,
    pub instance: InstanceJson,
    pub family: FamilySpec,
    pub projection: ElementJson,
    pub bound_kind: BoundKindJson,
    pub threshold: f64,
    pub eps_budget: f64,
    pub achieved_tau_perp: f64,
    pub achieved_sup: f64,
    /// `[label, value]` per family member.
    pub witnesses: Vec<[f64; 2]>,
    pub shaves: usize,
    pub margins: Margins,
}

impl CertificateFile {
    pub fn new(task: &str, unit: usize, seed: Option<u64>, inst: &Instance, family: FamilySpec, cert: &AUCertificate) -> Self {
        Self {
            schema_version: CERTIFICATE_VERSION,
            task: task.to_owned(),
            unit,
            seed,
            instance: InstanceJson::from_instance(inst),
            family,
            projection: ElementJson::from_element(cert.projection.as_element()),
            bound_kind: cert.bound_kind.into(),
            threshold: cert.threshold,
            eps_budget: cert.eps_budget,
            achieved_tau_perp: cert.achieved_tau_perp,
            achieved_sup: cert.achieved_sup,
            witnesses: cert.witnesses.iter().map(|w| [w.label, w.value]).collect(),
            shaves: cert.shaves,
            margins: Margins {
                trace: cert.trace_margin(),
                sup: cert.sup_margin(),
            },
        }
    }

    /// Rebuilds the instance and family, then recomputes every stored
    /// quantity. A stored projection that is not a projection fails rather
    /// than erroring.
    pub fn revalidate(&self) -> Result<Revalidation, LabError> {
        if self.schema_version != CERTIFICATE_VERSION {
            return Err(LabError::Format(format!(
                "unsupported certificate version {}",
                self.schema_version
            )));
        }
        let inst = self.instance.to_instance()?;
        let p = self.projection.to_element(inst.semigroup.algebra())?;
        let Ok(projection) = Projection::new(p) else {
            return Ok(Revalidation {
                is_projection: false,
                tau_perp: f64::NAN,
                sup: f64::NAN,
                within_budget: false,
                within_threshold: false,
                witnesses_match: false,
                pass: false,
            });
        };
        let cert = AUCertificate {
            projection,
            eps_budget: self.eps_budget,
            achieved_tau_perp: self.achieved_tau_perp,
            bound_kind: self.bound_kind.into(),
            threshold: self.threshold,
            achieved_sup: self.achieved_sup,
            witnesses: self.witnesses.iter().map(|&[label, value]| Witness { label, value }).collect(),
            shaves: self.shaves,
        };
        let family = self.family.build(&inst)?;
        Ok(revalidate(&cert, &family)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        Ok(serde_json::from_str(text)?)
    }
}
