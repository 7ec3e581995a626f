//! Versioned experiment configuration.
//!
//! Every random source draws from a per-unit stream: unit `i` uses
//! `stream_seed(seed, i)`, and the algebra, Kraus family and input use
//! sub-streams 0, 1 and 2 of it. Scheduling therefore never affects results.

use std::fmt;
use std::path::PathBuf;

use ergolab_core::certify::decade_grid;
use ergolab_core::rearrangement::{ConcaveWeight, OrliczFunction, SymmetricSpace};
use serde::{Deserialize, Serialize};

use crate::formats::{ElementJson, WeightJson};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Master seed; required when any source is random.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub instances: usize,
    pub algebra: AlgebraSpec,
    #[serde(default)]
    pub semigroup: SemigroupSpec,
    /// Absent means `β ≡ 1`.
    #[serde(default)]
    pub weight: Option<WeightJson>,
    pub x: InputSpec,
    pub task: TaskSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgebraSpec {
    Blocks(Vec<(usize, f64)>),
    Random { max_blocks: usize, max_dim: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSpec {
    pub kraus: KrausSource,
    pub rate: f64,
    /// Multiplies every Kraus operator.
    #[serde(default)]
    pub damping: Option<f64>,
}

impl Default for SemigroupSpec {
    fn default() -> Self {
        Self {
            kraus: KrausSource::Identity,
            rate: 1.0,
            damping: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KrausSource {
    Identity,
    Zero,
    Scalar(f64),
    Explicit(Vec<ElementJson>),
    Random { n_kraus: usize },
    RandomUnital { n_kraus: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    Zero,
    Identity,
    Diag(Vec<f64>),
    Explicit(ElementJson),
    RandomPsd,
    Random,
}

/// A list of points or a geometric grid with `per_decade` points per decade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Decades { lo: f64, hi: f64, per_decade: usize },
}

impl GridSpec {
    /// Points in increasing order.
    pub fn points(&self) -> Vec<f64> {
        let mut p = match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Decades { lo, hi, per_decade } => decade_grid(*lo, *hi, *per_decade),
        };
        p.sort_by(f64::total_cmp);
        p.dedup();
        p
    }

    fn check(&self, field: &str, out: &mut Vec<Diagnostic>) {
        match self {
            GridSpec::Points(p) => {
                if p.is_empty() {
                    out.push(Diagnostic::new(field, "must list at least one time"));
                }
                for (i, t) in p.iter().enumerate() {
                    if !(*t > 0.0 && t.is_finite()) {
                        out.push(Diagnostic::new(format!("{field}[{i}]"), format!("must be positive and finite, got {t}")));
                    }
                }
            }
            GridSpec::Decades { lo, hi, per_decade } => {
                if !(*lo > 0.0 && lo.is_finite()) {
                    out.push(Diagnostic::new(format!("{field}.lo"), format!("must be positive, got {lo}")));
                }
                if !(*hi > *lo && hi.is_finite()) {
                    out.push(Diagnostic::new(format!("{field}.hi"), format!("must exceed lo, got {hi}")));
                }
                if *per_decade == 0 {
                    out.push(Diagnostic::new(format!("{field}.per_decade"), "must be at least 1"));
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OrliczSpec {
    Power(f64),
    ExpMinusOne,
    Table(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConcaveSpec {
    Power(f64),
    Log1p,
    Table(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Lp(f64),
    L1CapLinf,
    L1PlusLinf,
    Orlicz(OrliczSpec),
    Lorentz(ConcaveSpec),
    Marcinkiewicz(ConcaveSpec),
}

impl NormSpec {
    pub fn to_space(&self) -> ergolab_core::Result<SymmetricSpace> {
        let concave = |c: &ConcaveSpec| match c {
            ConcaveSpec::Power(g) => ConcaveWeight::power(*g),
            ConcaveSpec::Log1p => Ok(ConcaveWeight::Log1p),
            ConcaveSpec::Table(k) => ConcaveWeight::table(k.clone()),
        };
        Ok(match self {
            NormSpec::Lp(p) => SymmetricSpace::lp(*p)?,
            NormSpec::L1CapLinf => SymmetricSpace::L1CapLinf,
            NormSpec::L1PlusLinf => SymmetricSpace::L1PlusLinf,
            NormSpec::Orlicz(o) => SymmetricSpace::Orlicz(match o {
                OrliczSpec::Power(p) => OrliczFunction::power(*p)?,
                OrliczSpec::ExpMinusOne => OrliczFunction::ExpMinusOne,
                OrliczSpec::Table(k) => OrliczFunction::table(k.clone())?,
            }),
            NormSpec::Lorentz(c) => SymmetricSpace::Lorentz(concave(c)?),
            NormSpec::Marcinkiewicz(c) => SymmetricSpace::Marcinkiewicz(concave(c)?),
        })
    }
}

/// Default norm list for the `norms` subcommand.
pub fn default_norms() -> Vec<NormSpec> {
    vec![
        NormSpec::Lp(1.0),
        NormSpec::Lp(2.0),
        NormSpec::Lp(f64::INFINITY),
        NormSpec::L1CapLinf,
        NormSpec::L1PlusLinf,
        NormSpec::Orlicz(OrliczSpec::Power(2.0)),
        NormSpec::Lorentz(ConcaveSpec::Power(0.5)),
        NormSpec::Marcinkiewicz(ConcaveSpec::Power(0.5)),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Yeadon {
        lambda: Vec<f64>,
        n_max: usize,
    },
    ContinuousMaximal {
        lambda: Vec<f64>,
        grid: GridSpec,
    },
    WeightedMaximal {
        eps: Vec<f64>,
        grid: GridSpec,
        /// Also bisect for the smallest certifiable constant.
        #[serde(default)]
        min_constant: bool,
    },
    Converge {
        /// Defaults to half the smallest block weight.
        #[serde(default)]
        eps: Option<f64>,
        t0: Vec<f64>,
        grid: GridSpec,
    },
    Local {
        grid: GridSpec,
        #[serde(default = "alpha_tol")]
        alpha_tol: f64,
    },
    Norms {
        #[serde(default = "default_norms")]
        specs: Vec<NormSpec>,
    },
    Buem {
        eps: f64,
        delta: f64,
        /// `x_m = shrink^m x`
        shrink: f64,
        count: usize,
        grid: GridSpec,
    },
}

fn alpha_tol() -> f64 {
    1e-3
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Yeadon { .. } => "yeadon",
            TaskSpec::ContinuousMaximal { .. } => "continuous-maximal",
            TaskSpec::WeightedMaximal { .. } => "weighted-maximal",
            TaskSpec::Converge { .. } => "converge",
            TaskSpec::Local { .. } => "local",
            TaskSpec::Norms { .. } => "norms",
            TaskSpec::Buem { .. } => "buem",
        }
    }
}

/// Output file names, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_csv")]
    pub csv: PathBuf,
    #[serde(default = "default_certs")]
    pub certificates: PathBuf,
    /// Also write per-unit average summaries and singular functions.
    #[serde(default)]
    pub traces: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            csv: default_csv(),
            certificates: default_certs(),
            traces: false,
        }
    }
}

fn default_csv() -> PathBuf {
    PathBuf::from("report.csv")
}

fn default_certs() -> PathBuf {
    PathBuf::from("certificates")
}

/// One problem found in a configuration, named by its field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn positive(field: impl Into<String>, v: f64, out: &mut Vec<Diagnostic>) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(Diagnostic::new(field, format!("must be positive and finite, got {v}")));
    }
}

fn positive_list(field: &str, vs: &[f64], out: &mut Vec<Diagnostic>) {
    if vs.is_empty() {
        out.push(Diagnostic::new(field, "must not be empty"));
    }
    for (i, v) in vs.iter().enumerate() {
        positive(format!("{field}[{i}]"), *v, out);
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn uses_randomness(&self) -> bool {
        matches!(self.algebra, AlgebraSpec::Random { .. })
            || matches!(self.semigroup.kraus, KrausSource::Random { .. } | KrausSource::RandomUnital { .. })
            || matches!(self.x, InputSpec::Random | InputSpec::RandomPsd)
    }

    /// Every static problem with the configuration; empty means valid.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            out.push(Diagnostic::new(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.instances == 0 {
            out.push(Diagnostic::new("instances", "must be at least 1"));
        }
        if self.seed.is_none() && self.uses_randomness() {
            out.push(Diagnostic::new("seed", "required because a source is random"));
        }
        match &self.algebra {
            AlgebraSpec::Blocks(blocks) => {
                if blocks.is_empty() {
                    out.push(Diagnostic::new("algebra.blocks", "must contain at least one block"));
                }
                for (i, (dim, w)) in blocks.iter().enumerate() {
                    if *dim == 0 || *dim > ergolab_core::algebra::MAX_BLOCK_DIM {
                        out.push(Diagnostic::new(
                            format!("algebra.blocks[{i}].dim"),
                            format!("must lie in 1..={}, got {dim}", ergolab_core::algebra::MAX_BLOCK_DIM),
                        ));
                    }
                    positive(format!("algebra.blocks[{i}].weight"), *w, &mut out);
                }
            }
            AlgebraSpec::Random { max_blocks, max_dim } => {
                if *max_blocks == 0 {
                    out.push(Diagnostic::new("algebra.random.max_blocks", "must be at least 1"));
                }
                if *max_dim == 0 || *max_dim > ergolab_core::algebra::MAX_BLOCK_DIM {
                    out.push(Diagnostic::new("algebra.random.max_dim", "must lie in 1..=64"));
                }
            }
        }
        if !(self.semigroup.rate >= 0.0 && self.semigroup.rate.is_finite()) {
            out.push(Diagnostic::new("semigroup.rate", format!("must be nonnegative, got {}", self.semigroup.rate)));
        }
        if let Some(d) = self.semigroup.damping {
            if !(0.0..=1.0).contains(&d) {
                out.push(Diagnostic::new("semigroup.damping", format!("must lie in [0, 1], got {d}")));
            }
        }
        match &self.semigroup.kraus {
            KrausSource::Scalar(s) if !(0.0..=1.0).contains(s) => {
                out.push(Diagnostic::new("semigroup.kraus.scalar", format!("must lie in [0, 1], got {s}")));
            }
            KrausSource::Random { n_kraus } | KrausSource::RandomUnital { n_kraus } if *n_kraus == 0 => {
                out.push(Diagnostic::new("semigroup.kraus.n_kraus", "must be at least 1"));
            }
            _ => {}
        }
        if let Some(w) = &self.weight {
            for (j, [re, im, theta]) in w.poly.iter().enumerate() {
                if !(re.is_finite() && im.is_finite()) {
                    out.push(Diagnostic::new(format!("weight.poly[{j}]"), "weight must be finite"));
                }
                if !(*theta > -std::f64::consts::PI && *theta <= std::f64::consts::PI) {
                    out.push(Diagnostic::new(format!("weight.poly[{j}].theta"), format!("must lie in (-π, π], got {theta}")));
                }
            }
            if let Err(e) = w.to_weight() {
                out.push(Diagnostic::new("weight", e.to_string()));
            }
        }
        if let InputSpec::Diag(d) = &self.x {
            if d.iter().any(|v| !v.is_finite()) {
                out.push(Diagnostic::new("x.diag", "entries must be finite"));
            }
        }
        let psd_task = matches!(self.task, TaskSpec::Yeadon { .. } | TaskSpec::ContinuousMaximal { .. });
        match &self.x {
            InputSpec::Random if psd_task => {
                out.push(Diagnostic::new("x", "this task needs a positive input; use random_psd"));
            }
            InputSpec::Diag(d) if psd_task && d.iter().any(|v| *v < 0.0) => {
                out.push(Diagnostic::new("x.diag", "this task needs nonnegative entries"));
            }
            _ => {}
        }
        match &self.task {
            TaskSpec::Yeadon { lambda, n_max } => {
                positive_list("task.lambda", lambda, &mut out);
                if *n_max == 0 {
                    out.push(Diagnostic::new("task.n_max", "must be at least 1"));
                }
            }
            TaskSpec::ContinuousMaximal { lambda, grid } => {
                positive_list("task.lambda", lambda, &mut out);
                grid.check("task.grid", &mut out);
            }
            TaskSpec::WeightedMaximal { eps, grid, .. } => {
                positive_list("task.eps", eps, &mut out);
                grid.check("task.grid", &mut out);
            }
            TaskSpec::Converge { eps, t0, grid } => {
                if let Some(e) = eps {
                    positive("task.eps", *e, &mut out);
                }
                positive_list("task.t0", t0, &mut out);
                grid.check("task.grid", &mut out);
                let top = grid.points().last().copied().unwrap_or(0.0);
                for (i, t) in t0.iter().enumerate() {
                    if top < 16.0 * t {
                        out.push(Diagnostic::new(
                            format!("task.t0[{i}]"),
                            format!("grid ends at {top}, needs at least 16·t0 = {}", 16.0 * t),
                        ));
                    }
                }
            }
            TaskSpec::Local { grid, alpha_tol } => {
                grid.check("task.grid", &mut out);
                positive("task.alpha_tol", *alpha_tol, &mut out);
                if matches!(self.x, InputSpec::Zero) {
                    out.push(Diagnostic::new("x", "the local limit is undefined for x = 0"));
                }
            }
            TaskSpec::Norms { specs } => {
                for (i, s) in specs.iter().enumerate() {
                    if let Err(e) = s.to_space() {
                        out.push(Diagnostic::new(format!("task.specs[{i}]"), e.to_string()));
                    }
                }
            }
            TaskSpec::Buem {
                eps,
                delta,
                shrink,
                count,
                grid,
            } => {
                positive("task.eps", *eps, &mut out);
                positive("task.delta", *delta, &mut out);
                if !(*shrink > 0.0 && *shrink < 1.0) {
                    out.push(Diagnostic::new("task.shrink", format!("must lie in (0, 1), got {shrink}")));
                }
                if *count == 0 {
                    out.push(Diagnostic::new("task.count", "must be at least 1"));
                }
                grid.check("task.grid", &mut out);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const YEADON: &str = r#"{
        "schema_version": 1,
        "seed": 7,
        "instances": 3,
        "algebra": {"random": {"max_blocks": 3, "max_dim": 4}},
        "semigroup": {"kraus": {"random": {"n_kraus": 2}}, "rate": 1.0},
        "x": "random_psd",
        "task": {"kind": "yeadon", "lambda": [0.5, 1.0], "n_max": 16}
    }"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_json(YEADON).unwrap();
        assert!(cfg.diagnostics().is_empty(), "{:?}", cfg.diagnostics());
        assert_eq!(cfg.task.name(), "yeadon");
    }

    #[test]
    fn negative_weight_is_named() {
        let text = r#"{"schema_version":1,"algebra":{"blocks":[[2,1.0],[1,-1.0]]},"x":"identity",
            "task":{"kind":"yeadon","lambda":[1.0],"n_max":4}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let d = cfg.diagnostics();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "algebra.blocks[1].weight");
    }

    #[test]
    fn all_problems_are_listed() {
        let text = r#"{"schema_version":2,"instances":0,"algebra":{"random":{"max_blocks":2,"max_dim":2}},
            "x":"random","task":{"kind":"yeadon","lambda":[-1.0, 0.0],"n_max":0}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let fields: Vec<_> = cfg.diagnostics().into_iter().map(|d| d.field).collect();
        for f in ["schema_version", "instances", "seed", "x", "task.lambda[0]", "task.lambda[1]", "task.n_max"] {
            assert!(fields.iter().any(|g| g == f), "missing {f} in {fields:?}");
        }
    }

    #[test]
    fn converge_grid_must_reach_sixteen_t0() {
        let text = r#"{"schema_version":1,"algebra":{"blocks":[[2,1.0]]},"x":"identity",
            "task":{"kind":"converge","t0":[10.0, 100.0],"grid":{"lo":1.0,"hi":1000.0,"per_decade":8}}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let d = cfg.diagnostics();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "task.t0[1]");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = YEADON.replace("\"instances\"", "\"instancez\"");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }
}
