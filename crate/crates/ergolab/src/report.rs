//! CSV outputs: one report row per (unit, parameter) and `μ_t` step tables.

use std::io::Write;

use ergolab_core::certify::AUCertificate;
use ergolab_core::rearrangement::SingularFunction;
use ergolab_core::TraceAlgebra;
use serde::{Deserialize, Serialize};

/// One line of the report. Optional columns are left empty when a task has
/// no such quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task: String,
    pub unit: usize,
    pub seed: Option<u64>,
    /// `dim:weight` pairs joined by `;`.
    pub blocks: String,
    pub param: String,
    pub param_value: Option<f64>,
    pub tau_perp: Option<f64>,
    pub budget: Option<f64>,
    /// `budget - τ(e⊥)`
    pub margin: Option<f64>,
    pub sup: Option<f64>,
    pub threshold: Option<f64>,
    /// `threshold - sup`
    pub sup_margin: Option<f64>,
    pub value: Option<f64>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub pass: bool,
    pub wall_ms: f64,
}

impl ReportRow {
    pub fn new(task: &str, unit: usize, seed: Option<u64>, algebra: &TraceAlgebra, param: &str) -> Self {
        Self {
            task: task.to_owned(),
            unit,
            seed,
            blocks: blocks_label(algebra),
            param: param.to_owned(),
            param_value: None,
            tau_perp: None,
            budget: None,
            margin: None,
            sup: None,
            threshold: None,
            sup_margin: None,
            value: None,
            alpha_re: None,
            alpha_im: None,
            pass: false,
            wall_ms: 0.0,
        }
    }

    pub fn with_certificate(mut self, c: &AUCertificate) -> Self {
        self.tau_perp = Some(c.achieved_tau_perp);
        self.budget = Some(c.eps_budget);
        self.margin = Some(c.trace_margin());
        self.sup = Some(c.achieved_sup);
        self.threshold = Some(c.threshold);
        self.sup_margin = Some(c.sup_margin());
        self
    }
}

pub fn blocks_label(algebra: &TraceAlgebra) -> String {
    algebra
        .blocks()
        .iter()
        .map(|b| format!("{}:{}", b.dim, b.weight))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_report<W: Write>(out: W, rows: &[ReportRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Serialize)]
struct MuRow {
    t_start: f64,
    t_end: f64,
    value: f64,
}

/// `μ_t` as `(t_start, t_end, value)` rows.
pub fn write_mu<W: Write>(out: W, mu: &SingularFunction) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for (t_start, t_end, value) in mu.rows() {
        w.serialize(MuRow { t_start, t_end, value })?;
    }
    w.flush()?;
    Ok(())
}
