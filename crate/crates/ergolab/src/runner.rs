//! Executes a configuration: one unit per instance, run on a thread pool and
//! collected in unit order.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ergolab_core::certify::{
    au_cauchy_certify, check_buem, check_continuous_maximal, check_weighted_maximal, check_yeadon,
    limit_submajorization_gap, local_limit_identify, minimal_threshold, weighted_family, AUCertificate, BoundKind,
    BISECTION_STEPS, THEOREM_REL_TOL,
};
use ergolab_core::dynamics::{random_ds, random_unital_ds, DsMap, MarkovSemigroup};
use ergolab_core::rearrangement::{mu, sym_norm};
use ergolab_core::sampling::{random_algebra, random_element, random_psd, rng_from_seed, stream_seed};
use ergolab_core::weights::BesicovitchWeight;
use ergolab_core::{AlgElement, Error, TraceAlgebra};
use rayon::prelude::*;

use crate::certificate::{CertificateFile, FamilySpec};
use crate::config::{AlgebraSpec, ExperimentConfig, InputSpec, KrausSource, TaskSpec};
use crate::formats::algebra_from_json;
use crate::report::{write_mu, write_report, ReportRow};
use crate::LabError;

/// One concrete problem: a semigroup, an optional weight and an input.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub semigroup: MarkovSemigroup,
    pub weight: Option<BesicovitchWeight>,
    pub x: AlgElement,
}

/// Seed of unit `unit`, when the configuration has a master seed.
pub fn unit_seed(cfg: &ExperimentConfig, unit: usize) -> Option<u64> {
    cfg.seed.map(|s| stream_seed(s, unit as u64))
}

pub fn build_instance(cfg: &ExperimentConfig, unit: usize) -> Result<Instance, LabError> {
    let u = unit_seed(cfg, unit);
    let sub = |k: u64| -> Result<u64, LabError> {
        u.map(|u| stream_seed(u, k))
            .ok_or_else(|| LabError::Format("a random source needs a seed".into()))
    };
    let algebra = match &cfg.algebra {
        AlgebraSpec::Blocks(b) => algebra_from_json(b)?,
        AlgebraSpec::Random { max_blocks, max_dim } => {
            random_algebra(&mut rng_from_seed(sub(0)?), *max_blocks, *max_dim)?
        }
    };
    let mut phi = match &cfg.semigroup.kraus {
        KrausSource::Identity => DsMap::identity(&algebra),
        KrausSource::Zero => DsMap::zero(&algebra),
        KrausSource::Scalar(s) => DsMap::scalar(&algebra, *s)?,
        KrausSource::Explicit(ops) => {
            let kraus = ops.iter().map(|k| k.to_element(&algebra)).collect::<Result<_, _>>()?;
            DsMap::new(&algebra, kraus)?
        }
        KrausSource::Random { n_kraus } => random_ds(&algebra, sub(1)?, *n_kraus)?,
        KrausSource::RandomUnital { n_kraus } => random_unital_ds(&algebra, sub(1)?, *n_kraus)?,
    };
    if let Some(d) = cfg.semigroup.damping {
        phi = phi.damped(d)?;
    }
    let x = match &cfg.x {
        InputSpec::Zero => AlgElement::zero(&algebra),
        InputSpec::Identity => AlgElement::identity(&algebra),
        InputSpec::Diag(d) => AlgElement::from_real_diagonal(&algebra, d)?,
        InputSpec::Explicit(e) => e.to_element(&algebra)?,
        InputSpec::RandomPsd => random_psd(&mut rng_from_seed(sub(2)?), &algebra),
        InputSpec::Random => random_element(&mut rng_from_seed(sub(2)?), &algebra),
    };
    let weight = cfg.weight.as_ref().map(|w| w.to_weight()).transpose()?;
    Ok(Instance {
        semigroup: MarkovSemigroup::new(phi, cfg.semigroup.rate)?,
        weight,
        x,
    })
}

/// Everything one unit produced.
#[derive(Clone, Debug, Default)]
pub struct UnitOutcome {
    pub rows: Vec<ReportRow>,
    pub certificates: Vec<CertificateFile>,
    /// Certificates of parameters whose check failed, with the projection
    /// reached when the search stopped.
    pub failures: Vec<CertificateFile>,
    pub instance: Option<Instance>,
}

struct UnitCtx<'a> {
    task: &'static str,
    unit: usize,
    seed: Option<u64>,
    algebra: &'a TraceAlgebra,
    out: UnitOutcome,
}

impl UnitCtx<'_> {
    fn row(&self, param: &str, value: f64) -> ReportRow {
        let mut r = ReportRow::new(self.task, self.unit, self.seed, self.algebra, param);
        r.param_value = Some(value);
        r
    }

    /// Records a certificate outcome; `Exhausted` becomes a failing row.
    fn certified(
        &mut self,
        inst: &Instance,
        family: FamilySpec,
        mut row: ReportRow,
        result: ergolab_core::Result<AUCertificate>,
        started: Instant,
    ) -> Result<(), LabError> {
        let (cert, ok) = match result {
            Ok(c) => {
                let ok = c.achieved_tau_perp <= c.eps_budget && c.achieved_sup <= c.threshold * (1.0 + THEOREM_REL_TOL);
                (c, ok)
            }
            Err(Error::Exhausted { best, .. }) => (*best, false),
            Err(e) => return Err(e.into()),
        };
        row = row.with_certificate(&cert);
        row.pass = ok;
        row.wall_ms = elapsed_ms(started);
        let file = CertificateFile::new(self.task, self.unit, self.seed, inst, family, &cert);
        if ok {
            self.out.certificates.push(file);
        } else {
            self.out.failures.push(file);
        }
        self.out.rows.push(row);
        Ok(())
    }
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}

pub fn run_unit(cfg: &ExperimentConfig, unit: usize) -> Result<UnitOutcome, LabError> {
    let mut inst = build_instance(cfg, unit)?;
    if matches!(cfg.task, TaskSpec::Yeadon { .. } | TaskSpec::ContinuousMaximal { .. }) {
        // unweighted tasks; a stored weight would change the rebuilt family
        inst.weight = None;
    }
    if matches!(cfg.task, TaskSpec::WeightedMaximal { .. }) && inst.weight.is_none() {
        inst.weight = Some(BesicovitchWeight::unit());
    }
    let algebra = inst.semigroup.algebra().clone();
    let mut ctx = UnitCtx {
        task: cfg.task.name(),
        unit,
        seed: unit_seed(cfg, unit),
        algebra: &algebra,
        out: UnitOutcome::default(),
    };
    let sg = &inst.semigroup;
    let x = &inst.x;
    match &cfg.task {
        TaskSpec::Yeadon { lambda, n_max } => {
            for &l in lambda {
                let started = Instant::now();
                let res = check_yeadon(sg.phi(), x, l, *n_max);
                ctx.certified(&inst, FamilySpec::Discrete { n_max: *n_max }, ctx.row("lambda", l), res, started)?;
            }
        }
        TaskSpec::ContinuousMaximal { lambda, grid } => {
            let grid = grid.points();
            for &l in lambda {
                let started = Instant::now();
                let res = check_continuous_maximal(sg, x, l, &grid);
                ctx.certified(&inst, FamilySpec::Weighted { grid: grid.clone() }, ctx.row("lambda", l), res, started)?;
            }
        }
        TaskSpec::WeightedMaximal { eps, grid, min_constant } => {
            let grid = grid.points();
            let beta = inst.weight.clone().expect("set above");
            let family = if *min_constant {
                Some(weighted_family(sg, Some(&beta), x, &grid)?)
            } else {
                None
            };
            for &e in eps {
                let started = Instant::now();
                let res = check_weighted_maximal(sg, &beta, x, e, &grid);
                let mut row = ctx.row("eps", e);
                if let Some(fam) = &family {
                    // smallest certified threshold, in units of C ε
                    let best = minimal_threshold(fam, 4.0 * x.l1_norm() / e, BoundKind::TwoSided, BISECTION_STEPS)?;
                    row.value = Some(best.threshold / (beta.bound() * e));
                }
                ctx.certified(&inst, FamilySpec::Weighted { grid: grid.clone() }, row, res, started)?;
            }
        }
        TaskSpec::Converge { eps, t0, grid } => {
            let grid = grid.points();
            let eps = eps.unwrap_or(0.5 * algebra.min_weight());
            let c = inst.weight.as_ref().map_or(1.0, BesicovitchWeight::bound);
            let net = weighted_family(sg, inst.weight.as_ref(), x, &grid)?;
            for &t in t0 {
                let started = Instant::now();
                let report = au_cauchy_certify(&net, eps, t)?;
                let limit = report.limit_estimate.as_ref().expect("limit from the last sample");
                let gap = limit_submajorization_gap(limit, x, c);
                let scale = x.l1_norm().max(f64::MIN_POSITIVE);
                let cert = &report.certificate;
                let mut row = ctx.row("t0", t).with_certificate(cert);
                row.value = Some(gap);
                row.pass = cert.achieved_tau_perp <= cert.eps_budget && gap <= 1e-9 * scale;
                row.wall_ms = elapsed_ms(started);
                ctx.out.rows.push(row);
                ctx.out.certificates.push(CertificateFile::new(
                    ctx.task,
                    unit,
                    ctx.seed,
                    &inst,
                    FamilySpec::Cauchy { grid: grid.clone(), t0: t },
                    cert,
                ));
            }
        }
        TaskSpec::Local { grid, alpha_tol } => {
            let started = Instant::now();
            let mut head = grid.points();
            head.reverse();
            let report = local_limit_identify(sg, inst.weight.as_ref(), x, &head)?;
            let alpha = report.report.alpha_estimate.expect("local reports carry α̂");
            let err = (alpha - report.predicted_alpha).norm();
            let t_min = *head.last().expect("nonempty grid");
            let cert = &report.report.certificate;
            let mut row = ctx.row("t_min", t_min).with_certificate(cert);
            row.value = Some(err);
            row.alpha_re = Some(alpha.re);
            row.alpha_im = Some(alpha.im);
            row.pass = err <= *alpha_tol;
            row.wall_ms = elapsed_ms(started);
            ctx.out.rows.push(row);
            ctx.out.certificates.push(CertificateFile::new(
                ctx.task,
                unit,
                ctx.seed,
                &inst,
                FamilySpec::Local {
                    grid: head,
                    alpha: [alpha.re, alpha.im],
                },
                cert,
            ));
        }
        TaskSpec::Norms { specs } => {
            for spec in specs {
                let started = Instant::now();
                let space = spec.to_space()?;
                let v = sym_norm(x, &space)?;
                let mut r = ReportRow::new(ctx.task, unit, ctx.seed, &algebra, &space.name());
                r.value = Some(v);
                r.pass = v.is_finite();
                r.wall_ms = elapsed_ms(started);
                ctx.out.rows.push(r);
            }
        }
        TaskSpec::Buem {
            eps,
            delta,
            shrink,
            count,
            grid,
        } => {
            let grid = grid.points();
            let started = Instant::now();
            let xs: Vec<AlgElement> = (0..*count).map(|m| x.scale_real(shrink.powi(m as i32))).collect();
            let res = check_buem(sg, inst.weight.as_ref(), &grid, *eps, *delta, &xs);
            let c = inst.weight.as_ref().map_or(1.0, BesicovitchWeight::bound);
            let gamma = *eps * *delta / (48.0 * c) / 4.0;
            let m0 = xs.iter().position(|y| y.l1_norm() < gamma);
            let (res, m0) = match (res, m0) {
                (Ok(r), _) => (Ok(r.certificate), r.m0),
                (Err(e @ Error::Exhausted { .. }), Some(m0)) => (Err(e), m0),
                (Err(e), _) => return Err(e.into()),
            };
            let mut row = ctx.row("m0", m0 as f64);
            row.value = Some(gamma);
            let at = Instance {
                x: xs[m0].clone(),
                ..inst.clone()
            };
            ctx.certified(&at, FamilySpec::Weighted { grid }, row, res, started)?;
        }
    }
    let mut out = ctx.out;
    out.instance = Some(inst);
    Ok(out)
}

/// Outcome of a whole run, in unit order.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub units: Vec<UnitOutcome>,
}

impl RunSummary {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.units.iter().flat_map(|u| u.rows.iter().cloned()).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.units.iter().all(|u| u.failures.is_empty() && u.rows.iter().all(|r| r.pass))
    }
}

/// Validates `cfg` and runs every unit on a pool of `threads` workers
/// (`None` uses the rayon default).
pub fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RunSummary, LabError> {
    let diagnostics = cfg.diagnostics();
    if !diagnostics.is_empty() {
        return Err(LabError::Config(diagnostics));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let units = pool.install(|| {
        (0..cfg.instances)
            .into_par_iter()
            .map(|u| run_unit(cfg, u))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(RunSummary { units })
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug, Default)]
pub struct Written {
    pub report: PathBuf,
    pub certificates: Vec<PathBuf>,
    pub failures: Vec<PathBuf>,
}

fn cert_name(c: &CertificateFile, k: usize) -> String {
    format!("unit{:04}_{}_{k:02}.json", c.unit, c.task)
}

/// Writes the report, certificates, failures and optional `μ` tables under `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, summary: &RunSummary, dir: &Path) -> Result<Written, LabError> {
    fs::create_dir_all(dir)?;
    let report = dir.join(&cfg.output.csv);
    write_report(fs::File::create(&report)?, &summary.rows())?;
    let mut written = Written {
        report,
        ..Written::default()
    };
    let cert_dir = dir.join(&cfg.output.certificates);
    let fail_dir = dir.join("failures");
    for unit in &summary.units {
        for (k, c) in unit.certificates.iter().enumerate() {
            fs::create_dir_all(&cert_dir)?;
            let p = cert_dir.join(cert_name(c, k));
            fs::write(&p, c.to_json())?;
            written.certificates.push(p);
        }
        for (k, c) in unit.failures.iter().enumerate() {
            fs::create_dir_all(&fail_dir)?;
            let p = fail_dir.join(cert_name(c, k));
            fs::write(&p, c.to_json())?;
            written.failures.push(p);
        }
        if cfg.output.traces {
            if let (Some(inst), Some(first)) = (&unit.instance, unit.rows.first()) {
                let p = dir.join(format!("unit{:04}_mu_x.csv", first.unit));
                write_mu(fs::File::create(p)?, &mu(&inst.x))?;
            }
        }
    }
    Ok(written)
}
