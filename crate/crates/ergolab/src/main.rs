use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ergolab::certificate::CertificateFile;
use ergolab::config::{default_norms, ExperimentConfig, NormSpec};
use ergolab::core::rearrangement::{mu, sym_norm};
use ergolab::core::AlgElement;
use ergolab::formats::{algebra_from_json, ElementJson};
use ergolab::runner::{run, write_outputs};
use ergolab::LabError;

/// Noncommutative ergodic lab: maximal inequalities, convergence
/// certificates and symmetric norms on finite trace algebras.
#[derive(Parser)]
#[command(name = "ergolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write the report and certificates.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; results do not depend on this.
        #[arg(long, env = "ERGOLAB_THREADS")]
        threads: Option<usize>,
        /// Replaces the config's master seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// List every problem in a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute stored certificates from scratch.
    Revalidate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Singular function and norms of one element.
    Norms {
        /// `[[dim, weight], …]`
        #[arg(long)]
        algebra: String,
        /// `{"blocks": […]}` element JSON.
        #[arg(long)]
        x: String,
        /// JSON list of norm specs; a default family when absent.
        #[arg(long)]
        specs: Option<String>,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn load_config(path: &PathBuf) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            seed_override,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            if seed_override.is_some() {
                cfg.seed = seed_override;
            }
            let summary = match run(&cfg, threads) {
                Ok(s) => s,
                Err(e) => return config_error(e.into()),
            };
            let written = match write_outputs(&cfg, &summary, &out) {
                Ok(w) => w,
                Err(e) => return config_error(e.into()),
            };
            let rows = summary.rows();
            let passed = rows.iter().filter(|r| r.pass).count();
            println!("{passed}/{} checks passed; report at {}", rows.len(), written.report.display());
            if summary.all_pass() {
                return ExitCode::SUCCESS;
            }
            for r in rows.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {} unit {} {} = {:?}", r.task, r.unit, r.param, r.param_value);
            }
            for (unit, path) in summary.units.iter().flat_map(|u| &u.failures).zip(&written.failures) {
                eprintln!("falsifying certificate {}:\n{}", path.display(), unit.to_json());
            }
            ExitCode::from(EXIT_FAIL)
        }
        Command::Validate { config } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            let diagnostics = cfg.diagnostics();
            if diagnostics.is_empty() {
                println!("{}: valid", config.display());
                return ExitCode::SUCCESS;
            }
            for d in &diagnostics {
                eprintln!("{d}");
            }
            ExitCode::from(EXIT_CONFIG)
        }
        Command::Revalidate { files } => {
            let mut all = true;
            for f in &files {
                let outcome = std::fs::read_to_string(f)
                    .map_err(LabError::from)
                    .and_then(|t| CertificateFile::from_json(&t))
                    .and_then(|c| c.revalidate());
                match outcome {
                    Ok(r) if r.pass => println!("PASS {}", f.display()),
                    Ok(r) => {
                        all = false;
                        println!(
                            "FAIL {}: projection {}, τ(e⊥) = {:.6e} within budget {}, sup = {:.6e} within threshold {}, witnesses match {}",
                            f.display(),
                            r.is_projection,
                            r.tau_perp,
                            r.within_budget,
                            r.sup,
                            r.within_threshold,
                            r.witnesses_match
                        );
                    }
                    Err(e) => {
                        all = false;
                        println!("FAIL {}: {e}", f.display());
                    }
                }
            }
            if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Command::Norms { algebra, x, specs } => match norms(&algebra, &x, specs.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => config_error(e),
        },
    }
}

fn norms(algebra: &str, x: &str, specs: Option<&str>) -> anyhow::Result<()> {
    let blocks: Vec<(usize, f64)> = serde_json::from_str(algebra).context("parsing --algebra")?;
    let alg = algebra_from_json(&blocks)?;
    let x: AlgElement = serde_json::from_str::<ElementJson>(x).context("parsing --x")?.to_element(&alg)?;
    let specs: Vec<NormSpec> = match specs {
        Some(s) => serde_json::from_str(s).context("parsing --specs")?,
        None => default_norms(),
    };
    println!("t_start,t_end,mu");
    for (a, b, v) in mu(&x).rows() {
        println!("{a},{b},{v}");
    }
    for s in &specs {
        let space = s.to_space()?;
        println!("{}: {}", space.name(), sym_norm(&x, &space)?);
    }
    Ok(())
}

fn config_error(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(EXIT_CONFIG)
}
