//! Batch experiment runner behind the `orlicz` binary.
//!
//! Exit codes: 0 success, 1 config or precondition error, 2 non-convergence,
//! 3 certificate failure.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::certify::{check_characterization, CertifyOptions};
use crate::grid::{default_equality_tol, Grid, GridFunction};
use crate::phi::PhiFunction;
use crate::solver::{solve, SolverConfig};
use crate::subspace::Subspace;
use crate::uniqueness::{build_nonuniq_witness, jump_phi_uniqueness_suite, uniqueness_probe, write_suite};

pub use config::ExperimentConfig;
use config::{TargetSpec, UniqueMode, UniqueSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

/// Environment variable that replaces the default output directory.
pub const OUT_DIR_ENV: &str = "ORLICZ_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "orlicz", version, about = "Best Φ-approximation experiments on quadrature grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory. Defaults to $ORLICZ_OUT_DIR, then the working directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// No summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Minimize the modular and write solution.json and residuals.csv.
    Solve,
    /// Check the optimality certificate for `certify.coeffs`.
    Certify,
    /// Multi-start uniqueness probe, or the jump-generator suite.
    Unique,
    /// Build the non-uniqueness witness from `witness.p3_coeffs` and `witness.p1_coeffs`.
    Witness,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config: missing `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

/// What a command produced: an exit code and a one-line summary.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
}

struct Ctx {
    cfg: ExperimentConfig,
    out: PathBuf,
}

impl Ctx {
    fn seed(&self) -> Result<u64, CliError> {
        self.cfg.seed.ok_or(CliError::Missing("seed (or --seed)"))
    }

    fn target_spec(&self) -> Result<&TargetSpec, CliError> {
        self.cfg.target.as_ref().ok_or(CliError::Missing("[target]"))
    }

    /// Grid, subspace, target and generator.
    fn setup(&self) -> Result<(Arc<Grid>, Subspace, GridFunction, PhiFunction), CliError> {
        let phi = self.cfg.phi.build()?;
        let grid = self.cfg.build_grid(None)?;
        let s = self.cfg.subspace.build(&grid)?;
        let f = self.target_spec()?.build(&grid, &s, self.cfg.seed)?;
        Ok((grid, s, f, phi))
    }

    fn solver(&self) -> Result<SolverConfig, CliError> {
        Ok(SolverConfig {
            rng_seed: self.seed()?,
            ..self.cfg.solver.clone()
        })
    }

    fn write_json(&self, name: &str, result: impl Serialize) -> Result<(), CliError> {
        let doc = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.cfg,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
        text.push('\n');
        write_atomic(&self.out.join(name), text.as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let err = |source| CliError::Write {
        path: path.to_owned(),
        source,
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(err)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).map_err(err)?;
    file.write_all(bytes).map_err(err)?;
    file.sync_all().map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

fn residual_table(grid: &Grid, f: &GridFunction, p: &GridFunction) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "f", "P", "residual"]).expect("in-memory write");
    for ((x, f), p) in grid.nodes().iter().zip(f.values()).zip(p.values()) {
        w.write_record([x.to_string(), f.to_string(), p.to_string(), (f - p).to_string()])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn cmd_solve(ctx: &Ctx) -> Result<Outcome, CliError> {
    let (grid, s, f, phi) = ctx.setup()?;
    let sol = solve(&f, &s, &phi, &ctx.solver()?)?;
    let p = s.evaluate(&sol.coeffs)?;
    write_atomic(&ctx.out.join("residuals.csv"), &residual_table(&grid, &f, &p))?;
    ctx.write_json("solution.json", &sol)?;
    Ok(Outcome {
        code: if sol.converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
        summary: format!(
            "coeffs {:?}, modular {:.6e}, converged {}",
            sol.coeffs, sol.modular_value, sol.converged
        ),
    })
}

fn cmd_certify(ctx: &Ctx) -> Result<Outcome, CliError> {
    let spec = ctx.cfg.certify.as_ref().ok_or(CliError::Missing("[certify]"))?;
    let (_, s, f, phi) = ctx.setup()?;
    let p = s.evaluate(&spec.coeffs)?;
    let opts = CertifyOptions {
        tol: spec.tol,
        n_random: spec.n_random,
        seed: ctx.seed()?,
    };
    let cert = check_characterization(&f, &p, &s, &phi, &opts)?;
    ctx.write_json("certificate.json", &cert)?;
    Ok(Outcome {
        code: if cert.verdict { EXIT_OK } else { EXIT_CERTIFICATE },
        summary: format!(
            "verdict {}, min margin {:.3e} over {} directions (tol {:.1e})",
            cert.verdict,
            cert.min_margin(),
            cert.directions.len(),
            cert.tol
        ),
    })
}

fn cmd_unique(ctx: &Ctx) -> Result<Outcome, CliError> {
    let spec = ctx.cfg.unique.clone().unwrap_or_default();
    let solver = ctx.solver()?;
    match spec.mode {
        UniqueMode::Probe => unique_probe(ctx, &spec, &solver),
        UniqueMode::JumpSuite => unique_suite(ctx, &spec, &solver),
    }
}

fn unique_probe(ctx: &Ctx, spec: &UniqueSpec, solver: &SolverConfig) -> Result<Outcome, CliError> {
    let (_, s, f, phi) = ctx.setup()?;
    let report = uniqueness_probe(&f, &s, &phi, solver, spec.n_starts)?
        .with_labels("config target", spec.theorem_tag.clone().unwrap_or_default());
    ctx.write_json("uniqueness.json", &report)?;
    let code = if report.converged_starts < report.n_starts {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    };
    Ok(Outcome {
        code,
        summary: format!(
            "verdict {}, {} clusters, diameter {:.3e}",
            report.verdict.name(),
            report.clusters.len(),
            report.diameter
        ),
    })
}

fn unique_suite(ctx: &Ctx, spec: &UniqueSpec, solver: &SolverConfig) -> Result<Outcome, CliError> {
    let phi = ctx.cfg.phi.build()?;
    let grid = ctx.cfg.build_grid(None)?;
    let s = ctx.cfg.subspace.build(&grid)?;
    let mut reports =
        jump_phi_uniqueness_suite(&s, &phi, spec.n_instances, ctx.seed()?, spec.amplitude, solver, spec.n_starts)?;
    if let Some(tag) = &spec.theorem_tag {
        for r in &mut reports {
            r.theorem_tag.clone_from(tag);
        }
    }
    let mut table = Vec::new();
    write_suite(&reports, &mut table)?;
    write_atomic(&ctx.out.join("suite.csv"), &table)?;
    let singletons = reports.iter().filter(|r| r.verdict.name() == "singleton").count();
    let all_converged = reports.iter().all(|r| r.converged_starts == r.n_starts);
    ctx.write_json(
        "uniqueness.json",
        json!({ "suite_pass": singletons == reports.len(), "reports": reports }),
    )?;
    Ok(Outcome {
        code: if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
        summary: format!("{singletons}/{} singleton", reports.len()),
    })
}

fn cmd_witness(ctx: &Ctx) -> Result<Outcome, CliError> {
    let spec = ctx.cfg.witness.as_ref().ok_or(CliError::Missing("[witness]"))?;
    let (_, s, f, phi) = ctx.setup()?;
    let p1 = s.evaluate(&spec.p1_coeffs)?;
    let w = build_nonuniq_witness(&s, &phi, &spec.p3_coeffs, &f, &p1, spec.epsilons.as_deref())?;
    let within = w.modular_gap <= spec.tol;
    ctx.write_json("witness.json", json!({ "within_tol": within, "witness": w }))?;
    Ok(Outcome {
        code: if within { EXIT_OK } else { EXIT_CERTIFICATE },
        summary: format!("modular gap {:.3e} (tol {:.1e})", w.modular_gap, spec.tol),
    })
}

/// Fills in the default `η = 10⁻⁸·(1 + ‖f‖∞)` so outputs record the value used.
fn resolve_equality_tol(cfg: &mut ExperimentConfig) -> Result<(), CliError> {
    if cfg.grid.equality_tol.is_some() {
        return Ok(());
    }
    let grid = cfg.build_grid(None)?;
    let f_sup = match &cfg.target {
        Some(spec) => spec.build(&grid, &cfg.subspace.build(&grid)?, cfg.seed)?.sup_norm(),
        None => 0.0,
    };
    cfg.grid.equality_tol = Some(default_equality_tol(f_sup));
    Ok(())
}

/// Loads the config, applies overrides and runs one command.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli.config.as_ref().ok_or(CliError::Missing("--config"))?;
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.clone(),
        source,
    })?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    resolve_equality_tol(&mut cfg)?;
    let ctx = Ctx { cfg, out };
    match cli.command {
        Command::Solve => cmd_solve(&ctx),
        Command::Certify => cmd_certify(&ctx),
        Command::Unique => cmd_unique(&ctx),
        Command::Witness => cmd_witness(&ctx),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            if !cli.quiet {
                println!("{}", outcome.summary);
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
