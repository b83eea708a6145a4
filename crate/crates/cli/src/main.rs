//! `hblab` — configuration-driven experiment runner for the
//! Hamiltonian-based search laboratory.
//!
//! Verbs: build, evolve, count, gapscan, krein, bounds, verify, sweep,
//! report. Inputs are JSON instance/schedule descriptions; outputs are
//! JSON records and fixed-format CSV tables, byte-identical across reruns
//! of the same configuration. `HBLAB_THREADS` caps sweep parallelism.
//!
//! Exit status: 0 on success (including theorem-hypothesis advisories,
//! which are reported in the output records), 2 on malformed
//! configuration or I/O problems, 3 on numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod sweep;

use hblab_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "hblab", version, about = "Hamiltonian-based quantum search laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutDir {
    /// Output directory for artifact files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Clone, Copy)]
struct SeedArg {
    /// Override the instance description's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble an instance description and report its derived parameters.
    Build {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: OutDir,
    },
    /// Evolve an instance under a schedule for a scaled time tau.
    Evolve {
        /// JSON request file bundling instance, schedule, tau, steps, mode.
        #[arg(long, conflicts_with_all = ["instance", "schedule", "tau", "c", "steps", "mode"])]
        request: Option<PathBuf>,
        #[arg(long, required_unless_present = "request")]
        instance: Option<PathBuf>,
        #[arg(long, required_unless_present = "request")]
        schedule: Option<PathBuf>,
        /// Scaled evolution time.
        #[arg(long, conflicts_with = "c")]
        tau: Option<f64>,
        /// Success-window constant C in [1/3, 2/3]; tau is derived as
        /// C(1-E_F)/(|E_F| delta2).
        #[arg(long)]
        c: Option<f64>,
        /// Integrator steps (default max(64, ceil(8 tau))).
        #[arg(long)]
        steps: Option<usize>,
        /// Target global state error; sizes the step count.
        #[arg(long)]
        tol: Option<f64>,
        /// full | reduced | double_step
        #[arg(long, default_value = "full")]
        mode: String,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        out: OutDir,
    },
    /// Estimate the final ground overlap from survival amplitudes.
    Count {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Final spectral gap for the plan (defaults to the instance's).
        #[arg(long)]
        gf: Option<f64>,
        /// Re-run the estimate with the assumed E_F shifted by ±eta.
        #[arg(long)]
        ef_perturb: Option<f64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Scan the spectral gap of H(s) along the schedule.
    Gapscan {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Schedule file; defaults to the linear schedule.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value_t = 65)]
        grid: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Krein-formula gap certificate.
    Krein {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Cross-check the certificate against a dense gap scan.
        #[arg(long)]
        with_dense: bool,
        #[arg(long, default_value_t = 33)]
        grid: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Closed-form runtime bounds for an instance.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Schedule supplying the control floor for the robust bound.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Verify a theorem against actual evolutions.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// 1 (lower bound), 5 (robust bound), or adi (error decay).
        #[arg(long)]
        thm: String,
        /// Schedule files (verify-1 and adi accept several).
        #[arg(long)]
        schedule: Vec<PathBuf>,
        /// Comma-separated tau grid.
        #[arg(long)]
        tau_grid: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run a sweep configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Consolidate run artifacts in a directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
}

/// Errors mapped to process exit codes.
pub enum RunError {
    /// Malformed configuration / missing files (exit 2).
    Config(String),
    /// Numerical failure (exit 3).
    Numerical(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::Linalg(_) | CoreError::NoConvergence { .. } => {
                RunError::Numerical(e.to_string())
            }
            _ => RunError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Config(e.to_string())
    }
}

pub(crate) fn require_file(path: &Path) -> Result<(), RunError> {
    if !path.is_file() {
        return Err(RunError::Config(format!(
            "input file {} does not exist",
            path.display()
        )));
    }
    Ok(())
}

fn init_threads() {
    if let Ok(raw) = std::env::var("HBLAB_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build { instance, seed, out } => commands::build(&instance, seed.seed, &out.out),
        Command::Evolve {
            request,
            instance,
            schedule,
            tau,
            c,
            steps,
            tol,
            mode,
            seed,
            out,
        } => match request {
            Some(req) => commands::evolve_request(&req, tol, seed.seed, &out.out),
            None => commands::evolve(
                instance.as_deref().unwrap(),
                schedule.as_deref().unwrap(),
                tau,
                c,
                steps,
                tol,
                &mode,
                seed.seed,
                &out.out,
            ),
        },
        Command::Count {
            instance,
            seed,
            gf,
            ef_perturb,
            out,
        } => commands::count(&instance, seed.seed, gf, ef_perturb, &out.out),
        Command::Gapscan {
            instance,
            seed,
            schedule,
            grid,
            out,
        } => commands::gapscan(&instance, seed.seed, schedule.as_deref(), grid, &out.out),
        Command::Krein {
            instance,
            seed,
            with_dense,
            grid,
            out,
        } => commands::krein(&instance, seed.seed, with_dense, grid, &out.out),
        Command::Bounds {
            instance,
            seed,
            schedule,
            out,
        } => commands::bounds(&instance, seed.seed, schedule.as_deref(), &out.out),
        Command::Verify {
            instance,
            seed,
            thm,
            schedule,
            tau_grid,
            out,
        } => commands::verify(&instance, seed.seed, &thm, &schedule, &tau_grid, &out.out),
        Command::Sweep { config, out } => sweep::run(&config, &out.out),
        Command::Report { dir, out } => commands::report(&dir, &out.out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
