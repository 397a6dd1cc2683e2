use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use sparsefit_cli::bench::{run_suite, write_csv, Suite};
use sparsefit_cli::generate::{generate, GenParams};
use sparsefit_cli::solve::{exit_status, solve, Backend, OracleMode, SolveOptions};
use sparsefit_cli::verify::{verify_instance, verify_report};
use sparsefit_cli::{InstanceFile, Kind, RunReport};

/// Sparse and robust regression, sparse PCA and reduction gadgets, with
/// brute-force certification. All randomness comes from `--seed` through a
/// ChaCha8 generator.
#[derive(Parser)]
#[command(name = "sparsefit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        kind: Kind,
        /// counterexample, planted_lp, binary, triangle or trivial.
        #[arg(long)]
        preset: Option<String>,
        /// Rows, vertices, universe size or variables.
        #[arg(long)]
        n: Option<usize>,
        /// Columns, PSD rank, number of sets or equations.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        /// Clique weight threshold for graph instances.
        #[arg(long = "weight-bound")]
        w: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and print a JSON report.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        solver: Option<String>,
        /// Report id; defaults to the file stem.
        #[arg(long)]
        id: Option<String>,
        #[command(flatten)]
        flags: SolverFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a suite file and write CSV.
    Bench {
        suite: PathBuf,
        #[command(flatten)]
        flags: SolverFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an instance's schema and ground truth, and optionally a report.
    Verify {
        instance: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Overrides the instance seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Approximation factor of the hashed nearest-neighbor backend.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    oracle: OracleMode,
}

impl SolverFlags {
    fn options(&self, solver: Option<String>) -> SolveOptions {
        SolveOptions {
            solver,
            seed: self.seed,
            eps: self.eps,
            k: self.k,
            c: self.c,
            backend: self.backend,
            repeats: self.repeats,
            oracle: self.oracle,
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen {
            kind,
            preset,
            n,
            d,
            k,
            eps,
            c,
            w,
            seed,
            out,
        } => {
            let params = GenParams { n, d, k, eps, c, w, preset };
            let file = generate(kind, &params, seed)?;
            emit(out.as_deref(), &(file.to_json()? + "\n"))?;
            Ok(0)
        }
        Command::Solve {
            instance,
            solver,
            id,
            flags,
            out,
        } => {
            let file = InstanceFile::load(&instance)?;
            let id = id.unwrap_or_else(|| stem(&instance));
            let report = solve(&file, &id, &flags.options(solver))?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            Ok(exit_status([&report]))
        }
        Command::Bench { suite, flags, out } => {
            let base = suite.parent().unwrap_or(Path::new(".")).to_path_buf();
            let reports = run_suite(&Suite::load(&suite)?, &base, &flags.options(None))?;
            let mut buf = Vec::new();
            write_csv(&reports, &mut buf)?;
            emit(out.as_deref(), std::str::from_utf8(&buf)?)?;
            Ok(exit_status(&reports))
        }
        Command::Verify { instance, report } => {
            let file = InstanceFile::load(&instance)?;
            println!("instance ok: {}", verify_instance(&file)?);
            if let Some(path) = report {
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let report: RunReport = serde_json::from_str(&text)?;
                println!("report ok: {}", verify_report(&file, &report)?);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
