//! `wwlab`: command-line driver for the experiments.
//!
//! Exit codes: 0 all checks pass, 2 a check failed or the baseline differs,
//! 3 a solver or I/O error, 64 bad usage or configuration.

mod config;
mod experiments;
mod summary;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wwlab::WwError;

use config::RunConfig;
use summary::{compare, Summary};

const EXIT_CHECK: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "wwlab", version, about = "Capillary-gravity solitary waves: construction, evolution and stability checks")]
struct Cli {
    /// JSON run configuration; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. Overrides WWLAB_OUT and the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Reference summary.json to compare this run against.
    #[arg(long, global = true)]
    baseline: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and refine a solitary wave.
    Solitary,
    /// Evolve a solitary wave and track its shape and conserved quantities.
    Evolve,
    /// Check the Dirichlet-Neumann solver against exact and structural properties.
    DnCheck,
    /// Interaction defect of a well-separated pair and its decay rates.
    Residual,
    /// Transverse instability scan.
    Spectrum,
    /// Constrained positivity of the linearized energy.
    Coercivity,
    /// Growth of the linearization about a pair.
    Lingrow,
    /// First-order correction to the pair superposition.
    Correct,
    /// Tabulate the interaction bound.
    Interaction,
    /// Compare two summaries: `--baseline <reference>` against `--current <summary>`.
    Baseline {
        #[arg(long)]
        current: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solitary => "solitary",
            Command::Evolve => "evolve",
            Command::DnCheck => "dn-check",
            Command::Residual => "residual",
            Command::Spectrum => "spectrum",
            Command::Coercivity => "coercivity",
            Command::Lingrow => "lingrow",
            Command::Correct => "correct",
            Command::Interaction => "interaction",
            Command::Baseline { .. } => "baseline",
        }
    }
}

fn error_code(e: &WwError) -> u8 {
    match e {
        WwError::InvalidArgument(_) | WwError::Format(_) => EXIT_USAGE,
        _ => EXIT_SOLVER,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("wwlab: {msg}");
    ExitCode::from(code)
}

/// Writes `baseline_diff.json` and reports whether the run matches the reference.
fn check_baseline(reference: &Path, current: &Summary, threshold: f64, out: &Path) -> Result<bool, (u8, String)> {
    let reference = Summary::read(reference).map_err(|e| (EXIT_USAGE, e.to_string()))?;
    let diff = compare(&reference, current, threshold).map_err(|e| (EXIT_CHECK, e.to_string()))?;
    wwlab::numerics::io::write_json(&out.join("baseline_diff.json"), &diff).map_err(|e| (EXIT_SOLVER, e.to_string()))?;
    for c in diff.flagged() {
        eprintln!("changed: {} {:e} -> {:e} ({:.1}%)", c.metric, c.reference, c.current, 100.0 * c.relative);
    }
    for s in &diff.structural {
        eprintln!("{}: {}", s.kind, s.metric);
    }
    Ok(diff.flagged().next().is_none() && diff.structural.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail(EXIT_USAGE, e),
        },
        None => RunConfig::default(),
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            return fail(EXIT_USAGE, "--jobs must be at least 1");
        }
        wwlab::par::set_workers(n);
    }
    let out = cfg.output_dir(cli.out.as_deref());
    if let Err(e) = std::fs::create_dir_all(&out) {
        return fail(EXIT_SOLVER, format!("{}: {e}", out.display()));
    }
    let threshold = cfg.tolerances.baseline_change;

    if let Command::Baseline { current } = &cli.command {
        let Some(reference) = &cli.baseline else {
            return fail(EXIT_USAGE, "baseline needs --baseline <reference summary>");
        };
        let current = match Summary::read(current) {
            Ok(s) => s,
            Err(e) => return fail(EXIT_USAGE, e),
        };
        return match check_baseline(reference, &current, threshold, &out) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(EXIT_CHECK),
            Err((code, msg)) => fail(code, msg),
        };
    }

    let name = cli.command.name();
    let mut summary = Summary::new(name, &cfg.experiment);
    let run = match &cli.command {
        Command::Solitary => experiments::solitary,
        Command::Evolve => experiments::evolve_wave,
        Command::DnCheck => experiments::dn_check,
        Command::Residual => experiments::residual,
        Command::Spectrum => experiments::spectrum,
        Command::Coercivity => experiments::coercivity,
        Command::Lingrow => experiments::lingrow,
        Command::Correct => experiments::correct,
        Command::Interaction => experiments::interaction,
        Command::Baseline { .. } => unreachable!(),
    };
    if let Err(e) = run(&cfg, &out, &mut summary) {
        return fail(error_code(&e), format!("{name}: {e}"));
    }
    if let Err(e) = summary.write(&out.join("summary.json")) {
        return fail(EXIT_SOLVER, e);
    }
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for (k, m) in summary.metrics.iter().filter(|(_, m)| !m.pass) {
        eprintln!("FAILED {k}: {:e} not {} {:e}", m.value, serde_json::to_value(m.relation).unwrap_or_default().as_str().unwrap_or("?"), m.tolerance);
    }
    println!("{name}: {} ({})", if summary.pass { "pass" } else { "FAIL" }, out.join("summary.json").display());
    let mut code = if summary.pass { 0 } else { EXIT_CHECK };
    if let Some(reference) = &cli.baseline {
        match check_baseline(reference, &summary, threshold, &out) {
            Ok(true) => {}
            Ok(false) => code = EXIT_CHECK,
            Err((c, msg)) => return fail(c, msg),
        }
    }
    ExitCode::from(code)
}
