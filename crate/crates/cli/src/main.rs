use bnslab_cli::drivers;
use bnslab_core::fieldio::RunConfig;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bnslab",
    about = "Spectral laboratory for critical-Besov Navier-Stokes calculus: \
             verification suite and experiment drivers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the run-configuration JSON.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for the scenario ensembles.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker-pool degree; falls back to BNSLAB_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full invariant suite; exit status 0 iff every check passes.
    Verify,
    /// Build a Picard bundle and emit its norm tables.
    Picard,
    /// T-sweep of the forcing-tensor space-time law.
    Decay,
    /// N-sweep of the initial-data splitting with certificates.
    Split,
    /// Norm calculus tables for one seeded field.
    Norms,
    /// Mild solver with the amplitude-doubling convergence bracket.
    Solve,
}

impl Command {
    fn scenario(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Picard => "picard",
            Command::Decay => "decay",
            Command::Split => "split",
            Command::Norms => "norms",
            Command::Solve => "solve",
        }
    }
}

fn default_config(scenario: &str) -> RunConfig {
    RunConfig {
        grid: bnslab_core::fieldio::GridConfig {
            n: 32,
            box_len: 2.0 * std::f64::consts::PI,
        },
        scenario: scenario.to_string(),
        params: Default::default(),
        out_dir: None,
        seed: None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("BNSLAB_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }

    let mut config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("usage error: {e}");
                return ExitCode::from(2);
            }
        },
        None => default_config(cli.command.scenario()),
    };
    if config.scenario != cli.command.scenario() {
        eprintln!(
            "usage error: config names scenario '{}' but the subcommand is '{}'",
            config.scenario,
            cli.command.scenario()
        );
        return ExitCode::from(2);
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }

    let output = match drivers::dispatch(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    output.report.print_lines();
    let out_dir = cli.out.as_ref().and_then(|p| p.to_str());
    match drivers::emit(&config, &output, out_dir) {
        Ok(dir) => {
            println!(
                "{}: {} ({} checks) -> {}",
                output.report.scenario,
                if output.report.pass { "PASS" } else { "FAIL" },
                output.report.checks.len(),
                dir.display()
            );
        }
        Err(e) => {
            eprintln!("error writing artifacts: {e}");
            return ExitCode::from(2);
        }
    }
    if output.report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
