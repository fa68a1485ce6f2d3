//! `graphnls`: stationary NLS on metric graphs from the command line.

mod analysis;
mod args;
mod commands;
mod examples;
mod gnuplot;
mod output;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::{CliError, CliResult, Ctx};

#[derive(Debug, Parser)]
#[command(name = "graphnls", version, about = "Stationary NLS on metric graphs with Kirchhoff conditions")]
struct Cli {
    /// Output directory (default `graphnls-out`; `run` uses the config's).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the planned inputs and outputs without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Also write gnuplot scripts next to the CSV files.
    #[arg(long, global = true)]
    gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate or print graphs.
    #[command(subcommand)]
    Graph(commands::GraphCmd),
    /// Integrate the edge ODE with constant coefficients.
    Ode(commands::OdeArgs),
    /// Solve the stationary problem from a seed.
    Solve(commands::SolveArgs),
    /// Low eigenvalues of `-d²/dx² + W`.
    Spectrum(commands::SpectrumArgs),
    /// Morse index of a solution.
    Morse(commands::MorseArgs),
    /// Nodal zones of a solution.
    Nodal(commands::NodalArgs),
    /// Blow-up diagnostics for a family as `λ → ∞`.
    Blowup(analysis::BlowupArgs),
    /// Mass along a branch and its fitted rate.
    Massrate(analysis::MassrateArgs),
    /// Exponential decay rates away from the peaks.
    Decayfit(analysis::DecayfitArgs),
    /// Evaluate the comparison barrier.
    Barrier(analysis::BarrierArgs),
    /// Worked examples.
    #[command(subcommand)]
    Examples(examples::ExampleCmd),
    /// Run an experiment from a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GRAPHNLS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("GRAPHNLS_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new("threads", e.to_string()))
}

fn dispatch(cli: &Cli) -> CliResult {
    threads()?;
    let ctx = Ctx {
        out: cli.out.clone().unwrap_or_else(|| PathBuf::from("graphnls-out")),
        dry_run: cli.dry_run,
        gnuplot: cli.gnuplot,
    };
    match &cli.command {
        Command::Graph(c) => commands::graph(&ctx, c),
        Command::Ode(a) => commands::ode(&ctx, a),
        Command::Solve(a) => commands::solve(&ctx, a),
        Command::Spectrum(a) => commands::spectrum(&ctx, a),
        Command::Morse(a) => commands::morse(&ctx, a),
        Command::Nodal(a) => commands::nodal(&ctx, a),
        Command::Blowup(a) => analysis::blowup(&ctx, a),
        Command::Massrate(a) => analysis::massrate(&ctx, a),
        Command::Decayfit(a) => analysis::decayfit(&ctx, a),
        Command::Barrier(a) => analysis::barrier(&ctx, a),
        Command::Examples(c) => examples::examples(&ctx, c),
        Command::Run { config } => run::run(&ctx, config, cli.out.is_some()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let text = serde_json::to_string_pretty(&e.report()).expect("report serializes");
            let _ = writeln!(std::io::stderr().lock(), "{text}");
            ExitCode::from(u8::try_from(e.code).unwrap_or(1))
        }
    }
}
