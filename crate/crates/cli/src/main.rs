use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;

#[derive(Parser, Debug)]
#[command(name = "bellshare", version, about = "Sequential CHSH nonlocality with unsharp qubit measurements")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Random seed; overrides the seed in --config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel evaluation.
    #[arg(long, global = true, env = "BELLSHARE_WORKERS")]
    pub workers: Option<usize>,
    /// JSON file with solver settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; a run manifest is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Allowed excess over the classical bound 2 before a sweep fails.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub tolerance: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate CHSH values and proxies for a scenario file.
    Eval {
        scenario: PathBuf,
    },
    /// Maximise a second-round proxy under a first-round constraint, over a grid of levels.
    Sweep(commands::SweepArgs),
    /// Print the threshold constants of biased measurement selection.
    Thresholds,
    /// Sample random scenarios and check the monogamy relations.
    VerifyBounds(commands::VerifyArgs),
    /// Scan strengths for the window where all four pairs violate CHSH.
    BiasedWindow(commands::WindowArgs),
    /// Compare the Bloch-map update with the explicit measurement channel.
    OracleCheck {
        #[arg(long, default_value_t = 10_000)]
        n: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Eval { scenario } => commands::eval(g, scenario),
        Command::Sweep(a) => commands::sweep(g, a),
        Command::Thresholds => commands::thresholds(g),
        Command::VerifyBounds(a) => commands::verify_bounds(g, a),
        Command::BiasedWindow(a) => commands::biased_window(g, a),
        Command::OracleCheck { n } => commands::oracle_check(g, *n),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
