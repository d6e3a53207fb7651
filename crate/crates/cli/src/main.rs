use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coinv_cli::{cmd_invert, cmd_pipeline, cmd_synth, cmd_validate, exit_code, CommandError, Which};

/// Phaseless co-inversion of an acoustic obstacle and its point sources.
#[derive(Debug, Parser)]
#[command(name = "coinv", version)]
struct Cli {
    /// Worker threads for solves and grid sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the phaseless dataset described by a config.
    Synth {
        #[arg(long)]
        config: PathBuf,
        /// Dataset path (default: <out>/dataset.txt).
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides noise.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Image sources and/or the obstacle from a dataset file.
    Invert {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        which: Which,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize and invert in one run.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        which: Which,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in oracle checks.
    Validate {
        /// Node count for the circle comparisons (a low value demonstrates failure).
        #[arg(long)]
        circle_nodes: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Synth {
            config,
            dataset,
            out: dir,
            seed,
        } => cmd_synth(&config, seed, dir.as_deref(), dataset.as_deref(), &mut out).map(drop),
        Command::Invert {
            dataset,
            config,
            which,
            out: dir,
        } => cmd_invert(&dataset, &config, which, dir.as_deref(), &mut out).map(drop),
        Command::Pipeline {
            config,
            which,
            out: dir,
            seed,
        } => cmd_pipeline(&config, seed, which, dir.as_deref(), &mut out).map(drop),
        Command::Validate { circle_nodes } => cmd_validate(circle_nodes, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(coinv_cli::EXIT_CONFIG);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
