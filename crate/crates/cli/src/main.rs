use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tanfix_cli::error::EXIT_CONFIG;
use tanfix_cli::{cmd_center, cmd_run, cmd_verify_mapping, cmd_verify_space, Overrides};

#[derive(Parser)]
#[command(name = "tanfix", version, about = "Common fixed point iterations on geodesic spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the iteration, write the trace CSV and a summary report.
    Run(Common),
    /// Check space axioms or mapping constants.
    Verify {
        #[command(subcommand)]
        target: Target,
    },
    /// Asymptotic center and Δ verdict of a stored trace.
    Center {
        /// Trace CSV written by `run`.
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum Target {
    /// Metric, convexity and uniform convexity checks.
    Space(Common),
    /// TAN defect sweep and constant estimates for each mapping.
    Mapping(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for relative output paths.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the schedule and verification seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sampling and center searches.
    #[arg(long)]
    jobs: Option<usize>,
    /// Record the intermediate points of each step in the trace.
    #[arg(long)]
    trace_intermediates: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            trace_intermediates: self.trace_intermediates,
            out: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Run(c) | Command::Center { common: c, .. } => c,
        Command::Verify {
            target: Target::Space(c) | Target::Mapping(c),
        } => c,
    };
    if let Some(jobs) = common.jobs {
        if jobs == 0
            || rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global()
                .is_err()
        {
            eprintln!("configuration error: --jobs must be a positive thread count");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let result = match &cli.command {
        Command::Run(c) => cmd_run(&c.config, c.overrides()),
        Command::Verify {
            target: Target::Space(c),
        } => cmd_verify_space(&c.config, c.overrides()),
        Command::Verify {
            target: Target::Mapping(c),
        } => cmd_verify_mapping(&c.config, c.overrides()),
        Command::Center { trace, common: c } => cmd_center(trace, &c.config, c.overrides()),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
