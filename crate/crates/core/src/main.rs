//! Command-line front end. Exit codes: 0 on success, 1 on verification
//! failure, 2 on input or configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use krein_lab::commands::{self, CommandOutput};
use krein_lab::config::ExperimentConfig;
use krein_lab::error::Result;
use krein_lab::parallel;

#[derive(Parser)]
#[command(name = "krein-lab", version, about = "Self-adjoint extensions of elliptic operators from boundary forms")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for CSV/JSON/SVG artifacts (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for grid sweeps and convergence ladders.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the configured boundary form (Markov, recurrence).
    Classify,
    /// Run the verification battery on the configured extension.
    Verify {
        /// Require the named check to fail instead of pass.
        #[arg(long, value_name = "CHECK")]
        expect_fail: Option<String>,
    },
    /// Grid-refinement study against interval closed forms.
    Convergence {
        /// Also emit a log-log error plot.
        #[arg(long)]
        svg: bool,
    },
    /// Classify over a parameter grid from the config's sweep axes.
    Sweep,
    /// Eigenvalues of the extension generator.
    Spectrum,
    /// Evolve the constant state and emit snapshots.
    Evolve {
        /// Also emit a snapshot plot.
        #[arg(long)]
        svg: bool,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| krein_lab::error::Error::config("--config PATH is required"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<CommandOutput> {
    if let Some(jobs) = cli.jobs {
        parallel::set_jobs(jobs);
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Classify => commands::cmd_classify(&cfg),
        Command::Verify { expect_fail } => commands::cmd_verify(&cfg, expect_fail.as_deref()),
        Command::Convergence { svg } => commands::cmd_convergence(&cfg, *svg),
        Command::Sweep => commands::cmd_sweep(&cfg),
        Command::Spectrum => commands::cmd_spectrum(&cfg),
        Command::Evolve { svg } => commands::cmd_evolve(&cfg, *svg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if let Some(dir) = &cli.out {
                if let Err(e) = std::fs::create_dir_all(dir) {
                    eprintln!("error: cannot create {}: {e}", dir.display());
                    return ExitCode::from(2);
                }
                for (name, contents) in &out.files {
                    let path = dir.join(name);
                    if let Err(e) = std::fs::write(&path, contents) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                    eprintln!("wrote {}", path.display());
                }
            }
            ExitCode::from(u8::try_from(out.exit_code).unwrap_or(1))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
