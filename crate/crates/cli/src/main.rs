use std::path::PathBuf;
use std::process::ExitCode;

use ace_cli::commands::{self, EstimateArgs, LambdaChoice, SuiteArgs};
use ace_cli::CliResult;
use ace_core::simulate::{DgpConfig, NoiseSpec, Scale, Suite};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ace", version, about = "Cumulant-based treatment-effect estimation")]
struct Cli {
    /// Worker threads for Monte Carlo runs.
    #[arg(long, global = true, env = "ACE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Fig1,
    Correlation,
    Sparsity,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleName {
    Desk,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo scenario described by a JSON file.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the treatment effect from a CSV file with columns x1..xp,t,y.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed Lasso penalty.
        #[arg(long, conflicts_with = "cv")]
        lambda: Option<f64>,
        /// Choose the Lasso penalty by K-fold cross-validation.
        #[arg(long, value_name = "FOLDS", num_args = 0..=1, default_missing_value = "5")]
        cv: Option<usize>,
    },
    /// Write a synthetic demand-scenario dataset as CSV.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        p: usize,
        #[arg(long, default_value_t = 40)]
        s: usize,
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one of the preconfigured experiment suites.
    Papersuite {
        #[arg(long, value_enum)]
        suite: SuiteName,
        #[arg(long, value_enum, default_value = "desk")]
        scale: ScaleName,
        #[arg(long)]
        out: PathBuf,
        /// Override the number of replicates per grid point.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { scenario, out } => {
            let dir = commands::simulate(&scenario, out.as_deref(), cli.threads)?;
            eprintln!("wrote {}", dir.display());
        }
        Command::Estimate {
            data,
            order,
            level,
            seed,
            lambda,
            cv,
        } => {
            let lambda = match (lambda, cv) {
                (Some(l), _) => LambdaChoice::Fixed(l),
                (None, Some(k)) => LambdaChoice::CrossValidated(k),
                (None, None) => LambdaChoice::Theory,
            };
            let out = commands::estimate(&EstimateArgs {
                data,
                order,
                level,
                seed,
                lambda,
            })?;
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable output"));
        }
        Command::Generate { n, p, s, xi, seed, out } => {
            let config = DgpConfig {
                n,
                p,
                s,
                xi,
                seed,
                noise: NoiseSpec::DemandDiscrete,
                ..DgpConfig::demand(n)
            };
            commands::generate(&config, &out)?;
        }
        Command::Papersuite {
            suite,
            scale,
            out,
            reps,
            seed,
        } => {
            let args = SuiteArgs {
                suite: match suite {
                    SuiteName::Fig1 => Suite::Fig1,
                    SuiteName::Correlation => Suite::Correlation,
                    SuiteName::Sparsity => Suite::Sparsity,
                },
                scale: match scale {
                    ScaleName::Desk => Scale::Desk,
                    ScaleName::Full => Scale::Full,
                },
                reps,
                seed,
            };
            let path = commands::papersuite(&args, &out, cli.threads)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
