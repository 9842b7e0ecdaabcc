use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vikit::golden::{default_dir, list_golden};
use vikit::{run_scenario, ExitStatus, Overrides, RunOutcome};

/// Variational-inequality solvers and certificate checks for affine operators.
#[derive(Parser)]
#[command(name = "vikit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        /// Output directory for traces and reports.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario iteration budget.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Run several scenarios concurrently; exits with the most severe status.
    Batch {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// List bundled golden scenarios.
    ListGolden {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn summarize(path: &std::path::Path, outcome: &RunOutcome) {
    match &outcome.message {
        Some(msg) => eprintln!("{}: {msg}", path.display()),
        None => {
            if let Some(report) = &outcome.report {
                for t in &report.tasks {
                    println!("{} {} {:?}", report.scenario, t.task.name(), t.outcome);
                }
            }
        }
    }
    for w in &outcome.written {
        println!("wrote {}", w.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            max_iters,
        } => {
            let outcome = run_scenario(&scenario, &out, Overrides { seed, max_iters });
            summarize(&scenario, &outcome);
            outcome.exit
        }
        Command::Batch {
            scenarios,
            out,
            seed,
            max_iters,
        } => {
            let overrides = Overrides { seed, max_iters };
            let outcomes: Vec<RunOutcome> = std::thread::scope(|s| {
                let handles: Vec<_> = scenarios
                    .iter()
                    .map(|p| {
                        let out = &out;
                        s.spawn(move || run_scenario(p, out, overrides))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("scenario thread panicked"))
                    .collect()
            });
            let mut exit = ExitStatus::Success;
            for (path, outcome) in scenarios.iter().zip(&outcomes) {
                summarize(path, outcome);
                exit = exit.worst(outcome.exit);
            }
            exit
        }
        Command::ListGolden { dir } => match list_golden(&dir.unwrap_or_else(default_dir)) {
            Ok(entries) => {
                for e in entries {
                    println!("{}\t{}", e.name, e.description);
                }
                ExitStatus::Success
            }
            Err(e) => {
                eprintln!("{e}");
                ExitStatus::Failed
            }
        },
    };
    ExitCode::from(status.code() as u8)
}
