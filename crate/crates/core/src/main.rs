use std::path::PathBuf;
use std::process::ExitCode;

use adaptive_fv::config::{load_config, parse_override};
use adaptive_fv::exec::ExecMode;
use adaptive_fv::runner::{read_sweep, run, run_batch, Job};
use adaptive_fv::Result;
use clap::{Parser, Subcommand};

/// Adaptive moving-mesh finite volume solver for 1D scalar conservation laws.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write summary.csv, snapshots/ and run_meta.txt.
    Run {
        config: PathBuf,
        /// Configuration overrides, `--key=value` (e.g. `--n_cells=400`).
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Validate a configuration without running it.
    Check {
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Run every configuration listed in a sweep file as independent runs.
    Sweep {
        file: PathBuf,
        /// Run the jobs one after another.
        #[arg(long)]
        sequential: bool,
    },
}

fn overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    args.iter()
        .map(|a| {
            let (k, v) = parse_override(a)?;
            // `--output-dir` is accepted as a spelling of `output_dir`
            Ok((k.replace('-', "_"), v))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            overrides: o,
        } => overrides(&o)
            .and_then(|o| Job::load(&config, &o))
            .and_then(|job| run(&job.config, &job.output_dir))
            .map(|s| {
                let note = if s.truncated {
                    " (stopped at max_steps)"
                } else {
                    ""
                };
                println!(
                    "{} steps, t = {}{note}; output in {}",
                    s.steps,
                    s.t_final,
                    s.output_dir.display()
                );
                true
            }),
        Command::Check {
            config,
            overrides: o,
        } => overrides(&o)
            .and_then(|o| load_config(&config, &o))
            .map(|c| {
                print!("{}", c.to_text());
                true
            }),
        Command::Sweep { file, sequential } => read_sweep(&file).and_then(|paths| {
            let jobs = paths
                .iter()
                .map(|p| Job::load(p, &[]))
                .collect::<Result<Vec<_>>>()?;
            let mode = if sequential {
                ExecMode::Sequential
            } else {
                ExecMode::Parallel
            };
            let mut ok = true;
            for (job, res) in jobs.iter().zip(run_batch(&jobs, mode)) {
                match res {
                    Ok(s) => println!(
                        "{}: {} steps, t = {}",
                        job.output_dir.display(),
                        s.steps,
                        s.t_final
                    ),
                    Err(e) => {
                        eprintln!("{}: error: {e}", job.output_dir.display());
                        ok = false;
                    }
                }
            }
            Ok(ok)
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
