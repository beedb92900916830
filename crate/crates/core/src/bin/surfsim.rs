use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use surfsim::config::parse_and_validate;
use surfsim::output::{replay_to_dir, run_to_dir};
use surfsim::sweep::{self, SweepSpec};

/// Cognitive radio channel-selection and dissemination simulator.
#[derive(Parser)]
#[command(name = "surfsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded simulation and write metric CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write trace.log and topology.txt.
        #[arg(long)]
        emit_trace: bool,
    },
    /// Run the cross product of a sweep spec and write per-run and summary CSVs.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep spec JSON (parameters and seeds).
        #[arg(long)]
        spec: PathBuf,
        /// Replaces the spec's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
        /// Also write one trace log per run under traces/.
        #[arg(long)]
        emit_trace: bool,
    },
    /// Check a config and print it with every default filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute metric CSVs from a saved trace log.
    TraceReplay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            emit_trace,
        } => {
            let cfg = parse_and_validate(&read(&config)?)?;
            let seed = seed.unwrap_or(cfg.seed);
            let r = run_to_dir(&cfg, seed, &out, emit_trace)?;
            println!(
                "{} seed={} final_fraction={:.4} mean_delivery={:.4}",
                r.report.strategy,
                seed,
                r.report.final_fraction(),
                r.report.mean_delivery()
            );
        }
        Command::Sweep {
            config,
            spec,
            seed,
            out,
            workers,
            emit_trace,
        } => {
            let mut spec = SweepSpec::parse(&read(&spec)?)?;
            if let Some(s) = seed {
                spec.seeds = Some(sweep::SeedSpec::List(vec![s]));
            }
            let plan = sweep::plan(&read(&config)?, &spec)?;
            let workers = workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let outcome = sweep::execute(&plan, workers, emit_trace)?;
            sweep::write_outputs(&out, &plan, &outcome)?;
            for s in &outcome.summaries {
                let a = &s.aggregate;
                println!(
                    "cell {} {} Ch={} N={} runs={} final_fraction={:.4}±{:.4}",
                    s.cell, a.strategy, a.channels, a.nodes, a.count, a.final_fraction.mean, a.final_fraction.std
                );
            }
        }
        Command::Validate { config } => {
            let cfg = parse_and_validate(&read(&config)?)?;
            println!("{}", cfg.to_json());
        }
        Command::TraceReplay { trace, out } => {
            let r = replay_to_dir(&read(&trace)?, &out)?;
            println!(
                "{} seed={} final_fraction={:.4} mean_delivery={:.4}",
                r.report.strategy,
                r.report.seed,
                r.report.final_fraction(),
                r.report.mean_delivery()
            );
        }
    }
    Ok(())
}
