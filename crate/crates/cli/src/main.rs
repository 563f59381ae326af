//! Experiment runner: executes a seeded scenario matrix described by a TOML
//! config and recomputes normalised summary tables from the artifacts.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use amsim::plan::{run_plan, summarize_dir, summary_table_csv, PlanConfig};

#[derive(Parser)]
#[command(name = "amsim", version, about = "Self-tuning overlay and store-client experiment lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of the configured experiment matrix.
    Run {
        /// TOML experiment plan.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for per-run artifacts.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed given in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rebuild the normalised summary table from a run directory.
    Summarize {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, seed } => {
            let mut plan = PlanConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(seed) = seed {
                plan.seed = seed;
            }
            let runs = run_plan(&plan, &out).context("running plan")?;
            let executed = runs.iter().filter(|r| !r.skipped).count();
            let skipped = runs.len() - executed;
            for run in &runs {
                println!(
                    "{} rep{} {}",
                    run.cell,
                    run.rep,
                    if run.skipped { "skipped (complete)" } else { "done" }
                );
            }
            let rows = summarize_dir(&out).context("summarising artifacts")?;
            let table = summary_table_csv(&rows);
            std::fs::write(out.join("summary.csv"), &table)
                .context("writing summary.csv")?;
            println!("{executed} runs executed, {skipped} skipped");
            print!("{table}");
            Ok(())
        }
        Command::Summarize { dir } => {
            if !dir.is_dir() {
                bail!("{} is not a directory", dir.display());
            }
            let rows = summarize_dir(&dir)?;
            print!("{}", summary_table_csv(&rows));
            Ok(())
        }
    }
}
