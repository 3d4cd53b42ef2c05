use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fedkrum_core::harness::{self, metrics};
use fedkrum_core::oracle;

#[derive(Parser)]
#[command(
    name = "fedkrum",
    version,
    about = "Byzantine-robust federated learning simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize metrics CSVs into one table (markdown, or CSV if the output
    /// name ends in `.csv`).
    Compare {
        #[arg(required = true)]
        csvs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the fast implementations against brute-force references.
    Oracle {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn run(config: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let cfg = harness::parse_config(&config)?;
    let dir = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(cfg.aggregator().name()));
    let record = harness::run_experiment(cfg)?;
    let csv = metrics::write_run_dir(&record, &dir)?;
    match record.summary.final_mean_accuracy {
        Some(acc) => println!("final-10 mean accuracy {:.4}", acc),
        None => println!("initial accuracy {:.4}", record.summary.initial.accuracy),
    }
    println!("metrics written to {}", csv.display());
    Ok(())
}

fn compare(csvs: Vec<PathBuf>, out: PathBuf) -> Result<()> {
    let rows = csvs
        .iter()
        .map(metrics::summarize_csv)
        .collect::<Result<Vec<_>, _>>()?;
    let table = if out.extension().is_some_and(|e| e == "csv") {
        metrics::comparison_csv(&rows)
    } else {
        metrics::comparison_markdown(&rows)
    };
    fs::write(&out, &table).with_context(|| format!("writing {}", out.display()))?;
    print!("{table}");
    Ok(())
}

fn verify(seed: u64) -> Result<()> {
    let reports = oracle::run_all(seed);
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {} ({} cases, {} failures) {}",
            r.name, r.cases, r.failures, r.detail
        );
    }
    if reports.iter().any(|r| !r.passed()) {
        bail!("oracle mismatch");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Compare { csvs, out } => compare(csvs, out),
        Command::Oracle { seed } => verify(seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
