use std::fs;
use std::io;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use corrdisc::experiment::{parse_config, run_experiment_with, write_csv, write_summary};
use corrdisc::mining::{mine_frequent_itemsets, parse_transactions, SupportThreshold};
use corrdisc::netsim::{stream_rng, Stream};
use corrdisc::workload::build_correlation_matrix;

#[derive(Parser)]
#[command(
    name = "corrdisc",
    version,
    about = "MANET service discovery with mined reply piggybacking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a paired mining-on / mining-off sweep described by a config file.
    Run {
        config: PathBuf,
        /// CSV destination (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 picks one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Write one event trace per run into this directory.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Mine frequent itemsets from a transaction file.
    Mine { transactions: PathBuf, support: f64 },
    /// Print the correlation matrix a run with this seed would use.
    GenCm { n: usize, seed: u64 },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CORRDISC_LOG")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            jobs,
            trace,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let spec = parse_config(&text).with_context(|| format!("in {}", config.display()))?;
            let out = out.or_else(|| spec.output.clone());
            let sweep = run_experiment_with(&spec, jobs, trace.is_some());
            if let Some(dir) = trace {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                for (row, lines) in sweep.rows.iter().zip(&sweep.traces) {
                    let path = dir.join(format!("seed-{}-{}.trace", row.seed, row.variant));
                    let mut body = lines.as_deref().unwrap_or_default().join("\n");
                    body.push('\n');
                    fs::write(&path, body)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            }
            match out {
                Some(path) => write_csv(&sweep.rows, &path)?,
                None => corrdisc::experiment::write_csv_to(&sweep.rows, io::stdout().lock())?,
            }
            write_summary(&sweep.rows, io::stderr().lock())?;
        }
        Command::Mine {
            transactions,
            support,
        } => {
            let support = SupportThreshold::new(support)?;
            let text = fs::read_to_string(&transactions)
                .with_context(|| format!("reading {}", transactions.display()))?;
            let txns = parse_transactions(&text)?;
            for set in mine_frequent_itemsets(&txns, support) {
                println!("{set}");
            }
        }
        Command::GenCm { n, seed } => {
            if n == 0 || n > usize::from(u16::MAX) {
                bail!("n must be in 1..=65535");
            }
            let cm = build_correlation_matrix(n, &mut stream_rng(seed, Stream::Correlation));
            print!("{}", cm.dump());
        }
    }
    Ok(())
}
