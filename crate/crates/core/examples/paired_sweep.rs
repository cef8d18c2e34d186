//! Mining on vs off across a range of seeds, with the CSV on stdout and the
//! summary on stderr.
//!
//!     cargo run --release --example paired_sweep [seeds] > runs.csv

use corrdisc::experiment::{run_experiment, write_csv_to, write_summary, ExperimentSpec};
use corrdisc::netsim::SimConfig;

fn main() -> anyhow::Result<()> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(10);
    let spec = ExperimentSpec::new(SimConfig::new(20, 10), (1..=seeds).collect());
    let rows = run_experiment(&spec);
    write_csv_to(&rows, std::io::stdout().lock())?;
    write_summary(&rows, std::io::stderr().lock())?;
    Ok(())
}
