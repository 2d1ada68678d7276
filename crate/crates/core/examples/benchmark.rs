//! Benchmarks all methods on a simulated corpus and prints the summary
//! table; the per-scan rows go to `bench.csv`.
//!
//! ```text
//! PLE_THREADS=4 cargo run --release --example benchmark -- [scans]
//! ```

use std::fs::File;

use ple::bench::{format_summary, run_bench, summarize, write_csv, BenchCase, BenchConfig};
use ple::geometry::Point2;
use ple::simulator::{corpus, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: usize = std::env::args().nth(1).map_or(Ok(21), |s| s.parse())?;
    let cases: Vec<BenchCase> = corpus(&SimConfig::default(), count, 7)?
        .into_iter()
        .enumerate()
        .map(|(i, c)| BenchCase {
            id: format!("sim_{i:04}"),
            truth: Some(c.truth.vertices().to_vec()),
            scan: c.scan,
            sensor: Point2::ORIGIN,
        })
        .collect();

    let rows = run_bench(&cases, &BenchConfig::default())?;
    write_csv(&rows, true, File::create("bench.csv")?)?;
    print!("{}", format_summary(&summarize(&rows)));
    Ok(())
}
