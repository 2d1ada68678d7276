//! Extracts a ten-vertex map from the first scan of the bundled office log
//! and writes it next to an SVG overlay.
//!
//! ```text
//! cargo run --example extract_office -- [out-dir]
//! ```

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use ple::extraction::{extract, ExtractionConfig};
use ple::io::{parse_carmen_log, render_svg, CarmenOptions, MapFile, SvgStyle};
use ple::metrics::{f_value, mean_abs_residual, rmse};
use ple::sensor_model::ConstantVariance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/office.log");
    let log = parse_carmen_log(BufReader::new(File::open(path)?), &CarmenOptions::default())?;
    let scan = log.records[0].to_scan();
    println!("{} rays, {} reflected", scan.len(), scan.reflected_count());

    let config = ExtractionConfig::with_max_vertices(10);
    let result = extract(&scan, &config, &ConstantVariance::default())?;
    let map = &result.map;
    println!(
        "{} polylines, {} vertices after {} removals",
        map.polyline_count(),
        map.vertex_count(),
        result.removals
    );
    println!(
        "rmse {:.4} m, mean |d| {:.4} m, f {:.3}",
        rmse(&scan, map)?,
        mean_abs_residual(&scan, map)?,
        f_value(&scan, map)
    );

    std::fs::write(out_dir.join("office_map.json"), MapFile::from_map(map).to_json())?;
    std::fs::write(out_dir.join("office.svg"), render_svg(&scan, map, &SvgStyle::default()))?;
    println!("wrote office_map.json and office.svg to {}", out_dir.display());
    Ok(())
}
