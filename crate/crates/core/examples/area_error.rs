//! Area error between an extracted map and the ground-truth room, for a
//! range of vertex budgets. The error is undefined ("-") when the polar
//! polygon of the map leaves an angular gap of half a turn or more around
//! the sensor.

use ple::extraction::{extract, ExtractionConfig};
use ple::geometry::Point2;
use ple::metrics::a_value;
use ple::optimization::{optimize, OptimizerOptions};
use ple::sensor_model::ConstantVariance;
use ple::simulator::{simulate_case, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = simulate_case(&SimConfig::with_vertices(36), 8, 2)?;
    let noise = ConstantVariance::default();
    println!(" J    a(PLE)    a(PLE+)");
    for j in [6, 10, 20, 36, 50] {
        let map = extract(&case.scan, &ExtractionConfig::with_max_vertices(j), &noise)?.map;
        let refined = optimize(&map, &case.scan, &noise, &OptimizerOptions::default())?.map;
        let a = |m| match a_value(m, case.truth.vertices(), Point2::ORIGIN) {
            Ok(a) => format!("{a:.5}"),
            Err(_) => "-".into(),
        };
        println!("{j:2}   {:>7}   {:>7}", a(&map), a(&refined));
    }
    Ok(())
}
