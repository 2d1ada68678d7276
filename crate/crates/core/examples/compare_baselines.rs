//! Runs every method on one simulated room at the same vertex budget.

use std::time::Instant;

use ple::extraction::ExtractionConfig;
use ple::methods::{run_method, Method};
use ple::metrics::EvalReport;
use ple::optimization::OptimizerOptions;
use ple::sensor_model::ConstantVariance;
use ple::simulator::{simulate_case, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget: usize = std::env::args().nth(1).map_or(Ok(20), |s| s.parse())?;
    let case = simulate_case(&SimConfig::with_vertices(12), 5, 3)?;
    let config = ExtractionConfig::with_max_vertices(budget);

    println!("method  J    rmse [m]   f      a      time [ms]");
    for method in Method::ALL {
        let start = Instant::now();
        let map = run_method(
            method,
            &case.scan,
            &config,
            &ConstantVariance::default(),
            &OptimizerOptions::default(),
        )?;
        let elapsed = start.elapsed().as_secs_f64();
        let report = EvalReport::evaluate(
            &case.scan,
            &map,
            Some(case.truth.vertices()),
            ple::geometry::Point2::ORIGIN,
            elapsed,
        );
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<6} {:>3}   {:>8}   {:.3}  {:>6}  {:9.3}",
            method.name(),
            report.vertex_count,
            show(report.rmse),
            report.f_value,
            show(report.a_value),
            report.wall_time * 1e3
        );
    }
    Ok(())
}
