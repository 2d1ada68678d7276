//! Refines an extracted map by direct search on the vertex coordinates and
//! shows how much the residuals shrink.

use ple::extraction::{extract, ExtractionConfig};
use ple::metrics::{f_value, rmse};
use ple::optimization::{optimize, OptimizerOptions, VertexParameterization};
use ple::sensor_model::ConstantVariance;
use ple::simulator::{simulate_case, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = simulate_case(&SimConfig::with_vertices(6), 11, 0)?;
    let noise = ConstantVariance::default();
    let extracted = extract(&case.scan, &ExtractionConfig::with_max_vertices(8), &noise)?.map;

    let param = VertexParameterization::new(&extracted, &case.scan)?;
    println!(
        "{} vertices in {} polylines -> {} search coordinates",
        extracted.vertex_count(),
        extracted.polyline_count(),
        param.dimension()
    );

    let refined = optimize(&extracted, &case.scan, &noise, &OptimizerOptions::default())?;
    let r = &refined.report;
    println!(
        "objective {:.6} -> {:.6} in {} evaluations, {} polishing sweeps",
        r.initial_objective, r.final_objective, r.evaluations, r.sweeps
    );
    println!(
        "rmse {:.4} -> {:.4} m, f {:.3} -> {:.3}",
        rmse(&case.scan, &extracted)?,
        rmse(&case.scan, &refined.map)?,
        f_value(&case.scan, &extracted),
        f_value(&case.scan, &refined.map)
    );
    for (a, b) in extracted.vertices().zip(refined.map.vertices()) {
        println!("  ({:7.3}, {:7.3}) -> ({:7.3}, {:7.3})", a.x, a.y, b.x, b.y);
    }
    Ok(())
}
