//! Generates a small simulated corpus and prints its statistics: polygon
//! sizes, reflected rays and the largest gap between neighboring endpoints.

use ple::simulator::{corpus, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = corpus(&SimConfig::default(), 14, 42)?;
    for (i, case) in cases.iter().enumerate() {
        let rays = case.scan.rays();
        let gap = (0..rays.len())
            .map(|k| rays[k].end().distance(rays[(k + 1) % rays.len()].end()))
            .fold(0.0, f64::max);
        let noise: f64 = rays
            .iter()
            .zip(&case.true_ranges)
            .map(|(r, t)| (r.range() - t).powi(2))
            .sum::<f64>()
            / rays.len() as f64;
        println!(
            "#{i:02}  n = {:3}  area {:6.1} m²  rays {}  max gap {:.2} m  range noise {:.4} m",
            case.truth.vertices().len(),
            case.truth.area(),
            case.scan.reflected_count(),
            gap,
            noise.sqrt()
        );
    }
    Ok(())
}
