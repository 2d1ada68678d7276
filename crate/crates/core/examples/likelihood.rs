//! Scores candidate maps by the log-likelihood of a scan and shows that
//! removing vertices trades likelihood for memory.

use ple::extraction::{build_initial_map, Extractor, ExtractionConfig};
use ple::sensor_model::{scan_log_likelihood, ConstantVariance, MissPolicy};
use ple::simulator::{simulate_case, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = simulate_case(&SimConfig::with_vertices(5), 3, 1)?;
    let scan = &case.scan;
    let noise = ConstantVariance::from_std_dev(0.03)?;
    let policy = MissPolicy::Penalty(0.5);

    let initial = build_initial_map(scan, scan.max_range(), 1.0);
    let truth = case.truth.to_map();
    println!("initial map ({:3} vertices): {:10.1}", initial.vertex_count(), scan_log_likelihood(scan, &initial, &noise, policy));
    println!("ground truth ({:2} vertices): {:10.1}", truth.vertex_count(), scan_log_likelihood(scan, &truth, &noise, policy));

    let config = ExtractionConfig::with_max_vertices(5);
    let mut extractor = Extractor::new(scan, &config, &noise)?;
    let mut last = extractor.vertex_count();
    while let Some(step) = extractor.step() {
        let j = extractor.vertex_count();
        if j <= 12 && j != last {
            let (map, _) = extractor.map();
            println!(
                "J = {j:2}: removed ray {:3} ({:?}) at cost {:.3e}, log-likelihood {:10.1}",
                step.vertex,
                step.class,
                step.error,
                scan_log_likelihood(scan, &map, &noise, policy)
            );
        }
        last = j;
        if j <= config.max_vertices {
            break;
        }
    }
    Ok(())
}
