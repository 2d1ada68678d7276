use approx::assert_relative_eq;
use ple::baselines::{cluster_endpoints, ief, visvalingam};
use ple::extraction::{build_initial_map, extract, ExtractionConfig};
use ple::geometry::{Point2, Polyline, PolylineMap, Ray};
use ple::io::MapFile;
use ple::metrics::{a_value, f_value, rmse};
use ple::optimization::{optimize, OptimizerOptions};
use ple::scan::Scan;
use ple::sensor_model::ConstantVariance;
use ple::simulator::{random_polygon, simulate_case, SimConfig, CORPUS_VERTEX_COUNTS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Scan of `n` rays over a full turn with ranges taken from `ranges`.
fn fan(ranges: &[f64]) -> Scan {
    let n = ranges.len();
    let rays = ranges
        .iter()
        .enumerate()
        .map(|(i, &r)| Ray::from_polar(Point2::ORIGIN, i as f64 * TAU / n as f64, r, false).unwrap())
        .collect();
    Scan::new(rays, 30.0, true)
}

fn small_case(n_index: usize, seed: u64) -> ple::simulator::SimCase {
    let config = SimConfig {
        ray_count: 90,
        ..SimConfig::with_vertices(CORPUS_VERTEX_COUNTS[n_index])
    };
    simulate_case(&config, seed, 0).unwrap()
}

fn vertex_set(map: &PolylineMap) -> Vec<(u64, u64)> {
    map.vertices().map(|p| (p.x.to_bits(), p.y.to_bits())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rmse_ignores_ray_order(ranges in prop::collection::vec(1.0f64..6.0, 6..40), rot in 0usize..40) {
        let scan = fan(&ranges);
        let map = build_initial_map(&scan, 30.0, 100.0);
        let mut rays = scan.rays().to_vec();
        let k = rot % rays.len();
        rays.rotate_left(k);
        rays.reverse();
        let shuffled = Scan::new(rays, 30.0, true);
        assert_relative_eq!(rmse(&scan, &map).unwrap(), rmse(&shuffled, &map).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn a_value_is_rotation_invariant(seed in any::<u64>(), n in 3usize..10, angle in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = random_polygon(&SimConfig::with_vertices(n), &mut rng).unwrap().vertices().to_vec();
        let est = random_polygon(&SimConfig::with_vertices(n + 2), &mut rng).unwrap().vertices().to_vec();
        let as_map = |v: Vec<Point2>| PolylineMap::new(vec![Polyline::closed(v).unwrap()]).unwrap();
        let a = a_value(&as_map(est.clone()), &truth, Point2::ORIGIN).unwrap();
        let rotated_truth: Vec<Point2> = truth.iter().map(|p| p.rotated(angle)).collect();
        let rotated_est: Vec<Point2> = est.iter().map(|p| p.rotated(angle)).collect();
        let b = a_value(&as_map(rotated_est), &rotated_truth, Point2::ORIGIN).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12);
        let same = a_value(&as_map(truth.clone()), &truth, Point2::ORIGIN).unwrap();
        prop_assert!(same.abs() < 1e-12);
    }

    #[test]
    fn extraction_keeps_scan_endpoints(n_index in 0usize..6, seed in 0u64..1000, budget in 3usize..30) {
        let case = small_case(n_index, seed);
        let initial = build_initial_map(&case.scan, 30.0, 1.0);
        let map = extract(&case.scan, &ExtractionConfig::with_max_vertices(budget), &ConstantVariance::default())
            .unwrap()
            .map;
        prop_assert!(map.vertex_count() <= budget.max(3));
        let all = vertex_set(&initial);
        prop_assert!(vertex_set(&map).iter().all(|v| all.contains(v)));
    }

    #[test]
    fn baselines_pick_scan_endpoints(n_index in 0usize..6, seed in 0u64..1000, budget in 2usize..30) {
        let case = small_case(n_index, seed);
        let initial = build_initial_map(&case.scan, 30.0, 1.0);
        let all = vertex_set(&initial);
        let simplified = visvalingam(&initial, budget);
        // A closed polygon keeps at least three vertices.
        prop_assert!(simplified.vertex_count() <= budget.max(3));
        prop_assert!(vertex_set(&simplified).iter().all(|v| all.contains(v)));
        let fitted = ief(&cluster_endpoints(&case.scan, 30.0, 1.0), budget);
        prop_assert!(fitted.vertex_count() <= budget);
        prop_assert!(vertex_set(&fitted).iter().all(|v| all.contains(v)));
    }

    #[test]
    fn optimize_never_worsens(n_index in 0usize..5, seed in 0u64..1000, budget in 3usize..12) {
        let case = small_case(n_index, seed);
        let noise = ConstantVariance::default();
        let map = extract(&case.scan, &ExtractionConfig::with_max_vertices(budget), &noise).unwrap().map;
        let out = optimize(&map, &case.scan, &noise, &OptimizerOptions::default()).unwrap();
        prop_assert!(rmse(&case.scan, &out.map).unwrap() <= rmse(&case.scan, &map).unwrap());
        prop_assert_eq!(f_value(&case.scan, &out.map), f_value(&case.scan, &map));
        prop_assert_eq!(out.map.vertex_count(), map.vertex_count());
    }

    #[test]
    fn map_json_round_trip_is_exact(coords in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..12), closed in any::<bool>()) {
        let vertices: Vec<Point2> = coords.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let line = Polyline::new(vertices, closed);
        prop_assume!(line.is_ok());
        let map = PolylineMap::new(vec![line.unwrap()]).unwrap();
        let back = MapFile::from_json(&MapFile::from_map(&map).to_json()).unwrap().to_map().unwrap();
        prop_assert_eq!(back, map);
    }
}
