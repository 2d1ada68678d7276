use super::*;
use crate::geometry::{first_intersection_distance, Polyline, Ray};
use crate::sensor_model::{ConstantVariance, PerRayVariance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

fn ray_to(x: f64, y: f64) -> Ray {
    Ray::new(Point2::ORIGIN, Point2::new(x, y), false).unwrap()
}

/// Rays on a fan from the origin with random-walk ranges, jumps and
/// occasional max-range readings.
fn random_scan(rng: &mut ChaCha8Rng, n: usize, full: bool) -> Scan {
    let span = if full { TAU } else { PI };
    let mut r: f64 = rng.random_range(1.5..5.0);
    let rays = (0..n)
        .map(|i| {
            let bearing = i as f64 * span / n as f64;
            if rng.random_bool(0.08) {
                return Ray::from_polar(Point2::ORIGIN, bearing, 30.0, true).unwrap();
            }
            if rng.random_bool(0.1) {
                r = rng.random_range(1.5..5.0);
            } else {
                r = (r + rng.random_range(-0.3..0.3)).clamp(1.5, 5.0);
            }
            Ray::from_polar(Point2::ORIGIN, bearing, r, false).unwrap()
        })
        .collect();
    Scan::new(rays, 30.0, full)
}

/// Map without the given vertex, and whether a segment was dropped from an
/// open end.
fn remove_from_map(map: &PolylineMap, at: VertexRef) -> (PolylineMap, bool) {
    let mut lines: Vec<Polyline> = map.polylines().to_vec();
    let line = &lines[at.polyline];
    let closed = line.is_closed();
    let mut vs = line.vertices().to_vec();
    let drops;
    if !closed && vs.len() == 2 {
        lines.remove(at.polyline);
        drops = true;
    } else {
        drops = !closed && (at.index == 0 || at.index + 1 == vs.len());
        vs.remove(at.index);
        lines[at.polyline] = Polyline::new(vs, closed).unwrap();
    }
    (PolylineMap::new(lines).unwrap(), drops)
}

/// Difference of full per-ray cost sums before and after the removal.
fn oracle_error(
    map: &PolylineMap,
    at: VertexRef,
    scan: &Scan,
    noise: &dyn NoiseModel,
    d_rm: f64,
) -> f64 {
    let (after, drops) = remove_from_map(map, at);
    let cost = |r: f64, t: Option<f64>| t.map_or(d_rm * d_rm, |t| (r - t) * (r - t));
    let before_sum: f64 = scan
        .reflected()
        .map(|(k, ray)| cost(ray.range(), first_intersection_distance(ray, map)) / noise.variance(k, ray))
        .sum();
    let after_sum: f64 = scan
        .reflected()
        .map(|(k, ray)| {
            let old = first_intersection_distance(ray, map);
            let new = first_intersection_distance(ray, &after);
            let c = if drops && new != old {
                d_rm * d_rm
            } else {
                cost(ray.range(), new)
            };
            c / noise.variance(k, ray)
        })
        .sum();
    after_sum - before_sum
}

fn removable(map: &PolylineMap) -> Vec<VertexRef> {
    let mut out = Vec::new();
    for (li, line) in map.polylines().iter().enumerate() {
        if line.is_closed() && line.len() <= 3 {
            continue;
        }
        out.extend((0..line.len()).map(|i| VertexRef::new(li, i)));
    }
    out
}

fn noiseless_square(per_edge: usize) -> Scan {
    let corners = [
        Point2::new(2.0, -2.0),
        Point2::new(2.0, 2.0),
        Point2::new(-2.0, 2.0),
        Point2::new(-2.0, -2.0),
    ];
    let mut rays = Vec::new();
    for c in 0..4 {
        let (a, b) = (corners[c], corners[(c + 1) % 4]);
        for i in 0..per_edge {
            let s = i as f64 / per_edge as f64;
            let p = a + (b - a) * s;
            rays.push(ray_to(p.x, p.y));
        }
    }
    Scan::new(rays, 30.0, true)
}

#[test]
fn initial_map_closes_full_revolution() {
    let scan = Scan::new(
        vec![ray_to(1.0, 0.0), ray_to(0.0, 1.0), ray_to(-1.0, 0.0), ray_to(0.0, -1.0)],
        30.0,
        true,
    );
    let map = build_initial_map(&scan, 30.0, 2.0);
    assert_eq!(map.polyline_count(), 1);
    assert!(map.polylines()[0].is_closed());
    assert_eq!(map.vertex_count(), 4);

    let open = Scan::new(scan.rays().to_vec(), 30.0, false);
    let map = build_initial_map(&open, 30.0, 2.0);
    assert!(!map.polylines()[0].is_closed());
    assert_eq!(map.vertex_count(), 4);
}

#[test]
fn max_range_reading_splits_polylines() {
    let mut rays: Vec<Ray> = (0..3).map(|i| ray_to(2.0, i as f64 * 0.2)).collect();
    rays.push(Ray::from_polar(Point2::ORIGIN, 0.5, 30.0, true).unwrap());
    rays.extend((0..3).map(|i| ray_to(2.0 - i as f64 * 0.2, 1.0)));
    let map = build_initial_map(&Scan::new(rays, 30.0, false), 30.0, 1.0);
    assert_eq!(map.polyline_count(), 2);
    assert!(map.polylines().iter().all(|l| !l.is_closed() && l.len() == 3));
}

#[test]
fn long_gap_is_not_connected() {
    let scan = Scan::new(vec![ray_to(2.0, 0.0), ray_to(2.0, 1.5)], 30.0, false);
    assert!(build_initial_map(&scan, 30.0, 1.0).is_empty());
    assert_eq!(build_initial_map(&scan, 30.0, 2.0).vertex_count(), 2);
}

#[test]
fn too_few_endpoints_give_empty_map() {
    let one = Scan::new(vec![ray_to(2.0, 0.0)], 30.0, true);
    assert!(build_initial_map(&one, 30.0, 1.0).is_empty());
    let beyond = Scan::new(vec![ray_to(2.0, 0.0), ray_to(2.0, 0.1)], 30.0, false);
    assert!(build_initial_map(&beyond, 1.0, 1.0).is_empty());
}

#[test]
fn wrapped_chain_starts_after_a_break() {
    // Break between rays 1 and 2; rays 2..=5 and 0..=1 form one chain.
    let degrees = [0.0f64, 30.0, 150.0, 200.0, 260.0, 320.0];
    let scan = Scan::new(
        degrees
            .iter()
            .map(|d| Ray::from_polar(Point2::ORIGIN, d.to_radians(), 2.0, false).unwrap())
            .collect(),
        30.0,
        true,
    );
    let map = build_initial_map(&scan, 30.0, 2.5);
    assert_eq!(map.polyline_count(), 1);
    let line = &map.polylines()[0];
    assert!(!line.is_closed());
    let order: Vec<Point2> = [2, 3, 4, 5, 0, 1].iter().map(|&k| scan.rays()[k].end()).collect();
    assert_eq!(line.vertices(), &order[..]);
}

#[test]
fn collinear_middle_vertex_costs_nothing() {
    let scan = Scan::new((0..5).map(|i| ray_to(2.0, i as f64 * 0.25)).collect(), 30.0, false);
    let map = PolylineMap::new(vec![Polyline::open(vec![
        Point2::new(2.0, 0.0),
        Point2::new(2.0, 0.5),
        Point2::new(2.0, 1.0),
    ])
    .unwrap()])
    .unwrap();
    let e = vertex_removal_error(&map, VertexRef::new(0, 1), &scan, &ConstantVariance::default(), 0.5)
        .unwrap();
    assert!(e.abs() < 1e-24);
}

#[test]
fn boundary_vertex_charges_placeholder() {
    // Wall with rays on both halves; the end segment explains n rays exactly.
    let ys = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9];
    let scan = Scan::new(ys.iter().map(|&y| ray_to(2.0, y)).collect(), 30.0, false);
    let map = PolylineMap::new(vec![Polyline::open(vec![
        Point2::new(2.0, 0.0),
        Point2::new(2.0, 0.3),
        Point2::new(2.0, 0.9),
    ])
    .unwrap()])
    .unwrap();
    let d_rm = 0.5;
    let e = vertex_removal_error(&map, VertexRef::new(0, 0), &scan, &ConstantVariance::default(), d_rm)
        .unwrap();
    // Rays at y = 0, 0.1, 0.2 lose their segment; y = 0.3 still hits the shared vertex.
    assert!((e - 3.0 * d_rm * d_rm).abs() < 1e-12, "e = {e}");
}

#[test]
fn triangle_vertex_is_not_removable() {
    let map = PolylineMap::new(vec![Polyline::closed(vec![
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
        Point2::new(-1.0, -1.0),
    ])
    .unwrap()])
    .unwrap();
    let scan = Scan::new(vec![ray_to(1.0, 0.0)], 30.0, true);
    let noise = ConstantVariance::default();
    assert_eq!(
        vertex_removal_error(&map, VertexRef::new(0, 0), &scan, &noise, 0.5),
        Err(ExtractionError::InvalidRemoval)
    );
    assert!(matches!(
        vertex_removal_error(&map, VertexRef::new(0, 7), &scan, &noise, 0.5),
        Err(ExtractionError::NoSuchVertex { .. })
    ));
}

#[test]
fn straight_wall_middle_vertex_affects_both_halves() {
    let ys = [-0.9, -0.5, -0.1, 0.3, 0.7];
    let mut rays: Vec<Ray> = ys.iter().map(|&y| ray_to(2.0, y)).collect();
    rays.push(ray_to(-1.0, 0.0));
    let scan = Scan::new(rays, 30.0, false);
    let map = PolylineMap::new(vec![Polyline::open(vec![
        Point2::new(2.0, -1.0),
        Point2::new(2.0, 0.0),
        Point2::new(2.0, 1.0),
    ])
    .unwrap()])
    .unwrap();
    let got = rays_affected(&map, VertexRef::new(0, 1), &scan).unwrap();
    assert_eq!(got, vec![0, 1, 2, 3, 4]);
}

#[test]
fn removal_error_matches_full_sum_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for trial in 0..40 {
        let scan = random_scan(&mut rng, 20, trial % 2 == 0);
        let variances = (0..scan.len()).map(|_| rng.random_range(0.01..0.5)).collect();
        let noise = PerRayVariance::new(variances).unwrap();
        let d_rm = rng.random_range(0.1..1.0);
        let l_max = rng.random_range(0.5..3.0);
        let map = build_initial_map(&scan, 30.0, l_max);
        for at in removable(&map) {
            let got = vertex_removal_error(&map, at, &scan, &noise, d_rm).unwrap();
            let want = oracle_error(&map, at, &scan, &noise, d_rm);
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "trial {trial} {at:?}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn residuals_outside_affected_set_do_not_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..40 {
        let scan = random_scan(&mut rng, 24, trial % 2 == 1);
        let map = build_initial_map(&scan, 30.0, 1.5);
        for at in removable(&map) {
            let affected = rays_affected(&map, at, &scan).unwrap();
            let (after, _) = remove_from_map(&map, at);
            for (k, ray) in scan.reflected() {
                if affected.contains(&k) {
                    continue;
                }
                assert_eq!(
                    first_intersection_distance(ray, &map),
                    first_intersection_distance(ray, &after),
                    "trial {trial} {at:?} ray {k}"
                );
            }
        }
    }
}

#[test]
fn first_step_is_exhaustive_argmin() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let noise = ConstantVariance::new(0.03 * 0.03).unwrap();
    for trial in 0..30 {
        let scan = random_scan(&mut rng, 30, trial % 3 == 0);
        let config = ExtractionConfig::with_max_vertices(2);
        let mut ex = Extractor::new(&scan, &config, &noise).unwrap();
        let (map, ids) = ex.map();
        let candidates = removable(&map);
        if candidates.is_empty() {
            continue;
        }
        let scored: Vec<(f64, usize)> = candidates
            .iter()
            .map(|&at| {
                (
                    oracle_error(&map, at, &scan, &noise, config.d_rm),
                    ids[at.polyline][at.index],
                )
            })
            .collect();
        let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let step = ex.step().unwrap();
        let chosen = scored.iter().find(|s| s.1 == step.vertex).unwrap().0;
        assert!(chosen - best <= 1e-9 * best.abs().max(1.0), "trial {trial}");
        // Among exact ties the lowest ray index wins.
        let tied_lowest = scored
            .iter()
            .filter(|s| s.0 == best)
            .map(|s| s.1)
            .min()
            .unwrap();
        if scored.iter().filter(|s| (s.0 - best).abs() <= 1e-9).count() == 1 {
            assert_eq!(step.vertex, tied_lowest);
        }
    }
}

#[test]
fn cached_errors_match_recomputation_after_every_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let noise = ConstantVariance::default();
    for trial in 0..12 {
        let scan = random_scan(&mut rng, 60, trial % 2 == 0);
        let config = ExtractionConfig {
            l_max: 1.2,
            ..ExtractionConfig::with_max_vertices(2)
        };
        let mut ex = Extractor::new(&scan, &config, &noise).unwrap();
        loop {
            let (map, ids) = ex.map();
            for (li, line) in ids.iter().enumerate() {
                for (i, &ray) in line.iter().enumerate() {
                    let fresh = vertex_removal_error(&map, VertexRef::new(li, i), &scan, &noise, config.d_rm).ok();
                    let cached = ex.cached_error(ray);
                    match (cached, fresh) {
                        (Some(c), Some(f)) => assert!(
                            (c - f).abs() <= 1e-9 * f.abs().max(1.0),
                            "trial {trial} after {} removals, ray {ray}: {c} vs {f}",
                            ex.removals()
                        ),
                        (c, f) => assert_eq!(c.is_some(), f.is_some(), "trial {trial} ray {ray}"),
                    }
                }
            }
            let before = ex.vertex_count();
            let Some(step) = ex.step() else { break };
            let drop = before - ex.vertex_count();
            match step.class {
                RemovalClass::Polyline => assert_eq!(drop, 2),
                _ => assert_eq!(drop, 1),
            }
        }
    }
}

#[test]
fn noiseless_square_recovers_corners() {
    let scan = noiseless_square(10);
    let noise = ConstantVariance::default();
    let out = extract(&scan, &ExtractionConfig::with_max_vertices(4), &noise).unwrap();
    assert!(out.budget_met);
    assert_eq!(out.map.polyline_count(), 1);
    let line = &out.map.polylines()[0];
    assert!(line.is_closed());
    let mut got: Vec<(f64, f64)> = line.vertices().iter().map(|p| (p.x, p.y)).collect();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got, vec![(-2.0, -2.0), (-2.0, 2.0), (2.0, -2.0), (2.0, 2.0)]);
    let sq: f64 = scan
        .rays()
        .iter()
        .map(|r| crate::geometry::residual(r, &out.map).unwrap().powi(2))
        .sum();
    assert!((sq / scan.len() as f64).sqrt() < 1e-12);
}

#[test]
fn unreachable_budget_is_reported() {
    let scan = noiseless_square(5);
    let out = extract(&scan, &ExtractionConfig::with_max_vertices(2), &ConstantVariance::default()).unwrap();
    assert!(!out.budget_met);
    assert_eq!(out.map.vertex_count(), 3);
}

#[test]
fn output_vertices_are_scan_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for trial in 0..10 {
        let scan = random_scan(&mut rng, 90, trial % 2 == 0);
        let config = ExtractionConfig::with_max_vertices(12);
        let out = extract(&scan, &config, &ConstantVariance::default()).unwrap();
        assert!(out.map.vertex_count() <= 12 || !out.budget_met);
        for (line, ids) in out.map.polylines().iter().zip(&out.source_rays) {
            for (v, &k) in line.vertices().iter().zip(ids) {
                assert_eq!(*v, scan.rays()[k].end());
            }
        }
        PolylineMap::new(out.map.polylines().to_vec()).expect("vertex-disjoint");
    }
}

#[test]
fn rmse_stop_rule_respects_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let noise = ConstantVariance::default();
    for trial in 0..6 {
        let scan = random_scan(&mut rng, 80, trial % 2 == 0);
        for thr in [0.01, 0.05, 0.2] {
            let config = ExtractionConfig {
                stop: StopRule::MaxRmse(thr),
                ..ExtractionConfig::default()
            };
            let ex = Extractor::new(&scan, &config, &noise).unwrap();
            let start = ex.vertex_count();
            let out = ex.run(&config);
            let sq: Vec<f64> = scan
                .reflected()
                .filter_map(|(_, r)| crate::geometry::residual(r, &out.map))
                .map(|d| d * d)
                .collect();
            let rmse = if sq.is_empty() {
                0.0
            } else {
                (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
            };
            assert!(rmse <= thr + 1e-12, "trial {trial} thr {thr}: {rmse}");
            assert!(out.map.vertex_count() < start || start == 0);
        }
    }
}

#[test]
fn invalid_config_is_rejected() {
    let scan = noiseless_square(3);
    let noise = ConstantVariance::default();
    let bad = [
        ExtractionConfig { l_max: 0.0, ..Default::default() },
        ExtractionConfig { d_rm: -1.0, ..Default::default() },
        ExtractionConfig { r_max: Some(f64::NAN), ..Default::default() },
        ExtractionConfig::with_max_vertices(1),
    ];
    for config in bad {
        assert!(extract(&scan, &config, &noise).is_err(), "{config:?}");
    }
}
