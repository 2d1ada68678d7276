//! Evaluation metrics: residual RMSE, explained-ray fraction and
//! ground-truth area error.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{first_intersection_distance, ring_area, Point2, PolylineMap};
use crate::scan::Scan;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("no reflected ray intersects the map")]
    NoIntersections,
    #[error("polygon has zero area")]
    DegeneratePolygon,
    #[error("the sensor is not inside the polygon (angular gap of {0:.3} rad)")]
    NotStarShaped(f64),
}

/// Root mean square of the along-ray residuals of reflected rays that hit
/// the map.
pub fn rmse(scan: &Scan, map: &PolylineMap) -> Result<f64, MetricError> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (_, ray) in scan.reflected() {
        if let Some(t) = first_intersection_distance(ray, map) {
            let d = ray.range() - t;
            sum += d * d;
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricError::NoIntersections);
    }
    Ok((sum / n as f64).sqrt())
}

/// Mean absolute along-ray residual over reflected rays that hit the map.
pub fn mean_abs_residual(scan: &Scan, map: &PolylineMap) -> Result<f64, MetricError> {
    let residuals: Vec<f64> = scan
        .reflected()
        .filter_map(|(_, ray)| first_intersection_distance(ray, map).map(|t| (ray.range() - t).abs()))
        .collect();
    if residuals.is_empty() {
        return Err(MetricError::NoIntersections);
    }
    Ok(residuals.iter().sum::<f64>() / residuals.len() as f64)
}

/// Fraction of reflected rays whose axis hits the map; 0 for a scan without
/// reflected rays.
pub fn f_value(scan: &Scan, map: &PolylineMap) -> f64 {
    let reflected = scan.reflected_count();
    if reflected == 0 {
        return 0.0;
    }
    let hits = scan
        .reflected()
        .filter(|(_, ray)| first_intersection_distance(ray, map).is_some())
        .count();
    hits as f64 / reflected as f64
}

/// Polygon around the origin described by its vertices sorted by bearing.
struct StarPolygon {
    angles: Vec<f64>,
    points: Vec<Point2>,
}

impl StarPolygon {
    fn new(vertices: impl IntoIterator<Item = Point2>, center: Point2) -> Result<Self, MetricError> {
        let mut pts: Vec<(f64, Point2)> = vertices
            .into_iter()
            .map(|p| {
                let q = p - center;
                (q.angle().rem_euclid(TAU), q)
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let points: Vec<Point2> = pts.iter().map(|p| p.1).collect();
        if points.len() < 3 || ring_area(&points).abs() == 0.0 {
            return Err(MetricError::DegeneratePolygon);
        }
        let angles: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let n = angles.len();
        let widest = (0..n)
            .map(|i| {
                if i + 1 < n {
                    angles[i + 1] - angles[i]
                } else {
                    angles[0] + TAU - angles[i]
                }
            })
            .fold(0.0, f64::max);
        if widest >= std::f64::consts::PI {
            return Err(MetricError::NotStarShaped(widest));
        }
        Ok(Self { angles, points })
    }

    fn area(&self) -> f64 {
        ring_area(&self.points).abs()
    }

    /// Edge whose angular span contains `phi`, as its two endpoints.
    fn edge(&self, phi: f64) -> (Point2, Point2) {
        let n = self.angles.len();
        let i = match self.angles.partition_point(|&a| a <= phi) {
            0 => n - 1,
            i => i - 1,
        };
        (self.points[i], self.points[(i + 1) % n])
    }

    /// Boundary point along bearing `phi` on a given edge.
    fn point_on(edge: (Point2, Point2), phi: f64) -> Point2 {
        let d = Point2::from_angle(phi);
        let e = edge.1 - edge.0;
        let denom = d.cross(e);
        if denom == 0.0 {
            return edge.0;
        }
        d * (edge.0.cross(e) / denom)
    }
}

/// Relative symmetric-difference area between a polygon built from the
/// estimated map and the ground truth, divided by the estimated area.
///
/// All estimated vertices are sorted by bearing about `sensor` and joined
/// into one polygon. Both polygons must contain the sensor, so each is
/// described by a radius function of bearing; union and intersection are
/// integrated exactly between vertex bearings and crossing points.
pub fn a_value(
    estimated: &PolylineMap,
    truth: &[Point2],
    sensor: Point2,
) -> Result<f64, MetricError> {
    let est = StarPolygon::new(estimated.vertices(), sensor)?;
    let gt = StarPolygon::new(truth.iter().copied(), sensor)?;
    Ok(symmetric_difference(&est, &gt) / est.area())
}

fn symmetric_difference(a: &StarPolygon, b: &StarPolygon) -> f64 {
    let mut events: Vec<f64> = a.angles.iter().chain(&b.angles).copied().collect();
    events.sort_by(f64::total_cmp);
    events.dedup();
    let n = events.len();
    let mut total = 0.0;
    for i in 0..n {
        let lo = events[i];
        let hi = if i + 1 < n { events[i + 1] } else { events[0] + TAU };
        let mid = 0.5 * (lo + hi);
        let (ea, eb) = (a.edge(mid.rem_euclid(TAU)), b.edge(mid.rem_euclid(TAU)));
        let mut cuts = vec![lo];
        if let Some(x) = crossing(ea, eb) {
            let mut phi = x.angle().rem_euclid(TAU);
            if phi < lo {
                phi += TAU;
            }
            if phi > lo && phi < hi {
                cuts.push(phi);
            }
        }
        cuts.push(hi);
        for w in cuts.windows(2) {
            let (pa0, pa1) = (StarPolygon::point_on(ea, w[0]), StarPolygon::point_on(ea, w[1]));
            let (pb0, pb1) = (StarPolygon::point_on(eb, w[0]), StarPolygon::point_on(eb, w[1]));
            let tri_a = 0.5 * pa0.cross(pa1).abs();
            let tri_b = 0.5 * pb0.cross(pb1).abs();
            total += (tri_a - tri_b).abs();
        }
    }
    total
}

/// Intersection of the infinite lines through two edges, if not parallel.
fn crossing(a: (Point2, Point2), b: (Point2, Point2)) -> Option<Point2> {
    let (u, v) = (a.1 - a.0, b.1 - b.0);
    let denom = u.cross(v);
    if denom == 0.0 {
        return None;
    }
    let t = (b.0 - a.0).cross(v) / denom;
    Some(a.0 + u * t)
}

/// Metrics of one method run on one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: Option<f64>,
    pub f_value: f64,
    pub a_value: Option<f64>,
    pub vertex_count: usize,
    pub wall_time: f64,
}

impl EvalReport {
    /// Evaluates `map` against `scan`, and against `truth` when given.
    pub fn evaluate(
        scan: &Scan,
        map: &PolylineMap,
        truth: Option<&[Point2]>,
        sensor: Point2,
        wall_time: f64,
    ) -> Self {
        Self {
            rmse: rmse(scan, map).ok(),
            f_value: f_value(scan, map),
            a_value: truth.and_then(|t| a_value(map, t, sensor).ok()),
            vertex_count: map.vertex_count(),
            wall_time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Polyline, Ray};
    use crate::simulator::{case_rng, random_polygon, SimConfig};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn square(h: f64) -> Vec<Point2> {
        vec![
            Point2::new(h, h),
            Point2::new(-h, h),
            Point2::new(-h, -h),
            Point2::new(h, -h),
        ]
    }

    fn closed_map(pts: Vec<Point2>) -> PolylineMap {
        PolylineMap::new(vec![Polyline::closed(pts).unwrap()]).unwrap()
    }

    fn ray_to(x: f64, y: f64) -> Ray {
        Ray::new(Point2::ORIGIN, Point2::new(x, y), false).unwrap()
    }

    #[test]
    fn rmse_definition() {
        let map = PolylineMap::new(vec![Polyline::open(vec![
            Point2::new(2.0, -5.0),
            Point2::new(2.0, 5.0),
        ])
        .unwrap()])
        .unwrap();
        let scan = Scan::new(vec![ray_to(2.3, 0.0), ray_to(1.6, 0.0)], 30.0, false);
        assert_relative_eq!(rmse(&scan, &map).unwrap(), (0.25f64 / 2.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(mean_abs_residual(&scan, &map).unwrap(), 0.35, epsilon = 1e-12);
        let on = Scan::new(vec![ray_to(2.0, 1.0)], 30.0, false);
        assert!(rmse(&on, &map).unwrap() < 1e-15);
        let miss = Scan::new(vec![ray_to(-2.0, 1.0)], 30.0, false);
        assert_eq!(rmse(&miss, &map), Err(MetricError::NoIntersections));
    }

    #[test]
    fn rmse_ignores_ray_order() {
        let map = closed_map(square(3.0));
        let mut rng = case_rng(3, 0);
        let rays: Vec<Ray> = (0..50)
            .map(|_| Ray::from_polar(Point2::ORIGIN, rng.random_range(0.0..TAU), rng.random_range(2.0..4.0), false).unwrap())
            .collect();
        let mut reversed = rays.clone();
        reversed.reverse();
        let a = rmse(&Scan::new(rays, 30.0, false), &map).unwrap();
        let b = rmse(&Scan::new(reversed, 30.0, false), &map).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn f_value_cases() {
        let scan = Scan::new(
            (0..8).map(|i| Ray::from_polar(Point2::ORIGIN, i as f64, 1.0, false).unwrap()).collect(),
            30.0,
            true,
        );
        assert_eq!(f_value(&scan, &closed_map(square(2.0))), 1.0);
        assert_eq!(f_value(&scan, &PolylineMap::empty()), 0.0);
    }

    #[test]
    fn a_value_identity_and_scaling() {
        let truth = square(1.0);
        assert!(a_value(&closed_map(truth.clone()), &truth, Point2::ORIGIN).unwrap().abs() < 1e-12);
        let big = closed_map(square(1.1));
        assert_relative_eq!(
            a_value(&big, &truth, Point2::ORIGIN).unwrap(),
            0.21 / 1.21,
            epsilon = 1e-12
        );
        let small = closed_map(square(0.9));
        assert_relative_eq!(
            a_value(&small, &truth, Point2::ORIGIN).unwrap(),
            (4.0 - 3.24) / 3.24,
            epsilon = 1e-12
        );
    }

    #[test]
    fn a_value_is_rotation_invariant() {
        for seed in 0..20 {
            let mut rng = case_rng(seed, 2);
            let t = random_polygon(&SimConfig::with_vertices(7), &mut rng).unwrap();
            let e = random_polygon(&SimConfig::with_vertices(5), &mut rng).unwrap();
            let base = a_value(&e.to_map(), t.vertices(), Point2::ORIGIN).unwrap();
            let angle = rng.random_range(0.0..TAU);
            let rot = |pts: &[Point2]| pts.iter().map(|p| p.rotated(angle)).collect::<Vec<_>>();
            let em = closed_map(rot(e.vertices()));
            let rotated = a_value(&em, &rot(t.vertices()), Point2::ORIGIN).unwrap();
            assert_relative_eq!(base, rotated, max_relative = 1e-9);
        }
    }

    #[test]
    fn polygons_must_surround_sensor() {
        let truth = square(1.0);
        let off = closed_map(vec![
            Point2::new(5.0, 0.0),
            Point2::new(6.0, 0.0),
            Point2::new(6.0, 1.0),
        ]);
        assert!(matches!(
            a_value(&off, &truth, Point2::ORIGIN),
            Err(MetricError::NotStarShaped(_))
        ));
        let flat = PolylineMap::new(vec![Polyline::open(vec![
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
        ])
        .unwrap()])
        .unwrap();
        assert_eq!(
            a_value(&flat, &truth, Point2::ORIGIN),
            Err(MetricError::DegeneratePolygon)
        );
    }
}
