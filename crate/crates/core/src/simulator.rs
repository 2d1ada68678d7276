//! Random star-shaped rooms and noisy 360° scans of them, taken from the
//! origin.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{axis_segment_intersection, ring_area, Point2, Polyline, PolylineMap, Ray};
use crate::scan::Scan;

/// Polygon vertex counts used by the benchmark corpus.
pub const CORPUS_VERTEX_COUNTS: [usize; 7] = [3, 4, 5, 6, 12, 36, 180];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("at least 3 rays are required, got {0}")]
    TooFewRays(usize),
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_vertices: usize,
    pub ray_count: usize,
    /// Bearing noise standard deviation, radians.
    pub sigma_angle: f64,
    /// Range noise standard deviation, meters.
    pub sigma_r: f64,
    pub min_radius: f64,
    pub max_radius: f64,
    /// Minimum angular gap between polygon vertices as a fraction of `2π/n`.
    pub min_gap_fraction: f64,
    /// Noisy ranges are clamped to at least this value.
    pub range_floor: f64,
    pub max_range: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_vertices: 4,
            ray_count: 360,
            sigma_angle: 0.2f64.to_radians(),
            sigma_r: 0.03,
            min_radius: 2.0,
            max_radius: 10.0,
            min_gap_fraction: 0.5,
            range_floor: 0.01,
            max_range: 30.0,
        }
    }
}

impl SimConfig {
    pub fn with_vertices(n_vertices: usize) -> Self {
        Self {
            n_vertices,
            ..Self::default()
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.sigma_angle = 0.0;
        self.sigma_r = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_vertices < 3 {
            return Err(SimError::TooFewVertices(self.n_vertices));
        }
        if self.ray_count < 3 {
            return Err(SimError::TooFewRays(self.ray_count));
        }
        let checks = [
            ("sigma_angle", self.sigma_angle, self.sigma_angle >= 0.0),
            ("sigma_r", self.sigma_r, self.sigma_r >= 0.0),
            ("min_radius", self.min_radius, self.min_radius > 0.0),
            ("max_radius", self.max_radius, self.max_radius >= self.min_radius),
            (
                "min_gap_fraction",
                self.min_gap_fraction,
                (0.0..1.0).contains(&self.min_gap_fraction),
            ),
            ("range_floor", self.range_floor, self.range_floor > 0.0),
            ("max_range", self.max_range, self.max_range > self.max_radius),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(SimError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// Simple polygon, star-shaped about the origin, vertices counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthPolygon {
    vertices: Vec<Point2>,
}

impl GroundTruthPolygon {
    /// Wraps vertices given counter-clockwise around the origin.
    pub fn new(vertices: Vec<Point2>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        ring_area(&self.vertices).abs()
    }

    /// Distance from the origin to the boundary along `bearing`.
    pub fn range_at(&self, bearing: f64) -> Option<f64> {
        let dir = Point2::from_angle(bearing);
        let n = self.vertices.len();
        (0..n)
            .filter_map(|i| {
                axis_segment_intersection(
                    Point2::ORIGIN,
                    dir,
                    self.vertices[i],
                    self.vertices[(i + 1) % n],
                )
            })
            .min_by(f64::total_cmp)
    }

    pub fn to_map(&self) -> PolylineMap {
        let line = Polyline::closed(self.vertices.clone()).expect("valid polygon");
        PolylineMap::new(vec![line]).expect("single polyline")
    }
}

/// A simulated scan together with the noise-free ranges along its bearings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedScan {
    pub scan: Scan,
    pub true_ranges: Vec<f64>,
}

/// A ground-truth polygon and one scan of it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCase {
    pub truth: GroundTruthPolygon,
    pub scan: Scan,
    pub true_ranges: Vec<f64>,
}

/// Random polygon around the origin.
///
/// Vertex bearings are spaced by at least `min_gap_fraction · 2π/n`, with
/// the remaining angle split at random; draws whose largest gap reaches π
/// (origin not strictly inside) are rejected. Radii are uniform in
/// `[min_radius, max_radius]`.
pub fn random_polygon<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> Result<GroundTruthPolygon, SimError> {
    config.validate()?;
    let n = config.n_vertices;
    let min_gap = config.min_gap_fraction * TAU / n as f64;
    let slack = TAU - min_gap * n as f64;
    let gaps = loop {
        let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = w.iter().sum();
        let gaps: Vec<f64> = w.iter().map(|x| min_gap + slack * x / total).collect();
        if gaps.iter().all(|&g| g < PI) {
            break gaps;
        }
    };
    let mut angle = rng.random_range(0.0..TAU);
    let mut vertices = Vec::with_capacity(n);
    for gap in gaps {
        let radius = if config.max_radius > config.min_radius {
            rng.random_range(config.min_radius..=config.max_radius)
        } else {
            config.min_radius
        };
        vertices.push(Point2::from_angle(angle) * radius);
        angle += gap;
    }
    Ok(GroundTruthPolygon::new(vertices))
}

fn normal_or_zero<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

/// Scans `polygon` from the origin.
///
/// Nominal bearings are evenly spaced; each gets Gaussian bearing noise, the
/// true range is cast along the noisy bearing, and Gaussian range noise is
/// added. Rays are returned sorted by noisy bearing.
pub fn simulate_scan<R: Rng + ?Sized>(
    polygon: &GroundTruthPolygon,
    config: &SimConfig,
    rng: &mut R,
) -> Result<SimulatedScan, SimError> {
    config.validate()?;
    let k = config.ray_count;
    let mut readings: Vec<(f64, f64, f64)> = (0..k)
        .map(|i| {
            let bearing = i as f64 * TAU / k as f64 + normal_or_zero(config.sigma_angle, rng);
            let r_true = polygon
                .range_at(bearing)
                .expect("origin lies inside the polygon");
            let r_meas = (r_true + normal_or_zero(config.sigma_r, rng)).max(config.range_floor);
            (bearing, r_true, r_meas)
        })
        .collect();
    readings.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rays = readings
        .iter()
        .map(|&(bearing, _, r)| {
            Ray::from_polar(Point2::ORIGIN, bearing, r, r >= config.max_range)
                .expect("positive range")
        })
        .collect();
    Ok(SimulatedScan {
        scan: Scan::new(rays, config.max_range, true),
        true_ranges: readings.iter().map(|r| r.1).collect(),
    })
}

/// Independent random stream for item `index` of a seeded run.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One polygon and scan from the stream `(seed, index)`.
pub fn simulate_case(config: &SimConfig, seed: u64, index: u64) -> Result<SimCase, SimError> {
    let mut rng = case_rng(seed, index);
    let truth = random_polygon(config, &mut rng)?;
    let sim = simulate_scan(&truth, config, &mut rng)?;
    Ok(SimCase {
        truth,
        scan: sim.scan,
        true_ranges: sim.true_ranges,
    })
}

/// `count` cases cycling through [`CORPUS_VERTEX_COUNTS`]; `base` supplies
/// every setting except the vertex count.
pub fn corpus(base: &SimConfig, count: usize, seed: u64) -> Result<Vec<SimCase>, SimError> {
    (0..count)
        .map(|i| {
            let config = SimConfig {
                n_vertices: CORPUS_VERTEX_COUNTS[i % CORPUS_VERTEX_COUNTS.len()],
                ..base.clone()
            };
            simulate_case(&config, seed, i as u64)
        })
        .collect()
}
