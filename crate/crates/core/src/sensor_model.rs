//! Gaussian radial sensor model and scan likelihood.
//!
//! A ray's measured range is modeled as normally distributed around the
//! range predicted by the map; angular noise is ignored. Rays are assumed
//! independent, so the scan log-likelihood is the sum over rays.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{first_intersection_distance, PolylineMap, Ray};
use crate::scan::Scan;

/// Radial noise variance per ray.
pub trait NoiseModel: Sync {
    /// Variance `Σ_k` in m² for ray `index`.
    fn variance(&self, index: usize, ray: &Ray) -> f64;

    /// True when every ray has the same variance.
    fn is_constant(&self) -> bool {
        false
    }
}

/// Same variance for every ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantVariance(f64);

impl ConstantVariance {
    pub fn new(variance: f64) -> Result<Self, LikelihoodError> {
        if variance > 0.0 && variance.is_finite() {
            Ok(Self(variance))
        } else {
            Err(LikelihoodError::InvalidVariance(variance))
        }
    }

    pub fn from_std_dev(sigma: f64) -> Result<Self, LikelihoodError> {
        Self::new(sigma * sigma)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for ConstantVariance {
    /// Unit variance: with a constant `Σ` its value does not change which
    /// map is most likely, only the scale of the likelihood.
    fn default() -> Self {
        Self(1.0)
    }
}

impl NoiseModel for ConstantVariance {
    fn variance(&self, _index: usize, _ray: &Ray) -> f64 {
        self.0
    }

    fn is_constant(&self) -> bool {
        true
    }
}

/// Explicit per-ray variances, indexed like the scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PerRayVariance(Vec<f64>);

impl PerRayVariance {
    pub fn new(variances: Vec<f64>) -> Result<Self, LikelihoodError> {
        if let Some(&v) = variances.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(LikelihoodError::InvalidVariance(v));
        }
        Ok(Self(variances))
    }
}

impl NoiseModel for PerRayVariance {
    fn variance(&self, index: usize, _ray: &Ray) -> f64 {
        self.0[index]
    }
}

impl<N: NoiseModel + ?Sized> NoiseModel for &N {
    fn variance(&self, index: usize, ray: &Ray) -> f64 {
        (**self).variance(index, ray)
    }

    fn is_constant(&self) -> bool {
        (**self).is_constant()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LikelihoodError {
    #[error("variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("max-range readings carry no range information")]
    MaxRange,
    #[error("ray axis does not intersect the map")]
    NoIntersection,
}

/// What to do with a ray whose axis misses the map.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MissPolicy {
    /// Leave the ray out of the product.
    #[default]
    Skip,
    /// Score the ray as if its residual were this many meters.
    Penalty(f64),
}

/// `log N(d; 0, Σ)`.
#[inline]
pub fn gaussian_log_density(residual: f64, variance: f64) -> f64 {
    -0.5 * (2.0 * PI * variance).ln() - residual * residual / (2.0 * variance)
}

/// Log-density of one measured range given the map.
pub fn ray_log_likelihood(
    index: usize,
    ray: &Ray,
    map: &PolylineMap,
    noise: &dyn NoiseModel,
) -> Result<f64, LikelihoodError> {
    if ray.is_max_range() {
        return Err(LikelihoodError::MaxRange);
    }
    let predicted = first_intersection_distance(ray, map).ok_or(LikelihoodError::NoIntersection)?;
    Ok(gaussian_log_density(
        ray.range() - predicted,
        noise.variance(index, ray),
    ))
}

/// Log of the scan likelihood `p(Z | L)`.
///
/// Max-range readings contribute nothing; rays that miss the map are handled
/// per `policy`.
pub fn scan_log_likelihood(
    scan: &Scan,
    map: &PolylineMap,
    noise: &dyn NoiseModel,
    policy: MissPolicy,
) -> f64 {
    let mut total = 0.0;
    for (k, ray) in scan.reflected() {
        match ray_log_likelihood(k, ray, map, noise) {
            Ok(ll) => total += ll,
            Err(LikelihoodError::NoIntersection) => {
                if let MissPolicy::Penalty(d) = policy {
                    total += gaussian_log_density(d, noise.variance(k, ray));
                }
            }
            Err(_) => {}
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, Polyline};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wall_map() -> PolylineMap {
        PolylineMap::new(vec![Polyline::open(vec![
            Point2::new(2.0, -10.0),
            Point2::new(2.0, 10.0),
        ])
        .unwrap()])
        .unwrap()
    }

    fn ray_to(x: f64, y: f64) -> Ray {
        Ray::new(Point2::ORIGIN, Point2::new(x, y), false).unwrap()
    }

    #[test]
    fn peak_value() {
        let map = wall_map();
        let unit = ConstantVariance::default();
        let ll = ray_log_likelihood(0, &ray_to(2.0, 0.0), &map, &unit).unwrap();
        assert_abs_diff_eq!(ll, -0.918_938_533_204_672_7, epsilon = 1e-12);
    }

    #[test]
    fn one_sigma_drops_by_half() {
        let map = wall_map();
        let noise = ConstantVariance::from_std_dev(0.1).unwrap();
        let peak = ray_log_likelihood(0, &ray_to(2.0, 0.0), &map, &noise).unwrap();
        let off = ray_log_likelihood(0, &ray_to(2.1, 0.0), &map, &noise).unwrap();
        assert_abs_diff_eq!(peak - off, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn misses_and_max_range_are_distinct_errors() {
        let map = wall_map();
        let unit = ConstantVariance::default();
        assert_eq!(
            ray_log_likelihood(0, &ray_to(-1.0, 0.0), &map, &unit),
            Err(LikelihoodError::NoIntersection)
        );
        let max = Ray::new(Point2::ORIGIN, Point2::new(30.0, 0.0), true).unwrap();
        assert_eq!(
            ray_log_likelihood(0, &max, &map, &unit),
            Err(LikelihoodError::MaxRange)
        );
    }

    #[test]
    fn scan_level_cases() {
        let map = wall_map();
        let unit = ConstantVariance::default();
        let empty = Scan::new(vec![], 30.0, false);
        assert_eq!(scan_log_likelihood(&empty, &map, &unit, MissPolicy::Skip), 0.0);

        let single = Scan::new(vec![ray_to(2.0, 0.0)], 30.0, false);
        assert_abs_diff_eq!(
            scan_log_likelihood(&single, &map, &unit, MissPolicy::Skip),
            -0.9189385,
            epsilon = 1e-7
        );

        let noise = ConstantVariance::new(0.04).unwrap();
        let on_map: Vec<Ray> = (0..7).map(|i| ray_to(2.0, i as f64 - 3.0)).collect();
        let k = on_map.len() as f64;
        let scan = Scan::new(on_map, 30.0, false);
        let expected = k * (-0.5 * (2.0 * PI * 0.04).ln());
        assert_abs_diff_eq!(
            scan_log_likelihood(&scan, &map, &noise, MissPolicy::Skip),
            expected,
            epsilon = 1e-9
        );
    }

    #[test]
    fn miss_policy() {
        let map = wall_map();
        let unit = ConstantVariance::default();
        let scan = Scan::new(vec![ray_to(2.0, 0.0), ray_to(-3.0, 0.0)], 30.0, false);
        let skip = scan_log_likelihood(&scan, &map, &unit, MissPolicy::Skip);
        let pen = scan_log_likelihood(&scan, &map, &unit, MissPolicy::Penalty(0.5));
        assert_abs_diff_eq!(skip - pen, 0.918_938_533_204_672_7 + 0.125, epsilon = 1e-12);
    }

    fn random_scan(rng: &mut ChaCha8Rng, n: usize) -> Scan {
        let rays = (0..n)
            .map(|_| {
                let y = rng.random_range(-5.0..5.0);
                let x = rng.random_range(1.0..3.0);
                ray_to(x, y)
            })
            .collect();
        Scan::new(rays, 30.0, false)
    }

    #[test]
    fn sum_of_rays_and_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let map = wall_map();
        let variances: Vec<f64> = (0..40).map(|_| rng.random_range(0.01..0.2)).collect();
        let noise = PerRayVariance::new(variances).unwrap();
        let scan = random_scan(&mut rng, 40);
        let direct: f64 = scan
            .reflected()
            .map(|(k, r)| ray_log_likelihood(k, r, &map, &noise).unwrap())
            .sum();
        let total = scan_log_likelihood(&scan, &map, &noise, MissPolicy::Skip);
        assert_abs_diff_eq!(direct, total, epsilon = 1e-9);

        let unit = ConstantVariance::default();
        let a = random_scan(&mut rng, 10);
        let b = random_scan(&mut rng, 13);
        let joint = scan_log_likelihood(&a.concat(&b), &map, &unit, MissPolicy::Skip);
        let parts = scan_log_likelihood(&a, &map, &unit, MissPolicy::Skip)
            + scan_log_likelihood(&b, &map, &unit, MissPolicy::Skip);
        assert_abs_diff_eq!(joint, parts, epsilon = 1e-9);
    }

    #[test]
    fn zero_residuals_maximize_likelihood() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let map = wall_map();
        let noise = ConstantVariance::new(0.01).unwrap();
        let exact = Scan::new((0..20).map(|i| ray_to(2.0, i as f64 * 0.3 - 3.0)).collect(), 30.0, false);
        let best = scan_log_likelihood(&exact, &map, &noise, MissPolicy::Skip);
        for _ in 0..20 {
            let jittered = Scan::new(
                exact
                    .rays()
                    .iter()
                    .map(|r| {
                        let t = r.range() + rng.random_range(-0.1..0.1);
                        Ray::new(r.start(), r.point_at(t), false).unwrap()
                    })
                    .collect(),
                30.0,
                false,
            );
            assert!(scan_log_likelihood(&jittered, &map, &noise, MissPolicy::Skip) <= best);
        }
    }

    #[test]
    fn constant_variance_does_not_change_argmin() {
        // Candidate walls at different offsets; the best candidate under the
        // weighted squared residual sum must not depend on Σ.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scan = Scan::new(
            (0..30)
                .map(|i| ray_to(2.0 + rng.random_range(-0.05..0.05), i as f64 * 0.2 - 3.0))
                .collect(),
            30.0,
            false,
        );
        let candidates: Vec<PolylineMap> = [1.9, 1.97, 2.0, 2.04, 2.2]
            .iter()
            .map(|&x| {
                PolylineMap::new(vec![Polyline::open(vec![
                    Point2::new(x, -10.0),
                    Point2::new(x, 10.0),
                ])
                .unwrap()])
                .unwrap()
            })
            .collect();
        let argmax = |noise: &ConstantVariance| {
            candidates
                .iter()
                .enumerate()
                .map(|(i, m)| (i, scan_log_likelihood(&scan, m, noise, MissPolicy::Skip)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0
        };
        let reference = argmax(&ConstantVariance::default());
        for var in [1e-4, 0.01, 3.0, 100.0] {
            assert_eq!(argmax(&ConstantVariance::new(var).unwrap()), reference);
        }
    }
}
