//! Laser scans: ordered rays from a sensor pose.

use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryError, Point2, Ray};

/// Sensor pose in the map frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    pub const fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// An ordered set of rays.
///
/// Rays are expected in bearing order. `full_revolution` marks scans that
/// cover the whole circle, so the last and first endpoints are neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    rays: Vec<Ray>,
    max_range: f64,
    full_revolution: bool,
}

impl Scan {
    pub fn new(rays: Vec<Ray>, max_range: f64, full_revolution: bool) -> Self {
        Self {
            rays,
            max_range,
            full_revolution,
        }
    }

    /// Builds a scan from sensor-frame bearings and ranges.
    ///
    /// Readings at or above `max_range` are flagged as max-range readings.
    pub fn from_polar(
        pose: Pose2,
        readings: impl IntoIterator<Item = (f64, f64)>,
        max_range: f64,
        full_revolution: bool,
    ) -> Result<Self, GeometryError> {
        let origin = pose.position();
        let rays = readings
            .into_iter()
            .map(|(bearing, range)| {
                Ray::from_polar(origin, pose.heading + bearing, range, range >= max_range)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(rays, max_range, full_revolution))
    }

    #[inline]
    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    pub fn is_full_revolution(&self) -> bool {
        self.full_revolution
    }

    /// Rays that returned from a surface, with their indices.
    pub fn reflected(&self) -> impl Iterator<Item = (usize, &Ray)> + '_ {
        self.rays.iter().enumerate().filter(|(_, r)| !r.is_max_range())
    }

    pub fn reflected_count(&self) -> usize {
        self.rays.iter().filter(|r| !r.is_max_range()).count()
    }

    /// Copy of the scan without max-range readings.
    pub fn without_max_range(&self) -> Scan {
        Scan::new(
            self.reflected().map(|(_, r)| *r).collect(),
            self.max_range,
            self.full_revolution,
        )
    }

    /// Concatenate the rays of two scans.
    pub fn concat(&self, other: &Scan) -> Scan {
        let mut rays = self.rays.clone();
        rays.extend_from_slice(&other.rays);
        Scan::new(rays, self.max_range.max(other.max_range), false)
    }
}
