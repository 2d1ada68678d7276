use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Polyline, PolylineMap};
use crate::scan::{Pose2, Scan};

use super::IoError;

/// Schema version written into every scan and map file.
pub const FORMAT_VERSION: u32 = 1;

/// One reading. `bearing` is relative to the sensor heading, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayRecord {
    pub bearing: f64,
    pub range: f64,
    #[serde(default)]
    pub max_range: bool,
}

/// A scan on disk.
///
/// ```json
/// {
///   "version": 1,
///   "pose": { "x": 0.0, "y": 0.0, "heading": 0.0 },
///   "max_range": 30.0,
///   "full_revolution": true,
///   "rays": [ { "bearing": 0.0, "range": 4.2, "max_range": false } ]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFile {
    pub version: u32,
    pub pose: Pose2,
    pub max_range: f64,
    #[serde(default)]
    pub full_revolution: bool,
    pub rays: Vec<RayRecord>,
}

impl ScanFile {
    /// Describes `scan` as seen from `pose`. Rays are assumed to start at
    /// the pose position and to be ordered counterclockwise; bearings are
    /// unwrapped so that they increase monotonically.
    pub fn from_scan(scan: &Scan, pose: Pose2) -> Self {
        let tau = std::f64::consts::TAU;
        let mut prev: Option<f64> = None;
        Self {
            version: FORMAT_VERSION,
            pose,
            max_range: scan.max_range(),
            full_revolution: scan.is_full_revolution(),
            rays: scan
                .rays()
                .iter()
                .map(|r| {
                    let raw = r.bearing() - pose.heading;
                    let bearing = match prev {
                        None => raw - tau * (raw / tau).round(),
                        Some(p) => p + (raw - p).rem_euclid(tau),
                    };
                    prev = Some(bearing);
                    RayRecord {
                        bearing,
                        range: r.range(),
                        max_range: r.is_max_range(),
                    }
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), IoError> {
        if self.version != FORMAT_VERSION {
            return Err(IoError::Invalid(format!("unsupported scan version {}", self.version)));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(IoError::Invalid(format!("invalid max_range {}", self.max_range)));
        }
        for (i, r) in self.rays.iter().enumerate() {
            if !(r.range > 0.0 && r.range.is_finite() && r.bearing.is_finite()) {
                return Err(IoError::Invalid(format!("ray {i}: invalid reading ({}, {})", r.bearing, r.range)));
            }
        }
        if let Some(i) = self.rays.windows(2).position(|w| w[1].bearing < w[0].bearing) {
            return Err(IoError::Invalid(format!("ray {}: bearings not sorted", i + 1)));
        }
        Ok(())
    }

    pub fn to_scan(&self) -> Result<Scan, IoError> {
        self.validate()?;
        let origin = self.pose.position();
        let rays = self
            .rays
            .iter()
            .map(|r| {
                crate::geometry::Ray::from_polar(origin, self.pose.heading + r.bearing, r.range, r.max_range)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::Invalid(e.to_string()))?;
        Ok(Scan::new(rays, self.max_range, self.full_revolution))
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let file: Self = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    /// JSON text with one ray per line.
    pub fn to_json(&self) -> String {
        let header = format!(
            "{{\n  \"version\": {},\n  \"pose\": {},\n  \"max_range\": {},\n  \"full_revolution\": {},\n  \"rays\": [",
            self.version,
            compact(&self.pose),
            compact(&self.max_range),
            self.full_revolution
        );
        with_items(header, self.rays.iter().map(compact))
    }
}

fn compact<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// Closes a JSON array opened at the end of `header`, one item per line,
/// and the enclosing object.
fn with_items(mut out: String, items: impl Iterator<Item = String>) -> String {
    let items: Vec<String> = items.map(|i| format!("    {i}")).collect();
    if items.is_empty() {
        out.push_str("]\n}");
    } else {
        out.push('\n');
        out.push_str(&items.join(",\n"));
        out.push_str("\n  ]\n}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolylineRecord {
    pub closed: bool,
    pub vertices: Vec<[f64; 2]>,
}

/// A polyline map on disk.
///
/// ```json
/// { "version": 1, "polylines": [ { "closed": false, "vertices": [[0.0, 1.0], [2.0, 1.0]] } ] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub version: u32,
    pub polylines: Vec<PolylineRecord>,
}

impl MapFile {
    pub fn from_map(map: &PolylineMap) -> Self {
        Self {
            version: FORMAT_VERSION,
            polylines: map
                .polylines()
                .iter()
                .map(|l| PolylineRecord {
                    closed: l.is_closed(),
                    vertices: l.vertices().iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
        }
    }

    pub fn to_map(&self) -> Result<PolylineMap, IoError> {
        if self.version != FORMAT_VERSION {
            return Err(IoError::Invalid(format!("unsupported map version {}", self.version)));
        }
        let lines = self
            .polylines
            .iter()
            .map(|l| {
                let v = l.vertices.iter().map(|&[x, y]| Point2::new(x, y)).collect();
                Polyline::new(v, l.closed)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::Invalid(e.to_string()))?;
        PolylineMap::new(lines).map_err(|e| IoError::Invalid(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    /// JSON text with one polyline per line.
    pub fn to_json(&self) -> String {
        let header = format!("{{\n  \"version\": {},\n  \"polylines\": [", self.version);
        with_items(header, self.polylines.iter().map(compact))
    }
}
