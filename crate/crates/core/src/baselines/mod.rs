//! Classical line-extraction methods used for comparison.
//!
//! All three work from the same point clusters as the likelihood-based
//! extractor: neighboring scan endpoints closer than `l_max`.

mod split;
mod visvalingam;

pub use split::{fit_line, ief, sam};
pub use visvalingam::{removal_schedule, visvalingam, EffectiveAreaEntry};

use crate::extraction::build_initial_map;
use crate::geometry::{Point2, PolylineMap};
use crate::scan::Scan;

/// Ordered scan endpoints forming one connected run.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCluster {
    pub points: Vec<Point2>,
    /// True when the run wraps around a full revolution.
    pub closed: bool,
}

/// Splits the valid endpoints of `scan` into connected runs.
///
/// The runs are exactly the polylines of the initial map, so isolated
/// endpoints do not form clusters.
pub fn cluster_endpoints(scan: &Scan, r_max: f64, l_max: f64) -> Vec<PointCluster> {
    clusters_of(&build_initial_map(scan, r_max, l_max))
}

/// Reads every polyline of `map` as a cluster of its vertices.
pub fn clusters_of(map: &PolylineMap) -> Vec<PointCluster> {
    map.polylines()
        .iter()
        .map(|l| PointCluster {
            points: l.vertices().to_vec(),
            closed: l.is_closed(),
        })
        .collect()
}
