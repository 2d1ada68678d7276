//! Iterative endpoint fit and split-and-merge over ordered point clusters.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::{line_distance, Point2, Polyline, PolylineMap};

use super::PointCluster;

/// Distances at or below this, relative to the coordinate scale, count as
/// rounding noise and never trigger a split.
const FLAT: f64 = 1e-12;

fn significant(d: f64, p: Point2, q: Point2) -> bool {
    d > FLAT * p.norm().max(q.norm()).max(1.0)
}

/// Farthest interior point of `pts[a..=b]` from the line through `p`, `q`,
/// with its distance. Ties go to the lowest index.
fn farthest(pts: &[Point2], a: usize, b: usize, p: Point2, q: Point2) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &pt) in pts.iter().enumerate().take(b).skip(a + 1) {
        let d = line_distance(pt, p, q);
        if best.is_none_or(|(_, bd)| d > bd) {
            best = Some((i, d));
        }
    }
    best
}

/// Clusters that fit into the budget at two vertices each, largest first;
/// ties keep the earlier cluster. Returned in their original order.
fn select_clusters(clusters: &[PointCluster], max_vertices: usize) -> Vec<usize> {
    let usable: Vec<usize> = (0..clusters.len())
        .filter(|&c| clusters[c].points.len() >= 2)
        .collect();
    let room = max_vertices / 2;
    if usable.len() <= room {
        return usable;
    }
    let mut by_size = usable;
    by_size.sort_by(|&a, &b| {
        clusters[b].points.len().cmp(&clusters[a].points.len()).then(a.cmp(&b))
    });
    by_size.truncate(room);
    by_size.sort_unstable();
    by_size
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Split {
    distance: f64,
    cluster: usize,
    start: usize,
    at: usize,
}

impl Eq for Split {}

impl Ord for Split {
    // Largest distance first; ties go to the lower cluster, then the
    // earlier segment.
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(other.cluster.cmp(&self.cluster))
            .then(other.start.cmp(&self.start))
    }
}

impl PartialOrd for Split {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Vertex indices chosen by iterative endpoint fit, per selected cluster.
pub(crate) fn ief_indices(clusters: &[PointCluster], max_vertices: usize) -> Vec<(usize, Vec<usize>)> {
    let selected = select_clusters(clusters, max_vertices);
    let mut chosen: Vec<(usize, Vec<usize>)> = selected
        .iter()
        .map(|&c| (c, vec![0, clusters[c].points.len() - 1]))
        .collect();
    let mut total = 2 * chosen.len();
    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Split>, slot: usize, a: usize, b: usize| {
        let pts = &clusters[selected[slot]].points;
        if let Some((at, distance)) = farthest(pts, a, b, pts[a], pts[b]) {
            if significant(distance, pts[a], pts[b]) {
                heap.push(Split {
                    distance,
                    cluster: slot,
                    start: a,
                    at,
                });
            }
        }
    };
    for (slot, (_, idx)) in chosen.iter().enumerate() {
        push(&mut heap, slot, idx[0], idx[1]);
    }
    while total < max_vertices {
        let Some(s) = heap.pop() else { break };
        let idx = &mut chosen[s.cluster].1;
        let pos = idx.partition_point(|&i| i < s.at);
        let (a, b) = (idx[pos - 1], idx[pos]);
        idx.insert(pos, s.at);
        total += 1;
        push(&mut heap, s.cluster, a, s.at);
        push(&mut heap, s.cluster, s.at, b);
    }
    chosen
}

/// Iterative endpoint fit with a global vertex budget.
///
/// Every cluster starts as the segment joining its first and last points.
/// The segment whose farthest point (perpendicular distance to its line) is
/// globally largest is split at that point, until the map has
/// `max_vertices` vertices or every point lies on its segment's line up to
/// rounding. When the clusters alone exceed the budget, the largest ones
/// are kept.
pub fn ief(clusters: &[PointCluster], max_vertices: usize) -> PolylineMap {
    let lines = ief_indices(clusters, max_vertices)
        .into_iter()
        .map(|(c, idx)| {
            let cluster = &clusters[c];
            let pts: Vec<Point2> = idx.iter().map(|&i| cluster.points[i]).collect();
            let closed = cluster.closed && pts.len() >= 3;
            Polyline::new(pts, closed)
        })
        .filter_map(Result::ok)
        .collect();
    PolylineMap::new(lines).unwrap_or_default()
}

/// Total-least-squares line through `pts`: centroid and unit direction, or
/// `None` when all points coincide.
pub fn fit_line(pts: &[Point2]) -> Option<(Point2, Point2)> {
    if pts.is_empty() {
        return None;
    }
    let n = pts.len() as f64;
    let c = pts.iter().fold(Point2::ORIGIN, |acc, &p| acc + p) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &p in pts {
        let d = p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    if sxx + syy == 0.0 {
        return None;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Some((c, Point2::from_angle(theta)))
}

/// A fitted segment over points `start..=end` of one cluster.
#[derive(Debug, Clone, Copy)]
struct Fitted {
    cluster: usize,
    start: usize,
    end: usize,
    p: Point2,
    q: Point2,
}

/// Replaces the segment by the total-least-squares line of its points,
/// cropped to the projections of the first and last point. A degenerate fit
/// keeps the previous segment.
fn refit(seg: &mut Fitted, pts: &[Point2]) {
    let run = &pts[seg.start..=seg.end];
    let Some((c, dir)) = fit_line(run) else { return };
    let project = |x: Point2| c + dir * (x - c).dot(dir);
    let (p, q) = (project(run[0]), project(run[run.len() - 1]));
    if p != q {
        seg.p = p;
        seg.q = q;
    }
}

/// Split-and-merge in the iterative-endpoint-fit style.
///
/// Splitting follows [`ief`]: the segment whose farthest interior point is
/// globally farthest from the segment's line is split at that point. After
/// every split, every segment is replaced by the total-least-squares fit of
/// its points, so later distances are measured against fitted lines. Each
/// fitted segment costs two vertices, so at most `max_vertices / 2`
/// segments are produced.
pub fn sam(clusters: &[PointCluster], max_vertices: usize) -> PolylineMap {
    let budget_segments = max_vertices / 2;
    let mut segments: Vec<Fitted> = select_clusters(clusters, max_vertices)
        .into_iter()
        .map(|c| {
            let pts = &clusters[c].points;
            Fitted {
                cluster: c,
                start: 0,
                end: pts.len() - 1,
                p: pts[0],
                q: pts[pts.len() - 1],
            }
        })
        .collect();
    for seg in &mut segments {
        refit(seg, &clusters[seg.cluster].points);
    }
    while segments.len() < budget_segments {
        let mut best: Option<(usize, usize, f64)> = None;
        for (si, seg) in segments.iter().enumerate() {
            let pts = &clusters[seg.cluster].points;
            if let Some((at, d)) = farthest(pts, seg.start, seg.end, seg.p, seg.q) {
                if significant(d, seg.p, seg.q) && best.is_none_or(|(_, _, bd)| d > bd) {
                    best = Some((si, at, d));
                }
            }
        }
        let Some((si, at, _)) = best else { break };
        let old = segments[si];
        let pts = &clusters[old.cluster].points;
        segments[si] = Fitted {
            end: at,
            p: pts[old.start],
            q: pts[at],
            ..old
        };
        segments.insert(
            si + 1,
            Fitted {
                start: at,
                p: pts[at],
                q: pts[old.end],
                ..old
            },
        );
        for seg in &mut segments {
            refit(seg, &clusters[seg.cluster].points);
        }
    }

    chain_segments(segments.into_iter().map(|s| (s.p, s.q)))
}

/// Turns fitted segments into a map. Consecutive segments that meet at
/// exactly the same point share that vertex; a segment that would reuse
/// any other vertex is dropped.
fn chain_segments(segments: impl Iterator<Item = (Point2, Point2)>) -> PolylineMap {
    let key = |p: Point2| (p.x.to_bits(), p.y.to_bits());
    let mut seen = std::collections::HashSet::new();
    let mut chains: Vec<Vec<Point2>> = Vec::new();
    for (p, q) in segments.filter(|(p, q)| p != q) {
        match chains.last_mut() {
            Some(chain) if chain.last() == Some(&p) && !seen.contains(&key(q)) => {
                seen.insert(key(q));
                chain.push(q);
            }
            _ if !seen.contains(&key(p)) && !seen.contains(&key(q)) => {
                seen.insert(key(p));
                seen.insert(key(q));
                chains.push(vec![p, q]);
            }
            _ => {}
        }
    }
    let lines = chains
        .into_iter()
        .map(|c| Polyline::open(c).expect("distinct consecutive vertices"))
        .collect();
    PolylineMap::new(lines).expect("vertices are unique")
}
