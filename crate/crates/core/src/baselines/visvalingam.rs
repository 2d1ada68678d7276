//! Visvalingam–Whyatt simplification with a global vertex budget.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::geometry::{signed_area2, Point2, Polyline, PolylineMap};

/// One scheduled removal within a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveAreaEntry {
    /// Index of the removed vertex in the input polyline. For the final
    /// entry of an open polyline, which removes its last two vertices, the
    /// first of them.
    pub vertex: usize,
    /// Effective area, clamped to be non-decreasing along the schedule.
    pub area: f64,
    /// True for the entry that deletes the remaining segment.
    pub vanishes: bool,
}

fn triangle_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * signed_area2(a, b, c).abs()
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    area: f64,
    vertex: usize,
    stamp: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.area
            .total_cmp(&other.area)
            .then(self.vertex.cmp(&other.vertex))
            .then(self.stamp.cmp(&other.stamp))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Full removal schedule of one polyline.
///
/// Interior vertices go in order of smallest triangle area with their
/// current neighbors (ties to the lowest index). An open polyline ends with
/// an entry that deletes its last segment at zero raw cost; a closed one
/// stops at three vertices.
pub fn removal_schedule(line: &Polyline) -> Vec<EffectiveAreaEntry> {
    let pts = line.vertices();
    let n = pts.len();
    let closed = line.is_closed();
    let mut prev: Vec<usize> = (0..n).map(|i| if i == 0 { n - 1 } else { i - 1 }).collect();
    let mut next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut alive = vec![true; n];
    let mut stamps = vec![0u32; n];
    let removable = |i: usize| closed || (i != 0 && i != n - 1);
    let area_of = |i: usize, prev: &[usize], next: &[usize]| {
        triangle_area(pts[prev[i]], pts[i], pts[next[i]])
    };

    let mut heap = BinaryHeap::new();
    for i in (0..n).filter(|&i| removable(i)) {
        heap.push(Reverse(Candidate {
            area: area_of(i, &prev, &next),
            vertex: i,
            stamp: 0,
        }));
    }

    let floor = if closed { 3 } else { 2 };
    let mut remaining = n;
    let mut last = 0.0f64;
    let mut schedule = Vec::with_capacity(n);
    while remaining > floor {
        let Some(Reverse(c)) = heap.pop() else { break };
        if !alive[c.vertex] || stamps[c.vertex] != c.stamp {
            continue;
        }
        last = last.max(c.area);
        schedule.push(EffectiveAreaEntry {
            vertex: c.vertex,
            area: last,
            vanishes: false,
        });
        let (p, q) = (prev[c.vertex], next[c.vertex]);
        alive[c.vertex] = false;
        next[p] = q;
        prev[q] = p;
        remaining -= 1;
        for u in [p, q] {
            if removable(u) && remaining > floor {
                stamps[u] += 1;
                heap.push(Reverse(Candidate {
                    area: area_of(u, &prev, &next),
                    vertex: u,
                    stamp: stamps[u],
                }));
            }
        }
    }
    if !closed {
        schedule.push(EffectiveAreaEntry {
            vertex: 0,
            area: last,
            vanishes: true,
        });
    }
    schedule
}

/// Simplifies every polyline of `initial` until the map has at most
/// `max_vertices` vertices.
///
/// Each polyline's schedule is computed independently; the entries are then
/// merged in order of effective area (ties: lower polyline, earlier entry)
/// and applied until the budget is met. Open polylines can vanish entirely.
pub fn visvalingam(initial: &PolylineMap, max_vertices: usize) -> PolylineMap {
    let lines = initial.polylines();
    let schedules: Vec<Vec<EffectiveAreaEntry>> = lines.iter().map(removal_schedule).collect();
    let mut merged: Vec<(f64, usize, usize)> = schedules
        .iter()
        .enumerate()
        .flat_map(|(li, s)| s.iter().enumerate().map(move |(si, e)| (e.area, li, si)))
        .collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut keep: Vec<Vec<bool>> = lines.iter().map(|l| vec![true; l.len()]).collect();
    let mut total = initial.vertex_count();
    for &(_, li, si) in &merged {
        if total <= max_vertices {
            break;
        }
        let entry = schedules[li][si];
        if entry.vanishes {
            let left = keep[li].iter().filter(|&&k| k).count();
            keep[li].iter_mut().for_each(|k| *k = false);
            total -= left;
        } else {
            keep[li][entry.vertex] = false;
            total -= 1;
        }
    }

    let out = lines
        .iter()
        .zip(&keep)
        .filter_map(|(line, k)| {
            let v: Vec<Point2> = line
                .vertices()
                .iter()
                .zip(k)
                .filter(|(_, &k)| k)
                .map(|(p, _)| *p)
                .collect();
            if v.len() < 2 {
                return None;
            }
            Some(Polyline::new(v, line.is_closed()).expect("subset of a valid polyline"))
        })
        .collect();
    PolylineMap::new(out).expect("subset of a vertex-disjoint map")
}
