//! Greedy polyline extraction.
//!
//! Consecutive scan endpoints are first connected into polylines. Vertices
//! are then removed one at a time, always the one whose removal costs the
//! least scan likelihood, until a stopping rule holds.

mod working_map;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{axis_segment_intersection, Point2, PolylineMap};
use crate::scan::Scan;
use crate::sensor_model::NoiseModel;
use working_map::{RemovalKind, WorkingMap, NONE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractionError {
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("vertex budget must be at least 2, got {0}")]
    BudgetTooSmall(usize),
    #[error("map has no vertex {index} in polyline {polyline}")]
    NoSuchVertex { polyline: usize, index: usize },
    #[error("a closed polygon with three vertices cannot lose a vertex")]
    InvalidRemoval,
}

/// When to stop removing vertices.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StopRule {
    /// Stop once the map has at most `max_vertices` vertices.
    #[default]
    VertexCount,
    /// Keep removing while the residual RMSE of the map stays at or below
    /// this many meters. The vertex budget is ignored.
    MaxRmse(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionConfig {
    /// Readings farther than this are ignored. `None` uses the scan's
    /// sensor maximum range.
    pub r_max: Option<f64>,
    /// Longest gap between neighboring endpoints that still gets connected.
    pub l_max: f64,
    /// Vertex budget `J_max`.
    pub max_vertices: usize,
    /// Residual substituted for rays that lose their segment.
    pub d_rm: f64,
    pub stop: StopRule,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            l_max: 1.0,
            max_vertices: 10,
            d_rm: 0.5,
            stop: StopRule::VertexCount,
        }
    }
}

impl ExtractionConfig {
    pub fn with_max_vertices(max_vertices: usize) -> Self {
        Self {
            max_vertices,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ExtractionError> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ExtractionError::InvalidParameter { name, value })
            }
        };
        if let Some(r) = self.r_max {
            positive("r_max", r)?;
        }
        positive("l_max", self.l_max)?;
        positive("d_rm", self.d_rm)?;
        if let StopRule::MaxRmse(thr) = self.stop {
            if !(thr >= 0.0 && thr.is_finite()) {
                return Err(ExtractionError::InvalidParameter {
                    name: "max_rmse",
                    value: thr,
                });
            }
        }
        if self.max_vertices < 2 {
            return Err(ExtractionError::BudgetTooSmall(self.max_vertices));
        }
        Ok(())
    }

    fn effective_r_max(&self, scan: &Scan) -> f64 {
        self.r_max.unwrap_or(scan.max_range())
    }
}

/// Position of a vertex inside a [`PolylineMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexRef {
    pub polyline: usize,
    pub index: usize,
}

impl VertexRef {
    pub const fn new(polyline: usize, index: usize) -> Self {
        Self { polyline, index }
    }
}

/// Result of [`extract`].
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub map: PolylineMap,
    /// For every vertex, the index of the scan ray whose endpoint it is.
    pub source_rays: Vec<Vec<usize>>,
    pub removals: usize,
    /// False when the vertex budget could not be reached because only
    /// triangles remain.
    pub budget_met: bool,
}

/// How a removal changed the topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalClass {
    /// The two incident segments were replaced by a chord.
    Interior,
    /// The end segment of an open polyline was dropped.
    Boundary,
    /// A single-segment polyline vanished, taking two vertices with it.
    Polyline,
}

/// One greedy removal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemovalStep {
    /// Ray index of the removed vertex.
    pub vertex: usize,
    pub error: f64,
    pub class: RemovalClass,
}

fn valid_endpoint(scan: &Scan, k: usize, r_max: f64) -> bool {
    let ray = &scan.rays()[k];
    !ray.is_max_range() && ray.range() <= r_max
}

/// Working map connecting neighboring endpoints; vertex ids are ray indices.
fn initial_working_map(scan: &Scan, r_max: f64, l_max: f64) -> WorkingMap {
    let k_total = scan.len();
    let mut wm = WorkingMap::with_capacity(k_total);
    if k_total < 2 {
        return wm;
    }
    let rays = scan.rays();
    let wraps = scan.is_full_revolution() && k_total >= 3;
    let connects: Vec<bool> = (0..k_total)
        .map(|k| {
            if k + 1 == k_total && !wraps {
                return false;
            }
            let k1 = (k + 1) % k_total;
            if !valid_endpoint(scan, k, r_max) || !valid_endpoint(scan, k1, r_max) {
                return false;
            }
            let gap = rays[k].end().distance(rays[k1].end());
            gap > 0.0 && gap <= l_max
        })
        .collect();

    let ids_of = |chain: &[usize]| -> (Vec<u32>, Vec<Point2>) {
        (
            chain.iter().map(|&k| k as u32).collect(),
            chain.iter().map(|&k| rays[k].end()).collect(),
        )
    };

    if connects.iter().all(|&c| c) {
        let all: Vec<usize> = (0..k_total).collect();
        let (ids, pts) = ids_of(&all);
        wm.add_line(&ids, &pts, true);
        return wm;
    }

    // Start right after a break so that no chain straddles the start.
    let start = if wraps {
        (0..k_total)
            .find(|&k| !connects[(k + k_total - 1) % k_total])
            .unwrap_or(0)
    } else {
        0
    };
    let mut chain: Vec<usize> = Vec::new();
    let flush = |chain: &mut Vec<usize>, wm: &mut WorkingMap| {
        if chain.len() >= 2 {
            let (ids, pts) = ids_of(chain);
            wm.add_line(&ids, &pts, false);
        }
        chain.clear();
    };
    for i in 0..k_total {
        let k = (start + i) % k_total;
        if connects[k] {
            if chain.is_empty() {
                chain.push(k);
            }
            chain.push((k + 1) % k_total);
        } else {
            flush(&mut chain, &mut wm);
        }
    }
    flush(&mut chain, &mut wm);
    wm
}

/// Connects neighboring scan endpoints into polylines.
///
/// Endpoints `b_k` and `b_{k+1}` are joined when both readings are valid
/// (not max-range, range ≤ `r_max`) and lie at most `l_max` apart. The last
/// and first endpoints are joined only for full-revolution scans. When every
/// pair connects the result is a single closed polygon.
pub fn build_initial_map(scan: &Scan, r_max: f64, l_max: f64) -> PolylineMap {
    initial_working_map(scan, r_max, l_max).to_map().0
}

/// Per-ray data used to score removals.
struct RayTable {
    origin: Vec<Point2>,
    dir: Vec<Point2>,
    range: Vec<f64>,
    weight: Vec<f64>,
    active: Vec<usize>,
    d_rm2: f64,
}

impl RayTable {
    fn new(scan: &Scan, noise: &dyn NoiseModel, r_max: f64, d_rm: f64) -> Self {
        let rays = scan.rays();
        Self {
            origin: rays.iter().map(|r| r.start()).collect(),
            dir: rays.iter().map(|r| r.direction()).collect(),
            range: rays.iter().map(|r| r.range()).collect(),
            weight: rays
                .iter()
                .enumerate()
                .map(|(k, r)| 1.0 / noise.variance(k, r))
                .collect(),
            active: (0..rays.len())
                .filter(|&k| valid_endpoint(scan, k, r_max))
                .collect(),
            d_rm2: d_rm * d_rm,
        }
    }

    #[inline]
    fn hit(&self, k: usize, (p, q): (Point2, Point2)) -> Option<f64> {
        axis_segment_intersection(self.origin[k], self.dir[k], p, q)
    }

    #[inline]
    fn cost(&self, k: usize, t: Option<f64>) -> f64 {
        match t {
            Some(t) => {
                let d = self.range[k] - t;
                d * d
            }
            None => self.d_rm2,
        }
    }

    fn first_hit(&self, k: usize, wm: &WorkingMap, skip: &[u32]) -> Option<f64> {
        wm.segments()
            .filter(|(s, _, _)| !skip.contains(s))
            .filter_map(|(_, p, q)| self.hit(k, (p, q)))
            .min_by(f64::total_cmp)
    }

    fn hits(&self, wm: &WorkingMap) -> Vec<Option<f64>> {
        let mut hits = vec![None; self.range.len()];
        for &k in &self.active {
            hits[k] = self.first_hit(k, wm, &[]);
        }
        hits
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Scores the removal of `v`: the error and, optionally, the rays involved.
fn score_removal(
    table: &RayTable,
    wm: &WorkingMap,
    hits: &[Option<f64>],
    v: u32,
    mut affected: Option<&mut Vec<usize>>,
) -> Option<f64> {
    let kind = wm.removal_kind(v);
    if kind == RemovalKind::Invalid {
        return None;
    }
    let (inc, n) = wm.incident_segments(v);
    let removed = &inc[..n];
    let removed_geom: Vec<(Point2, Point2)> = removed.iter().map(|&s| wm.segment(s)).collect();
    let chord = match kind {
        RemovalKind::Interior { prev, next } => Some((wm.pos(prev), wm.pos(next))),
        _ => None,
    };
    let drops = kind.drops_segment();
    let mut e = 0.0;
    for &k in &table.active {
        let old = hits[k];
        let on_removed =
            old.is_some_and(|t| removed_geom.iter().any(|&g| table.hit(k, g) == Some(t)));
        let chord_t = chord.and_then(|c| table.hit(k, c));
        if !on_removed && chord_t.is_none() {
            continue;
        }
        if let Some(list) = affected.as_deref_mut() {
            list.push(k);
        }
        let new = if on_removed {
            min_opt(table.first_hit(k, wm, removed), chord_t)
        } else {
            min_opt(old, chord_t)
        };
        let new_cost = if drops && new != old {
            table.d_rm2
        } else {
            table.cost(k, new)
        };
        e += (new_cost - table.cost(k, old)) * table.weight[k];
    }
    Some(e)
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    error: f64,
    vertex: u32,
    stamp: u32,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    // Max-heap order: smallest error first, then lowest vertex id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .error
            .total_cmp(&self.error)
            .then(other.vertex.cmp(&self.vertex))
            .then(other.stamp.cmp(&self.stamp))
    }
}

/// Incremental greedy vertex removal over one scan.
///
/// Removal errors are cached in a priority queue with stale-entry
/// invalidation; after each removal only the vertices whose error can have
/// changed are rescored.
#[derive(Clone)]
pub struct Extractor {
    table: Arc<RayTable>,
    wm: WorkingMap,
    hits: Vec<Option<f64>>,
    errors: Vec<Option<f64>>,
    stamps: Vec<u32>,
    heap: BinaryHeap<QueueEntry>,
    removals: usize,
}

impl Extractor {
    pub fn new(
        scan: &Scan,
        config: &ExtractionConfig,
        noise: &dyn NoiseModel,
    ) -> Result<Self, ExtractionError> {
        config.validate()?;
        let r_max = config.effective_r_max(scan);
        let table = RayTable::new(scan, noise, r_max, config.d_rm);
        let wm = initial_working_map(scan, r_max, config.l_max);
        let hits = table.hits(&wm);
        let mut ex = Self {
            table: Arc::new(table),
            errors: vec![None; wm.capacity()],
            stamps: vec![0; wm.capacity()],
            wm,
            hits,
            heap: BinaryHeap::new(),
            removals: 0,
        };
        let all: Vec<u32> = ex.wm.vertices().collect();
        for v in all {
            ex.rescore(v);
        }
        Ok(ex)
    }

    fn rescore(&mut self, v: u32) {
        let vi = v as usize;
        self.stamps[vi] = self.stamps[vi].wrapping_add(1);
        self.errors[vi] = if self.wm.is_alive(v) {
            score_removal(&self.table, &self.wm, &self.hits, v, None)
        } else {
            None
        };
        if let Some(error) = self.errors[vi] {
            self.heap.push(QueueEntry {
                error,
                vertex: v,
                stamp: self.stamps[vi],
            });
        }
    }

    /// Current number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.wm.live_count()
    }

    pub fn removals(&self) -> usize {
        self.removals
    }

    /// Current map and the ray index behind every vertex.
    pub fn map(&self) -> (PolylineMap, Vec<Vec<usize>>) {
        let (map, ids) = self.wm.to_map();
        let ids = ids
            .into_iter()
            .map(|l| l.into_iter().map(|v| v as usize).collect())
            .collect();
        (map, ids)
    }

    /// Cached removal error of the vertex generated by ray `vertex`, or
    /// `None` if it is gone or cannot be removed.
    pub fn cached_error(&self, vertex: usize) -> Option<f64> {
        self.errors.get(vertex).copied().flatten()
    }

    /// Residual RMSE over the rays that currently hit the map.
    pub fn rmse(&self) -> f64 {
        let (mut sum, mut n) = (0.0, 0usize);
        for &k in &self.table.active {
            if let Some(t) = self.hits[k] {
                let d = self.table.range[k] - t;
                sum += d * d;
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }

    fn pop_best(&mut self) -> Option<QueueEntry> {
        while let Some(top) = self.heap.pop() {
            let vi = top.vertex as usize;
            if self.wm.is_alive(top.vertex) && self.stamps[vi] == top.stamp {
                return Some(top);
            }
        }
        None
    }

    /// Removes the vertex with the smallest error. Returns `None` when no
    /// vertex can be removed.
    pub fn step(&mut self) -> Option<RemovalStep> {
        let best = self.pop_best()?;
        let class = match self.wm.removal_kind(best.vertex) {
            RemovalKind::Interior { .. } => RemovalClass::Interior,
            RemovalKind::Boundary { .. } => RemovalClass::Boundary,
            _ => RemovalClass::Polyline,
        };
        self.remove(best.vertex);
        self.removals += 1;
        Some(RemovalStep {
            vertex: best.vertex as usize,
            error: best.error,
            class,
        })
    }

    fn remove(&mut self, v: u32) -> usize {
        let table = Arc::clone(&self.table);
        let kind = self.wm.removal_kind(v);
        let (inc, n) = self.wm.incident_segments(v);
        let mut changed: Vec<(Point2, Point2)> = inc[..n].iter().map(|&s| self.wm.segment(s)).collect();
        if let RemovalKind::Interior { prev, next } = kind {
            changed.push((self.wm.pos(prev), self.wm.pos(next)));
        }
        let touched: Vec<usize> = table
            .active
            .iter()
            .copied()
            .filter(|&k| changed.iter().any(|&g| table.hit(k, g).is_some()))
            .collect();

        let mut dirty = vec![false; self.wm.capacity()];
        let mark_first_hits = |wm: &WorkingMap, hits: &[Option<f64>], dirty: &mut [bool]| {
            for &k in &touched {
                let Some(t) = hits[k] else { continue };
                for (s, p, q) in wm.segments() {
                    if table.hit(k, (p, q)) == Some(t) {
                        dirty[s as usize] = true;
                        dirty[wm.next(s) as usize] = true;
                    }
                }
            }
        };
        mark_first_hits(&self.wm, &self.hits, &mut dirty);

        let (dead, removed) = self.wm.remove(v);
        for &k in &touched {
            self.hits[k] = table.first_hit(k, &self.wm, &[]);
        }
        mark_first_hits(&self.wm, &self.hits, &mut dirty);

        let survivors: [u32; 2] = match kind {
            RemovalKind::Interior { prev, next } => [prev, next],
            RemovalKind::Boundary { neighbor } => [neighbor, NONE],
            _ => [NONE, NONE],
        };
        for s in survivors.into_iter().filter(|&s| s != NONE) {
            dirty[s as usize] = true;
            if self.wm.line_len(s) <= 3 {
                for u in self.wm.line_vertices(s) {
                    dirty[u as usize] = true;
                }
            }
        }
        // Rays that changed may now cross another vertex's chord.
        for u in self.wm.vertices() {
            if dirty[u as usize] {
                continue;
            }
            let (p, q) = (self.wm.prev(u), self.wm.next(u));
            if p == NONE || q == NONE || p == q {
                continue;
            }
            let chord = (self.wm.pos(p), self.wm.pos(q));
            if touched.iter().any(|&k| table.hit(k, chord).is_some()) {
                dirty[u as usize] = true;
            }
        }

        for &d in &dead[..removed] {
            dirty[d as usize] = true;
        }
        for (u, _) in dirty.into_iter().enumerate().filter(|d| d.1) {
            self.rescore(u as u32);
        }
        removed
    }

    /// Runs the stopping rule of `config` to completion.
    pub fn run(mut self, config: &ExtractionConfig) -> Extraction {
        match config.stop {
            StopRule::VertexCount => {
                while self.vertex_count() > config.max_vertices {
                    if self.step().is_none() {
                        break;
                    }
                }
            }
            StopRule::MaxRmse(threshold) => loop {
                let snapshot = self.clone();
                if self.step().is_none() {
                    break;
                }
                if self.rmse() > threshold {
                    self = snapshot;
                    break;
                }
            },
        }
        let budget_met = match config.stop {
            StopRule::VertexCount => self.vertex_count() <= config.max_vertices,
            StopRule::MaxRmse(_) => true,
        };
        let (map, source_rays) = self.map();
        Extraction {
            map,
            source_rays,
            removals: self.removals,
            budget_met,
        }
    }
}

/// Extracts a polyline map from `scan` by greedy vertex removal.
pub fn extract(
    scan: &Scan,
    config: &ExtractionConfig,
    noise: &dyn NoiseModel,
) -> Result<Extraction, ExtractionError> {
    Ok(Extractor::new(scan, config, noise)?.run(config))
}

fn locate(map: &PolylineMap, vertex: VertexRef) -> Result<(WorkingMap, u32), ExtractionError> {
    let missing = ExtractionError::NoSuchVertex {
        polyline: vertex.polyline,
        index: vertex.index,
    };
    let (wm, ids) = WorkingMap::from_map(map);
    let id = *ids
        .get(vertex.polyline)
        .and_then(|l| l.get(vertex.index))
        .ok_or(missing)?;
    Ok((wm, id))
}

/// Rays whose predicted range can change when `vertex` is removed: those
/// whose first hit lies on a segment incident to the vertex, and those that
/// cross the chord replacing it.
pub fn rays_affected(
    map: &PolylineMap,
    vertex: VertexRef,
    scan: &Scan,
) -> Result<Vec<usize>, ExtractionError> {
    let (wm, id) = locate(map, vertex)?;
    let table = RayTable::new(scan, &crate::sensor_model::ConstantVariance::default(), f64::INFINITY, 1.0);
    let hits = table.hits(&wm);
    let mut out = Vec::new();
    score_removal(&table, &wm, &hits, id, Some(&mut out)).ok_or(ExtractionError::InvalidRemoval)?;
    Ok(out)
}

/// Variance-weighted increase of the squared residual sum caused by
/// removing `vertex`.
///
/// Rays that lose their segment at a polyline end, or that miss the map
/// after the removal, are charged `d_rm` instead of a residual.
pub fn vertex_removal_error(
    map: &PolylineMap,
    vertex: VertexRef,
    scan: &Scan,
    noise: &dyn NoiseModel,
    d_rm: f64,
) -> Result<f64, ExtractionError> {
    let (wm, id) = locate(map, vertex)?;
    let table = RayTable::new(scan, noise, f64::INFINITY, d_rm);
    let hits = table.hits(&wm);
    score_removal(&table, &wm, &hits, id, None).ok_or(ExtractionError::InvalidRemoval)
}

#[cfg(test)]
mod tests;
