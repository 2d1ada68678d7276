//! Planar primitives and ray casting against polyline maps.
//!
//! Every intersection is computed on the infinite forward axis of a ray,
//! not clipped at the measured endpoint: the predicted range of a ray is
//! independent of what the sensor actually measured.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Parametric slack on the segment parameter, so that a ray passing through
/// a vertex shared by two segments registers on both of them.
pub const SEGMENT_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("ray start and endpoint coincide")]
    ZeroLengthRay,
    #[error("polyline needs at least {needed} vertices, got {got}")]
    TooFewVertices { needed: usize, got: usize },
    #[error("consecutive vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
    #[error("vertex ({0}, {1}) is shared by more than one polyline")]
    SharedVertex(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from the x axis.
    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3-D cross product.
    #[inline]
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotate by `angle` about the origin.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A single range measurement: a beam from `start` that returned at `end`.
///
/// The unit direction and the measured range are cached at construction
/// because they are needed for every intersection query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    start: Point2,
    end: Point2,
    max_range: bool,
    dir: Point2,
    range: f64,
}

impl Ray {
    pub fn new(start: Point2, end: Point2, max_range: bool) -> Result<Self, GeometryError> {
        for p in [start, end] {
            if !p.is_finite() {
                return Err(GeometryError::NonFinite(p.x, p.y));
            }
        }
        let delta = end - start;
        let range = delta.norm();
        if range <= 0.0 {
            return Err(GeometryError::ZeroLengthRay);
        }
        Ok(Self {
            start,
            end,
            max_range,
            dir: delta * (1.0 / range),
            range,
        })
    }

    /// Ray from `start` along `bearing` (world frame) returning at `range`.
    pub fn from_polar(
        start: Point2,
        bearing: f64,
        range: f64,
        max_range: bool,
    ) -> Result<Self, GeometryError> {
        Self::new(start, start + Point2::from_angle(bearing) * range, max_range)
    }

    #[inline]
    pub fn start(&self) -> Point2 {
        self.start
    }

    #[inline]
    pub fn end(&self) -> Point2 {
        self.end
    }

    #[inline]
    pub fn is_max_range(&self) -> bool {
        self.max_range
    }

    /// Unit vector from start towards the endpoint.
    #[inline]
    pub fn direction(&self) -> Point2 {
        self.dir
    }

    /// Measured range `‖end − start‖`.
    #[inline]
    pub fn range(&self) -> f64 {
        self.range
    }

    /// World-frame bearing of the ray axis.
    pub fn bearing(&self) -> f64 {
        self.dir.angle()
    }

    #[inline]
    pub fn point_at(&self, t: f64) -> Point2 {
        self.start + self.dir * t
    }

    /// Signed distance of `p` from the ray axis (positive on the left).
    pub fn axis_offset(&self, p: Point2) -> f64 {
        self.dir.cross(p - self.start)
    }
}

/// Distance along the ray axis to the closed segment `[p, q]`, or `None` if
/// the forward axis misses it.
///
/// When the axis and segment are collinear, the smallest non-negative
/// overlap parameter is returned.
#[inline]
pub fn ray_segment_intersection(ray: &Ray, p: Point2, q: Point2) -> Option<f64> {
    axis_segment_intersection(ray.start, ray.dir, p, q)
}

#[inline]
pub(crate) fn axis_segment_intersection(
    origin: Point2,
    dir: Point2,
    p: Point2,
    q: Point2,
) -> Option<f64> {
    let e = q - p;
    let w = p - origin;
    let denom = dir.cross(e);
    if denom == 0.0 {
        // Parallel: only a collinear overlap can hit.
        let scale = w.norm().max(1.0);
        if w.cross(dir).abs() > SEGMENT_EPS * scale {
            return None;
        }
        let tp = w.dot(dir);
        let tq = (q - origin).dot(dir);
        let (lo, hi) = if tp <= tq { (tp, tq) } else { (tq, tp) };
        if hi < 0.0 {
            return None;
        }
        return Some(lo.max(0.0));
    }
    let t = w.cross(e) / denom;
    if t < 0.0 {
        return None;
    }
    let s = w.cross(dir) / denom;
    if !(-SEGMENT_EPS..=1.0 + SEGMENT_EPS).contains(&s) {
        return None;
    }
    Some(t)
}

/// An ordered chain of vertices, optionally closed into a polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point2>,
    closed: bool,
}

impl Polyline {
    pub fn new(vertices: Vec<Point2>, closed: bool) -> Result<Self, GeometryError> {
        let needed = if closed { 3 } else { 2 };
        if vertices.len() < needed {
            return Err(GeometryError::TooFewVertices {
                needed,
                got: vertices.len(),
            });
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(p.x, p.y));
        }
        let n = vertices.len();
        let pairs = if closed { n } else { n - 1 };
        for i in 0..pairs {
            let j = (i + 1) % n;
            if vertices[i] == vertices[j] {
                return Err(GeometryError::RepeatedVertex(i, j));
            }
        }
        Ok(Self { vertices, closed })
    }

    pub fn open(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        Self::new(vertices, false)
    }

    pub fn closed(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        Self::new(vertices, true)
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    /// Segment `i` as its two end points.
    pub fn segment(&self, i: usize) -> (Point2, Point2) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        (0..self.segment_count()).map(move |i| self.segment(i))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(p, q)| p.distance(q)).sum()
    }
}

/// Where a ray first meets a map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub polyline: usize,
    pub segment: usize,
}

/// A set of vertex-disjoint polylines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolylineMap {
    polylines: Vec<Polyline>,
}

impl PolylineMap {
    /// Builds a map, rejecting vertices that appear in more than one polyline.
    pub fn new(polylines: Vec<Polyline>) -> Result<Self, GeometryError> {
        let mut owner = std::collections::HashMap::new();
        for (i, line) in polylines.iter().enumerate() {
            for v in line.vertices() {
                let key = (v.x.to_bits(), v.y.to_bits());
                if let Some(&other) = owner.get(&key) {
                    if other != i {
                        return Err(GeometryError::SharedVertex(v.x, v.y));
                    }
                }
                owner.insert(key, i);
            }
        }
        Ok(Self { polylines })
    }

    /// Skips the disjointness check, for maps built from distinct scan endpoints.
    pub(crate) fn from_parts_unchecked(polylines: Vec<Polyline>) -> Self {
        Self { polylines }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    #[inline]
    pub fn polylines(&self) -> &[Polyline] {
        &self.polylines
    }

    pub fn into_polylines(self) -> Vec<Polyline> {
        self.polylines
    }

    /// Number of polylines, `I`.
    pub fn polyline_count(&self) -> usize {
        self.polylines.len()
    }

    /// Total number of vertices, `J`.
    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(Polyline::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.polylines.iter().flat_map(Polyline::segments)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point2> + '_ {
        self.polylines.iter().flat_map(|l| l.vertices().iter().copied())
    }
}

/// Predicted range: distance from the ray start to the first intersection
/// of its forward axis with the map.
pub fn first_intersection_distance(ray: &Ray, map: &PolylineMap) -> Option<f64> {
    map.segments()
        .filter_map(|(p, q)| ray_segment_intersection(ray, p, q))
        .min_by(f64::total_cmp)
}

/// Like [`first_intersection_distance`], also reporting which segment was
/// hit. On ties the lowest (polyline, segment) pair wins.
pub fn first_hit(ray: &Ray, map: &PolylineMap) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for (li, line) in map.polylines().iter().enumerate() {
        for si in 0..line.segment_count() {
            let (p, q) = line.segment(si);
            if let Some(t) = ray_segment_intersection(ray, p, q) {
                if best.is_none_or(|b| t < b.distance) {
                    best = Some(Hit {
                        distance: t,
                        polyline: li,
                        segment: si,
                    });
                }
            }
        }
    }
    best
}

/// Measured minus predicted range, `r(z) − r̂(z, L)`.
pub fn residual(ray: &Ray, map: &PolylineMap) -> Option<f64> {
    first_intersection_distance(ray, map).map(|t| ray.range() - t)
}

/// Perpendicular distance from `p` to the infinite line through `a` and `b`.
/// Falls back to the point distance when `a == b`.
pub fn line_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let e = b - a;
    let len = e.norm();
    if len == 0.0 {
        return p.distance(a);
    }
    e.cross(p - a).abs() / len
}

/// Twice the signed area of triangle `abc`.
#[inline]
pub fn signed_area2(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Signed shoelace area of a closed ring (counter-clockwise positive).
pub fn ring_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += ring[i].cross(ring[(i + 1) % n]);
    }
    0.5 * acc
}

/// Proper or touching intersection test for closed segments `[p1,q1]` and `[p2,q2]`.
pub fn segments_intersect(p1: Point2, q1: Point2, p2: Point2, q2: Point2) -> bool {
    fn on_segment(p: Point2, q: Point2, r: Point2) -> bool {
        q.x <= p.x.max(r.x) && q.x >= p.x.min(r.x) && q.y <= p.y.max(r.y) && q.y >= p.y.min(r.y)
    }
    let o1 = signed_area2(p1, q1, p2);
    let o2 = signed_area2(p1, q1, q2);
    let o3 = signed_area2(p2, q2, p1);
    let o4 = signed_area2(p2, q2, q1);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(p1, p2, q1))
        || (o2 == 0.0 && on_segment(p1, q2, q1))
        || (o3 == 0.0 && on_segment(p2, p1, q2))
        || (o4 == 0.0 && on_segment(p2, q1, q2))
}
