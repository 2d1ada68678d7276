use crate::geometry::{GeometryError, Point2, Polyline, PolylineMap};
use crate::scan::Scan;

use super::OptimizeError;

/// How one vertex maps to search coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexSlot {
    /// Moves freely; two coordinates starting at `offset`.
    Free { offset: usize },
    /// End of an open polyline; slides along the axis of ray `ray`, one
    /// coordinate at `offset`.
    Axis {
        offset: usize,
        ray: usize,
        direction: Point2,
    },
}

/// Search coordinates for the vertices of a map with fixed topology.
///
/// Coordinates are displacements from the input vertices, so the zero
/// vector reproduces the input exactly. Interior vertices and all vertices
/// of closed polygons contribute two coordinates; each end of an open
/// polyline contributes one, its offset along the generating ray. The
/// dimension is therefore `2(J − I)` for `I` open polylines.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexParameterization {
    base: Vec<Vec<Point2>>,
    closed: Vec<bool>,
    slots: Vec<Vec<VertexSlot>>,
    dimension: usize,
}

/// Index of the reflected ray whose endpoint matches `v`; ties go to the
/// lowest index.
fn generating_ray(scan: &Scan, v: Point2) -> Option<usize> {
    let tol = 1e-9 * v.norm().max(1.0);
    scan.reflected()
        .map(|(k, r)| (k, r.end().distance(v)))
        .filter(|&(_, d)| d <= tol)
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(k, _)| k)
}

impl VertexParameterization {
    /// Requires every open-polyline end to coincide with a scan endpoint.
    pub fn new(map: &PolylineMap, scan: &Scan) -> Result<Self, OptimizeError> {
        let mut offset = 0;
        let mut slots = Vec::with_capacity(map.polyline_count());
        for (li, line) in map.polylines().iter().enumerate() {
            let n = line.len();
            let mut line_slots = Vec::with_capacity(n);
            for (i, &v) in line.vertices().iter().enumerate() {
                let boundary = !line.is_closed() && (i == 0 || i + 1 == n);
                if boundary {
                    let ray = generating_ray(scan, v).ok_or(OptimizeError::NoGeneratingRay {
                        polyline: li,
                        index: i,
                    })?;
                    line_slots.push(VertexSlot::Axis {
                        offset,
                        ray,
                        direction: scan.rays()[ray].direction(),
                    });
                    offset += 1;
                } else {
                    line_slots.push(VertexSlot::Free { offset });
                    offset += 2;
                }
            }
            slots.push(line_slots);
        }
        Ok(Self {
            base: map.polylines().iter().map(|l| l.vertices().to_vec()).collect(),
            closed: map.polylines().iter().map(Polyline::is_closed).collect(),
            slots,
            dimension: offset,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn initial(&self) -> Vec<f64> {
        vec![0.0; self.dimension]
    }

    pub fn slots(&self) -> &[Vec<VertexSlot>] {
        &self.slots
    }

    pub fn base(&self) -> &[Vec<Point2>] {
        &self.base
    }

    pub fn is_closed(&self, polyline: usize) -> bool {
        self.closed[polyline]
    }

    /// Ray generating the given vertex, for open-polyline ends.
    pub fn generating_ray(&self, polyline: usize, index: usize) -> Option<usize> {
        match self.slots.get(polyline)?.get(index)? {
            VertexSlot::Axis { ray, .. } => Some(*ray),
            VertexSlot::Free { .. } => None,
        }
    }

    #[inline]
    pub(crate) fn vertex(&self, polyline: usize, index: usize, params: &[f64]) -> Point2 {
        let base = self.base[polyline][index];
        match self.slots[polyline][index] {
            VertexSlot::Free { offset } => {
                base + Point2::new(params[offset], params[offset + 1])
            }
            VertexSlot::Axis {
                offset, direction, ..
            } => base + direction * params[offset],
        }
    }

    /// Writes the vertices described by `params` into `out`.
    pub fn fill_vertices(&self, params: &[f64], out: &mut Vec<Vec<Point2>>) {
        out.resize_with(self.base.len(), Vec::new);
        for (li, line) in out.iter_mut().enumerate() {
            line.clear();
            line.extend((0..self.base[li].len()).map(|i| self.vertex(li, i, params)));
        }
    }

    pub fn vertices(&self, params: &[f64]) -> Vec<Vec<Point2>> {
        let mut out = Vec::new();
        self.fill_vertices(params, &mut out);
        out
    }

    pub fn to_map(&self, params: &[f64]) -> Result<PolylineMap, GeometryError> {
        let lines = self
            .vertices(params)
            .into_iter()
            .zip(&self.closed)
            .map(|(v, &c)| Polyline::new(v, c))
            .collect::<Result<Vec<_>, _>>()?;
        PolylineMap::new(lines)
    }
}
