//! Refinement of vertex positions by direct search on the scan likelihood.
//!
//! The topology of the map is fixed; only vertex coordinates move. Ends of
//! open polylines slide along the axis of the ray that generated them. A
//! joint Nelder–Mead search over all coordinates is followed by sweeps of
//! small per-vertex searches that polish the result.

pub mod nelder_mead;
mod parameterization;

use thiserror::Error;

use crate::geometry::{axis_segment_intersection, Point2, PolylineMap};
use crate::scan::Scan;
use crate::sensor_model::NoiseModel;
use nelder_mead::{minimize, NelderMeadOptions};
pub use parameterization::{VertexParameterization, VertexSlot};

/// Objective value of candidates with coincident consecutive vertices.
pub const DEGENERATE_PENALTY: f64 = 1e30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("end vertex {index} of polyline {polyline} is not a scan endpoint")]
    NoGeneratingRay { polyline: usize, index: usize },
    #[error("invalid optimizer option {name}: {value}")]
    InvalidOption { name: &'static str, value: f64 },
}

/// Treatment of rays whose hit status differs from the input map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoveragePolicy {
    /// Reject every candidate that changes which rays hit the map.
    #[default]
    Preserve,
    /// Charge `d_rm` for rays that lose their hit; newly hit rays pay their
    /// residual.
    Penalize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Joint search budget, in evaluations per search dimension.
    pub evaluations_per_dimension: usize,
    pub initial_step: f64,
    /// Relative objective spread at which the joint search stops.
    pub f_tol: f64,
    /// Simplex radius, in meters, at which the joint search stops.
    pub x_tol: f64,
    /// Maximum number of per-vertex polishing sweeps; 0 disables polishing.
    pub polish_sweeps: usize,
    /// Simplex radius at which a per-vertex search stops.
    pub polish_x_tol: f64,
    /// Evaluation budget of one per-vertex search.
    pub polish_evaluations: usize,
    /// Residual charged for rays that lose their hit.
    pub d_rm: f64,
    pub coverage: CoveragePolicy,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            evaluations_per_dimension: 200,
            initial_step: 0.05,
            f_tol: 1e-10,
            x_tol: 1e-6,
            polish_sweeps: 30,
            polish_x_tol: 1e-12,
            polish_evaluations: 400,
            d_rm: 0.5,
            coverage: CoveragePolicy::Preserve,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let checks = [
            ("initial_step", self.initial_step, self.initial_step > 0.0),
            ("f_tol", self.f_tol, self.f_tol > 0.0),
            ("x_tol", self.x_tol, self.x_tol > 0.0),
            ("polish_x_tol", self.polish_x_tol, self.polish_x_tol > 0.0),
            ("d_rm", self.d_rm, self.d_rm > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(OptimizeError::InvalidOption { name, value });
            }
        }
        Ok(())
    }
}

/// Reflected rays in a form suited to repeated evaluation.
struct RayData {
    origin: Vec<Point2>,
    dir: Vec<Point2>,
    range: Vec<f64>,
    weight: Vec<f64>,
}

impl RayData {
    fn new(scan: &Scan, noise: &dyn NoiseModel) -> Self {
        let refl: Vec<_> = scan.reflected().collect();
        Self {
            origin: refl.iter().map(|(_, r)| r.start()).collect(),
            dir: refl.iter().map(|(_, r)| r.direction()).collect(),
            range: refl.iter().map(|(_, r)| r.range()).collect(),
            weight: refl.iter().map(|&(k, r)| 1.0 / noise.variance(k, r)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.range.len()
    }

    #[inline]
    fn hit(&self, k: usize, p: Point2, q: Point2) -> Option<f64> {
        axis_segment_intersection(self.origin[k], self.dir[k], p, q)
    }

    fn first_hit(&self, k: usize, segments: &[(Point2, Point2)]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for &(p, q) in segments {
            if let Some(t) = self.hit(k, p, q) {
                if best.is_none_or(|b| t < b) {
                    best = Some(t);
                }
            }
        }
        best
    }
}

fn segments_of(lines: &[Vec<Point2>], closed: impl Fn(usize) -> bool) -> Vec<(Point2, Point2)> {
    let mut out = Vec::new();
    for (li, v) in lines.iter().enumerate() {
        let n = v.len();
        for i in 0..n - 1 {
            out.push((v[i], v[i + 1]));
        }
        if closed(li) && n >= 3 {
            out.push((v[n - 1], v[0]));
        }
    }
    out
}

fn degenerate(lines: &[Vec<Point2>], closed: impl Fn(usize) -> bool) -> bool {
    lines.iter().enumerate().any(|(li, v)| {
        v.iter().any(|p| !p.is_finite())
            || v.windows(2).any(|w| w[0] == w[1])
            || (closed(li) && v.first() == v.last())
    })
}

/// Weighted squared residual sum of a candidate map.
///
/// Rays hitting the candidate cost `d²/Σ_k`. Rays that hit the input map but
/// miss the candidate cost `d_rm²/Σ_k`. Under
/// [`CoveragePolicy::Preserve`] any change of the hit set adds
/// [`DEGENERATE_PENALTY`] on top; degenerate candidates score twice that.
pub struct Objective<'a> {
    param: &'a VertexParameterization,
    rays: RayData,
    explained: Vec<bool>,
    d_rm2: f64,
    coverage: CoveragePolicy,
}

impl<'a> Objective<'a> {
    pub fn new(
        param: &'a VertexParameterization,
        scan: &Scan,
        noise: &dyn NoiseModel,
        d_rm: f64,
        coverage: CoveragePolicy,
    ) -> Self {
        let rays = RayData::new(scan, noise);
        let segments = segments_of(param.base(), |l| param.is_closed(l));
        let explained = (0..rays.len())
            .map(|k| rays.first_hit(k, &segments).is_some())
            .collect();
        Self {
            param,
            rays,
            explained,
            d_rm2: d_rm * d_rm,
            coverage,
        }
    }

    /// Number of rays the input map explains.
    pub fn explained_count(&self) -> usize {
        self.explained.iter().filter(|&&e| e).count()
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let lines = self.param.vertices(params);
        self.value_of(&lines)
    }

    fn value_of(&self, lines: &[Vec<Point2>]) -> f64 {
        let closed = |l| self.param.is_closed(l);
        if degenerate(lines, closed) {
            return 2.0 * DEGENERATE_PENALTY;
        }
        let segments = segments_of(lines, closed);
        let mut total = 0.0;
        let mut changed = false;
        for k in 0..self.rays.len() {
            let t = self.rays.first_hit(k, &segments);
            total += self.ray_cost(k, t, &mut changed);
        }
        self.finish(total, changed)
    }

    #[inline]
    fn ray_cost(&self, k: usize, t: Option<f64>, changed: &mut bool) -> f64 {
        *changed |= t.is_some() != self.explained[k];
        match t {
            Some(t) => {
                let d = self.rays.range[k] - t;
                d * d * self.rays.weight[k]
            }
            None if self.explained[k] => self.d_rm2 * self.rays.weight[k],
            None => 0.0,
        }
    }

    #[inline]
    fn finish(&self, total: f64, changed: bool) -> f64 {
        if changed && self.coverage == CoveragePolicy::Preserve {
            total + DEGENERATE_PENALTY
        } else {
            total
        }
    }
}

/// Objective restricted to moving one vertex, with the other segments'
/// first hits cached.
struct LocalObjective<'o, 'a> {
    objective: &'o Objective<'a>,
    background: Vec<Option<f64>>,
    prev: Option<Point2>,
    next: Option<Point2>,
    polyline: usize,
    index: usize,
}

impl<'o, 'a> LocalObjective<'o, 'a> {
    fn new(objective: &'o Objective<'a>, lines: &[Vec<Point2>], polyline: usize, index: usize) -> Self {
        let param = objective.param;
        let v = &lines[polyline];
        let n = v.len();
        let closed = param.is_closed(polyline);
        let prev = if index > 0 {
            Some(v[index - 1])
        } else if closed {
            Some(v[n - 1])
        } else {
            None
        };
        let next = if index + 1 < n {
            Some(v[index + 1])
        } else if closed {
            Some(v[0])
        } else {
            None
        };
        let mut others = Vec::new();
        for (li, line) in lines.iter().enumerate() {
            let m = line.len();
            let seg_count = if param.is_closed(li) { m } else { m - 1 };
            for s in 0..seg_count {
                let touches = li == polyline && (s == index || (s + 1) % m == index);
                if !touches {
                    others.push((line[s], line[(s + 1) % m]));
                }
            }
        }
        let rays = &objective.rays;
        let background = (0..rays.len()).map(|k| rays.first_hit(k, &others)).collect();
        Self {
            objective,
            background,
            prev,
            next,
            polyline,
            index,
        }
    }

    fn value(&self, p: Point2) -> f64 {
        if !p.is_finite() || self.prev == Some(p) || self.next == Some(p) {
            return 2.0 * DEGENERATE_PENALTY;
        }
        let obj = self.objective;
        let rays = &obj.rays;
        let mut total = 0.0;
        let mut changed = false;
        for k in 0..rays.len() {
            let mut t = self.background[k];
            for q in [self.prev, self.next].into_iter().flatten() {
                if let Some(h) = rays.hit(k, q, p) {
                    if t.is_none_or(|b| h < b) {
                        t = Some(h);
                    }
                }
            }
            total += obj.ray_cost(k, t, &mut changed);
        }
        obj.finish(total, changed)
    }
}

/// Diagnostics of an [`optimize`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub dimension: usize,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub evaluations: usize,
    /// False if the joint search hit its evaluation cap.
    pub converged: bool,
    pub sweeps: usize,
    /// False if the input map was returned unchanged.
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub map: PolylineMap,
    pub report: OptimizeReport,
}

fn residual_rmse(scan: &Scan, map: &PolylineMap) -> f64 {
    crate::metrics::rmse(scan, map).unwrap_or(0.0)
}

/// Moves the vertices of `map` to lower the weighted squared residual sum
/// of `scan`, keeping the topology.
///
/// The result never scores worse than the input, neither in objective nor
/// in RMSE; if the search fails to improve, the input is returned.
pub fn optimize(
    map: &PolylineMap,
    scan: &Scan,
    noise: &dyn NoiseModel,
    opts: &OptimizerOptions,
) -> Result<Optimized, OptimizeError> {
    opts.validate()?;
    let param = VertexParameterization::new(map, scan)?;
    let objective = Objective::new(&param, scan, noise, opts.d_rm, opts.coverage);
    let dim = param.dimension();
    let x0 = param.initial();
    let f0 = objective.value(&x0);

    let joint = minimize(
        |x| objective.value(x),
        &x0,
        &NelderMeadOptions {
            initial_step: opts.initial_step,
            f_tol: opts.f_tol,
            x_tol: opts.x_tol,
            max_evaluations: opts.evaluations_per_dimension * dim.max(1),
            ..Default::default()
        },
    );
    let mut params = if joint.value < f0 { joint.x } else { x0.clone() };
    let mut current = joint.value.min(f0);
    let mut evaluations = joint.evaluations;

    let (polished, sweeps, evals) = polish(&objective, &mut params, current, opts);
    current = polished;
    evaluations += evals;

    let unchanged = |final_objective| Optimized {
        map: map.clone(),
        report: OptimizeReport {
            dimension: dim,
            initial_objective: f0,
            final_objective,
            evaluations,
            converged: joint.converged,
            sweeps,
            improved: false,
        },
    };
    if current >= f0 {
        return Ok(unchanged(f0));
    }
    let Ok(candidate) = param.to_map(&params) else {
        return Ok(unchanged(f0));
    };
    if residual_rmse(scan, &candidate) > residual_rmse(scan, map) {
        return Ok(unchanged(f0));
    }
    Ok(Optimized {
        map: candidate,
        report: OptimizeReport {
            dimension: dim,
            initial_objective: f0,
            final_objective: current,
            evaluations,
            converged: joint.converged,
            sweeps,
            improved: true,
        },
    })
}

/// Per-vertex polishing sweeps. Returns the final objective, the number of
/// sweeps run and the evaluations used.
fn polish(
    objective: &Objective<'_>,
    params: &mut [f64],
    mut current: f64,
    opts: &OptimizerOptions,
) -> (f64, usize, usize) {
    let param = objective.param;
    let slots: Vec<(usize, usize, VertexSlot)> = param
        .slots()
        .iter()
        .enumerate()
        .flat_map(|(li, s)| s.iter().enumerate().map(move |(i, &slot)| (li, i, slot)))
        .collect();
    let min_step = opts.polish_x_tol * 10.0;
    let mut steps = vec![opts.initial_step; slots.len()];
    let mut evaluations = 0;
    let mut sweeps = 0;
    let mut lines = Vec::new();

    while sweeps < opts.polish_sweeps {
        sweeps += 1;
        let start = current;
        for (si, &(li, i, slot)) in slots.iter().enumerate() {
            param.fill_vertices(params, &mut lines);
            let local = LocalObjective::new(objective, &lines, li, i);
            let (offset, width) = match slot {
                VertexSlot::Free { offset } => (offset, 2),
                VertexSlot::Axis { offset, .. } => (offset, 1),
            };
            let x0 = params[offset..offset + width].to_vec();
            let mut scratch = params.to_vec();
            let m = minimize(
                |x| {
                    scratch[offset..offset + width].copy_from_slice(x);
                    local.value(param.vertex(local.polyline, local.index, &scratch))
                },
                &x0,
                &NelderMeadOptions {
                    initial_step: steps[si],
                    f_tol: 1e-15,
                    x_tol: opts.polish_x_tol,
                    max_evaluations: opts.polish_evaluations,
                    ..Default::default()
                },
            );
            evaluations += m.evaluations;
            let moved = m
                .x
                .iter()
                .zip(&x0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if m.value < current {
                params[offset..offset + width].copy_from_slice(&m.x);
                current = m.value;
                steps[si] = (4.0 * moved).clamp(min_step, opts.initial_step);
            } else {
                steps[si] = (0.25 * steps[si]).max(min_step);
            }
        }
        if start - current <= 1e-14 * current.abs() {
            break;
        }
    }
    (current, sweeps, evaluations)
}
