//! Range- and bearing-based position estimation.
//!
//! Trilateration minimizes `Σᵢ (|x − aᵢ| − dᵢ)²` with Gauss-Newton. The
//! iteration is seeded from the intersections of the two circles with the
//! smallest measured radii; both intersection points are tried and the lower
//! final cost wins. When those circles miss each other the remaining pairs are
//! tried in order, and the anchor centroid is the last resort.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{spans_plane, true_distance, Anchor, Point2, DEFAULT_COLLINEARITY_TOL};

/// Relative slack (on `h²`, in units of `max(r1, r2)²`) under which two
/// circles that just miss are reported as tangent.
const TANGENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeMeasurement {
    pub anchor_id: String,
    pub distance_m: f64,
    /// Standard deviation of the range error; 0 for a perfect measurement.
    #[serde(default)]
    pub sigma_m: f64,
}

impl RangeMeasurement {
    pub fn exact(anchor_id: impl Into<String>, distance_m: f64) -> Self {
        Self { anchor_id: anchor_id.into(), distance_m, sigma_m: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionEstimate {
    pub position: Point2,
    pub residual_rms_m: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once a Gauss-Newton step is shorter than this, meters.
    pub step_tol_m: f64,
    /// Stop once the cost (m²) improves by less than this.
    pub improvement_tol: f64,
    pub collinearity_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            step_tol_m: 1e-10,
            improvement_tol: 1e-12,
            collinearity_tol: DEFAULT_COLLINEARITY_TOL,
        }
    }
}

/// Intersection points of two circles: none, one (tangent) or two.
pub fn circle_intersections(c1: Point2, r1: f64, c2: Point2, r2: f64) -> Result<Vec<Point2>> {
    if !(r1 >= 0.0 && r2 >= 0.0 && r1.is_finite() && r2.is_finite()) {
        return Err(Error::Domain(format!("radii must be finite and nonnegative, got {r1}, {r2}")));
    }
    let delta = c2 - c1;
    let d = delta.norm();
    if d == 0.0 {
        return Err(Error::Geometry("circle centers coincide".into()));
    }
    // foot of the chord along the center line, and half chord length
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h2 = r1 * r1 - a * a;
    let rmax = r1.max(r2);
    let unit = delta * (1.0 / d);
    let foot = c1 + unit * a;
    if h2 < 0.0 {
        if h2 >= -TANGENCY_TOL * rmax * rmax {
            return Ok(vec![foot]);
        }
        return Ok(Vec::new());
    }
    if h2 == 0.0 {
        return Ok(vec![foot]);
    }
    let h = h2.sqrt();
    let normal = Point2::new(-unit.y, unit.x);
    Ok(vec![foot + normal * h, foot - normal * h])
}

/// `|x − aᵢ| − dᵢ` for every anchor.
pub fn range_residuals(x: Point2, anchors: &[Point2], distances: &[f64]) -> Vec<f64> {
    anchors.iter().zip(distances).map(|(a, d)| true_distance(x, *a) - d).collect()
}

/// Rows `∂rᵢ/∂x = (x − aᵢ) / |x − aᵢ|`; zero when `x` sits on the anchor.
pub fn range_jacobian(x: Point2, anchors: &[Point2]) -> Vec<[f64; 2]> {
    anchors
        .iter()
        .map(|a| {
            let v = x - *a;
            let n = v.norm();
            if n > 0.0 {
                [v.x / n, v.y / n]
            } else {
                [0.0, 0.0]
            }
        })
        .collect()
}

fn cost(x: Point2, anchors: &[Point2], distances: &[f64]) -> f64 {
    anchors
        .iter()
        .zip(distances)
        .map(|(a, d)| {
            let r = true_distance(x, *a) - d;
            r * r
        })
        .sum()
}

fn gauss_newton(
    seed: Point2,
    anchors: &[Point2],
    distances: &[f64],
    opts: &SolverOptions,
) -> PositionEstimate {
    let mut x = seed;
    let mut c = cost(x, anchors, distances);
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=opts.max_iterations {
        iterations = it;
        let r = range_residuals(x, anchors, distances);
        let j = range_jacobian(x, anchors);
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (row, ri) in j.iter().zip(&r) {
            a11 += row[0] * row[0];
            a12 += row[0] * row[1];
            a22 += row[1] * row[1];
            g1 += row[0] * ri;
            g2 += row[1] * ri;
        }
        let det = a11 * a22 - a12 * a12;
        let trace = a11 + a22;
        let well_posed = det > 1e-14 * trace * trace;
        if !well_posed {
            break;
        }
        let step = Point2::new(-(a22 * g1 - a12 * g2) / det, -(a11 * g2 - a12 * g1) / det);

        // halve until the cost does not increase
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = x + step * t;
            let cc = cost(cand, anchors, distances);
            if cc <= c {
                accepted = Some((cand, cc));
                break;
            }
            t *= 0.5;
        }
        let Some((next, next_cost)) = accepted else {
            // no descent along the Gauss-Newton direction: numerically at the minimum
            converged = true;
            break;
        };
        let step_len = step.norm() * t;
        let improvement = c - next_cost;
        x = next;
        c = next_cost;
        if step_len < opts.step_tol_m || improvement < opts.improvement_tol {
            converged = true;
            break;
        }
    }

    PositionEstimate { position: x, residual_rms_m: (c / anchors.len() as f64).sqrt(), converged, iterations }
}

fn seeds(anchors: &[Point2], distances: &[f64]) -> Vec<Point2> {
    let mut order: Vec<usize> = (0..anchors.len()).collect();
    order.sort_by(|&i, &j| distances[i].total_cmp(&distances[j]).then(i.cmp(&j)));
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            let (i, j) = (order[a], order[b]);
            if let Ok(points) = circle_intersections(anchors[i], distances[i], anchors[j], distances[j]) {
                if !points.is_empty() {
                    return points;
                }
            }
        }
    }
    let n = anchors.len() as f64;
    let sum = anchors.iter().fold(Point2::default(), |acc, p| acc + *p);
    vec![sum * (1.0 / n)]
}

/// Trilaterates from anchor positions and matching distances.
pub fn trilaterate_points(
    anchors: &[Point2],
    distances: &[f64],
    opts: &SolverOptions,
) -> Result<PositionEstimate> {
    if anchors.len() != distances.len() {
        return Err(Error::Parameter(format!("{} anchors but {} distances", anchors.len(), distances.len())));
    }
    if anchors.len() < 3 {
        return Err(Error::Geometry(format!(
            "trilateration needs at least 3 anchors, got {}",
            anchors.len()
        )));
    }
    if let Some(d) = distances.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::Domain(format!("distances must be finite and nonnegative, got {d}")));
    }
    if anchors.iter().any(|a| !a.is_finite()) {
        return Err(Error::Domain("anchor coordinates must be finite".into()));
    }
    if !spans_plane(anchors, opts.collinearity_tol) {
        return Err(Error::Geometry("anchors are collinear".into()));
    }
    Ok(trilaterate_unchecked(anchors, distances, opts))
}

/// Gauss-Newton from all seeds without re-validating the geometry.
pub(crate) fn trilaterate_unchecked(
    anchors: &[Point2],
    distances: &[f64],
    opts: &SolverOptions,
) -> PositionEstimate {
    seeds(anchors, distances)
        .into_iter()
        .map(|s| gauss_newton(s, anchors, distances, opts))
        .reduce(|best, e| if e.residual_rms_m < best.residual_rms_m { e } else { best })
        .expect("at least one seed")
}

/// Trilaterates a target from per-anchor range measurements, matched by anchor id.
pub fn trilaterate(
    anchors: &[Anchor],
    measurements: &[RangeMeasurement],
    opts: &SolverOptions,
) -> Result<PositionEstimate> {
    let mut positions = Vec::with_capacity(measurements.len());
    let mut distances = Vec::with_capacity(measurements.len());
    for (i, m) in measurements.iter().enumerate() {
        if measurements[..i].iter().any(|o| o.anchor_id == m.anchor_id) {
            return Err(Error::Parameter(format!("duplicate measurement for anchor {}", m.anchor_id)));
        }
        if m.sigma_m.is_nan() || m.sigma_m < 0.0 {
            return Err(Error::Domain(format!("sigma must be nonnegative, got {}", m.sigma_m)));
        }
        let anchor = anchors
            .iter()
            .find(|a| a.id == m.anchor_id)
            .ok_or_else(|| Error::Parameter(format!("unknown anchor {}", m.anchor_id)))?;
        positions.push(anchor.position);
        distances.push(m.distance_m);
    }
    trilaterate_points(&positions, &distances, opts)
}

/// Intersection of two bearing rays; bearings are counterclockwise from +x, radians.
pub fn triangulate(a1: Point2, bearing1: f64, a2: Point2, bearing2: f64) -> Result<Point2> {
    let baseline = a2 - a1;
    if baseline.norm() == 0.0 {
        return Err(Error::Geometry("ray origins coincide".into()));
    }
    let u1 = Point2::new(bearing1.cos(), bearing1.sin());
    let u2 = Point2::new(bearing2.cos(), bearing2.sin());
    let s = u1.cross(u2);
    if s.abs() < 1e-12 {
        return Err(Error::NoIntersection);
    }
    let t1 = baseline.cross(u2) / s;
    let t2 = baseline.cross(u1) / s;
    let slack = 1e-12 * baseline.norm();
    if t1 < -slack {
        return Err(Error::BehindRay { ray: 1 });
    }
    if t2 < -slack {
        return Err(Error::BehindRay { ray: 2 });
    }
    Ok(a1 + u1 * t1)
}
