//! Geometric ground truth: anchors, targets and topology checks.
//!
//! A [`Scene`] is planar and immutable once built. The JSON form is
//!
//! ```text
//! {"bounds": [xmin, ymin, xmax, ymax],
//!  "anchors": [{"id": "bs1", "kind": "bs", "x": -3.5, "y": 0.0}, ...],
//!  "targets": [{"id": "t1", "x": 3.0, "y": 3.0, "rcs_dbsm": -10.0}, ...]}
//! ```
//!
//! with coordinates in meters and RCS in dBsm.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative-area threshold below which three anchors count as collinear.
pub const DEFAULT_COLLINEARITY_TOL: f64 = 1e-9;

/// Number of full BS redraws `random_scene` attempts before giving up.
pub const MAX_BS_REDRAWS: usize = 10_000;

/// A point in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance_to(&self, other: Point2) -> f64 {
        true_distance(*self, other)
    }

    /// z-component of the 2D cross product.
    pub fn cross(&self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(&self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnchorKind {
    /// An active base station that transmits and receives its own echoes.
    #[serde(rename = "bs")]
    ActiveBs,
    /// A passive intelligent reflecting surface at a known position.
    #[serde(rename = "irs")]
    PassiveIrs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub id: String,
    pub kind: AnchorKind,
    #[serde(flatten)]
    pub position: Point2,
}

impl Anchor {
    pub fn bs(id: impl Into<String>, x: f64, y: f64) -> Self {
        Self { id: id.into(), kind: AnchorKind::ActiveBs, position: Point2::new(x, y) }
    }

    pub fn irs(id: impl Into<String>, x: f64, y: f64) -> Self {
        Self { id: id.into(), kind: AnchorKind::PassiveIrs, position: Point2::new(x, y) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: String,
    #[serde(flatten)]
    pub position: Point2,
    pub rcs_dbsm: f64,
}

impl Target {
    pub fn new(id: impl Into<String>, x: f64, y: f64, rcs_dbsm: f64) -> Self {
        Self { id: id.into(), position: Point2::new(x, y), rcs_dbsm }
    }
}

/// Axis-aligned rectangle, serialized as `[xmin, ymin, xmax, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Bounds {
    pub min: Point2,
    pub max: Point2,
}

impl Bounds {
    pub const fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Self { min: Point2::new(xmin, ymin), max: Point2::new(xmax, ymax) }
    }

    /// Square `[0, side] x [0, side]`.
    pub const fn square(side: f64) -> Self {
        Self::new(0.0, 0.0, side, side)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    fn check(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Parameter("bounds must be finite".into()));
        }
        if self.min.x > self.max.x || self.min.y > self.max.y {
            return Err(Error::Parameter(format!(
                "bounds are inverted: [{}, {}, {}, {}]",
                self.min.x, self.min.y, self.max.x, self.max.y
            )));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        Point2::new(self.min.x + u * self.width(), self.min.y + v * self.height())
    }
}

impl From<[f64; 4]> for Bounds {
    fn from(v: [f64; 4]) -> Self {
        Bounds::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Bounds> for [f64; 4] {
    fn from(b: Bounds) -> Self {
        [b.min.x, b.min.y, b.max.x, b.max.y]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub bounds: Bounds,
    pub anchors: Vec<Anchor>,
    pub targets: Vec<Target>,
}

impl Scene {
    pub fn new(bounds: Bounds, anchors: Vec<Anchor>, targets: Vec<Target>) -> Self {
        Self { bounds, anchors, targets }
    }

    /// Active base stations, in file order.
    pub fn base_stations(&self) -> impl Iterator<Item = &Anchor> {
        self.anchors.iter().filter(|a| a.kind == AnchorKind::ActiveBs)
    }

    pub fn irs_anchors(&self) -> impl Iterator<Item = &Anchor> {
        self.anchors.iter().filter(|a| a.kind == AnchorKind::PassiveIrs)
    }

    pub fn anchor(&self, id: &str) -> Option<&Anchor> {
        self.anchors.iter().find(|a| a.id == id)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Euclidean distance between two points.
pub fn true_distance(a: Point2, b: Point2) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Area of the triangle spanned by three points.
pub fn triangle_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * (b - a).cross(c - a).abs()
}

/// True when the triangle `a, b, c` is degenerate relative to its own size:
/// area below `tol * (longest side)^2`.
pub fn is_collinear(a: Point2, b: Point2, c: Point2, tol: f64) -> bool {
    let longest = true_distance(a, b).max(true_distance(b, c)).max(true_distance(a, c));
    triangle_area(a, b, c) <= tol * longest * longest
}

/// True when at least one triple of `points` is non-collinear.
pub fn spans_plane(points: &[Point2], tol: f64) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if !is_collinear(points[i], points[j], points[k], tol) {
                    return true;
                }
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFiniteCoordinate { id: String },
    DuplicateAnchorId { id: String },
    DuplicateTargetId { id: String },
    TargetOutOfBounds { id: String },
    CollinearBaseStations { ids: [String; 3] },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFiniteCoordinate { id } => write!(f, "{id}: non-finite coordinate"),
            Violation::DuplicateAnchorId { id } => write!(f, "duplicate anchor id {id}"),
            Violation::DuplicateTargetId { id } => write!(f, "duplicate target id {id}"),
            Violation::TargetOutOfBounds { id } => write!(f, "target {id} lies outside bounds"),
            Violation::CollinearBaseStations { ids } => {
                write!(f, "base stations {}, {}, {} are collinear", ids[0], ids[1], ids[2])
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks id uniqueness, finiteness, containment and BS non-collinearity.
/// Never fails; problems are collected in the report.
pub fn validate_scene(scene: &Scene, collinearity_tol: f64) -> ValidationReport {
    let mut violations = Vec::new();

    let mut seen = HashSet::new();
    for a in &scene.anchors {
        if !a.position.is_finite() {
            violations.push(Violation::NonFiniteCoordinate { id: a.id.clone() });
        }
        if !seen.insert(a.id.as_str()) {
            violations.push(Violation::DuplicateAnchorId { id: a.id.clone() });
        }
    }

    let mut seen = HashSet::new();
    for t in &scene.targets {
        if !t.position.is_finite() {
            violations.push(Violation::NonFiniteCoordinate { id: t.id.clone() });
        }
        if !seen.insert(t.id.as_str()) {
            violations.push(Violation::DuplicateTargetId { id: t.id.clone() });
        }
        if t.position.is_finite() && !scene.bounds.contains(t.position) {
            violations.push(Violation::TargetOutOfBounds { id: t.id.clone() });
        }
    }

    let bs: Vec<&Anchor> = scene.base_stations().collect();
    for i in 0..bs.len() {
        for j in i + 1..bs.len() {
            for k in j + 1..bs.len() {
                if is_collinear(bs[i].position, bs[j].position, bs[k].position, collinearity_tol) {
                    violations.push(Violation::CollinearBaseStations {
                        ids: [bs[i].id.clone(), bs[j].id.clone(), bs[k].id.clone()],
                    });
                }
            }
        }
    }

    ValidationReport { violations }
}

fn bs_positions_ok(points: &[Point2], tol: f64) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if is_collinear(points[i], points[j], points[k], tol) {
                    return false;
                }
            }
        }
    }
    true
}

/// Draws a scene with uniformly placed base stations and targets.
///
/// Base stations are redrawn as a group until no triple is collinear.
/// Ids are `bs1..bsN` and `t1..tK`. The result depends only on the arguments.
pub fn random_scene(
    num_bs: usize,
    num_targets: usize,
    bounds: Bounds,
    rcs_dbsm: f64,
    seed: u64,
) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_scene_with(num_bs, num_targets, bounds, rcs_dbsm, &mut rng)
}

/// Same as [`random_scene`] but drawing from a caller-supplied generator.
pub fn random_scene_with<R: Rng + ?Sized>(
    num_bs: usize,
    num_targets: usize,
    bounds: Bounds,
    rcs_dbsm: f64,
    rng: &mut R,
) -> Result<Scene> {
    if num_bs < 3 {
        return Err(Error::Parameter(format!("at least 3 base stations are required, got {num_bs}")));
    }
    bounds.check()?;

    let mut positions = Vec::with_capacity(num_bs);
    let mut accepted = false;
    for _ in 0..MAX_BS_REDRAWS {
        positions.clear();
        positions.extend((0..num_bs).map(|_| bounds.sample(rng)));
        if bs_positions_ok(&positions, DEFAULT_COLLINEARITY_TOL) {
            accepted = true;
            break;
        }
    }
    if !accepted {
        return Err(Error::Generation(format!(
            "no non-collinear placement of {num_bs} base stations after {MAX_BS_REDRAWS} draws"
        )));
    }

    let anchors =
        positions.iter().enumerate().map(|(i, p)| Anchor::bs(format!("bs{}", i + 1), p.x, p.y)).collect();
    let targets = (0..num_targets)
        .map(|i| {
            let p = bounds.sample(rng);
            Target::new(format!("t{}", i + 1), p.x, p.y, rcs_dbsm)
        })
        .collect();

    Ok(Scene::new(bounds, anchors, targets))
}
