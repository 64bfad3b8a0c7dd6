//! Range data association for networked device-free sensing.
//!
//! Every base station reports an unordered set of target distances. An
//! association hypothesis picks, for each target slot `k`, one distance per
//! base station; slot `k` always takes the `k`-th distance of the first
//! station, so only the remaining `M − 1` stations are permuted and there are
//! `(K!)^(M−1)` hypotheses. A hypothesis is feasible when every slot
//! trilaterates to a point whose rms range misfit is within the feasibility
//! tolerance. More than one feasible hypothesis means ghost targets.
//!
//! Two solvers share one contract: [`AssociationProblem::enumerate`] walks
//! all hypotheses, and [`AssociationProblem::solve_bnb`] builds targets one
//! at a time from circle-intersection candidates and prunes on the incumbent.
//! Both evaluate a distance tuple through the same cached trilateration, so
//! their residuals and positions agree bit for bit.
//!
//! Solutions are ranked by max residual over targets. Residuals at or below
//! [`RESIDUAL_FLOOR_M`] count as exactly zero, and ties fall back to the
//! lexicographic order of the per-station permutations.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::{trilaterate_unchecked, PositionEstimate, SolverOptions};
use crate::rng::child_seed;
use crate::scene::{random_scene, spans_plane, true_distance, Anchor, Bounds, Point2, Scene};

/// Residuals at or below this are numerical zero for ranking purposes, meters.
pub const RESIDUAL_FLOOR_M: f64 = 1e-9;

/// Feasibility tolerance for experiments with exact ranges, meters.
pub const DEFAULT_FEAS_TOL_M: f64 = 1e-4;

/// Radius within which an estimate is considered to match a true target, meters.
pub const DEFAULT_MATCH_RADIUS_M: f64 = 1e-3;

/// Largest hypothesis count the exhaustive solver accepts.
pub const MAX_EXHAUSTIVE_HYPOTHESES: u128 = 1 << 32;

/// Tolerance for noisy ranges: `3·σ·√M`.
pub fn noisy_feas_tol(sigma_m: f64, num_anchors: usize) -> f64 {
    3.0 * sigma_m * (num_anchors as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub anchor_id: String,
    pub distances: Vec<f64>,
}

/// `permutations[m][k]` is the index into station `m`'s distances used for slot `k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssociationHypothesis {
    pub permutations: Vec<Vec<usize>>,
}

impl AssociationHypothesis {
    pub fn identity(num_anchors: usize, num_targets: usize) -> Self {
        Self { permutations: vec![(0..num_targets).collect(); num_anchors] }
    }

    /// Distance indices used for target slot `k`, one per station.
    pub fn tuple(&self, k: usize) -> Vec<usize> {
        self.permutations.iter().map(|p| p[k]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationSolution {
    pub hypothesis: AssociationHypothesis,
    pub estimates: Vec<PositionEstimate>,
    pub max_residual_m: f64,
}

impl AssociationSolution {
    pub fn positions(&self) -> Vec<Point2> {
        self.estimates.iter().map(|e| e.position).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhostReport {
    pub feasible_solutions: Vec<AssociationSolution>,
    pub unique: bool,
    /// Estimated positions farther than the match radius from every true target.
    /// Empty when no ground truth was supplied.
    pub ghost_positions: Vec<Point2>,
}

impl GhostReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Result of an exhaustive walk over all hypotheses.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub solutions: Vec<AssociationSolution>,
    pub hypotheses_examined: u128,
    /// Smallest max residual over all hypotheses, feasible or not.
    pub best_residual_m: f64,
}

fn rank_key(residual: f64) -> f64 {
    if residual <= RESIDUAL_FLOOR_M {
        0.0
    } else {
        residual
    }
}

fn solution_order(a: &AssociationSolution, b: &AssociationSolution) -> Ordering {
    rank_key(a.max_residual_m)
        .total_cmp(&rank_key(b.max_residual_m))
        .then_with(|| a.hypothesis.cmp(&b.hypothesis))
}

/// All permutations of `0..k` in lexicographic order.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Mixed-radix increment, last digit fastest. Returns false after wrapping to all zeros.
fn advance(digits: &mut [usize], radices: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// A validated full-detection association instance.
#[derive(Debug, Clone)]
pub struct AssociationProblem {
    anchor_ids: Vec<String>,
    anchors: Vec<Point2>,
    distances: Vec<Vec<f64>>,
    num_targets: usize,
    solver: SolverOptions,
}

impl AssociationProblem {
    /// Pairs each profile with the anchor of the same id; profile order fixes station order.
    pub fn new(profiles: &[DistanceProfile], anchors: &[Anchor]) -> Result<Self> {
        let mut positions = Vec::with_capacity(profiles.len());
        for p in profiles {
            let a = anchors
                .iter()
                .find(|a| a.id == p.anchor_id)
                .ok_or_else(|| Error::Parameter(format!("profile for unknown anchor {}", p.anchor_id)))?;
            positions.push(a.position);
        }
        let mut problem =
            Self::from_points(positions, profiles.iter().map(|p| p.distances.clone()).collect())?;
        problem.anchor_ids = profiles.iter().map(|p| p.anchor_id.clone()).collect();
        Ok(problem)
    }

    pub fn from_points(anchors: Vec<Point2>, distances: Vec<Vec<f64>>) -> Result<Self> {
        if anchors.len() != distances.len() {
            return Err(Error::Parameter(format!(
                "{} anchors but {} distance profiles",
                anchors.len(),
                distances.len()
            )));
        }
        if anchors.len() < 3 {
            return Err(Error::Geometry(format!(
                "association needs at least 3 base stations, got {}",
                anchors.len()
            )));
        }
        if distances.iter().any(|d| d.is_empty()) {
            return Err(Error::Domain("distance profiles must not be empty".into()));
        }
        let k = distances[0].len();
        if distances.iter().any(|d| d.len() != k) {
            return Err(Error::NotSupported(
                "profiles of unequal size (partial detection) are not supported by the association solver"
                    .into(),
            ));
        }
        if let Some(d) = distances.iter().flatten().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::Domain(format!("distances must be finite and nonnegative, got {d}")));
        }
        let solver = SolverOptions::default();
        if !spans_plane(&anchors, solver.collinearity_tol) {
            return Err(Error::Geometry("base stations are collinear".into()));
        }
        Ok(Self {
            anchor_ids: (1..=anchors.len()).map(|i| format!("bs{i}")).collect(),
            anchors,
            distances,
            num_targets: k,
            solver,
        })
    }

    /// Exact distance profiles of every target to every base station of `scene`,
    /// listed in target order.
    pub fn from_scene(scene: &Scene) -> Result<Self> {
        let bs: Vec<&Anchor> = scene.base_stations().collect();
        let profiles: Vec<DistanceProfile> = bs
            .iter()
            .map(|a| DistanceProfile {
                anchor_id: a.id.clone(),
                distances: scene.targets.iter().map(|t| true_distance(a.position, t.position)).collect(),
            })
            .collect();
        Self::new(&profiles, &scene.anchors)
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn num_anchors(&self) -> usize {
        self.anchors.len()
    }

    pub fn anchor_ids(&self) -> &[String] {
        &self.anchor_ids
    }

    /// `(K!)^(M−1)`.
    pub fn hypothesis_count(&self) -> u128 {
        factorial(self.num_targets).checked_pow(self.anchors.len() as u32 - 1).unwrap_or(u128::MAX)
    }

    fn tuple_key(&self, tuple: &[usize]) -> u64 {
        tuple
            .iter()
            .rev()
            .fold(0u64, |acc, &j| acc.wrapping_mul(self.num_targets as u64).wrapping_add(j as u64))
    }

    fn solve_tuple(&self, tuple: &[usize]) -> PositionEstimate {
        let d: Vec<f64> = tuple.iter().enumerate().map(|(m, &j)| self.distances[m][j]).collect();
        trilaterate_unchecked(&self.anchors, &d, &self.solver)
    }

    fn build_solution(
        &self,
        hypothesis: AssociationHypothesis,
        cache: &TupleCache<'_>,
    ) -> AssociationSolution {
        let estimates: Vec<PositionEstimate> =
            (0..self.num_targets).map(|k| cache.get(&hypothesis.tuple(k))).collect();
        let max_residual_m = estimates.iter().map(|e| e.residual_rms_m).fold(0.0, f64::max);
        AssociationSolution { hypothesis, estimates, max_residual_m }
    }

    /// Walks every hypothesis and keeps the feasible ones, best first.
    pub fn enumerate(&self, feas_tol_m: f64) -> Result<Enumeration> {
        check_tol(feas_tol_m)?;
        let total = self.hypothesis_count();
        if total > MAX_EXHAUSTIVE_HYPOTHESES {
            return Err(Error::NotSupported(format!(
                "{total} hypotheses exceed the exhaustive search limit"
            )));
        }
        let k = self.num_targets;
        let m = self.anchors.len();
        let perms = permutations(k);
        let cache = TupleCache::new(self);

        let mut odometer = vec![0usize; m - 1];
        let radices = vec![perms.len(); m - 1];
        let mut examined: u128 = 0;
        let mut best = f64::INFINITY;
        let mut feasible = Vec::new();
        let mut tuple = vec![0usize; m];
        loop {
            examined += 1;
            let mut worst = 0.0f64;
            #[allow(clippy::needless_range_loop)]
            for slot in 0..k {
                tuple[0] = slot;
                for (s, &p) in odometer.iter().enumerate() {
                    tuple[s + 1] = perms[p][slot];
                }
                worst = worst.max(cache.get(&tuple).residual_rms_m);
            }
            best = best.min(worst);
            if worst <= feas_tol_m {
                let mut permutations = vec![perms[0].clone()];
                permutations.extend(odometer.iter().map(|&p| perms[p].clone()));
                feasible.push(self.build_solution(AssociationHypothesis { permutations }, &cache));
            }

            // last station varies fastest, so the walk is in lexicographic order
            if !advance(&mut odometer, &radices) {
                feasible.sort_by(solution_order);
                return Ok(Enumeration {
                    solutions: feasible,
                    hypotheses_examined: examined,
                    best_residual_m: best,
                });
            }
        }
    }

    /// Best feasible solution by exhaustive search.
    pub fn solve(&self, feas_tol_m: f64) -> Result<AssociationSolution> {
        let e = self.enumerate(feas_tol_m)?;
        e.solutions
            .into_iter()
            .next()
            .ok_or(Error::Infeasible { tol_m: feas_tol_m, best_residual_m: e.best_residual_m })
    }

    /// All feasible solutions found by branch and bound (no incumbent pruning), best first.
    pub fn enumerate_bnb(&self, feas_tol_m: f64) -> Result<Vec<AssociationSolution>> {
        check_tol(feas_tol_m)?;
        let mut search = BranchAndBound::new(self, feas_tol_m, true);
        search.run();
        let mut found = std::mem::take(&mut search.found);
        found.sort_by(solution_order);
        Ok(found)
    }

    /// Best feasible solution by branch and bound; same contract as [`solve`](Self::solve).
    pub fn solve_bnb(&self, feas_tol_m: f64) -> Result<AssociationSolution> {
        check_tol(feas_tol_m)?;
        let mut search = BranchAndBound::new(self, feas_tol_m, false);
        search.run();
        match search.incumbent.take() {
            Some(s) => Ok(s),
            None => Err(Error::Infeasible { tol_m: feas_tol_m, best_residual_m: search.best_seen }),
        }
    }

    /// The ground-truth-free tuple count the cache may hold, `K^M`.
    fn tuple_space(&self) -> usize {
        self.num_targets.saturating_pow(self.anchors.len() as u32)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Parameter(format!("feasibility tolerance must be nonnegative, got {tol}")));
    }
    Ok(())
}

/// Memoized per-tuple trilateration.
struct TupleCache<'a> {
    problem: &'a AssociationProblem,
    solved: RefCell<HashMap<u64, PositionEstimate>>,
}

impl<'a> TupleCache<'a> {
    fn new(problem: &'a AssociationProblem) -> Self {
        Self { problem, solved: RefCell::new(HashMap::with_capacity(problem.tuple_space().min(1 << 16))) }
    }

    fn get(&self, tuple: &[usize]) -> PositionEstimate {
        let key = self.problem.tuple_key(tuple);
        if let Some(e) = self.solved.borrow().get(&key) {
            return *e;
        }
        let e = self.problem.solve_tuple(tuple);
        self.solved.borrow_mut().insert(key, e);
        e
    }
}

struct BranchAndBound<'a> {
    problem: &'a AssociationProblem,
    cache: TupleCache<'a>,
    tol: f64,
    /// Bound on any single-station misfit of a feasible tuple, `√M·tol`.
    misfit_bound: f64,
    /// Absorbs rounding in the circle intersection itself.
    rounding: f64,
    collect_all: bool,
    used: Vec<Vec<bool>>,
    assignment: Vec<Vec<usize>>,
    incumbent: Option<AssociationSolution>,
    found: Vec<AssociationSolution>,
    best_seen: f64,
}

impl<'a> BranchAndBound<'a> {
    fn new(problem: &'a AssociationProblem, tol: f64, collect_all: bool) -> Self {
        let m = problem.anchors.len();
        let k = problem.num_targets;
        let mut scale = 0.0f64;
        for (i, a) in problem.anchors.iter().enumerate() {
            for b in &problem.anchors[i + 1..] {
                scale = scale.max(true_distance(*a, *b));
            }
        }
        scale += problem.distances.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        Self {
            problem,
            cache: TupleCache::new(problem),
            tol,
            misfit_bound: (m as f64).sqrt() * tol,
            rounding: 1e-7 * scale,
            collect_all,
            used: vec![vec![false; k]; m],
            assignment: vec![vec![0; k]; m],
            incumbent: None,
            found: Vec::new(),
            best_seen: f64::INFINITY,
        }
    }

    fn run(&mut self) {
        self.branch(0, 0.0);
    }

    /// Candidate positions for slot `k` paired with station-2 distance `j2`,
    /// each with the matching slack to apply at the remaining stations.
    ///
    /// A feasible tuple has a solution `x` with every single-station misfit
    /// within `ε = √M·tol`, so `x` lies where the two ε-annuli around the
    /// station-1 and station-2 circles overlap. Near a crossing point with
    /// crossing angle θ that overlap has radius at most `2ε / sin θ`, which
    /// bounds how far `x` can be from the candidate. Grazing crossings get an
    /// unbounded slack and so never prune.
    fn candidates(&self, slot: usize, j2: usize) -> Vec<(Point2, f64)> {
        let p = self.problem;
        let (c1, r1) = (p.anchors[0], p.distances[0][slot]);
        let (c2, r2) = (p.anchors[1], p.distances[1][j2]);
        let delta = c2 - c1;
        let d = delta.norm();
        let unit = delta * (1.0 / d);
        let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
        let foot = c1 + unit * a;
        let h2 = r1 * r1 - a * a;
        if h2 <= 0.0 {
            return vec![(foot, f64::INFINITY)];
        }
        let h = h2.sqrt();
        let normal = Point2::new(-unit.y, unit.x);
        let eps = self.misfit_bound;
        [foot + normal * h, foot - normal * h]
            .into_iter()
            .map(|c| {
                let (v1, v2) = (c - c1, c - c2);
                let (n1, n2) = (v1.norm(), v2.norm());
                let sin = if n1 > 0.0 && n2 > 0.0 { (v1.cross(v2) / (n1 * n2)).abs() } else { 0.0 };
                let slack = if sin < 1e-3 {
                    f64::INFINITY
                } else {
                    // factor 2 on the displacement covers the curvature of the annuli
                    eps + 4.0 * eps / sin + self.rounding
                };
                (c, slack)
            })
            .collect()
    }

    /// Distance tuples for `slot` consistent with some candidate, in lexicographic order.
    fn consistent_tuples(&self, slot: usize) -> BTreeSet<Vec<usize>> {
        let p = self.problem;
        let m = p.anchors.len();
        let k = p.num_targets;
        let mut tuples = BTreeSet::new();
        for j2 in (0..k).filter(|&j| !self.used[1][j]) {
            for (c, gate) in self.candidates(slot, j2) {
                let mut options: Vec<Vec<usize>> = Vec::with_capacity(m - 2);
                for s in 2..m {
                    let range = true_distance(c, p.anchors[s]);
                    let opts: Vec<usize> = (0..k)
                        .filter(|&j| !self.used[s][j] && (range - p.distances[s][j]).abs() <= gate)
                        .collect();
                    if opts.is_empty() {
                        break;
                    }
                    options.push(opts);
                }
                if options.len() != m - 2 {
                    continue;
                }
                let radices: Vec<usize> = options.iter().map(Vec::len).collect();
                let mut idx = vec![0usize; m - 2];
                loop {
                    let mut t = Vec::with_capacity(m);
                    t.push(slot);
                    t.push(j2);
                    t.extend(idx.iter().zip(&options).map(|(&i, o)| o[i]));
                    tuples.insert(t);
                    if !advance(&mut idx, &radices) {
                        break;
                    }
                }
            }
        }
        tuples
    }

    fn pruned(&self, partial_max: f64) -> bool {
        if self.collect_all {
            return false;
        }
        match &self.incumbent {
            Some(best) => rank_key(partial_max) > rank_key(best.max_residual_m),
            None => false,
        }
    }

    fn branch(&mut self, slot: usize, partial_max: f64) {
        let p = self.problem;
        if slot == p.num_targets {
            let hypothesis = AssociationHypothesis { permutations: self.assignment.clone() };
            let sol = p.build_solution(hypothesis, &self.cache);
            self.best_seen = self.best_seen.min(sol.max_residual_m);
            if self.collect_all {
                self.found.push(sol);
            } else if self.incumbent.as_ref().is_none_or(|inc| solution_order(&sol, inc) == Ordering::Less) {
                self.incumbent = Some(sol);
            }
            return;
        }

        for tuple in self.consistent_tuples(slot) {
            let est = self.cache.get(&tuple);
            let worst = partial_max.max(est.residual_rms_m);
            if est.residual_rms_m > self.tol {
                self.best_seen = self.best_seen.min(worst);
                continue;
            }
            if self.pruned(worst) {
                continue;
            }
            for (s, &j) in tuple.iter().enumerate() {
                self.used[s][j] = true;
                self.assignment[s][slot] = j;
            }
            self.branch(slot + 1, worst);
            for (s, &j) in tuple.iter().enumerate() {
                self.used[s][j] = false;
            }
        }
    }
}

pub fn enumerate_feasible(
    profiles: &[DistanceProfile],
    anchors: &[Anchor],
    feas_tol_m: f64,
) -> Result<Vec<AssociationSolution>> {
    Ok(AssociationProblem::new(profiles, anchors)?.enumerate(feas_tol_m)?.solutions)
}

pub fn solve_association(
    profiles: &[DistanceProfile],
    anchors: &[Anchor],
    feas_tol_m: f64,
) -> Result<AssociationSolution> {
    AssociationProblem::new(profiles, anchors)?.solve(feas_tol_m)
}

pub fn solve_association_bnb(
    profiles: &[DistanceProfile],
    anchors: &[Anchor],
    feas_tol_m: f64,
) -> Result<AssociationSolution> {
    AssociationProblem::new(profiles, anchors)?.solve_bnb(feas_tol_m)
}

/// Packages feasible solutions, flagging estimates that match no true target.
pub fn ghost_report(
    feasible_solutions: Vec<AssociationSolution>,
    truth: Option<&[Point2]>,
    match_radius_m: f64,
) -> GhostReport {
    let mut ghost_positions: Vec<Point2> = Vec::new();
    if let Some(truth) = truth {
        for sol in &feasible_solutions {
            for e in &sol.estimates {
                let p = e.position;
                let is_true = truth.iter().any(|t| true_distance(*t, p) <= match_radius_m);
                let dup = ghost_positions.iter().any(|g| true_distance(*g, p) <= match_radius_m);
                if !is_true && !dup {
                    ghost_positions.push(p);
                }
            }
        }
    }
    GhostReport { unique: feasible_solutions.len() == 1, feasible_solutions, ghost_positions }
}

/// Outcome of one uniqueness trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhostTrial {
    pub trial: u64,
    /// Seed that regenerates the trial scene through [`random_scene`].
    pub seed: u64,
    pub feasible_count: usize,
    pub ghost: bool,
    /// No feasible hypothesis at all (counted apart from the fraction).
    pub infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhostProbability {
    /// Ghost trials over evaluated (non-infeasible) trials.
    pub fraction: f64,
    pub trials: Vec<GhostTrial>,
    pub ghost_seeds: Vec<u64>,
    pub infeasible_trials: usize,
}

impl GhostProbability {
    fn from_trials(trials: Vec<GhostTrial>) -> Self {
        let infeasible_trials = trials.iter().filter(|t| t.infeasible).count();
        let ghost_seeds: Vec<u64> = trials.iter().filter(|t| t.ghost).map(|t| t.seed).collect();
        let evaluated = trials.len() - infeasible_trials;
        let fraction = if evaluated == 0 { 0.0 } else { ghost_seeds.len() as f64 / evaluated as f64 };
        Self { fraction, trials, ghost_seeds, infeasible_trials }
    }
}

/// Number of feasible associations of a scene under exact ranges.
pub fn feasible_count(scene: &Scene, feas_tol_m: f64) -> Result<usize> {
    if scene.targets.is_empty() {
        return Ok(0);
    }
    Ok(AssociationProblem::from_scene(scene)?.enumerate(feas_tol_m)?.solutions.len())
}

fn ghost_trial(trial: u64, seed: u64, scene: &Scene, feas_tol_m: f64) -> Result<GhostTrial> {
    let n = feasible_count(scene, feas_tol_m)?;
    Ok(GhostTrial {
        trial,
        seed,
        feasible_count: n,
        ghost: n > 1,
        infeasible: n == 0 && !scene.targets.is_empty(),
    })
}

/// Ghost fraction over hand-placed scenes (trial `i` is `scenes[i]`, seed 0).
pub fn ghost_probability_for_scenes(scenes: &[Scene], feas_tol_m: f64) -> Result<GhostProbability> {
    let trials = scenes
        .iter()
        .enumerate()
        .map(|(i, s)| ghost_trial(i as u64, 0, s, feas_tol_m))
        .collect::<Result<Vec<_>>>()?;
    Ok(GhostProbability::from_trials(trials))
}

/// Monte Carlo estimate of how often random target placements admit a wrong
/// but feasible association. Trials run in parallel; trial `i` uses the scene
/// of `random_scene(.., child_seed(seed, i))`, so results do not depend on scheduling.
pub fn ghost_probability(
    num_trials: usize,
    num_bs: usize,
    num_targets: usize,
    bounds: Bounds,
    feas_tol_m: f64,
    seed: u64,
) -> Result<GhostProbability> {
    if num_trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    if num_bs < 3 {
        return Err(Error::Parameter(format!("at least 3 base stations are required, got {num_bs}")));
    }
    check_tol(feas_tol_m)?;
    let trials = (0..num_trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = child_seed(seed, i);
            let scene = random_scene(num_bs, num_targets, bounds, -10.0, s)?;
            ghost_trial(i, s, &scene, feas_tol_m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GhostProbability::from_trials(trials))
}
