//! Monte Carlo experiments over synthesized range measurements.
//!
//! Trial `i` draws all of its randomness (scene, noise, shuffling) from
//! `child_seed(seed, i)`, so reports do not depend on how trials are scheduled.

use std::io::Write;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{
    noisy_feas_tol, AssociationHypothesis, AssociationProblem, DistanceProfile, DEFAULT_FEAS_TOL_M,
};
use crate::error::{Error, Result};
use crate::link_budget::{range_resolution, LinkBudgetParams, DEFAULT_SNR_MIN_DB};
use crate::rng::{child_rng, child_seed};
use crate::scene::{random_scene, true_distance, Bounds, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub range_sigma_m: f64,
    /// Round each range to the nearest multiple of `c / (2B)`.
    pub quantize_to_resolution: bool,
    pub bandwidth_hz: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { range_sigma_m: 0.0, quantize_to_resolution: false, bandwidth_hz: 100e6 }
    }
}

impl NoiseModel {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn gaussian(sigma_m: f64) -> Self {
        Self { range_sigma_m: sigma_m, ..Self::default() }
    }

    fn check(&self) -> Result<()> {
        if !(self.range_sigma_m.is_finite() && self.range_sigma_m >= 0.0) {
            return Err(Error::Parameter(format!(
                "range sigma must be finite and nonnegative, got {}",
                self.range_sigma_m
            )));
        }
        if self.quantize_to_resolution {
            range_resolution(self.bandwidth_hz)?;
        }
        Ok(())
    }

    /// Quantization step in meters, if quantization is on.
    pub fn step_m(&self) -> Option<f64> {
        self.quantize_to_resolution.then(|| range_resolution(self.bandwidth_hz).expect("bandwidth checked"))
    }

    /// Standard deviation of the total range error (Gaussian plus uniform rounding).
    pub fn effective_sigma_m(&self) -> f64 {
        let q = self.step_m().unwrap_or(0.0);
        (self.range_sigma_m * self.range_sigma_m + q * q / 12.0).sqrt()
    }
}

/// Ranges seen by each base station, in scene order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurements {
    pub profiles: Vec<DistanceProfile>,
    /// `detected[m][t]`: base station `m` sees target `t`.
    pub detected: Vec<Vec<bool>>,
    /// `orders[m][j]`: target index behind `profiles[m].distances[j]`.
    pub orders: Vec<Vec<usize>>,
}

impl Measurements {
    /// Every base station sees every target.
    pub fn full_detection(&self) -> bool {
        self.detected.iter().all(|row| row.iter().all(|&d| d))
    }

    pub fn detected_pairs(&self) -> usize {
        self.detected.iter().flatten().filter(|&&d| d).count()
    }

    /// Hypothesis that pairs every distance with its true target.
    /// Only meaningful under full detection.
    pub fn true_hypothesis(&self) -> AssociationHypothesis {
        let first = &self.orders[0];
        let permutations = self
            .orders
            .iter()
            .map(|o| first.iter().map(|t| o.iter().position(|x| x == t).expect("full detection")).collect())
            .collect();
        AssociationHypothesis { permutations }
    }
}

/// Synthesizes per-station range sets with coverage gating.
pub fn measure_distances(
    scene: &Scene,
    link: &LinkBudgetParams,
    snr_min_db: f64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Measurements> {
    let mut rng = child_rng(seed, 0);
    measure_distances_with(scene, link, snr_min_db, noise, &mut rng)
}

fn measure_distances_with<R: Rng + ?Sized>(
    scene: &Scene,
    link: &LinkBudgetParams,
    snr_min_db: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Measurements> {
    noise.check()?;
    let budgets =
        scene.targets.iter().map(|t| link.with_rcs_dbsm(t.rcs_dbsm).budget()).collect::<Result<Vec<_>>>()?;
    let step = noise.step_m();

    let mut profiles = Vec::new();
    let mut detected = Vec::new();
    let mut orders = Vec::new();
    for bs in scene.base_stations() {
        let mut row = Vec::with_capacity(scene.targets.len());
        let mut seen: Vec<(usize, f64)> = Vec::new();
        for (t, (target, budget)) in scene.targets.iter().zip(&budgets).enumerate() {
            let d = true_distance(bs.position, target.position);
            let hit = budget.covered(snr_min_db, d)?;
            row.push(hit);
            if !hit {
                continue;
            }
            let z: f64 = rng.sample(StandardNormal);
            let mut r = (d + noise.range_sigma_m * z).max(0.0);
            if let Some(q) = step {
                r = (r / q).round() * q;
            }
            seen.push((t, r));
        }
        seen.shuffle(rng);
        profiles.push(DistanceProfile {
            anchor_id: bs.id.clone(),
            distances: seen.iter().map(|&(_, r)| r).collect(),
        });
        orders.push(seen.iter().map(|&(t, _)| t).collect());
        detected.push(row);
    }
    Ok(Measurements { profiles, detected, orders })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneSource {
    Inline {
        scene: Scene,
    },
    File {
        path: PathBuf,
    },
    /// A fresh scene per trial from `random_scene`.
    Random {
        num_bs: usize,
        num_targets: usize,
        bounds: Bounds,
        #[serde(default = "default_rcs")]
        rcs_dbsm: f64,
    },
}

fn default_rcs() -> f64 {
    -10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scene: SceneSource,
    pub link: LinkBudgetParams,
    pub snr_min_db: f64,
    pub noise: NoiseModel,
    pub trials: usize,
    pub seed: u64,
    /// Tolerance for noiseless levels. Noisy levels use `3·σ·√M`.
    pub feas_tol_m: f64,
    /// Noise levels swept by the accuracy experiment.
    pub sigmas_m: Vec<f64>,
    /// Worker threads; 0 uses all cores. Does not affect results.
    pub threads: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scene: SceneSource::Random {
                num_bs: 3,
                num_targets: 2,
                bounds: Bounds::square(300.0),
                rcs_dbsm: default_rcs(),
            },
            link: LinkBudgetParams::pedestrian(),
            snr_min_db: DEFAULT_SNR_MIN_DB,
            noise: NoiseModel::default(),
            trials: 100,
            seed: crate::rng::DEFAULT_SEED,
            feas_tol_m: DEFAULT_FEAS_TOL_M,
            sigmas_m: vec![0.0, 0.01, 0.1, 1.0],
            threads: 0,
        }
    }
}

enum ResolvedScene {
    Fixed(Scene),
    Random { num_bs: usize, num_targets: usize, bounds: Bounds, rcs_dbsm: f64 },
}

impl ResolvedScene {
    fn for_trial(&self, trial_seed: u64) -> Result<Scene> {
        match self {
            Self::Fixed(s) => Ok(s.clone()),
            Self::Random { num_bs, num_targets, bounds, rcs_dbsm } => {
                random_scene(*num_bs, *num_targets, *bounds, *rcs_dbsm, trial_seed)
            }
        }
    }
}

impl ExperimentSpec {
    fn check(&self) -> Result<ResolvedScene> {
        if self.trials == 0 {
            return Err(Error::Parameter("at least one trial is required".into()));
        }
        if !(self.feas_tol_m.is_finite() && self.feas_tol_m > 0.0) {
            return Err(Error::Parameter(format!(
                "feasibility tolerance must be positive, got {}",
                self.feas_tol_m
            )));
        }
        self.noise.check()?;
        self.link.budget()?;
        for &s in &self.sigmas_m {
            NoiseModel::gaussian(s).check()?;
        }
        let scene = match &self.scene {
            SceneSource::Inline { scene } => ResolvedScene::Fixed(scene.clone()),
            SceneSource::File { path } => ResolvedScene::Fixed(Scene::load(path)?),
            &SceneSource::Random { num_bs, num_targets, bounds, rcs_dbsm } => {
                if num_bs < 3 {
                    return Err(Error::Parameter(format!(
                        "at least 3 base stations are required, got {num_bs}"
                    )));
                }
                ResolvedScene::Random { num_bs, num_targets, bounds, rcs_dbsm }
            }
        };
        if let ResolvedScene::Fixed(s) = &scene {
            if s.base_stations().count() < 3 {
                return Err(Error::Geometry("the scene needs at least 3 base stations".into()));
            }
        }
        Ok(scene)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    /// Full detection and at least one feasible association.
    Complete,
    /// Some base station missed some target.
    Partial,
    /// Full detection but no association fits the tolerance.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub sigma_m: f64,
    pub seed: u64,
    pub status: TrialStatus,
    pub detected_pairs: usize,
    pub total_pairs: usize,
    /// Only computed by the uniqueness experiment.
    pub feasible_count: Option<usize>,
    /// The true association is among the feasible ones.
    pub truth_recovered: bool,
    /// The reported (best) association is the true one.
    pub correct_association: bool,
    /// Per target in scene order; empty unless complete.
    pub position_errors_m: Vec<f64>,
    pub max_residual_m: Option<f64>,
}

impl TrialRecord {
    fn ghost(&self) -> bool {
        self.feasible_count.is_some_and(|n| n > 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelAggregate {
    pub sigma_m: f64,
    pub trials: usize,
    pub complete: usize,
    pub partial: usize,
    pub infeasible: usize,
    /// Ghost trials over complete trials.
    pub ghost_fraction: f64,
    /// Detected (station, target) pairs over all pairs.
    pub detection_fraction: f64,
    /// Correct associations over complete trials.
    pub correct_association_rate: f64,
    /// Over all per-target errors of complete trials; `None` without any.
    pub rmse_m: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl LevelAggregate {
    pub fn from_records(sigma_m: f64, records: &[TrialRecord]) -> Self {
        let count = |s| records.iter().filter(|r| r.status == s).count();
        let complete = count(TrialStatus::Complete);
        let done = || records.iter().filter(|r| r.status == TrialStatus::Complete);
        let ghosts = done().filter(|r| r.ghost()).count();
        let correct = done().filter(|r| r.correct_association).count();
        let errors: Vec<f64> = done().flat_map(|r| r.position_errors_m.iter().copied()).collect();
        let rmse_m = (!errors.is_empty())
            .then(|| (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt());
        Self {
            sigma_m,
            trials: records.len(),
            complete,
            partial: count(TrialStatus::Partial),
            infeasible: count(TrialStatus::Infeasible),
            ghost_fraction: ratio(ghosts, complete),
            detection_fraction: ratio(
                records.iter().map(|r| r.detected_pairs).sum(),
                records.iter().map(|r| r.total_pairs).sum(),
            ),
            correct_association_rate: ratio(correct, complete),
            rmse_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    Uniqueness,
    Accuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: ExperimentMode,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
    /// One entry per noise level, in sweep order.
    pub aggregates: Vec<LevelAggregate>,
}

impl ExperimentReport {
    fn from_levels(mode: ExperimentMode, seed: u64, sigmas: &[f64], records: Vec<TrialRecord>) -> Self {
        let aggregates = aggregate(sigmas, &records);
        Self { mode, seed, records, aggregates }
    }

    /// Aggregates rebuilt from the per-trial records alone.
    pub fn recompute_aggregates(&self) -> Vec<LevelAggregate> {
        let mut sigmas: Vec<f64> = Vec::new();
        for r in &self.records {
            if !sigmas.contains(&r.sigma_m) {
                sigmas.push(r.sigma_m);
            }
        }
        aggregate(&sigmas, &self.records)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per trial.
    pub fn write_records_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "trial",
            "sigma_m",
            "seed",
            "status",
            "detected_pairs",
            "total_pairs",
            "feasible_count",
            "truth_recovered",
            "correct_association",
            "max_residual_m",
            "position_errors_m",
        ])?;
        for r in &self.records {
            let status = match r.status {
                TrialStatus::Complete => "complete",
                TrialStatus::Partial => "partial",
                TrialStatus::Infeasible => "infeasible",
            };
            let errors: Vec<String> = r.position_errors_m.iter().map(|e| e.to_string()).collect();
            w.write_record([
                r.trial.to_string(),
                r.sigma_m.to_string(),
                r.seed.to_string(),
                status.to_string(),
                r.detected_pairs.to_string(),
                r.total_pairs.to_string(),
                r.feasible_count.map(|n| n.to_string()).unwrap_or_default(),
                r.truth_recovered.to_string(),
                r.correct_association.to_string(),
                r.max_residual_m.map(|v| v.to_string()).unwrap_or_default(),
                errors.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn aggregate(sigmas: &[f64], records: &[TrialRecord]) -> Vec<LevelAggregate> {
    sigmas
        .iter()
        .map(|&s| {
            let level: Vec<TrialRecord> = records.iter().filter(|r| r.sigma_m == s).cloned().collect();
            LevelAggregate::from_records(s, &level)
        })
        .collect()
}

struct TrialInput {
    trial: u64,
    seed: u64,
    scene: Scene,
    measurements: Measurements,
}

impl TrialInput {
    fn new(spec: &ExperimentSpec, source: &ResolvedScene, noise: &NoiseModel, trial: u64) -> Result<Self> {
        let seed = child_seed(spec.seed, trial);
        let scene = source.for_trial(seed)?;
        let measurements = measure_distances(&scene, &spec.link, spec.snr_min_db, noise, seed)?;
        Ok(Self { trial, seed, scene, measurements })
    }

    fn record(&self, sigma_m: f64, status: TrialStatus) -> TrialRecord {
        TrialRecord {
            trial: self.trial,
            sigma_m,
            seed: self.seed,
            status,
            detected_pairs: self.measurements.detected_pairs(),
            total_pairs: self.measurements.detected.len() * self.scene.targets.len(),
            feasible_count: None,
            truth_recovered: false,
            correct_association: false,
            position_errors_m: Vec::new(),
            max_residual_m: None,
        }
    }

    fn problem(&self) -> Result<AssociationProblem> {
        let anchors = self.scene.base_stations().map(|a| a.position).collect();
        let distances = self.measurements.profiles.iter().map(|p| p.distances.clone()).collect();
        AssociationProblem::from_points(anchors, distances)
    }

    /// Errors of slot estimates against their true targets, in scene order.
    fn position_errors(&self, positions: &[crate::scene::Point2]) -> Vec<f64> {
        let mut errors = vec![0.0; self.scene.targets.len()];
        for (slot, &t) in self.measurements.orders[0].iter().enumerate() {
            errors[t] = true_distance(positions[slot], self.scene.targets[t].position);
        }
        errors
    }
}

/// Exact ranges per trial; counts feasible associations and flags ghosts.
pub fn run_uniqueness_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let source = spec.check()?;
    let noise = NoiseModel { range_sigma_m: 0.0, ..spec.noise };
    let records = spec.pool()?.install(|| {
        (0..spec.trials as u64)
            .into_par_iter()
            .map(|i| uniqueness_trial(spec, &source, &noise, i))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ExperimentReport::from_levels(ExperimentMode::Uniqueness, spec.seed, &[0.0], records))
}

fn uniqueness_trial(
    spec: &ExperimentSpec,
    source: &ResolvedScene,
    noise: &NoiseModel,
    trial: u64,
) -> Result<TrialRecord> {
    let input = TrialInput::new(spec, source, noise, trial)?;
    if !input.measurements.full_detection() {
        return Ok(input.record(0.0, TrialStatus::Partial));
    }
    if input.scene.targets.is_empty() {
        let mut r = input.record(0.0, TrialStatus::Complete);
        r.feasible_count = Some(1);
        r.truth_recovered = true;
        r.correct_association = true;
        return Ok(r);
    }
    let tol = if noise.quantize_to_resolution {
        spec.feas_tol_m.max(noisy_feas_tol(noise.effective_sigma_m(), input.measurements.profiles.len()))
    } else {
        spec.feas_tol_m
    };
    let solutions = input.problem()?.enumerate(tol)?.solutions;
    let Some(best) = solutions.first() else {
        let mut r = input.record(0.0, TrialStatus::Infeasible);
        r.feasible_count = Some(0);
        return Ok(r);
    };
    let truth = input.measurements.true_hypothesis();
    let mut r = input.record(0.0, TrialStatus::Complete);
    r.feasible_count = Some(solutions.len());
    r.truth_recovered = solutions.iter().any(|s| s.hypothesis == truth);
    r.correct_association = best.hypothesis == truth;
    r.position_errors_m = input.position_errors(&best.positions());
    r.max_residual_m = Some(best.max_residual_m);
    Ok(r)
}

/// Noisy ranges at each level of `spec.sigmas_m`, solved by branch and bound.
///
/// Trial `i` uses the same scene and the same standard-normal draws at every
/// level, so levels differ only in noise scale.
pub fn run_accuracy_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let source = spec.check()?;
    if spec.sigmas_m.is_empty() {
        return Err(Error::Parameter("the accuracy sweep needs at least one sigma".into()));
    }
    let pool = spec.pool()?;
    let mut records = Vec::with_capacity(spec.trials * spec.sigmas_m.len());
    for &sigma in &spec.sigmas_m {
        let noise = NoiseModel { range_sigma_m: sigma, ..spec.noise };
        let level = pool.install(|| {
            (0..spec.trials as u64)
                .into_par_iter()
                .map(|i| accuracy_trial(spec, &source, &noise, i))
                .collect::<Result<Vec<_>>>()
        })?;
        records.extend(level);
    }
    Ok(ExperimentReport::from_levels(ExperimentMode::Accuracy, spec.seed, &spec.sigmas_m, records))
}

fn accuracy_trial(
    spec: &ExperimentSpec,
    source: &ResolvedScene,
    noise: &NoiseModel,
    trial: u64,
) -> Result<TrialRecord> {
    let sigma = noise.range_sigma_m;
    let input = TrialInput::new(spec, source, noise, trial)?;
    if !input.measurements.full_detection() {
        return Ok(input.record(sigma, TrialStatus::Partial));
    }
    if input.scene.targets.is_empty() {
        let mut r = input.record(sigma, TrialStatus::Complete);
        r.truth_recovered = true;
        r.correct_association = true;
        return Ok(r);
    }
    let m = input.measurements.profiles.len();
    let effective = noise.effective_sigma_m();
    let tol =
        if effective > 0.0 { noisy_feas_tol(effective, m).max(spec.feas_tol_m) } else { spec.feas_tol_m };
    match input.problem()?.solve_bnb(tol) {
        Ok(best) => {
            let truth = input.measurements.true_hypothesis();
            let mut r = input.record(sigma, TrialStatus::Complete);
            r.correct_association = best.hypothesis == truth;
            r.truth_recovered = r.correct_association;
            r.position_errors_m = input.position_errors(&best.positions());
            r.max_residual_m = Some(best.max_residual_m);
            Ok(r)
        }
        Err(Error::Infeasible { .. }) => Ok(input.record(sigma, TrialStatus::Infeasible)),
        Err(e) => Err(e),
    }
}
