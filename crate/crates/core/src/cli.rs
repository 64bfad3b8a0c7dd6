//! Command-line front end.
//!
//! Every subcommand prints one JSON document on stdout. Exit codes: 0 on
//! success, 1 on a domain or I/O error, 2 on a usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::association::{
    ghost_probability, ghost_report, AssociationProblem, DistanceProfile, GhostProbability, GhostReport,
    DEFAULT_FEAS_TOL_M, DEFAULT_MATCH_RADIUS_M,
};
use crate::error::{Error, Result};
use crate::irs::{irs_target_distance, localize_with_heterogeneous_anchors, IrsPathMeasurement};
use crate::link_budget::{guard_interval, range_resolution, LinkBudgetParams, DEFAULT_SNR_MIN_DB};
use crate::localization::{trilaterate, PositionEstimate, RangeMeasurement, SolverOptions};
use crate::rng::default_seed;
use crate::scene::{validate_scene, Bounds, Point2, Scene, DEFAULT_COLLINEARITY_TOL};
use crate::sim::{
    run_accuracy_experiment, run_uniqueness_experiment, ExperimentReport, ExperimentSpec, NoiseModel,
    SceneSource,
};
use crate::waveform::{
    ambiguity, ofdm_symbol, sidelobe_metrics, zadoff_chu, AmbiguityMode, AmbiguitySurface, MainlobeExclusion,
    SidelobeMetrics,
};

#[derive(Debug, Parser)]
#[command(name = "netsense", version, about = "Networked device-free sensing toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum sensing range from the radar range equation.
    #[command(allow_negative_numbers = true)]
    Coverage(CoverageArgs),
    /// Delay-Doppler ambiguity surface of a pilot or data waveform.
    Ambiguity(AmbiguityArgs),
    /// Trilaterate one target from per-anchor ranges.
    Localize(LocalizeArgs),
    /// Enumerate feasible range-to-target associations.
    Associate(AssociateArgs),
    /// Monte Carlo ghost probability over random scenes.
    Ghosts(GhostsArgs),
    /// Localize with base stations plus a reflecting surface.
    Irs(IrsArgs),
    /// Uniqueness or accuracy experiment with per-trial records.
    #[command(allow_negative_numbers = true)]
    Montecarlo(MonteCarloArgs),
    /// Run a subcommand described by a JSON config file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long, default_value_t = -10.0)]
    pub rcs_dbsm: f64,
    #[arg(long, default_value_t = DEFAULT_SNR_MIN_DB)]
    pub snr_min_db: f64,
    #[arg(long, default_value_t = 10.0)]
    pub pt_watts: f64,
    #[arg(long, default_value_t = 20.0)]
    pub gt_dbi: f64,
    #[arg(long, default_value_t = 20.0)]
    pub gr_dbi: f64,
    #[arg(long, default_value_t = 10.0)]
    pub gp_db: f64,
    #[arg(long, default_value_t = 3.5e9)]
    pub carrier_hz: f64,
    #[arg(long, default_value_t = 290.0)]
    pub temperature_k: f64,
    #[arg(long, default_value_t = 100e6)]
    pub bandwidth_hz: f64,
    #[arg(long, default_value_t = 5.0)]
    pub noise_factor_db: f64,
    /// Also report the SNR at this range.
    #[arg(long)]
    pub range_m: Option<f64>,
}

impl CoverageArgs {
    fn params(&self) -> LinkBudgetParams {
        LinkBudgetParams {
            pt_watts: self.pt_watts,
            gt_dbi: self.gt_dbi,
            gr_dbi: self.gr_dbi,
            gp_db: self.gp_db,
            carrier_hz: self.carrier_hz,
            rcs_dbsm: self.rcs_dbsm,
            temperature_k: self.temperature_k,
            bandwidth_hz: self.bandwidth_hz,
            noise_factor_db: self.noise_factor_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WaveformKind {
    Zc,
    Ofdm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cyclic,
    Linear,
}

impl From<ModeArg> for AmbiguityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Cyclic => AmbiguityMode::Cyclic,
            ModeArg::Linear => AmbiguityMode::Linear,
        }
    }
}

#[derive(Debug, Args)]
pub struct AmbiguityArgs {
    #[arg(long, value_enum)]
    pub waveform: WaveformKind,
    /// Sequence length (ZC) or number of subcarriers (OFDM).
    #[arg(long, default_value_t = 64)]
    pub length: usize,
    /// Zadoff-Chu root.
    #[arg(long, default_value_t = 25)]
    pub root: usize,
    /// OFDM cyclic prefix length.
    #[arg(long, default_value_t = 16)]
    pub cp: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 16)]
    pub doppler_bins: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Cyclic)]
    pub mode: ModeArg,
    /// Main-lobe half-width in delay bins.
    #[arg(long, default_value_t = 1)]
    pub exclude_delay: usize,
    /// Main-lobe half-width in Doppler bins.
    #[arg(long, default_value_t = 1)]
    pub exclude_doppler: usize,
    /// CSV grid of the surface in dB (rows delay, columns Doppler).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// CSV with columns anchor_id, distance_m and optionally sigma_m.
    #[arg(long)]
    pub measurements: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Exhaustive,
    Bnb,
}

#[derive(Debug, Args)]
pub struct AssociateArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// CSV with columns anchor_id, distance_m (one row per range). Without it,
    /// exact ranges are synthesized from the scene targets.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_FEAS_TOL_M)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = SolverKind::Exhaustive)]
    pub solver: SolverKind,
    /// Estimates farther than this from every scene target are ghosts.
    #[arg(long, default_value_t = DEFAULT_MATCH_RADIUS_M)]
    pub match_radius: f64,
}

#[derive(Debug, Args)]
pub struct GhostsArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 3)]
    pub num_bs: usize,
    #[arg(long, default_value_t = 2)]
    pub num_targets: usize,
    /// Side of the square deployment area, meters.
    #[arg(long, default_value_t = 300.0)]
    pub side: f64,
    #[arg(long, default_value_t = DEFAULT_FEAS_TOL_M)]
    pub tol: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for all cores. Does not change results.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct IrsArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// CSV with columns bs_id, irs_id, direct_roundtrip_m, composite_roundtrip_m.
    #[arg(long)]
    pub measurements: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum McMode {
    Uniqueness,
    Accuracy,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, value_enum, default_value_t = McMode::Uniqueness)]
    pub mode: McMode,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated noise levels, meters (accuracy mode).
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.1,1")]
    pub sigma_list: Vec<f64>,
    /// Fixed scene; random scenes are drawn per trial otherwise.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub num_bs: usize,
    #[arg(long, default_value_t = 2)]
    pub num_targets: usize,
    #[arg(long, default_value_t = 300.0)]
    pub side: f64,
    #[arg(long, default_value_t = -10.0)]
    pub rcs_dbsm: f64,
    #[arg(long, default_value_t = DEFAULT_SNR_MIN_DB)]
    pub snr_min_db: f64,
    #[arg(long, default_value_t = DEFAULT_FEAS_TOL_M)]
    pub tol: f64,
    /// Round ranges to the resolution c/(2B).
    #[arg(long)]
    pub quantize: bool,
    #[arg(long, default_value_t = 100e6)]
    pub bandwidth_hz: f64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Full JSON report; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

/// A subcommand invocation stored as a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<PathBuf>,
    /// Flag name (with or without dashes) to value. `true` passes a bare
    /// switch, `false` omits it, arrays are joined with commas.
    #[serde(default)]
    pub overrides: BTreeMap<String, serde_json::Value>,
    /// Directory receiving the subcommand's stdout and data files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

const SEEDED: &[&str] = &["ambiguity", "ghosts", "montecarlo"];

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Argument vector equivalent to this config, program name included.
    /// Relative paths are resolved against `base`.
    pub fn to_args(&self, base: &Path) -> Result<Vec<String>> {
        if self.subcommand == "run" {
            return Err(Error::Parameter("a run config cannot invoke run".into()));
        }
        let resolve = |p: &Path| base.join(p).to_string_lossy().into_owned();
        let mut args = vec!["netsense".to_string(), self.subcommand.clone()];
        if let Some(scene) = &self.scene {
            args.extend(["--scene".into(), resolve(scene)]);
        }
        for (key, value) in &self.overrides {
            let flag = format!("--{}", key.trim_start_matches('-').replace('_', "-"));
            let text = match value {
                serde_json::Value::Bool(true) => {
                    args.push(flag);
                    continue;
                }
                serde_json::Value::Bool(false) => continue,
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                _ => {
                    return Err(Error::Parameter(format!("override {key} must be a scalar or a list")));
                }
            };
            args.extend([flag, text]);
        }
        if let Some(seed) = self.seed {
            if SEEDED.contains(&self.subcommand.as_str()) {
                args.extend(["--seed".into(), seed.to_string()]);
            }
        }
        if let Some(dir) = &self.out_dir {
            let dir = base.join(dir);
            let has =
                |k: &str| self.overrides.keys().any(|o| o.trim_start_matches('-').replace('_', "-") == k);
            match self.subcommand.as_str() {
                "ambiguity" if !has("out") => {
                    args.extend(["--out".into(), dir.join("ambiguity.csv").to_string_lossy().into_owned()]);
                }
                "montecarlo" if !has("csv") => {
                    args.extend(["--csv".into(), dir.join("trials.csv").to_string_lossy().into_owned()]);
                }
                _ => {}
            }
        }
        Ok(args)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Something [`emit_report`] can write.
pub trait Report {
    fn write_json(&self, _out: &mut dyn Write) -> Result<()> {
        Err(Error::NotSupported("this report has no JSON form".into()))
    }

    fn write_csv(&self, _out: &mut dyn Write) -> Result<()> {
        Err(Error::NotSupported("this report has no CSV form".into()))
    }
}

fn json_to<T: Serialize + ?Sized>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

impl Report for ExperimentReport {
    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_to(self, out)
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        self.write_records_csv(out)
    }
}

impl Report for AmbiguitySurface {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        self.write_csv_db(out)
    }
}

impl Report for GhostReport {
    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_to(self, out)
    }
}

impl Report for GhostProbability {
    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_to(self, out)
    }
}

pub fn emit_report<R: Report + ?Sized>(report: &R, format: ReportFormat, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        ReportFormat::Json => report.write_json(&mut w)?,
        ReportFormat::Csv => report.write_csv(&mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn parse_and_dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => return usage_error(e, out, err),
    };
    if let Command::Run(run) = &cli.command {
        return run_config(&run.config, out, err);
    }
    finish(dispatch(cli.command, out), err)
}

fn usage_error(e: clap::Error, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = write!(out, "{}", e.render());
            0
        }
        _ => {
            let _ = write!(err, "{}", e.render());
            2
        }
    }
}

fn finish(result: Result<()>, err: &mut dyn Write) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn run_config(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let loaded = RunConfig::load(path).and_then(|c| {
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        let args = c.to_args(&base)?;
        Ok((c, base, args))
    });
    let (config, base, args) = match loaded {
        Ok(v) => v,
        Err(e) => return finish(Err(e), err),
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => return usage_error(e, out, err),
    };
    let mut buf = Vec::new();
    let result = dispatch(cli.command, &mut buf).and_then(|()| {
        if let Some(dir) = &config.out_dir {
            let dir = base.join(dir);
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join(format!("{}.json", config.subcommand)), &buf)?;
        }
        out.write_all(&buf)?;
        Ok(())
    });
    finish(result, err)
}

/// Entry point for the binary.
pub fn main_with_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = parse_and_dispatch(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    code
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Coverage(a) => coverage(&a, out),
        Command::Ambiguity(a) => ambiguity_cmd(&a, out),
        Command::Localize(a) => localize(&a, out),
        Command::Associate(a) => associate(&a, out),
        Command::Ghosts(a) => ghosts(&a, out),
        Command::Irs(a) => irs(&a, out),
        Command::Montecarlo(a) => montecarlo(&a, out),
        Command::Run(_) => Err(Error::Parameter("nested run".into())),
    }
}

fn load_scene(path: &Path) -> Result<Scene> {
    let scene = Scene::load(path)?;
    let report = validate_scene(&scene, DEFAULT_COLLINEARITY_TOL);
    if let Some(v) = report.violations.first() {
        return Err(Error::Geometry(format!("invalid scene {}: {v}", path.display())));
    }
    Ok(scene)
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut reader =
        csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    Ok(reader.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

#[derive(Serialize)]
struct CoverageOutput {
    rcs_dbsm: f64,
    snr_min_db: f64,
    max_range_m: f64,
    guard_interval_s: f64,
    range_resolution_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_db_at_range: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covered: Option<bool>,
}

fn coverage(a: &CoverageArgs, out: &mut dyn Write) -> Result<()> {
    let params = a.params();
    let budget = params.budget()?;
    let max_range_m = budget.max_sensing_range(a.snr_min_db)?;
    let (snr_db_at_range, covered) = match a.range_m {
        Some(r) => (Some(budget.sensing_snr(r)?.db), Some(budget.covered(a.snr_min_db, r)?)),
        None => (None, None),
    };
    json_to(
        &CoverageOutput {
            rcs_dbsm: a.rcs_dbsm,
            snr_min_db: a.snr_min_db,
            max_range_m,
            guard_interval_s: guard_interval(max_range_m)?,
            range_resolution_m: range_resolution(a.bandwidth_hz)?,
            snr_db_at_range,
            covered,
        },
        out,
    )
}

#[derive(Serialize)]
struct AmbiguityOutput {
    label: String,
    mode: AmbiguityMode,
    sequence_length: usize,
    delay_bins: usize,
    doppler_bins: usize,
    #[serde(flatten)]
    metrics: SidelobeMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<PathBuf>,
}

fn ambiguity_cmd(a: &AmbiguityArgs, out: &mut dyn Write) -> Result<()> {
    let seq = match a.waveform {
        WaveformKind::Zc => zadoff_chu(a.length, a.root)?,
        WaveformKind::Ofdm => ofdm_symbol(a.length, a.cp, a.seed.unwrap_or_else(default_seed))?,
    };
    let surface = ambiguity(&seq, a.doppler_bins, a.mode.into())?;
    let metrics = sidelobe_metrics(
        &surface,
        MainlobeExclusion { delay_bins: a.exclude_delay, doppler_bins: a.exclude_doppler },
    )?;
    if let Some(path) = &a.out {
        emit_report(&surface, ReportFormat::Csv, path)?;
    }
    json_to(
        &AmbiguityOutput {
            label: seq.label.clone(),
            mode: surface.mode,
            sequence_length: seq.len(),
            delay_bins: surface.delay_bins(),
            doppler_bins: surface.doppler_bins(),
            metrics,
            csv: a.out.clone(),
        },
        out,
    )
}

#[derive(Serialize)]
struct LocalizeOutput {
    anchors: Vec<String>,
    estimate: PositionEstimate,
}

fn localize(a: &LocalizeArgs, out: &mut dyn Write) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let measurements: Vec<RangeMeasurement> = read_csv(&a.measurements)?;
    let estimate = trilaterate(&scene.anchors, &measurements, &SolverOptions::default())?;
    json_to(
        &LocalizeOutput { anchors: measurements.iter().map(|m| m.anchor_id.clone()).collect(), estimate },
        out,
    )
}

#[derive(Deserialize)]
struct RangeRow {
    anchor_id: String,
    distance_m: f64,
}

fn associate(a: &AssociateArgs, out: &mut dyn Write) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let problem = match &a.measurements {
        None => AssociationProblem::from_scene(&scene)?,
        Some(path) => {
            let rows: Vec<RangeRow> = read_csv(path)?;
            let mut profiles: Vec<DistanceProfile> = Vec::new();
            for row in rows {
                match profiles.iter_mut().find(|p| p.anchor_id == row.anchor_id) {
                    Some(p) => p.distances.push(row.distance_m),
                    None => profiles
                        .push(DistanceProfile { anchor_id: row.anchor_id, distances: vec![row.distance_m] }),
                }
            }
            AssociationProblem::new(&profiles, &scene.anchors)?
        }
    };
    let solutions = match a.solver {
        SolverKind::Exhaustive => problem.enumerate(a.tol)?.solutions,
        SolverKind::Bnb => problem.enumerate_bnb(a.tol)?,
    };
    let truth: Vec<Point2> = scene.targets.iter().map(|t| t.position).collect();
    let truth = (!truth.is_empty()).then_some(truth.as_slice());
    ghost_report(solutions, truth, a.match_radius).write_json(out)
}

fn ghosts(a: &GhostsArgs, out: &mut dyn Write) -> Result<()> {
    let seed = a.seed.unwrap_or_else(default_seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads)
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let report = pool.install(|| {
        ghost_probability(a.trials, a.num_bs, a.num_targets, Bounds::square(a.side), a.tol, seed)
    })?;
    report.write_json(out)
}

#[derive(Serialize)]
struct IrsPathOutput {
    bs_id: String,
    bs_distance_m: f64,
    irs_distance_m: f64,
}

#[derive(Serialize)]
struct IrsOutput {
    irs_id: String,
    /// Mean of the per-path recoveries.
    irs_distance_m: f64,
    paths: Vec<IrsPathOutput>,
    estimate: PositionEstimate,
}

fn irs(a: &IrsArgs, out: &mut dyn Write) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let mut irs_anchors = scene.irs_anchors();
    let irs = irs_anchors.next().ok_or_else(|| Error::Geometry("the scene has no IRS anchor".into()))?;
    if irs_anchors.next().is_some() {
        return Err(Error::NotSupported("scenes with more than one IRS".into()));
    }
    let rows: Vec<IrsPathMeasurement> = read_csv(&a.measurements)?;
    let mut paths = Vec::with_capacity(rows.len());
    for m in &rows {
        if m.irs_id != irs.id {
            return Err(Error::Parameter(format!("unknown IRS {}", m.irs_id)));
        }
        let bs = scene
            .anchor(&m.bs_id)
            .filter(|b| b.kind == crate::scene::AnchorKind::ActiveBs)
            .ok_or_else(|| Error::Parameter(format!("unknown base station {}", m.bs_id)))?;
        if paths.iter().any(|p: &IrsPathOutput| p.bs_id == m.bs_id) {
            return Err(Error::Parameter(format!("duplicate row for base station {}", m.bs_id)));
        }
        paths.push(IrsPathOutput {
            bs_id: m.bs_id.clone(),
            bs_distance_m: m.bs_distance(),
            irs_distance_m: irs_target_distance(m, bs.position, irs.position)?,
        });
    }
    if paths.is_empty() {
        return Err(Error::Domain("no path measurements".into()));
    }
    let irs_distance_m = paths.iter().map(|p| p.irs_distance_m).sum::<f64>() / paths.len() as f64;
    let ranges: Vec<RangeMeasurement> =
        paths.iter().map(|p| RangeMeasurement::exact(p.bs_id.clone(), p.bs_distance_m)).collect();
    let bs: Vec<_> = scene.base_stations().cloned().collect();
    let estimate = localize_with_heterogeneous_anchors(
        &bs,
        &ranges,
        irs_distance_m,
        irs.position,
        &SolverOptions::default(),
    )?;
    json_to(&IrsOutput { irs_id: irs.id.clone(), irs_distance_m, paths, estimate }, out)
}

fn montecarlo(a: &MonteCarloArgs, out: &mut dyn Write) -> Result<()> {
    let scene = match &a.scene {
        Some(path) => SceneSource::Inline { scene: load_scene(path)? },
        None => SceneSource::Random {
            num_bs: a.num_bs,
            num_targets: a.num_targets,
            bounds: Bounds::square(a.side),
            rcs_dbsm: a.rcs_dbsm,
        },
    };
    let spec = ExperimentSpec {
        scene,
        link: LinkBudgetParams::pedestrian(),
        snr_min_db: a.snr_min_db,
        noise: NoiseModel {
            range_sigma_m: 0.0,
            quantize_to_resolution: a.quantize,
            bandwidth_hz: a.bandwidth_hz,
        },
        trials: a.trials,
        seed: a.seed.unwrap_or_else(default_seed),
        feas_tol_m: a.tol,
        sigmas_m: a.sigma_list.clone(),
        threads: a.threads,
    };
    let report = match a.mode {
        McMode::Uniqueness => run_uniqueness_experiment(&spec)?,
        McMode::Accuracy => run_accuracy_experiment(&spec)?,
    };
    if let Some(path) = &a.csv {
        emit_report(&report, ReportFormat::Csv, path)?;
    }
    match &a.out {
        Some(path) => {
            emit_report(&report, ReportFormat::Json, path)?;
            json_to(&report.aggregates, out)
        }
        None => report.write_json(out),
    }
}
