//! C interface to `netsense`.
//!
//! Objects cross the boundary as opaque handles created by `ns_*_new` or
//! `ns_*` constructors and released with the matching `ns_*_free`. Every
//! fallible call returns an [`NsStatus`]; on failure a description is
//! available from [`ns_last_error_message`] on the same thread. Results are
//! written through out-pointers only on success. Panics never cross the
//! boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use netsense::association::{ghost_probability, ghost_report, AssociationProblem, GhostReport};
use netsense::error::Error;
use netsense::irs::{irs_target_distance, IrsPathMeasurement};
use netsense::link_budget::{guard_interval, range_resolution, LinkBudget, LinkBudgetParams};
use netsense::localization::{trilaterate_points, SolverOptions};
use netsense::scene::{validate_scene, Bounds, Point2, Scene, DEFAULT_COLLINEARITY_TOL};
use netsense::waveform::{
    ambiguity, ofdm_symbol, sidelobe_metrics, zadoff_chu, AmbiguityMode, AmbiguitySurface, ComplexSequence,
    MainlobeExclusion,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Parameter = 4,
    Geometry = 5,
    Infeasible = 6,
    Inconsistent = 7,
    NotSupported = 8,
    Io = 9,
    Parse = 10,
    OutOfRange = 11,
    Panic = 12,
}

impl From<&Error> for NsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => Self::Domain,
            Error::Parameter(_) | Error::InvalidRoot { .. } | Error::Generation(_) => Self::Parameter,
            Error::Geometry(_) | Error::NoIntersection | Error::BehindRay { .. } => Self::Geometry,
            Error::InconsistentMeasurement { .. } => Self::Inconsistent,
            Error::Infeasible { .. } => Self::Infeasible,
            Error::NotSupported(_) => Self::NotSupported,
            Error::Io(_) => Self::Io,
            Error::Json(_) | Error::Csv(_) => Self::Parse,
        }
    }
}

/// Delay-Doppler surface with cyclic shifts.
pub const NS_AMBIGUITY_CYCLIC: c_int = 0;
/// Delay-Doppler surface with zero padding.
pub const NS_AMBIGUITY_LINEAR: c_int = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsPoint {
    pub x: f64,
    pub y: f64,
}

impl From<Point2> for NsPoint {
    fn from(p: Point2) -> Self {
        Self { x: p.x, y: p.y }
    }
}

impl From<NsPoint> for Point2 {
    fn from(p: NsPoint) -> Self {
        Point2::new(p.x, p.y)
    }
}

/// Radar range equation inputs; gains and RCS in dB.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsLinkBudgetParams {
    pub pt_watts: f64,
    pub gt_dbi: f64,
    pub gr_dbi: f64,
    pub gp_db: f64,
    pub carrier_hz: f64,
    pub rcs_dbsm: f64,
    pub temperature_k: f64,
    pub bandwidth_hz: f64,
    pub noise_factor_db: f64,
}

impl From<LinkBudgetParams> for NsLinkBudgetParams {
    fn from(p: LinkBudgetParams) -> Self {
        Self {
            pt_watts: p.pt_watts,
            gt_dbi: p.gt_dbi,
            gr_dbi: p.gr_dbi,
            gp_db: p.gp_db,
            carrier_hz: p.carrier_hz,
            rcs_dbsm: p.rcs_dbsm,
            temperature_k: p.temperature_k,
            bandwidth_hz: p.bandwidth_hz,
            noise_factor_db: p.noise_factor_db,
        }
    }
}

impl From<NsLinkBudgetParams> for LinkBudgetParams {
    fn from(p: NsLinkBudgetParams) -> Self {
        Self {
            pt_watts: p.pt_watts,
            gt_dbi: p.gt_dbi,
            gr_dbi: p.gr_dbi,
            gp_db: p.gp_db,
            carrier_hz: p.carrier_hz,
            rcs_dbsm: p.rcs_dbsm,
            temperature_k: p.temperature_k,
            bandwidth_hz: p.bandwidth_hz,
            noise_factor_db: p.noise_factor_db,
        }
    }
}

pub struct NsScene(Scene);
pub struct NsLinkBudget(LinkBudget);
pub struct NsGhostReport(GhostReport);
pub struct NsSequence(ComplexSequence);
pub struct NsSurface(AmbiguitySurface);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(NsStatus);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        set_last_error(e.to_string());
        Failure(NsStatus::from(&e))
    }
}

fn fail<T>(status: NsStatus, msg: &str) -> Result<T, Failure> {
    set_last_error(msg);
    Err(Failure(status))
}

/// Runs `f`, turning errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            NsStatus::Ok
        }
        Ok(Err(Failure(status))) => status,
        Err(_) => {
            set_last_error("internal panic");
            NsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    match p.as_ref() {
        Some(r) => Ok(r),
        None => fail(NsStatus::NullPointer, &format!("{what} is null")),
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return fail(NsStatus::NullPointer, &format!("{what} is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn check_out<T>(out: *mut T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return fail(NsStatus::NullPointer, &format!("{what} is null"));
    }
    Ok(())
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(NsStatus::NullPointer, &format!("{what} is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => fail(NsStatus::InvalidUtf8, &format!("{what} is not UTF-8")),
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(NsStatus::NullPointer, &format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next `ns_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Writes the pedestrian defaults (10 W, 20 dBi, 3.5 GHz, 100 MHz, -10 dBsm).
#[no_mangle]
pub unsafe extern "C" fn ns_link_budget_params_default(out: *mut NsLinkBudgetParams) -> NsStatus {
    guard(|| write(out, LinkBudgetParams::pedestrian().into(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn ns_link_budget_new(
    params: *const NsLinkBudgetParams,
    out: *mut *mut NsLinkBudget,
) -> NsStatus {
    guard(|| {
        let params = LinkBudgetParams::from(*deref(params, "params")?);
        check_out(out, "out")?;
        let budget = LinkBudget::new(&params)?;
        write(out, boxed(NsLinkBudget(budget)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_link_budget_free(budget: *mut NsLinkBudget) {
    free(budget)
}

#[no_mangle]
pub unsafe extern "C" fn ns_link_budget_snr_db(
    budget: *const NsLinkBudget,
    range_m: f64,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        let b = deref(budget, "budget")?;
        check_out(out, "out")?;
        write(out, b.0.sensing_snr(range_m)?.db, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_link_budget_max_range(
    budget: *const NsLinkBudget,
    snr_min_db: f64,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        let b = deref(budget, "budget")?;
        check_out(out, "out")?;
        write(out, b.0.max_sensing_range(snr_min_db)?, "out")
    })
}

/// Idle time letting an echo from `max_range_m` return, seconds.
#[no_mangle]
pub unsafe extern "C" fn ns_guard_interval(max_range_m: f64, out: *mut f64) -> NsStatus {
    guard(|| {
        check_out(out, "out")?;
        write(out, guard_interval(max_range_m)?, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_range_resolution(bandwidth_hz: f64, out: *mut f64) -> NsStatus {
    guard(|| {
        check_out(out, "out")?;
        write(out, range_resolution(bandwidth_hz)?, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_scene_from_json(json: *const c_char, out: *mut *mut NsScene) -> NsStatus {
    guard(|| {
        let text = string(json, "json")?;
        check_out(out, "out")?;
        let scene = Scene::from_json(text)?;
        write(out, boxed(NsScene(scene)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_scene_load(path: *const c_char, out: *mut *mut NsScene) -> NsStatus {
    guard(|| {
        let path = string(path, "path")?;
        check_out(out, "out")?;
        let scene = Scene::load(path)?;
        write(out, boxed(NsScene(scene)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_scene_free(scene: *mut NsScene) {
    free(scene)
}

/// Counts of base stations, IRS anchors and targets.
#[no_mangle]
pub unsafe extern "C" fn ns_scene_counts(
    scene: *const NsScene,
    num_bs: *mut usize,
    num_irs: *mut usize,
    num_targets: *mut usize,
) -> NsStatus {
    guard(|| {
        let s = &deref(scene, "scene")?.0;
        check_out(num_bs, "num_bs")?;
        check_out(num_irs, "num_irs")?;
        check_out(num_targets, "num_targets")?;
        write(num_bs, s.base_stations().count(), "num_bs")?;
        write(num_irs, s.irs_anchors().count(), "num_irs")?;
        write(num_targets, s.targets.len(), "num_targets")
    })
}

/// Number of topology violations (0 for a valid scene). The first one is
/// reported through `ns_last_error_message` if any.
#[no_mangle]
pub unsafe extern "C" fn ns_scene_validate(scene: *const NsScene, num_violations: *mut usize) -> NsStatus {
    guard(|| {
        let s = &deref(scene, "scene")?.0;
        check_out(num_violations, "num_violations")?;
        let report = validate_scene(s, DEFAULT_COLLINEARITY_TOL);
        write(num_violations, report.violations.len(), "num_violations")?;
        Ok(())
    })
}

/// Feasible associations of the scene's targets from exact ranges.
#[no_mangle]
pub unsafe extern "C" fn ns_associate_scene(
    scene: *const NsScene,
    feas_tol_m: f64,
    match_radius_m: f64,
    out: *mut *mut NsGhostReport,
) -> NsStatus {
    guard(|| {
        let s = &deref(scene, "scene")?.0;
        check_out(out, "out")?;
        let solutions = AssociationProblem::from_scene(s)?.enumerate(feas_tol_m)?.solutions;
        let truth: Vec<Point2> = s.targets.iter().map(|t| t.position).collect();
        let report = ghost_report(solutions, Some(&truth), match_radius_m);
        write(out, boxed(NsGhostReport(report)), "out")
    })
}

/// Feasible associations of unordered range sets.
///
/// `anchors` holds `num_anchors` positions; `distances` is row-major with
/// `num_targets` ranges per anchor in any order.
#[no_mangle]
pub unsafe extern "C" fn ns_associate(
    anchors: *const NsPoint,
    num_anchors: usize,
    distances: *const f64,
    num_targets: usize,
    feas_tol_m: f64,
    out: *mut *mut NsGhostReport,
) -> NsStatus {
    guard(|| {
        let anchors = slice(anchors, num_anchors, "anchors")?;
        let Some(total) = num_anchors.checked_mul(num_targets) else {
            return fail(NsStatus::OutOfRange, "num_anchors * num_targets overflows");
        };
        let distances = slice(distances, total, "distances")?;
        check_out(out, "out")?;
        let rows = if num_targets == 0 {
            vec![Vec::new(); num_anchors]
        } else {
            distances.chunks(num_targets).map(<[f64]>::to_vec).collect()
        };
        let problem = AssociationProblem::from_points(anchors.iter().map(|&p| p.into()).collect(), rows)?;
        let solutions = problem.enumerate(feas_tol_m)?.solutions;
        write(out, boxed(NsGhostReport(ghost_report(solutions, None, 0.0))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_ghost_report_free(report: *mut NsGhostReport) {
    free(report)
}

#[no_mangle]
pub unsafe extern "C" fn ns_ghost_report_num_solutions(
    report: *const NsGhostReport,
    out: *mut usize,
) -> NsStatus {
    guard(|| write(out, deref(report, "report")?.0.feasible_solutions.len(), "out"))
}

/// Number of targets per solution.
#[no_mangle]
pub unsafe extern "C" fn ns_ghost_report_num_targets(
    report: *const NsGhostReport,
    out: *mut usize,
) -> NsStatus {
    guard(|| {
        let r = &deref(report, "report")?.0;
        let k = r.feasible_solutions.first().map_or(0, |s| s.estimates.len());
        write(out, k, "out")
    })
}

/// Estimated position of `target` in feasible solution `solution` (best first).
#[no_mangle]
pub unsafe extern "C" fn ns_ghost_report_position(
    report: *const NsGhostReport,
    solution: usize,
    target: usize,
    out: *mut NsPoint,
) -> NsStatus {
    guard(|| {
        let r = &deref(report, "report")?.0;
        check_out(out, "out")?;
        match r.feasible_solutions.get(solution).and_then(|s| s.estimates.get(target)) {
            Some(e) => write(out, e.position.into(), "out"),
            None => fail(NsStatus::OutOfRange, "solution or target index out of range"),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_ghost_report_residual(
    report: *const NsGhostReport,
    solution: usize,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        let r = &deref(report, "report")?.0;
        check_out(out, "out")?;
        match r.feasible_solutions.get(solution) {
            Some(s) => write(out, s.max_residual_m, "out"),
            None => fail(NsStatus::OutOfRange, "solution index out of range"),
        }
    })
}

/// Ghost positions (estimates matching no scene target); 0 without ground truth.
#[no_mangle]
pub unsafe extern "C" fn ns_ghost_report_num_ghosts(
    report: *const NsGhostReport,
    out: *mut usize,
) -> NsStatus {
    guard(|| write(out, deref(report, "report")?.0.ghost_positions.len(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn ns_ghost_report_ghost(
    report: *const NsGhostReport,
    index: usize,
    out: *mut NsPoint,
) -> NsStatus {
    guard(|| {
        let r = &deref(report, "report")?.0;
        check_out(out, "out")?;
        match r.ghost_positions.get(index) {
            Some(&p) => write(out, p.into(), "out"),
            None => fail(NsStatus::OutOfRange, "ghost index out of range"),
        }
    })
}

/// The report as JSON; release with `ns_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ns_ghost_report_to_json(
    report: *const NsGhostReport,
    out: *mut *mut c_char,
) -> NsStatus {
    guard(|| {
        let r = &deref(report, "report")?.0;
        check_out(out, "out")?;
        let text = match CString::new(r.to_json()?) {
            Ok(t) => t,
            Err(_) => return fail(NsStatus::Parse, "report contains a NUL byte"),
        };
        write(out, text.into_raw(), "out")
    })
}

/// Fraction of random scenes admitting more than one feasible association.
#[no_mangle]
pub unsafe extern "C" fn ns_ghost_probability(
    trials: usize,
    num_bs: usize,
    num_targets: usize,
    side_m: f64,
    feas_tol_m: f64,
    seed: u64,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        check_out(out, "out")?;
        let r = ghost_probability(trials, num_bs, num_targets, Bounds::square(side_m), feas_tol_m, seed)?;
        write(out, r.fraction, "out")
    })
}

/// Gauss-Newton position fix from `n` anchor ranges. `residual_rms_m` may be null.
#[no_mangle]
pub unsafe extern "C" fn ns_trilaterate(
    anchors: *const NsPoint,
    distances: *const f64,
    n: usize,
    out: *mut NsPoint,
    residual_rms_m: *mut f64,
) -> NsStatus {
    guard(|| {
        let anchors: Vec<Point2> = slice(anchors, n, "anchors")?.iter().map(|&p| p.into()).collect();
        let distances = slice(distances, n, "distances")?;
        check_out(out, "out")?;
        let e = trilaterate_points(&anchors, distances, &SolverOptions::default())?;
        write(out, e.position.into(), "out")?;
        if !residual_rms_m.is_null() {
            residual_rms_m.write(e.residual_rms_m);
        }
        Ok(())
    })
}

/// Target-IRS distance from the direct and composite round trips of one BS.
#[no_mangle]
pub unsafe extern "C" fn ns_irs_target_distance(
    bs: NsPoint,
    irs: NsPoint,
    direct_roundtrip_m: f64,
    composite_roundtrip_m: f64,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        check_out(out, "out")?;
        let m = IrsPathMeasurement {
            bs_id: String::new(),
            irs_id: String::new(),
            direct_roundtrip_m,
            composite_roundtrip_m,
        };
        write(out, irs_target_distance(&m, bs.into(), irs.into())?, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_zadoff_chu(length: usize, root: usize, out: *mut *mut NsSequence) -> NsStatus {
    guard(|| {
        check_out(out, "out")?;
        write(out, boxed(NsSequence(zadoff_chu(length, root)?)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_ofdm_symbol(
    num_subcarriers: usize,
    cp_length: usize,
    seed: u64,
    out: *mut *mut NsSequence,
) -> NsStatus {
    guard(|| {
        check_out(out, "out")?;
        write(out, boxed(NsSequence(ofdm_symbol(num_subcarriers, cp_length, seed)?)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_sequence_free(seq: *mut NsSequence) {
    free(seq)
}

#[no_mangle]
pub unsafe extern "C" fn ns_sequence_len(seq: *const NsSequence, out: *mut usize) -> NsStatus {
    guard(|| write(out, deref(seq, "seq")?.0.len(), "out"))
}

/// Copies `min(len, capacity)` samples into the split real/imaginary buffers.
#[no_mangle]
pub unsafe extern "C" fn ns_sequence_samples(
    seq: *const NsSequence,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> NsStatus {
    guard(|| {
        let s = &deref(seq, "seq")?.0;
        let n = s.len().min(capacity);
        if n > 0 {
            check_out(re, "re")?;
            check_out(im, "im")?;
        }
        for (i, z) in s.samples.iter().take(n).enumerate() {
            re.add(i).write(z.re);
            im.add(i).write(z.im);
        }
        Ok(())
    })
}

/// `mode` is `NS_AMBIGUITY_CYCLIC` or `NS_AMBIGUITY_LINEAR`.
#[no_mangle]
pub unsafe extern "C" fn ns_ambiguity(
    seq: *const NsSequence,
    doppler_bins: usize,
    mode: c_int,
    out: *mut *mut NsSurface,
) -> NsStatus {
    guard(|| {
        let s = &deref(seq, "seq")?.0;
        check_out(out, "out")?;
        let mode = match mode {
            NS_AMBIGUITY_CYCLIC => AmbiguityMode::Cyclic,
            NS_AMBIGUITY_LINEAR => AmbiguityMode::Linear,
            other => return fail(NsStatus::Parameter, &format!("unknown ambiguity mode {other}")),
        };
        write(out, boxed(NsSurface(ambiguity(s, doppler_bins, mode)?)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_surface_free(surface: *mut NsSurface) {
    free(surface)
}

#[no_mangle]
pub unsafe extern "C" fn ns_surface_dims(
    surface: *const NsSurface,
    delay_bins: *mut usize,
    doppler_bins: *mut usize,
) -> NsStatus {
    guard(|| {
        let s = &deref(surface, "surface")?.0;
        check_out(delay_bins, "delay_bins")?;
        check_out(doppler_bins, "doppler_bins")?;
        write(delay_bins, s.delay_bins(), "delay_bins")?;
        write(doppler_bins, s.doppler_bins(), "doppler_bins")
    })
}

/// Normalized magnitude at grid cell (`delay_index`, `doppler_index`).
#[no_mangle]
pub unsafe extern "C" fn ns_surface_get(
    surface: *const NsSurface,
    delay_index: usize,
    doppler_index: usize,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        let s = &deref(surface, "surface")?.0;
        check_out(out, "out")?;
        if delay_index >= s.delay_bins() || doppler_index >= s.doppler_bins() {
            return fail(NsStatus::OutOfRange, "grid index out of range");
        }
        write(out, s.get(delay_index, doppler_index), "out")
    })
}

/// Peak and integrated side-lobe levels in dB, excluding a main lobe of the
/// given half-widths in bins.
#[no_mangle]
pub unsafe extern "C" fn ns_surface_sidelobes(
    surface: *const NsSurface,
    exclude_delay: usize,
    exclude_doppler: usize,
    psl_db: *mut f64,
    isl_db: *mut f64,
) -> NsStatus {
    guard(|| {
        let s = &deref(surface, "surface")?.0;
        check_out(psl_db, "psl_db")?;
        check_out(isl_db, "isl_db")?;
        let m = sidelobe_metrics(
            s,
            MainlobeExclusion { delay_bins: exclude_delay, doppler_bins: exclude_doppler },
        )?;
        write(psl_db, m.psl_db, "psl_db")?;
        write(isl_db, m.isl_db, "isl_db")
    })
}
