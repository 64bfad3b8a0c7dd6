//! Ranging through a passive reflecting surface.
//!
//! A base station measures two echoes of the same target: the direct round
//! trip `BS → target → BS` (twice the BS-target length `L1`) and the
//! composite path `BS → target → IRS → BS` (`L1 + L2 + L3`). With the BS and
//! IRS positions known, `L3` is geometry, so the unobservable target-IRS
//! distance is `L2 = composite − L1 − L3`. The IRS then acts as one more
//! trilateration anchor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::{trilaterate_points, PositionEstimate, RangeMeasurement, SolverOptions};
use crate::scene::{true_distance, Anchor, Point2};

/// Slack allowed before a negative recovered `L2` is reported as inconsistent, meters.
pub const NEGATIVE_SLACK_M: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrsPathMeasurement {
    pub bs_id: String,
    pub irs_id: String,
    /// `BS → target → BS`, i.e. `2·L1`.
    pub direct_roundtrip_m: f64,
    /// `BS → target → IRS → BS`, i.e. `L1 + L2 + L3`.
    pub composite_roundtrip_m: f64,
}

impl IrsPathMeasurement {
    /// Noise-free path lengths for a target at `target`.
    pub fn synthesize(bs: &Anchor, irs: &Anchor, target: Point2) -> Self {
        let l1 = true_distance(bs.position, target);
        let l2 = true_distance(target, irs.position);
        let l3 = true_distance(irs.position, bs.position);
        Self {
            bs_id: bs.id.clone(),
            irs_id: irs.id.clone(),
            direct_roundtrip_m: 2.0 * l1,
            composite_roundtrip_m: l1 + l2 + l3,
        }
    }

    /// One-way BS-target distance `L1`.
    pub fn bs_distance(&self) -> f64 {
        self.direct_roundtrip_m / 2.0
    }
}

/// Recovers the target-IRS distance `L2` by path-length subtraction.
pub fn irs_target_distance(m: &IrsPathMeasurement, bs_pos: Point2, irs_pos: Point2) -> Result<f64> {
    if !(m.direct_roundtrip_m.is_finite() && m.direct_roundtrip_m >= 0.0)
        || !(m.composite_roundtrip_m.is_finite() && m.composite_roundtrip_m >= 0.0)
    {
        return Err(Error::Domain(format!(
            "path lengths must be finite and nonnegative, got {} and {}",
            m.direct_roundtrip_m, m.composite_roundtrip_m
        )));
    }
    let l3 = true_distance(bs_pos, irs_pos);
    if l3 == 0.0 {
        return Err(Error::Geometry("base station and IRS coincide".into()));
    }
    let l2 = m.composite_roundtrip_m - m.bs_distance() - l3;
    if l2 < -NEGATIVE_SLACK_M {
        return Err(Error::InconsistentMeasurement { value_m: l2 });
    }
    Ok(l2.max(0.0))
}

/// Trilaterates with the base stations plus the IRS as an ordinary anchor.
pub fn localize_with_heterogeneous_anchors(
    bs_anchors: &[Anchor],
    bs_measurements: &[RangeMeasurement],
    irs_distance_m: f64,
    irs_pos: Point2,
    opts: &SolverOptions,
) -> Result<PositionEstimate> {
    if bs_measurements.len() < 2 {
        return Err(Error::Geometry(format!(
            "at least 2 base-station ranges are required, got {}",
            bs_measurements.len()
        )));
    }
    let mut positions = Vec::with_capacity(bs_measurements.len() + 1);
    let mut distances = Vec::with_capacity(bs_measurements.len() + 1);
    for m in bs_measurements {
        let a = bs_anchors
            .iter()
            .find(|a| a.id == m.anchor_id)
            .ok_or_else(|| Error::Parameter(format!("unknown base station {}", m.anchor_id)))?;
        positions.push(a.position);
        distances.push(m.distance_m);
    }
    positions.push(irs_pos);
    distances.push(irs_distance_m);
    trilaterate_points(&positions, &distances, opts)
}
