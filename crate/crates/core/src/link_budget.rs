//! Monostatic radar range equation for base-station sensing.
//!
//! ```text
//!            Pt Gt Gr Gp λ² σ
//! SNR = ------------------------------
//!        (4π)³ k T0 B Nf R⁴
//! ```
//!
//! [`LinkBudgetParams`] holds the user-facing values (gains and RCS in dB).
//! [`LinkBudget`] converts them to linear units once and folds everything
//! except `R` into a single constant, so `SNR(R) = K / R⁴`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Boltzmann constant, J/K (rounded as in common link-budget tables).
pub const BOLTZMANN: f64 = 1.38e-23;

/// Default detection threshold, dB.
pub const DEFAULT_SNR_MIN_DB: f64 = 10.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetParams {
    pub pt_watts: f64,
    pub gt_dbi: f64,
    pub gr_dbi: f64,
    /// Processing gain, treated as an opaque multiplicative factor.
    pub gp_db: f64,
    pub carrier_hz: f64,
    pub rcs_dbsm: f64,
    pub temperature_k: f64,
    pub bandwidth_hz: f64,
    pub noise_factor_db: f64,
}

impl LinkBudgetParams {
    /// 10 W, 20 dBi antennas, 10 dB processing gain, 3.5 GHz, 290 K,
    /// 100 MHz, 5 dB noise factor; RCS of a pedestrian (-10 dBsm).
    pub const fn pedestrian() -> Self {
        Self {
            pt_watts: 10.0,
            gt_dbi: 20.0,
            gr_dbi: 20.0,
            gp_db: 10.0,
            carrier_hz: 3.5e9,
            rcs_dbsm: -10.0,
            temperature_k: 290.0,
            bandwidth_hz: 100e6,
            noise_factor_db: 5.0,
        }
    }

    /// Same radio as [`pedestrian`](Self::pedestrian) with a 15 dBsm vehicle.
    pub const fn vehicle() -> Self {
        let mut p = Self::pedestrian();
        p.rcs_dbsm = 15.0;
        p
    }

    pub fn with_rcs_dbsm(mut self, rcs_dbsm: f64) -> Self {
        self.rcs_dbsm = rcs_dbsm;
        self
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn budget(&self) -> Result<LinkBudget> {
        LinkBudget::new(self)
    }
}

impl Default for LinkBudgetParams {
    fn default() -> Self {
        Self::pedestrian()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrResult {
    pub linear: f64,
    pub db: f64,
}

impl SnrResult {
    pub fn from_linear(linear: f64) -> Self {
        Self { linear, db: linear_to_db(linear) }
    }
}

/// Validated link budget in linear units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    params: LinkBudgetParams,
    /// `SNR * R^4`, in m^4.
    snr_r4: f64,
}

impl LinkBudget {
    pub fn new(params: &LinkBudgetParams) -> Result<Self> {
        let positive = [
            ("pt_watts", params.pt_watts),
            ("carrier_hz", params.carrier_hz),
            ("temperature_k", params.temperature_k),
            ("bandwidth_hz", params.bandwidth_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let db_fields = [
            ("gt_dbi", params.gt_dbi),
            ("gr_dbi", params.gr_dbi),
            ("gp_db", params.gp_db),
            ("rcs_dbsm", params.rcs_dbsm),
            ("noise_factor_db", params.noise_factor_db),
        ];
        for (name, v) in db_fields {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }

        let lambda = params.wavelength_m();
        let numerator = params.pt_watts
            * db_to_linear(params.gt_dbi)
            * db_to_linear(params.gr_dbi)
            * db_to_linear(params.gp_db)
            * lambda
            * lambda
            * db_to_linear(params.rcs_dbsm);
        let denominator = (4.0 * PI).powi(3)
            * BOLTZMANN
            * params.temperature_k
            * params.bandwidth_hz
            * db_to_linear(params.noise_factor_db);

        Ok(Self { params: *params, snr_r4: numerator / denominator })
    }

    pub fn params(&self) -> &LinkBudgetParams {
        &self.params
    }

    /// Sensing SNR of a target at `range_m` from the base station.
    pub fn sensing_snr(&self, range_m: f64) -> Result<SnrResult> {
        if !(range_m.is_finite() && range_m > 0.0) {
            return Err(Error::Domain(format!("range must be positive, got {range_m}")));
        }
        Ok(SnrResult::from_linear(self.snr_r4 / range_m.powi(4)))
    }

    /// Largest range at which the SNR still reaches `snr_min_db`.
    pub fn max_sensing_range(&self, snr_min_db: f64) -> Result<f64> {
        if !snr_min_db.is_finite() {
            return Err(Error::Domain(format!("snr_min_db must be finite, got {snr_min_db}")));
        }
        Ok((self.snr_r4 / db_to_linear(snr_min_db)).powf(0.25))
    }

    /// Whether a target at `distance_m` is detectable; the boundary counts as covered.
    pub fn covered(&self, snr_min_db: f64, distance_m: f64) -> Result<bool> {
        if !(distance_m.is_finite() && distance_m > 0.0) {
            return Err(Error::Domain(format!("distance must be positive, got {distance_m}")));
        }
        Ok(distance_m <= self.max_sensing_range(snr_min_db)?)
    }
}

pub fn sensing_snr(params: &LinkBudgetParams, range_m: f64) -> Result<SnrResult> {
    LinkBudget::new(params)?.sensing_snr(range_m)
}

pub fn max_sensing_range(params: &LinkBudgetParams, snr_min_db: f64) -> Result<f64> {
    LinkBudget::new(params)?.max_sensing_range(snr_min_db)
}

pub fn covered(params: &LinkBudgetParams, snr_min_db: f64, distance_m: f64) -> Result<bool> {
    LinkBudget::new(params)?.covered(snr_min_db, distance_m)
}

/// Two-way range resolution `c / (2B)`.
pub fn range_resolution(bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    Ok(SPEED_OF_LIGHT / (2.0 * bandwidth_hz))
}

/// TDD guard interval long enough for the echo from `max_range_m` to return.
pub fn guard_interval(max_range_m: f64) -> Result<f64> {
    if !(max_range_m.is_finite() && max_range_m > 0.0) {
        return Err(Error::Domain(format!("max range must be positive, got {max_range_m}")));
    }
    Ok(2.0 * max_range_m / SPEED_OF_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn pedestrian_snr_at_413m() {
        let snr = sensing_snr(&LinkBudgetParams::pedestrian(), 413.0).unwrap();
        assert!((snr.db - 10.0).abs() < 0.2, "{}", snr.db);
    }

    #[test]
    fn vehicle_snr_at_1744m() {
        let snr = sensing_snr(&LinkBudgetParams::vehicle(), 1744.0).unwrap();
        assert!((snr.db - 10.0).abs() < 0.2, "{}", snr.db);
    }

    #[test]
    fn doubling_range_costs_12db() {
        let b = LinkBudgetParams::pedestrian().budget().unwrap();
        let d = b.sensing_snr(100.0).unwrap().db - b.sensing_snr(200.0).unwrap().db;
        assert!((d - 10.0 * 16f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn max_ranges() {
        let r = max_sensing_range(&LinkBudgetParams::pedestrian(), 10.0).unwrap();
        assert!(rel(r, 413.0) < 0.01, "{r}");
        let r = max_sensing_range(&LinkBudgetParams::vehicle(), 10.0).unwrap();
        assert!(rel(r, 1744.0) < 0.01, "{r}");
    }

    #[test]
    fn rcs_times_16_doubles_range() {
        let p = LinkBudgetParams::pedestrian();
        let r1 = max_sensing_range(&p, 10.0).unwrap();
        let p16 = p.with_rcs_dbsm(p.rcs_dbsm + 10.0 * 16f64.log10());
        let r2 = max_sensing_range(&p16, 10.0).unwrap();
        assert!(rel(r2, 2.0 * r1) < 1e-12);
    }

    #[test]
    fn resolution_and_guard() {
        assert!(rel(range_resolution(400e6).unwrap(), 0.375) < 1e-3);
        assert!(rel(range_resolution(800e6).unwrap(), 0.1875) < 1e-3);
        let r1 = range_resolution(1e8).unwrap();
        let r2 = range_resolution(2e8).unwrap();
        assert!(rel(r2, r1 / 2.0) < 1e-15);
        assert!(rel(guard_interval(150.0).unwrap(), 1e-6) < 1e-3);
        assert!(rel(guard_interval(0.15).unwrap(), 1e-9) < 1e-3);
        assert!(rel(guard_interval(413.0).unwrap(), 2.755e-6) < 1e-3);
        assert!(range_resolution(0.0).is_err());
        assert!(guard_interval(-1.0).is_err());
    }

    #[test]
    fn coverage_gate() {
        let p = LinkBudgetParams::pedestrian();
        assert!(covered(&p, 10.0, 400.0).unwrap());
        assert!(!covered(&p, 10.0, 500.0).unwrap());
        let rmax = max_sensing_range(&p, 10.0).unwrap();
        assert!(covered(&p, 10.0, rmax).unwrap());
        assert!(covered(&p, 10.0, 0.0).is_err());
    }

    #[test]
    fn domain_errors() {
        let p = LinkBudgetParams::pedestrian();
        assert!(sensing_snr(&p, 0.0).is_err());
        assert!(sensing_snr(&p, -5.0).is_err());
        let mut bad = p;
        bad.bandwidth_hz = 0.0;
        assert!(matches!(LinkBudget::new(&bad), Err(Error::Domain(_))));
        bad = p;
        bad.carrier_hz = -1.0;
        assert!(LinkBudget::new(&bad).is_err());
        assert!(max_sensing_range(&p, f64::NAN).is_err());
    }

    fn arb_params() -> impl Strategy<Value = LinkBudgetParams> {
        (
            0.1f64..100.0,
            0.0f64..30.0,
            0.0f64..30.0,
            0.0f64..30.0,
            1e9f64..60e9,
            -20.0f64..30.0,
            200.0f64..400.0,
            1e6f64..1e9,
            0.0f64..12.0,
        )
            .prop_map(|(pt, gt, gr, gp, fc, rcs, t, b, nf)| LinkBudgetParams {
                pt_watts: pt,
                gt_dbi: gt,
                gr_dbi: gr,
                gp_db: gp,
                carrier_hz: fc,
                rcs_dbsm: rcs,
                temperature_k: t,
                bandwidth_hz: b,
                noise_factor_db: nf,
            })
    }

    proptest! {
        #[test]
        fn snr_range_round_trip(p in arb_params(), gamma in -10.0f64..40.0) {
            let b = p.budget().unwrap();
            let r = b.max_sensing_range(gamma).unwrap();
            let snr = b.sensing_snr(r).unwrap();
            prop_assert!(rel(snr.linear, db_to_linear(gamma)) < 1e-9);
        }

        #[test]
        fn snr_decreasing_in_range(p in arb_params(), r in 1.0f64..1e4, dr in 1e-3f64..1e3) {
            let b = p.budget().unwrap();
            prop_assert!(b.sensing_snr(r + dr).unwrap().linear < b.sensing_snr(r).unwrap().linear);
        }

        #[test]
        fn range_monotone_in_params(p in arb_params(), gamma in -10.0f64..40.0, step in 0.1f64..5.0) {
            let base = max_sensing_range(&p, gamma).unwrap();
            let mut q = p; q.rcs_dbsm += step;
            prop_assert!(max_sensing_range(&q, gamma).unwrap() > base);
            let mut q = p; q.pt_watts *= 1.0 + step;
            prop_assert!(max_sensing_range(&q, gamma).unwrap() > base);
            let mut q = p; q.bandwidth_hz *= 1.0 + step;
            prop_assert!(max_sensing_range(&q, gamma).unwrap() < base);
            let mut q = p; q.noise_factor_db += step;
            prop_assert!(max_sensing_range(&q, gamma).unwrap() < base);
            prop_assert!(max_sensing_range(&p, gamma + step).unwrap() < base);
        }

        #[test]
        fn db_round_trip(x in 1e-12f64..1e12) {
            prop_assert!(rel(db_to_linear(linear_to_db(x)), x) < 1e-12);
        }
    }
}
