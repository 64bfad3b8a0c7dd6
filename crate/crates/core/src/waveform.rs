//! Pilot and data waveforms and their delay-Doppler ambiguity surfaces.
//!
//! The discrete ambiguity function used here is
//!
//! ```text
//! A(τ, ν) = | Σ_n x[n] · conj(x[n − τ]) · exp(j2πνn / N) |
//! ```
//!
//! with `n − τ` taken modulo `N` in [`AmbiguityMode::Cyclic`] and
//! out-of-range samples treated as zero in [`AmbiguityMode::Linear`].
//! Delay and Doppler are integer bins. Surfaces are normalized by
//! `A(0, 0) = Σ|x|²`, which is the global maximum by Cauchy-Schwarz.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor reported for levels of exactly zero energy, dB.
pub const DB_FLOOR: f64 = -300.0;

pub fn magnitude_db(mag: f64) -> f64 {
    if mag > 0.0 {
        (20.0 * mag.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    pub samples: Vec<Complex64>,
    pub label: String,
}

impl ComplexSequence {
    pub fn new(samples: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("sequence must not be empty".into()));
        }
        Ok(Self { samples, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Scales to unit mean power. All-zero sequences are left untouched.
    pub fn normalized(mut self) -> Self {
        let p = self.mean_power();
        if p > 0.0 {
            let g = 1.0 / p.sqrt();
            for s in &mut self.samples {
                *s *= g;
            }
        }
        self
    }

    /// Multiplies every sample by `exp(j·phase)`.
    pub fn rotated(mut self, phase: f64) -> Self {
        let r = Complex64::from_polar(1.0, phase);
        for s in &mut self.samples {
            *s *= r;
        }
        self
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zadoff-Chu sequence of length `length` and root `root`.
///
/// `x[n] = exp(−jπ u n (n+1) / N)` for odd `N`, `exp(−jπ u n² / N)` for even `N`.
pub fn zadoff_chu(length: usize, root: usize) -> Result<ComplexSequence> {
    if length < 2 {
        return Err(Error::Parameter(format!("Zadoff-Chu length must be >= 2, got {length}")));
    }
    if root == 0 || root >= length || gcd(root, length) != 1 {
        return Err(Error::InvalidRoot { length, root });
    }
    let n_len = length as u128;
    let u = root as u128;
    let odd = length % 2 == 1;
    let samples = (0..length as u128)
        .map(|n| {
            // reduce the quadratic phase index exactly modulo 2N before going to floating point
            let q = if odd { u * n * (n + 1) } else { u * n * n } % (2 * n_len);
            Complex64::from_polar(1.0, -PI * q as f64 / length as f64)
        })
        .collect();
    ComplexSequence::new(samples, format!("zc(N={length},u={root})"))
}

/// Phase-shift keying alphabet of `order` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Psk {
    pub order: usize,
}

impl Psk {
    pub const BPSK: Psk = Psk { order: 2 };
    pub const QPSK: Psk = Psk { order: 4 };

    /// Unit-modulus point `k` of the alphabet, offset by half a sector.
    pub fn point(&self, k: usize) -> Complex64 {
        let m = self.order as f64;
        Complex64::from_polar(1.0, PI / m + 2.0 * PI * (k % self.order) as f64 / m)
    }
}

/// One cyclic-prefixed OFDM symbol with seeded uniform QPSK data.
pub fn ofdm_symbol(num_subcarriers: usize, cp_length: usize, seed: u64) -> Result<ComplexSequence> {
    ofdm_symbol_with(num_subcarriers, cp_length, Psk::QPSK, seed)
}

pub fn ofdm_symbol_with(
    num_subcarriers: usize,
    cp_length: usize,
    constellation: Psk,
    seed: u64,
) -> Result<ComplexSequence> {
    if num_subcarriers == 0 || !num_subcarriers.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "number of subcarriers must be a power of two, got {num_subcarriers}"
        )));
    }
    if cp_length >= num_subcarriers {
        return Err(Error::Parameter(format!(
            "cyclic prefix ({cp_length}) must be shorter than the symbol ({num_subcarriers})"
        )));
    }
    if constellation.order < 2 {
        return Err(Error::Parameter("constellation needs at least 2 points".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut body: Vec<Complex64> =
        (0..num_subcarriers).map(|_| constellation.point(rng.random_range(0..constellation.order))).collect();

    FftPlanner::new().plan_fft_inverse(num_subcarriers).process(&mut body);
    let scale = 1.0 / (num_subcarriers as f64).sqrt();
    for s in &mut body {
        *s *= scale;
    }

    let mut samples = Vec::with_capacity(num_subcarriers + cp_length);
    samples.extend_from_slice(&body[num_subcarriers - cp_length..]);
    samples.extend_from_slice(&body);
    Ok(ComplexSequence::new(samples, format!("ofdm(N={num_subcarriers},cp={cp_length},seed={seed})"))?
        .normalized())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbiguityMode {
    Cyclic,
    Linear,
}

/// Normalized delay-Doppler magnitude grid, row-major by delay.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    pub magnitudes: Vec<f64>,
    /// Delay of each row, samples.
    pub delays: Vec<i64>,
    /// Doppler of each column, bins of `1/N` cycles per sample.
    pub dopplers: Vec<i64>,
    pub mode: AmbiguityMode,
    /// Sequence length the surface was computed from.
    pub seq_len: usize,
}

impl AmbiguitySurface {
    pub fn delay_bins(&self) -> usize {
        self.delays.len()
    }

    pub fn doppler_bins(&self) -> usize {
        self.dopplers.len()
    }

    pub fn get(&self, delay_idx: usize, doppler_idx: usize) -> f64 {
        self.magnitudes[delay_idx * self.dopplers.len() + doppler_idx]
    }

    pub fn row(&self, delay_idx: usize) -> &[f64] {
        let d = self.dopplers.len();
        &self.magnitudes[delay_idx * d..(delay_idx + 1) * d]
    }

    /// Index pair of `(τ = 0, ν = 0)`.
    pub fn origin(&self) -> (usize, usize) {
        let di = self.delays.iter().position(|&t| t == 0).unwrap_or(0);
        let vi = self.dopplers.iter().position(|&v| v == 0).unwrap_or(0);
        (di, vi)
    }

    /// Magnitude at delay `τ`, Doppler `ν`, if on the grid.
    pub fn at(&self, tau: i64, nu: i64) -> Option<f64> {
        let di = self.delays.iter().position(|&t| t == tau)?;
        let vi = self.dopplers.iter().position(|&v| v == nu)?;
        Some(self.get(di, vi))
    }

    /// Distance from zero delay, wrapping for cyclic surfaces.
    fn delay_distance(&self, tau: i64) -> u64 {
        match self.mode {
            AmbiguityMode::Cyclic => {
                let n = self.seq_len as i64;
                let t = tau.rem_euclid(n);
                t.min(n - t) as u64
            }
            AmbiguityMode::Linear => tau.unsigned_abs(),
        }
    }

    /// CSV with a `delay` column followed by one column per Doppler bin, values in dB.
    pub fn write_csv_db<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["delay".to_string()];
        header.extend(self.dopplers.iter().map(|v| format!("nu{v}")));
        w.write_record(&header)?;
        for (i, tau) in self.delays.iter().enumerate() {
            let mut rec = vec![tau.to_string()];
            rec.extend(self.row(i).iter().map(|&m| format!("{:.6}", magnitude_db(m))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integer Doppler bins `−⌊D/2⌋ ..= ⌈D/2⌉ − 1`.
pub fn doppler_axis(doppler_bins: usize) -> Vec<i64> {
    let half = (doppler_bins / 2) as i64;
    (0..doppler_bins as i64).map(|k| k - half).collect()
}

pub fn ambiguity(
    seq: &ComplexSequence,
    doppler_bins: usize,
    mode: AmbiguityMode,
) -> Result<AmbiguitySurface> {
    let n = seq.samples.len();
    if n == 0 {
        return Err(Error::Domain("cannot compute the ambiguity of an empty sequence".into()));
    }
    if doppler_bins == 0 {
        return Err(Error::Parameter("doppler_bins must be >= 1".into()));
    }
    let x = &seq.samples;
    let energy: f64 = x.iter().map(|s| s.norm_sqr()).sum();
    if energy <= 0.0 {
        return Err(Error::Domain("sequence has zero energy".into()));
    }

    let dopplers = doppler_axis(doppler_bins);
    let delays: Vec<i64> = match mode {
        AmbiguityMode::Cyclic => (0..n as i64).collect(),
        AmbiguityMode::Linear => (-(n as i64 - 1)..n as i64).collect(),
    };
    // exp(j2πm/N) for m in 0..N; ν·n is reduced modulo N before lookup
    let twiddle: Vec<Complex64> =
        (0..n).map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)).collect();

    let rows: Vec<Vec<f64>> = delays
        .par_iter()
        .map(|&tau| {
            let lag: Vec<(usize, Complex64)> = (0..n)
                .filter_map(|i| {
                    let j = i as i64 - tau;
                    let j = match mode {
                        AmbiguityMode::Cyclic => j.rem_euclid(n as i64) as usize,
                        AmbiguityMode::Linear => {
                            if j < 0 || j >= n as i64 {
                                return None;
                            }
                            j as usize
                        }
                    };
                    Some((i, x[i] * x[j].conj()))
                })
                .collect();
            dopplers
                .iter()
                .map(|&nu| {
                    let nu = nu.rem_euclid(n as i64) as usize;
                    let acc: Complex64 = lag.iter().map(|&(i, p)| p * twiddle[(nu * i) % n]).sum();
                    (acc.norm() / energy).min(1.0)
                })
                .collect()
        })
        .collect();

    let mut surface = AmbiguitySurface {
        magnitudes: rows.into_iter().flatten().collect(),
        delays,
        dopplers,
        mode,
        seq_len: n,
    };
    let (di, vi) = surface.origin();
    let d = surface.doppler_bins();
    surface.magnitudes[di * d + vi] = 1.0;
    Ok(surface)
}

/// Cells with delay distance below `delay_bins` and Doppler distance below
/// `doppler_bins` from the origin are treated as main lobe. `(1, 1)` excludes
/// only the origin cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainlobeExclusion {
    pub delay_bins: usize,
    pub doppler_bins: usize,
}

impl Default for MainlobeExclusion {
    fn default() -> Self {
        Self { delay_bins: 1, doppler_bins: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidelobeMetrics {
    /// Peak side-lobe level relative to the main peak, dB.
    pub psl_db: f64,
    /// Integrated side-lobe energy relative to the squared main peak, dB.
    pub isl_db: f64,
}

pub fn sidelobe_metrics(surface: &AmbiguitySurface, exclusion: MainlobeExclusion) -> Result<SidelobeMetrics> {
    if exclusion.delay_bins == 0 || exclusion.doppler_bins == 0 {
        return Err(Error::Parameter("main-lobe exclusion must cover the origin".into()));
    }
    let mut peak = 0.0f64;
    let mut energy = 0.0f64;
    let mut outside = 0usize;
    for (di, &tau) in surface.delays.iter().enumerate() {
        let in_delay = surface.delay_distance(tau) < exclusion.delay_bins as u64;
        for (vi, &nu) in surface.dopplers.iter().enumerate() {
            if in_delay && nu.unsigned_abs() < exclusion.doppler_bins as u64 {
                continue;
            }
            let m = surface.get(di, vi);
            outside += 1;
            peak = peak.max(m);
            energy += m * m;
        }
    }
    if outside == 0 {
        return Err(Error::Parameter("main-lobe exclusion covers the whole surface".into()));
    }
    let isl_db = if energy > 0.0 { (10.0 * energy.log10()).max(DB_FLOOR) } else { DB_FLOOR };
    Ok(SidelobeMetrics { psl_db: magnitude_db(peak), isl_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    /// Brute-force cyclic autocorrelation, independent of `ambiguity`.
    fn cyclic_autocorr(x: &[Complex64], lag: usize) -> Complex64 {
        let n = x.len();
        (0..n).map(|i| x[i] * x[(i + n - lag) % n].conj()).sum()
    }

    fn idft_direct(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|t| {
                (0..n)
                    .map(|k| x[k] * Complex64::from_polar(1.0, 2.0 * PI * (k * t) as f64 / n as f64))
                    .sum::<Complex64>()
                    / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn zc_length3_root1() {
        let zc = zadoff_chu(3, 1).unwrap();
        let expected =
            [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, -2.0 * PI / 3.0), Complex64::new(1.0, 0.0)];
        for (a, b) in zc.samples.iter().zip(expected) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn zc_rejects_bad_roots() {
        assert!(matches!(zadoff_chu(63, 21), Err(Error::InvalidRoot { .. })));
        assert!(matches!(zadoff_chu(63, 0), Err(Error::InvalidRoot { .. })));
        assert!(matches!(zadoff_chu(63, 63), Err(Error::InvalidRoot { .. })));
        assert!(zadoff_chu(1, 1).is_err());
    }

    #[test]
    fn zc_ideal_cyclic_autocorrelation() {
        for (n, roots) in
            [(31usize, vec![1, 7, 30]), (63, vec![1, 25, 62]), (139, vec![1, 2, 70]), (64, vec![1, 25])]
        {
            for u in roots {
                let zc = zadoff_chu(n, u).unwrap();
                assert!(zc.samples.iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
                for lag in 1..n {
                    let c = cyclic_autocorr(&zc.samples, lag).norm() / n as f64;
                    assert!(c < 1e-10, "N={n} u={u} lag={lag}: {c}");
                }
                let s = ambiguity(&zc, 1, AmbiguityMode::Cyclic).unwrap();
                for di in 1..n {
                    assert!(s.get(di, 0) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zc_has_delay_doppler_ridge() {
        // integer Doppler shifts of a ZC sequence reappear as a full-height cyclic delay
        let zc = zadoff_chu(63, 25).unwrap();
        let s = ambiguity(&zc, 3, AmbiguityMode::Cyclic).unwrap();
        let ridge = (0..s.delay_bins()).filter(|&d| d != 0).map(|d| s.get(d, 2)).fold(0.0f64, f64::max);
        assert!((ridge - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ofdm_shape_and_cp() {
        let a = ofdm_symbol(64, 16, 9).unwrap();
        let b = ofdm_symbol(64, 16, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, ofdm_symbol(64, 16, 10).unwrap());
        assert_eq!(a.len(), 80);
        assert_eq!(&a.samples[..16], &a.samples[64..80]);
        assert!((a.mean_power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ofdm_parameter_errors() {
        assert!(matches!(ofdm_symbol(64, 64, 0), Err(Error::Parameter(_))));
        assert!(matches!(ofdm_symbol(60, 4, 0), Err(Error::Parameter(_))));
        assert!(ofdm_symbol_with(64, 0, Psk { order: 1 }, 0).is_err());
        assert_eq!(ofdm_symbol(64, 0, 0).unwrap().len(), 64);
    }

    #[test]
    fn ofdm_matches_direct_idft_and_parseval() {
        // regenerate the QPSK symbols with the same RNG stream
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let symbols: Vec<Complex64> = (0..64).map(|_| Psk::QPSK.point(rng.random_range(0..4))).collect();
        let body = idft_direct(&symbols);
        let sym_power = symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / 64.0;
        let body_power = body.iter().map(|s| s.norm_sqr()).sum::<f64>() / 64.0;
        assert!((sym_power - 1.0).abs() < 1e-12);
        assert!((body_power - sym_power).abs() < 1e-12);

        let seq = ofdm_symbol(64, 0, 5).unwrap();
        let g = 1.0 / body_power.sqrt();
        for (a, b) in seq.samples.iter().zip(&body) {
            assert!((a - b * g).norm() < 1e-12);
        }
    }

    #[test]
    fn surface_normalization_and_ranges() {
        let seq = ofdm_symbol(64, 16, 1).unwrap();
        for mode in [AmbiguityMode::Cyclic, AmbiguityMode::Linear] {
            let s = ambiguity(&seq, 8, mode).unwrap();
            let (di, vi) = s.origin();
            assert_eq!(s.get(di, vi), 1.0);
            assert!(s.magnitudes.iter().all(|&m| (0.0..=1.0).contains(&m)));
            let max = s.magnitudes.iter().cloned().fold(0.0, f64::max);
            assert_eq!(max, 1.0);
        }
        let lin = ambiguity(&seq, 4, AmbiguityMode::Linear).unwrap();
        assert_eq!(lin.delay_bins(), 2 * 80 - 1);
        assert_eq!(lin.dopplers, vec![-2, -1, 0, 1]);
    }

    #[test]
    fn linear_mode_matches_brute_force() {
        let seq = ofdm_symbol(16, 4, 3).unwrap();
        let x = &seq.samples;
        let n = x.len() as i64;
        let s = ambiguity(&seq, 5, AmbiguityMode::Linear).unwrap();
        let energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        for &tau in &[-7i64, -1, 0, 3, 19] {
            for &nu in &[-2i64, 0, 2] {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let j = i - tau;
                    if (0..n).contains(&j) {
                        let ph = 2.0 * PI * (nu * i) as f64 / n as f64;
                        acc += x[i as usize] * x[j as usize].conj() * Complex64::from_polar(1.0, ph);
                    }
                }
                let got = s.at(tau, nu).unwrap();
                assert!((got - acc.norm() / energy).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_and_zero_bins() {
        assert!(ComplexSequence::new(vec![], "x").is_err());
        let seq = zadoff_chu(7, 1).unwrap();
        assert!(ambiguity(&seq, 0, AmbiguityMode::Cyclic).is_err());
        let empty = ComplexSequence { samples: vec![], label: String::new() };
        assert!(matches!(ambiguity(&empty, 1, AmbiguityMode::Cyclic), Err(Error::Domain(_))));
    }

    #[test]
    fn metrics_on_ideal_surface() {
        let mut magnitudes = vec![0.0; 9 * 3];
        magnitudes[1] = 1.0;
        let s = AmbiguitySurface {
            magnitudes,
            delays: (0..9).collect(),
            dopplers: vec![-1, 0, 1],
            mode: AmbiguityMode::Cyclic,
            seq_len: 9,
        };
        let m = sidelobe_metrics(&s, MainlobeExclusion::default()).unwrap();
        assert_eq!(m.psl_db, DB_FLOOR);
        assert_eq!(m.isl_db, DB_FLOOR);
        let whole = MainlobeExclusion { delay_bins: 5, doppler_bins: 2 };
        assert!(matches!(sidelobe_metrics(&s, whole), Err(Error::Parameter(_))));
        let none = MainlobeExclusion { delay_bins: 0, doppler_bins: 1 };
        assert!(sidelobe_metrics(&s, none).is_err());
    }

    #[test]
    fn zc_versus_ofdm_zero_doppler() {
        let zc = ambiguity(&zadoff_chu(63, 25).unwrap(), 1, AmbiguityMode::Cyclic).unwrap();
        let ofdm = ambiguity(&ofdm_symbol(64, 16, 1).unwrap(), 1, AmbiguityMode::Cyclic).unwrap();
        let mz = sidelobe_metrics(&zc, MainlobeExclusion::default()).unwrap();
        let mo = sidelobe_metrics(&ofdm, MainlobeExclusion::default()).unwrap();
        assert!(mz.psl_db <= -200.0, "{}", mz.psl_db);
        assert!(mo.psl_db > -20.0, "{}", mo.psl_db);
        assert!(mo.psl_db - mz.psl_db >= 20.0);
        assert!(mo.psl_db <= 0.0);
    }

    #[test]
    fn csv_dimensions() {
        let s = ambiguity(&zadoff_chu(64, 25).unwrap(), 16, AmbiguityMode::Cyclic).unwrap();
        let mut buf = Vec::new();
        s.write_csv_db(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 65);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 17));
    }

    proptest! {
        #[test]
        fn phase_rotation_invariance(seed in 0u64..1000, phase in -PI..PI) {
            let seq = ofdm_symbol(16, 4, seed).unwrap();
            let a = ambiguity(&seq, 4, AmbiguityMode::Cyclic).unwrap();
            let b = ambiguity(&seq.clone().rotated(phase), 4, AmbiguityMode::Cyclic).unwrap();
            for (x, y) in a.magnitudes.iter().zip(&b.magnitudes) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn zc_unit_modulus(n in 2usize..200, u in 1usize..200) {
            prop_assume!(u < n && gcd(u, n) == 1);
            let zc = zadoff_chu(n, u).unwrap();
            prop_assert!(zc.samples.iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
        }
    }
}
