//! Replacement stochastic models for load, PV and wind output.
//!
//! All models run on an hourly grid starting at 00:00 on 1 January of a
//! 365-day year.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal, Weibull};
use serde::{Deserialize, Serialize};

use super::series::TimeSeries;
use crate::error::{domain, Result};
use crate::rng;

pub const HOURS_PER_DAY: usize = 24;
pub const DAYS_PER_YEAR: usize = 365;
pub const HOURS_PER_YEAR: usize = HOURS_PER_DAY * DAYS_PER_YEAR;

/// Day of year (0-based) at which the seasonal load term peaks (mid July).
pub const LOAD_SEASONAL_PEAK_DAY: f64 = 196.0;
/// Hour of day at which the diurnal load term peaks.
pub const LOAD_DIURNAL_PEAK_HOUR: f64 = 17.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Load,
    Pv,
    Wind,
}

impl SignalKind {
    pub(crate) fn channel(self) -> u64 {
        match self {
            SignalKind::Load => rng::CHANNEL_LOAD,
            SignalKind::Pv => rng::CHANNEL_PV,
            SignalKind::Wind => rng::CHANNEL_WIND,
        }
    }
}

/// A stochastic hourly profile model with a known expectation path.
pub trait StochasticProfile {
    fn kind(&self) -> SignalKind;

    fn validate(&self) -> Result<()>;

    /// Fills `out` with one realization, hour 0 first.
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);

    /// Fills `out` with the noise-free expectation path.
    fn expected_into(&self, out: &mut [f64]);
}

fn check_hours(n_hours: usize) -> Result<()> {
    if n_hours == 0 {
        return Err(domain("n_hours must be at least 1"));
    }
    Ok(())
}

/// One seeded realization of `model` over `n_hours` hourly samples.
pub fn synthesize<M: StochasticProfile>(
    model: &M,
    n_hours: usize,
    seed: u64,
) -> Result<TimeSeries> {
    model.validate()?;
    check_hours(n_hours)?;
    let mut values = vec![0.0; n_hours];
    let mut stream = rng::stream(seed, 0, model.kind().channel());
    model.sample_into(&mut stream, &mut values);
    Ok(TimeSeries::from_parts_unchecked(values, 1.0))
}

/// The forecast path used for sizing.
pub fn expected_profile<M: StochasticProfile>(model: &M, n_hours: usize) -> Result<TimeSeries> {
    model.validate()?;
    check_hours(n_hours)?;
    let mut values = vec![0.0; n_hours];
    model.expected_into(&mut values);
    Ok(TimeSeries::from_parts_unchecked(values, 1.0))
}

/// Seasonal plus diurnal load with multiplicative AR(1) noise.
///
/// `load(t) = max(0, peak·(base + seasonal·cos(season) + diurnal·cos(day))·(1 + e_t))`
/// where `e_t` is a stationary AR(1) process with marginal std `ar1_sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadModel {
    pub peak_mw: f64,
    pub base_fraction: f64,
    pub diurnal_amp: f64,
    pub seasonal_amp: f64,
    pub ar1_phi: f64,
    pub ar1_sigma: f64,
}

impl Default for LoadModel {
    fn default() -> Self {
        Self {
            peak_mw: 4.0,
            base_fraction: 0.7,
            diurnal_amp: 0.15,
            seasonal_amp: 0.15,
            ar1_phi: 0.9,
            ar1_sigma: 0.05,
        }
    }
}

impl LoadModel {
    fn shape(&self, hour: usize) -> f64 {
        let day = ((hour / HOURS_PER_DAY) % DAYS_PER_YEAR) as f64;
        let hod = (hour % HOURS_PER_DAY) as f64;
        let seasonal = (2.0 * PI * (day - LOAD_SEASONAL_PEAK_DAY) / DAYS_PER_YEAR as f64).cos();
        let diurnal = (2.0 * PI * (hod - LOAD_DIURNAL_PEAK_HOUR) / HOURS_PER_DAY as f64).cos();
        self.base_fraction + self.seasonal_amp * seasonal + self.diurnal_amp * diurnal
    }
}

impl StochasticProfile for LoadModel {
    fn kind(&self) -> SignalKind {
        SignalKind::Load
    }

    fn validate(&self) -> Result<()> {
        let finite = [
            self.peak_mw,
            self.base_fraction,
            self.diurnal_amp,
            self.seasonal_amp,
            self.ar1_phi,
            self.ar1_sigma,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(domain("load model parameters must be finite"));
        }
        if self.peak_mw <= 0.0 {
            return Err(domain(format!(
                "load peak_mw must be positive, got {}",
                self.peak_mw
            )));
        }
        if !(0.0..=1.0).contains(&self.base_fraction) {
            return Err(domain(format!(
                "load base_fraction must lie in [0, 1], got {}",
                self.base_fraction
            )));
        }
        if self.ar1_phi.abs() >= 1.0 {
            return Err(domain(format!(
                "|ar1_phi| must be < 1, got {}",
                self.ar1_phi
            )));
        }
        if self.ar1_sigma < 0.0 {
            return Err(domain(format!(
                "ar1_sigma must be >= 0, got {}",
                self.ar1_sigma
            )));
        }
        Ok(())
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let innovation = self.ar1_sigma * (1.0 - self.ar1_phi * self.ar1_phi).sqrt();
        let mut noise = 0.0;
        for (t, slot) in out.iter_mut().enumerate() {
            if self.ar1_sigma > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                noise = if t == 0 {
                    self.ar1_sigma * z
                } else {
                    self.ar1_phi * noise + innovation * z
                };
            }
            *slot = (self.peak_mw * self.shape(t) * (1.0 + noise)).max(0.0);
        }
    }

    fn expected_into(&self, out: &mut [f64]) {
        for (t, slot) in out.iter_mut().enumerate() {
            *slot = (self.peak_mw * self.shape(t)).max(0.0);
        }
    }
}

/// Clear-sky diurnal shape attenuated by a per-day Beta-distributed cloud factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvModel {
    pub capacity_mw: f64,
    /// 24 per-hour fractions of capacity under clear sky.
    pub clearsky_shape: Vec<f64>,
    pub cloud_alpha: f64,
    pub cloud_beta: f64,
}

impl Default for PvModel {
    fn default() -> Self {
        Self {
            capacity_mw: 3.0,
            clearsky_shape: default_clearsky_shape(),
            cloud_alpha: 2.0,
            cloud_beta: 2.0,
        }
    }
}

/// Half-sine between 06:00 and 18:00, zero at night.
pub fn default_clearsky_shape() -> Vec<f64> {
    (0..HOURS_PER_DAY)
        .map(|h| {
            let x = (h as f64 - 6.0) / 12.0;
            if (0.0..=1.0).contains(&x) {
                // Rounded so the shipped config stays readable.
                ((PI * x).sin() * 1e4).round() / 1e4
            } else {
                0.0
            }
        })
        .collect()
}

impl PvModel {
    pub fn mean_attenuation(&self) -> f64 {
        self.cloud_alpha / (self.cloud_alpha + self.cloud_beta)
    }

    /// Output for given per-day attenuation factors (cycled when shorter than
    /// the number of days covered by `out`).
    pub fn fill_with_attenuation(&self, attenuation: impl Fn(usize) -> f64, out: &mut [f64]) {
        for (t, slot) in out.iter_mut().enumerate() {
            let day = t / HOURS_PER_DAY;
            let a = attenuation(day).clamp(0.0, 1.0);
            *slot = self.capacity_mw * self.clearsky_shape[t % HOURS_PER_DAY] * a;
        }
    }
}

impl StochasticProfile for PvModel {
    fn kind(&self) -> SignalKind {
        SignalKind::Pv
    }

    fn validate(&self) -> Result<()> {
        if !(self.capacity_mw.is_finite() && self.capacity_mw >= 0.0) {
            return Err(domain(format!(
                "pv capacity_mw must be >= 0, got {}",
                self.capacity_mw
            )));
        }
        if self.clearsky_shape.len() != HOURS_PER_DAY {
            return Err(domain(format!(
                "pv clearsky_shape needs {HOURS_PER_DAY} entries, got {}",
                self.clearsky_shape.len()
            )));
        }
        if self.clearsky_shape.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(domain("pv clearsky_shape entries must lie in [0, 1]"));
        }
        if !(self.cloud_alpha > 0.0 && self.cloud_beta > 0.0)
            || !self.cloud_alpha.is_finite()
            || !self.cloud_beta.is_finite()
        {
            return Err(domain("pv cloud_alpha and cloud_beta must be positive"));
        }
        Ok(())
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let beta = Beta::new(self.cloud_alpha, self.cloud_beta).expect("validated beta parameters");
        let days = out.len().div_ceil(HOURS_PER_DAY);
        let factors: Vec<f64> = (0..days).map(|_| beta.sample(rng)).collect();
        self.fill_with_attenuation(|d| factors[d], out);
    }

    fn expected_into(&self, out: &mut [f64]) {
        let mean = self.mean_attenuation();
        self.fill_with_attenuation(|_| mean, out);
    }
}

/// Weibull hourly wind speed through a piecewise-linear power curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WtModel {
    pub capacity_mw: f64,
    pub weibull_k: f64,
    pub weibull_c: f64,
    pub cut_in: f64,
    pub rated: f64,
    pub cut_out: f64,
}

impl Default for WtModel {
    fn default() -> Self {
        Self {
            capacity_mw: 1.0,
            weibull_k: 2.0,
            weibull_c: 7.0,
            cut_in: 3.0,
            rated: 12.0,
            cut_out: 25.0,
        }
    }
}

impl WtModel {
    /// Turbine output in MW at hub-height speed `v` (m/s).
    pub fn power_at(&self, v: f64) -> f64 {
        if v < self.cut_in || v >= self.cut_out {
            0.0
        } else if v >= self.rated {
            self.capacity_mw
        } else {
            self.capacity_mw * (v - self.cut_in) / (self.rated - self.cut_in)
        }
    }

    fn survival(&self, v: f64) -> f64 {
        (-(v / self.weibull_c).powf(self.weibull_k)).exp()
    }

    /// Expected output in MW, `E[P(V)]` for Weibull `V`.
    ///
    /// Integrating the ramp by parts leaves `∫ S(v) dv` over `[cut_in, rated]`,
    /// evaluated with composite Simpson.
    pub fn expected_power(&self) -> f64 {
        const INTERVALS: usize = 4096;
        let (a, b) = (self.cut_in, self.rated);
        let h = (b - a) / INTERVALS as f64;
        let mut acc = self.survival(a) + self.survival(b);
        for i in 1..INTERVALS {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.survival(a + i as f64 * h);
        }
        let integral = acc * h / 3.0;
        let ramp = (integral - (b - a) * self.survival(b)) / (b - a);
        let flat = self.survival(b) - self.survival(self.cut_out);
        self.capacity_mw * (ramp + flat)
    }
}

impl StochasticProfile for WtModel {
    fn kind(&self) -> SignalKind {
        SignalKind::Wind
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.capacity_mw,
            self.weibull_k,
            self.weibull_c,
            self.cut_in,
            self.rated,
            self.cut_out,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(domain("wind model parameters must be finite"));
        }
        if self.capacity_mw < 0.0 {
            return Err(domain(format!(
                "wind capacity_mw must be >= 0, got {}",
                self.capacity_mw
            )));
        }
        if self.weibull_k <= 0.0 || self.weibull_c <= 0.0 {
            return Err(domain("weibull_k and weibull_c must be positive"));
        }
        if !(0.0 < self.cut_in && self.cut_in < self.rated && self.rated < self.cut_out) {
            return Err(domain(format!(
                "need 0 < cut_in < rated < cut_out, got {} / {} / {}",
                self.cut_in, self.rated, self.cut_out
            )));
        }
        Ok(())
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let speed = Weibull::new(self.weibull_c, self.weibull_k).expect("validated weibull");
        for slot in out.iter_mut() {
            *slot = self.power_at(speed.sample(rng));
        }
    }

    fn expected_into(&self, out: &mut [f64]) {
        out.fill(self.expected_power());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_load_is_constant_peak() {
        let m = LoadModel {
            peak_mw: 3.5,
            base_fraction: 1.0,
            diurnal_amp: 0.0,
            seasonal_amp: 0.0,
            ar1_phi: 0.5,
            ar1_sigma: 0.0,
        };
        let ts = synthesize(&m, 100, 42).unwrap();
        assert!(ts.values().iter().all(|&v| v == 3.5));
        assert_eq!(ts.dt_hours(), 1.0);
    }

    #[test]
    fn noise_free_load_matches_expectation_for_any_seed() {
        let m = LoadModel {
            ar1_sigma: 0.0,
            ..LoadModel::default()
        };
        let expected = expected_profile(&m, 500).unwrap();
        for seed in [0, 1, 99] {
            assert_eq!(synthesize(&m, 500, seed).unwrap(), expected);
        }
    }

    #[test]
    fn pv_with_unit_attenuation_is_clearsky() {
        let m = PvModel::default();
        let mut out = vec![0.0; 72];
        m.fill_with_attenuation(|_| 1.0, &mut out);
        for (t, v) in out.iter().enumerate() {
            assert_eq!(*v, m.capacity_mw * m.clearsky_shape[t % 24]);
        }
    }

    #[test]
    fn pv_expectation_scales_by_mean_attenuation() {
        let m = PvModel {
            cloud_alpha: 3.0,
            cloud_beta: 3.0,
            ..PvModel::default()
        };
        let ts = expected_profile(&m, 48).unwrap();
        for (t, v) in ts.values().iter().enumerate() {
            assert!((v - 0.5 * m.capacity_mw * m.clearsky_shape[t % 24]).abs() < 1e-15);
        }
    }

    #[test]
    fn calm_wind_gives_zero_output() {
        let m = WtModel {
            weibull_c: 0.3,
            weibull_k: 2.0,
            ..WtModel::default()
        };
        // Oracle: P(V >= cut_in) = exp(-(3/0.3)^2) = exp(-100); direct draws never reach it.
        let speed = Weibull::new(m.weibull_c, m.weibull_k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!((0..100_000).all(|_| speed.sample(&mut rng) < m.cut_in));
        let ts = synthesize(&m, 8760, 3).unwrap();
        assert!(ts.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wind_expectation_matches_monte_carlo() {
        let m = WtModel::default();
        let speed = Weibull::new(m.weibull_c, m.weibull_k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| m.power_at(speed.sample(&mut rng))).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let expected = m.expected_power();
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "mc {mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn power_curve_regions() {
        let m = WtModel::default();
        assert_eq!(m.power_at(2.9), 0.0);
        assert_eq!(m.power_at(7.5), 0.5);
        assert_eq!(m.power_at(12.0), 1.0);
        assert_eq!(m.power_at(24.9), 1.0);
        assert_eq!(m.power_at(25.0), 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad_load = LoadModel {
            ar1_phi: 1.0,
            ..LoadModel::default()
        };
        assert!(synthesize(&bad_load, 10, 0).is_err());
        let bad_pv = PvModel {
            cloud_beta: 0.0,
            ..PvModel::default()
        };
        assert!(expected_profile(&bad_pv, 10).is_err());
        let bad_wt = WtModel {
            rated: 2.0,
            ..WtModel::default()
        };
        assert!(synthesize(&bad_wt, 10, 0).is_err());
        assert!(synthesize(&LoadModel::default(), 0, 0).is_err());
    }
}
