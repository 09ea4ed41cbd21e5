//! Frequency-domain split of the net load into a smooth generator share and a
//! fluctuating battery share.
//!
//! Transform convention: the forward transform is unnormalized
//! (`X[0] = N·mean`) and the inverse carries the `1/N` factor. Bin `k`
//! corresponds to `min(k, N−k) / (N·dt)` cycles per hour.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};
use crate::profiles::TimeSeries;

/// Imaginary residue (relative to the real sup-norm) above which an inverse
/// transform is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub coefficients: Vec<Complex64>,
    pub dt_hours: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn nyquist(&self) -> f64 {
        nyquist(self.dt_hours)
    }

    /// Frequency of bin `k` in cycles per hour (mirror bins map to the same value).
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.len();
        k.min(n - k) as f64 / (n as f64 * self.dt_hours)
    }

    /// `Σ |X_k|²`.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

pub fn nyquist(dt_hours: f64) -> f64 {
    1.0 / (2.0 * dt_hours)
}

/// Highest bin index (counted from DC) kept on the low side for cut-off `fc`.
/// The cut-off snaps down to the nearest bin boundary; `|f| ≤ fc` is inclusive.
pub fn cutoff_bin(fc: f64, n: usize, dt_hours: f64) -> Result<usize> {
    let ny = nyquist(dt_hours);
    if !(fc.is_finite() && (0.0..=ny * (1.0 + 1e-12)).contains(&fc)) {
        return Err(domain(format!(
            "cut-off {fc} outside [0, {ny}] cycles/hour"
        )));
    }
    let k = (fc * n as f64 * dt_hours + 1e-9).floor() as usize;
    Ok(k.min(n / 2))
}

fn planner_forward(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

fn planner_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_inverse(n)
}

pub fn forward_transform(ts: &TimeSeries) -> Result<Spectrum> {
    if ts.len() < 2 {
        return Err(Error::Shape(
            "spectral analysis needs at least two samples".into(),
        ));
    }
    let mut buf: Vec<Complex64> = ts
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    planner_forward(buf.len()).process(&mut buf);
    Ok(Spectrum {
        coefficients: buf,
        dt_hours: ts.dt_hours(),
    })
}

fn inverse_with(plan: &dyn Fft<f64>, mut buf: Vec<Complex64>, dt_hours: f64) -> Result<TimeSeries> {
    let n = buf.len();
    plan.process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut re_max = 0.0f64;
    let mut im_max = 0.0f64;
    for c in &buf {
        re_max = re_max.max(c.re.abs());
        im_max = im_max.max(c.im.abs());
    }
    let relative = if re_max > 0.0 {
        im_max / re_max
    } else if im_max * scale > f64::MIN_POSITIVE {
        f64::INFINITY
    } else {
        0.0
    };
    if relative > SYMMETRY_TOLERANCE {
        return Err(Error::Symmetry(relative));
    }
    let values = buf.iter().map(|c| c.re * scale).collect();
    Ok(TimeSeries::from_parts_unchecked(values, dt_hours))
}

/// Real series from a conjugate-symmetric spectrum.
pub fn inverse_transform(spec: &Spectrum) -> Result<TimeSeries> {
    if spec.len() < 2 {
        return Err(Error::Shape("spectrum needs at least two bins".into()));
    }
    inverse_with(
        planner_inverse(spec.len()).as_ref(),
        spec.coefficients.clone(),
        spec.dt_hours,
    )
}

fn split_at_bin(spec: &Spectrum, kc: usize) -> (Spectrum, Spectrum) {
    let n = spec.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut low = Vec::with_capacity(n);
    let mut high = Vec::with_capacity(n);
    for (k, &c) in spec.coefficients.iter().enumerate() {
        if k.min(n - k) <= kc {
            low.push(c);
            high.push(zero);
        } else {
            low.push(zero);
            high.push(c);
        }
    }
    let wrap = |coefficients| Spectrum {
        coefficients,
        dt_hours: spec.dt_hours,
    };
    (wrap(low), wrap(high))
}

/// Partitions `spec` into the bins at or below `fc` (with DC and mirrors) and the rest.
pub fn lowpass_split(spec: &Spectrum, fc: f64) -> Result<(Spectrum, Spectrum)> {
    let kc = cutoff_bin(fc, spec.len(), spec.dt_hours)?;
    Ok(split_at_bin(spec, kc))
}

/// Generator share: low-pass reconstruction of the net load, clamped at zero.
pub fn generator_share(net: &TimeSeries, fc: f64) -> Result<TimeSeries> {
    SpectralSplitter::new(net)?.generator_share(fc)
}

/// Battery share `net − gen`; negative values mean charging.
pub fn bess_share(net: &TimeSeries, gen: &TimeSeries) -> Result<TimeSeries> {
    net.check_same_shape(gen)?;
    let values = net
        .values()
        .iter()
        .zip(gen.values())
        .map(|(n, g)| n - g)
        .collect();
    Ok(TimeSeries::from_parts_unchecked(values, net.dt_hours()))
}

/// Caches the forward spectrum and inverse plan of one net-load profile so
/// repeated splits at different cut-offs only pay for one inverse transform.
pub struct SpectralSplitter {
    net: TimeSeries,
    spectrum: Spectrum,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralSplitter {
    pub fn new(net: &TimeSeries) -> Result<Self> {
        let spectrum = forward_transform(net)?;
        let inverse = planner_inverse(net.len());
        Ok(Self {
            net: net.clone(),
            spectrum,
            inverse,
        })
    }

    pub fn net(&self) -> &TimeSeries {
        &self.net
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn nyquist(&self) -> f64 {
        self.spectrum.nyquist()
    }

    pub fn cutoff_bin(&self, fc: f64) -> Result<usize> {
        cutoff_bin(fc, self.spectrum.len(), self.spectrum.dt_hours)
    }

    /// Generator share for the cut-off bin `kc`.
    pub fn generator_share_at_bin(&self, kc: usize) -> Result<TimeSeries> {
        let (low, _) = split_at_bin(&self.spectrum, kc);
        let smooth = inverse_with(self.inverse.as_ref(), low.coefficients, low.dt_hours)?;
        let clamped = smooth
            .into_values()
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        Ok(TimeSeries::from_parts_unchecked(
            clamped,
            self.net.dt_hours(),
        ))
    }

    pub fn generator_share(&self, fc: f64) -> Result<TimeSeries> {
        self.generator_share_at_bin(self.cutoff_bin(fc)?)
    }

    /// `(generator, battery)` shares at `fc`.
    pub fn split(&self, fc: f64) -> Result<(TimeSeries, TimeSeries)> {
        let gen = self.generator_share(fc)?;
        let bess = bess_share(&self.net, &gen)?;
        Ok((gen, bess))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Direct O(N²) DFT, independent of the FFT path.
    fn dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (t, &v)| {
                        let ang = -2.0 * PI * (k * t) as f64 / n as f64;
                        acc + Complex64::new(v * ang.cos(), v * ang.sin())
                    })
            })
            .collect()
    }

    fn series(values: Vec<f64>) -> TimeSeries {
        TimeSeries::hourly(values).unwrap()
    }

    #[test]
    fn constant_is_dc_only() {
        let spec = forward_transform(&series(vec![2.5; 8])).unwrap();
        assert!((spec.coefficients[0].re - 20.0).abs() < 1e-12);
        assert!(spec.coefficients[0].im.abs() < 1e-12);
        for c in &spec.coefficients[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn cosine_occupies_bins_one_and_seven() {
        let x: Vec<f64> = (0..8).map(|t| (2.0 * PI * t as f64 / 8.0).cos()).collect();
        let spec = forward_transform(&series(x.clone())).unwrap();
        let oracle = dft(&x);
        for (k, (c, o)) in spec.coefficients.iter().zip(&oracle).enumerate() {
            assert!((c - o).norm() < 1e-12);
            if k == 1 || k == 7 {
                assert!((c.re - 4.0).abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_direct_summation() {
        let x: Vec<f64> = (0..50)
            .map(|t| ((t * 37 % 11) as f64).sin() + 0.1 * t as f64)
            .collect();
        let spec = forward_transform(&series(x.clone())).unwrap();
        for (c, o) in spec.coefficients.iter().zip(dft(&x)) {
            assert!((c - o).norm() < 1e-9);
        }
    }

    #[test]
    fn inverse_basics() {
        let zero = Spectrum {
            coefficients: vec![Complex64::new(0.0, 0.0); 8],
            dt_hours: 1.0,
        };
        assert!(inverse_transform(&zero)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let mut dc = zero.clone();
        dc.coefficients[0] = Complex64::new(8.0 * 1.5, 0.0);
        for v in inverse_transform(&dc).unwrap().values() {
            assert!((v - 1.5).abs() < 1e-12);
        }
        let mut asym = zero;
        asym.coefficients[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(inverse_transform(&asym), Err(Error::Symmetry(_))));
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            forward_transform(&series(vec![1.0])),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn split_extremes() {
        let x: Vec<f64> = (0..24).map(|t| 1.0 + (t as f64 * 0.7).sin()).collect();
        let spec = forward_transform(&series(x)).unwrap();
        let (low, high) = lowpass_split(&spec, 0.5).unwrap();
        assert_eq!(low, spec);
        assert!(high.coefficients.iter().all(|c| c.norm() == 0.0));
        let (low, high) = lowpass_split(&spec, 0.0).unwrap();
        assert_eq!(low.coefficients[0], spec.coefficients[0]);
        assert!(low.coefficients[1..].iter().all(|c| c.norm() == 0.0));
        assert_eq!(high.coefficients[0].norm(), 0.0);
        assert!(lowpass_split(&spec, 0.51).is_err());
        assert!(lowpass_split(&spec, -0.1).is_err());
    }

    #[test]
    fn diurnal_and_weekly_bins_below_daily_cutoff() {
        let n = 24 * 7 * 2;
        let x: Vec<f64> = (0..n)
            .map(|t| {
                let t = t as f64;
                (2.0 * PI * t / 24.0).cos() + 0.5 * (2.0 * PI * t / 168.0).sin()
            })
            .collect();
        let spec = forward_transform(&series(x)).unwrap();
        let (low, high) = lowpass_split(&spec, 1.0 / 24.0).unwrap();
        let diurnal = n / 24;
        let weekly = n / 168;
        for k in [diurnal, weekly, n - diurnal, n - weekly] {
            assert!(low.coefficients[k].norm() > 1.0);
            assert!(high.coefficients[k].norm() == 0.0);
        }
        assert!(high.energy() < 1e-18);
    }

    #[test]
    fn generator_share_cases() {
        let x: Vec<f64> = (0..48).map(|t| 2.0 + (t as f64 * 0.3).sin()).collect();
        let net = series(x.clone());
        let gen = generator_share(&net, 0.5).unwrap();
        for (g, n) in gen.values().iter().zip(&x) {
            assert!((g - n).abs() < 1e-9);
        }
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        for g in generator_share(&net, 0.0).unwrap().values() {
            assert!((g - mean).abs() < 1e-12);
        }

        let wave: Vec<f64> = (0..48)
            .map(|t| (2.0 * PI * t as f64 / 12.0).sin())
            .collect();
        let gen = generator_share(&series(wave.clone()), 0.5).unwrap();
        for (g, w) in gen.values().iter().zip(&wave) {
            assert!((g - w.max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn bess_share_cases() {
        let net = series(vec![2.0, -1.0, 3.0]);
        let gen = series(vec![2.0, 0.0, 3.0]);
        let b = bess_share(&net, &gen).unwrap();
        assert_eq!(b.values(), &[0.0, -1.0, 0.0]);
        assert!(bess_share(&net, &net)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        assert!(bess_share(&net, &series(vec![1.0])).is_err());
    }

    proptest! {
        #[test]
        fn share_identity_and_nonnegativity(
            x in proptest::collection::vec(-3.0f64..5.0, 2..200),
            frac in 0.0f64..=1.0,
        ) {
            let net = series(x);
            let splitter = SpectralSplitter::new(&net).unwrap();
            let fc = frac * splitter.nyquist();
            let (gen, bess) = splitter.split(fc).unwrap();
            for ((g, b), n) in gen.values().iter().zip(bess.values()).zip(net.values()) {
                prop_assert!(*g >= 0.0);
                prop_assert!((g + b - n).abs() < 1e-9);
            }
        }

        #[test]
        fn split_is_exact_partition_and_monotone(
            x in proptest::collection::vec(-3.0f64..5.0, 2..120),
            f1 in 0.0f64..=0.5,
            f2 in 0.0f64..=0.5,
        ) {
            let spec = forward_transform(&series(x)).unwrap();
            let (lo, hi) = (f1.min(f2), f1.max(f2));
            let (low_a, high_a) = lowpass_split(&spec, lo).unwrap();
            let (low_b, _) = lowpass_split(&spec, hi).unwrap();
            for ((l, h), s) in low_a.coefficients.iter().zip(&high_a.coefficients).zip(&spec.coefficients) {
                prop_assert_eq!(l + h, *s);
            }
            let total = spec.energy();
            prop_assert!((low_a.energy() + high_a.energy() - total).abs() <= 1e-9 * total.max(1e-300));
            prop_assert!(low_b.energy() >= low_a.energy());
        }

        #[test]
        fn keep_all_leaves_nothing_for_battery(x in proptest::collection::vec(0.0f64..5.0, 2..150)) {
            let net = series(x);
            let (_, bess) = SpectralSplitter::new(&net).unwrap().split(0.5).unwrap();
            prop_assert!(bess.values().iter().all(|b| b.abs() < 1e-9));
        }
    }
}
