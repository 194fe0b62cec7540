//! Scalar summaries of simulated waveforms.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

/// Fraction of the run, counted from the end, used by the noise metric.
pub const ANALYSIS_WINDOW: f64 = 0.6;
/// Harmonics removed together with the fundamental.
pub const EXTRA_HARMONICS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMetric {
    /// Amplitude of the least-squares fundamental.
    pub amplitude: f64,
    /// RMS of the residual after removing offset, fundamental and harmonics.
    pub noise_rms: f64,
}

impl NoiseMetric {
    pub fn ratio(&self) -> f64 {
        if self.amplitude > 0.0 {
            self.noise_rms / self.amplitude
        } else {
            f64::INFINITY
        }
    }
}

fn window(n: usize) -> usize {
    n - ((n as f64) * ANALYSIS_WINDOW).round() as usize
}

/// Fits offset, fundamental at `f` and its first harmonics over the final
/// part of the run and reports the residual.
pub fn noise_metric(times: &[f64], y: &[f64], f: f64) -> NoiseMetric {
    assert_eq!(times.len(), y.len());
    let start = window(y.len());
    let (t, y) = (&times[start..], &y[start..]);
    let n = t.len();
    let cols = 1 + 2 * (1 + EXTRA_HARMONICS);
    if n < cols {
        return NoiseMetric {
            amplitude: 0.0,
            noise_rms: 0.0,
        };
    }
    let a = DMatrix::from_fn(n, cols, |i, j| {
        if j == 0 {
            return 1.0;
        }
        let k = ((j + 1) / 2) as f64;
        let w = 2.0 * PI * f * k * t[i];
        if j % 2 == 1 {
            w.sin()
        } else {
            w.cos()
        }
    });
    let b = DVector::from_column_slice(y);
    // the harmonic columns are well separated, so plain QR is enough
    let qr = a.clone().qr();
    let coef = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * &b))
        .expect("harmonic design matrix has full column rank");
    let resid = &b - &a * &coef;
    NoiseMetric {
        amplitude: coef[1].hypot(coef[2]),
        noise_rms: resid.norm() / (n as f64).sqrt(),
    }
}

pub fn rms(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt()
}

/// RMS of `a − b` over the final analysis window.
pub fn difference_rms(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let start = window(n);
    let d: Vec<f64> = a[start..n]
        .iter()
        .zip(&b[start..n])
        .map(|(x, y)| x - y)
        .collect();
    rms(&d)
}

/// `RMS(a − b) / RMS(b)` over the whole common length.
pub fn relative_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let d: Vec<f64> = a[..n].iter().zip(&b[..n]).map(|(x, y)| x - y).collect();
    rms(&d) / rms(&b[..n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_harmonics_have_no_noise() {
        let t: Vec<f64> = (0..2000).map(|k| k as f64 * 1e-5).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|t| {
                0.3 + 2.0 * (2.0 * PI * 50.0 * t + 0.4).sin() + 0.1 * (2.0 * PI * 150.0 * t).cos()
            })
            .collect();
        let m = noise_metric(&t, &y, 50.0);
        assert!((m.amplitude - 2.0).abs() < 1e-10);
        assert!(m.noise_rms < 1e-10);
    }

    #[test]
    fn alternating_noise_is_measured() {
        let t: Vec<f64> = (0..1000).map(|k| k as f64 * 1e-5).collect();
        let y: Vec<f64> = (0..1000)
            .map(|k| (2.0 * PI * 50.0 * t[k]).sin() + if k % 2 == 0 { 1e-3 } else { -1e-3 })
            .collect();
        let m = noise_metric(&t, &y, 50.0);
        assert!((m.noise_rms - 1e-3).abs() < 1e-5, "{m:?}");
    }

    #[test]
    fn discrepancy_of_identical_traces() {
        assert_eq!(relative_discrepancy(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(rms(&[]), 0.0);
    }
}
