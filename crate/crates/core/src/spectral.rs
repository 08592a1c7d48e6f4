//! Fourier tools for periodic grid data: derivatives on the nodes and band-limited
//! interpolation onto finer grids.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse transforms of one length.
pub struct Spectral {
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        Spectral { n, period, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    fn coefficients(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn wavenumber(&self, k: usize) -> f64 {
        let signed = if k <= self.n / 2 { k as f64 } else { k as f64 - self.n as f64 };
        TAU * signed / self.period
    }

    /// First and second derivatives at the nodes. The Nyquist mode of an even grid
    /// contributes to the second derivative only.
    pub fn derivatives(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let coef = self.coefficients(x);
        let mut d1 = coef.clone();
        let mut d2 = coef;
        for k in 0..n {
            let w = self.wavenumber(k);
            d1[k] *= if n % 2 == 0 && k == n / 2 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, w) };
            d2[k] *= -w * w;
        }
        self.inverse.process(&mut d1);
        self.inverse.process(&mut d2);
        let scale = 1.0 / n as f64;
        (d1.iter().map(|z| z.re * scale).collect(), d2.iter().map(|z| z.re * scale).collect())
    }
}

/// Trigonometric interpolant of periodic samples evaluated with its first two
/// derivatives on a grid `factor` times finer.
///
/// The mean is removed before transforming and the Nyquist coefficient is split
/// evenly between `±N/2`, so the interpolant is real. Fourier coefficients smaller
/// than `filter · max|x|` (relative to the sample magnitude) are dropped; `filter` of
/// a few machine epsilons removes pure rounding noise, which would otherwise be
/// amplified by `k²` in the second derivative.
pub fn interpolate(x: &[f64], period: f64, factor: usize, filter: f64) -> Interpolant {
    let n = x.len();
    let m = n * factor;
    let mean = x.iter().sum::<f64>() / n as f64;
    let scale_x = x.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let coarse = Spectral::new(n, period);
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let mut coef = coarse.coefficients(&centered);
    for c in coef.iter_mut() {
        if c.norm() / (n as f64) < filter * scale_x {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let fine = Spectral::new(m, period);
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    for k in 0..n {
        if n % 2 == 0 && k == half {
            y[half] += coef[k] * 0.5;
            y[m - half] += coef[k] * 0.5;
        } else if k < half || (n % 2 == 1 && k == half) {
            y[k] = coef[k];
        } else {
            y[m - (n - k)] = coef[k];
        }
    }
    let mut y1 = y.clone();
    let mut y2 = y.clone();
    for k in 0..m {
        let w = fine.wavenumber(k);
        y1[k] *= Complex64::new(0.0, w);
        y2[k] *= -w * w;
    }
    for buf in [&mut y, &mut y1, &mut y2] {
        fine.inverse.process(buf);
    }
    let s = 1.0 / n as f64;
    let times = (0..m).map(|i| i as f64 * period / m as f64).collect();
    Interpolant {
        times,
        value: y.iter().map(|z| z.re * s + mean).collect(),
        d1: y1.iter().map(|z| z.re * s).collect(),
        d2: y2.iter().map(|z| z.re * s).collect(),
    }
}

pub struct Interpolant {
    pub times: Vec<f64>,
    pub value: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// Periodic trapezoid rule `∫₀ᵀ` of uniform samples.
pub fn trapezoid(values: &[f64], period: f64) -> f64 {
    values.iter().sum::<f64>() * period / values.len() as f64
}
