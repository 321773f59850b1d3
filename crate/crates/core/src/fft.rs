use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Time ↔ frequency transform pair for a fixed grid size.
///
/// Spectrum convention: `Ã_k = dt · Σ_j A_j exp(+i ω_k t_j)`, so that
/// `A(t) = ∫ Ã(ω) exp(−i ω t) dω/2π` and Parseval reads
/// `Σ|A|² dt = Σ|Ã|² dω/2π`.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fourier {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Raw sum `Σ_j x_j exp(+2πi jk/N)` in place.
    pub fn raw_plus(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    /// Raw sum `Σ_j x_j exp(−2πi jk/N)` in place.
    pub fn raw_minus(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Time samples to spectrum, in place.
    pub fn to_spectrum(&self, buf: &mut [Complex64], dt: f64) {
        self.raw_plus(buf);
        for x in buf.iter_mut() {
            *x *= dt;
        }
    }

    /// Spectrum to time samples, in place.
    pub fn to_time(&self, buf: &mut [Complex64], dt: f64) {
        self.raw_minus(buf);
        let scale = 1.0 / (self.n as f64 * dt);
        for x in buf.iter_mut() {
            *x *= scale;
        }
    }

    /// Applies a diagonal spectral multiplier to time-domain samples.
    pub fn filter_time(&self, buf: &mut [Complex64], multiplier: &[Complex64]) {
        self.raw_plus(buf);
        let scale = 1.0 / self.n as f64;
        for (x, m) in buf.iter_mut().zip(multiplier) {
            *x *= m * scale;
        }
        self.raw_minus(buf);
    }

    /// Same as [`Fourier::filter_time`] with a real multiplier.
    pub fn filter_time_real(&self, buf: &mut [Complex64], multiplier: &[f64]) {
        self.raw_plus(buf);
        let scale = 1.0 / self.n as f64;
        for (x, m) in buf.iter_mut().zip(multiplier) {
            *x *= m * scale;
        }
        self.raw_minus(buf);
    }
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}
