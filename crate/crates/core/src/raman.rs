//! Delayed Raman response of fused silica.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Which Raman response function to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RamanModel {
    None,
    /// Damped single oscillator, `h(t) ∝ exp(−t/τ₂)·sin(t/τ₁)`.
    #[default]
    SingleOscillator,
    /// Intermediate-broadening sum over the 13 vibrational modes of silica.
    MultiMode,
}

/// Default single-oscillator constants in fs.
pub const DEFAULT_TAU1_FS: f64 = 12.2;
pub const DEFAULT_TAU2_FS: f64 = 32.0;

/// Vibrational modes of fused silica: position [cm⁻¹], peak amplitude,
/// Gaussian FWHM [cm⁻¹], Lorentzian FWHM [cm⁻¹].
const SILICA_MODES: [(f64, f64, f64, f64); 13] = [
    (56.25, 1.00, 52.10, 17.37),
    (100.00, 11.40, 110.42, 38.81),
    (231.25, 36.67, 175.00, 58.33),
    (362.50, 67.67, 162.50, 54.17),
    (463.00, 74.00, 135.33, 45.11),
    (497.00, 4.50, 24.50, 8.17),
    (611.50, 6.80, 41.50, 13.83),
    (691.67, 4.60, 155.00, 51.67),
    (793.67, 4.20, 59.50, 19.83),
    (835.50, 4.50, 64.30, 21.43),
    (930.00, 2.70, 150.00, 50.00),
    (1080.00, 3.10, 91.00, 30.33),
    (1215.00, 3.00, 160.00, 53.33),
];

/// Speed of light in cm/ps, for wavenumber conversions.
const C_CM_PER_PS: f64 = 0.029_979_245_8;

/// Unnormalized single-oscillator response at `t` (ps).
pub fn single_oscillator_response(t: f64, tau1_ps: f64, tau2_ps: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    (tau1_ps * tau1_ps + tau2_ps * tau2_ps) / (tau1_ps * tau2_ps * tau2_ps)
        * (-t / tau2_ps).exp()
        * (t / tau1_ps).sin()
}

/// Unnormalized multi-mode response at `t` (ps).
pub fn multi_mode_response(t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    SILICA_MODES
        .iter()
        .map(|&(pos, amp, gauss, lorentz)| {
            let omega_v = 2.0 * std::f64::consts::PI * C_CM_PER_PS * pos;
            let gamma = std::f64::consts::PI * C_CM_PER_PS * lorentz;
            let big_gamma = std::f64::consts::PI * C_CM_PER_PS * gauss;
            amp / omega_v
                * (-gamma * t).exp()
                * (-0.25 * big_gamma * big_gamma * t * t).exp()
                * (omega_v * t).sin()
        })
        .sum()
}

/// Highest vibrational angular frequency of the multi-mode model, rad/ps.
fn multi_mode_max_omega() -> f64 {
    2.0 * std::f64::consts::PI * C_CM_PER_PS * SILICA_MODES[12].0
}

/// Raman response sampled on a grid's lag axis plus its transfer function.
#[derive(Debug, Clone)]
pub struct RamanKernel {
    model: RamanModel,
    fraction: f64,
    dt: f64,
    /// `h(n·dt)` for lag index n, zero on the negative-lag half.
    samples: Vec<f64>,
    /// `h̃(ω_k) = ∫ h(t) exp(iω_k t) dt`, FFT order.
    transfer: Vec<Complex64>,
}

impl RamanKernel {
    /// Builds the kernel with the default single-oscillator time constants.
    pub fn new(model: RamanModel, fraction: f64, grid: &Grid) -> Result<Self> {
        Self::with_times(model, fraction, grid, DEFAULT_TAU1_FS, DEFAULT_TAU2_FS)
    }

    pub fn with_times(
        model: RamanModel,
        fraction: f64,
        grid: &Grid,
        tau1_fs: f64,
        tau2_fs: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::config(format!(
                "Raman fraction must lie in [0, 1) (got {fraction})"
            )));
        }
        let dt = grid.dt();
        let tau1 = tau1_fs * 1e-3;
        let tau2 = tau2_fs * 1e-3;
        let response: Box<dyn Fn(f64) -> f64> = match model {
            RamanModel::None => {
                return Err(Error::config("no Raman kernel for model `none`"));
            }
            RamanModel::SingleOscillator => {
                if !(tau1 > 0.0 && tau2 > 0.0) {
                    return Err(Error::config("Raman time constants must be positive"));
                }
                if dt > tau1 / 2.0 {
                    return Err(Error::config(format!(
                        "grid too coarse for the Raman kernel: dt = {:.2} fs exceeds tau1/2 = {:.2} fs",
                        dt * 1e3,
                        tau1_fs / 2.0
                    )));
                }
                Box::new(move |t| single_oscillator_response(t, tau1, tau2))
            }
            RamanModel::MultiMode => {
                if grid.nyquist() < 1.5 * multi_mode_max_omega() {
                    return Err(Error::config(format!(
                        "grid too coarse for the multi-mode Raman kernel: dt = {:.2} fs, need <= {:.2} fs",
                        dt * 1e3,
                        std::f64::consts::PI / (1.5 * multi_mode_max_omega()) * 1e3
                    )));
                }
                Box::new(multi_mode_response)
            }
        };

        let n = grid.n_points();
        let mut samples: Vec<f64> = (0..n)
            .map(|i| if i < n / 2 { response(i as f64 * dt) } else { 0.0 })
            .collect();
        let integral: f64 = samples.iter().sum::<f64>() * dt;
        if !(integral.is_finite() && integral > 0.0) {
            return Err(Error::config("Raman response does not integrate to a positive value"));
        }
        for s in samples.iter_mut() {
            *s /= integral;
        }

        let mut transfer: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        grid.fourier().to_spectrum(&mut transfer, dt);

        Ok(RamanKernel {
            model,
            fraction,
            dt,
            samples,
            transfer,
        })
    }

    pub fn model(&self) -> RamanModel {
        self.model
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    /// Kernel value at lag index `n` (ps⁻¹).
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn transfer(&self) -> &[Complex64] {
        &self.transfer
    }

    /// `dt · Σ h`, equal to one by construction.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.dt
    }

    /// Value at time `t` in ps, zero for negative times.
    pub fn value_at_time(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let idx = (t / self.dt).round() as usize;
        if idx < self.samples.len() / 2 {
            self.samples[idx]
        } else {
            0.0
        }
    }

    /// Raman gain shape `Im h̃(ω_k)`, FFT order.
    pub fn gain_spectrum(&self) -> Vec<f64> {
        self.transfer.iter().map(|h| h.im).collect()
    }
}
