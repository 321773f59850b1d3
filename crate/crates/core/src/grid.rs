//! Time/frequency grids and input pulse envelopes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fourier;
use crate::units;

/// sech FWHM = 2·acosh(√2)·T₀.
pub const SECH_FWHM_FACTOR: f64 = 1.762_747_174_039_086;
/// Gaussian intensity FWHM = 2·√(ln 2)·T₀.
pub const GAUSS_FWHM_FACTOR: f64 = 1.665_109_222_315_395;

/// Uniform time grid with its conjugate detuning axis.
///
/// Time samples sit at `t_j = (j − N/2)·dt`; detunings `ω_k` are in the usual
/// FFT wrap-around order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    time_window: f64,
    carrier_wavelength: f64,
}

impl Grid {
    pub fn new(n_points: usize, time_window_ps: f64, carrier_wavelength_nm: f64) -> Result<Self> {
        if n_points < 64 || !n_points.is_power_of_two() {
            return Err(Error::config(format!(
                "n_points must be a power of two >= 64 (got {n_points})"
            )));
        }
        if !(time_window_ps > 0.0 && time_window_ps.is_finite()) {
            return Err(Error::config(format!(
                "time window must be positive (got {time_window_ps} ps)"
            )));
        }
        if !(carrier_wavelength_nm > 0.0 && carrier_wavelength_nm.is_finite()) {
            return Err(Error::config(format!(
                "carrier wavelength must be positive (got {carrier_wavelength_nm} nm)"
            )));
        }
        let grid = Grid {
            n_points,
            time_window: time_window_ps,
            carrier_wavelength: carrier_wavelength_nm,
        };
        if grid.nyquist() >= grid.carrier_omega() {
            return Err(Error::config(format!(
                "Nyquist detuning {:.1} rad/ps reaches zero absolute frequency; use a longer dt",
                grid.nyquist()
            )));
        }
        Ok(grid)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Time window in ps.
    pub fn time_window(&self) -> f64 {
        self.time_window
    }

    pub fn carrier_wavelength(&self) -> f64 {
        self.carrier_wavelength
    }

    /// Sample spacing in ps.
    pub fn dt(&self) -> f64 {
        self.time_window / self.n_points as f64
    }

    /// Detuning spacing in rad/ps.
    pub fn d_omega(&self) -> f64 {
        2.0 * PI / self.time_window
    }

    /// Largest representable detuning magnitude, π/dt.
    pub fn nyquist(&self) -> f64 {
        PI / self.dt()
    }

    /// Absolute angular frequency of the carrier in rad/ps.
    pub fn carrier_omega(&self) -> f64 {
        units::angular_frequency(self.carrier_wavelength)
    }

    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.time(j)).collect()
    }

    /// Detuning of FFT bin `k`.
    pub fn omega(&self, k: usize) -> f64 {
        let n = self.n_points as isize;
        let k = k as isize;
        let m = if k < n / 2 { k } else { k - n };
        m as f64 * self.d_omega()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.omega(k)).collect()
    }

    pub fn absolute_omega(&self, k: usize) -> f64 {
        self.carrier_omega() + self.omega(k)
    }

    pub fn wavelength(&self, k: usize) -> f64 {
        units::wavelength_from_angular(self.absolute_omega(k))
    }

    /// FFT bin indices sorted by increasing wavelength (decreasing frequency).
    pub fn ascending_wavelength_order(&self) -> Vec<usize> {
        let half = self.n_points / 2;
        (0..half).rev().chain((half..self.n_points).rev()).collect()
    }

    /// FFT bin whose detuning is closest to `omega`.
    pub fn nearest_bin(&self, omega: f64) -> usize {
        let m = (omega / self.d_omega()).round() as isize;
        m.rem_euclid(self.n_points as isize) as usize
    }

    /// Wavelength span (shortest, longest) in nm covered by the grid.
    pub fn wavelength_span(&self) -> (f64, f64) {
        let w0 = self.carrier_omega();
        (
            units::wavelength_from_angular(w0 + self.nyquist()),
            units::wavelength_from_angular(w0 - self.nyquist()),
        )
    }

    /// Whether a wavelength maps strictly inside the Nyquist band.
    pub fn contains_wavelength(&self, lambda_nm: f64) -> bool {
        lambda_nm > 0.0
            && units::wavelength_to_detuning(lambda_nm, self.carrier_wavelength).abs()
                < self.nyquist()
    }

    pub fn fourier(&self) -> Fourier {
        Fourier::new(self.n_points)
    }
}

/// Complex envelope samples in √W on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl Envelope {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::contract(format!(
                "envelope has {} samples, grid has {}",
                samples.len(),
                grid.n_points()
            )));
        }
        Ok(Envelope { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        Envelope {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Pulse energy `Σ|A|²·dt` in pJ.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    pub fn peak_power(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max)
    }

    /// Spectral amplitudes `Ã_k` in FFT order, units √W·ps.
    pub fn spectrum_amplitudes(&self) -> Vec<Complex64> {
        let mut buf = self.samples.clone();
        self.grid.fourier().to_spectrum(&mut buf, self.grid.dt());
        buf
    }

    pub fn from_spectrum(grid: Grid, mut spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.n_points() {
            return Err(Error::contract("spectrum length does not match grid"));
        }
        grid.fourier().to_time(&mut spectrum, grid.dt());
        Envelope::new(grid, spectrum)
    }

    /// Energy computed on the frequency side, `Σ|Ã|² dω/2π`.
    pub fn spectral_energy(&self) -> f64 {
        let d = self.grid.d_omega() / (2.0 * PI);
        self.spectrum_amplitudes()
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            * d
    }

    /// Shifts the pulse later in time by `delay_ps` (spectral phase ramp).
    pub fn delayed(&self, delay_ps: f64) -> Self {
        let mut spec = self.spectrum_amplitudes();
        for (k, a) in spec.iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, self.grid.omega(k) * delay_ps);
        }
        Envelope::from_spectrum(self.grid, spec).expect("same grid")
    }
}

fn carrier_offset(grid: &Grid, center_wavelength_nm: f64) -> Result<f64> {
    if !grid.contains_wavelength(center_wavelength_nm) {
        let (lo, hi) = grid.wavelength_span();
        return Err(Error::domain(format!(
            "center wavelength {center_wavelength_nm} nm lies outside the grid's Nyquist band \
             ({lo:.1}-{hi:.1} nm)"
        )));
    }
    Ok(units::wavelength_to_detuning(
        center_wavelength_nm,
        grid.carrier_wavelength(),
    ))
}

fn check_pulse_args(energy_pj: f64, fwhm_fs: f64) -> Result<()> {
    if !(energy_pj >= 0.0 && energy_pj.is_finite()) {
        return Err(Error::domain(format!("pulse energy must be >= 0 (got {energy_pj} pJ)")));
    }
    if !(fwhm_fs > 0.0 && fwhm_fs.is_finite()) {
        return Err(Error::domain(format!("pulse FWHM must be > 0 (got {fwhm_fs} fs)")));
    }
    Ok(())
}

/// Transform-limited sech pulse, `√P₀·sech(t/T₀)·exp(−iΩ_c t)`, centered at t = 0.
pub fn sech_pulse(
    grid: &Grid,
    energy_pj: f64,
    fwhm_fs: f64,
    center_wavelength_nm: f64,
) -> Result<Envelope> {
    check_pulse_args(energy_pj, fwhm_fs)?;
    let offset = carrier_offset(grid, center_wavelength_nm)?;
    let t0 = fwhm_fs * 1e-3 / SECH_FWHM_FACTOR;
    let p0 = energy_pj / (2.0 * t0);
    let samples = (0..grid.n_points())
        .map(|j| {
            let t = grid.time(j);
            Complex64::from_polar(p0.sqrt() / (t / t0).cosh(), -offset * t)
        })
        .collect();
    Envelope::new(*grid, samples)
}

/// Transform-limited Gaussian pulse with intensity FWHM `fwhm_fs`, centered at t = 0.
pub fn gaussian_pulse(
    grid: &Grid,
    energy_pj: f64,
    fwhm_fs: f64,
    center_wavelength_nm: f64,
) -> Result<Envelope> {
    check_pulse_args(energy_pj, fwhm_fs)?;
    let offset = carrier_offset(grid, center_wavelength_nm)?;
    let t0 = fwhm_fs * 1e-3 / GAUSS_FWHM_FACTOR;
    let p0 = energy_pj / (PI.sqrt() * t0);
    let samples = (0..grid.n_points())
        .map(|j| {
            let t = grid.time(j);
            Complex64::from_polar(p0.sqrt() * (-0.5 * (t / t0).powi(2)).exp(), -offset * t)
        })
        .collect();
    Envelope::new(*grid, samples)
}

/// Peak power of a sech pulse of the given energy and FWHM, in W.
pub fn sech_peak_power(energy_pj: f64, fwhm_fs: f64) -> f64 {
    let t0 = fwhm_fs * 1e-3 / SECH_FWHM_FACTOR;
    energy_pj / (2.0 * t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arithmetic() {
        let g = Grid::new(256, 4.0, 810.0).unwrap();
        assert!((g.dt() - 0.015625).abs() < 1e-15);
        // dω = 2π/T = π/2 for a 4 ps window
        assert!((g.d_omega() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((g.dt() * g.n_points() as f64 - g.time_window()).abs() < 1e-15);

        let g = Grid::new(64, 1.0, 810.0).unwrap();
        assert!((g.nyquist() - 201.06).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(Grid::new(100, 4.0, 810.0), Err(Error::Config(_))));
        assert!(matches!(Grid::new(32, 4.0, 810.0), Err(Error::Config(_))));
        assert!(Grid::new(256, 0.0, 810.0).is_err());
        assert!(Grid::new(256, 4.0, -1.0).is_err());
    }

    #[test]
    fn default_grid_covers_measurement_band() {
        let g = Grid::new(1 << 13, 20.0, 810.0).unwrap();
        for lambda in [650.0, 1000.0] {
            let w = units::wavelength_to_detuning(lambda, 810.0).abs();
            assert!(w < g.nyquist(), "{lambda} nm at {w} rad/ps");
        }
        let (lo, hi) = g.wavelength_span();
        assert!(lo < 650.0 && hi > 1000.0);
    }

    #[test]
    fn detuning_axis_is_fft_ordered() {
        let g = Grid::new(64, 1.0, 810.0).unwrap();
        assert_eq!(g.omega(0), 0.0);
        assert!(g.omega(31) > 0.0);
        assert!((g.omega(32) + g.nyquist()).abs() < 1e-9);
        let order = g.ascending_wavelength_order();
        for w in order.windows(2) {
            assert!(g.wavelength(w[0]) < g.wavelength(w[1]));
        }
        assert_eq!(g.nearest_bin(g.omega(40)), 40);
    }

    #[test]
    fn sech_energy_and_peak() {
        let g = Grid::new(1 << 11, 4.0, 810.0).unwrap();
        let e = sech_pulse(&g, 118.0, 38.0, 810.0).unwrap();
        assert!((e.energy() - 118.0).abs() / 118.0 < 1e-6);
        // P0 = E/(2T0)
        assert!((e.peak_power() - 2737.0).abs() < 5.0, "{}", e.peak_power());
        assert!((sech_peak_power(118.0, 38.0) - 2.74e3).abs() < 10.0);
        let mid = e.samples()[g.n_points() / 2];
        assert!(mid.im.abs() < 1e-12 && mid.re > 0.0);
    }

    #[test]
    fn zero_energy_pulse_is_zero() {
        let g = Grid::new(64, 1.0, 810.0).unwrap();
        let e = sech_pulse(&g, 0.0, 38.0, 810.0).unwrap();
        assert!(e.samples().iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn center_outside_band_is_domain_error() {
        let g = Grid::new(256, 4.0, 810.0).unwrap();
        assert!(matches!(sech_pulse(&g, 1.0, 38.0, 400.0), Err(Error::Domain(_))));
    }

    #[test]
    fn delay_moves_the_peak() {
        let g = Grid::new(256, 4.0, 810.0).unwrap();
        let e = sech_pulse(&g, 10.0, 100.0, 810.0).unwrap().delayed(0.5);
        let peak = (0..256)
            .max_by(|&a, &b| e.samples()[a].norm().total_cmp(&e.samples()[b].norm()))
            .unwrap();
        assert!((g.time(peak) - 0.5).abs() < g.dt());
        assert!((e.energy() - 10.0).abs() < 1e-9);
    }
}
