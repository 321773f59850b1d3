//! Raman reservoir noise.
//!
//! The delayed response couples the field to a bath of silica phonons. The
//! linearized Raman term alone shrinks commutators on the Stokes side, and a
//! real phase noise `δA += i·S[m·ξ]` restores them. `ξ` is stationary with
//! spectral density proportional to `|Im h̃(Ω)|` times the thermal factor
//! `(n_th + 1) + n_th`: one Stokes and one anti-Stokes sideband.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::GnlseModel;
use crate::quantum::basis::PhotonBasis;
use crate::raman::RamanKernel;
use crate::units::{bose_occupation, HBAR_PJ_PS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseOptions {
    pub raman_noise: bool,
    pub temperature_k: f64,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        NoiseOptions {
            raman_noise: true,
            temperature_k: 300.0,
        }
    }
}

impl NoiseOptions {
    pub fn off() -> Self {
        NoiseOptions {
            raman_noise: false,
            ..Self::default()
        }
    }

    pub fn at(temperature_k: f64) -> Self {
        NoiseOptions {
            raman_noise: true,
            temperature_k,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        if self.temperature_k.is_finite() && self.temperature_k >= 0.0 {
            Vec::new()
        } else {
            vec![format!(
                "temperature must be finite and >= 0 K (got {})",
                self.temperature_k
            )]
        }
    }
}

/// Reservoir weight of one sideband at detuning `omega`: `n_th + 1` on the
/// Stokes (red, negative detuning) side, `n_th` on the anti-Stokes side.
pub fn sideband_weight(omega: f64, kelvin: f64) -> f64 {
    let n = bose_occupation(omega, kelvin);
    if omega < 0.0 {
        n + 1.0
    } else {
        n
    }
}

/// Per-metre eigenvalues (FFT order) of the covariance of the sampled noise
/// `ξ_j`: `γ f_R (ħω₀/dt) |Im h̃(ω_k)| (w(ω_k) + w(−ω_k))`. Multiply by the step
/// length to get one step's injection.
pub fn raman_noise_eigenvalues(kernel: &RamanKernel, gamma: f64, grid: &Grid, kelvin: f64) -> Vec<f64> {
    let pref = gamma * kernel.fraction() * HBAR_PJ_PS * grid.carrier_omega() / grid.dt();
    kernel
        .transfer()
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let w = grid.omega(k);
            pref * h.im.abs() * (sideband_weight(w, kelvin) + sideband_weight(-w, kelvin))
        })
        .collect()
}

/// Added-noise covariance accumulated from Raman injection, in the output
/// quadratures `δa = x + i·y`, ordered `(x₀…x_{N−1}, y₀…y_{N−1})`.
#[derive(Debug, Clone)]
pub struct NoiseLedger {
    covariance: DMatrix<f64>,
    temperature_k: f64,
    enabled: bool,
}

impl NoiseLedger {
    pub fn new(n_modes: usize, options: NoiseOptions) -> Self {
        NoiseLedger {
            covariance: DMatrix::zeros(2 * n_modes, 2 * n_modes),
            temperature_k: options.temperature_k,
            enabled: options.raman_noise,
        }
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn n_modes(&self) -> usize {
        self.covariance.nrows() / 2
    }

    pub fn trace(&self) -> f64 {
        self.covariance.trace()
    }

    pub fn is_zero(&self) -> bool {
        self.covariance.iter().all(|&x| x == 0.0)
    }

    /// Applies a real-linear map `δa ↦ T δa` on both sides: `L ← T L Tᵀ`.
    pub(crate) fn transform<F>(&mut self, map: F)
    where
        F: Fn(&mut Vec<Complex64>) + Sync,
    {
        if self.is_zero() {
            return;
        }
        let once = |m: &DMatrix<f64>| -> DMatrix<f64> {
            let n = m.nrows() / 2;
            let cols: Vec<Vec<f64>> = (0..m.ncols())
                .into_par_iter()
                .map(|j| {
                    let col = m.column(j);
                    let mut v: Vec<Complex64> =
                        (0..n).map(|k| Complex64::new(col[k], col[n + k])).collect();
                    map(&mut v);
                    v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)).collect()
                })
                .collect();
            DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| cols[j][i])
        };
        let half = once(&self.covariance);
        let full = once(&half.transpose());
        self.covariance = (&full + full.transpose()) * 0.5;
    }

    /// Per-mode phase rotation `δa_k ↦ p_k δa_k`.
    pub(crate) fn rotate(&mut self, phase: &[Complex64]) {
        if self.is_zero() {
            return;
        }
        let n = self.n_modes();
        let mut r = DMatrix::zeros(2 * n, 2 * n);
        for (k, p) in phase.iter().enumerate() {
            r[(k, k)] = p.re;
            r[(k, n + k)] = -p.im;
            r[(n + k, k)] = p.im;
            r[(n + k, n + k)] = p.re;
        }
        let c = &r * &self.covariance * r.transpose();
        self.covariance = (&c + c.transpose()) * 0.5;
    }

    pub(crate) fn add(&mut self, delta: &DMatrix<f64>) {
        self.covariance += delta;
    }
}

/// Adds one step's Raman injection `δA += i·S[m·ξ]`, with `ξ` drawn from the
/// thermal reservoir, to a ledger held in photon quadratures at the injection
/// point. `local_field` is the classical field the noise multiplies.
pub fn raman_noise_step(
    ledger: &mut NoiseLedger,
    model: &GnlseModel,
    basis: &PhotonBasis,
    local_field: &[Complex64],
    dz: f64,
) -> Result<()> {
    if !ledger.enabled {
        return Ok(());
    }
    if !(ledger.temperature_k >= 0.0) {
        return Err(Error::domain("Raman noise needs a non-negative temperature"));
    }
    if local_field.len() != ledger.n_modes() {
        return Err(Error::contract("local field and ledger have different sizes"));
    }
    let Some(kernel) = model.raman() else {
        return Ok(());
    };
    let grid = model.grid();
    let n = grid.n_points();
    let root: Vec<f64> = raman_noise_eigenvalues(kernel, model.gamma(), grid, ledger.temperature_k)
        .iter()
        .map(|l| (l * dz).sqrt())
        .collect();
    let fourier = model.fourier();
    // Columns of the injected square root: quadratures of i·S[m·(Q^{1/2} e_l)].
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|l| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[l] = Complex64::new(1.0, 0.0);
            fourier.filter_time_real(&mut e, &root);
            let xi: Vec<f64> = e.iter().map(|c| c.re).collect();
            let da = basis.to_photon(&model.noise_forward(local_field, &xi));
            da.iter().map(|c| c.re).chain(da.iter().map(|c| c.im)).collect()
        })
        .collect();
    let r = DMatrix::from_fn(2 * n, n, |i, j| cols[j][i]);
    ledger.add(&(&r * r.transpose()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::FiberSpec;
    use crate::raman::RamanModel;
    use std::f64::consts::PI;

    #[test]
    fn sideband_weights() {
        let w = 2.0 * PI * 13.2;
        assert_eq!(sideband_weight(w, 0.0), 0.0);
        assert_eq!(sideband_weight(-w, 0.0), 1.0);
        let n = bose_occupation(w, 300.0);
        assert!((sideband_weight(-w, 300.0) - sideband_weight(w, 300.0) - 1.0).abs() < 1e-15);
        assert!((n - 0.1376).abs() < 1e-3);
    }

    #[test]
    fn eigenvalues_are_even_and_zero_without_raman_gain_at_dc() {
        let grid = Grid::new(256, 1.0, 810.0).unwrap();
        let k = RamanKernel::new(RamanModel::SingleOscillator, 0.18, &grid).unwrap();
        let lam = raman_noise_eigenvalues(&k, 0.1, &grid, 300.0);
        assert!(lam[0].abs() < 1e-12 * lam.iter().cloned().fold(0.0, f64::max));
        for j in 1..128 {
            assert!((lam[j] - lam[256 - j]).abs() <= 1e-9 * lam[1..].iter().cloned().fold(0.0, f64::max));
            assert!(lam[j] >= 0.0);
        }
        // thermal noise only adds
        let cold = raman_noise_eigenvalues(&k, 0.1, &grid, 0.0);
        assert!(lam.iter().zip(&cold).all(|(a, b)| a >= b));
    }

    #[test]
    fn no_raman_leaves_ledger_unchanged() {
        let grid = Grid::new(64, 0.35, 810.0).unwrap();
        let model = GnlseModel::new(&FiberSpec::kerr(0.01, 0.1, -0.02), &grid).unwrap();
        let basis = PhotonBasis::new(&grid);
        let mut ledger = NoiseLedger::new(64, NoiseOptions::default());
        let field = vec![Complex64::new(10.0, 0.0); 64];
        raman_noise_step(&mut ledger, &model, &basis, &field, 1e-3).unwrap();
        assert!(ledger.is_zero());
    }

    #[test]
    fn injection_is_symmetric_psd() {
        let grid = Grid::new(64, 0.35, 810.0).unwrap();
        let spec = FiberSpec::kerr(0.01, 0.1, -0.02).with_raman(RamanModel::SingleOscillator, 0.18);
        let model = GnlseModel::new(&spec, &grid).unwrap();
        let basis = PhotonBasis::new(&grid);
        let mut ledger = NoiseLedger::new(64, NoiseOptions::default());
        let field = crate::grid::sech_pulse(&grid, 10.0, 50.0, 810.0).unwrap().into_samples();
        raman_noise_step(&mut ledger, &model, &basis, &field, 1e-3).unwrap();
        let c = ledger.covariance();
        assert!((c - c.transpose()).amax() < 1e-12 * c.amax());
        let eig = c.clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() > -1e-10 * c.amax());
        assert!(ledger.trace() > 0.0);

        let mut off = NoiseLedger::new(64, NoiseOptions::off());
        raman_noise_step(&mut off, &model, &basis, &field, 1e-3).unwrap();
        assert!(off.is_zero());
    }
}
