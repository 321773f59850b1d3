//! Fiber description: Taylor dispersion to fifth order, Kerr coefficient, Raman split.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::raman::{RamanKernel, RamanModel, DEFAULT_TAU1_FS, DEFAULT_TAU2_FS};
use crate::units;

/// Highest Taylor order kept in the dispersion expansion.
pub const MAX_DISPERSION_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    /// Fiber length in m.
    pub length_m: f64,
    /// Nonlinear coefficient in 1/(W·m).
    pub gamma: f64,
    /// β₂, β₃, β₄, β₅ at the carrier, in ps^n/m. Missing orders are zero.
    pub beta: Vec<f64>,
    pub raman_fraction: f64,
    pub raman_model: RamanModel,
    #[serde(default = "default_tau1")]
    pub raman_tau1_fs: f64,
    #[serde(default = "default_tau2")]
    pub raman_tau2_fs: f64,
    pub self_steepening: bool,
}

fn default_tau1() -> f64 {
    DEFAULT_TAU1_FS
}

fn default_tau2() -> f64 {
    DEFAULT_TAU2_FS
}

impl FiberSpec {
    /// Kerr-only fiber with quadratic dispersion.
    pub fn kerr(length_m: f64, gamma: f64, beta2: f64) -> Self {
        FiberSpec {
            length_m,
            gamma,
            beta: vec![beta2],
            raman_fraction: 0.0,
            raman_model: RamanModel::None,
            raman_tau1_fs: DEFAULT_TAU1_FS,
            raman_tau2_fs: DEFAULT_TAU2_FS,
            self_steepening: false,
        }
    }

    pub fn with_length(mut self, length_m: f64) -> Self {
        self.length_m = length_m;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_raman(mut self, model: RamanModel, fraction: f64) -> Self {
        self.raman_model = model;
        self.raman_fraction = if model == RamanModel::None { 0.0 } else { fraction };
        self
    }

    pub fn with_self_steepening(mut self, on: bool) -> Self {
        self.self_steepening = on;
        self
    }

    /// Lists every violated constraint; empty when the spec is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.length_m >= 0.0 && self.length_m.is_finite()) {
            v.push(format!("fiber length must be >= 0 (got {} m)", self.length_m));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            v.push(format!("gamma must be >= 0 (got {})", self.gamma));
        }
        if self.beta.len() > MAX_DISPERSION_ORDER - 1 {
            v.push(format!(
                "at most {} dispersion coefficients (beta2..beta5) are supported (got {})",
                MAX_DISPERSION_ORDER - 1,
                self.beta.len()
            ));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            v.push("dispersion coefficients must be finite".into());
        }
        if !(0.0..1.0).contains(&self.raman_fraction) {
            v.push(format!("raman fraction must lie in [0, 1) (got {})", self.raman_fraction));
        }
        if self.raman_model == RamanModel::None && self.raman_fraction != 0.0 {
            v.push("raman fraction must be 0 when the Raman model is `none`".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }

    /// β_n for n in 2..=5.
    pub fn beta_n(&self, n: usize) -> f64 {
        self.beta.get(n.wrapping_sub(2)).copied().unwrap_or(0.0)
    }

    /// Propagation constant relative to the carrier frame, `Σ β_n Ω^n/n!`.
    pub fn dispersion_operator(&self, omega: f64) -> f64 {
        let mut term = omega; // Ω^n/n!, starting at n = 1
        let mut acc = 0.0;
        for n in 2..=MAX_DISPERSION_ORDER {
            term *= omega / n as f64;
            acc += self.beta_n(n) * term;
        }
        acc
    }

    /// Group-velocity dispersion `d²β/dω²` at detuning `omega`, ps²/m.
    pub fn beta2_at(&self, omega: f64) -> f64 {
        let mut term = 1.0;
        let mut acc = 0.0;
        for n in 2..=MAX_DISPERSION_ORDER {
            acc += self.beta_n(n) * term;
            term *= omega / (n - 1) as f64;
        }
        acc
    }

    /// Inverse group velocity relative to the carrier frame, `dβ/dω − β₁`, ps/m.
    pub fn group_delay_at(&self, omega: f64) -> f64 {
        let mut term = omega;
        let mut acc = 0.0;
        for n in 2..=MAX_DISPERSION_ORDER {
            acc += self.beta_n(n) * term;
            term *= omega / n as f64;
        }
        acc
    }

    pub fn beta2_at_wavelength(&self, lambda_nm: f64, carrier_nm: f64) -> f64 {
        self.beta2_at(units::wavelength_to_detuning(lambda_nm, carrier_nm))
    }

    pub fn raman_kernel(&self, grid: &Grid) -> Result<Option<RamanKernel>> {
        if self.raman_model == RamanModel::None || self.raman_fraction == 0.0 {
            return Ok(None);
        }
        RamanKernel::with_times(
            self.raman_model,
            self.raman_fraction,
            grid,
            self.raman_tau1_fs,
            self.raman_tau2_fs,
        )
        .map(Some)
    }

    /// Soliton order `N² = γP₀T₀²/|β₂(λ)|` for a sech pulse of the given peak power and T₀.
    pub fn soliton_number(&self, peak_power_w: f64, t0_ps: f64, omega: f64) -> f64 {
        (self.gamma * peak_power_w * t0_ps * t0_ps / self.beta2_at(omega).abs()).sqrt()
    }
}

/// Per-bin linear-step multiplier `exp(i·dz·Σ β_n ω_k^n/n!)`.
pub fn dispersion_phase(spec: &FiberSpec, grid: &Grid, dz: f64) -> Vec<Complex64> {
    (0..grid.n_points())
        .map(|k| Complex64::from_polar(1.0, dz * spec.dispersion_operator(grid.omega(k))))
        .collect()
}

/// Inputs for the extrapolated microstructure-fiber dispersion curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfConfig {
    pub length_m: f64,
    pub gamma: f64,
    pub carrier_nm: f64,
    pub zero_gvd_nm: f64,
    /// GVD slope β₃ at the carrier, ps³/m.
    pub beta3: f64,
    pub beta4: f64,
    pub beta5: f64,
    pub raman_fraction: f64,
    pub raman_model: RamanModel,
    pub self_steepening: bool,
}

impl Default for MfConfig {
    fn default() -> Self {
        MfConfig {
            length_m: 0.30,
            gamma: 0.095,
            carrier_nm: 810.0,
            zero_gvd_nm: 820.0,
            beta3: 3.0e-4,
            beta4: 0.0,
            beta5: 0.0,
            raman_fraction: 0.18,
            raman_model: RamanModel::SingleOscillator,
            self_steepening: true,
        }
    }
}

/// Builds the fiber spec whose GVD vanishes at `zero_gvd_nm`.
pub fn make_mf_spec(config: &MfConfig) -> Result<FiberSpec> {
    if !(600.0..=1100.0).contains(&config.zero_gvd_nm) {
        return Err(Error::config(format!(
            "zero-GVD wavelength must lie in 600-1100 nm (got {} nm)",
            config.zero_gvd_nm
        )));
    }
    if !(config.carrier_nm > 0.0) {
        return Err(Error::config("carrier wavelength must be positive"));
    }
    let oz = units::wavelength_to_detuning(config.zero_gvd_nm, config.carrier_nm);
    let beta2 = -(config.beta3 * oz + config.beta4 * oz * oz / 2.0 + config.beta5 * oz.powi(3) / 6.0);
    let spec = FiberSpec {
        length_m: config.length_m,
        gamma: config.gamma,
        beta: vec![beta2, config.beta3, config.beta4, config.beta5],
        raman_fraction: if config.raman_model == RamanModel::None {
            0.0
        } else {
            config.raman_fraction
        },
        raman_model: config.raman_model,
        raman_tau1_fs: DEFAULT_TAU1_FS,
        raman_tau2_fs: DEFAULT_TAU2_FS,
        self_steepening: config.self_steepening,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dispersion_is_identity() {
        let g = Grid::new(64, 1.0, 810.0).unwrap();
        let spec = FiberSpec::kerr(1.0, 0.0, 0.0);
        assert!(dispersion_phase(&spec, &g, 0.1)
            .iter()
            .all(|m| (m - Complex64::new(1.0, 0.0)).norm() == 0.0));
    }

    #[test]
    fn multipliers_are_unit_modulus() {
        let g = Grid::new(256, 2.0, 810.0).unwrap();
        let spec = make_mf_spec(&MfConfig::default()).unwrap();
        for m in dispersion_phase(&spec, &g, 0.01) {
            assert!((m.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_series_terms() {
        let spec = FiberSpec {
            beta: vec![2.0, 6.0, 24.0, 120.0],
            ..FiberSpec::kerr(1.0, 0.0, 0.0)
        };
        // Σ β_n x^n / n! with β_n = n! → x² + x³ + x⁴ + x⁵
        let x: f64 = 0.5;
        assert!((spec.dispersion_operator(x) - (x.powi(2) + x.powi(3) + x.powi(4) + x.powi(5))).abs() < 1e-14);
        // d²/dx² of the same: 2 + 6x + 12x² + 20x³
        assert!((spec.beta2_at(x) - (2.0 + 6.0 * x + 12.0 * x * x + 20.0 * x.powi(3))).abs() < 1e-12);
        // d/dx: 2x + 3x² + 4x³ + 5x⁴
        assert!((spec.group_delay_at(x) - (2.0 * x + 3.0 * x * x + 4.0 * x.powi(3) + 5.0 * x.powi(4))).abs() < 1e-12);
    }

    #[test]
    fn zero_gvd_sits_where_configured() {
        let spec = make_mf_spec(&MfConfig::default()).unwrap();
        assert!(spec.beta2_at_wavelength(820.0, 810.0).abs() < 1e-15);
        assert!(spec.beta_n(2) > 0.0, "normal at the carrier");
        assert!(spec.beta2_at_wavelength(915.0, 810.0) < 0.0, "anomalous at the Raman peak");

        let at_carrier = make_mf_spec(&MfConfig {
            carrier_nm: 820.0,
            ..MfConfig::default()
        })
        .unwrap();
        assert_eq!(at_carrier.beta_n(2), 0.0);
    }

    #[test]
    fn single_sign_change_without_higher_orders() {
        let spec = make_mf_spec(&MfConfig {
            beta4: 0.0,
            beta5: 0.0,
            ..MfConfig::default()
        })
        .unwrap();
        let mut changes = Vec::new();
        let mut prev = spec.beta2_at_wavelength(700.0, 810.0).signum();
        let mut lambda = 700.0;
        while lambda <= 1000.0 {
            let s = spec.beta2_at_wavelength(lambda, 810.0).signum();
            if s != prev {
                changes.push(lambda);
            }
            prev = s;
            lambda += 0.25;
        }
        assert_eq!(changes.len(), 1);
        assert!((changes[0] - 820.0).abs() <= 0.25);
    }

    #[test]
    fn rejects_out_of_range_zero_gvd() {
        let err = make_mf_spec(&MfConfig {
            zero_gvd_nm: 1200.0,
            ..MfConfig::default()
        });
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn spec_violations_are_listed() {
        let bad = FiberSpec {
            length_m: -1.0,
            gamma: -0.1,
            beta: vec![0.0; 5],
            raman_fraction: 1.5,
            ..FiberSpec::kerr(1.0, 0.0, 0.0)
        };
        assert!(bad.violations().len() >= 4);
    }
}
