//! Fast end-to-end checks on 64-point grids, each able to run with a
//! deliberate defect injected to show it can fail.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::fiber::FiberSpec;
use crate::grid::{sech_pulse, Grid, SECH_FWHM_FACTOR};
use crate::measurement::{fano_factor, FilterKind, SpectralFilter};
use crate::model::Fault;
use crate::propagate::{propagate, SolverOptions};
use crate::quantum::{backprop_variance, linearized_propagate, photon_number_covariance, NoiseOptions};
use crate::raman::RamanModel;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub fault: Option<String>,
    pub checks: Vec<CheckResult>,
    pub elapsed_s: f64,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(fault) = &self.fault {
            writeln!(f, "injected fault: {fault}")?;
        }
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<22} {} ({:.2} s)",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail,
                c.elapsed_s
            )?;
        }
        write!(f, "{} of {} checks passed in {:.1} s", self.checks.iter().filter(|c| c.passed).count(), self.checks.len(), self.elapsed_s)
    }
}

/// Name accepted by `selftest --inject`.
pub fn parse_fault(name: &str) -> Option<Fault> {
    match name {
        "none" => Some(Fault::None),
        "flip-dispersion" => Some(Fault::FlipDispersionSign),
        "conjugate-nu" => Some(Fault::ConjugateNu),
        _ => None,
    }
}

pub const FAULT_NAMES: [&str; 3] = ["none", "flip-dispersion", "conjugate-nu"];

fn grid() -> Grid {
    Grid::new(64, 0.35, 810.0).expect("selftest grid")
}

fn timed(name: &'static str, check: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let t = Instant::now();
    let (passed, detail) = match check() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name,
        passed,
        detail,
        elapsed_s: t.elapsed().as_secs_f64(),
    }
}

/// μμ† − νν† = I and μνᵀ = νμᵀ for a photon-conserving Kerr fiber.
fn symplectic(fault: Fault) -> Result<(bool, String)> {
    let g = grid();
    let input = sech_pulse(&g, 10.0, 50.0, 810.0)?;
    let spec = FiberSpec::kerr(0.01, 0.1, -0.02).with_self_steepening(true);
    let opts = SolverOptions::fixed(40).with_fault(fault);
    let run = linearized_propagate(&input, &spec, &opts, NoiseOptions::off())?;
    let (r1, r2) = run.green.symplectic_residuals();
    Ok((r1.max(r2) <= 1e-7, format!("residuals {r1:.1e}, {r2:.1e} (limit 1e-7)")))
}

/// γ = 0 leaves a coherent state: F = 1 behind every knife edge.
fn coherent(fault: Fault) -> Result<(bool, String)> {
    let g = grid();
    let input = sech_pulse(&g, 10.0, 50.0, 810.0)?;
    let spec = FiberSpec::kerr(0.02, 0.0, -0.02);
    let opts = SolverOptions::fixed(10).with_fault(fault);
    let run = linearized_propagate(&input, &spec, &opts, NoiseOptions::default())?;
    let c = photon_number_covariance(&run.green, &run.ledger, &run.output)?;
    let photons = crate::spectral::photons_per_fft_bin(&run.output);
    let centers: Vec<f64> = (0..64).map(|k| g.wavelength(k)).collect();
    let mut worst: f64 = 0.0;
    for edge in [790.0, 800.0, 810.0, 820.0, 830.0] {
        for kind in [FilterKind::LowPass, FilterKind::HighPass] {
            let f = SpectralFilter::knife_edge(kind, edge)?.transmission(&centers);
            worst = worst.max((fano_factor(&c, &photons, &f)? - 1.0).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max |F - 1| = {worst:.1e} (limit 1e-9)")))
}

/// Forward Green matrix with noise ledger against back-propagation.
fn forward_backprop(fault: Fault) -> Result<(bool, String)> {
    let g = grid();
    let input = sech_pulse(&g, 10.0, 50.0, 810.0)?;
    let spec = FiberSpec::kerr(0.01, 0.1, -0.02)
        .with_raman(RamanModel::SingleOscillator, 0.18)
        .with_self_steepening(true);
    let opts = SolverOptions::fixed(20).with_fault(fault);
    let noise = NoiseOptions::default();
    let run = linearized_propagate(&input, &spec, &opts, noise)?;
    let c = photon_number_covariance(&run.green, &run.ledger, &run.output)?;
    let centers: Vec<f64> = (0..64).map(|k| g.wavelength(k)).collect();
    let f = SpectralFilter::low_pass(810.0).transmission(&centers);
    let forward = crate::measurement::filtered_variance(&c, &f);
    let back = backprop_variance(&input, &spec, &opts, noise, &f)?;
    let rel = (forward - back).abs() / forward.abs();
    Ok((rel <= 1e-6, format!("relative difference {rel:.1e} (limit 1e-6)")))
}

/// A fundamental soliton returns to its launch shape after one soliton period.
fn soliton(fault: Fault) -> Result<(bool, String)> {
    let g = Grid::new(64, 0.6, 810.0)?;
    let fwhm = 50.0;
    let t0 = fwhm * 1e-3 / SECH_FWHM_FACTOR;
    let (beta2, gamma): (f64, f64) = (-0.02, 0.1);
    let p0 = beta2.abs() / (gamma * t0 * t0);
    let period = std::f64::consts::PI / 2.0 * t0 * t0 / beta2.abs();
    let spec = FiberSpec::kerr(period, gamma, beta2);
    let input = sech_pulse(&g, 2.0 * p0 * t0, fwhm, 810.0)?;
    let out = propagate(&input, &spec, &SolverOptions::fixed(200).with_fault(fault))?.output;
    let num: f64 = out
        .samples()
        .iter()
        .zip(input.samples())
        .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).powi(2))
        .sum();
    let den: f64 = input.samples().iter().map(|b| b.norm_sqr().powi(2)).sum();
    let err = (num / den).sqrt();
    Ok((err <= 1e-3, format!("relative intensity change {err:.1e} (limit 1e-3)")))
}

/// Runs every fast check, optionally with a defect injected.
pub fn selftest(fault: Fault) -> SelftestReport {
    let t = Instant::now();
    let checks = vec![
        timed("symplectic", || symplectic(fault)),
        timed("coherent_shot_noise", || coherent(fault)),
        timed("forward_vs_backprop", || forward_backprop(fault)),
        timed("soliton_invariance", || soliton(fault)),
    ];
    SelftestReport {
        fault: (fault != Fault::None).then(|| format!("{fault:?}")),
        checks,
        elapsed_s: t.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes() {
        let r = selftest(Fault::None);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn injected_faults_are_caught() {
        let r = selftest(Fault::FlipDispersionSign);
        assert!(!r.check("soliton_invariance").unwrap().passed, "{r}");
        let r = selftest(Fault::ConjugateNu);
        assert!(!r.check("symplectic").unwrap().passed, "{r}");
    }

    #[test]
    fn fault_names_parse() {
        for n in FAULT_NAMES {
            assert!(parse_fault(n).is_some());
        }
        assert!(parse_fault("typo").is_none());
    }
}
