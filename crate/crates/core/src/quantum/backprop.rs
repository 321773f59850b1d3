//! Photon-number variances by transporting measurement functionals backwards
//! through the stored linearized steps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::grid::Envelope;
use crate::model::GnlseModel;
use crate::propagate::{propagate_recorded, SolverOptions, Trajectory};
use crate::quantum::basis::PhotonBasis;
use crate::quantum::noise::{raman_noise_eigenvalues, NoiseOptions};
use crate::spectral::FrequencyBins;

/// Covariance of a set of linear observables, split into the part carried by
/// the input vacuum and the part added by the Raman reservoir.
#[derive(Debug, Clone)]
pub struct ObservableCovariance {
    pub vacuum: DMatrix<f64>,
    pub raman: DMatrix<f64>,
}

impl ObservableCovariance {
    pub fn total(&self) -> DMatrix<f64> {
        &self.vacuum + &self.raman
    }

    pub fn len(&self) -> usize {
        self.vacuum.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vacuum.nrows() == 0
    }
}

/// Output-side gradient of `Σ_k f_k |a_k|²`, in photon coordinates.
pub fn photon_number_functional(amplitudes: &[Complex64], transmission: &[f64]) -> Vec<Complex64> {
    amplitudes
        .iter()
        .zip(transmission)
        .map(|(a, f)| 2.0 * f * a)
        .collect()
}

/// Covariance of `Re⟨g_b, δa_out⟩` for every functional `g_b` (photon
/// coordinates, output side) by one backward sweep of the trajectory.
///
/// The reservoir term is accumulated at each step's injection point, so memory
/// stays at one field per functional.
pub fn backprop_covariance(
    model: &GnlseModel,
    trajectory: &Trajectory,
    functionals: &[Vec<Complex64>],
    noise: NoiseOptions,
) -> Result<ObservableCovariance> {
    let grid = model.grid();
    if trajectory.output.grid() != grid {
        return Err(Error::contract("trajectory and model are on different grids"));
    }
    let n = grid.n_points();
    if functionals.iter().any(|g| g.len() != n) {
        return Err(Error::contract("functional length does not match the grid"));
    }
    if trajectory.checkpoints.is_empty() && trajectory.input.samples() != trajectory.output.samples() {
        return Err(Error::contract("trajectory has no stored linearization checkpoints"));
    }
    let basis = PhotonBasis::new(grid);
    let b = functionals.len();
    let mut adj: Vec<Vec<Complex64>> = functionals
        .par_iter()
        .map(|g| basis.to_photon_adjoint(g))
        .collect();

    let reservoir = match (noise.raman_noise, model.raman()) {
        (true, Some(kernel)) => {
            let lam = raman_noise_eigenvalues(kernel, model.gamma(), grid, noise.temperature_k);
            let peak = lam.iter().cloned().fold(0.0, f64::max);
            let active: Vec<(usize, f64)> = lam
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > 1e-14 * peak)
                .map(|(k, &l)| (k, l / n as f64))
                .collect();
            Some(active)
        }
        _ => None,
    };
    let mut raman = DMatrix::<f64>::zeros(b, b);
    let fourier = model.fourier();

    for cp in trajectory.checkpoints.iter().rev() {
        let projections: Vec<Vec<Complex64>> = adj
            .par_iter_mut()
            .map(|g| {
                model.adjoint_half(cp, g);
                let proj = match &reservoir {
                    Some(active) => {
                        let c = model.noise_adjoint(&cp.mid, g);
                        let mut hat: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                        fourier.raw_plus(&mut hat);
                        active
                            .iter()
                            .map(|&(k, l)| hat[k] * (l * cp.h).sqrt())
                            .collect()
                    }
                    None => Vec::new(),
                };
                model.adjoint_nonlinear(cp, g);
                proj
            })
            .collect();
        if let Some(active) = &reservoir {
            let z = DMatrix::from_fn(b, active.len(), |i, j| projections[i][j]);
            let zz = &z * z.adjoint();
            raman += zz.map(|x| x.re);
        }
        if adj.iter().flatten().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::Numerical {
                z_m: cp.z_end,
                what: "non-finite adjoint field".into(),
            });
        }
    }

    let inputs: Vec<Vec<Complex64>> = adj.par_iter().map(|g| basis.from_photon_adjoint(g)).collect();
    let gram = DMatrix::from_fn(n, b, |k, j| inputs[j][k]);
    let vacuum = (gram.adjoint() * &gram).map(|x| 0.25 * x.re);
    Ok(ObservableCovariance {
        vacuum: (&vacuum + vacuum.transpose()) * 0.5,
        raman: (&raman + raman.transpose()) * 0.5,
    })
}

/// Photon-number covariance between groups of FFT bins at the fiber output.
pub fn bin_covariance(
    model: &GnlseModel,
    trajectory: &Trajectory,
    bins: &FrequencyBins,
    noise: NoiseOptions,
) -> Result<ObservableCovariance> {
    let n = model.grid().n_points();
    let a = PhotonBasis::new(model.grid()).amplitudes(&trajectory.output);
    let functionals: Vec<Vec<Complex64>> = bins
        .groups()
        .iter()
        .map(|group| {
            let mut f = vec![0.0; n];
            for &k in group {
                f[k] = 1.0;
            }
            photon_number_functional(&a, &f)
        })
        .collect();
    backprop_covariance(model, trajectory, &functionals, noise)
}

/// Variance of the filtered photon number `Σ_k f_k n_k`, `f` given per FFT bin.
pub fn backprop_variance(
    input: &Envelope,
    spec: &FiberSpec,
    opts: &SolverOptions,
    noise: NoiseOptions,
    transmission: &[f64],
) -> Result<f64> {
    if transmission.len() != input.grid().n_points() {
        return Err(Error::contract("transmission length does not match the grid"));
    }
    let model = GnlseModel::with_fault(spec, input.grid(), opts.fault())?;
    let trajectory = propagate_recorded(&model, input, spec.length_m, opts)?;
    let a = PhotonBasis::new(input.grid()).amplitudes(&trajectory.output);
    let g = photon_number_functional(&a, transmission);
    let cov = backprop_covariance(&model, &trajectory, &[g], noise)?;
    Ok(cov.total()[(0, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sech_pulse, Grid};
    use crate::spectral::photons_per_fft_bin;

    #[test]
    fn zero_length_gives_filtered_shot_noise() {
        let grid = Grid::new(64, 0.35, 810.0).unwrap();
        let input = sech_pulse(&grid, 10.0, 50.0, 810.0).unwrap();
        let spec = FiberSpec::kerr(0.0, 0.1, -0.02);
        let f: Vec<f64> = (0..64).map(|k| if grid.wavelength(k) > 810.0 { 1.0 } else { 0.3 }).collect();
        let var = backprop_variance(&input, &spec, &SolverOptions::fixed(1), NoiseOptions::off(), &f).unwrap();
        let n = photons_per_fft_bin(&input);
        let expect: f64 = f.iter().zip(&n).map(|(f, n)| f * f * n).sum();
        assert!((var / expect - 1.0).abs() < 1e-12, "{var} {expect}");
    }

    #[test]
    fn missing_checkpoints_are_a_contract_violation() {
        let grid = Grid::new(64, 0.35, 810.0).unwrap();
        let input = sech_pulse(&grid, 10.0, 50.0, 810.0).unwrap();
        let spec = FiberSpec::kerr(0.01, 0.1, -0.02);
        let model = GnlseModel::new(&spec, &grid).unwrap();
        let mut traj = propagate_recorded(&model, &input, 0.01, &SolverOptions::fixed(4)).unwrap();
        traj.checkpoints.clear();
        let g = vec![Complex64::new(1.0, 0.0); 64];
        assert!(matches!(
            backprop_covariance(&model, &traj, &[g], NoiseOptions::off()),
            Err(Error::Contract(_))
        ));
    }
}
