use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::grid::{Envelope, Grid};
use crate::model::{Fault, GnlseModel};
use crate::propagate::{propagate_recorded, SolverOptions, Trajectory};
use crate::quantum::basis::PhotonBasis;
use crate::quantum::noise::{raman_noise_step, NoiseLedger, NoiseOptions};

/// Linear input→output transfer of photon-mode fluctuations,
/// `δa_out = μ·δa_in + ν·δa_in*`, over the FFT bins of one grid.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    grid: Grid,
    mu: DMatrix<Complex64>,
    nu: DMatrix<Complex64>,
    input: Envelope,
    output: Envelope,
}

impl GreenMatrix {
    /// The identity transfer of a zero-length fiber.
    pub fn identity(input: &Envelope) -> Self {
        let n = input.grid().n_points();
        GreenMatrix {
            grid: *input.grid(),
            mu: DMatrix::identity(n, n),
            nu: DMatrix::zeros(n, n),
            input: input.clone(),
            output: input.clone(),
        }
    }

    /// Assembles (μ, ν) from the images of `e_k` and `i·e_k` under a real-linear map.
    pub fn from_columns(
        input: &Envelope,
        output: &Envelope,
        real_images: &[Vec<Complex64>],
        imag_images: &[Vec<Complex64>],
    ) -> Self {
        let n = input.grid().n_points();
        let i = Complex64::new(0.0, 1.0);
        let mu = DMatrix::from_fn(n, n, |r, c| 0.5 * (real_images[c][r] - i * imag_images[c][r]));
        let nu = DMatrix::from_fn(n, n, |r, c| 0.5 * (real_images[c][r] + i * imag_images[c][r]));
        GreenMatrix {
            grid: *input.grid(),
            mu,
            nu,
            input: input.clone(),
            output: output.clone(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mu(&self) -> &DMatrix<Complex64> {
        &self.mu
    }

    pub fn nu(&self) -> &DMatrix<Complex64> {
        &self.nu
    }

    pub fn input(&self) -> &Envelope {
        &self.input
    }

    pub fn output(&self) -> &Envelope {
        &self.output
    }

    pub fn n_modes(&self) -> usize {
        self.mu.nrows()
    }

    /// Applies the transfer to a photon-coordinate perturbation.
    pub fn apply(&self, da: &[Complex64]) -> Vec<Complex64> {
        let v = nalgebra::DVector::from_column_slice(da);
        let c = nalgebra::DVector::from_iterator(da.len(), da.iter().map(|x| x.conj()));
        let out = &self.mu * v + &self.nu * c;
        out.iter().copied().collect()
    }

    /// Max-abs entries of `μμ† − νν† − I` and `μνᵀ − νμᵀ`.
    pub fn symplectic_residuals(&self) -> (f64, f64) {
        let n = self.n_modes();
        let id = DMatrix::<Complex64>::identity(n, n);
        let first = &self.mu * self.mu.adjoint() - &self.nu * self.nu.adjoint() - id;
        let second = &self.mu * self.nu.transpose() - &self.nu * self.mu.transpose();
        (max_abs(&first), max_abs(&second))
    }

    /// The transfer as a real `2N×2N` matrix on quadratures `(x…, y…)`.
    pub fn real_form(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        let mut t = DMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                let (m, v) = (self.mu[(r, c)], self.nu[(r, c)]);
                // δa_r = m(x + iy) + v(x − iy)
                let px = m + v;
                let py = Complex64::new(0.0, 1.0) * (m - v);
                t[(r, c)] = px.re;
                t[(n + r, c)] = px.im;
                t[(r, n + c)] = py.re;
                t[(n + r, n + c)] = py.im;
            }
        }
        t
    }

    /// Largest `|μ_ij|`.
    pub fn mu_max(&self) -> f64 {
        max_abs(&self.mu)
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Result of a linearized propagation.
#[derive(Debug, Clone)]
pub struct LinearizedRun {
    pub output: Envelope,
    pub green: GreenMatrix,
    pub ledger: NoiseLedger,
    pub trajectory: Trajectory,
}

/// Classical propagation plus the Jacobian of the discrete step map in photon
/// coordinates and, when enabled, the accumulated Raman noise.
///
/// Columns are co-propagated independently, so the result does not depend on
/// the order or the number of threads.
pub fn linearized_propagate(
    input: &Envelope,
    spec: &FiberSpec,
    opts: &SolverOptions,
    noise: NoiseOptions,
) -> Result<LinearizedRun> {
    let grid = *input.grid();
    let model = GnlseModel::with_fault(spec, &grid, opts.fault())?;
    let trajectory = propagate_recorded(&model, input, spec.length_m, opts)?;
    let basis = PhotonBasis::new(&grid);
    let n = grid.n_points();

    let columns: Vec<Vec<Complex64>> = (0..2 * n)
        .into_par_iter()
        .map(|c| -> Result<Vec<Complex64>> {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[c % n] = if c < n {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
            let mut delta = basis.from_photon(&e);
            for cp in &trajectory.checkpoints {
                model.tangent_step(cp, &mut delta);
                if delta.iter().any(|d| !d.re.is_finite() || !d.im.is_finite()) {
                    return Err(Error::Numerical {
                        z_m: cp.z_end,
                        what: "non-finite entry in the linearized transfer".into(),
                    });
                }
            }
            Ok(basis.to_photon(&delta))
        })
        .collect::<Result<_>>()?;
    let (re, im) = columns.split_at(n);
    let mut green = GreenMatrix::from_columns(input, &trajectory.output, re, im);
    if opts.fault() == Fault::ConjugateNu {
        green.nu = green.nu.map(|x| x.conj());
    }

    let ledger = noise_ledger(&model, &basis, &trajectory, noise)?;
    Ok(LinearizedRun {
        output: trajectory.output.clone(),
        green,
        ledger,
        trajectory,
    })
}

/// Forward recursion `L ← Φ L Φᵀ + ΔL` over the recorded steps.
pub fn noise_ledger(
    model: &GnlseModel,
    basis: &PhotonBasis,
    trajectory: &Trajectory,
    noise: NoiseOptions,
) -> Result<NoiseLedger> {
    let n = model.grid().n_points();
    let mut ledger = NoiseLedger::new(n, noise);
    if !noise.raman_noise || model.raman().is_none() {
        return Ok(ledger);
    }
    for cp in &trajectory.checkpoints {
        ledger.transform(|v| {
            let mut d = basis.from_photon(v);
            model.tangent_step_parts(cp, &mut d);
            *v = basis.to_photon(&d);
        });
        raman_noise_step(&mut ledger, model, basis, &cp.mid, cp.h)?;
        ledger.rotate(&cp.half_phase);
        if ledger.covariance().iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical {
                z_m: cp.z_end,
                what: "non-finite noise covariance".into(),
            });
        }
    }
    Ok(ledger)
}

/// Photon-number covariance between FFT bins of the output,
/// `C_ij = ⟨Δn_i Δn_j⟩` for a coherent input plus the ledger's added noise.
pub fn photon_number_covariance(
    green: &GreenMatrix,
    ledger: &NoiseLedger,
    out: &Envelope,
) -> Result<DMatrix<f64>> {
    if out.grid() != green.grid() || out.samples() != green.output().samples() {
        return Err(Error::contract(
            "output envelope does not come from the run that produced the Green matrix",
        ));
    }
    let n = green.n_modes();
    if ledger.n_modes() != n {
        return Err(Error::contract("noise ledger size does not match the Green matrix"));
    }
    let a = PhotonBasis::new(green.grid()).amplitudes(out);
    // δn_i = 2 Re Σ_k w_ik δa_k with w_ik = ā_i μ_ik + a_i ν̄_ik; vacuum ⟨x²⟩ = ⟨y²⟩ = 1/4.
    let w = DMatrix::from_fn(n, n, |i, k| {
        a[i].conj() * green.mu[(i, k)] + a[i] * green.nu[(i, k)].conj()
    });
    let ww = &w * w.adjoint();
    let mut c = DMatrix::from_fn(n, n, |i, j| ww[(i, j)].re);
    if !ledger.is_zero() {
        // δn_i = 2(Re a_i x_i + Im a_i y_i)
        let g = DMatrix::from_fn(n, 2 * n, |i, q| {
            if q == i {
                2.0 * a[i].re
            } else if q == n + i {
                2.0 * a[i].im
            } else {
                0.0
            }
        });
        c += &g * ledger.covariance() * g.transpose();
    }
    Ok((&c + c.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sech_pulse;
    use crate::raman::RamanModel;

    fn grid() -> Grid {
        Grid::new(64, 0.35, 810.0).unwrap()
    }

    #[test]
    fn zero_length_gives_identity() {
        let g = grid();
        let input = sech_pulse(&g, 10.0, 50.0, 810.0).unwrap();
        let spec = FiberSpec::kerr(0.0, 0.1, -0.02);
        let run = linearized_propagate(&input, &spec, &SolverOptions::fixed(1), NoiseOptions::off()).unwrap();
        let n = 64;
        for r in 0..n {
            for c in 0..n {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((run.green.mu()[(r, c)].re - expect).abs() < 1e-12);
                assert!(run.green.mu()[(r, c)].im.abs() < 1e-12);
                assert!(run.green.nu()[(r, c)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_fiber_is_diagonal_phase() {
        let g = grid();
        let input = sech_pulse(&g, 10.0, 50.0, 810.0).unwrap();
        let spec = FiberSpec::kerr(0.05, 0.0, -0.02);
        let run = linearized_propagate(&input, &spec, &SolverOptions::fixed(5), NoiseOptions::off()).unwrap();
        let mu = run.green.mu();
        for r in 0..64 {
            assert!((mu[(r, r)].norm() - 1.0).abs() < 1e-12);
            for c in 0..64 {
                if r != c {
                    assert!(mu[(r, c)].norm() < 1e-12);
                }
            }
        }
        assert!(max_abs(run.green.nu()) < 1e-12);
    }

    #[test]
    fn kerr_nu_grows_with_nonlinear_phase() {
        // Weak dispersion, short fiber: ‖ν‖ tracks the peak nonlinear phase γP₀L.
        let g = grid();
        let spec = FiberSpec::kerr(0.002, 0.1, -1e-6);
        let mut norms = Vec::new();
        for e in [0.5, 1.0] {
            let input = sech_pulse(&g, e, 60.0, 810.0).unwrap();
            let run = linearized_propagate(&input, &spec, &SolverOptions::fixed(20), NoiseOptions::off()).unwrap();
            norms.push(max_abs(run.green.nu()));
        }
        let ratio = norms[1] / norms[0];
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn conjugate_fault_only_touches_nu() {
        let g = grid();
        let input = sech_pulse(&g, 10.0, 50.0, 810.0).unwrap();
        let spec = FiberSpec::kerr(0.01, 0.1, -0.02).with_self_steepening(true);
        let clean = linearized_propagate(&input, &spec, &SolverOptions::fixed(20), NoiseOptions::off()).unwrap();
        let bad = linearized_propagate(
            &input,
            &spec,
            &SolverOptions::fixed(20).with_fault(Fault::ConjugateNu),
            NoiseOptions::off(),
        )
        .unwrap();
        assert_eq!(clean.green.mu(), bad.green.mu());
        let (r1, r2) = clean.green.symplectic_residuals();
        assert!(r1 < 1e-9 && r2 < 1e-9, "{r1} {r2}");
        assert!(bad.green.symplectic_residuals().1 > 1e-6);
    }

    #[test]
    fn covariance_rejects_foreign_output() {
        let g = grid();
        let input = sech_pulse(&g, 10.0, 50.0, 810.0).unwrap();
        let spec = FiberSpec::kerr(0.01, 0.1, -0.02).with_raman(RamanModel::SingleOscillator, 0.18);
        let run = linearized_propagate(&input, &spec, &SolverOptions::fixed(10), NoiseOptions::off()).unwrap();
        assert!(matches!(
            photon_number_covariance(&run.green, &run.ledger, &input),
            Err(Error::Contract(_))
        ));
    }
}
