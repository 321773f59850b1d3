use fibersqueeze::model::GnlseModel;
use fibersqueeze::propagate::propagate_recorded;
use fibersqueeze::quantum::*;
use fibersqueeze::spectral::photons_per_fft_bin;
use fibersqueeze::*;
use num_complex::Complex64;

fn raman_spec(length: f64) -> FiberSpec {
    FiberSpec::kerr(length, 0.1, -0.02)
        .with_raman(RamanModel::SingleOscillator, 0.18)
        .with_self_steepening(true)
}

/// Output photon amplitudes of the classical solver for an input perturbed by `da`.
fn classical_map(input: &Envelope, spec: &FiberSpec, opts: &SolverOptions, da: &[Complex64]) -> Vec<Complex64> {
    let basis = PhotonBasis::new(input.grid());
    let mut a = basis.amplitudes(input);
    for (x, d) in a.iter_mut().zip(da) {
        *x += d;
    }
    let env = Envelope::new(*input.grid(), basis.from_photon(&a)).unwrap();
    let out = propagate(&env, spec, opts).unwrap().output;
    basis.amplitudes(&out)
}

#[test]
fn green_matrix_matches_central_differences() {
    let grid = Grid::new(64, 0.35, 810.0).unwrap();
    let input = sech_pulse(&grid, 20.0, 50.0, 810.0).unwrap();
    let spec = raman_spec(0.02);
    let opts = SolverOptions::fixed(40);
    let run = linearized_propagate(&input, &spec, &opts, NoiseOptions::off()).unwrap();

    // ε = 1e-6·√P₀ in field units, expressed per photon-mode amplitude
    let basis = PhotonBasis::new(&grid);
    let a0 = basis.amplitudes(&input);
    let amax = a0.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let eps = 1e-6 * amax;
    let n = 64;
    let mut re_cols = Vec::new();
    let mut im_cols = Vec::new();
    for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
        for k in 0..n {
            let mut d = vec![Complex64::new(0.0, 0.0); n];
            d[k] = unit * eps;
            let plus = classical_map(&input, &spec, &opts, &d);
            d[k] = -unit * eps;
            let minus = classical_map(&input, &spec, &opts, &d);
            let col: Vec<Complex64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * eps)).collect();
            if unit.re == 1.0 {
                re_cols.push(col);
            } else {
                im_cols.push(col);
            }
        }
    }
    let fd = GreenMatrix::from_columns(&input, &run.output, &re_cols, &im_cols);
    let scale = run.green.mu_max();
    let err_mu = (fd.mu() - run.green.mu()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let err_nu = (fd.nu() - run.green.nu()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    assert!(err_mu <= 1e-4 * scale, "{err_mu} vs {scale}");
    assert!(err_nu <= 1e-4 * scale, "{err_nu} vs {scale}");
    // the run is genuinely nonlinear
    assert!(run.green.nu().iter().map(|x| x.norm()).fold(0.0, f64::max) > 1e-3 * scale);
}

#[test]
fn forward_and_backward_variances_agree() {
    let grid = Grid::new(128, 0.6, 810.0).unwrap();
    let input = sech_pulse(&grid, 20.0, 50.0, 810.0).unwrap();
    let spec = raman_spec(0.03);
    let opts = SolverOptions::fixed(60);
    for (noise, tol) in [(NoiseOptions::off(), 1e-6), (NoiseOptions::default(), 1e-5)] {
        let run = linearized_propagate(&input, &spec, &opts, noise).unwrap();
        let c = photon_number_covariance(&run.green, &run.ledger, &run.output).unwrap();
        for edge in [790.0, 810.0, 830.0] {
            let f: Vec<f64> = (0..128).map(|k| if grid.wavelength(k) >= edge { 1.0 } else { 0.0 }).collect();
            let fwd: f64 = (0..128)
                .flat_map(|i| (0..128).map(move |j| (i, j)))
                .map(|(i, j)| f[i] * f[j] * c[(i, j)])
                .sum();
            let back = backprop_variance(&input, &spec, &opts, noise, &f).unwrap();
            assert!(((back - fwd) / fwd).abs() <= tol, "{edge}: {back} vs {fwd}");
        }
    }
}

#[test]
fn cold_reservoir_restores_the_uncertainty_principle() {
    // Noise enters once per step at the midpoint field, so the residual
    // violation is first order in the step and vanishes as it shrinks.
    let grid = Grid::new(64, 0.35, 810.0).unwrap();
    let input = sech_pulse(&grid, 20.0, 50.0, 810.0).unwrap();
    let spec = raman_spec(0.02);
    let margin = |steps: usize| {
        let run = linearized_propagate(&input, &spec, &SolverOptions::fixed(steps), NoiseOptions::at(0.0)).unwrap();
        let bare = NoiseLedger::new(64, NoiseOptions::off());
        (
            uncertainty_margin(&quadrature_covariance(&run.green, &run.ledger)),
            uncertainty_margin(&quadrature_covariance(&run.green, &bare)),
        )
    };
    let (coarse, bare) = margin(80);
    let (fine, _) = margin(320);
    assert!(bare < -1e-2, "{bare}");
    assert!(fine.abs() < coarse.abs() / 3.0, "{coarse} {fine}");
    assert!(fine > 1e-3 * bare, "{fine} {bare}");
}

#[test]
fn photon_number_is_poissonian_when_conserved() {
    let grid = Grid::new(128, 0.6, 810.0).unwrap();
    let input = sech_pulse(&grid, 20.0, 50.0, 810.0).unwrap();
    let spec = raman_spec(0.03);
    let run = linearized_propagate(&input, &spec, &SolverOptions::fixed(60), NoiseOptions::off()).unwrap();
    let c = photon_number_covariance(&run.green, &run.ledger, &run.output).unwrap();
    let total: f64 = c.iter().sum();
    let n: f64 = photons_per_fft_bin(&run.output).iter().sum();
    assert!((total / n - 1.0).abs() < 1e-6, "{}", total / n);
    let eig = c.clone().symmetric_eigen().eigenvalues;
    assert!(eig.min() >= -1e-8 * c.trace() / 128.0);
}

#[test]
fn bin_covariance_matches_forward_aggregation() {
    let grid = Grid::new(128, 0.6, 810.0).unwrap();
    let input = sech_pulse(&grid, 20.0, 50.0, 810.0).unwrap();
    let spec = raman_spec(0.03);
    let opts = SolverOptions::fixed(60);
    let run = linearized_propagate(&input, &spec, &opts, NoiseOptions::default()).unwrap();
    let c = photon_number_covariance(&run.green, &run.ledger, &run.output).unwrap();
    let bins = spectral::FrequencyBins::uniform_wavelength(&grid, 760.0, 860.0, 20.0).unwrap();
    let model = GnlseModel::new(&spec, &grid).unwrap();
    let traj = propagate_recorded(&model, &input, spec.length_m, &opts).unwrap();
    let cov = bin_covariance(&model, &traj, &bins, NoiseOptions::default()).unwrap();
    let total = cov.total();
    for (i, gi) in bins.groups().iter().enumerate() {
        for (j, gj) in bins.groups().iter().enumerate() {
            let fwd: f64 = gi.iter().flat_map(|&a| gj.iter().map(move |&b| (a, b))).map(|(a, b)| c[(a, b)]).sum();
            assert!((total[(i, j)] - fwd).abs() <= 1e-5 * (c[(gi[0], gi[0])].abs() + fwd.abs()), "{i},{j}");
        }
    }
    assert!(cov.raman.diagonal().iter().all(|&x| x >= 0.0));
}
