//! The same filtered photon-number variance computed forward (Green matrix
//! plus noise ledger) and backward (adjoint of the measurement).

use fibersqueeze::measurement::{filtered_variance, SpectralFilter};
use fibersqueeze::quantum::{backprop_variance, linearized_propagate, photon_number_covariance, NoiseOptions};
use fibersqueeze::spectral::photons_per_fft_bin;
use fibersqueeze::{sech_pulse, FiberSpec, Grid, RamanModel, SolverOptions};

fn main() -> fibersqueeze::Result<()> {
    let grid = Grid::new(128, 0.6, 810.0)?;
    let input = sech_pulse(&grid, 20.0, 50.0, 810.0)?;
    let spec = FiberSpec::kerr(0.03, 0.1, -0.02)
        .with_raman(RamanModel::SingleOscillator, 0.18)
        .with_self_steepening(true);
    let opts = SolverOptions::fixed(60);
    let noise = NoiseOptions::default();
    let run = linearized_propagate(&input, &spec, &opts, noise)?;
    let c = photon_number_covariance(&run.green, &run.ledger, &run.output)?;
    let photons = photons_per_fft_bin(&run.output);
    let lambdas: Vec<f64> = (0..128).map(|k| grid.wavelength(k)).collect();
    println!("{:>8} {:>12} {:>12} {:>10}", "edge nm", "forward F", "backprop F", "rel diff");
    for edge in [790.0, 800.0, 810.0, 820.0, 830.0] {
        let f = SpectralFilter::low_pass(edge).transmission(&lambdas);
        let mean: f64 = photons.iter().zip(&f).map(|(n, f)| n * f).sum();
        let fwd = filtered_variance(&c, &f) / mean;
        let back = backprop_variance(&input, &spec, &opts, noise, &f)? / mean;
        println!("{edge:>8} {fwd:>12.6} {back:>12.6} {:>10.1e}", (fwd - back).abs() / fwd);
    }
    Ok(())
}
