//! The delayed Raman response of silica: gain peak, thermal occupation of
//! the phonon bath and the reservoir noise spectrum.

use fibersqueeze::quantum::raman_noise_eigenvalues;
use fibersqueeze::units::{bose_occupation, rad_per_ps_to_thz};
use fibersqueeze::{Grid, RamanKernel, RamanModel};

fn main() -> fibersqueeze::Result<()> {
    let grid = Grid::new(1 << 13, 16.0, 810.0)?;
    for model in [RamanModel::SingleOscillator, RamanModel::MultiMode] {
        let kernel = RamanKernel::new(model, 0.18, &grid)?;
        let gain = kernel.gain_spectrum();
        // gain is odd in detuning; look for its peak on the Stokes side
        let (k, g) = (0..grid.n_points())
            .filter(|&k| grid.omega(k) < 0.0)
            .map(|k| (k, gain[k].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let shift = rad_per_ps_to_thz(grid.omega(k).abs());
        println!(
            "{model:?}: integral {:.4}, gain peak {shift:.2} THz (|Im h| = {g:.3}), n_th at 300 K {:.3}",
            kernel.integral(),
            bose_occupation(grid.omega(k).abs(), 300.0)
        );
        let hot = raman_noise_eigenvalues(&kernel, 0.095, &grid, 300.0);
        let cold = raman_noise_eigenvalues(&kernel, 0.095, &grid, 0.0);
        println!("  reservoir noise at the gain peak: 300 K / 0 K = {:.3}", hot[k] / cold[k]);
    }
    Ok(())
}
