//! Linearized propagation on a small grid: the Bogoliubov pair (μ, ν), its
//! symplectic residuals and the uncertainty margin with Raman noise.

use fibersqueeze::quantum::{
    linearized_propagate, quadrature_covariance, uncertainty_margin, NoiseOptions,
};
use fibersqueeze::{sech_pulse, FiberSpec, Grid, RamanModel, SolverOptions};

fn main() -> fibersqueeze::Result<()> {
    let grid = Grid::new(64, 0.35, 810.0)?;
    let input = sech_pulse(&grid, 20.0, 50.0, 810.0)?;
    let kerr = FiberSpec::kerr(0.02, 0.1, -0.02).with_self_steepening(true);
    let run = linearized_propagate(&input, &kerr, &SolverOptions::fixed(40), NoiseOptions::off())?;
    let (r1, r2) = run.green.symplectic_residuals();
    let nu_max = run.green.nu().iter().map(|x| x.norm()).fold(0.0, f64::max);
    println!("Kerr: |mu|max {:.3}, |nu|max {nu_max:.3}, residuals {r1:.1e} {r2:.1e}", run.green.mu_max());

    let raman = kerr.with_raman(RamanModel::SingleOscillator, 0.18);
    for (label, noise) in [
        ("no reservoir", NoiseOptions::off()),
        ("0 K reservoir", NoiseOptions::at(0.0)),
        ("300 K reservoir", NoiseOptions::at(300.0)),
    ] {
        let run = linearized_propagate(&input, &raman, &SolverOptions::fixed(160), noise)?;
        let sigma = quadrature_covariance(&run.green, &run.ledger);
        println!(
            "Raman, {label}: added-noise trace {:.3e}, uncertainty margin {:+.2e}",
            run.ledger.trace(),
            uncertainty_margin(&sigma)
        );
    }
    Ok(())
}
