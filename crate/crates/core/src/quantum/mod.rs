//! Linearized quantum fluctuations around the classical solution.
//!
//! Fluctuations are carried in photon-normalized mode amplitudes `δa_k` of the
//! FFT bins; a coherent input has the symmetrized vacuum covariance
//! `⟨x²⟩ = ⟨y²⟩ = 1/4` per mode, `δa = x + i·y`. Two code paths evaluate
//! photon-number statistics: the forward Green matrix with its noise ledger,
//! and the back-propagated measurement functional.

mod backprop;
mod basis;
mod green;
mod noise;

pub use backprop::{
    backprop_covariance, backprop_variance, bin_covariance, photon_number_functional,
    ObservableCovariance,
};
pub use basis::PhotonBasis;
pub use green::{
    linearized_propagate, noise_ledger, photon_number_covariance, GreenMatrix, LinearizedRun,
};
pub use noise::{
    raman_noise_eigenvalues, raman_noise_step, sideband_weight, NoiseLedger, NoiseOptions,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Output quadrature covariance `¼·T Tᵀ + L` of a coherent input.
pub fn quadrature_covariance(green: &GreenMatrix, ledger: &NoiseLedger) -> DMatrix<f64> {
    let t = green.real_form();
    let mut s = &t * t.transpose() * 0.25;
    if !ledger.is_zero() {
        s += ledger.covariance();
    }
    s
}

/// Smallest eigenvalue of `σ + (i/4)·J`, J the quadrature symplectic form.
/// Negative values mean the state violates the uncertainty principle.
pub fn uncertainty_margin(sigma: &DMatrix<f64>) -> f64 {
    let m = sigma.nrows();
    let n = m / 2;
    let h = DMatrix::from_fn(m, m, |r, c| {
        let j = if r < n && c == r + n {
            0.25
        } else if r >= n && c + n == r {
            -0.25
        } else {
            0.0
        };
        Complex64::new(sigma[(r, c)], j)
    });
    h.symmetric_eigenvalues().min()
}
