use num_complex::Complex64;

use crate::fft::Fourier;
use crate::grid::{Envelope, Grid};
use crate::spectral::photon_weights;

/// Change of coordinates between time-domain field perturbations `δA` (√W)
/// and photon-normalized mode amplitudes `δa_k = s_k·δÃ_k`, `|a_k|²` being
/// the photon count of FFT bin k.
#[derive(Debug, Clone)]
pub struct PhotonBasis {
    grid: Grid,
    fourier: Fourier,
    scale: Vec<f64>,
}

impl PhotonBasis {
    pub fn new(grid: &Grid) -> Self {
        PhotonBasis {
            grid: *grid,
            fourier: grid.fourier(),
            scale: photon_weights(grid).iter().map(|w| w.sqrt()).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_empty()
    }

    /// `s_k = sqrt(dω / (2πħω_abs,k))`.
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Classical mode amplitudes of an envelope.
    pub fn amplitudes(&self, env: &Envelope) -> Vec<Complex64> {
        self.to_photon(env.samples())
    }

    pub fn to_photon(&self, field: &[Complex64]) -> Vec<Complex64> {
        let mut buf = field.to_vec();
        self.fourier.raw_plus(&mut buf);
        let dt = self.grid.dt();
        for (b, s) in buf.iter_mut().zip(&self.scale) {
            *b *= dt * s;
        }
        buf
    }

    pub fn from_photon(&self, modes: &[Complex64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = modes.iter().zip(&self.scale).map(|(a, s)| a / s).collect();
        self.fourier.raw_minus(&mut buf);
        let norm = 1.0 / (self.scale.len() as f64 * self.grid.dt());
        for b in buf.iter_mut() {
            *b *= norm;
        }
        buf
    }

    /// Adjoint of [`PhotonBasis::to_photon`] under `Re⟨·,·⟩`.
    pub fn to_photon_adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = g.iter().zip(&self.scale).map(|(x, s)| x * s).collect();
        self.fourier.raw_minus(&mut buf);
        let dt = self.grid.dt();
        for b in buf.iter_mut() {
            *b *= dt;
        }
        buf
    }

    /// Adjoint of [`PhotonBasis::from_photon`] under `Re⟨·,·⟩`.
    pub fn from_photon_adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        let mut buf = g.to_vec();
        self.fourier.raw_plus(&mut buf);
        let norm = 1.0 / (self.scale.len() as f64 * self.grid.dt());
        for (b, s) in buf.iter_mut().zip(&self.scale) {
            *b *= norm / s;
        }
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sech_pulse;
    use crate::spectral::photons_per_fft_bin;

    fn vecs(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a = (s >> 33) as f64 / (1u64 << 31) as f64 - 0.5;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                let b = (s >> 33) as f64 / (1u64 << 31) as f64 - 0.5;
                Complex64::new(a, b)
            })
            .collect()
    }

    fn re_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
    }

    #[test]
    fn round_trip_and_photon_counts() {
        let grid = Grid::new(128, 1.0, 810.0).unwrap();
        let basis = PhotonBasis::new(&grid);
        let env = sech_pulse(&grid, 5.0, 50.0, 800.0).unwrap();
        let a = basis.amplitudes(&env);
        let counts = photons_per_fft_bin(&env);
        for (x, n) in a.iter().zip(&counts) {
            assert!((x.norm_sqr() - n).abs() <= 1e-12 * n.max(1.0));
        }
        let back = basis.from_photon(&a);
        for (x, y) in back.iter().zip(env.samples()) {
            assert!((x - y).norm() < 1e-9 * env.peak_power().sqrt());
        }
    }

    #[test]
    fn adjoints_match() {
        let grid = Grid::new(64, 0.5, 810.0).unwrap();
        let basis = PhotonBasis::new(&grid);
        let x = vecs(64, 3);
        let y = vecs(64, 4);
        let lhs = re_inner(&y, &basis.to_photon(&x));
        let rhs = re_inner(&basis.to_photon_adjoint(&y), &x);
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1e-3), "{lhs} {rhs}");
        let lhs = re_inner(&y, &basis.from_photon(&x));
        let rhs = re_inner(&basis.from_photon_adjoint(&y), &x);
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1e-3), "{lhs} {rhs}");
    }
}
