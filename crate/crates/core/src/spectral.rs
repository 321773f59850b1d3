//! Spectra, frequency binning and photon-number bookkeeping.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Envelope, Grid};
use crate::units::{C_NM_PER_PS, HBAR_PJ_PS};

/// Spectral energy density on a monotonic wavelength axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub wavelength_nm: Vec<f64>,
    /// pJ/nm.
    pub density: Vec<f64>,
    /// Wavelength width of each bin, nm; `Σ density·width` is the pulse energy.
    pub bin_width_nm: Vec<f64>,
}

impl SpectralDensity {
    pub fn energy(&self) -> f64 {
        self.density
            .iter()
            .zip(&self.bin_width_nm)
            .map(|(d, w)| d * w)
            .sum()
    }

    pub fn peak(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    /// Density in dB relative to the peak (floored at −300 dB).
    pub fn db_relative(&self) -> Vec<f64> {
        let peak = self.peak();
        self.density
            .iter()
            .map(|&d| if peak > 0.0 && d > 0.0 { 10.0 * (d / peak).log10() } else { -300.0 })
            .collect()
    }

    /// Linear interpolation of the density at `lambda_nm`.
    pub fn density_at(&self, lambda_nm: f64) -> f64 {
        let w = &self.wavelength_nm;
        match w.iter().position(|&x| x >= lambda_nm) {
            Some(0) | None => 0.0,
            Some(i) => {
                let t = (lambda_nm - w[i - 1]) / (w[i] - w[i - 1]);
                self.density[i - 1] * (1.0 - t) + self.density[i] * t
            }
        }
    }

    /// Wavelength of the largest density in `[lo_nm, hi_nm]`.
    pub fn peak_wavelength_in(&self, lo_nm: f64, hi_nm: f64) -> Option<f64> {
        self.wavelength_nm
            .iter()
            .zip(&self.density)
            .filter(|(l, d)| **l >= lo_nm && **l <= hi_nm && **d > 0.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(l, _)| *l)
    }

    /// Outermost wavelengths where the density is within `db_below` of the peak.
    pub fn width_at(&self, db_below: f64) -> Option<(f64, f64)> {
        let level = self.peak() * 10f64.powf(-db_below / 10.0);
        if self.peak() <= 0.0 {
            return None;
        }
        let first = self.density.iter().position(|&d| d >= level)?;
        let last = self.density.iter().rposition(|&d| d >= level)?;
        Some((self.wavelength_nm[first], self.wavelength_nm[last]))
    }
}

/// Spectral density of an envelope, sorted by increasing wavelength.
pub fn spectrum(env: &Envelope) -> SpectralDensity {
    let grid = env.grid();
    let amps = env.spectrum_amplitudes();
    let d_omega = grid.d_omega();
    let mut wavelength_nm = Vec::with_capacity(amps.len());
    let mut density = Vec::with_capacity(amps.len());
    let mut bin_width_nm = Vec::with_capacity(amps.len());
    for k in grid.ascending_wavelength_order() {
        let lambda = grid.wavelength(k);
        wavelength_nm.push(lambda);
        // |Ã|² dω/2π per bin spread over dλ = λ² dω/(2πc)
        density.push(amps[k].norm_sqr() * C_NM_PER_PS / (lambda * lambda));
        bin_width_nm.push(lambda * lambda * d_omega / (2.0 * PI * C_NM_PER_PS));
    }
    SpectralDensity {
        wavelength_nm,
        density,
        bin_width_nm,
    }
}

/// `dω/(2π·ħ·ω_abs,k)`: converts `|Ã_k|²` to photons in bin k.
pub fn photon_weights(grid: &Grid) -> Vec<f64> {
    let d = grid.d_omega() / (2.0 * PI * HBAR_PJ_PS);
    (0..grid.n_points())
        .map(|k| d / grid.absolute_omega(k))
        .collect()
}

/// Photons per FFT bin.
pub fn photons_per_fft_bin(env: &Envelope) -> Vec<f64> {
    let w = photon_weights(env.grid());
    env.spectrum_amplitudes()
        .iter()
        .zip(&w)
        .map(|(a, w)| a.norm_sqr() * w)
        .collect()
}

pub fn total_photons(env: &Envelope) -> f64 {
    photons_per_fft_bin(env).iter().sum()
}

/// A set of non-overlapping groups of FFT bins.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBins {
    grid: Grid,
    groups: Vec<Vec<usize>>,
}

impl FrequencyBins {
    pub fn from_groups(grid: &Grid, groups: Vec<Vec<usize>>) -> Result<Self> {
        let n = grid.n_points();
        let mut seen = vec![false; n];
        for g in &groups {
            for &k in g {
                if k >= n {
                    return Err(Error::config(format!("bin index {k} outside a {n}-point grid")));
                }
                if seen[k] {
                    return Err(Error::config(format!("frequency bins overlap at FFT index {k}")));
                }
                seen[k] = true;
            }
        }
        Ok(FrequencyBins {
            grid: *grid,
            groups,
        })
    }

    pub fn full_band(grid: &Grid) -> Self {
        FrequencyBins {
            grid: *grid,
            groups: vec![(0..grid.n_points()).collect()],
        }
    }

    /// One bin per FFT index, in increasing wavelength order.
    pub fn each(grid: &Grid) -> Self {
        FrequencyBins {
            grid: *grid,
            groups: grid
                .ascending_wavelength_order()
                .into_iter()
                .map(|k| vec![k])
                .collect(),
        }
    }

    /// Bins bounded by consecutive increasing wavelength edges; FFT bins are
    /// assigned by their center wavelength, `[edge_i, edge_{i+1})`.
    pub fn by_wavelength_edges(grid: &Grid, edges_nm: &[f64]) -> Result<Self> {
        if edges_nm.len() < 2 {
            return Err(Error::config("need at least two wavelength edges"));
        }
        if edges_nm.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("wavelength edges must increase strictly"));
        }
        let mut groups = vec![Vec::new(); edges_nm.len() - 1];
        for k in grid.ascending_wavelength_order() {
            let lambda = grid.wavelength(k);
            if lambda < edges_nm[0] || lambda >= edges_nm[edges_nm.len() - 1] {
                continue;
            }
            let i = edges_nm.partition_point(|&e| e <= lambda) - 1;
            groups[i].push(k);
        }
        Ok(FrequencyBins {
            grid: *grid,
            groups,
        })
    }

    /// Uniform wavelength bins of width `width_nm` covering `[lo, hi)`.
    pub fn uniform_wavelength(grid: &Grid, lo_nm: f64, hi_nm: f64, width_nm: f64) -> Result<Self> {
        if !(width_nm > 0.0 && hi_nm > lo_nm) {
            return Err(Error::config("uniform bins need hi > lo and a positive width"));
        }
        let count = ((hi_nm - lo_nm) / width_nm).round().max(1.0) as usize;
        let edges: Vec<f64> = (0..=count)
            .map(|i| lo_nm + (hi_nm - lo_nm) * i as f64 / count as f64)
            .collect();
        Self::by_wavelength_edges(grid, &edges)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Mean wavelength of the member FFT bins (NaN for an empty bin).
    pub fn center_wavelength(&self, i: usize) -> f64 {
        let g = &self.groups[i];
        g.iter().map(|&k| self.grid.wavelength(k)).sum::<f64>() / g.len() as f64
    }

    pub fn center_wavelengths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.center_wavelength(i)).collect()
    }

    /// (shortest, longest) member wavelength of bin `i`.
    pub fn wavelength_range(&self, i: usize) -> Option<(f64, f64)> {
        let g = &self.groups[i];
        if g.is_empty() {
            return None;
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &k in g {
            let l = self.grid.wavelength(k);
            lo = lo.min(l);
            hi = hi.max(l);
        }
        Some((lo, hi))
    }
}

/// Photons per bin, `n_i = Σ_{k∈i} |Ã_k|² dω/(2πħω_k)`.
pub fn photon_number_spectrum(env: &Envelope, bins: &FrequencyBins) -> Result<Vec<f64>> {
    if bins.grid() != env.grid() {
        return Err(Error::contract("bins and envelope are on different grids"));
    }
    let per = photons_per_fft_bin(env);
    Ok(bins
        .groups()
        .iter()
        .map(|g| g.iter().map(|&k| per[k]).sum())
        .collect())
}
