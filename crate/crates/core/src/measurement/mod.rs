//! Fano factors under spectral filtering, filter-edge sweeps, intrapulse
//! correlation maps and detection-loss bookkeeping.

mod filter;

pub use filter::{FilterKind, SpectralFilter};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::to_db;

/// `fᵀCf`.
pub fn filtered_variance(c: &DMatrix<f64>, f: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..f.len() {
        if f[i] == 0.0 {
            continue;
        }
        for j in 0..f.len() {
            acc += f[i] * f[j] * c[(i, j)];
        }
    }
    acc
}

/// `F = fᵀCf / Σ f_i n_i`; one is the shot-noise level.
pub fn fano_factor(c: &DMatrix<f64>, photons: &[f64], transmission: &[f64]) -> Result<f64> {
    if c.nrows() != photons.len() || c.ncols() != photons.len() || transmission.len() != photons.len() {
        return Err(Error::contract("covariance, photon counts and filter differ in size"));
    }
    let mean: f64 = photons.iter().zip(transmission).map(|(n, f)| n * f).sum();
    if !(mean > 0.0) {
        return Err(Error::domain("filter passes no photons"));
    }
    Ok(filtered_variance(c, transmission) / mean)
}

/// Photon statistics of a set of spectral bins: means, covariance and centres.
#[derive(Debug, Clone)]
pub struct BinStatistics {
    pub centers_nm: Vec<f64>,
    pub photons: Vec<f64>,
    pub covariance: DMatrix<f64>,
    /// Applied on top of every filter.
    pub detection: Option<SpectralFilter>,
}

impl BinStatistics {
    pub fn new(centers_nm: Vec<f64>, photons: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = centers_nm.len();
        if photons.len() != n || covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::contract("bin centres, photon counts and covariance differ in size"));
        }
        Ok(BinStatistics {
            centers_nm,
            photons,
            covariance,
            detection: None,
        })
    }

    pub fn with_detection(mut self, detection: SpectralFilter) -> Self {
        self.detection = Some(detection);
        self
    }

    pub fn len(&self) -> usize {
        self.photons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.photons.is_empty()
    }

    pub fn transmission(&self, filter: &SpectralFilter) -> Vec<f64> {
        filter.transmission_within(&self.centers_nm, self.detection.as_ref())
    }

    pub fn fano(&self, filter: &SpectralFilter) -> Result<f64> {
        fano_factor(&self.covariance, &self.photons, &self.transmission(filter))
    }

    pub fn variance(&self, filter: &SpectralFilter) -> f64 {
        filtered_variance(&self.covariance, &self.transmission(filter))
    }

    pub fn mean(&self, filter: &SpectralFilter) -> f64 {
        self.photons.iter().zip(self.transmission(filter)).map(|(n, f)| n * f).sum()
    }

    pub fn sweep(&self, kind: FilterKind, edges_nm: &[f64]) -> Result<SqueezeCurve> {
        filter_sweep(self, kind, edges_nm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezePoint {
    pub edge_nm: f64,
    pub fano: Option<f64>,
    pub fano_db: Option<f64>,
    /// Why this edge has no value.
    pub gap: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezeCurve {
    pub kind: FilterKind,
    pub points: Vec<SqueezePoint>,
}

impl SqueezeCurve {
    /// Edge with the smallest Fano factor.
    pub fn best(&self) -> Option<&SqueezePoint> {
        self.points
            .iter()
            .filter(|p| p.fano.is_some())
            .min_by(|a, b| a.fano.unwrap().total_cmp(&b.fano.unwrap()))
    }

    pub fn gaps(&self) -> impl Iterator<Item = &SqueezePoint> {
        self.points.iter().filter(|p| p.gap.is_some())
    }

    pub fn min_fano(&self) -> Option<f64> {
        self.best().and_then(|p| p.fano)
    }
}

/// Fano factor at each knife-edge position. Edges whose filter passes no
/// photons become gaps instead of aborting the sweep.
pub fn filter_sweep(stats: &BinStatistics, kind: FilterKind, edges_nm: &[f64]) -> Result<SqueezeCurve> {
    let mut points = Vec::with_capacity(edges_nm.len());
    for &edge in edges_nm {
        let filter = SpectralFilter::knife_edge(kind, edge)?;
        let point = match stats.fano(&filter) {
            Ok(f) => SqueezePoint {
                edge_nm: edge,
                fano: Some(f),
                fano_db: Some(to_db(f)),
                gap: None,
            },
            Err(e @ Error::Domain(_)) => SqueezePoint {
                edge_nm: edge,
                fano: None,
                fano_db: None,
                gap: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        points.push(point);
    }
    Ok(SqueezeCurve { kind, points })
}

/// Normalized covariance `ρ_ij = C_ij / sqrt(C_ii C_jj)` between coarse wavelength bins.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap {
    pub edges_nm: Vec<f64>,
    pub rho: DMatrix<f64>,
    /// Coarse bins without photons; their rows and columns hold no value.
    pub undefined: Vec<usize>,
}

impl CorrelationMap {
    pub fn len(&self) -> usize {
        self.rho.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        if self.undefined.contains(&i) || self.undefined.contains(&j) {
            None
        } else {
            Some(self.rho[(i, j)])
        }
    }

    pub fn centers_nm(&self) -> Vec<f64> {
        self.edges_nm.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Coarse bins whose centres fall in `[lo, hi)`.
    pub fn bins_in(&self, lo_nm: f64, hi_nm: f64) -> Vec<usize> {
        self.centers_nm()
            .iter()
            .enumerate()
            .filter(|(i, c)| **c >= lo_nm && **c < hi_nm && !self.undefined.contains(i))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.len();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if let Some(v) = self.get(i, j) {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }
}

/// Sums the fine-bin covariance into `coarse_bins` equal wavelength intervals
/// spanning `[lo, hi)` and normalizes.
pub fn correlation_map(
    c: &DMatrix<f64>,
    centers_nm: &[f64],
    coarse_bins: usize,
    lo_nm: f64,
    hi_nm: f64,
) -> Result<CorrelationMap> {
    if coarse_bins < 2 {
        return Err(Error::config("a correlation map needs at least 2 coarse bins"));
    }
    if c.nrows() != centers_nm.len() || c.ncols() != centers_nm.len() {
        return Err(Error::contract("covariance and bin centres differ in size"));
    }
    if !(lo_nm < hi_nm) {
        return Err(Error::config("correlation map range needs lo < hi"));
    }
    let width = (hi_nm - lo_nm) / coarse_bins as f64;
    let edges_nm: Vec<f64> = (0..=coarse_bins).map(|i| lo_nm + i as f64 * width).collect();
    let owner: Vec<Option<usize>> = centers_nm
        .iter()
        .map(|&l| {
            if l < lo_nm || l >= hi_nm {
                None
            } else {
                Some((((l - lo_nm) / width) as usize).min(coarse_bins - 1))
            }
        })
        .collect();
    let mut coarse = DMatrix::<f64>::zeros(coarse_bins, coarse_bins);
    for i in 0..centers_nm.len() {
        let Some(a) = owner[i] else { continue };
        for j in 0..centers_nm.len() {
            if let Some(b) = owner[j] {
                coarse[(a, b)] += c[(i, j)];
            }
        }
    }
    let undefined: Vec<usize> = (0..coarse_bins).filter(|&i| !(coarse[(i, i)] > 0.0)).collect();
    let rho = DMatrix::from_fn(coarse_bins, coarse_bins, |i, j| {
        if undefined.contains(&i) || undefined.contains(&j) {
            0.0
        } else if i == j {
            1.0
        } else {
            let r = coarse[(i, j)] / (coarse[(i, i)] * coarse[(j, j)]).sqrt();
            0.5 * (r + coarse[(j, i)] / (coarse[(i, i)] * coarse[(j, j)]).sqrt())
        }
    });
    Ok(CorrelationMap {
        edges_nm,
        rho,
        undefined,
    })
}

fn check_efficiency(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("efficiency must lie in (0,1] (got {eta})")))
    }
}

/// Fano factor seen through a detector of quantum efficiency `eta`.
pub fn apply_detection_efficiency(fano: f64, eta: f64) -> Result<f64> {
    check_efficiency(eta)?;
    if !(fano > 0.0) {
        return Err(Error::domain(format!("Fano factor must be positive (got {fano})")));
    }
    Ok(fano + (1.0 - eta) * (1.0 - fano))
}

/// Inverse of [`apply_detection_efficiency`].
pub fn correct_detection_efficiency(measured: f64, eta: f64) -> Result<f64> {
    check_efficiency(eta)?;
    let f = (measured - (1.0 - eta)) / eta;
    if !(f > 0.0) {
        return Err(Error::domain(format!(
            "measured value inconsistent with η = {eta}: corrected Fano factor {f:.4} is not positive"
        )));
    }
    Ok(f)
}

/// Efficiency that maps `true_fano` onto `measured`.
pub fn efficiency_from_pair(measured: f64, true_fano: f64) -> Result<f64> {
    if true_fano == 1.0 {
        return Err(Error::domain("a shot-noise-limited pair does not determine the efficiency"));
    }
    let eta = (1.0 - measured) / (1.0 - true_fano);
    check_efficiency(eta)?;
    Ok(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::from_db;
    use proptest::prelude::*;

    fn shot_noise(n: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(n))
    }

    #[test]
    fn coherent_state_is_shot_noise_for_every_filter() {
        let centers: Vec<f64> = (0..50).map(|i| 750.0 + 4.0 * i as f64).collect();
        let n: Vec<f64> = (0..50).map(|i| 1e6 * (1.0 + i as f64)).collect();
        let stats = BinStatistics::new(centers, n.clone(), shot_noise(&n)).unwrap();
        let edges: Vec<f64> = (0..36).map(|i| 760.0 + 5.0 * i as f64).collect();
        for kind in [FilterKind::LowPass, FilterKind::HighPass] {
            let curve = stats.sweep(kind, &edges).unwrap();
            for p in &curve.points {
                assert!((p.fano.unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_filter_is_a_domain_error_and_a_gap() {
        let n = vec![1.0, 2.0];
        let stats = BinStatistics::new(vec![800.0, 810.0], n.clone(), shot_noise(&n)).unwrap();
        assert!(matches!(stats.fano(&SpectralFilter::low_pass(900.0)), Err(Error::Domain(_))));
        let curve = stats.sweep(FilterKind::LowPass, &[805.0, 900.0]).unwrap();
        assert_eq!(curve.gaps().count(), 1);
        assert_eq!(curve.best().unwrap().edge_nm, 805.0);
    }

    #[test]
    fn diagonal_covariance_gives_identity_map() {
        let n = vec![3.0, 4.0, 5.0, 6.0];
        let map = correlation_map(&shot_noise(&n), &[800.0, 820.0, 840.0, 860.0], 4, 790.0, 870.0).unwrap();
        assert_eq!(map.rho, DMatrix::identity(4, 4));
        let sparse = correlation_map(&shot_noise(&n), &[800.0, 820.0, 840.0, 860.0], 8, 790.0, 870.0).unwrap();
        assert!(!sparse.undefined.is_empty());
        assert_eq!(sparse.get(sparse.undefined[0], 0), None);
        assert!(correlation_map(&shot_noise(&n), &[800.0, 820.0, 840.0, 860.0], 1, 790.0, 870.0).is_err());
    }

    #[test]
    fn detection_loss_pair() {
        let measured = from_db(-4.6);
        let truth = from_db(-10.3);
        let eta = efficiency_from_pair(measured, truth).unwrap();
        // (1 − 10^−0.46)/(1 − 10^−1.03)
        let oracle = (1.0 - 10f64.powf(-0.46)) / (1.0 - 10f64.powf(-1.03));
        assert!((eta - oracle).abs() < 1e-12);
        assert!((eta - 0.720).abs() < 0.005, "{eta}");
        let corrected = correct_detection_efficiency(measured, 0.75).unwrap();
        assert!((to_db(corrected) - -8.9).abs() < 0.1);
        assert!((corrected - 0.1289).abs() < 5e-4);
        assert_eq!(apply_detection_efficiency(0.3, 1.0).unwrap(), 0.3);
        assert!(correct_detection_efficiency(0.1, 0.5).is_err());
        assert!(apply_detection_efficiency(0.5, 1.2).is_err());
        assert!(apply_detection_efficiency(0.5, 0.0).is_err());
    }

    fn psd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed;
        let a = DMatrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        &a * a.transpose()
    }

    proptest! {
        #[test]
        fn complementary_filters_split_the_variance(seed in 0u64..1000, edge in 800.0f64..900.0) {
            let c = psd(12, seed);
            let centers: Vec<f64> = (0..12).map(|i| 780.0 + 12.0 * i as f64).collect();
            let lp = SpectralFilter::low_pass(edge).transmission(&centers);
            let hp = SpectralFilter::high_pass(edge).transmission(&centers);
            let full = vec![1.0; 12];
            let cross: f64 = (0..12).flat_map(|i| (0..12).map(move |j| (i, j))).map(|(i, j)| lp[i] * hp[j] * c[(i, j)]).sum();
            let lhs = filtered_variance(&c, &full);
            let rhs = filtered_variance(&c, &lp) + filtered_variance(&c, &hp) + 2.0 * cross;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }

        #[test]
        fn map_entries_are_bounded(seed in 0u64..1000, bins in 2usize..8) {
            let c = psd(16, seed);
            let centers: Vec<f64> = (0..16).map(|i| 750.0 + 12.5 * i as f64).collect();
            let map = correlation_map(&c, &centers, bins, 750.0, 950.0).unwrap();
            prop_assert!(map.max_abs() <= 1.0 + 1e-9);
            for i in 0..map.len() {
                for j in 0..map.len() {
                    prop_assert_eq!(map.get(i, j), map.get(j, i));
                }
            }
        }

        #[test]
        fn fano_of_psd_is_positive(seed in 0u64..1000) {
            let c = psd(8, seed) + DMatrix::identity(8, 8) * 1e-6;
            let n = vec![1.0; 8];
            prop_assert!(fano_factor(&c, &n, &n).unwrap() > 0.0);
        }

        #[test]
        fn loss_is_monotone_and_contracts(f1 in 0.01f64..3.0, f2 in 0.01f64..3.0, eta in 0.01f64..1.0) {
            let (a, b) = (apply_detection_efficiency(f1, eta).unwrap(), apply_detection_efficiency(f2, eta).unwrap());
            prop_assert_eq!(f1 < f2, a < b);
            prop_assert!((a - 1.0).abs() <= (f1 - 1.0).abs() + 1e-15);
            let back = correct_detection_efficiency(a, eta).unwrap();
            prop_assert!((back - f1).abs() < 1e-9 * f1.max(1.0) / eta);
        }
    }
}
