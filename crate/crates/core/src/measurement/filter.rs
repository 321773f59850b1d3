use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// Passes wavelengths at or beyond the edge (the red side).
    LowPass,
    /// Passes wavelengths short of the edge.
    HighPass,
    Band,
    Mask,
}

impl FilterKind {
    pub fn label(&self) -> &'static str {
        match self {
            FilterKind::LowPass => "low_pass",
            FilterKind::HighPass => "high_pass",
            FilterKind::Band => "band",
            FilterKind::Mask => "mask",
        }
    }
}

/// Pass band over wavelength. Knife-edge kinds are hard 0/1 masks; the bin
/// sitting exactly on a shared edge goes to the low-pass side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    kind: FilterKind,
    edges_nm: Vec<f64>,
    /// `(wavelength, transmission)` knots for masks, linear in between, zero outside.
    knots: Vec<(f64, f64)>,
}

impl SpectralFilter {
    pub fn low_pass(edge_nm: f64) -> Self {
        SpectralFilter {
            kind: FilterKind::LowPass,
            edges_nm: vec![edge_nm],
            knots: Vec::new(),
        }
    }

    pub fn high_pass(edge_nm: f64) -> Self {
        SpectralFilter {
            kind: FilterKind::HighPass,
            edges_nm: vec![edge_nm],
            knots: Vec::new(),
        }
    }

    /// Passes `lo ≤ λ < hi`.
    pub fn band(lo_nm: f64, hi_nm: f64) -> Result<Self> {
        if !(lo_nm < hi_nm) {
            return Err(Error::config(format!(
                "band filter needs lo < hi (got {lo_nm} and {hi_nm} nm)"
            )));
        }
        Ok(SpectralFilter {
            kind: FilterKind::Band,
            edges_nm: vec![lo_nm, hi_nm],
            knots: Vec::new(),
        })
    }

    pub fn mask(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::config("mask filter needs at least one knot"));
        }
        if knots.iter().any(|&(l, t)| !(l > 0.0) || !(0.0..=1.0).contains(&t)) {
            return Err(Error::config("mask knots need positive wavelengths and transmissions in [0, 1]"));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let edges_nm = vec![knots[0].0, knots[knots.len() - 1].0];
        Ok(SpectralFilter {
            kind: FilterKind::Mask,
            edges_nm,
            knots,
        })
    }

    /// Either knife-edge kind at `edge_nm`.
    pub fn knife_edge(kind: FilterKind, edge_nm: f64) -> Result<Self> {
        match kind {
            FilterKind::LowPass => Ok(Self::low_pass(edge_nm)),
            FilterKind::HighPass => Ok(Self::high_pass(edge_nm)),
            other => Err(Error::config(format!(
                "{} is not a knife-edge filter",
                other.label()
            ))),
        }
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn edges_nm(&self) -> &[f64] {
        &self.edges_nm
    }

    pub fn transmission_at(&self, lambda_nm: f64) -> f64 {
        match self.kind {
            FilterKind::LowPass => (lambda_nm >= self.edges_nm[0]) as u8 as f64,
            FilterKind::HighPass => (lambda_nm < self.edges_nm[0]) as u8 as f64,
            FilterKind::Band => {
                (lambda_nm >= self.edges_nm[0] && lambda_nm < self.edges_nm[1]) as u8 as f64
            }
            FilterKind::Mask => {
                let k = &self.knots;
                if k.len() == 1 {
                    return if lambda_nm == k[0].0 { k[0].1 } else { 0.0 };
                }
                if lambda_nm < k[0].0 || lambda_nm > k[k.len() - 1].0 {
                    return 0.0;
                }
                let i = k.partition_point(|p| p.0 <= lambda_nm).clamp(1, k.len() - 1);
                let (l0, t0) = k[i - 1];
                let (l1, t1) = k[i];
                if l1 == l0 {
                    t1
                } else {
                    t0 + (t1 - t0) * (lambda_nm - l0) / (l1 - l0)
                }
            }
        }
    }

    /// Per-bin transmission for bins centred at `centers_nm`.
    pub fn transmission(&self, centers_nm: &[f64]) -> Vec<f64> {
        centers_nm.iter().map(|&l| self.transmission_at(l)).collect()
    }

    /// Transmission after a detection pre-mask.
    pub fn transmission_within(&self, centers_nm: &[f64], detection: Option<&SpectralFilter>) -> Vec<f64> {
        let mut f = self.transmission(centers_nm);
        if let Some(d) = detection {
            for (x, l) in f.iter_mut().zip(centers_nm) {
                *x *= d.transmission_at(*l);
            }
        }
        f
    }
}
