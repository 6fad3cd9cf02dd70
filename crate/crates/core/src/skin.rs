//! Spatial profiles of eigenstates and edge-localization diagnostics.

use faer::c64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Basis;
use crate::spectral::Spectrum;

/// Occupation probability per flat basis index, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialProfile {
    pub prob: Vec<f64>,
    pub basis: Basis,
}

impl SpatialProfile {
    /// Probability summed over the quadratures (and sublattices) of each cell.
    pub fn per_cell(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.basis.cells()];
        for (k, p) in self.prob.iter().enumerate() {
            out[self.basis.cell_of(k)] += p;
        }
        out
    }
}

pub fn spatial_profile(v: &[c64], basis: Basis) -> Result<SpatialProfile> {
    if v.len() != basis.dim() {
        return Err(Error::Dimension(format!("vector of length {} for basis of {}", v.len(), basis.dim())));
    }
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if !(norm2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(SpatialProfile { prob: v.iter().map(|z| z.norm_sqr() / norm2).collect(), basis })
}

/// Profiles of every eigenvector, in eigenvalue order.
pub fn profiles(s: &Spectrum) -> Result<Vec<SpatialProfile>> {
    (0..s.len()).into_par_iter().map(|k| spatial_profile(&s.vector(k), s.basis)).collect()
}

/// Number of cells at each end counted as "edge" for a given fraction.
pub fn edge_cells(n: usize, frac: f64) -> usize {
    ((frac * n as f64 - 1e-9).ceil() as usize).min(n)
}

/// Weight in the first and last `⌈frac·N⌉` cells.
pub fn edge_weight(p: &SpatialProfile, frac: f64) -> f64 {
    assert!(frac > 0.0 && frac <= 0.5, "edge fraction {frac} outside (0, 0.5]");
    let n = p.basis.cells();
    let m = edge_cells(n, frac);
    p.prob
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let j = p.basis.cell_of(*k);
            j < m || j >= n - m
        })
        .map(|(_, w)| w)
        .sum()
}

/// Fraction of eigenstates whose edge weight exceeds `threshold`.
pub fn nhse_fraction(s: &Spectrum, frac: f64, threshold: f64) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let hits = profiles(s)?.iter().filter(|p| edge_weight(p, frac) > threshold).count();
    Ok(hits as f64 / s.len() as f64)
}

/// Expected cell index.
pub fn mean_position(p: &SpatialProfile) -> f64 {
    p.prob.iter().enumerate().map(|(k, w)| w * p.basis.cell_of(k) as f64).sum()
}
