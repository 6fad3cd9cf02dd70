//! Winding numbers, zero modes, gap-closing conditions and parameter scans.

use std::f64::consts::PI;

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_modbkc_excitation_direct, BoundaryCondition, ModBkcParams, ModParam};
use crate::skin::{edge_weight, nhse_fraction, spatial_profile};
use crate::spectral::{eigendecompose, Spectrum};
use crate::transform::{effective_ssh_params, EffectiveSshParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindingResult {
    pub w_plus: i32,
    pub w_minus: i32,
}

/// `h±(k) = Δ̃₁ + Δ̃₂ cos k ± i Δ̃₂ sin k`.
pub fn h_pm(k: f64, eff: &EffectiveSshParams) -> (c64, c64) {
    let (s, c) = k.sin_cos();
    let i = c64::new(0.0, 1.0);
    let base = eff.dtilde1 + eff.dtilde2 * c;
    (base + i * eff.dtilde2 * s, base - i * eff.dtilde2 * s)
}

const GAP_FLOOR: f64 = 1e-10;
const RESIDUE_TOL: f64 = 0.01;

fn winding_of(values: &[c64]) -> Result<i32> {
    let min_abs = values.iter().map(|h| h.norm()).fold(f64::INFINITY, f64::min);
    if min_abs < GAP_FLOOR {
        return Err(Error::GapClosed { min_abs });
    }
    let mut total = 0.0;
    for w in values.windows(2) {
        total += (w[1] / w[0]).arg();
    }
    total += (values[0] / values[values.len() - 1]).arg();
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    let residue = (turns - rounded).abs();
    if residue >= RESIDUE_TOL {
        return Err(Error::NonIntegerWinding { residue });
    }
    Ok(rounded as i32)
}

/// Phase-unwrapped winding of `h±` over `m` uniformly spaced momenta in `[−π, π)`.
pub fn winding_numeric(eff: &EffectiveSshParams, m: usize) -> Result<WindingResult> {
    if m < 64 {
        return Err(Error::InvalidParameter {
            name: "winding grid",
            reason: format!("need at least 64 points, got {m}"),
        });
    }
    let (plus, minus): (Vec<c64>, Vec<c64>) = (0..m).map(|q| h_pm(-PI + 2.0 * PI * q as f64 / m as f64, eff)).unzip();
    Ok(WindingResult { w_plus: winding_of(&plus)?, w_minus: winding_of(&minus)? })
}

/// `(+1, −1)` when `|Δ̃₂| > |Δ̃₁|`, `(0, 0)` when `|Δ̃₂| < |Δ̃₁|`.
pub fn winding_analytic(p: &ModBkcParams) -> Result<WindingResult> {
    winding_from_moduli(&effective_ssh_params(p))
}

pub fn winding_from_moduli(eff: &EffectiveSshParams) -> Result<WindingResult> {
    let (a, b) = (eff.dtilde1.norm(), eff.dtilde2.norm());
    if (a - b).abs() <= 1e-12 * a.max(b).max(1.0) {
        return Err(Error::PhaseBoundary { modulus: a });
    }
    Ok(if b > a { WindingResult { w_plus: 1, w_minus: -1 } } else { WindingResult { w_plus: 0, w_minus: 0 } })
}

/// Eigenvalues below a modulus threshold.
///
/// Every bosonic mode has two quadrature components, and the excitation
/// matrix carries each zero mode twice (once per quadrature pairing), so
/// `count` is half the number of eigenvalues found, rounded up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroModes {
    pub count: usize,
    pub indices: Vec<usize>,
}

fn paired(indices: Vec<usize>) -> ZeroModes {
    ZeroModes { count: indices.len().div_ceil(2), indices }
}

pub fn zero_modes(s: &Spectrum, tol: f64) -> ZeroModes {
    assert!(tol > 0.0, "zero-mode tolerance must be positive");
    paired((0..s.len()).filter(|&k| s.eigenvalues[k].norm() < tol).collect())
}

/// `1e−6 · max|E|`.
pub fn default_zero_tol(s: &Spectrum) -> f64 {
    1e-6 * s.eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
}

/// Half of the clean bulk gap, `||Δ̃₂| − |Δ̃₁|| / 2`.
pub fn half_bulk_gap(eff: &EffectiveSshParams) -> f64 {
    0.5 * (eff.dtilde2.norm() - eff.dtilde1.norm()).abs()
}

/// Edge-localized eigenstates strictly inside `|E| < max_abs_e`, counted in
/// modes as in [`zero_modes`]. Used where a finite onsite term lifts the
/// modes off zero.
pub fn in_gap_edge_modes(s: &Spectrum, max_abs_e: f64, frac: f64, min_weight: f64) -> Result<ZeroModes> {
    let mut hits = Vec::new();
    for k in 0..s.len() {
        if s.eigenvalues[k].norm() < max_abs_e {
            let p = spatial_profile(&s.vector(k), s.basis)?;
            if edge_weight(&p, frac) > min_weight {
                hits.push(k);
            }
        }
    }
    Ok(paired(hits))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapClosings {
    /// `Δ₁² − J₁² = Δ₂² − J₂²`
    pub obc_type1: bool,
    /// `Δ₁² − J₁² = −(Δ₂² − J₂²)`
    pub obc_type2: bool,
    /// A Bloch band touches zero: `|Δ₁ − J₁| = |Δ₂ − J₂|` or `|Δ₁ + J₁| = |Δ₂ + J₂|`.
    pub pbc: bool,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

pub fn gap_closing_predicates(p: &ModBkcParams) -> GapClosings {
    let e1 = p.delta1 * p.delta1 - p.j1 * p.j1;
    let e2 = p.delta2 * p.delta2 - p.j2 * p.j2;
    GapClosings {
        obc_type1: near(e1, e2),
        obc_type2: near(e1, -e2),
        pbc: near((p.delta1 - p.j1).abs(), (p.delta2 - p.j2).abs())
            || near((p.delta1 + p.j1).abs(), (p.delta2 + p.j2).abs()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub param: ModParam,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let name = "axis";
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidParameter { name, reason: "non-finite bound or step".into() });
        }
        if self.max < self.min {
            return Err(Error::InvalidParameter { name, reason: format!("max {} < min {}", self.max, self.min) });
        }
        if self.max == self.min {
            return Ok(vec![self.min]);
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidParameter { name, reason: format!("step must be positive, got {}", self.step) });
        }
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| self.min + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub bc: BoundaryCondition,
    /// Absolute zero-mode threshold; `None` uses `1e−6 · max|E|` per point.
    pub zero_tol: Option<f64>,
    pub edge_frac: f64,
    pub nhse_threshold: f64,
    /// Minimum edge weight for in-gap edge modes.
    pub edge_mode_weight: f64,
    pub winding_grid: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            bc: BoundaryCondition::Open,
            zero_tol: None,
            edge_frac: 0.1,
            nhse_threshold: 0.9,
            edge_mode_weight: 0.9,
            winding_grid: 1024,
        }
    }
}

/// Numeric winding, or why it is undefined at this point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindingStatus {
    Defined(WindingResult),
    Gapless,
    NonInteger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub zero_gap: f64,
    pub zero_modes: usize,
    pub zero_mode_indices: Vec<usize>,
    pub edge_modes: usize,
    pub winding: WindingStatus,
    pub winding_analytic: Option<WindingResult>,
    pub nhse_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub coords: Vec<f64>,
    pub params: ModBkcParams,
    pub record: std::result::Result<PointRecord, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub axes: Vec<AxisSpec>,
    pub shape: Vec<usize>,
    /// Row-major over the axes: the last axis varies fastest.
    pub points: Vec<PhasePoint>,
}

pub const MAX_SCAN_POINTS: usize = 1_000_000;

pub fn analyze_point(p: &ModBkcParams, opts: &ScanOptions) -> Result<PointRecord> {
    let m = build_modbkc_excitation_direct(p, opts.bc)?;
    let s = eigendecompose(&m)?;
    analyze_spectrum(p, &s, opts)
}

pub fn analyze_spectrum(p: &ModBkcParams, s: &Spectrum, opts: &ScanOptions) -> Result<PointRecord> {
    let tol = opts.zero_tol.unwrap_or_else(|| default_zero_tol(s));
    let zm = zero_modes(s, tol);
    let eff = effective_ssh_params(p);
    let edge = in_gap_edge_modes(s, half_bulk_gap(&eff), opts.edge_frac, opts.edge_mode_weight)?;
    let winding = match winding_numeric(&eff, opts.winding_grid) {
        Ok(w) => WindingStatus::Defined(w),
        Err(Error::GapClosed { .. }) => WindingStatus::Gapless,
        Err(Error::NonIntegerWinding { .. }) => WindingStatus::NonInteger,
        Err(e) => return Err(e),
    };
    Ok(PointRecord {
        zero_gap: crate::spectral::zero_gap(s)?,
        zero_modes: zm.count,
        zero_mode_indices: zm.indices,
        edge_modes: edge.count,
        winding,
        winding_analytic: winding_analytic(p).ok(),
        nhse_fraction: nhse_fraction(s, opts.edge_frac, opts.nhse_threshold)?,
    })
}

/// Evaluates every grid point independently; failures are kept per point.
pub fn phase_scan(base: &ModBkcParams, axes: &[AxisSpec], opts: &ScanOptions) -> Result<PhaseDiagram> {
    base.validate()?;
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::InvalidParameter { name: "axes", reason: format!("need 1 or 2 axes, got {}", axes.len()) });
    }
    let values: Vec<Vec<f64>> = axes.iter().map(|a| a.values()).collect::<Result<_>>()?;
    let shape: Vec<usize> = values.iter().map(|v| v.len()).collect();
    let total: usize = shape.iter().product();
    if total > MAX_SCAN_POINTS {
        return Err(Error::InvalidParameter {
            name: "axes",
            reason: format!("{total} grid points exceed {MAX_SCAN_POINTS}"),
        });
    }
    let points = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut coords = vec![0.0; axes.len()];
            for d in (0..axes.len()).rev() {
                coords[d] = values[d][rest % shape[d]];
                rest /= shape[d];
            }
            let mut p = *base;
            for (a, &v) in axes.iter().zip(&coords) {
                a.param.set(&mut p, v);
            }
            let record = analyze_point(&p, opts).map_err(|e| e.to_string());
            PhasePoint { coords, params: p, record }
        })
        .collect();
    Ok(PhaseDiagram { axes: axes.to_vec(), shape, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eff(a: f64, b: f64) -> EffectiveSshParams {
        EffectiveSshParams { dtilde1: c64::new(a, 0.0), dtilde2: c64::new(b, 0.0) }
    }

    const NONTRIVIAL: WindingResult = WindingResult { w_plus: 1, w_minus: -1 };
    const TRIVIAL: WindingResult = WindingResult { w_plus: 0, w_minus: 0 };

    #[test]
    fn h_values() {
        let (a, b) = h_pm(0.0, &eff(1.0, 2.0));
        assert!((a - c64::new(3.0, 0.0)).norm() < 1e-15 && (b - c64::new(3.0, 0.0)).norm() < 1e-15);
        let (a, b) = h_pm(PI, &eff(1.0, 2.0));
        assert!((a - c64::new(-1.0, 0.0)).norm() < 1e-15 && (b - c64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn numeric_windings() {
        assert_eq!(winding_numeric(&eff(0.0, 1.0), 1024).unwrap(), NONTRIVIAL);
        assert_eq!(winding_numeric(&eff(2.0, 1.0), 1024).unwrap(), TRIVIAL);
        assert_eq!(winding_numeric(&eff(0.5, 1.0), 1024).unwrap(), NONTRIVIAL);
        assert!(matches!(winding_numeric(&eff(1.0, 1.0), 1024), Err(Error::GapClosed { .. })));
        assert!(winding_numeric(&eff(0.5, 1.0), 32).is_err());
    }

    #[test]
    fn analytic_windings() {
        let p = |j1, j2, d1, d2| ModBkcParams::new(j1, j2, d1, d2, 0.0, 10).unwrap();
        assert_eq!(winding_analytic(&p(0.0, 0.0, 1.0, 2.0)).unwrap(), NONTRIVIAL);
        assert_eq!(winding_analytic(&p(1.2, 0.0, 1.5, 1.0)).unwrap(), NONTRIVIAL);
        assert_eq!(winding_analytic(&p(1.0, 0.0, 1.5, 1.0)).unwrap(), TRIVIAL);
        assert_eq!(winding_analytic(&p(2.2, 1.0, 2.1, 1.5)).unwrap(), NONTRIVIAL);
        assert!(matches!(winding_analytic(&p(0.0, 0.0, 1.0, 1.0)), Err(Error::PhaseBoundary { .. })));
    }

    #[test]
    fn gap_closings() {
        let p = |j1: f64, j2: f64, d1, d2| ModBkcParams::new(j1, j2, d1, d2, 0.0, 10).unwrap();
        assert!(gap_closing_predicates(&p(1.25f64.sqrt(), 0.0, 1.5, 1.0)).obc_type1);
        assert!(gap_closing_predicates(&p(0.0, 3.25f64.sqrt(), 1.5, 1.0)).obc_type2);
        assert!(gap_closing_predicates(&p(2.5, 0.0, 1.5, 1.0)).pbc);
        let g = gap_closing_predicates(&p(0.3, 0.0, 1.5, 1.0));
        assert!(!g.obc_type1 && !g.obc_type2 && !g.pbc);
    }

    #[test]
    fn axis_values() {
        let a = AxisSpec { param: ModParam::J1, min: 0.0, max: 2.2, step: 0.02 };
        let v = a.values().unwrap();
        assert_eq!(v.len(), 111);
        assert!((v[110] - 2.2).abs() < 1e-12);
        let a = AxisSpec { param: ModParam::J1, min: 1.0, max: 1.0, step: 0.0 };
        assert_eq!(a.values().unwrap(), vec![1.0]);
    }

    #[test]
    fn degenerate_axis_gives_single_point() {
        let base = ModBkcParams::new(0.0, 0.0, 1.0, 1.5, 0.0, 6).unwrap();
        let axes = [AxisSpec { param: ModParam::J1, min: 0.5, max: 0.5, step: 0.1 }];
        let d = phase_scan(&base, &axes, &ScanOptions::default()).unwrap();
        assert_eq!(d.shape, vec![1]);
        assert_eq!(d.points.len(), 1);
        assert_eq!(d.points[0].params.j1, 0.5);
    }
}
