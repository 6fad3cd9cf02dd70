//! Seeded site disorder and ensemble averages.
//!
//! Every random number is keyed by `(seed, realization, parameter, site)`, so
//! any single entry can be regenerated without drawing the others and the
//! result does not depend on thread scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::transform::disordered_similarity;

use crate::error::{Error, Result};
use crate::model::{
    build_modbkc_excitation_direct_fields, check_finite, check_n, BoundaryCondition, ModBkcParams, ModParam,
};
use crate::skin::{nhse_fraction, profiles};
use crate::spectral::{eigendecompose, zero_gap};
use crate::topology::{default_zero_tol, in_gap_edge_modes, zero_modes};

/// Per-cell (`j1`, `delta1`, `omega_a`, `omega_b`) and per-bond (`j2`,
/// `delta2`, bond j joins cells j and j+1) parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteFields {
    pub j1: Vec<f64>,
    pub delta1: Vec<f64>,
    pub omega_a: Vec<f64>,
    pub omega_b: Vec<f64>,
    pub j2: Vec<f64>,
    pub delta2: Vec<f64>,
}

impl SiteFields {
    pub fn uniform(p: &ModBkcParams) -> Self {
        let n = p.n;
        Self {
            j1: vec![p.j1; n],
            delta1: vec![p.delta1; n],
            omega_a: vec![p.omega; n],
            omega_b: vec![p.omega; n],
            j2: vec![p.j2; n],
            delta2: vec![p.delta2; n],
        }
    }

    pub fn n(&self) -> usize {
        self.j1.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        check_n(n)?;
        let fields: [(&'static str, &Vec<f64>); 6] = [
            ("J1", &self.j1),
            ("Delta1", &self.delta1),
            ("omega_A", &self.omega_a),
            ("omega_B", &self.omega_b),
            ("J2", &self.j2),
            ("Delta2", &self.delta2),
        ];
        for (name, v) in fields {
            if v.len() != n {
                return Err(Error::LengthMismatch { field: name, got: v.len(), expected: n });
            }
            for &x in v.iter() {
                check_finite(name, x)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// Relative strengths `W_P`; missing parameters are not disordered.
    pub strengths: BTreeMap<ModParam, f64>,
    pub seed: u64,
    pub realizations: usize,
}

impl DisorderSpec {
    pub fn new(strengths: BTreeMap<ModParam, f64>, seed: u64, realizations: usize) -> Result<Self> {
        let s = Self { strengths, seed, realizations };
        s.validate()?;
        Ok(s)
    }

    /// Same strength on all five parameters.
    pub fn all(w: f64, seed: u64, realizations: usize) -> Result<Self> {
        Self::new(ModParam::ALL.iter().map(|&p| (p, w)).collect(), seed, realizations)
    }

    /// Strengths keyed by parameter name; unknown names are rejected.
    pub fn from_names<'a>(
        named: impl IntoIterator<Item = (&'a str, f64)>,
        seed: u64,
        realizations: usize,
    ) -> Result<Self> {
        let mut strengths = BTreeMap::new();
        for (name, w) in named {
            let p = ModParam::from_name(name).ok_or_else(|| Error::InvalidParameter {
                name: "disorder strength",
                reason: format!("unknown parameter {name:?}"),
            })?;
            strengths.insert(p, w);
        }
        Self::new(strengths, seed, realizations)
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidParameter { name: "realizations", reason: "need at least one".into() });
        }
        for (p, &w) in &self.strengths {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "disorder strength",
                    reason: format!("{} = {w}", p.name()),
                });
            }
        }
        Ok(())
    }

    pub fn strength(&self, p: ModParam) -> f64 {
        self.strengths.get(&p).copied().unwrap_or(0.0)
    }
}

/// Stream identifiers; ω has one per sublattice.
const STREAM_J1: u64 = 1;
const STREAM_J2: u64 = 2;
const STREAM_DELTA1: u64 = 3;
const STREAM_DELTA2: u64 = 4;
const STREAM_OMEGA_A: u64 = 5;
const STREAM_OMEGA_B: u64 = 6;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key for one random draw.
pub fn draw_key(seed: u64, realization: u64, stream: u64, site: u64) -> u64 {
    let mut k = splitmix(seed);
    for part in [realization, stream, site] {
        k = splitmix(k ^ splitmix(part));
    }
    k
}

/// Uniform number in `[0, 1)` for one key.
pub fn unit_draw(key: u64) -> f64 {
    ChaCha8Rng::seed_from_u64(key).gen::<f64>()
}

fn sample(base: f64, w: f64, key: u64) -> f64 {
    if w == 0.0 {
        return base;
    }
    base * (1.0 + w * (2.0 * unit_draw(key) - 1.0))
}

/// One realization: every entry drawn uniformly from `[P(1−W), P(1+W)]`.
pub fn sample_site_fields(base: &ModBkcParams, spec: &DisorderSpec, realization: usize) -> Result<SiteFields> {
    base.validate()?;
    spec.validate()?;
    if realization >= spec.realizations {
        return Err(Error::InvalidParameter {
            name: "realization",
            reason: format!("{realization} out of range for {} realizations", spec.realizations),
        });
    }
    let r = realization as u64;
    let draw = |param: ModParam, stream: u64| -> Vec<f64> {
        let (p, w) = (param.get(base), spec.strength(param));
        (0..base.n).map(|j| sample(p, w, draw_key(spec.seed, r, stream, j as u64))).collect()
    };
    Ok(SiteFields {
        j1: draw(ModParam::J1, STREAM_J1),
        delta1: draw(ModParam::Delta1, STREAM_DELTA1),
        omega_a: draw(ModParam::Omega, STREAM_OMEGA_A),
        omega_b: draw(ModParam::Omega, STREAM_OMEGA_B),
        j2: draw(ModParam::J2, STREAM_J2),
        delta2: draw(ModParam::Delta2, STREAM_DELTA2),
    })
}

/// Which vector-valued observables to keep; scalar ones are always computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub bc: BoundaryCondition,
    /// Absolute zero-mode threshold; `None` uses `1e−6 · max|E|` per realization.
    pub zero_tol: Option<f64>,
    pub edge_frac: f64,
    pub nhse_threshold: f64,
    /// In-gap edge modes: states with `|E|` below this and edge weight above `edge_mode_weight`.
    pub edge_mode_max_e: f64,
    pub edge_mode_weight: f64,
    pub keep_abs_spectrum: bool,
    pub keep_state_profiles: bool,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            bc: BoundaryCondition::Open,
            zero_tol: None,
            edge_frac: 0.1,
            nhse_threshold: 0.9,
            edge_mode_max_e: 0.0,
            edge_mode_weight: 0.9,
            keep_abs_spectrum: false,
            keep_state_profiles: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub realization: usize,
    pub zero_gap: f64,
    pub zero_modes: usize,
    pub edge_modes: usize,
    pub nhse_fraction: f64,
    /// `|E|` sorted ascending.
    pub abs_spectrum: Option<Vec<f64>>,
    /// Occupation per cell of each eigenstate, in eigenvalue order.
    pub state_profiles: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary { mean: f64::NAN, std: f64::NAN, n };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std =
        if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    Summary { mean, std, n }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub base: ModBkcParams,
    pub seed: u64,
    pub records: Vec<RealizationRecord>,
    pub failures: Vec<(usize, String)>,
    pub zero_gap: Summary,
    pub zero_modes: Summary,
    pub edge_modes: Summary,
    pub nhse_fraction: Summary,
    pub abs_spectrum: Option<Vec<Summary>>,
    /// Per-cell occupation of the k-th eigenstate (eigenvalue order),
    /// averaged over realizations.
    pub state_profiles: Option<Vec<Vec<f64>>>,
}

pub fn realization_observables(
    f: &SiteFields,
    realization: usize,
    opts: &EnsembleOptions,
) -> Result<RealizationRecord> {
    let m = build_modbkc_excitation_direct_fields(f, opts.bc)?;
    let s = eigendecompose(&m)?;
    let zm = zero_modes(&s, opts.zero_tol.unwrap_or_else(|| default_zero_tol(&s)));
    let edge_modes = if opts.edge_mode_max_e > 0.0 {
        in_gap_edge_modes(&s, opts.edge_mode_max_e, opts.edge_frac, opts.edge_mode_weight)?.count
    } else {
        0
    };
    let abs_spectrum = opts.keep_abs_spectrum.then(|| {
        let mut a: Vec<f64> = s.eigenvalues.iter().map(|e| e.norm()).collect();
        a.sort_by(f64::total_cmp);
        a
    });
    let state_profiles =
        if opts.keep_state_profiles { Some(profiles(&s)?.iter().map(|p| p.per_cell()).collect()) } else { None };
    Ok(RealizationRecord {
        realization,
        zero_gap: zero_gap(&s)?,
        zero_modes: zm.count,
        edge_modes,
        nhse_fraction: nhse_fraction(&s, opts.edge_frac, opts.nhse_threshold)?,
        abs_spectrum,
        state_profiles,
    })
}

fn columnwise(rows: &[&Vec<f64>]) -> Vec<Summary> {
    let width = rows.first().map_or(0, |r| r.len());
    (0..width).map(|k| summarize(&rows.iter().map(|r| r[k]).collect::<Vec<_>>())).collect()
}

/// Runs all realizations in parallel. Failed realizations are listed in
/// `failures` and left out of the averages; it is an error only if all fail.
pub fn ensemble_observables(
    base: &ModBkcParams,
    spec: &DisorderSpec,
    opts: &EnsembleOptions,
) -> Result<EnsembleResult> {
    base.validate()?;
    spec.validate()?;
    let outcomes: Vec<(usize, Result<RealizationRecord>)> = (0..spec.realizations)
        .into_par_iter()
        .map(|r| (r, sample_site_fields(base, spec, r).and_then(|f| realization_observables(&f, r, opts))))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, out) in outcomes {
        match out {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    if records.is_empty() {
        return Err(Error::AllRealizationsFailed(spec.realizations));
    }
    let col = |f: fn(&RealizationRecord) -> f64| summarize(&records.iter().map(f).collect::<Vec<_>>());
    let abs_spectrum = opts
        .keep_abs_spectrum
        .then(|| columnwise(&records.iter().filter_map(|r| r.abs_spectrum.as_ref()).collect::<Vec<_>>()));
    let state_profiles = opts.keep_state_profiles.then(|| {
        let all: Vec<&Vec<Vec<f64>>> = records.iter().filter_map(|r| r.state_profiles.as_ref()).collect();
        let mut acc = all[0].iter().map(|row| vec![0.0; row.len()]).collect::<Vec<_>>();
        for rows in &all {
            for (a, row) in acc.iter_mut().zip(rows.iter()) {
                a.iter_mut().zip(row).for_each(|(x, y)| *x += y);
            }
        }
        acc.iter_mut().flatten().for_each(|x| *x /= all.len() as f64);
        acc
    });
    Ok(EnsembleResult {
        base: *base,
        seed: spec.seed,
        zero_gap: col(|r| r.zero_gap),
        zero_modes: col(|r| r.zero_modes as f64),
        edge_modes: col(|r| r.edge_modes as f64),
        nhse_fraction: col(|r| r.nhse_fraction),
        abs_spectrum,
        state_profiles,
        records,
        failures,
    })
}
