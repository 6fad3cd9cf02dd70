//! Diagonal similarity transforms that map the excitation matrices onto
//! (anti-)Hermitian chains.
//!
//! Each transform is built by walking along the chain and fixing the ratio of
//! neighbouring diagonal entries so that every coupling of `A⁻¹MA` takes its
//! target value. For `Δ > |J|` this reproduces the familiar powers
//! `r^{±j/2}`; outside that range it selects the branch of `r^{1/2}` that maps
//! onto the principal root `√(Δ² − J²)`, so the image is always the same
//! matrix written in terms of the principal roots.

use faer::{c64, Mat};

use crate::disorder::SiteFields;
use crate::error::{Error, Result};
use crate::model::{max_abs, Basis, BkcParams, BoundaryCondition, ExcitationMatrix, ModBkcParams};

const SINGULAR_TOL: f64 = 1e-12;

/// Diagonal matrix stored as the complex logarithm of each entry.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    pub log_scale: Vec<c64>,
    pub basis: Basis,
    /// Ratios `(Δ+J)/(Δ−J)` behind the transform, by name.
    pub r_values: Vec<(&'static str, Vec<f64>)>,
}

impl SimilarityMatrix {
    pub fn identity(basis: Basis) -> Self {
        Self { log_scale: vec![c64::new(0.0, 0.0); basis.dim()], basis, r_values: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.log_scale.len()
    }

    /// Diagonal entry; may overflow to infinity for long chains.
    pub fn entry(&self, k: usize) -> c64 {
        self.log_scale[k].exp()
    }

    pub fn diagonal(&self) -> Vec<c64> {
        (0..self.dim()).map(|k| self.entry(k)).collect()
    }

    /// `log10(max|a| / min|a|)`, finite even when the ratio itself is not.
    pub fn log10_condition(&self) -> f64 {
        let hi = self.log_scale.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let lo = self.log_scale.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
        (hi - lo) / std::f64::consts::LN_10
    }

    pub fn condition_number(&self) -> f64 {
        10f64.powf(self.log10_condition())
    }

    /// Entrywise product of two diagonals.
    pub fn compose(&self, other: &SimilarityMatrix) -> Result<SimilarityMatrix> {
        if self.basis != other.basis {
            return Err(Error::Dimension(format!("{:?} vs {:?}", self.basis, other.basis)));
        }
        let mut r_values = self.r_values.clone();
        r_values.extend(other.r_values.iter().cloned());
        Ok(SimilarityMatrix {
            log_scale: self.log_scale.iter().zip(&other.log_scale).map(|(a, b)| a + b).collect(),
            basis: self.basis,
            r_values,
        })
    }

    /// `A⁻¹ M A`, each entry formed in log space.
    pub fn conjugate(&self, m: &ExcitationMatrix) -> Result<ExcitationMatrix> {
        if m.basis != self.basis {
            return Err(Error::Dimension(format!("{:?} vs {:?}", m.basis, self.basis)));
        }
        let d = m.dim();
        let out = Mat::from_fn(d, d, |i, j| {
            let v = m.m[(i, j)];
            if v.norm() == 0.0 {
                v
            } else {
                v * (self.log_scale[j] - self.log_scale[i]).exp()
            }
        });
        ExcitationMatrix::new(out, m.basis, m.bc)
    }
}

/// `√(Δᵢ² − Jᵢ²)` for both coupling types, principal branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSshParams {
    pub dtilde1: c64,
    pub dtilde2: c64,
}

pub fn dtilde(delta: f64, j: f64) -> c64 {
    c64::new(delta * delta - j * j, 0.0).sqrt()
}

pub fn effective_ssh_params(p: &ModBkcParams) -> EffectiveSshParams {
    EffectiveSshParams { dtilde1: dtilde(p.delta1, p.j1), dtilde2: dtilde(p.delta2, p.j2) }
}

fn ratio(delta: f64, j: f64) -> f64 {
    (delta + j) / (delta - j)
}

fn guard(delta: f64, j: f64, what: &str) -> Result<()> {
    if (delta - j).abs() < SINGULAR_TOL || (delta + j).abs() < SINGULAR_TOL {
        return Err(Error::SingularTransform(format!(
            "{what}: Δ = {delta}, J = {j} makes (Δ+J)/(Δ−J) zero or infinite"
        )));
    }
    Ok(())
}

fn ln(z: c64) -> c64 {
    z.ln()
}

/// Plain chain: maps `M` (ω = 0, open) onto
/// `sgn(Δ0) √(J0² − Δ0²) σ0 ⊗ (−i|j⟩⟨j+1| + i|j+1⟩⟨j|)`.
///
/// Neighbouring entries differ by `c/(J0+Δ0)` on x and `c/(J0−Δ0)` on p,
/// i.e. `i r^{−1/2}` and `−i r^{1/2}` for `0 < J0 < Δ0`.
pub fn hatano_nelson_a(p: &BkcParams) -> Result<SimilarityMatrix> {
    p.validate()?;
    guard(p.delta0, p.j0, "hatano-nelson transform")?;
    let c = hatano_nelson_coupling(p);
    let step_x = ln(c / (p.j0 + p.delta0));
    let step_p = ln(c / (p.j0 - p.delta0));
    let basis = Basis::Bkc { n: p.n };
    let mut log_scale = Vec::with_capacity(basis.dim());
    for j in 0..p.n {
        log_scale.push(step_x * j as f64);
        log_scale.push(step_p * j as f64);
    }
    Ok(SimilarityMatrix { log_scale, basis, r_values: vec![("r", vec![ratio(p.delta0, p.j0)])] })
}

/// `sgn(Δ0) √(J0² − Δ0²)`.
pub fn hatano_nelson_coupling(p: &BkcParams) -> c64 {
    c64::new(p.j0 * p.j0 - p.delta0 * p.delta0, 0.0).sqrt() * p.delta0.signum()
}

/// Open-chain target `c σ0 ⊗ (−i|j⟩⟨j+1| + i|j+1⟩⟨j|)`.
pub fn hatano_nelson_target(p: &BkcParams) -> Result<ExcitationMatrix> {
    p.validate()?;
    let c = hatano_nelson_coupling(p);
    let basis = Basis::Bkc { n: p.n };
    let d = basis.dim();
    let mut m = Mat::<c64>::zeros(d, d);
    let i = c64::new(0.0, 1.0);
    for j in 0..p.n - 1 {
        for s in 0..2 {
            m[(2 * j + s, 2 * j + 2 + s)] = -i * c;
            m[(2 * j + 2 + s, 2 * j + s)] = i * c;
        }
    }
    ExcitationMatrix::new(m, basis, BoundaryCondition::Open)
}

/// Per-cell step factors along the two quadrature chains
/// `x_A → p_B → x_A'` and `p_A → x_B → p_A'`.
struct ChainSteps {
    /// p_B / x_A and x_B / p_A within cell j.
    intra: Vec<(c64, c64)>,
    /// x_A' / p_B and p_A' / x_B across bond j.
    inter: Vec<(c64, c64)>,
}

fn intra_steps(delta: f64, j: f64) -> (c64, c64) {
    let t = dtilde(delta, j);
    (ln(t / (delta - j)), ln(t / (delta + j)))
}

fn inter_steps(delta: f64, j: f64) -> (c64, c64) {
    let t = dtilde(delta, j);
    (ln(t / (delta + j)), ln(t / (delta - j)))
}

fn chain_scale(n: usize, steps: &ChainSteps) -> Vec<c64> {
    let mut out = vec![c64::new(0.0, 0.0); 4 * n];
    let (mut xa, mut pa) = (c64::new(0.0, 0.0), c64::new(0.0, 0.0));
    for j in 0..n {
        let pb = xa + steps.intra[j].0;
        let xb = pa + steps.intra[j].1;
        out[4 * j] = xa;
        out[4 * j + 1] = pa;
        out[4 * j + 2] = xb;
        out[4 * j + 3] = pb;
        if j + 1 < n {
            xa = pb + steps.inter[j].0;
            pa = xb + steps.inter[j].1;
        }
    }
    out
}

fn zero_steps(n: usize) -> Vec<(c64, c64)> {
    vec![(c64::new(0.0, 0.0), c64::new(0.0, 0.0)); n]
}

/// Removes the intracell non-reciprocity: intracell couplings become `iΔ̃₁ σx`.
pub fn a1_prime(p: &ModBkcParams) -> Result<SimilarityMatrix> {
    p.validate()?;
    guard(p.delta1, p.j1, "intracell transform")?;
    let steps = ChainSteps { intra: vec![intra_steps(p.delta1, p.j1); p.n], inter: zero_steps(p.n) };
    Ok(SimilarityMatrix {
        log_scale: chain_scale(p.n, &steps),
        basis: Basis::ModBkc { n: p.n },
        r_values: vec![("r1", vec![ratio(p.delta1, p.j1)])],
    })
}

/// Removes the intercell non-reciprocity: intercell couplings become `iΔ̃₂ σx`.
pub fn a2_prime(p: &ModBkcParams) -> Result<SimilarityMatrix> {
    p.validate()?;
    guard(p.delta2, p.j2, "intercell transform")?;
    let steps = ChainSteps { intra: zero_steps(p.n), inter: vec![inter_steps(p.delta2, p.j2); p.n] };
    Ok(SimilarityMatrix {
        log_scale: chain_scale(p.n, &steps),
        basis: Basis::ModBkc { n: p.n },
        r_values: vec![("r2", vec![ratio(p.delta2, p.j2)])],
    })
}

pub fn a_combined(p: &ModBkcParams) -> Result<SimilarityMatrix> {
    a1_prime(p)?.compose(&a2_prime(p)?)
}

/// Site-resolved version of [`a_combined`] for an open chain. Bond `N−1`
/// is not part of an open chain and is not checked.
pub fn disordered_similarity(f: &SiteFields) -> Result<SimilarityMatrix> {
    f.validate()?;
    let n = f.n();
    let mut intra = Vec::with_capacity(n);
    let mut inter = Vec::with_capacity(n);
    for j in 0..n {
        guard(f.delta1[j], f.j1[j], &format!("intracell transform at cell {j}"))?;
        intra.push(intra_steps(f.delta1[j], f.j1[j]));
        if j + 1 < n {
            guard(f.delta2[j], f.j2[j], &format!("intercell transform at bond {j}"))?;
            inter.push(inter_steps(f.delta2[j], f.j2[j]));
        } else {
            inter.push((c64::new(0.0, 0.0), c64::new(0.0, 0.0)));
        }
    }
    let r1 = (0..n).map(|j| ratio(f.delta1[j], f.j1[j])).collect();
    let r2 = (0..n - 1).map(|j| ratio(f.delta2[j], f.j2[j])).collect();
    Ok(SimilarityMatrix {
        log_scale: chain_scale(n, &ChainSteps { intra, inter }),
        basis: Basis::ModBkc { n },
        r_values: vec![("r1", r1), ("r2", r2)],
    })
}

/// `iσx ⊗ SSH` with per-cell intracell couplings `t1[j]` and per-bond
/// intercell couplings `t2[j]` (cell j to j+1).
pub fn ssh_target_fields(t1: &[c64], t2: &[c64], bc: BoundaryCondition) -> Result<ExcitationMatrix> {
    let n = t1.len();
    if t2.len() != n {
        return Err(Error::LengthMismatch { field: "t2", got: t2.len(), expected: n });
    }
    let basis = Basis::ModBkc { n };
    let d = basis.dim();
    let mut m = Mat::<c64>::zeros(d, d);
    let i = c64::new(0.0, 1.0);
    let mut link = |a: usize, b: usize, t: c64| {
        // iσx couples x of one site to p of the other and vice versa.
        for (s, u) in [(0, 1), (1, 0)] {
            m[(a + s, b + u)] += i * t;
            m[(b + u, a + s)] += i * t;
        }
    };
    for j in 0..n {
        link(4 * j, 4 * j + 2, t1[j]);
    }
    let bonds = match bc {
        BoundaryCondition::Open => n - 1,
        BoundaryCondition::Periodic => n,
    };
    for j in 0..bonds {
        link(4 * j + 2, 4 * ((j + 1) % n), t2[j]);
    }
    ExcitationMatrix::new(m, basis, bc)
}

pub fn ssh_target(t1: c64, t2: c64, n: usize, bc: BoundaryCondition) -> Result<ExcitationMatrix> {
    ssh_target_fields(&vec![t1; n], &vec![t2; n], bc)
}

/// `‖A⁻¹MA − target‖_max / ‖M‖_max`.
pub fn transform_residual(m: &ExcitationMatrix, a: &SimilarityMatrix, target: &ExcitationMatrix) -> Result<f64> {
    if target.dim() != m.dim() {
        return Err(Error::Dimension(format!("target {} vs matrix {}", target.dim(), m.dim())));
    }
    for (k, l) in a.log_scale.iter().enumerate() {
        if !(l.re.is_finite() && l.im.is_finite()) {
            return Err(Error::SingularTransform(format!("diagonal entry {k} is not finite")));
        }
    }
    let t = a.conjugate(m)?;
    let scale = max_abs(&m.m);
    let diff = crate::model::max_abs_diff(&t.m, &target.m);
    Ok(if scale == 0.0 { diff } else { diff / scale })
}
