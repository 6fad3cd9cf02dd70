//! Parameter types and excitation-matrix builders.
//!
//! Both models are written in the quadrature basis. A Hamiltonian quadratic in
//! the quadratures is stored as `H = ½ vᵀ Q v`, and the excitation matrix is the
//! matrix of the commutator map: `[H, v_α] = Σ_β M_αβ v_β`. With
//! `[x_j, p_l] = i δ_jl` this gives `M = −i Σ Q` where `Σ_xp = 1`, `Σ_px = −1`.
//!
//! The direct builders write `M` down from its block form instead, and the two
//! routes are required to agree.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::disorder::SiteFields;
use crate::error::{Error, Result};
use crate::pauli::{self, I, M2, M4, S0, SX, SY, SZ};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BkcParams {
    pub j0: f64,
    pub delta0: f64,
    pub omega: f64,
    pub n: usize,
}

impl BkcParams {
    pub fn new(j0: f64, delta0: f64, omega: f64, n: usize) -> Result<Self> {
        let p = Self { j0, delta0, omega, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        check_finite("J0", self.j0)?;
        check_finite("Delta0", self.delta0)?;
        check_finite("omega", self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModBkcParams {
    pub j1: f64,
    pub j2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub omega: f64,
    pub n: usize,
}

impl ModBkcParams {
    pub fn new(j1: f64, j2: f64, delta1: f64, delta2: f64, omega: f64, n: usize) -> Result<Self> {
        let p = Self { j1, j2, delta1, delta2, omega, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        check_finite("J1", self.j1)?;
        check_finite("J2", self.j2)?;
        check_finite("Delta1", self.delta1)?;
        check_finite("Delta2", self.delta2)?;
        check_finite("omega", self.omega)
    }
}

/// Continuous parameters of the two-sublattice chain, addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModParam {
    J1,
    J2,
    Delta1,
    Delta2,
    Omega,
}

impl ModParam {
    pub const ALL: [ModParam; 5] = [ModParam::J1, ModParam::J2, ModParam::Delta1, ModParam::Delta2, ModParam::Omega];

    pub fn name(self) -> &'static str {
        match self {
            ModParam::J1 => "J1",
            ModParam::J2 => "J2",
            ModParam::Delta1 => "Delta1",
            ModParam::Delta2 => "Delta2",
            ModParam::Omega => "omega",
        }
    }

    pub fn from_name(s: &str) -> Option<ModParam> {
        ModParam::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn get(self, p: &ModBkcParams) -> f64 {
        match self {
            ModParam::J1 => p.j1,
            ModParam::J2 => p.j2,
            ModParam::Delta1 => p.delta1,
            ModParam::Delta2 => p.delta2,
            ModParam::Omega => p.omega,
        }
    }

    pub fn set(self, p: &mut ModBkcParams, v: f64) {
        match self {
            ModParam::J1 => p.j1 = v,
            ModParam::J2 => p.j2 = v,
            ModParam::Delta1 => p.delta1 = v,
            ModParam::Delta2 => p.delta2 = v,
            ModParam::Omega => p.omega = v,
        }
    }
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "N", reason: format!("need at least 2 cells, got {n}") });
    }
    Ok(())
}

pub(crate) fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter { name, reason: format!("not finite ({v})") });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Open,
    Periodic,
}

impl BoundaryCondition {
    pub fn label(self) -> &'static str {
        match self {
            Self::Open => "obc",
            Self::Periodic => "pbc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

/// One quadrature degree of freedom. `sublattice` is `None` for the plain chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisIndex {
    pub cell: usize,
    pub sublattice: Option<Sublattice>,
    pub quadrature: Quadrature,
}

/// Ordering of the quadrature basis: `2j+s` for the plain chain and
/// `4j+2S+s` for the two-sublattice chain (s=0 for x, S=0 for A).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Bkc { n: usize },
    ModBkc { n: usize },
}

impl Basis {
    pub fn cells(&self) -> usize {
        match *self {
            Basis::Bkc { n } | Basis::ModBkc { n } => n,
        }
    }

    pub fn per_cell(&self) -> usize {
        match self {
            Basis::Bkc { .. } => 2,
            Basis::ModBkc { .. } => 4,
        }
    }

    pub fn dim(&self) -> usize {
        self.cells() * self.per_cell()
    }

    pub fn cell_of(&self, flat: usize) -> usize {
        flat / self.per_cell()
    }

    pub fn flat(&self, idx: BasisIndex) -> usize {
        let s = match idx.quadrature {
            Quadrature::X => 0,
            Quadrature::P => 1,
        };
        match (self, idx.sublattice) {
            (Basis::Bkc { .. }, None) => 2 * idx.cell + s,
            (Basis::ModBkc { .. }, Some(sub)) => {
                let big = match sub {
                    Sublattice::A => 0,
                    Sublattice::B => 1,
                };
                4 * idx.cell + 2 * big + s
            }
            _ => panic!("basis index {idx:?} does not belong to {self:?}"),
        }
    }

    pub fn index(&self, flat: usize) -> BasisIndex {
        let quadrature = if flat.is_multiple_of(2) { Quadrature::X } else { Quadrature::P };
        match self {
            Basis::Bkc { .. } => BasisIndex { cell: flat / 2, sublattice: None, quadrature },
            Basis::ModBkc { .. } => BasisIndex {
                cell: flat / 4,
                sublattice: Some(if (flat / 2).is_multiple_of(2) { Sublattice::A } else { Sublattice::B }),
                quadrature,
            },
        }
    }
}

/// Real symmetric `Q` with `H = ½ vᵀ Q v`.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub q: Mat<f64>,
    pub basis: Basis,
    pub bc: BoundaryCondition,
}

impl QuadraticForm {
    pub fn new(q: Mat<f64>, basis: Basis, bc: BoundaryCondition) -> Result<Self> {
        let d = basis.dim();
        if q.nrows() != d || q.ncols() != d {
            return Err(Error::Dimension(format!("Q is {}x{}, basis needs {d}x{d}", q.nrows(), q.ncols())));
        }
        Ok(Self { q, basis, bc })
    }

    pub fn max_asymmetry(&self) -> f64 {
        let d = self.q.nrows();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..i {
                worst = worst.max((self.q[(i, j)] - self.q[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Collects polynomial coefficients and turns them into a Hessian.
struct QuadBuilder {
    q: Mat<f64>,
}

impl QuadBuilder {
    fn new(dim: usize) -> Self {
        Self { q: Mat::zeros(dim, dim) }
    }

    /// Adds the monomial `c · v_a v_b`.
    fn term(&mut self, c: f64, a: usize, b: usize) {
        if a == b {
            self.q[(a, a)] += 2.0 * c;
        } else {
            self.q[(a, b)] += c;
            self.q[(b, a)] += c;
        }
    }

    fn finish(mut self) -> Mat<f64> {
        let d = self.q.nrows();
        for i in 0..d {
            for j in 0..i {
                let m = 0.5 * (self.q[(i, j)] + self.q[(j, i)]);
                self.q[(i, j)] = m;
                self.q[(j, i)] = m;
            }
        }
        self.q
    }
}

fn bonds(n: usize, bc: BoundaryCondition) -> impl Iterator<Item = (usize, usize)> {
    let count = match bc {
        BoundaryCondition::Open => n - 1,
        BoundaryCondition::Periodic => n,
    };
    (0..count).map(move |j| (j, (j + 1) % n))
}

pub fn build_bkc_quadratic(p: &BkcParams, bc: BoundaryCondition) -> Result<QuadraticForm> {
    p.validate()?;
    let basis = Basis::Bkc { n: p.n };
    let x = |j: usize| 2 * j;
    let pp = |j: usize| 2 * j + 1;
    let mut b = QuadBuilder::new(basis.dim());
    for j in 0..p.n {
        b.term(0.5 * p.omega, x(j), x(j));
        b.term(0.5 * p.omega, pp(j), pp(j));
    }
    for (j, k) in bonds(p.n, bc) {
        b.term(-(p.j0 - p.delta0), x(j), pp(k));
        b.term(p.j0 + p.delta0, pp(j), x(k));
    }
    QuadraticForm::new(b.finish(), basis, bc)
}

pub fn build_modbkc_quadratic(p: &ModBkcParams, bc: BoundaryCondition) -> Result<QuadraticForm> {
    p.validate()?;
    build_modbkc_quadratic_fields(&SiteFields::uniform(p), bc)
}

/// Site-resolved version; bond `j` couples cell `j` to cell `j+1`.
pub fn build_modbkc_quadratic_fields(f: &SiteFields, bc: BoundaryCondition) -> Result<QuadraticForm> {
    f.validate()?;
    let n = f.n();
    let basis = Basis::ModBkc { n };
    let (xa, pa, xb, pb) = (|j: usize| 4 * j, |j: usize| 4 * j + 1, |j: usize| 4 * j + 2, |j: usize| 4 * j + 3);
    let mut b = QuadBuilder::new(basis.dim());
    for j in 0..n {
        b.term(0.5 * f.omega_a[j], xa(j), xa(j));
        b.term(0.5 * f.omega_a[j], pa(j), pa(j));
        b.term(0.5 * f.omega_b[j], xb(j), xb(j));
        b.term(0.5 * f.omega_b[j], pb(j), pb(j));
        b.term(f.j1[j] + f.delta1[j], xa(j), xb(j));
        b.term(f.j1[j] - f.delta1[j], pa(j), pb(j));
    }
    for (j, k) in bonds(n, bc) {
        b.term(f.j2[j] + f.delta2[j], xb(j), xa(k));
        b.term(f.j2[j] - f.delta2[j], pb(j), pa(k));
    }
    QuadraticForm::new(b.finish(), basis, bc)
}

/// Dense matrix of the commutator map `[H, ·]` together with its basis.
#[derive(Debug, Clone)]
pub struct ExcitationMatrix {
    pub m: Mat<c64>,
    pub basis: Basis,
    pub bc: BoundaryCondition,
}

impl ExcitationMatrix {
    pub fn new(m: Mat<c64>, basis: Basis, bc: BoundaryCondition) -> Result<Self> {
        let d = basis.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension(format!("matrix is {}x{}, basis needs {d}x{d}", m.nrows(), m.ncols())));
        }
        Ok(Self { m, basis, bc })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    /// Largest entrywise difference to another matrix of the same shape.
    pub fn max_diff(&self, other: &ExcitationMatrix) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }

    /// Largest entry of `M - M†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..=i {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

pub(crate) fn max_abs(m: &Mat<c64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

pub(crate) fn max_abs_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

const SYMMETRY_TOL: f64 = 1e-14;

/// `M = −i Σ Q`: row `x` picks up `−i·Q[p, ·]`, row `p` picks up `+i·Q[x, ·]`.
pub fn excitation_matrix(q: &QuadraticForm) -> Result<ExcitationMatrix> {
    let asym = q.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let d = q.basis.dim();
    let m =
        Mat::from_fn(
            d,
            d,
            |a, b| {
                if a % 2 == 0 {
                    c64::new(0.0, -q.q[(a + 1, b)])
                } else {
                    c64::new(0.0, q.q[(a - 1, b)])
                }
            },
        );
    ExcitationMatrix::new(m, q.basis, q.bc)
}

fn put2(m: &mut Mat<c64>, row: usize, col: usize, blk: &M2) {
    for a in 0..2 {
        for b in 0..2 {
            m[(row + a, col + b)] += blk[a][b];
        }
    }
}

fn put4(m: &mut Mat<c64>, row: usize, col: usize, blk: &M4) {
    for a in 0..4 {
        for b in 0..4 {
            m[(row + a, col + b)] += blk[a][b];
        }
    }
}

fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

/// Block form `−i Σ_j [(J0 + Δ0 σz) ⊗ |j⟩⟨j+1| − (J0 − Δ0 σz) ⊗ |j+1⟩⟨j|] + ω σy ⊗ 1`.
pub fn build_bkc_excitation_direct(p: &BkcParams, bc: BoundaryCondition) -> Result<ExcitationMatrix> {
    p.validate()?;
    let basis = Basis::Bkc { n: p.n };
    let d = basis.dim();
    let mut m = Mat::<c64>::zeros(d, d);
    let forward = pauli::scale(pauli::add(pauli::scale(S0, re(p.j0)), pauli::scale(SZ, re(p.delta0))), -I);
    let backward = pauli::scale(pauli::add(pauli::scale(S0, re(p.j0)), pauli::scale(SZ, re(-p.delta0))), I);
    let onsite = pauli::scale(SY, re(p.omega));
    for j in 0..p.n {
        put2(&mut m, 2 * j, 2 * j, &onsite);
    }
    for (j, k) in bonds(p.n, bc) {
        put2(&mut m, 2 * j, 2 * k, &forward);
        put2(&mut m, 2 * k, 2 * j, &backward);
    }
    ExcitationMatrix::new(m, basis, bc)
}

fn coupling(j: f64, delta: f64) -> M2 {
    pauli::add(pauli::scale(SY, re(j)), pauli::scale(SX, c64::new(0.0, delta)))
}

/// Four-by-four cell blocks in `τ ⊗ σ` order: intracell `(J1 σy + iΔ1 σx) τx`,
/// intercell `(J2 σy + iΔ2 σx)` between `B_j` and `A_{j+1}` in both directions,
/// onsite `ω σy τ0`.
pub fn build_modbkc_excitation_direct(p: &ModBkcParams, bc: BoundaryCondition) -> Result<ExcitationMatrix> {
    p.validate()?;
    build_modbkc_excitation_direct_fields(&SiteFields::uniform(p), bc)
}

pub fn build_modbkc_excitation_direct_fields(f: &SiteFields, bc: BoundaryCondition) -> Result<ExcitationMatrix> {
    f.validate()?;
    let n = f.n();
    let basis = Basis::ModBkc { n };
    let d = basis.dim();
    let mut m = Mat::<c64>::zeros(d, d);
    let upper = [[re(1.0), re(0.0)], [re(0.0), re(0.0)]];
    let lower = [[re(0.0), re(0.0)], [re(0.0), re(1.0)]];
    for j in 0..n {
        let mut cell = pauli::kron(SX, coupling(f.j1[j], f.delta1[j]));
        cell = pauli::add4(cell, pauli::kron(upper, pauli::scale(SY, re(f.omega_a[j]))));
        cell = pauli::add4(cell, pauli::kron(lower, pauli::scale(SY, re(f.omega_b[j]))));
        put4(&mut m, 4 * j, 4 * j, &cell);
    }
    for (j, k) in bonds(n, bc) {
        let c = coupling(f.j2[j], f.delta2[j]);
        put2(&mut m, 4 * j + 2, 4 * k, &c);
        put2(&mut m, 4 * k, 4 * j + 2, &c);
    }
    ExcitationMatrix::new(m, basis, bc)
}

/// Bloch block of the plain chain: `2J0 sin k − 2iΔ0 cos k σz + ω σy`.
pub fn bkc_bloch_matrix(p: &BkcParams, k: f64) -> Result<Mat<c64>> {
    p.validate()?;
    check_finite("k", k)?;
    let blk = pauli::add(
        pauli::add(
            pauli::scale(S0, re(2.0 * p.j0 * k.sin())),
            pauli::scale(SZ, c64::new(0.0, -2.0 * p.delta0 * k.cos())),
        ),
        pauli::scale(SY, re(p.omega)),
    );
    Ok(Mat::from_fn(2, 2, |a, b| blk[a][b]))
}

/// Bloch block of the two-sublattice chain:
/// `(J1 σy + iΔ1 σx) τx + (J2 σy + iΔ2 σx)(cos k τx + sin k τy) + ω σy τ0`.
pub fn modbkc_bloch_matrix(p: &ModBkcParams, k: f64) -> Result<Mat<c64>> {
    p.validate()?;
    check_finite("k", k)?;
    let inter = pauli::add(pauli::scale(SX, re(k.cos())), pauli::scale(SY, re(k.sin())));
    let mut blk = pauli::kron(SX, coupling(p.j1, p.delta1));
    blk = pauli::add4(blk, pauli::kron(inter, coupling(p.j2, p.delta2)));
    blk = pauli::add4(blk, pauli::kron(S0, pauli::scale(SY, re(p.omega))));
    Ok(Mat::from_fn(4, 4, |a, b| blk[a][b]))
}
