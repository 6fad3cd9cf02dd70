//! Effective hoppings of a parametrically modulated cavity array.
//!
//! Cavity frequencies are modulated as `δω(t) = λπ² sin(2πt/T) / (2T)`, which
//! adds the phase `χ(t) = 2∫₀ᵗ δω = (λπ/2)(1 − cos(2πt/T))` to each hopping.
//! Averaging over one period gives `⟨e^{iχ}⟩ = e^{iλπ/2} J₀(λπ/2)`.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModBkcParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub lambda: f64,
    pub period: f64,
    /// Bare hoppings.
    pub jt1: f64,
    pub jt2: f64,
    /// Bare pairing magnitudes.
    pub dt1: f64,
    pub dt2: f64,
    /// Pump phases of the pairing terms.
    pub phi1: f64,
    pub phi2: f64,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lambda", self.lambda),
            ("T", self.period),
            ("Jt1", self.jt1),
            ("Jt2", self.jt2),
            ("Dt1", self.dt1),
            ("Dt2", self.dt2),
            ("phi1", self.phi1),
            ("phi2", self.phi2),
        ];
        for (name, v) in fields {
            crate::model::check_finite(name, v)?;
        }
        if !(self.period > 0.0) {
            return Err(Error::InvalidParameter {
                name: "T",
                reason: format!("period must be positive, got {}", self.period),
            });
        }
        Ok(())
    }
}

pub fn delta_omega(t: f64, d: &DriveSpec) -> f64 {
    d.lambda * PI * PI * (2.0 * PI * t / d.period).sin() / (2.0 * d.period)
}

pub fn chi(t: f64, d: &DriveSpec) -> f64 {
    0.5 * d.lambda * PI * (1.0 - (2.0 * PI * t / d.period).cos())
}

/// `2∫₀ᵗ δω` by adaptive Simpson quadrature.
pub fn chi_by_quadrature(t: f64, d: &DriveSpec, tol: f64) -> f64 {
    2.0 * adaptive_simpson(&|s| delta_omega(s, d), 0.0, t, tol)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

/// `(1/T)∫₀ᵀ e^{iχ(t)} dt` by the `order`-point periodic trapezoid rule.
pub fn averaged_phase(lambda: f64, order: usize) -> Result<c64> {
    if order < 32 {
        return Err(Error::InvalidParameter {
            name: "quadrature order",
            reason: format!("need at least 32, got {order}"),
        });
    }
    crate::model::check_finite("lambda", lambda)?;
    let d = DriveSpec { lambda, period: 1.0, jt1: 0.0, jt2: 0.0, dt1: 0.0, dt2: 0.0, phi1: 0.0, phi2: 0.0 };
    let sum: c64 = (0..order).map(|k| c64::from_polar(1.0, chi(k as f64 / order as f64, &d))).sum();
    Ok(sum / order as f64)
}

/// Closed form `e^{iλπ/2} J₀(λπ/2)`.
pub fn averaged_phase_closed_form(lambda: f64) -> c64 {
    let x = 0.5 * PI * lambda;
    c64::from_polar(1.0, x) * bessel_j0(x)
}

/// Bessel function of the first kind, order zero.
///
/// Power series `Σ (−x²/4)^k / (k!)²` for `|x| ≤ 8`, summed until terms drop
/// below 1e−17 (at most 40 terms; absolute error below 1e−12 on that range).
/// Larger arguments fall back to the integral representation.
pub fn bessel_j0(x: f64) -> f64 {
    if x.abs() > 8.0 {
        return bessel_j0_integral(x, 512);
    }
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=40 {
        term *= q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum
}

/// `(1/π)∫₀^π cos(x sin θ) dθ` by the periodic trapezoid rule.
pub fn bessel_j0_integral(x: f64, order: usize) -> f64 {
    let h = PI / order as f64;
    (0..order).map(|k| (x * (k as f64 * h).sin()).cos()).sum::<f64>() / order as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub j1: c64,
    pub j2: c64,
    pub delta1: c64,
    pub delta2: c64,
    pub omega: f64,
}

/// `J₁ = e^{iπλ/2} J₀(πλ/2) J̃₁`, `J₂ = e^{−iπλ/2} J₀(πλ/2) J̃₂`, `Δᵢ = e^{iφᵢ} Δ̃ᵢ`, `ω = 0`.
pub fn effective_params(d: &DriveSpec) -> Result<EffectiveParams> {
    d.validate()?;
    let x = 0.5 * PI * d.lambda;
    let b = bessel_j0(x);
    Ok(EffectiveParams {
        j1: c64::from_polar(b, x) * d.jt1,
        j2: c64::from_polar(b, -x) * d.jt2,
        delta1: c64::from_polar(d.dt1, d.phi1),
        delta2: c64::from_polar(d.dt2, d.phi2),
        omega: 0.0,
    })
}

impl EffectiveParams {
    pub fn is_real(&self, tol: f64) -> bool {
        [self.j1, self.j2, self.delta1, self.delta2].iter().all(|z| z.im.abs() <= tol * z.norm().max(1.0))
    }

    /// Real parameters for the lattice builders. Complex hoppings or pairings
    /// are rejected: the lattice model is defined for real couplings only.
    pub fn to_model(&self, n: usize) -> Result<ModBkcParams> {
        if !self.is_real(1e-12) {
            return Err(Error::InvalidParameter {
                name: "effective parameters",
                reason: "complex hopping or pairing has no real lattice counterpart".into(),
            });
        }
        ModBkcParams::new(self.j1.re, self.j2.re, self.delta1.re, self.delta2.re, self.omega, n)
    }
}
