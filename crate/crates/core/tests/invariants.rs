use std::f64::consts::PI;

use bkc_core::c64;
use bkc_core::disorder::{sample_site_fields, DisorderSpec, SiteFields};
use bkc_core::floquet::{averaged_phase, averaged_phase_closed_form, bessel_j0, bessel_j0_integral};
use bkc_core::model::{
    bkc_bloch_matrix, build_bkc_excitation_direct, build_bkc_quadratic, build_modbkc_excitation_direct,
    build_modbkc_excitation_direct_fields, build_modbkc_quadratic, excitation_matrix, modbkc_bloch_matrix, BkcParams,
    BoundaryCondition, ModBkcParams,
};
use bkc_core::skin::profiles;
use bkc_core::spectral::{block_eigenvalues, eigendecompose, eigenvalues, multiset_distance, negation_asymmetry};
use bkc_core::topology::{winding_analytic, winding_numeric};
use bkc_core::transform::{
    a_combined, disordered_similarity, effective_ssh_params, ssh_target, ssh_target_fields, transform_residual,
};
use proptest::prelude::*;

const OPEN: BoundaryCondition = BoundaryCondition::Open;
const PERIODIC: BoundaryCondition = BoundaryCondition::Periodic;

fn coupling() -> impl Strategy<Value = f64> {
    -2.5f64..2.5
}

fn bc() -> impl Strategy<Value = BoundaryCondition> {
    prop_oneof![Just(OPEN), Just(PERIODIC)]
}

fn modbkc(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ModBkcParams> {
    (coupling(), coupling(), coupling(), coupling(), -1.0f64..1.0, n)
        .prop_map(|(j1, j2, d1, d2, w, n)| ModBkcParams::new(j1, j2, d1, d2, w, n).unwrap())
}

/// Keeps every `|Δ ± J|` away from zero so the similarity transforms exist.
fn nonsingular(p: &ModBkcParams) -> bool {
    [p.delta1 - p.j1, p.delta1 + p.j1, p.delta2 - p.j2, p.delta2 + p.j2].iter().all(|x| x.abs() > 0.1)
}

fn scale(values: &[c64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quadratic_route_matches_direct_builder_bkc(
        j0 in coupling(), d0 in coupling(), w in -1.0f64..1.0, n in 2usize..=6, bc in bc()
    ) {
        let p = BkcParams::new(j0, d0, w, n).unwrap();
        let via_q = excitation_matrix(&build_bkc_quadratic(&p, bc).unwrap()).unwrap();
        let direct = build_bkc_excitation_direct(&p, bc).unwrap();
        prop_assert!(via_q.max_diff(&direct) <= 1e-14);
    }

    #[test]
    fn quadratic_route_matches_direct_builder_modbkc(p in modbkc(2..=6), bc in bc()) {
        let via_q = excitation_matrix(&build_modbkc_quadratic(&p, bc).unwrap()).unwrap();
        let direct = build_modbkc_excitation_direct(&p, bc).unwrap();
        prop_assert!(via_q.max_diff(&direct) <= 1e-14);
    }

    #[test]
    fn conjugation_pairs_eigenvalues(p in modbkc(2..=5), bc in bc()) {
        let e = eigenvalues(&build_modbkc_excitation_direct(&p, bc).unwrap()).unwrap();
        let mirrored: Vec<c64> = e.iter().map(|z| -z.conj()).collect();
        prop_assert!(multiset_distance(&e, &mirrored) <= 1e-6 * scale(&e));
    }

    #[test]
    fn undriven_open_spectrum_is_symmetric(mut p in modbkc(2..=6)) {
        p.omega = 0.0;
        let e = eigenvalues(&build_modbkc_excitation_direct(&p, OPEN).unwrap()).unwrap();
        prop_assert!(negation_asymmetry(&e) <= 1e-6 * scale(&e));
    }

    #[test]
    fn periodic_spectrum_is_union_of_bloch_blocks(p in modbkc(2..=6)) {
        let e = eigenvalues(&build_modbkc_excitation_direct(&p, PERIODIC).unwrap()).unwrap();
        let mut bloch = Vec::new();
        for m in 0..p.n {
            let k = 2.0 * PI * m as f64 / p.n as f64;
            bloch.extend(block_eigenvalues(&modbkc_bloch_matrix(&p, k).unwrap()).unwrap());
        }
        prop_assert!(multiset_distance(&e, &bloch) <= 1e-6 * scale(&e));
    }

    #[test]
    fn bkc_periodic_spectrum_is_union_of_bloch_blocks(
        j0 in coupling(), d0 in coupling(), w in -1.0f64..1.0, n in 2usize..=8
    ) {
        let p = BkcParams::new(j0, d0, w, n).unwrap();
        let e = eigenvalues(&build_bkc_excitation_direct(&p, PERIODIC).unwrap()).unwrap();
        let mut bloch = Vec::new();
        for m in 0..n {
            let k = 2.0 * PI * m as f64 / n as f64;
            bloch.extend(block_eigenvalues(&bkc_bloch_matrix(&p, k).unwrap()).unwrap());
        }
        prop_assert!(multiset_distance(&e, &bloch) <= 1e-6 * scale(&e));
    }

    #[test]
    fn pairing_free_matrix_is_hermitian(
        j1 in coupling(), j2 in coupling(), w in -1.0f64..1.0, n in 2usize..=6, bc in bc()
    ) {
        let p = ModBkcParams::new(j1, j2, 0.0, 0.0, w, n).unwrap();
        prop_assert!(build_modbkc_excitation_direct(&p, bc).unwrap().hermiticity_defect() <= 1e-15);
    }

    #[test]
    fn profiles_are_normalized(p in modbkc(2..=6), bc in bc()) {
        let s = eigendecompose(&build_modbkc_excitation_direct(&p, bc).unwrap()).unwrap();
        for prof in profiles(&s).unwrap() {
            prop_assert!((prof.prob.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(prof.prob.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn similarity_reaches_ssh_target(p in modbkc(2..=6)) {
        prop_assume!(nonsingular(&p));
        let mut p = p;
        p.omega = 0.0;
        let m = build_modbkc_excitation_direct(&p, OPEN).unwrap();
        let e = effective_ssh_params(&p);
        let target = ssh_target(e.dtilde1, e.dtilde2, p.n, OPEN).unwrap();
        prop_assert!(transform_residual(&m, &a_combined(&p).unwrap(), &target).unwrap() <= 1e-10);
    }

    #[test]
    fn similarity_preserves_eigenvalues(p in modbkc(2..=5)) {
        prop_assume!(nonsingular(&p));
        let m = build_modbkc_excitation_direct(&p, OPEN).unwrap();
        let a = a_combined(&p).unwrap();
        prop_assume!(a.log10_condition() < 8.0);
        let e0 = eigenvalues(&m).unwrap();
        let e1 = eigenvalues(&a.conjugate(&m).unwrap()).unwrap();
        prop_assert!(multiset_distance(&e0, &e1) <= 1e-6 * scale(&e0));
    }

    #[test]
    fn disordered_similarity_reaches_site_dependent_target(p in modbkc(2..=5), seed in any::<u64>()) {
        let mut p = p;
        p.omega = 0.0;
        let spec = DisorderSpec::from_names([("J1", 0.05), ("J2", 0.05), ("Delta1", 0.05), ("Delta2", 0.05)], seed, 1).unwrap();
        let f = sample_site_fields(&p, &spec, 0).unwrap();
        let ok = (0..p.n).all(|j| {
            [f.delta1[j] - f.j1[j], f.delta1[j] + f.j1[j], f.delta2[j] - f.j2[j], f.delta2[j] + f.j2[j]]
                .iter()
                .all(|x| x.abs() > 0.1)
        });
        prop_assume!(ok);
        let m = build_modbkc_excitation_direct_fields(&f, OPEN).unwrap();
        let root = |d: f64, j: f64| c64::new(d * d - j * j, 0.0).sqrt();
        let t1: Vec<c64> = (0..p.n).map(|j| root(f.delta1[j], f.j1[j])).collect();
        let t2: Vec<c64> = (0..p.n).map(|j| root(f.delta2[j], f.j2[j])).collect();
        let target = ssh_target_fields(&t1, &t2, OPEN).unwrap();
        prop_assert!(transform_residual(&m, &disordered_similarity(&f).unwrap(), &target).unwrap() <= 1e-10);
    }

    #[test]
    fn winding_independent_of_grid(p in modbkc(2..=2)) {
        let e = effective_ssh_params(&p);
        if let Ok(w) = winding_numeric(&e, 128) {
            for m in [512, 2048] {
                prop_assert_eq!(winding_numeric(&e, m).unwrap(), w);
            }
        }
    }

    #[test]
    fn disorder_draws_are_reproducible(p in modbkc(2..=8), seed in any::<u64>(), r in 0usize..16) {
        let spec = DisorderSpec::all(0.2, seed, 16).unwrap();
        let a: SiteFields = sample_site_fields(&p, &spec, r).unwrap();
        let b = sample_site_fields(&p, &spec, r).unwrap();
        prop_assert_eq!(&a, &b);
        let bound = |base: f64, x: f64| (x - base).abs() <= 0.2 * base.abs() + 1e-15;
        prop_assert!(a.j1.iter().all(|&x| bound(p.j1, x)));
        prop_assert!(a.delta2.iter().all(|&x| bound(p.delta2, x)));
    }

    #[test]
    fn averaged_phase_matches_closed_form(lambda in 0.0f64..3.0) {
        let q = averaged_phase(lambda, 256).unwrap();
        prop_assert!((q - averaged_phase_closed_form(lambda)).norm() <= 1e-12);
    }

    #[test]
    fn bessel_series_matches_integral(x in -8.0f64..8.0) {
        prop_assert!((bessel_j0(x) - bessel_j0_integral(x, 256)).abs() <= 1e-11);
    }
}

#[test]
fn numeric_winding_matches_analytic_on_grid() {
    let mut checked = 0;
    for a in 0..50 {
        for b in 0..50 {
            let j1 = -2.45 + 0.1 * a as f64;
            let d1 = -2.45 + 0.1 * b as f64;
            let p = ModBkcParams::new(j1, 1.0, d1, 1.5, 0.0, 10).unwrap();
            let e = effective_ssh_params(&p);
            if let (Ok(n), Ok(an)) = (winding_numeric(&e, 1024), winding_analytic(&p)) {
                assert_eq!(n, an, "J1={j1} Delta1={d1}");
                checked += 1;
            }
        }
    }
    assert!(checked > 2000, "only {checked} defined points");
}

/// At ω = 0 the quadratures split into the chains x_A → p_B and p_A → x_B,
/// which grow in opposite directions under the similarity transform. An
/// eigenstate sits at the end where the transform diagonal of its dominant
/// chain is largest.
#[test]
fn skin_side_follows_similarity_growth() {
    use bkc_core::transform::{a1_prime, a2_prime};
    let n = 60;
    let cases = [
        (ModBkcParams::new(0.5, 0.0, 1.0, 1.5, 0.0, n).unwrap(), a1_prime as fn(&ModBkcParams) -> _),
        (ModBkcParams::new(-0.5, 0.0, 1.0, 1.5, 0.0, n).unwrap(), a1_prime),
        (ModBkcParams::new(0.2, 0.5, 1.5, 1.0, 0.0, n).unwrap(), a2_prime),
        (ModBkcParams::new(0.2, -0.5, 1.5, 1.0, 0.0, n).unwrap(), a2_prime),
    ];
    for (p, build) in cases {
        let a = build(&p).unwrap();
        let s = eigendecompose(&build_modbkc_excitation_direct(&p, OPEN).unwrap()).unwrap();
        let chains = [[0usize, 3], [1, 2]];
        let grows_right = chains.map(|c| a.log_scale[4 * (n - 1) + c[0]].re > a.log_scale[c[0]].re);
        assert_ne!(grows_right[0], grows_right[1]);
        let mut agree = 0;
        for k in 0..s.len() {
            let v = s.vector(k);
            let stats = chains.map(|chain| {
                let (mut w, mut wx) = (0.0, 0.0);
                for j in 0..n {
                    for c in chain {
                        let q = v[4 * j + c].norm_sqr();
                        w += q;
                        wx += q * j as f64;
                    }
                }
                (w, wx / w)
            });
            let c = if stats[0].0 >= stats[1].0 { 0 } else { 1 };
            if (stats[c].1 > (n - 1) as f64 / 2.0) == grows_right[c] {
                agree += 1;
            }
        }
        assert!(agree as f64 >= 0.95 * s.len() as f64, "{p:?}: {agree} of {} states", s.len());
    }
}

/// Open plain chain at ω = 0: the spectrum is the standing-wave set
/// `±2i√(Δ0² − J0²) cos(πm/(N+1))`, each value twice, and not the
/// periodic-looking `cos(2πm/N)` set.
#[test]
fn open_plain_chain_has_standing_wave_spectrum() {
    for (j0, d0, n) in [(0.5, 1.0, 40), (0.3, 0.8, 25), (-0.6, 1.1, 12)] {
        let p = BkcParams::new(j0, d0, 0.0, n).unwrap();
        let e = eigenvalues(&build_bkc_excitation_direct(&p, OPEN).unwrap()).unwrap();
        let amp = 2.0 * (d0 * d0 - j0 * j0).sqrt();
        let set = |arg: &dyn Fn(usize) -> f64| -> Vec<c64> {
            (1..=n).flat_map(|m| [c64::new(0.0, amp * arg(m).cos()); 2]).collect()
        };
        let standing = set(&|m| PI * m as f64 / (n + 1) as f64);
        let ring = set(&|m| 2.0 * PI * m as f64 / n as f64);
        assert!(multiset_distance(&e, &standing) < 1e-10, "{j0} {d0} {n}");
        assert!(multiset_distance(&e, &ring) > 1e-2, "{j0} {d0} {n}");
    }
}
