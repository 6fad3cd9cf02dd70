//! One check per acceptance criterion. Each prints a single PASS/FAIL line
//! with the measured quantities, then asserts.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bkc_core::c64;
use bkc_core::disorder::{ensemble_observables, DisorderSpec, EnsembleOptions};
use bkc_core::floquet::{averaged_phase, averaged_phase_closed_form, bessel_j0_integral};
use bkc_core::model::{
    build_bkc_excitation_direct, build_bkc_quadratic, build_modbkc_excitation_direct, build_modbkc_quadratic,
    excitation_matrix, BkcParams, BoundaryCondition, ModBkcParams, ModParam,
};
use bkc_core::skin::nhse_fraction;
use bkc_core::spectral::{bkc_pbc_dispersion, eigendecompose, eigenvalues, hausdorff, multiset_distance};
use bkc_core::topology::{
    half_bulk_gap, in_gap_edge_modes, phase_scan, winding_analytic, winding_numeric, zero_modes, AxisSpec, ScanOptions,
    WindingStatus,
};
use bkc_core::transform::{
    a1_prime, a2_prime, a_combined, dtilde, effective_ssh_params, hatano_nelson_a, hatano_nelson_target, ssh_target,
    transform_residual,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OPEN: BoundaryCondition = BoundaryCondition::Open;
const PERIODIC: BoundaryCondition = BoundaryCondition::Periodic;
const N: usize = 100;
const SEED: u64 = 20_240_817;

fn report(id: u32, ok: bool, detail: String) {
    println!("criterion {id:>2}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn modp(j1: f64, j2: f64, d1: f64, d2: f64, omega: f64) -> ModBkcParams {
    ModBkcParams::new(j1, j2, d1, d2, omega, N).unwrap()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Absolute zero-mode threshold used throughout the criteria.
fn tol_opts() -> EnsembleOptions {
    EnsembleOptions { zero_tol: Some(1e-6), ..EnsembleOptions::default() }
}

#[test]
fn criterion_01_hatano_nelson_transform() {
    let t = Instant::now();
    let p = BkcParams::new(0.5, 1.0, 0.0, N).unwrap();
    let m = build_bkc_excitation_direct(&p, OPEN).unwrap();
    let res = transform_residual(&m, &hatano_nelson_a(&p).unwrap(), &hatano_nelson_target(&p).unwrap()).unwrap();
    let el = t.elapsed();
    report(1, res < 1e-8 && el < Duration::from_secs(1), format!("residual {res:.3e}, {:.3} s", secs(el)));
}

#[test]
fn criterion_02_boundary_dichotomy() {
    let t = Instant::now();
    let p = BkcParams::new(0.5, 1.0, 0.0, N).unwrap();
    let obc = eigenvalues(&build_bkc_excitation_direct(&p, OPEN).unwrap()).unwrap();
    let max_re = obc.iter().map(|e| e.re.abs()).fold(0.0, f64::max);
    let pbc = eigenvalues(&build_bkc_excitation_direct(&p, PERIODIC).unwrap()).unwrap();
    let analytic: Vec<c64> = (0..N)
        .flat_map(|m| {
            let (a, b) = bkc_pbc_dispersion(&p, 2.0 * PI * m as f64 / N as f64);
            [a, b]
        })
        .collect();
    let pbc_err = multiset_distance(&pbc, &analytic);

    let q = BkcParams::new(0.5, 1.0, 0.5, N).unwrap();
    let dist = hausdorff(
        &eigenvalues(&build_bkc_excitation_direct(&q, OPEN).unwrap()).unwrap(),
        &eigenvalues(&build_bkc_excitation_direct(&q, PERIODIC).unwrap()).unwrap(),
    )
    .unwrap();
    let el = t.elapsed();
    let ok = max_re < 1e-8 && pbc_err < 1e-10 && dist < 1e-3 && el < Duration::from_secs(5);
    report(
        2,
        ok,
        format!(
            "omega=0: OBC max|Re E| {max_re:.3e}, PBC vs dispersion {pbc_err:.3e}; omega=0.5: OBC/PBC Hausdorff {dist:.4e}; {:.2} s",
            secs(el)
        ),
    );
}

#[test]
fn criterion_03_similarity_mappings() {
    let p = modp(0.5, 0.0, 1.0, 1.5, 0.0);
    let m = build_modbkc_excitation_direct(&p, OPEN).unwrap();
    let r2 = transform_residual(
        &m,
        &a1_prime(&p).unwrap(),
        &ssh_target(dtilde(1.0, 0.5), c64::new(1.5, 0.0), N, OPEN).unwrap(),
    )
    .unwrap();
    let p = modp(0.0, 0.5, 1.0, 1.5, 0.0);
    let m = build_modbkc_excitation_direct(&p, OPEN).unwrap();
    let r3 = transform_residual(
        &m,
        &a2_prime(&p).unwrap(),
        &ssh_target(c64::new(1.0, 0.0), dtilde(1.5, 0.5), N, OPEN).unwrap(),
    )
    .unwrap();
    let p = modp(1.0, 1.4, 1.5, 2.1, 0.0);
    let m = build_modbkc_excitation_direct(&p, OPEN).unwrap();
    let e = effective_ssh_params(&p);
    let r4 =
        transform_residual(&m, &a_combined(&p).unwrap(), &ssh_target(e.dtilde1, e.dtilde2, N, OPEN).unwrap()).unwrap();
    let ok = r2 < 1e-8 && r3 < 1e-8 && r4 < 1e-8;
    report(3, ok, format!("intracell {r2:.3e}, intercell {r3:.3e}, combined {r4:.3e}"));
}

#[test]
fn criterion_04_winding_zero_mode_correspondence() {
    let step = 0.02;
    let base = modp(0.0, 0.0, 1.5, 1.0, 0.0);
    let axes = [AxisSpec { param: ModParam::J1, min: 0.0, max: 2.2, step }];
    let opts = ScanOptions { zero_tol: Some(1e-6), ..ScanOptions::default() };
    let diagram = phase_scan(&base, &axes, &opts).unwrap();
    let (lo, hi) = (1.25f64.sqrt(), 3.25f64.sqrt());
    let mut mismatched = Vec::new();
    let mut far_mismatch = Vec::new();
    let mut winding_disagree = Vec::new();
    let mut failures = Vec::new();
    for pt in &diagram.points {
        let j1 = pt.coords[0];
        let rec = match &pt.record {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("J1={j1:.2}: {e}"));
                continue;
            }
        };
        let inside = j1 > lo && j1 < hi;
        if (rec.zero_modes == 2) != inside {
            mismatched.push(j1);
            if (j1 - lo).abs() > step && (j1 - hi).abs() > step {
                far_mismatch.push(j1);
            }
        }
        if let (WindingStatus::Defined(w), Some(a)) = (rec.winding, rec.winding_analytic) {
            if w != a {
                winding_disagree.push(j1);
            }
        }
    }
    let detected: Vec<f64> = diagram
        .points
        .iter()
        .filter(|p| p.record.as_ref().map(|r| r.zero_modes == 2).unwrap_or(false))
        .map(|p| p.coords[0])
        .collect();
    let range = match (detected.first(), detected.last()) {
        (Some(a), Some(b)) => format!("[{a:.2}, {b:.2}]"),
        _ => "none".into(),
    };
    let ok = far_mismatch.is_empty() && winding_disagree.is_empty() && failures.is_empty();
    report(
        4,
        ok,
        format!(
            "2-zero-mode points span {range} vs window ({lo:.4}, {hi:.4}); mismatches beyond one step at J1={far_mismatch:.2?}; winding disagreements {}; point failures {:?}",
            winding_disagree.len(),
            failures
        ),
    );
}

#[test]
fn criterion_05_intracell_and_intercell_modes() {
    let clean = eigendecompose(&build_modbkc_excitation_direct(&modp(2.2, 1.0, 2.1, 1.5, 0.0), OPEN).unwrap()).unwrap();
    let a = zero_modes(&clean, 1e-6).count;
    let driven =
        eigendecompose(&build_modbkc_excitation_direct(&modp(2.2, 1.0, 2.1, 1.5, 0.05), OPEN).unwrap()).unwrap();
    let b = zero_modes(&driven, 1e-6).count;
    let p = modp(1.0, 1.4, 1.5, 2.1, 0.05);
    let s = eigendecompose(&build_modbkc_excitation_direct(&p, OPEN).unwrap()).unwrap();
    let edge = in_gap_edge_modes(&s, half_bulk_gap(&effective_ssh_params(&p)), 0.1, 0.9).unwrap();
    let min_e = edge.indices.iter().map(|&k| s.eigenvalues[k].norm()).fold(f64::INFINITY, f64::min);
    let ok = a == 2 && b == 0 && edge.count == 2 && min_e > 0.0;
    report(
        5,
        ok,
        format!(
            "intracell omega=0: {a} zero modes; omega=0.05: {b}; intercell omega=0.05: {} localized in-gap modes, min |E| {min_e:.4}",
            edge.count
        ),
    );
}

#[test]
fn criterion_06_nhse_census() {
    let t = Instant::now();
    let f0 = nhse_fraction(
        &eigendecompose(&build_modbkc_excitation_direct(&modp(0.4, 0.1, 1.0, 0.5, 0.0), OPEN).unwrap()).unwrap(),
        0.1,
        0.9,
    )
    .unwrap();
    let f1 = nhse_fraction(
        &eigendecompose(&build_modbkc_excitation_direct(&modp(0.4, 0.1, 1.0, 0.5, 0.1), OPEN).unwrap()).unwrap(),
        0.1,
        0.9,
    )
    .unwrap();
    let el = t.elapsed();
    let ok = (f0 - 1.0).abs() < 1e-12 && f1 <= 0.05 && el < Duration::from_secs(10);
    report(6, ok, format!("fraction {f0:.4} at omega=0, {f1:.4} at omega=0.1; {:.2} s", secs(el)));
}

/// Intercell- and intracell-dominant parameter sets at one point of each sweep.
fn intercell_set(omega: f64) -> ModBkcParams {
    modp(1.0, 1.4, 1.5, 2.1, omega)
}

fn intracell_set(omega: f64) -> ModBkcParams {
    modp(2.2, 1.0, 2.1, 1.5, omega)
}

#[test]
fn criterion_07_disorder_robustness() {
    let mut notes = Vec::new();
    let mut ok = true;
    for (label, p) in [("intercell", intercell_set(0.0)), ("intracell", intracell_set(0.0))] {
        let spec = DisorderSpec::all(0.1, SEED, 20).unwrap();
        let r = ensemble_observables(&p, &spec, &tol_opts()).unwrap_or_else(|e| panic!("{label}: {e}"));
        let counts: Vec<usize> = r.records.iter().map(|x| x.zero_modes).collect();
        let all_two = r.failures.is_empty() && counts.len() == 20 && counts.iter().all(|&c| c == 2);
        ok &= all_two;
        notes.push(format!(
            "omega=0 {label}: counts min {} max {}",
            counts.iter().min().unwrap(),
            counts.iter().max().unwrap()
        ));
    }
    for w in [0.0, 0.1, 0.2] {
        let p = intercell_set(0.05);
        let spec = DisorderSpec::all(w, SEED, 20).unwrap();
        let opts = EnsembleOptions { edge_mode_max_e: half_bulk_gap(&effective_ssh_params(&p)), ..tol_opts() };
        let r = ensemble_observables(&p, &spec, &opts).unwrap();
        ok &= r.edge_modes.mean >= 1.0;
        notes.push(format!("omega=0.05 intercell W={w}: mean in-gap edge modes {:.2}", r.edge_modes.mean));
    }
    let spec = DisorderSpec::all(0.1, SEED, 20).unwrap();
    let r = ensemble_observables(&intracell_set(0.05), &spec, &tol_opts()).unwrap();
    ok &= r.zero_modes.mean == 0.0;
    notes.push(format!("omega=0.05 intracell W=0.1: mean zero modes {:.2}", r.zero_modes.mean));
    report(7, ok, notes.join("; "));
}

#[test]
fn criterion_08_disorder_recovered_nhse() {
    let mut notes = Vec::new();
    let mut ok = true;
    let opts = EnsembleOptions { nhse_threshold: 0.5, ..tol_opts() };
    let sets = [
        ("intracell-dominant", modp(2.2, 1.0, 2.1, 1.5, 0.05)),
        ("intercell-dominant", modp(1.0, 0.5, 1.5, 2.1, 0.05)),
    ];
    for (label, p) in sets {
        let mut strengths = std::collections::BTreeMap::new();
        strengths.insert(ModParam::Omega, 2.0);
        let spec = DisorderSpec::new(strengths, SEED, 20).unwrap();
        let dis = ensemble_observables(&p, &spec, &opts).unwrap();
        let clean =
            nhse_fraction(&eigendecompose(&build_modbkc_excitation_direct(&p, OPEN).unwrap()).unwrap(), 0.1, 0.5)
                .unwrap();
        ok &= dis.nhse_fraction.mean >= 0.3 && clean < 0.05;
        notes.push(format!(
            "{label}: disordered mean {:.4} (std {:.4}), clean {clean:.4}",
            dis.nhse_fraction.mean, dis.nhse_fraction.std
        ));
    }
    report(8, ok, notes.join("; "));
}

#[test]
fn criterion_09_floquet_average() {
    let mut worst = 0.0_f64;
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let num = averaged_phase(lambda, 256).unwrap();
        worst = worst.max((num - averaged_phase_closed_form(lambda)).norm());
    }
    let independent = c64::new(0.0, bessel_j0_integral(PI / 2.0, 512));
    let at_one = (averaged_phase(1.0, 256).unwrap() - independent).norm();
    report(
        9,
        worst < 1e-8 && at_one < 1e-8,
        format!("max quadrature error {worst:.3e}; lambda=1 vs integral J0 {at_one:.3e}"),
    );
}

#[test]
fn criterion_10_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let mut v = || rng.gen_range(-2.0..2.0);
        let b = BkcParams::new(v(), v(), v(), n).unwrap();
        let m = ModBkcParams::new(v(), v(), v(), v(), v(), n).unwrap();
        for bc in [OPEN, PERIODIC] {
            let x = excitation_matrix(&build_bkc_quadratic(&b, bc).unwrap()).unwrap();
            worst = worst.max(x.max_diff(&build_bkc_excitation_direct(&b, bc).unwrap()));
            let y = excitation_matrix(&build_modbkc_quadratic(&m, bc).unwrap()).unwrap();
            worst = worst.max(y.max_diff(&build_modbkc_excitation_direct(&m, bc).unwrap()));
        }
    }
    report(10, worst < 1e-13, format!("max entrywise difference {worst:.3e} over 100 draws x 2 models x 2 boundaries"));
}

#[test]
fn winding_numeric_matches_analytic_on_quoted_sets() {
    for p in [modp(2.2, 1.0, 2.1, 1.5, 0.0), modp(1.0, 1.4, 1.5, 2.1, 0.0), modp(1.2, 0.0, 1.5, 1.0, 0.0)] {
        assert_eq!(winding_numeric(&effective_ssh_params(&p), 1024).unwrap(), winding_analytic(&p).unwrap());
    }
}
