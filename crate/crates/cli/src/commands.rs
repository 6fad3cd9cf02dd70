//! Computations behind each subcommand; every panel yields its files in memory.

use bkc_core::c64;
use bkc_core::disorder::{ensemble_observables, DisorderSpec, EnsembleOptions, EnsembleResult};
use bkc_core::floquet::{bessel_j0, effective_params, DriveSpec};
use bkc_core::model::{
    build_bkc_excitation_direct, build_modbkc_excitation_direct, BoundaryCondition, ExcitationMatrix, ModBkcParams,
};
use bkc_core::skin::{nhse_fraction, profiles};
use bkc_core::spectral::{eigendecompose, eigenvalues, zero_gap};
use bkc_core::topology::{
    default_zero_tol, half_bulk_gap, phase_scan, winding_analytic, winding_numeric, zero_modes, AxisSpec, PhaseDiagram,
    ScanOptions, WindingResult,
};
use bkc_core::transform::effective_ssh_params;
use rayon::prelude::*;

use crate::config::{Analysis, Job, Model, Panel, Sweep};
use crate::output::{Cell, Csv, Files};
use crate::svg::{heatmap, xy_plot, Series, BLACK, BLUE, GREEN, RED};

/// A failed computation, naming the sub-task; maps to exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeError(pub String);

type Result<T> = std::result::Result<T, ComputeError>;

fn fail<E: std::fmt::Display>(task: impl std::fmt::Display) -> impl FnOnce(E) -> ComputeError {
    move |e| ComputeError(format!("{task}: {e}"))
}

pub fn run(panel: &Panel, plots: bool) -> Result<Files> {
    let mut files = Files::new(plots);
    match &panel.job {
        Job::Spectrum { model, bcs, sweep } => spectrum(model, bcs, sweep.as_ref(), &mut files)?,
        Job::Profiles { model, bcs, analysis } => profile_maps(model, bcs, analysis, &mut files)?,
        Job::Winding { params, sweep, analysis } => winding(params, sweep.as_ref(), analysis, &mut files)?,
        Job::PhaseScan { params, bc, axes, analysis } => scan(params, *bc, axes, analysis, &mut files)?,
        Job::Disorder { params, bc, spec, sweep, analysis } => {
            disorder(params, *bc, spec, sweep.as_ref(), analysis, &mut files)?
        }
        Job::Floquet { drive, lambdas } => floquet(drive, lambdas, &mut files)?,
    }
    Ok(files)
}

fn matrix(model: &Model, bc: BoundaryCondition) -> std::result::Result<ExcitationMatrix, bkc_core::Error> {
    match model {
        Model::Bkc(p) => build_bkc_excitation_direct(p, bc),
        Model::ModBkc(p) => build_modbkc_excitation_direct(p, bc),
    }
}

fn color(bc: BoundaryCondition) -> &'static str {
    match bc {
        BoundaryCondition::Open => RED,
        BoundaryCondition::Periodic => BLUE,
    }
}

fn model_at(model: &Model, sweep: &Sweep, v: f64) -> Result<Model> {
    model.with(&sweep.param, v).map_err(|e| ComputeError(format!("{}={v}: {e}", sweep.param)))
}

fn spectrum(model: &Model, bcs: &[BoundaryCondition], sweep: Option<&Sweep>, files: &mut Files) -> Result<()> {
    let mut series_re = Vec::new();
    let mut series_im = Vec::new();
    let mut series_plane = Vec::new();
    for &bc in bcs {
        let tag = bc.label();
        match sweep {
            None => {
                let e =
                    eigenvalues(&matrix(model, bc).map_err(fail(tag))?).map_err(fail(format!("{tag} eigenvalues")))?;
                let mut csv = Csv::new(&["index", "re_E", "im_E"]);
                for (k, z) in e.iter().enumerate() {
                    csv.row(vec![k.into(), z.re.into(), z.im.into()]);
                }
                files.csv(format!("{tag}.csv"), csv);
                series_plane.push(Series::scatter(
                    tag.to_uppercase(),
                    color(bc),
                    e.iter().map(|z| (z.re, z.im)).collect(),
                ));
            }
            Some(s) => {
                let all: Vec<(f64, Vec<c64>)> = s
                    .values
                    .par_iter()
                    .map(|&v| {
                        let m =
                            matrix(&model_at(model, s, v)?, bc).map_err(fail(format!("{tag} at {}={v}", s.param)))?;
                        let e = eigenvalues(&m).map_err(fail(format!("{tag} eigenvalues at {}={v}", s.param)))?;
                        Ok((v, e))
                    })
                    .collect::<Result<_>>()?;
                let mut csv = Csv::new(&[s.param.as_str(), "index", "re_E", "im_E"]);
                for (v, e) in &all {
                    for (k, z) in e.iter().enumerate() {
                        csv.row(vec![(*v).into(), k.into(), z.re.into(), z.im.into()]);
                    }
                }
                files.csv(format!("{tag}.csv"), csv);
                let pts =
                    |f: fn(&c64) -> f64| all.iter().flat_map(|(v, e)| e.iter().map(move |z| (*v, f(z)))).collect();
                series_re.push(Series::scatter(tag.to_uppercase(), color(bc), pts(|z| z.re)));
                series_im.push(Series::scatter(tag.to_uppercase(), color(bc), pts(|z| z.im)));
            }
        }
    }
    match sweep {
        None => files.svg("spectrum.svg", || xy_plot("Excitation spectrum", "Re E", "Im E", &series_plane)),
        Some(s) => {
            files.svg("spectrum_re.svg", || xy_plot("Excitation spectrum", &s.param, "Re E", &series_re));
            files.svg("spectrum_im.svg", || xy_plot("Excitation spectrum", &s.param, "Im E", &series_im));
        }
    }
    Ok(())
}

fn profile_maps(model: &Model, bcs: &[BoundaryCondition], a: &Analysis, files: &mut Files) -> Result<()> {
    for &bc in bcs {
        let tag = bc.label();
        let m = matrix(model, bc).map_err(fail(tag))?;
        let s = eigendecompose(&m).map_err(fail(format!("{tag} eigendecomposition")))?;
        let ps = profiles(&s).map_err(fail(format!("{tag} profiles")))?;
        let dim = s.len();
        let mut header = vec!["state".to_owned()];
        header.extend((0..dim).map(|k| format!("b{k}")));
        let mut csv = Csv::new(&header);
        for (k, p) in ps.iter().enumerate() {
            let mut row: Vec<Cell> = vec![k.into()];
            row.extend(p.prob.iter().map(|&x| Cell::F(x)));
            csv.row(row);
        }
        files.csv(format!("profiles_{tag}.csv"), csv);

        let mut ev = Csv::new(&["index", "re_E", "im_E"]);
        for (k, z) in s.eigenvalues.iter().enumerate() {
            ev.row(vec![k.into(), z.re.into(), z.im.into()]);
        }
        files.csv(format!("eigenvalues_{tag}.csv"), ev);

        let fraction =
            nhse_fraction(&s, a.edge_frac, a.nhse_threshold).map_err(fail(format!("{tag} nhse fraction")))?;
        let tol = a.zero_tol.unwrap_or_else(|| default_zero_tol(&s));
        let mut summary = Csv::new(&["nhse_fraction", "edge_frac", "threshold", "zero_modes", "zero_tol", "zero_gap"]);
        let gap = zero_gap(&s).map_err(fail(format!("{tag} zero gap")))?;
        summary.row(vec![
            fraction.into(),
            a.edge_frac.into(),
            a.nhse_threshold.into(),
            zero_modes(&s, tol).count.into(),
            tol.into(),
            gap.into(),
        ]);
        files.csv(format!("summary_{tag}.csv"), summary);

        let n = model.n();
        files.svg(format!("profiles_{tag}.svg"), || {
            let rows: Vec<Vec<f64>> = ps.iter().map(|p| p.per_cell()).collect();
            heatmap(
                &format!("Eigenstate profiles ({})", tag.to_uppercase()),
                "cell j",
                "eigenstate index",
                &rows,
                (0.0, n as f64),
                (0.0, dim as f64),
            )
        });
    }
    Ok(())
}

fn winding_cells(w: Option<WindingResult>) -> [Cell; 2] {
    [w.map(|w| w.w_plus).into(), w.map(|w| w.w_minus).into()]
}

fn winding(params: &ModBkcParams, sweep: Option<&Sweep>, a: &Analysis, files: &mut Files) -> Result<()> {
    let points: Vec<(Option<f64>, ModBkcParams)> = match sweep {
        None => vec![(None, *params)],
        Some(s) => s
            .values
            .iter()
            .map(|&v| match model_at(&Model::ModBkc(*params), s, v)? {
                Model::ModBkc(p) => Ok((Some(v), p)),
                Model::Bkc(_) => unreachable!("winding runs on the two-sublattice chain"),
            })
            .collect::<Result<_>>()?,
    };
    let mut header: Vec<String> = sweep.map(|s| vec![s.param.clone()]).unwrap_or_default();
    header.extend(
        [
            "re_dtilde1",
            "im_dtilde1",
            "re_dtilde2",
            "im_dtilde2",
            "w_plus",
            "w_minus",
            "w_plus_analytic",
            "w_minus_analytic",
            "status",
        ]
        .map(String::from),
    );
    let mut csv = Csv::new(&header);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (v, p) in points {
        let eff = effective_ssh_params(&p);
        let (numeric, status) = match winding_numeric(&eff, a.winding_grid) {
            Ok(w) => (Some(w), "ok"),
            Err(bkc_core::Error::GapClosed { .. }) => (None, "gapless"),
            Err(bkc_core::Error::NonIntegerWinding { .. }) => (None, "non-integer"),
            Err(e) => return Err(ComputeError(format!("winding: {e}"))),
        };
        let analytic = winding_analytic(&p).ok();
        let mut row: Vec<Cell> = v.map(|v| vec![Cell::F(v)]).unwrap_or_default();
        row.extend([eff.dtilde1.re.into(), eff.dtilde1.im.into(), eff.dtilde2.re.into(), eff.dtilde2.im.into()]);
        row.extend(winding_cells(numeric));
        row.extend(winding_cells(analytic));
        row.push(status.into());
        csv.row(row);
        if let (Some(v), Some(w)) = (v, numeric) {
            plus.push((v, w.w_plus as f64));
            minus.push((v, w.w_minus as f64));
        }
    }
    files.csv("winding.csv", csv);
    if let Some(s) = sweep {
        files.svg("winding.svg", || {
            xy_plot("Winding numbers", &s.param, "w", &[Series::line("w+", RED, plus), Series::line("w-", BLUE, minus)])
        });
    }
    Ok(())
}

fn scan(
    params: &ModBkcParams,
    bc: BoundaryCondition,
    axes: &[AxisSpec],
    a: &Analysis,
    files: &mut Files,
) -> Result<()> {
    let opts = ScanOptions {
        bc,
        zero_tol: a.zero_tol,
        edge_frac: a.edge_frac,
        nhse_threshold: a.nhse_threshold,
        edge_mode_weight: a.edge_mode_weight,
        winding_grid: a.winding_grid,
    };
    let d: PhaseDiagram = phase_scan(params, axes, &opts).map_err(fail("phase scan"))?;
    let mut header: Vec<String> = axes.iter().map(|x| x.param.name().to_owned()).collect();
    header.extend(
        [
            "abs_E_min",
            "zero_modes",
            "w_plus",
            "w_minus",
            "w_plus_analytic",
            "w_minus_analytic",
            "edge_modes",
            "nhse_fraction",
            "status",
        ]
        .map(String::from),
    );
    let mut csv = Csv::new(&header);
    let mut failures = Csv::new(&[header[..axes.len()].to_vec(), vec!["error".to_owned()]].concat());
    for pt in &d.points {
        let mut row: Vec<Cell> = pt.coords.iter().map(|&c| Cell::F(c)).collect();
        match &pt.record {
            Ok(r) => {
                let (numeric, status) = match r.winding {
                    bkc_core::topology::WindingStatus::Defined(w) => (Some(w), "ok"),
                    bkc_core::topology::WindingStatus::Gapless => (None, "gapless"),
                    bkc_core::topology::WindingStatus::NonInteger => (None, "non-integer"),
                };
                row.extend([r.zero_gap.into(), r.zero_modes.into()]);
                row.extend(winding_cells(numeric));
                row.extend(winding_cells(r.winding_analytic));
                row.extend([r.edge_modes.into(), r.nhse_fraction.into(), status.into()]);
            }
            Err(e) => {
                row.extend((0..8).map(|_| Cell::Na));
                row.push("error".into());
                let mut f: Vec<Cell> = pt.coords.iter().map(|&c| Cell::F(c)).collect();
                f.push(Cell::S(e.clone()));
                failures.row(f);
            }
        }
        csv.row(row);
    }
    files.csv("scan.csv", csv);
    files.csv("failures.csv", failures);

    let ok = |f: fn(&bkc_core::topology::PointRecord) -> f64| -> Vec<f64> {
        d.points.iter().map(|p| p.record.as_ref().map(f).unwrap_or(f64::NAN)).collect()
    };
    let gap = ok(|r| r.zero_gap);
    let modes = ok(|r| r.zero_modes as f64);
    let wplus = ok(|r| match r.winding {
        bkc_core::topology::WindingStatus::Defined(w) => w.w_plus as f64,
        _ => f64::NAN,
    });
    match axes {
        [x] => {
            let name = x.param.name();
            let xs: Vec<f64> = d.points.iter().map(|p| p.coords[0]).collect();
            let zip = |ys: &[f64]| xs.iter().copied().zip(ys.iter().copied()).collect::<Vec<_>>();
            files.svg("scan.svg", || {
                xy_plot(
                    &format!("Smallest |E| vs {name}"),
                    name,
                    "min |E|",
                    &[Series::line("min |E|", BLACK, zip(&gap)), Series::scatter("min |E|", RED, zip(&gap))],
                )
            });
            files.svg("scan_counts.svg", || {
                xy_plot(
                    &format!("Zero modes and winding vs {name}"),
                    name,
                    "count / winding",
                    &[Series::line("zero modes", RED, zip(&modes)), Series::line("w+", BLUE, zip(&wplus))],
                )
            });
        }
        [y, x] => {
            let (ny, nx) = (d.shape[0], d.shape[1]);
            let grid = |v: &[f64]| (0..ny).map(|i| v[i * nx..(i + 1) * nx].to_vec()).collect::<Vec<_>>();
            let (xr, yr) = ((x.min, x.max), (y.min, y.max));
            files.svg("scan_wplus.svg", || heatmap("w+", x.param.name(), y.param.name(), &grid(&wplus), xr, yr));
            files.svg("scan_zero_modes.svg", || {
                heatmap("zero modes", x.param.name(), y.param.name(), &grid(&modes), xr, yr)
            });
            files.svg("scan_gap.svg", || heatmap("min |E|", x.param.name(), y.param.name(), &grid(&gap), xr, yr));
        }
        _ => unreachable!("axes validated to 1 or 2 entries"),
    }
    Ok(())
}

/// Spec with every listed strength replaced by `w`.
fn with_strength(spec: &DisorderSpec, w: f64) -> Result<DisorderSpec> {
    let strengths = spec.strengths.keys().map(|&k| (k, w)).collect();
    DisorderSpec::new(strengths, spec.seed, spec.realizations).map_err(fail(format!("W={w}")))
}

type Getter = fn(&EnsembleResult) -> bkc_core::disorder::Summary;

fn disorder(
    params: &ModBkcParams,
    bc: BoundaryCondition,
    spec: &DisorderSpec,
    sweep: Option<&Sweep>,
    a: &Analysis,
    files: &mut Files,
) -> Result<()> {
    let points: Vec<(Option<f64>, ModBkcParams, DisorderSpec)> = match sweep {
        None => vec![(None, *params, spec.clone())],
        Some(s) if s.param == "W" => {
            s.values.iter().map(|&w| Ok((Some(w), *params, with_strength(spec, w)?))).collect::<Result<_>>()?
        }
        Some(s) => s
            .values
            .iter()
            .map(|&v| match model_at(&Model::ModBkc(*params), s, v)? {
                Model::ModBkc(p) => Ok((Some(v), p, spec.clone())),
                Model::Bkc(_) => unreachable!("disorder runs on the two-sublattice chain"),
            })
            .collect::<Result<_>>()?,
    };
    // Sweep points run one after another; realizations inside each run in parallel.
    let mut results: Vec<(Option<f64>, EnsembleResult)> = Vec::new();
    for (v, p, sp) in &points {
        let opts = EnsembleOptions {
            bc,
            zero_tol: a.zero_tol,
            edge_frac: a.edge_frac,
            nhse_threshold: a.nhse_threshold,
            edge_mode_max_e: a.edge_mode_max_e.unwrap_or_else(|| half_bulk_gap(&effective_ssh_params(p))),
            edge_mode_weight: a.edge_mode_weight,
            keep_abs_spectrum: true,
            keep_state_profiles: sweep.is_none(),
        };
        let task = match (sweep, v) {
            (Some(s), Some(v)) => format!("ensemble at {}={v}", s.param),
            _ => "ensemble".to_owned(),
        };
        results.push((*v, ensemble_observables(p, sp, &opts).map_err(fail(task))?));
    }

    let lead: Vec<String> = sweep.map(|s| vec![s.param.clone()]).unwrap_or_default();
    let lead_cells = |v: Option<f64>| -> Vec<Cell> { v.map(|v| vec![Cell::F(v)]).unwrap_or_default() };
    let with_lead = |rest: &[&str]| [lead.clone(), rest.iter().map(|s| s.to_string()).collect()].concat();

    let mut per = Csv::new(&with_lead(&["realization", "zero_gap", "zero_modes", "edge_modes", "nhse_fraction"]));
    let mut failures = Csv::new(&with_lead(&["realization", "error"]));
    for (v, r) in &results {
        for rec in &r.records {
            let mut row = lead_cells(*v);
            row.extend([
                rec.realization.into(),
                rec.zero_gap.into(),
                rec.zero_modes.into(),
                rec.edge_modes.into(),
                rec.nhse_fraction.into(),
            ]);
            per.row(row);
        }
        for (k, e) in &r.failures {
            let mut row = lead_cells(*v);
            row.extend([(*k).into(), Cell::S(e.clone())]);
            failures.row(row);
        }
    }
    files.csv("realizations.csv", per);
    files.csv("failures.csv", failures);

    let observables: [(&str, Getter); 4] = [
        ("zero_gap", |r| r.zero_gap),
        ("zero_modes", |r| r.zero_modes),
        ("edge_modes", |r| r.edge_modes),
        ("nhse_fraction", |r| r.nhse_fraction),
    ];
    for (name, get) in observables {
        let mut agg = Csv::new(&with_lead(&["mean", "std", "n"]));
        for (v, r) in &results {
            let s = get(r);
            let mut row = lead_cells(*v);
            row.extend([s.mean.into(), s.std.into(), s.n.into()]);
            agg.row(row);
        }
        files.csv(format!("aggregate_{name}.csv"), agg);
    }

    let mut abs = Csv::new(&with_lead(&["index", "mean", "std", "n"]));
    for (v, r) in &results {
        for (k, s) in r.abs_spectrum.iter().flatten().enumerate() {
            let mut row = lead_cells(*v);
            row.extend([k.into(), s.mean.into(), s.std.into(), s.n.into()]);
            abs.row(row);
        }
    }
    files.csv("abs_spectrum.csv", abs);

    match sweep {
        Some(s) => {
            let pts: Vec<(f64, f64)> = results
                .iter()
                .flat_map(|(v, r)| r.abs_spectrum.iter().flatten().map(move |x| (v.unwrap_or(0.0), x.mean)))
                .collect();
            let gap: Vec<(f64, f64)> = results.iter().map(|(v, r)| (v.unwrap_or(0.0), r.zero_gap.mean)).collect();
            files.svg("abs_spectrum.svg", || {
                xy_plot("Disorder-averaged |E|", &s.param, "|E|", &[Series::scatter("mean |E|", RED, pts)])
            });
            files.svg("zero_gap.svg", || {
                xy_plot("Disorder-averaged min |E|", &s.param, "min |E|", &[Series::line("min |E|", GREEN, gap)])
            });
        }
        None => {
            let rows = results[0].1.state_profiles.clone().unwrap_or_default();
            let mut header = vec!["state".to_owned()];
            header.extend((0..params.n).map(|j| format!("c{j}")));
            let mut csv = Csv::new(&header);
            for (k, row) in rows.iter().enumerate() {
                let mut cells: Vec<Cell> = vec![k.into()];
                cells.extend(row.iter().map(|&x| Cell::F(x)));
                csv.row(cells);
            }
            files.csv("profiles.csv", csv);
            let n = params.n;
            files.svg("profiles.svg", || {
                heatmap(
                    "Disorder-averaged eigenstate profiles",
                    "cell j",
                    "eigenstate index",
                    &rows,
                    (0.0, n as f64),
                    (0.0, rows.len() as f64),
                )
            });
        }
    }
    Ok(())
}

fn floquet(drive: &DriveSpec, lambdas: &[f64], files: &mut Files) -> Result<()> {
    let mut csv = Csv::new(&["lambda", "re_J1", "im_J1", "re_J2", "im_J2", "abs_J0"]);
    let mut series = [Vec::new(), Vec::new(), Vec::new()];
    for &lambda in lambdas {
        let e = effective_params(&DriveSpec { lambda, ..*drive }).map_err(fail(format!("lambda={lambda}")))?;
        let j0 = bessel_j0(0.5 * std::f64::consts::PI * lambda).abs();
        csv.row(vec![lambda.into(), e.j1.re.into(), e.j1.im.into(), e.j2.re.into(), e.j2.im.into(), j0.into()]);
        series[0].push((lambda, e.j1.norm()));
        series[1].push((lambda, e.j2.norm()));
        series[2].push((lambda, j0));
    }
    files.csv("floquet.csv", csv);
    let [j1, j2, j0] = series;
    files.svg("floquet.svg", || {
        xy_plot(
            "Effective hoppings",
            "lambda",
            "magnitude",
            &[
                Series::line("|J1|", RED, j1),
                Series::line("|J2|", BLUE, j2),
                Series::line("|J0(pi lambda/2)|", BLACK, j0),
            ],
        )
    });
    Ok(())
}
