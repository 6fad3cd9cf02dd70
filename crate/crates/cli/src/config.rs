//! Run configuration: a TOML file holding either one run or a list of panels.
//!
//! Top-level keys act as defaults for every `[[panel]]`; a panel key replaces
//! the default of the same name wholesale (tables are not merged).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use bkc_core::disorder::DisorderSpec;
use bkc_core::floquet::DriveSpec;
use bkc_core::model::{BkcParams, BoundaryCondition, ModBkcParams, ModParam};
use bkc_core::topology::AxisSpec;
use serde::{Deserialize, Serialize};

/// Invalid or incomplete configuration; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Profiles,
    Winding,
    PhaseScan,
    Disorder,
    Floquet,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Profiles => "profiles",
            Command::Winding => "winding",
            Command::PhaseScan => "phase-scan",
            Command::Disorder => "disorder",
            Command::Floquet => "floquet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bkc,
    Modbkc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcChoice {
    Obc,
    Pbc,
    Both,
}

impl BcChoice {
    pub fn list(self) -> Vec<BoundaryCondition> {
        match self {
            BcChoice::Obc => vec![BoundaryCondition::Open],
            BcChoice::Pbc => vec![BoundaryCondition::Periodic],
            BcChoice::Both => vec![BoundaryCondition::Open, BoundaryCondition::Periodic],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: String,
    pub min: f64,
    pub max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    /// Same strength on every parameter.
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    /// Strength per parameter name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strengths: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetConfig {
    pub lambda: AxisConfig,
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(rename = "Jt1")]
    pub jt1: f64,
    #[serde(rename = "Jt2")]
    pub jt2: f64,
    #[serde(rename = "Dt1")]
    pub dt1: f64,
    #[serde(rename = "Dt2")]
    pub dt2: f64,
    #[serde(default)]
    pub phi1: f64,
    #[serde(default)]
    pub phi2: f64,
}

/// Every key a run or panel may set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fields {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(rename = "J0", default, skip_serializing_if = "Option::is_none")]
    pub j0: Option<f64>,
    #[serde(rename = "Delta0", default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(rename = "J1", default, skip_serializing_if = "Option::is_none")]
    pub j1: Option<f64>,
    #[serde(rename = "J2", default, skip_serializing_if = "Option::is_none")]
    pub j2: Option<f64>,
    #[serde(rename = "Delta1", default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(rename = "Delta2", default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<AxisConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<AxisConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_frac: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nhse_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_mode_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_mode_max_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winding_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floquet: Option<FloquetConfig>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Fields { $($f: $top.$f.clone().or_else(|| $base.$f.clone())),* }
    };
}

impl Fields {
    /// `self` with every unset key taken from `defaults`.
    pub fn over(&self, defaults: &Fields) -> Fields {
        overlay!(
            defaults,
            self,
            model,
            j0,
            delta0,
            j1,
            j2,
            delta1,
            delta2,
            omega,
            n,
            bc,
            sweep,
            axes,
            zero_tol,
            edge_frac,
            nhse_threshold,
            edge_mode_weight,
            edge_mode_max_e,
            winding_grid,
            disorder,
            floquet
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Bkc(BkcParams),
    ModBkc(ModBkcParams),
}

impl Model {
    pub fn n(&self) -> usize {
        match self {
            Model::Bkc(p) => p.n,
            Model::ModBkc(p) => p.n,
        }
    }

    /// Copy with parameter `name` set to `v`, validated.
    pub fn with(&self, name: &str, v: f64) -> Result<Model, String> {
        match self {
            Model::Bkc(p) => {
                let mut q = *p;
                match name {
                    "J0" => q.j0 = v,
                    "Delta0" => q.delta0 = v,
                    "omega" => q.omega = v,
                    _ => return Err(format!("parameter `{name}` does not exist in model bkc (J0, Delta0, omega)")),
                }
                q.validate().map_err(|e| e.to_string())?;
                Ok(Model::Bkc(q))
            }
            Model::ModBkc(p) => {
                let param = ModParam::from_name(name).ok_or_else(|| {
                    format!("parameter `{name}` does not exist in model modbkc (J1, J2, Delta1, Delta2, omega)")
                })?;
                let mut q = *p;
                param.set(&mut q, v);
                q.validate().map_err(|e| e.to_string())?;
                Ok(Model::ModBkc(q))
            }
        }
    }
}

/// One-dimensional parameter sweep; `param` may be `W` for disorder runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub zero_tol: Option<f64>,
    pub edge_frac: f64,
    pub nhse_threshold: f64,
    pub edge_mode_weight: f64,
    pub edge_mode_max_e: Option<f64>,
    pub winding_grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Spectrum {
        model: Model,
        bcs: Vec<BoundaryCondition>,
        sweep: Option<Sweep>,
    },
    Profiles {
        model: Model,
        bcs: Vec<BoundaryCondition>,
        analysis: Analysis,
    },
    Winding {
        params: ModBkcParams,
        sweep: Option<Sweep>,
        analysis: Analysis,
    },
    PhaseScan {
        params: ModBkcParams,
        bc: BoundaryCondition,
        axes: Vec<AxisSpec>,
        analysis: Analysis,
    },
    Disorder {
        params: ModBkcParams,
        bc: BoundaryCondition,
        spec: DisorderSpec,
        sweep: Option<Sweep>,
        analysis: Analysis,
    },
    Floquet {
        drive: DriveSpec,
        lambdas: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub name: String,
    pub command: Command,
    /// Effective keys after applying defaults and CLI overrides.
    pub fields: Fields,
    pub job: Job,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub title: Option<String>,
    pub panels: Vec<Panel>,
}

/// Settings given on the command line that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
}

pub fn load(path: &Path, command: Command, overrides: Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text, command, overrides)
}

fn fields_from(table: toml::Table, what: &str) -> Result<Fields, ConfigError> {
    Fields::deserialize(toml::Value::Table(table)).map_err(|e| ConfigError(format!("{what}: {}", e.message())))
}

fn take_string(table: &mut toml::Table, key: &str, what: &str) -> Result<Option<String>, ConfigError> {
    match table.remove(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s)),
        Some(v) => err(format!("{what}: `{key}` must be a string, got {}", v.type_str())),
    }
}

fn parse_command(s: &str, what: &str) -> Result<Command, ConfigError> {
    Command::deserialize(toml::Value::String(s.to_owned()))
        .map_err(|_| ConfigError(format!("{what}: unknown command `{s}`")))
}

pub fn parse(text: &str, command: Command, overrides: Overrides) -> Result<RunConfig, ConfigError> {
    let mut top: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(format!("config: {e}")))?;
    let title = take_string(&mut top, "title", "config")?;
    let top_command = take_string(&mut top, "command", "config")?;
    let panel_values = top.remove("panel");
    let defaults = fields_from(top, "config")?;

    let mut panels = Vec::new();
    match panel_values {
        None => {
            if let Some(c) = top_command {
                let c = parse_command(&c, "config")?;
                if c != command {
                    return err(format!("config is for command `{}`, not `{}`", c.name(), command.name()));
                }
            }
            panels.push(resolve("main".into(), command, defaults, overrides)?);
        }
        Some(toml::Value::Array(list)) => {
            if top_command.is_some() {
                return err("config: `command` belongs inside each [[panel]] when panels are used");
            }
            let mut seen = std::collections::BTreeSet::new();
            for (k, v) in list.into_iter().enumerate() {
                let toml::Value::Table(mut t) = v else {
                    return err(format!("panel {k}: must be a table"));
                };
                let name = take_string(&mut t, "name", &format!("panel {k}"))?
                    .ok_or_else(|| ConfigError(format!("panel {k}: missing required key `name`")))?;
                let what = format!("panel `{name}`");
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                    return err(format!("{what}: name may only contain letters, digits, `-` and `_`"));
                }
                if !seen.insert(name.clone()) {
                    return err(format!("{what}: duplicate panel name"));
                }
                let c = take_string(&mut t, "command", &what)?
                    .ok_or_else(|| ConfigError(format!("{what}: missing required key `command`")))?;
                let c = parse_command(&c, &what)?;
                let fields = fields_from(t, &what)?.over(&defaults);
                if c == command {
                    panels.push(resolve(name, c, fields, overrides)?);
                } else {
                    // Panels for other commands are still checked, so a broken
                    // figure config fails whichever command is run first.
                    resolve(name, c, fields, overrides)?;
                }
            }
            if panels.is_empty() {
                return err(format!("config has no panel for command `{}`", command.name()));
            }
        }
        Some(v) => return err(format!("config: `panel` must be an array of tables, got {}", v.type_str())),
    }
    Ok(RunConfig { command, title, panels })
}

fn required<T: Copy>(v: Option<T>, key: &str, what: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError(format!("{what}: missing required key `{key}`")))
}

fn reject(present: bool, key: &str, what: &str, why: &str) -> Result<(), ConfigError> {
    if present {
        return err(format!("{what}: key `{key}` {why}"));
    }
    Ok(())
}

fn resolve_model(f: &Fields, what: &str) -> Result<Model, ConfigError> {
    let kind = required(f.model, "model", what)?;
    let n = required(f.n, "N", what)?;
    let omega = required(f.omega, "omega", what)?;
    let model = match kind {
        ModelKind::Bkc => {
            for (key, v) in [("J1", f.j1), ("J2", f.j2), ("Delta1", f.delta1), ("Delta2", f.delta2)] {
                reject(v.is_some(), key, what, "does not apply to model bkc")?;
            }
            BkcParams::new(required(f.j0, "J0", what)?, required(f.delta0, "Delta0", what)?, omega, n).map(Model::Bkc)
        }
        ModelKind::Modbkc => {
            for (key, v) in [("J0", f.j0), ("Delta0", f.delta0)] {
                reject(v.is_some(), key, what, "does not apply to model modbkc")?;
            }
            ModBkcParams::new(
                required(f.j1, "J1", what)?,
                required(f.j2, "J2", what)?,
                required(f.delta1, "Delta1", what)?,
                required(f.delta2, "Delta2", what)?,
                omega,
                n,
            )
            .map(Model::ModBkc)
        }
    };
    model.map_err(|e| ConfigError(format!("{what}: {e}")))
}

fn modbkc(f: &Fields, what: &str, command: Command) -> Result<ModBkcParams, ConfigError> {
    match resolve_model(f, what)? {
        Model::ModBkc(p) => Ok(p),
        Model::Bkc(_) => err(format!("{what}: command `{}` needs model = \"modbkc\"", command.name())),
    }
}

fn axis_values(a: &AxisConfig, what: &str) -> Result<Vec<f64>, ConfigError> {
    let spec = AxisSpec { param: ModParam::J1, min: a.min, max: a.max, step: a.step.unwrap_or(0.0) };
    if a.step.is_none() && a.max != a.min {
        return err(format!("{what}: axis `{}` needs `step` when min != max", a.param));
    }
    let v = spec.values().map_err(|e| ConfigError(format!("{what}: axis `{}`: {e}", a.param)))?;
    if v.len() > 100_000 {
        return err(format!("{what}: axis `{}` has {} points, more than 100000", a.param, v.len()));
    }
    Ok(v)
}

/// Checks every sweep value against the model so failures surface before computing.
fn sweep(a: &AxisConfig, model: &Model, allow_w: bool, what: &str) -> Result<Sweep, ConfigError> {
    let values = axis_values(a, what)?;
    if allow_w && a.param == "W" {
        if values.iter().any(|&w| w < 0.0) {
            return err(format!("{what}: disorder strength W must be non-negative"));
        }
    } else {
        for &v in &values {
            model.with(&a.param, v).map_err(|e| ConfigError(format!("{what}: sweep {}={v}: {e}", a.param)))?;
        }
    }
    Ok(Sweep { param: a.param.clone(), values })
}

fn analysis(f: &Fields, what: &str) -> Result<Analysis, ConfigError> {
    let a = Analysis {
        zero_tol: f.zero_tol,
        edge_frac: f.edge_frac.unwrap_or(0.1),
        nhse_threshold: f.nhse_threshold.unwrap_or(0.9),
        edge_mode_weight: f.edge_mode_weight.unwrap_or(0.9),
        edge_mode_max_e: f.edge_mode_max_e,
        winding_grid: f.winding_grid.unwrap_or(1024),
    };
    if let Some(t) = a.zero_tol {
        if !(t > 0.0 && t.is_finite()) {
            return err(format!("{what}: zero_tol must be positive, got {t}"));
        }
    }
    if !(a.edge_frac > 0.0 && a.edge_frac <= 0.5) {
        return err(format!("{what}: edge_frac must lie in (0, 0.5], got {}", a.edge_frac));
    }
    for (key, v) in [("nhse_threshold", a.nhse_threshold), ("edge_mode_weight", a.edge_mode_weight)] {
        if !(0.0..=1.0).contains(&v) {
            return err(format!("{what}: {key} must lie in [0, 1], got {v}"));
        }
    }
    if let Some(e) = a.edge_mode_max_e {
        if !(e >= 0.0 && e.is_finite()) {
            return err(format!("{what}: edge_mode_max_e must be non-negative, got {e}"));
        }
    }
    if a.winding_grid < 64 {
        return err(format!("{what}: winding_grid must be at least 64, got {}", a.winding_grid));
    }
    Ok(a)
}

fn single_bc(f: &Fields, what: &str) -> Result<BoundaryCondition, ConfigError> {
    match f.bc.unwrap_or(BcChoice::Obc) {
        BcChoice::Both => err(format!("{what}: bc = \"both\" is not supported here; choose obc or pbc")),
        b => Ok(b.list()[0]),
    }
}

fn resolve(name: String, command: Command, mut fields: Fields, overrides: Overrides) -> Result<Panel, ConfigError> {
    let what = format!("panel `{name}` ({})", command.name());
    if let (Some(seed), Some(d)) = (overrides.seed, fields.disorder.as_mut()) {
        d.seed = Some(seed);
    }
    let f = &fields;
    let not_used =
        |present: bool, key: &str| reject(present, key, &what, &format!("is not used by `{}`", command.name()));
    let job = match command {
        Command::Spectrum => {
            not_used(f.axes.is_some(), "axes")?;
            not_used(f.disorder.is_some(), "disorder")?;
            let model = resolve_model(f, &what)?;
            let sweep = f.sweep.as_ref().map(|a| sweep(a, &model, false, &what)).transpose()?;
            Job::Spectrum { model, bcs: f.bc.unwrap_or(BcChoice::Both).list(), sweep }
        }
        Command::Profiles => {
            not_used(f.sweep.is_some(), "sweep")?;
            not_used(f.axes.is_some(), "axes")?;
            not_used(f.disorder.is_some(), "disorder")?;
            let model = resolve_model(f, &what)?;
            Job::Profiles { model, bcs: f.bc.unwrap_or(BcChoice::Obc).list(), analysis: analysis(f, &what)? }
        }
        Command::Winding => {
            not_used(f.axes.is_some(), "axes")?;
            not_used(f.disorder.is_some(), "disorder")?;
            let params = modbkc(f, &what, command)?;
            let sweep = f.sweep.as_ref().map(|a| sweep(a, &Model::ModBkc(params), false, &what)).transpose()?;
            Job::Winding { params, sweep, analysis: analysis(f, &what)? }
        }
        Command::PhaseScan => {
            not_used(f.sweep.is_some(), "sweep")?;
            not_used(f.disorder.is_some(), "disorder")?;
            let params = modbkc(f, &what, command)?;
            let list = f.axes.as_ref().ok_or_else(|| ConfigError(format!("{what}: missing required key `axes`")))?;
            if list.is_empty() || list.len() > 2 {
                return err(format!("{what}: `axes` needs 1 or 2 entries, got {}", list.len()));
            }
            let mut axes = Vec::new();
            for a in list {
                let s = sweep(a, &Model::ModBkc(params), false, &what)?;
                let param = ModParam::from_name(&s.param).expect("checked by sweep");
                axes.push(AxisSpec { param, min: a.min, max: a.max, step: a.step.unwrap_or(0.0) });
            }
            Job::PhaseScan { params, bc: single_bc(f, &what)?, axes, analysis: analysis(f, &what)? }
        }
        Command::Disorder => {
            not_used(f.axes.is_some(), "axes")?;
            let params = modbkc(f, &what, command)?;
            let d =
                f.disorder.as_ref().ok_or_else(|| ConfigError(format!("{what}: missing required table `disorder`")))?;
            let realizations = d.realizations.unwrap_or(20);
            let seed = d.seed.unwrap_or(0);
            let spec = match (&d.w, &d.strengths) {
                (Some(_), Some(_)) => {
                    return err(format!("{what}: give either disorder.W or disorder.strengths, not both"))
                }
                (Some(w), None) => DisorderSpec::all(*w, seed, realizations),
                (None, Some(map)) => {
                    DisorderSpec::from_names(map.iter().map(|(k, v)| (k.as_str(), *v)), seed, realizations)
                }
                (None, None) => return err(format!("{what}: disorder needs `W` or `strengths`")),
            }
            .map_err(|e| ConfigError(format!("{what}: disorder: {e}")))?;
            let sweep = f.sweep.as_ref().map(|a| sweep(a, &Model::ModBkc(params), true, &what)).transpose()?;
            Job::Disorder { params, bc: single_bc(f, &what)?, spec, sweep, analysis: analysis(f, &what)? }
        }
        Command::Floquet => {
            not_used(f.sweep.is_some(), "sweep")?;
            not_used(f.axes.is_some(), "axes")?;
            not_used(f.disorder.is_some(), "disorder")?;
            let fl =
                f.floquet.as_ref().ok_or_else(|| ConfigError(format!("{what}: missing required table `floquet`")))?;
            if fl.lambda.param != "lambda" {
                return err(format!("{what}: floquet.lambda.param must be \"lambda\", got `{}`", fl.lambda.param));
            }
            let lambdas = axis_values(&fl.lambda, &what)?;
            let drive = DriveSpec {
                lambda: lambdas[0],
                period: fl.period,
                jt1: fl.jt1,
                jt2: fl.jt2,
                dt1: fl.dt1,
                dt2: fl.dt2,
                phi1: fl.phi1,
                phi2: fl.phi2,
            };
            drive.validate().map_err(|e| ConfigError(format!("{what}: floquet: {e}")))?;
            Job::Floquet { drive, lambdas }
        }
    };
    Ok(Panel { name, command, fields, job })
}
