//! Command-line driver: reads a run configuration, computes every panel and
//! writes CSV tables, optional SVG plots and a manifest.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};

use serde::Serialize;

use config::{Command, ConfigError, Fields, Overrides, RunConfig};
use output::Files;

/// Environment variable holding the worker thread count; `--threads` wins.
pub const THREADS_ENV: &str = "BKC_THREADS";

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Compute(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Compute(_) | RunError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Compute(e) => write!(f, "compute error: {e}"),
            RunError::Io(e) => write!(f, "output error: {e}"),
        }
    }
}

pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub plots: bool,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Serialize)]
struct ManifestPanel<'a> {
    name: &'a str,
    command: &'a str,
    #[serde(flatten)]
    fields: &'a Fields,
}

#[derive(Serialize)]
struct ManifestOutput {
    path: String,
    panel: String,
    kind: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    title: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    plots: bool,
    threads: usize,
    version: &'a str,
    core_version: &'a str,
    panel: Vec<ManifestPanel<'a>>,
    output: Vec<ManifestOutput>,
}

/// Thread count from the flag, else the environment, else rayon's default.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, ConfigError> {
    if let Some(n) = flag {
        return match n {
            0 => Err(ConfigError("--threads must be at least 1".into())),
            n => Ok(Some(n)),
        };
    }
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
    }
}

fn default_out(config: &Path, command: Command) -> PathBuf {
    let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    PathBuf::from("out").join(stem).join(command.name())
}

/// Validates, computes every panel, then writes all outputs and the manifest.
pub fn execute(inv: &Invocation) -> Result<PathBuf, RunError> {
    let threads = thread_count(inv.threads).map_err(RunError::Config)?;
    let cfg: RunConfig =
        config::load(&inv.config, inv.command, Overrides { seed: inv.seed }).map_err(RunError::Config)?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| RunError::Compute(format!("thread pool: {e}")))?
    };
    let results: Vec<Files> = pool.install(|| {
        cfg.panels
            .iter()
            .map(|p| {
                commands::run(p, inv.plots)
                    .map_err(|e| RunError::Compute(format!("panel `{}` ({}): {}", p.name, p.command.name(), e.0)))
            })
            .collect::<Result<_, _>>()
    })?;

    let out = inv.out.clone().unwrap_or_else(|| default_out(&inv.config, inv.command));
    let mut listed = Vec::new();
    for (panel, files) in cfg.panels.iter().zip(&results) {
        let dir = out.join(&panel.name);
        std::fs::create_dir_all(&dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
        for f in &files.list {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.contents).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
            listed.push(ManifestOutput {
                path: format!("{}/{}", panel.name, f.name),
                panel: panel.name.clone(),
                kind: f.kind.label(),
            });
        }
    }
    let manifest = Manifest {
        command: inv.command.name(),
        config: inv.config.display().to_string(),
        title: cfg.title.as_deref(),
        seed: inv.seed,
        plots: inv.plots,
        threads: pool.current_num_threads(),
        version: env!("CARGO_PKG_VERSION"),
        core_version: bkc_core::VERSION,
        panel: cfg
            .panels
            .iter()
            .map(|p| ManifestPanel { name: &p.name, command: p.command.name(), fields: &p.fields })
            .collect(),
        output: listed,
    };
    let text = toml::to_string(&manifest).map_err(|e| RunError::Io(format!("manifest: {e}")))?;
    let path = out.join("manifest.toml");
    std::fs::write(&path, text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    Ok(out)
}
