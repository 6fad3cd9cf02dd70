use std::path::PathBuf;
use std::process::ExitCode;

use bkc_cli::config::Command;
use bkc_cli::{execute, Invocation};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Spectrum,
    Profiles,
    Winding,
    PhaseScan,
    Disorder,
    Floquet,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Profiles => Command::Profiles,
            Cmd::Winding => Command::Winding,
            Cmd::PhaseScan => Command::PhaseScan,
            Cmd::Disorder => Command::Disorder,
            Cmd::Floquet => Command::Floquet,
        }
    }
}

/// Excitation spectra, skin-effect profiles and topology of bosonic Kitaev chains.
#[derive(Parser)]
#[command(name = "bkc", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: out/<config name>/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
    /// Disorder seed, replacing the one in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides BKC_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let inv = Invocation {
        command: args.command.into(),
        config: args.config,
        out: args.out,
        plots: args.plots,
        seed: args.seed,
        threads: args.threads,
    };
    match execute(&inv) {
        Ok(out) => {
            println!("wrote {}", out.join("manifest.toml").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bkc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
