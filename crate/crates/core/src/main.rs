//! Command-line driver for the spectral laboratory.

use airy_spectra::error::Result;
use airy_spectra::harness::{CheckKind, ExperimentConfig, Harness};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "airy-spectra", version, about = "Spectral asymptotics laboratory for -h^2*Laplace + iV on wire-like domains")]
struct Cli {
    /// Flat key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the eigensolver start vectors (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Airy constant table as JSON and write constants.json
    Constants,
    /// Locate and classify the minimizers of |grad V|
    Geometry,
    /// Write the mapped-square sampling of |f'|^{-2} and V as binary fields
    ExportGrid {
        #[arg(long, default_value_t = 256)]
        n_u: usize,
        #[arg(long, default_value_t = 256)]
        n_v: usize,
    },
    /// One-dimensional model operators: perturbation law table
    #[command(name = "model-1d")]
    Model1d,
    /// Two-dimensional model operators: first-order coefficients and the
    /// corner resolvent scan
    #[command(name = "model-2d")]
    Model2d,
    /// Build quasimodes over the h sweep and report residuals
    Quasimode,
    /// Eigensolve the full operator near the two-term predictions
    Spectrum,
    /// Resolvent-norm probes left of the spectral margin
    ResolventProbe,
    /// Asymptotic fit of the spectral margin (runs spectrum first)
    Fit,
    /// Every stage in dependency order
    RunAll,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir.clone_from(out);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load_config(&cli)?;
    let only = |cfg: &mut ExperimentConfig, kinds: &[CheckKind]| {
        cfg.checks = kinds.iter().copied().collect();
    };
    match cli.command {
        Command::Constants => {
            only(&mut cfg, &[CheckKind::Constants]);
            let mut h = Harness::new(cfg)?;
            let rep = h.stage_constants()?;
            let json = std::fs::read_to_string(h.cfg.out_dir.join("constants.json"))?;
            println!("{json}");
            eprintln!("[{}] {}", if rep.passed { "pass" } else { "FAIL" }, rep.detail);
            return Ok(rep.passed);
        }
        Command::Geometry => only(&mut cfg, &[CheckKind::Geometry]),
        Command::ExportGrid { n_u, n_v } => {
            let mut h = Harness::new(cfg)?;
            h.export_grid(n_u, n_v)?;
            println!("fields written to {}", h.cfg.out_dir.display());
            return Ok(true);
        }
        Command::Model1d => only(&mut cfg, &[CheckKind::Model1d]),
        Command::Model2d => only(&mut cfg, &[CheckKind::Model2d]),
        Command::Quasimode => only(&mut cfg, &[CheckKind::Quasimode]),
        Command::Spectrum => only(&mut cfg, &[CheckKind::Spectrum]),
        Command::ResolventProbe => only(&mut cfg, &[CheckKind::Spectrum, CheckKind::Probe]),
        Command::Fit => only(&mut cfg, &[CheckKind::Spectrum, CheckKind::Fit]),
        Command::RunAll => {}
    }
    let mut harness = Harness::new(cfg)?;
    let summary = harness.run_all()?;
    for s in &summary.stages {
        println!("[{}] {:<10} {}", if s.passed { "pass" } else { "FAIL" }, s.stage, s.detail);
    }
    println!(
        "summary written to {}",
        harness.cfg.out_dir.join("summary.json").display()
    );
    Ok(summary.all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
