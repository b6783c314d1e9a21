//! Batch front end for the simulation study and the diagnostics.
//!
//! `run` writes `config.json`, `records.csv`, `samples.csv`, `summary.csv`,
//! `summary.json` (and `truth.csv` for independent truth runs) into `--out`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use eigboot::datagen::EllipticalLaw;
use eigboot::harness::{
    concentration_experiment, emit_density_data, read_records_csv, read_samples_csv, read_truth_csv, run_experiment,
    spiked_consistency_check, summarize, with_workers, write_density_csv, write_records_csv, write_samples_csv,
    write_summary_csv, write_summary_json, write_truth_csv, CellFailure, ExperimentConfig, GridSpec, Preset,
    SpikedConfig,
};
use eigboot::{Error, Result};

#[derive(Parser)]
#[command(
    name = "eigboot",
    version,
    about = "Bootstrap of sample-covariance eigenvalues in high dimension"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo study and write all artifacts.
    Run {
        /// JSON experiment configuration; overrides --preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "desk")]
        preset: Preset,
        /// Override the distribution of the preset or config.
        #[arg(long, value_parser = parse_law)]
        law: Option<EllipticalLaw>,
    },
    /// Recompute summary.csv/summary.json from a run directory.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kernel density estimates of the stored bootstrap distributions.
    Density {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `N` points over the data range, or `LO:HI:N`.
        #[arg(long, default_value = "512", allow_hyphen_values = true)]
        grid: GridSpec,
    },
    /// Concentration of the weighted Stieltjes transform over bootstrap weights.
    CheckConcentration {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        z_re: f64,
        #[arg(long, default_value_t = 1.0)]
        z_im: f64,
        #[arg(long = "B", default_value_t = 500)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Perturbation and bootstrap-consistency check in the well-separated spiked model.
    CheckSpiked {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',', default_value = "250,500,1000")]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 300)]
        nsim: usize,
        #[arg(long = "B", default_value_t = 299)]
        replicates: usize,
        #[arg(long, default_value_t = 2009)]
        seed: u64,
    },
}

fn parse_law(s: &str) -> std::result::Result<EllipticalLaw, String> {
    EllipticalLaw::from_name(s).ok_or_else(|| {
        let names: Vec<_> = EllipticalLaw::ALL.iter().map(|l| l.name()).collect();
        format!("unknown law '{s}', expected one of {}", names.join(", "))
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn read_failures(summary: &Path) -> Result<(ExperimentConfig, Vec<CellFailure>)> {
    let text = std::fs::read_to_string(summary).map_err(|e| Error::Io {
        path: summary.to_path_buf(),
        source: e,
    })?;
    let cfg = ExperimentConfig::from_summary_json(&text)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: summary.to_path_buf(),
        message: e.to_string(),
    })?;
    let failures = match value.get("failures") {
        Some(f) => serde_json::from_value(f.clone()).map_err(|e| Error::Parse {
            path: summary.to_path_buf(),
            message: e.to_string(),
        })?,
        None => Vec::new(),
    };
    Ok((cfg, failures))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serialises"));
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            preset,
            law,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_json_file(&path)?,
                None => ExperimentConfig::preset(preset),
            };
            if let Some(law) = law {
                cfg.law = law;
            }
            create_dir(&out)?;
            let results = with_workers(workers, || run_experiment(&cfg))??;
            std::fs::write(out.join("config.json"), cfg.to_json() + "\n").map_err(|e| Error::Io {
                path: out.join("config.json"),
                source: e,
            })?;
            write_records_csv(&out.join("records.csv"), &results.records)?;
            write_samples_csv(&out.join("samples.csv"), &results.samples)?;
            if !results.truth.is_empty() {
                write_truth_csv(&out.join("truth.csv"), &results.truth)?;
            }
            let table = summarize(&results.records, &results.truth);
            write_summary_csv(&out.join("summary.csv"), &table)?;
            write_summary_json(&out.join("summary.json"), &cfg, &table, &results.failures)?;
            for f in &results.failures {
                eprintln!(
                    "warning: r = {}, c = {}, simulation {:?}: {}",
                    f.ratio, f.multiplier, f.simulation, f.message
                );
            }
            eprintln!(
                "{} records, {} failures written to {}",
                results.records.len(),
                results.failures.len(),
                out.display()
            );
        }
        Command::Summarize { input, out } => {
            let records = read_records_csv(&input.join("records.csv"))?;
            let truth_path = input.join("truth.csv");
            let truth = if truth_path.exists() {
                read_truth_csv(&truth_path)?
            } else {
                Vec::new()
            };
            let summary_path = input.join("summary.json");
            let (cfg, failures) = if summary_path.exists() {
                read_failures(&summary_path)?
            } else {
                (
                    ExperimentConfig::from_json_file(&input.join("config.json"))?,
                    Vec::new(),
                )
            };
            create_dir(&out)?;
            let table = summarize(&records, &truth);
            write_summary_csv(&out.join("summary.csv"), &table)?;
            write_summary_json(&out.join("summary.json"), &cfg, &table, &failures)?;
        }
        Command::Density { input, out, grid } => {
            let samples = read_samples_csv(&input.join("samples.csv"))?;
            let dists = samples.iter().map(|s| s.distribution()).collect::<Result<Vec<_>>>()?;
            let rows = emit_density_data(&dists, grid)?;
            create_dir(&out)?;
            write_density_csv(&out.join("density.csv"), &samples, &rows)?;
        }
        Command::CheckConcentration {
            n,
            p,
            z_re,
            z_im,
            replicates,
            seed,
        } => {
            let report = concentration_experiment(n, p, Complex64::new(z_re, z_im), replicates, seed)?;
            print_json(&report);
            if report.violated {
                eprintln!("concentration bound violated");
                return Ok(ExitCode::from(2));
            }
        }
        Command::CheckSpiked {
            alpha,
            q,
            n_grid,
            nsim,
            replicates,
            seed,
        } => {
            let cfg = SpikedConfig {
                alpha,
                q,
                n_grid,
                nsim,
                replicates,
                master_seed: seed,
                ..SpikedConfig::default()
            };
            let report = spiked_consistency_check(&cfg)?;
            print_json(&report);
            if report
                .rows
                .iter()
                .any(|r| r.wielandt_rate_scaled < 1.0 || !r.interlacing_ok)
            {
                eprintln!("perturbation bound violated");
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
