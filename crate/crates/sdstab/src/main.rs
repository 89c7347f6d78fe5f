//! Command-line driver for the sampled-data stability certificates.
//!
//! Exit codes: 0 all certificates pass, 1 usage/parse error, 2 inconclusive
//! or failed certificate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdstab::harness::{
    emit_csv, parse_description, run_pipeline, run_scans, run_simulation, StabilityReport,
    SystemDescription,
};

#[derive(Parser)]
#[command(
    name = "sdstab",
    version,
    about = "Strong-stability certificates for sampled-data Riesz-spectral systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full certification pipeline and write the report plus CSVs.
    Check {
        /// System description file (JSON).
        #[arg(long)]
        input: PathBuf,
        /// Output directory for report.json and CSV series.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Certification period override (default: tau*/2).
        #[arg(long)]
        tau: Option<f64>,
        /// Seed override for the vector battery.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulate a sampled-data trajectory from the first basis state.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sampling period (default: the largest grid entry).
        #[arg(long)]
        tau: Option<f64>,
        /// Number of sampling intervals to simulate.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Intra-sample evaluation points per interval.
        #[arg(long, default_value_t = 8)]
        samples_per_period: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run only the transfer-function lower-bound scans.
    Scan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Period for the discrete scan (default: the largest grid entry).
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run only the pole placement and print the synthesis result.
    Place {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<SystemDescription, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut desc = parse_description(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(seed) = seed {
        desc.seed = seed;
    }
    Ok(desc)
}

fn default_tau(desc: &SystemDescription, tau: Option<f64>) -> Result<f64, String> {
    tau.or_else(|| desc.tau_grid.last().copied())
        .ok_or_else(|| "no --tau given and tau_grid is empty".to_string())
}

fn write_outputs(
    report: &StabilityReport,
    out: &Option<PathBuf>,
    series: &[&str],
) -> Result<(), String> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| format!("cannot create out dir: {e}"))?;
            let path = dir.join("report.json");
            std::fs::write(&path, report.to_json())
                .map_err(|e| format!("cannot write report: {e}"))?;
            eprintln!("wrote {}", path.display());
            for which in series {
                match emit_csv(report, which, dir) {
                    Ok(p) => eprintln!("wrote {}", p.display()),
                    Err(sdstab::Error::MissingSeries(_)) => {}
                    Err(e) => return Err(format!("cannot write {which}.csv: {e}")),
                }
            }
        }
        None => print!("{}", report.to_json()),
    }
    Ok(())
}

fn run() -> Result<u8, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Check {
            input,
            out,
            tau,
            seed,
        } => {
            let desc = load(&input, seed)?;
            let report = run_pipeline(&desc, tau).map_err(|e| e.to_string())?;
            write_outputs(&report, &out, &["scan_c", "scan_d", "powerbound"])?;
            Ok(if report.all_passed { 0 } else { 2 })
        }
        Command::Simulate {
            input,
            out,
            tau,
            steps,
            samples_per_period,
            seed,
        } => {
            let desc = load(&input, seed)?;
            let tau = default_tau(&desc, tau)?;
            let report = run_simulation(&desc, tau, samples_per_period, steps)
                .map_err(|e| e.to_string())?;
            write_outputs(&report, &out, &["trajectory"])?;
            Ok(0)
        }
        Command::Scan {
            input,
            out,
            tau,
            seed,
        } => {
            let desc = load(&input, seed)?;
            let tau = default_tau(&desc, tau)?;
            let report = run_scans(&desc, tau).map_err(|e| e.to_string())?;
            write_outputs(&report, &out, &["scan_c", "scan_d"])?;
            Ok(if report.all_passed { 0 } else { 2 })
        }
        Command::Place { input, out, seed } => {
            let desc = load(&input, seed)?;
            let (_, synthesis) =
                sdstab::harness::build_system(&desc).map_err(|e| e.to_string())?;
            let section = synthesis
                .ok_or_else(|| "place requires f1 = auto in the description".to_string())?;
            let mut json = serde_json::to_string_pretty(&section).map_err(|e| e.to_string())?;
            json.push('\n');
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)
                        .map_err(|e| format!("cannot create out dir: {e}"))?;
                    let path = dir.join("placement.json");
                    std::fs::write(&path, &json)
                        .map_err(|e| format!("cannot write placement: {e}"))?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{json}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
