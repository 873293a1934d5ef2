use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use borscat_cli::commands::{
    self, compare, echoes_file, mie_table, output_dir, read_fsr, synth_file,
};
use borscat_cli::io::atomic_write;
use borscat_cli::spec::{KappaGrid, RunSpec};
use borscat_cli::{CliError, CliResult};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "borscat",
    version,
    about = "Transient backscatter of coated conducting bodies of revolution"
)]
struct Cli {
    /// Threads used for frequency sweeps. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep, synthesize, detect echoes and plot for every permittivity.
    Run {
        spec: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Frequency sweeps only.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Transient response of a stored frequency table.
    Synth {
        fsr: PathBuf,
        spec: PathBuf,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Echo report (JSON) of a stored transient response.
    Echoes {
        series: PathBuf,
        #[arg(long, default_value_t = borscat::echo::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact series for a conducting sphere with an optional dielectric shell.
    MieDump {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.0)]
        coating: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        kappa_min: f64,
        #[arg(long, default_value_t = 2.25)]
        kappa_max: f64,
        #[arg(long, default_value_t = 45)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relative error of table A against table B.
    Compare { a: PathBuf, b: PathBuf },
    /// Print the built-in run spec for the 23° coated cone.
    DefaultSpec,
}

fn emit(out: Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => atomic_write(&p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match cli.command {
        Command::Run {
            spec,
            output_dir: dir,
        } => {
            let spec = RunSpec::load(&spec)?;
            let dir = output_dir(&spec, dir);
            let (summary, log) = commands::run(&spec, &dir, workers)?;
            eprintln!(
                "{} solver sweeps; artifacts in {}",
                log.solver_invocations(),
                dir.display()
            );
            print!("{}", summary.text());
        }
        Command::Sweep {
            spec,
            output_dir: dir,
        } => {
            let spec = RunSpec::load(&spec)?;
            let dir = output_dir(&spec, dir);
            let log = commands::sweep_only(&spec, &dir, workers)?;
            print!("{}", log.text());
        }
        Command::Synth { fsr, spec, out } => {
            let spec = RunSpec::load(&spec)?;
            emit(out, &synth_file(&fsr, &spec)?.to_csv_string())?;
        }
        Command::Echoes {
            series,
            threshold,
            out,
        } => {
            let mut json = echoes_file(&series, threshold)?.to_json()?;
            json.push('\n');
            emit(out, &json)?;
        }
        Command::MieDump {
            radius,
            coating,
            eps,
            kappa_min,
            kappa_max,
            count,
            out,
        } => {
            if !(kappa_min > 0.0 && kappa_max > kappa_min && count >= 2) {
                return Err(CliError::Usage(
                    "need 0 < kappa_min < kappa_max and count >= 2".into(),
                ));
            }
            let grid = KappaGrid {
                min: kappa_min,
                max: kappa_max,
                count,
            };
            emit(
                out,
                &mie_table(radius, coating, eps, &grid.values())?.to_csv_string(),
            )?;
        }
        Command::Compare { a, b } => {
            let report = compare(&read_fsr(&a)?, &read_fsr(&b)?)?;
            if report.geometry_mismatch {
                eprintln!("warning: the tables describe different geometries");
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::DefaultSpec => {
            println!(
                "{}",
                serde_json::to_string_pretty(&RunSpec::reference_cone())?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
