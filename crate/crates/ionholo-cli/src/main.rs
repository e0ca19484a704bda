use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ionholo_cli::{
    load_config, parse_values, run_compile, run_fidelity, run_sweep, run_verify, CliError,
    Resolved, SweepParam, EXIT_VERIFY,
};

/// Pulse-schedule compiler and simulator for holonomic multiqubit
/// controlled gates on a trapped-ion chain.
#[derive(Parser)]
#[command(name = "ionholo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration (frequencies in plain Hz).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, overriding io.out_dir from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the interval schedule, write its laser-level export and the
    /// operation-count table.
    Compile {
        #[command(flatten)]
        common: Common,
    },
    /// Check cyclicity, parallel transport, and gate error against the
    /// configured tolerances. Exits 2 when any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Scale every pulse area by (1 + FRACTION) before checking; a
        /// nonzero value is expected to fail and exercises the checks.
        #[arg(long, value_name = "FRACTION")]
        perturb_area: Option<f64>,
    },
    /// Integrate the full ion-laser-mode master equation and report the
    /// gate fidelity on the all-controls-set input.
    Fidelity {
        #[command(flatten)]
        common: Common,
        /// Also write a population time series CSV.
        #[arg(long)]
        timeseries: bool,
    },
    /// Repeat the fidelity run over a list of values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of: dt, fock_cutoff, delta, rabi.
        #[arg(long, value_name = "NAME")]
        param: String,
        /// Comma-separated values; dt in seconds, delta and rabi in Hz.
        /// An empty list writes a header-only CSV.
        #[arg(long, value_name = "LIST", default_value = "")]
        values: String,
    },
}

fn load(common: &Common) -> Result<Resolved, CliError> {
    let mut r = load_config(&common.config)?;
    if let Some(out) = &common.out {
        r.out_dir = out.clone();
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    Ok(r)
}

fn write_out(r: &Resolved, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(&r.out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", r.out_dir.display())))?;
    let path = r.out_dir.join(name);
    std::fs::write(&path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run() -> Result<ExitCode, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Compile { common } => {
            let r = load(&common)?;
            let out = run_compile(&r)?;
            write_out(&r, "schedule.txt", &out.schedule_text)?;
            write_out(&r, "counts.csv", &out.counts_csv)?;
            println!("{}", out.summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common, perturb_area } => {
            let r = load(&common)?;
            let out = run_verify(&r, perturb_area)?;
            write_out(&r, "verify_report.txt", &out.report)?;
            print!("{}", out.report);
            if out.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_VERIFY))
            }
        }
        Command::Fidelity { common, timeseries } => {
            let r = load(&common)?;
            let emit = timeseries || r.emit_timeseries;
            let out = run_fidelity(&r, emit)?;
            write_out(&r, "fidelity_report.txt", &out.report)?;
            if let Some(ts) = &out.timeseries {
                write_out(&r, "timeseries.csv", ts)?;
            }
            eprintln!(
                "integrated {} steps in {:.1} s wall time, max trace defect {:.2e}",
                out.result.steps, out.result.wall_time_s, out.result.trace_defect
            );
            println!("fidelity: {:.4}", out.result.fidelity);
            println!("leakage: {:.4}", out.result.leakage);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, param, values } => {
            let r = load(&common)?;
            let param: SweepParam = param.parse()?;
            let values = parse_values(&values)?;
            let csv = run_sweep(&r, param, &values)?;
            write_out(&r, &format!("sweep_{}.csv", param.name()), &csv)?;
            print!("{csv}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
