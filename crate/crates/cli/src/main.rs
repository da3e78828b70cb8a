//! `hybc`: type-check, decompose, simulate and export hybrid qubit/qumode
//! circuits written in OpenQASM 3 with the CV extensions.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "hybc",
    version,
    about = "Compiler toolkit for hybrid qubit/qumode circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Fock cutoff of every qumode.
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// Per-wire cutoff override, `wire=N`; repeatable.
    #[arg(long = "cutoff-wire", global = true, value_name = "WIRE=N", value_parser = parse_cutoff_wire)]
    pub cutoff_wire: Vec<(String, usize)>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Target gate set: `full`, `sim-native`, `qscout-native`, or a JSON file.
    #[arg(long, global = true)]
    pub gateset: Option<String>,
    /// QSCOUT device description (JSON).
    #[arg(long, global = true)]
    pub device: Option<PathBuf>,
    /// Printed parameter precision.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: Option<u8>,
    /// Treat wires whose type is not implied by their use as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Infer wire types and report conflicts.
    Check { file: PathBuf },
    /// Lower a circuit to a gate set and print it as OpenQASM.
    Decompose {
        file: PathBuf,
        /// Print gate counts instead of the circuit.
        #[arg(long)]
        count: bool,
    },
    /// Run a circuit on the Fock-space simulator.
    Simulate { file: PathBuf },
    /// Compile for a QSCOUT device and print JAQAL.
    ExportJaqal { file: PathBuf },
    /// Re-emit a circuit as canonical OpenQASM, lowered first if `--gateset` is given.
    ExportQasm { file: PathBuf },
    /// Reference workloads.
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Subcommand, Debug)]
pub enum Demo {
    /// Phase estimation of a dispersively coupled qubit and oscillator.
    Qpe(QpeArgs),
    /// Displacement-loop calibration curve.
    Calibration(CalibrationArgs),
}

#[derive(Args, Debug)]
pub struct QpeArgs {
    #[arg(long, default_value_t = 10)]
    pub bits: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long = "omega-r", default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega_r: f64,
    #[arg(long = "omega-q", default_value_t = -1.0, allow_negative_numbers = true)]
    pub omega_q: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub chi: f64,
    /// Photon number of the prepared oscillator state.
    #[arg(long, default_value_t = 4)]
    pub fock: usize,
    /// Print the lowered circuit as OpenQASM instead of running it.
    #[arg(long)]
    pub circuit: bool,
}

#[derive(Args, Debug)]
pub struct CalibrationArgs {
    /// Explicit β values (comma separated); overrides the grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long = "beta-min", default_value_t = 0.0)]
    pub beta_min: f64,
    #[arg(long = "beta-max", default_value_t = 2.0)]
    pub beta_max: f64,
    /// Also lower each point for a QSCOUT device (the `--device` file, or a
    /// 2-ion default) and report post-selected values.
    #[arg(long)]
    pub lower: bool,
    /// Write one JAQAL program per β into this directory (implies `--lower`).
    #[arg(long = "jaqal-dir")]
    pub jaqal_dir: Option<PathBuf>,
    /// Print the circuit for the first β as OpenQASM instead of running it.
    #[arg(long)]
    pub circuit: bool,
}

fn parse_cutoff_wire(s: &str) -> Result<(String, usize), String> {
    let (w, n) = s
        .split_once('=')
        .ok_or_else(|| format!("expected WIRE=N, got `{s}`"))?;
    let n = n
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("cutoff of `{w}`: {e}"))?;
    Ok((w.trim().to_owned(), n))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout with success; bad usage is a user error
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let run = std::panic::catch_unwind(|| match &cli.command {
        Command::Check { file } => commands::check(file, &cli.opts),
        Command::Decompose { file, count } => commands::decompose(file, *count, &cli.opts),
        Command::Simulate { file } => commands::simulate(file, &cli.opts),
        Command::ExportJaqal { file } => commands::export_jaqal(file, &cli.opts),
        Command::ExportQasm { file } => commands::export_qasm(file, &cli.opts),
        Command::Demo(Demo::Qpe(a)) => commands::demo_qpe(a, &cli.opts),
        Command::Demo(Demo::Calibration(a)) => commands::demo_calibration(a, &cli.opts),
    });
    match run {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::User(lines))) => {
            report::diagnostics(&lines);
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(msg))) => {
            report::diagnostics(&[format!("internal error: {msg}")]);
            ExitCode::from(2)
        }
        // the panic hook has already printed the message
        Err(_) => ExitCode::from(2),
    }
}
