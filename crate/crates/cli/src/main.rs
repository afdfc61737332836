#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flatwire::sweep::{Closure, SweepParameter};

use crate::units::parse_si;

#[derive(Parser)]
#[command(name = "flatwire", version, about = "Flat-wire inductor models: DC resistance, reluctance network, field solver, ripple loss")]
struct Cli {
    /// Design config (TOML); subcommands also accept it positionally
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV outputs and the run manifest
    #[arg(long, global = true, env = "FLATWIRE_OUT_DIR", default_value = "flatwire-out")]
    out_dir: PathBuf,

    /// Worker threads for parallel solves (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print the main table as CSV on stdout instead of a text summary
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArg {
    /// Design config (TOML)
    path: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MeshArgs {
    /// Conductor cells per skin depth at the highest frequency
    #[arg(long, default_value_t = 3.0)]
    cells_per_skin_depth: f64,
    /// Uniform subdivision of every mesh cell
    #[arg(long, default_value_t = 1)]
    refine: u32,
    /// Air padding around the core, e.g. 20mm (default: one core diameter)
    #[arg(long, value_parser = flatwire::config::parse_length)]
    padding: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the annotated config schema with the prototype as example
    Schema,
    /// DC resistance from the three turn-length models, closed form and quadrature
    Dcr(ConfigArg),
    /// Reluctance-network inductance and terminal impedance
    Mec {
        #[command(flatten)]
        config: ConfigArg,
        /// Frequencies, e.g. 0,10k,100k
        #[arg(long, value_parser = parse_si, value_delimiter = ',', default_value = "0")]
        freq: Vec<f64>,
        /// First-order eddy factor Q = jωτ with this τ [s]
        #[arg(long, value_parser = parse_si, conflicts_with = "q_table")]
        q_tau: Option<f64>,
        /// Tabulated Q from a `solve` response CSV (frequency_hz, q_re, q_im)
        #[arg(long)]
        q_table: Option<PathBuf>,
        /// Gap reluctances only: no fringing or window leakage
        #[arg(long)]
        gaps_only: bool,
    },
    /// Axisymmetric field solve at one or more frequencies
    Solve {
        #[command(flatten)]
        config: ConfigArg,
        /// Frequencies, e.g. 0,100k
        #[arg(long, value_parser = parse_si, value_delimiter = ',', default_value = "100k")]
        freq: Vec<f64>,
        /// Peak terminal current [A]
        #[arg(long, value_parser = parse_si, default_value = "1")]
        current: f64,
        #[command(flatten)]
        mesh: MeshArgs,
        /// Also write per-cell current density and loss maps
        #[arg(long)]
        dump_fields: bool,
    },
    /// One-parameter design sweep with field solves per point
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Swept parameter
        #[arg(long, value_enum)]
        param: ParamArg,
        /// Values: lengths with units (0.5mm,1mm), counts, or frequencies (10k,100k)
        #[arg(long)]
        values: String,
        /// Dimension that absorbs the change (default depends on the parameter)
        #[arg(long, value_enum)]
        closure: Option<ClosureArg>,
        /// AC frequency when not sweeping frequency
        #[arg(long, value_parser = parse_si, default_value = "100k")]
        freq: f64,
        /// DC current [A]
        #[arg(long, value_parser = parse_si, default_value = "15")]
        dc_current: f64,
        /// Peak AC current [A]
        #[arg(long, value_parser = parse_si, default_value = "5")]
        ac_current: f64,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Triangle-ripple harmonic spectrum and AC conduction loss at 50 % duty.
    ///
    /// The inductor voltage is a square wave of amplitude V_o (input 2 V_o).
    Ripple {
        #[command(flatten)]
        config: ConfigArg,
        /// Output voltage [V]
        #[arg(long, value_parser = parse_si)]
        vo: f64,
        /// Switching frequency [Hz]
        #[arg(long, value_parser = parse_si)]
        fs: f64,
        /// Inductance [H]; otherwise taken from --from
        #[arg(long, value_parser = parse_si)]
        inductance: Option<f64>,
        /// Winding resistance at f_s [Ω], scaled with √f
        #[arg(long, value_parser = parse_si)]
        rac: Option<f64>,
        /// `solve` response CSV supplying |L| and the Rac(f) table
        #[arg(long)]
        from: Option<PathBuf>,
        /// Highest harmonic order
        #[arg(long, default_value_t = 25)]
        h_max: u32,
        /// Parasitic capacitance [F], flags harmonics past resonance
        #[arg(long, value_parser = parse_si)]
        cp: Option<f64>,
        /// DC current for the separate DC loss line [A]
        #[arg(long, value_parser = parse_si)]
        dc_current: Option<f64>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum ParamArg {
    LeftClearance,
    RightClearance,
    Thickness,
    Spacing,
    GapCount,
    Frequency,
}

impl From<ParamArg> for SweepParameter {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::LeftClearance => SweepParameter::LeftClearance,
            ParamArg::RightClearance => SweepParameter::RightClearance,
            ParamArg::Thickness => SweepParameter::Thickness,
            ParamArg::Spacing => SweepParameter::Spacing,
            ParamArg::GapCount => SweepParameter::GapCount,
            ParamArg::Frequency => SweepParameter::Frequency,
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum ClosureArg {
    RadialDepth,
    Spacing,
    Thickness,
    None,
}

impl From<ClosureArg> for Closure {
    fn from(c: ClosureArg) -> Self {
        match c {
            ClosureArg::RadialDepth => Closure::RadialDepth,
            ClosureArg::Spacing => Closure::Spacing,
            ClosureArg::Thickness => Closure::Thickness,
            ClosureArg::None => Closure::None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
