// SPDX-License-Identifier: Apache-2.0

//! `revalu` command-line interface.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "revalu", version, about = "Reversible-logic ALU toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TraceFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BuildKind {
    Fa,
    Cpa,
    Csa42,
    Csa52,
    Dlatch,
    Dff,
    Register,
    Shiftreg,
    Montgomery,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Register bit flips per cycle.
    Hd,
    /// Data-independent cost per cycle.
    Constant,
}

#[derive(Debug, clap::Args)]
struct Physics {
    /// Temperature for Landauer energy, kelvin.
    #[arg(long = "temp-k", default_value_t = revalu::energy::DEFAULT_TEMPERATURE_K)]
    temp_k: f64,
    /// Node capacitance for signal energy, farads.
    #[arg(long = "cap-f", default_value_t = revalu::energy::DEFAULT_CAPACITANCE_F)]
    cap_f: f64,
    /// Supply voltage, volts.
    #[arg(long, default_value_t = revalu::energy::DEFAULT_VDD_V)]
    vdd: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a circuit and print its cost report.
    Build {
        kind: BuildKind,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=128))]
        width: u64,
        /// Modulus for `montgomery`.
        #[arg(long, value_parser = commands::parse_u64)]
        m: Option<u64>,
        /// Operand bits for `montgomery`.
        #[arg(long)]
        n: Option<u32>,
        /// Write the `.rnl` netlist (or JSON manifest for clocked kinds).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Validate a netlist and check that it inverts.
    Verify {
        path: PathBuf,
        /// Force random mode with this many vectors.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Simulate a netlist, or a clocked circuit against a stimulus file.
    Sim {
        path: PathBuf,
        /// Input assignment `wire=0|1`; repeatable.
        #[arg(long = "set", value_name = "WIRE=BIT")]
        set: Vec<String>,
        /// Treat PATH as a clocked-circuit manifest.
        #[arg(long)]
        clocked: bool,
        /// JSON array of per-step input maps (with --clocked).
        #[arg(long)]
        stimulus: Option<PathBuf>,
    },
    /// Cost report of a netlist, optionally with erasure energy.
    Cost {
        path: PathBuf,
        #[arg(long)]
        energy: bool,
        #[command(flatten)]
        physics: Physics,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Montgomery product X·Y·2^(-n) mod M.
    Montmul {
        #[arg(long, value_parser = commands::parse_u64)]
        x: u64,
        #[arg(long, value_parser = commands::parse_u64)]
        y: u64,
        #[arg(long, value_parser = commands::parse_u64)]
        m: u64,
        #[arg(long)]
        n: u32,
        /// Run the gate-level datapath instead of the word-level algorithm.
        #[arg(long)]
        gate_level: bool,
        /// Print the per-cycle register trace as JSON after the result.
        #[arg(long)]
        trace: bool,
    },
    /// Modular exponentiation a^b mod modulus.
    Montexp {
        #[arg(long, value_parser = commands::parse_u64)]
        a: u64,
        #[arg(long, value_parser = commands::parse_u64)]
        b: u64,
        #[arg(long = "mod", value_parser = commands::parse_u64)]
        modulus: u64,
        /// Also print Montgomery-product counts as JSON.
        #[arg(long)]
        stats: bool,
    },
    /// Switching trace and energy report of one datapath run.
    Trace {
        #[arg(long, value_parser = commands::parse_u64)]
        x: u64,
        #[arg(long, value_parser = commands::parse_u64)]
        y: u64,
        #[arg(long, value_parser = commands::parse_u64)]
        m: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Model::Hd)]
        model: Model,
        #[arg(long, value_enum, default_value_t = TraceFormat::Json)]
        format: TraceFormat,
        #[command(flatten)]
        physics: Physics,
    },
    /// Difference-of-means analysis over random datapath runs.
    Dpa {
        #[arg(long, value_parser = commands::parse_u64)]
        m: u64,
        #[arg(long)]
        n: u32,
        /// Fixed Y operand; random when omitted.
        #[arg(long, value_parser = commands::parse_u64)]
        y: Option<u64>,
        #[arg(long, default_value_t = 64)]
        traces: usize,
        /// Bit of X used as the selector.
        #[arg(long, default_value_t = 0)]
        bit: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Model::Hd)]
        model: Model,
        #[arg(long, value_enum, default_value_t = TraceFormat::Json)]
        format: TraceFormat,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
