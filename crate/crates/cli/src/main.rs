//! `meastree`: validate, lower and analyse circuits with general
//! measurements from the command line.

mod commands;
mod io;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use meastree::Tolerances;

#[derive(Parser, Debug)]
#[command(name = "meastree", version, about = "Circuits with general measurements, measurement trees and input-independence checks")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Circuit JSON file.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Measurement tree JSON file.
    #[arg(long)]
    tree: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct PathSelect {
    /// Path as `gate=label,...`; a partial assignment must match exactly one path.
    #[arg(long)]
    path: Option<String>,
    /// Every path of the circuit.
    #[arg(long)]
    all_paths: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a circuit's structural constraints.
    Validate { file: PathBuf },
    /// List the coherent paths of a circuit.
    Paths { file: PathBuf },
    /// Probability and output of every path or branch on an input state.
    Simulate {
        #[command(flatten)]
        source: Source,
        /// State JSON: `{"density": M}`, `{"ket": v}` or a bare matrix, on
        /// the principal wires or on all wires.
        #[arg(long)]
        input: PathBuf,
    },
    /// Lower a circuit to its measurement tree (tree JSON).
    Reduce { file: PathBuf },
    /// Describe a measurement tree.
    Tree {
        #[command(flatten)]
        source: Source,
        /// Emit Graphviz text instead.
        #[arg(long)]
        dot: bool,
    },
    /// Test whether path probabilities depend on the principal input.
    CheckIndependence {
        #[arg(long)]
        circuit: PathBuf,
        #[command(flatten)]
        select: PathSelect,
        /// Number of Haar-random probes added to the structured ones.
        #[arg(long)]
        probes: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Test whether paths compute a given operator.
    CheckUnitary {
        #[arg(long)]
        circuit: PathBuf,
        /// Matrix JSON file.
        #[arg(long)]
        unitary: PathBuf,
        #[command(flatten)]
        select: PathSelect,
        #[arg(long)]
        probes: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Factor a path's cumulative operator as `U ⊗ b`.
    Factor {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        path: String,
    },
    /// Print or write a bundled demo circuit; lists demos without a name.
    Demo {
        name: Option<String>,
        /// Write `NAME.json` instead of printing.
        #[arg(long)]
        emit: bool,
        /// Directory for `--emit`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = Tolerances::from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(commands::EXIT_MALFORMED);
    }
    match commands::run(cli.command, cli.format) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
