//! `datamin`: synthesise, verify and apply data minimisers.

mod commands;
mod smt;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use datamin::synth::Mode;

/// Exit statuses. Stable; documented in the README.
pub mod status {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const SYNTHESIS: u8 = 2;
    pub const VERIFICATION: u8 = 3;
    pub const BREACH: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "datamin", version, about = "Data minimisers for small imperative programs")]
struct Cli {
    /// Print solver statistics and timings to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Limits {
    /// Per-loop unroll bound for symbolic execution.
    #[arg(long, default_value_t = datamin::symexec::DEFAULT_UNROLL, value_parser = clap::value_parser!(u64).range(1..))]
    pub unroll: u64,
    /// Largest number of points enumerated by the solver or the oracle.
    #[arg(long, default_value_t = datamin::logic::DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Largest number of classes synthesised per table.
    #[arg(long, default_value_t = datamin::synth::DEFAULT_CLASS_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub class_cap: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesise the best minimiser of a program.
    Synth {
        program: PathBuf,
        #[arg(long, default_value_t = Mode::Distributed)]
        mode: Mode,
        /// Directory for the minimiser document and emitted sources.
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        /// Also write the minimiser as mini-language programs.
        #[arg(long)]
        emit_source: bool,
        /// Also write the symbolic execution leaves as JSON.
        #[arg(long)]
        dump_tree: bool,
        /// External SMT-LIB solver used to cross-check every guard.
        #[arg(long, env = "DATAMIN_SMT")]
        smt_solver: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Check a minimiser document against the program by enumeration.
    Verify {
        program: PathBuf,
        minimiser: PathBuf,
        /// Write a JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print the representative of one concrete input.
    Online {
        program: PathBuf,
        /// Input binding `name=value`; repeat for every input.
        #[arg(long = "in", value_name = "NAME=VALUE", required = true)]
        inputs: Vec<String>,
        #[arg(long, default_value_t = Mode::Distributed)]
        mode: Mode,
        #[command(flatten)]
        limits: Limits,
    },
    /// Report pairs of logged inputs that disclosed more than needed.
    Audit {
        /// JSON lines `{"input": {...}, "output": v}`.
        log: PathBuf,
    },
    /// Compare what two programs over the same inputs disclose.
    Knowledge {
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        limits: Limits,
    },
    /// Check that the best monolithic minimiser hides seeded random hidden uses.
    Theorem1 {
        program: PathBuf,
        /// Hidden program to check instead of random ones.
        #[arg(long)]
        hidden: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print the symbolic characterisation as an SMT-LIB script.
    Smt {
        program: PathBuf,
        /// Run the script through this solver and compare its answer.
        #[arg(long, env = "DATAMIN_SMT")]
        smt_solver: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { status::USAGE } else { status::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let verbose = cli.verbose > 0;
    let result = match cli.command {
        Command::Synth {
            program,
            mode,
            output,
            emit_source,
            dump_tree,
            smt_solver,
            limits,
        } => commands::synth(&commands::SynthArgs {
            program,
            mode,
            output,
            emit_source,
            dump_tree,
            smt_solver,
            limits,
            verbose,
        }),
        Command::Verify {
            program,
            minimiser,
            report,
            limits,
        } => commands::verify(&program, &minimiser, report.as_deref(), &limits),
        Command::Online {
            program,
            inputs,
            mode,
            limits,
        } => commands::online(&program, &inputs, mode, &limits, verbose),
        Command::Audit { log } => commands::audit(&log),
        Command::Knowledge { f, g, limits } => commands::knowledge(&f, &g, &limits),
        Command::Theorem1 {
            program,
            hidden,
            seed,
            samples,
            limits,
        } => commands::theorem1(&program, hidden.as_deref(), seed, samples, &limits),
        Command::Smt {
            program,
            smt_solver,
            limits,
        } => commands::smt(&program, smt_solver.as_deref(), &limits),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
