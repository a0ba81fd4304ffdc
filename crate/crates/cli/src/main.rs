//! `itl`: check formulas on finite models, search for countermodels, compute
//! bounded bisimulations and rerun the reproduction suite.
//!
//! Exit status is 0 when a verdict was computed (whatever it is), 1 on input
//! errors and 2 when an internal invariant or a suite item fails.

mod commands;
mod input;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use itl_core::bisim::BisimKind;
use itl_core::FrameClass;

#[derive(Parser, Debug)]
#[command(name = "itl", version, about = "Workbench for intuitionistic temporal logic over finite dynamic posets")]
pub struct Cli {
    /// Print the report as JSON (schema itl-report/1).
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a formula at one world of a model.
    Check {
        /// Model file, `-` for stdin, or `@name` for a named model.
        model: String,
        world: String,
        /// Formula text or `@name` for a named formula.
        formula: String,
    },
    /// Check a formula at every world of a model.
    Valid {
        model: String,
        #[command(flatten)]
        formulas: FormulaInput,
    },
    /// Search bounded models for a falsifying world, or print a named artifact.
    #[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
    Countermodel {
        #[command(subcommand)]
        get: Option<ArtifactCommand>,
        #[command(flatten)]
        formulas: FormulaInput,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Search bounded models for a world where two formulas differ.
    Equiv {
        first: String,
        second: String,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Compute a maximal bounded bisimulation, or verify a given family.
    Bisim {
        left: String,
        right: String,
        /// next, diamond, box, until or release.
        #[arg(long, short)]
        kind: BisimKind,
        /// Number of levels below Z_0.
        #[arg(long, short, default_value_t = 2, conflicts_with = "family")]
        depth: usize,
        /// Family file (`level i: (w1,w2) ...`) to verify instead of computing one.
        #[arg(long)]
        family: Option<String>,
        /// World pair `w1,w2` whose deepest level is reported (repeatable).
        #[arg(long = "pair", value_parser = input::parse_pair)]
        pairs: Vec<(String, String)>,
    },
    /// Push next operators inward with the verified commutation rules.
    NormalForm {
        #[command(flatten)]
        formulas: FormulaInput,
        /// Also confirm equivalence over persistent models up to --max-worlds.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
    },
    /// Run the reproduction suite and report PASS/FAIL per item.
    Paper {
        /// Run only the item with this id (repeatable).
        #[arg(long)]
        only: Vec<String>,
        #[arg(long, default_value_t = itl_core::reproduce::DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ArtifactCommand {
    /// Print a named model or formula: fisher-servi, weak-connected, H<n>, E<n>, ...
    Get { name: String },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct FormulaInput {
    /// Formula text or `@name`.
    pub formula: Option<String>,
    /// File with one formula per line (`#` comments).
    #[arg(long, short = 'f')]
    pub formula_file: Option<String>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// expanding, persistent or ht.
    #[arg(long, default_value = "expanding")]
    pub class: FrameClass,
    #[arg(long, default_value_t = 3)]
    pub max_worlds: usize,
    /// Comma-separated atoms; defaults to the atoms of the formulas.
    #[arg(long, value_delimiter = ',')]
    pub atoms: Option<Vec<String>>,
    /// Cap on models visited.
    #[arg(long)]
    pub limit: Option<u64>,
    /// Shuffles the enumeration order reproducibly.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors; here 2 is reserved for invariant failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let start = Instant::now();
    match commands::run(&cli.command, echo) {
        Ok(mut report) => {
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            if cli.json {
                let err = serde_json::json!({ "schema": report::SCHEMA, "error": format!("{e:#}") });
                println!("{err:#}");
            }
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
