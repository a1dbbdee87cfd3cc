mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdpl_core::model::Objective;
use mdpl_core::prism::EmitMode;

/// Compile, solve and simulate probabilistic planning domains written in MDPL.
#[derive(Parser, Debug)]
#[command(name = "mdplc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and lint a domain.
    Check {
        #[command(flatten)]
        input: Input,
    },
    /// Build the explicit MDP and write PRISM model, properties and statistics.
    Compile {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelOpts,
        /// Also write a Graphviz rendering of the MDP.
        #[arg(long)]
        dot: bool,
        /// Also write a plain-text edge list.
        #[arg(long)]
        graph: bool,
    },
    /// Compute optimal values and write the policy table.
    Solve {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelOpts,
        /// Goal label; defaults to doneP for pmax and doneR otherwise.
        #[arg(long)]
        label: Option<String>,
    },
    /// Run a policy table under an executor model.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelOpts,
        /// Policy table written by `solve`.
        #[arg(long)]
        policy: PathBuf,
        /// Goal label; defaults to doneP for pmax and doneR otherwise.
        #[arg(long)]
        label: Option<String>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability of executing a different action than the policy's.
        #[arg(long, conflicts_with = "epsilon", value_parser = probability)]
        fault: Option<f64>,
        /// Probability of executing a uniformly random enabled action.
        #[arg(long, value_parser = probability)]
        epsilon: Option<f64>,
        /// Step budget per trial; defaults to ten times the number of states.
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// List the bundled domains, or print one.
    Bundled { name: Option<String> },
}

#[derive(Args, Debug)]
struct Input {
    /// Domain file, or `@name` for a bundled domain.
    domain: String,
    /// Output directory.
    #[arg(short = 'o', long = "out", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ModelOpts {
    /// Objective; also fixes the sign of necessary-rule penalties.
    #[arg(long, default_value = "pmax", value_parser = parse_objective)]
    objective: Objective,
    /// PRISM state encoding: indexed or factored.
    #[arg(long, default_value = "indexed", value_parser = parse_mode)]
    mode: EmitMode,
    /// Abort when the state space grows beyond this many states.
    #[arg(long, default_value_t = mdpl_core::ground::DEFAULT_STATE_CAP)]
    cap: usize,
    /// Run every stage on one thread.
    #[arg(long)]
    sequential: bool,
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<EmitMode, String> {
    s.parse()
}

fn probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is outside [0,1]"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
