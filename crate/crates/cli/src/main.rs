use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

mod commands;
mod report;

use report::Failure;

/// Many-party correlations as divergence from hierarchical Gibbs models.
///
/// Set HIERCORR_THREADS to bound the worker threads used for restarts and sampling.
#[derive(Parser, Serialize)]
#[command(name = "hiercorr", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Serialize, Clone)]
pub struct Common {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Constraint tolerance for projections (default 1e-8).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Unit for entropies and divergences in the report.
    #[arg(long, global = true, value_enum, default_value_t = Units::Nats)]
    pub units: Units,
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Nats,
    Bits,
}

#[derive(ValueEnum, Serialize, Clone, Copy, Debug)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Auto,
    Dual,
    Primal,
    Ipf,
}

#[derive(Args, Serialize, Clone)]
pub struct ModelArgs {
    /// Hypergraph file (`{"N": .., "generators": [[1, 2], ..]}`, units from 1).
    #[arg(long, conflicts_with = "k")]
    pub hypergraph: Option<PathBuf>,
    /// Use the k-local hypergraph instead of a file.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Maximum-entropy projection of a state onto a hierarchical model.
    Project {
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Divergence c_k from the k-local model.
    Ck {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// All c_k and irreducible parts C_k.
    Decompose {
        #[arg(long)]
        state: PathBuf,
    },
    /// Multi-information, the divergence from the independence model.
    Multiinfo {
        #[arg(long)]
        state: PathBuf,
    },
    /// Model dimensions, numerical and closed form.
    Dims {
        /// Unit sizes (`2,2,3`) or a shape file.
        #[arg(long)]
        shape: String,
        /// `classical`, `quantum`, or one of `c`/`q` per unit.
        #[arg(long)]
        kinds: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Phase/shift matrix basis of the n x n matrices.
    Basis {
        #[arg(long)]
        n: usize,
        /// Emit the self-adjoint basis instead.
        #[arg(long)]
        hermitian: bool,
    },
    /// k-feasibility of supports of probability vectors.
    Feasibility {
        /// Unit sizes, e.g. `2,2,2`.
        #[arg(long)]
        shape: String,
        #[arg(long)]
        k: usize,
        /// Configurations of one support set, e.g. `100,010,001`.
        #[arg(long, conflicts_with = "exhaustive")]
        support: Option<String>,
        /// Classify every subset up to `--max-size`.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Interaction matrix, integer kernel and toric membership.
    Toric {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        k: usize,
        /// Probability vector file (a classical state file) to test for membership.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Print the interaction matrix and kernel as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Local maximizers of the divergence from a model.
    Maximize {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        kinds: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 3000)]
        max_steps: usize,
    },
    /// Bell-diagonal state report.
    Bell {
        /// Correlation vector `t1,t2,t3`.
        #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
        t: Option<String>,
        /// Bell weights `l1,l2,l3,l4`.
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Mutual-information bound over separable Bell-diagonal states.
    Theorem1 {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Tetrahedron/octahedron geometry on a grid, as CSV.
    Fig1 {
        #[arg(long, default_value_t = 20)]
        grid: usize,
    },
    /// Run every reproduction check and print a pass/fail table.
    Demo {
        /// Run only these checks (1-based, repeatable).
        #[arg(long)]
        only: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Project { .. } => "project",
            Command::Ck { .. } => "ck",
            Command::Decompose { .. } => "decompose",
            Command::Multiinfo { .. } => "multiinfo",
            Command::Dims { .. } => "dims",
            Command::Basis { .. } => "basis",
            Command::Feasibility { .. } => "feasibility",
            Command::Toric { .. } => "toric",
            Command::Maximize { .. } => "maximize",
            Command::Bell { .. } => "bell",
            Command::Theorem1 { .. } => "theorem1",
            Command::Fig1 { .. } => "fig1",
            Command::Demo { .. } => "demo",
        }
    }
}

fn configure_threads() -> Result<usize, Failure> {
    if let Ok(v) = std::env::var("HIERCORR_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::validation(format!("HIERCORR_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::validation(e.to_string()))?;
    }
    Ok(rayon::current_num_threads())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = configure_threads().and_then(|threads| {
        let mut out = commands::run(&cli)?;
        out.diagnostics.insert("threads".into(), json!(threads));
        Ok(out)
    });
    match outcome {
        Ok(out) => {
            let code = out.exit_code();
            let report = out.into_report(&cli, start.elapsed().as_secs_f64());
            if let Err(e) = report::emit(&cli.common, &report) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

pub fn config_echo(cli: &Cli) -> Value {
    serde_json::to_value(cli).unwrap_or(Value::Null)
}
