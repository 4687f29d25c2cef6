//! `eatwb`: command-line front end.
//!
//! Exit codes: 0 success / true / proved, 1 false / refuted / not found,
//! 2 unknown / unsaturated, 3 input error.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(name = "eatwb", version, about = "Workbench for finitary essentially algebraic theories")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Term-depth bound for proofs and bounded constructions.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Largest carrier used when searching for countermodels (0 disables).
    #[arg(long = "refute-size", global = true)]
    pub refute_size: Option<usize>,
    /// E-graph class cap; defaults to EATWB_BUDGET or 5000.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Write the main artefact (model, fragment) to this file.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Print a JSON summary instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a theory file.
    Validate { theory: String },
    /// Compute a bounded free (or presented) model.
    Free {
        #[arg(long)]
        theory: String,
        /// Generators, e.g. "x:v, y:v".
        #[arg(long)]
        gens: String,
        /// Relation between generator terms, "lhs = rhs" (repeatable).
        #[arg(long = "rel")]
        relations: Vec<String>,
        /// Generator term forced to be defined (repeatable).
        #[arg(long = "force")]
        forced: Vec<String>,
    },
    /// Decide an equation: Proved, Refuted or Unknown.
    Prove {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        /// Explicit context; inferred from the sides when absent.
        #[arg(long)]
        ctx: Option<String>,
        /// Term assumed defined (repeatable).
        #[arg(long = "assume")]
        assumed: Vec<String>,
    },
    /// Derive that a term is everywhere defined.
    Defined {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        term: String,
        #[arg(long)]
        ctx: Option<String>,
    },
    /// Verify a Mal'tsev term, or search for one.
    Maltsev {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        sort: String,
        /// Candidate over variables x, y, z; searches when absent.
        #[arg(long)]
        term: Option<String>,
        /// Proof depth for each candidate during a search.
        #[arg(long = "proof-depth", default_value_t = 4)]
        proof_depth: u32,
    },
    /// Look for a Mal'tsev term through the relation generated in the free
    /// model on two generators.
    MaltsevRel {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        sort: String,
    },
    /// Verify regularity data for a term theta.
    Regwitness {
        #[arg(long)]
        theory: String,
        /// "ctx |- term".
        #[arg(long)]
        theta: String,
        #[arg(long)]
        pi: String,
        #[arg(long = "alpha")]
        alphas: Vec<String>,
        #[arg(long = "mu")]
        mus: Vec<String>,
    },
    /// Finite model operations.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Relation operations.
    #[command(subcommand)]
    Rel(RelCmd),
    /// Universal approximate co-operation on a model.
    Coop { model: String },
    /// Quotient of a model making a term defined at a tuple.
    Quotient {
        model: String,
        #[arg(long)]
        theta: String,
        /// Comma-separated element labels, one per context variable.
        #[arg(long)]
        tuple: String,
    },
    /// Check cubes of points: random vector-space cubes, or the recorded
    /// counterexample in sets.
    Cube {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        counterexample: bool,
    },
    /// Fragments of the free regular Mal'tsev completion theory.
    #[command(subcommand)]
    Gammamal(GammaCmd),
}

#[derive(Subcommand)]
enum ModelCmd {
    Validate { model: String },
    Product { a: String, b: String },
    Pullback { f: String, g: String },
    Equalizer { f: String, g: String },
    Image { f: String },
    Coproduct { models: Vec<String> },
}

#[derive(Subcommand)]
enum RelCmd {
    Compose { r: String, s: String },
    Difunctional { r: String },
    Equiv { r: String },
    Graphcheck { d: String, c: String, s: String },
}

#[derive(Subcommand)]
enum GammaCmd {
    /// Expand the given sorts of a fragment.
    Delta {
        fragment: Option<String>,
        #[arg(long = "sort", required = true)]
        sorts: Vec<String>,
    },
    /// Add the apparatus for the given terms.
    Theta {
        fragment: Option<String>,
        #[arg(long = "term", required = true)]
        terms: Vec<String>,
    },
    /// Smallest fragment containing the requested steps.
    Closure {
        #[arg(long = "delta")]
        deltas: Vec<String>,
        #[arg(long = "theta")]
        thetas: Vec<String>,
    },
    /// Prove the Mal'tsev (and optionally regularity) witnesses.
    Verify {
        fragment: String,
        #[arg(long = "theta")]
        thetas: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.global, cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
