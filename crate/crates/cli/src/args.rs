use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "ltumatch",
    version,
    about = "Stable matching with linearly transferable utility"
)]
pub struct Cli {
    #[command(flatten)]
    pub display: DisplayArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct DisplayArgs {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    /// Show rationals as decimals with this many digits (display only).
    #[arg(long, global = true, value_name = "DIGITS")]
    pub decimal: Option<usize>,

    /// Also write the exact JSON result to this file.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct LabelArgs {
    /// Initial Lemke-Howson label (0-based; hider strategies come first).
    #[arg(long, default_value_t = 0, conflicts_with = "all_labels")]
    pub label: usize,

    /// Run Lemke-Howson from every label and report each distinct result.
    #[arg(long)]
    pub all_labels: bool,

    /// Pivot limit per Lemke-Howson run.
    #[arg(long, default_value_t = ltumatch::lemke::DEFAULT_MAX_PIVOTS)]
    pub max_pivots: usize,
}

#[derive(Args, Debug, Clone)]
pub struct CapArgs {
    /// Largest number of pairs the oracle accepts.
    #[arg(long, default_value_t = 9)]
    pub max_pairs: usize,

    /// Largest number of types the oracle accepts.
    #[arg(long, default_value_t = 8)]
    pub max_types: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a problem through its hide-and-seek game and verify the result.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        labels: LabelArgs,
    },
    /// Check an outcome against the stability conditions.
    Verify { problem: PathBuf, outcome: PathBuf },
    /// Emit the hide-and-seek game of a problem.
    ToGame { problem: PathBuf },
    /// Map an equilibrium profile back to an outcome.
    FromEq { problem: PathBuf, profile: PathBuf },
    /// Decide whether the problem can be rescaled to transferable utility.
    CheckTu { problem: PathBuf },
    /// Emit the transferable-utility rescaling of a problem.
    RescaleTu { problem: PathBuf },
    /// Test whether two stable outcomes can exchange matchings and utilities.
    Exchange {
        problem: PathBuf,
        first: PathBuf,
        second: PathBuf,
    },
    /// Build two stable outcomes that cannot be exchanged.
    Counterexample {
        problem: PathBuf,
        /// Worker ids `x,x2` and job ids `y,y2`, as `x,x2,y,y2`. Defaults to
        /// the quadruple found by the TU check.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        quadruple: Option<Vec<String>>,
    },
    /// Enumerate stable outcomes by complementarity pattern.
    Oracle {
        problem: PathBuf,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Solve a many-to-one problem.
    SolveM2o {
        problem: PathBuf,
        #[command(flatten)]
        labels: LabelArgs,
    },
    /// Check a many-to-one outcome.
    VerifyM2o { problem: PathBuf, outcome: PathBuf },
    /// Run the full pipeline on random instances and cross-check with the oracle.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        max_workers: usize,
        #[arg(long, default_value_t = 3)]
        max_jobs: usize,
        /// Cap on square systems for equilibrium enumeration.
        #[arg(long, default_value_t = ltumatch::support::DEFAULT_BUDGET)]
        budget: u128,
        #[command(flatten)]
        caps: CapArgs,
    },
}
