use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qmlab", version, about = "Quasiminimizer constants, blowup bounds and pasting examples on intervals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, env = "QMLAB_FORMAT", default_value = "text")]
    pub format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    /// Final bracket width for root finding.
    #[arg(long, global = true)]
    pub tol_root: Option<f64>,
    /// Relative stopping tolerance of the 2-D optimizer.
    #[arg(long, global = true)]
    pub tol_opt: Option<f64>,
    /// Feasibility tolerance of the LP solver.
    #[arg(long, global = true)]
    pub tol_lp: Option<f64>,
    /// Iteration cap per solver.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One-corner functions.
    #[command(subcommand)]
    Corner(CornerCmd),
    /// Power-type functions and the blowup of their minimum.
    #[command(subcommand)]
    Power(PowerCmd),
    /// Closed-form upper bounds for minima.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Upper bound for the minimum of N functions from the linear program.
    Lp {
        /// Comma-separated constants, one per function.
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
        /// Require only nonnegative net coefficients for non-minimal functions.
        #[arg(long)]
        relaxed: bool,
    },
    /// Lower and upper bounds for the minimum of two functions.
    Blowup {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        #[arg(long)]
        p: f64,
    },
    /// Pasting constructions.
    #[command(subcommand)]
    Paste(PasteCmd),
    /// Operations on piecewise linear functions read from JSON files.
    #[command(subcommand)]
    Fn(FnCmd),
    /// Reproduce one of the two tables.
    Table {
        #[arg(long, value_parser = ["1", "2"])]
        name: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum CornerCmd {
    /// Constant Q and slope factor k for a quotient gamma.
    Q {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        p: f64,
    },
    /// Quotient gamma with a given constant Q.
    Gamma {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        p: f64,
    },
    /// The extremal one-corner function on (0, 1) for a quotient gamma.
    Optimal {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum PowerCmd {
    /// Constant of x^alpha on (0, 1).
    Qalpha {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long)]
        p: f64,
    },
    /// The two exponents with a given constant.
    Branches {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        p: f64,
    },
    /// Energy of the minimum of the two extremal power functions.
    Qtilde {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum BoundCmd {
    /// min{Q1 Q2, Q1 + Q2}.
    Km {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
    },
    /// Sharp bound for two functions.
    Min2 {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
    },
    /// Bound for three functions.
    Min3 {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        #[arg(long)]
        q3: f64,
    },
    /// Three-function bound with the multipliers of the linear system.
    System {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        #[arg(long)]
        q3: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Standard,
    Second,
}

#[derive(Debug, Subcommand)]
pub enum PasteCmd {
    /// Example whose energy reaches Q1 Q2.
    Sharp {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        #[arg(long)]
        p: f64,
    },
    /// Connected example where the inner set is an interval.
    Interval {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "standard")]
        variant: VariantArg,
    },
    /// Interval examples over a list of exponents.
    Sweep {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Free,
    Super,
}

#[derive(Debug, Args)]
pub struct FnInput {
    /// Function file(s) in the breakpoints/values JSON format.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Restrict to the interval a,b.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    pub interval: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum FnCmd {
    /// p-energy.
    Energy {
        #[command(flatten)]
        input: FnInput,
        #[arg(long)]
        p: f64,
    },
    /// Best quasiminimizing constant.
    Qconst {
        #[command(flatten)]
        input: FnInput,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "free")]
        mode: ModeArg,
    },
    /// Pointwise minimum of two functions.
    Min {
        #[command(flatten)]
        input: FnInput,
        /// Accepted for uniformity; unused.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Least concave majorant.
    Envelope {
        #[command(flatten)]
        input: FnInput,
        /// Accepted for uniformity; unused.
        #[arg(long)]
        p: Option<f64>,
    },
}
