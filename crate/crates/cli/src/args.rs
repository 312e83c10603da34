use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gedanken_core::bellstates::BellKind;
use gedanken_core::eraser::{EraseTiming, MarkerBasis};
use gedanken_core::qstate::Plane;
use gedanken_core::wigner::Formalism;
use serde::{Deserialize, Serialize};

/// Gedanken-experiment engine: Bell correlations, trial ensembles, CHSH and
/// Local-Friendliness inequalities, Wigner's friend and the quantum eraser.
///
/// Angles are given in degrees. Every output carries a run manifest that
/// `gedanken replay` can regenerate byte for byte.
#[derive(Debug, Parser)]
#[command(name = "gedanken", version, about, long_about)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output file. Defaults to `$GEDANKEN_OUT_DIR/<subcommand>.<ext>` when the variable is set, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel sampling and search.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand", content = "params")]
pub enum Command {
    /// Closed-form and numeric spin correlation of a Bell state.
    Bell(BellArgs),
    /// Seeded two-wing trial ensemble and its data-partition analysis.
    Ensemble(EnsembleArgs),
    /// CHSH and Local-Friendliness left-hand sides, with optional settings search.
    Inequality(InequalityArgs),
    /// Wigner's-friend probabilities, basis rewrites and the shared-record demo.
    Wigner(WignerArgs),
    /// Two-slit screen histograms with which-way marking and erasure.
    Eraser(EraserArgs),
    /// Regenerate an output file from its embedded manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bell(_) => "bell",
            Command::Ensemble(_) => "ensemble",
            Command::Inequality(_) => "inequality",
            Command::Wigner(_) => "wigner",
            Command::Eraser(_) => "eraser",
            Command::Replay(_) => "replay",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Ensemble(a) if !a.figure7 => a.seed,
            Command::Wigner(a) if a.contradiction_demo.is_some() => a.seed,
            Command::Eraser(a) if a.particles.is_some() || a.choices.is_some() => a.seed,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BellArgs {
    #[arg(long, default_value = "psi-minus")]
    pub kind: BellKind,

    /// Measurement plane for `--alpha`/`--theta` (default xz).
    #[arg(long)]
    pub plane: Option<Plane>,

    /// Alice's in-plane angle, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,

    /// Bob's angle relative to Alice's, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,

    /// Alice's unit axis as x,y,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "b", conflicts_with_all = ["plane", "alpha", "theta"])]
    pub a: Option<Vec<f64>>,

    /// Bob's unit axis as x,y,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "a")]
    pub b: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EnsembleArgs {
    /// The fixed eight-trial triplet ensemble.
    #[arg(long, conflicts_with_all = ["mu", "seed", "n"])]
    pub figure7: bool,

    #[arg(long, default_value = "psi-minus")]
    pub kind: BellKind,

    /// Use the singlet/product mixture with this singlet weight instead of a Bell state.
    #[arg(long)]
    pub mu: Option<f64>,

    #[arg(long, default_value = "xz")]
    pub plane: Plane,

    /// Alice's in-plane angle, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,

    /// Bob's angle relative to Alice's, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,

    /// Number of trials.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Also write the trial table to this CSV file.
    #[arg(long)]
    pub trials_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct InequalityArgs {
    /// Singlet weight of the tunable mixture (default 1).
    #[arg(long, conflicts_with = "state")]
    pub mu: Option<f64>,

    /// Evaluate a Bell state instead of the mixture.
    #[arg(long)]
    pub state: Option<BellKind>,

    /// Alice's three angles, degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alice: Option<Vec<f64>>,

    /// Bob's three angles, degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bob: Option<Vec<f64>>,

    #[arg(long, default_value = "xy")]
    pub plane: Plane,

    /// max-chsh, max-lf or joint:CHSH,LF
    #[arg(long, conflicts_with_all = ["alice", "bob"])]
    pub search: Option<String>,

    /// Grid points per angle for the search.
    #[arg(long, default_value_t = 72)]
    pub grid: usize,

    /// Coordinate-ascent passes after the grid scan.
    #[arg(long, default_value_t = 200)]
    pub refine: usize,

    /// Accepted distance from a joint target.
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,

    /// Six ±1 outcomes A1,A2,A3,B1,B2,B3 of a counterfactually definite model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["mu", "state", "search", "sweep"])]
    pub deterministic: Option<Vec<i8>>,

    /// Sweep mu over STEPS+1 equally spaced values in [0, 1].
    #[arg(long, value_name = "STEPS", conflicts_with_all = ["mu", "state", "search"])]
    pub sweep: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WignerArgs {
    /// standard, relative-state or subjective-collapse.
    #[arg(long)]
    pub formalism: Option<Formalism>,

    /// Superobserver measurements in time order, e.g. zeus:zhat,wigner:what.
    #[arg(long, value_delimiter = ',')]
    pub sequence: Vec<String>,

    /// Conditioning events, e.g. xena:tails.
    #[arg(long, value_delimiter = ',')]
    pub cond: Vec<String>,

    /// Target event, e.g. wigner:OK.
    #[arg(long)]
    pub target: Option<String>,

    /// Run N trials of the shared-record scenario.
    #[arg(long, value_name = "N", conflicts_with_all = ["target", "expand"])]
    pub contradiction_demo: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Also write the per-trial ledgers to this JSONL file.
    #[arg(long, requires = "contradiction_demo")]
    pub ledger: Option<PathBuf>,

    /// Rewrite the initial state: ok-fail, or agent:basis.
    #[arg(long, conflicts_with = "target")]
    pub expand: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EraserArgs {
    /// Record which slit each particle takes.
    #[arg(long, conflicts_with = "no_mark")]
    pub mark: bool,

    #[arg(long)]
    pub no_mark: bool,

    /// Measure the marker in the erasing basis.
    #[arg(long, requires = "mark")]
    pub erase: bool,

    /// before-screen or after-screen.
    #[arg(long, default_value = "before-screen")]
    pub timing: EraseTiming,

    /// conjugate or which-way.
    #[arg(long, default_value = "conjugate")]
    pub erase_basis: MarkerBasis,

    /// Marker overlap for partial marking.
    #[arg(long, default_value_t = 0.0)]
    pub overlap: f64,

    /// Slit separation.
    #[arg(long, default_value_t = 4.0)]
    pub d: f64,

    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    #[arg(long, default_value_t = -4.025, allow_hyphen_values = true)]
    pub x_min: f64,

    #[arg(long, default_value_t = 4.025, allow_hyphen_values = true)]
    pub x_max: f64,

    #[arg(long, default_value_t = 161)]
    pub bins: usize,

    /// Sample this many particles instead of computing the exact histogram.
    #[arg(long)]
    pub particles: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Per-particle erase decisions, one 0/1 per line.
    #[arg(long, requires = "mark", conflicts_with_all = ["particles", "erase"])]
    pub choices: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A JSON or CSV output written by this tool.
    pub file: PathBuf,

    /// Compare the regenerated output with the file instead of printing it.
    #[arg(long)]
    pub check: bool,
}
