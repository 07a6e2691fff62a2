use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cocycle_core::subshift::DEFAULT_WORD_CAP;

#[derive(Debug, Parser)]
#[command(name = "cocycle", version, about = "Pressure, spectra and certificates for matrix cocycles over subshifts of finite type")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Cocycle spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of worker shards for word enumeration.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    /// Upper limit on enumerated words (or word pairs).
    #[arg(long, default_value_t = DEFAULT_WORD_CAP)]
    pub cap: u64,
}

#[derive(Debug, Clone, Args)]
pub struct Grid {
    /// Weight grid `A:B:STEP` (inclusive).
    #[arg(long = "t-grid", conflicts_with = "t", allow_hyphen_values = true)]
    pub t_grid: Option<String>,
    /// Explicit weights, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Option<Vec<f64>>,
    /// Exterior levels carrying the weight, comma separated (1-based).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub levels: Vec<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Topological entropy of the subshift.
    Entropy {
        #[command(flatten)]
        common: Common,
    },
    /// Admissible words of length n.
    Words {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// Print only the number of words.
        #[arg(long)]
        count: bool,
    },
    /// Pressure brackets over a weight grid (CSV).
    Pressure {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Refuse heuristic brackets.
        #[arg(long)]
        certified: bool,
        /// Almost-multiplicativity constant for negative weights.
        #[arg(long)]
        kappa: Option<f64>,
        /// Search quasi-multiplicativity constants with connectors up to this length.
        #[arg(long)]
        gap: Option<usize>,
        /// Word length scanned by the quasi-multiplicativity search.
        #[arg(long, default_value_t = 6)]
        qm_depth: usize,
    },
    /// Entropy spectrum from the Legendre transform (CSV).
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 12)]
        n: usize,
    },
    /// Brackets on the upper and lower joint spectral radii (JSON).
    Jsr {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Gibbs weight diagnostics at one or more depths (CSV).
    Gibbs {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_delimiter = ',', default_value = "10")]
        n: Vec<usize>,
    },
    /// Almost-multiplicativity certificate from an invariant cone (JSON).
    Kappa {
        #[command(flatten)]
        common: Common,
        /// `orthant`, `circular:AXIS:APERTURE` or `rays:V1;V2;...` with comma-separated coordinates.
        #[arg(long, default_value = "orthant")]
        cone: String,
        /// Validation depth for the exhaustive pair check.
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Structural checks (JSON).
    #[command(subcommand)]
    Check(Check),
    /// Sensitivity of spectrum, lower exponent and large-weight pressure to
    /// multiplicative perturbations of the generators (JSON).
    Perturb {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum Check {
    /// `‖A_i‖‖A_i^{-1}‖ω^r < 1` for every generator.
    FiberBunched {
        #[command(flatten)]
        common: Common,
    },
    /// Singular-value gap diagnostic for dominated splittings.
    Domination {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    /// Strict invariance of a cone and Birkhoff data of every generator.
    Cone {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "orthant")]
        cone: String,
    },
    /// Pinching and twisting at a homoclinic point.
    Typical {
        #[command(flatten)]
        common: Common,
        /// One period of the periodic point; searched when omitted.
        #[arg(long)]
        p_word: Option<String>,
        /// Block of the homoclinic point that differs from the periodic pattern.
        #[arg(long)]
        insert: Option<String>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        offset: i64,
        /// Relative size required of twisting coefficients.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Relative gap required between eigenvalue moduli.
        #[arg(long, default_value_t = 1e-6)]
        moduli_tol: f64,
    },
}
