use crate::output::Format;
use bounded_cycles::saddle::AlphaRule;
use bounded_cycles::sampler::Method;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "bounded-cycles",
    version,
    about = "Exact counts, saddle-point asymptotics and exact sampling for random permutations whose cycles are at most alpha long",
    args_override_self = true,
    after_help = "Flags may also come from --config FILE: one `key = value` per line (keys are long flag names, `#` starts a comment); flags given on the command line win.\nSet BOUNDED_CYCLES_CACHE to a directory to cache count tables between runs.\nExit status: 0 success, 2 invalid input, 3 numeric failure or unwritable output."
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; a `.manifest.json` is written next to it. Prints to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exact,
    Logspace,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Number of permutations of n elements with all cycles at most alpha long.
    #[command(long_about = "Number of permutations of n elements with all cycles at most alpha long, from the exact integer recurrence (or its log-space counterpart). Without --out the bare count is printed.")]
    Count {
        n: usize,
        alpha: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Saddle point x > 0 solving sum_{j<=alpha} x^j = n.
    #[command(long_about = "Saddle point x > 0 solving sum_{j<=alpha} x^j = n, which controls the expected cycle counts mu_m = x^m/m and the coefficient asymptotics. Reports the residual of the equation; --moments adds lambda_p = sum_j j^{p-1} x^j for p = 0..=3.")]
    Saddle {
        n: usize,
        alpha: usize,
        #[arg(long)]
        moments: bool,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Exact samples of the cycle type of a uniform constrained permutation.
    #[command(long_about = "Exact samples of the cycle type of a uniform random permutation of n elements with cycles at most alpha long. `recursive` picks the cycle through the smallest remaining element from exact count ratios. `rejection` draws independent tilted Poisson counts and keeps draws that add up to n. Sample i uses random stream i of the seed, so output does not depend on --threads.")]
    Sample {
        n: usize,
        alpha: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "recursive", value_parser = parse_method)]
        method: Method,
        /// Poisson tilt for `rejection` (default: the saddle point).
        #[arg(long)]
        tilt: Option<f64>,
        /// Attempt budget per sample for `rejection`.
        #[arg(long, default_value_t = bounded_cycles::sampler::DEFAULT_ATTEMPT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Saddle-point coefficient estimate against the exact coefficient.
    #[command(name = "verify-asymptotics", long_about = "Compares the saddle-point estimate f(x) exp(sum_j x^j/j) / (x^n sqrt(2 pi lambda_2)) of [z^n] f(z) exp(sum_{j<=alpha} z^j/j) with the exact coefficient and a contour-integral quadrature, along with the claimed relative error alpha/n + |||f|||.")]
    VerifyAsymptotics {
        /// Comma-separated n values.
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        /// Integer or `pow:BETA` for alpha = floor(n^BETA).
        #[arg(long, value_parser = parse_alpha_rule)]
        alpha: AlphaRule,
        /// `one`, `monomial:M` or `exp-partial:B`.
        #[arg(long, default_value = "one")]
        function: String,
        /// Initial quadrature nodes; 0 skips the quadrature.
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Monte Carlo and exact-law experiments.
    Experiment {
        #[command(subcommand)]
        kind: Experiment,
    },

    /// Re-runs the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Where to write the reproduced output (default: the recorded path).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    /// Integer or `pow:BETA`.
    #[arg(long, value_parser = parse_alpha_rule)]
    pub alpha: AlphaRule,
    #[arg(long)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "recursive", value_parser = parse_method)]
    pub method: Method,
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Total variation between (C_1..C_b) and independent Poisson(1/j).
    #[command(name = "poisson-tv", long_about = "Total variation distance between the law of the short cycle counts (C_1, ..., C_b) and independent Poisson(1/j) variables, exactly from the count table. With --samples and --seed, also the plug-in distance from sampled cycle types.")]
    PoissonTv {
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        #[arg(long, value_parser = parse_alpha_rule)]
        alpha: AlphaRule,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Normal fluctuations of cycle counts C_m and of the total cycle count.
    #[command(long_about = "Standardizes C_m by its tilted mean mu_m = x^m/m, (C_m - mu_m)/sqrt(mu_m), for each requested m and reports its moments and KS distance to the standard normal, pairwise correlations between the standardized counts, and the total cycle count centered by sum_{j<=alpha} x^j/j and scaled by sqrt(n/(alpha ln^2(n/alpha))).")]
    Clt {
        #[command(flatten)]
        sampling: SampleArgs,
        /// Comma-separated cycle lengths (default: alpha).
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Cumulative cycle and index counts along the t-scale b_t.
    #[command(long_about = "Normalized cumulative counts K_{b_t}/(n/alpha) and S_{b_t}/n along b_t = alpha + floor(ln(t) alpha / ln(n/alpha)), which concentrate on the diagonal t. Reports per-t means and spreads; the manifest summary holds the probability that the sup deviation over the grid exceeds --eps.")]
    Shape {
        #[command(flatten)]
        sampling: SampleArgs,
        #[arg(long, default_value_t = bounded_cycles::statistics::DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Covariance of the fluctuation process against the Brownian bridge.
    #[command(long_about = "Empirical covariance of L_t = (K_{b_t} - sum_{j<=b_t} x^j/j)/sqrt(n/alpha) (or the index analogue with --indices) at the requested time pairs, next to the Brownian bridge covariance s(1-t) and the standard error. Columns: s, t, cov_est, cov_pred, stderr.")]
    Bridge {
        #[command(flatten)]
        sampling: SampleArgs,
        /// Comma-separated `s:t` pairs.
        #[arg(long, value_delimiter = ',', default_value = "0.25:0.25,0.5:0.5,0.75:0.75,0.25:0.75,0.5:0.75")]
        pairs: Vec<String>,
        #[arg(long)]
        indices: bool,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Lengths of the k longest cycles relative to alpha.
    #[command(long_about = "Empirical distribution of the k longest cycle lengths l_1 >= ... >= l_k relative to alpha: P[l_i = alpha] and the mean of l_i/alpha. A sample with fewer than i cycles has no l_i and is counted in the `missing` column.")]
    Longest {
        #[command(flatten)]
        sampling: SampleArgs,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Exact law of C_m next to Poisson(mu_m).
    #[command(name = "tilt-check", long_about = "Exact law P[C_m = j] from the count table next to the Poisson law with the tilted mean mu_m = x^m/m, with their ratio.")]
    TiltCheck {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_alpha_rule)]
        alpha: AlphaRule,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: bounded_cycles::Error| e.to_string())
}

fn parse_alpha_rule(s: &str) -> Result<AlphaRule, String> {
    s.parse().map_err(|e: bounded_cycles::Error| e.to_string())
}
