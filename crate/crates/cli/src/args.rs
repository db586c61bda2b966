use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "malpha",
    version,
    about = "Power-law family estimation and the alpha = 2 location fit"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Order alpha of the family and the divergence.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Input CSV, one observation per row.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output path, `-` for standard output.
    #[arg(long, global = true, default_value = "-")]
    pub output: String,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `json` for reports; `csv` is available for `simulate` only.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Relative tolerance for numerical integration.
    #[arg(long = "quad-tol", global = true, default_value_t = 1e-8)]
    pub quad_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closed-form Student-t mean and covariance for alpha < 1.
    Estimate,
    /// Exact location fit of the alpha = 2, unit-variance Student-t.
    CompactFit {
        #[arg(long, hide = true)]
        half_width: Option<f64>,
    },
    /// I_alpha and KL between two univariate distributions.
    ///
    /// Distributions are written `normal:MEAN,SD`, `student-t:ALPHA,MEAN,VAR`,
    /// `bernoulli:P` or `discrete:P1,P2,...`.
    Divergence {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Generalized log-likelihood of a Student-t model on the input sample.
    Loglik {
        /// Comma-separated mean vector.
        #[arg(long)]
        mu: String,
        /// Comma-separated covariance, row-major; identity if omitted.
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Seeded Student-t draws.
    Simulate {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value = "0")]
        mu: String,
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Reproduce the ten-point worked example and check its estimate.
    VerifyPaperExample {
        #[arg(long, hide = true)]
        half_width: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::CompactFit { .. } => "compact-fit",
            Command::Divergence { .. } => "divergence",
            Command::Loglik { .. } => "loglik",
            Command::Simulate { .. } => "simulate",
            Command::VerifyPaperExample { .. } => "verify-paper-example",
        }
    }
}
