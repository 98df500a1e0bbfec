use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cqrel", version, about = "Error-exponent bounds for pure-state classical-quantum channels")]
pub struct Cli {
    /// Worker threads for parallel sections. Never changes the output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Report rates and exponents in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Structured)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Structured,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity max_pi H(S_pi) with the maximizing prior.
    Capacity(ChannelArgs),
    /// E_r and E_ex sampled over a rate interval.
    Curve(CurveArgs),
    /// The exponent at rate zero, or the orthogonal pair that makes it infinite.
    ZeroRate(ChannelArgs),
    /// Closed forms for two states with overlap epsilon.
    Binary(BinaryArgs),
    /// Monte Carlo check of the random-coding bound on decoded codebooks.
    Verify(VerifyArgs),
    /// Commuting-case bounds, or the pure-state cross-check for a state file.
    Classical(ClassicalArgs),
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[arg(long)]
    pub channel: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// `uniform`, `optimize` (per-rate envelope) or a prior file.
    #[arg(long)]
    pub prior: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub rmin: f64,
    /// Defaults to H(S_pi) at the chosen prior, or the capacity for `optimize`.
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct BinaryArgs {
    #[arg(long)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// `uniform`, `optimize` (capacity-achieving prior) or a prior file.
    #[arg(long)]
    pub prior: Option<String>,
    #[arg(long = "M")]
    pub code_size: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long = "s-grid", default_value = "0.1:1.0:0.1")]
    pub s_grid: String,
    /// Also run the expurgation experiment with this exponent r in (0, 1].
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    /// A `{"rows": ...}` transition matrix or a state-vector channel file.
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub prior: Option<String>,
    #[arg(long = "M", default_value_t = 2)]
    pub code_size: u64,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Grid for the random-coding side, inside [0, 1].
    #[arg(long = "s-grid", default_value = "0.1:1.0:0.1")]
    pub s_grid: String,
    /// Grid for the expurgated side, at or above 1.
    #[arg(long = "ex-s-grid", default_value = "1:10:1")]
    pub ex_s_grid: String,
}

/// Parses `lo:hi:step` into `lo, lo + step, ...` up to `hi`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(format!("grid `{spec}` is not of the form lo:hi:step"));
    };
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("`{x}` in grid `{spec}` is not a number"));
    let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && lo <= hi) {
        return Err(format!("grid `{spec}` needs lo <= hi and step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(format!("grid `{spec}` has more than 100000 points"));
    }
    // snap to 12 decimals so 0.1:1:0.1 gives 0.3, not 0.30000000000000004
    Ok((0..count).map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12).collect())
}
