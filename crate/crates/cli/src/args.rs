use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polarium::{EbN0Sweep, StagePermutation, DEFAULT_CLIP, DEFAULT_DESIGN_EPS, DEFAULT_MAX_ITERS};

#[derive(Debug, Parser)]
#[command(name = "polarium", version, about = "Polar code construction, decoding and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a code and write it as JSON.
    Construct(ConstructArgs),
    /// Encode payload bit strings, one per line.
    Encode(EncodeArgs),
    /// Decode LLR vectors, one per line.
    Decode(DecodeArgs),
    /// Monte-Carlo BER/BLER sweep over AWGN, written as CSV.
    Simulate(SimulateArgs),
    /// Render simulation CSVs as an SVG plot.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bhattacharyya,
    RmPolar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderName {
    Sc,
    Scl,
    SclCrc,
    Bp,
    Bpl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckNodeName {
    Exact,
    Minsum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Ber,
    Bler,
    Both,
}

/// Either a saved code (`--code`) or construction parameters.
#[derive(Debug, Clone, Args)]
pub struct CodeArgs {
    /// Code JSON written by `construct`.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["block_len", "k", "method", "design_eps", "d"])]
    pub code: Option<PathBuf>,
    /// Block length N (a power of two).
    #[arg(long = "N", value_name = "N", required_unless_present = "code")]
    pub block_len: Option<usize>,
    /// Number of information bits, CRC bits included.
    #[arg(long, required_unless_present = "code")]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Erasure probability of the design BEC.
    #[arg(long, value_name = "EPS")]
    pub design_eps: Option<f64>,
    /// RM-polar weight threshold: rows of weight <= d are frozen.
    #[arg(long)]
    pub d: Option<u64>,
    /// Attach CRC-16/CCITT to the last 16 information bits.
    #[arg(long)]
    pub crc: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DecoderArgs {
    /// List size for scl, scl-crc and bpl.
    #[arg(long, default_value_t = 8)]
    pub list: usize,
    /// Maximum BP iterations per decoder.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub iters: usize,
    /// LLR saturation magnitude.
    #[arg(long, default_value_t = DEFAULT_CLIP)]
    pub clip: f64,
    /// BP check-node rule.
    #[arg(long, value_enum, default_value_t = CheckNodeName::Exact)]
    pub cn: CheckNodeName,
    /// Seed for BPL permutations beyond the cyclic shifts.
    #[arg(long, default_value_t = 0)]
    pub perm_seed: u64,
    /// Stage order for bp, e.g. "3,2,1" (identity by default).
    #[arg(long, value_parser = parse_perm)]
    pub perm: Option<StagePermutation>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (stdout if omitted).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Overwrite an existing output file.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Print the Bhattacharyya parameters, row weights and roles to stderr.
    #[arg(long)]
    pub show_z: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Payload file, one bit string per line (stdin if omitted).
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, value_enum, default_value_t = DecoderName::Bpl)]
    pub decoder: DecoderName,
    #[command(flatten)]
    pub dec: DecoderArgs,
    /// LLR file, one whitespace-separated vector per line (stdin if omitted).
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Comma-separated decoders, run in the given order.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bpl")]
    pub decoder: Vec<DecoderName>,
    #[command(flatten)]
    pub dec: DecoderArgs,
    /// Eb/N0 grid in dB as start:step:stop, or a single value.
    #[arg(long, value_parser = parse_sweep, allow_hyphen_values = true)]
    pub ebn0: EbN0Sweep,
    #[arg(long, default_value_t = 100)]
    pub min_block_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_frames: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transmit zero data bits instead of random payloads.
    #[arg(long)]
    pub all_zero: bool,
    /// Suppress the per-point progress log.
    #[arg(long)]
    pub quiet: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Simulation CSV files.
    #[arg(required = true, value_name = "CSV")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Metric::Both)]
    pub metric: Metric,
    #[arg(long)]
    pub title: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl CodeArgs {
    pub fn method(&self) -> Method {
        self.method.unwrap_or(if self.d.is_some() {
            Method::RmPolar
        } else {
            Method::Bhattacharyya
        })
    }

    pub fn design_eps(&self) -> f64 {
        self.design_eps.unwrap_or(DEFAULT_DESIGN_EPS)
    }
}

pub fn parse_sweep(s: &str) -> Result<EbN0Sweep, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid number {t:?} in Eb/N0 sweep"))
    };
    let sweep = match parts.as_slice() {
        [v] => EbN0Sweep::single(num(v)?),
        [a, b, c] => EbN0Sweep {
            start: num(a)?,
            step: num(b)?,
            stop: num(c)?,
        },
        _ => return Err("expected start:step:stop or a single value".into()),
    };
    sweep.validate().map_err(|e| e.to_string())?;
    Ok(sweep)
}

fn parse_perm(s: &str) -> Result<StagePermutation, String> {
    s.parse().map_err(|e: polarium::PolarError| e.to_string())
}
