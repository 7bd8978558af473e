mod commands;
mod settings;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "chaokey",
    version,
    about = "Chaotic 9D system analysis, DNA image cipher and Modbus CRC protection"
)]
pub struct Cli {
    /// Flat key=value file; flags override it, it overrides defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Integrate the system and write the trajectory as CSV.
    Simulate(SimulateArgs),
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Encrypt an image; writes the cipher container and the key file.
    Encrypt(EncryptArgs),
    /// Decrypt a cipher container with its key file.
    Decrypt(DecryptArgs),
    #[command(subcommand)]
    Frame(FrameCommand),
    /// Quantized keystream bits, NIST subset and byte chi-square.
    Keystream(KeystreamArgs),
    /// Statistical report on one image, or a comparison of two.
    Metrics(MetricsArgs),
}

#[derive(Args, Default, Clone)]
pub struct SystemArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Add the u4*u8 term to the ninth equation.
    #[arg(long)]
    pub include_u4u8: Option<bool>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// One value for all nine components, or nine comma-separated values.
    #[arg(long)]
    pub init: Option<String>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub transient: Option<usize>,
    /// Keep every n-th state.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum AnalyzeCommand {
    /// Full Lyapunov spectrum (JSON).
    Lyapunov(LyapunovArgs),
    /// Local maxima of one component while a parameter varies (CSV).
    Bifurcation(BifurcationArgs),
    /// 0-1 test for chaos (JSON).
    ZeroOne(ZeroOneArgs),
    /// Spectral entropy and C0 over an (a, c) grid (CSV matrices).
    Complexity(ComplexityArgs),
}

#[derive(Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long)]
    pub total_time: Option<f64>,
    #[arg(long)]
    pub transient_time: Option<f64>,
    #[arg(long)]
    pub reorth_every: Option<usize>,
    /// Write the running estimates as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub trace_every: Option<usize>,
    /// JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BifurcationArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// a, b or c.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Observed component, 1-based (1 = u1).
    #[arg(long)]
    pub component: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub transient: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ZeroOneArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Trajectory CSV as written by `simulate`; simulates when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column of the CSV, or the simulated component (1-based).
    #[arg(long)]
    pub component: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Integrator steps between samples when simulating.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub transient: Option<usize>,
    /// Use this single frequency instead of the median over random ones.
    #[arg(long)]
    pub c01: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write `n,p,s` as CSV.
    #[arg(long)]
    pub translation: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ComplexityArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long)]
    pub a_lo: Option<f64>,
    #[arg(long)]
    pub a_hi: Option<f64>,
    #[arg(long)]
    pub c_lo: Option<f64>,
    #[arg(long)]
    pub c_hi: Option<f64>,
    #[arg(long)]
    pub na: Option<usize>,
    #[arg(long)]
    pub nc: Option<usize>,
    #[arg(long)]
    pub len: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub transient: Option<usize>,
    #[arg(long)]
    pub component: Option<usize>,
    #[arg(long)]
    pub se_out: Option<PathBuf>,
    #[arg(long)]
    pub c0_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EncryptArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Cipher container.
    #[arg(long)]
    pub out: PathBuf,
    /// Key file to write.
    #[arg(long)]
    pub key: PathBuf,
    /// x,y,w,h of the part to encrypt.
    #[arg(long)]
    pub region: Option<String>,
    /// Extra secret mixed into the image-derived key.
    #[arg(long)]
    pub passphrase: Option<String>,
    /// Also write the cipher channels as an image.
    #[arg(long)]
    pub preview: Option<PathBuf>,
    /// Also write a metrics report of the cipher image.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Args)]
pub struct DecryptArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    /// PNG, or PPM with a .ppm extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum FrameCommand {
    /// Build a frame from address, function and data hex; print it with an encrypted CRC.
    Protect(FrameArgs),
    /// Check a received frame; exit 0 on accept, 6 on reject.
    Verify(FrameArgs),
}

#[derive(Args)]
pub struct FrameArgs {
    /// Hex bytes, e.g. 010300000001.
    pub hex: String,
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub nonce: Option<u64>,
}

#[derive(Args)]
pub struct KeystreamArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Key file; the default key (with any system flags) when absent.
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[arg(long)]
    pub bits: Option<usize>,
    /// Sequence to quantize: a, x, y, h, v or m.
    #[arg(long)]
    pub role: Option<String>,
    #[arg(long)]
    pub transient: Option<usize>,
    /// ASCII 0/1 file for the external test suite.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Second image for SSIM and pixel differences.
    #[arg(long)]
    pub other: Option<PathBuf>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run the NIST subset on the image bytes.
    #[arg(long)]
    pub nist: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NUMERIC: u8 = 3;
    pub const FORMAT: u8 = 4;
    pub const KEY: u8 = 5;
    pub const REJECT: u8 = 6;

    pub fn io(msg: impl Into<String>) -> Self {
        Failure {
            code: Self::IO,
            msg: msg.into(),
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: Self::USAGE,
            msg: msg.into(),
        }
    }

    pub fn key(msg: impl Into<String>) -> Self {
        Failure {
            code: Self::KEY,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<chaokey::Error> for Failure {
    fn from(e: chaokey::Error) -> Self {
        use chaokey::Error::*;
        let code = match &e {
            Io(_) => Failure::IO,
            InvalidArg(_) | DegenerateInput(_) | DimensionMismatch(_) | FrameTooShort(_)
            | FrameTooLong(_) => Failure::USAGE,
            NonFinite { .. } => Failure::NUMERIC,
            Format(_) | Image(_) => Failure::FORMAT,
            KeyFile(_) => Failure::KEY,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::io(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("CHAOKEY_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::usage(format!(
            "CHAOKEY_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| commands::run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if f.code != Failure::REJECT {
                eprintln!("error: {f}");
            }
            ExitCode::from(f.code)
        }
    }
}
