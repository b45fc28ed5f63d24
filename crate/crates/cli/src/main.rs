mod commands;
mod config;
mod input;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::ConstellationArgs;

#[derive(Parser, Debug)]
#[command(name = "apsk", version, about = "APSK constellations for joint communication and sensing")]
struct Cli {
    /// Worker threads for sweeps and suites (0 = all cores).
    #[arg(long, global = true, env = "APSK_THREADS", default_value_t = 0)]
    threads: usize,

    /// Print effective configuration and timings to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a constellation and write it as JSON plus a scatter SVG.
    Gen(GenArgs),
    /// Distance, rate and sensing metrics of one constellation.
    Metrics(MetricsArgs),
    /// Sweep the tradeoff family and trace the rate/variance frontier.
    Sweep(SweepArgs),
    /// Run the property suites; exits nonzero on any violation.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: ConstellationArgs,

    /// Output JSON path; the SVG goes next to it.
    #[arg(short, long, default_value = "constellation.json")]
    pub out: PathBuf,

    /// Skip the scatter plot.
    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub source: ConstellationArgs,

    /// Constellation JSON written by `gen`; replaces the inline parameters.
    #[arg(short, long, conflicts_with_all = ["m", "psk", "qam", "design"])]
    pub input: Option<PathBuf>,

    /// Channel SNR in dB; comma-separated for several rows.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub snr_db: Vec<f64>,

    /// Sensing block length.
    #[arg(long = "L", default_value_t = apsk_core::sense::DEFAULT_BLOCK_LEN)]
    pub block_len: usize,

    #[arg(long, default_value_t = 1.0)]
    pub sigma_s2: f64,

    #[arg(long, default_value_t = 1.0)]
    pub power: f64,

    /// Monte Carlo samples for mutual information.
    #[arg(long, default_value_t = apsk_core::comm::DEFAULT_MI_SAMPLES)]
    pub samples: usize,

    /// Monte Carlo blocks for the average CRB.
    #[arg(long, default_value_t = apsk_core::sense::DEFAULT_CRB_BLOCKS)]
    pub blocks: usize,

    #[arg(long, default_value_t = apsk_core::tradeoff::DEFAULT_SEED)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// TOML file with any of the sweep keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub m: Option<u32>,

    #[arg(long)]
    pub snr_db: Option<f64>,

    /// Inclusive alpha range `lo:hi`.
    #[arg(long)]
    pub alpha: Option<String>,

    /// Grid `start:step:stop` used for both b and c.
    #[arg(long)]
    pub grid: Option<String>,

    /// Grid for b only.
    #[arg(long)]
    pub b_grid: Option<String>,

    /// Grid for c only.
    #[arg(long)]
    pub c_grid: Option<String>,

    #[arg(long)]
    pub samples: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    /// External `variance,rate_bits` CSV drawn on the plot.
    #[arg(long)]
    pub mba: Option<PathBuf>,

    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    /// Full sample counts and grids.
    Full,
    /// Reduced counts for a fast smoke run.
    Quick,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suites to run (comma-separated); all when absent.
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,

    #[arg(long, value_enum, default_value_t = Scale::Full)]
    pub scale: Scale,

    /// Block lengths for the CRB ordering suite.
    #[arg(long = "L", value_delimiter = ',')]
    pub block_lens: Vec<usize>,

    #[arg(long, value_delimiter = ',')]
    pub snr_db: Vec<f64>,

    #[arg(long)]
    pub samples: Option<usize>,

    #[arg(long)]
    pub blocks: Option<usize>,

    #[arg(long)]
    pub max_m: Option<u32>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// JSON report path; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,

    /// List suite identifiers and exit.
    #[arg(long)]
    pub list: bool,

    #[arg(long, hide = true)]
    pub inject_dmin_scale: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // a second initialization only happens in tests; ignoring it is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&a, cli.verbose),
        Command::Metrics(a) => commands::metrics(&a, cli.verbose),
        Command::Sweep(a) => commands::sweep(&a, cli.verbose),
        Command::Verify(a) => commands::verify(&a, cli.verbose),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
