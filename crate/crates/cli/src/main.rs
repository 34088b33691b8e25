use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfh_core::entropy::Coder;
use mfh_core::scheme::{ModeKind, Scheme};

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(name = "mfh", version, about = "Entropy-coded digital mobile-fronthaul simulator")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Format of the report printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Pcm,
    Dpcm,
}

impl From<ModeArg> for ModeKind {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pcm => ModeKind::Pcm,
            ModeArg::Dpcm => ModeKind::Dpcm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CoderArg {
    None,
    #[value(alias = "huffman")]
    Hc,
    #[value(alias = "arithmetic")]
    Ac,
}

impl CoderArg {
    fn coder(self) -> Option<Coder> {
        match self {
            CoderArg::None => None,
            CoderArg::Hc => Some(Coder::Huffman),
            CoderArg::Ac => Some(Coder::Arithmetic),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an OFDM carrier as raw I/Q plus a JSON sidecar.
    Generate {
        #[arg(long)]
        qam_order: Option<u32>,
        #[arg(long)]
        num_symbols: Option<usize>,
        /// File name inside the output directory.
        #[arg(long, default_value = "signal.iq")]
        output: PathBuf,
    },
    /// Quantize an I/Q file into per-rail codeword streams.
    Quantize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        qb: Option<u8>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        clip_sigma: Option<f64>,
    },
    /// Entropy-code a codeword stream.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = CoderArg::Ac)]
        coder: CoderArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decode an entropy-coded stream back to codewords.
    Decode {
        #[arg(long)]
        input: PathBuf,
        /// Codeword stream supplying the quantizer metadata.
        #[arg(long)]
        template: PathBuf,
        /// Fail unless the decoded codewords equal the template's.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Measure EVM of a received signal against a reference.
    Evm {
        /// Reference I/Q file written by `generate`.
        #[arg(long)]
        reference: PathBuf,
        /// Received I/Q file.
        #[arg(long, conflicts_with = "streams", required_unless_present = "streams")]
        received: Option<PathBuf>,
        /// I and Q codeword streams to dequantize instead.
        #[arg(long, num_args = 2, value_names = ["I", "Q"])]
        streams: Option<Vec<PathBuf>>,
    },
    /// Carrier count and CPRI-equivalent rate for given QBs.
    Budget {
        #[arg(long, value_delimiter = ',')]
        qb: Vec<f64>,
        #[arg(long)]
        fec: Option<f64>,
        /// Check the published operating points instead.
        #[arg(long, conflicts_with = "qb")]
        published: bool,
    },
    /// Run one end-to-end pipeline.
    Run {
        #[arg(long)]
        qam_order: Option<u32>,
        #[arg(long)]
        qb: Option<u8>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_enum)]
        coder: Option<CoderArg>,
    },
    /// Sweep QAM orders, schemes and QBs; writes fig4a.csv, table1.csv, sweep.json.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        qb_list: Vec<u8>,
        #[arg(long, value_delimiter = ',')]
        qam_orders: Vec<u32>,
        /// e.g. `pcm,dpcm+hc,dpcm+ac`
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<Scheme>,
        #[arg(long)]
        num_symbols: Option<usize>,
    },
    /// Export codeword histograms; without `--input`, writes fig3b.csv and fig3c.csv.
    Histogram {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time Huffman against arithmetic coding.
    Bench {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = mfh_core::entropy::MIN_RUNS)]
        runs: usize,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let core = err.chain().find_map(|c| c.downcast_ref::<mfh_core::Error>());
    match core {
        Some(e) if e.is_consistency() => 3,
        Some(e) if e.is_config() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
