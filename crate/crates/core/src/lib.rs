//! Digital mobile-fronthaul compression toolkit.
//!
//! OFDM carriers are quantized (PCM or DPCM), entropy coded (Huffman or
//! arithmetic), decoded, demodulated and scored by EVM; the resulting bits per
//! sample feed a capacity budget for a multicore-fiber fronthaul link.

pub mod bitio;
pub mod budget;
pub mod entropy;
pub mod error;
pub mod pipeline;
pub mod quantizer;
pub mod scheme;
pub mod waveform;

pub use budget::{build_table1, channel_count, cpri_equivalent_rate, BudgetParams, BudgetReport, BudgetRow};
pub use entropy::{
    arithmetic_decode, arithmetic_encode, decode, encode_stream, huffman_build, huffman_decode, huffman_encode,
    BlockLimit, CodedBitstream, Coder, HuffmanTree, ProbabilityModel,
};
pub use error::{Error, Result};
pub use pipeline::{export_histogram, run_pipeline, run_sweep, RunConfig, SweepResult, SweepSpec};
pub use quantizer::{
    codeword_histogram, dequantize, dpcm_decode, dpcm_encode, pcm_dequantize, pcm_quantize, quantize_iq, CodewordStream,
    QuantMode, QuantizerConfig,
};
pub use scheme::{ModeKind, Scheme};
pub use waveform::{compute_evm, demodulate, generate_ofdm, ConstellationGrid, EvmReport, EvmThresholds, OfdmConfig, OfdmSignal};
