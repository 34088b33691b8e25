//! Lossless entropy coding of codeword streams.

mod arithmetic;
mod bitstream;
mod huffman;
mod model;
mod timing;

pub use arithmetic::{arithmetic_decode, arithmetic_encode, terminate_interval, AcBlockState, BlockLimit};
pub use bitstream::{effective_qbs, BlockInfo, CodedBitstream, Coder};
pub use huffman::{huffman_build, huffman_decode, huffman_encode, Code, HuffmanTree};
pub use model::{entropy, ModelEntry, ProbabilityModel};
pub use timing::{benchmark_coders, CoderTiming, TimingReport, MIN_RUNS};

use crate::error::Result;
use crate::quantizer::{codeword_histogram, CodewordStream};

/// Two-pass coding: measures the stream's histogram, then codes with it.
pub fn encode_stream(stream: &CodewordStream, coder: Coder, limit: BlockLimit) -> Result<CodedBitstream> {
    let model = codeword_histogram(stream)?;
    match coder {
        Coder::Huffman => huffman_encode(&stream.codewords, stream.qb, &huffman_build(&model)?),
        Coder::Arithmetic => arithmetic_encode(&stream.codewords, stream.qb, &model, limit),
    }
}

pub fn decode(bitstream: &CodedBitstream) -> Result<Vec<u32>> {
    match bitstream.coder {
        Coder::Huffman => huffman_decode(bitstream),
        Coder::Arithmetic => arithmetic_decode(bitstream),
    }
}
