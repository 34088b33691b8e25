//! `MFHC` coded-bitstream container.
//!
//! Header (integers little-endian): magic `MFHC`, version u8, coder u8
//! (1 = Huffman, 2 = arithmetic), original_qb u8, original_count u64,
//! model_entry_count u32, then `(codeword u32, count u64)` per entry. An
//! arithmetic stream adds block_count u32 and `(symbol_count u32,
//! bit_length u32)` per block. The payload follows, MSB first, zero-padded
//! to a byte boundary.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::huffman::{decode_with, huffman_build};
use super::model::ProbabilityModel;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MFHC";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coder {
    Huffman,
    Arithmetic,
}

impl Coder {
    pub fn tag(self) -> u8 {
        match self {
            Coder::Huffman => 1,
            Coder::Arithmetic => 2,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Coder::Huffman => "hc",
            Coder::Arithmetic => "ac",
        }
    }
}

impl fmt::Display for Coder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Coder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hc" | "huffman" => Ok(Coder::Huffman),
            "ac" | "arithmetic" => Ok(Coder::Arithmetic),
            other => Err(Error::Config(format!("unknown coder `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub symbol_count: u32,
    pub bit_length: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedBitstream {
    pub coder: Coder,
    pub model: ProbabilityModel,
    pub original_qb: u8,
    pub original_count: u64,
    pub payload: Vec<u8>,
    /// Payload length in bits, excluding byte padding.
    pub payload_bits: u64,
    /// Arithmetic coding only.
    pub blocks: Vec<BlockInfo>,
}

impl CodedBitstream {
    /// Coded bits per original codeword, payload only.
    pub fn effective_qbs(&self) -> f64 {
        effective_qbs(self)
    }

    /// Coded bits per original codeword counting the serialized header too.
    pub fn effective_qbs_with_header(&self) -> f64 {
        let header_bits = (self.header_len() * 8) as f64;
        (self.payload_bits as f64 + header_bits) / self.original_count as f64
    }

    pub fn compression_ratio(&self) -> f64 {
        f64::from(self.original_qb) / self.effective_qbs()
    }

    fn header_len(&self) -> usize {
        let blocks = match self.coder {
            Coder::Huffman => 0,
            Coder::Arithmetic => 4 + 8 * self.blocks.len(),
        };
        4 + 3 + 8 + 4 + 12 * self.model.len() + blocks
    }

    pub(crate) fn check_block_table(&self) -> Result<()> {
        let mut symbols = 0u64;
        let mut bits = 0u64;
        for (block, b) in self.blocks.iter().enumerate() {
            if b.symbol_count == 0 || b.bit_length == 0 {
                return Err(Error::CorruptBlock {
                    block,
                    reason: "empty block".into(),
                });
            }
            symbols += u64::from(b.symbol_count);
            bits += u64::from(b.bit_length);
        }
        if symbols != self.original_count {
            return Err(Error::Format(format!(
                "block table covers {symbols} symbols, header says {}",
                self.original_count
            )));
        }
        if bits != self.payload_bits || self.payload.len() as u64 != bits.div_ceil(8) {
            return Err(Error::Format(format!(
                "block table covers {bits} bits, payload holds {} bytes",
                self.payload.len()
            )));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.header_len() + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[VERSION, self.coder.tag(), self.original_qb]);
        out.extend_from_slice(&self.original_count.to_le_bytes());
        out.extend_from_slice(&(self.model.len() as u32).to_le_bytes());
        for e in self.model.entries() {
            out.extend_from_slice(&e.codeword.to_le_bytes());
            out.extend_from_slice(&e.count.to_le_bytes());
        }
        if self.coder == Coder::Arithmetic {
            out.extend_from_slice(&(self.blocks.len() as u32).to_le_bytes());
            for b in &self.blocks {
                out.extend_from_slice(&b.symbol_count.to_le_bytes());
                out.extend_from_slice(&b.bit_length.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses and validates a container. For Huffman streams the exact payload
    /// length is recovered by decoding, so a malformed payload fails here.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Format("missing MFHC magic".into()));
        }
        let version = cur.u8()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported MFHC version {version}")));
        }
        let coder = match cur.u8()? {
            1 => Coder::Huffman,
            2 => Coder::Arithmetic,
            other => return Err(Error::Format(format!("unknown coder tag {other}"))),
        };
        let original_qb = cur.u8()?;
        let original_count = cur.u64()?;
        let entry_count = cur.u32()?;
        let mut counts = Vec::with_capacity((entry_count as usize).min(bytes.len() / 12));
        for _ in 0..entry_count {
            counts.push((cur.u32()?, cur.u64()?));
        }
        let model = if counts.is_empty() {
            None
        } else {
            Some(ProbabilityModel::from_counts(original_qb, counts)?)
        };
        let mut blocks = Vec::new();
        if coder == Coder::Arithmetic {
            let block_count = cur.u32()?;
            for _ in 0..block_count {
                blocks.push(BlockInfo {
                    symbol_count: cur.u32()?,
                    bit_length: cur.u32()?,
                });
            }
        }
        let payload = bytes[cur.pos..].to_vec();
        let Some(model) = model else {
            return Err(if original_count == 0 {
                Error::EmptyModel
            } else {
                Error::Format("non-empty stream without a model".into())
            });
        };

        let mut stream = CodedBitstream {
            coder,
            model,
            original_qb,
            original_count,
            payload_bits: 0,
            payload,
            blocks,
        };
        match coder {
            Coder::Huffman => {
                let tree = huffman_build(&stream.model)?;
                stream.payload_bits = decode_with(&tree, &stream)?.1 as u64;
            }
            Coder::Arithmetic => {
                stream.payload_bits = stream.blocks.iter().map(|b| u64::from(b.bit_length)).sum();
                stream.check_block_table()?;
            }
        }
        Ok(stream)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

pub fn effective_qbs(bitstream: &CodedBitstream) -> f64 {
    bitstream.payload_bits as f64 / bitstream.original_count as f64
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Truncated(format!("MFHC header ends at byte {}", self.bytes.len())));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
