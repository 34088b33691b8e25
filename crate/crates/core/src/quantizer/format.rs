//! `MFHQ` codeword-stream files.
//!
//! Header (integers little-endian): magic `MFHQ`, version u8, mode u8
//! (0 = PCM, 1 = DPCM), qb u8, channel u8 (0 = I, 1 = Q), full_scale f64,
//! predictor_order u8, adaptation_step f64, sample_count u64. Codewords
//! follow, `qb` bits each, MSB first, zero-padded to a byte boundary.

use std::fs;
use std::path::Path;

use super::{Channel, CodewordStream, QuantMode, MAX_QB};
use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MFHQ";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 1 + 1 + 1 + 8 + 1 + 8 + 8;

pub fn stream_to_bytes(stream: &CodewordStream) -> Result<Vec<u8>> {
    stream.quantizer()?;
    stream.check_codewords()?;
    let (mode, order, step) = match stream.mode {
        QuantMode::Pcm => (0u8, 0u8, 0.0),
        QuantMode::Dpcm {
            predictor_order,
            adaptation_step,
        } => (1, predictor_order, adaptation_step),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + (stream.codewords.len() * stream.qb as usize).div_ceil(8));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, mode, stream.qb, stream.channel as u8]);
    out.extend_from_slice(&stream.full_scale.to_le_bytes());
    out.push(order);
    out.extend_from_slice(&step.to_le_bytes());
    out.extend_from_slice(&(stream.codewords.len() as u64).to_le_bytes());

    let mut bits = BitWriter::with_capacity_bits(stream.codewords.len() * stream.qb as usize);
    for &c in &stream.codewords {
        bits.push_bits(u128::from(c), stream.qb.into());
    }
    out.extend_from_slice(bits.as_bytes());
    Ok(out)
}

pub fn stream_from_bytes(bytes: &[u8]) -> Result<CodewordStream> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated(format!("{} bytes is shorter than the MFHQ header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("missing MFHQ magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported MFHQ version {}", bytes[4])));
    }
    let qb = bytes[6];
    if !(1..=MAX_QB).contains(&qb) {
        return Err(Error::Metadata(format!("qb {qb} outside 1..={MAX_QB}")));
    }
    let channel = match bytes[7] {
        0 => Channel::I,
        1 => Channel::Q,
        other => return Err(Error::Metadata(format!("unknown channel tag {other}"))),
    };
    let full_scale = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let order = bytes[16];
    let step = f64::from_le_bytes(bytes[17..25].try_into().unwrap());
    let count = u64::from_le_bytes(bytes[25..33].try_into().unwrap());
    let mode = match bytes[5] {
        0 if order == 0 && step == 0.0 => QuantMode::Pcm,
        0 => return Err(Error::Metadata("PCM stream carries predictor parameters".into())),
        1 => {
            let mode = QuantMode::Dpcm {
                predictor_order: order,
                adaptation_step: step,
            };
            mode.validate()?;
            mode
        }
        other => return Err(Error::Metadata(format!("unknown mode {other}"))),
    };
    if !(full_scale.is_finite() && full_scale > 0.0) {
        return Err(Error::Metadata(format!("full_scale {full_scale} must be positive")));
    }

    let payload = &bytes[HEADER_LEN..];
    let needed_bits = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(qb.into()))
        .ok_or_else(|| Error::Metadata(format!("sample_count {count} is too large")))?;
    if payload.len() < needed_bits.div_ceil(8) {
        return Err(Error::Truncated(format!(
            "{count} codewords need {} bytes, found {}",
            needed_bits.div_ceil(8),
            payload.len()
        )));
    }
    if payload.len() > needed_bits.div_ceil(8) {
        return Err(Error::Metadata(format!(
            "sample_count {count} disagrees with a {}-byte payload",
            payload.len()
        )));
    }
    let mut reader = BitReader::new(payload, needed_bits);
    let codewords = (0..count)
        .map(|_| reader.read_bits(qb.into()).map(|v| v as u32))
        .collect::<Result<Vec<_>>>()?;
    Ok(CodewordStream {
        codewords,
        qb,
        mode,
        full_scale,
        channel,
    })
}

pub fn write_stream(path: &Path, stream: &CodewordStream) -> Result<()> {
    fs::write(path, stream_to_bytes(stream)?)?;
    Ok(())
}

pub fn read_stream(path: &Path) -> Result<CodewordStream> {
    stream_from_bytes(&fs::read(path)?)
}
