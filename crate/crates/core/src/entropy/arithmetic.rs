//! Block arithmetic coding with exact interval arithmetic.
//!
//! Within a block the interval after `n` symbols is `[u, v)` with
//! `u = low / T^n` and `v - u = width / T^n`, where `T` is the model's total
//! count. Each symbol with cumulative counts `[c_lo, c_hi)` maps
//!
//! ```text
//! u' = u + (v - u) * c_lo / T
//! v' = u + (v - u) * c_hi / T
//! ```
//!
//! which in integer form is `low' = low * T + width * c_lo` and
//! `width' = width * (c_hi - c_lo)`. No rounding ever happens, so the width
//! shrinks by exactly `p(A_i)` per symbol. A block is closed by emitting the
//! midpoint `(u + v) / 2` truncated to `ceil(-log2(v - u)) + 1` fractional
//! bits with trailing zeros removed; that value always lies in `[u, v)`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::bitstream::{BlockInfo, CodedBitstream, Coder};
use super::model::ProbabilityModel;
use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};

/// When to close a block. A block ends before the symbol that would push its
/// information content past `max_info_bits` (equivalently, shrink the
/// interval below `2^-max_info_bits`) or once it holds `max_symbols` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockLimit {
    pub max_info_bits: u32,
    pub max_symbols: u32,
}

impl Default for BlockLimit {
    fn default() -> Self {
        Self {
            max_info_bits: 4096,
            max_symbols: 512,
        }
    }
}

impl BlockLimit {
    /// Limit by interval width only, e.g. `from_width_log2(40)` closes blocks
    /// before the width drops below `2^-40`.
    pub fn from_width_log2(bits: u32) -> Self {
        Self {
            max_info_bits: bits,
            max_symbols: u32::MAX,
        }
    }
}

/// Cumulative count table in model order.
#[derive(Debug, Clone)]
struct CumulativeTable {
    total: u64,
    // cum[i] = sum of counts before symbol i; cum[len] = total.
    cum: Vec<u64>,
}

impl CumulativeTable {
    fn new(model: &ProbabilityModel) -> Self {
        let mut cum = Vec::with_capacity(model.len() + 1);
        let mut acc = 0;
        cum.push(0);
        for e in model.entries() {
            acc += e.count;
            cum.push(acc);
        }
        Self {
            total: model.total_count(),
            cum,
        }
    }

    fn range(&self, index: usize) -> (u64, u64) {
        (self.cum[index], self.cum[index + 1])
    }

    /// Symbol whose `[c_lo, c_hi)` contains `target`.
    fn find(&self, target: u64) -> usize {
        self.cum.partition_point(|&c| c <= target) - 1
    }
}

/// Interval state of one block.
#[derive(Debug, Clone)]
pub struct AcBlockState<'m> {
    model: &'m ProbabilityModel,
    table: CumulativeTable,
    low: BigUint,
    width: BigUint,
    symbols: u32,
}

impl<'m> AcBlockState<'m> {
    pub fn new(model: &'m ProbabilityModel) -> Self {
        Self::with_table(model, CumulativeTable::new(model))
    }

    fn with_table(model: &'m ProbabilityModel, table: CumulativeTable) -> Self {
        Self {
            model,
            table,
            low: BigUint::zero(),
            width: BigUint::one(),
            symbols: 0,
        }
    }

    fn reset(&mut self) {
        self.low.set_zero();
        self.width.set_one();
        self.symbols = 0;
    }

    pub fn push(&mut self, codeword: u32) -> Result<()> {
        let index = self.model.index_of(codeword).ok_or(Error::UnseenSymbol(codeword))?;
        self.push_index(index);
        Ok(())
    }

    fn push_index(&mut self, index: usize) {
        let (lo, hi) = self.table.range(index);
        self.low *= self.table.total;
        self.low += &self.width * lo;
        self.width *= hi - lo;
        self.symbols += 1;
    }

    pub fn symbols_in_block(&self) -> u32 {
        self.symbols
    }

    /// `(low, width, denominator)` with `u = low / den`, `v - u = width / den`.
    pub fn exact_bounds(&self) -> (BigUint, BigUint, BigUint) {
        (
            self.low.clone(),
            self.width.clone(),
            BigUint::from(self.table.total).pow(self.symbols),
        )
    }

    /// `[u, v)` rounded to f64. Only meaningful while the width is well above
    /// f64 resolution.
    pub fn bounds(&self) -> (f64, f64) {
        let (low, width, den) = self.exact_bounds();
        (ratio_to_f64(&low, &den), ratio_to_f64(&(low + width), &den))
    }

    pub fn terminate(&self) -> BitWriter {
        let (low, width, den) = self.exact_bounds();
        terminate_interval(&low, &width, &den)
    }
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().saturating_sub(64);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Shortest tag for the interval `[low/den, (low+width)/den)`: the midpoint
/// truncated to `ceil(log2(den/width)) + 1` bits, trailing zeros stripped.
pub fn terminate_interval(low: &BigUint, width: &BigUint, den: &BigUint) -> BitWriter {
    debug_assert!(!width.is_zero() && low + width <= *den);
    // Smallest k with width * 2^k >= den.
    let mut k = den.bits() - width.bits();
    if (width << k) < *den {
        k += 1;
    }
    let len = k + 1;
    let twice_mid = (low << 1u32) + width;
    let tag = (twice_mid << (len - 1)) / den;
    let zeros = tag.trailing_zeros().unwrap_or(len).min(len);
    let tag = tag >> zeros;
    let len = len - zeros;

    let mut out = BitWriter::with_capacity_bits(len as usize);
    for i in (0..len).rev() {
        out.push_bit(tag.bit(i));
    }
    out
}

pub fn arithmetic_encode(
    codewords: &[u32],
    original_qb: u8,
    model: &ProbabilityModel,
    limit: BlockLimit,
) -> Result<CodedBitstream> {
    if limit.max_symbols == 0 {
        return Err(Error::Config("block max_symbols must be positive".into()));
    }
    let table = CumulativeTable::new(model);
    let total_log2 = (model.total_count() as f64).log2();
    let info: Vec<f64> = model
        .entries()
        .iter()
        .map(|e| total_log2 - (e.count as f64).log2())
        .collect();

    let mut state = AcBlockState::with_table(model, table);
    let mut payload = BitWriter::new();
    let mut blocks = Vec::new();
    let mut block_info = 0.0;
    let mut close = |state: &mut AcBlockState<'_>, payload: &mut BitWriter| -> Result<()> {
        let bits = state.terminate();
        blocks.push(BlockInfo {
            symbol_count: state.symbols,
            bit_length: u32::try_from(bits.len())
                .map_err(|_| Error::Config("block exceeds u32 bits".into()))?,
        });
        payload.append(&bits);
        state.reset();
        Ok(())
    };

    for &c in codewords {
        let index = model.index_of(c).ok_or(Error::UnseenSymbol(c))?;
        let full = state.symbols > 0
            && (state.symbols >= limit.max_symbols || block_info + info[index] > f64::from(limit.max_info_bits));
        if full {
            close(&mut state, &mut payload)?;
            block_info = 0.0;
        }
        state.push_index(index);
        block_info += info[index];
    }
    if state.symbols > 0 {
        close(&mut state, &mut payload)?;
    }

    let payload_bits = payload.len() as u64;
    Ok(CodedBitstream {
        coder: Coder::Arithmetic,
        model: model.clone(),
        original_qb,
        original_count: codewords.len() as u64,
        payload: payload.into_bytes(),
        payload_bits,
        blocks,
    })
}

/// Replays each block's subdivision against its tag. The tag must also be
/// exactly the one the encoder would emit for the decoded symbols, so a
/// damaged payload is reported instead of silently mis-decoded.
pub fn arithmetic_decode(bitstream: &CodedBitstream) -> Result<Vec<u32>> {
    if bitstream.coder != Coder::Arithmetic {
        return Err(Error::Format("not an arithmetic-coded stream".into()));
    }
    bitstream.check_block_table()?;
    let model = &bitstream.model;
    let table = CumulativeTable::new(model);
    let total = table.total;
    let den_base = BigUint::from(total);

    let mut out = Vec::with_capacity(usize::try_from(bitstream.original_count).unwrap_or(0));
    let mut reader = BitReader::new(&bitstream.payload, bitstream.payload_bits as usize);
    for (block, info) in bitstream.blocks.iter().enumerate() {
        let corrupt = |reason: String| Error::CorruptBlock { block, reason };
        let mut tag_bits = BitWriter::with_capacity_bits(info.bit_length as usize);
        for _ in 0..info.bit_length {
            tag_bits.push_bit(reader.read_bit().ok_or_else(|| corrupt("payload too short".into()))?);
        }
        let tag = BigUint::from_bytes_be(tag_bits.as_bytes()) >> ((8 - info.bit_length % 8) % 8);

        // Scaled by 2^len * T^n: rest = tag*T^n - low*2^len, scale = width*2^len.
        let mut rest = tag.clone();
        let mut scale = BigUint::one() << info.bit_length;
        let start = out.len();
        for _ in 0..info.symbol_count {
            let target = (&rest * total) / &scale;
            let target = target
                .to_u64()
                .filter(|&t| t < total)
                .ok_or_else(|| corrupt("tag outside the interval".into()))?;
            let index = table.find(target);
            let (lo, hi) = table.range(index);
            rest = &rest * total - &scale * lo;
            scale *= hi - lo;
            out.push(model.entries()[index].codeword);
        }

        let den = den_base.pow(info.symbol_count);
        let low_scaled = &tag * &den - &rest;
        let low = &low_scaled >> info.bit_length;
        let width = &scale >> info.bit_length;
        let expected = terminate_interval(&low, &width, &den);
        if expected != tag_bits {
            return Err(corrupt(format!(
                "tag is not canonical for the {} decoded symbols",
                out.len() - start
            )));
        }
    }
    Ok(out)
}
