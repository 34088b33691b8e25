//! Huffman code construction by repeated merging of the two lightest nodes.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::bitstream::{CodedBitstream, Coder};
use super::model::ProbabilityModel;
use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};

/// A prefix code word: the low `len` bits of `bits`, MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Code {
    pub bits: u128,
    pub len: u8,
}

impl Code {
    pub fn to_bit_string(self) -> String {
        (0..self.len)
            .rev()
            .map(|i| if self.bits >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Leaf(u32),
    Internal { zero: usize, one: usize },
}

#[derive(Debug, Clone)]
pub struct HuffmanTree {
    nodes: Vec<Node>,
    root: usize,
    // Model order.
    codes: Vec<(u32, Code)>,
    lookup: HashMap<u32, Code>,
    avg_code_length: f64,
    model: ProbabilityModel,
}

/// Builds the code tree for `model`.
///
/// Ties between equal weights go to the node holding the smallest codeword.
/// Of the two merged nodes the lighter one is the `1` branch. A one-symbol
/// model gets the single code `0`.
pub fn huffman_build(model: &ProbabilityModel) -> Result<HuffmanTree> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut nodes: Vec<Node> = model.entries().iter().map(|e| Node::Leaf(e.codeword)).collect();

    let root = if nodes.len() == 1 {
        0
    } else {
        // (weight, smallest codeword below, creation order, node index)
        let mut heap: BinaryHeap<Reverse<(u64, u32, usize, usize)>> = model
            .entries()
            .iter()
            .enumerate()
            .map(|(i, e)| Reverse((e.count, e.codeword, i, i)))
            .collect();
        while heap.len() > 1 {
            let Reverse((w1, min1, _, one)) = heap.pop().unwrap();
            let Reverse((w0, min0, _, zero)) = heap.pop().unwrap();
            let id = nodes.len();
            nodes.push(Node::Internal { zero, one });
            heap.push(Reverse((w0 + w1, min0.min(min1), id, id)));
        }
        heap.pop().unwrap().0 .3
    };

    let mut lookup = HashMap::with_capacity(model.len());
    if nodes.len() == 1 {
        lookup.insert(model.entries()[0].codeword, Code { bits: 0, len: 1 });
    } else {
        let mut stack = vec![(root, Code { bits: 0, len: 0 })];
        while let Some((node, code)) = stack.pop() {
            match nodes[node] {
                Node::Leaf(codeword) => {
                    lookup.insert(codeword, code);
                }
                Node::Internal { zero, one } => {
                    assert!(code.len < 128, "code length exceeds 128 bits");
                    let len = code.len + 1;
                    stack.push((zero, Code { bits: code.bits << 1, len }));
                    stack.push((one, Code { bits: code.bits << 1 | 1, len }));
                }
            }
        }
    }

    let codes: Vec<(u32, Code)> = model.entries().iter().map(|e| (e.codeword, lookup[&e.codeword])).collect();
    let avg_code_length = model
        .entries()
        .iter()
        .zip(&codes)
        .map(|(e, (_, c))| e.probability * f64::from(c.len))
        .sum();
    Ok(HuffmanTree {
        nodes,
        root,
        codes,
        lookup,
        avg_code_length,
        model: model.clone(),
    })
}

impl HuffmanTree {
    /// Average code length `l_c = sum p(A_i) len(A_i)` in bits.
    pub fn avg_code_length(&self) -> f64 {
        self.avg_code_length
    }

    pub fn code(&self, codeword: u32) -> Option<Code> {
        self.lookup.get(&codeword).copied()
    }

    /// `(codeword, code)` pairs in model order.
    pub fn codes(&self) -> &[(u32, Code)] {
        &self.codes
    }

    pub fn model(&self) -> &ProbabilityModel {
        &self.model
    }

    /// Exact check of `sum 2^-len == 1`.
    pub fn kraft_sum_is_one(&self) -> bool {
        let max = self.codes.iter().map(|(_, c)| c.len).max().unwrap_or(0);
        if max > 127 {
            return false;
        }
        let sum: u128 = self.codes.iter().map(|(_, c)| 1u128 << (max - c.len)).sum();
        sum == 1u128 << max
    }

    pub fn is_prefix_free(&self) -> bool {
        let mut sorted: Vec<Code> = self.codes.iter().map(|(_, c)| *c).collect();
        // Lexicographic order puts any prefix immediately before a word it prefixes.
        sorted.sort_by(|a, b| {
            let ka = a.bits << (128 - u32::from(a.len));
            let kb = b.bits << (128 - u32::from(b.len));
            ka.cmp(&kb).then(a.len.cmp(&b.len))
        });
        sorted.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            !(a.len <= b.len && b.bits >> (b.len - a.len) == a.bits)
        })
    }

    fn decode_one(&self, reader: &mut BitReader<'_>) -> Result<u32> {
        let truncated = || Error::Truncated("payload ended inside a code word".into());
        if self.nodes.len() == 1 {
            let Node::Leaf(codeword) = self.nodes[0] else { unreachable!() };
            return match reader.read_bit() {
                Some(false) => Ok(codeword),
                Some(true) => Err(Error::CorruptStream("single-symbol code must be 0".into())),
                None => Err(truncated()),
            };
        }
        let mut node = self.root;
        loop {
            match self.nodes[node] {
                Node::Leaf(codeword) => return Ok(codeword),
                Node::Internal { zero, one } => {
                    node = if reader.read_bit().ok_or_else(truncated)? { one } else { zero };
                }
            }
        }
    }
}

pub fn huffman_encode(codewords: &[u32], original_qb: u8, tree: &HuffmanTree) -> Result<CodedBitstream> {
    let mut bits = BitWriter::new();
    for &c in codewords {
        let code = tree.code(c).ok_or(Error::UnseenSymbol(c))?;
        bits.push_bits(code.bits, code.len.into());
    }
    let payload_bits = bits.len() as u64;
    Ok(CodedBitstream {
        coder: Coder::Huffman,
        model: tree.model().clone(),
        original_qb,
        original_count: codewords.len() as u64,
        payload: bits.into_bytes(),
        payload_bits,
        blocks: Vec::new(),
    })
}

/// Decodes exactly `original_count` symbols. Up to seven zero padding bits may
/// follow the last one.
pub fn huffman_decode(bitstream: &CodedBitstream) -> Result<Vec<u32>> {
    if bitstream.coder != Coder::Huffman {
        return Err(Error::Format("not a Huffman-coded stream".into()));
    }
    let tree = huffman_build(&bitstream.model)?;
    let (codewords, used) = decode_with(&tree, bitstream)?;
    if used as u64 != bitstream.payload_bits {
        return Err(Error::CorruptStream(format!(
            "decoded {used} payload bits, header says {}",
            bitstream.payload_bits
        )));
    }
    Ok(codewords)
}

/// Returns the symbols and the number of payload bits they consumed.
pub(crate) fn decode_with(tree: &HuffmanTree, bitstream: &CodedBitstream) -> Result<(Vec<u32>, usize)> {
    let total_bits = bitstream.payload.len() * 8;
    let mut reader = BitReader::new(&bitstream.payload, total_bits);
    let count = usize::try_from(bitstream.original_count)
        .map_err(|_| Error::Metadata("original_count too large".into()))?;
    let mut out = Vec::with_capacity(count.min(total_bits));
    for _ in 0..count {
        out.push(tree.decode_one(&mut reader)?);
    }
    let used = reader.position();
    let left = reader.remaining();
    if left >= 8 {
        return Err(Error::TrailingBits(left));
    }
    if (0..left).any(|_| reader.read_bit() == Some(true)) {
        return Err(Error::CorruptStream("nonzero padding bits".into()));
    }
    Ok((out, used))
}
