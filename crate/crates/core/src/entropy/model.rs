use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub codeword: u32,
    pub count: u64,
    pub probability: f64,
}

/// Static codeword distribution measured from counts.
///
/// Only codewords that occur are kept. Entries are ordered by descending
/// count, ties by ascending codeword, and that order is the symbol order used
/// by both coders. Probabilities are always recomputed from the integer
/// counts so encoder and decoder agree bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityModel {
    alphabet_bits: u8,
    entries: Vec<ModelEntry>,
    total_count: u64,
    index: HashMap<u32, usize>,
}

impl ProbabilityModel {
    pub fn from_counts(alphabet_bits: u8, counts: impl IntoIterator<Item = (u32, u64)>) -> Result<Self> {
        if !(1..=32).contains(&alphabet_bits) {
            return Err(Error::Metadata(format!("alphabet_bits {alphabet_bits} outside 1..=32")));
        }
        let limit = 1u64 << alphabet_bits;
        let mut pairs: Vec<(u32, u64)> = Vec::new();
        let mut total = 0u64;
        for (codeword, count) in counts {
            if u64::from(codeword) >= limit {
                return Err(Error::Metadata(format!(
                    "codeword {codeword} outside a {alphabet_bits}-bit alphabet"
                )));
            }
            if count == 0 {
                return Err(Error::Metadata(format!("codeword {codeword} has a zero count")));
            }
            total = total
                .checked_add(count)
                .ok_or_else(|| Error::Metadata("total count overflows u64".into()))?;
            pairs.push((codeword, count));
        }
        if pairs.is_empty() {
            return Err(Error::EmptyModel);
        }
        let mut seen = HashSet::with_capacity(pairs.len());
        if let Some(&(dup, _)) = pairs.iter().find(|p| !seen.insert(p.0)) {
            return Err(Error::Metadata(format!("codeword {dup} listed twice")));
        }
        pairs.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let entries: Vec<ModelEntry> = pairs
            .into_iter()
            .map(|(codeword, count)| ModelEntry {
                codeword,
                count,
                probability: count as f64 / total as f64,
            })
            .collect();
        let index = entries.iter().enumerate().map(|(i, e)| (e.codeword, i)).collect();
        Ok(Self {
            alphabet_bits,
            entries,
            total_count: total,
            index,
        })
    }

    pub fn from_codewords(codewords: &[u32], alphabet_bits: u8) -> Result<Self> {
        if !(1..=32).contains(&alphabet_bits) {
            return Err(Error::Metadata(format!("alphabet_bits {alphabet_bits} outside 1..=32")));
        }
        if let Some(&bad) = codewords.iter().find(|&&c| u64::from(c) >> alphabet_bits != 0) {
            return Err(Error::CorruptStream(format!(
                "codeword {bad} outside a {alphabet_bits}-bit alphabet"
            )));
        }
        if alphabet_bits <= 20 {
            let mut counts = vec![0u64; 1 << alphabet_bits];
            for &c in codewords {
                counts[c as usize] += 1;
            }
            let nonzero = counts
                .into_iter()
                .enumerate()
                .filter(|&(_, n)| n > 0)
                .map(|(c, n)| (c as u32, n));
            Self::from_counts(alphabet_bits, nonzero)
        } else {
            let mut counts: HashMap<u32, u64> = HashMap::new();
            for &c in codewords {
                *counts.entry(c).or_default() += 1;
            }
            Self::from_counts(alphabet_bits, counts)
        }
    }

    pub fn alphabet_bits(&self) -> u8 {
        self.alphabet_bits
    }

    pub fn entries(&self) -> &[ModelEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Position of `codeword` in symbol order.
    pub fn index_of(&self, codeword: u32) -> Option<usize> {
        self.index.get(&codeword).copied()
    }

    /// Shannon entropy in bits, `-sum p log2 p`.
    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

pub fn entropy(model: &ProbabilityModel) -> f64 {
    -model
        .entries
        .iter()
        .map(|e| e.probability * e.probability.log2())
        .sum::<f64>()
        .min(0.0)
}
