use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::arithmetic::{arithmetic_decode, arithmetic_encode, BlockLimit};
use super::huffman::{huffman_build, huffman_decode, huffman_encode};
use super::model::ProbabilityModel;
use crate::error::{Error, Result};

pub const MIN_RUNS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoderTiming {
    /// Median encode+decode wall time per symbol.
    pub seconds_per_symbol: f64,
    pub symbols_per_second: f64,
    pub effective_qb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub symbols: usize,
    pub runs: usize,
    pub huffman: CoderTiming,
    pub arithmetic: CoderTiming,
    pub ac_over_hc_time: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn time_runs(runs: usize, symbols: usize, mut once: impl FnMut() -> Result<f64>) -> Result<CoderTiming> {
    let mut times = Vec::with_capacity(runs);
    let mut effective_qb = 0.0;
    for _ in 0..runs {
        let start = Instant::now();
        effective_qb = once()?;
        times.push(start.elapsed().as_secs_f64());
    }
    // Clamp to one nanosecond so the report stays finite on coarse clocks.
    let per_symbol = (median(times) / symbols as f64).max(1e-9 / symbols as f64);
    Ok(CoderTiming {
        seconds_per_symbol: per_symbol,
        symbols_per_second: 1.0 / per_symbol,
        effective_qb,
    })
}

/// Times Huffman (tree build + encode + decode) against arithmetic coding
/// (encode + decode) on the same input, reporting the median of `runs`
/// (at least [`MIN_RUNS`]) repetitions.
pub fn benchmark_coders(codewords: &[u32], qb: u8, model: &ProbabilityModel, runs: usize) -> Result<TimingReport> {
    if codewords.is_empty() {
        return Err(Error::EmptyInput);
    }
    let runs = runs.max(MIN_RUNS);
    let n = codewords.len();
    let huffman = time_runs(runs, n, || {
        let tree = huffman_build(model)?;
        let coded = huffman_encode(codewords, qb, &tree)?;
        let decoded = huffman_decode(&coded)?;
        if decoded != codewords {
            return Err(Error::RoundtripMismatch("huffman benchmark".into()));
        }
        Ok(coded.effective_qbs())
    })?;
    let arithmetic = time_runs(runs, n, || {
        let coded = arithmetic_encode(codewords, qb, model, BlockLimit::default())?;
        let decoded = arithmetic_decode(&coded)?;
        if decoded != codewords {
            return Err(Error::RoundtripMismatch("arithmetic benchmark".into()));
        }
        Ok(coded.effective_qbs())
    })?;
    Ok(TimingReport {
        symbols: n,
        runs,
        ac_over_hc_time: arithmetic.seconds_per_symbol / huffman.seconds_per_symbol,
        huffman,
        arithmetic,
    })
}
