//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::Instant;

use mfh_core::bitio::{BitReader, BitWriter};
use mfh_core::budget::{channel_count, cpri_equivalent_rate, published_table, qb_for_channels, BudgetParams};
use mfh_core::entropy::{arithmetic_encode, decode, encode_stream, huffman_build, BlockLimit, CodedBitstream, Coder};
use mfh_core::entropy::{terminate_interval, ProbabilityModel};
use mfh_core::pipeline::{run_sweep, RunConfig, SweepResult, SweepSpec};
use mfh_core::quantizer::{quantize_iq, Channel, CodewordStream, QuantMode, QuantizerConfig};
use mfh_core::scheme::{ModeKind, Scheme};
use mfh_core::waveform::{generate_ofdm, OfdmConfig, SUPPORTED_QAM_ORDERS};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bits_of(w: &BitWriter) -> String {
    let mut r = BitReader::new(w.as_bytes(), w.len());
    std::iter::from_fn(|| r.read_bit()).map(|b| if b { '1' } else { '0' }).collect()
}

fn payload_bits(c: &CodedBitstream) -> String {
    let mut r = BitReader::new(&c.payload, c.payload_bits as usize);
    std::iter::from_fn(|| r.read_bit()).map(|b| if b { '1' } else { '0' }).collect()
}

fn entropy_of(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

fn criterion_1() -> Check {
    let p = BudgetParams::default();
    let channels = channel_count(7.5385, &p).map_err(|e| e.to_string())?;
    let rate = cpri_equivalent_rate(7.5385, &p).map_err(|e| e.to_string())?;
    ensure(channels == 330, || format!("channels {channels} != 330"))?;
    ensure((rate - 1.34).abs() <= 0.005, || format!("rate {rate} not within 1.34 +- 0.005"))?;
    Ok(format!("7.5385 QB -> {channels} carriers, {rate:.4} Tbit/s"))
}

fn criterion_2() -> Check {
    let p = BudgetParams::default();
    let cells = published_table();
    let mut worst: f64 = 0.0;
    for cell in &cells {
        let qb = qb_for_channels(cell.channels as f64, &p).map_err(|e| e.to_string())?;
        let rate = cpri_equivalent_rate(qb, &p).map_err(|e| e.to_string())?;
        let channels = channel_count(qb, &p).map_err(|e| e.to_string())?;
        let label = format!("{}-QAM {}", cell.qam_order, cell.scheme);
        ensure(channels == cell.channels, || format!("{label}: {channels} != {}", cell.channels))?;
        ensure((rate - cell.rate_tbps).abs() <= 0.01, || {
            format!("{label}: rate {rate:.4} vs printed {}", cell.rate_tbps)
        })?;
        worst = worst.max((rate - cell.rate_tbps).abs());
    }
    Ok(format!("{} cells ({} values), worst rate gap {worst:.4} Tbit/s", cells.len(), 2 * cells.len()))
}

fn criterion_3() -> Check {
    // [0.65625, 0.671875) has midpoint 0.6640625 = 0.1010101b.
    let den = BigUint::from(64u32);
    let direct = bits_of(&terminate_interval(&BigUint::from(42u32), &BigUint::from(1u32), &den));
    ensure(direct == "1010101", || format!("direct termination gave {direct}"))?;

    let model = ProbabilityModel::from_counts(1, [(0, 3), (1, 3)]).map_err(|e| e.to_string())?;
    let coded = arithmetic_encode(&[1, 0, 1, 0, 1, 0], 1, &model, BlockLimit::default()).map_err(|e| e.to_string())?;
    let bits = payload_bits(&coded);
    ensure(bits == "1010101", || format!("encoder emitted {bits}"))?;
    ensure(decode(&coded).map_err(|e| e.to_string())? == vec![1, 0, 1, 0, 1, 0], || "decode mismatch".into())?;
    Ok("p~ = 0.6640625 -> 1010101".into())
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut min_gap = f64::INFINITY;
    let mut max_gap: f64 = 0.0;
    for trial in 0..1000 {
        let n = rng.random_range(2..=1024u32);
        // Mix flat and heavily skewed weights.
        let skew: f64 = rng.random_range(0.0..8.0);
        let counts: Vec<(u32, u64)> = (0..n)
            .map(|c| (c, 1 + (rng.random::<f64>().powf(skew) * 1e6) as u64))
            .collect();
        let model = ProbabilityModel::from_counts(10, counts).map_err(|e| e.to_string())?;
        let tree = huffman_build(&model).map_err(|e| e.to_string())?;
        let probs: Vec<f64> = model.entries().iter().map(|e| e.probability).collect();
        let h = entropy_of(&probs);
        let lc = tree.avg_code_length();
        ensure(h <= lc + 1e-12 && lc < h + 1.0, || format!("trial {trial}: H {h}, l_c {lc}"))?;
        min_gap = min_gap.min(lc - h);
        max_gap = max_gap.max(lc - h);
    }
    Ok(format!("1000 distributions, l_c - H in [{min_gap:.4}, {max_gap:.4}]"))
}

/// Minimum of sum p_i l_i over all length vectors satisfying Kraft.
fn exhaustive_min_length(p: &[f64]) -> f64 {
    let n = p.len();
    if n == 1 {
        return 1.0;
    }
    let max_len = n as u32 - 1;
    let mut best = f64::INFINITY;
    let mut lens = vec![1u32; n];
    loop {
        let kraft: f64 = lens.iter().map(|&l| 0.5f64.powi(l as i32)).sum();
        if kraft <= 1.0 + 1e-12 {
            best = best.min(p.iter().zip(&lens).map(|(p, &l)| p * f64::from(l)).sum());
        }
        let mut i = 0;
        while i < n && lens[i] == max_len {
            lens[i] = 1;
            i += 1;
        }
        if i == n {
            return best;
        }
        lens[i] += 1;
    }
}

fn compositions(total: u64, parts: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 1..=total - (parts as u64 - 1) {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

fn criterion_5() -> Check {
    let mut vectors = Vec::new();
    for n in 1..=5 {
        compositions(20, n, &mut Vec::new(), &mut vectors);
    }
    for counts in &vectors {
        let model = ProbabilityModel::from_counts(3, counts.iter().enumerate().map(|(i, &c)| (i as u32, c)))
            .map_err(|e| e.to_string())?;
        let lc = huffman_build(&model).map_err(|e| e.to_string())?.avg_code_length();
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 * 0.05).collect();
        let best = exhaustive_min_length(&p);
        ensure((lc - best).abs() < 1e-9, || format!("{counts:?}: l_c {lc} vs optimum {best}"))?;
    }
    Ok(format!("{} probability vectors on the 0.05 grid match the exhaustive optimum", vectors.len()))
}

fn stream_of(codewords: Vec<u32>, qb: u8) -> CodewordStream {
    CodewordStream {
        codewords,
        qb,
        mode: QuantMode::Pcm,
        full_scale: 1.0,
        channel: Channel::I,
    }
}

fn roundtrip(stream: &CodewordStream, coder: Coder) -> Result<CodedBitstream, String> {
    let coded = encode_stream(stream, coder, BlockLimit::default()).map_err(|e| e.to_string())?;
    let parsed = CodedBitstream::from_bytes(&coded.to_bytes()).map_err(|e| e.to_string())?;
    let decoded = decode(&parsed).map_err(|e| e.to_string())?;
    ensure(decoded == stream.codewords, || format!("{coder} roundtrip failed for {:?}", stream.codewords))?;
    Ok(coded)
}

fn ofdm(qam_order: u32, num_symbols: usize, seed: u64) -> OfdmConfig {
    OfdmConfig {
        qam_order,
        num_symbols,
        rng_seed: seed,
        ..OfdmConfig::default()
    }
}

fn criterion_6() -> Check {
    let mut exhaustive = 0usize;
    for len in 1..=8u32 {
        for index in 0..4u32.pow(len) {
            let codewords: Vec<u32> = (0..len).map(|i| (index >> (2 * i)) & 3).collect();
            let s = stream_of(codewords, 2);
            roundtrip(&s, Coder::Huffman)?;
            roundtrip(&s, Coder::Arithmetic)?;
            exhaustive += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut large = 0;
    for qb in [8u8, 15] {
        for _ in 0..2 {
            // 46 OFDM symbols give 100,832 samples per rail.
            let signal = generate_ofdm(&ofdm(16, 46, rng.random())).map_err(|e| e.to_string())?;
            let iq = quantize_iq(&signal.samples, &QuantizerConfig::dpcm(qb)).map_err(|e| e.to_string())?;
            for s in [&iq.i, &iq.q] {
                ensure(s.codewords.len() >= 100_000, || "stream too short".into())?;
                roundtrip(s, Coder::Huffman)?;
                roundtrip(s, Coder::Arithmetic)?;
                large += 1;
            }
        }
    }
    Ok(format!("{exhaustive} exhaustive streams x 2 coders, {large} DPCM streams of >= 1e5 codewords x 2 coders"))
}

/// I rails of DPCM/PCM pipelines over several seeds and bit depths.
fn pipeline_streams() -> Result<Vec<(String, CodewordStream)>, String> {
    let mut out = Vec::new();
    for (seed, qam) in [(11u64, 16u32), (12, 256)] {
        let signal = generate_ofdm(&ofdm(qam, 100, seed)).map_err(|e| e.to_string())?;
        for qb in [6u8, 9, 12, 15] {
            for config in [QuantizerConfig::pcm(qb), QuantizerConfig::dpcm(qb)] {
                let iq = quantize_iq(&signal.samples, &config).map_err(|e| e.to_string())?;
                out.push((format!("{qam}-QAM {}-{qb}", config.mode.name()), iq.i));
            }
        }
    }
    Ok(out)
}

fn criterion_7() -> Check {
    let streams = pipeline_streams()?;
    let mut worst = f64::NEG_INFINITY;
    for (label, s) in &streams {
        let hc = roundtrip(s, Coder::Huffman)?.effective_qbs();
        let ac = roundtrip(s, Coder::Arithmetic)?.effective_qbs();
        ensure(ac <= hc + 0.02, || format!("{label}: AC {ac:.4} > HC {hc:.4} + 0.02"))?;
        worst = worst.max(ac - hc);
    }
    Ok(format!("{} streams of 219200 codewords, max AC - HC = {worst:.4} QB", streams.len()))
}

fn criterion_8() -> Check {
    let signal = generate_ofdm(&ofdm(16, 100, 0)).map_err(|e| e.to_string())?;
    let iq = quantize_iq(&signal.samples, &QuantizerConfig::pcm(15)).map_err(|e| e.to_string())?;
    let mut hc_bits = 0u64;
    let mut ac_bits = 0u64;
    let mut n = 0u64;
    for s in [&iq.i, &iq.q] {
        hc_bits += roundtrip(s, Coder::Huffman)?.payload_bits;
        ac_bits += roundtrip(s, Coder::Arithmetic)?.payload_bits;
        n += s.codewords.len() as u64;
    }
    let hc = hc_bits as f64 / n as f64;
    let ac = ac_bits as f64 / n as f64;
    let summary = format!(
        "PCM-15 HC {hc:.4} (target 13.4275), AC {ac:.4} (target 13.3983), savings {:.4}/{:.4}",
        15.0 - hc,
        15.0 - ac
    );
    ensure((13.0..=13.9).contains(&hc), || format!("HC outside [13.0, 13.9]: {summary}"))?;
    ensure(ac <= hc, || format!("AC above HC: {summary}"))?;
    ensure((0.9..=1.8).contains(&(15.0 - hc)), || format!("HC saving outside [0.9, 1.8]: {summary}"))?;
    ensure(15.0 - ac > 15.0 - hc, || format!("AC saving not above HC saving: {summary}"))?;
    Ok(summary)
}

fn full_sweep() -> Result<SweepResult, String> {
    let mut config = RunConfig {
        sweep: Some(SweepSpec {
            qb_list: (4..=15).collect(),
            qam_order_list: SUPPORTED_QAM_ORDERS.to_vec(),
            scheme_list: Scheme::all(),
        }),
        ..RunConfig::default()
    };
    // Illustrative limits for the orders without a standardized one.
    config.evm_thresholds.set(1024, 2.5).map_err(|e| e.to_string())?;
    config.evm_thresholds.set(4096, 1.0).map_err(|e| e.to_string())?;
    run_sweep(&config).map_err(|e| e.to_string())
}

fn criterion_9(sweep: &SweepResult) -> Check {
    ensure(sweep.failed_rows() == 0, || format!("{} sweep rows failed", sweep.failed_rows()))?;
    let evm = |order, mode, coder, qb| {
        sweep
            .row(order, Scheme::new(mode, coder), qb)
            .and_then(|r| r.metrics.as_ref())
            .map(|m| m.evm_percent)
            .ok_or_else(|| format!("missing row {order}-QAM {mode:?} {coder:?} qb {qb}"))
    };
    let mut min_gain = f64::INFINITY;
    for order in SUPPORTED_QAM_ORDERS {
        for mode in [ModeKind::Pcm, ModeKind::Dpcm] {
            for qb in 5..=15u8 {
                let (lo, hi) = (evm(order, mode, None, qb - 1)?, evm(order, mode, None, qb)?);
                ensure(hi <= lo, || format!("{order}-QAM {mode:?}: EVM rises from {lo} at qb {} to {hi}", qb - 1))?;
            }
            for qb in 4..=15u8 {
                let plain = evm(order, mode, None, qb)?.to_bits();
                for coder in [Coder::Huffman, Coder::Arithmetic] {
                    ensure(evm(order, mode, Some(coder), qb)?.to_bits() == plain, || {
                        format!("{order}-QAM {mode:?} qb {qb}: {coder} changed EVM")
                    })?;
                }
            }
        }
        for qb in 4..=8u8 {
            let (pcm, dpcm) = (evm(order, ModeKind::Pcm, None, qb)?, evm(order, ModeKind::Dpcm, None, qb)?);
            ensure(dpcm < pcm, || format!("{order}-QAM qb {qb}: DPCM EVM {dpcm} >= PCM {pcm}"))?;
            min_gain = min_gain.min(20.0 * (pcm / dpcm).log10());
        }
    }
    Ok(format!(
        "{} rows; EVM monotone for qb 4-15; DPCM beats PCM by >= {min_gain:.2} dB at qb 4-8; coders leave EVM bit-identical",
        sweep.rows.len()
    ))
}

fn criterion_10(sweep: &SweepResult) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    sweep.write_outputs(dir.path()).map_err(|e| e.to_string())?;
    let table = std::fs::read_to_string(dir.path().join("table1.csv")).map_err(|e| e.to_string())?;
    ensure(table.lines().count() == sweep.table1.rows.len() + 1, || "table1.csv row count".into())?;

    println!("      {:>5} {:<8} {:>9} {:>9} {:>10} {:>10}", "QAM", "scheme", "meas. QB", "carriers", "published", "meas. Tb/s");
    for cell in published_table() {
        let measured = sweep
            .table1
            .rows
            .iter()
            .find(|r| r.qam_order == cell.qam_order && r.scheme == cell.scheme);
        match measured {
            Some(r) => println!(
                "      {:>5} {:<8} {:>9.4} {:>9} {:>10} {:>10.3}",
                r.qam_order, r.scheme.to_string(), r.effective_qb, r.channels, cell.channels, r.rate_tbps
            ),
            None => println!("      {:>5} {:<8} {:>9} {:>9} {:>10}", cell.qam_order, cell.scheme.to_string(), "-", "-", cell.channels),
        }
    }
    Ok(format!(
        "declared not reproducible; {} measured operating points written to table1.csv",
        sweep.table1.rows.len()
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, start: Instant, outcome: Check| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS [{secs:7.2}s] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL [{secs:7.2}s] {name}: {detail}");
            }
        }
    };

    let t = Instant::now();
    report(1, "budget exactness", t, criterion_1());
    let t = Instant::now();
    report(2, "published table inversion", t, criterion_2());
    let t = Instant::now();
    report(3, "arithmetic-coding worked example", t, criterion_3());
    let t = Instant::now();
    report(4, "entropy bound", t, criterion_4());
    let t = Instant::now();
    report(5, "Huffman optimality", t, criterion_5());
    let t = Instant::now();
    report(6, "lossless roundtrips", t, criterion_6());
    let t = Instant::now();
    report(7, "AC no worse than HC", t, criterion_7());
    let t = Instant::now();
    report(8, "PCM-15 compression corridors", t, criterion_8());
    let t = Instant::now();
    match full_sweep() {
        Ok(sweep) => {
            report(9, "quantization quality", t, criterion_9(&sweep));
            let t = Instant::now();
            report(10, "published operating points", t, criterion_10(&sweep));
        }
        Err(e) => {
            report(9, "quantization quality", t, Err(format!("sweep failed: {e}")));
            report(10, "published operating points", t, Err(format!("sweep failed: {e}")));
        }
    }

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
