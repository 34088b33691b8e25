use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::budget::{build_table1, channel_count, cpri_equivalent_rate, BudgetParams, BudgetReport};
use crate::entropy::{decode, encode_stream, BlockLimit, CodedBitstream, Coder};
use crate::error::{Error, Result};
use crate::quantizer::{codeword_histogram, quantize_iq, QuantizerConfig};
use crate::scheme::Scheme;
use crate::waveform::{compute_evm, demodulate, generate_ofdm, EvmThresholds, OfdmConfig, OfdmSignal};

/// Measurements of one completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMetrics {
    /// Coded bits per I or Q sample; equals `qb` without a coder.
    pub effective_qb: f64,
    /// Mean codeword entropy of the I and Q streams.
    pub entropy_bits: f64,
    pub evm_percent: f64,
    pub threshold_percent: f64,
    pub passes_threshold: bool,
    pub channels: u64,
    pub rate_tbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub qam_order: u32,
    pub scheme: Scheme,
    pub qb: u8,
    pub seed: u64,
    pub samples_per_rail: usize,
    pub metrics: RowMetrics,
}

struct Stages<'a> {
    ofdm: &'a OfdmConfig,
    signal: &'a OfdmSignal,
    thresholds: &'a EvmThresholds,
    budget: &'a BudgetParams,
    limit: BlockLimit,
}

impl Stages<'_> {
    fn run(&self, quantizer: &QuantizerConfig, coder: Option<Coder>) -> Result<RowMetrics> {
        let streams = quantize_iq(&self.signal.samples, quantizer).map_err(Error::stage("quantize"))?;
        let rails = [&streams.i, &streams.q];
        let mut entropy = 0.0;
        for s in rails {
            entropy += codeword_histogram(s).map_err(Error::stage("histogram"))?.entropy() / 2.0;
        }

        let effective_qb = match coder {
            None => f64::from(quantizer.qb),
            Some(coder) => {
                let mut bits = 0u64;
                let mut symbols = 0u64;
                for s in rails {
                    let coded = encode_stream(s, coder, self.limit).map_err(Error::stage("encode"))?;
                    let parsed = CodedBitstream::from_bytes(&coded.to_bytes()).map_err(Error::stage("decode"))?;
                    let decoded = decode(&parsed).map_err(Error::stage("decode"))?;
                    if decoded != s.codewords {
                        return Err(Error::RoundtripMismatch(format!("{coder} decoding of the {} stream", s.channel)));
                    }
                    bits += coded.payload_bits;
                    symbols += coded.original_count;
                }
                bits as f64 / symbols as f64
            }
        };

        let received = streams.dequantize().map_err(Error::stage("dequantize"))?;
        let grid = demodulate(&received, self.ofdm).map_err(Error::stage("demodulate"))?;
        let evm = compute_evm(&grid, &self.signal.reference_grid, self.ofdm.qam_order, self.thresholds)
            .map_err(Error::stage("evm"))?;
        Ok(RowMetrics {
            effective_qb,
            entropy_bits: entropy,
            evm_percent: evm.evm_rms_percent,
            threshold_percent: evm.threshold_percent,
            passes_threshold: evm.passes_threshold,
            channels: channel_count(effective_qb, self.budget).map_err(Error::stage("budget"))?,
            rate_tbps: cpri_equivalent_rate(effective_qb, self.budget).map_err(Error::stage("budget"))?,
        })
    }
}

/// Runs generate → quantize → encode → decode → dequantize → demodulate →
/// EVM → budget once.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let ofdm = config.seeded_ofdm(config.ofdm.qam_order, config.rng_seed);
    let signal = generate_ofdm(&ofdm).map_err(Error::stage("generate"))?;
    let thresholds = config.thresholds()?;
    let stages = Stages {
        ofdm: &ofdm,
        signal: &signal,
        thresholds: &thresholds,
        budget: &config.budget,
        limit: config.block_limit,
    };
    let metrics = stages.run(&config.quantizer, config.coder)?;
    Ok(RunReport {
        qam_order: ofdm.qam_order,
        scheme: config.scheme(),
        qb: config.quantizer.qb,
        seed: config.rng_seed,
        samples_per_rail: signal.samples.len(),
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub qam_order: u32,
    pub scheme: Scheme,
    pub qb: u8,
    pub seed: u64,
    pub metrics: Option<RowMetrics>,
    pub error: Option<String>,
}

/// Lowest-QB passing row for one QAM order and scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub qam_order: u32,
    pub scheme: Scheme,
    pub qb: Option<u8>,
    pub effective_qb: Option<f64>,
    pub evm_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub base_seed: u64,
    pub samples_per_rail: usize,
    pub rows: Vec<SweepRow>,
    pub operating_points: Vec<OperatingPoint>,
    pub table1: BudgetReport,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn row(&self, qam_order: u32, scheme: Scheme, qb: u8) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.qam_order == qam_order && r.scheme == scheme && r.qb == qb)
    }

    pub fn write_rows_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "qam_order",
            "scheme",
            "qb",
            "seed",
            "effective_qb",
            "entropy_bits",
            "evm_percent",
            "threshold_percent",
            "passes_threshold",
            "channels",
            "rate_tbps",
            "error",
        ])?;
        for r in &self.rows {
            let mut record = vec![r.qam_order.to_string(), r.scheme.to_string(), r.qb.to_string(), r.seed.to_string()];
            match &r.metrics {
                Some(m) => record.extend([
                    m.effective_qb.to_string(),
                    m.entropy_bits.to_string(),
                    m.evm_percent.to_string(),
                    m.threshold_percent.to_string(),
                    m.passes_threshold.to_string(),
                    m.channels.to_string(),
                    m.rate_tbps.to_string(),
                ]),
                None => record.extend(std::iter::repeat_n(String::new(), 7)),
            }
            record.push(r.error.clone().unwrap_or_default());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `fig4a.csv`, `table1.csv` and `sweep.json` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_rows_csv(fs::File::create(dir.join("fig4a.csv"))?)?;
        self.table1.write_csv(fs::File::create(dir.join("table1.csv"))?)?;
        fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Runs every (QAM order, scheme, qb) combination of the sweep grid.
///
/// Each QAM order gets its own signal, seeded `rng_seed + index`, shared by
/// all of its rows. Failed rows are recorded and the sweep continues, except
/// that a lossless-roundtrip violation aborts it.
pub fn run_sweep(config: &RunConfig) -> Result<SweepResult> {
    let sweep = config.validate_sweep()?;
    let thresholds = config.thresholds()?;

    let signals: Vec<(OfdmConfig, Result<OfdmSignal>)> = sweep
        .qam_order_list
        .par_iter()
        .enumerate()
        .map(|(i, &order)| {
            let ofdm = config.seeded_ofdm(order, config.rng_seed.wrapping_add(i as u64));
            let signal = generate_ofdm(&ofdm).map_err(Error::stage("generate"));
            (ofdm, signal)
        })
        .collect();

    let cells: Vec<(usize, Scheme, u8)> = (0..signals.len())
        .flat_map(|i| {
            sweep
                .scheme_list
                .iter()
                .flat_map(move |&s| sweep.qb_list.iter().map(move |&qb| (i, s, qb)))
        })
        .collect();

    let outcomes: Vec<Result<RowMetrics>> = cells
        .par_iter()
        .map(|&(i, scheme, qb)| {
            let (ofdm, signal) = &signals[i];
            let signal = signal.as_ref().map_err(|e| Error::Stage {
                stage: "generate",
                source: Box::new(Error::Config(e.to_string())),
            })?;
            let stages = Stages {
                ofdm,
                signal,
                thresholds: &thresholds,
                budget: &config.budget,
                limit: config.block_limit,
            };
            stages.run(&config.quantizer_for(scheme.mode, qb), scheme.coder)
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    for (&(i, scheme, qb), outcome) in cells.iter().zip(outcomes) {
        let (ofdm, _) = &signals[i];
        let (metrics, error) = match outcome {
            Ok(m) => (Some(m), None),
            Err(e) if e.is_consistency() => return Err(e),
            Err(e) => (None, Some(e.to_string())),
        };
        rows.push(SweepRow {
            qam_order: ofdm.qam_order,
            scheme,
            qb,
            seed: ofdm.rng_seed,
            metrics,
            error,
        });
    }

    let operating_points = operating_points(&rows, sweep.qam_order_list.as_slice(), &sweep.scheme_list);
    let cells: BTreeMap<(u32, Scheme), f64> = operating_points
        .iter()
        .filter_map(|p| p.effective_qb.map(|q| ((p.qam_order, p.scheme), q)))
        .collect();
    let table1 = build_table1(&cells, &config.budget)?;

    Ok(SweepResult {
        base_seed: config.rng_seed,
        samples_per_rail: config.ofdm.sample_count(),
        rows,
        operating_points,
        table1,
    })
}

fn operating_points(rows: &[SweepRow], orders: &[u32], schemes: &[Scheme]) -> Vec<OperatingPoint> {
    let mut points = Vec::new();
    for &qam_order in orders {
        for &scheme in schemes {
            let best = rows
                .iter()
                .filter(|r| r.qam_order == qam_order && r.scheme == scheme)
                .filter_map(|r| r.metrics.as_ref().map(|m| (r.qb, m)))
                .filter(|(_, m)| m.passes_threshold)
                .min_by(|a, b| a.1.effective_qb.total_cmp(&b.1.effective_qb));
            points.push(OperatingPoint {
                qam_order,
                scheme,
                qb: best.map(|b| b.0),
                effective_qb: best.map(|b| b.1.effective_qb),
                evm_percent: best.map(|b| b.1.evm_percent),
            });
        }
    }
    points
}
