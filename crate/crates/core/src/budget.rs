//! Aggregated carrier count and CPRI-equivalent rate of the fronthaul link.
//!
//! ```text
//! channels = R_sym * b * cores / (f_s * iq * QB * mimo * line)
//! rate     = R_sym * b * cores * QB_ref / QB
//! ```
//!
//! With the defaults (28 GBd 16-QAM over 6 cores, 122.88 MSa/s I/Q carriers,
//! 16/15 MIMO and 66b/64b line overheads, 15-bit CPRI reference), this is
//! `672 / (0.24576 * QB * 16/15 * 66/64)` carriers and `10.08 / QB` Tbit/s.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::entropy::Coder;
use crate::error::{Error, Result};
use crate::scheme::{ModeKind, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetParams {
    /// Transport symbol rate in baud.
    pub symbol_rate: f64,
    pub bits_per_transport_symbol: u32,
    pub data_cores: u32,
    /// Per-carrier sample rate in GSa/s.
    pub sample_rate_per_channel: f64,
    pub iq_factor: u32,
    pub mimo_overhead: f64,
    pub line_coding_overhead: f64,
    pub reference_qb: f64,
    /// Fraction of capacity lost to FEC, in `[0, 1)`.
    pub fec_overhead: f64,
}

impl Default for BudgetParams {
    fn default() -> Self {
        Self {
            symbol_rate: 28e9,
            bits_per_transport_symbol: 4,
            data_cores: 6,
            sample_rate_per_channel: 0.12288,
            iq_factor: 2,
            mimo_overhead: 16.0 / 15.0,
            line_coding_overhead: 66.0 / 64.0,
            reference_qb: 15.0,
            fec_overhead: 0.0,
        }
    }
}

impl BudgetParams {
    pub fn with_fec(self, fec_overhead: f64) -> Self {
        Self { fec_overhead, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("symbol_rate", self.symbol_rate)?;
        positive("bits_per_transport_symbol", self.bits_per_transport_symbol.into())?;
        positive("data_cores", self.data_cores.into())?;
        positive("sample_rate_per_channel", self.sample_rate_per_channel)?;
        positive("iq_factor", self.iq_factor.into())?;
        positive("reference_qb", self.reference_qb)?;
        for (name, v) in [("mimo_overhead", self.mimo_overhead), ("line_coding_overhead", self.line_coding_overhead)] {
            if !(v.is_finite() && v >= 1.0) {
                return Err(Error::Config(format!("{name} must be at least 1, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.fec_overhead) {
            return Err(Error::Config(format!("fec_overhead {} outside [0, 1)", self.fec_overhead)));
        }
        Ok(())
    }

    /// Raw line rate of all data cores in bit/s.
    pub fn transport_capacity(&self) -> f64 {
        self.symbol_rate * f64::from(self.bits_per_transport_symbol) * f64::from(self.data_cores)
    }

    /// Line bits one carrier needs per quantization bit.
    fn per_carrier_rate_per_qb(&self) -> f64 {
        self.sample_rate_per_channel * 1e9 * f64::from(self.iq_factor) * self.mimo_overhead * self.line_coding_overhead
    }

    fn fec_scale(&self) -> f64 {
        1.0 - self.fec_overhead
    }
}

fn check_qb(qb: f64) -> Result<()> {
    if qb.is_finite() && qb > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidQb(qb))
    }
}

/// Unrounded carrier count, FEC scaling included.
pub fn raw_channel_count(qb: f64, params: &BudgetParams) -> Result<f64> {
    check_qb(qb)?;
    params.validate()?;
    Ok(params.transport_capacity() / (params.per_carrier_rate_per_qb() * qb) * params.fec_scale())
}

/// Carrier count rounded half away from zero (329.75 carriers count as 330).
pub fn channel_count(qb: f64, params: &BudgetParams) -> Result<u64> {
    Ok(raw_channel_count(qb, params)?.round() as u64)
}

/// CPRI-equivalent data rate in Tbit/s.
pub fn cpri_equivalent_rate(qb: f64, params: &BudgetParams) -> Result<f64> {
    check_qb(qb)?;
    params.validate()?;
    Ok(params.transport_capacity() * params.reference_qb / qb * params.fec_scale() / 1e12)
}

/// QB at which the unrounded carrier count equals `channels`.
pub fn qb_for_channels(channels: f64, params: &BudgetParams) -> Result<f64> {
    params.validate()?;
    if !(channels.is_finite() && channels > 0.0) {
        return Err(Error::Config(format!("channel count {channels} must be positive")));
    }
    Ok(params.transport_capacity() * params.fec_scale() / (params.per_carrier_rate_per_qb() * channels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub qam_order: u32,
    pub scheme: Scheme,
    pub effective_qb: f64,
    pub channels: u64,
    pub rate_tbps: f64,
}

impl BudgetRow {
    pub fn new(qam_order: u32, scheme: Scheme, qb: f64, params: &BudgetParams) -> Result<Self> {
        let row_error = |e: Error| Error::BudgetRow {
            qam_order,
            scheme: scheme.to_string(),
            source: Box::new(e),
        };
        Ok(Self {
            qam_order,
            scheme,
            effective_qb: qb,
            channels: channel_count(qb, params).map_err(row_error)?,
            rate_tbps: cpri_equivalent_rate(qb, params).map_err(row_error)?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub rows: Vec<BudgetRow>,
}

impl BudgetReport {
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record(["qam_order", "scheme", "effective_qb", "channels", "rate_tbps"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One row per `(QAM order, scheme)` entry, in key order.
pub fn build_table1(effective_qbs: &BTreeMap<(u32, Scheme), f64>, params: &BudgetParams) -> Result<BudgetReport> {
    let rows = effective_qbs
        .iter()
        .map(|(&(qam_order, scheme), &qb)| BudgetRow::new(qam_order, scheme, qb, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(BudgetReport { rows })
}

/// A published operating point: carriers and CPRI-equivalent rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedCell {
    pub qam_order: u32,
    pub scheme: Scheme,
    pub channels: u64,
    pub rate_tbps: f64,
}

const DIFF: Scheme = Scheme::new(ModeKind::Dpcm, None);
const DIFF_HC: Scheme = Scheme::new(ModeKind::Dpcm, Some(Coder::Huffman));
const DIFF_AC: Scheme = Scheme::new(ModeKind::Dpcm, Some(Coder::Arithmetic));

/// Reported aggregated carriers and CPRI-equivalent rates for the 28-GBd
/// 6-core link with differential coding.
pub fn published_table() -> Vec<PublishedCell> {
    const ROWS: [(u32, [u64; 3], [f64; 3]); 6] = [
        (4, [829, 864, 921], [3.36, 3.5, 3.73]),
        (16, [621, 668, 698], [2.52, 2.71, 2.83]),
        (64, [497, 608, 622], [2.02, 2.47, 2.52]),
        (256, [355, 440, 451], [1.44, 1.78, 1.83]),
        (1024, [311, 376, 378], [1.26, 1.53, 1.53]),
        (4096, [276, 326, 330], [1.12, 1.32, 1.34]),
    ];
    ROWS.iter()
        .flat_map(|&(qam_order, channels, rates)| {
            [DIFF, DIFF_HC, DIFF_AC]
                .into_iter()
                .zip(channels.into_iter().zip(rates))
                .map(move |(scheme, (channels, rate_tbps))| PublishedCell {
                    qam_order,
                    scheme,
                    channels,
                    rate_tbps,
                })
        })
        .collect()
}
