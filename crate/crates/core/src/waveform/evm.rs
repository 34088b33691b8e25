use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ofdm::ConstellationGrid;
use super::qam::SUPPORTED_QAM_ORDERS;
use crate::error::{Error, Result};

/// Error-free EVM limits in percent, keyed by QAM order.
///
/// Defaults cover QPSK through 256-QAM. 1024- and 4096-QAM have no
/// standardized limit and must be set explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvmThresholds(BTreeMap<u32, f64>);

impl Default for EvmThresholds {
    fn default() -> Self {
        Self(BTreeMap::from([(4, 17.5), (16, 12.5), (64, 8.0), (256, 3.5)]))
    }
}

impl EvmThresholds {
    /// Returns a copy with `order` mapped to `percent`.
    pub fn with(mut self, order: u32, percent: f64) -> Result<Self> {
        self.set(order, percent)?;
        Ok(self)
    }

    pub fn set(&mut self, order: u32, percent: f64) -> Result<()> {
        if !SUPPORTED_QAM_ORDERS.contains(&order) {
            return Err(Error::UnsupportedQamOrder(order));
        }
        if !(percent.is_finite() && percent > 0.0) {
            return Err(Error::Config(format!("EVM threshold {percent} must be positive")));
        }
        self.0.insert(order, percent);
        Ok(())
    }

    /// Overlays user-supplied limits on top of the defaults.
    pub fn merged(&self, overrides: &EvmThresholds) -> Result<Self> {
        let mut out = self.clone();
        for (&order, &pct) in &overrides.0 {
            out.set(order, pct)?;
        }
        Ok(out)
    }

    pub fn get(&self, qam_order: u32) -> Result<f64> {
        evm_threshold(qam_order, self)
    }
}

pub fn evm_threshold(qam_order: u32, thresholds: &EvmThresholds) -> Result<f64> {
    if !SUPPORTED_QAM_ORDERS.contains(&qam_order) {
        return Err(Error::UnsupportedQamOrder(qam_order));
    }
    thresholds
        .0
        .get(&qam_order)
        .copied()
        .ok_or(Error::ThresholdUnset(qam_order))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvmReport {
    pub evm_rms_percent: f64,
    pub per_symbol_evm: Vec<f64>,
    pub qam_order: u32,
    pub threshold_percent: f64,
    pub passes_threshold: bool,
}

/// RMS error vector magnitude in percent, overall and per OFDM symbol row.
pub fn evm_percent(received: &ConstellationGrid, reference: &ConstellationGrid) -> Result<(f64, Vec<f64>)> {
    if received.rows() != reference.rows() || received.cols() != reference.cols() {
        return Err(Error::DimensionMismatch(format!(
            "received {}x{} vs reference {}x{}",
            received.rows(),
            received.cols(),
            reference.rows(),
            reference.cols()
        )));
    }
    let energies = |r: usize| {
        received
            .row(r)
            .iter()
            .zip(reference.row(r))
            .fold((0.0, 0.0), |(err, sig), (x, s)| (err + (x - s).norm_sqr(), sig + s.norm_sqr()))
    };
    let rows: Vec<(f64, f64)> = (0..reference.rows()).map(energies).collect();
    let (error, signal) = rows.iter().fold((0.0, 0.0), |(e, s), (re, rs)| (e + re, s + rs));
    if signal == 0.0 {
        return Err(Error::ZeroReferencePower);
    }
    let per_symbol = rows
        .iter()
        .map(|&(e, s)| if s > 0.0 { 100.0 * (e / s).sqrt() } else { f64::NAN })
        .collect();
    Ok((100.0 * (error / signal).sqrt(), per_symbol))
}

pub fn compute_evm(
    received: &ConstellationGrid,
    reference: &ConstellationGrid,
    qam_order: u32,
    thresholds: &EvmThresholds,
) -> Result<EvmReport> {
    let threshold = evm_threshold(qam_order, thresholds)?;
    let (evm, per_symbol) = evm_percent(received, reference)?;
    Ok(EvmReport {
        evm_rms_percent: evm,
        per_symbol_evm: per_symbol,
        qam_order,
        threshold_percent: threshold,
        passes_threshold: evm <= threshold,
    })
}
