//! OFDM baseband synthesis, loopback demodulation and EVM measurement.

mod evm;
pub mod io;
mod ofdm;
mod qam;

pub use evm::{compute_evm, evm_percent, evm_threshold, EvmReport, EvmThresholds};
pub use ofdm::{demodulate, generate_ofdm, ConstellationGrid, OfdmConfig, OfdmSignal};
pub use qam::{QamConstellation, SUPPORTED_QAM_ORDERS};
