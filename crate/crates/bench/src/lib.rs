//! Shared fixtures for the criterion benches.

use mfh_core::quantizer::{quantize_iq, CodewordStream, QuantizerConfig};
use mfh_core::waveform::{generate_ofdm, OfdmConfig, OfdmSignal};

pub fn signal(num_symbols: usize) -> OfdmSignal {
    generate_ofdm(&OfdmConfig {
        num_symbols,
        ..OfdmConfig::default()
    })
    .expect("default OFDM config is valid")
}

/// I rail of `signal` quantized with `config`.
pub fn stream(signal: &OfdmSignal, config: &QuantizerConfig) -> CodewordStream {
    quantize_iq(&signal.samples, config).expect("quantizer config is valid").i
}
