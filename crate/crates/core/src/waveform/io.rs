//! Raw I/Q export: little-endian f64 pairs plus a JSON sidecar holding the
//! [`OfdmConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::ofdm::OfdmConfig;
use crate::error::{Error, Result};

/// Sidecar path for an I/Q file: `signal.iq` → `signal.json`.
pub fn sidecar_path(iq_path: &Path) -> PathBuf {
    iq_path.with_extension("json")
}

pub fn encode_iq(samples: &[Complex64]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(samples.len() * 16);
    for s in samples {
        bytes.extend_from_slice(&s.re.to_le_bytes());
        bytes.extend_from_slice(&s.im.to_le_bytes());
    }
    bytes
}

pub fn decode_iq(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::Format(format!(
            "I/Q file length {} is not a multiple of 16 bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

pub fn write_signal(iq_path: &Path, samples: &[Complex64], config: &OfdmConfig) -> Result<()> {
    fs::write(iq_path, encode_iq(samples))?;
    fs::write(sidecar_path(iq_path), serde_json::to_string_pretty(config)?)?;
    Ok(())
}

pub fn read_signal(iq_path: &Path) -> Result<(Vec<Complex64>, OfdmConfig)> {
    let samples = decode_iq(&fs::read(iq_path)?)?;
    let config: OfdmConfig = serde_json::from_slice(&fs::read(sidecar_path(iq_path))?)?;
    Ok((samples, config))
}
