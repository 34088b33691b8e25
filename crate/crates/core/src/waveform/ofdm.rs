use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::qam::QamConstellation;
use crate::error::{Error, Result};

/// Parameters of one OFDM carrier. Defaults describe a 100-MHz NR carrier:
/// 2048-point FFT at 122.88 MSa/s, 1620 occupied subcarriers (135 RBs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OfdmConfig {
    pub fft_size: usize,
    /// Sa/s.
    pub sample_rate: f64,
    pub occupied_subcarriers: usize,
    pub cyclic_prefix_len: usize,
    pub qam_order: u32,
    pub num_symbols: usize,
    pub rng_seed: u64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            fft_size: 2048,
            sample_rate: 122.88e6,
            occupied_subcarriers: 1620,
            cyclic_prefix_len: 144,
            qam_order: 16,
            num_symbols: 100,
            rng_seed: 0,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        QamConstellation::new(self.qam_order)?;
        if self.fft_size < 2 {
            return Err(Error::Config(format!("fft_size {} must be at least 2", self.fft_size)));
        }
        if self.occupied_subcarriers == 0 || self.occupied_subcarriers >= self.fft_size {
            return Err(Error::Config(format!(
                "occupied_subcarriers {} must be in 1..{}",
                self.occupied_subcarriers, self.fft_size
            )));
        }
        if self.num_symbols == 0 {
            return Err(Error::Config("num_symbols must be positive".into()));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::Config(format!("sample_rate {} must be positive", self.sample_rate)));
        }
        Ok(())
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cyclic_prefix_len
    }

    pub fn sample_count(&self) -> usize {
        self.num_symbols * self.symbol_len()
    }

    /// Hz between adjacent subcarriers.
    pub fn subcarrier_spacing(&self) -> f64 {
        self.sample_rate / self.fft_size as f64
    }

    /// FFT bins of the occupied subcarriers, from the most negative frequency
    /// to the most positive. DC (bin 0) is never used.
    pub fn occupied_bins(&self) -> Vec<usize> {
        let negative = self.occupied_subcarriers / 2;
        let positive = self.occupied_subcarriers - negative;
        (self.fft_size - negative..self.fft_size)
            .chain(1..=positive)
            .collect()
    }
}

/// Row-major complex matrix: one row per OFDM symbol, one column per
/// occupied subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationGrid {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
}

impl ConstellationGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} grid",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmSignal {
    pub samples: Vec<Complex64>,
    pub reference_grid: ConstellationGrid,
    pub config: OfdmConfig,
}

impl OfdmSignal {
    pub fn in_phase(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn quadrature(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.im).collect()
    }
}

/// Loads random QAM symbols onto the occupied subcarriers and synthesizes
/// the time-domain stream, prepending a cyclic prefix to every symbol.
///
/// The transform is scaled by 1/sqrt(N) so that [`demodulate`] is its exact
/// inverse.
pub fn generate_ofdm(config: &OfdmConfig) -> Result<OfdmSignal> {
    config.validate()?;
    let constellation = QamConstellation::new(config.qam_order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let n = config.fft_size;
    let bins = config.occupied_bins();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let norm = 1.0 / (n as f64).sqrt();

    let mut grid = Vec::with_capacity(config.num_symbols * bins.len());
    let mut samples = Vec::with_capacity(config.sample_count());
    let mut buffer = vec![Complex64::default(); n];
    for _ in 0..config.num_symbols {
        buffer.fill(Complex64::default());
        for &bin in &bins {
            let point = constellation.point(rng.random_range(0..config.qam_order));
            buffer[bin] = point;
            grid.push(point);
        }
        ifft.process(&mut buffer);
        samples.extend(buffer[n - config.cyclic_prefix_len..].iter().map(|s| s * norm));
        samples.extend(buffer.iter().map(|s| s * norm));
    }

    Ok(OfdmSignal {
        samples,
        reference_grid: ConstellationGrid::new(config.num_symbols, bins.len(), grid)?,
        config: config.clone(),
    })
}

/// Strips the cyclic prefix of each symbol, transforms back to frequency and
/// extracts the occupied subcarriers.
pub fn demodulate(samples: &[Complex64], config: &OfdmConfig) -> Result<ConstellationGrid> {
    config.validate()?;
    if samples.len() != config.sample_count() {
        return Err(Error::Framing {
            expected: config.sample_count(),
            actual: samples.len(),
        });
    }
    let n = config.fft_size;
    let bins = config.occupied_bins();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let norm = 1.0 / (n as f64).sqrt();

    let mut grid = Vec::with_capacity(config.num_symbols * bins.len());
    let mut buffer = vec![Complex64::default(); n];
    for symbol in samples.chunks_exact(config.symbol_len()) {
        buffer.copy_from_slice(&symbol[config.cyclic_prefix_len..]);
        fft.process(&mut buffer);
        grid.extend(bins.iter().map(|&bin| buffer[bin] * norm));
    }
    ConstellationGrid::new(config.num_symbols, bins.len(), grid)
}
