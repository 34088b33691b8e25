//! PCM and DPCM quantization of real sample streams into codeword streams.
//!
//! I and Q are quantized as separate streams that share one full-scale
//! value, so both rails use the same step size.

mod format;
mod midrise;
mod predictor;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use format::{read_stream, stream_from_bytes, stream_to_bytes, write_stream};
pub use midrise::{Midrise, MAX_QB};

use crate::entropy::ProbabilityModel;
use crate::error::{Error, Result};
use predictor::NlmsPredictor;

pub const DEFAULT_CLIP_SIGMA: f64 = 6.0;
pub const DEFAULT_PREDICTOR_ORDER: u8 = 4;
pub const DEFAULT_ADAPTATION_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum QuantMode {
    Pcm,
    Dpcm {
        #[serde(default = "default_order")]
        predictor_order: u8,
        #[serde(default = "default_step")]
        adaptation_step: f64,
    },
}

fn default_order() -> u8 {
    DEFAULT_PREDICTOR_ORDER
}

fn default_step() -> f64 {
    DEFAULT_ADAPTATION_STEP
}

impl QuantMode {
    pub fn dpcm() -> Self {
        QuantMode::Dpcm {
            predictor_order: DEFAULT_PREDICTOR_ORDER,
            adaptation_step: DEFAULT_ADAPTATION_STEP,
        }
    }

    pub fn is_dpcm(&self) -> bool {
        matches!(self, QuantMode::Dpcm { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            QuantMode::Pcm => "pcm",
            QuantMode::Dpcm { .. } => "dpcm",
        }
    }

    fn validate(&self) -> Result<()> {
        if let QuantMode::Dpcm {
            predictor_order,
            adaptation_step,
        } = *self
        {
            if predictor_order == 0 {
                return Err(Error::Metadata("DPCM predictor_order must be at least 1".into()));
            }
            // NLMS is stable for 0 < mu < 2.
            if !(adaptation_step > 0.0 && adaptation_step < 2.0) {
                return Err(Error::Metadata(format!(
                    "DPCM adaptation_step {adaptation_step} outside (0, 2)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantizerConfig {
    pub qb: u8,
    #[serde(flatten)]
    pub mode: QuantMode,
    /// Full scale as a multiple of the input (or residual) RMS.
    pub clip_sigma: f64,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        Self {
            qb: 15,
            mode: QuantMode::Pcm,
            clip_sigma: DEFAULT_CLIP_SIGMA,
        }
    }
}

impl QuantizerConfig {
    pub fn pcm(qb: u8) -> Self {
        Self {
            qb,
            ..Self::default()
        }
    }

    pub fn dpcm(qb: u8) -> Self {
        Self {
            qb,
            mode: QuantMode::dpcm(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_QB).contains(&self.qb) {
            return Err(Error::Config(format!("qb {} outside 2..={MAX_QB}", self.qb)));
        }
        if !(self.clip_sigma.is_finite() && self.clip_sigma > 0.0) {
            return Err(Error::Config(format!("clip_sigma {} must be positive", self.clip_sigma)));
        }
        self.mode.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    I,
    Q,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::I => "I",
            Channel::Q => "Q",
        })
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" => Ok(Channel::I),
            "Q" | "q" => Ok(Channel::Q),
            other => Err(Error::Config(format!("unknown channel `{other}`"))),
        }
    }
}

/// Quantized codewords of one rail plus everything needed to reconstruct it.
///
/// For DPCM, `full_scale` is the residual quantizer's range.
#[derive(Debug, Clone, PartialEq)]
pub struct CodewordStream {
    pub codewords: Vec<u32>,
    pub qb: u8,
    pub mode: QuantMode,
    pub full_scale: f64,
    pub channel: Channel,
}

impl CodewordStream {
    pub fn sample_count(&self) -> usize {
        self.codewords.len()
    }

    pub fn with_channel(mut self, channel: Channel) -> Self {
        self.channel = channel;
        self
    }

    pub fn quantizer(&self) -> Result<Midrise> {
        Midrise::new(self.qb, self.full_scale).map_err(|e| Error::Metadata(e.to_string()))
    }

    fn check_codewords(&self) -> Result<()> {
        let limit = 1u64 << self.qb;
        match self.codewords.iter().position(|&c| u64::from(c) >= limit) {
            Some(i) => Err(Error::CorruptStream(format!(
                "codeword {} at index {i} does not fit in {} bits",
                self.codewords[i], self.qb
            ))),
            None => Ok(()),
        }
    }
}

/// Stream together with the encoder's own reconstruction of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub stream: CodewordStream,
    pub reconstruction: Vec<f64>,
}

fn rms(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (n > 0).then(|| (sum / n as f64).sqrt())
}

fn check_finite(samples: &[f64]) -> Result<()> {
    match samples.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Config(format!("sample {i} is not finite"))),
        None => Ok(()),
    }
}

fn open_loop_residuals<'a>(samples: &'a [f64], order: usize, step: f64, scale: f64) -> impl Iterator<Item = f64> + 'a {
    let mut predictor = NlmsPredictor::new(order, step, scale);
    samples.iter().map(move |&x| {
        let e = x - predictor.predict();
        predictor.update(e, x);
        e
    })
}

/// Full-scale value shared by all `channels`: `clip_sigma` times the pooled
/// RMS of the input (PCM) or of the unquantized prediction residual (DPCM).
pub fn derive_full_scale(config: &QuantizerConfig, channels: &[&[f64]]) -> Result<f64> {
    config.validate()?;
    if channels.iter().all(|c| c.is_empty()) {
        return Err(Error::EmptyInput);
    }
    for c in channels {
        check_finite(c)?;
    }
    let input_rms = rms(channels.iter().flat_map(|c| c.iter().copied())).unwrap();
    if input_rms == 0.0 {
        return Err(Error::ZeroRms);
    }
    let reference = match config.mode {
        QuantMode::Pcm => input_rms,
        QuantMode::Dpcm {
            predictor_order,
            adaptation_step,
        } => {
            let residuals = channels
                .iter()
                .flat_map(|c| open_loop_residuals(c, predictor_order.into(), adaptation_step, input_rms));
            rms(residuals).unwrap()
        }
    };
    if reference == 0.0 {
        return Err(Error::ZeroRms);
    }
    Ok(config.clip_sigma * reference)
}

/// Quantizes one rail with an explicit full scale.
pub fn quantize_channel(samples: &[f64], config: &QuantizerConfig, full_scale: f64, channel: Channel) -> Result<Quantized> {
    config.validate()?;
    check_finite(samples)?;
    let quantizer = Midrise::new(config.qb, full_scale)?;
    let (codewords, reconstruction) = match config.mode {
        QuantMode::Pcm => samples
            .iter()
            .map(|&x| {
                let k = quantizer.quantize(x);
                (k, quantizer.level(k))
            })
            .unzip(),
        QuantMode::Dpcm {
            predictor_order,
            adaptation_step,
        } => {
            let mut predictor = NlmsPredictor::new(predictor_order.into(), adaptation_step, full_scale);
            samples
                .iter()
                .map(|&x| {
                    let prediction = predictor.predict();
                    let k = quantizer.quantize(x - prediction);
                    let residual = quantizer.level(k);
                    let y = prediction + residual;
                    predictor.update(residual, y);
                    (k, y)
                })
                .unzip()
        }
    };
    Ok(Quantized {
        stream: CodewordStream {
            codewords,
            qb: config.qb,
            mode: config.mode,
            full_scale,
            channel,
        },
        reconstruction,
    })
}

/// Uniform midrise PCM with full scale `clip_sigma * RMS(samples)`.
pub fn pcm_quantize(samples: &[f64], config: &QuantizerConfig) -> Result<CodewordStream> {
    if config.mode != QuantMode::Pcm {
        return Err(Error::Config("pcm_quantize requires mode = pcm".into()));
    }
    let full_scale = derive_full_scale(config, &[samples])?;
    Ok(quantize_channel(samples, config, full_scale, Channel::I)?.stream)
}

pub fn pcm_dequantize(stream: &CodewordStream) -> Result<Vec<f64>> {
    if stream.mode != QuantMode::Pcm {
        return Err(Error::Metadata("stream is not PCM".into()));
    }
    let quantizer = stream.quantizer()?;
    stream.check_codewords()?;
    Ok(stream.codewords.iter().map(|&k| quantizer.level(k)).collect())
}

/// Closed-loop DPCM: the residual against an NLMS prediction from past
/// reconstructed samples is midrise-quantized.
pub fn dpcm_encode(samples: &[f64], config: &QuantizerConfig) -> Result<CodewordStream> {
    if !config.mode.is_dpcm() {
        return Err(Error::Config("dpcm_encode requires mode = dpcm".into()));
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let full_scale = derive_full_scale(config, &[samples])?;
    Ok(quantize_channel(samples, config, full_scale, Channel::I)?.stream)
}

pub fn dpcm_decode(stream: &CodewordStream) -> Result<Vec<f64>> {
    let QuantMode::Dpcm {
        predictor_order,
        adaptation_step,
    } = stream.mode
    else {
        return Err(Error::Metadata("stream is not DPCM".into()));
    };
    stream.mode.validate()?;
    let quantizer = stream.quantizer()?;
    stream.check_codewords()?;
    let mut predictor = NlmsPredictor::new(predictor_order.into(), adaptation_step, stream.full_scale);
    Ok(stream
        .codewords
        .iter()
        .map(|&k| {
            let residual = quantizer.level(k);
            let y = predictor.predict() + residual;
            predictor.update(residual, y);
            y
        })
        .collect())
}

pub fn dequantize(stream: &CodewordStream) -> Result<Vec<f64>> {
    match stream.mode {
        QuantMode::Pcm => pcm_dequantize(stream),
        QuantMode::Dpcm { .. } => dpcm_decode(stream),
    }
}

/// Empirical codeword distribution of a stream.
pub fn codeword_histogram(stream: &CodewordStream) -> Result<ProbabilityModel> {
    if stream.codewords.is_empty() {
        return Err(Error::EmptyInput);
    }
    stream.check_codewords()?;
    ProbabilityModel::from_codewords(&stream.codewords, stream.qb)
}

/// The I and Q streams of one complex signal.
#[derive(Debug, Clone, PartialEq)]
pub struct IqStreams {
    pub i: CodewordStream,
    pub q: CodewordStream,
}

impl IqStreams {
    pub fn dequantize(&self) -> Result<Vec<Complex64>> {
        let i = dequantize(&self.i)?;
        let q = dequantize(&self.q)?;
        if i.len() != q.len() {
            return Err(Error::DimensionMismatch(format!("I has {} samples, Q has {}", i.len(), q.len())));
        }
        Ok(i.into_iter().zip(q).map(|(re, im)| Complex64::new(re, im)).collect())
    }
}

pub fn quantize_iq(samples: &[Complex64], config: &QuantizerConfig) -> Result<IqStreams> {
    let i: Vec<f64> = samples.iter().map(|s| s.re).collect();
    let q: Vec<f64> = samples.iter().map(|s| s.im).collect();
    let full_scale = derive_full_scale(config, &[&i, &q])?;
    Ok(IqStreams {
        i: quantize_channel(&i, config, full_scale, Channel::I)?.stream,
        q: quantize_channel(&q, config, full_scale, Channel::Q)?.stream,
    })
}
