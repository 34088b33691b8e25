use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported QAM order {0} (expected one of 4, 16, 64, 256, 1024, 4096)")]
    UnsupportedQamOrder(u32),

    #[error("EVM threshold unset for {0}-QAM; it must be configured explicitly")]
    ThresholdUnset(u32),

    #[error("framing error: expected {expected} samples, got {actual}")]
    Framing { expected: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("reference grid has zero average power")]
    ZeroReferencePower,

    #[error("input is empty")]
    EmptyInput,

    #[error("input has zero RMS")]
    ZeroRms,

    #[error("corrupt stream: {0}")]
    CorruptStream(String),

    #[error("metadata error: {0}")]
    Metadata(String),

    #[error("probability model is empty")]
    EmptyModel,

    #[error("codeword {0} is not in the probability model")]
    UnseenSymbol(u32),

    #[error("payload truncated: {0}")]
    Truncated(String),

    #[error("{0} payload bits remain after the last symbol")]
    TrailingBits(usize),

    #[error("corrupt arithmetic-coded block {block}: {reason}")]
    CorruptBlock { block: usize, reason: String },

    #[error("bad file format: {0}")]
    Format(String),

    #[error("quantization bits must be positive, got {0}")]
    InvalidQb(f64),

    #[error("row {qam_order}-QAM/{scheme}: {source}")]
    BudgetRow {
        qam_order: u32,
        scheme: String,
        #[source]
        source: Box<Error>,
    },

    /// A pipeline stage failed; `stage` names it.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Entropy decoding did not reproduce the quantizer output.
    #[error("roundtrip mismatch in {0}")]
    RoundtripMismatch(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| match source {
            // Consistency failures keep their identity so callers can tell them apart.
            e @ Error::RoundtripMismatch(_) => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by the caller's configuration rather than by data.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::UnsupportedQamOrder(_)
            | Error::ThresholdUnset(_)
            | Error::InvalidQb(_)
            | Error::Json(_) => true,
            Error::Stage { source, .. } | Error::BudgetRow { source, .. } => source.is_config(),
            _ => false,
        }
    }

    /// True for lossless-roundtrip violations.
    pub fn is_consistency(&self) -> bool {
        match self {
            Error::RoundtripMismatch(_) => true,
            Error::Stage { source, .. } => source.is_consistency(),
            _ => false,
        }
    }
}
