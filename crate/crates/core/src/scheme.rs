use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::Coder;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Pcm,
    Dpcm,
}

/// A quantization mode optionally followed by an entropy coder, written
/// `pcm`, `pcm+hc`, `dpcm+ac`, ….
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Scheme {
    pub mode: ModeKind,
    pub coder: Option<Coder>,
}

impl Scheme {
    pub const fn new(mode: ModeKind, coder: Option<Coder>) -> Self {
        Self { mode, coder }
    }

    /// Every mode/coder combination.
    pub fn all() -> Vec<Scheme> {
        [ModeKind::Pcm, ModeKind::Dpcm]
            .into_iter()
            .flat_map(|m| [None, Some(Coder::Huffman), Some(Coder::Arithmetic)].map(|c| Scheme::new(m, c)))
            .collect()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            ModeKind::Pcm => "pcm",
            ModeKind::Dpcm => "dpcm",
        };
        match self.coder {
            None => f.write_str(mode),
            Some(c) => write!(f, "{mode}+{c}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (mode, coder) = match lower.split_once('+') {
            Some((m, c)) => (m, Some(c.parse::<Coder>()?)),
            None => (lower.as_str(), None),
        };
        let mode = match mode {
            "pcm" => ModeKind::Pcm,
            "dpcm" | "diff" | "diff." => ModeKind::Dpcm,
            other => return Err(Error::Config(format!("unknown quantization mode `{other}`"))),
        };
        Ok(Scheme { mode, coder })
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> Self {
        s.to_string()
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
