use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::budget::BudgetParams;
use crate::entropy::{BlockLimit, Coder};
use crate::error::{Error, Result};
use crate::quantizer::{QuantMode, QuantizerConfig};
use crate::scheme::{ModeKind, Scheme};
use crate::waveform::{EvmThresholds, OfdmConfig, QamConstellation};

/// Grid of a parameter sweep. Every combination becomes one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub qb_list: Vec<u8>,
    pub qam_order_list: Vec<u32>,
    pub scheme_list: Vec<Scheme>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            qb_list: (4..=15).collect(),
            qam_order_list: vec![4, 16, 64, 256],
            scheme_list: Scheme::all(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub ofdm: OfdmConfig,
    pub quantizer: QuantizerConfig,
    /// `None` skips entropy coding.
    pub coder: Option<Coder>,
    pub sweep: Option<SweepSpec>,
    pub budget: BudgetParams,
    /// Merged over the built-in thresholds; 1024- and 4096-QAM have none.
    pub evm_thresholds: EvmThresholds,
    pub block_limit: BlockLimit,
    pub output_dir: PathBuf,
    /// Overrides `ofdm.rng_seed`.
    pub rng_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ofdm: OfdmConfig::default(),
            quantizer: QuantizerConfig::default(),
            coder: None,
            sweep: None,
            budget: BudgetParams::default(),
            evm_thresholds: EvmThresholds::default(),
            block_limit: BlockLimit::default(),
            output_dir: PathBuf::from("out"),
            rng_seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn scheme(&self) -> Scheme {
        Scheme::new(mode_kind(&self.quantizer.mode), self.coder)
    }

    pub fn thresholds(&self) -> Result<EvmThresholds> {
        EvmThresholds::default().merged(&self.evm_thresholds)
    }

    /// OFDM parameters with the run seed applied.
    pub fn seeded_ofdm(&self, qam_order: u32, seed: u64) -> OfdmConfig {
        OfdmConfig {
            qam_order,
            rng_seed: seed,
            ..self.ofdm.clone()
        }
    }

    /// Quantizer settings for one sweep cell; DPCM keeps the configured
    /// predictor if there is one.
    pub fn quantizer_for(&self, mode: ModeKind, qb: u8) -> QuantizerConfig {
        let mode = match (mode, self.quantizer.mode) {
            (ModeKind::Pcm, _) => QuantMode::Pcm,
            (ModeKind::Dpcm, m @ QuantMode::Dpcm { .. }) => m,
            (ModeKind::Dpcm, QuantMode::Pcm) => QuantMode::dpcm(),
        };
        QuantizerConfig {
            qb,
            mode,
            ..self.quantizer
        }
    }

    /// Checks everything a single run needs.
    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        self.quantizer.validate()?;
        self.budget.validate()?;
        self.check_block_limit()?;
        self.thresholds()?.get(self.ofdm.qam_order)?;
        Ok(())
    }

    /// Checks everything a sweep needs, returning the sweep grid.
    pub fn validate_sweep(&self) -> Result<&SweepSpec> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("sweep mode needs a `sweep` section".into()))?;
        for (name, empty) in [
            ("qb_list", sweep.qb_list.is_empty()),
            ("qam_order_list", sweep.qam_order_list.is_empty()),
            ("scheme_list", sweep.scheme_list.is_empty()),
        ] {
            if empty {
                return Err(Error::Config(format!("sweep {name} is empty")));
            }
        }
        self.budget.validate()?;
        self.check_block_limit()?;
        let thresholds = self.thresholds()?;
        for &order in &sweep.qam_order_list {
            QamConstellation::new(order)?;
            thresholds.get(order)?;
            self.seeded_ofdm(order, 0).validate()?;
        }
        for &qb in &sweep.qb_list {
            self.quantizer_for(ModeKind::Pcm, qb).validate()?;
            self.quantizer_for(ModeKind::Dpcm, qb).validate()?;
        }
        Ok(sweep)
    }

    fn check_block_limit(&self) -> Result<()> {
        if self.block_limit.max_info_bits == 0 || self.block_limit.max_symbols == 0 {
            return Err(Error::Config("block_limit fields must be positive".into()));
        }
        Ok(())
    }
}

pub(crate) fn mode_kind(mode: &QuantMode) -> ModeKind {
    match mode {
        QuantMode::Pcm => ModeKind::Pcm,
        QuantMode::Dpcm { .. } => ModeKind::Dpcm,
    }
}
