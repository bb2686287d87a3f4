//! Sweep configuration: command-line defaults overlaid by an optional TOML
//! file.

use std::path::{Path, PathBuf};

use aic_core::channel::ChannelKind;
use aic_core::modem::Modulation;
use aic_core::qllr::{DEFAULT_MC_SAMPLES, DEFAULT_MC_SEED};
use aic_core::srccode::MAX_SEGMENT_LEN;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Codeword length targeted by the default message-length rule.
pub const TARGET_CODEWORD_BITS: f64 = 128.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub modulations: Vec<Modulation>,
    pub snr_db: Vec<f64>,
    pub channel: ChannelKind,
    /// Number of reliability classes `R`.
    pub classes: usize,
    /// Huffman segment length `H`.
    pub segment_len: usize,
    /// Message length per SNR point: empty selects `round(128·(1 − α))`,
    /// one value applies everywhere, otherwise one value per SNR.
    pub message_len: Vec<usize>,
    pub trials: usize,
    /// Largest retransmission index; unbounded when absent.
    pub max_iterations: Option<usize>,
    pub seed: u64,
    pub bler_target: f64,
    pub fix_theta0_zero: bool,
    /// Monte Carlo budget for QAM channel models.
    pub mc_samples: usize,
    pub mc_seed: u64,
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Per-trial summaries for later re-aggregation.
    pub trials_out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            modulations: vec![Modulation::Qpsk],
            snr_db: vec![-2.0, 0.0, 2.0, 4.0, 6.0],
            channel: ChannelKind::Awgn,
            classes: 2,
            segment_len: 8,
            message_len: Vec::new(),
            trials: 1000,
            max_iterations: None,
            seed: 1,
            bler_target: 1e-4,
            fix_theta0_zero: true,
            mc_samples: DEFAULT_MC_SAMPLES,
            mc_seed: DEFAULT_MC_SEED,
            workers: None,
            cache_dir: None,
            csv: None,
            json: None,
            trials_out: None,
        }
    }
}

/// One `(modulation, SNR)` grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub modulation: Modulation,
    pub snr_index: usize,
    pub snr_db: f64,
}

impl SweepConfig {
    /// Replaces every field present in the TOML file at `path`.
    pub fn with_file_overrides(self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        self.with_toml_overrides(&text)
            .map_err(|reason| HarnessError::Toml {
                path: path.to_path_buf(),
                reason,
            })
    }

    pub fn with_toml_overrides(self, text: &str) -> std::result::Result<Self, String> {
        let overrides: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut base = toml::Table::try_from(&self).map_err(|e| e.to_string())?;
        base.extend(overrides);
        base.try_into().map_err(|e: toml::de::Error| e.to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.modulations.is_empty() {
            return Err(HarnessError::config("modulations", "at least one modulation is required"));
        }
        if self.snr_db.is_empty() {
            return Err(HarnessError::config("snr_db", "the SNR grid is empty"));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(HarnessError::config("snr_db", format!("{s} is not finite")));
        }
        if self.classes == 0 {
            return Err(HarnessError::config("classes", "R must be at least 1"));
        }
        if !(1..=MAX_SEGMENT_LEN).contains(&self.segment_len) {
            return Err(HarnessError::config(
                "segment_len",
                format!("{} not in 1..={MAX_SEGMENT_LEN}", self.segment_len),
            ));
        }
        let n = self.message_len.len();
        if !(n == 0 || n == 1 || n == self.snr_db.len()) {
            return Err(HarnessError::config(
                "message_len",
                format!("{n} values for {} SNR points", self.snr_db.len()),
            ));
        }
        if self.message_len.contains(&0) {
            return Err(HarnessError::config("message_len", "K must be at least 1"));
        }
        if self.trials == 0 {
            return Err(HarnessError::config("trials", "at least one trial is required"));
        }
        if !(self.bler_target > 0.0 && self.bler_target < 1.0) {
            return Err(HarnessError::config("bler_target", format!("{} not in (0, 1)", self.bler_target)));
        }
        if self.mc_samples < 100_000 {
            return Err(HarnessError::config("mc_samples", "at least 1e5 samples are required"));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::config("workers", "worker count must be positive"));
        }
        Ok(())
    }

    /// Modulations outermost, SNR innermost.
    pub fn grid(&self) -> Vec<GridPoint> {
        self.modulations
            .iter()
            .flat_map(|&m| self.snr_db.iter().enumerate().map(move |(k, &s)| (m, k, s)))
            .enumerate()
            .map(|(index, (modulation, snr_index, snr_db))| GridPoint {
                index,
                modulation,
                snr_index,
                snr_db,
            })
            .collect()
    }

    /// Message length at `point` given the channel model's `α`.
    pub fn message_len_at(&self, point: &GridPoint, alpha: f64) -> usize {
        match self.message_len.len() {
            0 => ((TARGET_CODEWORD_BITS * (1.0 - alpha)).round() as usize).max(1),
            1 => self.message_len[0],
            _ => self.message_len[point.snr_index],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SweepConfig::default().validate().unwrap();
    }

    #[test]
    fn file_values_override() {
        let cfg = SweepConfig {
            trials: 5,
            classes: 1,
            ..Default::default()
        };
        let cfg = cfg
            .with_toml_overrides("trials = 20\nsnr_db = [0.0, 4.0]\nmodulations = [\"16qam\"]\nmax_iterations = 3\n")
            .unwrap();
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.classes, 1);
        assert_eq!(cfg.snr_db, vec![0.0, 4.0]);
        assert_eq!(cfg.modulations, vec![Modulation::Qam16]);
        assert_eq!(cfg.max_iterations, Some(3));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(SweepConfig::default().with_toml_overrides("trails = 3").is_err());
    }

    #[test]
    fn invalid_fields_named() {
        let cfg = SweepConfig {
            trials: 0,
            ..Default::default()
        };
        match cfg.validate() {
            Err(HarnessError::Config { field, .. }) => assert_eq!(field, "trials"),
            other => panic!("{other:?}"),
        }
        let cfg = SweepConfig {
            message_len: vec![54, 72],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grid_and_message_lengths() {
        let cfg = SweepConfig {
            modulations: vec![Modulation::Qpsk, Modulation::Qam16],
            snr_db: vec![0.0, 2.0, 4.0],
            message_len: vec![54, 72, 90],
            ..Default::default()
        };
        let g = cfg.grid();
        assert_eq!(g.len(), 6);
        assert_eq!(g[4].modulation, Modulation::Qam16);
        assert_eq!(g[4].snr_db, 2.0);
        assert_eq!(cfg.message_len_at(&g[4], 0.3), 72);
        let cfg = SweepConfig::default();
        assert_eq!(cfg.message_len_at(&cfg.grid()[0], 0.5), 64);
    }
}
