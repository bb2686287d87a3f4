//! Channel-model design and the on-disk model cache.

use std::path::{Path, PathBuf};

use aic_core::channel::snr_db_to_noise_var;
use aic_core::modem::{Modulation, ModulationScheme};
use aic_core::qllr::{design_law, optimize_thresholds_with, DmcModel, SearchOptions};
use log::{info, warn};

use crate::error::{HarnessError, Result};

/// Everything that determines a designed channel model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmcRequest {
    pub modulation: Modulation,
    pub snr_db: f64,
    pub classes: usize,
    pub fix_theta0_zero: bool,
    pub mc_samples: usize,
    pub mc_seed: u64,
}

impl DmcRequest {
    fn analytic(&self) -> bool {
        matches!(self.modulation, Modulation::Bpsk | Modulation::Qpsk)
    }

    /// Cache file name; Monte Carlo models include their budget and seed.
    pub fn file_name(&self) -> String {
        let source = if self.analytic() {
            "analytic".to_string()
        } else {
            format!("mc{}-{:x}", self.mc_samples, self.mc_seed)
        };
        let theta0 = if self.fix_theta0_zero { "t0" } else { "tfree" };
        format!(
            "dmc_{}_snr{:+.3}_R{}_{}_{}.json",
            self.modulation, self.snr_db, self.classes, theta0, source
        )
    }

    fn matches(&self, model: &DmcModel) -> bool {
        model.modulation == self.modulation
            && model.classes() == self.classes
            && (model.noise_var - snr_db_to_noise_var(self.snr_db)).abs() <= 1e-12 * model.noise_var
    }
}

/// Optimizes thresholds and derives the channel model. BPSK/QPSK use the
/// closed-form LLR law; QAM uses one Monte Carlo sample for both steps.
pub fn design_dmc(req: &DmcRequest) -> aic_core::Result<DmcModel> {
    let scheme = ModulationScheme::new(req.modulation);
    let noise_var = snr_db_to_noise_var(req.snr_db);
    let law = design_law(&scheme, noise_var, req.mc_samples, req.mc_seed)?;
    let thresholds = optimize_thresholds_with(law.as_ref(), req.classes, req.fix_theta0_zero, SearchOptions::default())?;
    let model = law.dmc(&thresholds);
    model.validate()?;
    Ok(model)
}

pub fn cache_dmc(path: &Path, model: &DmcModel) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(model).map_err(|e| HarnessError::json(path, e))?;
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn load_dmc(path: &Path) -> Result<DmcModel> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let model: DmcModel = serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))?;
    model.validate()?;
    Ok(model)
}

/// Loads the model from `cache_dir` when present and sound, otherwise
/// designs it (and stores it when a cache directory is given). A corrupt or
/// mismatched cache entry is replaced with a warning.
pub fn obtain_dmc(req: &DmcRequest, cache_dir: Option<&Path>) -> Result<DmcModel> {
    let path: Option<PathBuf> = cache_dir.map(|d| d.join(req.file_name()));
    if let Some(path) = path.as_deref().filter(|p| p.exists()) {
        match load_dmc(path) {
            Ok(model) if req.matches(&model) => {
                info!("loaded channel model {}", path.display());
                return Ok(model);
            }
            Ok(_) => warn!("{} does not match the request; recomputing", path.display()),
            Err(e) => warn!("unreadable cache entry ({e}); recomputing"),
        }
    }
    let model = design_dmc(req)?;
    if let Some(path) = &path {
        cache_dmc(path, &model)?;
    }
    Ok(model)
}
