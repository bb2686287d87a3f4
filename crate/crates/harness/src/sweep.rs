//! Parallel Monte Carlo evaluation of a sweep grid.
//!
//! Trial `t` of grid point `p` under master seed `s` draws its message from
//! the stream keyed `(s, p, t, 3)` and its channel from seed `(s, p, t)`.
//! Trials therefore run in any order on any number of workers and are
//! collected by index, so results are independent of parallelism.

use std::path::Path;

use aic_core::analysis::{MetricsReport, PointMetrics, PointSpec, TrialSummary};
use aic_core::channel::ChannelInstance;
use aic_core::codec::{encode_message, EncoderConfig};
use aic_core::modem::ModulationScheme;
use aic_core::qllr::DmcModel;
use aic_core::{seed, BitWord};
use log::info;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{obtain_dmc, DmcRequest};
use crate::config::{GridPoint, SweepConfig};
use crate::error::{HarnessError, Result};

const MESSAGE_STREAM: u64 = 3;

/// Raw per-trial results of one grid point, kept for re-aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub spec: PointSpec,
    pub alpha: f64,
    pub trials: Vec<TrialSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub report: MetricsReport,
    pub trial_sets: Vec<TrialSet>,
}

pub fn random_message(master: u64, point: usize, trial: usize, len: usize) -> BitWord {
    let mut rng = seed::rng(&[master, point as u64, trial as u64, MESSAGE_STREAM]);
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

/// Runs one complete encode/decode exchange.
pub fn run_trial(
    enc: &EncoderConfig,
    cfg: &SweepConfig,
    point: &GridPoint,
    trial: usize,
) -> aic_core::Result<TrialSummary> {
    let message = random_message(cfg.seed, point.index, trial, enc.message_len());
    let ch_seed = seed::derive(&[cfg.seed, point.index as u64, trial as u64]);
    let ch = ChannelInstance::from_snr_db(cfg.channel, point.snr_db, ch_seed)?;
    let transcript = encode_message(&message, &ch, enc)?;
    Ok(TrialSummary::from(&transcript))
}

fn dmc_request(cfg: &SweepConfig, point: &GridPoint) -> DmcRequest {
    DmcRequest {
        modulation: point.modulation,
        snr_db: point.snr_db,
        classes: cfg.classes,
        fix_theta0_zero: cfg.fix_theta0_zero,
        mc_samples: cfg.mc_samples,
        mc_seed: cfg.mc_seed,
    }
}

/// Trials of one grid point with a prepared channel model.
pub fn run_point(cfg: &SweepConfig, point: &GridPoint, dmc: DmcModel) -> Result<TrialSet> {
    let alpha = aic_core::analysis::alpha(&dmc)?;
    let message_len = cfg.message_len_at(point, alpha);
    let scheme = ModulationScheme::new(point.modulation);
    let enc = EncoderConfig::new(scheme, dmc, cfg.segment_len, cfg.max_iterations, message_len)?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(&enc, cfg, point, t))
        .collect::<aic_core::Result<Vec<_>>>()?;
    Ok(TrialSet {
        spec: PointSpec {
            snr_db: point.snr_db,
            modulation: point.modulation.to_string(),
            bits_per_symbol: point.modulation.order(),
            classes: cfg.classes,
            segment_len: cfg.segment_len,
            message_len,
            max_iterations: cfg.max_iterations,
            seed: cfg.seed,
        },
        alpha,
        trials,
    })
}

pub fn aggregate(set: &TrialSet, bler_target: f64) -> Result<PointMetrics> {
    Ok(PointMetrics::from_trials(set.spec.clone(), set.alpha, &set.trials, bler_target)?)
}

/// Evaluates every grid point. Models are designed on AWGN at the point's
/// (average) SNR, also for fading channels.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let body = || -> Result<SweepOutput> {
        let mut report = MetricsReport::default();
        let mut trial_sets = Vec::new();
        for point in cfg.grid() {
            let dmc = obtain_dmc(&dmc_request(cfg, &point), cfg.cache_dir.as_deref())?;
            let set = run_point(cfg, &point, dmc)?;
            let metrics = aggregate(&set, cfg.bler_target)?;
            info!(
                "{} {:+.2} dB: SE {:.4} (bound {:.4}), mean D {:.2}",
                point.modulation, point.snr_db, metrics.se, metrics.se_ub, metrics.mean_d
            );
            report.points.push(metrics);
            trial_sets.push(set);
        }
        Ok(SweepOutput { report, trial_sets })
    };
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?
            .install(body),
        None => body(),
    }
}

pub fn write_csv(path: &Path, report: &MetricsReport) -> Result<()> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for p in &report.points {
        w.serialize(p.csv_row()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::json(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

pub fn read_trial_sets(path: &Path) -> Result<Vec<TrialSet>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))
}

/// Writes every output path named in the config.
pub fn write_outputs(cfg: &SweepConfig, out: &SweepOutput) -> Result<()> {
    if let Some(path) = &cfg.csv {
        write_csv(path, &out.report)?;
    }
    if let Some(path) = &cfg.json {
        write_json(path, &out.report)?;
    }
    if let Some(path) = &cfg.trials_out {
        write_json(path, &out.trial_sets)?;
    }
    Ok(())
}
