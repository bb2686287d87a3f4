//! Length and efficiency predictions, and empirical metrics over trials.

use serde::{Deserialize, Serialize};

use crate::codec::Transcript;
use crate::error::{Error, Result};
use crate::qllr::{binary_entropy, DmcModel};

/// Expected length ratio `α = Σ H₂(π_r)·ρ_r` of consecutive forward words.
pub fn alpha(dmc: &DmcModel) -> Result<f64> {
    alpha_from(&dmc.rho, &dmc.pi)
}

/// `α` from class masses and class error probabilities.
pub fn alpha_from(rho: &[f64], pi: &[f64]) -> Result<f64> {
    if rho.len() != pi.len() {
        return Err(Error::LengthMismatch {
            expected: rho.len(),
            actual: pi.len(),
        });
    }
    let a: f64 = rho.iter().zip(pi).map(|(r, p)| binary_entropy(*p) * r).sum();
    check_alpha(a)?;
    Ok(a)
}

fn check_alpha(a: f64) -> Result<()> {
    if (0.0..1.0).contains(&a) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(a))
    }
}

/// `Σ_{i=0}^{D_max} α^i K`; `K / (1 − α)` when unbounded.
pub fn expected_length(message_len: usize, alpha: f64, max_iterations: Option<usize>) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(message_len as f64 * geometric(alpha, max_iterations))
}

/// `(1 − α)·Q / (1 − α^{D_max+1})`.
pub fn se_upper_bound(alpha: f64, bits_per_symbol: usize, max_iterations: Option<usize>) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(bits_per_symbol as f64 / geometric(alpha, max_iterations))
}

fn geometric(alpha: f64, max_iterations: Option<usize>) -> f64 {
    match max_iterations {
        Some(d) => (1.0 - alpha.powi(d as i32 + 1)) / (1.0 - alpha),
        None => 1.0 / (1.0 - alpha),
    }
}

/// The per-trial quantities the metrics need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSummary {
    /// `N_i` of every transmitted word.
    pub word_bits: Vec<usize>,
    pub symbols: usize,
    /// `D` when acknowledged.
    pub iterations: Option<usize>,
    pub block_error: bool,
    /// Acknowledged but the decoder failed.
    pub decode_failure: bool,
}

impl TrialSummary {
    pub fn total_bits(&self) -> usize {
        self.word_bits.iter().sum()
    }
}

impl From<&Transcript> for TrialSummary {
    fn from(t: &Transcript) -> Self {
        TrialSummary {
            word_bits: t.records.iter().map(|r| r.n_bits).collect(),
            symbols: t.total_symbols(),
            iterations: t.iterations(),
            block_error: t.block_error(),
            decode_failure: t.decode_error.is_some(),
        }
    }
}

/// Mean total forward bits over all trials.
pub fn mean_total_bits(trials: &[TrialSummary]) -> f64 {
    trials.iter().map(|t| t.total_bits() as f64).sum::<f64>() / trials.len() as f64
}

pub fn bler(trials: &[TrialSummary]) -> f64 {
    trials.iter().filter(|t| t.block_error).count() as f64 / trials.len() as f64
}

/// `K·Q / E[N] · (1 − BLER)`.
pub fn empirical_se(trials: &[TrialSummary], message_len: usize, bits_per_symbol: usize) -> f64 {
    if trials.is_empty() {
        return f64::NAN;
    }
    (message_len * bits_per_symbol) as f64 / mean_total_bits(trials) * (1.0 - bler(trials))
}

/// One step of an empirical CDF: `P(X ≤ x) = value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub x: usize,
    pub value: f64,
}

/// Empirical step CDF over all `total` trials; missing values (NACKs) keep
/// the curve below 1.
pub fn empirical_cdf(values: impl IntoIterator<Item = usize>, total: usize) -> Vec<CdfPoint> {
    let mut v: Vec<usize> = values.into_iter().collect();
    v.sort_unstable();
    let mut out: Vec<CdfPoint> = Vec::new();
    for (k, x) in v.iter().enumerate() {
        let value = (k + 1) as f64 / total as f64;
        match out.last_mut() {
            Some(last) if last.x == *x => last.value = value,
            _ => out.push(CdfPoint { x: *x, value }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfReport {
    pub cdf_d: Vec<CdfPoint>,
    pub cdf_n: Vec<CdfPoint>,
    pub bler_target: f64,
    /// Smallest `x` with `CDF_D(x) ≥ 1 − BLER_T`.
    pub d_max: Option<usize>,
    /// False when the target is below the resolution of the trial count.
    pub reliable: bool,
}

pub fn cdf_and_dmax(trials: &[TrialSummary], bler_target: f64) -> Result<CdfReport> {
    if !(bler_target > 0.0 && bler_target < 1.0) {
        return Err(Error::param("bler_target", format!("{bler_target} not in (0, 1)")));
    }
    if trials.is_empty() {
        return Err(Error::param("trials", "no trials to aggregate"));
    }
    let n = trials.len();
    let cdf_d = empirical_cdf(trials.iter().filter_map(|t| t.iterations), n);
    let cdf_n = empirical_cdf(trials.iter().map(TrialSummary::total_bits), n);
    // Compare on counts to avoid rounding at exact quantiles.
    let needed = ((1.0 - bler_target) * n as f64 - 1e-9).ceil();
    let d_max = cdf_d
        .iter()
        .find(|p| (p.value * n as f64).round() >= needed)
        .map(|p| p.x);
    Ok(CdfReport {
        cdf_d,
        cdf_n,
        bler_target,
        d_max,
        reliable: bler_target >= 1.0 / n as f64,
    })
}

/// Identification of a simulated operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub snr_db: f64,
    pub modulation: String,
    pub bits_per_symbol: usize,
    pub classes: usize,
    pub segment_len: usize,
    pub message_len: usize,
    pub max_iterations: Option<usize>,
    pub seed: u64,
}

/// Metrics of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub spec: PointSpec,
    pub trials: usize,
    pub se: f64,
    pub se_ub: f64,
    pub alpha: f64,
    pub bler: f64,
    /// Mean `D` over acknowledged trials.
    pub mean_d: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// `N_max / N_min`.
    pub dispersion: f64,
    pub en_sim: f64,
    pub en_eq41: f64,
    pub mean_symbols: f64,
    pub decode_failures: usize,
    /// `E[N_i]`, counting `N_i = 0` for trials that stopped earlier.
    pub mean_word_bits: Vec<f64>,
    pub cdf: CdfReport,
}

impl PointMetrics {
    pub fn from_trials(spec: PointSpec, dmc_alpha: f64, trials: &[TrialSummary], bler_target: f64) -> Result<Self> {
        let cdf = cdf_and_dmax(trials, bler_target)?;
        let n = trials.len() as f64;
        let acked: Vec<usize> = trials.iter().filter_map(|t| t.iterations).collect();
        let mean_d = if acked.is_empty() {
            f64::NAN
        } else {
            acked.iter().sum::<usize>() as f64 / acked.len() as f64
        };
        let totals = trials.iter().map(TrialSummary::total_bits);
        let n_min = totals.clone().min().unwrap_or(0);
        let n_max = totals.max().unwrap_or(0);
        let depth = trials.iter().map(|t| t.word_bits.len()).max().unwrap_or(0);
        let mut mean_word_bits = vec![0.0; depth];
        for t in trials {
            for (m, b) in mean_word_bits.iter_mut().zip(&t.word_bits) {
                *m += *b as f64;
            }
        }
        for m in &mut mean_word_bits {
            *m /= n;
        }
        Ok(PointMetrics {
            se: empirical_se(trials, spec.message_len, spec.bits_per_symbol),
            se_ub: se_upper_bound(dmc_alpha, spec.bits_per_symbol, spec.max_iterations)?,
            en_eq41: expected_length(spec.message_len, dmc_alpha, spec.max_iterations)?,
            alpha: dmc_alpha,
            bler: bler(trials),
            mean_d,
            n_min,
            n_max,
            dispersion: n_max as f64 / n_min as f64,
            en_sim: mean_total_bits(trials),
            mean_symbols: trials.iter().map(|t| t.symbols as f64).sum::<f64>() / n,
            decode_failures: trials.iter().filter(|t| t.decode_failure).count(),
            mean_word_bits,
            trials: trials.len(),
            spec,
            cdf,
        })
    }

    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            snr_db: self.spec.snr_db,
            modulation: self.spec.modulation.clone(),
            classes: self.spec.classes,
            segment_len: self.spec.segment_len,
            message_len: self.spec.message_len,
            trials: self.trials,
            se: self.se,
            se_ub: self.se_ub,
            alpha: self.alpha,
            bler: self.bler,
            mean_d: self.mean_d,
            n_min: self.n_min,
            n_max: self.n_max,
            dispersion: self.dispersion,
            en_sim: self.en_sim,
            en_eq41: self.en_eq41,
        }
    }
}

/// One CSV line; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub snr_db: f64,
    pub modulation: String,
    #[serde(rename = "R")]
    pub classes: usize,
    #[serde(rename = "H")]
    pub segment_len: usize,
    #[serde(rename = "K")]
    pub message_len: usize,
    pub trials: usize,
    pub se: f64,
    pub se_ub: f64,
    pub alpha: f64,
    pub bler: f64,
    #[serde(rename = "mean_D")]
    pub mean_d: f64,
    #[serde(rename = "N_min")]
    pub n_min: usize,
    #[serde(rename = "N_max")]
    pub n_max: usize,
    pub dispersion: f64,
    pub en_sim: f64,
    pub en_eq41: f64,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "snr_db", "modulation", "R", "H", "K", "trials", "se", "se_ub", "alpha", "bler", "mean_D", "N_min", "N_max",
    "dispersion", "en_sim", "en_eq41",
];

/// All points of a sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub points: Vec<PointMetrics>,
}
