use std::path::PathBuf;

use aic_core::analysis::cdf_and_dmax;
use aic_core::channel::ChannelKind;
use aic_core::modem::Modulation;
use aic_core::qllr::{DEFAULT_MC_SAMPLES, DEFAULT_MC_SEED};
use aic_harness::cache::{design_dmc, obtain_dmc, DmcRequest};
use aic_harness::sweep::{read_trial_sets, write_json, write_outputs};
use aic_harness::{run_sweep, SweepConfig};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "aic", version, about = "Accumulative iterative feedback code simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print mutual-information-optimal quantizer thresholds per SNR.
    Thresholds(DesignArgs),
    /// Print the quantized channel model of one SNR as JSON.
    Dmc {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full Monte Carlo sweep.
    Sweep(SweepArgs),
    /// Recompute CDFs and the iteration budget from stored trial summaries.
    Cdf {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        bler_target: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long, default_value = "qpsk")]
    modulation: Modulation,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,0,2,4,6")]
    snr_db: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Optimize θ_0 instead of fixing it at zero.
    #[arg(long)]
    free_theta0: bool,
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    mc_samples: usize,
    #[arg(long, default_value_t = DEFAULT_MC_SEED)]
    mc_seed: u64,
}

impl DesignArgs {
    fn request(&self, snr_db: f64) -> DmcRequest {
        DmcRequest {
            modulation: self.modulation,
            snr_db,
            classes: self.classes,
            fix_theta0_zero: !self.free_theta0,
            mc_samples: self.mc_samples,
            mc_seed: self.mc_seed,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file whose entries override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    modulations: Option<Vec<Modulation>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    channel: Option<ChannelKind>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    segment_len: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    message_len: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bler_target: Option<f64>,
    #[arg(long)]
    free_theta0: bool,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    mc_seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    trials_out: Option<PathBuf>,
}

impl SweepArgs {
    fn into_config(self) -> Result<SweepConfig> {
        let d = SweepConfig::default();
        let cfg = SweepConfig {
            modulations: self.modulations.unwrap_or(d.modulations),
            snr_db: self.snr_db.unwrap_or(d.snr_db),
            channel: self.channel.unwrap_or(d.channel),
            classes: self.classes.unwrap_or(d.classes),
            segment_len: self.segment_len.unwrap_or(d.segment_len),
            message_len: self.message_len.unwrap_or(d.message_len),
            trials: self.trials.unwrap_or(d.trials),
            max_iterations: self.max_iterations.or(d.max_iterations),
            seed: self.seed.unwrap_or(d.seed),
            bler_target: self.bler_target.unwrap_or(d.bler_target),
            fix_theta0_zero: !self.free_theta0,
            mc_samples: self.mc_samples.unwrap_or(d.mc_samples),
            mc_seed: self.mc_seed.unwrap_or(d.mc_seed),
            workers: self.workers.or(d.workers),
            cache_dir: self.cache_dir.or(d.cache_dir),
            csv: self.csv.or(d.csv),
            json: self.json.or(d.json),
            trials_out: self.trials_out.or(d.trials_out),
        };
        Ok(match &self.config {
            Some(path) => cfg.with_file_overrides(path)?,
            None => cfg,
        })
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => write_json(path, value)?,
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Thresholds(args) => {
            for &snr in &args.snr_db {
                let model = design_dmc(&args.request(snr)).with_context(|| format!("SNR {snr} dB"))?;
                let theta: Vec<String> = model.thresholds.as_slice().iter().map(|t| format!("{t:.4}")).collect();
                println!("{snr:+.2}\t({}, inf)\talpha={:.6}", theta.join(", "), model.alpha);
            }
        }
        Command::Dmc { design, cache_dir, out } => {
            let snr = match design.snr_db.as_slice() {
                [s] => *s,
                _ => anyhow::bail!("dmc takes exactly one --snr-db value"),
            };
            let model = obtain_dmc(&design.request(snr), cache_dir.as_deref())?;
            emit(&model, out.as_ref())?;
        }
        Command::Sweep(args) => {
            let cfg = args.into_config()?;
            let out = run_sweep(&cfg)?;
            write_outputs(&cfg, &out)?;
            if cfg.csv.is_none() && cfg.json.is_none() {
                let mut w = csv::Writer::from_writer(std::io::stdout());
                for p in &out.report.points {
                    w.serialize(p.csv_row())?;
                }
                w.flush()?;
            }
        }
        Command::Cdf { trials, bler_target, out } => {
            let sets = read_trial_sets(&trials)?;
            let reports = sets
                .iter()
                .map(|s| cdf_and_dmax(&s.trials, bler_target))
                .collect::<aic_core::Result<Vec<_>>>()?;
            emit(&reports, out.as_ref())?;
        }
    }
    Ok(())
}
