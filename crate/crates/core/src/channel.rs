//! Forward channel models and the lossless feedback link.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bits::QllrWord;
use crate::error::{Error, Result};
use crate::seed;

const NOISE_STREAM: u64 = 1;
const FADING_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    /// Quasi-static Rayleigh fading: one gain per transmitted word.
    Qsrf,
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "qsrf" | "rayleigh" => Ok(ChannelKind::Qsrf),
            other => Err(Error::param("channel", format!("unknown channel {other:?}"))),
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Qsrf => "qsrf",
        })
    }
}

/// Whether the transmitted signals use one real dimension or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalSpace {
    Real,
    Complex,
}

/// Output of one forward transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Reception {
    pub signals: Vec<Complex64>,
    /// Real fading gain applied to the whole word (1.0 on AWGN).
    pub fading: f64,
}

/// One trial's forward channel. All randomness is a pure function of
/// `(seed, iteration)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    kind: ChannelKind,
    noise_var: f64,
    seed: u64,
}

impl ChannelInstance {
    pub fn new(kind: ChannelKind, noise_var: f64, seed: u64) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::param("noise_var", format!("{noise_var} must be positive and finite")));
        }
        Ok(ChannelInstance {
            kind,
            noise_var,
            seed,
        })
    }

    /// Channel with noise variance `10^(-snr_db/10)`, i.e. unit signal energy.
    pub fn from_snr_db(kind: ChannelKind, snr_db: f64, seed: u64) -> Result<Self> {
        Self::new(kind, snr_db_to_noise_var(snr_db), seed)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fading gain of iteration `i`. Rayleigh with `E[h²] = 1` on QSRF.
    pub fn fading(&self, i: usize) -> f64 {
        match self.kind {
            ChannelKind::Awgn => 1.0,
            ChannelKind::Qsrf => {
                let mut rng = seed::rng(&[self.seed, FADING_STREAM, i as u64]);
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                ((x * x + y * y) / 2.0).sqrt()
            }
        }
    }

    /// `h_i² / σ²`.
    pub fn snr_of(&self, i: usize) -> f64 {
        let h = self.fading(i);
        h * h / self.noise_var
    }

    /// `y = h_i·s + ν`. On a real signal space the noise is real with
    /// variance `σ²`; on a complex one each of I and Q gets `σ²/2`.
    pub fn transmit(&self, signals: &[Complex64], i: usize, space: SignalSpace) -> Reception {
        let fading = self.fading(i);
        let mut rng = seed::rng(&[self.seed, NOISE_STREAM, i as u64]);
        let out = match space {
            SignalSpace::Real => {
                let sd = self.noise_var.sqrt();
                signals
                    .iter()
                    .map(|s| {
                        let n: f64 = StandardNormal.sample(&mut rng);
                        s * fading + Complex64::new(sd * n, 0.0)
                    })
                    .collect()
            }
            SignalSpace::Complex => {
                let sd = (self.noise_var / 2.0).sqrt();
                signals
                    .iter()
                    .map(|s| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        s * fading + Complex64::new(sd * re, sd * im)
                    })
                    .collect()
            }
        };
        Reception {
            signals: out,
            fading,
        }
    }
}

/// The feedback link never corrupts what it carries.
pub fn feedback(z: QllrWord) -> QllrWord {
    z
}

pub fn snr_db_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn noise_var_to_snr_db(noise_var: f64) -> f64 {
    -10.0 * noise_var.log10()
}
