//! The iterative encoder and the multi-stage decoder.
//!
//! The transmitter sends `x_0 = m`, learns the receiver's quantized LLRs over
//! the lossless feedback link, and computes where the receiver's hard
//! decisions are wrong. If anything is wrong (or erased) it Huffman-codes the
//! error locations into `x_{i+1}` and sends that instead. Once a word arrives
//! cleanly the receiver unwinds the chain from the last word back to `m`.
//!
//! [`Transmitter`] and [`Receiver`] hold disjoint state and interact only via
//! signals on the forward channel and quantized-LLR words on the feedback
//! link.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::{BitWord, QllrWord};
use crate::channel::{self, ChannelInstance, Reception, SignalSpace};
use crate::error::{Error, Result};
use crate::modem::ModulationScheme;
use crate::qllr::{quantize, DmcModel, ThresholdVector};
use crate::srccode::{source_decode, source_encode, CodebookSet};

/// Iteration cap applied when no maximum is configured.
pub const UNBOUNDED_ITERATION_CAP: usize = 10_000;

/// Everything both ends agree on before a message is sent.
#[derive(Debug, Clone)]
pub struct EncoderConfig {
    scheme: ModulationScheme,
    dmc: DmcModel,
    segment_len: usize,
    max_iterations: Option<usize>,
    message_len: usize,
    books: CodebookSet,
}

impl EncoderConfig {
    /// `max_iterations` is the largest retransmission index `D_max`; `None`
    /// means unbounded.
    pub fn new(
        scheme: ModulationScheme,
        dmc: DmcModel,
        segment_len: usize,
        max_iterations: Option<usize>,
        message_len: usize,
    ) -> Result<Self> {
        if message_len == 0 {
            return Err(Error::param("message_len", "K must be at least 1"));
        }
        if dmc.modulation != scheme.kind() {
            return Err(Error::param(
                "dmc",
                format!("model is for {} but scheme is {}", dmc.modulation, scheme.kind()),
            ));
        }
        let books = CodebookSet::from_dmc(&dmc, segment_len)?;
        Ok(EncoderConfig {
            scheme,
            dmc,
            segment_len,
            max_iterations,
            message_len,
            books,
        })
    }

    pub fn scheme(&self) -> &ModulationScheme {
        &self.scheme
    }

    pub fn dmc(&self) -> &DmcModel {
        &self.dmc
    }

    pub fn thresholds(&self) -> &ThresholdVector {
        &self.dmc.thresholds
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    pub fn max_iterations(&self) -> Option<usize> {
        self.max_iterations
    }

    pub fn message_len(&self) -> usize {
        self.message_len
    }

    pub fn codebooks(&self) -> &CodebookSet {
        &self.books
    }

    fn signal_space(&self) -> SignalSpace {
        if self.scheme.kind().is_real() {
            SignalSpace::Real
        } else {
            SignalSpace::Complex
        }
    }

    fn iteration_limit(&self) -> usize {
        self.max_iterations.unwrap_or(UNBOUNDED_ITERATION_CAP)
    }
}

/// Bit detector: positive quantized LLR means 0, negative means 1. Erased
/// positions come out as 0 and must be overwritten by the caller.
pub fn hard_decision(z: &QllrWord) -> BitWord {
    z.iter().map(|v| u8::from(v < 0)).collect()
}

/// What the transmitter learns from one feedback word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackStep {
    /// `x̄ ⊕ x` on non-erased positions, 0 on erased ones.
    pub errors: BitWord,
    /// No detection errors and no erasures.
    pub clean: bool,
    /// The next forward word, present when not clean.
    pub next: Option<BitWord>,
}

/// Error locations, clean flag and next word for transmitted word `x` and
/// its feedback `z`.
pub fn process_feedback(x: &BitWord, z: &QllrWord, books: &CodebookSet) -> Result<FeedbackStep> {
    if x.len() != z.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: z.len(),
        });
    }
    let errors: BitWord = x
        .iter()
        .zip(z.iter())
        .map(|(b, v)| if v == 0 { 0 } else { b ^ u8::from(v < 0) })
        .collect();
    let clean = errors.is_all_zero() && !z.has_erasures();
    let next = if clean {
        None
    } else {
        Some(source_encode(&errors, x, z, books)?)
    };
    Ok(FeedbackStep { errors, clean, next })
}

/// Transmitting half of the encoder.
#[derive(Debug)]
pub struct Transmitter<'a> {
    cfg: &'a EncoderConfig,
    word: BitWord,
    iteration: usize,
}

impl<'a> Transmitter<'a> {
    pub fn new(cfg: &'a EncoderConfig, message: BitWord) -> Result<Self> {
        if message.len() != cfg.message_len {
            return Err(Error::LengthMismatch {
                expected: cfg.message_len,
                actual: message.len(),
            });
        }
        Ok(Transmitter {
            cfg,
            word: message,
            iteration: 0,
        })
    }

    pub fn word(&self) -> &BitWord {
        &self.word
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Modulated signals of the current word.
    pub fn signals(&self) -> Result<Vec<Complex64>> {
        self.cfg.scheme.modulate(&self.word)
    }

    /// Consumes a feedback word; on a non-clean outcome the next word becomes
    /// current.
    pub fn on_feedback(&mut self, z: &QllrWord) -> Result<FeedbackStep> {
        let step = process_feedback(&self.word, z, &self.cfg.books)?;
        if let Some(next) = &step.next {
            self.word = next.clone();
            self.iteration += 1;
        }
        Ok(step)
    }
}

/// Receiving half: demodulates, quantizes, stores every quantized-LLR word
/// and later decodes.
#[derive(Debug)]
pub struct Receiver<'a> {
    cfg: &'a EncoderConfig,
    stored: Vec<QllrWord>,
}

impl<'a> Receiver<'a> {
    pub fn new(cfg: &'a EncoderConfig) -> Self {
        Receiver {
            cfg,
            stored: Vec::new(),
        }
    }

    /// Quantized LLRs of an `n_bits`-bit word; the result is stored and
    /// returned for the feedback link.
    pub fn receive(&mut self, rx: &Reception, noise_var: f64, n_bits: usize) -> Result<QllrWord> {
        let llrs = self
            .cfg
            .scheme
            .compute_llrs(&rx.signals, noise_var, rx.fading, n_bits)?;
        let z = quantize(&llrs, self.cfg.thresholds());
        self.stored.push(z.clone());
        Ok(channel::feedback(z))
    }

    pub fn stored(&self) -> &[QllrWord] {
        &self.stored
    }

    pub fn decode(&self) -> Result<BitWord> {
        decode(&self.stored, self.cfg)
    }
}

/// Recovers `m` from the stored quantized-LLR words `z_0 … z_D`, the last of
/// which must be clean.
pub fn decode(stored: &[QllrWord], cfg: &EncoderConfig) -> Result<BitWord> {
    let (last, earlier) = stored.split_last().ok_or(Error::NotAcknowledged)?;
    if last.has_erasures() {
        return Err(Error::Corrupt("final word has erased positions".into()));
    }
    let mut x = hard_decision(last);
    for z in earlier.iter().rev() {
        let (e, raw) = source_decode(&x, z, &cfg.books)?;
        let mut raw = raw.iter();
        x = z
            .iter()
            .zip(e.iter())
            .map(|(v, err)| {
                if v == 0 {
                    raw.next().expect("raw bit count checked by source_decode")
                } else {
                    u8::from(v < 0) ^ err
                }
            })
            .collect();
    }
    if x.len() != cfg.message_len {
        return Err(Error::LengthMismatch {
            expected: cfg.message_len,
            actual: x.len(),
        });
    }
    Ok(x)
}

/// One forward transmission and its feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub word: BitWord,
    pub n_bits: usize,
    pub qllr: QllrWord,
    pub fading: f64,
    /// Channel uses `L_i = ceil(N_i / Q)`.
    pub symbols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    /// Word `iterations` was received cleanly.
    Ack { iterations: usize },
    Nack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub message: BitWord,
    pub records: Vec<IterationRecord>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoded: Option<BitWord>,
    /// Set when an acknowledged transcript failed to decode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_error: Option<String>,
}

/// Compact replay record of a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: Vec<usize>,
    pub d: Option<usize>,
    pub status: Status,
    pub message: BitWord,
    pub decoded: Option<BitWord>,
}

impl Transcript {
    /// Total forward bits `N = Σ N_i`.
    pub fn total_bits(&self) -> usize {
        self.records.iter().map(|r| r.n_bits).sum()
    }

    pub fn total_symbols(&self) -> usize {
        self.records.iter().map(|r| r.symbols).sum()
    }

    /// `D` for an acknowledged transcript.
    pub fn iterations(&self) -> Option<usize> {
        match self.status {
            Status::Ack { iterations } => Some(iterations),
            Status::Nack => None,
        }
    }

    pub fn is_ack(&self) -> bool {
        matches!(self.status, Status::Ack { .. })
    }

    /// NACK, failed decode or wrong output.
    pub fn block_error(&self) -> bool {
        self.decoded.as_ref() != Some(&self.message)
    }

    pub fn trace(&self) -> TraceRecord {
        TraceRecord {
            n: self.records.iter().map(|r| r.n_bits).collect(),
            d: self.iterations(),
            status: self.status,
            message: self.message.clone(),
            decoded: self.decoded.clone(),
        }
    }
}

/// Result of [`encode_iteration`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub qllr: QllrWord,
    pub step: FeedbackStep,
    pub fading: f64,
    pub symbols: usize,
}

/// Sends `x` over iteration `i` of `ch` and processes the feedback.
pub fn encode_iteration(x: &BitWord, ch: &ChannelInstance, cfg: &EncoderConfig, i: usize) -> Result<IterationOutcome> {
    let signals = cfg.scheme.modulate(x)?;
    let rx = ch.transmit(&signals, i, cfg.signal_space());
    let llrs = cfg.scheme.compute_llrs(&rx.signals, ch.noise_var(), rx.fading, x.len())?;
    let z = channel::feedback(quantize(&llrs, cfg.thresholds()));
    let step = process_feedback(x, &z, &cfg.books)?;
    Ok(IterationOutcome {
        qllr: z,
        step,
        fading: rx.fading,
        symbols: signals.len(),
    })
}

/// Runs the full protocol for `message` and decodes on acknowledgment.
pub fn encode_message(message: &BitWord, ch: &ChannelInstance, cfg: &EncoderConfig) -> Result<Transcript> {
    let mut tx = Transmitter::new(cfg, message.clone())?;
    let mut rx = Receiver::new(cfg);
    let mut records = Vec::new();
    let limit = cfg.iteration_limit();
    let status = loop {
        let i = tx.iteration();
        let word = tx.word().clone();
        let signals = tx.signals()?;
        let reception = ch.transmit(&signals, i, cfg.signal_space());
        let z = rx.receive(&reception, ch.noise_var(), word.len())?;
        let step = tx.on_feedback(&z)?;
        records.push(IterationRecord {
            index: i,
            n_bits: word.len(),
            word,
            qllr: z,
            fading: reception.fading,
            symbols: signals.len(),
        });
        if step.clean {
            break Status::Ack { iterations: i };
        }
        if i >= limit {
            break Status::Nack;
        }
    };
    let (decoded, decode_error) = match status {
        Status::Ack { .. } => match rx.decode() {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        },
        Status::Nack => (None, None),
    };
    Ok(Transcript {
        message: message.clone(),
        records,
        status,
        decoded,
        decode_error,
    })
}
