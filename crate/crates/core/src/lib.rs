//! Accumulative iterative feedback code.
//!
//! The transmitter sends an uncoded message, then keeps sending
//! Huffman-compressed descriptions of where the previous forward transmission
//! went wrong. The receiver quantizes its bit LLRs, stores them, and echoes
//! them back over a lossless feedback link so the transmitter can locate the
//! errors. Once a forward transmission arrives clean, the receiver unwinds the
//! stored corrections back to the original message.
//!
//! Module map:
//!
//! - [`modem`]: Gray-labelled constellations, modulation and exact LLR demapping.
//! - [`channel`]: AWGN and quasi-static Rayleigh forward channels, lossless feedback.
//! - [`qllr`]: LLR quantizer, induced discrete channel, threshold optimization.
//! - [`srccode`]: Huffman coding of error-location subvectors.
//! - [`codec`]: transmitter/receiver halves, iteration loop and decoder.
//! - [`analysis`]: length/spectral-efficiency predictions and empirical metrics.

pub mod analysis;
pub mod bits;
pub mod channel;
pub mod codec;
pub mod error;
pub mod modem;
pub mod qllr;
pub mod seed;
pub mod srccode;

pub use bits::{BitWord, QllrWord};
pub use error::{Error, Result};
