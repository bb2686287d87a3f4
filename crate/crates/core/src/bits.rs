//! Bit words and quantized-LLR words.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

/// A sequence of bits, one byte per bit (each 0 or 1).
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitWord(Vec<u8>);

impl BitWord {
    pub fn new() -> Self {
        BitWord(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        BitWord(Vec::with_capacity(n))
    }

    pub fn zeros(n: usize) -> Self {
        BitWord(vec![0; n])
    }

    /// Builds a word from arbitrary bytes, mapping every nonzero byte to 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        BitWord(bits.into_iter().map(|b| (b != 0) as u8).collect())
    }

    /// Parses a string of '0'/'1' characters; other characters are skipped.
    pub fn from_str_bits(s: &str) -> Self {
        BitWord(
            s.chars()
                .filter_map(|c| match c {
                    '0' => Some(0),
                    '1' => Some(1),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push((bit != 0) as u8);
    }

    pub fn extend_from_slice(&mut self, bits: &[u8]) {
        self.0.extend(bits.iter().map(|&b| (b != 0) as u8));
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl Index<usize> for BitWord {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl FromIterator<u8> for BitWord {
    fn from_iter<T: IntoIterator<Item = u8>>(iter: T) -> Self {
        BitWord::from_bits(iter)
    }
}

impl From<Vec<u8>> for BitWord {
    fn from(v: Vec<u8>) -> Self {
        BitWord::from_bits(v)
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

/// Quantized LLRs, each in `{0, ±1, …, ±R}`. The sign is the hard decision
/// (positive means bit 0), the magnitude is the reliability class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QllrWord(Vec<i16>);

impl QllrWord {
    pub fn new(values: Vec<i16>) -> Self {
        QllrWord(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i16] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i16> + '_ {
        self.0.iter().copied()
    }

    /// Number of positions whose magnitude equals `class`.
    pub fn class_size(&self, class: usize) -> usize {
        self.0
            .iter()
            .filter(|z| z.unsigned_abs() as usize == class)
            .count()
    }

    pub fn has_erasures(&self) -> bool {
        self.0.contains(&0)
    }
}

impl Index<usize> for QllrWord {
    type Output = i16;
    fn index(&self, i: usize) -> &i16 {
        &self.0[i]
    }
}

impl From<Vec<i16>> for QllrWord {
    fn from(v: Vec<i16>) -> Self {
        QllrWord(v)
    }
}
