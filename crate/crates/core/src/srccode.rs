//! Huffman coding of error-location vectors.
//!
//! The error-location vector of one iteration is split by the magnitude of
//! the corresponding quantized LLR. Class `r ≥ 1` holds bits that are '1'
//! with probability `π_r`; each class is cut into `H`-bit segments and coded
//! with a Huffman code built for i.i.d. Bernoulli(`π_r`) segments. Bits of
//! erased positions (class 0) carry no error information; the raw transmitted
//! bits at those positions are appended after the coded classes instead.
//!
//! Both sides derive identical plans from the quantized-LLR word and
//! identical codebooks from `(π_r, H)`, so nothing about the code itself is
//! ever transmitted.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::bits::{BitWord, QllrWord};
use crate::error::{Error, Result};
use crate::qllr::DmcModel;

pub const MAX_SEGMENT_LEN: usize = 16;

/// Probabilities handed to the code builder are clamped to this distance
/// from 0 and 1 so that segment probabilities stay representable.
const PI_FLOOR: f64 = 1e-12;

const LEAF: u32 = 1 << 31;

/// Prefix-free code over all `2^H` segments of length `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct HuffmanCodebook {
    segment_len: usize,
    pi: f64,
    /// Codeword of each segment value (segment bits MSB-first).
    codes: Vec<Vec<u8>>,
    /// Decode trie: `trie[node][bit]` is a child node index or `LEAF | segment`.
    trie: Vec<[u32; 2]>,
}

#[derive(Debug, PartialEq)]
struct HeapKey {
    prob: f64,
    min_segment: u32,
}

impl Eq for HeapKey {}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .total_cmp(&other.prob)
            .then(self.min_segment.cmp(&other.min_segment))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Probability of a segment with `ones` set bits among `len`.
pub fn segment_probability(pi: f64, len: usize, ones: usize) -> f64 {
    pi.powi(ones as i32) * (1.0 - pi).powi((len - ones) as i32)
}

impl HuffmanCodebook {
    /// Builds the Huffman code for Bernoulli(`pi`) segments of `segment_len`
    /// bits. Ties are broken by (probability, smallest segment value in the
    /// subtree); the node popped first becomes the 0-branch.
    pub fn build(pi: f64, segment_len: usize) -> Result<Self> {
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::DegenerateSource(pi));
        }
        if !(1..=MAX_SEGMENT_LEN).contains(&segment_len) {
            return Err(Error::param(
                "segment_len",
                format!("{segment_len} not in 1..={MAX_SEGMENT_LEN}"),
            ));
        }
        let symbols = 1usize << segment_len;
        let probs: Vec<f64> = (0..symbols)
            .map(|s| segment_probability(pi, segment_len, (s as u32).count_ones() as usize))
            .collect();

        // Tree nodes: leaves are 0..symbols, internal nodes follow.
        let mut children: Vec<Option<[usize; 2]>> = vec![None; symbols];
        let mut heap = BinaryHeap::with_capacity(symbols);
        for (s, &p) in probs.iter().enumerate() {
            heap.push(Reverse((HeapKey { prob: p, min_segment: s as u32 }, s)));
        }
        while heap.len() > 1 {
            let Reverse((ka, a)) = heap.pop().expect("heap has two entries");
            let Reverse((kb, b)) = heap.pop().expect("heap has two entries");
            let id = children.len();
            children.push(Some([a, b]));
            heap.push(Reverse((
                HeapKey {
                    prob: ka.prob + kb.prob,
                    min_segment: ka.min_segment.min(kb.min_segment),
                },
                id,
            )));
        }
        let root = heap.pop().expect("non-empty alphabet").0 .1;

        let mut codes = vec![Vec::new(); symbols];
        let mut trie: Vec<[u32; 2]> = Vec::with_capacity(symbols);
        // Depth-first walk assigning trie slots to internal nodes.
        let mut stack = vec![(root, Vec::new(), None::<(usize, usize)>)];
        while let Some((node, prefix, parent)) = stack.pop() {
            let slot = match children[node] {
                None => {
                    codes[node] = prefix;
                    LEAF | node as u32
                }
                Some([zero, one]) => {
                    let idx = trie.len();
                    trie.push([0, 0]);
                    let mut p1 = prefix.clone();
                    p1.push(1);
                    let mut p0 = prefix;
                    p0.push(0);
                    stack.push((one, p1, Some((idx, 1))));
                    stack.push((zero, p0, Some((idx, 0))));
                    idx as u32
                }
            };
            if let Some((parent, bit)) = parent {
                trie[parent][bit] = slot;
            }
        }
        // A single-symbol alphabet cannot occur (segment_len ≥ 1 gives ≥ 2 leaves).
        Ok(HuffmanCodebook {
            segment_len,
            pi,
            codes,
            trie,
        })
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn codeword(&self, segment: usize) -> &[u8] {
        &self.codes[segment]
    }

    pub fn codewords(&self) -> &[Vec<u8>] {
        &self.codes
    }

    /// `Σ P(f)·len(code(f))`.
    pub fn expected_length(&self) -> f64 {
        self.codes
            .iter()
            .enumerate()
            .map(|(s, c)| {
                segment_probability(self.pi, self.segment_len, (s as u32).count_ones() as usize)
                    * c.len() as f64
            })
            .sum()
    }

    /// Kraft sum `Σ 2^-len`; exactly 1 for a full binary tree.
    pub fn kraft_sum(&self) -> f64 {
        self.codes.iter().map(|c| 0.5f64.powi(c.len() as i32)).sum()
    }

    /// Diagnostic listing: one `segment codeword` line per segment, sorted by
    /// segment value.
    pub fn dump(&self) -> String {
        let mut out = format!("# huffman H={} pi={:e}\n", self.segment_len, self.pi);
        for (s, c) in self.codes.iter().enumerate() {
            let code: String = c.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect();
            let _ = writeln!(out, "{:0width$b} {}", s, code, width = self.segment_len);
        }
        out
    }

    /// Codes `bits`, zero-padding the tail to a multiple of `H`.
    pub fn encode(&self, bits: &[u8], out: &mut BitWord) {
        for chunk in bits.chunks(self.segment_len) {
            let mut seg = 0usize;
            for k in 0..self.segment_len {
                seg = (seg << 1) | chunk.get(k).copied().unwrap_or(0) as usize;
            }
            out.extend_from_slice(&self.codes[seg]);
        }
    }

    /// Decodes `ceil(n_bits / H)` segments from the front of `coded`,
    /// returning the first `n_bits` decoded bits and the number of coded
    /// bits consumed.
    pub fn decode(&self, coded: &[u8], n_bits: usize) -> Result<(BitWord, usize)> {
        let segments = n_bits.div_ceil(self.segment_len);
        let mut out = BitWord::with_capacity(segments * self.segment_len);
        let mut pos = 0;
        for k in 0..segments {
            let mut node = 0u32;
            let segment = loop {
                let Some(&bit) = coded.get(pos) else {
                    return Err(Error::Corrupt(format!(
                        "stream exhausted at bit {pos} while decoding segment {k} of {segments}"
                    )));
                };
                pos += 1;
                let next = self.trie[node as usize][bit as usize];
                if next & LEAF != 0 {
                    break (next & !LEAF) as usize;
                }
                node = next;
            };
            for b in (0..self.segment_len).rev() {
                out.push(((segment >> b) & 1) as u8);
            }
        }
        let bits = out.into_inner();
        Ok((BitWord::from_bits(bits.into_iter().take(n_bits)), pos))
    }
}

pub fn build_codebook(pi: f64, segment_len: usize) -> Result<HuffmanCodebook> {
    HuffmanCodebook::build(pi, segment_len)
}

pub fn encode_subvector(sub: &BitWord, book: &HuffmanCodebook) -> BitWord {
    let mut out = BitWord::new();
    book.encode(sub.as_slice(), &mut out);
    out
}

pub fn decode_subvector(coded: &BitWord, n_original_bits: usize, book: &HuffmanCodebook) -> Result<(BitWord, usize)> {
    book.decode(coded.as_slice(), n_original_bits)
}

/// One codebook per reliability class `r = 1…R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookSet {
    books: Vec<HuffmanCodebook>,
}

impl CodebookSet {
    pub fn new(books: Vec<HuffmanCodebook>) -> Self {
        CodebookSet { books }
    }

    /// Codebooks for every class of `dmc`, each a function of `(π_r, H)` only.
    pub fn from_dmc(dmc: &DmcModel, segment_len: usize) -> Result<Self> {
        let books = dmc.pi[1..]
            .iter()
            .map(|&pi| HuffmanCodebook::build(pi.clamp(PI_FLOOR, 1.0 - PI_FLOOR), segment_len))
            .collect::<Result<Vec<_>>>()?;
        Ok(CodebookSet { books })
    }

    pub fn classes(&self) -> usize {
        self.books.len()
    }

    /// Codebook of class `r ≥ 1`.
    pub fn class(&self, r: usize) -> &HuffmanCodebook {
        &self.books[r - 1]
    }
}

/// Positions of each reliability class, in index order. `positions[0]` holds
/// the erased positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    positions: Vec<Vec<usize>>,
    len: usize,
}

impl SplitPlan {
    pub fn new(z: &QllrWord, classes: usize) -> Result<Self> {
        let mut positions = vec![Vec::new(); classes + 1];
        for (n, v) in z.iter().enumerate() {
            let r = v.unsigned_abs() as usize;
            if r > classes {
                return Err(Error::param("qllr", format!("class {r} at position {n} exceeds R = {classes}")));
            }
            positions[r].push(n);
        }
        Ok(SplitPlan {
            positions,
            len: z.len(),
        })
    }

    pub fn classes(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn positions(&self, r: usize) -> &[usize] {
        &self.positions[r]
    }

    pub fn erased(&self) -> &[usize] {
        &self.positions[0]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Per-class error subvectors plus the erased positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// `subvectors[r - 1]` is class `r`.
    pub subvectors: Vec<BitWord>,
    pub erased: Vec<usize>,
}

pub fn split(e: &BitWord, z: &QllrWord, classes: usize) -> Result<Split> {
    if e.len() != z.len() {
        return Err(Error::LengthMismatch {
            expected: z.len(),
            actual: e.len(),
        });
    }
    let plan = SplitPlan::new(z, classes)?;
    Ok(split_with_plan(e, &plan))
}

fn split_with_plan(e: &BitWord, plan: &SplitPlan) -> Split {
    Split {
        subvectors: (1..=plan.classes())
            .map(|r| plan.positions(r).iter().map(|&n| e[n]).collect())
            .collect(),
        erased: plan.erased().to_vec(),
    }
}

/// Inverse of [`split`]: scatters the class subvectors back to their
/// original positions. Erased positions are filled with 0.
pub fn combine(subvectors: &[BitWord], plan: &SplitPlan) -> Result<BitWord> {
    if subvectors.len() != plan.classes() {
        return Err(Error::LengthMismatch {
            expected: plan.classes(),
            actual: subvectors.len(),
        });
    }
    let mut e = vec![0u8; plan.len()];
    for (r, sub) in subvectors.iter().enumerate() {
        let pos = plan.positions(r + 1);
        if sub.len() != pos.len() {
            return Err(Error::LengthMismatch {
                expected: pos.len(),
                actual: sub.len(),
            });
        }
        for (&n, b) in pos.iter().zip(sub.iter()) {
            e[n] = b;
        }
    }
    Ok(BitWord::from_bits(e))
}

/// Next forward word: coded classes `1…R` in order, then the raw bits of
/// `x_prev` at erased positions.
pub fn source_encode(e: &BitWord, x_prev: &BitWord, z: &QllrWord, books: &CodebookSet) -> Result<BitWord> {
    if x_prev.len() != z.len() {
        return Err(Error::LengthMismatch {
            expected: z.len(),
            actual: x_prev.len(),
        });
    }
    let parts = split(e, z, books.classes())?;
    let mut out = BitWord::new();
    for (r, sub) in parts.subvectors.iter().enumerate() {
        books.class(r + 1).encode(sub.as_slice(), &mut out);
    }
    for &n in &parts.erased {
        out.push(x_prev[n]);
    }
    Ok(out)
}

/// Inverse of [`source_encode`] given the stored quantized-LLR word of the
/// previous iteration. Returns the full-length error vector (0 at erased
/// positions) and the raw bits of the erased positions.
pub fn source_decode(x: &BitWord, z_prev: &QllrWord, books: &CodebookSet) -> Result<(BitWord, BitWord)> {
    let plan = SplitPlan::new(z_prev, books.classes())?;
    let coded = x.as_slice();
    let mut pos = 0;
    let mut subvectors = Vec::with_capacity(plan.classes());
    for r in 1..=plan.classes() {
        let (sub, used) = books.class(r).decode(&coded[pos..], plan.positions(r).len())?;
        pos += used;
        subvectors.push(sub);
    }
    let raw = &coded[pos..];
    if raw.len() != plan.erased().len() {
        return Err(Error::Corrupt(format!(
            "{} trailing bits for {} erased positions",
            raw.len(),
            plan.erased().len()
        )));
    }
    let e = combine(&subvectors, &plan)?;
    Ok((e, BitWord::from_bits(raw.iter().copied())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc_books(pis: &[f64], h: usize) -> CodebookSet {
        CodebookSet::new(pis.iter().map(|&p| HuffmanCodebook::build(p, h).unwrap()).collect())
    }

    #[test]
    fn uniform_source_gives_fixed_length() {
        let b = HuffmanCodebook::build(0.5, 3).unwrap();
        assert!(b.codewords().iter().all(|c| c.len() == 3));
        assert_eq!(b.kraft_sum(), 1.0);
    }

    #[test]
    fn expected_length_within_entropy_bounds() {
        // Exhaustive expected length over the 256 segments.
        let (pi, h) = (0.11, 8);
        let b = HuffmanCodebook::build(pi, h).unwrap();
        let mut el = 0.0;
        for s in 0..256usize {
            let w = s.count_ones() as i32;
            el += pi.powi(w) * (1.0 - pi).powi(8 - w) * b.codeword(s).len() as f64;
        }
        let ent = -pi * pi.log2() - (1.0 - pi) * (1.0 - pi).log2();
        let per_bit = el / h as f64;
        assert!(per_bit >= ent && per_bit <= ent + 1.0 / h as f64, "{per_bit}");
        assert!((b.expected_length() - el).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_bad_lengths_rejected() {
        assert_eq!(HuffmanCodebook::build(0.0, 4), Err(Error::DegenerateSource(0.0)));
        assert_eq!(HuffmanCodebook::build(1.0, 4), Err(Error::DegenerateSource(1.0)));
        assert!(HuffmanCodebook::build(0.2, 0).is_err());
        assert!(HuffmanCodebook::build(0.2, 17).is_err());
    }

    #[test]
    fn build_is_deterministic() {
        let a = HuffmanCodebook::build(0.07, 10).unwrap();
        let b = HuffmanCodebook::build(0.07, 10).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dump(), b.dump());
    }

    #[test]
    fn dump_is_sorted_by_segment() {
        let b = HuffmanCodebook::build(0.2, 2).unwrap();
        let dump = b.dump();
        let lines: Vec<&str> = dump.lines().skip(1).collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("00 "));
        assert!(lines[3].starts_with("11 "));
    }

    #[test]
    fn all_zero_segment_gets_shortest_code() {
        let b = HuffmanCodebook::build(0.05, 8).unwrap();
        let shortest = b.codewords().iter().map(Vec::len).min().unwrap();
        let coded = encode_subvector(&BitWord::zeros(8), &b);
        assert_eq!(coded.len(), shortest);
        assert_eq!(coded.as_slice(), b.codeword(0));
    }

    #[test]
    fn empty_subvector() {
        let b = HuffmanCodebook::build(0.2, 4).unwrap();
        assert!(encode_subvector(&BitWord::new(), &b).is_empty());
        let (d, used) = decode_subvector(&BitWord::from_str_bits("0101"), 0, &b).unwrap();
        assert!(d.is_empty());
        assert_eq!(used, 0);
    }

    #[test]
    fn truncated_stream_is_corrupt() {
        let b = HuffmanCodebook::build(0.2, 4).unwrap();
        let coded = encode_subvector(&BitWord::from_str_bits("11111111"), &b);
        let cut = BitWord::from_bits(coded.as_slice()[..coded.len() - 1].iter().copied());
        assert!(matches!(decode_subvector(&cut, 8, &b), Err(Error::Corrupt(_))));
    }

    #[test]
    fn split_examples() {
        let e = BitWord::from_str_bits("0011");
        let z = QllrWord::new(vec![2, -1, 1, -2]);
        let s = split(&e, &z, 2).unwrap();
        assert_eq!(s.subvectors[0], BitWord::from_str_bits("01"));
        assert_eq!(s.subvectors[1], BitWord::from_str_bits("01"));
        assert!(s.erased.is_empty());

        let z = QllrWord::new(vec![1, -1, 1, -1]);
        let s = split(&e, &z, 2).unwrap();
        assert_eq!(s.subvectors[0], e);
        assert!(s.subvectors[1].is_empty());

        let e = BitWord::from_str_bits("101101");
        let z = QllrWord::new(vec![1, 0, -2, 1, 0, 2]);
        let s = split(&e, &z, 2).unwrap();
        assert_eq!(s.erased, vec![1, 4]);
        assert_eq!(s.subvectors[0], BitWord::from_str_bits("11"));
        assert_eq!(s.subvectors[1], BitWord::from_str_bits("11"));
    }

    #[test]
    fn split_length_mismatch() {
        let r = split(&BitWord::zeros(3), &QllrWord::new(vec![1, 1]), 1);
        assert!(matches!(r, Err(Error::LengthMismatch { .. })));
        let r = split(&BitWord::zeros(2), &QllrWord::new(vec![1, 3]), 2);
        assert!(r.is_err());
    }

    #[test]
    fn source_encode_structure() {
        let books = bsc_books(&[0.1, 0.01], 4);
        let z = QllrWord::new(vec![1, 1, 2, -2, 1]);
        let e = BitWord::zeros(5);
        let x = source_encode(&e, &BitWord::from_str_bits("01101"), &z, &books).unwrap();
        let mut expect = BitWord::new();
        expect.extend_from_slice(books.class(1).codeword(0));
        expect.extend_from_slice(books.class(2).codeword(0));
        assert_eq!(x, expect);
    }

    #[test]
    fn erased_positions_append_raw_bits() {
        let books = bsc_books(&[0.1], 4);
        let z = QllrWord::new(vec![0, 1, 0]);
        let x_prev = BitWord::from_str_bits("110");
        let x = source_encode(&BitWord::from_str_bits("010"), &x_prev, &z, &books).unwrap();
        let n_coded = books.class(1).codeword(0b1000).len();
        assert_eq!(&x.as_slice()[n_coded..], &[1, 0]);
        let (e, raw) = source_decode(&x, &z, &books).unwrap();
        assert_eq!(e, BitWord::from_str_bits("010"));
        assert_eq!(raw, BitWord::from_str_bits("10"));
    }

    #[test]
    fn decode_all_class_one_is_single_stream() {
        let books = bsc_books(&[0.2, 0.05], 3);
        let z = QllrWord::new(vec![1, -1, 1, 1, -1]);
        let e = BitWord::from_str_bits("01001");
        let x = source_encode(&e, &BitWord::zeros(5), &z, &books).unwrap();
        assert_eq!(x, encode_subvector(&e, books.class(1)));
        assert_eq!(source_decode(&x, &z, &books).unwrap().0, e);
    }

    #[test]
    fn decode_all_erased() {
        let books = bsc_books(&[0.2], 3);
        let z = QllrWord::new(vec![0, 0, 0]);
        let x = BitWord::from_str_bits("101");
        let (e, raw) = source_decode(&x, &z, &books).unwrap();
        assert_eq!(e, BitWord::zeros(3));
        assert_eq!(raw, x);
    }

    #[test]
    fn leftover_bits_are_corrupt() {
        let books = bsc_books(&[0.2], 3);
        let z = QllrWord::new(vec![1, 1, 1]);
        let mut x = encode_subvector(&BitWord::zeros(3), books.class(1));
        x.push(1);
        assert!(matches!(source_decode(&x, &z, &books), Err(Error::Corrupt(_))));
    }
}
