//! Gray-labelled modulation and exact bit-LLR demapping.
//!
//! Labels are read MSB-first: the first bit of a Q-tuple is the most
//! significant bit of the constellation index. For QPSK, 16QAM and 64QAM the
//! bits alternate between the in-phase and quadrature axes (bit 1 on I, bit 2
//! on Q, bit 3 on I, ...), each axis carrying a reflected-Gray PAM label whose
//! first bit is the sign.
//!
//! BPSK is a real-valued scheme: its noise variance is the variance of the
//! single real dimension, so the LLR is `2·h·y/σ²`. For the complex schemes
//! `σ²` is the total complex noise variance, split evenly over I and Q.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::BitWord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
    #[serde(rename = "16qam", alias = "qam16")]
    Qam16,
    #[serde(rename = "64qam", alias = "qam64")]
    Qam64,
}

impl Modulation {
    pub fn from_order(bits_per_symbol: usize) -> Result<Self> {
        match bits_per_symbol {
            1 => Ok(Modulation::Bpsk),
            2 => Ok(Modulation::Qpsk),
            4 => Ok(Modulation::Qam16),
            6 => Ok(Modulation::Qam64),
            q => Err(Error::UnsupportedOrder(q)),
        }
    }

    pub fn order(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
            Modulation::Qam64 => "64qam",
        }
    }

    pub fn is_real(self) -> bool {
        self == Modulation::Bpsk
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" => Ok(Modulation::Qam16),
            "64qam" | "qam64" => Ok(Modulation::Qam64),
            other => Err(Error::param("modulation", format!("unknown scheme {other:?}"))),
        }
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Reflected-Gray PAM amplitude for `bits` (first bit = sign), unnormalized.
fn gray_pam(bits: &[u8]) -> f64 {
    let sign = 1.0 - 2.0 * bits[0] as f64;
    let pm = |b: u8| 1.0 - 2.0 * b as f64;
    let m = match bits.len() {
        1 => 1.0,
        2 => 2.0 - pm(bits[1]),
        3 => 4.0 - pm(bits[1]) * (2.0 - pm(bits[2])),
        _ => unreachable!("PAM depth is at most 3 bits per axis"),
    };
    sign * m
}

/// A modulation with its constellation and per-bit label subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationScheme {
    kind: Modulation,
    points: Vec<Complex64>,
    /// `subsets[p][b]` lists constellation indices whose label bit `p` equals `b`.
    subsets: Vec<[Vec<usize>; 2]>,
}

impl ModulationScheme {
    pub fn new(kind: Modulation) -> Self {
        let q = kind.order();
        let m = 1usize << q;
        let mut points = Vec::with_capacity(m);
        for label in 0..m {
            let bits: Vec<u8> = (0..q).map(|p| ((label >> (q - 1 - p)) & 1) as u8).collect();
            let point = match kind {
                Modulation::Bpsk => Complex64::new(1.0 - 2.0 * bits[0] as f64, 0.0),
                _ => {
                    let i_bits: Vec<u8> = bits.iter().step_by(2).copied().collect();
                    let q_bits: Vec<u8> = bits.iter().skip(1).step_by(2).copied().collect();
                    Complex64::new(gray_pam(&i_bits), gray_pam(&q_bits))
                }
            };
            points.push(point);
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
        let scale = energy.sqrt().recip();
        for p in &mut points {
            *p *= scale;
        }
        let subsets = (0..q)
            .map(|p| {
                let mut zero = Vec::new();
                let mut one = Vec::new();
                for label in 0..m {
                    if (label >> (q - 1 - p)) & 1 == 0 {
                        zero.push(label);
                    } else {
                        one.push(label);
                    }
                }
                [zero, one]
            })
            .collect();
        ModulationScheme {
            kind,
            points,
            subsets,
        }
    }

    pub fn from_order(bits_per_symbol: usize) -> Result<Self> {
        Ok(Self::new(Modulation::from_order(bits_per_symbol)?))
    }

    pub fn kind(&self) -> Modulation {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.kind.order()
    }

    pub fn constellation(&self) -> &[Complex64] {
        &self.points
    }

    /// Bits of constellation index `label`, MSB first.
    pub fn label_bits(&self, label: usize) -> Vec<u8> {
        let q = self.order();
        (0..q).map(|p| ((label >> (q - 1 - p)) & 1) as u8).collect()
    }

    /// Number of signals needed for `n_bits` bits.
    pub fn symbols_for(&self, n_bits: usize) -> usize {
        n_bits.div_ceil(self.order())
    }

    /// Maps Q-tuples of `bits` onto constellation points; a short final tuple
    /// is padded with zeros.
    pub fn modulate(&self, bits: &BitWord) -> Result<Vec<Complex64>> {
        if bits.is_empty() {
            return Err(Error::EmptyWord);
        }
        let q = self.order();
        Ok(bits
            .as_slice()
            .chunks(q)
            .map(|tuple| {
                let label = (0..q).fold(0usize, |acc, p| {
                    (acc << 1) | tuple.get(p).copied().unwrap_or(0) as usize
                });
                self.points[label]
            })
            .collect())
    }

    /// Exact per-bit LLRs `ln P(b=0|y)/P(b=1|y)` for coherent reception with
    /// known real gain `fading`. Returns exactly `n_bits` values; LLRs of
    /// padding bits are dropped.
    pub fn compute_llrs(
        &self,
        received: &[Complex64],
        noise_var: f64,
        fading: f64,
        n_bits: usize,
    ) -> Result<LlrWord> {
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::param("noise_var", format!("{noise_var} must be positive and finite")));
        }
        if !(fading.is_finite() && fading > 0.0) {
            return Err(Error::param("fading", format!("{fading} must be positive and finite")));
        }
        let q = self.order();
        if n_bits > q * received.len() {
            return Err(Error::LengthMismatch {
                expected: q * received.len(),
                actual: n_bits,
            });
        }
        if received.iter().any(|y| !(y.re.is_finite() && y.im.is_finite())) {
            return Err(Error::NonFinite("received signal"));
        }

        let mut llrs = Vec::with_capacity(q * received.len());
        if self.kind == Modulation::Bpsk {
            let gain = 2.0 * fading / noise_var;
            llrs.extend(received.iter().map(|y| gain * y.re));
        } else {
            let mut metrics = vec![0.0; self.points.len()];
            for y in received {
                for (m, t) in metrics.iter_mut().zip(&self.points) {
                    *m = -(y - t * fading).norm_sqr() / noise_var;
                }
                for subset in &self.subsets {
                    llrs.push(log_sum_exp(&metrics, &subset[0]) - log_sum_exp(&metrics, &subset[1]));
                }
            }
        }
        llrs.truncate(n_bits);
        Ok(LlrWord(llrs))
    }
}

fn log_sum_exp(metrics: &[f64], indices: &[usize]) -> f64 {
    let max = indices
        .iter()
        .map(|&i| metrics[i])
        .fold(f64::NEG_INFINITY, f64::max);
    max + indices.iter().map(|&i| (metrics[i] - max).exp()).sum::<f64>().ln()
}

/// Real-valued bit LLRs, natural-log base.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LlrWord(pub Vec<f64>);

impl LlrWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    const ALL: [Modulation; 4] = [
        Modulation::Bpsk,
        Modulation::Qpsk,
        Modulation::Qam16,
        Modulation::Qam64,
    ];

    #[test]
    fn unit_energy_and_size() {
        for kind in ALL {
            let s = ModulationScheme::new(kind);
            assert_eq!(s.constellation().len(), 1 << kind.order());
            let e: f64 = s.constellation().iter().map(|p| p.norm_sqr()).sum::<f64>()
                / s.constellation().len() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{kind}: {e}");
        }
    }

    #[test]
    fn labeling_is_bijective() {
        for kind in ALL {
            let s = ModulationScheme::new(kind);
            let pts = s.constellation();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    assert!((pts[i] - pts[j]).norm() > 1e-9, "{kind}: {i} and {j} coincide");
                }
            }
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for kind in ALL {
            let s = ModulationScheme::new(kind);
            let pts = s.constellation();
            let dmin = (0..pts.len())
                .flat_map(|i| (0..pts.len()).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| (pts[i] - pts[j]).norm())
                .fold(f64::INFINITY, f64::min);
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    if i != j && (pts[i] - pts[j]).norm() < dmin * (1.0 + 1e-9) {
                        assert_eq!((i ^ j).count_ones(), 1, "{kind}: labels {i:b} {j:b}");
                    }
                }
            }
        }
    }

    #[test]
    fn bpsk_mapping() {
        let s = ModulationScheme::new(Modulation::Bpsk);
        let y = s.modulate(&BitWord::from_str_bits("01")).unwrap();
        assert_eq!(y, vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
    }

    #[test]
    fn qpsk_mapping() {
        let s = ModulationScheme::new(Modulation::Qpsk);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let y = s.modulate(&BitWord::from_str_bits("00 10 01")).unwrap();
        assert!((y[0] - Complex64::new(r, r)).norm() < 1e-15);
        assert!((y[1] - Complex64::new(-r, r)).norm() < 1e-15);
        assert!((y[2] - Complex64::new(r, -r)).norm() < 1e-15);
    }

    #[test]
    fn qam16_follows_per_axis_gray() {
        let s = ModulationScheme::new(Modulation::Qam16);
        let a = 1.0 / 10f64.sqrt();
        // bits (i1, q1, i2, q2): 0,0,0,0 -> (+1,+1); 0,0,1,1 -> (+3,+3); 1,1,1,1 -> (-3,-3)
        let y = s.modulate(&BitWord::from_str_bits("0000 0011 1111 1000")).unwrap();
        assert!((y[0] - Complex64::new(a, a)).norm() < 1e-12);
        assert!((y[1] - Complex64::new(3.0 * a, 3.0 * a)).norm() < 1e-12);
        assert!((y[2] - Complex64::new(-3.0 * a, -3.0 * a)).norm() < 1e-12);
        assert!((y[3] - Complex64::new(-a, a)).norm() < 1e-12);
    }

    #[test]
    fn padding_final_tuple() {
        let s = ModulationScheme::new(Modulation::Qpsk);
        let y = s.modulate(&BitWord::from_str_bits("101")).unwrap();
        let padded = s.modulate(&BitWord::from_str_bits("1010")).unwrap();
        assert_eq!(y.len(), 2);
        assert_eq!(y, padded);
    }

    #[test]
    fn empty_word_rejected() {
        let s = ModulationScheme::new(Modulation::Qpsk);
        assert_eq!(s.modulate(&BitWord::new()), Err(Error::EmptyWord));
    }

    #[test]
    fn unsupported_order() {
        assert_eq!(Modulation::from_order(3), Err(Error::UnsupportedOrder(3)));
    }

    #[test]
    fn bpsk_llr_arithmetic() {
        let s = ModulationScheme::new(Modulation::Bpsk);
        let l = s.compute_llrs(&[Complex64::new(0.8, 0.0)], 1.0, 1.0, 1).unwrap();
        assert!((l.0[0] - 1.6).abs() < 1e-15);
        let l = s.compute_llrs(&[Complex64::new(0.8, 0.3)], 0.5, 0.7, 1).unwrap();
        assert!((l.0[0] - 2.0 * 0.7 * 0.8 / 0.5).abs() < 1e-12);
    }

    #[test]
    fn qpsk_llr_matches_per_axis_bpsk() {
        let s = ModulationScheme::new(Modulation::Qpsk);
        let noise_var = 0.7;
        let y = Complex64::new(0.31, -0.84);
        let l = s.compute_llrs(&[y], noise_var, 1.0, 2).unwrap();
        // Each axis: amplitude 1/sqrt(2), real noise variance noise_var/2.
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let expect_i = 2.0 * amp * y.re / (noise_var / 2.0);
        let expect_q = 2.0 * amp * y.im / (noise_var / 2.0);
        assert!((l.0[0] - expect_i).abs() < 1e-12);
        assert!((l.0[1] - expect_q).abs() < 1e-12);
    }

    #[test]
    fn qam16_sign_bit_zero_on_axis() {
        // The I sign bit sees label-0 centroids at +1,+3 and label-1 at -1,-3:
        // the symmetric midpoint y_I = 0 must give a zero LLR.
        let s = ModulationScheme::new(Modulation::Qam16);
        let l = s
            .compute_llrs(&[Complex64::new(0.0, 0.37)], 0.4, 1.0, 4)
            .unwrap();
        assert!(l.0[0].abs() < 1e-12, "{}", l.0[0]);
    }

    #[test]
    fn qam16_magnitude_bit_zero_between_levels() {
        // Second I bit: label 0 at |I| = 1, label 1 at |I| = 3 (unnormalized).
        // Oracle: the 1-D log-sum over the PAM likelihoods of the I axis.
        let s = ModulationScheme::new(Modulation::Qam16);
        let a = 1.0 / 10f64.sqrt();
        let noise_var = 0.3;
        let y = Complex64::new(2.0 * a, 0.1);
        let l = s.compute_llrs(&[y], noise_var, 1.0, 4).unwrap();
        let var = noise_var / 2.0;
        let g = |c: f64| (-(y.re - c * a).powi(2) / (2.0 * var)).exp();
        let oracle = ((g(1.0) + g(-1.0)) / (g(3.0) + g(-3.0))).ln();
        assert!((l.0[2] - oracle).abs() < 1e-9);
    }

    #[test]
    fn llr_count_drops_padding() {
        let s = ModulationScheme::new(Modulation::Qam16);
        let bits = BitWord::from_str_bits("10110");
        let y = s.modulate(&bits).unwrap();
        let l = s.compute_llrs(&y, 0.1, 1.0, bits.len()).unwrap();
        assert_eq!(l.len(), 5);
        assert!(s.compute_llrs(&y, 0.1, 1.0, 9).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = ModulationScheme::new(Modulation::Qpsk);
        let y = [Complex64::new(f64::NAN, 0.0)];
        assert_eq!(s.compute_llrs(&y, 1.0, 1.0, 2), Err(Error::NonFinite("received signal")));
        assert!(s.compute_llrs(&[Complex64::new(0.0, 0.0)], 0.0, 1.0, 2).is_err());
        assert!(s.compute_llrs(&[Complex64::new(0.0, 0.0)], 1.0, -1.0, 2).is_err());
    }

    #[test]
    fn noiseless_signs_match_bits() {
        let mut rng = crate::seed::rng(&[11]);
        for kind in ALL {
            let s = ModulationScheme::new(kind);
            for _ in 0..1000 {
                let n = rng.random_range(1..40);
                let bits: BitWord = (0..n).map(|_| rng.random_range(0..2u8)).collect();
                let y = s.modulate(&bits).unwrap();
                let l = s.compute_llrs(&y, 1e-6, 1.0, n).unwrap();
                for (b, v) in bits.iter().zip(l.as_slice()) {
                    assert_eq!(*v > 0.0, b == 0, "{kind}");
                }
            }
        }
    }

    #[test]
    fn antisymmetry_bpsk_qpsk() {
        let bpsk = ModulationScheme::new(Modulation::Bpsk);
        let a = bpsk.compute_llrs(&[Complex64::new(0.42, 0.0)], 0.9, 1.0, 1).unwrap();
        let b = bpsk.compute_llrs(&[Complex64::new(-0.42, 0.0)], 0.9, 1.0, 1).unwrap();
        assert_eq!(a.0[0], -b.0[0]);
        let qpsk = ModulationScheme::new(Modulation::Qpsk);
        let a = qpsk.compute_llrs(&[Complex64::new(0.42, -1.3)], 0.9, 1.0, 2).unwrap();
        let b = qpsk.compute_llrs(&[Complex64::new(-0.42, -1.3)], 0.9, 1.0, 2).unwrap();
        assert!((a.0[0] + b.0[0]).abs() < 1e-12);
        assert!((a.0[1] - b.0[1]).abs() < 1e-12);
    }
}
