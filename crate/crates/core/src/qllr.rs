//! LLR quantization and the discrete memoryless channel it induces.
//!
//! A [`ThresholdVector`] `(θ_0, …, θ_{R−1})` (with an implicit `θ_R = +∞`)
//! maps every LLR to an integer in `{0, ±1, …, ±R}`. Seen from the modulator
//! input, modulation + noise + demapper + quantizer form a binary-input
//! channel with `2R+1` outputs, summarized by a [`DmcModel`]: the transition
//! matrix `p_uv`, the class masses `ρ_r = P(|Z| = r)`, the per-class error
//! probabilities `π_r` and the contraction ratio `α = Σ H₂(π_r)·ρ_r`.
//!
//! Thresholds are chosen to maximize `I(X; Z)` under a uniform input. For
//! BPSK/QPSK on AWGN the LLR of a bit is Gaussian and the transition matrix
//! has a closed form ([`GaussianLlr`]); for the QAM schemes it is estimated
//! from a large labelled LLR sample ([`EmpiricalLlr`]).

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::bits::{BitWord, QllrWord};
use crate::channel::{ChannelInstance, ChannelKind, SignalSpace};
use crate::error::{Error, Result};
use crate::modem::{LlrWord, Modulation, ModulationScheme};
use crate::seed;

/// Default sample count for Monte Carlo channel estimates.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;
/// Default seed for Monte Carlo channel estimates.
pub const DEFAULT_MC_SEED: u64 = 0x5eed_d3c0;

/// Strictly increasing non-negative finite thresholds `θ_0 < … < θ_{R−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThresholdVector(Vec<f64>);

impl ThresholdVector {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::InvalidThresholds("at least one threshold is required".into()));
        }
        if thresholds.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidThresholds(format!(
                "thresholds must be finite and non-negative: {thresholds:?}"
            )));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidThresholds(format!(
                "thresholds must be strictly increasing: {thresholds:?}"
            )));
        }
        Ok(ThresholdVector(thresholds))
    }

    /// Number of magnitude classes `R` (the count of finite thresholds).
    pub fn classes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `θ_r`, with `θ_R = +∞`.
    pub fn get(&self, r: usize) -> f64 {
        self.0.get(r).copied().unwrap_or(f64::INFINITY)
    }

    /// Quantizes one LLR. Intervals are half-open as `θ_{r−1} ≤ λ < θ_r` for
    /// positive classes and `−θ_r < λ ≤ −θ_{r−1}` for negative ones; NaN is
    /// treated as an erasure.
    pub fn quantize_one(&self, llr: f64) -> i16 {
        let theta0 = self.0[0];
        if llr >= theta0 {
            self.0.partition_point(|&t| t <= llr) as i16
        } else if llr <= -theta0 {
            -(self.0.partition_point(|&t| t <= -llr) as i16)
        } else {
            0
        }
    }
}

impl TryFrom<Vec<f64>> for ThresholdVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ThresholdVector::new(v)
    }
}

impl From<ThresholdVector> for Vec<f64> {
    fn from(t: ThresholdVector) -> Self {
        t.0
    }
}

pub fn quantize(llrs: &LlrWord, thresholds: &ThresholdVector) -> QllrWord {
    QllrWord::new(llrs.as_slice().iter().map(|&l| thresholds.quantize_one(l)).collect())
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Transition matrix `p_uv`: `rows[u][v + R]` for `v ∈ {−R, …, R}`.
pub type Transitions = [Vec<f64>; 2];

/// `I(X; Z)` in bits for a uniform binary input.
pub fn mutual_information(p: &Transitions) -> f64 {
    let mut mi = 0.0;
    for v in 0..p[0].len() {
        let pz = 0.5 * (p[0][v] + p[1][v]);
        for row in p {
            if row[v] > 0.0 {
                mi += 0.5 * row[v] * (row[v] / pz).log2();
            }
        }
    }
    mi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    MonteCarlo { samples: usize, seed: u64 },
}

/// The induced binary-input, `(2R+1)`-output channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmcModel {
    pub modulation: Modulation,
    pub noise_var: f64,
    pub thresholds: ThresholdVector,
    /// `p[u][v + R]`.
    pub p: Transitions,
    /// Per-cell standard error of Monte Carlo estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_err: Option<Transitions>,
    /// `ρ_0 … ρ_R`.
    pub rho: Vec<f64>,
    /// `π_0 … π_R`; `π_0 = 1/2` by convention.
    pub pi: Vec<f64>,
    pub alpha: f64,
    pub provenance: Provenance,
    /// Classes with no observed mass; their `π_r` is set to 1/2.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub empty_classes: Vec<usize>,
}

impl DmcModel {
    /// Derives `ρ`, `π` and `α` from a transition matrix.
    pub fn from_transitions(
        modulation: Modulation,
        noise_var: f64,
        thresholds: ThresholdVector,
        p: Transitions,
        std_err: Option<Transitions>,
        provenance: Provenance,
    ) -> Self {
        let classes = thresholds.classes();
        let at = |u: usize, v: isize| p[u][(v + classes as isize) as usize];
        let mut rho = Vec::with_capacity(classes + 1);
        let mut pi = Vec::with_capacity(classes + 1);
        let mut empty_classes = Vec::new();
        rho.push(0.5 * (at(0, 0) + at(1, 0)));
        pi.push(0.5);
        for r in 1..=classes as isize {
            let mass = 0.5 * (at(0, r) + at(0, -r) + at(1, r) + at(1, -r));
            rho.push(mass);
            if mass > 0.0 {
                pi.push(0.5 * (at(0, -r) + at(1, r)) / mass);
            } else {
                empty_classes.push(r as usize);
                pi.push(0.5);
            }
        }
        let alpha = rho
            .iter()
            .zip(&pi)
            .map(|(rho, pi)| binary_entropy(*pi) * rho)
            .sum();
        DmcModel {
            modulation,
            noise_var,
            thresholds,
            p,
            std_err,
            rho,
            pi,
            alpha,
            provenance,
            empty_classes,
        }
    }

    pub fn classes(&self) -> usize {
        self.thresholds.classes()
    }

    /// `p_uv` for `v ∈ {−R, …, R}`.
    pub fn transition(&self, u: usize, v: isize) -> f64 {
        self.p[u][(v + self.classes() as isize) as usize]
    }

    pub fn mutual_information(&self) -> f64 {
        mutual_information(&self.p)
    }

    pub fn snr_db(&self) -> f64 {
        crate::channel::noise_var_to_snr_db(self.noise_var)
    }

    /// Checks the structural invariants: row sums, `Σρ = 1`, `π_r ≤ 1/2`,
    /// `α < 1`. Monte Carlo models get a tolerance scaled from their
    /// standard errors.
    pub fn validate(&self) -> Result<()> {
        let tol = match &self.std_err {
            Some(se) => 3.0 * se.iter().flatten().map(|s| s * s).sum::<f64>().sqrt() + 1e-9,
            None => 1e-9,
        };
        for (u, row) in self.p.iter().enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tol || row.iter().any(|x| *x < 0.0) {
                return Err(Error::param("dmc", format!("row {u} sums to {s}")));
            }
        }
        let s: f64 = self.rho.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::param("dmc", format!("class masses sum to {s}")));
        }
        if let Some(r) = self.pi.iter().skip(1).position(|&p| !(0.0..=0.5 + tol).contains(&p)) {
            return Err(Error::param(
                "dmc",
                format!("class {} error probability {} exceeds 1/2", r + 1, self.pi[r + 1]),
            ));
        }
        if !(self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        Ok(())
    }
}

/// A law of the LLR of one transmitted bit, able to produce the quantized
/// transition matrix for arbitrary thresholds.
pub trait LlrLaw {
    fn modulation(&self) -> Modulation;
    fn noise_var(&self) -> f64;
    /// `p_uv(θ)` for finite thresholds `θ_0 < … < θ_{R−1}`.
    fn transitions(&self, thresholds: &[f64]) -> Transitions;
    /// Quantile of `|λ|` (pooled over both input values).
    fn abs_quantile(&self, q: f64) -> f64;
    fn provenance(&self) -> Provenance;

    fn dmc(&self, thresholds: &ThresholdVector) -> DmcModel {
        DmcModel::from_transitions(
            self.modulation(),
            self.noise_var(),
            thresholds.clone(),
            self.transitions(thresholds.as_slice()),
            None,
            self.provenance(),
        )
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Mass of `N(0,1)` on the interval `[a, b]`, computed on whichever tail
/// keeps the subtraction well conditioned.
fn normal_mass(a: f64, b: f64) -> f64 {
    if b <= a {
        0.0
    } else if a >= 0.0 {
        normal_sf(a) - normal_sf(b)
    } else if b <= 0.0 {
        normal_cdf(b) - normal_cdf(a)
    } else {
        1.0 - normal_cdf(a) - normal_sf(b)
    }
}

/// LLR law for BPSK (real noise variance `σ²`) and Gray QPSK (complex noise
/// variance `σ²`): in both cases `λ | x=u ~ N(±2/σ², 4/σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLlr {
    modulation: Modulation,
    noise_var: f64,
    mean: f64,
    sd: f64,
}

impl GaussianLlr {
    pub fn new(modulation: Modulation, noise_var: f64) -> Result<Self> {
        if !matches!(modulation, Modulation::Bpsk | Modulation::Qpsk) {
            return Err(Error::param(
                "modulation",
                format!("closed-form LLR law only exists for BPSK/QPSK, not {modulation}"),
            ));
        }
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::param("noise_var", format!("{noise_var} must be positive and finite")));
        }
        let snr = noise_var.recip();
        Ok(GaussianLlr {
            modulation,
            noise_var,
            mean: 2.0 * snr,
            sd: 2.0 * snr.sqrt(),
        })
    }

    /// Probability that `λ ∈ [lo, hi]` given the transmitted bit `u`.
    fn mass(&self, u: usize, lo: f64, hi: f64) -> f64 {
        let mean = if u == 0 { self.mean } else { -self.mean };
        normal_mass((lo - mean) / self.sd, (hi - mean) / self.sd)
    }
}

impl LlrLaw for GaussianLlr {
    fn modulation(&self) -> Modulation {
        self.modulation
    }

    fn noise_var(&self) -> f64 {
        self.noise_var
    }

    fn transitions(&self, thresholds: &[f64]) -> Transitions {
        let classes = thresholds.len();
        let t = |r: usize| thresholds.get(r).copied().unwrap_or(f64::INFINITY);
        // Row 0 directly; row 1 is its mirror image, so that
        // p_{1,v} = p_{0,−v} holds bit for bit.
        let mut row0 = vec![0.0; 2 * classes + 1];
        row0[classes] = self.mass(0, -t(0), t(0));
        for r in 1..=classes {
            row0[classes + r] = self.mass(0, t(r - 1), t(r));
            row0[classes - r] = self.mass(0, -t(r), -t(r - 1));
        }
        let row1 = row0.iter().rev().copied().collect();
        [row0, row1]
    }

    fn abs_quantile(&self, q: f64) -> f64 {
        // |λ| is folded normal; invert by bisection.
        let cdf = |x: f64| self.mass(0, -x, x);
        let (mut lo, mut hi) = (0.0, self.mean + 12.0 * self.sd);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Analytic
    }
}

/// A sorted sample of bit LLRs, split by transmitted bit value.
#[derive(Debug, Clone)]
pub struct EmpiricalLlr {
    modulation: Modulation,
    noise_var: f64,
    samples: usize,
    seed: u64,
    sorted: [Vec<f64>; 2],
    abs_sorted: Vec<f64>,
}

impl EmpiricalLlr {
    /// Simulates `samples` uniformly random bits through modulate → AWGN →
    /// exact demapper.
    pub fn simulate(scheme: &ModulationScheme, noise_var: f64, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::param("samples", "must be positive"));
        }
        let channel = ChannelInstance::new(ChannelKind::Awgn, noise_var, seed)?;
        let space = if scheme.kind().is_real() {
            SignalSpace::Real
        } else {
            SignalSpace::Complex
        };
        let mut rng = seed::rng(&[seed, 0xb175]);
        let mut sorted = [Vec::with_capacity(samples / 2 + 1024), Vec::with_capacity(samples / 2 + 1024)];
        const BLOCK: usize = 1 << 14;
        let mut produced = 0;
        let mut block = 0;
        while produced < samples {
            let n = BLOCK.min(samples - produced);
            let bits: BitWord = (0..n).map(|_| rng.random_range(0..2u8)).collect();
            let signals = scheme.modulate(&bits)?;
            let rx = channel.transmit(&signals, block, space);
            let llrs = scheme.compute_llrs(&rx.signals, noise_var, rx.fading, n)?;
            for (b, l) in bits.iter().zip(llrs.as_slice()) {
                sorted[b as usize].push(*l);
            }
            produced += n;
            block += 1;
        }
        Ok(Self::from_samples(scheme.kind(), noise_var, sorted, seed))
    }

    /// Builds a law from explicit LLR samples for bit 0 and bit 1.
    pub fn from_samples(modulation: Modulation, noise_var: f64, mut by_bit: [Vec<f64>; 2], seed: u64) -> Self {
        for v in &mut by_bit {
            v.sort_by(f64::total_cmp);
        }
        let mut abs_sorted: Vec<f64> = by_bit.iter().flatten().map(|l| l.abs()).collect();
        abs_sorted.sort_by(f64::total_cmp);
        EmpiricalLlr {
            modulation,
            noise_var,
            samples: by_bit[0].len() + by_bit[1].len(),
            seed,
            sorted: by_bit,
            abs_sorted,
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Count of samples of bit `u` in `[lo, hi)`.
    fn count_closed_open(&self, u: usize, lo: f64, hi: f64) -> usize {
        let s = &self.sorted[u];
        s.partition_point(|&x| x < hi) - s.partition_point(|&x| x < lo)
    }

    /// Count of samples of bit `u` in `(lo, hi]`.
    fn count_open_closed(&self, u: usize, lo: f64, hi: f64) -> usize {
        let s = &self.sorted[u];
        s.partition_point(|&x| x <= hi) - s.partition_point(|&x| x <= lo)
    }

    fn counts(&self, thresholds: &[f64]) -> [Vec<usize>; 2] {
        let classes = thresholds.len();
        let t = |r: usize| thresholds.get(r).copied().unwrap_or(f64::INFINITY);
        let row = |u: usize| {
            let mut c = vec![0; 2 * classes + 1];
            // (−θ0, θ0): open on both ends.
            c[classes] = {
                let s = &self.sorted[u];
                s.partition_point(|&x| x < t(0)) - s.partition_point(|&x| x <= -t(0))
            };
            for r in 1..=classes {
                c[classes + r] = self.count_closed_open(u, t(r - 1), t(r));
                c[classes - r] = self.count_open_closed(u, -t(r), -t(r - 1));
            }
            c
        };
        [row(0), row(1)]
    }

    /// Transition estimates with per-cell standard errors. Fails if either
    /// input value has no samples.
    pub fn transitions_with_error(&self, thresholds: &[f64]) -> Result<(Transitions, Transitions)> {
        let counts = self.counts(thresholds);
        let mut p: Transitions = [Vec::new(), Vec::new()];
        let mut se: Transitions = [Vec::new(), Vec::new()];
        for u in 0..2 {
            let n = self.sorted[u].len();
            if n == 0 {
                return Err(Error::param("samples", format!("no samples for bit {u}")));
            }
            let n = n as f64;
            p[u] = counts[u].iter().map(|&c| c as f64 / n).collect();
            se[u] = p[u].iter().map(|&x| (x * (1.0 - x) / n).sqrt()).collect();
        }
        Ok((p, se))
    }
}

impl LlrLaw for EmpiricalLlr {
    fn modulation(&self) -> Modulation {
        self.modulation
    }

    fn noise_var(&self) -> f64 {
        self.noise_var
    }

    fn transitions(&self, thresholds: &[f64]) -> Transitions {
        let counts = self.counts(thresholds);
        let mut out: Transitions = [Vec::new(), Vec::new()];
        for u in 0..2 {
            let n = self.sorted[u].len().max(1) as f64;
            out[u] = counts[u].iter().map(|&c| c as f64 / n).collect();
        }
        out
    }

    fn abs_quantile(&self, q: f64) -> f64 {
        if self.abs_sorted.is_empty() {
            return 0.0;
        }
        let idx = ((q.clamp(0.0, 1.0)) * (self.abs_sorted.len() - 1) as f64).round() as usize;
        self.abs_sorted[idx]
    }

    fn provenance(&self) -> Provenance {
        Provenance::MonteCarlo {
            samples: self.samples,
            seed: self.seed,
        }
    }

    fn dmc(&self, thresholds: &ThresholdVector) -> DmcModel {
        let (p, se) = self
            .transitions_with_error(thresholds.as_slice())
            .unwrap_or_else(|_| (self.transitions(thresholds.as_slice()), [Vec::new(), Vec::new()]));
        DmcModel::from_transitions(
            self.modulation,
            self.noise_var,
            thresholds.clone(),
            p,
            Some(se),
            self.provenance(),
        )
    }
}

/// Closed-form channel model for BPSK/QPSK on AWGN.
pub fn dmc_analytic_bpsk_qpsk(
    modulation: Modulation,
    thresholds: &ThresholdVector,
    noise_var: f64,
) -> Result<DmcModel> {
    let law = GaussianLlr::new(modulation, noise_var)?;
    let model = law.dmc(thresholds);
    let classes = thresholds.classes() as isize;
    for r in -classes..=classes {
        if model.transition(0, -r) != model.transition(1, r) {
            return Err(Error::param("dmc", format!("symmetry broken at class {r}")));
        }
    }
    Ok(model)
}

/// Channel model estimated from `samples` simulated bits.
pub fn dmc_monte_carlo(
    scheme: &ModulationScheme,
    thresholds: &ThresholdVector,
    noise_var: f64,
    samples: usize,
    seed: u64,
) -> Result<DmcModel> {
    if samples < 100_000 {
        return Err(Error::param("samples", format!("{samples} is below the 1e5 minimum")));
    }
    let law = EmpiricalLlr::simulate(scheme, noise_var, samples, seed)?;
    Ok(law.dmc(thresholds))
}

/// Largest quadratic dispersion `δ_r = (p_{0,−r} − E_r)² + (p_{1,r} − E_r)²`
/// over `r = 0…R`, `E_r` being the mean of the two probabilities.
pub fn dispersion(model: &DmcModel) -> f64 {
    (0..=model.classes() as isize)
        .map(|r| {
            let a = model.transition(0, -r);
            let b = model.transition(1, r);
            let mean = 0.5 * (a + b);
            (a - mean).powi(2) + (b - mean).powi(2)
        })
        .fold(0.0, f64::max)
}

/// Knobs of the coordinate-wise threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Stop when a full sweep improves MI (bits) by less than this.
    pub mi_tolerance: f64,
    /// Golden-section bracket width at which a line search stops.
    pub x_tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mi_tolerance: 1e-12,
            x_tolerance: 1e-7,
            max_sweeps: 2000,
        }
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_max(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Finds thresholds maximizing `I(X; Z)` for `classes` magnitude classes.
///
/// Coordinate-wise golden-section ascent; each coordinate moves inside the
/// open bracket formed by its neighbours, so ordering is preserved. Three
/// deterministic starts place the free thresholds at equally spaced
/// quantiles of `|λ|` over different spans; the best end point wins.
pub fn optimize_thresholds_with<L: LlrLaw + ?Sized>(
    law: &L,
    classes: usize,
    fix_theta0_zero: bool,
    options: SearchOptions,
) -> Result<ThresholdVector> {
    if classes == 0 {
        return Err(Error::param("classes", "R must be at least 1"));
    }
    let first_free = usize::from(fix_theta0_zero);
    let free = classes - first_free;
    if free == 0 {
        return ThresholdVector::new(vec![0.0]);
    }

    let ceiling = law.abs_quantile(1.0 - 1e-9).max(law.abs_quantile(0.5) * 4.0) + 1.0;
    let eps = (ceiling * 1e-9).max(1e-12);
    let objective = |theta: &[f64]| mutual_information(&law.transitions(theta));

    let spans = [(0.0, 1.0), (0.0, 0.8), (0.3, 1.0)];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut failure = None;
    for (a, b) in spans {
        let mut theta = vec![0.0; classes];
        for j in 0..free {
            let q = a + (b - a) * (j + 1) as f64 / (free + 1) as f64;
            theta[first_free + j] = law.abs_quantile(q);
        }
        // Spread out coincident starting points (possible with discrete samples).
        for k in first_free..classes {
            let floor = if k == 0 { 0.0 } else { theta[k - 1] + eps * 10.0 };
            if theta[k] < floor || (k == 0 && theta[k] <= 0.0) {
                theta[k] = floor.max(if k == 0 { eps * 10.0 } else { 0.0 });
            }
        }
        let mut mi = objective(&theta);
        let mut converged = false;
        for _sweep in 0..options.max_sweeps {
            let start = mi;
            for k in first_free..classes {
                let lo = if k == 0 { 0.0 } else { theta[k - 1] + eps };
                let hi = if k + 1 < classes { theta[k + 1] - eps } else { ceiling };
                if hi <= lo {
                    continue;
                }
                let mut probe = theta.clone();
                let (x, fx) = golden_max(lo, hi, options.x_tolerance, |x| {
                    probe[k] = x;
                    objective(&probe)
                });
                if fx > mi {
                    theta[k] = x;
                    mi = fx;
                }
            }
            if mi - start < options.mi_tolerance {
                converged = true;
                break;
            }
        }
        if !converged {
            failure = Some((theta.clone(), mi));
            continue;
        }
        if best.as_ref().is_none_or(|(_, m)| mi > *m) {
            best = Some((theta, mi));
        }
    }
    match (best, failure) {
        (Some((theta, _)), _) => ThresholdVector::new(theta),
        (None, Some((theta, mi))) => Err(Error::NoConvergence {
            iterations: options.max_sweeps,
            best_mi: mi,
            best: theta,
        }),
        (None, None) => unreachable!("at least one start runs"),
    }
}

/// Builds the LLR law used for threshold design: closed form for BPSK/QPSK,
/// a Monte Carlo sample otherwise.
pub fn design_law(
    scheme: &ModulationScheme,
    noise_var: f64,
    samples: usize,
    seed: u64,
) -> Result<Box<dyn LlrLaw + Send + Sync>> {
    Ok(match scheme.kind() {
        Modulation::Bpsk | Modulation::Qpsk => Box::new(GaussianLlr::new(scheme.kind(), noise_var)?),
        _ => Box::new(EmpiricalLlr::simulate(scheme, noise_var, samples, seed)?),
    })
}

/// Mutual-information-maximizing thresholds with default search options and
/// the default Monte Carlo budget for QAM.
pub fn optimize_thresholds(
    scheme: &ModulationScheme,
    noise_var: f64,
    classes: usize,
    fix_theta0_zero: bool,
) -> Result<ThresholdVector> {
    let law = design_law(scheme, noise_var, DEFAULT_MC_SAMPLES, DEFAULT_MC_SEED)?;
    optimize_thresholds_with(law.as_ref(), classes, fix_theta0_zero, SearchOptions::default())
}
