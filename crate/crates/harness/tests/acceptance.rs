//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails.

use aic_core::analysis::{self, PointMetrics};
use aic_core::channel::snr_db_to_noise_var;
use aic_core::modem::{LlrWord, Modulation, ModulationScheme};
use aic_core::qllr::{binary_entropy, dispersion, dmc_analytic_bpsk_qpsk, optimize_thresholds, quantize, ThresholdVector};
use aic_core::srccode::{combine, decode_subvector, encode_subvector, source_decode, source_encode, split, CodebookSet, HuffmanCodebook, SplitPlan};
use aic_core::{BitWord, QllrWord};
use aic_harness::cache::{design_dmc, DmcRequest};
use aic_harness::{run_sweep, SweepConfig};
use rand::Rng;

const GRID: [f64; 5] = [-2.0, 0.0, 2.0, 4.0, 6.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(name: &str, o: &Outcome) -> bool {
    println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    o.pass
}

fn qpsk_thresholds() -> Outcome {
    let expected = [1.42, 1.72, 2.07, 2.47, 2.92];
    let scheme = ModulationScheme::new(Modulation::Qpsk);
    let mut pass = true;
    let mut got = Vec::new();
    for (snr, want) in GRID.iter().zip(expected) {
        let th = optimize_thresholds(&scheme, snr_db_to_noise_var(*snr), 2, true).unwrap();
        let t1 = th.as_slice()[1];
        pass &= (t1 - want).abs() <= 0.03;
        got.push(format!("{snr:+}dB θ1={t1:.3} (want {want})"));
    }
    Outcome { pass, detail: got.join(", ") }
}

fn symmetry() -> Outcome {
    let scheme = ModulationScheme::new(Modulation::Qpsk);
    let mut worst: f64 = 0.0;
    let mut worst_delta: f64 = 0.0;
    for m in [Modulation::Bpsk, Modulation::Qpsk] {
        for snr in GRID {
            let nv = snr_db_to_noise_var(snr);
            let th = optimize_thresholds(&scheme, nv, 2, true).unwrap();
            let model = dmc_analytic_bpsk_qpsk(m, &th, nv).unwrap();
            for r in -2isize..=2 {
                worst = worst.max((model.transition(0, -r) - model.transition(1, r)).abs());
            }
            worst_delta = worst_delta.max(dispersion(&model));
        }
    }
    Outcome {
        pass: worst <= 1e-12 && worst_delta == 0.0,
        detail: format!("max |p0,-r − p1,r| = {worst:e}, max Δ = {worst_delta:e}"),
    }
}

fn qam_dispersion() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (m, snr, classes, bound) in [(Modulation::Qam16, 6.0, 4, 1e-5), (Modulation::Qam64, 12.0, 8, 1e-6)] {
        let start = std::time::Instant::now();
        let model = design_dmc(&DmcRequest {
            modulation: m,
            snr_db: snr,
            classes,
            fix_theta0_zero: true,
            mc_samples: 10_000_000,
            mc_seed: aic_core::qllr::DEFAULT_MC_SEED,
        })
        .unwrap();
        let d = dispersion(&model);
        let secs = start.elapsed().as_secs_f64();
        pass &= d < bound && secs < 60.0;
        detail.push(format!("{m} {snr} dB R={classes}: Δ={d:.3e} (< {bound:e}), {secs:.1}s"));
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn sweep(classes: usize, trials: usize, snr: &[f64], message_len: Vec<usize>) -> Vec<PointMetrics> {
    let cfg = SweepConfig {
        snr_db: snr.to_vec(),
        classes,
        trials,
        message_len,
        bler_target: 1e-3,
        seed: 2024,
        ..Default::default()
    };
    run_sweep(&cfg).unwrap().report.points
}

fn decodability(runs: &[(usize, Vec<PointMetrics>)]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (r, points) in runs {
        for p in points {
            let acked = p.trials - (p.bler * p.trials as f64).round() as usize;
            pass &= p.decode_failures == 0 && p.bler == 0.0 && p.trials == 10_000;
            detail.push(format!(
                "R={r} {:+}dB {}/{} decoded",
                p.spec.snr_db,
                acked - p.decode_failures,
                acked
            ));
        }
    }
    Outcome { pass, detail: detail.join(", ") }
}

fn gap(p: &PointMetrics) -> f64 {
    1.0 - p.se / p.se_ub
}

fn se_gap(runs: &[(usize, Vec<PointMetrics>)]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (r, points) in runs {
        for p in points {
            let g = gap(p);
            pass &= if *r == 1 { g <= 0.055 } else { (0.04..=0.12).contains(&g) };
            detail.push(format!("R={r} {:+}dB {:.2}%", p.spec.snr_db, 100.0 * g));
        }
    }
    Outcome {
        pass,
        detail: format!("{} (R=1 ≤ 5.5%, R=2 in [4%, 12%])", detail.join(", ")),
    }
}

fn length_spread() -> Outcome {
    let points = sweep(2, 1000, &[0.0, 2.0, 4.0], vec![54, 72, 90]);
    let expected = [2.86, 2.16, 1.82];
    let mut pass = true;
    let mut detail = Vec::new();
    for (p, want) in points.iter().zip(expected) {
        pass &= (p.dispersion / want - 1.0).abs() <= 0.2;
        detail.push(format!(
            "{:+}dB K={} N=[{}, {}] ratio {:.2} (want {want} ± 20%) mean D {:.2}",
            p.spec.snr_db, p.spec.message_len, p.n_min, p.n_max, p.dispersion, p.mean_d
        ));
    }
    pass &= (4.0..=6.0).contains(&points[0].mean_d);
    pass &= (2.0..=3.0).contains(&points[2].mean_d);
    Outcome {
        pass,
        detail: format!("{} (mean D in [4,6] at 0 dB, [2,3] at 4 dB)", detail.join("; ")),
    }
}

fn properties() -> Outcome {
    let mut rng = aic_core::seed::rng(&[0xacce]);
    let mut failures = Vec::new();

    for _ in 0..50 {
        let pi = rng.random_range(0.005..0.995);
        let h = rng.random_range(1..=10usize);
        let b = HuffmanCodebook::build(pi, h).unwrap();
        let mut codes: Vec<&Vec<u8>> = b.codewords().iter().collect();
        codes.sort();
        let prefix_free = codes.windows(2).all(|w| !w[1].starts_with(w[0]));
        let bound = h as f64 * binary_entropy(pi);
        let el = b.expected_length();
        if !(prefix_free && b.kraft_sum() == 1.0 && el >= bound - 1e-9 && el < bound + 1.0) {
            failures.push(format!("huffman π={pi} H={h}"));
        }
    }

    let set = CodebookSet::new(vec![
        HuffmanCodebook::build(0.3, 8).unwrap(),
        HuffmanCodebook::build(0.05, 8).unwrap(),
    ]);
    for k in 0..1000 {
        let n = rng.random_range(1..80usize);
        let z = QllrWord::new((0..n).map(|_| rng.random_range(-2..=2i16)).collect());
        let x: BitWord = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        let e: BitWord = z.iter().map(|v| if v == 0 { 0 } else { rng.random_range(0..2u8) }).collect();
        let parts = split(&e, &z, 2).unwrap();
        let plan = SplitPlan::new(&z, 2).unwrap();
        let recombined = combine(&parts.subvectors, &plan).unwrap();
        let sub = &parts.subvectors[0];
        let coded = encode_subvector(sub, set.class(1));
        let (dec, used) = decode_subvector(&coded, sub.len(), set.class(1)).unwrap();
        let word = source_encode(&e, &x, &z, &set).unwrap();
        let (e2, raw) = source_decode(&word, &z, &set).unwrap();
        let raw_expect: BitWord = z.iter().zip(x.iter()).filter(|(v, _)| *v == 0).map(|(_, b)| b).collect();
        if recombined != e || dec != *sub || used != coded.len() || e2 != e || raw != raw_expect {
            failures.push(format!("inverse case {k}"));
        }
    }

    let scheme = ModulationScheme::new(Modulation::Qpsk);
    let mut prev = 1.0;
    for snr in GRID {
        let nv = snr_db_to_noise_var(snr);
        let th = optimize_thresholds(&scheme, nv, 2, true).unwrap();
        let a = analysis::alpha(&dmc_analytic_bpsk_qpsk(Modulation::Qpsk, &th, nv).unwrap()).unwrap();
        if !(a < prev) {
            failures.push(format!("alpha {a} at {snr} dB"));
        }
        prev = a;
    }

    let th = ThresholdVector::new(vec![0.0, 0.7, 1.9, 3.5]).unwrap();
    for k in 0..1000 {
        let llrs: Vec<f64> = (0..16).map(|_| rng.random_range(-6.0..6.0)).collect();
        let pos = quantize(&LlrWord(llrs.clone()), &th);
        let neg = quantize(&LlrWord(llrs.iter().map(|v| -v).collect()), &th);
        if pos.iter().zip(neg.iter()).any(|(a, b)| a != -b) {
            failures.push(format!("antisymmetry case {k}"));
        }
    }

    let cfg = |w| SweepConfig {
        snr_db: vec![0.0, 4.0],
        trials: 500,
        workers: Some(w),
        bler_target: 0.01,
        ..Default::default()
    };
    if run_sweep(&cfg(1)).unwrap() != run_sweep(&cfg(8)).unwrap() {
        failures.push("worker-count determinism".into());
    }

    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "huffman ×50, inverses ×1000, α monotone, antisymmetry ×1000, 1 vs 8 workers".into()
        } else {
            failures.join(", ")
        },
    }
}

fn se_shape(runs: &[(usize, Vec<PointMetrics>)]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (r, points) in runs {
        for w in points.windows(2) {
            pass &= w[1].se > w[0].se;
        }
        for p in points {
            pass &= p.se <= p.se_ub * (1.0 + 3.0 / (p.trials as f64).sqrt());
        }
        let se: Vec<String> = points.iter().map(|p| format!("{:.3}/{:.3}", p.se, p.se_ub)).collect();
        detail.push(format!("R={r} SE/bound {}", se.join(" ")));
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn main() {
    let mut all = true;
    all &= report("QPSK R=2 optimal thresholds", &qpsk_thresholds());
    all &= report("BPSK/QPSK symmetry", &symmetry());
    all &= report("QAM channel dispersion", &qam_dispersion());

    let runs: Vec<(usize, Vec<PointMetrics>)> =
        [1, 2].into_iter().map(|r| (r, sweep(r, 10_000, &GRID, Vec::new()))).collect();
    all &= report("perfect decodability", &decodability(&runs));
    all &= report("SE gap to bound", &se_gap(&runs));
    all &= report("codeword length spread and iterations", &length_spread());
    all &= report("property suite", &properties());
    all &= report("SE monotone and bounded", &se_shape(&runs));

    if !all {
        std::process::exit(1);
    }
}
