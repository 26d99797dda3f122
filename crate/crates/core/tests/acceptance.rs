//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured quantities (visible with `--nocapture`). Every tolerance is
//! pinned here; a red test is a real defect.
//!
//! Run with: `cargo test --test acceptance -- --test-threads=1 --nocapture`

use std::time::Instant;

use num_traits::ToPrimitive;

use omegalab::birkhoff::{irregular_witness, level_entropy, Observable};
use omegalab::density::density_profile;
use omegalab::entropy::{katok_entropy_estimate, sft_entropy};
use omegalab::limitset::{classify_case, statistical_omegas, vf_limits, CaseLabel, Recurrence};
use omegalab::measure::{
    empirical_measure, rat, weak_star_distance, InvariantMeasure, MarkovMeasure, MeasurePolyline,
};
use omegalab::shadow::{dyadic, shadow_doubling, shadow_shift, RealPseudoOrbit, ShiftPseudoOrbit};
use omegalab::shift::{IndexSet, PatternAtom, SftDescr, Template, Word};
use omegalab::synthesis::{
    build_saturated_schedule, entropy_dense_horseshoe, realize_case, verify_certificate,
    RealizeOptions, RecurrenceMode, SynthesisConfig,
};

mod common;
use common::random_schedule;

fn bernoulli(num: i64, den: i64) -> MarkovMeasure {
    MarkovMeasure::bernoulli(vec![rat(den - num, den), rat(num, den)]).unwrap()
}

fn binary_entropy(p: f64) -> f64 {
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

#[test]
fn criterion_01_twelve_case_realization() {
    let start = Instant::now();
    let mut checked = 0;
    for label in CaseLabel::all() {
        for mode in [
            Some(RecurrenceMode::NonRecurrent),
            (!label.primed).then_some(RecurrenceMode::RecurrentNonTransitive),
        ]
        .into_iter()
        .flatten()
        {
            let opts = RealizeOptions {
                mode,
                seed: 1,
                ..RealizeOptions::default()
            };
            let (schedule, cert) = realize_case(label, opts)
                .unwrap_or_else(|e| panic!("realize {label} {mode:?}: {e}"));
            let (found, report) = classify_case(&schedule, 2).unwrap();
            assert_eq!(found, label, "round-trip for {label} in {mode:?}");
            let flag_ok = match mode {
                RecurrenceMode::NonRecurrent => {
                    matches!(report.recurrence, Recurrence::NonRecurrent { .. })
                }
                RecurrenceMode::RecurrentNonTransitive => {
                    matches!(report.recurrence, Recurrence::Recurrent)
                }
            };
            assert!(flag_ok, "recurrence flag for {label} in {mode:?}");
            verify_certificate(&schedule, &cert).unwrap();
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "twelve-case suite took {elapsed:?}, budget 60 s"
    );
    println!("criterion 1 PASS: {checked} label/mode witnesses round-trip in {elapsed:?}");
}

#[test]
fn criterion_02_chain_invariant_on_1000_schedules() {
    let mut violations = 0;
    for seed in 0..1000u64 {
        let schedule = random_schedule(seed);
        let report = statistical_omegas(&schedule, 2)
            .unwrap_or_else(|e| panic!("analysis failed for seed {seed}: {e}"));
        if !report.chain_holds() {
            violations += 1;
            eprintln!("chain violated at seed {seed}");
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 2 PASS: inclusion chain holds on 1000 seeded schedules");
}

#[test]
fn criterion_03_sft_entropy() {
    // Golden-mean shift by the spectral route.
    let golden = sft_entropy(&SftDescr::golden_mean()).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!(
        (golden.value - phi.ln()).abs() < 1e-9,
        "spectral golden value {}",
        golden.value
    );
    // And by word counting at block length 20 within 1e-2.
    let count = SftDescr::golden_mean().count_words(20).unwrap();
    let by_count = (count as f64).ln() / 20.0;
    assert!((by_count - phi.ln()).abs() < 1e-2);
    // Full shift: counting gives ln 2 exactly.
    let full_count = SftDescr::full(2).count_words(20).unwrap();
    assert_eq!(full_count, 1 << 20);
    let full_rate = (full_count as f64).ln() / 20.0;
    assert_eq!(full_rate, 2f64.ln());
    println!(
        "criterion 3 PASS: golden {} (spectral), {} (counting), full shift ln2 exact",
        golden.value, by_count
    );
}

#[test]
fn criterion_04_katok_formula() {
    let start = Instant::now();
    let half = katok_entropy_estimate(&bernoulli(1, 2), 0.5, 24).unwrap();
    assert!(
        (half.slope - 2f64.ln()).abs() < 0.05,
        "balanced slope {}",
        half.slope
    );
    // All cylinders weigh 2^-n: the count at gamma = 1/2 is exactly 2^(n-1).
    let last = half.rows.last().unwrap();
    assert!((last.count_log - 23.0 * 2f64.ln()).abs() < 1e-9);
    let skewed = katok_entropy_estimate(&bernoulli(9, 10), 0.5, 24).unwrap();
    let h = binary_entropy(0.9);
    assert!(
        (skewed.slope - h).abs() < 0.05,
        "skewed slope {} vs {}",
        skewed.slope,
        h
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "katok took {elapsed:?}");
    println!(
        "criterion 4 PASS: slopes {:.4} (target ln2) and {:.4} (target {:.4}) in {elapsed:?}",
        half.slope, skewed.slope, h
    );
}

#[test]
fn criterion_05_saturated_construction() {
    // Segment from the zero fixed point to the balanced Bernoulli measure.
    let d0 = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 0));
    let full = InvariantMeasure::Markov(bernoulli(1, 2));
    let target = MeasurePolyline::new(vec![d0, full.clone()]).unwrap();
    let cfg = SynthesisConfig::new(target.clone(), SftDescr::full(2), 5);
    let schedule = build_saturated_schedule(&cfg).unwrap();
    // Analytic limit-measure set matches the target polyline.
    let vf = vf_limits(&schedule, 2).unwrap();
    let analytic = omegalab::synthesis::polyline_hausdorff(&vf.polyline, &target, 8, 16).unwrap();
    assert!(analytic <= 0.05, "analytic distance {analytic}");
    // Oracle: the empirical-measure sweep along a 10^7-symbol prefix is
    // Hausdorff-close to the segment. Coverage may use any checkpoint; the
    // containment direction uses the n >= 1e5 tail, where early small-sample
    // noise has washed out.
    let horizon = 10_000_000usize;
    let point = schedule.prefix(horizon + 3).unwrap();
    let mut checkpoints: Vec<usize> = Vec::new();
    {
        // Round ends and a geometric grid.
        let mut m = 0u128;
        for k in 1..=12u64 {
            let total = cfg.len.eval(k) * cfg.reps.eval(k);
            m += total;
            if m as usize <= horizon {
                checkpoints.push(m as usize);
            }
        }
        let mut n = 64usize;
        while n <= horizon {
            checkpoints.push(n);
            n = n * 5 / 4;
        }
        checkpoints.sort_unstable();
        checkpoints.dedup();
    }
    // Discretized segment at 1/32 steps.
    let grid: Vec<InvariantMeasure> = (0..=32).map(|i| target.point_at(rat(i, 32))).collect();
    let mut coverage_best = vec![f64::INFINITY; grid.len()];
    let mut tail_worst: f64 = 0.0;
    for &n in &checkpoints {
        let emp = empirical_measure(&point.slice(0, n + 3), 3).unwrap();
        let mut nearest = f64::INFINITY;
        for (g, best) in grid.iter().zip(coverage_best.iter_mut()) {
            let d = weak_star_distance(&emp, g, 8).unwrap().value;
            nearest = nearest.min(d);
            *best = best.min(d);
        }
        if n >= 100_000 {
            tail_worst = tail_worst.max(nearest);
        }
    }
    let coverage_worst = coverage_best.iter().cloned().fold(0.0, f64::max);
    assert!(
        tail_worst <= 0.05,
        "sweep leaves the segment by {tail_worst}"
    );
    assert!(
        coverage_worst <= 0.05,
        "segment not covered within {coverage_worst}"
    );
    // Certified family bound: h_inf - 2 eta, clamped at zero.
    let bound = omegalab::entropy::family_entropy_bound(&cfg).unwrap();
    assert!(bound.raw_bound >= -0.1 - 1e-12);
    assert!(bound.estimate.value >= 0.0);
    let singleton_cfg =
        SynthesisConfig::new(MeasurePolyline::singleton(full), SftDescr::full(2), 5);
    let singleton_bound = omegalab::entropy::family_entropy_bound(&singleton_cfg).unwrap();
    assert!(
        (singleton_bound.estimate.value - (2f64.ln() - 0.1)).abs() < 1e-12,
        "singleton bound {}",
        singleton_bound.estimate.value
    );
    println!(
        "criterion 5 PASS: sweep within {tail_worst:.4}, coverage within {coverage_worst:.4}, bounds {:.4} / {:.4}",
        bound.raw_bound, singleton_bound.estimate.value
    );
}

#[test]
fn criterion_06_entropy_dense_horseshoe() {
    let mu = bernoulli(7, 10);
    let shoe = entropy_dense_horseshoe(&mu, 0.05, 0.1, 0).unwrap();
    let h = binary_entropy(0.7);
    assert!(
        shoe.entropy >= h - 0.05,
        "block entropy {} below {}",
        shoe.entropy,
        h - 0.05
    );
    // 10^3 sampled windows of 10 blocks each: depth-1 statistics within 0.1.
    let target = InvariantMeasure::Markov(mu);
    let k = 10usize;
    let mut failures = 0;
    for trial in 0..1000u64 {
        let point = shoe.sample_point_prefix(k + 1, trial);
        let offset = (trial as usize * 131) % shoe.block_len;
        let window = point.slice(offset, offset + k * shoe.block_len);
        let emp = empirical_measure(&window, 1).unwrap();
        let d = weak_star_distance(&emp, &target, 8).unwrap().value;
        if d > 0.1 {
            failures += 1;
        }
    }
    assert_eq!(failures, 0, "{failures} windows left the 0.1 ball");
    println!(
        "criterion 6 PASS: n = {}, entropy {:.4} >= {:.4}, 1000 windows in the 0.1 ball",
        shoe.block_len,
        shoe.entropy,
        h - 0.05
    );
}

#[test]
fn criterion_07_irregular_witness() {
    let phi = Observable::indicator(2, &Word::parse("1").unwrap()).unwrap();
    let (schedule, witness) = irregular_witness(&phi, 0.1, 3).unwrap();
    let gap = (witness.report.limsup.clone() - witness.report.liminf.clone())
        .to_f64()
        .unwrap();
    assert!(gap >= 0.1, "average gap {gap}");
    let report = statistical_omegas(&schedule, 2).unwrap();
    assert!(
        matches!(report.recurrence, Recurrence::NonRecurrent { .. }),
        "witness must be nonrecurrent"
    );
    assert!(
        witness.entropy.estimate.value >= 2f64.ln() - 0.2,
        "certified bound {} below ln2 - 0.2",
        witness.entropy.estimate.value
    );
    println!(
        "criterion 7 PASS: gap {gap:.4}, certified entropy {:.4} >= {:.4}",
        witness.entropy.estimate.value,
        2f64.ln() - 0.2
    );
}

#[test]
fn criterion_08_level_sets() {
    let phi = Observable::indicator(2, &Word::parse("1").unwrap()).unwrap();
    let half = level_entropy(&phi, 0.5).unwrap();
    assert!(
        (half.value - 2f64.ln()).abs() < 1e-6,
        "t(1/2) = {}",
        half.value
    );
    let quarter = level_entropy(&phi, 0.25).unwrap();
    assert!(
        (quarter.value - binary_entropy(0.25)).abs() < 1e-3,
        "t(1/4) = {}",
        quarter.value
    );
    // Grid oracle: Bernoulli measures on a percent grid.
    for (a, got) in [(0.5, half.value), (0.25, quarter.value)] {
        let oracle = (1..100)
            .map(|i| {
                let p = i as f64 / 100.0;
                if (p - a).abs() < 5e-3 {
                    binary_entropy(p)
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        assert!(
            got >= oracle - 1e-3,
            "optimizer below the grid oracle at a = {a}"
        );
    }
    println!(
        "criterion 8 PASS: t(1/2) = {:.7}, t(1/4) = {:.5}",
        half.value, quarter.value
    );
}

#[test]
fn criterion_09_shadowing() {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    // 10^4 shift pseudo-orbits with agreement cycling 1..=8.
    for trial in 0..10_000u32 {
        let k = (trial % 8 + 1);
        let window = k as usize + 3;
        let steps = 24usize;
        let mut cur: Vec<u8> = (0..window).map(|_| rng.gen_range(0..2)).collect();
        let mut entries = vec![Word::from_ids(&cur)];
        for _ in 1..steps {
            let mut next: Vec<u8> = cur[1..=k as usize].to_vec();
            while next.len() < window {
                next.push(rng.gen_range(0..2));
            }
            entries.push(Word::from_ids(&next));
            cur = next;
        }
        let orbit = ShiftPseudoOrbit::new(entries, k).unwrap();
        let shadow = shadow_shift(&orbit).unwrap();
        assert!(
            shadow.achieved > k,
            "trial {trial}: achieved 2^-{} at agreement {k}",
            shadow.achieved
        );
    }
    // 10^3 doubling-map pseudo-orbits at delta = 2^-8, target 2^-5.
    let delta = dyadic(1, 8);
    let epsilon = dyadic(1, 5);
    let resolution = 20u32;
    let modulus = 1i64 << resolution;
    let jitter_bound = 1i64 << (resolution - 8);
    for _ in 0..1000u32 {
        let mut cur = dyadic(rng.gen_range(0..modulus), resolution);
        let mut pts = vec![cur.clone()];
        for _ in 1..48 {
            let doubled = cur.clone() + cur.clone();
            let frac = doubled.clone() - doubled.floor();
            let jitter = dyadic(rng.gen_range(-jitter_bound + 1..jitter_bound), resolution);
            let mut next = frac + jitter;
            if next < rat(0, 1) {
                next += rat(1, 1);
            }
            if next >= rat(1, 1) {
                next -= rat(1, 1);
            }
            pts.push(next.clone());
            cur = next;
        }
        let orbit = RealPseudoOrbit::new(pts, delta.clone()).unwrap();
        let shadow = shadow_doubling(&orbit, &epsilon).unwrap();
        assert!(
            shadow.deviation <= epsilon,
            "deviation {} above 2^-5",
            shadow.deviation
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 20, "shadowing took {elapsed:?}");
    println!("criterion 9 PASS: 10^4 shift + 10^3 doubling orbits verified in {elapsed:?}");
}

#[test]
fn criterion_10_density_profiles() {
    let set = IndexSet::pattern(vec![PatternAtom::GeometricInterval {
        lo: Template::new(1, 0, 4).unwrap(),
        hi: Template::new(2, 0, 4).unwrap(),
    }])
    .unwrap();
    let exact = density_profile(&set).unwrap();
    assert!(exact.exact);
    assert_eq!(exact.banach_lower, rat(0, 1));
    assert_eq!(exact.lower, rat(1, 3));
    assert_eq!(exact.upper, rat(2, 3));
    assert_eq!(exact.banach_upper, rat(1, 1));
    // Brute-force prefix estimate at N = 4^10.
    let horizon = 1u64 << 20;
    let prefix = IndexSet::finite_prefix(set.materialize(horizon), horizon).unwrap();
    let estimate = density_profile(&prefix).unwrap();
    let e = exact.as_f64();
    let s = estimate.as_f64();
    for i in 0..4 {
        assert!(
            (e[i] - s[i]).abs() <= 1e-3,
            "component {i}: exact {} vs estimate {}",
            e[i],
            s[i]
        );
    }
    println!(
        "criterion 10 PASS: exact (0, 1/3, 2/3, 1); prefix estimates {:?}",
        s
    );
}

#[test]
fn criterion_11_cli_determinism() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_omegalab");
    let dir = tempfile::tempdir().unwrap();
    let invocations: Vec<Vec<String>> = vec![
        vec![
            "realize".into(),
            "--case".into(),
            "4".into(),
            "--seed".into(),
            "1".into(),
        ],
        vec![
            "realize".into(),
            "--case".into(),
            "2'".into(),
            "--seed".into(),
            "7".into(),
        ],
        vec![
            "synth".into(),
            "--vertices".into(),
            "d0,b1/2".into(),
            "--seed".into(),
            "3".into(),
        ],
        vec![
            "density".into(),
            "--pattern".into(),
            "four-intervals".into(),
        ],
        vec!["entropy".into(), "--sft".into(), "golden".into()],
        vec![
            "katok".into(),
            "--measure".into(),
            "b1/2".into(),
            "--n-max".into(),
            "16".into(),
            "--format".into(),
            "csv".into(),
        ],
        vec!["level".into(), "--a".into(), "0.5".into()],
        vec![
            "irregular".into(),
            "--eta".into(),
            "0.1".into(),
            "--seed".into(),
            "2".into(),
        ],
        vec![
            "shadow".into(),
            "--count".into(),
            "50".into(),
            "--seed".into(),
            "4".into(),
        ],
        vec![
            "shadow".into(),
            "--mode".into(),
            "doubling".into(),
            "--count".into(),
            "20".into(),
            "--seed".into(),
            "4".into(),
        ],
        vec![
            "code".into(),
            "--num".into(),
            "1".into(),
            "--den".into(),
            "3".into(),
        ],
    ];
    for (i, args) in invocations.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let sub = dir.path().join(format!("{i}-{run}"));
            std::fs::create_dir_all(&sub).unwrap();
            let out = Command::new(bin)
                .args(args)
                .current_dir(&sub)
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "invocation {args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            // Collect stdout plus every artifact written in the sandbox dir.
            let mut bundle = out.stdout.clone();
            let mut files: Vec<_> = std::fs::read_dir(&sub)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            for f in files {
                bundle.extend(std::fs::read(&f).unwrap());
            }
            outputs.push(bundle);
        }
        assert_eq!(
            outputs[0], outputs[1],
            "invocation {args:?} is not byte-deterministic"
        );
    }
    // Round-trip through verify: a stored certificate re-validates.
    let sub = dir.path().join("verify");
    std::fs::create_dir_all(&sub).unwrap();
    let status = Command::new(bin)
        .args(["realize", "--case", "5", "--seed", "2", "--out", "w.json"])
        .current_dir(&sub)
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(bin)
        .args(["verify", "--in", "w.cert.json", "--schedule", "w.json"])
        .current_dir(&sub)
        .status()
        .unwrap();
    assert!(status.success());
    // Classifying a periodic schedule exits 1 with the center error.
    let periodic = omegalab::schedule::BlockSchedule::eventually_periodic(
        SftDescr::full(2),
        Word::empty(),
        Word::parse("01").unwrap(),
        0,
    )
    .unwrap();
    omegalab::report::save_schedule(&sub.join("periodic.json"), &periodic).unwrap();
    let out = Command::new(bin)
        .args(["classify", "--in", "periodic.json"])
        .current_dir(&sub)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syndetic"));
    println!(
        "criterion 11 PASS: {} invocations byte-identical; exit codes correct",
        invocations.len()
    );
}
