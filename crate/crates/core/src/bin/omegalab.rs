//! Command-line front end: build, classify and certify scheduled orbits,
//! estimate entropies, analyze Birkhoff averages, and run the exact
//! shadowing constructions. All outputs are deterministic for a fixed seed;
//! certificate failures exit 1, usage errors exit 2.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use omegalab::birkhoff::{birkhoff_bounds, irregular_witness, level_entropy, Observable};
use omegalab::density::{density_profile, is_syndetic, visit_times};
use omegalab::entropy::{katok_entropy_estimate, sft_entropy};
use omegalab::error::{Error, Result};
use omegalab::limitset::{classify_case, statistical_omegas, vf_limits, CaseLabel};
use omegalab::measure::{rat, InvariantMeasure, MarkovMeasure, MeasurePolyline, Rat};
use omegalab::report::{
    birkhoff_series_csv, katok_csv, load_certificate, load_schedule, save_certificate,
    save_schedule, write_text, Envelope,
};
use omegalab::schedule::BlockSchedule;
use omegalab::shadow::{
    doubling_coding, dyadic, shadow_doubling, shadow_shift, RealPseudoOrbit, ShiftPseudoOrbit,
};
use omegalab::shift::{IndexSet, PatternAtom, SftDescr, Template, Word};
use omegalab::synthesis::{
    build_saturated_schedule, entropy_dense_horseshoe, omega_realizer, realize_case,
    verify_certificate, RealizeOptions, RecurrenceMode, SynthesisConfig,
};

#[derive(Parser)]
#[command(
    name = "omegalab",
    version,
    about = "orbit schedules, limit sets, entropy"
)]
struct Cli {
    /// PRNG seed; all randomness flows from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cylinder depth for measure-level analysis.
    #[arg(long, global = true, default_value_t = 3)]
    depth: usize,
    /// Truncation of the weak* metric.
    #[arg(long, global = true, default_value_t = 16)]
    rho_terms: usize,
    /// Materialization horizon where one is needed.
    #[arg(long, global = true, default_value_t = 1 << 16)]
    horizon: u64,
    /// Output path (JSON) for commands that write artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for analysis results.
    #[arg(long, global = true, default_value = "json")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Realize one of the twelve cases and certify it.
    Realize {
        /// Case label: 1..6, optionally primed, e.g. 4 or "3'".
        #[arg(long = "case")]
        label: String,
        #[arg(long, default_value = "nonrecurrent")]
        mode: ModeArg,
        /// Ambient alphabet size (>= 3).
        #[arg(long, default_value_t = 3)]
        ambient: usize,
        /// Where to write the certificate (defaults next to --out).
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Classify a stored schedule into its case.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Build a saturated schedule for a measure polyline.
    Synth {
        /// Comma-separated vertex measures, e.g. "d0,b1/2" or "golden".
        #[arg(long)]
        vertices: String,
        /// Carrier shift: full:<m> or golden.
        #[arg(long, default_value = "full:2")]
        lambda: String,
        /// Enumerate the carrier language at zero density.
        #[arg(long, default_value_t = false)]
        sweep: bool,
    },
    /// Limit sets of a stored schedule.
    Omega {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Density profile of a preset pattern or of a schedule's visit times.
    Density {
        /// Preset: evens | three | four-intervals | powers2.
        #[arg(long)]
        pattern: Option<String>,
        /// Schedule file for visit-time analysis.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Cylinder word for visit times, e.g. 01.
        #[arg(long)]
        cyl: Option<String>,
    },
    /// Topological entropy of a subshift.
    Entropy {
        /// Subshift: full:<m> | golden.
        #[arg(long)]
        sft: String,
        /// Also build a concatenation subshift for a Bernoulli measure.
        #[arg(long)]
        horseshoe: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 0.1)]
        zeta: f64,
    },
    /// Katok cylinder-counting entropy of a measure.
    Katok {
        /// Measure: b<p>/<q> | d0 | d1 | golden.
        #[arg(long)]
        measure: String,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 24)]
        n_max: usize,
    },
    /// Level-set entropy of a cylinder observable.
    Level {
        /// Level value.
        #[arg(long)]
        a: f64,
        /// Observable cylinder, e.g. 1 or 01.
        #[arg(long, default_value = "1")]
        obs: String,
    },
    /// Build a divergence witness for an observable.
    Irregular {
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value = "1")]
        obs: String,
    },
    /// Shadow pseudo-orbits (random suites or one from a file) and verify.
    Shadow {
        #[arg(long, default_value = "shift")]
        mode: ShadowMode,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Agreement length for shift pseudo-orbits.
        #[arg(long, default_value_t = 4)]
        agreement: u32,
        /// Steps per pseudo-orbit.
        #[arg(long, default_value_t = 64)]
        steps: usize,
        /// Shadow a stored pseudo-orbit instead of random suites.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Itinerary coding of a rational under the doubling map.
    Code {
        /// Numerator of the point.
        #[arg(long)]
        num: i64,
        /// Denominator of the point.
        #[arg(long)]
        den: i64,
        #[arg(long, default_value_t = 16)]
        len: usize,
    },
    /// Re-validate a stored certificate against its schedule.
    Verify {
        #[arg(long = "in")]
        cert: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Emit the standard report bundle into a directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum ModeArg {
    Nonrecurrent,
    Recurrent,
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum ShadowMode {
    Shift,
    Doubling,
}

fn parse_measure(spec: &str) -> Result<InvariantMeasure> {
    match spec {
        "d0" => Ok(InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 0))),
        "d1" => Ok(InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 1))),
        "golden" => Ok(InvariantMeasure::Markov(MarkovMeasure::from_matrix(vec![
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(1, 1), rat(0, 1)],
        ])?)),
        s if s.starts_with('b') => {
            let frac = &s[1..];
            let (num, den) = frac
                .split_once('/')
                .ok_or_else(|| Error::Invalid(format!("bad measure spec {s:?}")))?;
            let num: i64 = num
                .parse()
                .map_err(|_| Error::Invalid("bad numerator".into()))?;
            let den: i64 = den
                .parse()
                .map_err(|_| Error::Invalid("bad denominator".into()))?;
            Ok(InvariantMeasure::Markov(MarkovMeasure::bernoulli(vec![
                rat(den - num, den),
                rat(num, den),
            ])?))
        }
        other => Err(Error::Invalid(format!("unknown measure spec {other:?}"))),
    }
}

fn parse_sft(spec: &str) -> Result<SftDescr> {
    match spec {
        "golden" => Ok(SftDescr::golden_mean()),
        s if s.starts_with("full:") => {
            let m: usize = s[5..]
                .parse()
                .map_err(|_| Error::Invalid(format!("bad shift spec {s:?}")))?;
            Ok(SftDescr::full(m))
        }
        other => Err(Error::Invalid(format!("unknown shift spec {other:?}"))),
    }
}

fn print_json<T: serde::Serialize + serde::de::DeserializeOwned>(
    kind: &str,
    value: T,
) -> Result<()> {
    print!("{}", Envelope::new(kind, value).to_json()?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let depth = cli.depth.clamp(2, 3);
    match cli.command {
        Command::Realize {
            label,
            mode,
            ambient,
            cert,
        } => {
            let label = CaseLabel::from_str(&label)?;
            let opts = RealizeOptions {
                ambient,
                mode: match mode {
                    ModeArg::Nonrecurrent => RecurrenceMode::NonRecurrent,
                    ModeArg::Recurrent => RecurrenceMode::RecurrentNonTransitive,
                },
                seed: cli.seed,
                depth,
                eta: 0.05,
            };
            let (schedule, certificate) = realize_case(label, opts)?;
            let out = cli
                .out
                .unwrap_or_else(|| PathBuf::from(format!("case-{label}.json")));
            save_schedule(&out, &schedule)?;
            let cert_path = cert.unwrap_or_else(|| {
                let mut p = out.clone();
                p.set_extension("cert.json");
                p
            });
            save_certificate(&cert_path, &certificate)?;
            println!(
                "case {label} realized; schedule -> {}, certificate -> {}",
                out.display(),
                cert_path.display()
            );
            Ok(true)
        }
        Command::Classify { input } => {
            let schedule = load_schedule(&input)?;
            let (label, report) = classify_case(&schedule, depth)?;
            println!("case {label}");
            print_json("classification", report)?;
            Ok(true)
        }
        Command::Synth {
            vertices,
            lambda,
            sweep,
        } => {
            let vertices: Result<Vec<InvariantMeasure>> =
                vertices.split(',').map(parse_measure).collect();
            let target = MeasurePolyline::new(vertices?)?;
            let lambda = parse_sft(&lambda)?;
            let mut cfg = SynthesisConfig::new(target, lambda, cli.seed);
            cfg.sweep_language = sweep;
            cfg.depth = depth;
            let schedule = build_saturated_schedule(&cfg)?;
            let vf = vf_limits(&schedule, cfg.depth)?;
            if let Some(out) = cli.out {
                save_schedule(&out, &schedule)?;
                println!("schedule -> {}", out.display());
            }
            print_json("limit_measures", vf)?;
            Ok(true)
        }
        Command::Omega { input } => {
            let schedule = load_schedule(&input)?;
            let report = statistical_omegas(&schedule, depth)?;
            print_json("omega_report", report)?;
            Ok(true)
        }
        Command::Density {
            pattern,
            input,
            cyl,
        } => {
            let set = match (pattern, input) {
                (Some(name), _) => preset_pattern(&name)?,
                (None, Some(path)) => {
                    let schedule = load_schedule(&path)?;
                    let cyl = Word::parse(&cyl.unwrap_or_else(|| "0".into()))?;
                    visit_times(&schedule, &cyl, cli.horizon)?
                }
                (None, None) => {
                    return Err(Error::Invalid("density needs --pattern or --in".into()))
                }
            };
            let profile = density_profile(&set)?;
            let syndetic = is_syndetic(&set)?;
            println!(
                "profile (B-, d-, d+, B+) = {:?}, exact = {}, syndetic = {:?}",
                profile.as_f64(),
                profile.exact,
                syndetic
            );
            if let Some(out) = cli.out {
                Envelope::new("index_set", set).write(&out)?;
                println!("index set -> {}", out.display());
            }
            print_json("density_profile", profile)?;
            Ok(true)
        }
        Command::Entropy {
            sft,
            horseshoe,
            eta,
            zeta,
        } => {
            let sft = parse_sft(&sft)?;
            let est = sft_entropy(&sft)?;
            print_json("entropy", est)?;
            if let Some(spec) = horseshoe {
                let InvariantMeasure::Markov(mu) = parse_measure(&spec)? else {
                    return Err(Error::Invalid("horseshoe needs a Markov measure".into()));
                };
                let h = entropy_dense_horseshoe(&mu, eta, zeta, cli.seed)?;
                print_json("horseshoe", h)?;
            }
            Ok(true)
        }
        Command::Katok {
            measure,
            gamma,
            n_max,
        } => {
            let InvariantMeasure::Markov(mu) = parse_measure(&measure)? else {
                return Err(Error::Invalid("katok needs a Markov measure".into()));
            };
            let est = katok_entropy_estimate(&mu, gamma, n_max)?;
            match cli.format {
                OutputFormat::Json => print_json("katok", est)?,
                OutputFormat::Csv => print!("{}", katok_csv(&est)),
            }
            Ok(true)
        }
        Command::Level { a, obs } => {
            let phi = Observable::indicator(2, &Word::parse(&obs)?)?;
            let opt = level_entropy(&phi, a)?;
            print_json("level_entropy", opt)?;
            Ok(true)
        }
        Command::Irregular { eta, obs } => {
            let phi = Observable::indicator(2, &Word::parse(&obs)?)?;
            let (schedule, witness) = irregular_witness(&phi, eta, cli.seed)?;
            if let Some(out) = cli.out {
                save_schedule(&out, &schedule)?;
                println!("schedule -> {}", out.display());
            }
            match cli.format {
                OutputFormat::Json => print_json("irregular_witness", witness)?,
                OutputFormat::Csv => print!("{}", birkhoff_series_csv(&witness.report)),
            }
            Ok(true)
        }
        Command::Shadow {
            mode,
            count,
            agreement,
            steps,
            input,
        } => {
            if let Some(path) = input {
                match mode {
                    ShadowMode::Shift => {
                        let orbit = Envelope::<ShiftPseudoOrbit>::read(&path)?.payload;
                        let shadow = shadow_shift(&orbit)?;
                        print_json("shift_shadow", shadow)?;
                    }
                    ShadowMode::Doubling => {
                        let orbit = Envelope::<RealPseudoOrbit>::read(&path)?.payload;
                        let shadow = shadow_doubling(&orbit, &dyadic(1, 5))?;
                        print_json("doubling_shadow", shadow)?;
                    }
                }
                return Ok(true);
            }
            let ok = match mode {
                ShadowMode::Shift => shadow_shift_suite(cli.seed, count, agreement, steps)?,
                ShadowMode::Doubling => shadow_doubling_suite(cli.seed, count, steps)?,
            };
            Ok(ok)
        }
        Command::Code { num, den, len } => {
            let x = BigRational::new(BigInt::from(num), BigInt::from(den));
            let word = doubling_coding(&x, len)?;
            println!("{word}");
            Ok(true)
        }
        Command::Verify { cert, schedule } => {
            let cert = load_certificate(&cert)?;
            let schedule = load_schedule(&schedule)?;
            match verify_certificate(&schedule, &cert) {
                Ok(()) => {
                    println!("certificate valid: case {}", cert.label);
                    Ok(true)
                }
                Err(e) => {
                    eprintln!("certificate invalid: {e}");
                    Ok(false)
                }
            }
        }
        Command::Report { dir } => {
            std::fs::create_dir_all(&dir)?;
            emit_report_bundle(&dir, cli.seed, depth)?;
            println!("report bundle -> {}", dir.display());
            Ok(true)
        }
    }
}

fn preset_pattern(name: &str) -> Result<IndexSet> {
    match name {
        "evens" => IndexSet::pattern(vec![PatternAtom::Arithmetic { start: 0, step: 2 }]),
        "three" => IndexSet::pattern(vec![PatternAtom::Arithmetic { start: 0, step: 3 }]),
        "four-intervals" => IndexSet::pattern(vec![PatternAtom::GeometricInterval {
            lo: Template::new(1, 0, 4)?,
            hi: Template::new(2, 0, 4)?,
        }]),
        "powers2" => IndexSet::pattern(vec![PatternAtom::GeometricPoints {
            pos: Template::new(1, 0, 2)?,
        }]),
        other => Err(Error::Invalid(format!("unknown pattern preset {other:?}"))),
    }
}

fn random_shift_pseudo_orbit(
    rng: &mut ChaCha8Rng,
    agreement: u32,
    steps: usize,
) -> ShiftPseudoOrbit {
    // Random walk through windows: each step keeps the agreed symbols of the
    // shifted predecessor and appends fresh ones.
    let k = agreement as usize;
    let window = k + 4;
    let mut cur: Vec<u8> = (0..window).map(|_| rng.gen_range(0..2u8)).collect();
    let mut entries = Vec::with_capacity(steps);
    entries.push(Word::from_ids(&cur));
    for _ in 1..steps {
        let mut next: Vec<u8> = cur[1..=k].to_vec();
        while next.len() < window {
            next.push(rng.gen_range(0..2u8));
        }
        entries.push(Word::from_ids(&next));
        cur = next;
    }
    ShiftPseudoOrbit::new(entries, agreement).expect("construction respects agreement")
}

fn shadow_shift_suite(seed: u64, count: usize, agreement: u32, steps: usize) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: u32 = u32::MAX;
    for _ in 0..count {
        let orbit = random_shift_pseudo_orbit(&mut rng, agreement, steps);
        let shadow = shadow_shift(&orbit)?;
        worst = worst.min(shadow.achieved);
        if shadow.achieved < agreement + 1 {
            eprintln!("shadow bound violated: achieved 2^-{}", shadow.achieved);
            return Ok(false);
        }
    }
    println!(
        "{count} shift pseudo-orbits (agreement {agreement}) shadowed; worst distance 2^-{worst}"
    );
    Ok(true)
}

fn shadow_doubling_suite(seed: u64, count: usize, steps: usize) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = dyadic(1, 8);
    let epsilon = dyadic(1, 5);
    let mut worst = Rat::from(BigInt::from(0));
    for _ in 0..count {
        let orbit = random_doubling_pseudo_orbit(&mut rng, &delta, steps);
        let shadow = shadow_doubling(&orbit, &epsilon)?;
        if shadow.deviation > worst {
            worst = shadow.deviation.clone();
        }
        if shadow.deviation > epsilon {
            eprintln!("doubling shadow deviation above epsilon");
            return Ok(false);
        }
    }
    use num_traits::ToPrimitive;
    println!(
        "{count} doubling pseudo-orbits (delta 2^-8) shadowed; worst deviation {:.3e}",
        worst.to_f64().unwrap_or(f64::NAN)
    );
    Ok(true)
}

fn random_doubling_pseudo_orbit(
    rng: &mut ChaCha8Rng,
    delta: &Rat,
    steps: usize,
) -> RealPseudoOrbit {
    // Dyadic points with perturbations below delta at each doubling step.
    let resolution = 24u32;
    let modulus = 1i64 << resolution;
    let mut cur = dyadic(rng.gen_range(0..modulus), resolution);
    let mut pts = vec![cur.clone()];
    let delta_num = 1i64 << (resolution - 8); // delta = 2^-8 at this grid
    for _ in 1..steps {
        let doubled = cur.clone() + cur.clone();
        let frac = doubled.clone() - doubled.floor();
        let jitter = dyadic(rng.gen_range(-delta_num + 1..delta_num), resolution);
        let mut next = frac + jitter;
        if next < Rat::from(BigInt::from(0)) {
            next += Rat::from(BigInt::from(1));
        }
        if next >= Rat::from(BigInt::from(1)) {
            next -= Rat::from(BigInt::from(1));
        }
        pts.push(next.clone());
        cur = next;
    }
    RealPseudoOrbit::new(pts, delta.clone()).expect("jitter stays below delta")
}

fn emit_report_bundle(dir: &std::path::Path, seed: u64, depth: usize) -> Result<()> {
    // Birkhoff series of the doubling-blocks schedule.
    use omegalab::schedule::{Generator, Phase};
    let doubling = BlockSchedule::new(
        SftDescr::full(2),
        SftDescr::full(2),
        Word::empty(),
        vec![
            Phase {
                generator: Generator::Periodic {
                    word: Word::parse("0")?,
                },
                len: Template::new(1, 0, 4)?,
                reps: Template::constant(1),
            },
            Phase {
                generator: Generator::Periodic {
                    word: Word::parse("1")?,
                },
                len: Template::new(2, 0, 4)?,
                reps: Template::constant(1),
            },
        ],
        Vec::new(),
        seed,
    )?;
    let phi = Observable::indicator(2, &Word::parse("1")?)?;
    let birkhoff = birkhoff_bounds(&doubling, &phi)?;
    write_text(
        &dir.join("birkhoff-series.csv"),
        &birkhoff_series_csv(&birkhoff),
    )?;
    Envelope::new("birkhoff", birkhoff).write(&dir.join("birkhoff.json"))?;
    // Katok slopes for the balanced Bernoulli measure.
    let mu = MarkovMeasure::bernoulli(vec![rat(1, 2), rat(1, 2)])?;
    let katok = katok_entropy_estimate(&mu, 0.5, 20)?;
    write_text(&dir.join("katok-slope.csv"), &katok_csv(&katok))?;
    Envelope::new("katok", katok).write(&dir.join("katok.json"))?;
    // Limit sets of a generic schedule.
    let mu_inv = InvariantMeasure::Markov(mu);
    let cfg = SynthesisConfig::new(MeasurePolyline::singleton(mu_inv), SftDescr::full(2), seed);
    let schedule = build_saturated_schedule(&cfg)?;
    let report = statistical_omegas(&schedule, depth)?;
    Envelope::new("omega_report", report).write(&dir.join("omega.json"))?;
    // One limit-set realizer example.
    let realizer = omega_realizer(&SftDescr::golden_mean(), &SftDescr::full(2), seed)?;
    save_schedule(&dir.join("realizer.json"), &realizer)?;
    // Cylinder table of the balanced Bernoulli measure.
    let table = MarkovMeasure::bernoulli(vec![rat(1, 2), rat(1, 2)])?.cylinders(3)?;
    write_text(
        &dir.join("cylinders.csv"),
        &omegalab::report::cylinders_csv(&table),
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
