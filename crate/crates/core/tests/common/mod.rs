//! Shared helpers for the integration suites.

use omegalab::measure::{rat, InvariantMeasure, MarkovMeasure, MeasurePolyline};
use omegalab::schedule::{BlockSchedule, Generator, Marker, Phase};
use omegalab::shift::{SftDescr, Template, Word};

/// A deterministic pseudo-random normal-form schedule: the generator mixes
/// periodic, sampled and walk phases with valid growth templates and
/// occasionally adds markers where the growth admits them.
pub fn random_schedule(seed: u64) -> BlockSchedule {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m: usize = rng.gen_range(2..=3);
    let ambient = SftDescr::full(m);
    let content = if m == 2 {
        SftDescr::full(2)
    } else {
        SftDescr::full_on_first(2, 3)
    };
    let bern = |num: i64, den: i64| {
        InvariantMeasure::Markov(
            MarkovMeasure::bernoulli(vec![rat(den - num, den), rat(num, den)]).unwrap(),
        )
    };
    let dirac = |s: usize| InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, s));
    let pick_measure = |rng: &mut rand_chacha::ChaCha8Rng| -> InvariantMeasure {
        match rng.gen_range(0..4) {
            0 => dirac(0),
            1 => dirac(1),
            2 => bern(rng.gen_range(1..10), 10),
            _ => InvariantMeasure::periodic(2, Word::parse("01").unwrap()),
        }
    };
    let kind = rng.gen_range(0..4);
    let mut markers = Vec::new();
    let phases = match kind {
        0 => {
            // Eventually periodic.
            let len = rng.gen_range(1..4);
            let word = Word::from_ids(&(0..len).map(|_| rng.gen_range(0..2u8)).collect::<Vec<_>>());
            vec![Phase {
                generator: Generator::Periodic { word },
                len: Template::constant(rng.gen_range(8..32)),
                reps: Template::constant(1),
            }]
        }
        1 => {
            // Single sampled phase with exponential growth.
            vec![Phase {
                generator: Generator::Sampled {
                    measure: pick_measure(&mut rng),
                    tolerance: 0.3,
                    depth: 2,
                },
                len: Template::new(rng.gen_range(1..3), 0, 2).unwrap(),
                reps: Template::new(1, 1, 2).unwrap(),
            }]
        }
        2 => {
            // Walk over a random polyline.
            let q = rng.gen_range(1..=3);
            let vertices: Vec<InvariantMeasure> = (0..q).map(|_| pick_measure(&mut rng)).collect();
            vec![Phase {
                generator: Generator::PolylineWalk {
                    polyline: MeasurePolyline::new(vertices).unwrap(),
                    tolerance: 0.3,
                    depth: 2,
                },
                len: Template::new(1, 0, 2).unwrap(),
                reps: Template::new(1, 1, 2).unwrap(),
            }]
        }
        _ => {
            // Two round-robin phases sharing one growth grade.
            let base = 4;
            vec![
                Phase {
                    generator: Generator::Sampled {
                        measure: pick_measure(&mut rng),
                        tolerance: 0.3,
                        depth: 2,
                    },
                    len: Template::new(rng.gen_range(1..3), 0, base).unwrap(),
                    reps: Template::constant(1),
                },
                Phase {
                    generator: Generator::Periodic {
                        word: Word::parse(if rng.gen_bool(0.5) { "0" } else { "1" }).unwrap(),
                    },
                    len: Template::new(rng.gen_range(1..3), 0, base).unwrap(),
                    reps: Template::constant(1),
                },
            ]
        }
    };
    // Markers only where rounds grow geometrically.
    if kind != 0 && m == 3 && rng.gen_bool(0.3) {
        markers.push(Marker::TaggedPoint {
            tag: omegalab::shift::Symbol(2),
            tail: omegalab::shift::EvPeriodic::periodic(Word::parse("0").unwrap()),
        });
    }
    let prefix = if m == 3 && rng.gen_bool(0.4) {
        Word::from_ids(&[2])
    } else {
        Word::empty()
    };
    BlockSchedule::new(ambient, content, prefix, phases, markers, rng.gen()).unwrap()
}
