//! Block schedules: finite rules that generate an infinite symbolic point.
//!
//! A schedule cycles through a finite list of phases. In round `k`, phase `p`
//! emits `N_p(k)` blocks of length `n_p(k)` drawn from its generator, with
//! connecting words inserted so the emitted point stays in the designated
//! content shift. Sparse marker blocks (zero natural density, checkable from
//! the growth templates) may be inserted at round starts. Everything is a
//! pure function of the schedule data and its seed.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{
    empirical_measure, weak_star_distance, InvariantMeasure, MeasurePolyline, Rat,
};
use crate::shift::{EvPeriodic, RatioLimit, SftDescr, Symbol, Template, Word};

/// Default cap on materialized prefixes.
pub const PREFIX_CAP: usize = 1 << 24;

/// Default number of weak* metric terms used for genericity checks.
pub const RHO_TERMS: usize = 16;

/// Retry bound when sampling generic words.
pub const RESAMPLE_LIMIT: u32 = 10_000;

/// How one block of content is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// The word repeated cyclically.
    Periodic { word: Word },
    /// A seeded sample from the measure, re-drawn until the empirical
    /// cylinder statistics at `depth` are within `tolerance` of the target
    /// in the truncated weak* metric.
    Sampled {
        measure: InvariantMeasure,
        tolerance: f64,
        depth: usize,
    },
    /// Round `k` emits a generic word for the point of the polyline the
    /// bouncing refinement walk visits at round `k`. The walk sweeps the
    /// polyline back and forth with step halving every sweep and a double
    /// dwell at the endpoints, so consecutive targets get arbitrarily close
    /// while every vertex keeps being revisited.
    PolylineWalk {
        polyline: MeasurePolyline,
        tolerance: f64,
        depth: usize,
    },
    /// Round `k` emits the length-`k` prefix of the `t`-th point of a dense
    /// sequence in the target shift, where `k = n(n-1)/2 + t`. Used to build
    /// points whose limit set is a prescribed proper subshift.
    DenseEnumeration { target: SftDescr },
}

/// Sparse insertions at round starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marker {
    /// At round `k`, one block listing every admissible word of the shift of
    /// length `ceil(log2(k+1))`. Insertion density is `O(k log k / b^k)`.
    LanguageSweep { sft: SftDescr },
    /// At round `k`, the symbol `tag` followed by the first `k` symbols of
    /// `tail`. The tag never recurs with positive density, so the insertion
    /// only adds the tagged tail points to the limit set.
    TaggedPoint { tag: Symbol, tail: EvPeriodic },
}

/// One phase of the round-robin cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub generator: Generator,
    /// Block length template `n_p(k)`.
    pub len: Template,
    /// Repetition template `N_p(k)`.
    pub reps: Template,
}

impl Phase {
    /// Growth of the phase's per-round total `N_p(k) n_p(k)`.
    pub fn total(&self) -> Template {
        self.len.product(&self.reps)
    }
}

/// Finite rule generating an infinite symbolic point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSchedule {
    /// Shift containing everything the schedule emits (tags included).
    pub ambient: SftDescr,
    /// Closed shift the bulk content stays inside; bridges are computed here.
    pub content: SftDescr,
    /// Symbols prepended once, before round 1.
    pub prefix: Word,
    pub phases: Vec<Phase>,
    pub markers: Vec<Marker>,
    pub seed: u64,
}

impl BlockSchedule {
    pub fn new(
        ambient: SftDescr,
        content: SftDescr,
        prefix: Word,
        phases: Vec<Phase>,
        markers: Vec<Marker>,
        seed: u64,
    ) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::UnsupportedSchedule("need at least one phase".into()));
        }
        let s = BlockSchedule {
            ambient,
            content,
            prefix,
            phases,
            markers,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    /// Eventually periodic schedule: a prefix followed by one repeating word.
    pub fn eventually_periodic(
        ambient: SftDescr,
        prefix: Word,
        period: Word,
        seed: u64,
    ) -> Result<Self> {
        let content = ambient.clone();
        BlockSchedule::new(
            ambient,
            content,
            prefix,
            vec![Phase {
                generator: Generator::Periodic { word: period },
                len: Template::constant(64),
                reps: Template::constant(1),
            }],
            Vec::new(),
            seed,
        )
    }

    fn validate(&self) -> Result<()> {
        for phase in &self.phases {
            if let Generator::Periodic { word } = &phase.generator {
                if word.is_empty() {
                    return Err(Error::UnsupportedSchedule(
                        "periodic generator needs a word".into(),
                    ));
                }
            }
        }
        // Marker blocks must have zero density against the round totals.
        let round = self.round_total_template();
        for marker in &self.markers {
            let growth = match marker {
                // Sweep block length is O(k log k) for fixed alphabet; bound
                // it by the quadratic template for the comparison.
                Marker::LanguageSweep { .. } => Template::new(4, 2, 1)?,
                Marker::TaggedPoint { .. } => Template::new(2, 1, 1)?,
            };
            if !growth.ratio_to_partial_sums(&round).is_zero() {
                return Err(Error::UnsupportedSchedule(
                    "marker insertions would have positive density".into(),
                ));
            }
        }
        Ok(())
    }

    /// Combined per-round content growth, `sum_p N_p(k) n_p(k)` up to grade.
    pub fn round_total_template(&self) -> Template {
        let mut best: Option<Template> = None;
        for phase in &self.phases {
            let t = phase.total();
            best = Some(match best {
                None => t,
                Some(b) => {
                    use std::cmp::Ordering::*;
                    match (t.base.cmp(&b.base), t.poly.cmp(&b.poly)) {
                        (Greater, _) => t,
                        (Equal, Greater) => t,
                        (Equal, Equal) => Template {
                            coeff: b.coeff.saturating_add(t.coeff),
                            ..b
                        },
                        _ => b,
                    }
                }
            });
        }
        best.unwrap_or_else(|| Template::constant(1))
    }

    /// Limit behaviour of `n_p(k) / sum_{j<k} total(j)`; must vanish for the
    /// statistical analysis to apply.
    pub fn block_ratio_limit(&self) -> RatioLimit {
        let total = self.round_total_template();
        let mut worst = RatioLimit::Zero;
        for phase in &self.phases {
            let r = phase.len.ratio_to_partial_sums(&total);
            worst = match (worst, r) {
                (RatioLimit::Infinite, _) | (_, RatioLimit::Infinite) => RatioLimit::Infinite,
                (RatioLimit::Finite(a), RatioLimit::Finite(b)) => RatioLimit::Finite(a.max(b)),
                (RatioLimit::Finite(a), _) | (_, RatioLimit::Finite(a)) => RatioLimit::Finite(a),
                _ => RatioLimit::Zero,
            };
        }
        worst
    }

    /// Limit behaviour of `N_p(k) n_p(k) / sum_{j<k} total(j)`, the
    /// domination ratio of fresh rounds over their history.
    pub fn domination_ratio_limit(&self) -> RatioLimit {
        let total = self.round_total_template();
        let mut worst = RatioLimit::Infinite;
        for phase in &self.phases {
            let r = phase.total().ratio_to_partial_sums(&total);
            worst = match (worst, r) {
                (RatioLimit::Zero, _) | (_, RatioLimit::Zero) => RatioLimit::Zero,
                (RatioLimit::Finite(a), RatioLimit::Finite(b)) => RatioLimit::Finite(a.min(b)),
                (RatioLimit::Finite(a), _) | (_, RatioLimit::Finite(a)) => RatioLimit::Finite(a),
                _ => RatioLimit::Infinite,
            };
        }
        worst
    }

    /// Is the schedule eventually periodic (a single constant periodic phase)?
    pub fn eventually_periodic_word(&self) -> Option<Word> {
        if self.phases.len() != 1 || !self.markers.is_empty() {
            return None;
        }
        match &self.phases[0].generator {
            Generator::Periodic { word } => Some(word.primitive_root()),
            _ => None,
        }
    }

    /// Materializes the first `n` symbols (default cap applies).
    pub fn prefix(&self, n: usize) -> Result<Word> {
        self.prefix_capped(n, PREFIX_CAP)
    }

    pub fn prefix_capped(&self, n: usize, cap: usize) -> Result<Word> {
        if n > cap {
            return Err(Error::OversizeRequest {
                requested: n as u128,
                cap: cap as u128,
            });
        }
        let mut out = Word(Vec::with_capacity(n + 64));
        let mut emitter = Emitter {
            schedule: self,
            bridges: self.content.bridges(),
            out: &mut out,
            target: n,
        };
        emitter.run()?;
        out.0.truncate(n);
        Ok(out)
    }

    /// Per-round walk data for a polyline-walk phase: `(sweep, position)` in
    /// edge units.
    pub fn walk_state(round: u64, vertex_count: usize) -> (u32, Rat) {
        walk_state(round, vertex_count)
    }
}

/// Bouncing refinement walk over a polyline with `q` vertices: sweep `s` uses
/// step `2^-(s+2)` edge units, runs 0 -> end -> 0 inclusively, and therefore
/// dwells twice at each endpoint (once at the turn, once across the sweep
/// seam).
fn walk_state(round: u64, q: usize) -> (u32, Rat) {
    assert!(round >= 1);
    if q <= 1 {
        return (0, Rat::zero());
    }
    let edges = (q - 1) as u64;
    let mut t = round - 1;
    let mut sweep: u32 = 0;
    loop {
        let steps_per_dir = edges << (sweep + 2); // (q-1) * 2^(s+2)
        let sweep_len = 2 * (steps_per_dir + 1);
        if t < sweep_len {
            let j = if t <= steps_per_dir {
                t
            } else {
                2 * steps_per_dir + 1 - t
            };
            let pos = Rat::new(
                BigInt::from(j as i64),
                BigInt::from((1u64 << (sweep + 2)) as i64),
            );
            return (sweep, pos);
        }
        t -= sweep_len;
        sweep += 1;
    }
}

/// Deterministic per-block RNG stream key.
fn block_seed(seed: u64, round: u64, phase: u64, rep: u64, attempt: u64) -> u64 {
    // splitmix64 over a field mix
    let mut z = seed
        ^ round.wrapping_mul(0x9E3779B97F4A7C15)
        ^ phase.wrapping_mul(0xBF58476D1CE4E5B9)
        ^ rep.wrapping_mul(0x94D049BB133111EB)
        ^ attempt.wrapping_mul(0xD6E8FEB86659FD93);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

struct Emitter<'a> {
    schedule: &'a BlockSchedule,
    bridges: Vec<Vec<Option<Word>>>,
    out: &'a mut Word,
    target: usize,
}

impl Emitter<'_> {
    fn run(&mut self) -> Result<()> {
        let prefix = self.schedule.prefix.clone();
        self.append_raw(&prefix)?;
        let mut round: u64 = 1;
        while self.out.len() < self.target {
            self.emit_round(round)?;
            round += 1;
            if round > 10_000 {
                return Err(Error::UnsupportedSchedule(
                    "round limit reached before the requested horizon".into(),
                ));
            }
        }
        Ok(())
    }

    fn emit_round(&mut self, round: u64) -> Result<()> {
        let markers = self.schedule.markers.clone();
        for marker in &markers {
            let block = self.marker_block(marker, round)?;
            self.append_bridged(&block)?;
        }
        let phases = self.schedule.phases.clone();
        for (p, phase) in phases.iter().enumerate() {
            let len = phase.len.eval(round);
            let reps = phase.reps.eval(round);
            let len = usize::try_from(len).map_err(|_| Error::OversizeRequest {
                requested: len,
                cap: PREFIX_CAP as u128,
            })?;
            for rep in 0..reps {
                let block =
                    self.generator_block(&phase.generator, round, p as u64, rep as u64, len)?;
                self.append_bridged(&block)?;
                if self.out.len() >= self.target {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    fn marker_block(&self, marker: &Marker, round: u64) -> Result<Word> {
        match marker {
            Marker::LanguageSweep { sft } => {
                let len = ((round + 1) as f64).log2().ceil().max(1.0) as usize;
                let words = sft.language(len)?;
                let bridges = sft.bridges();
                let mut block = Word::empty();
                for w in words {
                    if let Some(&last) = block.0.last() {
                        if !sft.edge(last, w.0[0]) {
                            let b = bridges[last.id()][w.0[0].id()].clone().ok_or_else(|| {
                                Error::UnsupportedSchedule("sweep shift is not connected".into())
                            })?;
                            block.extend(&b);
                        }
                    }
                    block.extend(&w);
                }
                Ok(block)
            }
            Marker::TaggedPoint { tag, tail } => {
                let mut block = Word(vec![*tag]);
                block.extend(&tail.prefix(round as usize));
                Ok(block)
            }
        }
    }

    fn generator_block(
        &self,
        generator: &Generator,
        round: u64,
        phase: u64,
        rep: u64,
        len: usize,
    ) -> Result<Word> {
        match generator {
            Generator::Periodic { word } => Ok(word.cycle_to(len)),
            Generator::Sampled {
                measure,
                tolerance,
                depth,
            } => self.generic_block(measure, *tolerance, *depth, round, phase, rep, len),
            Generator::PolylineWalk {
                polyline,
                tolerance,
                depth,
            } => {
                let (sweep, pos) = walk_state(round, polyline.len());
                let target = polyline.point_at(pos);
                let tol = (tolerance * 0.5f64.powi(sweep as i32)).max(1e-9);
                self.generic_block(&target, tol, *depth, round, phase, rep, len)
            }
            Generator::DenseEnumeration { target } => dense_enumeration_block(target, round, len),
        }
    }

    fn generic_block(
        &self,
        measure: &InvariantMeasure,
        tolerance: f64,
        depth: usize,
        round: u64,
        phase: u64,
        rep: u64,
        len: usize,
    ) -> Result<Word> {
        let seed = block_seed(self.schedule.seed, round, phase, rep, 0);
        let slack = 4.0 * depth.max(1) as f64 / len as f64;
        sample_generic_word(
            &self.schedule.content,
            &self.bridges,
            measure,
            len,
            tolerance,
            slack,
            depth,
            seed,
        )
    }

    fn append_bridged(&mut self, block: &Word) -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        if let Some(&last) = self.out.0.last() {
            let first = block.0[0];
            if !self.schedule.content.edge(last, first) {
                match self.bridges[last.id()][first.id()].clone() {
                    Some(b) => self.append_raw(&b)?,
                    // Junctions out of a prefix or marker tag may sit outside
                    // the content shift; ambient legality is checked below.
                    None if self.schedule.ambient.edge(last, first) => {}
                    None => {
                        return Err(Error::UnsupportedSchedule(
                            "content shift cannot bridge blocks".into(),
                        ))
                    }
                }
            }
        }
        self.append_raw(block)
    }

    fn append_raw(&mut self, block: &Word) -> Result<()> {
        for &s in block.symbols() {
            if s.id() >= self.schedule.ambient.alphabet_size() {
                return Err(Error::AmbientViolation {
                    position: self.out.len(),
                });
            }
            if let Some(&last) = self.out.0.last() {
                if !self.schedule.ambient.edge(last, s) {
                    return Err(Error::AmbientViolation {
                        position: self.out.len(),
                    });
                }
            }
            self.out.push(s);
        }
        Ok(())
    }
}

/// Samples a word of the given length whose empirical statistics at `depth`
/// are within `tolerance + slack` of the measure in the truncated weak*
/// metric, re-drawing up to the retry bound. Mixtures are realized by time
/// sharing their components, bridged inside the content shift. Schedule
/// emission passes a `4 depth / len` slack since short early blocks cannot
/// be statistically sharp; the strict generic-word operation passes zero.
pub fn sample_generic_word(
    content: &SftDescr,
    bridges: &[Vec<Option<Word>>],
    measure: &InvariantMeasure,
    len: usize,
    tolerance: f64,
    slack: f64,
    depth: usize,
    seed: u64,
) -> Result<Word> {
    let depth = depth.max(1);
    let effective_depth = depth.min(len);
    for attempt in 0..RESAMPLE_LIMIT {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (attempt as u64).wrapping_mul(0xA076_1D64_78BD_642F));
        let word = sample_once(content, bridges, measure, len, &mut rng)?;
        debug_assert_eq!(word.len(), len);
        let emp = empirical_measure(&word, effective_depth)?;
        let dist = weak_star_distance(&emp, measure, RHO_TERMS)?;
        if dist.value <= tolerance + slack {
            return Ok(word);
        }
    }
    Err(Error::GenericityFailure {
        attempts: RESAMPLE_LIMIT,
        len,
        tolerance,
    })
}

fn sample_once(
    content: &SftDescr,
    bridges: &[Vec<Option<Word>>],
    measure: &InvariantMeasure,
    len: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Word> {
    match measure {
        InvariantMeasure::Markov(mu) => Ok(sample_markov_path(mu, len, rng)),
        InvariantMeasure::PeriodicOrbit { period, .. } => Ok(period.cycle_to(len)),
        InvariantMeasure::Mix { .. } => {
            let parts = measure.flatten();
            // Allocate lengths proportionally (largest remainder).
            let mut alloc: Vec<usize> = Vec::with_capacity(parts.len());
            let mut acc = Rat::zero();
            let mut assigned = 0usize;
            for (w, _) in &parts {
                acc += w.clone() * Rat::from(BigInt::from(len as u64));
                let upto = acc.floor().to_integer().to_usize().unwrap_or(0);
                alloc.push(upto - assigned);
                assigned = upto;
            }
            if let Some(last) = alloc.last_mut() {
                *last += len - assigned;
            }
            let mut word = Word(Vec::with_capacity(len + 8));
            for ((_, part), part_len) in parts.iter().zip(&alloc) {
                if *part_len == 0 {
                    continue;
                }
                let mut piece = match part {
                    InvariantMeasure::Markov(mu) => sample_markov_path(mu, *part_len, rng),
                    InvariantMeasure::PeriodicOrbit { period, .. } => period.cycle_to(*part_len),
                    InvariantMeasure::Mix { .. } => unreachable!("flattened"),
                };
                if let Some(&last) = word.0.last() {
                    if !content.edge(last, piece.0[0]) {
                        let b = bridges[last.id()][piece.0[0].id()].clone().ok_or_else(|| {
                            Error::UnsupportedSchedule(
                                "content shift cannot connect mixture parts".into(),
                            )
                        })?;
                        // Splice the bridge into the piece, keeping length.
                        let mut spliced = b;
                        spliced.extend(&piece);
                        spliced.0.truncate(*part_len);
                        piece = spliced;
                    }
                }
                word.extend(&piece);
            }
            word.0.truncate(len);
            Ok(word)
        }
    }
}

fn sample_markov_path(
    mu: &crate::measure::MarkovMeasure,
    len: usize,
    rng: &mut ChaCha8Rng,
) -> Word {
    let mut word = Word(Vec::with_capacity(len));
    if len == 0 {
        return word;
    }
    let start = sample_from(&mu.pi, rng);
    word.push(Symbol(start as u8));
    for _ in 1..len {
        let last = word.0[word.len() - 1].id();
        let next = sample_from(&mu.p[last], rng);
        word.push(Symbol(next as u8));
    }
    word
}

fn sample_from(weights: &[Rat], rng: &mut ChaCha8Rng) -> usize {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w.to_f64().unwrap_or(0.0);
        if x < acc {
            return i;
        }
    }
    weights.len().saturating_sub(1)
}

/// Dense-sequence block for limit-set realizers: round `r` decomposes as
/// `r = n(n-1)/2 + t` with `1 <= t <= n`, and the block is the length-`r`
/// prefix of the `t`-th point of a dense sequence in the target shift.
fn dense_enumeration_block(target: &SftDescr, round: u64, len: usize) -> Result<Word> {
    let r = round;
    let mut n = 1u64;
    while n * (n + 1) / 2 < r {
        n += 1;
    }
    let t = r - n * (n - 1) / 2; // 1 <= t <= n
    let point = dense_point(target, t)?;
    Ok(point.prefix(len))
}

/// The `t`-th point (1-based) of a dense sequence in the shift: language
/// words in length-then-lex order, each extended to an eventually periodic
/// point by cycling through a return path.
pub fn dense_point(target: &SftDescr, t: u64) -> Result<EvPeriodic> {
    let mut remaining = t;
    let mut len = 1usize;
    loop {
        let words = target.language(len)?;
        if words.is_empty() {
            return Err(Error::UnsupportedSchedule("target shift is empty".into()));
        }
        if (remaining as usize) <= words.len() {
            let w = words[(remaining - 1) as usize].clone();
            let last = w.0[w.len() - 1];
            let first = w.0[0];
            let bridges = target.bridges();
            let back = bridges[last.id()][first.id()].clone().ok_or_else(|| {
                Error::UnsupportedSchedule("target shift is not connected".into())
            })?;
            let mut period = w.clone();
            period.extend(&back);
            return Ok(EvPeriodic::periodic(period));
        }
        remaining -= words.len() as u64;
        len += 1;
    }
}
