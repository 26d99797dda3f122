//! Limit sets of scheduled orbits: the classical limit set, the four
//! statistical limit sets, the syndetic center, the limit-measure set of the
//! empirical averages, and the twelve-case classification for orbits with
//! empty syndetic center.
//!
//! Everything here is decided on the description level. Supports of Markov
//! measures are memory-1 SFTs, periodic orbits are finite data, marker tails
//! are tagged eventually periodic families, and the sets an orbit can realize
//! are finite unions of those. Equality and inclusion of such unions are
//! decidable; anything outside the normal form is rejected rather than
//! guessed.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{InvariantMeasure, MeasurePolyline, Rat};
use crate::schedule::{BlockSchedule, Generator, Marker};
use crate::shift::{EvPeriodic, RatioLimit, SftDescr, Symbol, Word};

/// A tagged tail family: all points `w . tag . tail` with `w` a finite past
/// in the carrier shift, together with their limits (which land in the
/// carrier). Produced by sparse tagged markers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailFamily {
    pub tag: Symbol,
    pub tail: EvPeriodic,
}

/// Description of a closed invariant subset of the ambient shift.
///
/// The set described is the union of the listed SFT parts, the listed
/// periodic orbits, the tagged tail families, and (when `junctions` is set)
/// finitely many heteroclinic connector families among the components.
/// Connector families arise from block junctions; they add no invariant
/// measures, so they never move the measure-theoretic sets, and inclusion
/// checks treat them conservatively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubshiftDescr {
    pub m: usize,
    pub sfts: Vec<SftDescr>,
    pub orbits: Vec<Word>,
    pub tails: Vec<TailFamily>,
    pub junctions: bool,
    pub label: Option<String>,
}

impl SubshiftDescr {
    pub fn empty(m: usize) -> Self {
        SubshiftDescr {
            m,
            sfts: Vec::new(),
            orbits: Vec::new(),
            tails: Vec::new(),
            junctions: false,
            label: None,
        }
    }

    pub fn from_sft(m: usize, sft: SftDescr) -> Self {
        SubshiftDescr {
            m,
            sfts: vec![sft],
            orbits: Vec::new(),
            tails: Vec::new(),
            junctions: false,
            label: None,
        }
        .normalized()
    }

    pub fn from_orbit(m: usize, period: Word) -> Self {
        SubshiftDescr {
            m,
            sfts: Vec::new(),
            orbits: vec![period],
            tails: Vec::new(),
            junctions: false,
            label: None,
        }
        .normalized()
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn is_empty_set(&self) -> bool {
        self.sfts.iter().all(SftDescr::is_empty_shift)
            && self.orbits.is_empty()
            && self.tails.is_empty()
    }

    /// Canonical form: orbits in least rotation, single-cycle SFT parts
    /// converted to orbits, components absorbed into any SFT part that
    /// already contains them, duplicates dropped.
    pub fn normalized(&self) -> SubshiftDescr {
        let mut sfts: Vec<SftDescr> = Vec::new();
        let mut orbits: Vec<Word> = self
            .orbits
            .iter()
            .map(|w| w.primitive_root().least_rotation())
            .collect();
        for sft in &self.sfts {
            let live = sft.live_states();
            if live.is_empty() {
                continue;
            }
            let restricted = sft.restrict(&live);
            // A disjoint union of simple cycles is a finite set of orbits.
            if let Some(c) = as_cycles(&restricted) {
                orbits.extend(c);
            } else {
                sfts.push(restricted);
            }
        }
        // Drop SFT parts contained in another SFT part.
        let mut keep = vec![true; sfts.len()];
        for i in 0..sfts.len() {
            for j in 0..sfts.len() {
                if i != j
                    && keep[i]
                    && keep[j]
                    && sft_subset(&sfts[i], &sfts[j])
                    && (i > j || !sft_subset(&sfts[j], &sfts[i]))
                {
                    keep[i] = false;
                }
            }
        }
        let sfts: Vec<SftDescr> = sfts
            .into_iter()
            .zip(keep)
            .filter_map(|(s, k)| k.then_some(s))
            .collect();
        orbits.sort();
        orbits.dedup();
        orbits.retain(|o| !sfts.iter().any(|s| orbit_in_sft(o, s)));
        let mut tails = self.tails.clone();
        tails.sort_by_key(|t| (t.tag, t.tail.pre.clone(), t.tail.per.clone()));
        tails.dedup();
        let junctions = self.junctions && !(sfts.is_empty() && orbits.is_empty());
        SubshiftDescr {
            m: self.m,
            sfts,
            orbits,
            tails,
            junctions,
            label: self.label.clone(),
        }
    }

    /// Over-approximate admissibility of a word in the described set's
    /// language. Exact for SFT parts and orbits; tail families allow any
    /// past from the SFT/orbit parts before the tag.
    pub fn admits_word(&self, w: &Word) -> bool {
        if w.is_empty() {
            return true;
        }
        if self.sfts.iter().any(|s| s.admits(w)) {
            return true;
        }
        if self.orbits.iter().any(|per| word_in_orbit(w, per)) {
            return true;
        }
        for tf in &self.tails {
            if let Some(i) = w.symbols().iter().position(|&s| s == tf.tag) {
                let past = w.slice(0, i);
                let future = w.slice(i + 1, w.len());
                let tail_ok = (0..future.len()).all(|j| future.0[j] == tf.tail.at(j));
                let past_ok = past.is_empty()
                    || self.sfts.iter().any(|s| s.admits(&past))
                    || self.orbits.iter().any(|per| word_in_orbit(&past, per));
                if tail_ok && past_ok {
                    return true;
                }
            }
        }
        // Junction families interleave component languages; conservative
        // over-approximation: any split into a component suffix and prefix.
        if self.junctions {
            for cut in 1..w.len() {
                let a = w.slice(0, cut);
                let b = w.slice(cut, w.len());
                let a_ok = self.sfts.iter().any(|s| s.admits(&a))
                    || self.orbits.iter().any(|p| word_in_orbit(&a, p));
                let b_ok = self.sfts.iter().any(|s| s.admits(&b))
                    || self.orbits.iter().any(|p| word_in_orbit(&b, p));
                if a_ok && b_ok {
                    return true;
                }
            }
        }
        false
    }

    /// Set inclusion, sound and complete for the normal form (memory-1 SFT
    /// parts, orbits, tail families), conservative for junction flags.
    pub fn subset(&self, other: &SubshiftDescr) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        for sft in &a.sfts {
            if !b.sfts.iter().any(|s| sft_subset(sft, s)) {
                return false;
            }
        }
        for orbit in &a.orbits {
            let inside = b.sfts.iter().any(|s| orbit_in_sft(orbit, s))
                || b.orbits.iter().any(|o| o == orbit);
            if !inside {
                return false;
            }
        }
        for tf in &a.tails {
            let inside = b.tails.iter().any(|t| t == tf) || tail_in_sfts(tf, &b);
            if !inside {
                return false;
            }
        }
        if a.junctions {
            let covered = !b.sfts.is_empty() && covering_sft_exists(&b.sfts, &b.orbits);
            if !(covered || b.junctions) {
                return false;
            }
        }
        true
    }

    /// Set equality: mutual inclusion of the measure-carrying parts plus
    /// identical tail and junction structure (those parts contain points
    /// outside every component, so they are part of set identity).
    pub fn set_eq(&self, other: &SubshiftDescr) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        a.subset(&b) && b.subset(&a) && a.junctions == b.junctions && a.tails == b.tails
    }

    pub fn strict_subset(&self, other: &SubshiftDescr) -> bool {
        self.subset(other) && !self.set_eq(other)
    }

    /// The measure center: closure of the union of supports of invariant
    /// measures on the set. Tail families and junction connectors carry no
    /// invariant measures, so only the essential parts of the SFT components
    /// and the orbits survive.
    pub fn measure_center(&self) -> SubshiftDescr {
        let norm = self.normalized();
        let mut out = SubshiftDescr::empty(norm.m);
        for sft in &norm.sfts {
            for comp in sft.essential_components() {
                let part = sft.restrict(&comp);
                if let Some(cycles) = as_cycles(&part) {
                    out.orbits.extend(cycles);
                } else {
                    out.sfts.push(part);
                }
            }
        }
        out.orbits.extend(norm.orbits.iter().cloned());
        out.normalized()
    }

    /// Minimal subsets of the set, as far as the description determines
    /// them: each orbit is minimal; an essential SFT component that is not a
    /// single cycle contains at least two disjoint periodic orbits.
    fn minimal_sets(&self) -> MinimalSets {
        let center = self.measure_center();
        let mut orbits: Vec<Word> = center.orbits.clone();
        for sft in &center.sfts {
            for comp in sft.essential_components() {
                let part = sft.restrict(&comp);
                if let Some(c) = as_cycles(&part) {
                    orbits.extend(c);
                } else {
                    return MinimalSets::Many;
                }
            }
        }
        orbits.sort();
        orbits.dedup();
        match orbits.len() {
            0 => MinimalSets::None,
            1 => MinimalSets::One(orbits.pop().unwrap()),
            _ => MinimalSets::Many,
        }
    }

    /// Intersection, computed componentwise.
    pub fn intersect(&self, other: &SubshiftDescr) -> SubshiftDescr {
        let a = self.normalized();
        let b = other.normalized();
        let mut out = SubshiftDescr::empty(a.m.max(b.m));
        for x in &a.sfts {
            for y in &b.sfts {
                out.sfts.push(sft_intersect(x, y));
            }
            for o in &b.orbits {
                if orbit_in_sft(o, x) {
                    out.orbits.push(o.clone());
                }
            }
        }
        for o in &a.orbits {
            if b.sfts.iter().any(|y| orbit_in_sft(o, y)) || b.orbits.iter().any(|p| p == o) {
                out.orbits.push(o.clone());
            }
        }
        for tf in &a.tails {
            if b.tails.iter().any(|t| t == tf) {
                out.tails.push(tf.clone());
            }
        }
        out.normalized()
    }

    /// Union of the two descriptions.
    pub fn union(&self, other: &SubshiftDescr) -> SubshiftDescr {
        let mut out = self.clone();
        out.m = out.m.max(other.m);
        out.sfts.extend(other.sfts.iter().cloned());
        out.orbits.extend(other.orbits.iter().cloned());
        out.tails.extend(other.tails.iter().cloned());
        out.junctions |= other.junctions;
        out.label = None;
        out.normalized()
    }
}

fn covering_sft_exists(sfts: &[SftDescr], orbits: &[Word]) -> bool {
    sfts.iter().any(|big| {
        sfts.iter().all(|s| sft_subset(s, big)) && orbits.iter().all(|o| orbit_in_sft(o, big))
    })
}

/// Are all junction connectors between the description's components already
/// inside one covering component? Connectors run suffix-bridge-prefix with
/// bridges from the content shift, so the covering part must admit, for
/// every pair of component symbols, either the direct edge or the bridged
/// word between them.
fn junctions_absorbed(descr: &SubshiftDescr, content: &SftDescr) -> bool {
    let Some(cover) = descr.sfts.iter().find(|big| {
        descr.sfts.iter().all(|s| sft_subset(s, big))
            && descr.orbits.iter().all(|o| orbit_in_sft(o, big))
    }) else {
        return false;
    };
    // Live symbols across all components.
    let mut symbols: Vec<usize> = Vec::new();
    for s in &descr.sfts {
        symbols.extend(s.live_states());
    }
    for o in &descr.orbits {
        symbols.extend(o.symbols().iter().map(|s| s.id()));
    }
    symbols.sort_unstable();
    symbols.dedup();
    let bridges = content.bridges();
    for &a in &symbols {
        for &b in &symbols {
            let direct = cover.edge(Symbol(a as u8), Symbol(b as u8));
            if direct {
                continue;
            }
            let Some(bridge) = bridges
                .get(a)
                .and_then(|row| row.get(b))
                .and_then(|x| x.clone())
            else {
                return false;
            };
            let mut word = Word(vec![Symbol(a as u8)]);
            word.extend(&bridge);
            word.push(Symbol(b as u8));
            if !cover.admits(&word) {
                return false;
            }
        }
    }
    true
}

enum MinimalSets {
    None,
    One(Word),
    Many,
}

impl fmt::Display for SubshiftDescr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty_set() {
            return write!(f, "{{}}");
        }
        let mut parts = Vec::new();
        for s in &self.sfts {
            parts.push(match s {
                SftDescr::Memory1 { m, .. } => format!("sft[{m} states]"),
                SftDescr::Block {
                    blocks, block_len, ..
                } => format!("blocks[{} x len {}]", blocks.len(), block_len),
            });
        }
        for o in &self.orbits {
            parts.push(format!("orbit({o})"));
        }
        for t in &self.tails {
            parts.push(format!("tails({}->{})", t.tag.0, t.tail));
        }
        if self.junctions {
            parts.push("junctions".into());
        }
        write!(f, "{}", parts.join(" u "))
    }
}

fn word_in_orbit(w: &Word, per: &Word) -> bool {
    if w.is_empty() {
        return true;
    }
    let l = per.len();
    (0..l).any(|r| (0..w.len()).all(|i| per.0[(r + i) % l] == w.0[i]))
}

fn orbit_in_sft(per: &Word, sft: &SftDescr) -> bool {
    let mut extended = per.clone();
    extended.push(per.0[0]);
    sft.admits(&extended)
}

/// Memory-1 set inclusion: every live edge of `a` is an edge of `b`.
fn sft_subset(a: &SftDescr, b: &SftDescr) -> bool {
    match (a, b) {
        (SftDescr::Memory1 { m: ma, .. }, SftDescr::Memory1 { m: mb, allowed: eb }) => {
            let live = a.live_states();
            let ra = a.restrict(&live);
            let SftDescr::Memory1 { allowed: ea, .. } = &ra else {
                unreachable!()
            };
            for i in 0..*ma {
                for j in 0..*ma {
                    if ea[i][j] && (i >= *mb || j >= *mb || !eb[i][j]) {
                        return false;
                    }
                }
            }
            true
        }
        _ => {
            // Block shifts: compare languages to a conservative depth.
            let depth = 2 * a.alphabet_size() * a.alphabet_size() + 2;
            for n in 1..=depth {
                let (Ok(la), Ok(lb)) = (a.language(n), b.language(n)) else {
                    return false;
                };
                if la.iter().any(|w| lb.binary_search(w).is_err()) {
                    return false;
                }
            }
            true
        }
    }
}

fn sft_intersect(a: &SftDescr, b: &SftDescr) -> SftDescr {
    match (a, b) {
        (SftDescr::Memory1 { m: ma, allowed: ea }, SftDescr::Memory1 { m: mb, allowed: eb }) => {
            let m = (*ma).max(*mb);
            let shared = (*ma).min(*mb);
            let mut allowed = vec![vec![false; m]; m];
            for (i, row) in allowed.iter_mut().enumerate().take(shared) {
                for (j, cell) in row.iter_mut().enumerate().take(shared) {
                    *cell = ea[i][j] && eb[i][j];
                }
            }
            SftDescr::Memory1 { m, allowed }
        }
        _ => {
            // Intersection through the memory-1 hull of block shifts; the
            // schedules built here only intersect memory-1 supports, so the
            // hull is never reached with a proper block shift in practice.
            let hull = |s: &SftDescr| -> SftDescr {
                match s {
                    SftDescr::Memory1 { .. } => s.clone(),
                    SftDescr::Block { m, .. } => {
                        let mut allowed = vec![vec![false; *m]; *m];
                        if let Ok(lang) = s.language(2) {
                            for w in lang {
                                allowed[w.0[0].id()][w.0[1].id()] = true;
                            }
                        }
                        SftDescr::Memory1 { m: *m, allowed }
                    }
                }
            };
            sft_intersect(&hull(a), &hull(b))
        }
    }
}

/// Decomposes an SFT whose live part is a disjoint union of simple cycles
/// into the cycle words; `None` when some state branches.
fn as_cycles(sft: &SftDescr) -> Option<Vec<Word>> {
    let SftDescr::Memory1 { m, allowed } = sft else {
        return None;
    };
    let live = sft.live_states();
    if live.is_empty() {
        return Some(Vec::new());
    }
    let next: Vec<Option<usize>> = (0..*m)
        .map(|i| {
            if !live.contains(&i) {
                return None;
            }
            let succ: Vec<usize> = (0..*m)
                .filter(|&j| allowed[i][j] && live.contains(&j))
                .collect();
            (succ.len() == 1).then(|| succ[0])
        })
        .collect();
    for &i in &live {
        next[i]?;
        let preds = live.iter().filter(|&&j| next[j] == Some(i)).count();
        if preds != 1 {
            return None;
        }
    }
    let mut seen = vec![false; *m];
    let mut cycles = Vec::new();
    for &start in &live {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = start;
        loop {
            seen[cur] = true;
            cycle.push(Symbol(cur as u8));
            cur = next[cur].unwrap();
            if cur == start {
                break;
            }
            if seen[cur] {
                return None;
            }
        }
        cycles.push(Word(cycle).least_rotation());
    }
    Some(cycles)
}

fn tail_in_sfts(tf: &TailFamily, b: &SubshiftDescr) -> bool {
    // A tail family lies inside an SFT part when that part admits the tag
    // edges and the tail itself.
    b.sfts.iter().any(|s| {
        let SftDescr::Memory1 { m, allowed } = s else {
            return false;
        };
        if tf.tag.id() >= *m {
            return false;
        }
        let live = s.live_states();
        let tag_in = live.iter().any(|&i| allowed[i][tf.tag.id()]);
        let tag_out = allowed[tf.tag.id()][tf.tail.at(0).id()];
        let span = tf.tail.pre.len() + 2 * tf.tail.per.len() + 1;
        let tail_ok = (0..span).all(|i| s.edge(tf.tail.at(i), tf.tail.at(i + 1)));
        tag_in && tag_out && tail_ok
    })
}

/// Support of an exact invariant measure as a set description.
pub fn measure_support(m: usize, mu: &InvariantMeasure) -> SubshiftDescr {
    match mu {
        InvariantMeasure::Markov(chain) => SubshiftDescr::from_sft(m, chain.support()),
        InvariantMeasure::PeriodicOrbit { period, .. } => {
            SubshiftDescr::from_orbit(m, period.clone())
        }
        InvariantMeasure::Mix { parts } => {
            let mut out = SubshiftDescr::empty(m);
            for (w, p) in parts {
                if !w.is_zero() {
                    out = out.union(&measure_support(m, p));
                }
            }
            out
        }
    }
}

/// One of the twelve asymptotic behaviour cases (index 1..=6, optionally
/// primed). Primed cases have the classical limit set strictly larger than
/// the upper Banach set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaseLabel {
    pub index: u8,
    pub primed: bool,
}

impl CaseLabel {
    pub fn new(index: u8, primed: bool) -> Result<Self> {
        if !(1..=6).contains(&index) {
            return Err(Error::Invalid(format!("case index {index} out of range")));
        }
        Ok(CaseLabel { index, primed })
    }

    pub fn all() -> Vec<CaseLabel> {
        (1..=6)
            .flat_map(|i| {
                [false, true].into_iter().map(move |p| CaseLabel {
                    index: i,
                    primed: p,
                })
            })
            .collect()
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.index, if self.primed { "'" } else { "" })
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let primed = s.ends_with('\'');
        let digits = s.trim_end_matches('\'');
        let index: u8 = digits
            .parse()
            .map_err(|_| Error::Invalid(format!("bad case label {s:?}")))?;
        CaseLabel::new(index, primed)
    }
}

/// How the orbit relates to its own limit set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recurrence {
    /// The word is an initial segment of the orbit that the limit set's
    /// language does not contain.
    NonRecurrent {
        witness: Word,
    },
    Recurrent,
    Unknown,
}

/// The five limit sets of an orbit, chain-ordered, plus recurrence data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub omega_f: SubshiftDescr,
    pub banach_lower: SubshiftDescr,
    pub density_lower: SubshiftDescr,
    pub density_upper: SubshiftDescr,
    pub banach_upper: SubshiftDescr,
    pub depth: usize,
    pub recurrence: Recurrence,
}

impl OmegaReport {
    /// The chain `B_lower <= d_lower <= d_upper <= B_upper <= omega_f`.
    pub fn chain_holds(&self) -> bool {
        self.banach_lower.subset(&self.density_lower)
            && self.density_lower.subset(&self.density_upper)
            && self.density_upper.subset(&self.banach_upper)
            && self.banach_upper.subset(&self.omega_f)
    }
}

/// How the limit-measure set was derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VfRegime {
    /// Single limit measure.
    Singleton,
    /// A refinement walk with vanishing radii traces the polyline exactly.
    WalkExact,
    /// Round-robin phases with a bounded domination ratio: the limit measures
    /// are the cyclic history averages, joined by sweep segments.
    CyclicCombinations { ratio: f64 },
    /// Polynomially growing rounds: history dominates and the averages
    /// converge to a single mixture.
    Averaged,
}

/// The limit set of empirical measures of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VfDescription {
    pub polyline: MeasurePolyline,
    pub regime: VfRegime,
    pub is_singleton: bool,
    /// When the limit set is carried by a transitive SFT, ergodic measures
    /// are dense there and the quasi-generic measure set is all invariant
    /// measures on the limit set; otherwise only containment is certified.
    pub vstar_is_full: bool,
}

impl VfDescription {
    /// Whether the measure lies within `tol` of the described set in the
    /// truncated weak* metric, along with the attained distance.
    pub fn contains_measure(
        &self,
        mu: &InvariantMeasure,
        tol: f64,
        terms: usize,
    ) -> crate::error::Result<(bool, f64)> {
        let grid = 16usize;
        let mut best = f64::INFINITY;
        let q = self.polyline.vertices.len();
        let steps = if q <= 1 { 1 } else { (q - 1) * grid };
        for i in 0..=steps {
            let t = Rat::new(BigInt::from(i as u64), BigInt::from(grid.max(1) as u64));
            let point = self.polyline.point_at(t);
            let d = crate::measure::weak_star_distance(&point, mu, terms)?.value;
            best = best.min(d);
        }
        Ok((best <= tol, best))
    }
}

fn phase_limit_measure(g: &Generator) -> Result<InvariantMeasure> {
    match g {
        Generator::Periodic { word } => Ok(InvariantMeasure::periodic(
            word.min_alphabet(),
            word.clone(),
        )),
        Generator::Sampled { measure, .. } => Ok(measure.clone()),
        Generator::PolylineWalk { .. } => Err(Error::UnsupportedSchedule(
            "walk phases are handled at the schedule level".into(),
        )),
        Generator::DenseEnumeration { .. } => Err(Error::UnsupportedSchedule(
            "dense-enumeration schedules have no closed-form limit measures".into(),
        )),
    }
}

/// Limit-measure set of the schedule's empirical averages, with flags.
pub fn vf_limits(schedule: &BlockSchedule, _depth: usize) -> Result<VfDescription> {
    if let Some(word) = schedule.eventually_periodic_word() {
        let mu = InvariantMeasure::periodic(schedule.ambient.alphabet_size(), word);
        return Ok(VfDescription {
            polyline: MeasurePolyline::singleton(mu),
            regime: VfRegime::Singleton,
            is_singleton: true,
            vstar_is_full: true,
        });
    }
    // Walk schedules: one phase tracing a polyline with shrinking radii.
    if schedule.phases.len() == 1 {
        if let Generator::PolylineWalk { polyline, .. } = &schedule.phases[0].generator {
            match schedule.domination_ratio_limit() {
                RatioLimit::Zero => {
                    return Err(Error::UnsupportedSchedule(
                        "walk rounds are dominated by history; averages collapse".into(),
                    ))
                }
                RatioLimit::Finite(r) if r < 0.5 => {
                    return Err(Error::UnsupportedSchedule(format!(
                        "walk domination ratio {r} too small to trace the polyline"
                    )))
                }
                _ => {}
            }
            return Ok(VfDescription {
                polyline: polyline.clone(),
                regime: if polyline.is_singleton() {
                    VfRegime::Singleton
                } else {
                    VfRegime::WalkExact
                },
                is_singleton: polyline.is_singleton(),
                vstar_is_full: true,
            });
        }
    }
    // Round-robin phases with fixed limit measures.
    let measures: Result<Vec<InvariantMeasure>> = schedule
        .phases
        .iter()
        .map(|p| phase_limit_measure(&p.generator))
        .collect();
    let measures = measures?;
    if measures.len() == 1 {
        return Ok(VfDescription {
            polyline: MeasurePolyline::singleton(measures.into_iter().next().unwrap()),
            regime: VfRegime::Singleton,
            is_singleton: true,
            vstar_is_full: true,
        });
    }
    // All phase totals must share one growth grade for closed-form limits.
    let totals: Vec<_> = schedule.phases.iter().map(|p| p.total()).collect();
    let (b0, a0) = (totals[0].base, totals[0].poly);
    if totals.iter().any(|t| t.base != b0 || t.poly != a0) {
        return Err(Error::UnsupportedSchedule(
            "phases with different growth grades have no closed-form limit set".into(),
        ));
    }
    match schedule.domination_ratio_limit() {
        RatioLimit::Zero => {
            // History dominates every fresh round: a single mixture limit.
            let total: u64 = totals.iter().map(|t| t.coeff).sum();
            let parts: Vec<(Rat, InvariantMeasure)> = totals
                .iter()
                .zip(&measures)
                .map(|(t, mu)| {
                    (
                        Rat::new(BigInt::from(t.coeff), BigInt::from(total)),
                        mu.clone(),
                    )
                })
                .collect();
            let mu = InvariantMeasure::mix(parts)?;
            Ok(VfDescription {
                polyline: MeasurePolyline::singleton(mu),
                regime: VfRegime::Averaged,
                is_singleton: true,
                vstar_is_full: true,
            })
        }
        RatioLimit::Finite(r) => {
            // Cyclic history averages: at the end of phase q in round k the
            // phase weights tend to c_p for p <= q and c_p / B for p > q,
            // with B the shared base (polynomial factors cancel).
            let base = Rat::from(BigInt::from(b0));
            let q_count = measures.len();
            let mut vertices = Vec::with_capacity(q_count + 1);
            for q in 0..q_count {
                let mut weights: Vec<Rat> = Vec::with_capacity(q_count);
                for (p, t) in totals.iter().enumerate() {
                    let c = Rat::from(BigInt::from(t.coeff));
                    weights.push(if p <= q { c } else { c / base.clone() });
                }
                let total: Rat = weights.iter().cloned().sum();
                let parts: Vec<(Rat, InvariantMeasure)> = weights
                    .into_iter()
                    .zip(&measures)
                    .map(|(w, mu)| (w / total.clone(), mu.clone()))
                    .collect();
                vertices.push(InvariantMeasure::mix(parts)?);
            }
            // The sweep returns to the first vertex: close the polygon.
            vertices.push(vertices[0].clone());
            Ok(VfDescription {
                polyline: MeasurePolyline::new(vertices)?,
                regime: VfRegime::CyclicCombinations { ratio: r },
                is_singleton: false,
                vstar_is_full: true,
            })
        }
        RatioLimit::Infinite => unreachable!("template family has bounded term/sum ratios"),
    }
}

/// The classical limit set of the schedule's point, computed symbolically.
pub fn omega_limit(schedule: &BlockSchedule) -> Result<SubshiftDescr> {
    let m = schedule.ambient.alphabet_size();
    if let Some(word) = schedule.eventually_periodic_word() {
        return Ok(SubshiftDescr::from_orbit(m, word));
    }
    // Sampled and walk phases contribute their full support to the limit
    // set only when their block lengths are unbounded.
    for phase in &schedule.phases {
        let unbounded = phase.len.base > 1 || phase.len.poly >= 1;
        let needs_growth = matches!(
            phase.generator,
            Generator::Sampled { .. } | Generator::PolylineWalk { .. }
        );
        if needs_growth && !unbounded {
            return Err(Error::UnsupportedSchedule(
                "sampled phases need unbounded block lengths for a closed-form limit set".into(),
            ));
        }
    }
    let mut tails = Vec::new();
    let mut covers_content = false;
    for marker in &schedule.markers {
        match marker {
            Marker::LanguageSweep { sft } => {
                if sft != &schedule.content {
                    return Err(Error::UnsupportedSchedule(
                        "language sweep must enumerate the content shift".into(),
                    ));
                }
                covers_content = true;
            }
            Marker::TaggedPoint { tag, tail } => {
                // The tail must fall back into the content shift, so the
                // family adds no invariant measures.
                let probe = tail.prefix(tail.pre.len() + 2 * tail.per.len() + 2);
                if !schedule.content.admits(&probe) {
                    return Err(Error::UnsupportedSchedule(
                        "marker tail leaves the content shift".into(),
                    ));
                }
                tails.push(TailFamily {
                    tag: *tag,
                    tail: tail.clone(),
                });
            }
        }
    }
    // Bulk contribution: supports of the limit measures of the phases (for a
    // walk, of every vertex; for a dense enumeration, the whole target),
    // visited with unbounded block lengths.
    let mut enumerates_target = false;
    let mut bulk = SubshiftDescr::empty(m);
    for phase in &schedule.phases {
        match &phase.generator {
            Generator::PolylineWalk { polyline, .. } => {
                for v in &polyline.vertices {
                    bulk = bulk.union(&measure_support(m, v));
                }
            }
            Generator::DenseEnumeration { target } => {
                // Growing prefixes of a dense sequence: every target word
                // occurs at unbounded positions, and the bridge junctions
                // fall back into the target after finitely many shifts.
                bulk = bulk.union(&SubshiftDescr::from_sft(m, target.clone()));
                enumerates_target = true;
            }
            g => {
                let mu = phase_limit_measure(g)?;
                bulk = bulk.union(&measure_support(m, &mu));
            }
        }
    }
    let content_live = schedule.content.restrict(&schedule.content.live_states());
    let content_descr = SubshiftDescr::from_sft(m, content_live);
    if covers_content || content_descr.subset(&bulk) {
        // Every admissible content word occurs at unbounded positions.
        let mut out = content_descr;
        out.tails = tails;
        return Ok(out.normalized());
    }
    // No full coverage: the limit set is the support union plus junction
    // connector families from the block concatenation. The flag is dropped
    // when some component already absorbs every junction the bridging shift
    // can produce.
    let mut out = bulk.normalized();
    out.tails = tails;
    let multi = enumerates_target
        || schedule.phases.len() > 1
        || matches!(schedule.phases[0].generator, Generator::PolylineWalk { .. });
    out.junctions = multi && !junctions_absorbed(&out, &schedule.content);
    Ok(out.normalized())
}

/// The syndetic center: the unique minimal set the orbit visits with bounded
/// gaps, or the empty set. The center equals the intersection of supports of
/// all invariant measures on the limit set, so it is nonempty exactly when
/// the limit set carries a unique minimal subset.
pub fn syndetic_center(schedule: &BlockSchedule) -> Result<SubshiftDescr> {
    let omega = omega_limit(schedule)?;
    let m = omega.m;
    Ok(match omega.minimal_sets() {
        MinimalSets::One(orbit) => SubshiftDescr::from_orbit(m, orbit),
        _ => SubshiftDescr::empty(m),
    })
}

/// The four statistical limit sets together with the classical one.
pub fn statistical_omegas(schedule: &BlockSchedule, depth: usize) -> Result<OmegaReport> {
    let omega_f = omega_limit(schedule)?;
    let m = omega_f.m;
    let vf = vf_limits(schedule, depth)?;
    // Lower density set: intersection of supports over the limit-measure
    // set. On a polyline the interior supports are unions of the endpoints',
    // so the intersection over vertices equals the intersection over the set.
    let mut density_lower: Option<SubshiftDescr> = None;
    for v in &vf.polyline.vertices {
        let s = measure_support(m, v);
        density_lower = Some(match density_lower {
            None => s,
            Some(acc) => acc.intersect(&s),
        });
    }
    let density_lower = density_lower.unwrap_or_else(|| SubshiftDescr::empty(m));
    // Upper density set: closure of the union of supports over the set.
    let mut density_upper = SubshiftDescr::empty(m);
    for v in &vf.polyline.vertices {
        density_upper = density_upper.union(&measure_support(m, v));
    }
    // Banach upper set: the measure center of the limit set.
    let banach_upper = omega_f.measure_center();
    // Banach lower set: nonempty only for a unique minimal subset.
    let banach_lower = match omega_f.minimal_sets() {
        MinimalSets::One(orbit) => SubshiftDescr::from_orbit(m, orbit),
        _ => SubshiftDescr::empty(m),
    };
    let recurrence = recurrence_witness(schedule, &omega_f)?;
    Ok(OmegaReport {
        omega_f,
        banach_lower,
        density_lower,
        density_upper,
        banach_upper,
        depth,
        recurrence,
    })
}

fn recurrence_witness(schedule: &BlockSchedule, omega: &SubshiftDescr) -> Result<Recurrence> {
    // Nonrecurrence witness: an initial word of the orbit that the limit
    // set's language cannot contain.
    let probe = schedule.prefix(16)?;
    for len in 1..=probe.len().min(8) {
        let w = probe.slice(0, len);
        if !omega.admits_word(&w) {
            return Ok(Recurrence::NonRecurrent { witness: w });
        }
    }
    // Positive recurrence certificate: the point lies inside its own limit
    // set when the limit set covers the content shift and the whole emitted
    // point is content-admissible: no prefix, no tagged markers (language
    // sweeps emit content words and are fine).
    let tagged = schedule
        .markers
        .iter()
        .any(|m| matches!(m, Marker::TaggedPoint { .. }));
    if schedule.prefix.is_empty() && !tagged {
        let content_live = schedule.content.restrict(&schedule.content.live_states());
        let content_descr = SubshiftDescr::from_sft(schedule.ambient.alphabet_size(), content_live);
        if content_descr.subset(omega) {
            return Ok(Recurrence::Recurrent);
        }
    }
    Ok(Recurrence::Unknown)
}

/// Classifies a schedule with empty syndetic center into its case.
pub fn classify_case(schedule: &BlockSchedule, depth: usize) -> Result<(CaseLabel, OmegaReport)> {
    let report = statistical_omegas(schedule, depth)?;
    if !report.banach_lower.is_empty_set() {
        return Err(Error::SyndeticCenterNonEmpty);
    }
    if !report.chain_holds() {
        return Err(Error::Indeterminate(
            "computed sets violate the inclusion chain".into(),
        ));
    }
    let d_lower_empty = report.density_lower.is_empty_set();
    let dl_eq_du = report.density_lower.set_eq(&report.density_upper);
    let du_eq_bu = report.density_upper.set_eq(&report.banach_upper);
    let primed = !report.banach_upper.set_eq(&report.omega_f);
    let index = match (d_lower_empty, dl_eq_du, du_eq_bu) {
        (false, true, true) => 1,
        (false, true, false) => 2,
        (true, _, true) => 3,
        (false, false, true) => 4,
        (true, _, false) => 5,
        (false, false, false) => 6,
    };
    Ok((CaseLabel { index, primed }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{rat, MarkovMeasure};
    use crate::schedule::Phase;
    use crate::shift::Template;

    fn bernoulli_half() -> InvariantMeasure {
        InvariantMeasure::Markov(MarkovMeasure::bernoulli(vec![rat(1, 2), rat(1, 2)]).unwrap())
    }

    fn dirac(m: usize, s: usize) -> InvariantMeasure {
        InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(m, s))
    }

    fn sampled_schedule(mu: InvariantMeasure, seed: u64) -> BlockSchedule {
        BlockSchedule::new(
            SftDescr::full(2),
            SftDescr::full(2),
            Word::empty(),
            vec![Phase {
                generator: Generator::Sampled {
                    measure: mu,
                    tolerance: 0.25,
                    depth: 2,
                },
                len: Template::new(4, 0, 2).unwrap(),
                reps: Template::new(1, 1, 2).unwrap(),
            }],
            Vec::new(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn descriptor_algebra_basics() {
        let full = SubshiftDescr::from_sft(2, SftDescr::full(2));
        let golden = SubshiftDescr::from_sft(2, SftDescr::golden_mean());
        let zero = SubshiftDescr::from_orbit(2, Word::parse("0").unwrap());
        assert!(golden.subset(&full));
        assert!(!full.subset(&golden));
        assert!(zero.subset(&golden));
        assert!(golden.strict_subset(&full));
        let meet = golden.intersect(&zero);
        assert!(meet.set_eq(&zero));
    }

    #[test]
    fn intersection_of_disjoint_orbits_is_empty() {
        let zero = SubshiftDescr::from_orbit(2, Word::parse("0").unwrap());
        let one = SubshiftDescr::from_orbit(2, Word::parse("1").unwrap());
        assert!(zero.intersect(&one).is_empty_set());
    }

    #[test]
    fn single_cycle_sft_normalizes_to_orbit() {
        let rot = SftDescr::memory1(vec![vec![false, true], vec![true, false]]).unwrap();
        let d = SubshiftDescr::from_sft(2, rot);
        assert_eq!(d.orbits, vec![Word::parse("01").unwrap()]);
        assert!(d.sfts.is_empty());
    }

    #[test]
    fn omega_of_periodic_schedule() {
        let s = BlockSchedule::eventually_periodic(
            SftDescr::full(2),
            Word::empty(),
            Word::parse("01").unwrap(),
            0,
        )
        .unwrap();
        let omega = omega_limit(&s).unwrap();
        assert_eq!(omega.orbits, vec![Word::parse("01").unwrap()]);
        let center = syndetic_center(&s).unwrap();
        assert!(!center.is_empty_set());
        assert!(center.set_eq(&omega));
        // Prefixes are ignored by the center.
        let s2 = BlockSchedule::eventually_periodic(
            SftDescr::full(3),
            Word::parse("2").unwrap(),
            Word::parse("01").unwrap(),
            0,
        )
        .unwrap();
        let c2 = syndetic_center(&s2).unwrap();
        assert_eq!(c2.orbits, vec![Word::parse("01").unwrap()]);
    }

    #[test]
    fn omega_of_generic_schedule_is_full_shift() {
        let s = sampled_schedule(bernoulli_half(), 5);
        let omega = omega_limit(&s).unwrap();
        let full = SubshiftDescr::from_sft(2, SftDescr::full(2));
        assert!(omega.set_eq(&full));
        // Oracle: every word up to length 8 occurs in a long prefix.
        let p = s.prefix(1 << 20).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..p.len() - 8 {
            seen.insert(p.slice(i, i + 8));
        }
        assert_eq!(seen.len(), 256);
    }

    #[test]
    fn statistical_sets_of_generic_point() {
        let s = sampled_schedule(bernoulli_half(), 9);
        let r = statistical_omegas(&s, 2).unwrap();
        let full = SubshiftDescr::from_sft(2, SftDescr::full(2));
        assert!(r.banach_lower.is_empty_set());
        assert!(r.density_lower.set_eq(&full));
        assert!(r.density_upper.set_eq(&full));
        assert!(r.banach_upper.set_eq(&full));
        assert!(r.omega_f.set_eq(&full));
        assert!(r.chain_holds());
        let (label, _) = classify_case(&s, 2).unwrap();
        assert_eq!(label, CaseLabel::new(1, false).unwrap());
    }

    #[test]
    fn fixed_point_schedule_all_sets_equal() {
        let s = BlockSchedule::eventually_periodic(
            SftDescr::full(2),
            Word::empty(),
            Word::parse("0").unwrap(),
            0,
        )
        .unwrap();
        let r = statistical_omegas(&s, 2).unwrap();
        let zero = SubshiftDescr::from_orbit(2, Word::parse("0").unwrap());
        assert!(r.banach_lower.set_eq(&zero));
        assert!(r.omega_f.set_eq(&zero));
        assert!(r.chain_holds());
        assert!(matches!(
            classify_case(&s, 2),
            Err(Error::SyndeticCenterNonEmpty)
        ));
    }

    #[test]
    fn doubling_blocks_classify_without_center() {
        // 0-blocks and Bernoulli-blocks with doubling lengths: the averages
        // sweep a segment between the two cyclic combinations.
        let s = BlockSchedule::new(
            SftDescr::full(2),
            SftDescr::full(2),
            Word::empty(),
            vec![
                Phase {
                    generator: Generator::Periodic {
                        word: Word::parse("0").unwrap(),
                    },
                    len: Template::new(1, 0, 4).unwrap(),
                    reps: Template::constant(1),
                },
                Phase {
                    generator: Generator::Sampled {
                        measure: bernoulli_half(),
                        tolerance: 0.25,
                        depth: 2,
                    },
                    len: Template::new(2, 0, 4).unwrap(),
                    reps: Template::constant(1),
                },
            ],
            Vec::new(),
            11,
        )
        .unwrap();
        let vf = vf_limits(&s, 2).unwrap();
        assert!(!vf.is_singleton);
        assert!(matches!(vf.regime, VfRegime::CyclicCombinations { .. }));
        let r = statistical_omegas(&s, 2).unwrap();
        // Both cyclic vertices mix the Bernoulli part in, so every support
        // is the full shift, and so is the lower density set.
        let full = SubshiftDescr::from_sft(2, SftDescr::full(2));
        assert!(r.density_lower.set_eq(&full));
        assert!(r.banach_lower.is_empty_set());
        assert!(r.chain_holds());
        let (label, _) = classify_case(&s, 2).unwrap();
        assert_eq!(label, CaseLabel::new(1, false).unwrap());
    }

    #[test]
    fn walk_segment_statistical_sets() {
        // Walk over [dirac0, Bernoulli(1/2)]: lower set {0^inf}, upper full.
        let polyline = MeasurePolyline::new(vec![dirac(2, 0), bernoulli_half()]).unwrap();
        let s = BlockSchedule::new(
            SftDescr::full(2),
            SftDescr::full(2),
            Word::empty(),
            vec![Phase {
                generator: Generator::PolylineWalk {
                    polyline,
                    tolerance: 0.3,
                    depth: 2,
                },
                len: Template::new(1, 0, 2).unwrap(),
                reps: Template::new(1, 1, 2).unwrap(),
            }],
            Vec::new(),
            13,
        )
        .unwrap();
        let r = statistical_omegas(&s, 2).unwrap();
        let zero = SubshiftDescr::from_orbit(2, Word::parse("0").unwrap());
        let full = SubshiftDescr::from_sft(2, SftDescr::full(2));
        assert!(r.density_lower.set_eq(&zero));
        assert!(r.density_upper.set_eq(&full));
        assert!(r.banach_upper.set_eq(&full));
        assert!(r.chain_holds());
        let (label, _) = classify_case(&s, 2).unwrap();
        assert_eq!(label, CaseLabel::new(4, false).unwrap());
    }

    #[test]
    fn case_labels_parse_and_display() {
        for label in CaseLabel::all() {
            let s = label.to_string();
            let back: CaseLabel = s.parse().unwrap();
            assert_eq!(back, label);
        }
        assert_eq!(CaseLabel::all().len(), 12);
    }
}
