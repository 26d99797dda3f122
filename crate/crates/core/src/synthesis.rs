//! Constructive realization: generic words, schedules whose empirical
//! averages trace a prescribed measure set while the orbit's limit set is a
//! prescribed subshift, witnesses for each of the twelve asymptotic cases,
//! limit-set realizers for proper subshifts, and concatenation subshifts
//! whose entropy approximates a Markov measure's.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::{family_entropy_bound, FamilyEntropyBound};
use crate::error::{Error, Result};
use crate::limitset::{
    classify_case, vf_limits, CaseLabel, OmegaReport, Recurrence, SubshiftDescr,
};
use crate::measure::{
    empirical_measure, rat, weak_star_distance, CylinderMeasure, InvariantMeasure, MarkovMeasure,
    MeasurePolyline,
};
use crate::schedule::{sample_generic_word, BlockSchedule, Generator, Marker, Phase, RHO_TERMS};
use crate::shift::{EvPeriodic, RatioLimit, SftDescr, Symbol, Template, Word};

/// Configuration of a saturated-schedule construction.
///
/// The target polyline is traced by the refinement walk; `len` and `reps`
/// are the per-round block length and repetition templates. The growth
/// conditions — fresh block lengths vanish against the emitted history while
/// fresh rounds keep dominating it — are checked from the templates and
/// verified numerically over the first thirty rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub target: MeasurePolyline,
    /// The closed transitive shift carrying the construction.
    pub lambda: SftDescr,
    pub ambient: SftDescr,
    /// Initial genericity radius; it halves every sweep of the walk.
    pub tolerance: f64,
    pub depth: usize,
    pub len: Template,
    pub reps: Template,
    /// Entropy slack for the certified family bound.
    pub eta: f64,
    /// Insert one block per round enumerating the carrier's words, forcing
    /// the limit set up to the whole carrier at zero density.
    pub sweep_language: bool,
    pub seed: u64,
}

impl SynthesisConfig {
    pub fn new(target: MeasurePolyline, lambda: SftDescr, seed: u64) -> Self {
        let ambient = lambda.clone();
        SynthesisConfig {
            target,
            lambda,
            ambient,
            tolerance: 0.3,
            depth: 2,
            len: Template {
                coeff: 1,
                poly: 0,
                base: 2,
            },
            reps: Template {
                coeff: 1,
                poly: 1,
                base: 2,
            },
            eta: 0.05,
            sweep_language: false,
            seed,
        }
    }

    /// Round totals `N_k n_k`.
    pub fn round_total(&self) -> Template {
        self.len.product(&self.reps)
    }

    /// Checks the two growth conditions from the templates and numerically
    /// along the first thirty rounds.
    pub fn validate_growth(&self) -> Result<()> {
        let total = self.round_total();
        if !self.len.ratio_to_partial_sums(&total).is_zero() {
            return Err(Error::ConfigViolatesGrowth(
                "block lengths do not vanish against the emitted history".into(),
            ));
        }
        match total.ratio_to_partial_sums(&total) {
            RatioLimit::Zero => {
                return Err(Error::ConfigViolatesGrowth(
                    "rounds are dominated by history; the walk cannot move the averages".into(),
                ))
            }
            RatioLimit::Finite(r) if r < 0.5 => {
                return Err(Error::ConfigViolatesGrowth(format!(
                    "domination ratio {r} < 0.5"
                )))
            }
            _ => {}
        }
        // Numeric check over the first thirty rounds: the block ratio must
        // shrink below 5% and the domination ratio must stay above 1/2.
        let mut history: u128 = 0;
        for k in 1..=30u64 {
            let n_k = self.len.eval(k);
            let total_k = total.eval(k);
            if history > 0 {
                let block_ratio = n_k as f64 / history as f64;
                let dom_ratio = total_k as f64 / history as f64;
                if k >= 25 && block_ratio > 0.05 {
                    return Err(Error::ConfigViolatesGrowth(format!(
                        "block ratio {block_ratio:.4} at round {k}"
                    )));
                }
                if k >= 5 && dom_ratio < 0.5 {
                    return Err(Error::ConfigViolatesGrowth(format!(
                        "domination ratio {dom_ratio:.4} at round {k}"
                    )));
                }
            }
            history = history.saturating_add(total_k);
        }
        Ok(())
    }
}

/// A word in the measure's support whose empirical statistics at `depth`
/// are within `tolerance` of the measure. Deterministic for a fixed seed.
pub fn generic_word(
    mu: &InvariantMeasure,
    len: usize,
    tolerance: f64,
    depth: usize,
    seed: u64,
) -> Result<Word> {
    if tolerance <= 0.0 {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let support = support_hull(mu);
    let bridges = support.bridges();
    sample_generic_word(&support, &bridges, mu, len, tolerance, 0.0, depth, seed)
}

/// Periodic variant: the sampled word read as a periodic point. Any block
/// repeated is a periodic point of the shift, so genericity of the word
/// makes the orbit's empirical statistics match it up to window effects.
pub fn generic_periodic_point(
    mu: &InvariantMeasure,
    len: usize,
    tolerance: f64,
    depth: usize,
    seed: u64,
) -> Result<EvPeriodic> {
    let mut word = generic_word(mu, len, tolerance, depth, seed)?;
    // Close the loop inside the support so the periodic point stays in it.
    let support = support_hull(mu);
    let bridges = support.bridges();
    let last = word.0[word.len() - 1];
    let first = word.0[0];
    if !support.edge(last, first) {
        let back = bridges[last.id()][first.id()]
            .clone()
            .ok_or(Error::NotTransitive)?;
        word.extend(&back);
    }
    Ok(EvPeriodic::periodic(word))
}

fn support_hull(mu: &InvariantMeasure) -> SftDescr {
    let m = mu.alphabet_size();
    match mu {
        InvariantMeasure::Markov(chain) => chain.support(),
        InvariantMeasure::PeriodicOrbit { period, .. } => {
            let mut allowed = vec![vec![false; m]; m];
            for i in 0..period.len() {
                let a = period.0[i].id();
                let b = period.0[(i + 1) % period.len()].id();
                allowed[a][b] = true;
            }
            SftDescr::Memory1 { m, allowed }
        }
        InvariantMeasure::Mix { .. } => {
            // Union of component supports; bridging across components uses
            // the containing full shift on the union alphabet.
            let mut allowed = vec![vec![false; m]; m];
            for (_, part) in mu.flatten() {
                let hull = support_hull(&part);
                for i in 0..hull.alphabet_size() {
                    for j in 0..hull.alphabet_size() {
                        if hull.edge(Symbol(i as u8), Symbol(j as u8)) {
                            allowed[i][j] = true;
                        }
                    }
                }
            }
            // Connect components through direct junction edges.
            let live: Vec<usize> = (0..m)
                .filter(|&i| allowed[i].iter().any(|&b| b) || (0..m).any(|j| allowed[j][i]))
                .collect();
            for &i in &live {
                for &j in &live {
                    allowed[i][j] = true;
                }
            }
            SftDescr::Memory1 { m, allowed }
        }
    }
}

/// Builds the schedule tracing the configured measure polyline: each round
/// emits generic blocks for the walk's current target, the radii halving
/// every sweep, with bridges inside the carrier and optional zero-density
/// enumeration of the carrier's language.
pub fn build_saturated_schedule(cfg: &SynthesisConfig) -> Result<BlockSchedule> {
    if !cfg.lambda.is_irreducible() {
        return Err(Error::NotTransitive);
    }
    cfg.validate_growth()?;
    // Every vertex measure must live inside the carrier.
    let m = cfg.ambient.alphabet_size();
    let carrier = SubshiftDescr::from_sft(m, cfg.lambda.clone());
    for v in &cfg.target.vertices {
        let support = crate::limitset::measure_support(m, v);
        if !support.subset(&carrier) {
            return Err(Error::Invalid(
                "target polyline leaves the carrier shift".into(),
            ));
        }
    }
    // Bridge overhead must stay well inside the genericity radius.
    let bridge_len = cfg.lambda.bridge_diameter();
    let first_len = cfg.len.eval(1) as f64;
    if bridge_len as f64 / first_len > cfg.tolerance / 8.0 {
        return Err(Error::ConfigViolatesGrowth(format!(
            "bridge overhead {bridge_len}/{first_len} exceeds tolerance/8"
        )));
    }
    let markers = if cfg.sweep_language {
        vec![Marker::LanguageSweep {
            sft: cfg.lambda.clone(),
        }]
    } else {
        Vec::new()
    };
    BlockSchedule::new(
        cfg.ambient.clone(),
        cfg.lambda.clone(),
        Word::empty(),
        vec![Phase {
            generator: Generator::PolylineWalk {
                polyline: cfg.target.clone(),
                tolerance: cfg.tolerance,
                depth: cfg.depth,
            },
            len: cfg.len,
            reps: cfg.reps,
        }],
        markers,
        cfg.seed,
    )
}

/// Recurrence mode of a realized case witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceMode {
    /// The point starts with a reserved word that never recurs, so it lies
    /// outside its own limit set.
    NonRecurrent,
    /// The point lies inside the carrier and its limit set is the carrier,
    /// a proper subshift of the ambient: recurrent but not transitive.
    RecurrentNonTransitive,
}

/// Machine-checkable evidence that a schedule realizes a claimed case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: u32,
    pub label: CaseLabel,
    pub mode: RecurrenceMode,
    pub report: OmegaReport,
    /// Discretized weak*-Hausdorff distance between the analyzed limit-measure
    /// polyline and the synthesis target.
    pub vf_target_distance: f64,
    pub entropy: FamilyEntropyBound,
    pub seed: u64,
}

/// The case table realized over the two-symbol full shift embedded in an
/// ambient alphabet with one reserved symbol.
fn case_target(label: CaseLabel) -> (Vec<InvariantMeasure>, bool) {
    let full = InvariantMeasure::Markov(
        MarkovMeasure::bernoulli(vec![rat(1, 2), rat(1, 2)]).expect("bernoulli weights"),
    );
    let d0 = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 0));
    let d1 = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 1));
    let golden = InvariantMeasure::Markov(
        MarkovMeasure::from_matrix(vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 1), rat(0, 1)]])
            .expect("golden chain"),
    );
    let half_mix = InvariantMeasure::Markov(
        MarkovMeasure::with_stationary(
            vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
            vec![rat(1, 2), rat(1, 2)],
        )
        .expect("two fixed points"),
    );
    match label.index {
        1 => (vec![full], false),
        2 => (vec![golden], true),
        3 => (vec![d0, full, d1], false),
        4 => (vec![d0, full], false),
        5 => (vec![d0, d1], true),
        6 => (vec![d0, half_mix], true),
        _ => unreachable!("label indices are validated"),
    }
}

/// Options for [`realize_case`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizeOptions {
    /// Ambient alphabet size; at least 3 so one symbol stays reserved.
    pub ambient: usize,
    pub mode: RecurrenceMode,
    pub seed: u64,
    pub depth: usize,
    pub eta: f64,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            ambient: 3,
            mode: RecurrenceMode::NonRecurrent,
            seed: 0,
            depth: 2,
            eta: 0.05,
        }
    }
}

/// Builds a schedule realizing the requested case, together with the
/// certificate produced by re-analyzing the construction.
pub fn realize_case(
    label: CaseLabel,
    opts: RealizeOptions,
) -> Result<(BlockSchedule, Certificate)> {
    let needs_reserved = matches!(opts.mode, RecurrenceMode::NonRecurrent) || label.primed;
    if needs_reserved && opts.ambient < 3 {
        return Err(Error::AmbientTooSmall {
            needed: 3,
            have: opts.ambient,
        });
    }
    if label.primed && matches!(opts.mode, RecurrenceMode::RecurrentNonTransitive) {
        return Err(Error::Invalid(
            "primed cases are realized in nonrecurrent mode only".into(),
        ));
    }
    if matches!(opts.mode, RecurrenceMode::RecurrentNonTransitive) && opts.ambient < 3 {
        return Err(Error::AmbientTooSmall {
            needed: 3,
            have: opts.ambient,
        });
    }
    let m = opts.ambient;
    let (vertices, sweep) = case_target(label);
    let target = MeasurePolyline::new(vertices)?;
    let lambda = SftDescr::full_on_first(2, m);
    let mut cfg = SynthesisConfig::new(target, lambda, opts.seed);
    cfg.ambient = SftDescr::full(m);
    cfg.sweep_language = sweep;
    cfg.depth = opts.depth;
    cfg.eta = opts.eta;
    let mut schedule = build_saturated_schedule(&cfg)?;
    let tag = Symbol((m - 1) as u8);
    if label.primed {
        schedule.markers.push(Marker::TaggedPoint {
            tag,
            tail: EvPeriodic::periodic(Word::parse("0").expect("fixed word")),
        });
    }
    if matches!(opts.mode, RecurrenceMode::NonRecurrent) {
        // The reserved symbol makes the start unrepeatable. Primed cases use
        // the tag sparsely, so the doubled tag is the witness there.
        schedule.prefix = if label.primed {
            Word(vec![tag, tag])
        } else {
            Word(vec![tag])
        };
    }
    let certificate = certify(&schedule, &cfg, label, opts.mode)?;
    Ok((schedule, certificate))
}

/// Re-analyzes a schedule and checks every sub-claim of the certificate.
pub fn certify(
    schedule: &BlockSchedule,
    cfg: &SynthesisConfig,
    label: CaseLabel,
    mode: RecurrenceMode,
) -> Result<Certificate> {
    let (found, report) = classify_case(schedule, cfg.depth)?;
    if found != label {
        return Err(Error::Invalid(format!(
            "construction classifies as {found}, wanted {label}"
        )));
    }
    match (mode, &report.recurrence) {
        (RecurrenceMode::NonRecurrent, Recurrence::NonRecurrent { .. }) => {}
        (RecurrenceMode::RecurrentNonTransitive, Recurrence::Recurrent) => {}
        (m, r) => {
            return Err(Error::Invalid(format!(
                "recurrence check failed: wanted {m:?}, analysis says {r:?}"
            )))
        }
    }
    if matches!(mode, RecurrenceMode::RecurrentNonTransitive) {
        let ambient_descr =
            SubshiftDescr::from_sft(schedule.ambient.alphabet_size(), schedule.ambient.clone());
        if !report.omega_f.strict_subset(&ambient_descr) {
            return Err(Error::Invalid(
                "recurrent witness must have a limit set strictly inside the ambient".into(),
            ));
        }
    }
    let vf = vf_limits(schedule, cfg.depth)?;
    let vf_target_distance = polyline_hausdorff(&vf.polyline, &cfg.target, RHO_TERMS, 16)?;
    let entropy = family_entropy_bound(cfg)?;
    Ok(Certificate {
        format: 1,
        label,
        mode,
        report,
        vf_target_distance,
        entropy,
        seed: cfg.seed,
    })
}

/// Re-validates a certificate against its schedule.
pub fn verify_certificate(schedule: &BlockSchedule, cert: &Certificate) -> Result<()> {
    let (found, report) = classify_case(schedule, cert.report.depth)?;
    if found != cert.label {
        return Err(Error::Invalid(format!(
            "schedule classifies as {found}, certificate claims {}",
            cert.label
        )));
    }
    if !report.chain_holds() {
        return Err(Error::Indeterminate("inclusion chain violated".into()));
    }
    let recurrence_ok = match (&cert.mode, &report.recurrence) {
        (RecurrenceMode::NonRecurrent, Recurrence::NonRecurrent { .. }) => true,
        (RecurrenceMode::RecurrentNonTransitive, Recurrence::Recurrent) => true,
        _ => false,
    };
    if !recurrence_ok {
        return Err(Error::Invalid("recurrence claim does not re-verify".into()));
    }
    if cert.entropy.estimate.value < 0.0 {
        return Err(Error::Invalid("entropy bound must be nonnegative".into()));
    }
    Ok(())
}

/// Discretized Hausdorff distance between two measure polylines in the
/// truncated weak* metric, sampling `grid` points per edge.
pub fn polyline_hausdorff(
    a: &MeasurePolyline,
    b: &MeasurePolyline,
    terms: usize,
    grid: usize,
) -> Result<f64> {
    let pts_a = discretize(a, grid);
    let pts_b = discretize(b, grid);
    let mut sup = 0.0f64;
    for (from, to) in [(&pts_a, &pts_b), (&pts_b, &pts_a)] {
        for x in from.iter() {
            let mut inf = f64::INFINITY;
            for y in to.iter() {
                let d = weak_star_distance(x, y, terms)?.value;
                inf = inf.min(d);
            }
            sup = sup.max(inf);
        }
    }
    Ok(sup)
}

fn discretize(p: &MeasurePolyline, grid: usize) -> Vec<InvariantMeasure> {
    if p.is_singleton() {
        return vec![p.vertices[0].clone()];
    }
    let edges = p.vertices.len() - 1;
    let mut out = Vec::with_capacity(edges * grid + 1);
    for e in 0..edges {
        for g in 0..grid {
            let t = rat(e as i64, 1) + rat(g as i64, grid as i64);
            out.push(p.point_at(t));
        }
    }
    out.push(p.vertices[edges].clone());
    out
}

/// Builds a schedule whose limit set contains the target subshift and whose
/// accumulation points all fall into it after finitely many shifts: the
/// blocks enumerate a dense sequence of the target with growing prefixes,
/// joined by ambient bridges.
pub fn omega_realizer(target: &SftDescr, ambient: &SftDescr, seed: u64) -> Result<BlockSchedule> {
    if !ambient.is_irreducible() {
        return Err(Error::NotTransitive);
    }
    let m = ambient.alphabet_size();
    let target_descr = SubshiftDescr::from_sft(m, target.clone());
    let ambient_descr = SubshiftDescr::from_sft(m, ambient.clone());
    if target.is_empty_shift() || !target_descr.strict_subset(&ambient_descr) {
        return Err(Error::NotProperSubset);
    }
    BlockSchedule::new(
        ambient.clone(),
        ambient.clone(),
        Word::empty(),
        vec![Phase {
            generator: Generator::DenseEnumeration {
                target: target.clone(),
            },
            len: Template {
                coeff: 1,
                poly: 1,
                base: 1,
            },
            reps: Template::constant(1),
        }],
        Vec::new(),
        seed,
    )
}

/// A concatenation subshift approximating a Markov measure: the set of free
/// concatenations of the blocks of one length whose empirical statistics are
/// within `zeta/4` of the measure. The block set is kept implicit (counted
/// exactly, sampled uniformly); it materializes into an explicit block shift
/// under a size cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockHorseshoe {
    pub m: usize,
    pub block_len: usize,
    /// Exact block count.
    pub count: BigUint,
    /// `ln(count) / block_len`, the exact entropy of the concatenation shift.
    pub entropy: f64,
    pub target_entropy: f64,
    pub eta: f64,
    pub zeta: f64,
    pub rule: HorseshoeRule,
}

/// Membership rule for the block set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HorseshoeRule {
    /// Binary Bernoulli band: blocks whose ones-count lies in the closed
    /// interval. Exact counting through binomial sums.
    OnesBand { ones_min: usize, ones_max: usize },
    /// Explicit block list (small cases).
    Explicit { blocks: Vec<Word> },
}

impl BlockHorseshoe {
    /// Uniform sample from the block set.
    pub fn sample_block(&self, rng: &mut ChaCha8Rng) -> Word {
        match &self.rule {
            HorseshoeRule::Explicit { blocks } => blocks[rng.gen_range(0..blocks.len())].clone(),
            HorseshoeRule::OnesBand { ones_min, ones_max } => {
                // Choose the ones-count proportionally to the exact binomial
                // class sizes, then place the ones uniformly.
                let n = self.block_len;
                let total = self.count.clone();
                let mut pick = uniform_biguint(rng, &total);
                let mut k = *ones_min;
                for ones in *ones_min..=*ones_max {
                    let c = binomial(n, ones);
                    if pick < c {
                        k = ones;
                        break;
                    }
                    pick -= c;
                    k = ones + 1;
                }
                let mut word = Word(vec![Symbol(0); n]);
                // Floyd's sampling of k distinct positions.
                let mut chosen = std::collections::BTreeSet::new();
                for j in (n - k)..n {
                    let t = rng.gen_range(0..=j);
                    let pos = if chosen.contains(&t) { j } else { t };
                    chosen.insert(pos);
                }
                for pos in chosen {
                    word.0[pos] = Symbol(1);
                }
                word
            }
        }
    }

    /// A prefix of a point of the shift, made of `blocks` sampled blocks.
    pub fn sample_point_prefix(&self, blocks: usize, seed: u64) -> Word {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Word(Vec::with_capacity(blocks * self.block_len));
        for _ in 0..blocks {
            out.extend(&self.sample_block(&mut rng));
        }
        out
    }

    /// Explicit subshift description when the block set is small enough.
    pub fn to_sft(&self, cap: usize) -> Result<SftDescr> {
        match &self.rule {
            HorseshoeRule::Explicit { blocks } => SftDescr::block_shift(self.m, blocks.clone()),
            HorseshoeRule::OnesBand { ones_min, ones_max } => {
                let count =
                    self.count
                        .to_usize()
                        .filter(|&c| c <= cap)
                        .ok_or(Error::OversizeRequest {
                            requested: self.count.to_u128().unwrap_or(u128::MAX),
                            cap: cap as u128,
                        })?;
                let mut blocks = Vec::with_capacity(count);
                for word in SftDescr::full(2).language(self.block_len)? {
                    let ones = word.symbols().iter().filter(|s| s.id() == 1).count();
                    if (*ones_min..=*ones_max).contains(&ones) {
                        blocks.push(word);
                    }
                }
                SftDescr::block_shift(self.m, blocks)
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut out = BigUint::one();
    for i in 0..k.min(n - k) {
        out = out * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    out
}

fn uniform_biguint(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    // Rejection sampling over the bit width.
    let bits = bound.bits().max(1);
    loop {
        let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
        rng.fill(&mut bytes[..]);
        let mut v = BigUint::from_bytes_le(&bytes);
        let excess = 8 * bytes.len() as u64 - bits;
        v >>= excess as usize;
        if &v < bound {
            return v;
        }
    }
}

/// Caps for the horseshoe search.
const HORSESHOE_LEN_CAP: usize = 4096;
const HORSESHOE_ENUM_CAP: u128 = 1 << 22;

/// Finds a block length `n` and the set of `n`-blocks within `zeta/4` of the
/// measure (at depth 1) whose count reaches `exp(n (h - eta))`, and returns
/// the concatenation subshift data. The resulting shift has exact entropy
/// `ln|blocks|/n >= h - eta`, and every window over whole-multiple lengths
/// `k n` with `k >= 1/zeta` stays within `zeta` of the measure.
pub fn entropy_dense_horseshoe(
    mu: &MarkovMeasure,
    eta: f64,
    zeta: f64,
    seed: u64,
) -> Result<BlockHorseshoe> {
    if eta <= 0.0 || zeta <= 0.0 {
        return Err(Error::Invalid("eta and zeta must be positive".into()));
    }
    let h = mu.entropy();
    if h == 0.0 {
        // Degenerate target: a single generic block suffices.
        let word = generic_word(
            &InvariantMeasure::Markov(mu.clone()),
            8,
            zeta / 4.0,
            1,
            seed,
        )?;
        return Ok(BlockHorseshoe {
            m: mu.m,
            block_len: word.len(),
            count: BigUint::one(),
            entropy: 0.0,
            target_entropy: 0.0,
            eta,
            zeta,
            rule: HorseshoeRule::Explicit { blocks: vec![word] },
        });
    }
    let is_bernoulli = mu.m == 2 && mu.p.iter().all(|row| row == &mu.pi);
    let mut best: Option<(usize, f64)> = None;
    let mut n = 8usize;
    while n <= HORSESHOE_LEN_CAP {
        let (count, rule) = if is_bernoulli {
            // Depth-1 band: rho restricted to one-symbol cylinders gives
            // |f0 - mu0|/2 + |f1 - mu1|/4 = (3/4)|f1 - mu1| <= zeta/4,
            // i.e. a ones-frequency band of half-width zeta/3.
            let p1 = mu.pi[1].to_f64().unwrap_or(0.0);
            let lo = ((p1 - zeta / 3.0) * n as f64).ceil().max(0.0) as usize;
            let hi = ((p1 + zeta / 3.0) * n as f64).floor().min(n as f64) as usize;
            if lo > hi {
                n += n / 4 + 1;
                continue;
            }
            let mut count = BigUint::zero();
            for k in lo..=hi {
                count += binomial(n, k);
            }
            (
                count,
                HorseshoeRule::OnesBand {
                    ones_min: lo,
                    ones_max: hi,
                },
            )
        } else {
            // General case: enumerate the support language and filter by the
            // full truncated metric at depth 1.
            let words = count_enumerated(mu, n, zeta)?;
            let count = BigUint::from(words.len());
            (count, HorseshoeRule::Explicit { blocks: words })
        };
        if count.is_zero() {
            n += n / 4 + 1;
            continue;
        }
        let log_count = log_biguint(&count);
        let achieved = log_count / n as f64;
        if achieved >= h - eta {
            return Ok(BlockHorseshoe {
                m: mu.m,
                block_len: n,
                count,
                entropy: achieved,
                target_entropy: h,
                eta,
                zeta,
                rule,
            });
        }
        best = Some(match best {
            Some((bn, bv)) if bv >= achieved => (bn, bv),
            _ => (n, achieved),
        });
        n += n / 4 + 1;
    }
    let (len, achieved) = best.unwrap_or((HORSESHOE_LEN_CAP, 0.0));
    Err(Error::SlackTooTight {
        achieved,
        wanted: h - eta,
        len,
    })
}

fn count_enumerated(mu: &MarkovMeasure, n: usize, zeta: f64) -> Result<Vec<Word>> {
    let support = mu.support();
    let lang = support.language_capped(n, HORSESHOE_ENUM_CAP)?;
    let target = InvariantMeasure::Markov(mu.clone());
    let mut out = Vec::new();
    for w in lang {
        let emp = empirical_measure(&w, 1)?;
        let dist = weak_star_distance(&emp, &target, mu.m + 1)?;
        if dist.value > zeta / 4.0 {
            continue;
        }
        // Free concatenation must stay in the support.
        if support.edge(w.0[w.len() - 1], w.0[0]) {
            out.push(w);
        }
    }
    Ok(out)
}

fn log_biguint(x: &BigUint) -> f64 {
    // ln via the top 64 bits plus the discarded exponent.
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map(|v| (v as f64).ln()).unwrap_or(0.0);
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    (top.to_u64().unwrap_or(u64::MAX) as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Verifies that a generic word's empirical measure meets its tolerance at
/// the configured metric truncation; used by oracles and the CLI.
pub fn check_genericity(
    word: &Word,
    mu: &InvariantMeasure,
    depth: usize,
    terms: usize,
) -> Result<(CylinderMeasure, f64)> {
    let emp = empirical_measure(word, depth)?;
    let dist = weak_star_distance(&emp, mu, terms)?;
    Ok((emp, dist.value))
}

pub use crate::limitset::measure_support as support_descr;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitset::VfRegime;

    fn bernoulli(p_num: i64, p_den: i64) -> MarkovMeasure {
        MarkovMeasure::bernoulli(vec![rat(p_den - p_num, p_den), rat(p_num, p_den)]).unwrap()
    }

    #[test]
    fn generic_word_for_dirac_is_constant() {
        let mu = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 0));
        let w = generic_word(&mu, 12, 0.1, 1, 7).unwrap();
        assert_eq!(w, Word::parse("000000000000").unwrap());
    }

    #[test]
    fn generic_word_for_bernoulli_balanced() {
        let mu = InvariantMeasure::Markov(bernoulli(1, 2));
        let w = generic_word(&mu, 10_000, 0.02, 1, 1).unwrap();
        let ones = w.symbols().iter().filter(|s| s.id() == 1).count() as f64;
        assert!((ones / 10_000.0 - 0.5).abs() <= 0.014);
    }

    #[test]
    fn generic_word_on_golden_chain_avoids_forbidden_factor() {
        let golden = MarkovMeasure::from_matrix(vec![
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(1, 1), rat(0, 1)],
        ])
        .unwrap();
        let w = generic_word(&InvariantMeasure::Markov(golden), 1000, 0.05, 2, 3).unwrap();
        assert!(!w.to_string().contains("11"));
    }

    #[test]
    fn genericity_failure_when_too_tight() {
        let mu = InvariantMeasure::Markov(bernoulli(1, 2));
        // Length 3 cannot be 1e-6-generic at depth 2.
        let r = generic_word(&mu, 3, 1e-6, 2, 1);
        assert!(matches!(r, Err(Error::GenericityFailure { .. })));
    }

    #[test]
    fn saturated_singleton_schedule() {
        let mu = InvariantMeasure::Markov(bernoulli(1, 2));
        let cfg =
            SynthesisConfig::new(MeasurePolyline::singleton(mu.clone()), SftDescr::full(2), 5);
        let s = build_saturated_schedule(&cfg).unwrap();
        let vf = vf_limits(&s, 2).unwrap();
        assert!(vf.is_singleton);
        let p = s.prefix(1 << 14).unwrap();
        let (_, dist) = check_genericity(&p, &mu, 2, RHO_TERMS).unwrap();
        assert!(dist < 0.05, "empirical distance {dist}");
    }

    #[test]
    fn saturated_segment_schedule_regime() {
        let target = MeasurePolyline::new(vec![
            InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 0)),
            InvariantMeasure::Markov(bernoulli(1, 2)),
        ])
        .unwrap();
        let cfg = SynthesisConfig::new(target.clone(), SftDescr::full(2), 5);
        let s = build_saturated_schedule(&cfg).unwrap();
        let vf = vf_limits(&s, 2).unwrap();
        assert!(matches!(vf.regime, VfRegime::WalkExact));
        let d = polyline_hausdorff(&vf.polyline, &target, 8, 16).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn growth_validation_rejects_flat_reps() {
        let mu = InvariantMeasure::Markov(bernoulli(1, 2));
        let mut cfg = SynthesisConfig::new(MeasurePolyline::singleton(mu), SftDescr::full(2), 0);
        cfg.len = Template::constant(8);
        cfg.reps = Template::constant(2);
        assert!(matches!(
            build_saturated_schedule(&cfg),
            Err(Error::ConfigViolatesGrowth(_))
        ));
    }

    #[test]
    fn realize_case_one_nonrecurrent() {
        let (schedule, cert) =
            realize_case(CaseLabel::new(1, false).unwrap(), RealizeOptions::default()).unwrap();
        assert_eq!(cert.label.index, 1);
        assert!(matches!(
            cert.report.recurrence,
            Recurrence::NonRecurrent { .. }
        ));
        verify_certificate(&schedule, &cert).unwrap();
        // The prefix really starts with the reserved symbol.
        assert_eq!(schedule.prefix(1).unwrap().0[0], Symbol(2));
    }

    #[test]
    fn realize_case_three_primed() {
        let label = CaseLabel::new(3, true).unwrap();
        let (schedule, cert) = realize_case(label, RealizeOptions::default()).unwrap();
        assert_eq!(cert.label, label);
        verify_certificate(&schedule, &cert).unwrap();
    }

    #[test]
    fn realize_case_recurrent_mode() {
        let opts = RealizeOptions {
            mode: RecurrenceMode::RecurrentNonTransitive,
            ..RealizeOptions::default()
        };
        let (schedule, cert) = realize_case(CaseLabel::new(1, false).unwrap(), opts).unwrap();
        assert!(matches!(cert.report.recurrence, Recurrence::Recurrent));
        // The emitted point never uses the reserved symbol.
        let p = schedule.prefix(4096).unwrap();
        assert!(p.symbols().iter().all(|s| s.id() < 2));
        verify_certificate(&schedule, &cert).unwrap();
    }

    #[test]
    fn omega_realizer_fixed_point() {
        let target = SftDescr::memory1(vec![vec![true, false], vec![false, false]]).unwrap();
        let s = omega_realizer(&target, &SftDescr::full(2), 1).unwrap();
        let p = s.prefix(2000).unwrap();
        // Zeros dominate with growing runs.
        let zeros = p.symbols().iter().filter(|s| s.id() == 0).count();
        assert!(zeros * 10 >= p.len() * 8);
    }

    #[test]
    fn omega_realizer_limit_set_contains_target() {
        let target = SftDescr::golden_mean();
        let s = omega_realizer(&target, &SftDescr::full(2), 1).unwrap();
        let omega = crate::limitset::omega_limit(&s).unwrap();
        let target_descr = crate::limitset::SubshiftDescr::from_sft(2, target);
        assert!(target_descr.subset(&omega));
        // Junction families keep the description above the bare target.
        assert!(omega.junctions);
    }

    #[test]
    fn omega_realizer_golden_in_full() {
        let s = omega_realizer(&SftDescr::golden_mean(), &SftDescr::full(2), 1).unwrap();
        let p = s.prefix(1 << 16).unwrap();
        // Every golden word up to length 8 occurs in the emitted prefix.
        let lang = SftDescr::golden_mean().language(8).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..p.len() - 8 {
            seen.insert(p.slice(i, i + 8));
        }
        for w in lang {
            assert!(seen.contains(&w), "missing golden word {w}");
        }
        // Reject the improper case.
        assert!(matches!(
            omega_realizer(&SftDescr::full(2), &SftDescr::full(2), 1),
            Err(Error::NotProperSubset)
        ));
    }

    #[test]
    fn horseshoe_balanced_bernoulli() {
        let mu = bernoulli(1, 2);
        let h = entropy_dense_horseshoe(&mu, 0.05, 0.1, 0).unwrap();
        assert!(h.entropy >= 2f64.ln() - 0.05);
        assert!(h.entropy <= 2f64.ln() + 1e-12);
    }

    #[test]
    fn horseshoe_degenerate_measure() {
        let mu = MarkovMeasure::dirac_fixed(2, 0);
        let h = entropy_dense_horseshoe(&mu, 0.05, 0.1, 0).unwrap();
        assert_eq!(h.entropy, 0.0);
        assert_eq!(h.count, BigUint::one());
    }

    #[test]
    fn horseshoe_blocks_sample_in_band() {
        let mu = bernoulli(7, 10);
        let h = entropy_dense_horseshoe(&mu, 0.05, 0.1, 0).unwrap();
        let HorseshoeRule::OnesBand { ones_min, ones_max } = h.rule else {
            panic!("expected a band rule");
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let b = h.sample_block(&mut rng);
            let ones = b.symbols().iter().filter(|s| s.id() == 1).count();
            assert!((ones_min..=ones_max).contains(&ones));
        }
    }
}
