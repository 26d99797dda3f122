//! Birkhoff averages of cylinder observables along scheduled orbits:
//! exact lower and upper limits, the regularity trichotomy, level-set
//! entropy by constrained maximization over stationary chains, and
//! divergence witnesses with certified entropy bounds.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::entropy::FamilyEntropyBound;
use crate::error::{Error, Result};
use crate::limitset::vf_limits;
use crate::measure::{rat, InvariantMeasure, MarkovMeasure, MeasurePolyline, Rat};
use crate::schedule::BlockSchedule;
use crate::shift::{SftDescr, Word};
use crate::synthesis::{build_saturated_schedule, RecurrenceMode, SynthesisConfig};

/// A function of the first `depth` symbols: `phi(x) = values[x[0..depth)]`,
/// i.e. a locally constant (hence continuous) observable on the shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub m: usize,
    pub depth: usize,
    /// Missing words evaluate to zero.
    pub values: BTreeMap<Word, Rat>,
}

impl Observable {
    pub fn new(m: usize, depth: usize, values: BTreeMap<Word, Rat>) -> Result<Self> {
        if depth == 0 || depth > 8 {
            return Err(Error::DepthCap { depth });
        }
        if values.keys().any(|w| w.len() != depth) {
            return Err(Error::Invalid(
                "observable keys must all have the declared depth".into(),
            ));
        }
        Ok(Observable { m, depth, values })
    }

    /// The indicator of the cylinder `[w]`.
    pub fn indicator(m: usize, w: &Word) -> Result<Self> {
        let mut values = BTreeMap::new();
        values.insert(w.clone(), Rat::from(BigInt::from(1)));
        Observable::new(m, w.len(), values)
    }

    pub fn value(&self, w: &Word) -> Rat {
        self.values.get(w).cloned().unwrap_or_else(Rat::zero)
    }

    /// Exact integral against an invariant measure.
    pub fn integral(&self, mu: &InvariantMeasure) -> Rat {
        self.values
            .iter()
            .map(|(w, v)| v.clone() * mu.cylinder(w))
            .sum()
    }

    /// Average along the first `n` windows of a word.
    pub fn prefix_average(&self, word: &Word, n: usize) -> Option<f64> {
        if n + self.depth > word.len() + 1 || n == 0 {
            return None;
        }
        let mut total = 0.0;
        for j in 0..n {
            let w = word.slice(j, j + self.depth);
            total += self.value(&w).to_f64().unwrap_or(0.0);
        }
        Some(total / n as f64)
    }

    /// The exact range of integrals over all invariant measures of the full
    /// shift: extreme cycle means on the de Bruijn graph of order `depth-1`.
    pub fn integral_range(&self) -> Result<(Rat, Rat)> {
        let cycles = debruijn_cycles(self.m, self.depth)?;
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for cycle in cycles {
            let mean = self.cycle_mean(&cycle);
            lo = Some(match lo {
                None => mean.clone(),
                Some(v) => v.min(mean.clone()),
            });
            hi = Some(match hi {
                None => mean,
                Some(v) => v.max(mean),
            });
        }
        let lo = lo.ok_or_else(|| Error::Invalid("no cycles".into()))?;
        let hi = hi.ok_or_else(|| Error::Invalid("no cycles".into()))?;
        Ok((lo, hi))
    }

    fn cycle_mean(&self, cycle: &Word) -> Rat {
        let l = cycle.len();
        let mut total = Rat::zero();
        for i in 0..l {
            let w = Word((0..self.depth).map(|j| cycle.0[(i + j) % l]).collect());
            total += self.value(&w);
        }
        total / Rat::from(BigInt::from(l as u64))
    }
}

/// All simple cycles of the de Bruijn graph whose vertices are `(depth-1)`-
/// words, listed as symbol cycles. Small alphabets and depths only.
fn debruijn_cycles(m: usize, depth: usize) -> Result<Vec<Word>> {
    if m.pow(depth as u32) > 64 {
        return Err(Error::DepthCap { depth });
    }
    // For depth d the states are (d-1)-words; simple cycles in symbol space
    // have length <= m^(d-1) * small. Enumerate cyclic symbol words up to a
    // bounded length and keep the primitive ones.
    let max_len = (m.pow((depth - 1).max(1) as u32) * 2).max(2 * m);
    let mut out = Vec::new();
    let full = SftDescr::full(m);
    for len in 1..=max_len {
        for w in full.language(len)? {
            if w.primitive_root() == w && w.least_rotation() == w {
                out.push(w);
            }
        }
    }
    Ok(out)
}

/// Regularity of an orbit and of its averages for one observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityKind {
    /// Unique limit measure, point inside the measure's support.
    Regular,
    /// Unique limit measure.
    QuasiRegular,
    /// Several limit measures: some continuous observable diverges.
    Irregular,
}

/// Exact Birkhoff data of a schedule under one observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffReport {
    pub liminf: Rat,
    pub limsup: Rat,
    /// True when the average of this observable converges.
    pub phi_regular: bool,
    pub kind: RegularityKind,
    /// Range of the observable's integral over all invariant measures.
    pub range: (Rat, Rat),
    /// Prefix averages sampled along the orbit, for plotting.
    pub series: Vec<(usize, f64)>,
}

/// Exact lower and upper Birkhoff limits of the observable along the
/// schedule's orbit: the averages' limit points are the integrals over the
/// limit-measure set, and integration is affine, so the extremes sit at the
/// polyline vertices.
pub fn birkhoff_bounds(schedule: &BlockSchedule, phi: &Observable) -> Result<BirkhoffReport> {
    let vf = vf_limits(schedule, phi.depth)?;
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for v in &vf.polyline.vertices {
        let i = phi.integral(v);
        lo = Some(match lo {
            None => i.clone(),
            Some(v) => v.min(i.clone()),
        });
        hi = Some(match hi {
            None => i,
            Some(v) => v.max(i),
        });
    }
    let liminf = lo.ok_or_else(|| Error::UnsupportedSchedule("empty limit set".into()))?;
    let limsup = hi.ok_or_else(|| Error::UnsupportedSchedule("empty limit set".into()))?;
    let phi_regular = liminf == limsup;
    let kind = if vf.is_singleton {
        // Regular additionally requires the point inside the limit measure's
        // support; prefixless single-content schedules qualify.
        if schedule.prefix.is_empty() && schedule.markers.is_empty() {
            RegularityKind::Regular
        } else {
            RegularityKind::QuasiRegular
        }
    } else {
        RegularityKind::Irregular
    };
    let range = phi.integral_range()?;
    let series = prefix_series(schedule, phi, 1 << 14)?;
    Ok(BirkhoffReport {
        liminf,
        limsup,
        phi_regular,
        kind,
        range,
        series,
    })
}

/// Prefix averages on a geometric checkpoint grid up to the horizon.
pub fn prefix_series(
    schedule: &BlockSchedule,
    phi: &Observable,
    horizon: usize,
) -> Result<Vec<(usize, f64)>> {
    let word = schedule.prefix(horizon + phi.depth)?;
    let mut out = Vec::new();
    let mut n = 16usize;
    while n <= horizon {
        if let Some(avg) = phi.prefix_average(&word, n) {
            out.push((n, avg));
        }
        n = (n * 5).div_ceil(4);
    }
    Ok(out)
}

/// Result of the level-set entropy maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelOptimum {
    /// Supremum of metric entropy over stationary chains with the prescribed
    /// integral, in nats.
    pub value: f64,
    /// Transition probabilities of the maximizer (row-major).
    pub argmax: Vec<Vec<f64>>,
    pub boundary: bool,
}

/// Maximizes metric entropy over binary memory-1 stationary chains subject
/// to `integral(phi) = a`, by projected gradient ascent on the transition
/// parameters with twenty deterministic restarts. For depth-1 and depth-2
/// cylinder observables on the full 2-shift this class contains the true
/// maximizer. Boundary values return the degenerate supremum, flagged.
pub fn level_entropy(phi: &Observable, a: f64) -> Result<LevelOptimum> {
    if phi.m != 2 || phi.depth > 2 {
        return Err(Error::Invalid(
            "level-set maximization handles depth <= 2 observables on two symbols".into(),
        ));
    }
    let (lo, hi) = phi.integral_range()?;
    let (lo_f, hi_f) = (lo.to_f64().unwrap_or(0.0), hi.to_f64().unwrap_or(0.0));
    if hi_f - lo_f < 1e-12 {
        return Err(Error::DegenerateObservable);
    }
    if a <= lo_f + 1e-12 || a >= hi_f - 1e-12 {
        if !(lo_f..=hi_f).contains(&a) {
            return Err(Error::BoundaryValue {
                value: a,
                lo: lo_f,
                hi: hi_f,
            });
        }
        // Degenerate supremum: measures pinned to extreme cycles have zero
        // entropy.
        return Ok(LevelOptimum {
            value: 0.0,
            argmax: Vec::new(),
            boundary: true,
        });
    }
    // Parameters (p, q) = (P[0][1], P[1][0]); pi = (q, p)/(p+q).
    let g = |p: f64, q: f64| -> f64 {
        let pi0 = q / (p + q);
        let pi1 = p / (p + q);
        let eval = |w: &str| phi.value(&Word::parse(w).unwrap()).to_f64().unwrap_or(0.0);
        if phi.depth == 1 {
            pi0 * eval("0") + pi1 * eval("1")
        } else {
            pi0 * ((1.0 - p) * eval("00") + p * eval("01"))
                + pi1 * (q * eval("10") + (1.0 - q) * eval("11"))
        }
    };
    let h = |p: f64, q: f64| -> f64 {
        let pi0 = q / (p + q);
        let pi1 = p / (p + q);
        pi0 * binary_entropy(p) + pi1 * binary_entropy(q)
    };
    let mut best = f64::NEG_INFINITY;
    let mut best_pq = (0.5, 0.5);
    for restart in 0..20u32 {
        // Deterministic restart grid.
        let p0 = 0.05 + 0.9 * ((restart % 5) as f64) / 4.0;
        let q0 = 0.05 + 0.9 * ((restart / 5) as f64) / 3.0;
        if let Some((p, q)) = ascend_on_level(&g, &h, a, p0, q0) {
            let v = h(p, q);
            if v > best {
                best = v;
                best_pq = (p, q);
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::Invalid("no feasible chain for the level".into()));
    }
    let (p, q) = best_pq;
    Ok(LevelOptimum {
        value: best,
        argmax: vec![vec![1.0 - p, p], vec![q, 1.0 - q]],
        boundary: false,
    })
}

fn binary_entropy(t: f64) -> f64 {
    let mut h = 0.0;
    if t > 0.0 {
        h -= t * t.ln();
    }
    if t < 1.0 {
        h -= (1.0 - t) * (1.0 - t).ln();
    }
    h
}

/// Projected gradient ascent: move along the entropy gradient projected on
/// the level set's tangent, then Newton-correct back onto the level.
fn ascend_on_level(
    g: &impl Fn(f64, f64) -> f64,
    h: &impl Fn(f64, f64) -> f64,
    a: f64,
    p0: f64,
    q0: f64,
) -> Option<(f64, f64)> {
    const EPS: f64 = 1e-7;
    const LO: f64 = 1e-9;
    let clamp = |x: f64| x.clamp(LO, 1.0 - LO);
    let newton_to_level = |mut p: f64, mut q: f64| -> Option<(f64, f64)> {
        for _ in 0..200 {
            let val = g(p, q) - a;
            if val.abs() < 1e-14 {
                return Some((p, q));
            }
            let gp = (g(p + EPS, q) - g(p - EPS, q)) / (2.0 * EPS);
            let gq = (g(p, q + EPS) - g(p, q - EPS)) / (2.0 * EPS);
            let norm2 = gp * gp + gq * gq;
            if norm2 < 1e-18 {
                return None;
            }
            p = clamp(p - val * gp / norm2);
            q = clamp(q - val * gq / norm2);
        }
        ((g(p, q) - a).abs() < 1e-10).then_some((p, q))
    };
    let (mut p, mut q) = newton_to_level(p0, q0)?;
    let mut step = 0.1;
    for _ in 0..4000 {
        let hp = (h(p + EPS, q) - h(p - EPS, q)) / (2.0 * EPS);
        let hq = (h(p, q + EPS) - h(p, q - EPS)) / (2.0 * EPS);
        let gp = (g(p + EPS, q) - g(p - EPS, q)) / (2.0 * EPS);
        let gq = (g(p, q + EPS) - g(p, q - EPS)) / (2.0 * EPS);
        // Project the entropy gradient onto the constraint tangent.
        let gn = gp * gp + gq * gq;
        let (tp, tq) = if gn < 1e-18 {
            (hp, hq)
        } else {
            let dot = (hp * gp + hq * gq) / gn;
            (hp - dot * gp, hq - dot * gq)
        };
        let tn = (tp * tp + tq * tq).sqrt();
        if tn < 1e-13 {
            break;
        }
        let cand = newton_to_level(clamp(p + step * tp / tn), clamp(q + step * tq / tn));
        match cand {
            Some((np, nq)) if h(np, nq) > h(p, q) => {
                p = np;
                q = nq;
                step = (step * 1.2).min(0.2);
            }
            _ => {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
    }
    Some((p, q))
}

/// A schedule whose Birkhoff averages of `phi` genuinely diverge, with a
/// certified entropy bound for the family it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrregularWitness {
    pub report: BirkhoffReport,
    pub entropy: FamilyEntropyBound,
    pub gap: f64,
}

/// Builds a divergence witness: the limit-measure set is the segment from
/// the balanced Bernoulli measure to the best Bernoulli measure whose
/// integral differs by at least `eta`, realized nonrecurrently. The family
/// bound is certified at slack `eta/2`, giving `min-entropy - eta`.
pub fn irregular_witness(
    phi: &Observable,
    eta: f64,
    seed: u64,
) -> Result<(BlockSchedule, IrregularWitness)> {
    if phi.m != 2 {
        return Err(Error::Invalid(
            "witness construction works on two symbols".into(),
        ));
    }
    if eta <= 0.0 || eta >= 0.5 {
        return Err(Error::Invalid("eta must lie in (0, 0.5)".into()));
    }
    let (lo, hi) = phi.integral_range()?;
    if (hi.clone() - lo.clone()).to_f64().unwrap_or(0.0) < 1e-12 {
        return Err(Error::DegenerateObservable);
    }
    let balanced = InvariantMeasure::Markov(
        MarkovMeasure::bernoulli(vec![rat(1, 2), rat(1, 2)]).expect("bernoulli"),
    );
    let base_integral = phi.integral(&balanced);
    // Scan dyadic Bernoulli measures for the largest-entropy partner with a
    // gap of at least eta.
    let mut partner: Option<(InvariantMeasure, f64)> = None;
    for num in 1..32i64 {
        let mu = InvariantMeasure::Markov(
            MarkovMeasure::bernoulli(vec![rat(32 - num, 32), rat(num, 32)]).expect("weights"),
        );
        let gap = (phi.integral(&mu) - base_integral.clone())
            .to_f64()
            .unwrap_or(0.0)
            .abs();
        if gap + 1e-12 < eta {
            continue;
        }
        let h = mu.entropy();
        if partner.as_ref().is_none_or(|(best, _)| h > best.entropy()) {
            partner = Some((mu, gap));
        }
    }
    let Some((nu, gap)) = partner else {
        return Err(Error::DegenerateObservable);
    };
    let target = MeasurePolyline::new(vec![balanced, nu])?;
    let lambda = SftDescr::full_on_first(2, 3);
    let mut cfg = SynthesisConfig::new(target, lambda, seed);
    cfg.ambient = SftDescr::full(3);
    cfg.eta = eta / 2.0;
    cfg.depth = phi.depth.max(2);
    let mut schedule = build_saturated_schedule(&cfg)?;
    // Nonrecurrent start, mirroring the nonrecurrent witness mode.
    schedule.prefix = Word(vec![crate::shift::Symbol(2)]);
    let _ = RecurrenceMode::NonRecurrent;
    let report = birkhoff_bounds(&schedule, phi)?;
    if report.liminf == report.limsup {
        return Err(Error::Invalid(
            "witness averages unexpectedly converge".into(),
        ));
    }
    let entropy = crate::entropy::family_entropy_bound(&cfg)?;
    Ok((
        schedule,
        IrregularWitness {
            report,
            entropy,
            gap,
        },
    ))
}
