//! Natural and Banach densities of visit-time sets, syndeticity, and the
//! visit times of a schedule in a cylinder.
//!
//! Pattern sets get exact rational profiles computed from their closed-form
//! structure. Finite prefixes get windowed estimates: prefix ratios over the
//! tail half of the horizon for the natural densities, and a sliding-window
//! sweep over a geometric grid of window lengths for the Banach densities.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Rat;
use crate::schedule::BlockSchedule;
use crate::shift::{IndexSet, PatternAtom, Word};

/// The four density values of an index set, lower Banach through upper
/// Banach, with exactness flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub banach_lower: Rat,
    pub lower: Rat,
    pub upper: Rat,
    pub banach_upper: Rat,
    pub exact: bool,
}

impl DensityProfile {
    fn constant(v: Rat, exact: bool) -> Self {
        DensityProfile {
            banach_lower: v.clone(),
            lower: v.clone(),
            upper: v.clone(),
            banach_upper: v,
            exact,
        }
    }

    pub fn as_f64(&self) -> [f64; 4] {
        [
            self.banach_lower.to_f64().unwrap_or(0.0),
            self.lower.to_f64().unwrap_or(0.0),
            self.upper.to_f64().unwrap_or(0.0),
            self.banach_upper.to_f64().unwrap_or(0.0),
        ]
    }

    fn check_chain(&self) -> bool {
        self.banach_lower <= self.lower
            && self.lower <= self.upper
            && self.upper <= self.banach_upper
            && self.banach_lower >= Rat::zero()
            && self.banach_upper <= Rat::one()
    }
}

/// Exact or windowed density profile of an index set.
pub fn density_profile(set: &IndexSet) -> Result<DensityProfile> {
    let profile = match set {
        IndexSet::FinitePrefix { indices, horizon } => {
            if *horizon == 0 {
                return Err(Error::Invalid("horizon must be >= 1".into()));
            }
            finite_profile(indices, *horizon)
        }
        IndexSet::Pattern { atoms } => pattern_profile(atoms)?,
    };
    debug_assert!(profile.check_chain());
    Ok(profile)
}

fn finite_profile(indices: &[u64], horizon: u64) -> DensityProfile {
    let n = horizon as usize;
    let mut member = vec![false; n];
    for &i in indices {
        if (i as usize) < n {
            member[i as usize] = true;
        }
    }
    let mut prefix = vec![0u64; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + member[i] as u64;
    }
    // Ratios are compared by u128 cross multiplication and only converted to
    // rationals at the end.
    #[derive(Clone, Copy)]
    struct Frac {
        num: u64,
        den: u64,
    }
    let less =
        |a: Frac, b: Frac| (a.num as u128) * (b.den as u128) < (b.num as u128) * (a.den as u128);
    let to_rat = |f: Frac| Rat::new(BigInt::from(f.num), BigInt::from(f.den));

    // Natural density estimates: min/max prefix ratio over the tail half.
    let lo_n = n.div_ceil(2).max(1);
    let mut d_lo = Frac { num: 1, den: 1 };
    let mut d_hi = Frac { num: 0, den: 1 };
    for m in lo_n..=n {
        let r = Frac {
            num: prefix[m],
            den: m as u64,
        };
        if less(r, d_lo) {
            d_lo = r;
        }
        if less(d_hi, r) {
            d_hi = r;
        }
    }
    // Banach estimates: extreme window averages over a geometric length grid.
    let mut b_lo = d_lo;
    let mut b_hi = d_hi;
    let mut len = n;
    loop {
        let mut best = 0u64;
        let mut worst = u64::MAX;
        for start in 0..=(n - len) {
            let c = prefix[start + len] - prefix[start];
            best = best.max(c);
            worst = worst.min(c);
        }
        let hi = Frac {
            num: best,
            den: len as u64,
        };
        let lo = Frac {
            num: worst,
            den: len as u64,
        };
        if less(b_hi, hi) {
            b_hi = hi;
        }
        if less(lo, b_lo) {
            b_lo = lo;
        }
        if len == 1 {
            break;
        }
        len = len.div_ceil(2);
        // Windows shorter than a fraction of the horizon say nothing about
        // the limit; stop once they get tiny.
        if len < 8 && n >= 64 {
            break;
        }
    }
    DensityProfile {
        banach_lower: to_rat(b_lo),
        lower: to_rat(d_lo),
        upper: to_rat(d_hi),
        banach_upper: to_rat(b_hi),
        exact: false,
    }
}

fn pattern_profile(atoms: &[PatternAtom]) -> Result<DensityProfile> {
    if atoms.is_empty() {
        return Ok(DensityProfile::constant(Rat::zero(), true));
    }
    // Periodic part: finite unions of arithmetic progressions have equal
    // densities of every kind, computed over one common period.
    let arithmetic: Vec<&PatternAtom> = atoms
        .iter()
        .filter(|a| matches!(a, PatternAtom::Arithmetic { .. }))
        .collect();
    let intervals: Vec<&PatternAtom> = atoms
        .iter()
        .filter(|a| matches!(a, PatternAtom::GeometricInterval { .. }))
        .collect();

    if !arithmetic.is_empty() && intervals.is_empty() {
        // Density of the union over the lcm period; sparse atoms do not move
        // any of the four limits.
        let mut period = 1u64;
        for atom in &arithmetic {
            let PatternAtom::Arithmetic { step, .. } = atom else {
                unreachable!()
            };
            period = lcm(period, *step);
        }
        let start_max = arithmetic
            .iter()
            .map(|a| match a {
                PatternAtom::Arithmetic { start, .. } => *start,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        let base = start_max.div_ceil(period).max(1) * period;
        let count = (base..base + period)
            .filter(|&n| arithmetic.iter().any(|a| atom_contains(a, n)))
            .count() as u64;
        let d = Rat::new(BigInt::from(count), BigInt::from(period));
        return Ok(DensityProfile::constant(d, true));
    }

    if arithmetic.is_empty() && intervals.is_empty() {
        // Finite and geometric point atoms only: all four densities vanish.
        return Ok(DensityProfile::constant(Rat::zero(), true));
    }

    if intervals.len() == 1 && arithmetic.is_empty() {
        let PatternAtom::GeometricInterval { lo, hi } = intervals[0] else {
            unreachable!()
        };
        // lo = c b^k, hi = c' b^k with c < c' <= c b. Writing g = c'/c <= b:
        //   along N = hi(m):  count/N -> (g-1)/(g - g/b) ... computed exactly;
        //   along N = lo(m):  count/N -> sum of earlier interval lengths / lo.
        // Window sweeps inside intervals give ratio 1 when intervals grow and
        // gaps give 0 when gaps grow; both hold because b >= 2 and the
        // endpoints share the base.
        let b = Rat::from(BigInt::from(lo.base));
        let c = Rat::from(BigInt::from(lo.coeff));
        let cp = Rat::from(BigInt::from(hi.coeff));
        // Interval k has length (c'-c) b^k; sum over j <= m is
        // (c'-c) (b^{m+1} - b)/(b-1). Exact liminf/limsup of count(N)/N:
        // at N = lo(m+1) = c b^{m+1}: count = S(m) -> ratio
        //   (c'-c) b / (c (b-1))  ... wait, compute with the partial sums.
        let diff = cp.clone() - c.clone();
        // S(m) = diff * (b^{m+1} - b) / (b - 1); ratios in the limit m -> inf:
        let denom = b.clone() - Rat::one();
        // liminf at N = lo(m+1): S(m)/ (c b^{m+1}) -> diff * 1 / (c (b-1)) * 1
        let d_lower = diff.clone() / (denom.clone() * c.clone());
        // limsup at N = hi(m): (S(m-1) + (hi(m)-lo(m))) / hi(m)
        //   = (diff (b^m - b)/(b-1) + diff b^m) / (c' b^m)
        //   -> diff (1/(b-1) + 1) / c' = diff b / (c' (b-1))
        let d_upper = diff.clone() * b.clone() / (denom * cp.clone());
        // Banach: windows inside ever longer intervals -> 1; inside gaps -> 0.
        // Gaps grow iff hi(k) < lo(k+1) strictly in the limit, i.e. c' < c b;
        // when c' = c b the intervals tile [c b^k, c b^{k+1}) completely and
        // the set is cofinite, caught below.
        if cp == c.clone() * b.clone() {
            return Ok(DensityProfile::constant(Rat::one(), true));
        }
        let profile = DensityProfile {
            banach_lower: Rat::zero(),
            lower: d_lower.clone().min(d_upper.clone()),
            upper: d_lower.max(d_upper),
            banach_upper: Rat::one(),
            exact: true,
        };
        return Ok(profile);
    }

    Err(Error::UnsupportedPattern(
        "mixed interval/arithmetic patterns have no closed-form profile".into(),
    ))
}

fn atom_contains(atom: &PatternAtom, n: u64) -> bool {
    match atom {
        PatternAtom::Arithmetic { start, step } => n >= *start && (n - start).is_multiple_of(*step),
        PatternAtom::Finite { indices } => indices.binary_search(&n).is_ok(),
        _ => false,
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Syndeticity of an index set: are the gaps bounded, and by what.
///
/// For patterns the answer is exact. For finite prefixes the reported gap is
/// the largest one observed below the horizon, which bounds the true gap from
/// below only; the boolean then just records that no unbounded trend exists
/// within the data.
pub fn is_syndetic(set: &IndexSet) -> Result<(bool, Option<u64>)> {
    match set {
        IndexSet::FinitePrefix { indices, horizon } => {
            if indices.is_empty() {
                return Ok((false, None));
            }
            let mut max_gap = indices[0] + 1;
            for w in indices.windows(2) {
                max_gap = max_gap.max(w[1] - w[0]);
            }
            max_gap = max_gap.max(horizon - indices.last().unwrap());
            Ok((true, Some(max_gap)))
        }
        IndexSet::Pattern { atoms } => {
            if atoms
                .iter()
                .any(|a| matches!(a, PatternAtom::Arithmetic { .. }))
            {
                // Bounded gaps; measure the sup gap over one combined period
                // far enough out to clear all starts and finite atoms.
                let horizon = syndetic_probe_horizon(atoms);
                let pts = IndexSet::Pattern {
                    atoms: atoms.clone(),
                }
                .materialize(horizon);
                let mut max_gap = pts[0] + 1;
                for w in pts.windows(2) {
                    max_gap = max_gap.max(w[1] - w[0]);
                }
                return Ok((true, Some(max_gap)));
            }
            let has_infinite_sparse = atoms.iter().any(|a| {
                matches!(
                    a,
                    PatternAtom::GeometricPoints { .. } | PatternAtom::GeometricInterval { .. }
                )
            });
            if has_infinite_sparse {
                // Gaps between geometric rounds grow without bound unless the
                // intervals tile, which the cofinite case below covers.
                for atom in atoms {
                    if let PatternAtom::GeometricInterval { lo, hi } = atom {
                        if hi.coeff == lo.coeff.saturating_mul(lo.base) {
                            return Ok((true, Some(1)));
                        }
                    }
                }
                return Ok((false, None));
            }
            // Finite atoms only.
            Ok((false, None))
        }
    }
}

fn syndetic_probe_horizon(atoms: &[PatternAtom]) -> u64 {
    let mut period = 1u64;
    let mut start = 0u64;
    for atom in atoms {
        match atom {
            PatternAtom::Arithmetic { start: s, step } => {
                period = lcm(period, *step);
                start = start.max(*s);
            }
            PatternAtom::Finite { indices } => {
                start = start.max(indices.last().copied().unwrap_or(0) + 1);
            }
            _ => {}
        }
    }
    (start + 3 * period).max(64)
}

/// Indices `j < horizon` at which the schedule's point enters the cylinder
/// `[cyl]`, i.e. the materialized visit-time set of that neighborhood.
pub fn visit_times(schedule: &BlockSchedule, cyl: &Word, horizon: u64) -> Result<IndexSet> {
    if cyl.is_empty() {
        return Err(Error::Invalid("cylinder word must be nonempty".into()));
    }
    let need = horizon as usize + cyl.len();
    let point = schedule.prefix(need)?;
    let mut indices = Vec::new();
    for j in 0..horizon as usize {
        if point.symbols()[j..j + cyl.len()] == *cyl.symbols() {
            indices.push(j as u64);
        }
    }
    IndexSet::finite_prefix(indices, horizon)
}
