//! Pseudo-orbit shadowing, exactly: the diagonal shadow on shift spaces, the
//! binary-itinerary shadow for the doubling map in dyadic arithmetic, and the
//! itinerary coding that conjugates the two.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Rat;
use crate::shift::{shift_distance, ShiftDistance, Symbol, Word};

/// A pseudo-orbit on a shift space: finite windows around consecutive orbit
/// points, with `x_{n+1}` agreeing with the shift of `x_n` on the first `k`
/// symbols — a `2^-k`-pseudo-orbit in the shift metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftPseudoOrbit {
    pub entries: Vec<Word>,
    pub agreement: u32,
}

impl ShiftPseudoOrbit {
    /// Validates the agreement invariant on every consecutive pair.
    pub fn new(entries: Vec<Word>, agreement: u32) -> Result<Self> {
        let k = agreement as usize;
        if entries.is_empty() {
            return Err(Error::Invalid("pseudo-orbit must be nonempty".into()));
        }
        if entries.iter().any(|w| w.len() < k + 1) {
            return Err(Error::Invalid(
                "pseudo-orbit windows must have length at least k+1".into(),
            ));
        }
        for (step, pair) in entries.windows(2).enumerate() {
            let shifted = pair[0].slice(1, (k + 1).min(pair[0].len()));
            let next = pair[1].slice(0, shifted.len());
            if shifted != next {
                return Err(Error::NotAPseudoOrbit { step });
            }
        }
        Ok(ShiftPseudoOrbit { entries, agreement })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Result of shadowing a shift pseudo-orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftShadow {
    /// Prefix of the shadowing point (one symbol per pseudo-orbit step, plus
    /// the tail of the final window).
    pub point: Word,
    /// Verified distance `max_n d(sigma^n y, x_n)` as a dyadic exponent:
    /// the distance is at most `2^-achieved`.
    pub achieved: u32,
}

/// Diagonal shadowing: the point reading off the first symbol of every
/// window. Agreement `k` gives the sharp bound `d(sigma^n y, x_n) <= 2^-(k+1)`
/// for every step, verified here rather than assumed.
pub fn shadow_shift(orbit: &ShiftPseudoOrbit) -> Result<ShiftShadow> {
    let k = orbit.agreement;
    let mut point = Word(orbit.entries.iter().map(|w| w.0[0]).collect());
    // Extend with the final window so late steps have full comparisons.
    let last = &orbit.entries[orbit.entries.len() - 1];
    point.extend(&last.slice(1, last.len()));
    let mut worst = ShiftDistance::ZERO;
    for (n, window) in orbit.entries.iter().enumerate() {
        let horizon = window.len().min(point.len() - n);
        let seg = point.slice(n, n + horizon);
        let d = shift_distance(&seg, &window.slice(0, horizon))?;
        if d > worst {
            worst = d;
        }
    }
    if !worst.at_most_pow2(k + 1) {
        return Err(Error::NotAPseudoOrbit { step: 0 });
    }
    let achieved = match worst.0 {
        None => point.len() as u32,
        Some(j) => j,
    };
    Ok(ShiftShadow { point, achieved })
}

/// A pseudo-orbit of the binary doubling map, in exact dyadic rationals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPseudoOrbit {
    pub points: Vec<Rat>,
    pub delta: Rat,
}

fn circle_dist(a: &Rat, b: &Rat) -> Rat {
    let one = Rat::one();
    let mut d = (a - b).abs();
    d -= d.floor();
    if d.clone() + d.clone() > one.clone() {
        d = one - d;
    }
    d
}

fn frac(x: &Rat) -> Rat {
    x - x.floor()
}

impl RealPseudoOrbit {
    /// Validates membership in `[0,1)` and the step bound
    /// `|2 x_n - x_{n+1}| mod 1 <= delta`.
    pub fn new(points: Vec<Rat>, delta: Rat) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("pseudo-orbit must be nonempty".into()));
        }
        if points.iter().any(|x| x < &Rat::zero() || x >= &Rat::one()) {
            return Err(Error::Invalid("points must lie in [0,1)".into()));
        }
        for (step, pair) in points.windows(2).enumerate() {
            let double = frac(&(pair[0].clone() + pair[0].clone()));
            if circle_dist(&double, &pair[1]) > delta {
                return Err(Error::NotAPseudoOrbit { step });
            }
        }
        Ok(RealPseudoOrbit { points, delta })
    }
}

/// Result of shadowing a doubling-map pseudo-orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingShadow {
    /// The shadowing point, a dyadic rational in `[0,1)`.
    pub point: Rat,
    /// Exact verified deviation `max_n |2^n y mod 1 - x_n|` on the circle.
    pub deviation: Rat,
}

/// Shadows a doubling-map pseudo-orbit by the binary-digit diagonal, built
/// as the exact backward solve: the shadow's step-`n` iterate is the
/// preimage of the step-`n+1` iterate closest to `x_n`, starting from the
/// final point itself. Each backward step halves the downstream deviation
/// and adds at most `delta`, so the shadow stays within `delta` geometric
/// sum of every point; choosing the closest preimage is exactly the
/// dyadic-ambiguity resolution the digit diagonal needs. Requires
/// `delta <= epsilon/4` and `epsilon < 1/4`; the verification is exact
/// rational arithmetic, so the reported deviation is proved, not sampled.
pub fn shadow_doubling(orbit: &RealPseudoOrbit, epsilon: &Rat) -> Result<DoublingShadow> {
    let quarter = Rat::new(BigInt::one(), BigInt::from(4));
    if epsilon >= &quarter {
        return Err(Error::PseudoOrbitTooLoose {
            delta: orbit.delta.to_f64().unwrap_or(f64::NAN),
            bound: 0.25,
        });
    }
    if orbit.delta.clone() * Rat::from(BigInt::from(4)) > epsilon.clone() {
        return Err(Error::PseudoOrbitTooLoose {
            delta: orbit.delta.to_f64().unwrap_or(f64::NAN),
            bound: (epsilon.clone() / Rat::from(BigInt::from(4)))
                .to_f64()
                .unwrap_or(f64::NAN),
        });
    }
    let n = orbit.points.len();
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let mut point = orbit.points[n - 1].clone();
    for x in orbit.points[..n - 1].iter().rev() {
        // Preimages of `point` are point/2 and point/2 + 1/2; take the one
        // nearer to x.
        let lo = point.clone() * half.clone();
        let hi = lo.clone() + half.clone();
        point = if circle_dist(&lo, x) <= circle_dist(&hi, x) {
            lo
        } else {
            hi
        };
    }
    // Exact verification along the horizon.
    let mut deviation = Rat::zero();
    let mut iter = point.clone();
    for x in &orbit.points {
        let d = circle_dist(&iter, x);
        if d > deviation {
            deviation = d.clone();
        }
        if &d > epsilon {
            return Err(Error::PseudoOrbitTooLoose {
                delta: d.to_f64().unwrap_or(f64::NAN),
                bound: epsilon.to_f64().unwrap_or(f64::NAN),
            });
        }
        iter = frac(&(iter.clone() + iter));
    }
    Ok(DoublingShadow { point, deviation })
}

fn leading_digit(x: &Rat) -> u8 {
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    u8::from(x >= &half)
}

/// Itinerary of a point of `[0,1)` under the doubling map with respect to
/// the partition `[0,1/2) | [1/2,1)`: exactly its binary digits under the
/// zero-tail boundary convention.
pub fn doubling_coding(x: &Rat, n: usize) -> Result<Word> {
    if x < &Rat::zero() || x >= &Rat::one() {
        return Err(Error::Invalid("point must lie in [0,1)".into()));
    }
    let mut word = Word(Vec::with_capacity(n));
    let mut cur = x.clone();
    for _ in 0..n {
        word.push(Symbol(leading_digit(&cur)));
        cur = frac(&(cur.clone() + cur));
    }
    Ok(word)
}

/// Convenience: dyadic rational `num/2^exp`.
pub fn dyadic(num: i64, exp: u32) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(2i64).pow(exp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::rat;

    fn orbit_windows_of(point: &Word, steps: usize, window: usize) -> Vec<Word> {
        (0..steps).map(|i| point.slice(i, i + window)).collect()
    }

    #[test]
    fn genuine_orbit_shadows_itself() {
        let point = Word::parse("011010110100101101001011").unwrap();
        let windows = orbit_windows_of(&point, 12, 8);
        let orbit = ShiftPseudoOrbit::new(windows, 7).unwrap();
        let shadow = shadow_shift(&orbit).unwrap();
        assert_eq!(shadow.point.slice(0, 12), point.slice(0, 12));
    }

    #[test]
    fn spliced_orbits_shadow_with_sharp_bound() {
        // Two orbit pieces agreeing on k = 3 symbols at the splice.
        let a = Word::parse("000100010001000").unwrap();
        let b = Word::parse("010101010101010").unwrap();
        let mut windows = orbit_windows_of(&a, 5, 6);
        // Splice: continue from a shifted window of `a` but drift into `b`.
        let mut spliced = a.slice(5, 9);
        spliced.extend(&b.slice(0, 2));
        windows.push(spliced.clone());
        let k = 3;
        let orbit = ShiftPseudoOrbit::new(windows, k).unwrap();
        let shadow = shadow_shift(&orbit).unwrap();
        assert!(shadow.achieved > k);
    }

    #[test]
    fn zero_agreement_rejected_on_mismatch() {
        let w1 = Word::parse("01").unwrap();
        let w2 = Word::parse("00").unwrap();
        // shift of w1 = "1...", w2 starts with 0: disagree at index 0.
        assert!(matches!(
            ShiftPseudoOrbit::new(vec![w1, w2], 1),
            Err(Error::NotAPseudoOrbit { step: 0 })
        ));
    }

    #[test]
    fn doubling_true_orbit_of_third() {
        let third = rat(1, 3);
        let points: Vec<Rat> = (0..10)
            .scan(third, |state, _| {
                let out = state.clone();
                *state = frac(&(state.clone() + state.clone()));
                Some(out)
            })
            .collect();
        let orbit = RealPseudoOrbit::new(points, Rat::zero()).unwrap();
        let shadow = shadow_doubling(&orbit, &dyadic(1, 5)).unwrap();
        assert_eq!(shadow.deviation.to_f64().unwrap(), 0.0);
        // The shadow is the dyadic truncation of 1/3 = 0.010101...
        let coded = doubling_coding(&shadow.point, 6).unwrap();
        assert_eq!(coded, Word::parse("010101").unwrap());
    }

    #[test]
    fn loose_orbit_rejected() {
        let points = vec![rat(0, 1), rat(3, 10)];
        let orbit = RealPseudoOrbit::new(points, rat(3, 10)).unwrap();
        assert!(matches!(
            shadow_doubling(&orbit, &rat(1, 10)),
            Err(Error::PseudoOrbitTooLoose { .. })
        ));
    }

    #[test]
    fn coding_examples() {
        assert_eq!(
            doubling_coding(&Rat::zero(), 4).unwrap(),
            Word::parse("0000").unwrap()
        );
        assert_eq!(
            doubling_coding(&rat(1, 3), 6).unwrap(),
            Word::parse("010101").unwrap()
        );
        // Boundary convention: 1/2 codes to 1 then zeros.
        assert_eq!(
            doubling_coding(&rat(1, 2), 4).unwrap(),
            Word::parse("1000").unwrap()
        );
    }

    #[test]
    fn coding_equivariance_on_dyadics() {
        for num in 0..32i64 {
            let x = dyadic(num, 6);
            let double = frac(&(x.clone() + x.clone()));
            let a = doubling_coding(&double, 9).unwrap();
            let b = doubling_coding(&x, 10).unwrap();
            assert_eq!(a.symbols(), &b.symbols()[1..]);
        }
    }
}
