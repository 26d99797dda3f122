use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symbol of a finite alphabet, stored as its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn id(self) -> usize {
        self.0 as usize
    }
}

/// A finite word over one alphabet.
///
/// The alphabet size is carried by the containing structure (an [`SftDescr`]
/// or a schedule); a bare word is just the symbol sequence.
///
/// [`SftDescr`]: crate::shift::SftDescr
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parses a word from a digit string, e.g. `"0110"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let d = ch
                .to_digit(10)
                .ok_or_else(|| Error::Invalid(format!("bad symbol {ch:?} in word")))?;
            if d > u8::MAX as u32 {
                return Err(Error::Invalid(format!("symbol {d} out of range")));
            }
            out.push(Symbol(d as u8));
        }
        Ok(Word(out))
    }

    pub fn from_ids(ids: &[u8]) -> Self {
        Word(ids.iter().map(|&i| Symbol(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn extend(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    /// Maximum symbol id plus one; zero for the empty word.
    pub fn min_alphabet(&self) -> usize {
        self.0.iter().map(|s| s.id() + 1).max().unwrap_or(0)
    }

    /// The word repeated cyclically out to `n` symbols.
    pub fn cycle_to(&self, n: usize) -> Word {
        assert!(!self.is_empty(), "cannot cycle the empty word");
        Word((0..n).map(|i| self.0[i % self.0.len()]).collect())
    }

    /// Least rotation of the word, used to canonicalize periodic orbits.
    pub fn least_rotation(&self) -> Word {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let mut best = self.clone();
        for r in 1..n {
            let rot = Word((0..n).map(|i| self.0[(i + r) % n]).collect());
            if rot < best {
                best = rot;
            }
        }
        best
    }

    /// Shortest word `p` with `self = p^(len/|p|)`.
    pub fn primitive_root(&self) -> Word {
        let n = self.len();
        for d in 1..=n {
            if n.is_multiple_of(d) {
                let cand = self.slice(0, d);
                if cand.cycle_to(n) == *self {
                    return cand;
                }
            }
        }
        self.clone()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            if s.0 < 10 {
                write!(f, "{}", s.0)?;
            } else {
                write!(f, "[{}]", s.0)?;
            }
        }
        Ok(())
    }
}

// Words serialize as digit strings ("0110"), which keeps them usable as
// JSON object keys; alphabets are limited to ten symbols in serialized form.
impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.iter().any(|s| s.0 > 9) {
            return Err(serde::ser::Error::custom(
                "words over alphabets larger than 10 have no string form",
            ));
        }
        self.to_string().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(de)?;
        Word::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Distance between two equal-length words under the shift metric
/// `d(x, y) = 2^-j` with `j` the first differing index.
///
/// Represented exactly: `None` is distance zero, `Some(j)` is `2^-j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftDistance(pub Option<u32>);

impl ShiftDistance {
    pub const ZERO: ShiftDistance = ShiftDistance(None);

    pub fn as_f64(self) -> f64 {
        match self.0 {
            None => 0.0,
            Some(j) => 0.5f64.powi(j as i32),
        }
    }

    /// `self <= 2^-k`
    pub fn at_most_pow2(self, k: u32) -> bool {
        match self.0 {
            None => true,
            Some(j) => j >= k,
        }
    }
}

impl PartialOrd for ShiftDistance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ShiftDistance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Larger exponent means smaller distance; None is 0, the minimum.
        match (self.0, other.0) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(a), Some(b)) => b.cmp(&a),
        }
    }
}

/// Shift-metric distance between equal-length words: `2^-(first differing index)`.
pub fn shift_distance(x: &Word, y: &Word) -> Result<ShiftDistance> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    for (j, (a, b)) in x.0.iter().zip(&y.0).enumerate() {
        if a != b {
            return Ok(ShiftDistance(Some(j as u32)));
        }
    }
    Ok(ShiftDistance::ZERO)
}

/// An eventually periodic point `pre . per per per ...`, the finite-data
/// representation of points carried by `FinitePoints` descriptors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EvPeriodic {
    pub pre: Word,
    pub per: Word,
}

impl EvPeriodic {
    pub fn new(pre: Word, per: Word) -> Self {
        assert!(!per.is_empty(), "period word must be nonempty");
        EvPeriodic { pre, per }.canonical()
    }

    pub fn periodic(per: Word) -> Self {
        EvPeriodic::new(Word::empty(), per)
    }

    /// Symbol at position `i` of the infinite point.
    pub fn at(&self, i: usize) -> Symbol {
        if i < self.pre.len() {
            self.pre.0[i]
        } else {
            self.per.0[(i - self.pre.len()) % self.per.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.at(i)).collect())
    }

    /// Canonical form: primitive period, preperiod as short as possible.
    pub fn canonical(&self) -> Self {
        let mut per = self.per.primitive_root();
        let mut pre = self.pre.clone();
        // Absorb preperiod symbols that already match the rotated period:
        // pre+last == per[last] means pre' (rot-right(per))^inf is the same point.
        while let Some(&last) = pre.0.last() {
            if last != per.0[per.len() - 1] {
                break;
            }
            pre.0.pop();
            per.0.rotate_right(1);
        }
        per = per.primitive_root();
        EvPeriodic { pre, per }
    }

    /// The point's shift: drop the first symbol.
    pub fn shifted(&self) -> Self {
        if self.pre.is_empty() {
            let mut per = self.per.clone();
            per.0.rotate_left(1);
            EvPeriodic::periodic(per)
        } else {
            EvPeriodic::new(self.pre.slice(1, self.pre.len()), self.per.clone())
        }
    }

    /// Is the point purely periodic (empty preperiod)?
    pub fn is_periodic(&self) -> bool {
        self.pre.is_empty()
    }

    /// All points in the forward orbit closure, i.e. the shifts of this point.
    /// Finite because the point is eventually periodic.
    pub fn orbit(&self) -> Vec<EvPeriodic> {
        let mut seen = std::collections::BTreeSet::new();
        let mut cur = self.canonical();
        loop {
            if !seen.insert(cur.clone()) {
                break;
            }
            cur = cur.shifted().canonical();
        }
        seen.into_iter().collect()
    }
}

impl fmt::Display for EvPeriodic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})*", self.pre, self.per)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_basic() {
        let a = Word::parse("0110").unwrap();
        assert_eq!(shift_distance(&a, &a).unwrap(), ShiftDistance::ZERO);
        let b = Word::parse("0111").unwrap();
        assert_eq!(shift_distance(&a, &b).unwrap(), ShiftDistance(Some(3)));
        let c = Word::parse("10").unwrap();
        let d = Word::parse("00").unwrap();
        assert_eq!(shift_distance(&c, &d).unwrap().as_f64(), 1.0);
    }

    #[test]
    fn distance_length_mismatch() {
        let a = Word::parse("01").unwrap();
        let b = Word::parse("011").unwrap();
        assert!(matches!(
            shift_distance(&a, &b),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ev_periodic_canonical() {
        let p = EvPeriodic::new(Word::empty(), Word::parse("0101").unwrap());
        assert_eq!(p.per, Word::parse("01").unwrap());
        // 0(10)* = (01)*
        let q = EvPeriodic::new(Word::parse("0").unwrap(), Word::parse("10").unwrap());
        assert!(q.pre.is_empty());
        assert_eq!(q.per, Word::parse("01").unwrap());
    }

    #[test]
    fn orbit_of_periodic_point() {
        let p = EvPeriodic::periodic(Word::parse("01").unwrap());
        let orbit = p.orbit();
        assert_eq!(orbit.len(), 2);
    }

    #[test]
    fn prefix_of_ev_periodic() {
        let p = EvPeriodic::new(Word::parse("2").unwrap(), Word::parse("0").unwrap());
        assert_eq!(p.prefix(4), Word::parse("2000").unwrap());
    }
}
