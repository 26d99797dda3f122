use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::template::Template;

/// A set of visit times, either materialized up to a horizon or given in
/// closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexSet {
    FinitePrefix {
        /// Strictly increasing indices below `horizon`.
        indices: Vec<u64>,
        horizon: u64,
    },
    Pattern {
        atoms: Vec<PatternAtom>,
    },
}

/// Closed-form building blocks for index patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternAtom {
    /// A finite set of indices.
    Finite { indices: Vec<u64> },
    /// `{start, start+step, start+2 step, ...}`
    Arithmetic { start: u64, step: u64 },
    /// `U_k [lo(k), hi(k))` for `k >= 1`.
    GeometricInterval { lo: Template, hi: Template },
    /// `{pos(k) : k >= 1}`
    GeometricPoints { pos: Template },
}

impl IndexSet {
    pub fn finite_prefix(indices: Vec<u64>, horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Invalid("horizon must be >= 1".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("indices must be strictly increasing".into()));
        }
        if indices.last().is_some_and(|&i| i >= horizon) {
            return Err(Error::Invalid("indices must lie below the horizon".into()));
        }
        Ok(IndexSet::FinitePrefix { indices, horizon })
    }

    pub fn empty_pattern() -> Self {
        IndexSet::Pattern { atoms: Vec::new() }
    }

    pub fn pattern(atoms: Vec<PatternAtom>) -> Result<Self> {
        for atom in &atoms {
            atom.validate()?;
        }
        Ok(IndexSet::Pattern { atoms })
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            IndexSet::FinitePrefix { indices, .. } => indices.binary_search(&n).is_ok(),
            IndexSet::Pattern { atoms } => atoms.iter().any(|a| a.contains(n)),
        }
    }

    /// Materialize the set below `horizon`.
    pub fn materialize(&self, horizon: u64) -> Vec<u64> {
        match self {
            IndexSet::FinitePrefix { indices, .. } => {
                indices.iter().copied().filter(|&i| i < horizon).collect()
            }
            IndexSet::Pattern { atoms } => {
                let mut out: Vec<u64> = Vec::new();
                for atom in atoms {
                    atom.collect_below(horizon, &mut out);
                }
                out.sort_unstable();
                out.dedup();
                out
            }
        }
    }
}

impl PatternAtom {
    fn validate(&self) -> Result<()> {
        match self {
            PatternAtom::Finite { indices } => {
                if indices.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::UnsupportedPattern(
                        "finite atom indices must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            PatternAtom::Arithmetic { step, .. } => {
                if *step == 0 {
                    return Err(Error::UnsupportedPattern(
                        "arithmetic step must be >= 1".into(),
                    ));
                }
                Ok(())
            }
            PatternAtom::GeometricInterval { lo, hi } => {
                if lo.poly != 0 || hi.poly != 0 {
                    return Err(Error::UnsupportedPattern(
                        "geometric intervals must use pure exponential templates".into(),
                    ));
                }
                if lo.base != hi.base || lo.base < 2 {
                    return Err(Error::UnsupportedPattern(
                        "geometric interval endpoints must share one base >= 2".into(),
                    ));
                }
                if hi.coeff <= lo.coeff {
                    return Err(Error::UnsupportedPattern(
                        "geometric interval must be nonempty: hi coeff > lo coeff".into(),
                    ));
                }
                // Disjointness round to round: hi(k) <= lo(k+1).
                if hi.coeff > lo.coeff.saturating_mul(lo.base) {
                    return Err(Error::UnsupportedPattern(
                        "geometric intervals overlap across rounds".into(),
                    ));
                }
                Ok(())
            }
            PatternAtom::GeometricPoints { pos } => {
                if pos.base < 2 {
                    return Err(Error::UnsupportedPattern(
                        "geometric points need base >= 2 to be sparse".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn contains(&self, n: u64) -> bool {
        match self {
            PatternAtom::Finite { indices } => indices.binary_search(&n).is_ok(),
            PatternAtom::Arithmetic { start, step } => {
                n >= *start && (n - start).is_multiple_of(*step)
            }
            PatternAtom::GeometricInterval { lo, hi } => {
                let mut k = 1u64;
                loop {
                    let l = lo.eval(k);
                    if l > n as u128 {
                        return false;
                    }
                    if (n as u128) < hi.eval(k) {
                        return true;
                    }
                    k += 1;
                }
            }
            PatternAtom::GeometricPoints { pos } => {
                let mut k = 1u64;
                loop {
                    let p = pos.eval(k);
                    if p == n as u128 {
                        return true;
                    }
                    if p > n as u128 {
                        return false;
                    }
                    k += 1;
                }
            }
        }
    }

    fn collect_below(&self, horizon: u64, out: &mut Vec<u64>) {
        match self {
            PatternAtom::Finite { indices } => {
                out.extend(indices.iter().copied().filter(|&i| i < horizon));
            }
            PatternAtom::Arithmetic { start, step } => {
                let mut n = *start;
                while n < horizon {
                    out.push(n);
                    n += step;
                }
            }
            PatternAtom::GeometricInterval { lo, hi } => {
                let mut k = 1u64;
                loop {
                    let l = lo.eval(k);
                    if l >= horizon as u128 {
                        break;
                    }
                    let h = hi.eval(k).min(horizon as u128);
                    out.extend((l as u64)..(h as u64));
                    k += 1;
                }
            }
            PatternAtom::GeometricPoints { pos } => {
                let mut k = 1u64;
                loop {
                    let p = pos.eval(k);
                    if p >= horizon as u128 {
                        break;
                    }
                    out.push(p as u64);
                    k += 1;
                }
            }
        }
    }
}
