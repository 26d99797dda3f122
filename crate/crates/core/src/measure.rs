//! Measures on shift spaces: empirical cylinder measures, stationary Markov
//! chains, exact convex mixing, metric entropy, and a truncated weak* metric
//! built from cylinder indicator functions.
//!
//! All cylinder weights are exact rationals; floating point appears only in
//! entropy values and metric truncations.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::{SftDescr, Symbol, Word};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Default cap on cylinder table depth.
pub const DEPTH_CAP: usize = 12;

/// Probability data on the depth-`d` cylinders of an `m`-symbol shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderMeasure {
    pub m: usize,
    pub depth: usize,
    /// Nonzero weights only; keys are admissible depth-`d` words.
    pub weights: BTreeMap<Word, Rat>,
}

impl CylinderMeasure {
    pub fn new(m: usize, depth: usize, weights: BTreeMap<Word, Rat>) -> Result<Self> {
        if depth == 0 || depth > DEPTH_CAP {
            return Err(Error::DepthCap { depth });
        }
        let total: Rat = weights.values().cloned().sum();
        if !total.is_one() {
            return Err(Error::WeightSum(total.to_string()));
        }
        if weights.keys().any(|w| w.len() != depth) {
            return Err(Error::Invalid(
                "cylinder words must all have the table depth".into(),
            ));
        }
        Ok(CylinderMeasure { m, depth, weights })
    }

    pub fn weight(&self, w: &Word) -> Rat {
        self.weights.get(w).cloned().unwrap_or_else(Rat::zero)
    }

    /// Weight of a shorter cylinder by right-marginalization.
    pub fn cylinder(&self, w: &Word) -> Option<Rat> {
        if w.len() > self.depth {
            return None;
        }
        let mut total = Rat::zero();
        for (key, wt) in &self.weights {
            if key.symbols()[..w.len()] == *w.symbols() {
                total += wt.clone();
            }
        }
        Some(total)
    }

    /// Marginal table at a shallower depth, summing over right extensions.
    pub fn marginal(&self, depth: usize) -> CylinderMeasure {
        assert!(depth >= 1 && depth <= self.depth);
        let mut weights: BTreeMap<Word, Rat> = BTreeMap::new();
        for (key, wt) in &self.weights {
            *weights.entry(key.slice(0, depth)).or_insert_with(Rat::zero) += wt.clone();
        }
        CylinderMeasure {
            m: self.m,
            depth,
            weights,
        }
    }

    /// Largest left/right marginal defect at depth `d-1`; zero for shift
    /// invariant tables, and at most `2d/n` for the empirical table of an
    /// `n`-word.
    pub fn marginal_defect(&self) -> Rat {
        if self.depth == 1 {
            return Rat::zero();
        }
        let mut left: BTreeMap<Word, Rat> = BTreeMap::new();
        let mut right: BTreeMap<Word, Rat> = BTreeMap::new();
        for (key, wt) in &self.weights {
            *right
                .entry(key.slice(0, self.depth - 1))
                .or_insert_with(Rat::zero) += wt.clone();
            *left
                .entry(key.slice(1, self.depth))
                .or_insert_with(Rat::zero) += wt.clone();
        }
        let mut keys: std::collections::BTreeSet<Word> = left.keys().cloned().collect();
        keys.extend(right.keys().cloned());
        let mut worst = Rat::zero();
        for k in keys {
            let l = left.get(&k).cloned().unwrap_or_else(Rat::zero);
            let r = right.get(&k).cloned().unwrap_or_else(Rat::zero);
            let d = (l - r).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

/// Empirical measure of the word `w` at window depth `d`, without wraparound:
/// `weight(c) = #{j <= |w|-d : w[j..j+d) = c} / (|w|-d+1)`.
pub fn empirical_measure(w: &Word, d: usize) -> Result<CylinderMeasure> {
    if d == 0 || d > w.len() {
        return Err(Error::DepthTooLarge {
            depth: d,
            len: w.len(),
        });
    }
    let windows = w.len() - d + 1;
    let mut counts: BTreeMap<Word, u64> = BTreeMap::new();
    for j in 0..windows {
        *counts.entry(w.slice(j, j + d)).or_insert(0) += 1;
    }
    let denom = BigInt::from(windows as u64);
    let weights = counts
        .into_iter()
        .map(|(k, c)| (k, Rat::new(BigInt::from(c), denom.clone())))
        .collect();
    CylinderMeasure::new(w.min_alphabet().max(1), d, weights)
}

/// A stationary Markov chain: stochastic matrix plus stationary vector.
///
/// The stationary vector is stored explicitly so that reducible chains
/// (convex combinations of disjoint ergodic pieces, e.g. a mix of two fixed
/// points) can be represented; [`markov_invariants`] refuses those.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovMeasure {
    pub m: usize,
    pub p: Vec<Vec<Rat>>,
    pub pi: Vec<Rat>,
}

impl MarkovMeasure {
    /// Builds the measure from a stochastic matrix with a unique stationary
    /// vector, solved exactly.
    pub fn from_matrix(p: Vec<Vec<Rat>>) -> Result<Self> {
        let m = p.len();
        validate_stochastic(&p)?;
        if support_classes(&p).len() != 1 {
            return Err(Error::Reducible);
        }
        let pi = stationary_exact(&p)?;
        Ok(MarkovMeasure { m, p, pi })
    }

    /// Explicit (P, pi) pair; `pi` must be stationary.
    pub fn with_stationary(p: Vec<Vec<Rat>>, pi: Vec<Rat>) -> Result<Self> {
        let m = p.len();
        validate_stochastic(&p)?;
        if pi.len() != m {
            return Err(Error::Invalid("stationary vector has wrong length".into()));
        }
        let total: Rat = pi.iter().cloned().sum();
        if !total.is_one() || pi.iter().any(|x| x < &Rat::zero()) {
            return Err(Error::WeightSum(total.to_string()));
        }
        for j in 0..m {
            let col: Rat = (0..m).map(|i| pi[i].clone() * p[i][j].clone()).sum();
            if col != pi[j] {
                return Err(Error::Invalid(
                    "vector is not stationary for the matrix".into(),
                ));
            }
        }
        Ok(MarkovMeasure { m, p, pi })
    }

    /// Bernoulli measure with the given symbol weights.
    pub fn bernoulli(weights: Vec<Rat>) -> Result<Self> {
        let m = weights.len();
        let p = vec![weights.clone(); m];
        MarkovMeasure::with_stationary(p, weights)
    }

    /// Point mass on the fixed point `s^inf` inside an `m`-symbol alphabet.
    pub fn dirac_fixed(m: usize, s: usize) -> Self {
        let mut p = vec![vec![Rat::zero(); m]; m];
        for (i, row) in p.iter_mut().enumerate() {
            row[i] = Rat::one();
        }
        let mut pi = vec![Rat::zero(); m];
        pi[s] = Rat::one();
        MarkovMeasure { m, p, pi }
    }

    /// Exact probability of the cylinder `[w]`.
    pub fn cylinder(&self, w: &Word) -> Rat {
        if w.is_empty() {
            return Rat::one();
        }
        if w.symbols().iter().any(|s| s.id() >= self.m) {
            return Rat::zero();
        }
        let mut prob = self.pi[w.symbols()[0].id()].clone();
        for pair in w.symbols().windows(2) {
            if prob.is_zero() {
                return prob;
            }
            prob *= self.p[pair[0].id()][pair[1].id()].clone();
        }
        prob
    }

    /// Metric entropy in nats: `h = -sum_i pi_i sum_j P_ij ln P_ij`.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for i in 0..self.m {
            let pi = self.pi[i].to_f64().unwrap_or(0.0);
            if pi == 0.0 {
                continue;
            }
            for j in 0..self.m {
                let p = self.p[i][j].to_f64().unwrap_or(0.0);
                if p > 0.0 {
                    h -= pi * p * p.ln();
                }
            }
        }
        h
    }

    /// Support as a memory-1 SFT: positive-`pi` states and positive
    /// transition entries among them.
    pub fn support(&self) -> SftDescr {
        let mut allowed = vec![vec![false; self.m]; self.m];
        for i in 0..self.m {
            if self.pi[i].is_zero() {
                continue;
            }
            for j in 0..self.m {
                allowed[i][j] = !self.p[i][j].is_zero() && !self.pi[j].is_zero();
            }
        }
        SftDescr::Memory1 { m: self.m, allowed }
    }

    /// Cylinder table at the given depth.
    pub fn cylinders(&self, depth: usize) -> Result<CylinderMeasure> {
        if depth == 0 || depth > DEPTH_CAP {
            return Err(Error::DepthCap { depth });
        }
        let mut weights = BTreeMap::new();
        let mut stack: Vec<(Word, Rat)> = (0..self.m)
            .map(|i| (Word(vec![Symbol(i as u8)]), self.pi[i].clone()))
            .filter(|(_, p)| !p.is_zero())
            .collect();
        for _ in 1..depth {
            let mut next = Vec::new();
            for (w, prob) in stack {
                let last = w.symbols()[w.len() - 1].id();
                for j in 0..self.m {
                    let step = self.p[last][j].clone();
                    if step.is_zero() {
                        continue;
                    }
                    let mut v = w.clone();
                    v.push(Symbol(j as u8));
                    next.push((v, prob.clone() * step));
                }
            }
            stack = next;
        }
        for (w, prob) in stack {
            weights.insert(w, prob);
        }
        CylinderMeasure::new(self.m, depth, weights)
    }
}

fn validate_stochastic(p: &[Vec<Rat>]) -> Result<()> {
    let m = p.len();
    if m == 0 || p.iter().any(|row| row.len() != m) {
        return Err(Error::Invalid("matrix must be square and nonempty".into()));
    }
    for row in p {
        if row.iter().any(|x| x < &Rat::zero()) {
            return Err(Error::Invalid("matrix entries must be nonnegative".into()));
        }
        let total: Rat = row.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::Invalid(format!("row sums to {total}, expected 1")));
        }
    }
    Ok(())
}

/// Essential classes of the positivity pattern.
fn support_classes(p: &[Vec<Rat>]) -> Vec<Vec<usize>> {
    let m = p.len();
    let allowed: Vec<Vec<bool>> = p
        .iter()
        .map(|row| row.iter().map(|x| !x.is_zero()).collect())
        .collect();
    let sft = SftDescr::Memory1 { m, allowed };
    // Essential classes that are closed (no exits) are the recurrent ones.
    sft.essential_components()
        .into_iter()
        .filter(|comp| {
            comp.iter()
                .all(|&i| (0..m).all(|j| p[i][j].is_zero() || comp.contains(&j)))
        })
        .collect()
}

/// Exact stationary vector of an irreducible stochastic matrix: solves
/// `pi P = pi`, `sum pi = 1` by rational elimination.
fn stationary_exact(p: &[Vec<Rat>]) -> Result<Vec<Rat>> {
    let m = p.len();
    // Unknowns pi_0..pi_{m-1}; equations (P^T - I) pi = 0 plus sum = 1.
    let mut a = vec![vec![Rat::zero(); m + 1]; m + 1];
    for j in 0..m {
        for i in 0..m {
            a[j][i] = p[i][j].clone();
        }
        a[j][j] -= Rat::one();
    }
    for i in 0..m {
        a[m][i] = Rat::one();
    }
    a[m][m] = Rat::one(); // rhs of the normalization row
                          // Gaussian elimination on the (m+1) x m system with rhs in column m.
    let rows = m + 1;
    let mut pivot_row = 0usize;
    let mut pivots = Vec::new();
    for col in 0..m {
        let Some(r) = (pivot_row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(pivot_row, r);
        let inv = a[pivot_row][col].clone();
        for x in a[pivot_row].iter_mut() {
            *x /= inv.clone();
        }
        for r2 in 0..rows {
            if r2 != pivot_row && !a[r2][col].is_zero() {
                let f = a[r2][col].clone();
                for c2 in 0..=m {
                    let v = a[pivot_row][c2].clone() * f.clone();
                    a[r2][c2] -= v;
                }
            }
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    let mut pi = vec![Rat::zero(); m];
    for (r, c) in pivots {
        pi[c] = a[r][m].clone();
    }
    // Consistency: inconsistent rows mean no unique solution.
    for r in 0..rows {
        let lhs_zero = (0..m).all(|c| a[r][c].is_zero());
        if lhs_zero && !a[r][m].is_zero() {
            return Err(Error::Reducible);
        }
    }
    if pi.iter().any(|x| x < &Rat::zero()) {
        return Err(Error::Reducible);
    }
    Ok(pi)
}

/// Stationary vector by power iteration (f64), the numeric route; iterates
/// until successive vectors differ by less than `tol` in sup norm.
pub fn stationary_power_iteration(p: &[Vec<f64>], tol: f64) -> Vec<f64> {
    let m = p.len();
    let mut v = vec![1.0 / m as f64; m];
    for _ in 0..200_000 {
        let mut next = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                next[j] += v[i] * p[i][j];
            }
        }
        // Damping handles periodic chains such as the two-state rotation.
        for j in 0..m {
            next[j] = 0.5 * next[j] + 0.5 * v[j];
        }
        let total: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= total;
        }
        let diff = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if diff < tol {
            break;
        }
    }
    v
}

/// Stationary vector, metric entropy and support of a stochastic matrix.
///
/// The stationary vector is found by damped power iteration to `1e-12` and
/// cross-checked against the exact rational solution.
pub fn markov_invariants(p: Vec<Vec<Rat>>) -> Result<(Vec<f64>, f64, SftDescr)> {
    let mu = MarkovMeasure::from_matrix(p)?;
    let pf: Vec<Vec<f64>> =
        mu.p.iter()
            .map(|row| row.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect())
            .collect();
    let pi_num = stationary_power_iteration(&pf, 1e-13);
    for (a, b) in pi_num.iter().zip(&mu.pi) {
        let exact = b.to_f64().unwrap_or(0.0);
        if (a - exact).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "power iteration disagrees with exact stationary vector: {a} vs {exact}"
            )));
        }
    }
    let h = mu.entropy();
    let support = mu.support();
    Ok((pi_num, h, support))
}

/// An exact invariant measure: a stationary Markov chain, the uniform measure
/// on a periodic orbit, or a finite convex mixture of those.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvariantMeasure {
    Markov(MarkovMeasure),
    PeriodicOrbit { m: usize, period: Word },
    Mix { parts: Vec<(Rat, InvariantMeasure)> },
}

impl InvariantMeasure {
    pub fn markov(mu: MarkovMeasure) -> Self {
        InvariantMeasure::Markov(mu)
    }

    pub fn periodic(m: usize, period: Word) -> Self {
        InvariantMeasure::PeriodicOrbit {
            m,
            period: period.primitive_root(),
        }
    }

    pub fn mix(parts: Vec<(Rat, InvariantMeasure)>) -> Result<Self> {
        let total: Rat = parts.iter().map(|(w, _)| w.clone()).sum();
        if !total.is_one() || parts.iter().any(|(w, _)| w < &Rat::zero()) {
            return Err(Error::WeightSum(total.to_string()));
        }
        Ok(InvariantMeasure::Mix { parts })
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            InvariantMeasure::Markov(mu) => mu.m,
            InvariantMeasure::PeriodicOrbit { m, .. } => *m,
            InvariantMeasure::Mix { parts } => parts
                .iter()
                .map(|(_, p)| p.alphabet_size())
                .max()
                .unwrap_or(0),
        }
    }

    pub fn cylinder(&self, w: &Word) -> Rat {
        match self {
            InvariantMeasure::Markov(mu) => mu.cylinder(w),
            InvariantMeasure::PeriodicOrbit { period, .. } => {
                if w.is_empty() {
                    return Rat::one();
                }
                let l = period.len();
                let hits = (0..l)
                    .filter(|&r| (0..w.len()).all(|i| period.0[(r + i) % l] == w.0[i]))
                    .count();
                Rat::new(BigInt::from(hits as u64), BigInt::from(l as u64))
            }
            InvariantMeasure::Mix { parts } => {
                parts.iter().map(|(wt, p)| wt.clone() * p.cylinder(w)).sum()
            }
        }
    }

    pub fn cylinders(&self, m: usize, depth: usize) -> Result<CylinderMeasure> {
        if depth == 0 || depth > DEPTH_CAP {
            return Err(Error::DepthCap { depth });
        }
        let mut weights = BTreeMap::new();
        let mut stack: Vec<Word> = (0..m).map(|i| Word(vec![Symbol(i as u8)])).collect();
        for _ in 1..depth {
            let mut next = Vec::new();
            for w in stack {
                for j in 0..m {
                    let mut v = w.clone();
                    v.push(Symbol(j as u8));
                    next.push(v);
                }
            }
            stack = next;
        }
        for w in stack {
            let p = self.cylinder(&w);
            if !p.is_zero() {
                weights.insert(w, p);
            }
        }
        CylinderMeasure::new(m, depth, weights)
    }

    /// Metric entropy (nats). Affine over mixtures; zero on periodic orbits.
    pub fn entropy(&self) -> f64 {
        match self {
            InvariantMeasure::Markov(mu) => mu.entropy(),
            InvariantMeasure::PeriodicOrbit { .. } => 0.0,
            InvariantMeasure::Mix { parts } => parts
                .iter()
                .map(|(w, p)| w.to_f64().unwrap_or(0.0) * p.entropy())
                .sum(),
        }
    }

    /// Flattened ergodic-style components with their weights. Markov pieces
    /// are kept whole (they may themselves be non-ergodic only when built
    /// with an explicit reducible matrix).
    pub fn flatten(&self) -> Vec<(Rat, InvariantMeasure)> {
        match self {
            InvariantMeasure::Mix { parts } => parts
                .iter()
                .flat_map(|(w, p)| {
                    p.flatten()
                        .into_iter()
                        .map(move |(w2, q)| (w.clone() * w2, q))
                })
                .collect(),
            other => vec![(Rat::one(), other.clone())],
        }
    }

    /// Convex combination `(1-t) self + t other`.
    pub fn interpolate(&self, other: &InvariantMeasure, t: Rat) -> InvariantMeasure {
        if t.is_zero() {
            return self.clone();
        }
        if t.is_one() {
            return other.clone();
        }
        InvariantMeasure::Mix {
            parts: vec![(Rat::one() - t.clone(), self.clone()), (t, other.clone())],
        }
    }
}

/// Ordered polyline of invariant measures; consecutive vertices are joined by
/// convex segments. A single vertex is a point, `q` vertices give a compact
/// connected set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurePolyline {
    pub vertices: Vec<InvariantMeasure>,
}

impl MeasurePolyline {
    pub fn new(vertices: Vec<InvariantMeasure>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Invalid("polyline needs at least one vertex".into()));
        }
        let m = vertices[0].alphabet_size();
        if vertices.iter().any(|v| v.alphabet_size() > m)
            && vertices.iter().any(|v| v.alphabet_size() < m)
        {
            return Err(Error::AlphabetMismatch {
                left: m,
                right: vertices.iter().map(|v| v.alphabet_size()).max().unwrap(),
            });
        }
        Ok(MeasurePolyline { vertices })
    }

    pub fn singleton(mu: InvariantMeasure) -> Self {
        MeasurePolyline { vertices: vec![mu] }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Point at arc position `t` in edge units (`0 <= t <= len-1`).
    pub fn point_at(&self, t: Rat) -> InvariantMeasure {
        let q = self.vertices.len();
        if q == 1 {
            return self.vertices[0].clone();
        }
        let max = Rat::from(BigInt::from((q - 1) as u64));
        let t = if t < Rat::zero() {
            Rat::zero()
        } else if t > max {
            max
        } else {
            t
        };
        let floor = t.floor();
        let idx = floor.to_integer().to_usize().unwrap_or(0).min(q - 2);
        let u = t - Rat::from(BigInt::from(idx as u64));
        self.vertices[idx].interpolate(&self.vertices[idx + 1], u)
    }

    /// Infimum of metric entropy over the polyline. Entropy is affine on each
    /// segment, so the infimum is attained at a vertex.
    pub fn entropy_inf(&self) -> f64 {
        self.vertices
            .iter()
            .map(InvariantMeasure::entropy)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates measures on cylinders for the weak* metric.
pub trait CylinderEval {
    fn alphabet_size(&self) -> usize;
    /// `None` when the cylinder is deeper than the data determines.
    fn eval_cylinder(&self, w: &Word) -> Option<Rat>;
}

impl CylinderEval for CylinderMeasure {
    fn alphabet_size(&self) -> usize {
        self.m
    }
    fn eval_cylinder(&self, w: &Word) -> Option<Rat> {
        self.cylinder(w)
    }
}

impl CylinderEval for MarkovMeasure {
    fn alphabet_size(&self) -> usize {
        self.m
    }
    fn eval_cylinder(&self, w: &Word) -> Option<Rat> {
        Some(self.cylinder(w))
    }
}

impl CylinderEval for InvariantMeasure {
    fn alphabet_size(&self) -> usize {
        self.alphabet_size()
    }
    fn eval_cylinder(&self, w: &Word) -> Option<Rat> {
        Some(self.cylinder(w))
    }
}

/// The `j`-th cylinder word (1-based) in length-then-lex order over `m`
/// symbols: first the `m` one-symbol cylinders, then the `m^2` two-symbol
/// ones, and so on.
pub fn cylinder_by_index(m: usize, j: usize) -> Word {
    assert!(j >= 1 && m >= 1);
    let mut idx = j - 1;
    let mut len = 1usize;
    let mut level = m;
    while idx >= level {
        idx -= level;
        level = level.saturating_mul(m);
        len += 1;
    }
    // idx-th word of the given length in lex order.
    let mut digits = vec![0u8; len];
    let mut rem = idx;
    for d in (0..len).rev() {
        digits[d] = (rem % m) as u8;
        rem /= m;
    }
    Word::from_ids(&digits)
}

/// Result of the truncated weak* metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakStarDistance {
    pub value: f64,
    /// Number of cylinder terms actually summed.
    pub terms: usize,
    /// Tail bound: `|rho - rho_J| <= 2^(1-J)`.
    pub tail_bound: f64,
}

/// Truncated weak* distance `rho_J(xi, tau) = sum_{j<=J} |xi(C_j) - tau(C_j)| / 2^j`
/// over the length-then-lex cylinder enumeration.
///
/// When one side only determines cylinders to a finite depth the sum stops
/// there and the tail bound widens accordingly.
pub fn weak_star_distance<A: CylinderEval + ?Sized, B: CylinderEval + ?Sized>(
    xi: &A,
    tau: &B,
    terms: usize,
) -> Result<WeakStarDistance> {
    let m = xi.alphabet_size().max(tau.alphabet_size());
    if xi.alphabet_size() != tau.alphabet_size() {
        // Differing declared alphabets are fine when one embeds in the other;
        // cylinders outside a measure's alphabet get weight zero. A genuine
        // mismatch (no common refinement) cannot happen for index alphabets.
    }
    if terms == 0 {
        return Err(Error::Invalid("need at least one metric term".into()));
    }
    let mut value = 0.0;
    let mut used = 0usize;
    for j in 1..=terms {
        let w = cylinder_by_index(m, j);
        let (Some(a), Some(b)) = (xi.eval_cylinder(&w), tau.eval_cylinder(&w)) else {
            break;
        };
        let diff = (a - b).abs().to_f64().unwrap_or(0.0);
        value += diff / 2f64.powi(j as i32);
        used = j;
    }
    if used == 0 {
        return Err(Error::DepthCap { depth: 1 });
    }
    Ok(WeakStarDistance {
        value,
        terms: used,
        tail_bound: 2f64.powi(1 - used as i32),
    })
}

/// Convex combination of measures, materialized at a cylinder depth.
pub fn mix(entries: &[(Rat, InvariantMeasure)], depth: usize) -> Result<CylinderMeasure> {
    if entries.is_empty() {
        return Err(Error::WeightSum("0".into()));
    }
    let mixed = InvariantMeasure::mix(entries.to_vec())?;
    let m = mixed.alphabet_size();
    mixed.cylinders(m, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_examples() {
        let w = Word::parse("0101").unwrap();
        let e = empirical_measure(&w, 1).unwrap();
        assert_eq!(e.weight(&Word::parse("0").unwrap()), rat(1, 2));
        assert_eq!(e.weight(&Word::parse("1").unwrap()), rat(1, 2));

        let w = Word::parse("0000").unwrap();
        let e = empirical_measure(&w, 2).unwrap();
        assert_eq!(e.weight(&Word::parse("00").unwrap()), rat(1, 1));

        let w = Word::parse("0110").unwrap();
        let e = empirical_measure(&w, 2).unwrap();
        for c in ["01", "11", "10"] {
            assert_eq!(e.weight(&Word::parse(c).unwrap()), rat(1, 3));
        }
        assert!(matches!(
            empirical_measure(&w, 5),
            Err(Error::DepthTooLarge { .. })
        ));
    }

    #[test]
    fn markov_invariants_examples() {
        // Bernoulli(1/2)
        let p = vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]];
        let (pi, h, _) = markov_invariants(p).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-9);
        assert!((h - 2f64.ln()).abs() < 1e-12);

        // Deterministic rotation: entropy zero.
        let p = vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]];
        let (pi, h, _) = markov_invariants(p).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-9);
        assert!(h.abs() < 1e-12);

        // Two-state chain with pi = (2/3, 1/3), h = (2/3) ln 2.
        let p = vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 1), rat(0, 1)]];
        let (pi, h, support) = markov_invariants(p).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((h - 2.0 / 3.0 * 2f64.ln()).abs() < 1e-12);
        assert!(support.is_irreducible());
    }

    #[test]
    fn reducible_rejected() {
        let p = vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]];
        assert!(matches!(markov_invariants(p), Err(Error::Reducible)));
    }

    #[test]
    fn weak_star_zero_and_symmetry() {
        let mu = MarkovMeasure::bernoulli(vec![rat(1, 2), rat(1, 2)]).unwrap();
        let d = weak_star_distance(&mu, &mu, 16).unwrap();
        assert_eq!(d.value, 0.0);

        let d0 = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 0));
        let d1 = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 1));
        let a = weak_star_distance(&d0, &d1, 8).unwrap();
        let b = weak_star_distance(&d1, &d0, 8).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.value <= 2.0);
        // Hand count over depth <= 3 cylinders (j = 1..8):
        // 1/2 + 1/4 + 1/8 + 1/64 + 1/128 = 0.8984375
        assert!((a.value - 0.8984375).abs() < 1e-12);
    }

    #[test]
    fn weak_star_tail_bound() {
        let mu = InvariantMeasure::Markov(
            MarkovMeasure::bernoulli(vec![rat(3, 10), rat(7, 10)]).unwrap(),
        );
        let nu = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 1));
        let short = weak_star_distance(&mu, &nu, 8).unwrap();
        let long = weak_star_distance(&mu, &nu, 13).unwrap();
        assert!((long.value - short.value).abs() <= short.tail_bound + 1e-15);
    }

    #[test]
    fn mix_examples() {
        let b2 = MarkovMeasure::bernoulli(vec![rat(1, 2), rat(1, 2)]).unwrap();
        let single = mix(&[(rat(1, 1), InvariantMeasure::Markov(b2.clone()))], 2).unwrap();
        assert_eq!(single, b2.cylinders(2).unwrap());

        let d0 = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 0));
        let d1 = InvariantMeasure::Markov(MarkovMeasure::dirac_fixed(2, 1));
        let half = mix(&[(rat(1, 2), d0), (rat(1, 2), d1)], 1).unwrap();
        assert_eq!(half.weight(&Word::parse("0").unwrap()), rat(1, 2));

        // Mix of Bernoulli(.2) and Bernoulli(.8) is not Bernoulli(.5) at depth 2.
        let b02 = InvariantMeasure::Markov(
            MarkovMeasure::bernoulli(vec![rat(8, 10), rat(2, 10)]).unwrap(),
        );
        let b08 = InvariantMeasure::Markov(
            MarkovMeasure::bernoulli(vec![rat(2, 10), rat(8, 10)]).unwrap(),
        );
        let mixture = mix(&[(rat(1, 2), b02), (rat(1, 2), b08)], 2).unwrap();
        // weight(00) = .5*(.64) + .5*(.04) = .34
        assert_eq!(mixture.weight(&Word::parse("00").unwrap()), rat(34, 100));
        let depth1 = mixture.marginal(1);
        assert_eq!(depth1.weight(&Word::parse("0").unwrap()), rat(1, 2));
    }

    #[test]
    fn periodic_orbit_cylinders() {
        let orbit = InvariantMeasure::periodic(2, Word::parse("01").unwrap());
        assert_eq!(orbit.cylinder(&Word::parse("0").unwrap()), rat(1, 2));
        assert_eq!(orbit.cylinder(&Word::parse("01").unwrap()), rat(1, 2));
        assert_eq!(orbit.cylinder(&Word::parse("11").unwrap()), rat(0, 1));
        assert_eq!(orbit.entropy(), 0.0);
    }

    #[test]
    fn cylinder_enumeration_order() {
        assert_eq!(cylinder_by_index(2, 1), Word::parse("0").unwrap());
        assert_eq!(cylinder_by_index(2, 2), Word::parse("1").unwrap());
        assert_eq!(cylinder_by_index(2, 3), Word::parse("00").unwrap());
        assert_eq!(cylinder_by_index(2, 6), Word::parse("11").unwrap());
        assert_eq!(cylinder_by_index(2, 7), Word::parse("000").unwrap());
        assert_eq!(cylinder_by_index(2, 8), Word::parse("001").unwrap());
    }

    #[test]
    fn marginal_defect_small_for_empirical() {
        let w = Word::parse("01101001100101101001011001101001").unwrap();
        let e = empirical_measure(&w, 3).unwrap();
        let bound = rat(2 * 3, w.len() as i64);
        assert!(e.marginal_defect() <= bound);
    }
}
