use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::word::{Symbol, Word};

/// Default cap on language enumeration (number of words).
pub const LANGUAGE_CAP: u128 = 1 << 26;

/// Description of a subshift of finite type.
///
/// Either memory-1 (a 0/1 transition matrix over the alphabet) or a block
/// shift given by a set of admissible blocks of one length under free
/// concatenation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SftDescr {
    Memory1 {
        /// Alphabet size.
        m: usize,
        /// `allowed[i][j]` is true when symbol `j` may follow symbol `i`.
        allowed: Vec<Vec<bool>>,
    },
    Block {
        m: usize,
        /// Common length of the admissible blocks.
        block_len: usize,
        /// Admissible blocks; concatenation is unrestricted.
        blocks: Vec<Word>,
    },
}

impl SftDescr {
    /// The full shift on `m` symbols.
    pub fn full(m: usize) -> Self {
        SftDescr::Memory1 {
            m,
            allowed: vec![vec![true; m]; m],
        }
    }

    /// Memory-1 SFT from a transition matrix.
    pub fn memory1(allowed: Vec<Vec<bool>>) -> Result<Self> {
        let m = allowed.len();
        if allowed.iter().any(|row| row.len() != m) {
            return Err(Error::Invalid("transition matrix must be square".into()));
        }
        Ok(SftDescr::Memory1 { m, allowed })
    }

    /// The golden-mean shift on {0,1}: the factor `11` is forbidden.
    pub fn golden_mean() -> Self {
        SftDescr::Memory1 {
            m: 2,
            allowed: vec![vec![true, true], vec![true, false]],
        }
    }

    /// Full shift on symbols `0..k` embedded in an `m`-symbol ambient alphabet.
    pub fn full_on_first(k: usize, m: usize) -> Self {
        let mut allowed = vec![vec![false; m]; m];
        for row in allowed.iter_mut().take(k) {
            for cell in row.iter_mut().take(k) {
                *cell = true;
            }
        }
        SftDescr::Memory1 { m, allowed }
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            SftDescr::Memory1 { m, .. } | SftDescr::Block { m, .. } => *m,
        }
    }

    pub fn block_shift(m: usize, blocks: Vec<Word>) -> Result<Self> {
        let block_len = blocks.first().map(Word::len).unwrap_or(0);
        if block_len == 0 || blocks.iter().any(|b| b.len() != block_len) {
            return Err(Error::Invalid(
                "block shift needs nonempty blocks of one length".into(),
            ));
        }
        let mut blocks = blocks;
        blocks.sort();
        blocks.dedup();
        Ok(SftDescr::Block {
            m,
            block_len,
            blocks,
        })
    }

    /// Is `next` allowed after `prev`? Only meaningful for memory-1 shifts.
    pub fn edge(&self, prev: Symbol, next: Symbol) -> bool {
        match self {
            SftDescr::Memory1 { allowed, .. } => allowed[prev.id()][next.id()],
            SftDescr::Block { .. } => true,
        }
    }

    /// Checks that `w` occurs in the subshift's language: a transition path
    /// through forward-live states.
    pub fn admits(&self, w: &Word) -> bool {
        match self {
            SftDescr::Memory1 { m, allowed } => {
                let live = self.live_states();
                if w.symbols()
                    .iter()
                    .any(|s| s.id() >= *m || !live.contains(&s.id()))
                {
                    return false;
                }
                w.symbols()
                    .windows(2)
                    .all(|pair| allowed[pair[0].id()][pair[1].id()])
            }
            SftDescr::Block { .. } => {
                // A word is admissible when it occurs in some block concatenation.
                self.block_factors(w.len())
                    .map(|lang| lang.binary_search(w).is_ok())
                    .unwrap_or(false)
            }
        }
    }

    fn block_factors(&self, n: usize) -> Option<Vec<Word>> {
        let SftDescr::Block {
            block_len, blocks, ..
        } = self
        else {
            return None;
        };
        if blocks.is_empty() || n == 0 {
            return Some(Vec::new());
        }
        // Factors of length n live inside at most q consecutive blocks.
        let q = n / block_len + 2;
        let mut set = std::collections::BTreeSet::new();
        // Enumerate block tuples only through what an n-window can see; to keep
        // this bounded we cap the tuple count.
        let tuple_cap: u128 = 1 << 22;
        let count = (blocks.len() as u128).checked_pow(q as u32)?;
        if count > tuple_cap {
            return None;
        }
        let mut stack = vec![Word::empty()];
        for _ in 0..q {
            let mut next = Vec::new();
            for w in &stack {
                for b in blocks {
                    let mut v = w.clone();
                    v.extend(b);
                    next.push(v);
                }
            }
            stack = next;
        }
        for cat in &stack {
            for off in 0..=cat.len().saturating_sub(n) {
                set.insert(cat.slice(off, off + n));
                if off >= *block_len {
                    break; // offsets repeat with period block_len
                }
            }
        }
        Some(set.into_iter().collect())
    }

    /// Exactly the admissible `n`-words, lexicographically sorted.
    pub fn language(&self, n: usize) -> Result<Vec<Word>> {
        self.language_capped(n, LANGUAGE_CAP)
    }

    pub fn language_capped(&self, n: usize, cap: u128) -> Result<Vec<Word>> {
        if n == 0 {
            return Err(Error::Invalid("language length must be >= 1".into()));
        }
        let m = self.alphabet_size() as u128;
        let bound = m.checked_pow(n as u32).unwrap_or(u128::MAX);
        if bound > cap {
            return Err(Error::OversizeRequest {
                requested: bound,
                cap,
            });
        }
        match self {
            SftDescr::Memory1 { allowed, .. } => {
                let live = self.live_states();
                let mut words: Vec<Word> =
                    live.iter().map(|&i| Word(vec![Symbol(i as u8)])).collect();
                for _ in 1..n {
                    let mut next = Vec::new();
                    for w in &words {
                        let last = w.symbols()[w.len() - 1].id();
                        for &j in &live {
                            if allowed[last][j] {
                                let mut v = w.clone();
                                v.push(Symbol(j as u8));
                                next.push(v);
                            }
                        }
                    }
                    words = next;
                    if words.len() as u128 > cap {
                        return Err(Error::OversizeRequest {
                            requested: words.len() as u128,
                            cap,
                        });
                    }
                }
                words.sort();
                Ok(words)
            }
            SftDescr::Block { .. } => self.block_factors(n).ok_or(Error::OversizeRequest {
                requested: bound,
                cap,
            }),
        }
    }

    /// Number of admissible `n`-words, computed by transfer-matrix counting
    /// (memory-1 only).
    pub fn count_words(&self, n: usize) -> Option<u128> {
        let SftDescr::Memory1 { allowed, .. } = self else {
            return None;
        };
        let live = self.live_states();
        let mut v: std::collections::BTreeMap<usize, u128> =
            live.iter().map(|&i| (i, 1u128)).collect();
        for _ in 1..n {
            let mut next: std::collections::BTreeMap<usize, u128> =
                live.iter().map(|&i| (i, 0u128)).collect();
            for &i in &live {
                for &j in &live {
                    if allowed[i][j] {
                        let add = v[&j];
                        let e = next.get_mut(&i).unwrap();
                        *e = e.checked_add(add)?;
                    }
                }
            }
            v = next;
        }
        v.into_values().try_fold(0u128, u128::checked_add)
    }

    /// Strongly connected components of the transition graph (memory-1),
    /// returned as sorted state sets. Trivial one-state components without a
    /// self-loop are kept; use [`SftDescr::essential_components`] to drop them.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let SftDescr::Memory1 { m, allowed } = self else {
            return Vec::new();
        };
        tarjan_scc(*m, |i, j| allowed[i][j])
    }

    /// Components that carry at least one cycle: these are exactly the parts
    /// that can support invariant measures.
    pub fn essential_components(&self) -> Vec<Vec<usize>> {
        let SftDescr::Memory1 { allowed, .. } = self else {
            return Vec::new();
        };
        self.components()
            .into_iter()
            .filter(|comp| comp.len() > 1 || allowed[comp[0]][comp[0]])
            .collect()
    }

    /// Restriction of a memory-1 shift to a state subset.
    pub fn restrict(&self, states: &[usize]) -> SftDescr {
        let SftDescr::Memory1 { m, allowed } = self else {
            return self.clone();
        };
        let keep: std::collections::BTreeSet<usize> = states.iter().copied().collect();
        let mut out = vec![vec![false; *m]; *m];
        for &i in &keep {
            for &j in &keep {
                out[i][j] = allowed[i][j];
            }
        }
        SftDescr::Memory1 {
            m: *m,
            allowed: out,
        }
    }

    /// States that lie on some cycle or on a path between cycles; the part of
    /// the graph that survives in any invariant subset.
    pub fn live_states(&self) -> Vec<usize> {
        match self {
            SftDescr::Memory1 { m, allowed } => {
                // A state is live here when it has an outgoing infinite path;
                // for one-sided shifts every point only needs forward moves.
                let mut live: Vec<bool> = (0..*m).map(|i| allowed[i].iter().any(|&b| b)).collect();
                loop {
                    let mut changed = false;
                    for i in 0..*m {
                        if live[i] && !(0..*m).any(|j| allowed[i][j] && live[j]) {
                            live[i] = false;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                (0..*m).filter(|&i| live[i]).collect()
            }
            SftDescr::Block { .. } => (0..self.alphabet_size()).collect(),
        }
    }

    /// Is the live part of the graph strongly connected and nonempty?
    /// The result is what "irreducible" means throughout this crate.
    pub fn is_irreducible(&self) -> bool {
        match self {
            SftDescr::Memory1 { .. } => {
                let live = self.live_states();
                if live.is_empty() {
                    return false;
                }
                let comps = self.restrict(&live).essential_components();
                comps.len() == 1 && comps[0] == live
            }
            SftDescr::Block { blocks, .. } => !blocks.is_empty(),
        }
    }

    pub fn is_empty_shift(&self) -> bool {
        match self {
            SftDescr::Memory1 { .. } => self.live_states().is_empty(),
            SftDescr::Block { blocks, .. } => blocks.is_empty(),
        }
    }

    /// Shortest connecting words: `bridge[i][j]` is a word `w` such that
    /// `i w j` is admissible. Empty word when `i -> j` is already an edge.
    /// `None` when `j` is unreachable from `i`.
    pub fn bridges(&self) -> Vec<Vec<Option<Word>>> {
        let m = self.alphabet_size();
        let SftDescr::Memory1 { allowed, .. } = self else {
            // Blocks concatenate freely.
            return vec![vec![Some(Word::empty()); m]; m];
        };
        let mut out = vec![vec![None; m]; m];
        for start in 0..m {
            // BFS over states, tracking the shortest path start -> j.
            let mut prev: Vec<Option<usize>> = vec![None; m];
            let mut dist: Vec<Option<usize>> = vec![None; m];
            let mut queue = std::collections::VecDeque::new();
            for j in 0..m {
                if allowed[start][j] {
                    dist[j] = Some(1);
                    prev[j] = Some(start);
                    queue.push_back(j);
                }
            }
            while let Some(u) = queue.pop_front() {
                for v in 0..m {
                    if allowed[u][v] && dist[v].is_none() {
                        dist[v] = Some(dist[u].unwrap() + 1);
                        prev[v] = Some(u);
                        queue.push_back(v);
                    }
                }
            }
            for end in 0..m {
                if dist[end].is_none() {
                    continue;
                }
                // Reconstruct the path start -> ... -> end and keep its interior.
                let mut rev_path = vec![end];
                let mut cur = end;
                while let Some(p) = prev[cur] {
                    if p == start {
                        break;
                    }
                    rev_path.push(p);
                    cur = p;
                }
                let interior: Vec<Symbol> = rev_path
                    .into_iter()
                    .skip(1) // drop `end`
                    .rev()
                    .map(|s| Symbol(s as u8))
                    .collect();
                out[start][end] = Some(Word(interior));
            }
        }
        out
    }

    /// Longest bridge over all connected state pairs.
    pub fn bridge_diameter(&self) -> usize {
        self.bridges()
            .iter()
            .flatten()
            .filter_map(|b| b.as_ref().map(Word::len))
            .max()
            .unwrap_or(0)
    }
}

fn tarjan_scc(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    struct State {
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn strongconnect(v: usize, n: usize, edge: &impl Fn(usize, usize) -> bool, st: &mut State) {
        st.index[v] = Some(st.next);
        st.low[v] = st.next;
        st.next += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for w in 0..n {
            if !edge(v, w) {
                continue;
            }
            if st.index[w].is_none() {
                strongconnect(w, n, edge, st);
                st.low[v] = st.low[v].min(st.low[w]);
            } else if st.on_stack[w] {
                st.low[v] = st.low[v].min(st.index[w].unwrap());
            }
        }
        if st.low[v] == st.index[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().unwrap();
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            st.out.push(comp);
        }
    }
    let mut st = State {
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            strongconnect(v, n, &edge, &mut st);
        }
    }
    st.out.sort();
    st.out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_shift_language() {
        let sft = SftDescr::full(2);
        let lang = sft.language(2).unwrap();
        let expect: Vec<Word> = ["00", "01", "10", "11"]
            .iter()
            .map(|s| Word::parse(s).unwrap())
            .collect();
        assert_eq!(lang, expect);
        assert_eq!(SftDescr::full(3).language(1).unwrap().len(), 3);
    }

    #[test]
    fn golden_mean_language() {
        let sft = SftDescr::golden_mean();
        let lang = sft.language(3).unwrap();
        assert_eq!(lang.len(), 5);
        assert!(lang.iter().all(|w| !w.to_string().contains("11")));
    }

    #[test]
    fn golden_mean_fibonacci_counts() {
        let sft = SftDescr::golden_mean();
        let counts: Vec<usize> = (1..=12).map(|n| sft.language(n).unwrap().len()).collect();
        for i in 2..counts.len() {
            assert_eq!(counts[i], counts[i - 1] + counts[i - 2]);
        }
        for (n, &c) in counts.iter().enumerate() {
            assert_eq!(Some(c as u128), sft.count_words(n + 1));
        }
    }

    #[test]
    fn oversize_request() {
        let sft = SftDescr::full(2);
        assert!(matches!(
            sft.language_capped(30, 1 << 10),
            Err(Error::OversizeRequest { .. })
        ));
    }

    #[test]
    fn bridges_golden() {
        let sft = SftDescr::golden_mean();
        let b = sft.bridges();
        // 1 -> 1 needs an interior 0.
        assert_eq!(b[1][1].as_ref().unwrap(), &Word::parse("0").unwrap());
        assert_eq!(b[0][1].as_ref().unwrap(), &Word::empty());
        assert_eq!(sft.bridge_diameter(), 1);
    }

    #[test]
    fn irreducibility() {
        assert!(SftDescr::full(2).is_irreducible());
        assert!(SftDescr::golden_mean().is_irreducible());
        // Two disjoint fixed points: reducible.
        let two = SftDescr::memory1(vec![vec![true, false], vec![false, true]]).unwrap();
        assert!(!two.is_irreducible());
        assert_eq!(two.essential_components().len(), 2);
    }

    #[test]
    fn embedded_full_shift() {
        let sub = SftDescr::full_on_first(2, 3);
        assert!(sub.admits(&Word::parse("0101").unwrap()));
        assert!(!sub.admits(&Word::parse("012").unwrap()));
        assert_eq!(sub.live_states(), vec![0, 1]);
    }

    #[test]
    fn block_shift_language() {
        let blocks = vec![Word::parse("00").unwrap(), Word::parse("01").unwrap()];
        let sft = SftDescr::block_shift(2, blocks).unwrap();
        let lang2 = sft.language(2).unwrap();
        // Factors of concatenations of {00, 01}: 00, 01, 10 appear; 11 does not.
        assert!(lang2.contains(&Word::parse("10").unwrap()));
        assert!(!lang2.contains(&Word::parse("11").unwrap()));
    }
}
