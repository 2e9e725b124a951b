//! Constrained reduced words and the BMW length function.
//!
//! A word `s_1 s_2 ... s_k` over `{r_i, e_i}` evaluates to the diagram
//! `s_1 * s_2 * ... * s_k` (first letter on top). A reduced word is a
//! shortest word for its diagram among the words that avoid a set of
//! forbidden adjacent pairs, always including `e_{i+1} r_i`.
//!
//! Shortest constrained words are found by breadth-first search over
//! states `(diagram, last letter)`, starting from the identity with no
//! last letter. The BFS distance to the cheapest state of a diagram is
//! `l'(d)`; the number of `e` letters in a shortest word is `e(d)`, and
//! the BMW length is `L(d) = l'(d) + e(d)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::brauer::{enumerate, BrauerDiagram, GenKind};
use crate::error::{Error, Result};

/// One generator letter. Ordered `r_1 < e_1 < r_2 < e_2 < ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Letter {
    pub index: usize,
    pub kind: GenKind,
}

impl Letter {
    pub fn r(index: usize) -> Self {
        Letter {
            index,
            kind: GenKind::R,
        }
    }

    pub fn e(index: usize) -> Self {
        Letter {
            index,
            kind: GenKind::E,
        }
    }

    pub fn is_e(self) -> bool {
        self.kind == GenKind::E
    }

    fn from_code(code: usize) -> Self {
        Letter {
            index: code / 2 + 1,
            kind: if code % 2 == 0 { GenKind::R } else { GenKind::E },
        }
    }

    pub fn diagram(self, n: usize) -> Result<BrauerDiagram> {
        BrauerDiagram::generator(self.kind, self.index, n)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            GenKind::R => 'r',
            GenKind::E => 'e',
        };
        write!(f, "{k}{}", self.index)
    }
}

/// Which adjacent letter pairs a reduced word may not contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum AdjacencyRule {
    /// Only `e_{i+1} r_i` is forbidden.
    CupThenCrossing,
    /// `e_{i+1} r_i` plus every same-index pair (`r_i r_i`, `e_i e_i`,
    /// `r_i e_i`, `e_i r_i`). Such pairs always shorten, so no reduced word
    /// needs them; admitting them lets a search slip past the `e_{i+1} r_i`
    /// ban (`e_2 r_2 r_1` evaluates to `e_2 r_1`).
    #[default]
    NoCollapsingPairs,
}

impl AdjacencyRule {
    pub fn forbids(self, prev: Letter, next: Letter) -> bool {
        if prev.is_e() && !next.is_e() && prev.index == next.index + 1 {
            return true;
        }
        match self {
            AdjacencyRule::CupThenCrossing => false,
            AdjacencyRule::NoCollapsingPairs => prev.index == next.index,
        }
    }

    pub fn admits(self, word: &[Letter]) -> bool {
        word.windows(2).all(|w| !self.forbids(w[0], w[1]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReducedWord {
    pub letters: Vec<Letter>,
    #[serde(serialize_with = "crate::ser::display")]
    pub target: BrauerDiagram,
    pub length: usize,
    pub e_count: usize,
}

impl ReducedWord {
    fn new(letters: Vec<Letter>, target: BrauerDiagram) -> Self {
        let e_count = letters.iter().filter(|l| l.is_e()).count();
        ReducedWord {
            length: letters.len(),
            letters,
            target,
            e_count,
        }
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BmwLength(pub u32);

/// Per-diagram length data for one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LengthEntry {
    pub shortest: u32,
    /// Fewest `e` letters over all shortest constrained words.
    pub e_count: u32,
    /// Bit `k` set iff some shortest constrained word has `k` letters `e`.
    pub e_counts_mask: u64,
}

impl LengthEntry {
    pub fn bmw_length(&self) -> BmwLength {
        BmwLength(self.shortest + self.e_count)
    }

    pub fn e_count_is_unique(&self) -> bool {
        self.e_counts_mask.count_ones() == 1
    }

    pub fn e_counts(&self) -> Vec<u32> {
        (0..64)
            .filter(|k| self.e_counts_mask >> k & 1 == 1)
            .collect()
    }
}

const UNSEEN: u32 = u32::MAX;

/// BFS results over the whole basis for one `n`.
pub struct LengthTable {
    n: usize,
    rule: AdjacencyRule,
    diagrams: Vec<BrauerDiagram>,
    index: HashMap<BrauerDiagram, usize>,
    /// `right[d * alphabet + g]` = index of `d * g`.
    right: Vec<u32>,
    entries: Vec<LengthEntry>,
    // per BFS state
    dist: Vec<u32>,
    parent: Vec<u32>,
    best_state: Vec<u32>,
}

impl fmt::Debug for LengthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LengthTable")
            .field("n", &self.n)
            .field("rule", &self.rule)
            .field("states", &self.diagrams.len())
            .finish()
    }
}

impl LengthTable {
    pub fn build(n: usize) -> Self {
        Self::build_with(n, AdjacencyRule::default())
    }

    pub fn build_with(n: usize, rule: AdjacencyRule) -> Self {
        assert!(n >= 1, "need at least one strand");
        let diagrams = enumerate(n);
        let index: HashMap<BrauerDiagram, usize> = diagrams
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, d)| (d, k))
            .collect();
        let alphabet = 2 * (n - 1);
        let letters: Vec<Letter> = (0..alphabet).map(Letter::from_code).collect();
        let gens: Vec<BrauerDiagram> = letters.iter().map(|l| l.diagram(n).unwrap()).collect();

        let mut right = vec![0u32; diagrams.len() * alphabet];
        for (k, d) in diagrams.iter().enumerate() {
            for (g, gd) in gens.iter().enumerate() {
                right[k * alphabet + g] = index[&d.compose(gd)] as u32;
            }
        }

        // state = diagram * (alphabet + 1) + slot, slot 0 = no last letter
        let width = alphabet + 1;
        let nstates = diagrams.len() * width;
        let mut dist = vec![UNSEEN; nstates];
        let mut emask = vec![0u64; nstates];
        let mut ebest = vec![u32::MAX; nstates];
        let mut rank = vec![0u32; nstates];
        let mut parent = vec![UNSEEN; nstates];

        let start = index[&BrauerDiagram::identity(n)] * width;
        dist[start] = 0;
        emask[start] = 1;
        ebest[start] = 0;
        let mut frontier = vec![start];
        let mut depth = 0u32;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &s in &frontier {
                let (d, slot) = (s / width, s % width);
                let last = (slot > 0).then(|| letters[slot - 1]);
                for (g, &letter) in letters.iter().enumerate() {
                    if last.is_some_and(|l| rule.forbids(l, letter)) {
                        continue;
                    }
                    let t = right[d * alphabet + g] as usize * width + g + 1;
                    if dist[t] == UNSEEN {
                        dist[t] = depth + 1;
                        next.push(t);
                    }
                    if dist[t] != depth + 1 {
                        continue;
                    }
                    let bump = u32::from(letter.is_e());
                    assert!(emask[s] >> 63 == 0, "e-count overflow");
                    emask[t] |= emask[s] << bump;
                    let cand = (ebest[s] + bump, rank[s]);
                    let cur = (ebest[t], if parent[t] == UNSEEN { u32::MAX } else { rank[parent[t] as usize] });
                    if cand < cur {
                        ebest[t] = cand.0;
                        parent[t] = s as u32;
                    }
                }
            }
            // lexicographic rank of each state's chosen word within the layer
            next.sort_by_key(|&t| (rank[parent[t] as usize], t % width));
            for (k, &t) in next.iter().enumerate() {
                rank[t] = k as u32;
            }
            frontier = next;
            depth += 1;
        }

        let mut entries = Vec::with_capacity(diagrams.len());
        let mut best_state = Vec::with_capacity(diagrams.len());
        for (k, d) in diagrams.iter().enumerate() {
            let states = k * width..(k + 1) * width;
            let shortest = states
                .clone()
                .map(|s| dist[s])
                .min()
                .filter(|&m| m != UNSEEN)
                .unwrap_or_else(|| panic!("diagram {d} unreachable by constrained words"));
            let tight: Vec<usize> = states.filter(|&s| dist[s] == shortest).collect();
            let mask = tight.iter().fold(0u64, |acc, &s| acc | emask[s]);
            let best = *tight
                .iter()
                .min_by_key(|&&s| (ebest[s], rank[s]))
                .unwrap();
            entries.push(LengthEntry {
                shortest,
                e_count: mask.trailing_zeros(),
                e_counts_mask: mask,
            });
            debug_assert_eq!(ebest[best], mask.trailing_zeros());
            best_state.push(best as u32);
        }

        LengthTable {
            n,
            rule,
            diagrams,
            index,
            right,
            entries,
            dist,
            parent,
            best_state,
        }
    }

    /// Process-wide cached table for the default rule.
    pub fn shared(n: usize) -> Arc<LengthTable> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LengthTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&n) {
            return Arc::clone(t);
        }
        let table = Arc::new(LengthTable::build(n));
        cache
            .lock()
            .unwrap()
            .entry(n)
            .or_insert(table)
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> AdjacencyRule {
        self.rule
    }

    /// Canonical enumeration order.
    pub fn diagrams(&self) -> &[BrauerDiagram] {
        &self.diagrams
    }

    pub fn index_of(&self, d: &BrauerDiagram) -> Option<usize> {
        self.index.get(d).copied()
    }

    fn lookup(&self, d: &BrauerDiagram) -> usize {
        assert_eq!(d.n(), self.n, "strand count mismatch");
        self.index[d]
    }

    pub fn entry(&self, d: &BrauerDiagram) -> LengthEntry {
        self.entries[self.lookup(d)]
    }

    pub fn entry_at(&self, k: usize) -> LengthEntry {
        self.entries[k]
    }

    pub fn bmw_length(&self, d: &BrauerDiagram) -> BmwLength {
        self.entry(d).bmw_length()
    }

    pub fn length_at(&self, k: usize) -> u32 {
        self.entries[k].bmw_length().0
    }

    /// The reduced word with the fewest `e` letters, ties broken
    /// lexicographically (`r_1 < e_1 < r_2 < ...`).
    pub fn reduced_expression(&self, d: &BrauerDiagram) -> ReducedWord {
        let width = 2 * (self.n - 1) + 1;
        let mut s = self.best_state[self.lookup(d)] as usize;
        let mut rev = Vec::new();
        while self.parent[s] != UNSEEN {
            rev.push(Letter::from_code(s % width - 1));
            s = self.parent[s] as usize;
        }
        rev.reverse();
        ReducedWord::new(rev, d.clone())
    }

    /// Every shortest constrained word for `d`, in lexicographic order.
    /// Fails once more than `cap` words have been produced.
    pub fn all_minimal_words(&self, d: &BrauerDiagram, cap: usize) -> Result<Vec<ReducedWord>> {
        let alphabet = 2 * (self.n - 1);
        let width = alphabet + 1;
        let target = self.lookup(d);
        let shortest = self.entries[target].shortest;

        // reverse of the right action, per letter
        let mut preimages: Vec<Vec<u32>> = vec![Vec::new(); self.diagrams.len() * alphabet];
        for k in 0..self.diagrams.len() {
            for g in 0..alphabet {
                let t = self.right[k * alphabet + g] as usize;
                preimages[t * alphabet + g].push(k as u32);
            }
        }

        let mut out = Vec::new();
        let mut suffix = Vec::new();
        for slot in 0..width {
            let s = target * width + slot;
            if self.dist[s] == shortest {
                self.collect_words(s, &preimages, &mut suffix, &mut out, cap)?;
            }
        }
        let mut words: Vec<ReducedWord> = out
            .into_iter()
            .map(|letters| ReducedWord::new(letters, d.clone()))
            .collect();
        words.sort_by(|a, b| a.letters.cmp(&b.letters));
        Ok(words)
    }

    fn collect_words(
        &self,
        state: usize,
        preimages: &[Vec<u32>],
        suffix: &mut Vec<Letter>,
        out: &mut Vec<Vec<Letter>>,
        cap: usize,
    ) -> Result<()> {
        let alphabet = 2 * (self.n - 1);
        let width = alphabet + 1;
        let depth = self.dist[state];
        if depth == 0 {
            if out.len() >= cap {
                return Err(Error::ResourceLimit(format!(
                    "more than {cap} minimal words"
                )));
            }
            out.push(suffix.iter().rev().copied().collect());
            return Ok(());
        }
        let (d, slot) = (state / width, state % width);
        let g = slot - 1;
        let letter = Letter::from_code(g);
        suffix.push(letter);
        for &p in &preimages[d * alphabet + g] {
            for pslot in 0..width {
                let ps = p as usize * width + pslot;
                if self.dist[ps] != depth - 1 {
                    continue;
                }
                if pslot > 0 && self.rule.forbids(Letter::from_code(pslot - 1), letter) {
                    continue;
                }
                self.collect_words(ps, preimages, suffix, out, cap)?;
            }
        }
        suffix.pop();
        Ok(())
    }
}

/// `L(d)` from the shared table.
pub fn bmw_length(d: &BrauerDiagram) -> BmwLength {
    LengthTable::shared(d.n()).bmw_length(d)
}

pub fn reduced_expression(d: &BrauerDiagram) -> ReducedWord {
    LengthTable::shared(d.n()).reduced_expression(d)
}
