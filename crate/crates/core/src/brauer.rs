//! Brauer monoid diagrams.
//!
//! A diagram on `n` strands is a perfect matching of `2n` points. Points
//! `0..n` are the top row (left to right) and `n..2n` the bottom row.
//! Externally points are written `t1..tn` and `b1..bn`.
//!
//! Products stack the left operand above the right one: in `x * y` the
//! bottom row of `x` is glued to the top row of `y`, and closed loops
//! formed in the middle are removed and counted.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GenKind {
    /// Crossing `r_i`, the transposition of strands `i` and `i+1`.
    R,
    /// Cup/cap `e_i`.
    E,
}

/// A pair of positions within one row, `1`-based, `lo < hi`.
pub type RowPair = (usize, usize);

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BrauerDiagram {
    n: usize,
    partner: Box<[u8]>,
}

/// The result of a product: the reduced diagram and the number of closed
/// loops that were discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopProduct {
    pub diagram: BrauerDiagram,
    pub loops: usize,
}

impl BrauerDiagram {
    pub const MAX_STRANDS: usize = 127;

    pub fn identity(n: usize) -> Self {
        assert!(n <= Self::MAX_STRANDS);
        let mut partner = vec![0u8; 2 * n];
        for i in 0..n {
            partner[i] = (n + i) as u8;
            partner[n + i] = i as u8;
        }
        BrauerDiagram {
            n,
            partner: partner.into_boxed_slice(),
        }
    }

    /// `r_i` or `e_i` on `n` strands, `1 <= i <= n - 1`.
    pub fn generator(kind: GenKind, i: usize, n: usize) -> Result<Self> {
        if i == 0 || i >= n {
            return Err(Error::GeneratorIndex { index: i, n });
        }
        let mut d = Self::identity(n);
        let (a, b) = (i - 1, i);
        let p = &mut d.partner;
        match kind {
            GenKind::R => {
                p[a] = (n + b) as u8;
                p[n + b] = a as u8;
                p[b] = (n + a) as u8;
                p[n + a] = b as u8;
            }
            GenKind::E => {
                p[a] = b as u8;
                p[b] = a as u8;
                p[n + a] = (n + b) as u8;
                p[n + b] = (n + a) as u8;
            }
        }
        Ok(d)
    }

    /// Build from a `0`-based partner array of length `2n`.
    pub fn from_partner(partner: &[usize]) -> Result<Self> {
        if partner.len() % 2 != 0 {
            return Err(Error::InvalidDiagram(format!(
                "odd number of points ({})",
                partner.len()
            )));
        }
        let n = partner.len() / 2;
        if n > Self::MAX_STRANDS {
            return Err(Error::InvalidDiagram(format!("too many strands ({n})")));
        }
        for (p, &q) in partner.iter().enumerate() {
            if q >= partner.len() {
                return Err(Error::InvalidDiagram(format!("point {q} out of range")));
            }
            if q == p {
                return Err(Error::InvalidDiagram(format!("fixed point at {p}")));
            }
            if partner[q] != p {
                return Err(Error::InvalidDiagram(format!(
                    "pairing is not an involution at {p}"
                )));
            }
        }
        Ok(BrauerDiagram {
            n,
            partner: partner.iter().map(|&q| q as u8).collect(),
        })
    }

    /// Permutation diagram joining top `i` to bottom `image[i-1]` (`1`-based
    /// one-line notation).
    pub fn from_permutation(image: &[usize]) -> Result<Self> {
        let n = image.len();
        let mut partner = vec![usize::MAX; 2 * n];
        for (i, &g) in image.iter().enumerate() {
            if g == 0 || g > n || partner[n + g - 1] != usize::MAX {
                return Err(Error::InvalidDiagram(format!(
                    "{image:?} is not a permutation in one-line notation"
                )));
            }
            partner[i] = n + g - 1;
            partner[n + g - 1] = i;
        }
        Self::from_partner(&partner)
    }

    /// Left-to-right product of generator letters (loops dropped).
    pub fn from_word(n: usize, word: &[(GenKind, usize)]) -> Result<Self> {
        let mut d = Self::identity(n);
        for &(kind, i) in word {
            d = d.compose(&Self::generator(kind, i, n)?);
        }
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn partner(&self, p: usize) -> usize {
        self.partner[p] as usize
    }

    pub fn partners(&self) -> impl Iterator<Item = usize> + '_ {
        self.partner.iter().map(|&q| q as usize)
    }

    /// Canonical edge list: `(p, q)` with `p < q`, sorted by `p` (`0`-based).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.partners()
            .enumerate()
            .filter(|&(p, q)| p < q)
            .collect()
    }

    /// Stack `self` above `other`.
    pub fn multiply(&self, other: &BrauerDiagram) -> Result<LoopProduct> {
        if self.n != other.n {
            return Err(Error::StrandMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self.stack(other))
    }

    /// Product with loops discarded. Panics on mismatched strand counts.
    pub fn compose(&self, other: &BrauerDiagram) -> BrauerDiagram {
        assert_eq!(self.n, other.n, "strand count mismatch");
        self.stack(other).diagram
    }

    fn stack(&self, other: &BrauerDiagram) -> LoopProduct {
        let n = self.n;
        let mut out = vec![u8::MAX; 2 * n];
        let mut middle_seen = vec![false; n];

        // Outer points: top row belongs to `self`, bottom row to `other`.
        // Walk from an outer point until we exit on another outer point.
        for start in 0..2 * n {
            if out[start] != u8::MAX {
                continue;
            }
            // (in_upper, point within that diagram)
            let (mut upper, mut pt) = if start < n {
                (true, start)
            } else {
                (false, start)
            };
            let end = loop {
                let q = if upper {
                    self.partner(pt)
                } else {
                    other.partner(pt)
                };
                if upper {
                    if q < n {
                        break q;
                    }
                    let j = q - n;
                    middle_seen[j] = true;
                    upper = false;
                    pt = j;
                } else {
                    if q >= n {
                        break q;
                    }
                    middle_seen[q] = true;
                    upper = true;
                    pt = n + q;
                }
            };
            out[start] = end as u8;
            out[end] = start as u8;
        }

        // Whatever is left in the middle row closes up into loops.
        let mut loops = 0;
        for j0 in 0..n {
            if middle_seen[j0] {
                continue;
            }
            loops += 1;
            let mut j = j0;
            loop {
                middle_seen[j] = true;
                // down through `other`'s top row, back up through `self`'s bottom row
                let k = other.partner(j);
                debug_assert!(k < n);
                middle_seen[k] = true;
                let back = self.partner(n + k);
                debug_assert!(back >= n);
                j = back - n;
                if j == j0 {
                    break;
                }
            }
        }

        LoopProduct {
            diagram: BrauerDiagram {
                n,
                partner: out.into_boxed_slice(),
            },
            loops,
        }
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| self.partner(i) == self.n + i)
    }

    /// Every edge joins the top row to the bottom row.
    pub fn is_permutation(&self) -> bool {
        (0..self.n).all(|i| self.partner(i) >= self.n)
    }

    /// One-line image `[g(1), ..., g(n)]` when this is a permutation diagram.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        self.is_permutation()
            .then(|| (0..self.n).map(|i| self.partner(i) - self.n + 1).collect())
    }

    /// Reflect top and bottom rows.
    pub fn transpose(&self) -> BrauerDiagram {
        let n = self.n;
        let flip = |p: usize| if p < n { p + n } else { p - n };
        let mut out = vec![0u8; 2 * n];
        for p in 0..2 * n {
            out[flip(p)] = flip(self.partner(p)) as u8;
        }
        BrauerDiagram {
            n,
            partner: out.into_boxed_slice(),
        }
    }

    pub fn inverse(&self) -> Result<BrauerDiagram> {
        if !self.is_permutation() {
            return Err(Error::NotPermutation(self.to_string()));
        }
        Ok(self.transpose())
    }

    /// Edges with both ends on the bottom row, as `1`-based positions.
    pub fn lower_horizontal_edges(&self) -> Vec<RowPair> {
        let n = self.n;
        (n..2 * n)
            .filter_map(|p| {
                let q = self.partner(p);
                (q > p).then(|| (p - n + 1, q - n + 1))
            })
            .collect()
    }

    /// Edges with both ends on the top row, as `1`-based positions.
    pub fn upper_horizontal_edges(&self) -> Vec<RowPair> {
        (0..self.n)
            .filter_map(|p| {
                let q = self.partner(p);
                (q > p && q < self.n).then(|| (p + 1, q + 1))
            })
            .collect()
    }

    /// Through strands as `(top, bottom)` `1`-based positions, ordered by top.
    pub fn through_strands(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .filter_map(|p| {
                let q = self.partner(p);
                (q >= self.n).then(|| (p + 1, q - self.n + 1))
            })
            .collect()
    }

    /// Number of lower (equivalently upper) horizontal edges.
    pub fn horizontal_count(&self) -> usize {
        self.lower_horizontal_edges().len()
    }

    /// The same diagram with an extra vertical strand on the right.
    pub fn with_extra_strand(&self) -> BrauerDiagram {
        let n = self.n;
        let m = n + 1;
        let lift = |p: usize| if p < n { p } else { p + 1 };
        let mut out = vec![0u8; 2 * m];
        for p in 0..2 * n {
            out[lift(p)] = lift(self.partner(p)) as u8;
        }
        out[n] = (m + n) as u8;
        out[m + n] = n as u8;
        BrauerDiagram {
            n: m,
            partner: out.into_boxed_slice(),
        }
    }

    /// Assemble a diagram from its row pieces (all positions `1`-based).
    pub fn from_parts(
        n: usize,
        upper: &[RowPair],
        lower: &[RowPair],
        through: &[(usize, usize)],
    ) -> Result<Self> {
        let mut partner = vec![usize::MAX; 2 * n];
        let mut link = |a: usize, b: usize| -> Result<()> {
            if a >= 2 * n || b >= 2 * n || partner[a] != usize::MAX || partner[b] != usize::MAX
            {
                return Err(Error::InvalidDiagram(format!(
                    "cannot join points {a} and {b}"
                )));
            }
            partner[a] = b;
            partner[b] = a;
            Ok(())
        };
        for &(a, b) in upper {
            link(a - 1, b - 1)?;
        }
        for &(a, b) in lower {
            link(n + a - 1, n + b - 1)?;
        }
        for &(t, b) in through {
            link(t - 1, n + b - 1)?;
        }
        if partner.contains(&usize::MAX) {
            return Err(Error::InvalidDiagram("unmatched point".into()));
        }
        Self::from_partner(&partner)
    }

    fn point_name(&self, p: usize) -> String {
        if p < self.n {
            format!("t{}", p + 1)
        } else {
            format!("b{}", p - self.n + 1)
        }
    }
}

impl<'a> std::ops::Mul<&'a BrauerDiagram> for &'a BrauerDiagram {
    type Output = BrauerDiagram;
    fn mul(self, rhs: &'a BrauerDiagram) -> BrauerDiagram {
        self.compose(rhs)
    }
}

impl Ord for BrauerDiagram {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.edges().cmp(&other.edges()))
    }
}

impl PartialOrd for BrauerDiagram {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BrauerDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, q) in self.edges() {
            if !first {
                f.write_str("|")?;
            }
            first = false;
            write!(f, "{}-{}", self.point_name(p), self.point_name(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BrauerDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BrauerDiagram({self})")
    }
}

fn parse_point(input: &str, token: &str) -> Result<(bool, usize)> {
    let err = |reason: String| Error::Parse {
        input: input.to_string(),
        reason,
    };
    let (top, rest) = match token.as_bytes().first() {
        Some(b't') => (true, &token[1..]),
        Some(b'b') => (false, &token[1..]),
        _ => return Err(err(format!("bad point name {token:?}"))),
    };
    let idx: usize = rest
        .parse()
        .map_err(|_| err(format!("bad point index in {token:?}")))?;
    if idx == 0 {
        return Err(err(format!("point indices start at 1 ({token:?})")));
    }
    Ok((top, idx))
}

impl FromStr for BrauerDiagram {
    type Err = Error;

    /// Accepts `p-q` edges joined by `|`, in any order.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: String| Error::Parse {
            input: s.to_string(),
            reason,
        };
        let s_trim = s.trim();
        if s_trim.is_empty() {
            return Err(err("empty diagram".into()));
        }
        let mut pairs = Vec::new();
        for edge in s_trim.split('|') {
            let (a, b) = edge
                .trim()
                .split_once('-')
                .ok_or_else(|| err(format!("edge {edge:?} is missing '-'")))?;
            pairs.push((parse_point(s, a.trim())?, parse_point(s, b.trim())?));
        }
        let n = pairs
            .iter()
            .flat_map(|&(a, b)| [a.1, b.1])
            .max()
            .unwrap_or(0);
        if n > Self::MAX_STRANDS {
            return Err(err(format!("too many strands ({n})")));
        }
        let index = |(top, i): (bool, usize)| if top { i - 1 } else { n + i - 1 };
        let mut partner = vec![usize::MAX; 2 * n];
        for &(a, b) in &pairs {
            let (pa, pb) = (index(a), index(b));
            if pa == pb {
                return Err(err(format!("point {} joined to itself", name(n, pa))));
            }
            for p in [pa, pb] {
                if partner[p] != usize::MAX {
                    return Err(err(format!("point {} used twice", name(n, p))));
                }
            }
            partner[pa] = pb;
            partner[pb] = pa;
        }
        if let Some(p) = partner.iter().position(|&q| q == usize::MAX) {
            return Err(err(format!("point {} unmatched", name(n, p))));
        }
        Self::from_partner(&partner)
    }
}

fn name(n: usize, p: usize) -> String {
    if p < n {
        format!("t{}", p + 1)
    } else {
        format!("b{}", p - n + 1)
    }
}

/// All diagrams on `n` strands in canonical order (lexicographic on edge
/// lists). There are `(2n-1)!!` of them.
pub fn enumerate(n: usize) -> Vec<BrauerDiagram> {
    fn rec(free: &mut Vec<usize>, partner: &mut [usize], out: &mut Vec<BrauerDiagram>) {
        if free.is_empty() {
            out.push(BrauerDiagram {
                n: partner.len() / 2,
                partner: partner.iter().map(|&q| q as u8).collect(),
            });
            return;
        }
        let a = free.remove(0);
        for k in 0..free.len() {
            let b = free.remove(k);
            partner[a] = b;
            partner[b] = a;
            rec(free, partner, out);
            free.insert(k, b);
        }
        free.insert(0, a);
    }
    if n == 0 {
        return vec![BrauerDiagram::identity(0)];
    }
    let mut free: Vec<usize> = (0..2 * n).collect();
    let mut partner = vec![0; 2 * n];
    let mut out = Vec::with_capacity(brauer_count(n) as usize);
    rec(&mut free, &mut partner, &mut out);
    out
}

/// `(2n-1)!!`
pub fn brauer_count(n: usize) -> u64 {
    (1..=n as u64).map(|k| 2 * k - 1).product()
}
