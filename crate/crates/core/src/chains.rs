//! Exact Markov chains on the diagram basis.
//!
//! Matrices are column-stochastic: the entry in row `y`, column `x` is the
//! probability of moving from `x` to `y`. A product `A * B` applied to a
//! distribution applies `B` first.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::brauer::{BrauerDiagram, GenKind};
use crate::error::{Error, Result};
use crate::rational::{int, Rational, Theta};
use crate::words::LengthTable;

pub type Column = Vec<(usize, Rational)>;

/// Sparse column-stochastic matrix indexed by a list of diagrams.
#[derive(Clone, PartialEq)]
pub struct ScanChain {
    n: usize,
    states: Arc<[BrauerDiagram]>,
    columns: Vec<Column>,
}

impl fmt::Debug for ScanChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScanChain")
            .field("n", &self.n)
            .field("states", &self.states.len())
            .field("nonzeros", &self.nonzeros())
            .finish()
    }
}

fn normalize_column(mut col: Column) -> Column {
    col.sort_by_key(|&(r, _)| r);
    let mut out: Column = Vec::with_capacity(col.len());
    for (r, w) in col {
        match out.last_mut() {
            Some((last, acc)) if *last == r => *acc += w,
            _ => out.push((r, w)),
        }
    }
    out.retain(|(_, w)| !w.is_zero());
    out
}

impl ScanChain {
    /// Build from raw columns; duplicate rows are summed and zeros dropped.
    /// No stochasticity check is made here, see [`ScanChain::check_stochastic`].
    pub fn from_columns(n: usize, states: Arc<[BrauerDiagram]>, columns: Vec<Column>) -> Result<Self> {
        if columns.len() != states.len() {
            return Err(Error::Dimension(format!(
                "{} columns for {} states",
                columns.len(),
                states.len()
            )));
        }
        let dim = states.len();
        let columns: Vec<Column> = columns.into_iter().map(normalize_column).collect();
        if let Some(&(r, _)) = columns.iter().flatten().find(|(r, _)| *r >= dim) {
            return Err(Error::Dimension(format!("row {r} outside {dim} states")));
        }
        Ok(ScanChain { n, states, columns })
    }

    pub fn identity(n: usize, states: Arc<[BrauerDiagram]>) -> Self {
        let columns = (0..states.len()).map(|k| vec![(k, Rational::one())]).collect();
        ScanChain { n, states, columns }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &Arc<[BrauerDiagram]> {
        &self.states
    }

    pub fn column(&self, x: usize) -> &[(usize, Rational)] {
        &self.columns[x]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn nonzeros(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Probability of `x -> y`.
    pub fn entry(&self, y: usize, x: usize) -> Rational {
        self.columns[x]
            .binary_search_by_key(&y, |&(r, _)| r)
            .map(|k| self.columns[x][k].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn index_of(&self, d: &BrauerDiagram) -> Option<usize> {
        self.states.iter().position(|s| s == d)
    }

    /// Every column non-negative with sum exactly one.
    pub fn check_stochastic(&self) -> Result<()> {
        for (x, col) in self.columns.iter().enumerate() {
            if col.iter().any(|(_, w)| w.is_negative()) {
                return Err(Error::InvalidDiagram(format!(
                    "negative entry in column {}",
                    self.states[x]
                )));
            }
            let sum: Rational = col.iter().map(|(_, w)| w).sum();
            if !sum.is_one() {
                return Err(Error::InvalidDiagram(format!(
                    "column {} sums to {sum}",
                    self.states[x]
                )));
            }
        }
        Ok(())
    }

    pub fn is_stochastic(&self) -> bool {
        self.check_stochastic().is_ok()
    }

    fn same_space(&self, other: &ScanChain) -> Result<()> {
        if self.dim() != other.dim() || self.states != other.states {
            return Err(Error::Dimension(format!(
                "chains on {} and {} states",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// `self * other`: apply `other`, then `self`.
    pub fn compose(&self, other: &ScanChain) -> Result<ScanChain> {
        self.same_space(other)?;
        let columns = other
            .columns
            .par_iter()
            .map(|col| {
                let mut acc: Column = Vec::new();
                for (z, w) in col {
                    for (y, v) in &self.columns[*z] {
                        acc.push((*y, w * v));
                    }
                }
                normalize_column(acc)
            })
            .collect();
        Ok(ScanChain {
            n: self.n,
            states: Arc::clone(&self.states),
            columns,
        })
    }

    pub fn scale(&self, c: &Rational) -> ScanChain {
        let columns = self
            .columns
            .iter()
            .map(|col| normalize_column(col.iter().map(|(r, w)| (*r, w * c)).collect()))
            .collect();
        ScanChain {
            n: self.n,
            states: Arc::clone(&self.states),
            columns,
        }
    }

    pub fn add(&self, other: &ScanChain) -> Result<ScanChain> {
        self.same_space(other)?;
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| normalize_column(a.iter().chain(b).cloned().collect()))
            .collect();
        Ok(ScanChain {
            n: self.n,
            states: Arc::clone(&self.states),
            columns,
        })
    }

    /// One step applied to a distribution.
    pub fn step(&self, dist: &Distribution) -> Result<Distribution> {
        if dist.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "distribution of length {} for {} states",
                dist.len(),
                self.dim()
            )));
        }
        let mut out = vec![Rational::zero(); self.dim()];
        for (x, px) in dist.weights.iter().enumerate() {
            if px.is_zero() {
                continue;
            }
            for (y, w) in &self.columns[x] {
                out[*y] += px * w;
            }
        }
        Ok(Distribution { weights: out })
    }

    pub fn power(&self, m: u32) -> ScanChain {
        let mut result = ScanChain::identity(self.n, Arc::clone(&self.states));
        let mut base = self.clone();
        let mut k = m;
        while k > 0 {
            if k & 1 == 1 {
                result = base.compose(&result).expect("same space");
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base).expect("same space");
            }
        }
        result
    }

    /// Transpose of the transition structure (row/column swap).
    pub fn transposed(&self) -> ScanChain {
        let mut cols: Vec<Column> = vec![Vec::new(); self.dim()];
        for (x, col) in self.columns.iter().enumerate() {
            for (y, w) in col {
                cols[*y].push((x, w.clone()));
            }
        }
        ScanChain {
            n: self.n,
            states: Arc::clone(&self.states),
            columns: cols.into_iter().map(normalize_column).collect(),
        }
    }

    /// Restriction to the given state indices, which must be closed.
    pub fn restrict(&self, indices: &[usize]) -> Result<ScanChain> {
        let mut local = vec![usize::MAX; self.dim()];
        for (k, &s) in indices.iter().enumerate() {
            local[s] = k;
        }
        let mut columns = Vec::with_capacity(indices.len());
        for &x in indices {
            let mut col = Vec::with_capacity(self.columns[x].len());
            for (y, w) in &self.columns[x] {
                if local[*y] == usize::MAX {
                    return Err(Error::NotClosed {
                        state: self.states[x].to_string(),
                        target: self.states[*y].to_string(),
                    });
                }
                col.push((local[*y], w.clone()));
            }
            columns.push(normalize_column(col));
        }
        let states: Arc<[BrauerDiagram]> =
            indices.iter().map(|&k| self.states[k].clone()).collect();
        Ok(ScanChain {
            n: self.n,
            states,
            columns,
        })
    }

    /// Pairs `x < y` breaking `pi(x) K(x->y) = pi(y) K(y->x)`.
    pub fn detailed_balance_violations(&self, pi: &[Rational]) -> Vec<(usize, usize)> {
        let t = self.transposed();
        let mut bad = Vec::new();
        for x in 0..self.dim() {
            let mut ys: Vec<usize> = self.columns[x]
                .iter()
                .chain(&t.columns[x])
                .map(|(y, _)| *y)
                .filter(|&y| y > x)
                .collect();
            ys.sort_unstable();
            ys.dedup();
            for y in ys {
                if &pi[x] * self.entry(y, x) != &pi[y] * self.entry(x, y) {
                    bad.push((x, y));
                }
            }
        }
        bad
    }

    /// Dense copy, `[row][col]`.
    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut m = vec![vec![Rational::zero(); self.dim()]; self.dim()];
        for (x, col) in self.columns.iter().enumerate() {
            for (y, w) in col {
                m[*y][x] = w.clone();
            }
        }
        m
    }
}

/// Exact weights over a chain's state list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    #[serde(serialize_with = "crate::ser::rationals")]
    pub weights: Vec<Rational>,
}

impl Distribution {
    pub fn new(weights: Vec<Rational>) -> Self {
        Distribution { weights }
    }

    pub fn delta(dim: usize, k: usize) -> Self {
        let mut weights = vec![Rational::zero(); dim];
        weights[k] = Rational::one();
        Distribution { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| !self.weights[k].is_zero()).collect()
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = Rational;
    fn index(&self, k: usize) -> &Rational {
        &self.weights[k]
    }
}

/// Which product of the `K_i` to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "String")]
pub enum ScanKind {
    Random,
    Short,
    Long,
    Single(usize),
}

impl ScanKind {
    /// Generator indices of one deterministic sweep, in application order.
    /// `None` for the random scan.
    pub fn sweep(self, n: usize) -> Option<Vec<usize>> {
        let top = n.saturating_sub(1);
        match self {
            ScanKind::Random => None,
            ScanKind::Single(i) => Some(vec![i]),
            ScanKind::Short => Some((1..=top).chain((1..=top).rev()).collect()),
            ScanKind::Long => Some(
                (1..=top)
                    .flat_map(|k| (1..=k).chain((1..=k).rev()))
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for ScanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanKind::Random => f.write_str("random"),
            ScanKind::Short => f.write_str("short"),
            ScanKind::Long => f.write_str("long"),
            ScanKind::Single(i) => write!(f, "gen:{i}"),
        }
    }
}

impl From<ScanKind> for String {
    fn from(k: ScanKind) -> String {
        k.to_string()
    }
}

impl FromStr for ScanKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(ScanKind::Random),
            "short" => Ok(ScanKind::Short),
            "long" => Ok(ScanKind::Long),
            _ => s
                .strip_prefix("gen:")
                .and_then(|i| i.parse().ok())
                .map(ScanKind::Single)
                .ok_or_else(|| Error::Parse {
                    input: s.to_string(),
                    reason: "expected random, short, long or gen:I".into(),
                }),
        }
    }
}

fn check_index(n: usize, i: usize) -> Result<()> {
    if i == 0 || i >= n {
        return Err(Error::GeneratorIndex { index: i, n });
    }
    Ok(())
}

fn basis_states(table: &LengthTable) -> Arc<[BrauerDiagram]> {
    Arc::from(table.diagrams())
}

/// Index of `r_i * d` for every basis diagram `d`.
fn left_r_images(table: &LengthTable, i: usize) -> Vec<usize> {
    let n = table.n();
    let r = BrauerDiagram::generator(GenKind::R, i, n).expect("index checked");
    table
        .diagrams()
        .par_iter()
        .map(|d| table.index_of(&r.compose(d)).expect("closed basis"))
        .collect()
}

/// The chain `K_i` on the full basis.
pub fn build_ki(n: usize, i: usize, theta: &Theta) -> Result<ScanChain> {
    check_index(n, i)?;
    let table = LengthTable::shared(n);
    let image = left_r_images(&table, i);
    let t = theta.value();
    let stay = theta.complement();
    let columns = image
        .iter()
        .enumerate()
        .map(|(x, &y)| {
            if table.length_at(y) >= table.length_at(x) {
                vec![(y, Rational::one())]
            } else {
                vec![(y, t.clone()), (x, stay.clone())]
            }
        })
        .collect();
    ScanChain::from_columns(n, basis_states(&table), columns)
}

/// The deterministic proposal `d -> r_i d`.
pub fn proposal_ri(n: usize, i: usize) -> Result<ScanChain> {
    check_index(n, i)?;
    let table = LengthTable::shared(n);
    let columns = left_r_images(&table, i)
        .into_iter()
        .map(|y| vec![(y, Rational::one())])
        .collect();
    ScanChain::from_columns(n, basis_states(&table), columns)
}

/// Unnormalised weights `theta^(-L(d))` over the chain's states.
pub fn length_weights(states: &[BrauerDiagram], theta: &Theta) -> Vec<Rational> {
    let Some(first) = states.first() else {
        return Vec::new();
    };
    let table = LengthTable::shared(first.n());
    states
        .iter()
        .map(|d| theta.inverse_power(table.bmw_length(d).0))
        .collect()
}

/// Metropolis chain for a symmetric proposal `p` and target weights `pi`
/// (any positive scaling).
pub fn metropolize(p: &ScanChain, pi: &[Rational]) -> Result<ScanChain> {
    if pi.len() != p.dim() {
        return Err(Error::Dimension(format!(
            "{} weights for {} states",
            pi.len(),
            p.dim()
        )));
    }
    if let Some(k) = pi.iter().position(|w| !w.is_positive()) {
        return Err(Error::ZeroMass(k));
    }
    let t = p.transposed();
    for x in 0..p.dim() {
        if p.columns[x] != t.columns[x] {
            let y = p.columns[x]
                .iter()
                .find(|(y, w)| &t.entry(*y, x) != w)
                .or_else(|| t.columns[x].iter().find(|(y, w)| &p.entry(*y, x) != w))
                .map(|(y, _)| *y)
                .unwrap_or(x);
            return Err(Error::AsymmetricProposal { row: y, col: x });
        }
    }
    let columns = (0..p.dim())
        .into_par_iter()
        .map(|x| {
            let mut col = Vec::new();
            let mut diag = Rational::zero();
            for (y, w) in &p.columns[x] {
                if *y == x {
                    diag += w;
                } else if pi[*y] >= pi[x] {
                    col.push((*y, w.clone()));
                } else {
                    let ratio = &pi[*y] / &pi[x];
                    diag += w * (Rational::one() - &ratio);
                    col.push((*y, w * ratio));
                }
            }
            col.push((x, diag));
            col
        })
        .collect();
    ScanChain::from_columns(p.n, Arc::clone(&p.states), columns)
}

/// Random, short, long or single-generator scan on the full basis.
pub fn compose_scan(kind: ScanKind, n: usize, theta: &Theta) -> Result<ScanChain> {
    if let ScanKind::Single(i) = kind {
        return build_ki(n, i, theta);
    }
    if n < 2 {
        let table = LengthTable::shared(n);
        return Ok(ScanChain::identity(n, basis_states(&table)));
    }
    let ks: Vec<ScanChain> = (1..n)
        .into_par_iter()
        .map(|i| build_ki(n, i, theta))
        .collect::<Result<_>>()?;
    match kind {
        ScanKind::Random => {
            let mut sum = ks[0].clone();
            for k in &ks[1..] {
                sum = sum.add(k)?;
            }
            Ok(sum.scale(&Rational::new(1.into(), ((n - 1) as i64).into())))
        }
        _ => {
            let sweep = kind.sweep(n).expect("deterministic scan");
            let mut acc = ScanChain::identity(n, Arc::clone(&ks[0].states));
            for i in sweep {
                acc = ks[i - 1].compose(&acc)?;
            }
            Ok(acc)
        }
    }
}

/// Class-restricted `pi ∝ theta^(-L)` on `class` (indices into the chain's
/// states), checked to be an exact fixed point. The result has the chain's
/// full length with zeros outside the class.
pub fn stationary(chain: &ScanChain, class: &[usize], theta: &Theta) -> Result<Distribution> {
    let members: Vec<BrauerDiagram> = class.iter().map(|&k| chain.states[k].clone()).collect();
    let raw = length_weights(&members, theta);
    let z: Rational = raw.iter().sum();
    let mut weights = vec![Rational::zero(); chain.dim()];
    for (&k, w) in class.iter().zip(raw) {
        weights[k] = w / &z;
    }
    let pi = Distribution { weights };
    let next = chain.step(&pi)?;
    if next != pi {
        let k = (0..pi.len()).find(|&k| next[k] != pi[k]).unwrap_or(0);
        return Err(Error::NotStationary(format!(
            "state {}: {} -> {}",
            chain.states[k], pi[k], next[k]
        )));
    }
    Ok(pi)
}

/// `(1/2) sum |a - b|`.
pub fn tv_distance(a: &Distribution, b: &Distribution) -> Rational {
    assert_eq!(a.len(), b.len(), "distributions over different spaces");
    let s: Rational = a
        .weights
        .iter()
        .zip(&b.weights)
        .map(|(x, y)| (x - y).abs())
        .sum();
    s / int(2)
}

/// `|| f/pi - 1 ||_2^2 = sum (f/pi - 1)^2 pi`, with `f/pi = 0` where `pi = 0`.
pub fn chi2_norm(f: &Distribution, pi: &Distribution) -> Rational {
    assert_eq!(f.len(), pi.len(), "distributions over different spaces");
    f.weights
        .iter()
        .zip(&pi.weights)
        .filter(|(_, p)| !p.is_zero())
        .map(|(fx, p)| {
            let d = fx / p - Rational::one();
            &d * &d * p
        })
        .sum()
}
