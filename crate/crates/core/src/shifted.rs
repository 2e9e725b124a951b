//! The restricted trace form and the shifted basis attached to a pair of
//! classes.
//!
//! For a valid pairing `X1 -> X2` with a permutation `s_x` per member, the
//! shifted basis replaces `T_x` by `T_x + c_x T_{s_x}` and `T_{x*}` by
//! `T_{x*} + c_x T_{s_x^{-1}}`, where `c_x = pi(x)^{-1/2}` and `pi` is the
//! class-restricted stationary distribution. Everything else is unchanged.
//!
//! The index set is laid out as `X1 | X2 | S | S^-1`, each block of size
//! `k = |X1|`, with `X2` in the order of the pairing.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::brauer::BrauerDiagram;
use crate::chains::{compose_scan, ScanChain, ScanKind};
use crate::classes::{
    partition, pick_s_assignment, pick_s_assignment_embedded, star_pairing, submatrix,
    SAssignment, StarPairing,
};
use crate::error::{Error, Result};
use crate::ext::{ExtScalar, QuadField};
use crate::rational::{Rational, Theta};
use crate::words::LengthTable;

/// `1` when `y` is the inverse permutation of `x`, else `0`.
pub fn tau_pair(x: &BrauerDiagram, y: &BrauerDiagram) -> u8 {
    if x.n() != y.n() || !x.is_permutation() || !y.is_permutation() {
        return 0;
    }
    u8::from(x.compose(y).is_identity())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftedIndex {
    X1(usize),
    X2(usize),
    S(usize),
    SInv(usize),
}

impl ShiftedIndex {
    /// The involution `x <-> x*`, `s_x <-> s_x^{-1}`.
    pub fn star(self) -> ShiftedIndex {
        match self {
            ShiftedIndex::X1(j) => ShiftedIndex::X2(j),
            ShiftedIndex::X2(j) => ShiftedIndex::X1(j),
            ShiftedIndex::S(j) => ShiftedIndex::SInv(j),
            ShiftedIndex::SInv(j) => ShiftedIndex::S(j),
        }
    }

    pub fn member(self) -> usize {
        match self {
            ShiftedIndex::X1(j) | ShiftedIndex::X2(j) | ShiftedIndex::S(j) | ShiftedIndex::SInv(j) => j,
        }
    }
}

pub type ExtMatrix = Vec<Vec<ExtScalar>>;

/// Shifted basis for one class pair.
#[derive(Clone)]
pub struct ShiftedBasis {
    pub theta: Theta,
    pub pairing: StarPairing,
    pub assignment: SAssignment,
    field: Arc<QuadField>,
    /// `pi(x)` for `x` in `X1`, equal to `pi(x*)` in `X2`.
    pi: Vec<Rational>,
    /// `pi(x)^{-1/2}`.
    c: Vec<ExtScalar>,
}

impl fmt::Debug for ShiftedBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShiftedBasis")
            .field("theta", &self.theta)
            .field("x1", &self.pairing.class_a.key())
            .field("x2", &self.pairing.class_b.key())
            .field("degree", &self.assignment.degree)
            .finish()
    }
}

fn class_pi(members: &[BrauerDiagram], theta: &Theta) -> (Vec<Rational>, Rational) {
    let table = LengthTable::shared(members[0].n());
    let raw: Vec<Rational> = members
        .iter()
        .map(|d| theta.inverse_power(table.bmw_length(d).0))
        .collect();
    let z: Rational = raw.iter().sum();
    (raw.into_iter().map(|w| w / &z).collect(), z)
}

impl ShiftedBasis {
    pub fn new(pairing: StarPairing, assignment: SAssignment, theta: Theta) -> Result<Self> {
        let a = &pairing.class_a;
        let k = a.len();
        if assignment.len() != k {
            return Err(Error::Precondition(format!(
                "{} permutations for a class of {k}",
                assignment.len()
            )));
        }
        if !assignment.is_admissible() {
            return Err(Error::Precondition("inadmissible permutation assignment".into()));
        }
        if assignment.degree != a.n && assignment.degree != a.n + 1 {
            return Err(Error::Precondition(format!(
                "permutations of degree {} for diagrams on {} strands",
                assignment.degree, a.n
            )));
        }
        let (pi_a, z) = class_pi(&a.members, &theta);
        let (pi_b, _) = class_pi(&pairing.class_b.members, &theta);
        for j in 0..k {
            if pi_b[pairing.map[j]] != pi_a[j] {
                return Err(Error::Pairing(format!(
                    "{} and {} carry different stationary mass",
                    a.members[j],
                    pairing.image(j)
                )));
            }
        }
        let field = QuadField::new(theta.value().clone(), z.clone())?;
        let table = LengthTable::shared(a.n);
        let c = a
            .members
            .iter()
            .map(|x| {
                // pi(x)^{-1/2} = sqrt(theta^L Z)
                let l = table.bmw_length(x).0;
                let half = theta.value().pow((l / 2) as i32);
                let root = if l % 2 == 0 {
                    ExtScalar::sqrt_z(&field)
                } else {
                    ExtScalar::sqrt_theta_z(&field)
                };
                root.scale(&half)
            })
            .collect();
        Ok(ShiftedBasis {
            theta,
            pairing,
            assignment,
            field,
            pi: pi_a,
            c,
        })
    }

    /// Basis for classes `a` and `b` of `partition(n)`, with the greedy
    /// assignment (drawn from `S_{n+1}` when the classes have one edge).
    pub fn for_classes(n: usize, a: usize, b: usize, theta: &Theta) -> Result<Self> {
        let classes = partition(n);
        let (ca, cb) = (&classes[a], &classes[b]);
        let pairing = star_pairing(ca, cb)?;
        if !pairing.is_valid() {
            return Err(Error::Pairing(format!(
                "{} -> {} does not shift lengths uniformly",
                ca.key(),
                cb.key()
            )));
        }
        let assignment = if ca.m >= 2 {
            pick_s_assignment(ca)?
        } else {
            pick_s_assignment_embedded(ca)?
        };
        ShiftedBasis::new(pairing, assignment, theta.clone())
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn dim(&self) -> usize {
        4 * self.k()
    }

    pub fn field(&self) -> &Arc<QuadField> {
        &self.field
    }

    pub fn z(&self) -> &Rational {
        self.field.z()
    }

    pub fn pi(&self, j: usize) -> &Rational {
        &self.pi[j]
    }

    pub fn shift(&self, j: usize) -> &ExtScalar {
        &self.c[j]
    }

    pub fn label(&self, pos: usize) -> ShiftedIndex {
        let k = self.k();
        match pos / k {
            0 => ShiftedIndex::X1(pos % k),
            1 => ShiftedIndex::X2(pos % k),
            2 => ShiftedIndex::S(pos % k),
            3 => ShiftedIndex::SInv(pos % k),
            _ => panic!("index {pos} outside the shifted basis"),
        }
    }

    pub fn position(&self, idx: ShiftedIndex) -> usize {
        let k = self.k();
        match idx {
            ShiftedIndex::X1(j) => j,
            ShiftedIndex::X2(j) => k + j,
            ShiftedIndex::S(j) => 2 * k + j,
            ShiftedIndex::SInv(j) => 3 * k + j,
        }
    }

    pub fn star_position(&self, pos: usize) -> usize {
        self.position(self.label(pos).star())
    }

    fn lift(&self, d: &BrauerDiagram) -> BrauerDiagram {
        if d.n() < self.assignment.degree {
            d.with_extra_strand()
        } else {
            d.clone()
        }
    }

    /// The underlying diagram `T_a` at a shifted position.
    pub fn diagram(&self, pos: usize) -> BrauerDiagram {
        match self.label(pos) {
            ShiftedIndex::X1(j) => self.lift(&self.pairing.class_a.members[j]),
            ShiftedIndex::X2(j) => self.lift(self.pairing.image(j)),
            ShiftedIndex::S(j) => self.assignment.diagram(j),
            ShiftedIndex::SInv(j) => self.assignment.inverse_diagram(j),
        }
    }

    pub fn describe(&self, pos: usize) -> String {
        match self.label(pos) {
            ShiftedIndex::X1(_) | ShiftedIndex::X2(_) => self.diagram(pos).to_string(),
            ShiftedIndex::S(j) => format!("s{:?}", self.assignment.perms[j]),
            ShiftedIndex::SInv(j) => format!("s{:?}^-1", self.assignment.perms[j]),
        }
    }

    /// `T^_a` written in the original basis, as (diagram, coefficient).
    pub fn expansion(&self, pos: usize) -> Vec<(BrauerDiagram, ExtScalar)> {
        let one = ExtScalar::one(&self.field);
        let mut out = vec![(self.diagram(pos), one)];
        match self.label(pos) {
            ShiftedIndex::X1(j) => out.push((self.assignment.diagram(j), self.c[j].clone())),
            ShiftedIndex::X2(j) => {
                out.push((self.assignment.inverse_diagram(j), self.c[j].clone()))
            }
            _ => {}
        }
        out
    }

    /// `<T^_a, T^_b>` by expanding both sides over `tau_pair`.
    pub fn inner_expanded(&self, a: usize, b: usize) -> ExtScalar {
        let mut acc = ExtScalar::zero(&self.field);
        for (x, cx) in self.expansion(a) {
            for (y, cy) in self.expansion(b) {
                if tau_pair(&x, &y) == 1 {
                    acc += &(&cx * &cy);
                }
            }
        }
        acc
    }

    /// Closed-form table of `<T^_a, T^_b>`.
    pub fn inner_table(&self, a: usize, b: usize) -> ExtScalar {
        use ShiftedIndex::*;
        let zero = || ExtScalar::zero(&self.field);
        match (self.label(a), self.label(b)) {
            (X1(i), X2(j)) | (X2(i), X1(j)) if i == j => {
                ExtScalar::rational(&self.field, self.pi[i].recip())
            }
            (X1(i), SInv(j)) | (SInv(i), X1(j)) | (X2(i), S(j)) | (S(i), X2(j)) if i == j => {
                self.c[i].clone()
            }
            (S(i), SInv(j)) | (SInv(i), S(j)) if i == j => ExtScalar::one(&self.field),
            _ => zero(),
        }
    }

    /// The Gram matrix from the closed-form table.
    pub fn gram(&self) -> ExtMatrix {
        (0..self.dim())
            .map(|a| (0..self.dim()).map(|b| self.inner_table(a, b)).collect())
            .collect()
    }

    /// Stationary weight `w(a)`: `pi` on the class blocks, `1` on `S`.
    pub fn weight(&self, pos: usize) -> Rational {
        match self.label(pos) {
            ShiftedIndex::X1(j) | ShiftedIndex::X2(j) => self.pi[j].clone(),
            _ => Rational::one(),
        }
    }

    /// The two class blocks of `chain`, the second reordered by the pairing.
    pub fn blocks(&self, chain: &ScanChain) -> Result<(Vec<Vec<Rational>>, Vec<Vec<Rational>>)> {
        let k1 = submatrix(chain, &self.pairing.class_a)?.to_dense();
        let k2 = submatrix(chain, &self.pairing.class_b)?.to_dense();
        let map = &self.pairing.map;
        let k2 = (0..self.k())
            .map(|i| (0..self.k()).map(|j| k2[map[i]][map[j]].clone()).collect())
            .collect();
        Ok((k1, k2))
    }

    /// `K~` in the original basis over the shifted index set: the class
    /// blocks of `chain` and the identity on `S`.
    pub fn ktilde(&self, chain: &ScanChain) -> Result<ExtMatrix> {
        let (k1, k2) = self.blocks(chain)?;
        let k = self.k();
        let f = &self.field;
        let mut m = vec![vec![ExtScalar::zero(f); 4 * k]; 4 * k];
        for i in 0..k {
            for j in 0..k {
                m[i][j] = ExtScalar::rational(f, k1[i][j].clone());
                m[k + i][k + j] = ExtScalar::rational(f, k2[i][j].clone());
            }
        }
        for (p, row) in m.iter_mut().enumerate().skip(2 * k) {
            row[p] = ExtScalar::one(f);
        }
        Ok(m)
    }

    /// Coordinates of `T^` in terms of `T` (columns are the expansions).
    pub fn change_of_basis(&self) -> ExtMatrix {
        self.conjugator(false)
    }

    /// Inverse of [`ShiftedBasis::change_of_basis`].
    pub fn change_of_basis_inverse(&self) -> ExtMatrix {
        self.conjugator(true)
    }

    fn conjugator(&self, inverse: bool) -> ExtMatrix {
        let k = self.k();
        let f = &self.field;
        let mut m = identity(f, 4 * k);
        for j in 0..k {
            let c = if inverse { -&self.c[j] } else { self.c[j].clone() };
            m[2 * k + j][j] = c.clone();
            m[3 * k + j][k + j] = c;
        }
        m
    }

    /// `K^` from the closed-form entries.
    pub fn build_khat(&self, chain: &ScanChain) -> Result<ExtMatrix> {
        let (k1, k2) = self.blocks(chain)?;
        let k = self.k();
        let f = &self.field;
        let mut m = identity(f, 4 * k);
        for (block, kb) in [(0usize, &k1), (1, &k2)] {
            let s_row = if block == 0 { 2 * k } else { 3 * k };
            for x in 0..k {
                for y in 0..k {
                    let kyx = &kb[y][x];
                    m[block * k + y][block * k + x] = ExtScalar::rational(f, kyx.clone());
                    let delta = if x == y { Rational::one() } else { Rational::zero() };
                    m[s_row + y][block * k + x] = self.c[y].scale(&(delta - kyx));
                }
            }
        }
        Ok(m)
    }

    /// Stationary columns `[pi^]_a` for every position.
    pub fn khat_stationary(&self) -> ExtMatrix {
        let k = self.k();
        let f = &self.field;
        let mut m = identity(f, 4 * k);
        for block in 0..2 {
            let s_row = if block == 0 { 2 * k } else { 3 * k };
            for x in 0..k {
                for y in 0..k {
                    m[block * k + y][block * k + x] = ExtScalar::rational(f, self.pi[y].clone());
                    // -pi(y)^{1/2} = -pi(y) c_y
                    let mut v = -&self.c[y].scale(&self.pi[y]);
                    if x == y {
                        v += &self.c[x];
                    }
                    m[s_row + y][block * k + x] = v;
                }
            }
        }
        m
    }

    /// `sum f g w`.
    pub fn l2_shifted(&self, f: &[ExtScalar], g: &[ExtScalar]) -> ExtScalar {
        let mut acc = ExtScalar::zero(&self.field);
        for p in 0..self.dim() {
            acc += &(&f[p] * &g[p]).scale(&self.weight(p));
        }
        acc
    }

    /// `<f/w, g/w>_2 = sum f g / w`.
    pub fn l2_ratio(&self, f: &[ExtScalar], g: &[ExtScalar]) -> ExtScalar {
        let mut acc = ExtScalar::zero(&self.field);
        for p in 0..self.dim() {
            acc += &(&f[p] * &g[p]).div_rational(&self.weight(p));
        }
        acc
    }

    /// `sum_{a,b} f(a) g(b) <T^_a, T^_b>`.
    pub fn inner_bmw(&self, f: &[ExtScalar], g: &[ExtScalar]) -> ExtScalar {
        let mut acc = ExtScalar::zero(&self.field);
        for a in 0..self.dim() {
            if f[a].is_zero() {
                continue;
            }
            for b in 0..self.dim() {
                let t = self.inner_table(a, b);
                if !t.is_zero() && !g[b].is_zero() {
                    acc += &(&(&f[a] * &g[b]) * &t);
                }
            }
        }
        acc
    }

    /// `g*(a) = g(a*)`.
    pub fn star(&self, g: &[ExtScalar]) -> Vec<ExtScalar> {
        (0..self.dim()).map(|p| g[self.star_position(p)].clone()).collect()
    }

    /// Right-hand side of the translation identity:
    /// `<f, g*>_BMW - sum_x c_x [f(x)g(s_x) + f(x*)g(s_x^-1) + f(s_x)g(x) + f(s_x^-1)g(x*)]`.
    pub fn translate_rhs(&self, f: &[ExtScalar], g: &[ExtScalar]) -> ExtScalar {
        let k = self.k();
        let mut acc = self.inner_bmw(f, &self.star(g));
        for j in 0..k {
            let (x, xs, s, si) = (j, k + j, 2 * k + j, 3 * k + j);
            let t = &(&(&f[x] * &g[s]) + &(&f[xs] * &g[si])) + &(&(&f[s] * &g[x]) + &(&f[si] * &g[xs]));
            acc -= &(&t * &self.c[j]);
        }
        acc
    }

    pub fn check_translate_identity(&self, f: &[ExtScalar], g: &[ExtScalar]) -> Result<()> {
        let lhs = self.l2_ratio(f, g);
        let rhs = self.translate_rhs(f, g);
        if lhs == rhs {
            Ok(())
        } else {
            Err(Error::IdentityFailed(format!("{lhs} != {rhs}")))
        }
    }

    /// The correction term taken literally as
    /// `sum_x c_x [f(x) g(s_x^-1) + f(s_x^-1) g(x*)]`.
    pub fn translate_rhs_literal(&self, f: &[ExtScalar], g: &[ExtScalar]) -> ExtScalar {
        let k = self.k();
        let mut acc = self.inner_bmw(f, &self.star(g));
        for j in 0..k {
            let t = &(&f[j] * &g[3 * k + j]) + &(&f[3 * k + j] * &g[k + j]);
            acc -= &(&t * &self.c[j]);
        }
        acc
    }
}

pub fn identity(f: &Arc<QuadField>, dim: usize) -> ExtMatrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i == j {
                        ExtScalar::one(f)
                    } else {
                        ExtScalar::zero(f)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &ExtMatrix, b: &ExtMatrix) -> ExtMatrix {
    let n = a.len();
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    let f = a[0][0].field();
    (0..n)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let mut acc = ExtScalar::zero(f);
                    for k in 0..inner {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            acc += &(&a[i][k] * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn column(m: &ExtMatrix, j: usize) -> Vec<ExtScalar> {
    m.iter().map(|row| row[j].clone()).collect()
}

/// One inequality evaluation for a start position and step count.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub start: String,
    pub step: u32,
    /// `sum (h/w - 1)^2 w` with `h` the column of `K^^m`.
    #[serde(serialize_with = "ser_ext")]
    pub lhs: ExtScalar,
    /// `<h - 1, (h - 1)*>_BMW`.
    #[serde(serialize_with = "ser_ext")]
    pub rhs: ExtScalar,
    pub holds: bool,
    /// Reading with `1` the identity basis element: `sum h^2 / w` and
    /// `<h, h*>_BMW` (both sides shifted by the same constant).
    #[serde(serialize_with = "ser_ext")]
    pub lhs_identity: ExtScalar,
    #[serde(serialize_with = "ser_ext")]
    pub rhs_identity: ExtScalar,
    pub holds_identity: bool,
}

pub fn ext_coords(x: &ExtScalar) -> [String; 4] {
    x.coords().clone().map(|c| format!("{}/{}", c.numer(), c.denom()))
}

fn ser_ext<S: serde::Serializer>(x: &ExtScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
    ext_coords(x).serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub theta: String,
    pub scan: ScanKind,
    pub x1: String,
    pub x2: String,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundRow> {
        self.rows.iter().filter(|r| !r.holds)
    }
}

/// Evaluate both sides of the trace-norm bound for every start in `X1 | X2`
/// and every step count `1..=steps`.
pub fn check_main2(
    basis: &ShiftedBasis,
    chain: &ScanChain,
    scan: ScanKind,
    steps: u32,
    cap_bits: u32,
) -> Result<BoundReport> {
    if steps == 0 {
        return Err(Error::Precondition("at least one step is required".into()));
    }
    let khat = basis.build_khat(chain)?;
    let f = basis.field();
    let dim = basis.dim();
    let one = ExtScalar::one(f);
    let mut rows = Vec::new();
    let mut power = khat.clone();
    for step in 1..=steps {
        for start in 0..2 * basis.k() {
            let h = column(&power, start);
            let mut lhs = ExtScalar::zero(f);
            let mut lhs_b = ExtScalar::zero(f);
            for (p, hp) in h.iter().enumerate() {
                let w = basis.weight(p);
                let r = &hp.div_rational(&w) - &one;
                lhs += &(&r * &r).scale(&w);
                lhs_b += &(hp * hp).div_rational(&w);
            }
            let u: Vec<ExtScalar> = h.iter().map(|x| x - &one).collect();
            let rhs = basis.inner_bmw(&u, &basis.star(&u));
            let rhs_b = basis.inner_bmw(&h, &basis.star(&h));
            let holds = (&rhs - &lhs).sign(cap_bits)? != Ordering::Less;
            let holds_identity = (&rhs_b - &lhs_b).sign(cap_bits)? != Ordering::Less;
            rows.push(BoundRow {
                start: basis.describe(start),
                step,
                lhs,
                rhs,
                holds,
                lhs_identity: lhs_b,
                rhs_identity: rhs_b,
                holds_identity,
            });
        }
        debug_assert_eq!(power.len(), dim);
        if step < steps {
            power = mat_mul(&khat, &power);
        }
    }
    let theta = basis.theta.to_string();
    Ok(BoundReport {
        n: basis.pairing.class_a.n,
        theta,
        scan,
        x1: basis.pairing.class_a.key(),
        x2: basis.pairing.class_b.key(),
        rows,
    })
}

/// Convenience wrapper building the scan and basis from class positions.
pub fn check_main2_for(
    n: usize,
    pair: (usize, usize),
    theta: &Theta,
    scan: ScanKind,
    steps: u32,
    cap_bits: u32,
) -> Result<BoundReport> {
    let basis = ShiftedBasis::for_classes(n, pair.0, pair.1, theta)?;
    let chain = compose_scan(scan, n, theta)?;
    check_main2(&basis, &chain, scan, steps, cap_bits)
}

/// Zero vector helper.
pub fn zeros(f: &Arc<QuadField>, dim: usize) -> Vec<ExtScalar> {
    (0..dim).map(|_| ExtScalar::zero(f)).collect()
}
