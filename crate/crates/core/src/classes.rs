//! Communication classes of the scan chains and the structures built on
//! them: class pairings and permutation assignments.
//!
//! Left multiplication by a permutation never changes the lower horizontal
//! edges of a diagram, so the chains split into blocks keyed by that set.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::brauer::{enumerate, BrauerDiagram, RowPair};
use crate::chains::ScanChain;
use crate::error::{Error, Result};
use crate::words::LengthTable;

/// Diagrams sharing one set of lower horizontal edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommClass {
    pub n: usize,
    pub lower_edges: Vec<RowPair>,
    pub m: usize,
    #[serde(serialize_with = "serialize_members")]
    pub members: Vec<BrauerDiagram>,
}

fn serialize_members<S: serde::Serializer>(
    members: &[BrauerDiagram],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(members.iter().map(ToString::to_string))
}

impl CommClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, d: &BrauerDiagram) -> bool {
        self.members.binary_search(d).is_ok()
    }

    pub fn position(&self, d: &BrauerDiagram) -> Option<usize> {
        self.members.binary_search(d).ok()
    }

    /// `b1-b2|b3-b4` style key, or `-` for the permutation class.
    pub fn key(&self) -> String {
        if self.lower_edges.is_empty() {
            return "-".into();
        }
        self.lower_edges
            .iter()
            .map(|(a, b)| format!("b{a}-b{b}"))
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Positions of the members in `chain`'s state list.
    pub fn indices_in(&self, chain: &ScanChain) -> Result<Vec<usize>> {
        let lookup: HashMap<&BrauerDiagram, usize> =
            chain.states().iter().enumerate().map(|(k, d)| (d, k)).collect();
        self.members
            .iter()
            .map(|d| {
                lookup.get(d).copied().ok_or_else(|| {
                    Error::Dimension(format!("class member {d} not among the chain's states"))
                })
            })
            .collect()
    }
}

/// All classes at `n`, ordered by lower-edge key; members in canonical order.
pub fn partition(n: usize) -> Vec<CommClass> {
    partition_of(&enumerate(n), n)
}

fn partition_of(diagrams: &[BrauerDiagram], n: usize) -> Vec<CommClass> {
    let mut groups: BTreeMap<Vec<RowPair>, Vec<BrauerDiagram>> = BTreeMap::new();
    for d in diagrams {
        groups.entry(d.lower_horizontal_edges()).or_default().push(d.clone());
    }
    groups
        .into_iter()
        .map(|(lower_edges, mut members)| {
            members.sort();
            CommClass {
                n,
                m: lower_edges.len(),
                lower_edges,
                members,
            }
        })
        .collect()
}

/// The class containing `d`.
pub fn class_of(d: &BrauerDiagram) -> CommClass {
    let key = d.lower_horizontal_edges();
    partition(d.n())
        .into_iter()
        .find(|c| c.lower_edges == key)
        .expect("every diagram lies in a class")
}

/// No member's column leaves the class.
pub fn is_closed(class: &CommClass, chain: &ScanChain) -> bool {
    let Ok(idx) = class.indices_in(chain) else {
        return false;
    };
    let inside: HashSet<usize> = idx.iter().copied().collect();
    idx.iter()
        .all(|&x| chain.column(x).iter().all(|(y, _)| inside.contains(y)))
}

/// The chain restricted to a closed class, states in class order.
pub fn submatrix(chain: &ScanChain, class: &CommClass) -> Result<ScanChain> {
    chain.restrict(&class.indices_in(chain)?)
}

/// Upper edges plus the through-strand pattern with the class's free bottom
/// points renumbered `1..k` left to right.
fn upper_configuration(d: &BrauerDiagram, lower: &[RowPair]) -> (Vec<RowPair>, Vec<(usize, usize)>) {
    let used: HashSet<usize> = lower.iter().flat_map(|&(a, b)| [a, b]).collect();
    let free: Vec<usize> = (1..=d.n()).filter(|p| !used.contains(p)).collect();
    let through = d
        .through_strands()
        .into_iter()
        .map(|(t, b)| (t, free.binary_search(&b).expect("free point") + 1))
        .collect();
    (d.upper_horizontal_edges(), through)
}

/// The bijection `w -> w*` between two classes with equal `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarPairing {
    pub class_a: CommClass,
    pub class_b: CommClass,
    /// `map[j]` is the position in `class_b` of the image of `class_a.members[j]`.
    pub map: Vec<usize>,
}

impl StarPairing {
    pub fn image(&self, j: usize) -> &BrauerDiagram {
        &self.class_b.members[self.map[j]]
    }

    pub fn swapped(&self) -> StarPairing {
        let mut inv = vec![0; self.map.len()];
        for (j, &k) in self.map.iter().enumerate() {
            inv[k] = j;
        }
        StarPairing {
            class_a: self.class_b.clone(),
            class_b: self.class_a.clone(),
            map: inv,
        }
    }

    /// `L(w*) - L(w)` if it is the same for every member.
    pub fn length_shift(&self) -> Option<i64> {
        let table = LengthTable::shared(self.class_a.n);
        let mut shift = None;
        for (j, w) in self.class_a.members.iter().enumerate() {
            let s = i64::from(table.bmw_length(self.image(j)).0) - i64::from(table.bmw_length(w).0);
            match shift {
                None => shift = Some(s),
                Some(t) if t != s => return None,
                _ => {}
            }
        }
        shift
    }

    /// A pairing is usable for the shifted basis when it matches the
    /// stationary weights up to one factor, i.e. the length shift is constant.
    pub fn is_valid(&self) -> bool {
        self.length_shift().is_some()
    }
}

pub fn star_pairing(a: &CommClass, b: &CommClass) -> Result<StarPairing> {
    if a.n != b.n {
        return Err(Error::StrandMismatch {
            left: a.n,
            right: b.n,
        });
    }
    if a.m != b.m || a.m == 0 {
        return Err(Error::Precondition(format!(
            "pairing needs equal positive edge counts, got {} and {}",
            a.m, b.m
        )));
    }
    if a.lower_edges == b.lower_edges {
        return Err(Error::Precondition(format!(
            "cannot pair class {} with itself",
            a.key()
        )));
    }
    let mut by_config = HashMap::new();
    for (k, w) in b.members.iter().enumerate() {
        by_config.insert(upper_configuration(w, &b.lower_edges), k);
    }
    let map = a
        .members
        .iter()
        .map(|w| {
            by_config
                .get(&upper_configuration(w, &a.lower_edges))
                .copied()
                .ok_or_else(|| Error::Pairing(format!("{w} has no partner in {}", b.key())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StarPairing {
        class_a: a.clone(),
        class_b: b.clone(),
        map,
    })
}

/// The first class after `classes[idx]` (cyclically) with the same `m`
/// giving a valid pairing.
pub fn partner_class(classes: &[CommClass], idx: usize) -> Option<usize> {
    let a = &classes[idx];
    if a.m == 0 {
        return None;
    }
    (1..classes.len())
        .map(|k| (idx + k) % classes.len())
        .filter(|&k| classes[k].m == a.m)
        .find(|&k| star_pairing(a, &classes[k]).is_ok_and(|p| p.is_valid()))
}

/// All ordered pairs of classes with `m >= min_m` whose pairing is valid.
pub fn valid_pairs(classes: &[CommClass], min_m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, a) in classes.iter().enumerate() {
        for (j, b) in classes.iter().enumerate() {
            if i != j && a.m >= min_m.max(1) && a.m == b.m {
                if let Ok(p) = star_pairing(a, b) {
                    if p.is_valid() {
                        out.push((i, j));
                    }
                }
            }
        }
    }
    out
}

/// Permutations of `1..=n` in lexicographic one-line order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (1..=n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn perm_inverse(g: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; g.len()];
    for (i, &gi) in g.iter().enumerate() {
        inv[gi - 1] = i + 1;
    }
    inv
}

fn perm_order(g: &[usize]) -> usize {
    let mut seen = vec![false; g.len()];
    let mut order = 1usize;
    for start in 0..g.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut p = start;
        while !seen[p] {
            seen[p] = true;
            p = g[p] - 1;
            len += 1;
        }
        order = num_integer::lcm(order, len);
    }
    order
}

/// Distinct elements of order greater than two, no two mutually inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SAssignment {
    /// Symmetric group degree the elements live in.
    pub degree: usize,
    /// One-line images, one per class member in class order.
    pub perms: Vec<Vec<usize>>,
}

impl SAssignment {
    pub fn diagram(&self, j: usize) -> BrauerDiagram {
        BrauerDiagram::from_permutation(&self.perms[j]).expect("valid permutation")
    }

    pub fn inverse_diagram(&self, j: usize) -> BrauerDiagram {
        BrauerDiagram::from_permutation(&perm_inverse(&self.perms[j])).expect("valid permutation")
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    /// Checks the defining conditions directly.
    pub fn is_admissible(&self) -> bool {
        let mut seen = HashSet::new();
        for g in &self.perms {
            if perm_order(g) <= 2 || !seen.insert(g.clone()) {
                return false;
            }
        }
        self.perms.iter().all(|g| !seen.contains(&perm_inverse(g)))
    }
}

/// Greedy choice of `needed` elements from `S_degree`.
pub fn greedy_assignment(degree: usize, needed: usize) -> Result<SAssignment> {
    let mut taken: HashSet<Vec<usize>> = HashSet::new();
    let mut perms = Vec::with_capacity(needed);
    for g in permutations(degree) {
        if perms.len() == needed {
            break;
        }
        if perm_order(&g) > 2 && !taken.contains(&perm_inverse(&g)) {
            taken.insert(g.clone());
            perms.push(g);
        }
    }
    if perms.len() < needed {
        return Err(Error::AssignmentExhausted {
            needed,
            available: perms.len(),
            n: degree,
        });
    }
    Ok(SAssignment { degree, perms })
}

/// Assignment for a class with at least two lower horizontal edges.
pub fn pick_s_assignment(class: &CommClass) -> Result<SAssignment> {
    if class.m < 2 {
        return Err(Error::Precondition(format!(
            "class {} has {} lower horizontal edge(s); at least two are needed",
            class.key(),
            class.m
        )));
    }
    greedy_assignment(class.n, class.len())
}

/// Assignment for a one-edge class, drawn from `S_{n+1}` after adding a
/// strand.
pub fn pick_s_assignment_embedded(class: &CommClass) -> Result<SAssignment> {
    if class.m != 1 {
        return Err(Error::Precondition(format!(
            "embedding applies to one-edge classes, {} has {}",
            class.key(),
            class.m
        )));
    }
    greedy_assignment(class.n + 1, class.len())
}

/// Number of elements of order exactly two in `S_n`.
pub fn involution_count(n: usize) -> u128 {
    let fact = |k: usize| (1..=k as u128).product::<u128>();
    (1..=n / 2)
        .map(|k| fact(n) / (fact(n - 2 * k) * fact(k) * (1u128 << k)))
        .sum()
}

/// `n! / (m! 2^m)`.
pub fn class_size(n: usize, m: usize) -> u128 {
    let fact = |k: usize| (1..=k as u128).product::<u128>();
    fact(n) / (fact(m) << m)
}

/// A one-edge class with a vertical strand appended to every member. The
/// result is a subset of a class at `n + 1`.
pub fn embed_m1(class: &CommClass) -> Result<CommClass> {
    if class.m != 1 {
        return Err(Error::Precondition(format!(
            "embedding applies to one-edge classes, {} has {}",
            class.key(),
            class.m
        )));
    }
    let mut members: Vec<BrauerDiagram> =
        class.members.iter().map(BrauerDiagram::with_extra_strand).collect();
    members.sort();
    Ok(CommClass {
        n: class.n + 1,
        lower_edges: class.lower_edges.clone(),
        m: 1,
        members,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::brauer::GenKind::{E, R};
    use crate::chains::{build_ki, compose_scan, ScanKind};
    use crate::rational::Theta;

    fn word(n: usize, w: &[(crate::brauer::GenKind, usize)]) -> BrauerDiagram {
        BrauerDiagram::from_word(n, w).unwrap()
    }

    #[test]
    fn sizes_small() {
        let sizes: Vec<usize> = partition(3).iter().map(CommClass::len).collect();
        assert_eq!(sizes, vec![6, 3, 3, 3]);
        let two = partition(2);
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].members.len(), 2);
        assert_eq!(two[1].members, vec![word(2, &[(E, 1)])]);
        for c in partition(4) {
            assert_eq!(c.len() as u128, class_size(4, c.m));
        }
    }

    #[test]
    fn closedness() {
        let theta = Theta::from_ratio(1, 2).unwrap();
        let k = build_ki(3, 1, &theta).unwrap();
        assert!(partition(3).iter().all(|c| is_closed(c, &k)));
        let short = compose_scan(ScanKind::Short, 4, &theta).unwrap();
        assert!(partition(4).iter().all(|c| is_closed(c, &short)));

        // move one unit of mass across classes
        let mut cols = k.columns().to_vec();
        let id = k.index_of(&BrauerDiagram::identity(3)).unwrap();
        let e1 = k.index_of(&word(3, &[(E, 1)])).unwrap();
        cols[id] = vec![(e1, crate::rational::int(1))];
        let bad = ScanChain::from_columns(3, Arc::clone(k.states()), cols).unwrap();
        let perm_class = &partition(3)[0];
        assert!(!is_closed(perm_class, &bad));
        assert!(submatrix(&bad, perm_class).is_err());
    }

    #[test]
    fn example_pairing() {
        let classes = partition(3);
        let e1 = word(3, &[(E, 1)]);
        let e1r2 = word(3, &[(E, 1), (R, 2)]);
        let a = classes.iter().find(|c| c.contains(&e1)).unwrap();
        let b = classes.iter().find(|c| c.contains(&e1r2)).unwrap();
        let p = star_pairing(a, b).unwrap();
        let pairs = [
            (word(3, &[(E, 1)]), word(3, &[(E, 1), (R, 2)])),
            (word(3, &[(R, 2), (E, 1)]), word(3, &[(R, 2), (E, 1), (R, 2)])),
            (word(3, &[(E, 2), (E, 1)]), word(3, &[(E, 2), (E, 1), (R, 2)])),
        ];
        for (w, ws) in pairs {
            assert_eq!(p.image(a.position(&w).unwrap()), &ws);
        }
        assert_eq!(p.length_shift(), Some(1));
        assert!(star_pairing(a, a).is_err());
        assert!(star_pairing(a, &classes[0]).is_err());
    }

    #[test]
    fn pairing_round_trip() {
        let classes = partition(4);
        for (i, j) in valid_pairs(&classes, 1) {
            let p = star_pairing(&classes[i], &classes[j]).unwrap();
            let back = star_pairing(&classes[j], &classes[i]).unwrap();
            assert_eq!(back, p.swapped());
        }
    }

    #[test]
    fn four_strand_m2_pairs() {
        let classes = partition(4);
        let m2: Vec<usize> = (0..classes.len()).filter(|&k| classes[k].m == 2).collect();
        assert_eq!(m2.len(), 3);
        let keys = |k: usize| classes[k].key();
        let valid: Vec<(String, String)> = valid_pairs(&classes, 2)
            .into_iter()
            .map(|(a, b)| (keys(a), keys(b)))
            .collect();
        assert_eq!(
            valid,
            vec![
                ("b1-b2|b3-b4".to_string(), "b1-b3|b2-b4".to_string()),
                ("b1-b3|b2-b4".to_string(), "b1-b2|b3-b4".to_string()),
            ]
        );
        let unpaired = m2.iter().find(|&&k| keys(k) == "b1-b4|b2-b3").unwrap();
        assert_eq!(partner_class(&classes, *unpaired), None);
    }

    #[test]
    fn greedy_s4() {
        let c = partition(4).into_iter().find(|c| c.m == 2).unwrap();
        let s = pick_s_assignment(&c).unwrap();
        assert_eq!(
            s.perms,
            vec![vec![1, 3, 4, 2], vec![2, 3, 1, 4], vec![2, 3, 4, 1]]
        );
        assert!(s.is_admissible());

        let m1 = partition(4).into_iter().find(|c| c.m == 1).unwrap();
        assert!(matches!(pick_s_assignment(&m1), Err(Error::Precondition(_))));
        assert!(matches!(
            greedy_assignment(4, 12),
            Err(Error::AssignmentExhausted { available: 7, .. })
        ));
        let emb = pick_s_assignment_embedded(&m1).unwrap();
        assert_eq!(emb.degree, 5);
        assert!(emb.is_admissible());
    }

    #[test]
    fn involutions_brute_force() {
        for n in 1..=7 {
            let brute = permutations(n)
                .iter()
                .filter(|g| perm_order(g) == 2)
                .count() as u128;
            assert_eq!(involution_count(n), brute, "n = {n}");
        }
        assert_eq!(involution_count(3), 3);
        assert_eq!(involution_count(4), 9);
    }

    #[test]
    fn embedding() {
        let c = class_of(&word(3, &[(E, 1)]));
        let e = embed_m1(&c).unwrap();
        assert_eq!(e.n, 4);
        assert_eq!(e.len(), 3);
        assert_eq!(e.m, 1);
        assert!(e.members.contains(&word(4, &[(E, 1)])));
        let theta = Theta::from_ratio(1, 3).unwrap();
        let k3 = submatrix(&build_ki(3, 1, &theta).unwrap(), &c).unwrap();
        let k4 = submatrix(&build_ki(4, 1, &theta).unwrap(), &e);
        // the embedded subset is closed under K_1 at four strands
        let k4 = k4.unwrap();
        assert_eq!(k3.to_dense(), k4.to_dense());
    }
}
