//! Finite groups given by multiplication tables, subgroups, cosets and G-sets.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("multiplication table is empty or not square")]
    NotSquare,
    #[error("entry {0} out of range")]
    OutOfRange(usize),
    #[error("element 0 is not a two-sided identity")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NotInvertible(usize),
    #[error("multiplication is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("unknown builtin group {0:?}")]
    UnknownGroup(String),
    #[error("{0:?} is not a subgroup")]
    NotASubgroup(Vec<usize>),
    #[error("action table has the wrong shape")]
    ActionShape,
    #[error("action of {0} is not a permutation")]
    NotAPermutation(usize),
    #[error("action is not compatible with multiplication at ({0}, {1})")]
    NotAnAction(usize, usize),
    #[error("basepoint {0} is not fixed")]
    BasepointNotFixed(usize),
}

/// A finite group on `0..order` with identity `0`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupFile", into = "GroupFile")]
pub struct FiniteGroup {
    name: String,
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GroupFile {
    order: usize,
    mult: Vec<Vec<usize>>,
}

impl TryFrom<GroupFile> for FiniteGroup {
    type Error = GroupError;

    fn try_from(f: GroupFile) -> Result<Self, GroupError> {
        if f.mult.len() != f.order {
            return Err(GroupError::NotSquare);
        }
        FiniteGroup::new("custom", f.mult)
    }
}

impl From<FiniteGroup> for GroupFile {
    fn from(g: FiniteGroup) -> Self {
        GroupFile { order: g.order(), mult: g.mult }
    }
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl FiniteGroup {
    pub fn new(name: &str, mult: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = mult.len();
        if n == 0 || mult.iter().any(|r| r.len() != n) {
            return Err(GroupError::NotSquare);
        }
        if let Some(&bad) = mult.iter().flatten().find(|&&x| x >= n) {
            return Err(GroupError::OutOfRange(bad));
        }
        if (0..n).any(|a| mult[0][a] != a || mult[a][0] != a) {
            return Err(GroupError::NoIdentity);
        }
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n).find(|&b| mult[a][b] == 0 && mult[b][a] == 0).ok_or(GroupError::NotInvertible(a))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(FiniteGroup { name: name.into(), mult, inv })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// `Z/n`, element `k` being the `k`-th power of a generator.
    pub fn cyclic(n: usize) -> Self {
        let mult = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let name = if n == 1 { "trivial".into() } else { format!("z{n}") };
        Self::new(&name, mult).expect("cyclic group")
    }

    /// `S₃` on lexicographically ordered permutations of `{0, 1, 2}`.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
        let mult = perms
            .iter()
            .map(|a| perms.iter().map(|b| index([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        Self::new("s3", mult).expect("symmetric group")
    }

    pub fn builtin(name: &str) -> Result<Self, GroupError> {
        match name {
            "trivial" => Ok(Self::trivial()),
            "z2" => Ok(Self::cyclic(2)),
            "z3" => Ok(Self::cyclic(3)),
            "z4" => Ok(Self::cyclic(4)),
            "s3" => Ok(Self::symmetric3()),
            _ => Err(GroupError::UnknownGroup(name.into())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    /// The subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Subgroup {
        let mut set: BTreeSet<usize> = BTreeSet::from([0]);
        let mut frontier = vec![0];
        while let Some(a) = frontier.pop() {
            for &g in gens {
                let b = self.mul(a, g);
                if set.insert(b) {
                    frontier.push(b);
                }
            }
        }
        Subgroup { elements: set.into_iter().collect() }
    }

    /// A generating set, greedily chosen by element index.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut h = self.closure(&[]);
        for a in self.elements() {
            if !h.contains(a) {
                gens.push(a);
                h = self.closure(&gens);
            }
        }
        gens
    }

    /// All subgroups, sorted by order then elements.
    pub fn subgroups(&self) -> Vec<Subgroup> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::from([vec![0]]);
        let mut frontier = vec![vec![0]];
        while let Some(h) = frontier.pop() {
            for a in self.elements() {
                if h.binary_search(&a).is_err() {
                    let mut gens = h.clone();
                    gens.push(a);
                    let k = self.closure(&gens).elements;
                    if found.insert(k.clone()) {
                        frontier.push(k);
                    }
                }
            }
        }
        let mut out: Vec<Subgroup> = found.into_iter().map(|elements| Subgroup { elements }).collect();
        out.sort_by(|a, b| (a.order(), &a.elements).cmp(&(b.order(), &b.elements)));
        out
    }

    pub fn subgroup(&self, elements: &[usize]) -> Result<Subgroup, GroupError> {
        let h = self.closure(elements);
        let given: BTreeSet<usize> = elements.iter().copied().chain([0]).collect();
        if h.elements.iter().copied().collect::<BTreeSet<_>>() != given {
            return Err(GroupError::NotASubgroup(elements.to_vec()));
        }
        Ok(h)
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup { elements: self.elements().collect() }
    }

    /// `H` as a group in its own right, elements renumbered in increasing order.
    pub fn restrict(&self, h: &Subgroup) -> FiniteGroup {
        let pos = |a: usize| h.elements.binary_search(&a).expect("closed");
        let mult = h.elements.iter().map(|&a| h.elements.iter().map(|&b| pos(self.mul(a, b))).collect()).collect();
        FiniteGroup::new(&format!("{}<{:?}>", self.name, h.elements), mult).expect("subgroup")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subgroup {
    elements: Vec<usize>,
}

impl Subgroup {
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, a: usize) -> bool {
        self.elements.binary_search(&a).is_ok()
    }

    pub fn is_subgroup_of(&self, k: &Subgroup) -> bool {
        self.elements.iter().all(|&a| k.contains(a))
    }
}

/// Left cosets `gH`, ordered by minimal representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cosets {
    pub subgroup: Subgroup,
    /// Sorted members of each coset.
    pub cosets: Vec<Vec<usize>>,
    /// `of[g]` is the index of `gH`.
    pub of: Vec<usize>,
}

impl Cosets {
    pub fn new(g: &FiniteGroup, h: &Subgroup) -> Self {
        let mut cosets: Vec<Vec<usize>> = Vec::new();
        let mut of = vec![usize::MAX; g.order()];
        for a in g.elements() {
            if of[a] == usize::MAX {
                let mut c: Vec<usize> = h.elements.iter().map(|&x| g.mul(a, x)).collect();
                c.sort_unstable();
                for &b in &c {
                    of[b] = cosets.len();
                }
                cosets.push(c);
            }
        }
        Cosets { subgroup: h.clone(), cosets, of }
    }

    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    pub fn rep(&self, c: usize) -> usize {
        self.cosets[c][0]
    }

    /// `x · c`.
    pub fn act(&self, g: &FiniteGroup, x: usize, c: usize) -> usize {
        self.of[g.mul(x, self.rep(c))]
    }

    /// The G-set `G/H`.
    pub fn gset(&self, g: &Arc<FiniteGroup>) -> GSet {
        let action = g.elements().map(|x| (0..self.len()).map(|c| self.act(g, x, c)).collect()).collect();
        GSet { group: g.clone(), action, basepoint: None }
    }
}

/// A finite G-set on `0..size`; `action[g][x] = g·x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GSet {
    group: Arc<FiniteGroup>,
    action: Vec<Vec<usize>>,
    basepoint: Option<usize>,
}

impl fmt::Debug for GSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GSet({:?}, {:?})", self.group, self.orbits())
    }
}

impl GSet {
    pub fn new(group: Arc<FiniteGroup>, action: Vec<Vec<usize>>, basepoint: Option<usize>) -> Result<Self, GroupError> {
        if action.len() != group.order() {
            return Err(GroupError::ActionShape);
        }
        let n = action[0].len();
        for (g, row) in action.iter().enumerate() {
            let seen: BTreeSet<usize> = row.iter().copied().collect();
            if row.len() != n || seen.len() != n || row.iter().any(|&x| x >= n) {
                return Err(GroupError::NotAPermutation(g));
            }
        }
        if (0..n).any(|x| action[0][x] != x) {
            return Err(GroupError::NotAnAction(0, 0));
        }
        for a in group.elements() {
            for b in group.elements() {
                if (0..n).any(|x| action[group.mul(a, b)][x] != action[a][action[b][x]]) {
                    return Err(GroupError::NotAnAction(a, b));
                }
            }
        }
        if let Some(p) = basepoint {
            if p >= n || group.elements().any(|g| action[g][p] != p) {
                return Err(GroupError::BasepointNotFixed(p));
            }
        }
        Ok(GSet { group, action, basepoint })
    }

    pub fn trivial(group: Arc<FiniteGroup>, n: usize) -> Self {
        let action = group.elements().map(|_| (0..n).collect()).collect();
        GSet { group, action, basepoint: None }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.action[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        self.action[g][x]
    }

    pub fn action(&self) -> &[Vec<usize>] {
        &self.action
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    /// Orbits sorted by least element, each sorted.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbits_of(&self.action, self.len())
    }

    pub fn orbit_of(&self, x: usize) -> Vec<usize> {
        let s: BTreeSet<usize> = self.action.iter().map(|row| row[x]).collect();
        s.into_iter().collect()
    }

    pub fn stabilizer(&self, x: usize) -> Subgroup {
        Subgroup { elements: self.group.elements().filter(|&g| self.action[g][x] == x).collect() }
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    pub fn is_equivariant(&self, target: &GSet, map: &[usize]) -> bool {
        map.len() == self.len() && self.group.elements().all(|g| (0..self.len()).all(|x| map[self.act(g, x)] == target.act(g, map[x])))
    }

    /// `self ⨿ other`, with `other` numbered after `self`.
    pub fn disjoint_union(&self, other: &GSet) -> GSet {
        let n = self.len();
        let action = self
            .action
            .iter()
            .zip(&other.action)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|&y| y + n)).collect())
            .collect();
        GSet { group: self.group.clone(), action, basepoint: None }
    }

    /// The restriction to `H`, with `H` renumbered as in [`FiniteGroup::restrict`].
    pub fn restrict(&self, h: &Subgroup) -> GSet {
        let group = Arc::new(self.group.restrict(h));
        let action = h.elements().iter().map(|&a| self.action[a].clone()).collect();
        GSet { group, action, basepoint: self.basepoint }
    }
}

pub fn orbits_of(action: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for x in 0..n {
        if !seen[x] {
            let orbit: BTreeSet<usize> = action.iter().map(|row| row[x]).collect();
            for &y in &orbit {
                seen[y] = true;
            }
            out.push(orbit.into_iter().collect());
        }
    }
    out
}
