//! Trees with G-action, orbit generators, equivariant factorization, the
//! oplax functor T^G and the comparison ∫T^G → Ω^G.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::dendro::{attach, Attached, DendroError};
use crate::group::{orbits_of, FiniteGroup, GSet, GroupError, Subgroup};
use crate::labeled::{compose_pointed, LabelError, LabeledTree, PointedMap};
use crate::omega::{
    compose, compose_all, contract_set, factorize_blocks, hom_maps, hom_set, mark, HomQuery, MorphismError, TreeMorphism,
};
use crate::oplax::{CatError, Category, GrothMorphism, GrothObject, HomEnumerable, OplaxFunctor};
use crate::tree::{fresh_name, isomorphisms, Tree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivariantError {
    #[error("action table has {0} rows for a group of order {1}")]
    ActionShape(usize, usize),
    #[error("action of element {0} is not an automorphism")]
    NotAnAutomorphism(usize),
    #[error("action is not a homomorphism at ({0}, {1})")]
    NotAHomomorphism(usize, usize),
    #[error("map is not equivariant")]
    NotEquivariant,
    #[error("edge {0} is not inner")]
    NotInnerEdge(String),
    #[error("root graft must merge the root with a fixed leaf")]
    RootGraftLeafNotFixed,
    #[error("invalid graft site {0}")]
    SiteInvalid(String),
    #[error("labeling is not an equivariant bijection onto the leaves")]
    LabelsNotEquivariant,
    #[error("groups differ")]
    GroupMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Dendro(#[from] DendroError),
}

/// A tree with a G-action by automorphisms; `action[g][e] = g·e`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GTree {
    tree: Arc<Tree>,
    group: Arc<FiniteGroup>,
    action: Arc<Vec<Vec<usize>>>,
}

impl fmt::Debug for GTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self
            .group
            .generators()
            .iter()
            .map(|&g| {
                let moved: Vec<String> = (0..self.tree.edge_count())
                    .filter(|&e| self.action[g][e] != e)
                    .map(|e| format!("{}>{}", self.tree.name(e), self.tree.name(self.action[g][e])))
                    .collect();
                format!("{g}:{{{}}}", moved.join(" "))
            })
            .collect();
        write!(f, "GTree({} {:?} {})", self.tree, self.group, gens.join(" "))
    }
}

fn check_action(tree: &Tree, group: &FiniteGroup, action: &[Vec<usize>]) -> Result<(), EquivariantError> {
    if action.len() != group.order() {
        return Err(EquivariantError::ActionShape(action.len(), group.order()));
    }
    let n = tree.edge_count();
    for (g, row) in action.iter().enumerate() {
        let seen: BTreeSet<usize> = row.iter().copied().collect();
        if row.len() != n || seen.len() != n || row.iter().any(|&y| y >= n) {
            return Err(EquivariantError::NotAnAutomorphism(g));
        }
        if row[tree.root()] != tree.root() {
            return Err(EquivariantError::NotAnAutomorphism(g));
        }
        for v in tree.vertices() {
            let w = tree.producer(row[v.out]).ok_or(EquivariantError::NotAnAutomorphism(g))?;
            let mut a: Vec<usize> = v.ins.iter().map(|&e| row[e]).collect();
            let mut b = w.ins.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(EquivariantError::NotAnAutomorphism(g));
            }
        }
    }
    for a in group.elements() {
        for b in group.elements() {
            if (0..n).any(|e| action[group.mul(a, b)][e] != action[a][action[b][e]]) {
                return Err(EquivariantError::NotAHomomorphism(a, b));
            }
        }
    }
    Ok(())
}

impl GTree {
    pub fn new(tree: Arc<Tree>, group: Arc<FiniteGroup>, action: Vec<Vec<usize>>) -> Result<Self, EquivariantError> {
        check_action(&tree, &group, &action)?;
        Ok(GTree { tree, group, action: Arc::new(action) })
    }

    pub(crate) fn new_unchecked(tree: Arc<Tree>, group: Arc<FiniteGroup>, action: Vec<Vec<usize>>) -> Self {
        debug_assert!(check_action(&tree, &group, &action).is_ok());
        GTree { tree, group, action: Arc::new(action) }
    }

    pub fn trivial(tree: Arc<Tree>, group: Arc<FiniteGroup>) -> Self {
        let action = group.elements().map(|_| (0..tree.edge_count()).collect()).collect();
        GTree { tree, group, action: Arc::new(action) }
    }

    /// Closes an action given on generators, as edge-name maps.
    pub fn from_generators(
        tree: Arc<Tree>,
        group: Arc<FiniteGroup>,
        gens: &[(usize, BTreeMap<String, String>)],
    ) -> Result<Self, EquivariantError> {
        let n = tree.edge_count();
        let mut perms: Vec<(usize, Vec<usize>)> = Vec::new();
        for (g, m) in gens {
            let mut p: Vec<usize> = (0..n).collect();
            for (a, b) in m {
                p[tree.edge(a)?] = tree.edge(b)?;
            }
            perms.push((*g, p));
        }
        let mut action: Vec<Option<Vec<usize>>> = vec![None; group.order()];
        action[0] = Some((0..n).collect());
        let mut frontier = vec![0];
        while let Some(a) = frontier.pop() {
            for (g, p) in &perms {
                let b = group.mul(*g, a);
                let pa = action[a].clone().expect("reached");
                let composed: Vec<usize> = pa.iter().map(|&e| p[e]).collect();
                match &action[b] {
                    Some(q) if *q != composed => return Err(EquivariantError::NotAHomomorphism(*g, a)),
                    Some(_) => {}
                    None => {
                        action[b] = Some(composed);
                        frontier.push(b);
                    }
                }
            }
        }
        let action = action.into_iter().collect::<Option<Vec<_>>>().ok_or(EquivariantError::ActionShape(0, group.order()))?;
        GTree::new(tree, group, action)
    }

    pub fn tree(&self) -> &Arc<Tree> {
        &self.tree
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn action(&self) -> &[Vec<usize>] {
        &self.action
    }

    pub fn act(&self, g: usize, e: usize) -> usize {
        self.action[g][e]
    }

    pub fn is_trivial(&self) -> bool {
        self.action.iter().all(|row| row.iter().enumerate().all(|(e, &y)| e == y))
    }

    pub fn edge_orbits(&self) -> Vec<Vec<usize>> {
        orbits_of(&self.action, self.tree.edge_count())
    }

    pub fn orbit(&self, e: usize) -> Vec<usize> {
        let s: BTreeSet<usize> = self.action.iter().map(|row| row[e]).collect();
        s.into_iter().collect()
    }

    /// The least edge in the orbit of each edge.
    pub fn orbit_keys(&self) -> Vec<usize> {
        (0..self.tree.edge_count()).map(|e| self.action.iter().map(|row| row[e]).min().unwrap()).collect()
    }

    pub fn stabilizer(&self, e: usize) -> Subgroup {
        self.group.closure(&self.group.elements().filter(|&g| self.action[g][e] == e).collect::<Vec<_>>())
    }

    /// The action carried over by edge names to a tree whose names are a
    /// G-invariant subset of ours.
    pub fn transport(&self, u: &Arc<Tree>) -> Result<GTree, EquivariantError> {
        let mut action = Vec::with_capacity(self.group.order());
        for row in self.action.iter() {
            let mut r = Vec::with_capacity(u.edge_count());
            for x in 0..u.edge_count() {
                let e = self.tree.edge(u.name(x))?;
                r.push(u.edge(self.tree.name(row[e]))?);
            }
            action.push(r);
        }
        GTree::new(u.clone(), self.group.clone(), action)
    }

    /// The restriction of the action to `H`, renumbered as in [`FiniteGroup::restrict`].
    pub fn restrict(&self, h: &Subgroup) -> GTree {
        let group = Arc::new(self.group.restrict(h));
        let action = h.elements().iter().map(|&a| self.action[a].clone()).collect();
        GTree { tree: self.tree.clone(), group, action: Arc::new(action) }
    }
}

/// `f(g·e) = g·f(e)` for all `g`, `e`.
pub fn is_equivariant_morphism(t: &GTree, s: &GTree, f: &TreeMorphism) -> bool {
    t.group == s.group
        && **f.src() == *t.tree
        && **f.dst() == *s.tree
        && t.group.elements().all(|g| (0..t.tree.edge_count()).all(|e| f.apply(t.act(g, e)) == s.act(g, f.apply(e))))
}

/// Equivariant morphisms by a search that assigns whole orbits at once.
pub fn equivariant_hom(t: &GTree, s: &GTree) -> Vec<TreeMorphism> {
    hom_maps(&t.tree, &s.tree, HomQuery { fixed: None, actions: Some((&t.action, &s.action)) })
        .into_iter()
        .map(|m| TreeMorphism::new_unchecked(t.tree.clone(), s.tree.clone(), m))
        .collect()
}

/// The Lemma 3.3 filter of the full hom-set.
pub fn equivariant_hom_filtered(t: &GTree, s: &GTree) -> Vec<TreeMorphism> {
    hom_set(&t.tree, &s.tree).into_iter().filter(|f| is_equivariant_morphism(t, s, f)).collect()
}

/// A morphism of Ω^G.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GMorphism {
    src: GTree,
    dst: GTree,
    mor: TreeMorphism,
}

impl fmt::Debug for GMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.mor)
    }
}

impl GMorphism {
    pub fn new(src: GTree, dst: GTree, mor: TreeMorphism) -> Result<Self, EquivariantError> {
        if !is_equivariant_morphism(&src, &dst, &mor) {
            return Err(EquivariantError::NotEquivariant);
        }
        Ok(GMorphism { src, dst, mor })
    }

    pub(crate) fn new_unchecked(src: GTree, dst: GTree, mor: TreeMorphism) -> Self {
        debug_assert!(is_equivariant_morphism(&src, &dst, &mor));
        GMorphism { src, dst, mor }
    }

    pub fn identity(t: &GTree) -> Self {
        GMorphism { src: t.clone(), dst: t.clone(), mor: TreeMorphism::identity(t.tree.clone()) }
    }

    pub fn src(&self) -> &GTree {
        &self.src
    }

    pub fn dst(&self) -> &GTree {
        &self.dst
    }

    pub fn mor(&self) -> &TreeMorphism {
        &self.mor
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &GMorphism) -> Result<GMorphism, EquivariantError> {
        if self.dst != g.src {
            return Err(MorphismError::SourceTargetMismatch.into());
        }
        Ok(GMorphism { src: self.src.clone(), dst: g.dst.clone(), mor: compose(&self.mor, &g.mor)? })
    }
}

/// `δ_[e]`: contracts every edge in the orbit of `e`.
pub fn contract_orbit(s: &GTree, e: &str) -> Result<(GTree, GMorphism), EquivariantError> {
    let x = s.tree.edge(e)?;
    if !s.tree.is_inner(x) {
        return Err(EquivariantError::NotInnerEdge(e.into()));
    }
    let orbit = s.orbit(x);
    let t = Arc::new(contract_set(&s.tree, &mark(s.tree.edge_count(), &orbit)));
    let gt = s.transport(&t)?;
    let delta = TreeMorphism::inclusion(t, s.tree.clone())?;
    Ok((gt.clone(), GMorphism::new(gt, s.clone(), delta)?))
}

/// `σ_[e]`: splits every edge in the orbit of `e` by a unary vertex. The
/// upper half of `g·e` is named `g·e'`.
pub fn split_orbit(s: &GTree, e: &str) -> Result<(GTree, GMorphism), EquivariantError> {
    let x = s.tree.edge(e)?;
    let orbit = s.orbit(x);
    let n = s.tree.edge_count();
    let mut taken: BTreeSet<String> = s.tree.names().iter().cloned().collect();
    let mut names = s.tree.names().to_vec();
    let mut upper = vec![usize::MAX; n];
    for &o in &orbit {
        upper[o] = names.len();
        names.push(fresh_name(&mut taken, format!("{}'", s.tree.name(o))));
    }
    let mut verts: Vec<(usize, Vec<usize>)> =
        s.tree.vertex_pairs().into_iter().map(|(o, ins)| (if upper[o] != usize::MAX { upper[o] } else { o }, ins)).collect();
    for &o in &orbit {
        verts.push((o, vec![upper[o]]));
    }
    let (built, pos) = Tree::build_indexed(names, s.tree.root(), verts)?;
    let t = Arc::new(built);
    let mut back = vec![0; t.edge_count()];
    for (old, &p) in pos.iter().enumerate() {
        back[p] = if old < n { old } else { orbit[old - n] };
    }
    let action = s
        .action
        .iter()
        .map(|row| {
            let mut r = vec![0; t.edge_count()];
            for (old, &p) in pos.iter().enumerate() {
                r[p] = if old < n { pos[row[old]] } else { pos[upper[row[orbit[old - n]]]] };
            }
            r
        })
        .collect();
    let gt = GTree::new(t.clone(), s.group.clone(), action)?;
    let sigma = TreeMorphism::new(t, s.tree.clone(), back)?;
    Ok((gt.clone(), GMorphism::new(gt, s.clone(), sigma)?))
}

/// Where and what to graft in [`graft_orbit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitGraft {
    /// A corolla of the given arity on every leaf in the orbit of `leaf`;
    /// `action[k]` is the action of the `k`-th element of the stabilizer
    /// of `leaf` on the corolla's leaves.
    Leaf { leaf: String, arity: usize, action: Vec<Vec<usize>> },
    /// A G-corolla below the root, whose leaf `fixed` becomes the old root.
    Root { arity: usize, action: Vec<Vec<usize>>, fixed: usize },
}

/// `δ_[v]`: the inclusion of `t` into the tree with corollas grafted along an orbit.
pub fn graft_orbit(t: &GTree, graft: &OrbitGraft) -> Result<(GTree, GMorphism), EquivariantError> {
    let tree = &t.tree;
    let group = &t.group;
    let n = tree.edge_count();
    let mut taken: BTreeSet<String> = tree.names().iter().cloned().collect();
    let mut names = tree.names().to_vec();
    let mut verts = tree.vertex_pairs();
    let mut root = tree.root();
    // images under each g of every new edge, as indices into `names`
    let mut new_action: Vec<Vec<usize>> = t.action.to_vec();
    match graft {
        OrbitGraft::Leaf { leaf, arity, action } => {
            let l = tree.edge(leaf)?;
            if !tree.is_leaf(l) {
                return Err(EquivariantError::SiteInvalid(leaf.clone()));
            }
            let stab = t.stabilizer(l);
            let local = GSet::new(Arc::new(group.restrict(&stab)), action.clone(), None)?;
            if local.len() != *arity && !(local.is_empty() && *arity == 0) {
                return Err(EquivariantError::SiteInvalid(leaf.clone()));
            }
            let orbit = t.orbit(l);
            let rep: Vec<usize> = orbit.iter().map(|&o| group.elements().find(|&g| t.act(g, l) == o).unwrap()).collect();
            let mut new_edges = vec![vec![0; *arity]; orbit.len()];
            for (c, &o) in orbit.iter().enumerate() {
                let mut ins = Vec::new();
                for j in 0..*arity {
                    new_edges[c][j] = names.len();
                    ins.push(names.len());
                    names.push(fresh_name(&mut taken, format!("{}.{}", tree.name(o), j + 1)));
                }
                verts.push((o, ins));
            }
            let stab_pos = |k: usize| stab.elements().binary_search(&k).expect("stabilizer element");
            for (x, row) in new_action.iter_mut().enumerate() {
                row.resize(names.len(), 0);
                for (c, &o) in orbit.iter().enumerate() {
                    let c2 = orbit.binary_search(&t.act(x, o)).unwrap();
                    let kappa = group.mul(group.inv(rep[c2]), group.mul(x, rep[c]));
                    for j in 0..*arity {
                        row[new_edges[c][j]] = new_edges[c2][local.act(stab_pos(kappa), j)];
                    }
                }
            }
        }
        OrbitGraft::Root { arity, action, fixed } => {
            let local = GSet::new(group.clone(), action.clone(), None)?;
            if local.len() != *arity || *fixed >= *arity {
                return Err(EquivariantError::SiteInvalid("root".into()));
            }
            if group.elements().any(|g| local.act(g, *fixed) != *fixed) {
                return Err(EquivariantError::RootGraftLeafNotFixed);
            }
            let r = tree.name(tree.root()).to_string();
            let mut slot = vec![0; *arity];
            for (j, s) in slot.iter_mut().enumerate() {
                if j == *fixed {
                    *s = tree.root();
                } else {
                    *s = names.len();
                    names.push(fresh_name(&mut taken, format!("{r}.{}", j + 1)));
                }
            }
            root = names.len();
            names.push(fresh_name(&mut taken, format!("{r}.0")));
            verts.push((root, slot.clone()));
            for (x, row) in new_action.iter_mut().enumerate() {
                row.resize(names.len(), 0);
                for j in 0..*arity {
                    if j != *fixed {
                        row[slot[j]] = slot[local.act(x, j)];
                    }
                }
                row[root] = root;
            }
        }
    }
    let (built, pos) = Tree::build_indexed(names, root, verts)?;
    let s = Arc::new(built);
    let mut action = vec![vec![0; s.edge_count()]; group.order()];
    for (x, row) in new_action.iter().enumerate() {
        for (k, &y) in row.iter().enumerate() {
            action[x][pos[k]] = pos[y];
        }
    }
    let gs = GTree::new(s.clone(), group.clone(), action)?;
    let delta = TreeMorphism::new(tree.clone(), s, pos[..n].to_vec())?;
    Ok((gs.clone(), GMorphism::new(t.clone(), gs, delta)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrbitGenerator {
    Degeneracy,
    Isomorphism,
    InnerFace,
    OuterFace,
}

/// The type of an orbit generator, if `m` is one: a single orbit of
/// degeneracies, inner faces or outer faces, or an isomorphism.
pub fn orbit_generator_kind(m: &GMorphism) -> Option<OrbitGenerator> {
    let f = &m.mor;
    let (t, s) = (&m.src, &m.dst);
    let single_orbit = |g: &GTree, set: &[usize]| -> bool {
        !set.is_empty() && g.orbit(set[0]) == *set
    };
    if f.is_isomorphism() {
        return Some(OrbitGenerator::Isomorphism);
    }
    if f.is_surjective() && !f.is_injective() {
        let merged: Vec<usize> = t
            .tree
            .vertices()
            .iter()
            .filter(|v| v.ins.len() == 1 && f.apply(v.ins[0]) == f.apply(v.out))
            .map(|v| v.ins[0])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let ok = merged.len() + s.tree.edge_count() == t.tree.edge_count() && single_orbit(t, &merged);
        return ok.then_some(OrbitGenerator::Degeneracy);
    }
    if !f.is_injective() {
        return None;
    }
    let image = mark(s.tree.edge_count(), f.map());
    let missing: Vec<usize> = (0..s.tree.edge_count()).filter(|&y| !image[y]).collect();
    let leaves_onto = {
        let mut a: Vec<usize> = t.tree.leaves().iter().map(|&l| f.apply(l)).collect();
        a.sort_unstable();
        a == s.tree.leaves()
    };
    if f.apply(t.tree.root()) == s.tree.root() && leaves_onto {
        let ok = missing.iter().all(|&y| s.tree.is_inner(y)) && single_orbit(s, &missing);
        return ok.then_some(OrbitGenerator::InnerFace);
    }
    let mut preimage = vec![usize::MAX; s.tree.edge_count()];
    for (e, &y) in f.map().iter().enumerate() {
        preimage[y] = e;
    }
    // vertices of S not carried by a vertex of T, named by their outputs
    let mut fresh: Vec<usize> = s
        .tree
        .vertices()
        .iter()
        .filter(|w| !image[w.out] || t.tree.is_leaf(preimage[w.out]))
        .map(|w| w.out)
        .collect();
    fresh.sort_unstable();
    let external = fresh.iter().all(|&o| {
        let w = s.tree.producer(o).unwrap();
        let leaf_graft = image[o] && w.ins.iter().all(|&e| !image[e]);
        let root_graft = !image[o]
            && o == s.tree.root()
            && w.ins.iter().filter(|&&e| image[e]).count() == 1
            && w.ins.contains(&f.apply(t.tree.root()));
        leaf_graft || root_graft
    });
    let mut incident: BTreeSet<usize> = BTreeSet::new();
    for &o in &fresh {
        let w = s.tree.producer(o).unwrap();
        incident.extend(std::iter::once(o).chain(w.ins.iter().copied()).filter(|&e| !image[e]));
    }
    let ok = external && single_orbit(s, &fresh) && incident.into_iter().collect::<Vec<_>>() == missing;
    ok.then_some(OrbitGenerator::OuterFace)
}

/// Prop 3.7's normal form `δ_o ∘ δ_i ∘ α ∘ σ`, one orbit per stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GFactorization {
    pub degeneracies: Vec<GMorphism>,
    pub iso: GMorphism,
    pub inner_faces: Vec<GMorphism>,
    pub outer_faces: Vec<GMorphism>,
}

impl GFactorization {
    pub fn stages(&self) -> impl Iterator<Item = &GMorphism> {
        self.degeneracies.iter().chain(std::iter::once(&self.iso)).chain(&self.inner_faces).chain(&self.outer_faces)
    }

    pub fn recompose(&self) -> TreeMorphism {
        let mut it = self.stages().map(|m| &m.mor);
        let first = it.next().expect("iso stage");
        compose_all(first, it).expect("composable stages")
    }

    /// Every stage is equivariant and an orbit generator of its declared type.
    pub fn stages_well_typed(&self) -> bool {
        let is = |m: &GMorphism, k: OrbitGenerator| {
            is_equivariant_morphism(&m.src, &m.dst, &m.mor) && orbit_generator_kind(m) == Some(k)
        };
        self.degeneracies.iter().all(|m| is(m, OrbitGenerator::Degeneracy))
            && is(&self.iso, OrbitGenerator::Isomorphism)
            && self.inner_faces.iter().all(|m| is(m, OrbitGenerator::InnerFace))
            && self.outer_faces.iter().all(|m| is(m, OrbitGenerator::OuterFace))
    }
}

pub fn equivariant_factorize(f: &GMorphism) -> GFactorization {
    let (t, s) = (&f.src, &f.dst);
    let tk = t.orbit_keys();
    let sk = s.orbit_keys();
    let fac = factorize_blocks(&f.mor, &|e| tk[e], &|e| sk[e]);
    let mut degeneracies = Vec::with_capacity(fac.degeneracies.len());
    let mut cur = t.clone();
    for m in &fac.degeneracies {
        let n = m.dst().edge_count();
        let action = cur.action.iter().map(|row| {
            let mut r = vec![0; n];
            for (x, &y) in row.iter().enumerate() {
                r[m.apply(x)] = m.apply(y);
            }
            r
        });
        let next = GTree::new_unchecked(m.dst().clone(), t.group.clone(), action.collect());
        degeneracies.push(GMorphism::new_unchecked(cur, next.clone(), m.clone()));
        cur = next;
    }
    let mut faces: Vec<GMorphism> = Vec::with_capacity(fac.inner_faces.len() + fac.outer_faces.len());
    let mut top = s.clone();
    for m in fac.inner_faces.iter().chain(&fac.outer_faces).rev() {
        let mut back = vec![usize::MAX; m.dst().edge_count()];
        for (x, &y) in m.map().iter().enumerate() {
            back[y] = x;
        }
        let action = top.action.iter().map(|row| m.map().iter().map(|&y| back[row[y]]).collect());
        let below = GTree::new_unchecked(m.src().clone(), s.group.clone(), action.collect());
        faces.push(GMorphism::new_unchecked(below.clone(), top, m.clone()));
        top = below;
    }
    faces.reverse();
    let outer_faces = faces.split_off(fac.inner_faces.len());
    let iso = GMorphism::new_unchecked(cur, top, fac.iso);
    GFactorization { degeneracies, iso, inner_faces: faces, outer_faces }
}

/// Homomorphisms `G → Aut(T)` up to conjugation in `Aut(T)`.
pub fn actions_up_to_conjugacy(tree: &Arc<Tree>, group: &Arc<FiniteGroup>) -> Vec<GTree> {
    let auts = isomorphisms(tree, tree);
    let gens = group.generators();
    let order_of = |p: &Vec<usize>| {
        let mut q = p.clone();
        let mut k = 1;
        while q.iter().enumerate().any(|(e, &y)| e != y) {
            q = q.iter().map(|&y| p[y]).collect();
            k += 1;
        }
        k
    };
    let elem_order = |g: usize| {
        let mut a = g;
        let mut k = 1;
        while a != 0 {
            a = group.mul(a, g);
            k += 1;
        }
        k
    };
    let candidates: Vec<Vec<&Vec<usize>>> =
        gens.iter().map(|&g| auts.iter().filter(|p| elem_order(g) % order_of(p) == 0).collect()).collect();
    let inverse = |p: &Vec<usize>| {
        let mut q = vec![0; p.len()];
        for (e, &y) in p.iter().enumerate() {
            q[y] = e;
        }
        q
    };
    let auts_inv: Vec<Vec<usize>> = auts.iter().map(inverse).collect();
    let mut seen: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut choice = vec![0; gens.len()];
    loop {
        if candidates.iter().all(|c| !c.is_empty()) {
            let images: Vec<Vec<usize>> = choice.iter().zip(&candidates).map(|(&i, c)| c[i].clone()).collect();
            let key = auts
                .iter()
                .zip(&auts_inv)
                .map(|(c, ci)| images.iter().map(|p| (0..p.len()).map(|e| c[p[ci[e]]]).collect()).collect::<Vec<Vec<usize>>>())
                .min()
                .unwrap_or_else(|| images.clone());
            if seen.insert(key.clone()) {
                let named: Vec<(usize, BTreeMap<String, String>)> = gens
                    .iter()
                    .zip(&key)
                    .map(|(&g, p)| (g, p.iter().enumerate().map(|(e, &y)| (tree.name(e).to_string(), tree.name(y).to_string())).collect()))
                    .collect();
                if let Ok(gt) = GTree::from_generators(tree.clone(), group.clone(), &named) {
                    out.push(gt);
                }
            }
        }
        // odometer over generator images
        let mut i = 0;
        loop {
            if i == choice.len() {
                return out;
            }
            choice[i] += 1;
            if choice[i] < candidates[i].len().max(1) {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// An `A`-labeled tree with G-action; the label set is induced from the leaves.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GLabeledTree {
    gtree: GTree,
    labeled: LabeledTree,
    labels: GSet,
}

impl fmt::Debug for GLabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}", self.gtree, self.labeled)
    }
}

fn induced_label_action(gtree: &GTree, labeled: &LabeledTree) -> Vec<Vec<usize>> {
    gtree
        .action
        .iter()
        .map(|row| (1..=labeled.n()).map(|a| labeled.label_of(row[labeled.leaf(a)]).expect("leaf") - 1).collect())
        .collect()
}

impl GLabeledTree {
    /// `labels` is a G-set on `0..n`, element `a` naming label `a + 1`.
    pub fn new(gtree: GTree, labeled: LabeledTree, labels: GSet) -> Result<Self, EquivariantError> {
        if gtree.tree != *labeled.tree() && *gtree.tree != **labeled.tree() {
            return Err(EquivariantError::LabelsNotEquivariant);
        }
        if labels.len() != labeled.n() || labels.group() != gtree.group() {
            return Err(EquivariantError::LabelsNotEquivariant);
        }
        if induced_label_action(&gtree, &labeled) != labels.action() {
            return Err(EquivariantError::LabelsNotEquivariant);
        }
        Ok(GLabeledTree { gtree, labeled, labels })
    }

    pub fn induced(gtree: GTree, labeled: LabeledTree) -> Self {
        let action = induced_label_action(&gtree, &labeled);
        let labels = GSet::new(gtree.group.clone(), action, None).expect("induced action");
        GLabeledTree { gtree, labeled, labels }
    }

    pub fn canonical(gtree: GTree) -> Self {
        let labeled = LabeledTree::canonical(gtree.tree.clone());
        Self::induced(gtree, labeled)
    }

    pub fn gtree(&self) -> &GTree {
        &self.gtree
    }

    pub fn labeled(&self) -> &LabeledTree {
        &self.labeled
    }

    pub fn labels(&self) -> &GSet {
        &self.labels
    }
}

/// `φ*(T)` with the extended action.
pub fn phi_star_g(phi: &GPointedMap, t: &GLabeledTree) -> Result<(GLabeledTree, Attached), EquivariantError> {
    if phi.dst != t.labels {
        return Err(EquivariantError::NotEquivariant);
    }
    let a = attach(&phi.map, &t.labeled)?;
    Ok((extend_action(phi, t, &a), a))
}

fn extend_action(phi: &GPointedMap, t: &GLabeledTree, a: &Attached) -> GLabeledTree {
    let x = a.tree.tree();
    let action = t
        .gtree
        .action
        .iter()
        .enumerate()
        .map(|(g, row)| {
            let mut r = vec![usize::MAX; x.edge_count()];
            for (e, &k) in a.embedding.iter().enumerate() {
                r[k] = a.embedding[row[e]];
            }
            for j in 1..=a.tree.n() {
                r[a.tree.leaf(j)] = a.tree.leaf(phi.src.act(g, j - 1) + 1);
            }
            r[x.root()] = x.root();
            r
        })
        .collect();
    let gtree = GTree::new_unchecked(x.clone(), t.gtree.group.clone(), action);
    GLabeledTree { gtree, labeled: a.tree.clone(), labels: phi.src.clone() }
}

/// An equivariant pointed map `B₊ → A₊`, both given as G-sets on labels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GPointedMap {
    src: GSet,
    dst: GSet,
    map: PointedMap,
}

impl fmt::Debug for GPointedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.map)
    }
}

impl GPointedMap {
    pub fn new(src: GSet, dst: GSet, map: PointedMap) -> Result<Self, EquivariantError> {
        if map.src() != src.len() || map.dst() != dst.len() || src.group() != dst.group() {
            return Err(LabelError::SizeMismatch(map.src(), src.len()).into());
        }
        let ok = src.group().elements().all(|g| {
            (1..=src.len()).all(|j| {
                let i = map.apply(j);
                let gi = if i == 0 { 0 } else { dst.act(g, i - 1) + 1 };
                map.apply(src.act(g, j - 1) + 1) == gi
            })
        });
        if !ok {
            return Err(EquivariantError::NotEquivariant);
        }
        Ok(GPointedMap { src, dst, map })
    }

    pub fn identity(a: &GSet) -> Self {
        GPointedMap { src: a.clone(), dst: a.clone(), map: PointedMap::identity(a.len()) }
    }

    pub fn src(&self) -> &GSet {
        &self.src
    }

    pub fn dst(&self) -> &GSet {
        &self.dst
    }

    pub fn map(&self) -> &PointedMap {
        &self.map
    }
}

/// All equivariant pointed maps `src₊ → dst₊`, sorted.
pub fn all_gpointed(src: &GSet, dst: &GSet) -> Vec<GPointedMap> {
    let mut out = Vec::new();
    let mut images = vec![None; src.len()];
    gpointed_dfs(src, dst, &src.orbits(), 0, &mut images, &mut |_| true, &mut |m| out.push(m));
    out.sort_by(|a, b| a.map.cmp(&b.map));
    out
}

/// Orbit-by-orbit search; `keep` may reject partial assignments.
fn gpointed_dfs(
    src: &GSet,
    dst: &GSet,
    orbits: &[Vec<usize>],
    k: usize,
    images: &mut Vec<Option<usize>>,
    keep: &mut dyn FnMut(&[Option<usize>]) -> bool,
    emit: &mut dyn FnMut(GPointedMap),
) {
    if k == orbits.len() {
        let imgs: Vec<usize> = images.iter().map(|i| i.expect("assigned")).collect();
        let map = PointedMap::new(src.len(), dst.len(), &imgs).expect("in range");
        emit(GPointedMap { src: src.clone(), dst: dst.clone(), map });
        return;
    }
    let j = orbits[k][0];
    let stab = src.stabilizer(j);
    let g = src.group();
    for target in 0..=dst.len() {
        if target > 0 && !stab.elements().iter().all(|&h| dst.act(h, target - 1) == target - 1) {
            continue;
        }
        for x in g.elements() {
            let i = if target == 0 { 0 } else { dst.act(x, target - 1) + 1 };
            images[src.act(x, j)] = Some(i);
        }
        if keep(images) {
            gpointed_dfs(src, dst, orbits, k + 1, images, keep, emit);
        }
        for &y in &orbits[k] {
            images[y] = None;
        }
    }
}

/// Finite pointed G-sets, objects given by their non-base points.
#[derive(Debug, Clone)]
pub struct PointedGSets {
    pub group: Arc<FiniteGroup>,
}

impl Category for PointedGSets {
    type Obj = GSet;
    type Mor = GPointedMap;

    fn source(&self, f: &GPointedMap) -> GSet {
        f.src.clone()
    }

    fn target(&self, f: &GPointedMap) -> GSet {
        f.dst.clone()
    }

    fn identity(&self, x: &GSet) -> GPointedMap {
        GPointedMap::identity(x)
    }

    fn compose(&self, f: &GPointedMap, g: &GPointedMap) -> Result<GPointedMap, CatError> {
        if f.dst != g.src {
            return Err(CatError::NotComposable(format!("{f:?} then {g:?}")));
        }
        let map = compose_pointed(&f.map, &g.map).map_err(|e| CatError::NotComposable(e.to_string()))?;
        Ok(GPointedMap { src: f.src.clone(), dst: g.dst.clone(), map })
    }
}

impl HomEnumerable for PointedGSets {
    fn hom(&self, x: &GSet, y: &GSet) -> Vec<GPointedMap> {
        all_gpointed(x, y)
    }

    fn maybe_isomorphic(&self, x: &GSet, y: &GSet) -> bool {
        x.len() == y.len()
    }
}

/// A morphism of T^G(A): label-preserving and equivariant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GLabeledMorphism {
    src: GLabeledTree,
    dst: GLabeledTree,
    mor: TreeMorphism,
}

impl fmt::Debug for GLabeledMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.mor)
    }
}

impl GLabeledMorphism {
    pub fn new(src: GLabeledTree, dst: GLabeledTree, mor: TreeMorphism) -> Result<Self, EquivariantError> {
        if !crate::labeled::is_label_preserving(&mor, &src.labeled, &dst.labeled) {
            return Err(LabelError::NotLabelPreserving.into());
        }
        if !is_equivariant_morphism(&src.gtree, &dst.gtree, &mor) {
            return Err(EquivariantError::NotEquivariant);
        }
        Ok(GLabeledMorphism { src, dst, mor })
    }

    pub fn identity(t: &GLabeledTree) -> Self {
        GLabeledMorphism { src: t.clone(), dst: t.clone(), mor: TreeMorphism::identity(t.gtree.tree.clone()) }
    }

    pub fn src(&self) -> &GLabeledTree {
        &self.src
    }

    pub fn dst(&self) -> &GLabeledTree {
        &self.dst
    }

    pub fn mor(&self) -> &TreeMorphism {
        &self.mor
    }
}

/// The disjoint union of the categories T^G(A).
#[derive(Debug, Clone, Copy, Default)]
pub struct GLabeledTrees;

/// Label-preserving equivariant maps.
pub fn hom_glabeled(t: &GLabeledTree, s: &GLabeledTree) -> Vec<TreeMorphism> {
    if t.labeled.n() != s.labeled.n() || t.gtree.group != s.gtree.group {
        return Vec::new();
    }
    let mut fixed = vec![None; t.gtree.tree.edge_count()];
    fixed[t.gtree.tree.root()] = Some(s.gtree.tree.root());
    for i in 1..=t.labeled.n() {
        let l = t.labeled.leaf(i);
        if fixed[l].is_some_and(|y| y != s.labeled.leaf(i)) {
            return Vec::new();
        }
        fixed[l] = Some(s.labeled.leaf(i));
    }
    hom_maps(&t.gtree.tree, &s.gtree.tree, HomQuery { fixed: Some(&fixed), actions: Some((&t.gtree.action, &s.gtree.action)) })
        .into_iter()
        .map(|m| TreeMorphism::new_unchecked(t.gtree.tree.clone(), s.gtree.tree.clone(), m))
        .collect()
}

impl Category for GLabeledTrees {
    type Obj = GLabeledTree;
    type Mor = GLabeledMorphism;

    fn source(&self, f: &GLabeledMorphism) -> GLabeledTree {
        f.src.clone()
    }

    fn target(&self, f: &GLabeledMorphism) -> GLabeledTree {
        f.dst.clone()
    }

    fn identity(&self, x: &GLabeledTree) -> GLabeledMorphism {
        GLabeledMorphism::identity(x)
    }

    fn compose(&self, f: &GLabeledMorphism, g: &GLabeledMorphism) -> Result<GLabeledMorphism, CatError> {
        if f.dst != g.src {
            return Err(CatError::NotComposable(format!("{f:?} then {g:?}")));
        }
        let mor = compose(&f.mor, &g.mor).map_err(|e| CatError::NotComposable(e.to_string()))?;
        Ok(GLabeledMorphism { src: f.src.clone(), dst: g.dst.clone(), mor })
    }
}

impl HomEnumerable for GLabeledTrees {
    fn hom(&self, x: &GLabeledTree, y: &GLabeledTree) -> Vec<GLabeledMorphism> {
        hom_glabeled(x, y).into_iter().map(|mor| GLabeledMorphism { src: x.clone(), dst: y.clone(), mor }).collect()
    }

    fn maybe_isomorphic(&self, x: &GLabeledTree, y: &GLabeledTree) -> bool {
        x.labeled.n() == y.labeled.n() && x.gtree.tree.canonical_form() == y.gtree.tree.canonical_form()
    }
}

const CACHE_LIMIT: usize = 1 << 14;

/// T^G, with τ taken from the underlying non-equivariant structure.
pub struct GTreeFunctor {
    base: PointedGSets,
    fiber: GLabeledTrees,
    cache: Mutex<FxHashMap<(PointedMap, GLabeledTree), Arc<(GLabeledTree, Attached)>>>,
}

impl GTreeFunctor {
    pub fn new(group: Arc<FiniteGroup>) -> Self {
        GTreeFunctor { base: PointedGSets { group }, fiber: GLabeledTrees, cache: Mutex::new(FxHashMap::default()) }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.base.group
    }

    pub fn attach(&self, phi: &GPointedMap, t: &GLabeledTree) -> Result<Arc<(GLabeledTree, Attached)>, EquivariantError> {
        let key = (phi.map.clone(), t.clone());
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            if v.0.labels == phi.src {
                return Ok(v.clone());
            }
        }
        let v = Arc::new(phi_star_g(phi, t)?);
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, v.clone());
        Ok(v)
    }

    fn transported(&self, x: &Arc<(GLabeledTree, Attached)>, dst: &GLabeledTree, old: impl Fn(usize) -> usize) -> GLabeledMorphism {
        let (src, a) = (&x.0, &x.1);
        let tree = a.tree.tree();
        let mut map = vec![0; tree.edge_count()];
        for (e, &k) in a.embedding.iter().enumerate() {
            map[k] = old(e);
        }
        for j in 1..=a.tree.n() {
            map[a.tree.leaf(j)] = dst.labeled.leaf(j);
        }
        map[tree.root()] = dst.gtree.tree.root();
        let mor = TreeMorphism::new_unchecked(tree.clone(), dst.gtree.tree.clone(), map);
        debug_assert!(is_equivariant_morphism(&src.gtree, &dst.gtree, &mor));
        GLabeledMorphism { src: src.clone(), dst: dst.clone(), mor }
    }
}

fn cat(e: EquivariantError) -> CatError {
    CatError::NotComposable(e.to_string())
}

impl OplaxFunctor for GTreeFunctor {
    type Base = PointedGSets;
    type Fiber = GLabeledTrees;

    fn base(&self) -> &PointedGSets {
        &self.base
    }

    fn fiber(&self) -> &GLabeledTrees {
        &self.fiber
    }

    fn apply_obj(&self, f: &GPointedMap, x: &GLabeledTree) -> Result<GLabeledTree, CatError> {
        Ok(self.attach(f, x).map_err(cat)?.0.clone())
    }

    fn apply_mor(&self, f: &GPointedMap, alpha: &GLabeledMorphism) -> Result<GLabeledMorphism, CatError> {
        let x = self.attach(f, &alpha.src).map_err(cat)?;
        let y = self.attach(f, &alpha.dst).map_err(cat)?;
        Ok(self.transported(&x, &y.0, |e| y.1.embedding[alpha.mor.apply(e)]))
    }

    fn tau_comp(&self, f: &GPointedMap, g: &GPointedMap, x: &GLabeledTree) -> Result<GLabeledMorphism, CatError> {
        let gf = self.base.compose(f, g)?;
        let direct = self.attach(&gf, x).map_err(cat)?;
        let a = self.attach(g, x).map_err(cat)?;
        let b = self.attach(f, &a.0).map_err(cat)?;
        Ok(self.transported(&direct, &b.0, |e| b.1.embedding[a.1.embedding[e]]))
    }

    fn tau_id(&self, a: &GSet, x: &GLabeledTree) -> Result<GLabeledMorphism, CatError> {
        if *a != x.labels {
            return Err(CatError::NotComposable("label set mismatch".into()));
        }
        let direct = self.attach(&GPointedMap::identity(a), x).map_err(cat)?;
        Ok(self.transported(&direct, x, |e| e))
    }
}

pub type GGrothObject = GrothObject<GSet, GLabeledTree>;
pub type GGrothMorphism = GrothMorphism<GSet, GLabeledTree, GPointedMap, GLabeledMorphism>;

pub fn g_groth_object(t: GLabeledTree) -> GGrothObject {
    GrothObject { base: t.labels.clone(), fiber: t }
}

/// `F_G(φ, f) = f ∘ ι_{φ,T}`.
pub fn f_g(func: &GTreeFunctor, m: &GGrothMorphism) -> Result<GMorphism, EquivariantError> {
    let x = func.attach(&m.base, &m.src.fiber)?;
    let iota = TreeMorphism::new_unchecked(m.src.fiber.gtree.tree.clone(), x.1.tree.tree().clone(), x.1.embedding.clone());
    let mor = compose(&iota, &m.fiber.mor)?;
    GMorphism::new(m.src.fiber.gtree.clone(), m.dst.fiber.gtree.clone(), mor)
}

fn lca(t: &Tree, edges: &[usize]) -> usize {
    let mut e = edges[0];
    for &x in &edges[1..] {
        while !t.le(x, e) {
            e = t.parent(e).expect("root is above everything");
        }
    }
    e
}

/// `Hom_{∫T^G}(x, y)`, skipping label maps that no fiber morphism can
/// realize: for every edge `e` of `x`, the labels sent to leaves above `e`
/// must be exactly the labels of `y` above their least common ancestor.
pub fn groth_hom_pruned(x: &GGrothObject, y: &GGrothObject) -> Vec<GGrothMorphism> {
    let s = &y.fiber;
    let st = s.gtree.tree.clone();
    let tt = x.fiber.gtree.tree.clone();
    let m = s.labeled.n();
    let n = x.fiber.labeled.n();
    let leaf = |j: usize| s.labeled.leaf(j + 1);
    let blocks: BTreeSet<Vec<bool>> = (0..tt.edge_count())
        .map(|e| (0..=n).map(|i| i > 0 && tt.le(x.fiber.labeled.leaf(i), e)).collect())
        .collect();
    let leafless = (0..st.edge_count()).any(|e| (1..=m).all(|j| !st.le(s.labeled.leaf(j), e)));
    let keep = |images: &[Option<usize>]| -> bool {
        let complete = images.iter().all(Option::is_some);
        let mut group = Vec::with_capacity(m);
        for block in &blocks {
            group.clear();
            group.extend((0..m).filter(|&j| images[j].is_some_and(|i| block[i])).map(leaf));
            if group.is_empty() {
                if complete && !leafless {
                    return false;
                }
                continue;
            }
            let top = lca(&st, &group);
            if (0..m).any(|k| images[k].is_some_and(|i| !block[i]) && st.le(leaf(k), top)) {
                return false;
            }
        }
        true
    };
    let mut out = Vec::new();
    let mut emit = |phi: GPointedMap| {
        let Ok((a, _)) = phi_star_g(&phi, &x.fiber) else { return };
        for mor in hom_glabeled(&a, s) {
            out.push(GrothMorphism {
                src: x.clone(),
                dst: y.clone(),
                base: phi.clone(),
                fiber: GLabeledMorphism { src: a.clone(), dst: s.clone(), mor },
            });
        }
    };
    let mut images = vec![None; m];
    gpointed_dfs(&y.base, &x.base, &y.base.orbits(), 0, &mut images, &mut { keep }, &mut emit);
    out.sort_by(|a, b| (&a.base.map, a.fiber.mor.map()).cmp(&(&b.base.map, b.fiber.mor.map())));
    out
}

/// The preimage of an equivariant morphism under `F_G`.
pub fn lift_g(func: &GTreeFunctor, f: &GMorphism, t: &GLabeledTree, s: &GLabeledTree) -> Result<GGrothMorphism, EquivariantError> {
    let m = crate::dendro::lift_morphism(&f.mor, &t.labeled, &s.labeled)?;
    let phi = GPointedMap::new(s.labels.clone(), t.labels.clone(), m.base)?;
    let a = func.attach(&phi, t)?;
    let fiber = GLabeledMorphism::new(a.0.clone(), s.clone(), m.fiber.mor().clone())?;
    Ok(GrothMorphism { src: g_groth_object(t.clone()), dst: g_groth_object(s.clone()), base: phi, fiber })
}

/// Labels of `A₊` as a G-set with `+` fixed, for display.
pub fn pointed_orbits(a: &GSet) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0]];
    out.extend(a.orbits().into_iter().map(|o| o.into_iter().map(|x| x + 1).collect()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oplax::check_oplax_coherence;

    fn z(n: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(n))
    }

    fn gtree(s: &str, group: &Arc<FiniteGroup>, gen: &[(&str, &str)]) -> GTree {
        let tree = Arc::new(Tree::parse(s).unwrap());
        let m = gen.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        GTree::from_generators(tree, group.clone(), &[(1, m)]).unwrap()
    }

    /// Example 3.9's source tree; `i` acts by a↔ia, c→ic→-c→-ic, d↔id.
    pub(crate) fn example_source() -> GTree {
        gtree(
            "r[b[a ia] e[d[c -c] id[ic -ic]]]",
            &z(4),
            &[("a", "ia"), ("ia", "a"), ("c", "ic"), ("ic", "-c"), ("-c", "-ic"), ("-ic", "c"), ("d", "id"), ("id", "d")],
        )
    }

    #[test]
    fn actions_are_validated() {
        let t = Arc::new(Tree::parse("r[a b]").unwrap());
        let (r, a, b) = (t.edge("r").unwrap(), t.edge("a").unwrap(), t.edge("b").unwrap());
        let row = |m: &[(usize, usize)]| {
            let mut p = vec![0; 3];
            for &(x, y) in m {
                p[x] = y;
            }
            p
        };
        let id = row(&[(r, r), (a, a), (b, b)]);
        let bad = vec![id.clone(), row(&[(r, a), (a, r), (b, b)])];
        assert!(matches!(GTree::new(t.clone(), z(2), bad), Err(EquivariantError::NotAnAutomorphism(1))));
        let swap = vec![id, row(&[(r, r), (a, b), (b, a)])];
        assert!(GTree::new(t.clone(), z(2), swap.clone()).is_ok());
        assert!(matches!(GTree::new(t, z(3), vec![swap[0].clone(), swap[1].clone(), swap[1].clone()]), Err(EquivariantError::NotAHomomorphism(..))));
    }

    #[test]
    fn example_orbits() {
        let s = example_source();
        let leaves = GLabeledTree::canonical(s.clone());
        let mut orbit_sizes: Vec<usize> = leaves.labels().orbits().iter().map(|o| o.len()).collect();
        orbit_sizes.sort_unstable();
        assert_eq!(orbit_sizes, vec![2, 4]);
        let d = s.tree().edge("d").unwrap();
        let names: Vec<&str> = s.orbit(d).iter().map(|&e| s.tree().name(e)).collect();
        assert_eq!(names, vec!["d", "id"]);
        let a = s.tree().edge("a").unwrap();
        assert_eq!(s.stabilizer(a).elements(), &[0, 2]);
    }

    #[test]
    fn example_contraction() {
        let s = example_source();
        let (t, delta) = contract_orbit(&s, "d").unwrap();
        assert_eq!(t.tree().edge_count(), 9);
        assert!(t.tree().vertices().iter().any(|v| v.arity() == 4));
        assert_eq!(orbit_generator_kind(&delta), Some(OrbitGenerator::InnerFace));
        let (u, delta_b) = contract_orbit(&t, "b").unwrap();
        assert_eq!(u.tree().edge_count(), 8);
        assert_eq!(u.tree().to_string(), "r[a e[-c -ic c ic] ia]");
        let f = delta_b.then(&delta).unwrap();
        assert!(is_equivariant_morphism(u.gtree_ref(), &s, f.mor()));
        let fac = equivariant_factorize(&f);
        assert!(fac.degeneracies.is_empty() && fac.outer_faces.is_empty());
        assert!(fac.iso.mor().map().iter().enumerate().all(|(e, &y)| u.tree().name(e) == fac.iso.dst().tree().name(y)));
        assert_eq!(fac.inner_faces.len(), 2);
        assert_eq!(fac.recompose(), *f.mor());
        assert!(fac.stages_well_typed());
        // contracting d alone is not equivariant
        let (_, half) = crate::omega::contract_edge(s.tree(), "d").unwrap();
        let half_src = half.src().clone();
        let trivial = GTree::trivial(half_src, z(4));
        assert!(!is_equivariant_morphism(&trivial, &s, &half));
    }

    impl GTree {
        fn gtree_ref(&self) -> &GTree {
            self
        }
    }

    #[test]
    fn orbit_faces_factor_through_single_faces() {
        let s = example_source();
        let (t, delta) = contract_orbit(&s, "d").unwrap();
        for order in [["d", "id"], ["id", "d"]] {
            let (t1, d1) = crate::omega::contract_edge(s.tree(), order[0]).unwrap();
            let (t2, d2) = crate::omega::contract_edge(&t1, order[1]).unwrap();
            assert_eq!(*t2, **t.tree());
            assert_eq!(compose(&d2, &d1).unwrap().map(), delta.mor().map());
        }
    }

    #[test]
    fn fixed_edge_contraction_matches_plain() {
        let s = example_source();
        let (t, delta) = contract_orbit(&s, "e").unwrap();
        let (t2, d2) = crate::omega::contract_edge(s.tree(), "e").unwrap();
        assert_eq!(**t.tree(), *t2);
        assert_eq!(delta.mor().map(), d2.map());
    }

    #[test]
    fn contraction_order_is_irrelevant() {
        let s = example_source();
        let (t1, _) = contract_orbit(&s, "d").unwrap();
        let (a, _) = contract_orbit(&t1, "b").unwrap();
        let (t2, _) = contract_orbit(&s, "b").unwrap();
        let (b, _) = contract_orbit(&t2, "id").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_orbit_figure() {
        // Figure 3: Z/2 swapping two leaves below the root vertex
        let s = gtree("r[v[x y] p q]", &z(2), &[("p", "q"), ("q", "p")]);
        let (t, sigma) = split_orbit(&s, "p").unwrap();
        assert_eq!(t.tree().to_string(), "r[p[p'] q[q'] v[x y]]");
        assert_eq!(orbit_generator_kind(&sigma), Some(OrbitGenerator::Degeneracy));
        let pp = t.tree().edge("p'").unwrap();
        assert_eq!(t.tree().name(t.act(1, pp)), "q'");
        let (u, delta) = contract_orbit(&t, "p").unwrap();
        let back = delta.then(&sigma).unwrap();
        assert!(back.mor().is_isomorphism());
        assert_eq!(u.tree().edge_count(), s.tree().edge_count());
        let (t2, _) = split_orbit(&s, "v").unwrap();
        let (t3, _) = crate::omega::split_edge(s.tree(), "v").unwrap();
        assert_eq!(**t2.tree(), *t3);
    }

    #[test]
    fn leaf_orbit_graft_figure() {
        // Example 3.8: 2-corollas on a free orbit of leaves
        let t = gtree("r[v[x y] p q]", &z(2), &[("p", "q"), ("q", "p")]);
        let g = OrbitGraft::Leaf { leaf: "p".into(), arity: 2, action: vec![vec![0, 1]] };
        let (s, delta) = graft_orbit(&t, &g).unwrap();
        assert_eq!(s.tree().to_string(), "r[p[p.1 p.2] q[q.1 q.2] v[x y]]");
        assert_eq!(orbit_generator_kind(&delta), Some(OrbitGenerator::OuterFace));
        let p1 = s.tree().edge("p.1").unwrap();
        assert_eq!(s.tree().name(s.act(1, p1)), "q.1");
    }

    #[test]
    fn root_orbit_graft_figure() {
        // leaf G-set G/G + G/e + G/G
        let t = gtree("r[v[x y] p q]", &z(2), &[("p", "q"), ("q", "p")]);
        let action = vec![vec![0, 1, 2, 3], vec![0, 2, 1, 3]];
        let g = OrbitGraft::Root { arity: 4, action: action.clone(), fixed: 0 };
        let (s, delta) = graft_orbit(&t, &g).unwrap();
        assert_eq!(s.tree().edge_count(), 10);
        assert_eq!(orbit_generator_kind(&delta), Some(OrbitGenerator::OuterFace));
        let bad = OrbitGraft::Root { arity: 4, action, fixed: 1 };
        assert_eq!(graft_orbit(&t, &bad).unwrap_err(), EquivariantError::RootGraftLeafNotFixed);
        let site = OrbitGraft::Leaf { leaf: "v".into(), arity: 1, action: vec![vec![0]] };
        assert!(matches!(graft_orbit(&t, &site), Err(EquivariantError::SiteInvalid(_))));
    }

    #[test]
    fn fixed_leaf_graft_matches_plain() {
        let t = gtree("r[v[x y] p q]", &z(2), &[("p", "q"), ("q", "p")]);
        let g = OrbitGraft::Leaf { leaf: "x".into(), arity: 2, action: vec![vec![0, 1], vec![0, 1]] };
        let (s, delta) = graft_orbit(&t, &g).unwrap();
        let (plain, emb) = t.tree().graft(&crate::tree::GraftSite::Leaf("x".into()), 2).unwrap();
        assert_eq!(**s.tree(), plain);
        assert_eq!(delta.mor().map(), emb.as_slice());
    }

    #[test]
    fn trivial_group_phi_star_is_plain() {
        let g = Arc::new(FiniteGroup::trivial());
        let t = GLabeledTree::canonical(GTree::trivial(Arc::new(Tree::parse("r[x[a b] c]").unwrap()), g.clone()));
        let b = GSet::trivial(g, 4);
        let phi = GPointedMap::new(b, t.labels().clone(), PointedMap::new(4, 3, &[1, 0, 3, 3]).unwrap()).unwrap();
        let (x, _) = phi_star_g(&phi, &t).unwrap();
        assert_eq!(*x.labeled(), crate::dendro::phi_star(phi.map(), t.labeled()).unwrap());
    }

    #[test]
    fn collapsing_a_free_orbit_onto_a_fixed_leaf() {
        let g = z(2);
        let t = GLabeledTree::canonical(gtree("r[a b c]", &g, &[("b", "c"), ("c", "b")]));
        // labels: 1 = a (fixed), 2 = b, 3 = c
        let free = GSet::new(g.clone(), vec![vec![0, 1], vec![1, 0]], None).unwrap();
        let phi = GPointedMap::new(free, t.labels().clone(), PointedMap::new(2, 3, &[1, 1]).unwrap()).unwrap();
        let (x, _) = phi_star_g(&phi, &t).unwrap();
        assert_eq!(x.gtree().tree().to_string(), "r.+[r[a[a.1 a.2] b[] c[]]]");
        let bad = GSet::new(g.clone(), vec![vec![0, 1], vec![1, 0]], None).unwrap();
        assert!(GPointedMap::new(bad, t.labels().clone(), PointedMap::new(2, 3, &[2, 2]).unwrap()).is_err());
    }

    #[test]
    fn tau_cells_are_equivariant_and_coherent() {
        let g = z(2);
        let func = GTreeFunctor::new(g.clone());
        let t = GLabeledTree::canonical(gtree("r[a b c]", &g, &[("b", "c"), ("c", "b")]));
        let a = t.labels().clone();
        let sets = [
            GSet::trivial(g.clone(), 1),
            GSet::new(g.clone(), vec![vec![0, 1], vec![1, 0]], None).unwrap(),
            a.clone(),
        ];
        let mut checked = 0;
        for b in &sets {
            for c in &sets {
                for h in all_gpointed(b, &a) {
                    for gg in all_gpointed(c, b) {
                        for f in all_gpointed(&sets[0], c) {
                            assert!(check_oplax_coherence(&func, &f, &gg, &h, &t).unwrap());
                            let tau = func.tau_comp(&gg, &h, &t).unwrap();
                            assert!(is_equivariant_morphism(&tau.src.gtree, &tau.dst.gtree, &tau.mor));
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn pruned_hom_matches_generic_hom() {
        let g = z(2);
        let func = GTreeFunctor::new(g.clone());
        let trees: Vec<GLabeledTree> = crate::tree::enumerate_trees_by_edges(4)
            .into_iter()
            .flat_map(|t| actions_up_to_conjugacy(&Arc::new(t), &g))
            .map(GLabeledTree::canonical)
            .collect();
        let groth = crate::oplax::OplaxGroth { functor: &func };
        let mut total = 0;
        for x in &trees {
            for y in &trees {
                let (x, y) = (g_groth_object(x.clone()), g_groth_object(y.clone()));
                let mut generic = groth.hom(&x, &y);
                generic.sort_by(|a, b| (&a.base.map, a.fiber.mor.map()).cmp(&(&b.base.map, b.fiber.mor.map())));
                let pruned = groth_hom_pruned(&x, &y);
                assert_eq!(pruned, generic);
                total += pruned.len();
            }
        }
        assert!(total > 100);
    }

    #[test]
    fn involutions_up_to_conjugacy() {
        let g = z(2);
        let c3 = Arc::new(Tree::parse("r[a b c]").unwrap());
        assert_eq!(actions_up_to_conjugacy(&c3, &g).len(), 2);
        let z3 = z(3);
        assert_eq!(actions_up_to_conjugacy(&c3, &z3).len(), 2);
        let c2 = Arc::new(Tree::parse("r[a b]").unwrap());
        assert_eq!(actions_up_to_conjugacy(&c2, &z3).len(), 1);
    }
}

