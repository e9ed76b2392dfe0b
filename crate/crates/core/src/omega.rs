//! Morphisms of Ω as edge maps, generators and the four-stage factorization.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::oplax::{CatError, Category, HomEnumerable};
use crate::tree::{fresh_name, Tree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("edge map is not defined on `{0}`")]
    NotTotal(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge map is not monotone: `{0}` ≤ `{1}` is not preserved")]
    NotMonotone(String, String),
    #[error("no subtree of the target matches the vertex with output `{0}`")]
    VertexConditionFails(String),
    #[error("target of the first map is not the source of the second")]
    SourceTargetMismatch,
    #[error("`{0}` is not an inner edge")]
    NotInnerEdge(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Clone)]
pub struct TreeMorphism {
    src: Arc<Tree>,
    dst: Arc<Tree>,
    map: Vec<usize>,
}

impl PartialEq for TreeMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map && self.src == other.src && self.dst == other.dst
    }
}

impl Eq for TreeMorphism {}

impl std::hash::Hash for TreeMorphism {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.map.hash(state);
    }
}

impl fmt::Debug for TreeMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {{", self.src, self.dst)?;
        for (x, &y) in self.map.iter().enumerate() {
            write!(f, " {}:{}", self.src.name(x), self.dst.name(y))?;
        }
        write!(f, " }}")
    }
}

fn check_map(src: &Tree, dst: &Tree, map: &[usize]) -> Result<(), MorphismError> {
    for x in 0..src.edge_count() {
        if let Some(p) = src.parent(x) {
            if !dst.le(map[x], map[p]) {
                return Err(MorphismError::NotMonotone(src.name(x).into(), src.name(p).into()));
            }
        }
    }
    for v in src.vertices() {
        let ls: Vec<usize> = v.ins.iter().map(|&e| map[e]).collect();
        if !dst.has_subtree(map[v.out], &ls) {
            return Err(MorphismError::VertexConditionFails(src.name(v.out).into()));
        }
    }
    Ok(())
}

impl TreeMorphism {
    pub fn new(src: Arc<Tree>, dst: Arc<Tree>, map: Vec<usize>) -> Result<Self, MorphismError> {
        if map.len() != src.edge_count() {
            return Err(MorphismError::NotTotal(src.name(map.len().min(src.edge_count().saturating_sub(1))).into()));
        }
        if let Some(&bad) = map.iter().find(|&&y| y >= dst.edge_count()) {
            return Err(MorphismError::UnknownEdge(format!("#{bad}")));
        }
        check_map(&src, &dst, &map)?;
        Ok(TreeMorphism { src, dst, map })
    }

    pub(crate) fn new_unchecked(src: Arc<Tree>, dst: Arc<Tree>, map: Vec<usize>) -> Self {
        debug_assert!(check_map(&src, &dst, &map).is_ok(), "invalid edge map {src} -> {dst}: {map:?}");
        TreeMorphism { src, dst, map }
    }

    /// Builds a morphism from a map on edge names.
    pub fn by_names(src: Arc<Tree>, dst: Arc<Tree>, f: impl Fn(&str) -> String) -> Result<Self, MorphismError> {
        let map = (0..src.edge_count())
            .map(|x| {
                let y = f(src.name(x));
                dst.index_of(&y).ok_or(MorphismError::UnknownEdge(y))
            })
            .collect::<Result<Vec<_>, _>>()?;
        TreeMorphism::new(src, dst, map)
    }

    /// The map sending every edge to the edge of the same name.
    pub fn inclusion(src: Arc<Tree>, dst: Arc<Tree>) -> Result<Self, MorphismError> {
        Self::by_names(src, dst, |n| n.to_string())
    }

    pub fn identity(t: Arc<Tree>) -> Self {
        let map = (0..t.edge_count()).collect();
        TreeMorphism { src: t.clone(), dst: t, map }
    }

    pub fn src(&self) -> &Arc<Tree> {
        &self.src
    }

    pub fn dst(&self) -> &Arc<Tree> {
        &self.dst
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, e: usize) -> usize {
        self.map[e]
    }

    pub fn image_name(&self, e: &str) -> Option<&str> {
        self.src.index_of(e).map(|x| self.dst.name(self.map[x]))
    }

    pub fn name_map(&self) -> BTreeMap<String, String> {
        (0..self.src.edge_count()).map(|x| (self.src.name(x).to_string(), self.dst.name(self.map[x]).to_string())).collect()
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &TreeMorphism) -> Result<TreeMorphism, MorphismError> {
        compose(self, g)
    }

    pub fn is_identity(&self) -> bool {
        self.src == self.dst && self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.dst.edge_count()];
        self.map.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.dst.edge_count()];
        for &y in &self.map {
            seen[y] = true;
        }
        seen.into_iter().all(|b| b)
    }

    /// The source tree renamed along the map; defined when the map is injective.
    fn image_tree(&self) -> Option<Tree> {
        if !self.is_injective() {
            return None;
        }
        self.src.rename(|x| self.dst.name(self.map[x]).to_string()).ok()
    }

    pub fn is_isomorphism(&self) -> bool {
        self.src.edge_count() == self.dst.edge_count() && self.image_tree().is_some_and(|t| t == *self.dst)
    }

    pub fn is_degeneracy(&self) -> bool {
        let (s, d) = (&self.src, &self.dst);
        if s.edge_count() != d.edge_count() + 1 || !self.is_surjective() {
            return false;
        }
        let Some(v) = s.vertices().iter().find(|v| v.ins.len() == 1 && self.map[v.ins[0]] == self.map[v.out]) else {
            return false;
        };
        let (upper, lower) = (v.ins[0], v.out);
        let merged = remove_unary(s, upper, lower);
        merged.rename(|x| d.name(self.map[index_in(s, &merged, x)]).to_string()).is_ok_and(|t| t == **d)
    }

    pub fn is_inner_face(&self) -> bool {
        let (s, d) = (&self.src, &self.dst);
        if d.edge_count() != s.edge_count() + 1 {
            return false;
        }
        let Some(image) = self.image_tree() else { return false };
        let missing: Vec<usize> = (0..d.edge_count()).filter(|&y| !self.map.contains(&y)).collect();
        let m = missing[0];
        d.is_inner(m) && contract_set(d, &mark(d.edge_count(), &[m])) == image
    }

    pub fn is_outer_face(&self) -> bool {
        self.outer_face_vertex().is_some()
    }

    /// For an outer face, the output edge of the added vertex and whether it is a root graft.
    pub fn outer_face_vertex(&self) -> Option<(usize, bool)> {
        let (s, d) = (&self.src, &self.dst);
        let image = self.image_tree()?;
        let n = d.edge_count();
        let mut inside = vec![false; n];
        for &y in &self.map {
            inside[y] = true;
        }
        let new: Vec<usize> = (0..n).filter(|&y| !inside[y]).collect();
        let r = self.map[s.root()];
        let pruned = |w: usize| {
            let outs: Vec<bool> = (0..n).map(|e| e != w && inside[e] && d.producer(e).is_some()).collect();
            try_restrict(d, &inside, r, &outs)
        };
        if r != d.root() {
            let w = d.consumer(r)?;
            let mut expected: Vec<usize> = w.ins.iter().copied().filter(|&e| e != r).collect();
            expected.push(w.out);
            expected.sort_unstable();
            return (w.out == d.root() && expected == new && pruned(w.out).as_ref() == Some(&image)).then_some((w.out, true));
        }
        d.vertices()
            .iter()
            .find(|w| inside[w.out] && w.ins == new && pruned(w.out).as_ref() == Some(&image))
            .map(|w| (w.out, false))
    }

    pub fn kind(&self) -> Option<GeneratorKind> {
        if self.is_identity() {
            Some(GeneratorKind::Identity)
        } else if self.is_isomorphism() {
            Some(GeneratorKind::Isomorphism)
        } else if self.is_degeneracy() {
            Some(GeneratorKind::Degeneracy)
        } else if self.is_inner_face() {
            Some(GeneratorKind::InnerFace)
        } else {
            self.outer_face_vertex().map(|(_, root)| if root { GeneratorKind::RootFace } else { GeneratorKind::LeafFace })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Identity,
    Isomorphism,
    Degeneracy,
    InnerFace,
    LeafFace,
    RootFace,
}

fn index_in(from: &Tree, to: &Tree, x: usize) -> usize {
    from.index_of(to.name(x)).expect("shared edge name")
}

pub(crate) fn mark(n: usize, edges: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &e in edges {
        m[e] = true;
    }
    m
}

/// Removes the unary vertex between `upper` and `lower`, keeping the name of `lower`.
fn remove_unary(t: &Tree, upper: usize, lower: usize) -> Tree {
    let mut verts = Vec::new();
    for v in t.vertices() {
        if v.out == lower {
            continue;
        }
        let out = if v.out == upper { lower } else { v.out };
        verts.push((out, v.ins.clone()));
    }
    rebuild_without(t, &mark(t.edge_count(), &[upper]), t.root(), verts)
}

/// Rebuilds a tree on the edges of `t` not marked `drop`, with vertices in `t`'s indices.
fn rebuild_without(t: &Tree, drop: &[bool], root: usize, verts: Vec<(usize, Vec<usize>)>) -> Tree {
    let mut pos = vec![usize::MAX; t.edge_count()];
    let mut names = Vec::new();
    for e in 0..t.edge_count() {
        if !drop[e] {
            pos[e] = names.len();
            names.push(t.name(e).to_string());
        }
    }
    let verts = verts.into_iter().map(|(o, ins)| (pos[o], ins.into_iter().map(|e| pos[e]).collect())).collect();
    Tree::build(names, pos[root], verts).expect("restriction of a valid tree")
}

/// Contracts every marked inner edge of `t`.
pub(crate) fn contract_set(t: &Tree, drop: &[bool]) -> Tree {
    fn expand(t: &Tree, drop: &[bool], e: usize, out: &mut Vec<usize>) {
        if drop[e] {
            for &c in &t.producer(e).expect("contracted edge is inner").ins {
                expand(t, drop, c, out);
            }
        } else {
            out.push(e);
        }
    }
    let mut verts = Vec::new();
    for v in t.vertices() {
        if drop[v.out] {
            continue;
        }
        let mut ins = Vec::new();
        for &e in &v.ins {
            expand(t, drop, e, &mut ins);
        }
        verts.push((v.out, ins));
    }
    rebuild_without(t, drop, t.root(), verts)
}

/// Restricts `t` to the marked edges and the listed vertices (by output edge).
pub(crate) fn restrict(t: &Tree, keep: &[bool], root: usize, vertex_outs: &[bool]) -> Tree {
    try_restrict(t, keep, root, vertex_outs).expect("restriction of a valid tree")
}

pub(crate) fn try_restrict(t: &Tree, keep: &[bool], root: usize, vertex_outs: &[bool]) -> Option<Tree> {
    let verts: Vec<(usize, Vec<usize>)> = t.vertices().iter().filter(|v| vertex_outs[v.out]).map(|v| (v.out, v.ins.clone())).collect();
    if !keep[root] || verts.iter().any(|(o, ins)| !keep[*o] || ins.iter().any(|&e| !keep[e])) {
        return None;
    }
    let mut pos = vec![usize::MAX; t.edge_count()];
    let mut names = Vec::new();
    for e in 0..t.edge_count() {
        if keep[e] {
            pos[e] = names.len();
            names.push(t.name(e).to_string());
        }
    }
    let verts = verts.into_iter().map(|(o, ins)| (pos[o], ins.into_iter().map(|e| pos[e]).collect())).collect();
    Tree::build(names, pos[root], verts).ok()
}

pub fn validate_morphism(src: Arc<Tree>, dst: Arc<Tree>, map: &BTreeMap<String, String>) -> Result<TreeMorphism, MorphismError> {
    let mut m = Vec::with_capacity(src.edge_count());
    for x in src.names() {
        let y = map.get(x).ok_or_else(|| MorphismError::NotTotal(x.clone()))?;
        m.push(dst.index_of(y).ok_or_else(|| MorphismError::UnknownEdge(y.clone()))?);
    }
    TreeMorphism::new(src, dst, m)
}

/// `g ∘ f`.
pub fn compose(f: &TreeMorphism, g: &TreeMorphism) -> Result<TreeMorphism, MorphismError> {
    if !Arc::ptr_eq(&f.dst, &g.src) && f.dst != g.src {
        return Err(MorphismError::SourceTargetMismatch);
    }
    let map = f.map.iter().map(|&y| g.map[y]).collect();
    Ok(TreeMorphism::new_unchecked(f.src.clone(), g.dst.clone(), map))
}

/// Composes a chain `f₁, f₂, …` as `… ∘ f₂ ∘ f₁`.
pub fn compose_all<'a>(first: &TreeMorphism, rest: impl IntoIterator<Item = &'a TreeMorphism>) -> Result<TreeMorphism, MorphismError> {
    let mut acc = first.clone();
    for g in rest {
        acc = compose(&acc, g)?;
    }
    Ok(acc)
}

pub fn contract_edge(s: &Arc<Tree>, e: &str) -> Result<(Arc<Tree>, TreeMorphism), MorphismError> {
    let x = s.edge(e)?;
    if !s.is_inner(x) {
        return Err(MorphismError::NotInnerEdge(e.into()));
    }
    let t = Arc::new(contract_set(s, &mark(s.edge_count(), &[x])));
    let delta = TreeMorphism::inclusion(t.clone(), s.clone())?;
    Ok((t, delta))
}

/// Splits `e` by a unary vertex; the lower half keeps the name `e`.
pub fn split_edge(s: &Arc<Tree>, e: &str) -> Result<(Arc<Tree>, TreeMorphism), MorphismError> {
    let x = s.edge(e)?;
    let mut taken = s.names().iter().cloned().collect();
    let upper_name = fresh_name(&mut taken, format!("{e}'"));
    let mut names = s.names().to_vec();
    let upper = names.len();
    names.push(upper_name.clone());
    let mut verts: Vec<(usize, Vec<usize>)> =
        s.vertex_pairs().into_iter().map(|(o, ins)| (if o == x { upper } else { o }, ins)).collect();
    verts.push((x, vec![upper]));
    let t = Arc::new(Tree::build(names, s.root(), verts)?);
    let sigma = TreeMorphism::by_names(t.clone(), s.clone(), |n| if n == upper_name { e.to_string() } else { n.to_string() })?;
    Ok((t, sigma))
}

/// Outer faces into `s`: one per vertex whose removal leaves a subtree.
pub fn outer_faces_into(s: &Arc<Tree>) -> Vec<TreeMorphism> {
    let mut out = Vec::new();
    let n = s.edge_count();
    for w in s.vertices() {
        let all_leaves = w.ins.iter().all(|&e| s.is_leaf(e));
        if all_leaves {
            let drop = mark(n, &w.ins);
            let keep: Vec<bool> = drop.iter().map(|d| !d).collect();
            let outs: Vec<bool> = (0..n).map(|e| e != w.out && s.producer(e).is_some()).collect();
            let t = Arc::new(restrict(s, &keep, s.root(), &outs));
            out.push(TreeMorphism::inclusion(t, s.clone()).expect("subtree inclusion"));
        }
        if w.out == s.root() {
            for &c in &w.ins {
                if w.ins.iter().all(|&e| e == c || s.is_leaf(e)) {
                    let keep: Vec<bool> = (0..n).map(|e| s.le(e, c)).collect();
                    let outs: Vec<bool> = (0..n).map(|e| keep[e] && s.producer(e).is_some()).collect();
                    let t = Arc::new(restrict(s, &keep, c, &outs));
                    out.push(TreeMorphism::inclusion(t, s.clone()).expect("subtree inclusion"));
                }
            }
        }
    }
    out
}

/// Every generator with target `s` other than isomorphisms.
pub fn generators_into(s: &Arc<Tree>) -> Vec<TreeMorphism> {
    let mut out = Vec::new();
    for e in s.inner_edges() {
        out.push(contract_edge(s, s.name(e)).expect("inner edge").1);
    }
    for e in 0..s.edge_count() {
        out.push(split_edge(s, s.name(e)).expect("edge").1);
    }
    out.extend(outer_faces_into(s));
    out
}

/// Ω as a category with hom-sets computed by [`hom_set`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Omega;

impl Category for Omega {
    type Obj = Arc<Tree>;
    type Mor = TreeMorphism;

    fn source(&self, f: &TreeMorphism) -> Arc<Tree> {
        f.src.clone()
    }

    fn target(&self, f: &TreeMorphism) -> Arc<Tree> {
        f.dst.clone()
    }

    fn identity(&self, x: &Arc<Tree>) -> TreeMorphism {
        TreeMorphism::identity(x.clone())
    }

    fn compose(&self, f: &TreeMorphism, g: &TreeMorphism) -> Result<TreeMorphism, CatError> {
        compose(f, g).map_err(|e| CatError::NotComposable(e.to_string()))
    }
}

impl HomEnumerable for Omega {
    fn hom(&self, x: &Arc<Tree>, y: &Arc<Tree>) -> Vec<TreeMorphism> {
        hom_set(x, y)
    }

    fn maybe_isomorphic(&self, x: &Arc<Tree>, y: &Arc<Tree>) -> bool {
        x.edge_count() == y.edge_count() && x.canonical_form() == y.canonical_form()
    }
}

/// Extra restrictions on a hom-set search: forced images and an
/// equivariance condition given by matching action tables.
#[derive(Default, Clone, Copy)]
pub struct HomQuery<'a> {
    pub fixed: Option<&'a [Option<usize>]>,
    pub actions: Option<(&'a [Vec<usize>], &'a [Vec<usize>])>,
}

struct Search<'a> {
    src: &'a Tree,
    dst: &'a Tree,
    query: HomQuery<'a>,
    map: Vec<Option<usize>>,
    trail: Vec<usize>,
    order: Vec<usize>,
    leaves_below: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn assign(&mut self, e: usize, y: usize) -> bool {
        let mark = self.trail.len();
        let pairs: Vec<(usize, usize)> = match self.query.actions {
            Some((sa, da)) => sa.iter().zip(da).map(|(g, h)| (g[e], h[y])).collect(),
            None => vec![(e, y)],
        };
        for (x, z) in pairs {
            if let Some(Some(f)) = self.query.fixed.map(|f| f[x]) {
                if f != z {
                    self.undo(mark);
                    return false;
                }
            }
            match self.map[x] {
                Some(w) if w != z => {
                    self.undo(mark);
                    return false;
                }
                Some(_) => {}
                None => {
                    self.map[x] = Some(z);
                    self.trail.push(x);
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let x = self.trail.pop().unwrap();
            self.map[x] = None;
        }
    }

    fn candidates(&self, e: usize, bound: Option<usize>) -> Vec<usize> {
        if let Some(y) = self.map[e] {
            return vec![y];
        }
        if let Some(Some(y)) = self.query.fixed.map(|f| f[e]) {
            return vec![y];
        }
        match bound {
            Some(b) => (0..self.dst.edge_count()).filter(|&y| self.dst.le(y, b)).collect(),
            None => (0..self.dst.edge_count()).collect(),
        }
    }

    fn run(&mut self) {
        let root = self.src.root();
        for y in self.candidates(root, None) {
            let mark = self.trail.len();
            if self.assign(root, y) {
                self.vertex(0);
            }
            self.undo(mark);
        }
    }

    fn vertex(&mut self, k: usize) {
        if k == self.order.len() {
            self.out.push(self.map.iter().map(|y| y.expect("total")).collect());
            return;
        }
        let v = &self.src.vertices()[self.order[k]];
        let ins = v.ins.clone();
        let top = self.map[v.out].expect("parent assigned first");
        let mut chosen = Vec::with_capacity(ins.len());
        self.inputs(k, top, &ins, &mut chosen);
    }

    fn inputs(&mut self, k: usize, top: usize, ins: &[usize], chosen: &mut Vec<usize>) {
        let i = chosen.len();
        if i == ins.len() {
            let covered = self.leaves_below[top].iter().all(|&l| chosen.iter().any(|&c| self.dst.le(l, c)));
            if covered {
                self.vertex(k + 1);
            }
            return;
        }
        for y in self.candidates(ins[i], Some(top)) {
            if !self.dst.le(y, top) || chosen.iter().any(|&c| self.dst.le(c, y) || self.dst.le(y, c)) {
                continue;
            }
            let mark = self.trail.len();
            if self.assign(ins[i], y) {
                chosen.push(y);
                self.inputs(k, top, ins, chosen);
                chosen.pop();
            }
            self.undo(mark);
        }
    }
}

/// All valid edge maps `t → s` satisfying `query`, sorted.
pub fn hom_maps(t: &Tree, s: &Tree, query: HomQuery<'_>) -> Vec<Vec<usize>> {
    let mut order = Vec::new();
    let mut queue = std::collections::VecDeque::from([t.root()]);
    while let Some(e) = queue.pop_front() {
        if let Some(v) = t.producer(e) {
            order.push(t.vertices().iter().position(|w| w.out == v.out).unwrap());
            queue.extend(v.ins.iter().copied());
        }
    }
    let leaves_below = (0..s.edge_count()).map(|r| s.leaves().iter().copied().filter(|&l| s.le(l, r)).collect()).collect();
    let mut search = Search {
        src: t,
        dst: s,
        query,
        map: vec![None; t.edge_count()],
        trail: Vec::new(),
        order,
        leaves_below,
        out: Vec::new(),
    };
    search.run();
    let mut out = search.out;
    out.sort();
    out.dedup();
    out
}

pub fn hom_set(t: &Arc<Tree>, s: &Arc<Tree>) -> Vec<TreeMorphism> {
    hom_maps(t, s, HomQuery::default())
        .into_iter()
        .map(|m| TreeMorphism::new_unchecked(t.clone(), s.clone(), m))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub degeneracies: Vec<TreeMorphism>,
    pub iso: TreeMorphism,
    pub inner_faces: Vec<TreeMorphism>,
    pub outer_faces: Vec<TreeMorphism>,
}

impl Factorization {
    pub fn stages(&self) -> impl Iterator<Item = &TreeMorphism> {
        self.degeneracies.iter().chain(std::iter::once(&self.iso)).chain(&self.inner_faces).chain(&self.outer_faces)
    }

    pub fn recompose(&self) -> TreeMorphism {
        let mut it = self.stages();
        let first = it.next().expect("iso stage");
        compose_all(first, it).expect("stages are composable")
    }

    /// Whether every stage is of its declared generator type.
    pub fn stages_well_typed(&self) -> bool {
        self.degeneracies.iter().all(|d| d.is_degeneracy())
            && self.iso.is_isomorphism()
            && self.inner_faces.iter().all(|d| d.is_inner_face())
            && self.outer_faces.iter().all(|d| d.is_outer_face())
    }
}

pub fn factorize(f: &TreeMorphism) -> Factorization {
    factorize_blocks(f, &|e| e, &|e| e)
}

/// Factorization in which the generators of each stage act on whole blocks
/// of edges at once. `src_block` groups edges of the source (for the
/// degeneracies), `dst_block` groups edges of the target (for the faces);
/// both return a block key.
pub(crate) fn factorize_blocks(f: &TreeMorphism, src_block: &dyn Fn(usize) -> usize, dst_block: &dyn Fn(usize) -> usize) -> Factorization {
    let t = &f.src;
    let s = &f.dst;
    let n = t.edge_count();

    // degeneracies
    let mut removable: Vec<(usize, usize)> = Vec::new();
    for v in t.vertices() {
        if v.ins.len() == 1 && f.map[v.ins[0]] == f.map[v.out] {
            removable.push((src_block(v.ins[0]), v.ins[0]));
        }
    }
    removable.sort_unstable();
    let mut degeneracies = Vec::new();
    let mut alive = vec![true; n];
    let mut verts: Vec<(usize, Vec<usize>)> = t.vertex_pairs();
    let mut current = t.clone();
    let mut i = 0;
    while i < removable.len() {
        let key = removable[i].0;
        let mut step = vec![usize::MAX; n];
        for e in 0..n {
            step[e] = e;
        }
        while i < removable.len() && removable[i].0 == key {
            let b = removable[i].1;
            let at = verts.iter().position(|(_, ins)| ins.as_slice() == [b]).expect("unary vertex");
            let (a, _) = verts.remove(at);
            if let Some(p) = verts.iter_mut().find(|(o, _)| *o == b) {
                p.0 = a;
            }
            alive[b] = false;
            step[b] = a;
            i += 1;
        }
        let next = Arc::new(rebuild_without(t, &alive.iter().map(|a| !a).collect::<Vec<_>>(), t.root(), verts.clone()));
        let m = TreeMorphism::by_names(current.clone(), next.clone(), |x| t.name(step[t.index_of(x).unwrap()]).to_string())
            .expect("degeneracy step");
        degeneracies.push(m);
        current = next;
    }

    // isomorphism onto the image names
    let t1 = current;
    let image_of = |x: usize| f.map[t.index_of(t1.name(x)).unwrap()];
    let t2 = Arc::new(t1.rename(|x| s.name(image_of(x)).to_string()).expect("injective after degeneracies"));
    let iso = TreeMorphism::by_names(t1.clone(), t2.clone(), |x| s.name(image_of(t1.index_of(x).unwrap())).to_string())
        .expect("renaming is an isomorphism");

    // inner faces: S' is the subtree of S spanned by the image
    let m = s.edge_count();
    let r = f.map[t.root()];
    let image_leaves: Vec<usize> = t2.leaves().iter().map(|&l| s.index_of(t2.name(l)).unwrap()).collect();
    let in_sprime: Vec<bool> =
        (0..m).map(|y| s.le(y, r) && !image_leaves.iter().any(|&l| y != l && s.le(y, l))).collect();
    let sprime_outs: Vec<bool> = (0..m).map(|y| in_sprime[y] && !image_leaves.contains(&y) && s.producer(y).is_some()).collect();
    let in_image = mark(m, &(0..t2.edge_count()).map(|x| s.index_of(t2.name(x)).unwrap()).collect::<Vec<_>>());
    let mut missing: Vec<(usize, usize)> = (0..m).filter(|&y| in_sprime[y] && !in_image[y]).map(|y| (dst_block(y), y)).collect();
    missing.sort_unstable();
    let sprime = restrict(s, &in_sprime, r, &sprime_outs);
    let mut pending = mark(m, &missing.iter().map(|p| p.1).collect::<Vec<_>>());
    let as_sprime = |flags: &[bool]| -> Vec<bool> { sprime.names().iter().map(|nm| flags[s.index_of(nm).unwrap()]).collect() };
    let mut current = Arc::new(contract_set(&sprime, &as_sprime(&pending)));
    debug_assert_eq!(*current, *t2, "image of the injective part is a contraction of S'");
    let current_is_t2 = *current == *t2;
    if current_is_t2 {
        current = t2.clone();
    }
    let mut inner_faces = Vec::new();
    let mut i = 0;
    while i < missing.len() {
        let key = missing[i].0;
        while i < missing.len() && missing[i].0 == key {
            pending[missing[i].1] = false;
            i += 1;
        }
        let next = Arc::new(contract_set(&sprime, &as_sprime(&pending)));
        inner_faces.push(TreeMorphism::inclusion(current.clone(), next.clone()).expect("inner face"));
        current = next;
    }

    // outer faces: root side first, then upward by depth
    let mut edges = in_sprime.clone();
    let mut outs = sprime_outs.clone();
    let mut root = r;
    let mut outer_faces = Vec::new();
    let mut push_step = |edges: &[bool], outs: &[bool], root: usize, current: &mut Arc<Tree>| {
        let next = Arc::new(restrict(s, edges, root, outs));
        outer_faces.push(TreeMorphism::inclusion(current.clone(), next.clone()).expect("outer face"));
        *current = next;
    };
    while root != s.root() {
        let w = s.consumer(root).unwrap();
        edges[w.out] = true;
        for &e in &w.ins {
            edges[e] = true;
        }
        outs[w.out] = true;
        root = w.out;
        push_step(&edges, &outs, root, &mut current);
    }
    let mut rest: Vec<(usize, usize, usize)> = s
        .vertices()
        .iter()
        .filter(|w| !outs[w.out])
        .map(|w| (s.depth(w.out), dst_block(w.out), w.out))
        .collect();
    rest.sort_unstable();
    let mut i = 0;
    while i < rest.len() {
        let (d, key, _) = rest[i];
        while i < rest.len() && rest[i].0 == d && rest[i].1 == key {
            let w = s.producer(rest[i].2).unwrap();
            outs[w.out] = true;
            for &e in &w.ins {
                edges[e] = true;
            }
            i += 1;
        }
        push_step(&edges, &outs, root, &mut current);
    }

    Factorization { degeneracies, iso, inner_faces, outer_faces }
}
