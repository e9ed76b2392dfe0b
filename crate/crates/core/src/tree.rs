//! Rooted non-planar operadic trees.
//!
//! Edges are named by opaque strings. Internally a tree stores its edge names
//! sorted and refers to edges by index into that list, so two trees with the
//! same edge names agree on indices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("edge `{0}` is declared twice")]
    DuplicateEdge(String),
    #[error("edge `{0}` is used by a vertex but not declared")]
    DanglingEdge(String),
    #[error("edge `{0}` is an incoming edge of more than one vertex")]
    MultipleParents(String),
    #[error("edge `{0}` is the outgoing edge of more than one vertex")]
    MultipleProducers(String),
    #[error("root `{0}` is an incoming edge of a vertex")]
    RootHasParent(String),
    #[error("edge `{0}` does not reach the root")]
    Disconnected(String),
    #[error("cycle through edge `{0}`")]
    Cyclic(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}` is neither a leaf nor the root")]
    SiteNotLeafOrRoot(String),
    #[error("a root graft needs a corolla with at least one leaf")]
    EmptyRootGraft,
    #[error("vertex with output `{0}` keeps only some of its inputs")]
    NotClosedUpward(String),
    #[error("edge `{0}` is not connected to the new root inside the kept set")]
    NotConnected(String),
    #[error("cannot parse tree at byte {0}: {1}")]
    Parse(usize, String),
}

/// Unvalidated tree data, also the JSON file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTree {
    pub edges: Vec<String>,
    pub root: String,
    pub vertices: Vec<RawVertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawVertex {
    pub out: String,
    #[serde(rename = "in")]
    pub ins: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub out: usize,
    pub ins: Vec<usize>,
}

impl Vertex {
    pub fn is_stump(&self) -> bool {
        self.ins.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.ins.len()
    }
}

#[derive(Clone)]
pub struct Tree {
    names: Vec<String>,
    root: usize,
    vertices: Vec<Vertex>,
    producer: Vec<Option<usize>>,
    consumer: Vec<Option<usize>>,
    depth: Vec<usize>,
    leaves: Vec<usize>,
    le: Vec<bool>,
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.names == other.names && self.vertices == other.vertices
    }
}

impl Eq for Tree {}

impl std::hash::Hash for Tree {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.names.hash(state);
        self.root.hash(state);
        self.vertices.hash(state);
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({self})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Equal,
    Below,
    Above,
    Incomparable,
}

/// Relation table over edge pairs; `Below` means closer to the leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePoset {
    n: usize,
    table: Vec<Relation>,
}

impl EdgePoset {
    pub fn relation(&self, x: usize, y: usize) -> Relation {
        self.table[x * self.n + y]
    }

    pub fn le(&self, x: usize, y: usize) -> bool {
        matches!(self.relation(x, y), Relation::Equal | Relation::Below)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm(pub Vec<u32>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraftSite {
    Leaf(String),
    Root,
}

pub fn fresh_name(taken: &mut BTreeSet<String>, base: String) -> String {
    let mut s = base;
    while taken.contains(&s) {
        s.push('\'');
    }
    taken.insert(s.clone());
    s
}

pub fn validate_tree(raw: &RawTree) -> Result<Tree, TreeError> {
    let mut index = BTreeMap::new();
    for (i, e) in raw.edges.iter().enumerate() {
        if index.insert(e.as_str(), i).is_some() {
            return Err(TreeError::DuplicateEdge(e.clone()));
        }
    }
    let lookup = |e: &String| index.get(e.as_str()).copied().ok_or_else(|| TreeError::DanglingEdge(e.clone()));
    let root = lookup(&raw.root)?;
    let mut verts = Vec::with_capacity(raw.vertices.len());
    for v in &raw.vertices {
        let out = lookup(&v.out)?;
        let ins = v.ins.iter().map(lookup).collect::<Result<Vec<_>, _>>()?;
        verts.push((out, ins));
    }
    Tree::build(raw.edges.clone(), root, verts)
}

impl Tree {
    /// Builds a tree from names, a root index and `(out, ins)` pairs indexing into `names`.
    pub fn build(names: Vec<String>, root: usize, verts: Vec<(usize, Vec<usize>)>) -> Result<Tree, TreeError> {
        Self::build_indexed(names, root, verts).map(|(t, _)| t)
    }

    /// Like [`Tree::build`], also returning the new index of each input name.
    pub fn build_indexed(mut names: Vec<String>, root: usize, verts: Vec<(usize, Vec<usize>)>) -> Result<(Tree, Vec<usize>), TreeError> {
        let n = names.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| names[a].cmp(&names[b]));
        for w in order.windows(2) {
            if names[w[0]] == names[w[1]] {
                return Err(TreeError::DuplicateEdge(names[w[0]].clone()));
            }
        }
        let mut pos = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let sorted: Vec<String> = order.iter().map(|&i| std::mem::take(&mut names[i])).collect();
        let mut vertices: Vec<Vertex> = verts
            .into_iter()
            .map(|(out, ins)| {
                let mut ins: Vec<usize> = ins.into_iter().map(|e| pos[e]).collect();
                ins.sort_unstable();
                Vertex { out: pos[out], ins }
            })
            .collect();
        vertices.sort();
        let root = pos[root];
        Self::from_sorted(sorted, root, vertices).map(|t| (t, pos))
    }

    fn from_sorted(names: Vec<String>, root: usize, vertices: Vec<Vertex>) -> Result<Tree, TreeError> {
        let n = names.len();
        let mut producer = vec![None; n];
        let mut consumer = vec![None; n];
        for (vi, v) in vertices.iter().enumerate() {
            if producer[v.out].replace(vi).is_some() {
                return Err(TreeError::MultipleProducers(names[v.out].clone()));
            }
            for &e in &v.ins {
                if consumer[e].replace(vi).is_some() {
                    return Err(TreeError::MultipleParents(names[e].clone()));
                }
            }
        }
        if consumer[root].is_some() {
            return Err(TreeError::RootHasParent(names[root].clone()));
        }
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        for start in 0..n {
            let mut path = Vec::new();
            let mut e = start;
            while depth[e] == usize::MAX {
                if path.len() > n {
                    return Err(TreeError::Cyclic(names[start].clone()));
                }
                path.push(e);
                match consumer[e] {
                    Some(v) => e = vertices[v].out,
                    None => return Err(TreeError::Disconnected(names[e].clone())),
                }
            }
            let mut d = depth[e];
            for &p in path.iter().rev() {
                d += 1;
                depth[p] = d;
            }
        }
        let leaves = (0..n).filter(|&e| producer[e].is_none()).collect();
        let mut le = vec![false; n * n];
        for x in 0..n {
            let mut e = x;
            loop {
                le[x * n + e] = true;
                match consumer[e] {
                    Some(v) => e = vertices[v].out,
                    None => break,
                }
            }
        }
        Ok(Tree { names, root, vertices, producer, consumer, depth, leaves, le })
    }

    /// The edge-only tree.
    pub fn eta(name: &str) -> Tree {
        Tree::build(vec![name.to_string()], 0, vec![]).expect("edge-only tree")
    }

    /// The corolla with `n` leaves named `root` and `1..=n`.
    pub fn corolla(root: &str, n: usize) -> Tree {
        let mut names = vec![root.to_string()];
        names.extend((1..=n).map(|i| format!("{root}{i}")));
        Tree::build(names, 0, vec![(0, (1..=n).collect())]).expect("corolla")
    }

    /// Parses the bracket notation produced by `Display`, e.g. `r[a b[c d] s[]]`.
    pub fn parse(s: &str) -> Result<Tree, TreeError> {
        struct P<'a> {
            s: &'a [u8],
            i: usize,
            names: Vec<String>,
            verts: Vec<(usize, Vec<usize>)>,
        }
        impl P<'_> {
            fn skip(&mut self) {
                while self.i < self.s.len() && (self.s[self.i].is_ascii_whitespace() || self.s[self.i] == b',') {
                    self.i += 1;
                }
            }
            fn edge(&mut self) -> Result<usize, TreeError> {
                self.skip();
                let start = self.i;
                while self.i < self.s.len() && !matches!(self.s[self.i], b'[' | b']' | b',') && !self.s[self.i].is_ascii_whitespace() {
                    self.i += 1;
                }
                if start == self.i {
                    return Err(TreeError::Parse(self.i, "expected edge name".into()));
                }
                let name = String::from_utf8_lossy(&self.s[start..self.i]).into_owned();
                let id = self.names.len();
                self.names.push(name);
                if self.i < self.s.len() && self.s[self.i] == b'[' {
                    self.i += 1;
                    let mut ins = Vec::new();
                    loop {
                        self.skip();
                        if self.i >= self.s.len() {
                            return Err(TreeError::Parse(self.i, "unclosed `[`".into()));
                        }
                        if self.s[self.i] == b']' {
                            self.i += 1;
                            break;
                        }
                        ins.push(self.edge()?);
                    }
                    self.verts.push((id, ins));
                }
                Ok(id)
            }
        }
        let mut p = P { s: s.as_bytes(), i: 0, names: Vec::new(), verts: Vec::new() };
        let root = p.edge()?;
        p.skip();
        if p.i != p.s.len() {
            return Err(TreeError::Parse(p.i, "trailing input".into()));
        }
        Tree::build(p.names, root, p.verts)
    }

    pub fn edge_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn edge(&self, name: &str) -> Result<usize, TreeError> {
        self.index_of(name).ok_or_else(|| TreeError::UnknownEdge(name.to_string()))
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// The vertex whose output is `e`.
    pub fn producer(&self, e: usize) -> Option<&Vertex> {
        self.producer[e].map(|v| &self.vertices[v])
    }

    /// The vertex having `e` as an input.
    pub fn consumer(&self, e: usize) -> Option<&Vertex> {
        self.consumer[e].map(|v| &self.vertices[v])
    }

    /// Next edge toward the root.
    pub fn parent(&self, e: usize) -> Option<usize> {
        self.consumer(e).map(|v| v.out)
    }

    pub fn depth(&self, e: usize) -> usize {
        self.depth[e]
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn is_leaf(&self, e: usize) -> bool {
        self.producer[e].is_none()
    }

    pub fn is_inner(&self, e: usize) -> bool {
        self.producer[e].is_some() && self.consumer[e].is_some()
    }

    pub fn inner_edges(&self) -> Vec<usize> {
        (0..self.edge_count()).filter(|&e| self.is_inner(e)).collect()
    }

    /// `x ≤ y`: the path from `x` to the root passes through `y`.
    pub fn le(&self, x: usize, y: usize) -> bool {
        self.le[x * self.names.len() + y]
    }

    pub fn relation(&self, x: usize, y: usize) -> Relation {
        match (x == y, self.le(x, y), self.le(y, x)) {
            (true, _, _) => Relation::Equal,
            (_, true, _) => Relation::Below,
            (_, _, true) => Relation::Above,
            _ => Relation::Incomparable,
        }
    }

    pub fn poset(&self) -> EdgePoset {
        let n = self.edge_count();
        let table = (0..n * n).map(|k| self.relation(k / n, k % n)).collect();
        EdgePoset { n, table }
    }

    /// Whether `r` and `ls` bound a subtree: every `l` below `r`, the `l`
    /// pairwise incomparable, and every leaf below `r` below some `l`.
    pub fn has_subtree(&self, r: usize, ls: &[usize]) -> bool {
        for (i, &l) in ls.iter().enumerate() {
            if !self.le(l, r) {
                return false;
            }
            for &m in &ls[..i] {
                if self.le(l, m) || self.le(m, l) {
                    return false;
                }
            }
        }
        self.leaves.iter().all(|&lf| !self.le(lf, r) || ls.iter().any(|&l| self.le(lf, l)))
    }

    pub fn raw(&self) -> RawTree {
        RawTree {
            edges: self.names.clone(),
            root: self.names[self.root].clone(),
            vertices: self
                .vertices
                .iter()
                .map(|v| RawVertex { out: self.names[v.out].clone(), ins: v.ins.iter().map(|&e| self.names[e].clone()).collect() })
                .collect(),
        }
    }

    /// Vertex data as `(out, ins)` pairs, for rebuilding modified copies.
    pub fn vertex_pairs(&self) -> Vec<(usize, Vec<usize>)> {
        self.vertices.iter().map(|v| (v.out, v.ins.clone())).collect()
    }

    /// Renames every edge; fails if the new names collide.
    pub fn rename(&self, f: impl Fn(usize) -> String) -> Result<Tree, TreeError> {
        let names = (0..self.edge_count()).map(f).collect();
        Tree::build(names, self.root, self.vertex_pairs())
    }

    fn codes(&self) -> Vec<Vec<u32>> {
        let n = self.edge_count();
        let mut by_depth: Vec<usize> = (0..n).collect();
        by_depth.sort_by_key(|&e| std::cmp::Reverse(self.depth[e]));
        let mut codes: Vec<Vec<u32>> = vec![Vec::new(); n];
        for e in by_depth {
            codes[e] = match self.producer(e) {
                None => vec![0],
                Some(v) => {
                    let mut kids: Vec<&Vec<u32>> = v.ins.iter().map(|&c| &codes[c]).collect();
                    kids.sort();
                    let mut code = vec![1, v.ins.len() as u32];
                    for k in kids {
                        code.extend_from_slice(k);
                    }
                    code
                }
            };
        }
        codes
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        CanonicalForm(self.codes().swap_remove(self.root))
    }

    /// The isomorphic tree with edges named `e0, e1, ...` in a deterministic traversal.
    pub fn canonical_representative(&self) -> Tree {
        let codes = self.codes();
        let mut label = vec![0usize; self.edge_count()];
        let mut next = 0;
        let mut stack = vec![self.root];
        while let Some(e) = stack.pop() {
            label[e] = next;
            next += 1;
            if let Some(v) = self.producer(e) {
                let mut kids = v.ins.clone();
                kids.sort_by(|&a, &b| codes[b].cmp(&codes[a]));
                stack.extend(kids);
            }
        }
        self.rename(|e| format!("e{}", label[e])).expect("distinct canonical names")
    }

    pub fn subtree(&self, new_root: &str, keep: &[&str]) -> Result<Tree, TreeError> {
        let r = self.edge(new_root)?;
        let mut kept = vec![false; self.edge_count()];
        for k in keep {
            kept[self.edge(k)?] = true;
        }
        if !kept[r] {
            return Err(TreeError::NotConnected(new_root.to_string()));
        }
        let mut verts = Vec::new();
        for v in &self.vertices {
            if !kept[v.out] {
                continue;
            }
            let present = v.ins.iter().filter(|&&e| kept[e]).count();
            if present == v.ins.len() {
                verts.push((v.out, v.ins.clone()));
            } else if present > 0 {
                return Err(TreeError::NotClosedUpward(self.names[v.out].clone()));
            }
        }
        let edges: Vec<usize> = (0..self.edge_count()).filter(|&e| kept[e]).collect();
        for &e in &edges {
            if e != r && !self.parent(e).is_some_and(|p| kept[p]) {
                return Err(TreeError::NotConnected(self.names[e].clone()));
            }
        }
        let mut pos = vec![usize::MAX; self.edge_count()];
        for (i, &e) in edges.iter().enumerate() {
            pos[e] = i;
        }
        let names = edges.iter().map(|&e| self.names[e].clone()).collect();
        let verts = verts.into_iter().map(|(o, ins)| (pos[o], ins.into_iter().map(|e| pos[e]).collect())).collect();
        Tree::build(names, pos[r], verts)
    }

    /// The subtree with root `r` and leaf set `ls`, when it exists.
    pub fn subtree_spanned(&self, r: usize, ls: &[usize]) -> Option<Tree> {
        if !self.has_subtree(r, ls) {
            return None;
        }
        let keep: Vec<usize> = (0..self.edge_count())
            .filter(|&y| self.le(y, r) && !ls.iter().any(|&l| y != l && self.le(y, l)))
            .collect();
        let mut pos = vec![usize::MAX; self.edge_count()];
        for (i, &e) in keep.iter().enumerate() {
            pos[e] = i;
        }
        let names = keep.iter().map(|&e| self.names[e].clone()).collect();
        let verts = self
            .vertices
            .iter()
            .filter(|v| pos[v.out] != usize::MAX && !ls.contains(&v.out))
            .map(|v| (pos[v.out], v.ins.iter().map(|&e| pos[e]).collect()))
            .collect();
        Tree::build(names, pos[r], verts).ok()
    }

    /// Grafts an `arity`-corolla at `site`. Returns the new tree and the
    /// embedding of the old edges (old index to new index).
    pub fn graft(&self, site: &GraftSite, arity: usize) -> Result<(Tree, Vec<usize>), TreeError> {
        let mut taken: BTreeSet<String> = self.names.iter().cloned().collect();
        let mut names = self.names.clone();
        let mut verts = self.vertex_pairs();
        let mut root = self.root;
        match site {
            GraftSite::Leaf(l) => {
                let e = self.edge(l)?;
                if !self.is_leaf(e) {
                    return Err(TreeError::SiteNotLeafOrRoot(l.clone()));
                }
                let mut ins = Vec::new();
                for j in 1..=arity {
                    ins.push(names.len());
                    names.push(fresh_name(&mut taken, format!("{l}.{j}")));
                }
                verts.push((e, ins));
            }
            GraftSite::Root => {
                if arity == 0 {
                    return Err(TreeError::EmptyRootGraft);
                }
                let r = &self.names[self.root];
                let mut ins = vec![self.root];
                for j in 1..arity {
                    ins.push(names.len());
                    names.push(fresh_name(&mut taken, format!("{r}.{j}")));
                }
                root = names.len();
                names.push(fresh_name(&mut taken, format!("{r}.0")));
                verts.push((root, ins));
            }
        }
        let t = Tree::build(names, root, verts)?;
        let embedding = self.names.iter().map(|n| t.index_of(n).expect("old edge kept")).collect();
        Ok((t, embedding))
    }

    /// Automorphism-free check of structural sameness up to renaming.
    pub fn is_isomorphic(&self, other: &Tree) -> bool {
        self.edge_count() == other.edge_count() && self.canonical_form() == other.canonical_form()
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &Tree, e: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{}", t.names[e])?;
            if let Some(v) = t.producer(e) {
                write!(f, "[")?;
                for (i, &c) in v.ins.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    go(t, c, f)?;
                }
                write!(f, "]")?;
            }
            Ok(())
        }
        go(self, self.root, f)
    }
}

pub fn canonical_form(t: &Tree) -> CanonicalForm {
    t.canonical_form()
}

/// Every isomorphism `t → s`, as edge maps indexed by `t`'s edges.
pub fn isomorphisms(t: &Tree, s: &Tree) -> Vec<Vec<usize>> {
    if t.edge_count() != s.edge_count() {
        return Vec::new();
    }
    let (ct, cs) = (t.codes(), s.codes());
    if ct[t.root] != cs[s.root] {
        return Vec::new();
    }
    let mut out: Vec<Vec<usize>> = sub_isos(t, s, &ct, &cs, t.root, s.root)
        .into_iter()
        .map(|pairs| {
            let mut map = vec![0; t.edge_count()];
            for (x, y) in pairs {
                map[x] = y;
            }
            map
        })
        .collect();
    out.sort();
    out
}

fn sub_isos(t: &Tree, s: &Tree, ct: &[Vec<u32>], cs: &[Vec<u32>], x: usize, y: usize) -> Vec<Vec<(usize, usize)>> {
    let (Some(vx), Some(vy)) = (t.producer(x), s.producer(y)) else {
        return vec![vec![(x, y)]];
    };
    let mut results = Vec::new();
    let mut used = vec![false; vy.ins.len()];
    let mut chosen = Vec::new();
    child_matchings(&vx.ins, &vy.ins, ct, cs, &mut used, &mut chosen, &mut |pairs| {
        let mut partial = vec![vec![(x, y)]];
        for &(a, b) in pairs {
            let subs = sub_isos(t, s, ct, cs, a, b);
            partial = partial
                .iter()
                .flat_map(|p| subs.iter().map(move |q| p.iter().chain(q).copied().collect()))
                .collect();
        }
        results.extend(partial);
    });
    results
}

fn child_matchings(
    xs: &[usize],
    ys: &[usize],
    ct: &[Vec<u32>],
    cs: &[Vec<u32>],
    used: &mut Vec<bool>,
    chosen: &mut Vec<(usize, usize)>,
    emit: &mut dyn FnMut(&[(usize, usize)]),
) {
    let i = chosen.len();
    if i == xs.len() {
        emit(chosen);
        return;
    }
    for j in 0..ys.len() {
        if !used[j] && ct[xs[i]] == cs[ys[j]] {
            used[j] = true;
            chosen.push((xs[i], ys[j]));
            child_matchings(xs, ys, ct, cs, used, chosen, emit);
            chosen.pop();
            used[j] = false;
        }
    }
}

/// Some isomorphism `t → s`, if one exists.
pub fn are_isomorphic(t: &Tree, s: &Tree) -> Option<Vec<usize>> {
    if t.edge_count() != s.edge_count() {
        return None;
    }
    let (ct, cs) = (t.codes(), s.codes());
    if ct[t.root] != cs[s.root] {
        return None;
    }
    let mut map = vec![usize::MAX; t.edge_count()];
    let mut stack = vec![(t.root, s.root)];
    while let Some((x, y)) = stack.pop() {
        map[x] = y;
        if let (Some(vx), Some(vy)) = (t.producer(x), s.producer(y)) {
            let mut kx = vx.ins.clone();
            let mut ky = vy.ins.clone();
            kx.sort_by(|&a, &b| ct[a].cmp(&ct[b]));
            ky.sort_by(|&a, &b| cs[a].cmp(&cs[b]));
            stack.extend(kx.into_iter().zip(ky));
        }
    }
    Some(map)
}

/// All trees with exactly `leaf_count` leaves and at most `max_vertices`
/// vertices, one per isomorphism class, sorted by canonical form.
pub fn enumerate_trees(leaf_count: usize, max_vertices: usize) -> Vec<Tree> {
    let mut seen = BTreeSet::new();
    let mut frontier = vec![Tree::eta("e0")];
    seen.insert(frontier[0].canonical_form());
    let mut found = BTreeMap::new();
    for v in 0..=max_vertices {
        let mut next = Vec::new();
        for t in &frontier {
            if t.leaves().len() == leaf_count {
                found.insert(t.canonical_form(), t.canonical_representative());
            }
            if v == max_vertices {
                continue;
            }
            let remaining = max_vertices - v;
            let l = t.leaves().len();
            if l == 0 || l > leaf_count + remaining {
                continue;
            }
            let max_arity = leaf_count + remaining - l;
            for &leaf in t.leaves() {
                for a in 0..=max_arity {
                    let (g, _) = t.graft(&GraftSite::Leaf(t.name(leaf).to_string()), a).expect("leaf graft");
                    if seen.insert(g.canonical_form()) {
                        next.push(g.canonical_representative());
                    }
                }
            }
        }
        frontier = next;
    }
    found.into_values().collect()
}

/// All trees with at most `max_edges` edges, sorted by canonical form.
pub fn enumerate_trees_by_edges(max_edges: usize) -> Vec<Tree> {
    let mut found = BTreeMap::new();
    if max_edges == 0 {
        return Vec::new();
    }
    let eta = Tree::eta("e0");
    found.insert(eta.canonical_form(), eta.clone());
    let mut frontier = vec![eta];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for t in &frontier {
            let room = max_edges - t.edge_count();
            for &leaf in t.leaves() {
                for a in 0..=room {
                    let (g, _) = t.graft(&GraftSite::Leaf(t.name(leaf).to_string()), a).expect("leaf graft");
                    let c = g.canonical_form();
                    if let std::collections::btree_map::Entry::Vacant(slot) = found.entry(c) {
                        let g = g.canonical_representative();
                        slot.insert(g.clone());
                        next.push(g);
                    }
                }
            }
        }
        frontier = next;
    }
    found.into_values().collect()
}
