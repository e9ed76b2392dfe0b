//! Leaf-labeled trees, the categories T(n), and finite pointed sets.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::omega::{compose, hom_maps, HomQuery, TreeMorphism};
use crate::oplax::{CatError, Category, HomEnumerable};
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("labels are not a bijection onto the leaves")]
    NotABijection,
    #[error("label sets differ in size: {0} vs {1}")]
    LabelCountMismatch(usize, usize),
    #[error("pointed maps do not compose: target size {0}, source size {1}")]
    SizeMismatch(usize, usize),
    #[error("pointed map value {0} is out of range")]
    OutOfRange(usize),
    #[error("morphism does not preserve labels and root")]
    NotLabelPreserving,
}

/// A tree with leaves labeled `1..=n`; `labels[i - 1]` is the leaf labeled `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    tree: Arc<Tree>,
    labels: Vec<usize>,
}

impl fmt::Debug for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{", self.tree)?;
        for (i, &l) in self.labels.iter().enumerate() {
            write!(f, " {}:{}", i + 1, self.tree.name(l))?;
        }
        write!(f, " }}")
    }
}

impl LabeledTree {
    pub fn new(tree: Arc<Tree>, labels: Vec<usize>) -> Result<Self, LabelError> {
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if sorted != tree.leaves() {
            return Err(LabelError::NotABijection);
        }
        Ok(LabeledTree { tree, labels })
    }

    pub fn from_names(tree: Arc<Tree>, names: &[&str]) -> Result<Self, LabelError> {
        let labels = names.iter().map(|n| tree.index_of(n).ok_or(LabelError::NotABijection)).collect::<Result<_, _>>()?;
        Self::new(tree, labels)
    }

    /// Labels the leaves in edge order.
    pub fn canonical(tree: Arc<Tree>) -> Self {
        let labels = tree.leaves().to_vec();
        LabeledTree { tree, labels }
    }

    pub(crate) fn new_unchecked(tree: Arc<Tree>, labels: Vec<usize>) -> Self {
        debug_assert!(LabeledTree::new(tree.clone(), labels.clone()).is_ok());
        LabeledTree { tree, labels }
    }

    pub fn tree(&self) -> &Arc<Tree> {
        &self.tree
    }

    /// Number of labels.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The leaf labeled `i` (1-based).
    pub fn leaf(&self, i: usize) -> usize {
        self.labels[i - 1]
    }

    /// The label of edge `e`, if it is a leaf.
    pub fn label_of(&self, e: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == e).map(|i| i + 1)
    }
}

pub fn is_label_preserving(f: &TreeMorphism, t: &LabeledTree, s: &LabeledTree) -> bool {
    t.n() == s.n()
        && **f.src() == *t.tree
        && **f.dst() == *s.tree
        && f.apply(t.tree.root()) == s.tree.root()
        && (1..=t.n()).all(|i| f.apply(t.leaf(i)) == s.leaf(i))
}

/// Morphisms of T(n): label- and root-preserving morphisms of Ω.
pub fn hom_labeled(t: &LabeledTree, s: &LabeledTree) -> Result<Vec<TreeMorphism>, LabelError> {
    if t.n() != s.n() {
        return Err(LabelError::LabelCountMismatch(t.n(), s.n()));
    }
    let mut fixed = vec![None; t.tree.edge_count()];
    let mut pins = vec![(t.tree.root(), s.tree.root())];
    pins.extend((1..=t.n()).map(|i| (t.leaf(i), s.leaf(i))));
    for (x, y) in pins {
        match fixed[x] {
            Some(z) if z != y => return Ok(Vec::new()),
            _ => fixed[x] = Some(y),
        }
    }
    Ok(hom_maps(&t.tree, &s.tree, HomQuery { fixed: Some(&fixed), actions: None })
        .into_iter()
        .map(|m| TreeMorphism::new_unchecked(t.tree.clone(), s.tree.clone(), m))
        .collect())
}

/// A morphism of T(n).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledMorphism {
    src: LabeledTree,
    dst: LabeledTree,
    mor: TreeMorphism,
}

impl fmt::Debug for LabeledMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.mor)
    }
}

impl LabeledMorphism {
    pub fn new(src: LabeledTree, dst: LabeledTree, mor: TreeMorphism) -> Result<Self, LabelError> {
        if !is_label_preserving(&mor, &src, &dst) {
            return Err(LabelError::NotLabelPreserving);
        }
        Ok(LabeledMorphism { src, dst, mor })
    }

    pub(crate) fn new_unchecked(src: LabeledTree, dst: LabeledTree, mor: TreeMorphism) -> Self {
        debug_assert!(is_label_preserving(&mor, &src, &dst));
        LabeledMorphism { src, dst, mor }
    }

    pub fn identity(t: &LabeledTree) -> Self {
        LabeledMorphism { src: t.clone(), dst: t.clone(), mor: TreeMorphism::identity(t.tree.clone()) }
    }

    pub fn src(&self) -> &LabeledTree {
        &self.src
    }

    pub fn dst(&self) -> &LabeledTree {
        &self.dst
    }

    pub fn mor(&self) -> &TreeMorphism {
        &self.mor
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &LabeledMorphism) -> Result<LabeledMorphism, CatError> {
        if self.dst != g.src {
            return Err(CatError::NotComposable(format!("{self:?} then {g:?}")));
        }
        let mor = compose(&self.mor, &g.mor).map_err(|e| CatError::NotComposable(e.to_string()))?;
        Ok(LabeledMorphism { src: self.src.clone(), dst: g.dst.clone(), mor })
    }
}

/// The disjoint union of the categories T(n).
#[derive(Debug, Clone, Copy, Default)]
pub struct LabeledTrees;

impl Category for LabeledTrees {
    type Obj = LabeledTree;
    type Mor = LabeledMorphism;

    fn source(&self, f: &LabeledMorphism) -> LabeledTree {
        f.src.clone()
    }

    fn target(&self, f: &LabeledMorphism) -> LabeledTree {
        f.dst.clone()
    }

    fn identity(&self, x: &LabeledTree) -> LabeledMorphism {
        LabeledMorphism::identity(x)
    }

    fn compose(&self, f: &LabeledMorphism, g: &LabeledMorphism) -> Result<LabeledMorphism, CatError> {
        f.then(g)
    }
}

impl HomEnumerable for LabeledTrees {
    fn hom(&self, x: &LabeledTree, y: &LabeledTree) -> Vec<LabeledMorphism> {
        hom_labeled(x, y)
            .unwrap_or_default()
            .into_iter()
            .map(|mor| LabeledMorphism { src: x.clone(), dst: y.clone(), mor })
            .collect()
    }

    fn maybe_isomorphic(&self, x: &LabeledTree, y: &LabeledTree) -> bool {
        x.n() == y.n() && x.tree.canonical_form() == y.tree.canonical_form()
    }
}

/// A pointed map `m₊ → n₊`; index 0 is the basepoint `+`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointedMap {
    src: usize,
    dst: usize,
    map: Vec<usize>,
}

impl PointedMap {
    /// `images[i - 1]` is the image of `i`; 0 stands for `+`.
    pub fn new(src: usize, dst: usize, images: &[usize]) -> Result<Self, LabelError> {
        if images.len() != src {
            return Err(LabelError::SizeMismatch(images.len(), src));
        }
        if let Some(&bad) = images.iter().find(|&&y| y > dst) {
            return Err(LabelError::OutOfRange(bad));
        }
        let mut map = vec![0];
        map.extend_from_slice(images);
        Ok(PointedMap { src, dst, map })
    }

    pub fn identity(n: usize) -> Self {
        PointedMap { src: n, dst: n, map: (0..=n).collect() }
    }

    pub fn src(&self) -> usize {
        self.src
    }

    pub fn dst(&self) -> usize {
        self.dst
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    /// Elements of `1..=src` sent to `i` (the basepoint itself is never listed).
    pub fn preimage(&self, i: usize) -> Vec<usize> {
        (1..=self.src).filter(|&j| self.map[j] == i).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.src == self.dst && self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn is_bijection(&self) -> bool {
        self.src == self.dst && (1..=self.dst).all(|i| self.preimage(i).len() == 1)
    }

    /// All pointed maps `m₊ → n₊`, in lexicographic order.
    pub fn all(m: usize, n: usize) -> Vec<PointedMap> {
        let mut out = Vec::new();
        let mut images = vec![0; m];
        loop {
            out.push(PointedMap::new(m, n, &images).expect("in range"));
            let mut i = m;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                images[i] += 1;
                if images[i] <= n {
                    break;
                }
                images[i] = 0;
            }
        }
    }
}

/// The skeletal category of finite pointed sets `n₊`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointedSets;

impl Category for PointedSets {
    type Obj = usize;
    type Mor = PointedMap;

    fn source(&self, f: &PointedMap) -> usize {
        f.src
    }

    fn target(&self, f: &PointedMap) -> usize {
        f.dst
    }

    fn identity(&self, x: &usize) -> PointedMap {
        PointedMap::identity(*x)
    }

    fn compose(&self, f: &PointedMap, g: &PointedMap) -> Result<PointedMap, CatError> {
        compose_pointed(f, g).map_err(|e| CatError::NotComposable(e.to_string()))
    }
}

impl HomEnumerable for PointedSets {
    fn hom(&self, x: &usize, y: &usize) -> Vec<PointedMap> {
        PointedMap::all(*x, *y)
    }

    fn maybe_isomorphic(&self, x: &usize, y: &usize) -> bool {
        x == y
    }
}

/// `φ ∘ γ` for `γ: k₊ → m₊`, `φ: m₊ → n₊`.
pub fn compose_pointed(gamma: &PointedMap, phi: &PointedMap) -> Result<PointedMap, LabelError> {
    if gamma.dst != phi.src {
        return Err(LabelError::SizeMismatch(gamma.dst, phi.src));
    }
    Ok(PointedMap { src: gamma.src, dst: phi.dst, map: gamma.map.iter().map(|&j| phi.map[j]).collect() })
}
