//! The oplax functor T : F*^op → Cat, its structure cells and the comparison F : ∫T → Ω.

use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::labeled::{compose_pointed, LabelError, LabeledMorphism, LabeledTree, LabeledTrees, PointedMap, PointedSets};
use crate::omega::{compose, MorphismError, Omega, TreeMorphism};
use crate::oplax::{CatError, Functor, GrothMorphism, GrothObject, OplaxFunctor, OplaxGroth};
use crate::tree::{Tree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DendroError {
    #[error("pointed map has target size {0} but the tree has {1} labels")]
    ArityMismatch(usize, usize),
    #[error("label {0} lies below the images of two distinct leaves")]
    OverlappingPreimages(usize),
    #[error("lifted fiber map is not a morphism: {0}")]
    LiftInvalid(String),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Cat(#[from] CatError),
}

/// `φ*(T)` together with the inclusion of the edges of `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attached {
    pub tree: LabeledTree,
    pub embedding: Vec<usize>,
}

/// Grafts a `φ⁻¹(i)`-corolla on the leaf labeled `i` and a `φ⁻¹(+)`-corolla
/// below the root. New leaves are named `<site>.<j>`, the new root `<root>.+`.
pub fn attach(phi: &PointedMap, t: &LabeledTree) -> Result<Attached, DendroError> {
    if phi.dst() != t.n() {
        return Err(DendroError::ArityMismatch(phi.dst(), t.n()));
    }
    let tree = t.tree();
    let mut names: Vec<String> = tree.names().to_vec();
    let old = names.len();
    let fresh = |names: &[String], mut s: String| {
        while tree.names().binary_search(&s).is_ok() || names[old..].contains(&s) {
            s.push('\'');
        }
        s
    };
    let mut verts = tree.vertex_pairs();
    let mut labels = vec![0; phi.src()];
    let mut grow = |names: &mut Vec<String>, site: usize, j: usize| {
        let k = names.len();
        let s = fresh(names, format!("{}.{j}", tree.name(site)));
        names.push(s);
        labels[j - 1] = k;
        k
    };
    for i in 1..=t.n() {
        let site = t.leaf(i);
        let ins = phi.preimage(i).into_iter().map(|j| grow(&mut names, site, j)).collect();
        verts.push((site, ins));
    }
    let r = tree.root();
    let mut ins = vec![r];
    for j in phi.preimage(0) {
        ins.push(grow(&mut names, r, j));
    }
    let new_root = names.len();
    let s = fresh(&names, format!("{}.+", tree.name(r)));
    names.push(s);
    verts.push((new_root, ins));
    let (built, pos) = Tree::build_indexed(names, new_root, verts)?;
    let labels = labels.into_iter().map(|k| pos[k]).collect();
    Ok(Attached {
        tree: LabeledTree::new_unchecked(Arc::new(built), labels),
        embedding: pos[..tree.edge_count()].to_vec(),
    })
}

pub fn phi_star(phi: &PointedMap, t: &LabeledTree) -> Result<LabeledTree, DendroError> {
    Ok(attach(phi, t)?.tree)
}

/// The composite of outer faces `T → φ*(T)`.
pub fn iota(phi: &PointedMap, t: &LabeledTree) -> Result<TreeMorphism, DendroError> {
    let a = attach(phi, t)?;
    Ok(TreeMorphism::new_unchecked(t.tree().clone(), a.tree.tree().clone(), a.embedding))
}

/// Edge map out of `φ*(T)`: old edges by `old`, labeled leaves to labeled leaves, root to root.
fn transport(src: &Attached, dst: &LabeledTree, old: impl Fn(usize) -> usize) -> Vec<usize> {
    let x = src.tree.tree();
    let mut map = vec![usize::MAX; x.edge_count()];
    for (e, &k) in src.embedding.iter().enumerate() {
        map[k] = old(e);
    }
    for j in 1..=src.tree.n() {
        map[src.tree.leaf(j)] = dst.leaf(j);
    }
    map[x.root()] = dst.tree().root();
    debug_assert!(map.iter().all(|&y| y != usize::MAX));
    map
}

fn labeled_map(src: &Attached, dst: &LabeledTree, map: Vec<usize>) -> LabeledMorphism {
    let mor = TreeMorphism::new_unchecked(src.tree.tree().clone(), dst.tree().clone(), map);
    LabeledMorphism::new_unchecked(src.tree.clone(), dst.clone(), mor)
}

type Attach<'a> = &'a dyn Fn(&PointedMap, &LabeledTree) -> Result<Arc<Attached>, DendroError>;

fn phi_star_mor_with(at: Attach<'_>, phi: &PointedMap, f: &LabeledMorphism) -> Result<LabeledMorphism, DendroError> {
    let x = at(phi, f.src())?;
    let y = at(phi, f.dst())?;
    let map = transport(&x, &y.tree, |e| y.embedding[f.mor().apply(e)]);
    Ok(labeled_map(&x, &y.tree, map))
}

fn tau_id_with(at: Attach<'_>, t: &LabeledTree) -> Result<LabeledMorphism, DendroError> {
    let x = at(&PointedMap::identity(t.n()), t)?;
    Ok(labeled_map(&x, t, transport(&x, t, |e| e)))
}

fn tau_comp_with(at: Attach<'_>, gamma: &PointedMap, phi: &PointedMap, t: &LabeledTree) -> Result<LabeledMorphism, DendroError> {
    let x = at(&compose_pointed(gamma, phi)?, t)?;
    let a = at(phi, t)?;
    let b = at(gamma, &a.tree)?;
    Ok(labeled_map(&x, &b.tree, transport(&x, &b.tree, |e| b.embedding[a.embedding[e]])))
}

fn fresh(phi: &PointedMap, t: &LabeledTree) -> Result<Arc<Attached>, DendroError> {
    attach(phi, t).map(Arc::new)
}

/// `φ*(f)`: `f` on old edges, the identity on attached corollas.
pub fn phi_star_mor(phi: &PointedMap, f: &LabeledMorphism) -> Result<LabeledMorphism, DendroError> {
    phi_star_mor_with(&fresh, phi, f)
}

/// `(τ_n)_T : id*(T) → T`, removing the attached unary vertices.
pub fn tau_id(t: &LabeledTree) -> Result<LabeledMorphism, DendroError> {
    tau_id_with(&fresh, t)
}

/// `(τ_{γ,φ})_T : (φγ)*(T) → γ*(φ*(T))`, contracting the edges attached by `φ*`.
pub fn tau_comp(gamma: &PointedMap, phi: &PointedMap, t: &LabeledTree) -> Result<LabeledMorphism, DendroError> {
    tau_comp_with(&fresh, gamma, phi, t)
}

pub type GrothTreeObject = GrothObject<usize, LabeledTree>;
pub type GrothTreeMorphism = GrothMorphism<usize, LabeledTree, PointedMap, LabeledMorphism>;

pub fn groth_object(t: LabeledTree) -> GrothTreeObject {
    GrothObject { base: t.n(), fiber: t }
}

/// `F(φ, f) = f ∘ ι_{φ,T}`.
pub fn f_functor(m: &GrothTreeMorphism) -> Result<TreeMorphism, DendroError> {
    let i = iota(&m.base, &m.src.fiber)?;
    Ok(compose(&i, m.fiber.mor())?)
}

/// The unique `(φ, g)` with `F(φ, g) = f`.
pub fn lift_morphism(f: &TreeMorphism, t: &LabeledTree, s: &LabeledTree) -> Result<GrothTreeMorphism, DendroError> {
    if **f.src() != **t.tree() || **f.dst() != **s.tree() {
        return Err(MorphismError::SourceTargetMismatch.into());
    }
    let st = s.tree();
    let mut images = vec![0; s.n()];
    for (j, image) in images.iter_mut().enumerate() {
        let leaf = s.leaf(j + 1);
        let mut over = (1..=t.n()).filter(|&i| st.le(leaf, f.apply(t.leaf(i))));
        if let Some(i) = over.next() {
            if over.next().is_some() {
                return Err(DendroError::OverlappingPreimages(j + 1));
            }
            *image = i;
        }
    }
    let phi = PointedMap::new(s.n(), t.n(), &images)?;
    let x = attach(&phi, t)?;
    let map = transport(&x, s, |e| f.apply(e));
    let mor = TreeMorphism::new(x.tree.tree().clone(), st.clone(), map).map_err(|e| DendroError::LiftInvalid(e.to_string()))?;
    let fiber = LabeledMorphism::new(x.tree, s.clone(), mor).map_err(|e| DendroError::LiftInvalid(e.to_string()))?;
    Ok(GrothMorphism { src: groth_object(t.clone()), dst: groth_object(s.clone()), base: phi, fiber })
}

const CACHE_LIMIT: usize = 1 << 16;

/// T as an oplax functor, memoizing `φ*`.
#[derive(Default)]
pub struct TreeFunctor {
    base: PointedSets,
    fiber: LabeledTrees,
    cache: Mutex<FxHashMap<(PointedMap, usize, Vec<usize>), (Arc<Tree>, Arc<Attached>)>>,
}

impl TreeFunctor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn attach(&self, phi: &PointedMap, t: &LabeledTree) -> Result<Arc<Attached>, DendroError> {
        // keyed by address; the entry keeps its tree alive
        let key = (phi.clone(), Arc::as_ptr(t.tree()) as usize, t.labels().to_vec());
        if let Some((_, a)) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(a.clone());
        }
        let a = Arc::new(attach(phi, t)?);
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, (t.tree().clone(), a.clone()));
        Ok(a)
    }

    fn at(&self) -> impl Fn(&PointedMap, &LabeledTree) -> Result<Arc<Attached>, DendroError> + '_ {
        move |p, t| self.attach(p, t)
    }

    pub fn tau_comp(&self, gamma: &PointedMap, phi: &PointedMap, t: &LabeledTree) -> Result<LabeledMorphism, DendroError> {
        tau_comp_with(&self.at(), gamma, phi, t)
    }

    pub fn tau_id(&self, t: &LabeledTree) -> Result<LabeledMorphism, DendroError> {
        tau_id_with(&self.at(), t)
    }

    pub fn phi_star_mor(&self, phi: &PointedMap, f: &LabeledMorphism) -> Result<LabeledMorphism, DendroError> {
        phi_star_mor_with(&self.at(), phi, f)
    }
}

fn cat(e: DendroError) -> CatError {
    match e {
        DendroError::Cat(c) => c,
        e => CatError::NotComposable(e.to_string()),
    }
}

impl OplaxFunctor for TreeFunctor {
    type Base = PointedSets;
    type Fiber = LabeledTrees;

    fn base(&self) -> &PointedSets {
        &self.base
    }

    fn fiber(&self) -> &LabeledTrees {
        &self.fiber
    }

    fn apply_obj(&self, f: &PointedMap, x: &LabeledTree) -> Result<LabeledTree, CatError> {
        self.attach(f, x).map(|a| a.tree.clone()).map_err(cat)
    }

    fn apply_mor(&self, f: &PointedMap, alpha: &LabeledMorphism) -> Result<LabeledMorphism, CatError> {
        self.phi_star_mor(f, alpha).map_err(cat)
    }

    fn tau_comp(&self, f: &PointedMap, g: &PointedMap, x: &LabeledTree) -> Result<LabeledMorphism, CatError> {
        TreeFunctor::tau_comp(self, f, g, x).map_err(cat)
    }

    fn tau_id(&self, a: &usize, x: &LabeledTree) -> Result<LabeledMorphism, CatError> {
        if *a != x.n() {
            return Err(cat(DendroError::ArityMismatch(*a, x.n())));
        }
        TreeFunctor::tau_id(self, x).map_err(cat)
    }
}

/// The comparison functor `∫T → Ω`.
pub struct Comparison;

impl Functor<OplaxGroth<TreeFunctor>, Omega> for Comparison {
    fn on_obj(&self, x: &GrothTreeObject) -> Arc<Tree> {
        x.fiber.tree().clone()
    }

    fn on_mor(&self, m: &GrothTreeMorphism) -> TreeMorphism {
        f_functor(m).expect("composable by construction")
    }
}

impl Functor<OplaxGroth<&TreeFunctor>, Omega> for Comparison {
    fn on_obj(&self, x: &GrothTreeObject) -> Arc<Tree> {
        x.fiber.tree().clone()
    }

    fn on_mor(&self, m: &GrothTreeMorphism) -> TreeMorphism {
        f_functor(m).expect("composable by construction")
    }
}
