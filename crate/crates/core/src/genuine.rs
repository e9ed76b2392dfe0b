//! G-forests, the orbit category, coset groupoids, retractive G-sets and
//! the iterated Grothendieck presentation of genuine G-trees.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::dendro::{attach, Attached, DendroError};
use crate::equivariant::{GLabeledTree, GPointedMap, GTree};
use crate::group::{Cosets, FiniteGroup, GSet, GroupError, Subgroup};
use crate::labeled::{hom_labeled, LabelError, LabeledTree, PointedMap};
use crate::omega::{compose, hom_set, MorphismError, TreeMorphism};
use crate::oplax::{CatError, Category, Functor, HomEnumerable, OplaxFunctor, TableCategory};
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenuineError {
    #[error("a forest needs at least one component")]
    Empty,
    #[error("action on the forest is not functorial at ({0}, {1})")]
    ActionNotFunctorial(usize, usize),
    #[error("component iso for element {0} at component {1} is invalid")]
    ComponentIsoInvalid(usize, usize),
    #[error("base action is not a coset action")]
    NotACosetAction,
    #[error("map is not equivariant")]
    NotEquivariant,
    #[error("map does not lie over the orbit")]
    NotOverBase,
    #[error("invalid labeling: {0}")]
    LabelsInvalid(String),
    #[error("orbits differ")]
    OrbitMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Dendro(#[from] DendroError),
}

fn cat(e: GenuineError) -> CatError {
    CatError::NotComposable(e.to_string())
}

/// A forest with a G-action: a permutation of the components and isos
/// `isos[g][i]: T_i → T_{g·i}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GForest {
    group: Arc<FiniteGroup>,
    components: Vec<Arc<Tree>>,
    base: Arc<Vec<Vec<usize>>>,
    isos: Arc<Vec<Vec<TreeMorphism>>>,
}

impl fmt::Debug for GForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let trees: Vec<String> = self.components.iter().map(|t| t.to_string()).collect();
        write!(f, "GForest({} {:?})", trees.join(" + "), self.base)
    }
}

fn check_forest(group: &FiniteGroup, components: &[Arc<Tree>], base: &[Vec<usize>], isos: &[Vec<TreeMorphism>]) -> Result<(), GenuineError> {
    let n = components.len();
    if n == 0 {
        return Err(GenuineError::Empty);
    }
    if base.len() != group.order() || isos.len() != group.order() {
        return Err(GenuineError::ActionNotFunctorial(0, 0));
    }
    for g in group.elements() {
        let seen: BTreeSet<usize> = base[g].iter().copied().collect();
        if base[g].len() != n || seen.len() != n || seen.iter().any(|&j| j >= n) || isos[g].len() != n {
            return Err(GenuineError::ActionNotFunctorial(g, g));
        }
        for i in 0..n {
            let f = &isos[g][i];
            if **f.src() != *components[i] || **f.dst() != *components[base[g][i]] || !f.is_isomorphism() {
                return Err(GenuineError::ComponentIsoInvalid(g, i));
            }
        }
    }
    if base[0].iter().enumerate().any(|(i, &j)| i != j) || isos[0].iter().any(|f| !f.is_identity()) {
        return Err(GenuineError::ActionNotFunctorial(0, 0));
    }
    for a in group.elements() {
        for b in group.elements() {
            let ab = group.mul(a, b);
            for i in 0..n {
                if base[ab][i] != base[a][base[b][i]] {
                    return Err(GenuineError::ActionNotFunctorial(a, b));
                }
                let two = compose(&isos[b][i], &isos[a][base[b][i]])?;
                if two.map() != isos[ab][i].map() {
                    return Err(GenuineError::ActionNotFunctorial(a, b));
                }
            }
        }
    }
    Ok(())
}

impl GForest {
    pub fn new(
        group: Arc<FiniteGroup>,
        components: Vec<Arc<Tree>>,
        base: Vec<Vec<usize>>,
        isos: Vec<Vec<TreeMorphism>>,
    ) -> Result<Self, GenuineError> {
        check_forest(&group, &components, &base, &isos)?;
        Ok(GForest { group, components, base: Arc::new(base), isos: Arc::new(isos) })
    }

    /// Closes an action given on generators: `(g, permutation, isos)`.
    pub fn from_generators(
        group: Arc<FiniteGroup>,
        components: Vec<Arc<Tree>>,
        gens: &[(usize, Vec<usize>, Vec<TreeMorphism>)],
    ) -> Result<Self, GenuineError> {
        let n = components.len();
        if n == 0 {
            return Err(GenuineError::Empty);
        }
        for (g, perm, isos) in gens {
            if perm.len() != n || isos.len() != n || perm.iter().any(|&j| j >= n) {
                return Err(GenuineError::ActionNotFunctorial(*g, *g));
            }
            for (i, f) in isos.iter().enumerate() {
                if **f.src() != *components[i] || **f.dst() != *components[perm[i]] {
                    return Err(GenuineError::ComponentIsoInvalid(*g, i));
                }
            }
        }
        let mut reached: Vec<Option<(Vec<usize>, Vec<TreeMorphism>)>> = vec![None; group.order()];
        reached[0] = Some(((0..n).collect(), components.iter().map(|t| TreeMorphism::identity(t.clone())).collect()));
        let mut frontier = vec![0];
        while let Some(a) = frontier.pop() {
            let (pa, ia) = reached[a].clone().expect("reached");
            for (g, pg, ig) in gens {
                let b = group.mul(*g, a);
                let pb: Vec<usize> = pa.iter().map(|&j| pg[j]).collect();
                let ib = (0..n).map(|i| compose(&ia[i], &ig[pa[i]])).collect::<Result<Vec<_>, _>>()?;
                match &reached[b] {
                    Some((p, is)) if *p != pb || is.iter().zip(&ib).any(|(x, y)| x.map() != y.map()) => {
                        return Err(GenuineError::ActionNotFunctorial(*g, a));
                    }
                    Some(_) => {}
                    None => {
                        reached[b] = Some((pb, ib));
                        frontier.push(b);
                    }
                }
            }
        }
        let (base, isos): (Vec<_>, Vec<_>) = reached
            .into_iter()
            .map(|r| r.ok_or(GenuineError::ActionNotFunctorial(0, 0)))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        GForest::new(group, components, base, isos)
    }

    /// A single tree with its action.
    pub fn from_gtree(t: &GTree) -> Self {
        let base = t.group().elements().map(|_| vec![0]).collect();
        let isos = t
            .group()
            .elements()
            .map(|g| vec![TreeMorphism::new_unchecked(t.tree().clone(), t.tree().clone(), t.action()[g].clone())])
            .collect();
        GForest { group: t.group().clone(), components: vec![t.tree().clone()], base: Arc::new(base), isos: Arc::new(isos) }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn components(&self) -> &[Arc<Tree>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn base(&self) -> &[Vec<usize>] {
        &self.base
    }

    pub fn iso(&self, g: usize, i: usize) -> &TreeMorphism {
        &self.isos[g][i]
    }

    /// The G-set of roots.
    pub fn root_gset(&self) -> GSet {
        GSet::new(self.group.clone(), self.base.to_vec(), None).expect("validated action")
    }

    /// Transitive on the roots.
    pub fn is_genuine(&self) -> bool {
        self.root_gset().is_transitive()
    }

    /// The subgroup `H` with roots literally the ordered orbit `G/H`.
    pub fn coset_subgroup(&self) -> Option<Subgroup> {
        let h = self.root_gset().stabilizer(0);
        let cosets = Cosets::new(&self.group, &h);
        (cosets.gset(&self.group).action() == &self.base[..]).then_some(h)
    }

    /// `T_{eH}` with the action of the stabilizer `H` of component 0.
    pub fn fiber_gtree(&self, h: &Subgroup) -> GTree {
        let group = Arc::new(self.group.restrict(h));
        let action = h.elements().iter().map(|&x| self.isos[x][0].map().to_vec()).collect();
        GTree::new_unchecked(self.components[0].clone(), group, action)
    }
}

/// Components indexed by `G/H`, all equal to the tree of `t`, with
/// translations `x̄: T_c → T_{xc}` acting by `rep(xc)⁻¹·x·rep(c) ∈ H`.
pub fn induce(group: &Arc<FiniteGroup>, h: &Subgroup, t: &GTree) -> GForest {
    let cosets = Cosets::new(group, h);
    let pos = |a: usize| h.elements().binary_search(&a).expect("element of H");
    let tree = t.tree();
    let base: Vec<Vec<usize>> = group.elements().map(|x| (0..cosets.len()).map(|c| cosets.act(group, x, c)).collect()).collect();
    let isos: Vec<Vec<TreeMorphism>> = group
        .elements()
        .map(|x| {
            (0..cosets.len())
                .map(|c| {
                    let d = base[x][c];
                    let k = group.mul(group.inv(cosets.rep(d)), group.mul(x, cosets.rep(c)));
                    TreeMorphism::new_unchecked(tree.clone(), tree.clone(), t.action()[pos(k)].clone())
                })
                .collect()
        })
        .collect();
    let components = vec![tree.clone(); cosets.len()];
    debug_assert!(check_forest(group, &components, &base, &isos).is_ok());
    GForest { group: group.clone(), components, base: Arc::new(base), isos: Arc::new(isos) }
}

/// A morphism of G-forests: an index map and one tree map per component.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ForestMorphism {
    pub index: Vec<usize>,
    pub maps: Vec<Vec<usize>>,
}

impl fmt::Debug for ForestMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}", self.index, self.maps)
    }
}

/// The squares `g ∘ f_i = f_{g·i} ∘ g` all commute.
pub fn is_forest_morphism(a: &GForest, b: &GForest, index: &[usize], maps: &[TreeMorphism]) -> bool {
    a.group == b.group
        && a.group.elements().all(|g| {
            (0..a.len()).all(|i| {
                let j = a.base[g][i];
                if index[j] != b.base[g][index[i]] {
                    return false;
                }
                let left = compose(&maps[i], &b.isos[g][index[i]]);
                let right = compose(&a.isos[g][i], &maps[j]);
                matches!((left, right), (Ok(l), Ok(r)) if l.map() == r.map() && l.dst() == r.dst())
            })
        })
}

/// All morphisms by brute force over every index map and every family of
/// component maps.
pub fn forest_hom(a: &GForest, b: &GForest) -> Vec<ForestMorphism> {
    let (n, m) = (a.len(), b.len());
    let homs: Vec<Vec<Vec<TreeMorphism>>> =
        a.components.iter().map(|t| b.components.iter().map(|s| hom_set(t, s)).collect()).collect();
    let mut out = Vec::new();
    let mut index = vec![0; n];
    loop {
        let mut choice = vec![0; n];
        if (0..n).all(|i| !homs[i][index[i]].is_empty()) {
            loop {
                let maps: Vec<TreeMorphism> = (0..n).map(|i| homs[i][index[i]][choice[i]].clone()).collect();
                if is_forest_morphism(a, b, &index, &maps) {
                    out.push(ForestMorphism { index: index.clone(), maps: maps.iter().map(|f| f.map().to_vec()).collect() });
                }
                if !odometer(&mut choice, |i| homs[i][index[i]].len()) {
                    break;
                }
            }
        }
        if !odometer(&mut index, |_| m) {
            break;
        }
    }
    out.sort();
    out
}

fn odometer(digits: &mut [usize], base: impl Fn(usize) -> usize) -> bool {
    for i in 0..digits.len() {
        digits[i] += 1;
        if digits[i] < base(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Equivariant maps `G/H → G/K`, by brute force.
pub fn orbit_hom(group: &FiniteGroup, a: &Cosets, b: &Cosets) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut map = vec![0; a.len()];
    loop {
        if group.elements().all(|x| (0..a.len()).all(|c| map[a.act(group, x, c)] == b.act(group, x, map[c]))) {
            out.push(map.clone());
        }
        if !odometer(&mut map, |_| b.len()) {
            return out;
        }
    }
}

/// Objects `G/H`, one per subgroup, and all equivariant maps between them.
#[derive(Debug, Clone)]
pub struct OrbitCategory {
    pub group: Arc<FiniteGroup>,
    pub objects: Vec<Arc<Cosets>>,
}

impl OrbitCategory {
    pub fn new(group: Arc<FiniteGroup>) -> Self {
        let objects = group.subgroups().iter().map(|h| Arc::new(Cosets::new(&group, h))).collect();
        OrbitCategory { group, objects }
    }

    pub fn hom(&self, a: usize, b: usize) -> Vec<Vec<usize>> {
        orbit_hom(&self.group, &self.objects[a], &self.objects[b])
    }
}

/// `x̄: c → x·c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Translation {
    pub by: usize,
    pub from: usize,
    pub to: usize,
}

/// The groupoid `G/H` of cosets and left translations.
#[derive(Debug, Clone)]
pub struct CosetGroupoid {
    pub group: Arc<FiniteGroup>,
    pub cosets: Cosets,
}

impl CosetGroupoid {
    pub fn new(group: Arc<FiniteGroup>, h: &Subgroup) -> Self {
        let cosets = Cosets::new(&group, h);
        CosetGroupoid { group, cosets }
    }

    pub fn objects(&self) -> Vec<usize> {
        (0..self.cosets.len()).collect()
    }
}

impl Category for CosetGroupoid {
    type Obj = usize;
    type Mor = Translation;

    fn source(&self, f: &Translation) -> usize {
        f.from
    }

    fn target(&self, f: &Translation) -> usize {
        f.to
    }

    fn identity(&self, x: &usize) -> Translation {
        Translation { by: 0, from: *x, to: *x }
    }

    fn compose(&self, f: &Translation, g: &Translation) -> Result<Translation, CatError> {
        if f.to != g.from {
            return Err(CatError::NotComposable(format!("{f:?} then {g:?}")));
        }
        Ok(Translation { by: self.group.mul(g.by, f.by), from: f.from, to: g.to })
    }
}

impl HomEnumerable for CosetGroupoid {
    fn hom(&self, x: &usize, y: &usize) -> Vec<Translation> {
        self.group
            .elements()
            .filter(|&g| self.cosets.act(&self.group, g, *x) == *y)
            .map(|g| Translation { by: g, from: *x, to: *y })
            .collect()
    }
}

/// `BH → G/H`: the point goes to `eH`, `h` to `h̄`.
pub struct IncludeStabilizer {
    pub elements: Vec<usize>,
}

impl IncludeStabilizer {
    pub fn one_object(group: &FiniteGroup, h: &Subgroup) -> (TableCategory, Self) {
        let restricted = group.restrict(h);
        let mult: Vec<Vec<usize>> =
            restricted.elements().map(|a| restricted.elements().map(|b| restricted.mul(a, b)).collect()).collect();
        (TableCategory::one_object(&mult), IncludeStabilizer { elements: h.elements().to_vec() })
    }
}

impl Functor<TableCategory, CosetGroupoid> for IncludeStabilizer {
    fn on_obj(&self, _x: &usize) -> usize {
        0
    }

    fn on_mor(&self, f: &usize) -> Translation {
        Translation { by: self.elements[*f], from: 0, to: 0 }
    }
}

/// The `(q, α)` description: `α_{eH}` is an `H`-equivariant map
/// `T_{eH} → S_{q(eH)}` and `α_{gH} = ḡ ∘ α_{eH} ∘ ḡ⁻¹`.
pub fn coset_forest_hom(a: &GForest, ha: &Cosets, b: &GForest, hb: &Cosets) -> Vec<ForestMorphism> {
    let group = &a.group;
    let mut out = Vec::new();
    for q in orbit_hom(group, ha, hb) {
        let d = q[0];
        for f in hom_set(&a.components[0], &b.components[d]) {
            let equivariant = ha.subgroup.elements().iter().all(|&h| {
                let left = compose(&a.isos[h][0], &f).expect("endpoints");
                let right = compose(&f, &b.isos[h][d]).expect("endpoints");
                left.map() == right.map()
            });
            if !equivariant {
                continue;
            }
            let maps = (0..ha.len())
                .map(|c| {
                    let r = ha.rep(c);
                    let back = &a.isos[group.inv(r)][c];
                    compose(back, &f).and_then(|x| compose(&x, &b.isos[r][d])).expect("endpoints").map().to_vec()
                })
                .collect();
            out.push(ForestMorphism { index: q.clone(), maps });
        }
    }
    out.sort();
    out
}

/// A G-set `A` with an equivariant map to `G/H`; `A₊ = A ⨿ G/H`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Retractive {
    cosets: Arc<Cosets>,
    labels: GSet,
    over: Vec<usize>,
}

impl fmt::Debug for Retractive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} over {:?}", self.labels, self.over)
    }
}

impl Retractive {
    pub fn new(cosets: Arc<Cosets>, labels: GSet, over: Vec<usize>) -> Result<Self, GenuineError> {
        let g = labels.group();
        if over.len() != labels.len() || over.iter().any(|&c| c >= cosets.len()) {
            return Err(GenuineError::NotOverBase);
        }
        if g.elements().any(|x| (0..labels.len()).any(|a| over[labels.act(x, a)] != cosets.act(g, x, over[a]))) {
            return Err(GenuineError::NotEquivariant);
        }
        Ok(Retractive { cosets, labels, over })
    }

    /// No labels.
    pub fn empty(group: &Arc<FiniteGroup>, cosets: Arc<Cosets>) -> Self {
        Retractive { cosets, labels: GSet::trivial(group.clone(), 0), over: Vec::new() }
    }

    /// `self ⨿ other` over the same orbit.
    pub fn disjoint_union(&self, other: &Retractive) -> Result<Self, GenuineError> {
        if self.cosets != other.cosets {
            return Err(GenuineError::OrbitMismatch);
        }
        let over = self.over.iter().chain(&other.over).copied().collect();
        Ok(Retractive { cosets: self.cosets.clone(), labels: self.labels.disjoint_union(&other.labels), over })
    }

    pub fn cosets(&self) -> &Arc<Cosets> {
        &self.cosets
    }

    pub fn labels(&self) -> &GSet {
        &self.labels
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.labels.group()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn over(&self, a: usize) -> usize {
        self.over[a]
    }

    /// Labels over `c`, increasing.
    pub fn fiber(&self, c: usize) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.over[a] == c).collect()
    }

    /// Position of `a` within its fiber.
    pub fn local(&self, a: usize) -> usize {
        (0..a).filter(|&b| self.over[b] == self.over[a]).count()
    }

    /// The fiber over `eH` as an `H`-set.
    pub fn fiber_gset(&self) -> GSet {
        let h = &self.cosets.subgroup;
        let fiber = self.fiber(0);
        let group = Arc::new(self.group().restrict(h));
        let action =
            h.elements().iter().map(|&x| fiber.iter().map(|&a| self.local(self.labels.act(x, a))).collect()).collect();
        GSet::new(group, action, None).expect("restricted action")
    }
}

/// An equivariant map `B₊ → A₊` over and under `G/H`; `None` is the
/// basepoint over `β(b)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RetractiveMap {
    src: Retractive,
    dst: Retractive,
    map: Vec<Option<usize>>,
}

impl fmt::Debug for RetractiveMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.map)
    }
}

impl RetractiveMap {
    pub fn new(src: Retractive, dst: Retractive, map: Vec<Option<usize>>) -> Result<Self, GenuineError> {
        if src.cosets != dst.cosets {
            return Err(GenuineError::OrbitMismatch);
        }
        if map.len() != src.len() || map.iter().flatten().any(|&a| a >= dst.len()) {
            return Err(GenuineError::NotOverBase);
        }
        if map.iter().enumerate().any(|(b, a)| a.is_some_and(|a| dst.over[a] != src.over[b])) {
            return Err(GenuineError::NotOverBase);
        }
        let g = src.group();
        let ok = g.elements().all(|x| {
            (0..src.len()).all(|b| map[src.labels.act(x, b)] == map[b].map(|a| dst.labels.act(x, a)))
        });
        if !ok {
            return Err(GenuineError::NotEquivariant);
        }
        Ok(RetractiveMap { src, dst, map })
    }

    pub fn identity(a: &Retractive) -> Self {
        RetractiveMap { src: a.clone(), dst: a.clone(), map: (0..a.len()).map(Some).collect() }
    }

    pub fn src(&self) -> &Retractive {
        &self.src
    }

    pub fn dst(&self) -> &Retractive {
        &self.dst
    }

    pub fn map(&self) -> &[Option<usize>] {
        &self.map
    }

    /// `φ|_{β⁻¹(c)}: β⁻¹(c) → α⁻¹(c)₊` in local numbering.
    pub fn local(&self, c: usize) -> PointedMap {
        let images: Vec<usize> =
            self.src.fiber(c).iter().map(|&b| self.map[b].map_or(0, |a| self.dst.local(a) + 1)).collect();
        PointedMap::new(images.len(), self.dst.fiber(c).len(), &images).expect("lies over c")
    }

    /// The restriction to the fibers over `eH`.
    pub fn fiber(&self) -> GPointedMap {
        GPointedMap::new(self.src.fiber_gset(), self.dst.fiber_gset(), self.local(0)).expect("restricted map")
    }
}

/// All maps `src₊ → dst₊` over and under `G/H`, orbit by orbit.
pub fn retractive_maps(src: &Retractive, dst: &Retractive) -> Vec<RetractiveMap> {
    if src.cosets != dst.cosets {
        return Vec::new();
    }
    let g = src.group();
    let orbits = src.labels.orbits();
    let mut out = Vec::new();
    let mut map: Vec<Option<usize>> = vec![None; src.len()];
    fn go(
        k: usize,
        orbits: &[Vec<usize>],
        src: &Retractive,
        dst: &Retractive,
        g: &FiniteGroup,
        map: &mut Vec<Option<usize>>,
        out: &mut Vec<RetractiveMap>,
    ) {
        if k == orbits.len() {
            out.push(RetractiveMap { src: src.clone(), dst: dst.clone(), map: map.clone() });
            return;
        }
        let b = orbits[k][0];
        let stab = src.labels.stabilizer(b);
        let targets = std::iter::once(None).chain(
            dst.fiber(src.over[b])
                .into_iter()
                .filter(|&a| stab.elements().iter().all(|&h| dst.labels.act(h, a) == a))
                .map(Some),
        );
        for t in targets {
            for x in g.elements() {
                map[src.labels.act(x, b)] = t.map(|a| dst.labels.act(x, a));
            }
            go(k + 1, orbits, src, dst, g, map, out);
        }
    }
    go(0, &orbits, src, dst, g, &mut map, &mut out);
    out.sort_by(|a, b| a.map.cmp(&b.map));
    out
}

/// Retractive G-sets over one orbit and the maps between them.
#[derive(Debug, Clone)]
pub struct RetractiveSets {
    pub cosets: Arc<Cosets>,
}

impl Category for RetractiveSets {
    type Obj = Retractive;
    type Mor = RetractiveMap;

    fn source(&self, f: &RetractiveMap) -> Retractive {
        f.src.clone()
    }

    fn target(&self, f: &RetractiveMap) -> Retractive {
        f.dst.clone()
    }

    fn identity(&self, x: &Retractive) -> RetractiveMap {
        RetractiveMap::identity(x)
    }

    fn compose(&self, f: &RetractiveMap, g: &RetractiveMap) -> Result<RetractiveMap, CatError> {
        if f.dst != g.src {
            return Err(CatError::NotComposable(format!("{f:?} then {g:?}")));
        }
        let map = f.map.iter().map(|a| a.and_then(|a| g.map[a])).collect();
        Ok(RetractiveMap { src: f.src.clone(), dst: g.dst.clone(), map })
    }
}

impl HomEnumerable for RetractiveSets {
    fn hom(&self, x: &Retractive, y: &Retractive) -> Vec<RetractiveMap> {
        retractive_maps(x, y)
    }

    fn maybe_isomorphic(&self, x: &Retractive, y: &Retractive) -> bool {
        x.len() == y.len()
    }
}

/// An object of `T^{G/H}(A, α)`: a G-forest over `G/H` whose tree over
/// `c` is labeled by `α⁻¹(c)` in local numbering.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledForest {
    forest: GForest,
    labels: Retractive,
    local: Vec<LabeledTree>,
}

impl fmt::Debug for LabeledForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}", self.local, self.forest.base)
    }
}

impl LabeledForest {
    pub fn new(forest: GForest, labels: Retractive, local: Vec<LabeledTree>) -> Result<Self, GenuineError> {
        let cosets = &labels.cosets;
        if forest.base[..] != *cosets.gset(&forest.group).action() || *forest.group != **labels.group() {
            return Err(GenuineError::NotACosetAction);
        }
        if local.len() != cosets.len() {
            return Err(GenuineError::LabelsInvalid("one labeled tree per coset".into()));
        }
        for (c, l) in local.iter().enumerate() {
            if **l.tree() != *forest.components[c] || l.n() != labels.fiber(c).len() {
                return Err(GenuineError::LabelsInvalid(format!("component {c}")));
            }
        }
        let ok = forest.group.elements().all(|x| {
            (0..labels.len()).all(|a| {
                let (c, xa) = (labels.over[a], labels.labels.act(x, a));
                let leaf = local[c].leaf(labels.local(a) + 1);
                forest.isos[x][c].apply(leaf) == local[labels.over[xa]].leaf(labels.local(xa) + 1)
            })
        });
        if !ok {
            return Err(GenuineError::LabelsInvalid("labeling is not equivariant".into()));
        }
        Ok(LabeledForest { forest, labels, local })
    }

    /// Leaves labeled by themselves, ordered by component then edge.
    pub fn canonical(forest: GForest, h: &Subgroup) -> Result<Self, GenuineError> {
        let cosets = Arc::new(Cosets::new(&forest.group, h));
        let leaves: Vec<(usize, usize)> =
            (0..forest.len()).flat_map(|c| forest.components[c].leaves().iter().map(move |&l| (c, l))).collect();
        let action = forest
            .group
            .elements()
            .map(|x| {
                leaves
                    .iter()
                    .map(|&(c, l)| {
                        let target = (forest.base[x][c], forest.isos[x][c].apply(l));
                        leaves.binary_search(&target).expect("isos carry leaves to leaves")
                    })
                    .collect()
            })
            .collect();
        let labels = GSet::new(forest.group.clone(), action, None)?;
        let labels = Retractive::new(cosets, labels, leaves.iter().map(|&(c, _)| c).collect())?;
        let local = forest.components.iter().map(|t| LabeledTree::canonical(t.clone())).collect();
        LabeledForest::new(forest, labels, local)
    }

    pub fn forest(&self) -> &GForest {
        &self.forest
    }

    pub fn labels(&self) -> &Retractive {
        &self.labels
    }

    pub fn local(&self) -> &[LabeledTree] {
        &self.local
    }

    /// The fiber over `eH`, an `H`-tree labeled by `α⁻¹(eH)`.
    pub fn fiber(&self) -> GLabeledTree {
        let gtree = self.forest.fiber_gtree(&self.labels.cosets.subgroup);
        GLabeledTree::new(gtree, self.local[0].clone(), self.labels.fiber_gset()).expect("restricted labeling")
    }
}

/// `φ*T = ⨿_c (φ|_{β⁻¹(c)})*(T_c)`, with the action extended to the new corollas.
pub fn phi_star_forest(phi: &RetractiveMap, t: &LabeledForest) -> Result<(LabeledForest, Vec<Attached>), GenuineError> {
    if phi.dst != t.labels {
        return Err(GenuineError::LabelsInvalid("label sets differ".into()));
    }
    let cosets = &t.labels.cosets;
    let attached = (0..cosets.len()).map(|c| attach(&phi.local(c), &t.local[c])).collect::<Result<Vec<_>, _>>()?;
    let src = &phi.src;
    let components: Vec<Arc<Tree>> = attached.iter().map(|a| a.tree.tree().clone()).collect();
    let isos: Vec<Vec<TreeMorphism>> = t
        .forest
        .group
        .elements()
        .map(|x| {
            (0..cosets.len())
                .map(|c| {
                    let d = t.forest.base[x][c];
                    let (from, to) = (&attached[c], &attached[d]);
                    let mut map = vec![0; from.tree.tree().edge_count()];
                    for (e, &k) in from.embedding.iter().enumerate() {
                        map[k] = to.embedding[t.forest.isos[x][c].apply(e)];
                    }
                    for (j, b) in src.fiber(c).into_iter().enumerate() {
                        let xb = src.labels.act(x, b);
                        map[from.tree.leaf(j + 1)] = to.tree.leaf(src.local(xb) + 1);
                    }
                    map[from.tree.tree().root()] = to.tree.tree().root();
                    TreeMorphism::new_unchecked(components[c].clone(), components[d].clone(), map)
                })
                .collect()
        })
        .collect();
    debug_assert!(check_forest(&t.forest.group, &components, &t.forest.base, &isos).is_ok());
    let forest = GForest { group: t.forest.group.clone(), components, base: t.forest.base.clone(), isos: Arc::new(isos) };
    let local = attached.iter().map(|a| a.tree.clone()).collect();
    Ok((LabeledForest { forest, labels: src.clone(), local }, attached))
}

/// A morphism of `T^{G/H}(A, α)`: label-preserving maps commuting with the action.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledForestMorphism {
    src: LabeledForest,
    dst: LabeledForest,
    maps: Vec<TreeMorphism>,
}

impl fmt::Debug for LabeledForestMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.maps)
    }
}

impl LabeledForestMorphism {
    pub fn src(&self) -> &LabeledForest {
        &self.src
    }

    pub fn dst(&self) -> &LabeledForest {
        &self.dst
    }

    pub fn maps(&self) -> &[TreeMorphism] {
        &self.maps
    }

    pub fn as_forest(&self) -> ForestMorphism {
        ForestMorphism { index: (0..self.maps.len()).collect(), maps: self.maps.iter().map(|f| f.map().to_vec()).collect() }
    }
}

/// All morphisms `x → y`, over every family of label-preserving maps.
pub fn labeled_forest_hom(x: &LabeledForest, y: &LabeledForest) -> Vec<LabeledForestMorphism> {
    if x.labels != y.labels {
        return Vec::new();
    }
    let n = x.local.len();
    let homs: Vec<Vec<TreeMorphism>> =
        (0..n).map(|c| hom_labeled(&x.local[c], &y.local[c]).unwrap_or_default()).collect();
    if homs.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let index: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    let mut choice = vec![0; n];
    loop {
        let maps: Vec<TreeMorphism> = (0..n).map(|c| homs[c][choice[c]].clone()).collect();
        if is_forest_morphism(&x.forest, &y.forest, &index, &maps) {
            out.push(LabeledForestMorphism { src: x.clone(), dst: y.clone(), maps });
        }
        if !odometer(&mut choice, |c| homs[c].len()) {
            return out;
        }
    }
}

/// The disjoint union of the categories `T^{G/H}(A, α)` over one orbit.
#[derive(Debug, Clone, Copy, Default)]
pub struct LabeledForests;

impl Category for LabeledForests {
    type Obj = LabeledForest;
    type Mor = LabeledForestMorphism;

    fn source(&self, f: &LabeledForestMorphism) -> LabeledForest {
        f.src.clone()
    }

    fn target(&self, f: &LabeledForestMorphism) -> LabeledForest {
        f.dst.clone()
    }

    fn identity(&self, x: &LabeledForest) -> LabeledForestMorphism {
        let maps = x.forest.components.iter().map(|t| TreeMorphism::identity(t.clone())).collect();
        LabeledForestMorphism { src: x.clone(), dst: x.clone(), maps }
    }

    fn compose(&self, f: &LabeledForestMorphism, g: &LabeledForestMorphism) -> Result<LabeledForestMorphism, CatError> {
        if f.dst != g.src {
            return Err(CatError::NotComposable(format!("{f:?} then {g:?}")));
        }
        let maps = f
            .maps
            .iter()
            .zip(&g.maps)
            .map(|(a, b)| compose(a, b))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CatError::NotComposable(e.to_string()))?;
        Ok(LabeledForestMorphism { src: f.src.clone(), dst: g.dst.clone(), maps })
    }
}

impl HomEnumerable for LabeledForests {
    fn hom(&self, x: &LabeledForest, y: &LabeledForest) -> Vec<LabeledForestMorphism> {
        labeled_forest_hom(x, y)
    }
}

/// `T^{G/H}` over one orbit, with τ computed componentwise.
#[derive(Debug, Clone)]
pub struct ForestFunctor {
    base: RetractiveSets,
    fiber: LabeledForests,
}

impl ForestFunctor {
    pub fn new(cosets: Arc<Cosets>) -> Self {
        ForestFunctor { base: RetractiveSets { cosets }, fiber: LabeledForests }
    }

    fn transported(
        from: &(LabeledForest, Vec<Attached>),
        dst: &LabeledForest,
        old: impl Fn(usize, usize) -> usize,
    ) -> LabeledForestMorphism {
        let maps = from
            .1
            .iter()
            .enumerate()
            .map(|(c, a)| {
                let tree = a.tree.tree();
                let mut map = vec![0; tree.edge_count()];
                for (e, &k) in a.embedding.iter().enumerate() {
                    map[k] = old(c, e);
                }
                for j in 1..=a.tree.n() {
                    map[a.tree.leaf(j)] = dst.local[c].leaf(j);
                }
                map[tree.root()] = dst.forest.components[c].root();
                TreeMorphism::new_unchecked(tree.clone(), dst.forest.components[c].clone(), map)
            })
            .collect();
        LabeledForestMorphism { src: from.0.clone(), dst: dst.clone(), maps }
    }
}

impl OplaxFunctor for ForestFunctor {
    type Base = RetractiveSets;
    type Fiber = LabeledForests;

    fn base(&self) -> &RetractiveSets {
        &self.base
    }

    fn fiber(&self) -> &LabeledForests {
        &self.fiber
    }

    fn apply_obj(&self, f: &RetractiveMap, x: &LabeledForest) -> Result<LabeledForest, CatError> {
        Ok(phi_star_forest(f, x).map_err(cat)?.0)
    }

    fn apply_mor(&self, f: &RetractiveMap, alpha: &LabeledForestMorphism) -> Result<LabeledForestMorphism, CatError> {
        let x = phi_star_forest(f, &alpha.src).map_err(cat)?;
        let y = phi_star_forest(f, &alpha.dst).map_err(cat)?;
        Ok(Self::transported(&x, &y.0, |c, e| y.1[c].embedding[alpha.maps[c].apply(e)]))
    }

    fn tau_comp(&self, f: &RetractiveMap, g: &RetractiveMap, x: &LabeledForest) -> Result<LabeledForestMorphism, CatError> {
        let gf = self.base.compose(f, g)?;
        let direct = phi_star_forest(&gf, x).map_err(cat)?;
        let a = phi_star_forest(g, x).map_err(cat)?;
        let b = phi_star_forest(f, &a.0).map_err(cat)?;
        Ok(Self::transported(&direct, &b.0, |c, e| b.1[c].embedding[a.1[c].embedding[e]]))
    }

    fn tau_id(&self, a: &Retractive, x: &LabeledForest) -> Result<LabeledForestMorphism, CatError> {
        if *a != x.labels {
            return Err(CatError::NotComposable("label set mismatch".into()));
        }
        let direct = phi_star_forest(&RetractiveMap::identity(a), x).map_err(cat)?;
        Ok(Self::transported(&direct, x, |_, e| e))
    }
}

/// A morphism `(φ, f)` of `∫T^{G/H}`: `φ: B₊ → A₊` and `f: φ*T → S`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledForestPair {
    pub phi: RetractiveMap,
    pub f: LabeledForestMorphism,
}

impl fmt::Debug for LabeledForestPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.phi, self.f)
    }
}

/// `Hom_{∫T^{G/H}}(x, y)`.
pub fn labeled_groth_hom(x: &LabeledForest, y: &LabeledForest) -> Vec<LabeledForestPair> {
    let mut out = Vec::new();
    for phi in retractive_maps(&y.labels, &x.labels) {
        let Ok((a, _)) = phi_star_forest(&phi, x) else { continue };
        for f in labeled_forest_hom(&a, y) {
            out.push(LabeledForestPair { phi: phi.clone(), f });
        }
    }
    out
}

/// `η(φ, f) = f ∘ ι`, componentwise.
pub fn eta(x: &LabeledForest, m: &LabeledForestPair) -> Result<ForestMorphism, GenuineError> {
    let (_, attached) = phi_star_forest(&m.phi, x)?;
    let maps = attached.iter().zip(&m.f.maps).map(|(a, f)| a.embedding.iter().map(|&k| f.apply(k)).collect()).collect();
    Ok(ForestMorphism { index: (0..attached.len()).collect(), maps })
}

/// `fib_{eH}` on morphisms.
pub fn fiber_morphism(x: &LabeledForest, m: &LabeledForestPair) -> Result<(GPointedMap, TreeMorphism), GenuineError> {
    let (a, _) = phi_star_forest(&m.phi, x)?;
    debug_assert_eq!(a.fiber().labeled(), m.f.src.fiber().labeled());
    Ok((m.phi.fiber(), m.f.maps[0].clone()))
}

/// A map of orbits `q: G/H → G/K`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OrbitMap {
    pub src: Arc<Cosets>,
    pub dst: Arc<Cosets>,
    pub map: Vec<usize>,
}

impl fmt::Debug for OrbitMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.map)
    }
}

impl OrbitMap {
    pub fn new(group: &FiniteGroup, src: Arc<Cosets>, dst: Arc<Cosets>, map: Vec<usize>) -> Result<Self, GenuineError> {
        let ok = map.len() == src.len()
            && group.elements().all(|x| (0..src.len()).all(|c| map[src.act(group, x, c)] == dst.act(group, x, map[c])));
        if !ok {
            return Err(GenuineError::NotEquivariant);
        }
        Ok(OrbitMap { src, dst, map })
    }

    pub fn is_identity(&self) -> bool {
        self.src == self.dst && self.map.iter().enumerate().all(|(c, &d)| c == d)
    }

    /// `p ∘ self`.
    pub fn then(&self, p: &OrbitMap) -> Result<OrbitMap, GenuineError> {
        if self.dst != p.src {
            return Err(GenuineError::OrbitMismatch);
        }
        Ok(OrbitMap { src: self.src.clone(), dst: p.dst.clone(), map: self.map.iter().map(|&d| p.map[d]).collect() })
    }
}

/// `q*B = {(c, b) : q(c) = β(b)}` in lexicographic order, with the
/// position of each pair's `b`; the pullback along an identity is `B`.
pub fn pullback_labels(q: &OrbitMap, b: &Retractive) -> (Retractive, Vec<usize>) {
    if q.is_identity() {
        return (b.clone(), (0..b.len()).collect());
    }
    let g = b.group();
    let pairs: Vec<(usize, usize)> =
        (0..q.src.len()).flat_map(|c| (0..b.len()).filter(move |&x| q.map[c] == b.over[x]).map(move |x| (c, x))).collect();
    let action = g
        .elements()
        .map(|x| {
            pairs
                .iter()
                .map(|&(c, l)| pairs.binary_search(&(q.src.act(g, x, c), b.labels.act(x, l))).expect("closed"))
                .collect()
        })
        .collect();
    let labels = GSet::new(g.clone(), action, None).expect("pullback action");
    let over = pairs.iter().map(|&(c, _)| c).collect();
    let proj = pairs.iter().map(|&(_, l)| l).collect();
    (Retractive { cosets: q.src.clone(), labels, over }, proj)
}

/// `q*` on objects of `∫T^{G/K}`: `(q*S)_c = S_{q(c)}`.
pub fn pullback_object(q: &OrbitMap, s: &LabeledForest) -> LabeledForest {
    if q.is_identity() {
        return s.clone();
    }
    let (labels, _) = pullback_labels(q, &s.labels);
    let components = q.map.iter().map(|&d| s.forest.components[d].clone()).collect();
    let group = &s.forest.group;
    let base = group.elements().map(|x| (0..q.src.len()).map(|c| q.src.act(group, x, c)).collect()).collect();
    let isos = group.elements().map(|x| q.map.iter().map(|&d| s.forest.isos[x][d].clone()).collect()).collect();
    let forest = GForest { group: group.clone(), components, base: Arc::new(base), isos: Arc::new(isos) };
    let local = q.map.iter().map(|&d| s.local[d].clone()).collect();
    let out = LabeledForest { forest, labels, local };
    debug_assert!(LabeledForest::new(out.forest.clone(), out.labels.clone(), out.local.clone()).is_ok());
    out
}

/// `q*` on morphisms of `∫T^{G/K}`.
pub fn pullback_morphism(q: &OrbitMap, x: &LabeledForest, m: &LabeledForestPair) -> Result<LabeledForestPair, GenuineError> {
    if q.is_identity() {
        return Ok(m.clone());
    }
    let (src, proj) = pullback_labels(q, &m.phi.src);
    let (dst, _) = pullback_labels(q, &m.phi.dst);
    let map: Vec<Option<usize>> = (0..src.len())
        .map(|k| {
            let c = src.over[k];
            m.phi.map[proj[k]].map(|a| {
                let fib = dst.fiber(c);
                fib[m.phi.dst.local(a)]
            })
        })
        .collect();
    let phi = RetractiveMap::new(src, dst, map)?;
    let (a, _) = phi_star_forest(&phi, &pullback_object(q, x))?;
    let y = pullback_object(q, &m.f.dst);
    let maps = q.map.iter().map(|&d| m.f.maps[d].clone()).collect();
    Ok(LabeledForestPair { phi, f: LabeledForestMorphism { src: a, dst: y, maps } })
}

/// `q*` on morphisms of `Ω^{G/K}` (identity index maps).
pub fn pullback_forest_morphism(q: &OrbitMap, m: &ForestMorphism) -> ForestMorphism {
    ForestMorphism { index: (0..q.src.len()).collect(), maps: q.map.iter().map(|&d| m.maps[d].clone()).collect() }
}

/// A morphism `(q, φ, f)` of the iterated construction: `q: G/H → G/K`,
/// then `(φ, f): (α, T) → q*(β, S)` in `∫T^{G/H}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IteratedMorphism {
    pub q: OrbitMap,
    pub inner: LabeledForestPair,
}

impl fmt::Debug for IteratedMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.q, self.inner)
    }
}

/// All morphisms `x → y` of the iterated construction.
pub fn iterated_hom(x: &LabeledForest, y: &LabeledForest) -> Vec<IteratedMorphism> {
    let group = &x.forest.group;
    let (hx, hy) = (&x.labels.cosets, &y.labels.cosets);
    let mut out = Vec::new();
    for map in orbit_hom(group, hx, hy) {
        let q = OrbitMap { src: hx.clone(), dst: hy.clone(), map };
        let target = pullback_object(&q, y);
        for inner in labeled_groth_hom(x, &target) {
            out.push(IteratedMorphism { q: q.clone(), inner });
        }
    }
    out
}

/// The comparison to `Ω_G`: `(q, φ, f) ↦ (q, η(φ, f))`.
pub fn iterated_to_forest(x: &LabeledForest, m: &IteratedMorphism) -> Result<ForestMorphism, GenuineError> {
    let e = eta(x, &m.inner)?;
    Ok(ForestMorphism { index: m.q.map.clone(), maps: e.maps })
}
