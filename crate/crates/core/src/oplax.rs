//! Categories, oplax functors into Cat and their Grothendieck constructions.

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::marker::PhantomData;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatError {
    #[error("morphisms are not composable: {0}")]
    NotComposable(String),
    #[error("endpoints do not match: {0}")]
    EndpointMismatch(String),
    #[error("structure cell is not invertible: {0}")]
    TauNotInvertible(String),
}

pub trait Category {
    type Obj: Clone + Eq + Hash + Debug + Send + Sync;
    type Mor: Clone + Eq + Hash + Debug + Send + Sync;

    fn source(&self, f: &Self::Mor) -> Self::Obj;
    fn target(&self, f: &Self::Mor) -> Self::Obj;
    fn identity(&self, x: &Self::Obj) -> Self::Mor;
    /// `g ∘ f`.
    fn compose(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor, CatError>;
}

pub trait HomEnumerable: Category {
    fn hom(&self, x: &Self::Obj, y: &Self::Obj) -> Vec<Self::Mor>;

    /// A cheap necessary condition for `x ≅ y`.
    fn maybe_isomorphic(&self, _x: &Self::Obj, _y: &Self::Obj) -> bool {
        true
    }
}

pub trait FiniteCategory: HomEnumerable {
    fn objects(&self) -> Vec<Self::Obj>;
}

pub fn is_isomorphism<C: HomEnumerable>(c: &C, f: &C::Mor) -> bool {
    inverse(c, f).is_some()
}

pub fn inverse<C: HomEnumerable>(c: &C, f: &C::Mor) -> Option<C::Mor> {
    let (x, y) = (c.source(f), c.target(f));
    c.hom(&y, &x).into_iter().find(|g| {
        c.compose(f, g).is_ok_and(|h| h == c.identity(&x)) && c.compose(g, f).is_ok_and(|h| h == c.identity(&y))
    })
}

/// A functor `C → D` given on objects and morphisms.
pub trait Functor<C: Category, D: Category> {
    fn on_obj(&self, x: &C::Obj) -> D::Obj;
    fn on_mor(&self, f: &C::Mor) -> D::Mor;
}

pub struct FnFunctor<O, M> {
    pub obj: O,
    pub mor: M,
}

impl<C, D, O, M> Functor<C, D> for FnFunctor<O, M>
where
    C: Category,
    D: Category,
    O: Fn(&C::Obj) -> D::Obj,
    M: Fn(&C::Mor) -> D::Mor,
{
    fn on_obj(&self, x: &C::Obj) -> D::Obj {
        (self.obj)(x)
    }

    fn on_mor(&self, f: &C::Mor) -> D::Mor {
        (self.mor)(f)
    }
}

/// `(α·F)_a = α_{F(a)}`.
pub fn whisker_left<A, X, M>(alpha: impl Fn(&X) -> M, f: impl Fn(&A) -> X) -> impl Fn(&A) -> M {
    move |a| alpha(&f(a))
}

/// `(H·α)_b = H(α_b)`.
pub fn whisker_right<B, M, N>(h: impl Fn(&M) -> N, alpha: impl Fn(&B) -> M) -> impl Fn(&B) -> N {
    move |b| h(&alpha(b))
}

/// Whether `β_x ∘ F(m)`-style naturality holds: `G(m) ∘ α_x = α_y ∘ F(m)`.
pub fn naturality_square<C: Category>(
    c: &C,
    alpha_x: &C::Mor,
    alpha_y: &C::Mor,
    f_m: &C::Mor,
    g_m: &C::Mor,
) -> Result<bool, CatError> {
    Ok(c.compose(alpha_x, g_m)? == c.compose(f_m, alpha_y)?)
}

/// An oplax functor `A^op → Cat`. All fibers live in one ambient category.
pub trait OplaxFunctor {
    type Base: Category;
    type Fiber: Category;

    fn base(&self) -> &Self::Base;
    fn fiber(&self) -> &Self::Fiber;
    /// `F(f)(x)` for `f: a → b`, `x ∈ F(b)`.
    fn apply_obj(&self, f: &BMor<Self>, x: &FObj<Self>) -> Result<FObj<Self>, CatError>;
    fn apply_mor(&self, f: &BMor<Self>, alpha: &FMor<Self>) -> Result<FMor<Self>, CatError>;
    /// `(τ_{f,g})_x : F(gf)(x) → F(f)F(g)(x)` for `a →f b →g c`, `x ∈ F(c)`.
    fn tau_comp(&self, f: &BMor<Self>, g: &BMor<Self>, x: &FObj<Self>) -> Result<FMor<Self>, CatError>;
    /// `(τ_a)_x : F(id_a)(x) → x`.
    fn tau_id(&self, a: &BObj<Self>, x: &FObj<Self>) -> Result<FMor<Self>, CatError>;
}

pub trait PseudoFunctor: OplaxFunctor {
    fn tau_comp_inv(&self, f: &BMor<Self>, g: &BMor<Self>, x: &FObj<Self>) -> Result<FMor<Self>, CatError>;
    fn tau_id_inv(&self, a: &BObj<Self>, x: &FObj<Self>) -> Result<FMor<Self>, CatError>;
}

pub type BObj<F> = <<F as OplaxFunctor>::Base as Category>::Obj;
pub type BMor<F> = <<F as OplaxFunctor>::Base as Category>::Mor;
pub type FObj<F> = <<F as OplaxFunctor>::Fiber as Category>::Obj;
pub type FMor<F> = <<F as OplaxFunctor>::Fiber as Category>::Mor;

fn composable<C: Category>(c: &C, f: &C::Mor, g: &C::Mor) -> Result<(), CatError> {
    if c.target(f) != c.source(g) {
        return Err(CatError::NotComposable(format!("{f:?} then {g:?}")));
    }
    Ok(())
}

/// Associativity square at `x` for `a →f b →g c →h d`, and both unit
/// triangles for `h` at `x`, for `g` at `F(h)x` and for `f` at `F(g)F(h)x`.
pub fn check_oplax_coherence<F: OplaxFunctor + ?Sized>(
    func: &F,
    f: &BMor<F>,
    g: &BMor<F>,
    h: &BMor<F>,
    x: &FObj<F>,
) -> Result<bool, CatError> {
    if !check_associativity(func, f, g, h, x)? {
        return Ok(false);
    }
    let hx = func.apply_obj(h, x)?;
    let ghx = func.apply_obj(g, &hx)?;
    Ok(check_unit_triangles(func, h, x)? && check_unit_triangles(func, g, &hx)? && check_unit_triangles(func, f, &ghx)?)
}

/// The associativity square at `x` for `a →f b →g c →h d`.
pub fn check_associativity<F: OplaxFunctor + ?Sized>(
    func: &F,
    f: &BMor<F>,
    g: &BMor<F>,
    h: &BMor<F>,
    x: &FObj<F>,
) -> Result<bool, CatError> {
    let base = func.base();
    let fib = func.fiber();
    composable(base, f, g)?;
    composable(base, g, h)?;
    let gf = base.compose(f, g)?;
    let hg = base.compose(g, h)?;
    let top = fib.compose(&func.tau_comp(&gf, h, x)?, &func.tau_comp(f, g, &func.apply_obj(h, x)?)?)?;
    let left = func.tau_comp(f, &hg, x)?;
    let bottom = fib.compose(&left, &func.apply_mor(f, &func.tau_comp(g, h, x)?)?)?;
    Ok(top == bottom)
}

/// The two unit triangles of an oplax functor for `f: a → b` at `y ∈ F(b)`.
pub fn check_unit_triangles<F: OplaxFunctor + ?Sized>(func: &F, f: &BMor<F>, y: &FObj<F>) -> Result<bool, CatError> {
    let base = func.base();
    let fib = func.fiber();
    let a = base.source(f);
    let b = base.target(f);
    let fy = func.apply_obj(f, y)?;
    let id_fy = fib.identity(&fy);
    let left = fib.compose(&func.tau_comp(&base.identity(&a), f, y)?, &func.tau_id(&a, &fy)?)?;
    let right = fib.compose(&func.tau_comp(f, &base.identity(&b), y)?, &func.apply_mor(f, &func.tau_id(&b, y)?)?)?;
    Ok(left == id_fy && right == id_fy)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrothObject<A, X> {
    pub base: A,
    pub fiber: X,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrothMorphism<A, X, M, N> {
    pub src: GrothObject<A, X>,
    pub dst: GrothObject<A, X>,
    pub base: M,
    pub fiber: N,
}

pub type GrothMor<F> = GrothMorphism<BObj<F>, FObj<F>, BMor<F>, FMor<F>>;
pub type GrothObj<F> = GrothObject<BObj<F>, FObj<F>>;

/// The Grothendieck construction of an oplax functor: a morphism
/// `(a, x) → (b, y)` is `f: b → a` with `α: F(f)(x) → y`.
pub struct OplaxGroth<F> {
    pub functor: F,
}

/// The Grothendieck construction of a pseudofunctor with morphisms
/// `(a, x) → (b, y)` given by `f: a → b` with `α: x → F(f)(y)`.
pub struct PseudoGroth<F> {
    pub functor: F,
}

pub fn groth_id<F: OplaxFunctor + ?Sized>(func: &F, obj: &GrothObj<F>) -> Result<GrothMor<F>, CatError> {
    Ok(GrothMorphism {
        src: obj.clone(),
        dst: obj.clone(),
        base: func.base().identity(&obj.base),
        fiber: func.tau_id(&obj.base, &obj.fiber)?,
    })
}

/// `(g, β) ∘ (f, α) = (f ∘ g, β ∘ F(g)(α) ∘ (τ_{g,f})_x)`.
pub fn groth_compose<F: OplaxFunctor + ?Sized>(
    func: &F,
    m1: &GrothMor<F>,
    m2: &GrothMor<F>,
) -> Result<GrothMor<F>, CatError> {
    if m1.dst != m2.src {
        return Err(CatError::EndpointMismatch(format!("{:?} vs {:?}", m1.dst, m2.src)));
    }
    let base = func.base();
    let fib = func.fiber();
    let fg = base.compose(&m2.base, &m1.base)?;
    let tau = func.tau_comp(&m2.base, &m1.base, &m1.src.fiber)?;
    let fiber = fib.compose(&fib.compose(&tau, &func.apply_mor(&m2.base, &m1.fiber)?)?, &m2.fiber)?;
    Ok(GrothMorphism { src: m1.src.clone(), dst: m2.dst.clone(), base: fg, fiber })
}

/// Identity of the pseudo construction: `(id_a, (τ_a)⁻¹_x)`, which is `(id_a, id_x)` when `F(id_a) = id`.
pub fn groth_id_pseudo<F: PseudoFunctor + ?Sized>(func: &F, obj: &GrothObj<F>) -> Result<GrothMor<F>, CatError> {
    Ok(GrothMorphism {
        src: obj.clone(),
        dst: obj.clone(),
        base: func.base().identity(&obj.base),
        fiber: func.tau_id_inv(&obj.base, &obj.fiber)?,
    })
}

/// `(g, β) ∘ (f, α) = (g ∘ f, τ⁻¹_{f,g}(z) ∘ F(f)(β) ∘ α)`.
pub fn groth_compose_pseudo<F: PseudoFunctor + ?Sized>(
    func: &F,
    m1: &GrothMor<F>,
    m2: &GrothMor<F>,
) -> Result<GrothMor<F>, CatError> {
    if m1.dst != m2.src {
        return Err(CatError::EndpointMismatch(format!("{:?} vs {:?}", m1.dst, m2.src)));
    }
    let base = func.base();
    let fib = func.fiber();
    let gf = base.compose(&m1.base, &m2.base)?;
    let inv = func.tau_comp_inv(&m1.base, &m2.base, &m2.dst.fiber)?;
    let fiber = fib.compose(&fib.compose(&m1.fiber, &func.apply_mor(&m1.base, &m2.fiber)?)?, &inv)?;
    Ok(GrothMorphism { src: m1.src.clone(), dst: m2.dst.clone(), base: gf, fiber })
}

impl<F> Category for OplaxGroth<F>
where
    F: OplaxFunctor,
{
    type Obj = GrothObj<F>;
    type Mor = GrothMor<F>;

    fn source(&self, f: &Self::Mor) -> Self::Obj {
        f.src.clone()
    }

    fn target(&self, f: &Self::Mor) -> Self::Obj {
        f.dst.clone()
    }

    fn identity(&self, x: &Self::Obj) -> Self::Mor {
        groth_id(&self.functor, x).expect("identity structure cell")
    }

    fn compose(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor, CatError> {
        groth_compose(&self.functor, f, g)
    }
}

impl<F> HomEnumerable for OplaxGroth<F>
where
    F: OplaxFunctor,
    F::Base: HomEnumerable,
    F::Fiber: HomEnumerable,
{
    fn hom(&self, x: &Self::Obj, y: &Self::Obj) -> Vec<Self::Mor> {
        let mut out = Vec::new();
        for f in self.functor.base().hom(&y.base, &x.base) {
            let Ok(fx) = self.functor.apply_obj(&f, &x.fiber) else { continue };
            for alpha in self.functor.fiber().hom(&fx, &y.fiber) {
                out.push(GrothMorphism { src: x.clone(), dst: y.clone(), base: f.clone(), fiber: alpha });
            }
        }
        out
    }
}

impl<F> Category for PseudoGroth<F>
where
    F: PseudoFunctor,
{
    type Obj = GrothObj<F>;
    type Mor = GrothMor<F>;

    fn source(&self, f: &Self::Mor) -> Self::Obj {
        f.src.clone()
    }

    fn target(&self, f: &Self::Mor) -> Self::Obj {
        f.dst.clone()
    }

    fn identity(&self, x: &Self::Obj) -> Self::Mor {
        groth_id_pseudo(&self.functor, x).expect("identity structure cell")
    }

    fn compose(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor, CatError> {
        groth_compose_pseudo(&self.functor, f, g)
    }
}

impl<F> HomEnumerable for PseudoGroth<F>
where
    F: PseudoFunctor,
    F::Base: HomEnumerable,
    F::Fiber: HomEnumerable,
{
    fn hom(&self, x: &Self::Obj, y: &Self::Obj) -> Vec<Self::Mor> {
        let mut out = Vec::new();
        for f in self.functor.base().hom(&x.base, &y.base) {
            let Ok(fy) = self.functor.apply_obj(&f, &y.fiber) else { continue };
            for alpha in self.functor.fiber().hom(&x.fiber, &fy) {
                out.push(GrothMorphism { src: x.clone(), dst: y.clone(), base: f.clone(), fiber: alpha });
            }
        }
        out
    }
}

/// `F ∘ G` for a strict functor `G: J → I` between bases.
pub struct Reindexed<'a, G, F: OplaxFunctor, J> {
    pub along: &'a G,
    pub functor: &'a F,
    pub base: J,
}

impl<G, F, J> OplaxFunctor for Reindexed<'_, G, F, J>
where
    F: OplaxFunctor,
    J: Category,
    G: Functor<J, F::Base>,
{
    type Base = J;
    type Fiber = F::Fiber;

    fn base(&self) -> &J {
        &self.base
    }

    fn fiber(&self) -> &F::Fiber {
        self.functor.fiber()
    }

    fn apply_obj(&self, f: &J::Mor, x: &FObj<F>) -> Result<FObj<F>, CatError> {
        self.functor.apply_obj(&self.along.on_mor(f), x)
    }

    fn apply_mor(&self, f: &J::Mor, alpha: &FMor<F>) -> Result<FMor<F>, CatError> {
        self.functor.apply_mor(&self.along.on_mor(f), alpha)
    }

    fn tau_comp(&self, f: &J::Mor, g: &J::Mor, x: &FObj<F>) -> Result<FMor<F>, CatError> {
        self.functor.tau_comp(&self.along.on_mor(f), &self.along.on_mor(g), x)
    }

    fn tau_id(&self, a: &J::Obj, x: &FObj<F>) -> Result<FMor<F>, CatError> {
        self.functor.tau_id(&self.along.on_obj(a), x)
    }
}

/// The functor `∫ FG → ∫ F`, `(j, x) ↦ (G(j), x)`, `(f, α) ↦ (G(f), α)`.
pub struct Reindex<'a, G, F, J> {
    pub along: &'a G,
    marker: PhantomData<(&'a F, J)>,
}

pub fn reindex<'a, G, F, J>(along: &'a G) -> Reindex<'a, G, F, J> {
    Reindex { along, marker: PhantomData }
}

impl<'a, G, F, J> Functor<OplaxGroth<Reindexed<'a, G, F, J>>, OplaxGroth<&'a F>> for Reindex<'a, G, F, J>
where
    F: OplaxFunctor,
    J: Category,
    G: Functor<J, F::Base>,
{
    fn on_obj(&self, x: &GrothObject<J::Obj, FObj<F>>) -> GrothObj<&'a F> {
        GrothObject { base: self.along.on_obj(&x.base), fiber: x.fiber.clone() }
    }

    fn on_mor(&self, m: &GrothMorphism<J::Obj, FObj<F>, J::Mor, FMor<F>>) -> GrothMor<&'a F> {
        GrothMorphism {
            src: GrothObject { base: self.along.on_obj(&m.src.base), fiber: m.src.fiber.clone() },
            dst: GrothObject { base: self.along.on_obj(&m.dst.base), fiber: m.dst.fiber.clone() },
            base: self.along.on_mor(&m.base),
            fiber: m.fiber.clone(),
        }
    }
}

impl<F: OplaxFunctor + ?Sized> OplaxFunctor for &F {
    type Base = F::Base;
    type Fiber = F::Fiber;

    fn base(&self) -> &F::Base {
        (**self).base()
    }

    fn fiber(&self) -> &F::Fiber {
        (**self).fiber()
    }

    fn apply_obj(&self, f: &BMor<F>, x: &FObj<F>) -> Result<FObj<F>, CatError> {
        (**self).apply_obj(f, x)
    }

    fn apply_mor(&self, f: &BMor<F>, alpha: &FMor<F>) -> Result<FMor<F>, CatError> {
        (**self).apply_mor(f, alpha)
    }

    fn tau_comp(&self, f: &BMor<F>, g: &BMor<F>, x: &FObj<F>) -> Result<FMor<F>, CatError> {
        (**self).tau_comp(f, g, x)
    }

    fn tau_id(&self, a: &BObj<F>, x: &FObj<F>) -> Result<FMor<F>, CatError> {
        (**self).tau_id(a, x)
    }
}

impl<F: PseudoFunctor + ?Sized> PseudoFunctor for &F {
    fn tau_comp_inv(&self, f: &BMor<F>, g: &BMor<F>, x: &FObj<F>) -> Result<FMor<F>, CatError> {
        (**self).tau_comp_inv(f, g, x)
    }

    fn tau_id_inv(&self, a: &BObj<F>, x: &FObj<F>) -> Result<FMor<F>, CatError> {
        (**self).tau_id_inv(a, x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub full: bool,
    pub faithful: bool,
    pub essentially_surjective: bool,
    pub objects: usize,
    pub hom_pairs: usize,
    pub morphisms: usize,
    pub witnesses: Vec<String>,
}

impl EquivalenceReport {
    pub fn is_equivalence(&self) -> bool {
        self.full && self.faithful && self.essentially_surjective
    }
}

const MAX_WITNESSES: usize = 8;

/// Exhaustive check of fullness and faithfulness over all pairs of
/// `src_objects`, and of essential surjectivity onto `dst_objects`.
pub fn check_equivalence<C, D, F>(c: &C, d: &D, functor: &F, src_objects: &[C::Obj], dst_objects: &[D::Obj]) -> EquivalenceReport
where
    C: HomEnumerable + Sync,
    D: HomEnumerable + Sync,
    F: Functor<C, D> + Sync,
{
    let images: Vec<D::Obj> = src_objects.par_iter().map(|x| functor.on_obj(x)).collect();
    let pairs: Vec<(usize, usize)> =
        (0..src_objects.len()).flat_map(|i| (0..src_objects.len()).map(move |j| (i, j))).collect();
    let per_pair: Vec<(usize, Option<String>, Option<String>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (&src_objects[i], &src_objects[j]);
            let hom = c.hom(x, y);
            let mut seen: HashSet<D::Mor> = HashSet::with_capacity(hom.len());
            let mut unfaithful = None;
            for f in &hom {
                if !seen.insert(functor.on_mor(f)) && unfaithful.is_none() {
                    unfaithful = Some(format!("not faithful on {x:?} -> {y:?}: {f:?}"));
                }
            }
            let target = d.hom(&images[i], &images[j]);
            let missing = target.iter().find(|g| !seen.contains(*g)).map(|g| format!("not full on {x:?} -> {y:?}: {g:?}"));
            (hom.len(), unfaithful, missing)
        })
        .collect();
    let mut report = EquivalenceReport {
        full: true,
        faithful: true,
        essentially_surjective: true,
        objects: src_objects.len(),
        hom_pairs: pairs.len(),
        morphisms: 0,
        witnesses: Vec::new(),
    };
    for (n, unfaithful, missing) in per_pair {
        report.morphisms += n;
        if let Some(w) = unfaithful {
            report.faithful = false;
            report.witnesses.push(w);
        }
        if let Some(w) = missing {
            report.full = false;
            report.witnesses.push(w);
        }
    }
    let missed: Vec<Option<String>> = dst_objects
        .par_iter()
        .map(|z| {
            let hit = images.iter().any(|fx| d.maybe_isomorphic(fx, z) && d.hom(fx, z).iter().any(|g| is_isomorphism(d, g)));
            (!hit).then(|| format!("not essentially surjective at {z:?}"))
        })
        .collect();
    for w in missed.into_iter().flatten() {
        report.essentially_surjective = false;
        report.witnesses.push(w);
    }
    report.witnesses.truncate(MAX_WITNESSES);
    report
}

/// A category given by explicit tables; morphisms are indices.
#[derive(Debug, Clone)]
pub struct TableCategory {
    pub ends: Vec<(usize, usize)>,
    pub identities: Vec<usize>,
    pub table: HashMap<(usize, usize), usize>,
}

impl TableCategory {
    /// Builds from generators-free data: `ends[m]`, identities, and `table[(f, g)] = g ∘ f`.
    pub fn new(ends: Vec<(usize, usize)>, identities: Vec<usize>, table: HashMap<(usize, usize), usize>) -> Self {
        TableCategory { ends, identities, table }
    }

    /// The free category on the linear order `0 → 1 → … → n-1`.
    pub fn linear(n: usize) -> Self {
        let mut ends = Vec::new();
        let mut index = HashMap::new();
        for a in 0..n {
            for b in a..n {
                index.insert((a, b), ends.len());
                ends.push((a, b));
            }
        }
        let identities = (0..n).map(|a| index[&(a, a)]).collect();
        let mut table = HashMap::new();
        for (&(a, b), &f) in &index {
            for c in b..n {
                table.insert((f, index[&(b, c)]), index[&(a, c)]);
            }
        }
        TableCategory { ends, identities, table }
    }

    /// A group as a one-object category; `mult[a][b] = a·b` and `g ∘ f = g·f`.
    pub fn one_object(mult: &[Vec<usize>]) -> Self {
        let n = mult.len();
        let mut table = HashMap::new();
        for f in 0..n {
            for g in 0..n {
                table.insert((f, g), mult[g][f]);
            }
        }
        TableCategory { ends: vec![(0, 0); n], identities: vec![0], table }
    }

    pub fn object_count(&self) -> usize {
        self.identities.len()
    }

    /// Associativity and unit laws over the whole table.
    pub fn is_valid(&self) -> bool {
        let n = self.ends.len();
        let comp = |f: usize, g: usize| self.table.get(&(f, g)).copied();
        for f in 0..n {
            let (a, b) = self.ends[f];
            if comp(self.identities[a], f) != Some(f) || comp(f, self.identities[b]) != Some(f) {
                return false;
            }
            for g in (0..n).filter(|&g| self.ends[g].0 == b) {
                let Some(gf) = comp(f, g) else { return false };
                if self.ends[gf] != (a, self.ends[g].1) {
                    return false;
                }
                for h in (0..n).filter(|&h| self.ends[h].0 == self.ends[g].1) {
                    if comp(gf, h) != comp(g, h).and_then(|hg| comp(f, hg)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl Category for TableCategory {
    type Obj = usize;
    type Mor = usize;

    fn source(&self, f: &usize) -> usize {
        self.ends[*f].0
    }

    fn target(&self, f: &usize) -> usize {
        self.ends[*f].1
    }

    fn identity(&self, x: &usize) -> usize {
        self.identities[*x]
    }

    fn compose(&self, f: &usize, g: &usize) -> Result<usize, CatError> {
        self.table.get(&(*f, *g)).copied().ok_or_else(|| CatError::NotComposable(format!("{f} then {g}")))
    }
}

impl HomEnumerable for TableCategory {
    fn hom(&self, x: &usize, y: &usize) -> Vec<usize> {
        (0..self.ends.len()).filter(|&f| self.ends[f] == (*x, *y)).collect()
    }
}

impl FiniteCategory for TableCategory {
    fn objects(&self) -> Vec<usize> {
        (0..self.object_count()).collect()
    }
}

/// A category restricted to a finite list of objects.
pub struct Truncated<C: Category> {
    pub inner: C,
    pub objects: Vec<C::Obj>,
}

impl<C: Category> Category for Truncated<C> {
    type Obj = C::Obj;
    type Mor = C::Mor;

    fn source(&self, f: &C::Mor) -> C::Obj {
        self.inner.source(f)
    }

    fn target(&self, f: &C::Mor) -> C::Obj {
        self.inner.target(f)
    }

    fn identity(&self, x: &C::Obj) -> C::Mor {
        self.inner.identity(x)
    }

    fn compose(&self, f: &C::Mor, g: &C::Mor) -> Result<C::Mor, CatError> {
        self.inner.compose(f, g)
    }
}

impl<C: HomEnumerable> HomEnumerable for Truncated<C> {
    fn hom(&self, x: &C::Obj, y: &C::Obj) -> Vec<C::Mor> {
        self.inner.hom(x, y)
    }

    fn maybe_isomorphic(&self, x: &C::Obj, y: &C::Obj) -> bool {
        self.inner.maybe_isomorphic(x, y)
    }
}

impl<C: HomEnumerable> FiniteCategory for Truncated<C> {
    fn objects(&self) -> Vec<C::Obj> {
        self.objects.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fibers: objects `0, 1`, morphisms `id0, id1, u: 0 → 1, e: 1 → 1` with `e∘e = e`, `e∘u = u`.
    struct Fiber;

    const ID0: usize = 0;
    const ID1: usize = 1;
    const U: usize = 2;
    const E: usize = 3;

    fn fiber_ends(m: usize) -> (usize, usize) {
        [(0, 0), (1, 1), (0, 1), (1, 1)][m]
    }

    impl Category for Fiber {
        type Obj = (usize, usize);
        type Mor = (usize, usize);

        fn source(&self, f: &(usize, usize)) -> (usize, usize) {
            (f.0, fiber_ends(f.1).0)
        }

        fn target(&self, f: &(usize, usize)) -> (usize, usize) {
            (f.0, fiber_ends(f.1).1)
        }

        fn identity(&self, x: &(usize, usize)) -> (usize, usize) {
            (x.0, [ID0, ID1][x.1])
        }

        fn compose(&self, f: &(usize, usize), g: &(usize, usize)) -> Result<(usize, usize), CatError> {
            if self.target(f) != self.source(g) {
                return Err(CatError::NotComposable(format!("{f:?} {g:?}")));
            }
            let m = match (f.1, g.1) {
                (ID0 | ID1, m) | (m, ID0 | ID1) => m,
                (U, E) => U,
                (E, E) => E,
                _ => unreachable!(),
            };
            Ok((f.0, m))
        }
    }

    impl HomEnumerable for Fiber {
        fn hom(&self, x: &(usize, usize), y: &(usize, usize)) -> Vec<(usize, usize)> {
            if x.0 != y.0 {
                return vec![];
            }
            (0..4).filter(|&m| fiber_ends(m) == (x.1, y.1)).map(|m| (x.0, m)).collect()
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Toy {
        Strict,
        ConstantZero,
        Corrupted,
    }

    struct ToyFunctor {
        base: TableCategory,
        fiber: Fiber,
        kind: Toy,
    }

    impl ToyFunctor {
        fn new(kind: Toy) -> Self {
            ToyFunctor { base: TableCategory::linear(3), fiber: Fiber, kind }
        }
    }

    impl OplaxFunctor for ToyFunctor {
        type Base = TableCategory;
        type Fiber = Fiber;

        fn base(&self) -> &TableCategory {
            &self.base
        }

        fn fiber(&self) -> &Fiber {
            &self.fiber
        }

        fn apply_obj(&self, f: &usize, x: &(usize, usize)) -> Result<(usize, usize), CatError> {
            let a = self.base.source(f);
            Ok(match self.kind {
                Toy::ConstantZero => (a, 0),
                _ => (a, x.1),
            })
        }

        fn apply_mor(&self, f: &usize, alpha: &(usize, usize)) -> Result<(usize, usize), CatError> {
            let a = self.base.source(f);
            Ok(match self.kind {
                Toy::ConstantZero => (a, ID0),
                _ => (a, alpha.1),
            })
        }

        fn tau_comp(&self, f: &usize, _g: &usize, x: &(usize, usize)) -> Result<(usize, usize), CatError> {
            let a = self.base.source(f);
            Ok(match self.kind {
                Toy::ConstantZero => (a, ID0),
                _ => (a, [ID0, ID1][x.1]),
            })
        }

        fn tau_id(&self, a: &usize, x: &(usize, usize)) -> Result<(usize, usize), CatError> {
            Ok(match (self.kind, x.1) {
                (Toy::ConstantZero, 0) | (Toy::Strict, 0) | (Toy::Corrupted, 0) => (*a, ID0),
                (Toy::ConstantZero, _) => (*a, U),
                (Toy::Strict, _) => (*a, ID1),
                (Toy::Corrupted, _) => (*a, E),
            })
        }
    }

    fn triples(c: &TableCategory) -> Vec<(usize, usize, usize)> {
        let n = c.ends.len();
        let mut out = vec![];
        for f in 0..n {
            for g in (0..n).filter(|&g| c.ends[g].0 == c.ends[f].1) {
                for h in (0..n).filter(|&h| c.ends[h].0 == c.ends[g].1) {
                    out.push((f, g, h));
                }
            }
        }
        out
    }

    fn all_coherent(func: &ToyFunctor) -> bool {
        triples(&func.base).into_iter().all(|(f, g, h)| {
            let d = func.base.target(&h);
            (0..2).all(|i| check_oplax_coherence(func, &f, &g, &h, &(d, i)).unwrap())
        })
    }

    #[test]
    fn table_categories_are_valid() {
        assert!(TableCategory::linear(4).is_valid());
        assert!(TableCategory::one_object(&[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).is_valid());
        let mut broken = TableCategory::linear(3);
        broken.table.insert((0, 1), 0);
        assert!(!broken.is_valid());
    }

    #[test]
    fn strict_and_constant_functors_are_coherent() {
        assert!(all_coherent(&ToyFunctor::new(Toy::Strict)));
        assert!(all_coherent(&ToyFunctor::new(Toy::ConstantZero)));
    }

    #[test]
    fn corrupted_unit_is_detected() {
        assert!(!all_coherent(&ToyFunctor::new(Toy::Corrupted)));
    }

    #[test]
    fn coherence_rejects_non_composable_triples() {
        let func = ToyFunctor::new(Toy::Strict);
        let f = func.base.hom(&1, &2)[0];
        let g = func.base.hom(&0, &1)[0];
        assert!(matches!(check_oplax_coherence(&func, &f, &g, &g, &(1, 0)), Err(CatError::NotComposable(_))));
    }

    fn groth_objects() -> Vec<GrothObject<usize, (usize, usize)>> {
        (0..3).flat_map(|a| (0..2).map(move |i| GrothObject { base: a, fiber: (a, i) })).collect()
    }

    #[test]
    fn oplax_groth_is_associative_and_unital() {
        for kind in [Toy::Strict, Toy::ConstantZero] {
            let g = OplaxGroth { functor: ToyFunctor::new(kind) };
            let objs = groth_objects();
            let mut count = 0;
            for x in &objs {
                for y in &objs {
                    for m in g.hom(x, y) {
                        assert_eq!(g.compose(&g.identity(x), &m).unwrap(), m);
                        assert_eq!(g.compose(&m, &g.identity(y)).unwrap(), m);
                        for z in &objs {
                            for n in g.hom(y, z) {
                                let mn = g.compose(&m, &n).unwrap();
                                assert_eq!(mn.src, *x);
                                for w in &objs {
                                    for p in g.hom(z, w) {
                                        let left = g.compose(&mn, &p).unwrap();
                                        let right = g.compose(&m, &g.compose(&n, &p).unwrap()).unwrap();
                                        assert_eq!(left, right);
                                        count += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            assert!(count > 100);
        }
    }

    #[test]
    fn groth_compose_checks_endpoints() {
        let g = OplaxGroth { functor: ToyFunctor::new(Toy::Strict) };
        let objs = groth_objects();
        let m = g.hom(&objs[2], &objs[0])[0].clone();
        assert!(matches!(g.compose(&m, &m), Err(CatError::EndpointMismatch(_))));
    }

    /// Fibers are copies of Z/3 indexed by the base object; `F(f)` is the identity on each copy.
    struct Cyclic;

    impl Category for Cyclic {
        type Obj = usize;
        type Mor = (usize, usize);

        fn source(&self, f: &(usize, usize)) -> usize {
            f.0
        }

        fn target(&self, f: &(usize, usize)) -> usize {
            f.0
        }

        fn identity(&self, x: &usize) -> (usize, usize) {
            (*x, 0)
        }

        fn compose(&self, f: &(usize, usize), g: &(usize, usize)) -> Result<(usize, usize), CatError> {
            if f.0 != g.0 {
                return Err(CatError::NotComposable(format!("{f:?} {g:?}")));
            }
            Ok((f.0, (f.1 + g.1) % 3))
        }
    }

    impl HomEnumerable for Cyclic {
        fn hom(&self, x: &usize, y: &usize) -> Vec<(usize, usize)> {
            if x != y {
                return vec![];
            }
            (0..3).map(|k| (*x, k)).collect()
        }
    }

    /// `τ_{f,g} = s(f) + s(g) - s(gf)`, a normalized coboundary.
    struct Twisted {
        base: TableCategory,
        shift: Vec<usize>,
    }

    impl Twisted {
        fn new(strict: bool) -> Self {
            let base = TableCategory::linear(3);
            let shift = (0..base.ends.len()).map(|m| if strict || base.identities.contains(&m) { 0 } else { m % 3 }).collect();
            Twisted { base, shift }
        }

        fn cell(&self, f: &usize, g: &usize) -> usize {
            let gf = self.base.compose(f, g).unwrap();
            (self.shift[*f] + self.shift[*g] + 3 - self.shift[gf]) % 3
        }
    }

    impl OplaxFunctor for Twisted {
        type Base = TableCategory;
        type Fiber = Cyclic;

        fn base(&self) -> &TableCategory {
            &self.base
        }

        fn fiber(&self) -> &Cyclic {
            &Cyclic
        }

        fn apply_obj(&self, f: &usize, _x: &usize) -> Result<usize, CatError> {
            Ok(self.base.source(f))
        }

        fn apply_mor(&self, f: &usize, alpha: &(usize, usize)) -> Result<(usize, usize), CatError> {
            Ok((self.base.source(f), alpha.1))
        }

        fn tau_comp(&self, f: &usize, g: &usize, _x: &usize) -> Result<(usize, usize), CatError> {
            Ok((self.base.source(f), self.cell(f, g)))
        }

        fn tau_id(&self, a: &usize, _x: &usize) -> Result<(usize, usize), CatError> {
            Ok((*a, 0))
        }
    }

    impl PseudoFunctor for Twisted {
        fn tau_comp_inv(&self, f: &usize, g: &usize, _x: &usize) -> Result<(usize, usize), CatError> {
            Ok((self.base.source(f), (3 - self.cell(f, g)) % 3))
        }

        fn tau_id_inv(&self, a: &usize, _x: &usize) -> Result<(usize, usize), CatError> {
            Ok((*a, 0))
        }
    }

    fn pseudo_objects() -> Vec<GrothObject<usize, usize>> {
        (0..3).map(|a| GrothObject { base: a, fiber: a }).collect()
    }

    #[test]
    fn pseudo_groth_is_associative_and_unital() {
        let g = PseudoGroth { functor: Twisted::new(false) };
        assert!(g.functor.shift.iter().any(|&s| s != 0));
        let objs = pseudo_objects();
        for x in &objs {
            assert_eq!(g.identity(x).fiber, (x.base, 0));
            for y in &objs {
                for m in g.hom(x, y) {
                    assert_eq!(g.compose(&g.identity(x), &m).unwrap(), m);
                    assert_eq!(g.compose(&m, &g.identity(y)).unwrap(), m);
                    for z in &objs {
                        for n in g.hom(y, z) {
                            for w in &objs {
                                for p in g.hom(z, w) {
                                    let left = g.compose(&g.compose(&m, &n).unwrap(), &p).unwrap();
                                    let right = g.compose(&m, &g.compose(&n, &p).unwrap()).unwrap();
                                    assert_eq!(left, right);
                                }
                            }
                        }
                    }
                }
            }
        }
        let triples = triples(&g.functor.base);
        assert!(triples.iter().all(|&(f, gg, h)| check_oplax_coherence(&g.functor, &f, &gg, &h, &g.functor.base.target(&h)).unwrap()));
    }

    #[test]
    fn both_constructions_agree_for_strict_groupoid_fibers() {
        let func = Twisted::new(true);
        let lower = OplaxGroth { functor: &func };
        let upper = PseudoGroth { functor: &func };
        let flip = |m: &GrothMorphism<usize, usize, usize, (usize, usize)>| GrothMorphism {
            src: m.dst.clone(),
            dst: m.src.clone(),
            base: m.base,
            fiber: (m.fiber.0, (3 - m.fiber.1) % 3),
        };
        let objs = pseudo_objects();
        for x in &objs {
            assert_eq!(flip(&lower.identity(x)), upper.identity(x));
            for y in &objs {
                let hom = lower.hom(x, y);
                let mut flipped: Vec<_> = hom.iter().map(flip).collect();
                let mut other = upper.hom(y, x);
                flipped.sort_by_key(|m| (m.base, m.fiber));
                other.sort_by_key(|m| (m.base, m.fiber));
                assert_eq!(flipped, other);
                for z in &objs {
                    for m in &hom {
                        for n in lower.hom(y, z) {
                            let mn = lower.compose(m, &n).unwrap();
                            assert_eq!(flip(&mn), upper.compose(&flip(&n), &flip(m)).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn equivalence_checker_on_toys() {
        let c = TableCategory::linear(3);
        let id = FnFunctor { obj: |x: &usize| *x, mor: |f: &usize| *f };
        let r = check_equivalence(&c, &c, &id, &c.objects(), &c.objects());
        assert!(r.is_equivalence());
        assert_eq!(r.morphisms, 6);

        let point = TableCategory::linear(1);
        let collapse = FnFunctor { obj: |_: &usize| 0usize, mor: |_: &usize| 0usize };
        let two = TableCategory::linear(2);
        let r = check_equivalence(&two, &point, &collapse, &two.objects(), &point.objects());
        assert!(r.faithful && r.essentially_surjective && !r.full);
        assert!(r.witnesses[0].contains("not full"));
    }

    #[test]
    fn reindexing_along_identity_and_constant() {
        let func = ToyFunctor::new(Toy::ConstantZero);
        let id = FnFunctor { obj: |x: &usize| *x, mor: |f: &usize| *f };
        let re = Reindexed { along: &id, functor: &func, base: TableCategory::linear(3) };
        let lower = OplaxGroth { functor: re };
        let upper = OplaxGroth { functor: &func };
        let r: Reindex<_, ToyFunctor, TableCategory> = reindex(&id);
        let objs = groth_objects();
        for x in &objs {
            assert_eq!(r.on_obj(x), *x);
            for y in &objs {
                for m in lower.hom(x, y) {
                    assert_eq!(r.on_mor(&m), m);
                }
            }
        }
        let rep = check_equivalence(&lower, &upper, &r, &objs, &objs);
        assert!(rep.is_equivalence());

        let constant = FnFunctor { obj: |_: &usize| 0usize, mor: |_: &usize| 0usize };
        let re = Reindexed { along: &constant, functor: &func, base: TableCategory::linear(1) };
        let lower = OplaxGroth { functor: re };
        let r: Reindex<_, ToyFunctor, TableCategory> = reindex(&constant);
        let src: Vec<_> = objs.iter().filter(|x| x.base == 0).cloned().collect();
        let rep = check_equivalence(&lower, &upper, &r, &src, &objs);
        assert!(rep.full && rep.faithful && !rep.essentially_surjective);
        assert!(rep.witnesses.iter().any(|w| w.contains("base: 2")));
    }

    #[test]
    fn whiskering_is_pointwise() {
        let alpha = |x: &usize| x * 10;
        let f = |a: &usize| a + 1;
        let h = |m: &usize| m + 7;
        assert_eq!(whisker_left(alpha, f)(&2), 30);
        assert_eq!(whisker_right(h, alpha)(&2), 27);
    }
}
