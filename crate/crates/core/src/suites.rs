//! Exhaustive verification suites with deterministic JSON reports.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dendro::{f_functor, groth_object, lift_morphism, TreeFunctor};
use crate::equivariant::{
    actions_up_to_conjugacy, all_gpointed, contract_orbit, equivariant_factorize, equivariant_hom, f_g, g_groth_object,
    groth_hom_pruned, is_equivariant_morphism, lift_g, GLabeledTree, GMorphism, GTree, GTreeFunctor,
};
use crate::genuine::{
    coset_forest_hom, eta, forest_hom, induce, iterated_hom, iterated_to_forest, labeled_groth_hom, orbit_hom,
    pullback_forest_morphism, pullback_morphism, pullback_object, retractive_maps, CosetGroupoid, ForestFunctor,
    ForestMorphism, GForest, IncludeStabilizer, LabeledForest, OrbitMap, Retractive,
};
use crate::group::{Cosets, FiniteGroup, GSet, GroupError, Subgroup};
use crate::labeled::{LabeledTree, PointedMap};
use crate::omega::{factorize, hom_set, TreeMorphism};
use crate::oplax::{
    check_equivalence, check_unit_triangles, BMor, BObj, CatError, Category, FMor, FObj, HomEnumerable, OplaxFunctor, OplaxGroth,
};
use crate::tree::{enumerate_trees_by_edges, Tree};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}")]
    SuiteUnknown(String),
    #[error("invalid bounds: {0}")]
    Bounds(String),
    #[error("cannot read group file {0}: {1}")]
    GroupFile(String, String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Factorization,
    Coherence,
    Equivalence,
    Equivariant,
    Genuine,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Factorization, Suite::Coherence, Suite::Equivalence, Suite::Equivariant, Suite::Genuine];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Factorization => "factorization",
            Suite::Coherence => "coherence",
            Suite::Equivalence => "equivalence",
            Suite::Equivariant => "equivariant",
            Suite::Genuine => "genuine",
        }
    }

    pub fn default_config(self) -> SuiteConfig {
        let (max_edges, max_size, groups): (usize, usize, &[&str]) = match self {
            Suite::Factorization => (5, 0, &[]),
            Suite::Coherence => (4, 3, &[]),
            Suite::Equivalence => (5, 0, &[]),
            Suite::Equivariant => (5, 2, &["z2", "z3", "z4"]),
            Suite::Genuine => (4, 4, &["z2"]),
        };
        let max_components = if self == Suite::Genuine { 2 } else { 0 };
        SuiteConfig { max_edges, max_size, max_components, groups: groups.iter().map(|g| g.to_string()).collect() }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, SuiteError> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| SuiteError::SuiteUnknown(s.to_string()))
    }
}

/// Bounds of a run. Unused fields are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub max_edges: usize,
    pub max_size: usize,
    pub max_components: usize,
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomSize {
    pub src: String,
    pub dst: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub bounds: SuiteConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub hom_sizes: Vec<HomSize>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `DENDRON_WORKERS`, if set to a positive number.
pub fn workers_from_env() -> Option<usize> {
    std::env::var("DENDRON_WORKERS").ok()?.parse().ok().filter(|&n| n > 0)
}

/// A builtin group name or a path to a group file.
pub fn resolve_group(name: &str) -> Result<Arc<FiniteGroup>, SuiteError> {
    if let Ok(g) = FiniteGroup::builtin(name) {
        return Ok(Arc::new(g));
    }
    if Path::new(name).exists() {
        let text = std::fs::read_to_string(name).map_err(|e| SuiteError::GroupFile(name.into(), e.to_string()))?;
        let g: FiniteGroup = serde_json::from_str(&text).map_err(|e| SuiteError::GroupFile(name.into(), e.to_string()))?;
        return Ok(Arc::new(g));
    }
    Ok(Arc::new(FiniteGroup::builtin(name)?))
}

pub fn run(suite: Suite, config: &SuiteConfig) -> Result<Report, SuiteError> {
    run_with_workers(suite, config, workers_from_env())
}

pub fn run_with_workers(suite: Suite, config: &SuiteConfig, workers: Option<usize>) -> Result<Report, SuiteError> {
    if config.max_edges == 0 {
        return Err(SuiteError::Bounds("max_edges must be positive".into()));
    }
    if matches!(suite, Suite::Coherence | Suite::Genuine) && config.max_size == 0 {
        return Err(SuiteError::Bounds("max_size must be positive".into()));
    }
    if suite == Suite::Genuine && config.max_components == 0 {
        return Err(SuiteError::Bounds("max_components must be positive".into()));
    }
    if matches!(suite, Suite::Equivariant | Suite::Genuine) && config.groups.is_empty() {
        return Err(SuiteError::Bounds("at least one group is needed".into()));
    }
    let groups = config.groups.iter().map(|g| resolve_group(g)).collect::<Result<Vec<_>, _>>()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| SuiteError::Pool(e.to_string()))?;
    let (checks, hom_sizes) = pool.install(|| match suite {
        Suite::Factorization => (factorization(config.max_edges), Vec::new()),
        Suite::Coherence => (coherence(config.max_edges, config.max_size), Vec::new()),
        Suite::Equivalence => equivalence(config.max_edges),
        Suite::Equivariant => {
            (groups.iter().flat_map(|g| equivariant(g, config.max_edges, config.max_size)).collect(), Vec::new())
        }
        Suite::Genuine => (
            groups.iter().flat_map(|g| genuine(g, config.max_edges, config.max_size, config.max_components)).collect(),
            Vec::new(),
        ),
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { suite, bounds: config.clone(), passed, checks, hom_sizes })
}

type Outcome = Result<usize, String>;

/// Runs `f` on every item in parallel; each call yields one outcome per
/// name. The first failure in item order is kept.
fn tally<T: Sync>(names: &[String], items: &[T], f: impl Fn(&T) -> Vec<Outcome> + Sync + Send) -> Vec<Check> {
    let results: Vec<Vec<Outcome>> = items.par_iter().map(f).collect();
    let mut checks: Vec<Check> =
        names.iter().map(|n| Check { name: n.clone(), cases: 0, passed: true, counterexample: None }).collect();
    for row in results {
        debug_assert_eq!(row.len(), checks.len());
        for (check, outcome) in checks.iter_mut().zip(row) {
            match outcome {
                Ok(n) => check.cases += n,
                Err(w) => {
                    if check.passed {
                        check.counterexample = Some(w);
                    }
                    check.passed = false;
                }
            }
        }
    }
    checks
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn named(prefix: &str, xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| format!("{prefix}: {s}")).collect()
}

fn trees(max_edges: usize) -> Vec<Arc<Tree>> {
    enumerate_trees_by_edges(max_edges).into_iter().map(Arc::new).collect()
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).cartesian_product(0..n).collect()
}

fn factorization(max_edges: usize) -> Vec<Check> {
    let ts = trees(max_edges);
    tally(&names(&["recomposition", "stage types", "idempotence"]), &pairs(ts.len()), |&(i, j)| {
        let (t, s) = (&ts[i], &ts[j]);
        let mut out = [Ok(0), Ok(0), Ok(0)];
        for f in hom_set(t, s) {
            let fac = factorize(&f);
            let back = fac.recompose();
            let checks = [back == f, fac.stages_well_typed(), factorize(&back) == fac];
            for (o, ok) in out.iter_mut().zip(checks) {
                match (ok, &o) {
                    (true, Ok(n)) => *o = Ok(n + 1),
                    (false, Ok(_)) => *o = Err(format!("{t} -> {s}: {f:?}")),
                    _ => {}
                }
            }
        }
        out.into()
    })
}

/// Associativity squares for `a →f b →g c →h d` at `x` over every `g`
/// into `c` and `f` into its source, then the unit triangles of `h` at
/// `x` and of each `g` at `h*x`.
fn coherence_at<F>(func: &F, x: &FObj<F>, h: &BMor<F>, into: &(dyn Fn(&BObj<F>) -> Vec<BMor<F>> + Sync)) -> Vec<Outcome>
where
    F: OplaxFunctor + ?Sized,
{
    let base = func.base();
    let fail = |what: &str, e: &dyn fmt::Debug| Err(format!("{what}: {e:?}"));
    let Ok(hx) = func.apply_obj(h, x) else { return vec![fail("apply", h), fail("apply", h)] };
    let mut squares = 0;
    let mut assoc = Ok(0);
    let mut seen: HashSet<(BMor<F>, FObj<F>)> = HashSet::new();
    let mut triangles = Vec::new();
    let mut meet = |m: BMor<F>, y: FObj<F>| {
        if seen.insert((m.clone(), y.clone())) {
            triangles.push((m, y));
        }
    };
    meet(h.clone(), x.clone());
    let fib = func.fiber();
    // check_associativity with the pieces that do not depend on f shared
    let square = |f: &BMor<F>, g: &BMor<F>, hg: &BMor<F>, gh: &FMor<F>| -> Result<bool, CatError> {
        let gf = base.compose(f, g)?;
        let top = fib.compose(&func.tau_comp(&gf, h, x)?, &func.tau_comp(f, g, &hx)?)?;
        let bottom = fib.compose(&func.tau_comp(f, hg, x)?, &func.apply_mor(f, gh)?)?;
        Ok(top == bottom)
    };
    'outer: for g in into(&base.source(h)) {
        meet(g.clone(), hx.clone());
        let shared = base.compose(&g, h).and_then(|hg| Ok((func.tau_comp(&g, h, x)?, hg)));
        let (gh, hg) = match shared {
            Ok(p) => p,
            Err(e) => {
                assoc = Err(format!("{e} at g = {g:?}, h = {h:?}, x = {x:?}"));
                break;
            }
        };
        for f in into(&base.source(&g)) {
            match square(&f, &g, &hg, &gh) {
                Ok(true) => squares += 1,
                Ok(false) => {
                    assoc = Err(format!("associativity at f = {f:?}, g = {g:?}, h = {h:?}, x = {x:?}"));
                    break 'outer;
                }
                Err(e) => {
                    assoc = Err(format!("{e} at f = {f:?}, g = {g:?}, h = {h:?}, x = {x:?}"));
                    break 'outer;
                }
            }
        }
    }
    if assoc.is_ok() {
        assoc = Ok(squares);
    }
    let mut units = Ok(triangles.len());
    for (m, y) in &triangles {
        if !check_unit_triangles(func, m, y).unwrap_or(false) {
            units = Err(format!("unit triangle at {m:?}, {y:?}"));
            break;
        }
    }
    vec![assoc, units]
}

/// Every labeling of every tree with at most `max_size` leaves.
fn labeled_trees(max_edges: usize, max_size: usize) -> Vec<LabeledTree> {
    trees(max_edges)
        .into_iter()
        .filter(|t| t.leaves().len() <= max_size)
        .flat_map(|t| {
            let leaves = t.leaves().to_vec();
            let n = leaves.len();
            leaves.into_iter().permutations(n).map(move |p| LabeledTree::new(t.clone(), p).expect("permuted leaves"))
        })
        .collect()
}

fn coherence(max_edges: usize, max_size: usize) -> Vec<Check> {
    let func = TreeFunctor::new();
    let into = |c: &usize| (0..=max_size).flat_map(|a| PointedMap::all(a, *c)).collect::<Vec<_>>();
    let items: Vec<(LabeledTree, PointedMap)> = labeled_trees(max_edges, max_size)
        .into_iter()
        .flat_map(|x| into(&x.n()).into_iter().map(move |h| (x.clone(), h)))
        .collect();
    tally(&names(&["associativity", "unit triangles"]), &items, |(x, h)| coherence_at(&func, x, h, &into))
}

fn equivalence(max_edges: usize) -> (Vec<Check>, Vec<HomSize>) {
    let ts = trees(max_edges);
    let func = TreeFunctor::new();
    let groth = OplaxGroth { functor: &func };
    let objects: Vec<LabeledTree> = ts.iter().map(|t| LabeledTree::canonical(t.clone())).collect();
    let ps = pairs(ts.len());
    let sizes: Vec<usize> = ps.par_iter().map(|&(i, j)| hom_set(&ts[i], &ts[j]).len()).collect();
    let checks = tally(&names(&["bijection on hom-sets", "lift is a section", "lift is a retraction"]), &ps, |&(i, j)| {
        let (x, y) = (groth_object(objects[i].clone()), groth_object(objects[j].clone()));
        let here = format!("{} -> {}", ts[i], ts[j]);
        let homs = groth.hom(&x, &y);
        let target: BTreeSet<Vec<usize>> = hom_set(&ts[i], &ts[j]).iter().map(|f| f.map().to_vec()).collect();
        let images: Result<Vec<TreeMorphism>, _> = homs.iter().map(f_functor).collect();
        let bijection = match &images {
            Ok(images) => {
                let set: BTreeSet<Vec<usize>> = images.iter().map(|f| f.map().to_vec()).collect();
                if set.len() == images.len() && set == target {
                    Ok(homs.len())
                } else {
                    Err(format!("{here}: {} morphisms, {} images, {} maps", homs.len(), set.len(), target.len()))
                }
            }
            Err(e) => Err(format!("{here}: {e}")),
        };
        let mut section = Ok(0);
        for f in hom_set(&ts[i], &ts[j]) {
            match lift_morphism(&f, &objects[i], &objects[j]).map(|m| f_functor(&m)) {
                Ok(Ok(g)) if g == f => section = section.map(|n| n + 1),
                _ => {
                    section = Err(format!("{here}: {f:?}"));
                    break;
                }
            }
        }
        let mut retraction = Ok(0);
        for m in &homs {
            let back = f_functor(m).ok().and_then(|f| lift_morphism(&f, &objects[i], &objects[j]).ok());
            if back.as_ref() != Some(m) {
                retraction = Err(format!("{here}: {m:?}"));
                break;
            }
            retraction = retraction.map(|n| n + 1);
        }
        vec![bijection, section, retraction]
    });
    let hom_sizes = ps
        .iter()
        .zip(sizes)
        .map(|(&(i, j), size)| HomSize { src: ts[i].to_string(), dst: ts[j].to_string(), size })
        .collect();
    (checks, hom_sizes)
}

/// G-sets `⨿ G/K` of size at most `max_size`, one per multiset of subgroups.
fn small_gsets(group: &Arc<FiniteGroup>, max_size: usize) -> Vec<GSet> {
    let orbits: Vec<GSet> = group.subgroups().iter().map(|h| Cosets::new(group, h).gset(group)).collect();
    let mut out = vec![GSet::trivial(group.clone(), 0)];
    let mut frontier = vec![(0usize, GSet::trivial(group.clone(), 0))];
    while let Some((from, x)) = frontier.pop() {
        for (k, o) in orbits.iter().enumerate().skip(from) {
            if x.len() + o.len() <= max_size {
                let y = x.disjoint_union(o);
                out.push(y.clone());
                frontier.push((k, y));
            }
        }
    }
    out.sort_by_key(|x| (x.len(), format!("{x:?}")));
    out
}

/// The named regression: the `Z/4`-tree whose orbit contractions build the
/// 8-edge tree with a 4-leaf vertex.
pub fn z4_fixture() -> GTree {
    let tree = Arc::new(Tree::parse("r[b[a ia] e[d[c -c] id[ic -ic]]]").expect("fixture tree"));
    let moves = [("a", "ia"), ("ia", "a"), ("c", "ic"), ("ic", "-c"), ("-c", "-ic"), ("-ic", "c"), ("d", "id"), ("id", "d")];
    let m = moves.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    GTree::from_generators(tree, Arc::new(FiniteGroup::cyclic(4)), &[(1, m)]).expect("fixture action")
}

fn z4_regression() -> Outcome {
    let s = z4_fixture();
    let leaves = GLabeledTree::canonical(s.clone());
    let mut sizes: Vec<usize> = leaves.labels().orbits().iter().map(Vec::len).collect();
    sizes.sort_unstable();
    if sizes != [2, 4] {
        return Err(format!("label orbits {sizes:?}"));
    }
    let a = s.tree().edge("a").map_err(|e| e.to_string())?;
    if s.stabilizer(a).elements() != [0, 2] {
        return Err("stabilizer of a".into());
    }
    let (t, delta) = contract_orbit(&s, "d").map_err(|e| e.to_string())?;
    let (u, delta_b) = contract_orbit(&t, "b").map_err(|e| e.to_string())?;
    if u.tree().to_string() != "r[a e[-c -ic c ic] ia]" {
        return Err(format!("contracted tree {}", u.tree()));
    }
    let f = delta_b.then(&delta).map_err(|e| e.to_string())?;
    let fac = equivariant_factorize(&f);
    let ok = is_equivariant_morphism(&u, &s, f.mor())
        && fac.degeneracies.is_empty()
        && fac.outer_faces.is_empty()
        && fac.inner_faces.len() == 2
        && fac.recompose() == *f.mor()
        && fac.stages_well_typed();
    let (_, half) = crate::omega::contract_edge(s.tree(), "d").map_err(|e| e.to_string())?;
    let lone = GTree::trivial(half.src().clone(), s.group().clone());
    if !ok || is_equivariant_morphism(&lone, &s, &half) {
        return Err(format!("factorization {fac:?}"));
    }
    Ok(1)
}

fn equivariant(group: &Arc<FiniteGroup>, max_edges: usize, max_size: usize) -> Vec<Check> {
    let ts = trees(max_edges);
    let func = GTreeFunctor::new(group.clone());
    let acts: Vec<Vec<GTree>> = ts
        .par_iter()
        .map(|t| {
            let mut v = vec![GTree::trivial(t.clone(), group.clone())];
            v.extend(actions_up_to_conjugacy(t, group).into_iter().filter(|x| !x.is_trivial()));
            v
        })
        .collect();
    let labeled: Vec<Vec<GLabeledTree>> =
        acts.iter().map(|v| v.iter().cloned().map(GLabeledTree::canonical).collect()).collect();
    // trivial actions on both ends reduce to the plain suites
    let items: Vec<(usize, usize)> =
        pairs(ts.len()).into_iter().filter(|&(i, j)| acts[i].len() > 1 || acts[j].len() > 1).collect();
    let prefix = group.name().to_string();
    let mut checks = tally(
        &named(&prefix, &["equivariance filter", "orbit factorization", "hom-set bijection", "lift inverse"]),
        &items,
        |&(i, j)| {
            let h = hom_set(&ts[i], &ts[j]);
            let mut out = vec![Ok(0); 4];
            let mut put = |k: usize, r: Result<usize, String>| {
                if let Ok(n) = out[k] {
                    out[k] = r.map(|m| n + m);
                }
            };
            for (ai, a) in acts[i].iter().enumerate() {
                for (bi, b) in acts[j].iter().enumerate() {
                    if ai == 0 && bi == 0 {
                        continue;
                    }
                    let here = || format!("{a:?} -> {b:?}");
                    let orb = equivariant_hom(a, b);
                    let mut filtered: Vec<&TreeMorphism> = h.iter().filter(|f| is_equivariant_morphism(a, b, f)).collect();
                    filtered.sort_by(|x, y| x.map().cmp(y.map()));
                    let mut searched: Vec<&TreeMorphism> = orb.iter().collect();
                    searched.sort_by(|x, y| x.map().cmp(y.map()));
                    put(0, if filtered == searched { Ok(orb.len()) } else { Err(format!("{}: {} vs {}", here(), filtered.len(), orb.len())) });
                    let mut factored = Ok(0);
                    for f in &orb {
                        let m = GMorphism::new(a.clone(), b.clone(), f.clone()).map_err(|e| e.to_string());
                        let ok = m.as_ref().is_ok_and(|m| {
                            let fac = equivariant_factorize(m);
                            fac.recompose() == *f && fac.stages_well_typed()
                        });
                        if !ok {
                            factored = Err(format!("{}: {f:?}", here()));
                            break;
                        }
                        factored = factored.map(|n| n + 1);
                    }
                    put(1, factored);
                    let (x, y) = (g_groth_object(labeled[i][ai].clone()), g_groth_object(labeled[j][bi].clone()));
                    let gh = groth_hom_pruned(&x, &y);
                    let images: Result<BTreeSet<Vec<usize>>, _> =
                        gh.iter().map(|m| f_g(&func, m).map(|g| g.mor().map().to_vec())).collect();
                    let want: BTreeSet<Vec<usize>> = orb.iter().map(|f| f.map().to_vec()).collect();
                    put(
                        2,
                        match images {
                            Ok(im) if im.len() == gh.len() && im == want => Ok(gh.len()),
                            Ok(im) => Err(format!("{}: {} morphisms, {} images, {} maps", here(), gh.len(), im.len(), want.len())),
                            Err(e) => Err(format!("{}: {e}", here())),
                        },
                    );
                    let keys: HashSet<(PointedMap, Vec<usize>)> =
                        gh.iter().map(|g| (g.base.map().clone(), g.fiber.mor().map().to_vec())).collect();
                    let mut lifted = Ok(0);
                    for f in &orb {
                        let m = GMorphism::new(a.clone(), b.clone(), f.clone()).expect("equivariant");
                        let ok = lift_g(&func, &m, &labeled[i][ai], &labeled[j][bi]).is_ok_and(|l| {
                            keys.contains(&(l.base.map().clone(), l.fiber.mor().map().to_vec()))
                                && f_g(&func, &l).is_ok_and(|g| g.mor() == f)
                        });
                        if !ok {
                            lifted = Err(format!("{}: {f:?}", here()));
                            break;
                        }
                        lifted = lifted.map(|n| n + 1);
                    }
                    put(3, lifted);
                }
            }
            out
        },
    );
    if max_size > 0 {
        let sets = small_gsets(group, max_size);
        let into = |c: &GSet| sets.iter().flat_map(|a| all_gpointed(a, c)).collect::<Vec<_>>();
        let objects: Vec<GLabeledTree> = labeled.iter().flatten().filter(|x| x.labels().len() <= max_size).cloned().collect();
        let items: Vec<(GLabeledTree, _)> =
            objects.into_iter().flat_map(|x| into(x.labels()).into_iter().map(move |h| (x.clone(), h))).collect();
        checks.extend(tally(&named(&prefix, &["associativity", "unit triangles"]), &items, |(x, h)| {
            coherence_at(&func, x, h, &into)
        }));
    }
    if group.order() == 4 && group.mul(1, 1) == 2 {
        checks.extend(tally(&named(&prefix, &["orbit contraction regression"]), &[()], |_| vec![z4_regression()]));
    }
    checks
}

struct Orbit {
    subgroup: Subgroup,
    cosets: Arc<Cosets>,
}

struct Object {
    orbit: usize,
    gtree: GTree,
    forest: GForest,
    labeled: LabeledForest,
}

/// `K` contains a conjugate of `H`: the number of `H`-fixed cosets of `K`.
fn fixed_cosets(group: &FiniteGroup, h: &Subgroup, k: &Subgroup) -> usize {
    let cosets = Cosets::new(group, k);
    (0..cosets.len()).filter(|&c| h.elements().iter().all(|&x| cosets.act(group, x, c) == c)).count()
}

fn is_iso(m: &ForestMorphism, a: &GForest, b: &GForest) -> bool {
    let index: BTreeSet<usize> = m.index.iter().copied().collect();
    index.len() == b.len()
        && a.len() == b.len()
        && m.maps.iter().enumerate().all(|(i, f)| {
            TreeMorphism::new(a.components()[i].clone(), b.components()[m.index[i]].clone(), f.clone())
                .is_ok_and(|f| f.is_isomorphism())
        })
}

/// Every action of `group` on every list of at most `max_components`
/// trees, given on generators by arbitrary tree maps; the invalid ones are
/// rejected by validation.
fn brute_forests(group: &Arc<FiniteGroup>, ts: &[Arc<Tree>], max_components: usize) -> Vec<(Vec<usize>, Vec<GForest>)> {
    let gens = group.generators();
    let tuples: Vec<Vec<usize>> =
        (1..=max_components).flat_map(|n| (0..n).map(|_| 0..ts.len()).multi_cartesian_product()).collect();
    tuples
        .into_par_iter()
        .map(|tuple| {
            let n = tuple.len();
            let comps: Vec<Arc<Tree>> = tuple.iter().map(|&i| ts[i].clone()).collect();
            let mut choices: Vec<(Vec<usize>, Vec<TreeMorphism>)> = Vec::new();
            for perm in (0..n).permutations(n) {
                let homs: Vec<Vec<TreeMorphism>> = (0..n).map(|i| hom_set(&comps[i], &comps[perm[i]])).collect();
                for maps in homs.iter().map(|h| h.iter().cloned()).multi_cartesian_product() {
                    choices.push((perm.clone(), maps));
                }
                if n == 0 {
                    choices.push((perm.clone(), Vec::new()));
                }
            }
            let accepted = (0..gens.len())
                .map(|_| 0..choices.len())
                .multi_cartesian_product()
                .filter_map(|pick| {
                    let data: Vec<_> =
                        pick.iter().zip(&gens).map(|(&c, &g)| (g, choices[c].0.clone(), choices[c].1.clone())).collect();
                    GForest::from_generators(group.clone(), comps.clone(), &data).ok()
                })
                .collect();
            (tuple, accepted)
        })
        .collect()
}

fn genuine(group: &Arc<FiniteGroup>, max_edges: usize, max_size: usize, max_components: usize) -> Vec<Check> {
    let prefix = group.name().to_string();
    let ts = trees(max_edges);
    let subgroups = group.subgroups();
    let mut checks = tally(&named(&prefix, &["orbit category"]), &pairs(subgroups.len()), |&(a, b)| {
        let (h, k) = (&subgroups[a], &subgroups[b]);
        let homs = orbit_hom(group, &Cosets::new(group, h), &Cosets::new(group, k));
        vec![if homs.len() == fixed_cosets(group, h, k) { Ok(1) } else { Err(format!("{h:?} -> {k:?}: {}", homs.len())) }]
    });
    checks.extend(tally(&named(&prefix, &["stabilizer inclusion equivalence"]), &subgroups, |h| {
        let d = CosetGroupoid::new(group.clone(), h);
        let (c, functor) = IncludeStabilizer::one_object(group, h);
        let report = check_equivalence(&c, &d, &functor, &[0], &d.objects());
        vec![if report.is_equivalence() { Ok(1) } else { Err(format!("{h:?}: {:?}", report.witnesses)) }]
    }));

    let orbits: Vec<Orbit> = subgroups
        .iter()
        .map(|h| Orbit { subgroup: h.clone(), cosets: Arc::new(Cosets::new(group, h)) })
        .filter(|o| o.cosets.len() <= max_components)
        .collect();
    let objects: Vec<Object> = orbits
        .iter()
        .enumerate()
        .flat_map(|(k, o)| {
            let restricted = Arc::new(group.restrict(&o.subgroup));
            ts.iter()
                .flat_map(|t| actions_up_to_conjugacy(t, &restricted))
                .map(|gtree| {
                    let forest = induce(group, &o.subgroup, &gtree);
                    let labeled = LabeledForest::canonical(forest.clone(), &o.subgroup).expect("induced forests label");
                    Object { orbit: k, gtree, forest, labeled }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let brute = brute_forests(group, &ts, max_components);
    checks.extend(tally(&named(&prefix, &["transitive forests", "object correspondence"]), &brute, |(tuple, accepted)| {
        let mut out = vec![Ok(0), Ok(0)];
        for f in accepted.iter().filter(|f| f.is_genuine()) {
            let comps = f.components();
            if !comps.iter().all(|t| t.is_isomorphic(&comps[0])) {
                out[0] = Err(format!("{tuple:?}: {f:?}"));
                break;
            }
            out[0] = out[0].clone().map(|n| n + 1);
            let h = f.root_gset().stabilizer(0);
            let induced = induce(group, &h, &f.fiber_gtree(&h));
            if !forest_hom(f, &induced).iter().any(|m| is_iso(m, f, &induced)) {
                out[1] = Err(format!("{tuple:?}: {f:?}"));
                break;
            }
            out[1] = out[1].clone().map(|n| n + 1);
        }
        out
    }));
    checks.extend(tally(&named(&prefix, &["induction round trip"]), &objects, |x| {
        let o = &orbits[x.orbit];
        let ok = x.forest.coset_subgroup().as_ref() == Some(&o.subgroup)
            && x.forest.fiber_gtree(&o.subgroup) == x.gtree
            && x.labeled.fiber().gtree() == &x.gtree;
        vec![if ok { Ok(1) } else { Err(format!("{:?}", x.gtree)) }]
    }));

    let check_names = named(&prefix, &["coset description", "iterated equivalence", "fiber equivalence"]);
    checks.extend(tally(&check_names, &pairs(objects.len()), |&(i, j)| {
        let (a, b) = (&objects[i], &objects[j]);
        let here = format!("{:?} -> {:?}", a.forest, b.forest);
        let brute = forest_hom(&a.forest, &b.forest);
        let (ca, cb) = (&orbits[a.orbit].cosets, &orbits[b.orbit].cosets);
        let coset = if coset_forest_hom(&a.forest, ca, &b.forest, cb) == brute { Ok(brute.len()) } else { Err(here.clone()) };
        let homs = iterated_hom(&a.labeled, &b.labeled);
        let images: Result<BTreeSet<ForestMorphism>, _> = homs.iter().map(|m| iterated_to_forest(&a.labeled, m)).collect();
        let want: BTreeSet<ForestMorphism> = brute.iter().cloned().collect();
        let iterated = match images {
            Ok(im) if im.len() == homs.len() && im == want => Ok(homs.len()),
            Ok(im) => Err(format!("{here}: {} morphisms, {} images, {} maps", homs.len(), im.len(), want.len())),
            Err(e) => Err(format!("{here}: {e}")),
        };
        let fiber = if a.orbit != b.orbit {
            Ok(0)
        } else {
            let homs = labeled_groth_hom(&a.labeled, &b.labeled);
            let images: BTreeSet<(Vec<usize>, Vec<usize>)> =
                homs.iter().map(|m| (pointed(&m.phi.fiber().map().clone()), m.f.maps()[0].map().to_vec())).collect();
            let (x, y) = (g_groth_object(a.labeled.fiber()), g_groth_object(b.labeled.fiber()));
            let want: BTreeSet<(Vec<usize>, Vec<usize>)> =
                groth_hom_pruned(&x, &y).iter().map(|m| (pointed(m.base.map()), m.fiber.mor().map().to_vec())).collect();
            if images.len() == homs.len() && images == want {
                Ok(homs.len())
            } else {
                Err(format!("{here}: {} morphisms, {} images, {} maps", homs.len(), images.len(), want.len()))
            }
        };
        vec![coset, iterated, fiber]
    }));

    // maps of orbits and the objects over their targets
    let maps: Vec<OrbitMap> = pairs(orbits.len())
        .into_iter()
        .flat_map(|(a, b)| {
            orbit_hom(group, &orbits[a].cosets, &orbits[b].cosets).into_iter().map(move |m| (a, b, m))
        })
        .map(|(a, b, m)| OrbitMap::new(group, orbits[a].cosets.clone(), orbits[b].cosets.clone(), m).expect("orbit map"))
        .collect();
    let over = |c: &Arc<Cosets>| -> Vec<usize> {
        (0..objects.len()).filter(|&x| objects[x].labeled.labels().cosets() == c).collect()
    };
    let squares: Vec<(usize, usize, usize)> = maps
        .iter()
        .enumerate()
        .flat_map(|(k, q)| {
            let ys = over(&q.dst);
            ys.iter().flat_map(|&y| ys.iter().map(move |&z| (k, y, z))).collect::<Vec<_>>()
        })
        .collect();
    checks.extend(tally(&named(&prefix, &["eta squares", "pullback composition"]), &squares, |&(k, y, z)| {
        let q = &maps[k];
        let (y, z) = (&objects[y].labeled, &objects[z].labeled);
        let here = format!("{q:?} at {y:?} -> {z:?}");
        let homs = labeled_groth_hom(y, z);
        let qy = pullback_object(q, y);
        let mut eta_out = Ok(0);
        for m in &homs {
            let ok = pullback_morphism(q, y, m)
                .and_then(|qm| Ok(eta(&qy, &qm)? == pullback_forest_morphism(q, &eta(y, m)?)))
                .unwrap_or(false);
            if !ok {
                eta_out = Err(format!("{here}: {m:?}"));
                break;
            }
            eta_out = eta_out.map(|n| n + 1);
        }
        let mut composite = Ok(0);
        for p in maps.iter().filter(|p| p.dst == q.src) {
            let pq = p.then(q).expect("composable");
            let ok = pullback_object(&pq, y) == pullback_object(p, &qy)
                && homs.iter().all(|m| {
                    let direct = pullback_morphism(&pq, y, m);
                    let twice = pullback_morphism(q, y, m).and_then(|qm| pullback_morphism(p, &qy, &qm));
                    matches!((direct, twice), (Ok(a), Ok(b)) if a == b)
                });
            if !ok {
                composite = Err(format!("{p:?} then {here}"));
                break;
            }
            composite = composite.map(|n| n + 1 + homs.len());
        }
        vec![eta_out, composite]
    }));

    // oplax coherence of each T^{G/H} over small retractive sets
    let items: Vec<(usize, LabeledForest, crate::genuine::RetractiveMap)> = orbits
        .iter()
        .enumerate()
        .flat_map(|(k, o)| {
            let sets = retractive_sets(group, o, max_size);
            over(&o.cosets)
                .into_iter()
                .map(|x| &objects[x])
                .filter(|x| x.labeled.labels().len() <= max_size && x.gtree.tree().edge_count() <= 3)
                .flat_map(|x| {
                    sets.iter()
                        .flat_map(|c| retractive_maps(c, x.labeled.labels()))
                        .map(|h| (k, x.labeled.clone(), h))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let funcs: Vec<ForestFunctor> = orbits.iter().map(|o| ForestFunctor::new(o.cosets.clone())).collect();
    let sets: Vec<Vec<Retractive>> = orbits.iter().map(|o| retractive_sets(group, o, max_size)).collect();
    checks.extend(tally(&named(&prefix, &["forest associativity", "forest unit triangles"]), &items, |(k, x, h)| {
        let into = |c: &Retractive| sets[*k].iter().flat_map(|a| retractive_maps(a, c)).collect::<Vec<_>>();
        coherence_at(&funcs[*k], x, h, &into)
    }));
    checks
}

fn pointed(m: &PointedMap) -> Vec<usize> {
    (1..=m.src()).map(|i| m.apply(i)).collect()
}

/// Retractive sets over `o` with at most two orbits and `max_size` labels.
fn retractive_sets(group: &Arc<FiniteGroup>, o: &Orbit, max_size: usize) -> Vec<Retractive> {
    let pieces: Vec<Retractive> = group
        .subgroups()
        .iter()
        .flat_map(|k| {
            let src = Cosets::new(group, k);
            orbit_hom(group, &src, &o.cosets)
                .into_iter()
                .map(|m| Retractive::new(o.cosets.clone(), src.gset(group), m).expect("orbit over orbit"))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut out = vec![Retractive::empty(group, o.cosets.clone())];
    for (i, a) in pieces.iter().enumerate() {
        if a.len() <= max_size {
            out.push(a.clone());
        }
        for b in &pieces[i..] {
            if a.len() + b.len() <= max_size {
                out.push(a.disjoint_union(b).expect("same orbit"));
            }
        }
    }
    out
}
