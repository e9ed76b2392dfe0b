use std::collections::BTreeSet;
use std::sync::Arc;

use itertools::Itertools;

use dendron::dendro::*;
use dendron::labeled::*;
use dendron::omega::*;
use dendron::tree::*;

fn trees(max_edges: usize) -> Vec<Arc<Tree>> {
    enumerate_trees_by_edges(max_edges).into_iter().map(Arc::new).collect()
}

fn labelings(t: &Arc<Tree>) -> Vec<LabeledTree> {
    let n = t.leaves().len();
    t.leaves().iter().copied().permutations(n).map(|p| LabeledTree::new(t.clone(), p).unwrap()).collect()
}

fn maps_into(n: usize, max_src: usize) -> Vec<PointedMap> {
    (0..=max_src).flat_map(|m| PointedMap::all(m, n)).collect()
}

#[test]
fn labeled_homs_are_the_label_filter() {
    let ts = trees(5);
    let mut count = 0;
    for t in &ts {
        let x = LabeledTree::canonical(t.clone());
        for s in ts.iter().filter(|s| s.leaves().len() == t.leaves().len()) {
            for y in labelings(s) {
                let want: Vec<Vec<usize>> = hom_set(t, s)
                    .into_iter()
                    .filter(|f| f.apply(t.root()) == s.root() && (1..=x.n()).all(|i| f.apply(x.leaf(i)) == y.leaf(i)))
                    .map(|f| f.map().to_vec())
                    .collect();
                let got: Vec<Vec<usize>> = hom_labeled(&x, &y).unwrap().into_iter().map(|f| f.map().to_vec()).collect();
                assert_eq!(got, want, "{t} -> {s}");
                for f in hom_labeled(&x, &y).unwrap() {
                    let fac = factorize(&f);
                    assert!(fac.outer_faces.is_empty(), "{f:?}");
                    count += 1;
                }
            }
        }
    }
    assert!(count > 100);
}

#[test]
fn phi_star_is_functorial_in_each_fiber() {
    let ts = trees(4);
    let labeled: Vec<LabeledTree> = ts.iter().filter(|t| t.leaves().len() <= 2).flat_map(labelings).collect();
    let mut checked = 0;
    for a in &labeled {
        for b in labeled.iter().filter(|b| b.n() == a.n()) {
            for f in hom_labeled(a, b).unwrap() {
                let f = LabeledMorphism::new(a.clone(), b.clone(), f).unwrap();
                for c in labeled.iter().filter(|c| c.n() == a.n()) {
                    for g in hom_labeled(b, c).unwrap() {
                        let g = LabeledMorphism::new(b.clone(), c.clone(), g).unwrap();
                        let gf = f.then(&g).unwrap();
                        for phi in maps_into(a.n(), 2) {
                            let both = phi_star_mor(&phi, &f).unwrap().then(&phi_star_mor(&phi, &g).unwrap()).unwrap();
                            assert_eq!(phi_star_mor(&phi, &gf).unwrap(), both);
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn tau_id_is_natural() {
    for s in trees(5) {
        for y in labelings(&s).into_iter().take(2) {
            for e in s.inner_edges() {
                let (t, delta) = contract_edge(&s, s.name(e)).unwrap();
                let labels: Vec<usize> = (1..=y.n())
                    .map(|i| (0..t.edge_count()).find(|&x| delta.apply(x) == y.leaf(i)).unwrap())
                    .collect();
                let x = LabeledTree::new(t.clone(), labels).unwrap();
                let d = LabeledMorphism::new(x.clone(), y.clone(), delta).unwrap();
                let id = PointedMap::identity(y.n());
                let top = phi_star_mor(&id, &d).unwrap().then(&tau_id(&y).unwrap()).unwrap();
                let bottom = tau_id(&x).unwrap().then(&d).unwrap();
                assert_eq!(top, bottom, "{s} at {}", s.name(e));
            }
        }
    }
    let ts = trees(4);
    for t in &ts {
        let x = LabeledTree::canonical(t.clone());
        for s in ts.iter().filter(|s| s.leaves().len() == t.leaves().len()) {
            for y in labelings(s) {
                for f in hom_labeled(&x, &y).unwrap() {
                    let f = LabeledMorphism::new(x.clone(), y.clone(), f).unwrap();
                    let id = PointedMap::identity(x.n());
                    let top = phi_star_mor(&id, &f).unwrap().then(&tau_id(&y).unwrap()).unwrap();
                    assert_eq!(top, tau_id(&x).unwrap().then(&f).unwrap());
                }
            }
        }
    }
}

#[test]
fn iota_is_a_composite_of_outer_faces() {
    for t in trees(5) {
        let x = LabeledTree::canonical(t.clone());
        for phi in maps_into(x.n(), 2) {
            let i = iota(&phi, &x).unwrap();
            assert!(i.is_injective());
            for a in 0..t.edge_count() {
                for b in 0..t.edge_count() {
                    if t.relation(a, b) == Relation::Incomparable {
                        assert_eq!(i.dst().relation(i.apply(a), i.apply(b)), Relation::Incomparable);
                    }
                }
            }
            let fac = factorize(&i);
            assert!(fac.degeneracies.is_empty() && fac.inner_faces.is_empty() && fac.iso.is_identity(), "{phi:?} on {t}");
            let attached = phi_star(&phi, &x).unwrap();
            assert_eq!(attached.tree().edge_count(), t.edge_count() + phi.src() + 1);
        }
    }
}

#[test]
fn leaf_preimages_are_disjoint() {
    let ts = trees(5);
    for t in &ts {
        for s in &ts {
            for f in hom_set(t, s) {
                let sets: Vec<BTreeSet<usize>> = t
                    .leaves()
                    .iter()
                    .map(|&l| s.leaves().iter().copied().filter(|&k| s.le(k, f.apply(l))).collect())
                    .collect();
                for (a, b) in sets.iter().tuple_combinations() {
                    assert!(a.is_disjoint(b), "{f:?}");
                }
            }
        }
    }
}

/// Hom-sets of ∫T enumerated from the definition: a pointed map and a
/// label-preserving map out of the attached tree.
fn groth_hom(x: &LabeledTree, y: &LabeledTree) -> Vec<GrothTreeMorphism> {
    PointedMap::all(y.n(), x.n())
        .into_iter()
        .flat_map(|phi| {
            let src = phi_star(&phi, x).unwrap();
            hom_labeled(&src, y)
                .unwrap()
                .into_iter()
                .map(|f| GrothTreeMorphism {
                    src: groth_object(x.clone()),
                    dst: groth_object(y.clone()),
                    base: phi.clone(),
                    fiber: LabeledMorphism::new(src.clone(), y.clone(), f).unwrap(),
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn comparison_is_bijective_on_small_hom_sets() {
    let ts = trees(4);
    for t in &ts {
        let x = LabeledTree::canonical(t.clone());
        for s in &ts {
            let y = labelings(s).pop().unwrap();
            let homs = groth_hom(&x, &y);
            let images: BTreeSet<Vec<usize>> = homs.iter().map(|m| f_functor(m).unwrap().map().to_vec()).collect();
            let want: BTreeSet<Vec<usize>> = hom_set(t, s).iter().map(|f| f.map().to_vec()).collect();
            assert_eq!(images.len(), homs.len(), "{t} -> {s}");
            assert_eq!(images, want, "{t} -> {s}");
            for m in &homs {
                let back = lift_morphism(&f_functor(m).unwrap(), &x, &y).unwrap();
                assert_eq!(&back, m);
            }
        }
    }
}
