use std::collections::BTreeSet;
use std::sync::Arc;

use itertools::Itertools;

use dendron::equivariant::actions_up_to_conjugacy;
use dendron::genuine::*;
use dendron::group::*;
use dendron::omega::hom_set;
use dendron::suites::{run, Suite, SuiteConfig};
use dendron::tree::enumerate_trees_by_edges;

fn group(name: &str) -> Arc<FiniteGroup> {
    Arc::new(FiniteGroup::builtin(name).unwrap())
}

/// Forests induced from every action on trees with at most `max_edges`
/// edges, over subgroups of index at most `max_components`.
fn induced(g: &Arc<FiniteGroup>, max_edges: usize, max_components: usize) -> Vec<(Subgroup, GForest)> {
    let trees = enumerate_trees_by_edges(max_edges);
    g.subgroups()
        .into_iter()
        .filter(|h| g.order() / h.order() <= max_components)
        .flat_map(|h| {
            let r = Arc::new(g.restrict(&h));
            trees
                .iter()
                .flat_map(|t| actions_up_to_conjugacy(&Arc::new(t.clone()), &r))
                .map(|t| (h.clone(), induce(g, &h, &t)))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Index maps and component maps as plain arrays, checked edge by edge.
fn brute_hom(a: &GForest, b: &GForest) -> BTreeSet<ForestMorphism> {
    let g = a.group();
    let mut out = BTreeSet::new();
    for index in (0..a.len()).map(|_| 0..b.len()).multi_cartesian_product() {
        let ok = g.elements().all(|x| (0..a.len()).all(|i| index[a.base()[x][i]] == b.base()[x][index[i]]));
        if !ok {
            continue;
        }
        let homs: Vec<Vec<Vec<usize>>> = (0..a.len())
            .map(|i| hom_set(&a.components()[i], &b.components()[index[i]]).into_iter().map(|f| f.map().to_vec()).collect())
            .collect();
        for maps in homs.iter().map(|h| h.iter().cloned()).multi_cartesian_product() {
            let commutes = g.elements().all(|x| {
                (0..a.len()).all(|i| {
                    let j = a.base()[x][i];
                    (0..a.components()[i].edge_count())
                        .all(|e| maps[j][a.iso(x, i).apply(e)] == b.iso(x, index[i]).apply(maps[i][e]))
                })
            });
            if commutes {
                out.insert(ForestMorphism { index: index.clone(), maps });
            }
        }
    }
    out
}

#[test]
fn forest_homs_match_the_edge_by_edge_filter() {
    for (name, edges, comps) in [("z2", 3, 2), ("z4", 2, 2), ("z4", 1, 4), ("s3", 2, 3)] {
        let g = group(name);
        let fs = induced(&g, edges, comps);
        let mut total = 0;
        for (_, a) in &fs {
            for (_, b) in &fs {
                let got: BTreeSet<ForestMorphism> = forest_hom(a, b).into_iter().collect();
                assert_eq!(got, brute_hom(a, b), "{name}: {a:?} -> {b:?}");
                total += got.len();
            }
        }
        assert!(total > 0);
    }
}

#[test]
fn coset_description_agrees_for_non_normal_subgroups() {
    for (name, edges, comps) in [("z4", 3, 2), ("z4", 1, 4), ("s3", 2, 3)] {
        let g = group(name);
        let fs = induced(&g, edges, comps);
        for (h, a) in &fs {
            for (k, b) in &fs {
                let (ca, cb) = (Cosets::new(&g, h), Cosets::new(&g, k));
                assert_eq!(coset_forest_hom(a, &ca, b, &cb), forest_hom(a, b), "{name}: {a:?} -> {b:?}");
            }
        }
    }
}

/// Cosets as sets of elements, built from the multiplication table alone.
fn coset_sets(g: &FiniteGroup, h: &Subgroup) -> Vec<BTreeSet<usize>> {
    let mut out: Vec<BTreeSet<usize>> = g.elements().map(|x| h.elements().iter().map(|&k| g.mul(x, k)).collect()).collect();
    out.sort();
    out.dedup();
    out
}

#[test]
fn orbit_maps_are_counted_by_fixed_cosets() {
    for name in ["z2", "z3", "z4", "s3"] {
        let g = group(name);
        for h in g.subgroups() {
            for k in g.subgroups() {
                let fixed = coset_sets(&g, &k)
                    .into_iter()
                    .filter(|c| h.elements().iter().all(|&x| c.iter().map(|&y| g.mul(x, y)).collect::<BTreeSet<_>>() == *c))
                    .count();
                assert_eq!(orbit_hom(&g, &Cosets::new(&g, &h), &Cosets::new(&g, &k)).len(), fixed, "{name} {h:?} {k:?}");
            }
        }
    }
}

#[test]
fn induced_forests_recover_their_fibers() {
    for name in ["z2", "z4", "s3"] {
        let g = group(name);
        for (h, f) in induced(&g, 3, 6) {
            assert!(f.is_genuine());
            assert_eq!(f.len() * h.order(), g.order());
            assert_eq!(f.coset_subgroup().as_ref(), Some(&h));
            let t = f.fiber_gtree(&h);
            assert_eq!(induce(&g, &h, &t), f);
        }
    }
}

#[test]
fn genuine_suite_passes_for_z4() {
    let config = SuiteConfig { max_edges: 2, max_size: 2, max_components: 2, groups: vec!["z4".into()] };
    let report = run(Suite::Genuine, &config).unwrap();
    for c in &report.checks {
        assert!(c.passed, "{c:?}");
    }
    assert!(report.passed);
}
