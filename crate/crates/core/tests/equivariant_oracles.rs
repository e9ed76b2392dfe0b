use std::sync::Arc;

use itertools::Itertools;

use dendron::equivariant::*;
use dendron::group::*;
use dendron::omega::*;
use dendron::oplax::check_oplax_coherence;
use dendron::tree::*;

fn trees(max_edges: usize) -> Vec<Arc<Tree>> {
    enumerate_trees_by_edges(max_edges).into_iter().map(Arc::new).collect()
}

fn group(name: &str) -> Arc<FiniteGroup> {
    Arc::new(FiniteGroup::builtin(name).unwrap())
}

fn gtrees(max_edges: usize, g: &Arc<FiniteGroup>) -> Vec<GTree> {
    trees(max_edges).iter().flat_map(|t| actions_up_to_conjugacy(t, g)).collect()
}

fn conjugate(a: &[Vec<usize>], b: &[Vec<usize>], auts: &[Vec<usize>]) -> bool {
    auts.iter().any(|c| a.iter().zip(b).all(|(p, q)| (0..p.len()).all(|e| c[p[e]] == q[c[e]])))
}

/// Every homomorphism `G → Aut(T)`, by trying all assignments of
/// automorphisms to group elements.
fn all_actions(t: &Tree, g: &FiniteGroup) -> Vec<Vec<Vec<usize>>> {
    let auts = isomorphisms(t, t);
    (0..g.order())
        .map(|_| auts.iter())
        .multi_cartesian_product()
        .map(|ps| ps.into_iter().cloned().collect::<Vec<_>>())
        .filter(|ps| {
            g.elements().all(|a| {
                g.elements().all(|b| (0..t.edge_count()).all(|e| ps[g.mul(a, b)][e] == ps[a][ps[b][e]]))
            })
        })
        .collect()
}

#[test]
fn actions_up_to_conjugacy_are_complete_and_distinct() {
    let mut nontrivial = 0;
    for name in ["z2", "z3", "z4"] {
        let g = group(name);
        for t in trees(5) {
            let auts = isomorphisms(&t, &t);
            let found = actions_up_to_conjugacy(&t, &g);
            nontrivial += found.len() - 1;
            for (a, b) in found.iter().tuple_combinations() {
                assert!(!conjugate(a.action(), b.action(), &auts), "{t}");
            }
            for act in all_actions(&t, &g) {
                assert!(found.iter().any(|x| conjugate(&act, x.action(), &auts)), "{name} on {t}: {act:?}");
            }
        }
    }
    assert!(nontrivial > 20, "{nontrivial}");
}

/// `f(g·e) = g·f(e)` for all `g` and `e`.
fn commutes(t: &GTree, s: &GTree, f: &TreeMorphism) -> bool {
    t.group().elements().all(|g| (0..t.tree().edge_count()).all(|e| f.apply(t.act(g, e)) == s.act(g, f.apply(e))))
}

#[test]
fn equivariant_homs_for_s3_match_the_filter() {
    let g = group("s3");
    let ts = gtrees(5, &g);
    assert!(ts.iter().any(|t| !t.is_trivial()));
    for a in &ts {
        for b in &ts {
            if a.is_trivial() && b.is_trivial() {
                continue;
            }
            let mut want: Vec<Vec<usize>> =
                hom_set(a.tree(), b.tree()).into_iter().filter(|f| commutes(a, b, f)).map(|f| f.map().to_vec()).collect();
            let mut got: Vec<Vec<usize>> = equivariant_hom(a, b).into_iter().map(|f| f.map().to_vec()).collect();
            want.sort();
            got.sort();
            assert_eq!(got, want, "{a:?} -> {b:?}");
        }
    }
}

#[test]
fn orbit_generators_are_equivariant_and_factor() {
    for name in ["z2", "z3", "z4", "s3"] {
        let g = group(name);
        for s in gtrees(5, &g) {
            let t = s.tree();
            for e in 0..t.edge_count() {
                let (u, sigma) = split_orbit(&s, t.name(e)).unwrap();
                assert!(commutes(&u, &s, sigma.mor()));
                assert_eq!(orbit_generator_kind(&sigma).map(|k| matches!(k, OrbitGenerator::Degeneracy)), Some(true));
                if !t.is_inner(e) {
                    continue;
                }
                let (u, delta) = contract_orbit(&s, t.name(e)).unwrap();
                assert!(commutes(&u, &s, delta.mor()));
                let orbit = s.orbit(e);
                for order in orbit.iter().permutations(orbit.len()) {
                    let names: Vec<&str> = order.iter().map(|&&x| t.name(x)).collect();
                    let mut cur = t.clone();
                    let mut maps = Vec::new();
                    for n in &names {
                        let (next, d) = contract_edge(&cur, n).unwrap();
                        maps.push(d);
                        cur = next;
                    }
                    maps.reverse();
                    let composite = compose_all(&maps[0], &maps[1..]).unwrap();
                    assert_eq!(composite.map(), delta.mor().map(), "{name}: {t} at {}", t.name(e));
                }
            }
        }
    }
}

#[test]
fn factorization_replays_for_every_group() {
    for name in ["z2", "z3", "z4", "s3"] {
        let g = group(name);
        let ts = gtrees(5, &g);
        for a in &ts {
            for b in &ts {
                for f in equivariant_hom(a, b) {
                    let m = GMorphism::new(a.clone(), b.clone(), f.clone()).unwrap();
                    let fac = equivariant_factorize(&m);
                    assert_eq!(fac.recompose(), f);
                    assert!(fac.stages_well_typed());
                    assert!(fac.stages().all(|st| commutes(st.src(), st.dst(), st.mor())));
                }
            }
        }
    }
}

fn z2_sets(max: usize) -> Vec<GSet> {
    let g = group("z2");
    let fixed = GSet::trivial(g.clone(), 1);
    let free = Cosets::new(&g, &g.subgroup(&[0]).unwrap()).gset(&g);
    let mut out = Vec::new();
    for free_count in 0..=max / 2 {
        for fixed_count in 0..=max - 2 * free_count {
            let mut a = GSet::trivial(g.clone(), 0);
            for _ in 0..free_count {
                a = a.disjoint_union(&free);
            }
            for _ in 0..fixed_count {
                a = a.disjoint_union(&fixed);
            }
            out.push(a);
        }
    }
    out
}

#[test]
fn z2_tree_functor_is_coherent_up_to_three_labels() {
    let g = group("z2");
    let func = GTreeFunctor::new(g.clone());
    let sets = z2_sets(3);
    let into = |c: &GSet| sets.iter().flat_map(|a| all_gpointed(a, c)).collect::<Vec<_>>();
    let objects: Vec<GLabeledTree> = gtrees(2, &g).into_iter().map(GLabeledTree::canonical).collect();
    let mut triples = 0;
    for x in &objects {
        for h in into(x.labels()) {
            for gm in into(h.src()) {
                for f in into(gm.src()) {
                    assert!(check_oplax_coherence(&func, &f, &gm, &h, x).unwrap(), "{f:?} {gm:?} {h:?} at {x:?}");
                    triples += 1;
                }
            }
        }
    }
    assert!(triples > 1000, "{triples}");
}
