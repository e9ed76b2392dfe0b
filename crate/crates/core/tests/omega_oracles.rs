use std::collections::BTreeSet;
use std::sync::Arc;

use dendron::omega::*;
use dendron::tree::*;

fn trees(max_edges: usize) -> Vec<Arc<Tree>> {
    enumerate_trees_by_edges(max_edges).into_iter().map(Arc::new).collect()
}

/// Vertex condition checked by building the image subtree explicitly.
fn brute_valid(t: &Tree, s: &Tree, map: &[usize]) -> bool {
    for v in t.vertices() {
        let top = map[v.out];
        let ls: Vec<usize> = v.ins.iter().map(|&e| map[e]).collect();
        let distinct: BTreeSet<usize> = ls.iter().copied().collect();
        if distinct.len() != ls.len() {
            return false;
        }
        let keep: Vec<usize> =
            (0..s.edge_count()).filter(|&y| s.le(y, top) && !ls.iter().any(|&l| y != l && s.le(y, l))).collect();
        let pos = |e: usize| keep.iter().position(|&k| k == e);
        let mut verts = Vec::new();
        for w in s.vertices() {
            if pos(w.out).is_some() && !ls.contains(&w.out) {
                let Some(ins) = w.ins.iter().map(|&e| pos(e)).collect::<Option<Vec<_>>>() else { return false };
                verts.push((pos(w.out).unwrap(), ins));
            }
        }
        let names = keep.iter().map(|&e| s.name(e).to_string()).collect();
        let Some(r) = pos(top) else { return false };
        let Ok(sub) = Tree::build(names, r, verts) else { return false };
        let leaves: BTreeSet<&str> = sub.leaves().iter().map(|&l| sub.name(l)).collect();
        let want: BTreeSet<&str> = ls.iter().map(|&l| s.name(l)).collect();
        if leaves != want {
            return false;
        }
    }
    true
}

fn all_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| (0..m).map(move |y| { let mut q = p.clone(); q.push(y); q })).collect();
    }
    out
}

#[test]
fn hom_set_matches_brute_force_up_to_four_edges() {
    let ts = trees(4);
    for t in &ts {
        for s in &ts {
            let brute: Vec<Vec<usize>> =
                all_maps(t.edge_count(), s.edge_count()).into_iter().filter(|m| brute_valid(t, s, m)).collect();
            let fast: Vec<Vec<usize>> = hom_set(t, s).into_iter().map(|f| f.map().to_vec()).collect();
            assert_eq!(brute, fast, "{t} -> {s}");
        }
    }
}

#[test]
fn every_morphism_is_monotone_and_injective_faces_keep_incomparability() {
    let ts = trees(5);
    for t in &ts {
        for s in &ts {
            for f in hom_set(t, s) {
                for x in 0..t.edge_count() {
                    for y in 0..t.edge_count() {
                        if t.le(x, y) {
                            assert!(s.le(f.apply(x), f.apply(y)));
                        }
                        if f.is_injective() && t.relation(x, y) == Relation::Incomparable {
                            assert_eq!(s.relation(f.apply(x), f.apply(y)), Relation::Incomparable);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn factorization_replays_on_all_pairs_up_to_five_edges() {
    let ts = trees(5);
    let mut count = 0;
    for t in &ts {
        for s in &ts {
            for f in hom_set(t, s) {
                let fac = factorize(&f);
                assert_eq!(fac.recompose(), f);
                assert!(fac.stages_well_typed(), "{f:?}");
                assert_eq!(factorize(&fac.recompose()), fac);
                count += 1;
            }
        }
    }
    assert!(count > 1000);
}

#[test]
fn generator_composites_replay() {
    let ts = trees(4);
    for s in &ts {
        for g1 in generators_into(s) {
            for g2 in generators_into(g1.src()) {
                let h = compose(&g2, &g1).unwrap();
                assert_eq!(factorize(&h).recompose(), h);
                for g3 in generators_into(g2.src()).into_iter().take(6) {
                    let k = compose(&g3, &h).unwrap();
                    assert_eq!(factorize(&k).recompose(), k);
                }
            }
        }
    }
}

#[test]
fn face_degeneracy_composites_agree_with_edge_maps() {
    for s in trees(4) {
        for e in 0..s.edge_count() {
            let (t, sigma) = split_edge(&s, s.name(e)).unwrap();
            assert!(sigma.is_surjective());
            let merged: Vec<usize> = (0..t.edge_count()).filter(|&x| sigma.apply(x) == e).collect();
            assert_eq!(merged.len(), 2);
            for i in t.inner_edges() {
                let (u, delta) = contract_edge(&t, t.name(i)).unwrap();
                let c = compose(&delta, &sigma).unwrap();
                for x in 0..u.edge_count() {
                    assert_eq!(c.apply(x), sigma.apply(delta.apply(x)));
                }
                assert!(TreeMorphism::new(u.clone(), s.clone(), c.map().to_vec()).is_ok());
            }
        }
    }
}

#[test]
fn enumeration_matches_vertex_table_oracle() {
    // independent generator: every vertex table with `leaves + vertices` edges
    fn oracle(leaves: usize, max_vertices: usize) -> BTreeSet<CanonicalForm> {
        let mut found = BTreeSet::new();
        for v in 0..=max_vertices {
            let edges = leaves + v;
            if edges == 0 {
                continue;
            }
            let names: Vec<String> = (0..edges).map(|i| format!("x{i}")).collect();
            for mask in 0u32..(1 << edges) {
                let outs: Vec<usize> = (0..edges).filter(|&e| mask >> e & 1 == 1).collect();
                if outs.len() != v || (outs.is_empty() && edges > 1) {
                    continue;
                }
                let choices = outs.len().max(1);
                for code in 0..choices.pow(edges as u32 - 1) {
                    let mut c = code;
                    let mut verts: Vec<(usize, Vec<usize>)> = outs.iter().map(|&o| (o, Vec::new())).collect();
                    for e in 1..edges {
                        verts[c % choices].1.push(e);
                        c /= choices;
                    }
                    if let Ok(t) = Tree::build(names.clone(), 0, verts) {
                        assert_eq!(t.leaves().len(), leaves);
                        found.insert(t.canonical_form());
                    }
                }
            }
        }
        found
    }
    for (n, k) in [(0, 2), (1, 2), (2, 2), (3, 2), (2, 3), (1, 3)] {
        let fast: BTreeSet<CanonicalForm> = enumerate_trees(n, k).iter().map(|t| t.canonical_form()).collect();
        assert_eq!(fast, oracle(n, k), "leaves {n}, vertices {k}");
    }
    assert_eq!(enumerate_trees(2, 2).len(), oracle(2, 2).len());
}

#[test]
fn canonical_form_agrees_with_isomorphism_search() {
    let mut ts = Vec::new();
    for n in 0..=3 {
        ts.extend(enumerate_trees(n, 3));
    }
    // renamed copies with shuffled names
    let copies: Vec<Tree> = ts.iter().map(|t| t.rename(|e| format!("z{}", t.edge_count() - e)).unwrap()).collect();
    for a in ts.iter().chain(&copies) {
        for b in ts.iter().chain(&copies) {
            let same = a.canonical_form() == b.canonical_form();
            assert_eq!(same, are_isomorphic(a, b).is_some());
            if let Some(m) = are_isomorphic(a, b) {
                let f = TreeMorphism::new(Arc::new(a.clone()), Arc::new(b.clone()), m).unwrap();
                assert!(f.is_isomorphism());
            }
        }
    }
}

#[test]
fn automorphism_counts_match_brute_force() {
    for t in trees(5) {
        let brute = all_maps(t.edge_count(), t.edge_count())
            .into_iter()
            .filter(|m| {
                let f = TreeMorphism::new(t.clone(), t.clone(), m.clone());
                f.is_ok_and(|f| f.is_isomorphism())
            })
            .count();
        assert_eq!(isomorphisms(&t, &t).len(), brute, "{t}");
    }
}

#[test]
fn poset_laws_on_enumerated_trees() {
    for t in trees(6) {
        let p = t.poset();
        for x in 0..t.edge_count() {
            assert!(p.le(x, t.root()));
            for y in 0..t.edge_count() {
                if p.le(x, y) && p.le(y, x) {
                    assert_eq!(x, y);
                }
                for z in 0..t.edge_count() {
                    if p.le(z, x) && p.le(z, y) {
                        assert!(p.le(x, y) || p.le(y, x));
                    }
                    if p.le(x, y) && p.le(y, z) {
                        assert!(p.le(x, z));
                    }
                }
            }
        }
    }
}

#[test]
fn subtree_matches_closure_oracle() {
    for t in trees(5) {
        let n = t.edge_count();
        for mask in 1u32..(1 << n) {
            let keep: Vec<usize> = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
            let names: Vec<&str> = keep.iter().map(|&e| t.name(e)).collect();
            for &r in &keep {
                let ok = keep.iter().all(|&k| {
                    let mut e = k;
                    while e != r {
                        match t.parent(e) {
                            Some(p) if mask >> p & 1 == 1 => e = p,
                            _ => return false,
                        }
                    }
                    true
                }) && t.vertices().iter().all(|v| {
                    mask >> v.out & 1 == 0 || {
                        let c = v.ins.iter().filter(|&&e| mask >> e & 1 == 1).count();
                        c == 0 || c == v.ins.len()
                    }
                });
                assert_eq!(t.subtree(t.name(r), &names).is_ok(), ok, "{t} {names:?} at {}", t.name(r));
            }
        }
    }
}

#[test]
fn graft_then_restrict_recovers_the_tree() {
    for t in trees(4) {
        let mut sites: Vec<GraftSite> = t.leaves().iter().map(|&l| GraftSite::Leaf(t.name(l).into())).collect();
        sites.push(GraftSite::Root);
        for site in sites {
            for a in 0..3 {
                let Ok((g, emb)) = t.graft(&site, a) else { continue };
                let leaves: Vec<usize> = t.leaves().iter().map(|&l| emb[l]).collect();
                let back = g.subtree_spanned(emb[t.root()], &leaves).unwrap();
                assert_eq!(back, *t);
                if a > 0 {
                    let keep: Vec<&str> = emb.iter().map(|&e| g.name(e)).collect();
                    assert_eq!(g.subtree(g.name(emb[t.root()]), &keep).unwrap(), *t);
                }
            }
        }
    }
}
