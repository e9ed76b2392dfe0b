//! Graphviz export. Vertices are points, edges carry their names, and
//! leaves and the root end in small stub nodes.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::equivariant::GTree;
use crate::genuine::GForest;
use crate::tree::Tree;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Writes the nodes and edges of `t`, node ids prefixed by `p`;
/// `class[e]` is the orbit number of a colored edge.
fn body(out: &mut String, t: &Tree, p: &str, class: &BTreeMap<usize, usize>, indent: &str) {
    let node = |e: usize| format!("{p}v{e}");
    for v in t.vertices() {
        let _ = writeln!(out, "{indent}{} [shape=point];", node(v.out));
    }
    let _ = writeln!(out, "{indent}{p}root [shape=none, label=\"\"];");
    for &l in t.leaves() {
        let _ = writeln!(out, "{indent}{p}leaf{l} [shape=none, label=\"\"];");
    }
    for e in 0..t.edge_count() {
        let upper = if t.producer(e).is_some() { node(e) } else { format!("{p}leaf{e}") };
        let lower = match t.parent(e) {
            Some(_) => node(t.consumer(e).expect("inner or leaf edge").out),
            None => format!("{p}root"),
        };
        let mut attrs = format!("label={}", quote(t.name(e)));
        if let Some(k) = class.get(&e) {
            let _ = write!(attrs, ", color={}, fontcolor={}, class=\"orbit{k}\"", quote(PALETTE[k % PALETTE.len()]), quote(PALETTE[k % PALETTE.len()]));
        }
        let _ = writeln!(out, "{indent}{upper} -> {lower} [{attrs}];");
    }
}

fn header(out: &mut String) {
    out.push_str("digraph tree {\n  rankdir=BT;\n  edge [arrowhead=none];\n");
}

pub fn tree_dot(t: &Tree) -> String {
    let mut out = String::new();
    header(&mut out);
    body(&mut out, t, "", &BTreeMap::new(), "  ");
    out.push_str("}\n");
    out
}

/// Orbits of size at least two get a color each, in order of their least edge.
pub fn gtree_dot(t: &GTree, color_orbits: bool) -> String {
    let mut class = BTreeMap::new();
    let mut out = String::new();
    header(&mut out);
    if color_orbits {
        let mut orbits = t.edge_orbits();
        orbits.sort();
        for (k, orbit) in orbits.iter().filter(|o| o.len() > 1).enumerate() {
            let names: Vec<&str> = orbit.iter().map(|&e| t.tree().name(e)).collect();
            let _ = writeln!(out, "  // orbit{k}: {}", names.join(" "));
            class.extend(orbit.iter().map(|&e| (e, k)));
        }
    }
    body(&mut out, t.tree(), "", &class, "  ");
    out.push_str("}\n");
    out
}

/// One cluster per component; with `color_orbits`, edges are colored by
/// their orbit under the whole action.
pub fn forest_dot(f: &GForest, color_orbits: bool) -> String {
    let comps = f.components();
    let mut class: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); comps.len()];
    let mut out = String::new();
    header(&mut out);
    if color_orbits {
        let mut seen: Vec<Vec<bool>> = comps.iter().map(|t| vec![false; t.edge_count()]).collect();
        let mut k = 0;
        for i in 0..comps.len() {
            for e in 0..comps[i].edge_count() {
                if seen[i][e] {
                    continue;
                }
                let mut orbit: Vec<(usize, usize)> =
                    f.group().elements().map(|g| (f.base()[g][i], f.iso(g, i).apply(e))).collect();
                orbit.sort_unstable();
                orbit.dedup();
                for &(j, x) in &orbit {
                    seen[j][x] = true;
                }
                if orbit.len() > 1 {
                    let names: Vec<String> = orbit.iter().map(|&(j, x)| format!("{j}.{}", comps[j].name(x))).collect();
                    let _ = writeln!(out, "  // orbit{k}: {}", names.join(" "));
                    for &(j, x) in &orbit {
                        class[j].insert(x, k);
                    }
                    k += 1;
                }
            }
        }
    }
    for (i, t) in comps.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster{i} {{\n    label=\"{i}\";");
        body(&mut out, t, &format!("c{i}_"), &class[i], "    ");
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
