//! JSON file formats for groups, G-sets, G-trees and G-forests.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivariant::{EquivariantError, GTree};
use crate::genuine::{GForest, GenuineError};
use crate::group::{FiniteGroup, GSet, GroupError};
use crate::omega::{MorphismError, TreeMorphism};
use crate::tree::{validate_tree, RawTree, Tree, TreeError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("element key {0:?} is not a group element")]
    BadElement(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Equivariant(#[from] EquivariantError),
    #[error(transparent)]
    Genuine(#[from] GenuineError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

/// A builtin group name or an inline table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Name(String),
    Table(FiniteGroup),
}

impl GroupRef {
    pub fn resolve(&self) -> Result<Arc<FiniteGroup>, IoError> {
        match self {
            GroupRef::Name(n) => Ok(Arc::new(FiniteGroup::builtin(n)?)),
            GroupRef::Table(g) => Ok(Arc::new(g.clone())),
        }
    }

    fn of(g: &FiniteGroup) -> Self {
        match FiniteGroup::builtin(g.name()) {
            Ok(b) if b == *g => GroupRef::Name(g.name().to_string()),
            _ => GroupRef::Table(g.clone()),
        }
    }
}

/// Names moved by each listed element; unlisted names are fixed, and
/// unlisted generators act trivially.
pub type ActionTable = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GSetFile {
    pub group: GroupRef,
    pub elements: Vec<String>,
    pub action: ActionTable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GTreeFile {
    #[serde(flatten)]
    pub tree: RawTree,
    pub group: GroupRef,
    pub action: ActionTable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestFile {
    pub group: GroupRef,
    pub components: Vec<RawTree>,
    pub base_action: BTreeMap<String, Vec<usize>>,
    pub isos: BTreeMap<String, Vec<BTreeMap<String, String>>>,
}

fn element(group: &FiniteGroup, key: &str) -> Result<usize, IoError> {
    key.parse().ok().filter(|&g| g < group.order()).ok_or_else(|| IoError::BadElement(key.to_string()))
}

fn moves(names: &[String], table: &BTreeMap<String, String>) -> Result<Vec<usize>, IoError> {
    let pos = |x: &String| names.iter().position(|n| n == x).ok_or_else(|| IoError::UnknownLabel(x.clone()));
    let mut p: Vec<usize> = (0..names.len()).collect();
    for (a, b) in table {
        p[pos(a)?] = pos(b)?;
    }
    Ok(p)
}

pub fn parse_gset(file: &GSetFile) -> Result<GSet, IoError> {
    let group = file.group.resolve()?;
    let mut gens = BTreeMap::new();
    for (k, m) in &file.action {
        gens.insert(element(&group, k)?, moves(&file.elements, m)?);
    }
    for g in group.generators() {
        gens.entry(g).or_insert_with(|| (0..file.elements.len()).collect());
    }
    let n = file.elements.len();
    let mut action: Vec<Option<Vec<usize>>> = vec![None; group.order()];
    action[0] = Some((0..n).collect());
    let mut frontier = vec![0];
    while let Some(a) = frontier.pop() {
        for (&g, p) in &gens {
            let b = group.mul(g, a);
            let row: Vec<usize> = action[a].as_ref().expect("reached").iter().map(|&x| p[x]).collect();
            match &action[b] {
                Some(q) if *q != row => return Err(GroupError::NotAnAction(g, a).into()),
                Some(_) => {}
                None => {
                    action[b] = Some(row);
                    frontier.push(b);
                }
            }
        }
    }
    let action = action.into_iter().collect::<Option<Vec<_>>>().ok_or(GroupError::ActionShape)?;
    Ok(GSet::new(group, action, None)?)
}

pub fn parse_gtree(file: &GTreeFile) -> Result<GTree, IoError> {
    let group = file.group.resolve()?;
    let tree = Arc::new(validate_tree(&file.tree)?);
    let mut gens = file.action.iter().map(|(k, m)| Ok((element(&group, k)?, m.clone()))).collect::<Result<Vec<_>, IoError>>()?;
    for g in group.generators() {
        if !gens.iter().any(|(h, _)| *h == g) {
            gens.push((g, BTreeMap::new()));
        }
    }
    Ok(GTree::from_generators(tree, group, &gens)?)
}

pub fn gtree_file(t: &GTree) -> GTreeFile {
    let tree = t.tree();
    let action = t
        .group()
        .elements()
        .skip(1)
        .map(|g| {
            let m = (0..tree.edge_count())
                .filter(|&e| t.act(g, e) != e)
                .map(|e| (tree.name(e).to_string(), tree.name(t.act(g, e)).to_string()))
                .collect();
            (g.to_string(), m)
        })
        .collect();
    GTreeFile { tree: tree.raw(), group: GroupRef::of(t.group()), action }
}

pub fn parse_forest(file: &ForestFile) -> Result<GForest, IoError> {
    let group = file.group.resolve()?;
    let components =
        file.components.iter().map(|r| validate_tree(r).map(Arc::new)).collect::<Result<Vec<Arc<Tree>>, _>>()?;
    let n = components.len();
    let mut gens = Vec::new();
    for (k, perm) in &file.base_action {
        let g = element(&group, k)?;
        if perm.len() != n || perm.iter().any(|&j| j >= n) {
            return Err(GenuineError::ActionNotFunctorial(g, g).into());
        }
        let tables = file.isos.get(k).cloned().unwrap_or_else(|| vec![BTreeMap::new(); n]);
        if tables.len() != n {
            return Err(GenuineError::ComponentIsoInvalid(g, tables.len().min(n)).into());
        }
        let isos = (0..n)
            .map(|i| {
                let (src, dst) = (&components[i], &components[perm[i]]);
                TreeMorphism::by_names(src.clone(), dst.clone(), |x| tables[i].get(x).cloned().unwrap_or_else(|| x.to_string()))
                    .map_err(|_| IoError::Genuine(GenuineError::ComponentIsoInvalid(g, i)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        gens.push((g, perm.clone(), isos));
    }
    for g in group.generators() {
        if !gens.iter().any(|(h, _, _)| *h == g) {
            gens.push((g, (0..n).collect(), components.iter().map(|t| TreeMorphism::identity(t.clone())).collect()));
        }
    }
    Ok(GForest::from_generators(group, components, &gens)?)
}

/// Any of the accepted input documents.
#[derive(Debug, Clone)]
pub enum Document {
    Tree(Tree),
    GTree(GTree),
    Forest(GForest),
}

pub fn parse_document(text: &str) -> Result<Document, IoError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("components").is_some() {
        Ok(Document::Forest(parse_forest(&serde_json::from_value(value)?)?))
    } else if value.get("action").is_some() {
        Ok(Document::GTree(parse_gtree(&serde_json::from_value(value)?)?))
    } else {
        Ok(Document::Tree(validate_tree(&serde_json::from_value(value)?)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gtree_round_trip() {
        let text = r#"{"edges":["r","a","b"],"root":"r","vertices":[{"out":"r","in":["a","b"]}],
            "group":"z2","action":{"1":{"a":"b","b":"a"}}}"#;
        let Document::GTree(t) = parse_document(text).unwrap() else { panic!("not a G-tree") };
        assert_eq!(t.edge_orbits().len(), 2);
        let back = parse_gtree(&gtree_file(&t)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn gset_example_orbits() {
        let text = r#"{"group":"z4","elements":["x","ix","y","-y","iy","-iy"],
            "action":{"1":{"x":"ix","ix":"x","y":"iy","iy":"-y","-y":"-iy","-iy":"y"}}}"#;
        let a = parse_gset(&serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(a.orbits(), vec![vec![0, 1], vec![2, 3, 4, 5]]);
        assert_eq!(a.stabilizer(0).order(), 2);
        assert_eq!(a.stabilizer(2).order(), 1);
    }

    #[test]
    fn forests_parse_and_validate() {
        let c2 = r#"{"edges":["r","a","b"],"root":"r","vertices":[{"out":"r","in":["a","b"]}]}"#;
        let c3 = r#"{"edges":["r","a","b","c"],"root":"r","vertices":[{"out":"r","in":["a","b","c"]}]}"#;
        let swap = |x: &str, y: &str| {
            format!(r#"{{"group":"z2","components":[{x},{y}],"base_action":{{"1":[1,0]}},"isos":{{"1":[{{}},{{}}]}}}}"#)
        };
        let Document::Forest(f) = parse_document(&swap(c2, c2)).unwrap() else { panic!("not a forest") };
        assert!(f.is_genuine());
        assert!(matches!(parse_document(&swap(c2, c3)), Err(IoError::Genuine(GenuineError::ComponentIsoInvalid(1, 0)))));
    }

    #[test]
    fn inline_group_tables() {
        let text = r#"{"edges":["r"],"root":"r","vertices":[],"group":{"order":2,"mult":[[0,1],[1,0]]},"action":{}}"#;
        let Document::GTree(t) = parse_document(text).unwrap() else { panic!("not a G-tree") };
        assert_eq!(t.group().order(), 2);
        assert!(matches!(GroupRef::of(t.group()), GroupRef::Table(_)));
    }
}
