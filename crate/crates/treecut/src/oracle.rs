//! Brute-force ground truth: enumerate every phylogenetic tree on a label
//! set and decide compatibility and agreement by scanning the catalog. Used
//! to validate the cut-based solver end to end on small instances.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::tree::{Label, PhyloTree, Profile, Split, TreeError};

/// Catalog enumeration is capped here; sizes grow super-exponentially.
pub const MAX_CATALOG_LABELS: usize = 7;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("catalog supports 1..={max} labels, got {0}", max = MAX_CATALOG_LABELS)]
    TooManyLabels(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Every distinct phylogenetic tree on a fixed label set, binary and
/// multifurcating, deduplicated by split set and held in canonical order.
#[derive(Debug, Clone)]
pub struct TreeCatalog {
    labels: BTreeSet<Label>,
    trees: Vec<PhyloTree>,
}

impl TreeCatalog {
    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn trees(&self) -> &[PhyloTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

/// Enumerate all phylogenetic trees on `labels`: binary trees by leaf
/// insertion on every edge, closed under internal-edge contraction.
pub fn enumerate_trees(labels: &BTreeSet<Label>) -> Result<TreeCatalog, OracleError> {
    if labels.is_empty() || labels.len() > MAX_CATALOG_LABELS {
        return Err(OracleError::TooManyLabels(labels.len()));
    }
    Ok(enumerate_trees_unguarded(labels))
}

/// Enumeration without the size guard, for test suites that need one step
/// beyond the public cap.
pub(crate) fn enumerate_trees_unguarded(labels: &BTreeSet<Label>) -> TreeCatalog {
    let ordered: Vec<Label> = labels.iter().cloned().collect();
    let binaries = binary_trees(&ordered);
    // close under contraction, dedupe by split set
    let mut seen: BTreeMap<BTreeSet<Split>, PhyloTree> = BTreeMap::new();
    let mut queue: Vec<PhyloTree> = Vec::new();
    for tree in binaries {
        if let std::collections::btree_map::Entry::Vacant(slot) = seen.entry(tree.splits()) {
            slot.insert(tree.clone());
            queue.push(tree);
        }
    }
    while let Some(tree) = queue.pop() {
        for (u, v) in tree.internal_edges() {
            let contracted = tree.contracted(u, v).expect("internal edge contracts");
            if let std::collections::btree_map::Entry::Vacant(slot) = seen.entry(contracted.splits()) {
                slot.insert(contracted.clone());
                queue.push(contracted);
            }
        }
    }
    TreeCatalog {
        labels: labels.clone(),
        trees: seen.into_values().collect(),
    }
}

/// All binary (fully resolved) trees, built by inserting each next leaf on
/// every edge of every smaller tree. Each labeled shape arises exactly once.
fn binary_trees(ordered: &[Label]) -> Vec<PhyloTree> {
    match ordered.len() {
        1 => return vec![PhyloTree::singleton(ordered[0].clone())],
        2 => {
            let labels = BTreeMap::from([(0, ordered[0].clone()), (1, ordered[1].clone())]);
            return vec![PhyloTree::new(2, &[(0, 1)], &labels).unwrap()];
        }
        _ => {}
    }
    let base = {
        let labels: BTreeMap<usize, Label> =
            ordered[..3].iter().cloned().enumerate().collect();
        PhyloTree::new(4, &[(0, 3), (1, 3), (2, 3)], &labels).unwrap()
    };
    let mut current = vec![base];
    for label in &ordered[3..] {
        let mut next = Vec::new();
        for tree in &current {
            for (u, v) in tree.edges() {
                next.push(insert_leaf(tree, (u, v), label.clone()));
            }
        }
        current = next;
    }
    current
}

/// Subdivide `edge` and hang a new leaf off the fresh vertex.
fn insert_leaf(tree: &PhyloTree, edge: (usize, usize), label: Label) -> PhyloTree {
    let n = tree.vertex_count();
    let mid = n;
    let leaf = n + 1;
    let mut edges: Vec<(usize, usize)> = tree
        .edges()
        .into_iter()
        .filter(|&e| e != edge)
        .collect();
    edges.push((edge.0, mid));
    edges.push((mid, edge.1));
    edges.push((mid, leaf));
    let mut labels: BTreeMap<usize, Label> = (0..n)
        .filter_map(|v| tree.label_of(v).map(|l| (v, l.clone())))
        .collect();
    labels.insert(leaf, label);
    PhyloTree::new(n + 2, &edges, &labels).expect("leaf insertion preserves validity")
}

/// First catalog tree displaying every input tree, or `None`.
pub fn oracle_compatible(profile: &Profile) -> Result<Option<PhyloTree>, OracleError> {
    let catalog = enumerate_trees(profile.label_universe())?;
    for tree in catalog.trees() {
        if all(profile, |t| tree.displays(t))? {
            return Ok(Some(tree.clone()));
        }
    }
    Ok(None)
}

/// First catalog tree agreeing with every input tree, or `None`.
pub fn oracle_agreement(profile: &Profile) -> Result<Option<PhyloTree>, OracleError> {
    let catalog = enumerate_trees(profile.label_universe())?;
    for tree in catalog.trees() {
        if all(profile, |t| tree.agrees_with(t))? {
            return Ok(Some(tree.clone()));
        }
    }
    Ok(None)
}

fn all(
    profile: &Profile,
    mut pred: impl FnMut(&PhyloTree) -> Result<bool, TreeError>,
) -> Result<bool, OracleError> {
    for t in profile.trees() {
        if !pred(t)? {
            return Ok(false);
        }
    }
    Ok(true)
}
