//! Unrooted phylogenetic trees, splits, and the display/agreement relations.
//!
//! Trees are stored as undirected adjacency lists over dense vertex ids.
//! Internal vertices always occupy ids `0..internal_count()`, preserving the
//! order in which they were supplied (for parsed trees this is the preorder
//! position in the source text); leaf ids follow, ordered by label. Every
//! constructor funnels through [`PhyloTree::new`], which validates the
//! phylogenetic invariants: connected, acyclic, labeled vertices of degree
//! one, unlabeled vertices of degree at least three. The one- and two-leaf
//! degenerate trees are valid.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A leaf label. Labels are case-sensitive and compared as plain text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_owned())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("tree has no vertices")]
    Empty,
    #[error("edge ({0}, {1}) is invalid")]
    InvalidEdge(usize, usize),
    #[error("tree is not connected")]
    Disconnected,
    #[error("edge count does not match vertex count minus one (not a tree)")]
    NotATree,
    #[error("labeled vertex {0} has degree {1}, expected 1")]
    LeafDegree(usize, usize),
    #[error("unlabeled vertex {0} has degree {1}, expected at least 3")]
    InternalDegree(usize, usize),
    #[error("duplicate leaf label '{0}'")]
    DuplicateLabel(Label),
    #[error("empty label name")]
    EmptyLabelName,
    #[error("label '{0}' does not occur in the tree")]
    UnknownLabel(Label),
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("({0}, {1}) is not an edge of the tree")]
    NotAnEdge(usize, usize),
    #[error("({0}, {1}) is not an internal edge")]
    NotInternalEdge(usize, usize),
    #[error("a split side is empty")]
    EmptySplitSide,
    #[error("split sides overlap")]
    OverlappingSplitSides,
    #[error("empty label set")]
    EmptyLabelSet,
    #[error("split {0} does not bipartition the label set")]
    SplitLabelMismatch(Box<Split>),
    #[error("splits {0} and {1} are incompatible")]
    IncompatibleSplits(Box<Split>, Box<Split>),
}

/// A bipartition `A|B` of a label set into two non-empty disjoint sides.
///
/// Splits are stored canonically: the side containing the lexicographically
/// least label comes first, so equality, ordering and hashing are
/// orientation-free. A split is *trivial* when one side is a single label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Split {
    a: BTreeSet<Label>,
    b: BTreeSet<Label>,
}

impl Split {
    pub fn new(x: BTreeSet<Label>, y: BTreeSet<Label>) -> Result<Self, TreeError> {
        if x.is_empty() || y.is_empty() {
            return Err(TreeError::EmptySplitSide);
        }
        if !x.is_disjoint(&y) {
            return Err(TreeError::OverlappingSplitSides);
        }
        if x.iter().next() < y.iter().next() {
            Ok(Split { a: x, b: y })
        } else {
            Ok(Split { a: y, b: x })
        }
    }

    /// The side holding the least label of the universe.
    pub fn first(&self) -> &BTreeSet<Label> {
        &self.a
    }

    pub fn second(&self) -> &BTreeSet<Label> {
        &self.b
    }

    /// Union of both sides.
    pub fn universe(&self) -> BTreeSet<Label> {
        self.a.union(&self.b).cloned().collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.a.len() == 1 || self.b.len() == 1
    }

    /// Two splits are compatible when at least one of the four pairwise side
    /// intersections is empty.
    pub fn compatible_with(&self, other: &Split) -> bool {
        self.a.is_disjoint(&other.a)
            || self.a.is_disjoint(&other.b)
            || self.b.is_disjoint(&other.a)
            || self.b.is_disjoint(&other.b)
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &BTreeSet<Label>| {
            s.iter()
                .map(Label::as_str)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}|{}", side(&self.a), side(&self.b))
    }
}

/// Check that every pair in `splits` is compatible, returning the first
/// offending pair otherwise.
pub fn splits_compatible(splits: &BTreeSet<Split>) -> Result<(), TreeError> {
    let v: Vec<&Split> = splits.iter().collect();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if !v[i].compatible_with(v[j]) {
                return Err(TreeError::IncompatibleSplits(
                    Box::new(v[i].clone()),
                    Box::new(v[j].clone()),
                ));
            }
        }
    }
    Ok(())
}

/// An unrooted phylogenetic tree with bijectively labeled leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhyloTree {
    adjacency: Vec<Vec<usize>>,
    internal_count: usize,
    labels: Vec<Label>, // labels[i] is the label of vertex internal_count + i
    label_index: BTreeMap<Label, usize>,
}

impl PhyloTree {
    /// Build and validate a tree from an edge list and a leaf labeling.
    ///
    /// Vertex ids must be dense in `0..vertex_count`. The vertices are
    /// renumbered canonically: unlabeled vertices first (in ascending input
    /// id order), then leaves in label order.
    pub fn new(
        vertex_count: usize,
        edges: &[(usize, usize)],
        leaf_labels: &BTreeMap<usize, Label>,
    ) -> Result<Self, TreeError> {
        if vertex_count == 0 {
            return Err(TreeError::Empty);
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count || u == v {
                return Err(TreeError::InvalidEdge(u, v));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(TreeError::InvalidEdge(u, v));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        if edges.len() + 1 != vertex_count {
            return Err(TreeError::NotATree);
        }
        // connectivity
        let mut visited = vec![false; vertex_count];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != vertex_count {
            return Err(TreeError::Disconnected);
        }
        // degree and label constraints
        let mut label_set = BTreeSet::new();
        for (v, label) in leaf_labels {
            if *v >= vertex_count {
                return Err(TreeError::UnknownVertex(*v));
            }
            if label.as_str().is_empty() {
                return Err(TreeError::EmptyLabelName);
            }
            if !label_set.insert(label.clone()) {
                return Err(TreeError::DuplicateLabel(label.clone()));
            }
        }
        for (v, list) in adjacency.iter().enumerate() {
            let deg = list.len();
            if leaf_labels.contains_key(&v) {
                let expected = if vertex_count == 1 { 0 } else { 1 };
                if deg != expected {
                    return Err(TreeError::LeafDegree(v, deg));
                }
            } else if deg < 3 {
                return Err(TreeError::InternalDegree(v, deg));
            }
        }
        // canonical renumbering
        let internals: Vec<usize> = (0..vertex_count)
            .filter(|v| !leaf_labels.contains_key(v))
            .collect();
        let internal_count = internals.len();
        let mut leaves: Vec<(Label, usize)> = leaf_labels
            .iter()
            .map(|(v, l)| (l.clone(), *v))
            .collect();
        leaves.sort();
        let mut remap = vec![usize::MAX; vertex_count];
        for (new, &old) in internals.iter().enumerate() {
            remap[old] = new;
        }
        for (offset, (_, old)) in leaves.iter().enumerate() {
            remap[*old] = internal_count + offset;
        }
        let mut new_adjacency = vec![Vec::new(); vertex_count];
        for old in 0..vertex_count {
            for &w in &adjacency[old] {
                new_adjacency[remap[old]].push(remap[w]);
            }
        }
        for list in &mut new_adjacency {
            list.sort_unstable();
        }
        let labels: Vec<Label> = leaves.iter().map(|(l, _)| l.clone()).collect();
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), internal_count + i))
            .collect();
        Ok(PhyloTree {
            adjacency: new_adjacency,
            internal_count,
            labels,
            label_index,
        })
    }

    /// Single-vertex tree carrying one label.
    pub fn singleton(label: Label) -> Self {
        let labels = BTreeMap::from([(0, label)]);
        PhyloTree::new(1, &[], &labels).expect("singleton is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn internal_count(&self) -> usize {
        self.internal_count
    }

    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v >= self.internal_count && v < self.adjacency.len()
    }

    pub fn label_of(&self, v: usize) -> Option<&Label> {
        if self.is_leaf(v) {
            Some(&self.labels[v - self.internal_count])
        } else {
            None
        }
    }

    pub fn vertex_of_label(&self, label: &Label) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn label_set(&self) -> BTreeSet<Label> {
        self.labels.iter().cloned().collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.labels.iter()
    }

    /// All edges as ordered pairs `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.adjacency.len().saturating_sub(1));
        for u in 0..self.adjacency.len() {
            for &v in &self.adjacency[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adjacency.len() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges whose endpoints are both internal vertices.
    pub fn internal_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .into_iter()
            .filter(|&(u, v)| !self.is_leaf(u) && !self.is_leaf(v))
            .collect()
    }

    /// Vertices reachable from `start` when the edge `(a, b)` is removed.
    fn side_of(&self, start: usize, a: usize, b: usize) -> Vec<usize> {
        let mut visited = vec![false; self.adjacency.len()];
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut out = vec![start];
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if (v == a && w == b) || (v == b && w == a) {
                    continue;
                }
                if !visited[w] {
                    visited[w] = true;
                    out.push(w);
                    queue.push_back(w);
                }
            }
        }
        out
    }

    fn leaf_labels_of(&self, vertices: &[usize]) -> BTreeSet<Label> {
        vertices
            .iter()
            .filter_map(|&v| self.label_of(v).cloned())
            .collect()
    }

    /// The bipartition of the label set induced by removing edge `(u, v)`.
    /// Pendant edges give trivial splits.
    pub fn edge_split(&self, u: usize, v: usize) -> Result<Split, TreeError> {
        if !self.has_edge(u, v) {
            return Err(TreeError::NotAnEdge(u, v));
        }
        let side_u = self.leaf_labels_of(&self.side_of(u, u, v));
        let side_v = self.leaf_labels_of(&self.side_of(v, u, v));
        Split::new(side_u, side_v)
    }

    /// The set of splits induced by the internal edges of the tree. Every
    /// member is non-trivial; trees without internal edges yield the empty
    /// set.
    pub fn splits(&self) -> BTreeSet<Split> {
        self.internal_edges()
            .into_iter()
            .map(|(u, v)| self.edge_split(u, v).expect("internal edge exists"))
            .collect()
    }

    /// Restriction `S|Y`: the minimal subtree spanning the leaves labeled by
    /// `keep`, with degree-two vertices suppressed.
    pub fn restrict(&self, keep: &BTreeSet<Label>) -> Result<PhyloTree, TreeError> {
        if keep.is_empty() {
            return Err(TreeError::EmptyLabelSet);
        }
        let mut target = vec![false; self.adjacency.len()];
        for label in keep {
            let v = self
                .vertex_of_label(label)
                .ok_or_else(|| TreeError::UnknownLabel(label.clone()))?;
            target[v] = true;
        }
        let mut adj: Vec<BTreeSet<usize>> = self
            .adjacency
            .iter()
            .map(|l| l.iter().copied().collect())
            .collect();
        let mut alive = vec![true; self.adjacency.len()];
        // prune non-target leaves until only the Steiner tree remains
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..adj.len() {
                if alive[v] && !target[v] && adj[v].len() <= 1 {
                    alive[v] = false;
                    changed = true;
                    let neighbors: Vec<usize> = adj[v].iter().copied().collect();
                    for w in neighbors {
                        adj[w].remove(&v);
                    }
                    adj[v].clear();
                }
            }
        }
        // suppress degree-two vertices (always unlabeled: kept leaves have degree one)
        for v in 0..adj.len() {
            if alive[v] && adj[v].len() == 2 {
                let mut it = adj[v].iter();
                let x = *it.next().unwrap();
                let y = *it.next().unwrap();
                adj[x].remove(&v);
                adj[y].remove(&v);
                adj[x].insert(y);
                adj[y].insert(x);
                adj[v].clear();
                alive[v] = false;
            }
        }
        let kept: Vec<usize> = (0..adj.len()).filter(|&v| alive[v]).collect();
        let mut remap = BTreeMap::new();
        for (new, &old) in kept.iter().enumerate() {
            remap.insert(old, new);
        }
        let mut edges = Vec::new();
        for &old in &kept {
            for &w in &adj[old] {
                if old < w {
                    edges.push((remap[&old], remap[&w]));
                }
            }
        }
        let labels: BTreeMap<usize, Label> = kept
            .iter()
            .filter_map(|&old| self.label_of(old).map(|l| (remap[&old], l.clone())))
            .collect();
        PhyloTree::new(kept.len(), &edges, &labels)
    }

    /// True when this tree, restricted to the other tree's labels, refines
    /// it: every split of `input` is a split of the restriction.
    pub fn displays(&self, input: &PhyloTree) -> Result<bool, TreeError> {
        let restricted = self.restrict(&input.label_set())?;
        Ok(input.splits().is_subset(&restricted.splits()))
    }

    /// True when this tree, restricted to the other tree's labels, is
    /// isomorphic to it: the split sets coincide exactly.
    pub fn agrees_with(&self, input: &PhyloTree) -> Result<bool, TreeError> {
        let restricted = self.restrict(&input.label_set())?;
        Ok(input.splits() == restricted.splits())
    }

    /// Isomorphism test: equal label sets and equal split sets. Split sets
    /// determine the tree up to isomorphism, so no vertex matching is needed.
    pub fn is_isomorphic_to(&self, other: &PhyloTree) -> bool {
        self.label_set() == other.label_set() && self.splits() == other.splits()
    }

    /// Build the unique tree whose split set equals the non-trivial members
    /// of `splits`, by star refinement.
    ///
    /// Every split must bipartition exactly `labels`; the splits must be
    /// pairwise compatible (checked, with the offending pair reported).
    pub fn from_splits(
        splits: &BTreeSet<Split>,
        labels: &BTreeSet<Label>,
    ) -> Result<PhyloTree, TreeError> {
        if labels.is_empty() {
            return Err(TreeError::EmptyLabelSet);
        }
        for split in splits {
            if split.universe() != *labels {
                return Err(TreeError::SplitLabelMismatch(Box::new(split.clone())));
            }
        }
        splits_compatible(splits)?;
        let labels_vec: Vec<Label> = labels.iter().cloned().collect();
        if labels_vec.len() == 1 {
            return Ok(PhyloTree::singleton(labels_vec[0].clone()));
        }
        if labels_vec.len() == 2 {
            let leaf_map: BTreeMap<usize, Label> =
                labels_vec.iter().cloned().enumerate().collect();
            return PhyloTree::new(2, &[(0, 1)], &leaf_map);
        }
        // mutable scratch tree: star with center `n`, leaves 0..n
        let n = labels_vec.len();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n + 1];
        for leaf in 0..n {
            adj[leaf].insert(n);
            adj[n].insert(leaf);
        }
        for split in splits {
            if split.is_trivial() {
                continue;
            }
            refine(&mut adj, split, &labels_vec)?;
        }
        let mut edges = Vec::new();
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        let leaf_map: BTreeMap<usize, Label> = labels_vec.iter().cloned().enumerate().collect();
        PhyloTree::new(adj.len(), &edges, &leaf_map)
    }

    /// Contract the internal edge `(u, v)`, merging `v` into `u`.
    pub fn contracted(&self, u: usize, v: usize) -> Result<PhyloTree, TreeError> {
        if !self.has_edge(u, v) {
            return Err(TreeError::NotAnEdge(u, v));
        }
        if self.is_leaf(u) || self.is_leaf(v) {
            return Err(TreeError::NotInternalEdge(u, v));
        }
        let mut edges = Vec::new();
        for (a, b) in self.edges() {
            if (a, b) == (u.min(v), u.max(v)) {
                continue;
            }
            let a = if a == v { u } else { a };
            let b = if b == v { u } else { b };
            edges.push((a, b));
        }
        // compact ids: v disappears
        let remap = |x: usize| if x > v { x - 1 } else { x };
        let edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (remap(a), remap(b)))
            .collect();
        let labels: BTreeMap<usize, Label> = (0..self.adjacency.len())
            .filter(|&x| x != v)
            .filter_map(|x| self.label_of(x).map(|l| (remap(x), l.clone())))
            .collect();
        PhyloTree::new(self.adjacency.len() - 1, &edges, &labels)
    }
}

/// One star-refinement step: realize `split` by splitting the unique vertex
/// all of whose neighbor subtrees are pure with respect to the split.
fn refine(
    adj: &mut Vec<BTreeSet<usize>>,
    split: &Split,
    leaf_labels: &[Label],
) -> Result<(), TreeError> {
    let n = adj.len();
    let side_labels = |start: usize, avoid: usize| -> BTreeSet<Label> {
        let mut visited = vec![false; n];
        visited[avoid] = true;
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut out = BTreeSet::new();
        while let Some(x) = queue.pop_front() {
            if let Some(l) = leaf_labels.get(x) {
                out.insert(l.clone());
            }
            for &w in &adj[x] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out
    };
    for v in 0..n {
        if v < leaf_labels.len() || adj[v].is_empty() {
            continue;
        }
        let mut to_a = Vec::new();
        let mut to_b = Vec::new();
        let mut pure = true;
        for &w in adj[v].iter() {
            let leaves = side_labels(w, v);
            if leaves.is_subset(split.first()) {
                to_a.push(w);
            } else if leaves.is_subset(split.second()) {
                to_b.push(w);
            } else {
                pure = false;
                break;
            }
        }
        if !pure {
            continue;
        }
        // non-trivial new split: both groups have at least two subtrees
        debug_assert!(to_a.len() >= 2 && to_b.len() >= 2);
        let fresh = adj.len();
        adj.push(BTreeSet::new());
        for w in to_b {
            adj[v].remove(&w);
            adj[w].remove(&v);
            adj[w].insert(fresh);
            adj[fresh].insert(w);
        }
        adj[v].insert(fresh);
        adj[fresh].insert(v);
        return Ok(());
    }
    unreachable!("pairwise compatible splits always admit a refinement vertex")
}

/// An ordered collection of input trees. Internal vertices of distinct trees
/// are distinct by construction; leaves with equal labels refer to the same
/// taxon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    trees: Vec<PhyloTree>,
    labels: BTreeSet<Label>,
}

impl Profile {
    pub fn new(trees: Vec<PhyloTree>) -> Result<Self, TreeError> {
        if trees.is_empty() {
            return Err(TreeError::Empty);
        }
        let labels = trees
            .iter()
            .flat_map(|t| t.labels().cloned())
            .collect();
        Ok(Profile { trees, labels })
    }

    pub fn trees(&self) -> &[PhyloTree] {
        &self.trees
    }

    pub fn tree(&self, i: usize) -> &PhyloTree {
        &self.trees[i]
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Union of the leaf labels of all input trees.
    pub fn label_universe(&self) -> &BTreeSet<Label> {
        &self.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_newick;

    fn labels(names: &[&str]) -> BTreeSet<Label> {
        names.iter().map(|n| Label::from(*n)).collect()
    }

    fn split(a: &[&str], b: &[&str]) -> Split {
        Split::new(labels(a), labels(b)).unwrap()
    }

    #[test]
    fn split_canonical_orientation() {
        let s1 = split(&["c", "d"], &["a", "b"]);
        let s2 = split(&["a", "b"], &["c", "d"]);
        assert_eq!(s1, s2);
        assert_eq!(s1.first(), &labels(&["a", "b"]));
    }

    #[test]
    fn split_compatibility_cases() {
        assert!(!split(&["a", "b"], &["c", "d"]).compatible_with(&split(&["a", "c"], &["b", "d"])));
        assert!(split(&["a", "b"], &["c", "d"]).compatible_with(&split(&["a"], &["b", "c", "d"])));
        // overlapping universes, one intersection empty
        assert!(split(&["a", "b", "c"], &["d", "e", "f", "g"])
            .compatible_with(&split(&["a", "b"], &["c", "d", "e", "f", "g"])));
    }

    #[test]
    fn splits_of_small_trees() {
        let t = parse_newick("(a,b,(c,d));").unwrap();
        assert_eq!(t.internal_count(), 2);
        assert_eq!(t.edges().len(), 5);
        assert_eq!(
            t.splits(),
            BTreeSet::from([split(&["a", "b"], &["c", "d"])])
        );

        let star = parse_newick("(a,b,c,d);").unwrap();
        assert!(star.splits().is_empty());

        let quartet = parse_newick("((a,b),(c,d));").unwrap();
        assert_eq!(
            quartet.splits(),
            BTreeSet::from([split(&["a", "b"], &["c", "d"])])
        );
    }

    #[test]
    fn splits_of_caterpillar() {
        // two internal edges, both splits recovered
        let t = parse_newick("(a,b,c,(f,(d,e)));").unwrap();
        assert_eq!(t.internal_count(), 3);
        assert_eq!(t.edges().len(), 8);
        assert_eq!(
            t.splits(),
            BTreeSet::from([
                split(&["a", "b", "c"], &["d", "e", "f"]),
                split(&["a", "b", "c", "f"], &["d", "e"]),
            ])
        );
    }

    #[test]
    fn splits_are_pairwise_compatible() {
        let t = parse_newick("((a,b),(c,(d,(e,f))));").unwrap();
        assert!(splits_compatible(&t.splits()).is_ok());
    }

    #[test]
    fn from_splits_star() {
        let t = PhyloTree::from_splits(&BTreeSet::new(), &labels(&["a", "b", "c", "d"])).unwrap();
        assert_eq!(t.internal_count(), 1);
        assert!(t.splits().is_empty());
    }

    #[test]
    fn from_splits_caterpillar() {
        let wanted = BTreeSet::from([
            split(&["a", "b"], &["c", "d", "e"]),
            split(&["a", "b", "c"], &["d", "e"]),
        ]);
        let t = PhyloTree::from_splits(&wanted, &labels(&["a", "b", "c", "d", "e"])).unwrap();
        assert_eq!(t.splits(), wanted);
        assert!(t.is_isomorphic_to(&parse_newick("(a,b,(c,(d,e)));").unwrap()));
    }

    #[test]
    fn from_splits_six_leaves() {
        let wanted = BTreeSet::from([
            split(&["a", "b"], &["c", "d", "e", "f"]),
            split(&["a", "b", "f"], &["c", "d", "e"]),
            split(&["a", "b", "c", "f"], &["d", "e"]),
        ]);
        let t = PhyloTree::from_splits(&wanted, &labels(&["a", "b", "c", "d", "e", "f"])).unwrap();
        assert_eq!(t.splits(), wanted);
        assert!(t.is_isomorphic_to(&parse_newick("((a,b),f,(c,(d,e)));").unwrap()));
    }

    #[test]
    fn from_splits_rejects_incompatible() {
        let bad = BTreeSet::from([
            split(&["a", "b"], &["c", "d"]),
            split(&["a", "c"], &["b", "d"]),
        ]);
        let err = PhyloTree::from_splits(&bad, &labels(&["a", "b", "c", "d"])).unwrap_err();
        assert!(matches!(err, TreeError::IncompatibleSplits(_, _)));
    }

    #[test]
    fn from_splits_rejects_wrong_universe() {
        let bad = BTreeSet::from([split(&["a", "b"], &["c", "d"])]);
        let err = PhyloTree::from_splits(&bad, &labels(&["a", "b", "c", "d", "e"])).unwrap_err();
        assert!(matches!(err, TreeError::SplitLabelMismatch(_)));
    }

    #[test]
    fn restrict_to_quartet() {
        let t = parse_newick("((a,b),c,(d,(e,f)));").unwrap();
        let r = t.restrict(&labels(&["a", "b", "e", "f"])).unwrap();
        assert_eq!(r.label_set(), labels(&["a", "b", "e", "f"]));
        assert_eq!(
            r.splits(),
            BTreeSet::from([split(&["a", "b"], &["e", "f"])])
        );
    }

    #[test]
    fn restrict_identity_and_singleton() {
        let t = parse_newick("((a,b),c,(d,(e,f)));").unwrap();
        let same = t.restrict(&t.label_set()).unwrap();
        assert!(same.is_isomorphic_to(&t));
        let one = t.restrict(&labels(&["d"])).unwrap();
        assert_eq!(one.vertex_count(), 1);
        assert_eq!(one.label_set(), labels(&["d"]));
    }

    #[test]
    fn restrict_unknown_label() {
        let t = parse_newick("(a,b,(c,d));").unwrap();
        assert!(matches!(
            t.restrict(&labels(&["a", "z"])),
            Err(TreeError::UnknownLabel(_))
        ));
    }

    #[test]
    fn restrict_nesting() {
        let t = parse_newick("((a,b),(c,(d,(e,(f,g)))));").unwrap();
        let y = labels(&["a", "b", "d", "f", "g"]);
        let z = labels(&["a", "d", "g"]);
        let via_y = t.restrict(&y).unwrap().restrict(&z).unwrap();
        let direct = t.restrict(&z).unwrap();
        assert!(via_y.is_isomorphic_to(&direct));
    }

    #[test]
    fn displays_and_agrees() {
        let binary = parse_newick("((a,b),(c,d));").unwrap();
        let star = parse_newick("(a,b,c,d);").unwrap();
        assert!(binary.displays(&binary).unwrap());
        assert!(binary.displays(&star).unwrap());
        assert!(!star.displays(&binary).unwrap());
        assert!(binary.agrees_with(&binary).unwrap());
        assert!(!binary.agrees_with(&star).unwrap());
        assert!(!star.agrees_with(&binary).unwrap());
    }

    #[test]
    fn agreement_supertree_of_two_inputs() {
        let ast = parse_newick("((a,b),f,(c,(d,e)));").unwrap();
        let t1 = parse_newick("(a,b,(c,(d,e)));").unwrap();
        let t2 = parse_newick("(a,b,(f,(c,d)));").unwrap();
        assert!(ast.displays(&t1).unwrap());
        assert!(ast.displays(&t2).unwrap());
        assert!(ast.agrees_with(&t1).unwrap());
        assert!(ast.agrees_with(&t2).unwrap());
    }

    #[test]
    fn isomorphism_by_splits() {
        let t1 = parse_newick("((a,b),(c,d));").unwrap();
        let t2 = parse_newick("((c,d),(b,a));").unwrap();
        let t3 = parse_newick("((a,c),(b,d));").unwrap();
        assert!(t1.is_isomorphic_to(&t2));
        assert!(!t1.is_isomorphic_to(&t3));
    }

    #[test]
    fn contraction_removes_one_split() {
        let t = parse_newick("((a,b),(c,(d,e)));").unwrap();
        let (u, v) = t.internal_edges()[0];
        let c = t.contracted(u, v).unwrap();
        assert_eq!(c.splits().len(), t.splits().len() - 1);
        assert!(c.splits().is_subset(&t.splits()));
    }

    #[test]
    fn two_leaf_tree_is_valid() {
        let leaf_map = BTreeMap::from([(0, Label::from("a")), (1, Label::from("b"))]);
        let t = PhyloTree::new(2, &[(0, 1)], &leaf_map).unwrap();
        assert!(t.splits().is_empty());
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn invalid_trees_rejected() {
        // degree-2 internal vertex
        let leaf_map = BTreeMap::from([(1, Label::from("a")), (2, Label::from("b"))]);
        assert!(matches!(
            PhyloTree::new(3, &[(0, 1), (0, 2)], &leaf_map),
            Err(TreeError::InternalDegree(_, 2))
        ));
        // disconnected
        let leaf_map = BTreeMap::from([
            (0, Label::from("a")),
            (1, Label::from("b")),
            (2, Label::from("c")),
            (3, Label::from("d")),
        ]);
        assert!(PhyloTree::new(4, &[(0, 1), (2, 3)], &leaf_map).is_err());
    }

    #[test]
    fn profile_rejects_empty() {
        assert!(matches!(Profile::new(vec![]), Err(TreeError::Empty)));
    }
}
