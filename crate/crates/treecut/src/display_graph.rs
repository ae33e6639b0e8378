//! The display graph of a profile: the union of all input trees with equal
//! leaf labels identified.
//!
//! Internal vertices of distinct trees stay distinct (they are keyed by tree
//! index and local id), so the vertex set is the disjoint union of internal
//! vertices plus one vertex per label. Each edge records which input trees
//! contributed it; except for repeated two-leaf trees an edge always comes
//! from exactly one tree.
//!
//! Vertex ids are dense and deterministic: internal vertices first, numbered
//! tree by tree in each tree's own vertex order, then leaves in label order.
//! Internal vertices display as their one-based global number, leaves as
//! their label, which makes edge names like `1-2` or `1-c` stable across
//! runs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::tree::{Label, Profile, TreeError};

#[derive(Debug, Error)]
pub enum DisplayGraphError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexKind {
    /// Internal vertex of one input tree, with its one-based display number.
    Internal { tree: usize, number: usize },
    Leaf(Label),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisplayEdge {
    pub u: usize,
    pub v: usize,
    /// Indices of the input trees containing this edge (usually one).
    pub trees: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DisplayGraph {
    kinds: Vec<VertexKind>,
    edges: Vec<DisplayEdge>,
    adjacency: Vec<Vec<(usize, usize)>>, // (neighbor, edge id)
    edge_index: BTreeMap<(usize, usize), usize>,
    tree_vertices: Vec<Vec<usize>>, // [tree][local vertex] -> global vertex
    tree_edges: Vec<Vec<usize>>,    // [tree] -> edge ids, ascending
    leaf_index: BTreeMap<Label, usize>,
}

/// A connected component of the display graph together with the trees whose
/// vertices it contains.
#[derive(Debug, Clone)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub trees: Vec<usize>,
}

/// Build the display graph of a profile: vertices are the union of all tree
/// vertices with equal labels merged, edges are the union of all tree edges.
pub fn build_display_graph(profile: &Profile) -> DisplayGraph {
    let mut kinds = Vec::new();
    let mut tree_vertices: Vec<Vec<usize>> = Vec::new();
    let mut number = 0usize;
    // internal vertices first, tree by tree
    for (t, tree) in profile.trees().iter().enumerate() {
        let mut map = vec![usize::MAX; tree.vertex_count()];
        for slot in map.iter_mut().take(tree.internal_count()) {
            number += 1;
            *slot = kinds.len();
            kinds.push(VertexKind::Internal { tree: t, number });
        }
        tree_vertices.push(map);
    }
    // then one vertex per label
    let mut leaf_index = BTreeMap::new();
    for label in profile.label_universe() {
        leaf_index.insert(label.clone(), kinds.len());
        kinds.push(VertexKind::Leaf(label.clone()));
    }
    for (t, tree) in profile.trees().iter().enumerate() {
        let map = &mut tree_vertices[t];
        for (local, slot) in map.iter_mut().enumerate().skip(tree.internal_count()) {
            let label = tree.label_of(local).expect("leaf has a label");
            *slot = leaf_index[label];
        }
    }
    // collect edges with provenance
    let mut provenance: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (t, tree) in profile.trees().iter().enumerate() {
        for (a, b) in tree.edges() {
            let u = tree_vertices[t][a];
            let v = tree_vertices[t][b];
            let key = (u.min(v), u.max(v));
            provenance.entry(key).or_default().push(t);
        }
    }
    let edges: Vec<DisplayEdge> = provenance
        .into_iter()
        .map(|((u, v), trees)| DisplayEdge { u, v, trees })
        .collect();
    let mut adjacency = vec![Vec::new(); kinds.len()];
    let mut edge_index = BTreeMap::new();
    let mut tree_edges = vec![Vec::new(); profile.len()];
    for (id, e) in edges.iter().enumerate() {
        adjacency[e.u].push((e.v, id));
        adjacency[e.v].push((e.u, id));
        edge_index.insert((e.u, e.v), id);
        for &t in &e.trees {
            tree_edges[t].push(id);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    DisplayGraph {
        kinds,
        edges,
        adjacency,
        edge_index,
        tree_vertices,
        tree_edges,
        leaf_index,
    }
}

impl DisplayGraph {
    pub fn vertex_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn kind(&self, v: usize) -> &VertexKind {
        &self.kinds[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        matches!(self.kinds[v], VertexKind::Leaf(_))
    }

    pub fn leaf_label(&self, v: usize) -> Option<&Label> {
        match &self.kinds[v] {
            VertexKind::Leaf(l) => Some(l),
            _ => None,
        }
    }

    pub fn edge(&self, id: usize) -> &DisplayEdge {
        &self.edges[id]
    }

    pub fn edges(&self) -> &[DisplayEdge] {
        &self.edges
    }

    /// An edge is internal when both endpoints are internal vertices.
    pub fn is_internal_edge(&self, id: usize) -> bool {
        let e = &self.edges[id];
        !self.is_leaf(e.u) && !self.is_leaf(e.v)
    }

    pub fn adjacency(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Edge ids incident on `v` (the set `Inc(v)`).
    pub fn incident_edges(&self, v: usize) -> Result<Vec<usize>, DisplayGraphError> {
        if v >= self.kinds.len() {
            return Err(DisplayGraphError::UnknownVertex(v));
        }
        let mut out: Vec<usize> = self.adjacency[v].iter().map(|&(_, e)| e).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Global vertex id of a tree's local vertex.
    pub fn tree_vertex(&self, tree: usize, local: usize) -> usize {
        self.tree_vertices[tree][local]
    }

    /// Edge ids contributed by one input tree, ascending.
    pub fn tree_edges(&self, tree: usize) -> &[usize] {
        &self.tree_edges[tree]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn leaf_vertex(&self, label: &Label) -> Option<usize> {
        self.leaf_index.get(label).copied()
    }

    /// Display name of a vertex: the global number for internals, the label
    /// for leaves.
    pub fn vertex_name(&self, v: usize) -> String {
        match &self.kinds[v] {
            VertexKind::Internal { number, .. } => number.to_string(),
            VertexKind::Leaf(l) => l.to_string(),
        }
    }

    /// Edge name `u-v` built from the vertex display names.
    pub fn edge_name(&self, id: usize) -> String {
        let e = &self.edges[id];
        format!("{}-{}", self.vertex_name(e.u), self.vertex_name(e.v))
    }

    /// Compact edge name `uv`, the naming used in drawings of the line graph.
    pub fn edge_name_compact(&self, id: usize) -> String {
        let e = &self.edges[id];
        format!("{}{}", self.vertex_name(e.u), self.vertex_name(e.v))
    }

    /// Look up an edge by its `u-v` display name.
    pub fn edge_named(&self, name: &str) -> Option<usize> {
        (0..self.edges.len()).find(|&id| self.edge_name(id) == name)
    }

    /// Leaf labels contained in a vertex set.
    pub fn leaf_labels_of(&self, vertices: &[usize]) -> BTreeSet<Label> {
        vertices
            .iter()
            .filter_map(|&v| self.leaf_label(v).cloned())
            .collect()
    }

    /// Connected components with the trees they contain, ordered by least
    /// vertex id. A tree is never split across components.
    pub fn components(&self) -> Vec<Component> {
        let n = self.kinds.len();
        let mut comp = vec![usize::MAX; n];
        let mut order = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = order.len();
            comp[start] = id;
            let mut vertices = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &self.adjacency[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        vertices.push(w);
                        queue.push_back(w);
                    }
                }
            }
            vertices.sort_unstable();
            order.push(Component {
                vertices,
                trees: Vec::new(),
            });
        }
        for (t, map) in self.tree_vertices.iter().enumerate() {
            // all vertices of one tree share a component
            let c = comp[map[0]];
            debug_assert!(map.iter().all(|&v| comp[v] == c));
            order[c].trees.push(t);
        }
        order
    }

    /// True when the whole display graph is connected.
    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }
}

/// Partition a profile into sub-profiles, one per connected component of its
/// display graph. Tree order is preserved within each sub-profile.
pub fn connected_components(profile: &Profile) -> Result<Vec<Profile>, TreeError> {
    let g = build_display_graph(profile);
    g.components()
        .into_iter()
        .map(|c| {
            Profile::new(
                c.trees
                    .iter()
                    .map(|&t| profile.tree(t).clone())
                    .collect(),
            )
        })
        .collect()
}
