//! Minimal edge cuts of the display graph: enumeration, the legal/nice/
//! parallel predicates, and the split induced by a cut.
//!
//! A minimal cut corresponds exactly to a bipartition of the vertex set into
//! two connected halves; the cut is the set of crossing edges. Enumeration
//! therefore grows connected vertex sets from the least vertex and keeps
//! those whose complement is also connected. Display graphs at the scales
//! this library targets have at most a few dozen vertices, so the search is
//! run over bit masks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::display_graph::DisplayGraph;
use crate::tree::Split;

#[derive(Debug, Error)]
pub enum CutError {
    #[error("display graph is disconnected")]
    Disconnected,
    #[error("component has {0} vertices, enumeration supports at most {max}", max = MAX_ENUMERATION_VERTICES)]
    TooLarge(usize),
    #[error("edge set is not a cut")]
    NotACut,
    #[error("cut is not nice: a component of the cut graph has no leaf")]
    LeaflessSide,
    #[error("cut is not minimal")]
    NotMinimal,
}

/// Hard bound on the bit-mask enumeration; the solver's configurable vertex
/// limit is expected to stop far earlier.
pub const MAX_ENUMERATION_VERTICES: usize = 64;

/// A minimal cut of the display graph, cached with the bipartition it
/// induces and its edges grouped per input tree.
///
/// Invariants: removing `edges` splits the (component of the) display graph
/// into exactly the two cached connected sides, and the crossing edges of
/// the bipartition are exactly `edges`. Equality, ordering and hashing use
/// the edge set alone.
#[derive(Debug, Clone)]
pub struct Cut {
    edges: Vec<usize>,
    side_a: Vec<usize>,
    side_b: Vec<usize>,
    per_tree: BTreeMap<usize, Vec<usize>>,
}

impl PartialEq for Cut {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges
    }
}

impl Eq for Cut {}

impl PartialOrd for Cut {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cut {
    fn cmp(&self, other: &Self) -> Ordering {
        self.edges.cmp(&other.edges)
    }
}

impl Hash for Cut {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.edges.hash(state);
    }
}

impl Cut {
    /// Edge ids, ascending.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// The side containing the least vertex id, ascending.
    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    /// Cut edges grouped by the input tree that contributed them.
    pub fn per_tree(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.per_tree
    }

    pub fn contains_edge(&self, edge: usize) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }

    /// Validate an edge set as a minimal cut and cache its bipartition.
    pub fn from_edges(g: &DisplayGraph, edges: &[usize]) -> Result<Cut, CutError> {
        let mut sorted: Vec<usize> = edges.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(CutError::NotACut);
        }
        // the cut must live inside one connected component
        let anchor = g.edge(sorted[0]).u;
        let component = component_of(g, anchor, &[]);
        for &e in &sorted {
            if !component.contains(&g.edge(e).u) {
                return Err(CutError::NotACut);
            }
        }
        let parts = components_within(g, &component, &sorted);
        if parts.len() < 2 {
            return Err(CutError::NotACut);
        }
        if parts.len() > 2 {
            return Err(CutError::NotMinimal);
        }
        for &skip in &sorted {
            let rest: Vec<usize> = sorted.iter().copied().filter(|&e| e != skip).collect();
            if components_within(g, &component, &rest).len() > 1 {
                return Err(CutError::NotMinimal);
            }
        }
        Ok(Self::from_bipartition(g, parts[0].clone(), parts[1].clone()))
    }

    /// Assemble a cut from a known connected bipartition of a component.
    fn from_bipartition(g: &DisplayGraph, mut x: Vec<usize>, mut y: Vec<usize>) -> Cut {
        x.sort_unstable();
        y.sort_unstable();
        let (side_a, side_b) = if x[0] < y[0] { (x, y) } else { (y, x) };
        let in_a: BTreeSet<usize> = side_a.iter().copied().collect();
        let mut edges = Vec::new();
        for &v in &side_a {
            for &(w, e) in g.adjacency(v) {
                if !in_a.contains(&w) {
                    edges.push(e);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut per_tree: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &e in &edges {
            for &t in &g.edge(e).trees {
                per_tree.entry(t).or_default().push(e);
            }
        }
        Cut {
            edges,
            side_a,
            side_b,
            per_tree,
        }
    }

    /// The split of the label set induced by the two sides. Fails when a
    /// side carries no leaf, which cannot happen for nice cuts.
    pub fn induced_split(&self, g: &DisplayGraph) -> Result<Split, CutError> {
        let la = g.leaf_labels_of(&self.side_a);
        let lb = g.leaf_labels_of(&self.side_b);
        Split::new(la, lb).map_err(|_| CutError::LeaflessSide)
    }
}

/// Vertices reachable from `start` without using the edges in `removed`.
fn component_of(g: &DisplayGraph, start: usize, removed: &[usize]) -> BTreeSet<usize> {
    let removed: BTreeSet<usize> = removed.iter().copied().collect();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in g.adjacency(v) {
            if !removed.contains(&e) && !seen.contains(&w) {
                seen.insert(w);
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Connected components of the subgraph induced by `vertices`, after
/// removing the edges in `removed`. Ordered by least vertex.
pub fn components_within(
    g: &DisplayGraph,
    vertices: &BTreeSet<usize>,
    removed: &[usize],
) -> Vec<Vec<usize>> {
    let removed: BTreeSet<usize> = removed.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in vertices {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = vec![start];
        seen.insert(start);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in g.adjacency(v) {
                if vertices.contains(&w) && !removed.contains(&e) && !seen.contains(&w) {
                    seen.insert(w);
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Enumerate every minimal cut of a connected display graph: all vertex
/// bipartitions with both sides connected, reported in canonical order (the
/// side containing the least vertex is `side_a`, cuts sorted by edge set).
pub fn enumerate_minimal_cuts(g: &DisplayGraph) -> Result<Vec<Cut>, CutError> {
    if !g.is_connected() {
        return Err(CutError::Disconnected);
    }
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    enumerate_minimal_cuts_within(g, &all)
}

/// Enumeration restricted to one connected component given by `vertices`.
pub fn enumerate_minimal_cuts_within(
    g: &DisplayGraph,
    vertices: &[usize],
) -> Result<Vec<Cut>, CutError> {
    let n = vertices.len();
    if n > MAX_ENUMERATION_VERTICES {
        return Err(CutError::TooLarge(n));
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    let mut local = vertices.to_vec();
    local.sort_unstable();
    let index: BTreeMap<usize, usize> = local.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj_mask = vec![0u64; n];
    for (i, &v) in local.iter().enumerate() {
        for &(w, _) in g.adjacency(v) {
            if let Some(&j) = index.get(&w) {
                adj_mask[i] |= 1 << j;
            }
        }
    }
    let full: u64 = if n == 64 { !0 } else { (1 << n) - 1 };

    let neighborhood = |set: u64| -> u64 {
        let mut acc = 0u64;
        let mut rest = set;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            acc |= adj_mask[i];
        }
        acc & !set
    };
    let connected = |set: u64| -> bool {
        if set == 0 {
            return false;
        }
        let seed = 1u64 << set.trailing_zeros();
        let mut reach = seed;
        loop {
            let grow = (neighborhood(reach) | reach) & set | reach;
            if grow == reach {
                break;
            }
            reach = grow;
        }
        reach == set
    };

    // grow connected sets containing vertex 0 of the component; each set is
    // produced exactly once
    let mut sides = Vec::new();
    let mut stack = vec![(1u64, adj_mask[0] & !1, 0u64)];
    while let Some((set, extension, forbidden)) = stack.pop() {
        if set != full {
            sides.push(set);
        }
        let mut tried = 0u64;
        let mut cand = extension;
        while cand != 0 {
            let i = cand.trailing_zeros() as usize;
            let bit = 1u64 << i;
            cand &= cand - 1;
            let set2 = set | bit;
            let forbidden2 = forbidden | tried;
            let extension2 = ((extension | adj_mask[i]) & !set2) & !forbidden2 & !bit;
            stack.push((set2, extension2, forbidden2));
            tried |= bit;
        }
    }

    let mut cuts = Vec::new();
    for side in sides {
        let complement = full & !side;
        if connected(complement) {
            let to_vertices = |mask: u64| -> Vec<usize> {
                (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| local[i]).collect()
            };
            cuts.push(Cut::from_bipartition(
                g,
                to_vertices(side),
                to_vertices(complement),
            ));
        }
    }
    cuts.sort();
    Ok(cuts)
}

/// Per-tree common-endpoint test: an edge set is legal when, for every input
/// tree, the edges of that tree in the set all share a vertex.
pub fn is_legal_edge_set(g: &DisplayGraph, edges: &[usize]) -> bool {
    let mut per_tree: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in edges {
        for &t in &g.edge(e).trees {
            per_tree.entry(t).or_default().push(e);
        }
    }
    per_tree.values().all(|tree_edges| {
        let first = g.edge(tree_edges[0]);
        let mut candidates = BTreeSet::from([first.u, first.v]);
        for &e in &tree_edges[1..] {
            let e = g.edge(e);
            candidates.retain(|&v| v == e.u || v == e.v);
            if candidates.is_empty() {
                return false;
            }
        }
        true
    })
}

pub fn is_legal_cut(g: &DisplayGraph, cut: &Cut) -> bool {
    is_legal_edge_set(g, cut.edges())
}

/// A cut is nice when it is legal and every connected component left by its
/// removal contains at least one edge. Works on arbitrary cuts, not only
/// minimal ones.
pub fn is_nice_edge_set(g: &DisplayGraph, edges: &[usize]) -> bool {
    if !is_legal_edge_set(g, edges) {
        return false;
    }
    let all: BTreeSet<usize> = (0..g.vertex_count()).collect();
    let removed: BTreeSet<usize> = edges.iter().copied().collect();
    for comp in components_within(g, &all, edges) {
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let has_edge = comp.iter().any(|&v| {
            g.adjacency(v)
                .iter()
                .any(|&(w, e)| members.contains(&w) && !removed.contains(&e))
        });
        if !has_edge {
            return false;
        }
    }
    true
}

pub fn is_nice_cut(g: &DisplayGraph, cut: &Cut) -> bool {
    is_nice_edge_set(g, cut.edges())
}

/// Definitional check that an edge set is a minimal cut: removal leaves
/// exactly two components (within the component it lives in) and putting any
/// single edge back reconnects them.
pub fn is_minimal_cut(g: &DisplayGraph, edges: &[usize]) -> bool {
    Cut::from_edges(g, edges).is_ok()
}

/// Cuts are parallel when neither leaves edges of the other in both of its
/// sides. The test is run in both directions.
pub fn cuts_parallel(g: &DisplayGraph, c1: &Cut, c2: &Cut) -> bool {
    confined(g, c1, c2) && confined(g, c2, c1)
}

/// True when the edges of `other` avoid at least one side of `cut`.
fn confined(g: &DisplayGraph, cut: &Cut, other: &Cut) -> bool {
    let in_a: BTreeSet<usize> = cut.side_a.iter().copied().collect();
    let mut touches_a = false;
    let mut touches_b = false;
    for &e in other.edges() {
        if cut.contains_edge(e) {
            continue;
        }
        let edge = g.edge(e);
        if in_a.contains(&edge.u) {
            touches_a = true;
        } else {
            touches_b = true;
        }
        if touches_a && touches_b {
            return false;
        }
    }
    true
}

/// The non-trivial splits induced by a family of nice minimal cuts.
pub fn splits_of_cut_family(g: &DisplayGraph, cuts: &[Cut]) -> Result<BTreeSet<Split>, CutError> {
    let mut out = BTreeSet::new();
    for cut in cuts {
        let split = cut.induced_split(g)?;
        if !split.is_trivial() {
            out.insert(split);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::display_graph::build_display_graph;
    use crate::newick::parse_newick;
    use crate::samples;
    use crate::tree::{Label, Profile, Split};
    use std::collections::BTreeSet;

    fn profile(sources: &[&str]) -> Profile {
        Profile::new(sources.iter().map(|s| parse_newick(s).unwrap()).collect()).unwrap()
    }

    fn split(a: &[&str], b: &[&str]) -> Split {
        let to_set = |xs: &[&str]| xs.iter().map(|x| Label::from(*x)).collect::<BTreeSet<_>>();
        Split::new(to_set(a), to_set(b)).unwrap()
    }

    fn named_cut(g: &DisplayGraph, names: &[&str]) -> Cut {
        let edges: Vec<usize> = names
            .iter()
            .map(|n| g.edge_named(n).unwrap_or_else(|| panic!("edge {n}")))
            .collect();
        Cut::from_edges(g, &edges).unwrap()
    }

    /// The four-cut family used across the tests for the compatible sample
    /// pair.
    pub(crate) fn sample_family(g: &DisplayGraph) -> Vec<Cut> {
        vec![
            named_cut(g, &["1-2", "5-6"]),
            named_cut(g, &["2-3", "6-7", "5-6"]),
            named_cut(g, &["4-5", "1-2", "1-c"]),
            named_cut(g, &["6-7", "2-f"]),
        ]
    }

    #[test]
    fn path_graph_cuts() {
        // a two-leaf tree twice, chained: a-b, b-c gives a path
        let p = profile(&["(a,b);", "(b,c);"]);
        let g = build_display_graph(&p);
        let cuts = enumerate_minimal_cuts(&g).unwrap();
        assert_eq!(cuts.len(), 2);
        assert!(cuts.iter().all(|c| c.edges().len() == 1));
    }

    #[test]
    fn triangle_cuts() {
        let p = profile(&["(a,b);", "(b,c);", "(a,c);"]);
        let g = build_display_graph(&p);
        let cuts = enumerate_minimal_cuts(&g).unwrap();
        assert_eq!(cuts.len(), 3);
        assert!(cuts.iter().all(|c| c.edges().len() == 2));
    }

    #[test]
    fn four_cycle_cuts() {
        let p = profile(&["(a,b);", "(b,c);", "(c,d);", "(a,d);"]);
        let g = build_display_graph(&p);
        let cuts = enumerate_minimal_cuts(&g).unwrap();
        // four single-vertex sides plus two opposite-pair cuts
        assert_eq!(cuts.len(), 6);
        let sizes: Vec<usize> = cuts.iter().map(|c| c.edges().len()).collect();
        assert_eq!(sizes.iter().filter(|&&s| s == 2).count(), 6);
        let opposite: Vec<&Cut> = cuts.iter().filter(|c| c.side_a().len() == 2).collect();
        assert_eq!(opposite.len(), 2);
        assert!(!cuts_parallel(&g, opposite[0], opposite[1]));
    }

    #[test]
    fn enumerated_cuts_pass_definitional_check() {
        let p = samples::agreeing_pair();
        let g = build_display_graph(&p);
        for cut in enumerate_minimal_cuts(&g).unwrap() {
            assert!(is_minimal_cut(&g, cut.edges()));
            // re-derive the cut from its edges and compare sides
            let again = Cut::from_edges(&g, cut.edges()).unwrap();
            assert_eq!(again.side_a(), cut.side_a());
            assert_eq!(again.side_b(), cut.side_b());
        }
    }

    #[test]
    fn legality_cases() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        let f3 = named_cut(&g, &["4-5", "1-2", "1-c"]);
        assert!(is_legal_cut(&g, &f3));
        // two disjoint edges of the first tree
        let e1 = g.edge_named("1-a").unwrap();
        let e2 = g.edge_named("3-d").unwrap();
        assert!(!is_legal_edge_set(&g, &[e1, e2]));
        // any single edge is legal
        assert!(is_legal_edge_set(&g, &[e1]));
    }

    #[test]
    fn niceness_cases() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        for cut in sample_family(&g) {
            assert!(is_nice_cut(&g, &cut));
            assert!(is_legal_cut(&g, &cut));
            assert!(is_minimal_cut(&g, cut.edges()));
        }
        // isolating leaf g leaves an edgeless component
        let pendant = g.edge_named("7-g").unwrap();
        assert!(is_minimal_cut(&g, &[pendant]));
        assert!(!is_nice_edge_set(&g, &[pendant]));
    }

    #[test]
    fn nice_rejects_edgeless_internal_component() {
        // removing all edges at the star center strands it without edges
        let p = profile(&["(a,b,c);", "(a,b);", "(b,c);", "(a,c);"]);
        let g = build_display_graph(&p);
        let star_edges = g.tree_edges(0).to_vec();
        assert!(is_legal_edge_set(&g, &star_edges));
        assert!(!is_nice_edge_set(&g, &star_edges));
    }

    #[test]
    fn sample_family_is_pairwise_parallel() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        let family = sample_family(&g);
        for c in &family {
            assert!(cuts_parallel(&g, c, c));
        }
        for i in 0..family.len() {
            for j in i + 1..family.len() {
                assert!(cuts_parallel(&g, &family[i], &family[j]));
            }
        }
    }

    #[test]
    fn induced_splits_of_sample_family() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        let family = sample_family(&g);
        let sigma: Vec<Split> = family
            .iter()
            .map(|c| c.induced_split(&g).unwrap())
            .collect();
        assert_eq!(sigma[0], split(&["a", "b", "c"], &["d", "e", "f", "g"]));
        assert_eq!(sigma[1], split(&["a", "b", "c", "f", "g"], &["d", "e"]));
        assert_eq!(sigma[2], split(&["a", "b"], &["c", "d", "e", "f", "g"]));
        assert_eq!(sigma[3], split(&["a", "b", "c", "d", "e"], &["f", "g"]));
        let family_splits = splits_of_cut_family(&g, &family).unwrap();
        assert_eq!(family_splits.len(), 4);
    }

    #[test]
    fn induced_split_on_agreeing_pair() {
        let p = samples::agreeing_pair();
        let g = build_display_graph(&p);
        let cut = named_cut(&g, &["1-2", "5-6"]);
        assert_eq!(
            cut.induced_split(&g).unwrap(),
            split(&["a", "b", "f"], &["c", "d", "e"])
        );
    }

    #[test]
    fn trivial_splits_are_dropped_from_family_splits() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        // {2-f, 7-f} isolates the single leaf f: sigma is trivial
        let cut = named_cut(&g, &["2-f", "7-f"]);
        assert!(cut.induced_split(&g).unwrap().is_trivial());
        let splits = splits_of_cut_family(&g, &[cut]).unwrap();
        assert!(splits.is_empty());
        assert!(splits_of_cut_family(&g, &[]).unwrap().is_empty());
    }

    #[test]
    fn from_edges_rejects_non_cuts_and_non_minimal() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        let e12 = g.edge_named("1-2").unwrap();
        assert!(matches!(
            Cut::from_edges(&g, &[e12]),
            Err(CutError::NotACut)
        ));
        let e7g = g.edge_named("7-g").unwrap();
        assert!(matches!(
            Cut::from_edges(&g, &[e12, e7g]),
            Err(CutError::NotMinimal)
        ));
    }

    #[test]
    fn enumeration_requires_connected_graph() {
        let p = profile(&["(a,b,(c,d));", "(x,y,(z,w));"]);
        let g = build_display_graph(&p);
        assert!(matches!(
            enumerate_minimal_cuts(&g),
            Err(CutError::Disconnected)
        ));
    }
}
