//! The edge label intersection graph: the line graph of the display graph.
//!
//! Its vertices are the display-graph edges; two vertices are adjacent when
//! the corresponding edges share an endpoint. Minimal separators of this
//! graph mirror nice minimal cuts of the display graph, which the test
//! suites check exhaustively, so the module also ships a desk-scale minimal
//! separator enumerator (neighborhood seeding plus one-vertex expansion).

use std::collections::{BTreeSet, VecDeque};

use crate::cuts::is_legal_edge_set;
use crate::display_graph::DisplayGraph;

/// Line graph of a display graph. Vertex `i` is display edge id `i`.
#[derive(Debug, Clone)]
pub struct Elig {
    adjacency: Vec<Vec<usize>>,
}

/// Build the edge label intersection graph.
pub fn build_elig(g: &DisplayGraph) -> Elig {
    let m = g.edge_count();
    let mut adjacency = vec![Vec::new(); m];
    for v in 0..g.vertex_count() {
        let incident = g.adjacency(v);
        for i in 0..incident.len() {
            for j in i + 1..incident.len() {
                let (a, b) = (incident[i].1, incident[j].1);
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    Elig { adjacency }
}

impl Elig {
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Connected components after removing `removed`, ordered by least
    /// vertex.
    pub fn components_without(&self, removed: &BTreeSet<usize>) -> Vec<Vec<usize>> {
        let n = self.adjacency.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || removed.contains(&start) {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adjacency[v] {
                    if !seen[w] && !removed.contains(&w) {
                        seen[w] = true;
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

    pub fn is_connected(&self) -> bool {
        self.components_without(&BTreeSet::new()).len() <= 1
    }
}

/// A vertex set is a minimal separator exactly when its removal leaves at
/// least two full components: components adjacent to every separator vertex.
pub fn is_minimal_separator(elig: &Elig, set: &BTreeSet<usize>) -> bool {
    if set.is_empty() || set.len() >= elig.vertex_count() {
        return false;
    }
    let mut full = 0;
    for comp in elig.components_without(set) {
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let is_full = set
            .iter()
            .all(|&s| elig.neighbors(s).iter().any(|w| members.contains(w)));
        if is_full {
            full += 1;
            if full >= 2 {
                return true;
            }
        }
    }
    false
}

/// A separator is legal when, per input tree, its members that are edges of
/// that tree all share an endpoint. Separator vertices are display-graph
/// edges, so this delegates to the display graph.
pub fn is_legal_separator(g: &DisplayGraph, set: &BTreeSet<usize>) -> bool {
    let edges: Vec<usize> = set.iter().copied().collect();
    is_legal_edge_set(g, &edges)
}

/// Separators are parallel when removing either one leaves the other inside
/// a single component. Checked in both directions.
pub fn separators_parallel(elig: &Elig, f1: &BTreeSet<usize>, f2: &BTreeSet<usize>) -> bool {
    confined(elig, f1, f2) && confined(elig, f2, f1)
}

fn confined(elig: &Elig, separator: &BTreeSet<usize>, other: &BTreeSet<usize>) -> bool {
    let mut touched = 0;
    for comp in elig.components_without(separator) {
        if comp.iter().any(|v| other.contains(v)) {
            touched += 1;
            if touched > 1 {
                return false;
            }
        }
    }
    true
}

/// Enumerate all minimal separators of a connected graph.
///
/// Seeds with the component neighborhoods of each closed vertex
/// neighborhood, then saturates under the expansion rule: for a separator
/// `S` and `x` in `S`, the neighborhoods of the components of
/// `G - (S ∪ N[x])` are minimal separators too.
pub fn minimal_separators(elig: &Elig) -> Vec<BTreeSet<usize>> {
    let n = elig.vertex_count();
    let mut found: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut queue: VecDeque<BTreeSet<usize>> = VecDeque::new();

    let neighborhood_of = |comp: &[usize]| -> BTreeSet<usize> {
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let mut out = BTreeSet::new();
        for &v in comp {
            for &w in elig.neighbors(v) {
                if !members.contains(&w) {
                    out.insert(w);
                }
            }
        }
        out
    };

    for v in 0..n {
        let mut closed: BTreeSet<usize> = elig.neighbors(v).iter().copied().collect();
        closed.insert(v);
        for comp in elig.components_without(&closed) {
            let sep = neighborhood_of(&comp);
            if !sep.is_empty() && found.insert(sep.clone()) {
                queue.push_back(sep);
            }
        }
    }
    while let Some(sep) = queue.pop_front() {
        for &x in &sep {
            let mut removed = sep.clone();
            removed.insert(x);
            for &w in elig.neighbors(x) {
                removed.insert(w);
            }
            for comp in elig.components_without(&removed) {
                let candidate = neighborhood_of(&comp);
                if !candidate.is_empty() && found.insert(candidate.clone()) {
                    queue.push_back(candidate);
                }
            }
        }
    }
    // the generation rule can produce neighborhoods that fail minimality;
    // keep exactly the sets with two full components
    found
        .into_iter()
        .filter(|s| is_minimal_separator(elig, s))
        .collect()
}
