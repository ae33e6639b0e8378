//! Random trees and profiles for property tests and benchmarks. All
//! functions are deterministic for a fixed RNG state.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::tree::{Label, PhyloTree, Profile};

/// Uniformly shaped random binary tree via leaf insertion on a random edge.
pub fn random_binary_tree<R: Rng>(labels: &BTreeSet<Label>, rng: &mut R) -> PhyloTree {
    let ordered: Vec<Label> = labels.iter().cloned().collect();
    assert!(!ordered.is_empty(), "need at least one label");
    match ordered.len() {
        1 => return PhyloTree::singleton(ordered[0].clone()),
        2 => {
            let map = BTreeMap::from([(0, ordered[0].clone()), (1, ordered[1].clone())]);
            return PhyloTree::new(2, &[(0, 1)], &map).unwrap();
        }
        _ => {}
    }
    let map: BTreeMap<usize, Label> = ordered[..3].iter().cloned().enumerate().collect();
    let mut tree = PhyloTree::new(4, &[(0, 3), (1, 3), (2, 3)], &map).unwrap();
    for label in &ordered[3..] {
        let edges = tree.edges();
        let &edge = edges.choose(rng).expect("tree has edges");
        tree = insert_leaf(&tree, edge, label.clone());
    }
    tree
}

fn insert_leaf(tree: &PhyloTree, edge: (usize, usize), label: Label) -> PhyloTree {
    let n = tree.vertex_count();
    let mut edges: Vec<(usize, usize)> = tree
        .edges()
        .into_iter()
        .filter(|&e| e != edge)
        .collect();
    edges.push((edge.0, n));
    edges.push((n, edge.1));
    edges.push((n, n + 1));
    let mut labels: BTreeMap<usize, Label> = (0..n)
        .filter_map(|v| tree.label_of(v).map(|l| (v, l.clone())))
        .collect();
    labels.insert(n + 1, label);
    PhyloTree::new(n + 2, &edges, &labels).expect("leaf insertion preserves validity")
}

/// Random tree that may be multifurcating: a random binary tree with each
/// split independently dropped with probability `collapse`.
pub fn random_tree<R: Rng>(labels: &BTreeSet<Label>, collapse: f64, rng: &mut R) -> PhyloTree {
    let binary = random_binary_tree(labels, rng);
    if collapse <= 0.0 {
        return binary;
    }
    let kept: BTreeSet<_> = binary
        .splits()
        .into_iter()
        .filter(|_| !rng.gen_bool(collapse))
        .collect();
    PhyloTree::from_splits(&kept, labels).expect("subset of a tree's splits is compatible")
}

/// Random profile: `count` trees, each over a random subset of the universe
/// of size at least `min_leaves`.
pub fn random_profile<R: Rng>(
    universe: &BTreeSet<Label>,
    count: usize,
    min_leaves: usize,
    collapse: f64,
    rng: &mut R,
) -> Profile {
    assert!(min_leaves >= 1 && min_leaves <= universe.len());
    let pool: Vec<Label> = universe.iter().cloned().collect();
    let trees = (0..count)
        .map(|_| {
            let size = rng.gen_range(min_leaves..=pool.len());
            let mut shuffled = pool.clone();
            shuffled.shuffle(rng);
            let subset: BTreeSet<Label> = shuffled.into_iter().take(size).collect();
            random_tree(&subset, collapse, rng)
        })
        .collect();
    Profile::new(trees).expect("non-empty profile")
}

/// Label set `a`, `b`, ... of the requested size (wraps to `a1`, `b1`, ...
/// beyond 26).
pub fn alphabet_labels(count: usize) -> BTreeSet<Label> {
    (0..count)
        .map(|i| {
            let letter = (b'a' + (i % 26) as u8) as char;
            if i < 26 {
                Label::from(letter.to_string())
            } else {
                Label::from(format!("{letter}{}", i / 26))
            }
        })
        .collect()
}
