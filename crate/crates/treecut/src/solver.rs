//! Decision procedures for compatibility and agreement, witness
//! construction and verification, and the cut-function machinery on
//! agreement supertrees.
//!
//! A profile is compatible exactly when its display graph has a complete set
//! of pairwise parallel legal minimal cuts: one cut per internal tree edge
//! `e` that contains `e` as the only edge of its tree. Agreement adds the
//! constraint that every cut carries at most one edge of every tree. The
//! solver enumerates the minimal cuts per connected component, keeps the
//! candidates allowed by the mode, and backtracks over requirement
//! assignments with parallelism conflicts pruned through a precomputed
//! matrix. The supertree is synthesized purely from the splits induced by
//! the chosen cuts.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cuts::{
    self, components_within, enumerate_minimal_cuts_within, splits_of_cut_family, Cut, CutError,
};
use crate::display_graph::{build_display_graph, DisplayGraph};
use crate::tree::{Label, PhyloTree, Profile, Split, TreeError};

/// Default cap on display-graph component size before cut enumeration.
pub const DEFAULT_VERTEX_LIMIT: usize = 26;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Largest display-graph component the solver will enumerate.
    pub vertex_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            vertex_limit: DEFAULT_VERTEX_LIMIT,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("display graph component has {vertices} vertices, over the limit of {limit}")]
    LimitExceeded { vertices: usize, limit: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error("the supplied tree is not an agreement supertree of the profile")]
    NotAgreementSupertree,
    #[error("({0}, {1}) is not an edge of the supertree")]
    EdgeNotInSupertree(usize, usize),
    #[error("vertex {0} is not an endpoint of the edge")]
    NotAnEndpoint(usize),
    #[error("the cut of this edge is already minimal; nothing to split")]
    CutAlreadyMinimal,
    #[error("the far side of the chosen endpoint is a single piece; split at the other endpoint")]
    SingleFragment,
    #[error("cannot split at a leaf endpoint")]
    LeafSplitEndpoint,
    #[error("edge splitting did not converge")]
    DidNotConverge,
}

/// One completeness obligation: an internal edge of one input tree, as a
/// local vertex pair of that tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Requirement {
    pub tree: usize,
    pub edge: (usize, usize),
}

/// One requirement per internal edge per tree; trees without internal edges
/// (fewer than four leaves, or stars) contribute none.
pub fn requirements_of(profile: &Profile) -> Vec<Requirement> {
    let mut out = Vec::new();
    for (t, tree) in profile.trees().iter().enumerate() {
        for edge in tree.internal_edges() {
            out.push(Requirement { tree: t, edge });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Compatibility,
    Agreement,
}

/// A certified decision: the cut family, the splits it induces, and the
/// supertree built from those splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub mode: Mode,
    pub cuts: Vec<Cut>,
    pub splits: BTreeSet<Split>,
    pub supertree: PhyloTree,
}

#[derive(Debug)]
pub enum CompatibilityOutcome {
    Compatible(Witness),
    Incompatible,
}

#[derive(Debug)]
pub enum AgreementOutcome {
    Agreement(Witness),
    NoAst,
}

fn display_requirement(g: &DisplayGraph, r: &Requirement) -> usize {
    let u = g.tree_vertex(r.tree, r.edge.0);
    let v = g.tree_vertex(r.tree, r.edge.1);
    g.edge_between(u, v).expect("tree edge exists in display graph")
}

/// True when `cut` contains the requirement's edge as the only edge of its
/// tree.
fn serves(cut: &Cut, tree: usize, edge_id: usize) -> bool {
    cut.per_tree().get(&tree).map(Vec::as_slice) == Some(&[edge_id][..])
}

/// True when the cut satisfies the mode's per-tree constraint: legal always,
/// and at most one edge per tree in agreement mode.
fn mode_allows(g: &DisplayGraph, cut: &Cut, mode: Mode) -> bool {
    match mode {
        Mode::Compatibility => cuts::is_legal_cut(g, cut),
        Mode::Agreement => cut.per_tree().values().all(|edges| edges.len() <= 1),
    }
}

/// Filter an enumerated family down to the legal minimal cuts usable for one
/// requirement under the given mode.
pub fn candidate_cuts(
    g: &DisplayGraph,
    family: &[Cut],
    requirement: &Requirement,
    mode: Mode,
) -> Vec<Cut> {
    let edge_id = display_requirement(g, requirement);
    family
        .iter()
        .filter(|c| serves(c, requirement.tree, edge_id))
        .filter(|c| mode_allows(g, c, mode))
        .cloned()
        .collect()
}

/// Backtracking assignment of one pool cut per requirement, pruned by the
/// pairwise parallelism matrix. Requirements are processed in ascending
/// candidate-count order; a chosen cut silently covers every later
/// requirement it serves. Returns pool indices of the chosen cuts, or `None`
/// when no complete parallel family exists.
fn search_family(candidates: &[Vec<usize>], parallel: &[Vec<bool>]) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));
    let mut chosen: Vec<usize> = Vec::new();

    fn step(
        depth: usize,
        order: &[usize],
        candidates: &[Vec<usize>],
        parallel: &[Vec<bool>],
        chosen: &mut Vec<usize>,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let req = order[depth];
        if candidates[req].iter().any(|c| chosen.contains(c)) {
            return step(depth + 1, order, candidates, parallel, chosen);
        }
        for &cand in &candidates[req] {
            if chosen.iter().all(|&c| parallel[c][cand]) {
                chosen.push(cand);
                if step(depth + 1, order, candidates, parallel, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    if step(0, &order, candidates, parallel, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

fn solve(
    profile: &Profile,
    config: &SolverConfig,
    mode: Mode,
) -> Result<Option<Witness>, SolveError> {
    let g = build_display_graph(profile);
    let mut chosen_cuts: Vec<Cut> = Vec::new();
    for comp in g.components() {
        let mut requirements: Vec<(usize, usize)> = Vec::new(); // (tree, edge id)
        for &t in &comp.trees {
            for edge in profile.tree(t).internal_edges() {
                let r = Requirement { tree: t, edge };
                requirements.push((t, display_requirement(&g, &r)));
            }
        }
        if requirements.is_empty() {
            continue;
        }
        if comp.vertices.len() > config.vertex_limit {
            return Err(SolveError::LimitExceeded {
                vertices: comp.vertices.len(),
                limit: config.vertex_limit,
            });
        }
        let family = enumerate_minimal_cuts_within(&g, &comp.vertices)?;
        // pool: cuts allowed by the mode that serve at least one requirement
        let mut pool: Vec<Cut> = Vec::new();
        for cut in family {
            if !cuts::is_legal_cut(&g, &cut) || !mode_allows(&g, &cut, mode) {
                continue;
            }
            if requirements.iter().any(|&(t, e)| serves(&cut, t, e)) {
                pool.push(cut);
            }
        }
        let mut candidates: Vec<Vec<usize>> = Vec::new();
        for &(t, e) in &requirements {
            let own: Vec<usize> = (0..pool.len()).filter(|&i| serves(&pool[i], t, e)).collect();
            if own.is_empty() {
                return Ok(None);
            }
            candidates.push(own);
        }
        let parallel: Vec<Vec<bool>> = (0..pool.len())
            .map(|i| {
                (0..pool.len())
                    .map(|j| cuts::cuts_parallel(&g, &pool[i], &pool[j]))
                    .collect()
            })
            .collect();
        match search_family(&candidates, &parallel) {
            None => return Ok(None),
            Some(indices) => {
                let mut picked: BTreeSet<usize> = indices.into_iter().collect();
                while let Some(i) = picked.pop_first() {
                    chosen_cuts.push(pool[i].clone());
                }
            }
        }
    }
    let witness = assemble_witness(&g, chosen_cuts, mode)?;
    for tree in profile.trees() {
        match mode {
            Mode::Compatibility => assert!(
                witness.supertree.displays(tree)?,
                "synthesized supertree must display every input tree"
            ),
            Mode::Agreement => assert!(
                witness.supertree.agrees_with(tree)?,
                "synthesized supertree must agree with every input tree"
            ),
        }
    }
    Ok(Some(witness))
}

/// Build a witness from an explicit cut family: per display-graph component,
/// the supertree piece is synthesized from the splits induced by that
/// component's cuts, and the pieces are grafted into one supertree on the
/// full label set. No completeness or parallelism checking happens here; use
/// [`verify_witness`] for that.
pub fn assemble_witness(
    g: &DisplayGraph,
    mut cuts: Vec<Cut>,
    mode: Mode,
) -> Result<Witness, SolveError> {
    cuts.sort();
    cuts.dedup();
    let comps = g.components();
    let mut vertex_comp = vec![usize::MAX; g.vertex_count()];
    for (i, comp) in comps.iter().enumerate() {
        for &v in &comp.vertices {
            vertex_comp[v] = i;
        }
    }
    let mut grouped: Vec<Vec<Cut>> = vec![Vec::new(); comps.len()];
    for cut in &cuts {
        grouped[vertex_comp[cut.side_a()[0]]].push(cut.clone());
    }
    let mut parts = Vec::new();
    for (comp, comp_cuts) in comps.iter().zip(&grouped) {
        let labels = g.leaf_labels_of(&comp.vertices);
        let splits = splits_of_cut_family(g, comp_cuts)?;
        parts.push(PhyloTree::from_splits(&splits, &labels)?);
    }
    let supertree = graft(parts)?;
    let splits = supertree.splits();
    Ok(Witness {
        mode,
        cuts,
        splits,
        supertree,
    })
}

/// Join per-component supertrees into one tree over the union of their
/// labels. Components attach through an internal vertex when one exists;
/// two-leaf pieces are subdivided first, single leaves attach directly.
/// Restrictions to any one component's labels are unaffected.
fn graft(parts: Vec<PhyloTree>) -> Result<PhyloTree, TreeError> {
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().unwrap());
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut labels: BTreeMap<usize, Label> = BTreeMap::new();
    let mut joins: Vec<usize> = Vec::new();
    let mut next = 0usize;
    for part in &parts {
        let base = next;
        next += part.vertex_count();
        for v in 0..part.vertex_count() {
            if let Some(l) = part.label_of(v) {
                labels.insert(base + v, l.clone());
            }
        }
        if part.internal_count() > 0 {
            for (u, v) in part.edges() {
                edges.push((base + u, base + v));
            }
            joins.push(base); // first internal vertex
        } else if part.vertex_count() == 2 {
            // subdivide the lone edge so the piece can attach
            let mid = next;
            next += 1;
            edges.push((base, mid));
            edges.push((mid, base + 1));
            joins.push(mid);
        } else {
            joins.push(base); // single leaf
        }
    }
    if parts.len() == 2 {
        edges.push((joins[0], joins[1]));
    } else {
        let hub = next;
        next += 1;
        for &j in &joins {
            edges.push((hub, j));
        }
    }
    PhyloTree::new(next, &edges, &labels)
}

/// Decide whether some supertree displays every input tree. Disconnected
/// profiles are decomposed and solved per component.
pub fn decide_compatibility(
    profile: &Profile,
    config: &SolverConfig,
) -> Result<CompatibilityOutcome, SolveError> {
    Ok(match solve(profile, config, Mode::Compatibility)? {
        Some(w) => CompatibilityOutcome::Compatible(w),
        None => CompatibilityOutcome::Incompatible,
    })
}

/// Decide whether some supertree agrees with every input tree.
pub fn decide_agreement(
    profile: &Profile,
    config: &SolverConfig,
) -> Result<AgreementOutcome, SolveError> {
    Ok(match solve(profile, config, Mode::Agreement)? {
        Some(w) => AgreementOutcome::Agreement(w),
        None => AgreementOutcome::NoAst,
    })
}

/// Outcome of [`verify_witness`]: empty failure list means the witness is
/// valid.
#[derive(Debug, Clone)]
pub struct Verification {
    failures: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }
}

/// Re-validate every witness invariant from scratch: minimality and legality
/// of each cut, pairwise parallelism, completeness over the requirements,
/// the per-tree bound in agreement mode, the stored splits, and the
/// display/agreement contract of the supertree.
pub fn verify_witness(profile: &Profile, witness: &Witness) -> Verification {
    let g = build_display_graph(profile);
    let mut failures = Vec::new();
    let name_of = |cut: &Cut| -> String {
        let names: Vec<String> = cut.edges().iter().map(|&e| g.edge_name(e)).collect();
        format!("{{{}}}", names.join(", "))
    };

    if witness.supertree.label_set() != *profile.label_universe() {
        failures.push("label_universe: supertree labels differ from the profile's".into());
    }
    for cut in &witness.cuts {
        match Cut::from_edges(&g, cut.edges()) {
            Ok(rebuilt) => {
                if rebuilt.side_a() != cut.side_a() || rebuilt.side_b() != cut.side_b() {
                    failures.push(format!(
                        "minimality: cached bipartition of {} is wrong",
                        name_of(cut)
                    ));
                }
            }
            Err(_) => {
                failures.push(format!("minimality: {} is not a minimal cut", name_of(cut)));
                continue;
            }
        }
        if !cuts::is_legal_cut(&g, cut) {
            failures.push(format!("legality: {} is not legal", name_of(cut)));
        }
        if witness.mode == Mode::Agreement {
            for (t, edges) in cut.per_tree() {
                if edges.len() > 1 {
                    failures.push(format!(
                        "per_tree_bound: {} contains {} edges of tree {}",
                        name_of(cut),
                        edges.len(),
                        t
                    ));
                }
            }
        }
    }
    for i in 0..witness.cuts.len() {
        for j in i + 1..witness.cuts.len() {
            if !cuts::cuts_parallel(&g, &witness.cuts[i], &witness.cuts[j]) {
                failures.push(format!(
                    "parallelism: {} and {} are not parallel",
                    name_of(&witness.cuts[i]),
                    name_of(&witness.cuts[j])
                ));
            }
        }
    }
    for r in requirements_of(profile) {
        let edge_id = display_requirement(&g, &r);
        if !witness.cuts.iter().any(|c| serves(c, r.tree, edge_id)) {
            failures.push(format!(
                "completeness: no cut isolates edge {} of tree {}",
                g.edge_name(edge_id),
                r.tree
            ));
        }
    }
    if witness.splits != witness.supertree.splits() {
        failures.push("splits: stored split set differs from the supertree's".into());
    }
    // each cut's induced split must appear in the supertree restricted to
    // the cut's component (for a connected profile, in the supertree itself)
    let comps = g.components();
    let mut vertex_comp = vec![usize::MAX; g.vertex_count()];
    for (i, comp) in comps.iter().enumerate() {
        for &v in &comp.vertices {
            vertex_comp[v] = i;
        }
    }
    let restricted: Vec<Option<BTreeSet<Split>>> = comps
        .iter()
        .map(|comp| {
            let labels = g.leaf_labels_of(&comp.vertices);
            witness
                .supertree
                .restrict(&labels)
                .ok()
                .map(|t| t.splits())
        })
        .collect();
    for cut in &witness.cuts {
        match cut.induced_split(&g) {
            Ok(split) => {
                let comp = vertex_comp[cut.side_a()[0]];
                let shown = restricted[comp]
                    .as_ref()
                    .is_some_and(|splits| split.is_trivial() || splits.contains(&split));
                if !shown {
                    failures.push(format!(
                        "splits: induced split of {} is not realized by the supertree",
                        name_of(cut)
                    ));
                }
            }
            Err(_) => failures.push(format!("splits: {} has a leafless side", name_of(cut))),
        }
    }
    for (i, tree) in profile.trees().iter().enumerate() {
        match witness.mode {
            Mode::Compatibility => match witness.supertree.displays(tree) {
                Ok(true) => {}
                _ => failures.push(format!("display: supertree does not display tree {i}")),
            },
            Mode::Agreement => match witness.supertree.agrees_with(tree) {
                Ok(true) => {}
                _ => failures.push(format!("agreement: supertree does not agree with tree {i}")),
            },
        }
    }
    Verification { failures }
}

/// Extract from a complete family of legal minimal cuts a complete subfamily
/// in which every member is nice: for each requirement keep the first cut
/// serving it. Returns `None` when the family is not complete.
pub fn nice_complete_subfamily(
    g: &DisplayGraph,
    profile: &Profile,
    family: &[Cut],
) -> Option<Vec<Cut>> {
    let mut picked: BTreeSet<Cut> = BTreeSet::new();
    for r in requirements_of(profile) {
        let edge_id = display_requirement(g, &r);
        let cut = family.iter().find(|c| serves(c, r.tree, edge_id))?;
        picked.insert(cut.clone());
    }
    Some(picked.into_iter().collect())
}

/// The cut function of an agreement supertree: each supertree edge maps to
/// the set of input-tree edges (as display-graph edge ids) whose split it
/// realizes. Errors when the supplied tree is not an agreement supertree.
pub fn agreement_cut_function(
    supertree: &PhyloTree,
    profile: &Profile,
    g: &DisplayGraph,
) -> Result<BTreeMap<(usize, usize), BTreeSet<usize>>, SolveError> {
    if supertree.label_set() != *profile.label_universe() {
        return Err(SolveError::NotAgreementSupertree);
    }
    for tree in profile.trees() {
        if !supertree.agrees_with(tree)? {
            return Err(SolveError::NotAgreementSupertree);
        }
    }
    let mut out = BTreeMap::new();
    for (u, v) in supertree.edges() {
        let side_u = leaves_reachable(supertree, u, (u, v));
        let side_v = leaves_reachable(supertree, v, (u, v));
        let mut mapped = BTreeSet::new();
        for (t, tree) in profile.trees().iter().enumerate() {
            let tree_labels = tree.label_set();
            let qu: BTreeSet<Label> = side_u.intersection(&tree_labels).cloned().collect();
            let qv: BTreeSet<Label> = side_v.intersection(&tree_labels).cloned().collect();
            if qu.is_empty() || qv.is_empty() {
                continue;
            }
            let target = Split::new(qu, qv)?;
            let hits: Vec<(usize, usize)> = tree
                .edges()
                .into_iter()
                .filter(|&(a, b)| tree.edge_split(a, b).expect("edge exists") == target)
                .collect();
            debug_assert!(hits.len() == 1, "agreement edge must be unique");
            let (a, b) = *hits.first().expect("agreement gives a realizing edge");
            let id = g
                .edge_between(g.tree_vertex(t, a), g.tree_vertex(t, b))
                .expect("tree edge exists in display graph");
            mapped.insert(id);
        }
        out.insert((u, v), mapped);
    }
    Ok(out)
}

fn leaves_reachable(tree: &PhyloTree, start: usize, blocked: (usize, usize)) -> BTreeSet<Label> {
    let mut seen = vec![false; tree.vertex_count()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut out = BTreeSet::new();
    while let Some(x) = stack.pop() {
        if let Some(l) = tree.label_of(x) {
            out.insert(l.clone());
        }
        for &w in tree.neighbors(x) {
            if (x, w) == blocked || (w, x) == blocked {
                continue;
            }
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    out
}

/// Split the supertree edge `(u, v)` at `endpoint`: the far subtree is
/// removed and, for each part of its label set induced by the components of
/// the display graph minus the edge's cut, the restriction of the far
/// subtree to that part is re-attached directly to `endpoint`.
///
/// Preconditions: the supertree is an agreement supertree, the cut of the
/// edge is not minimal, and the far side's label partition has more than one
/// part (otherwise split at the other endpoint).
pub fn split_edge_at(
    supertree: &PhyloTree,
    edge: (usize, usize),
    endpoint: usize,
    profile: &Profile,
    g: &DisplayGraph,
) -> Result<PhyloTree, SolveError> {
    let (u, v) = edge;
    if !supertree.has_edge(u, v) {
        return Err(SolveError::EdgeNotInSupertree(u, v));
    }
    if endpoint != u && endpoint != v {
        return Err(SolveError::NotAnEndpoint(endpoint));
    }
    let kept = endpoint;
    let far = if endpoint == u { v } else { u };
    if supertree.is_leaf(kept) {
        return Err(SolveError::LeafSplitEndpoint);
    }
    let psi = agreement_cut_function(supertree, profile, g)?;
    let cut = psi
        .get(&(u.min(v), u.max(v)))
        .expect("every supertree edge has a cut value");
    let cut_edges: Vec<usize> = cut.iter().copied().collect();
    let all: BTreeSet<usize> = (0..g.vertex_count()).collect();
    let comps = components_within(g, &all, &cut_edges);
    if comps.len() <= 2 {
        return Err(SolveError::CutAlreadyMinimal);
    }
    // partition of the far side's labels by display-graph component
    let far_labels = leaves_reachable(supertree, far, (u, v));
    let mut parts: Vec<BTreeSet<Label>> = Vec::new();
    for comp in &comps {
        let part: BTreeSet<Label> = g
            .leaf_labels_of(comp)
            .intersection(&far_labels)
            .cloned()
            .collect();
        if !part.is_empty() {
            parts.push(part);
        }
    }
    if parts.len() <= 1 {
        return Err(SolveError::SingleFragment);
    }

    // far-side vertex set and its orientation away from `kept`
    let far_vertices = vertices_reachable(supertree, far, (u, v));
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut labels: BTreeMap<usize, Label> = BTreeMap::new();
    let mut next = 0usize;
    let mut kept_map: BTreeMap<usize, usize> = BTreeMap::new();
    for w in 0..supertree.vertex_count() {
        if !far_vertices.contains(&w) {
            kept_map.insert(w, next);
            if let Some(l) = supertree.label_of(w) {
                labels.insert(next, l.clone());
            }
            next += 1;
        }
    }
    for (a, b) in supertree.edges() {
        if let (Some(&ra), Some(&rb)) = (kept_map.get(&a), kept_map.get(&b)) {
            edges.push((ra, rb));
        }
    }
    for part in &parts {
        let root = attach_fragment(
            supertree,
            far,
            &far_vertices,
            part,
            &mut edges,
            &mut labels,
            &mut next,
        );
        edges.push((kept_map[&kept], root));
    }
    Ok(PhyloTree::new(next, &edges, &labels)?)
}

fn vertices_reachable(
    tree: &PhyloTree,
    start: usize,
    blocked: (usize, usize),
) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &w in tree.neighbors(x) {
            if (x, w) == blocked || (w, x) == blocked {
                continue;
            }
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

/// Copy into `edges`/`labels` the restriction of the far subtree to `part`,
/// rooted at the surviving vertex closest to the old attachment point, and
/// return the new id of that root. Degree-two vertices other than the root
/// are suppressed; the root itself is never suppressed because adding the
/// attachment edge restores its degree.
fn attach_fragment(
    tree: &PhyloTree,
    far_root: usize,
    far_vertices: &BTreeSet<usize>,
    part: &BTreeSet<Label>,
    edges: &mut Vec<(usize, usize)>,
    labels: &mut BTreeMap<usize, Label>,
    next: &mut usize,
) -> usize {
    // orient the far side: parent pointers toward far_root
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order = vec![far_root];
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        i += 1;
        for &w in tree.neighbors(x) {
            if !far_vertices.contains(&w) || w == far_root || parent.contains_key(&w) {
                continue;
            }
            parent.insert(w, x);
            order.push(w);
        }
    }
    // count of part-labels in each subtree
    let mut count: BTreeMap<usize, usize> = BTreeMap::new();
    for &x in order.iter().rev() {
        let own = usize::from(tree.label_of(x).is_some_and(|l| part.contains(l)));
        let total = count.get(&x).copied().unwrap_or(0) + own;
        count.insert(x, total);
        if let Some(&p) = parent.get(&x) {
            *count.entry(p).or_insert(0) += total;
        }
    }
    let total = part.len();
    // walk down to the deepest vertex whose subtree still holds all of part
    let mut root = far_root;
    loop {
        let down = order
            .iter()
            .find(|&&w| parent.get(&w) == Some(&root) && count.get(&w) == Some(&total));
        match down {
            Some(&w) => root = w,
            None => break,
        }
    }
    // fragment = descendants of root with a positive count
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    adj.entry(root).or_default();
    for &x in &order {
        if x == root || count.get(&x).copied().unwrap_or(0) == 0 {
            continue;
        }
        if !in_subtree(&parent, x, root) {
            continue;
        }
        let p = parent[&x];
        if in_subtree(&parent, p, root) || p == root {
            adj.entry(p).or_default().insert(x);
            adj.entry(x).or_default().insert(p);
        }
    }
    // suppress non-root degree-two vertices
    let vertices: Vec<usize> = adj.keys().copied().collect();
    for x in vertices {
        if x != root && adj[&x].len() == 2 {
            let mut it = adj[&x].iter();
            let a = *it.next().unwrap();
            let b = *it.next().unwrap();
            adj.get_mut(&a).unwrap().remove(&x);
            adj.get_mut(&b).unwrap().remove(&x);
            adj.get_mut(&a).unwrap().insert(b);
            adj.get_mut(&b).unwrap().insert(a);
            adj.remove(&x);
        }
    }
    // copy with fresh ids
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    for &x in adj.keys() {
        remap.insert(x, *next);
        if let Some(l) = tree.label_of(x) {
            labels.insert(*next, l.clone());
        }
        *next += 1;
    }
    for (x, nbrs) in &adj {
        for &w in nbrs {
            if x < &w {
                edges.push((remap[x], remap[&w]));
            }
        }
    }
    remap[&root]
}

fn in_subtree(parent: &BTreeMap<usize, usize>, mut x: usize, root: usize) -> bool {
    loop {
        if x == root {
            return true;
        }
        match parent.get(&x) {
            Some(&p) => x = p,
            None => return false,
        }
    }
}

/// Repeatedly split supertree edges whose cuts are not minimal until every
/// internal edge maps to a minimal cut. The result is still an agreement
/// supertree of the profile.
pub fn normalize_agreement_supertree(
    supertree: &PhyloTree,
    profile: &Profile,
    g: &DisplayGraph,
) -> Result<PhyloTree, SolveError> {
    let mut current = supertree.clone();
    let all: BTreeSet<usize> = (0..g.vertex_count()).collect();
    for _ in 0..1000 {
        let psi = agreement_cut_function(&current, profile, g)?;
        let mut acted = false;
        for ((u, v), cut) in &psi {
            if current.is_leaf(*u) || current.is_leaf(*v) {
                continue;
            }
            let cut_edges: Vec<usize> = cut.iter().copied().collect();
            if components_within(g, &all, &cut_edges).len() <= 2 {
                continue;
            }
            // pick the endpoint whose far side fragments
            current = match split_edge_at(&current, (*u, *v), *u, profile, g) {
                Ok(t) => t,
                Err(SolveError::SingleFragment) => {
                    split_edge_at(&current, (*u, *v), *v, profile, g)?
                }
                Err(e) => return Err(e),
            };
            acted = true;
            break;
        }
        if !acted {
            return Ok(current);
        }
    }
    Err(SolveError::DidNotConverge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::is_nice_cut;
    use crate::newick::parse_newick;
    use crate::samples;

    fn profile(sources: &[&str]) -> Profile {
        Profile::new(sources.iter().map(|s| parse_newick(s).unwrap()).collect()).unwrap()
    }

    fn named_cut(g: &DisplayGraph, names: &[&str]) -> Cut {
        let edges: Vec<usize> = names
            .iter()
            .map(|n| g.edge_named(n).unwrap_or_else(|| panic!("edge {n}")))
            .collect();
        Cut::from_edges(g, &edges).unwrap()
    }

    fn config() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn requirement_counts() {
        assert_eq!(requirements_of(&samples::compatible_pair()).len(), 5);
        assert_eq!(requirements_of(&samples::agreeing_pair()).len(), 4);
        let quartets = profile(&["((a,b),(c,d));", "((a,b),(c,e));"]);
        assert_eq!(requirements_of(&quartets).len(), 2);
        let small = profile(&["(a,b,c);", "(a,b);"]);
        assert!(requirements_of(&small).is_empty());
    }

    #[test]
    fn candidate_filter_compatibility_mode() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        let family = crate::cuts::enumerate_minimal_cuts(&g).unwrap();
        // requirement: edge {1,2} of the first tree, which is its local
        // internal edge (0, 1)
        let r = Requirement {
            tree: 0,
            edge: (0, 1),
        };
        let candidates = candidate_cuts(&g, &family, &r, Mode::Compatibility);
        let f1 = named_cut(&g, &["1-2", "5-6"]);
        assert!(candidates.contains(&f1));
        // every candidate carries {1,2} as the only first-tree edge
        let e12 = g.edge_named("1-2").unwrap();
        for c in &candidates {
            assert_eq!(c.per_tree()[&0], vec![e12]);
        }
        // F3 = {4-5, 1-2, 1-c} serves (tree 1, edge {4,5}) instead
        let f3 = named_cut(&g, &["4-5", "1-2", "1-c"]);
        assert!(!candidates.contains(&f3));
        let r45 = Requirement {
            tree: 1,
            edge: (0, 1),
        };
        let c45 = candidate_cuts(&g, &family, &r45, Mode::Compatibility);
        assert!(c45.contains(&f3));
    }

    #[test]
    fn agreement_mode_filters_out_double_edges() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        let family = crate::cuts::enumerate_minimal_cuts(&g).unwrap();
        // requirement (second tree, edge {4,5}): in agreement mode every
        // candidate pairs 4-5 with at most one first-tree edge; here none
        // qualifies at all, which is why no agreement supertree exists
        let r45 = Requirement {
            tree: 1,
            edge: (0, 1),
        };
        let cands = candidate_cuts(&g, &family, &r45, Mode::Agreement);
        for c in &cands {
            assert!(c.per_tree().values().all(|e| e.len() <= 1));
        }
        assert!(cands.is_empty());
    }

    #[test]
    fn single_tree_candidates_exist() {
        let p = profile(&["((a,b),(c,d));"]);
        let g = build_display_graph(&p);
        let family = crate::cuts::enumerate_minimal_cuts(&g).unwrap();
        let r = requirements_of(&p)[0];
        let cands = candidate_cuts(&g, &family, &r, Mode::Agreement);
        assert!(!cands.is_empty());
        // the bare single-edge cut is among them
        assert!(cands.iter().any(|c| c.edges().len() == 1));
    }

    #[test]
    fn decisions_on_sample_pairs() {
        let compat_only = samples::compatible_pair();
        match decide_compatibility(&compat_only, &config()).unwrap() {
            CompatibilityOutcome::Compatible(w) => {
                assert!(verify_witness(&compat_only, &w).ok());
            }
            CompatibilityOutcome::Incompatible => panic!("expected compatible"),
        }
        assert!(matches!(
            decide_agreement(&compat_only, &config()).unwrap(),
            AgreementOutcome::NoAst
        ));

        let agreeing = samples::agreeing_pair();
        match decide_agreement(&agreeing, &config()).unwrap() {
            AgreementOutcome::Agreement(w) => {
                assert!(verify_witness(&agreeing, &w).ok());
                let g = build_display_graph(&agreeing);
                let names: Vec<Vec<String>> = w
                    .cuts
                    .iter()
                    .map(|c| c.edges().iter().map(|&e| g.edge_name(e)).collect())
                    .collect();
                assert!(names.contains(&vec!["1-2".into(), "4-5".into()]));
                for t in agreeing.trees() {
                    assert!(w.supertree.agrees_with(t).unwrap());
                }
            }
            AgreementOutcome::NoAst => panic!("expected an agreement supertree"),
        }
    }

    #[test]
    fn known_agreement_family_verifies() {
        // the three-cut family on the agreeing pair is a valid agreement
        // witness in its own right
        let p = samples::agreeing_pair();
        let g = build_display_graph(&p);
        let family = vec![
            named_cut(&g, &["1-2", "4-5"]),
            named_cut(&g, &["1-2", "5-6"]),
            named_cut(&g, &["2-3", "6-d"]),
        ];
        for cut in &family {
            assert!(cut.per_tree().values().all(|e| e.len() == 1));
        }
        let w = assemble_witness(&g, family, Mode::Agreement).unwrap();
        assert!(verify_witness(&p, &w).ok());
        assert!(w
            .supertree
            .is_isomorphic_to(&parse_newick("((a,b),f,(c,(d,e)));").unwrap()));
    }

    #[test]
    fn single_tree_profile_is_its_own_supertree() {
        let p = profile(&["((a,b),c,(d,(e,f)));"]);
        match decide_compatibility(&p, &config()).unwrap() {
            CompatibilityOutcome::Compatible(w) => {
                assert!(w.supertree.is_isomorphic_to(p.tree(0)));
            }
            _ => panic!("single tree must be compatible"),
        }
        match decide_agreement(&p, &config()).unwrap() {
            AgreementOutcome::Agreement(w) => {
                assert!(w.supertree.is_isomorphic_to(p.tree(0)));
            }
            _ => panic!("single tree must agree with itself"),
        }
    }

    #[test]
    fn identical_trees_agree() {
        let p = profile(&["((a,b),(c,(d,e)));", "((a,b),(c,(d,e)));"]);
        match decide_agreement(&p, &config()).unwrap() {
            AgreementOutcome::Agreement(w) => {
                assert!(w.supertree.is_isomorphic_to(p.tree(0)));
            }
            _ => panic!("identical trees must agree"),
        }
    }

    #[test]
    fn crossing_quartets_are_incompatible() {
        let p = profile(&["((a,b),(c,d));", "((a,c),(b,d));"]);
        assert!(matches!(
            decide_compatibility(&p, &config()).unwrap(),
            CompatibilityOutcome::Incompatible
        ));
        assert!(matches!(
            decide_agreement(&p, &config()).unwrap(),
            AgreementOutcome::NoAst
        ));
    }

    #[test]
    fn split_free_profile_gets_star_supertree() {
        let p = profile(&["(a,b,c);", "(b,c,d);", "(a,d);"]);
        match decide_compatibility(&p, &config()).unwrap() {
            CompatibilityOutcome::Compatible(w) => {
                assert!(w.cuts.is_empty());
                assert!(w.splits.is_empty());
                assert_eq!(w.supertree.label_set(), *p.label_universe());
                assert_eq!(w.supertree.internal_count(), 1);
            }
            _ => panic!("split-free profiles are vacuously compatible"),
        }
    }

    #[test]
    fn disconnected_profile_is_grafted() {
        let p = profile(&["((a,b),(c,d));", "((x,y),(z,w));"]);
        match decide_agreement(&p, &config()).unwrap() {
            AgreementOutcome::Agreement(w) => {
                assert!(verify_witness(&p, &w).ok());
                assert_eq!(w.supertree.label_set(), *p.label_universe());
                for t in p.trees() {
                    assert!(w.supertree.agrees_with(t).unwrap());
                }
            }
            _ => panic!("disjoint quartets must agree"),
        }
    }

    #[test]
    fn vertex_limit_is_enforced() {
        let p = samples::compatible_pair();
        let tight = SolverConfig { vertex_limit: 8 };
        assert!(matches!(
            decide_compatibility(&p, &tight),
            Err(SolveError::LimitExceeded {
                vertices: 14,
                limit: 8
            })
        ));
        // a component below the limit still solves
        let ok = SolverConfig { vertex_limit: 14 };
        assert!(decide_compatibility(&p, &ok).is_ok());
    }

    #[test]
    fn verify_rejects_tampered_witnesses() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        let family = vec![
            named_cut(&g, &["1-2", "5-6"]),
            named_cut(&g, &["2-3", "6-7", "5-6"]),
            named_cut(&g, &["4-5", "1-2", "1-c"]),
            named_cut(&g, &["6-7", "2-f"]),
        ];
        let good = assemble_witness(&g, family.clone(), Mode::Compatibility).unwrap();
        assert!(verify_witness(&p, &good).ok());

        // drop the cut serving (tree 0, edge {2,3}): completeness breaks
        let incomplete: Vec<Cut> = family
            .iter()
            .filter(|c| *c != &family[1])
            .cloned()
            .collect();
        let w = assemble_witness(&g, incomplete, Mode::Compatibility).unwrap();
        let v = verify_witness(&p, &w);
        assert!(!v.ok());
        assert!(v.failures().iter().any(|f| f.contains("completeness")));

        // swap in a legal minimal cut that crosses F3: parallelism breaks
        let crossing = named_cut(&g, &["1-2", "1-a", "1-b", "5-c"]);
        assert!(crate::cuts::is_legal_cut(&g, &crossing));
        let mut tampered = family.clone();
        tampered[1] = crossing;
        let w = Witness {
            mode: Mode::Compatibility,
            cuts: tampered,
            splits: good.splits.clone(),
            supertree: good.supertree.clone(),
        };
        let v = verify_witness(&p, &w);
        assert!(!v.ok());
        assert!(v.failures().iter().any(|f| f.contains("parallelism")));

        // agreement-mode bound: F2 and F3 carry two edges of one tree
        let w = assemble_witness(&g, family, Mode::Agreement).unwrap();
        let v = verify_witness(&p, &w);
        assert!(!v.ok());
        assert!(v.failures().iter().any(|f| f.contains("per_tree_bound")));
        assert!(v.failures().iter().any(|f| f.contains("agreement")));
    }

    #[test]
    fn nice_subfamily_from_complete_family() {
        let p = samples::compatible_pair();
        let g = build_display_graph(&p);
        let family = crate::cuts::enumerate_minimal_cuts(&g).unwrap();
        let legal: Vec<Cut> = family
            .into_iter()
            .filter(|c| crate::cuts::is_legal_cut(&g, c))
            .collect();
        let sub = nice_complete_subfamily(&g, &p, &legal).expect("family is complete");
        assert!(sub.iter().all(|c| is_nice_cut(&g, c)));
        // still complete
        for r in requirements_of(&p) {
            let e = display_requirement(&g, &r);
            assert!(sub.iter().any(|c| serves(c, r.tree, e)));
        }
        // and missing requirements are detected
        let starved: Vec<Cut> = legal
            .iter()
            .filter(|c| !serves(c, 0, g.edge_named("2-3").unwrap()))
            .cloned()
            .collect();
        assert!(nice_complete_subfamily(&g, &p, &starved).is_none());
    }

    #[test]
    fn cut_function_of_sample_ast() {
        let p = samples::agreeing_pair();
        let g = build_display_graph(&p);
        let ast = parse_newick("((a,b),f,(c,(d,e)));").unwrap();
        let psi = agreement_cut_function(&ast, &p, &g).unwrap();
        // edge inducing ab|cdef maps to {1-2, 4-5}
        let ab_edge = ast
            .edges()
            .into_iter()
            .find(|&(u, v)| {
                ast.edge_split(u, v)
                    .map(|s| s.first().len() == 2 && s.first().iter().next().unwrap().as_str() == "a" && !s.is_trivial())
                    .unwrap_or(false)
            })
            .unwrap();
        let expected: BTreeSet<usize> = ["1-2", "4-5"]
            .iter()
            .map(|n| g.edge_named(n).unwrap())
            .collect();
        assert_eq!(psi[&ab_edge], expected);
        // the pendant edge at leaf a maps to both pendant tree edges
        let a = ast.vertex_of_label(&"a".into()).unwrap();
        let pendant = (ast.neighbors(a)[0].min(a), ast.neighbors(a)[0].max(a));
        let expected: BTreeSet<usize> = ["1-a", "4-a"]
            .iter()
            .map(|n| g.edge_named(n).unwrap())
            .collect();
        assert_eq!(psi[&pendant], expected);
        // every value is a cut: removing it disconnects the display graph
        let all: BTreeSet<usize> = (0..g.vertex_count()).collect();
        for cut in psi.values() {
            let edges: Vec<usize> = cut.iter().copied().collect();
            assert!(components_within(&g, &all, &edges).len() >= 2);
        }
    }

    #[test]
    fn cut_function_on_single_tree_is_identity() {
        let p = profile(&["((a,b),c,(d,e));"]);
        let g = build_display_graph(&p);
        let ast = p.tree(0).clone();
        let psi = agreement_cut_function(&ast, &p, &g).unwrap();
        for cut in psi.values() {
            assert_eq!(cut.len(), 1);
        }
        assert_eq!(psi.len(), ast.edges().len());
    }

    #[test]
    fn cut_function_rejects_non_ast() {
        let p = samples::agreeing_pair();
        let g = build_display_graph(&p);
        let not_ast = parse_newick("((a,c),b,(f,(d,e)));").unwrap();
        assert!(matches!(
            agreement_cut_function(&not_ast, &p, &g),
            Err(SolveError::NotAgreementSupertree)
        ));
    }

    #[test]
    fn split_edge_requires_non_minimal_cut() {
        let p = samples::agreeing_pair();
        let g = build_display_graph(&p);
        let ast = parse_newick("((a,b),f,(c,(d,e)));").unwrap();
        // all cut values of this supertree are minimal: nothing to split
        for (u, v) in ast.internal_edges() {
            assert!(matches!(
                split_edge_at(&ast, (u, v), u, &p, &g),
                Err(SolveError::CutAlreadyMinimal)
            ));
        }
        let normalized = normalize_agreement_supertree(&ast, &p, &g).unwrap();
        assert!(normalized.is_isomorphic_to(&ast));
    }

    #[test]
    fn split_edge_handles_multi_leaf_fragments() {
        // two quartets hang cherries off a shared pair; the binary
        // supertree's middle edge maps to a two-edge cut whose removal
        // leaves three components, and splitting re-attaches whole cherries
        let p = profile(&["((a,b),(x1,x2));", "((a,b),(y1,y2));"]);
        let g = build_display_graph(&p);
        let over = parse_newick("((a,b),((x1,x2),(y1,y2)));").unwrap();
        for t in p.trees() {
            assert!(over.agrees_with(t).unwrap());
        }
        let (u, m) = over
            .internal_edges()
            .into_iter()
            .find(|&(u, v)| {
                let s = over.edge_split(u, v).unwrap();
                s.first().len() == 2 || s.second().len() == 2
            })
            .expect("middle edge exists");
        // the label-pair side is a single piece: splitting there is refused
        let (anchor, far) = if over
            .edge_split(u, m)
            .unwrap()
            .first()
            .contains(&Label::from("a"))
        {
            (u, m)
        } else {
            (m, u)
        };
        // anchor holds {a, b}; the far side fragments into the two cherries
        let wrong = split_edge_at(&over, (u, m), far, &p, &g);
        assert!(matches!(wrong, Err(SolveError::SingleFragment)));
        let split_tree = split_edge_at(&over, (u, m), anchor, &p, &g).unwrap();
        let expected = parse_newick("(a,b,(x1,x2),(y1,y2));").unwrap();
        assert!(split_tree.is_isomorphic_to(&expected));
        let normalized = normalize_agreement_supertree(&over, &p, &g).unwrap();
        assert!(normalized.is_isomorphic_to(&expected));
    }

    #[test]
    fn split_edge_suppresses_pass_through_vertices() {
        // the {x1, x2} fragment's spanning subtree passes through the vertex
        // holding y1, which must be suppressed when the fragment is copied
        let p = profile(&["((a,b),(x1,x2));", "(a,b,y1);"]);
        let g = build_display_graph(&p);
        let over = parse_newick("((a,b),x1,(y1,x2));").unwrap();
        for t in p.trees() {
            assert!(over.agrees_with(t).unwrap());
        }
        let normalized = normalize_agreement_supertree(&over, &p, &g).unwrap();
        let expected = parse_newick("(a,b,(x1,x2),y1);").unwrap();
        assert!(normalized.is_isomorphic_to(&expected));
        for t in p.trees() {
            assert!(normalized.agrees_with(t).unwrap());
        }
        let psi = agreement_cut_function(&normalized, &p, &g).unwrap();
        let all: BTreeSet<usize> = (0..g.vertex_count()).collect();
        for cut in psi.values() {
            let edges: Vec<usize> = cut.iter().copied().collect();
            assert_eq!(components_within(&g, &all, &edges).len(), 2);
        }
    }

    #[test]
    fn split_edge_resolves_overrefined_ast() {
        // two star inputs constrain nothing, so any quartet is an agreement
        // supertree; its internal edge maps to a cut that is far from
        // minimal and splitting dissolves it back into the star
        let p = profile(&["(a,b,c);", "(b,c,d);"]);
        let g = build_display_graph(&p);
        let over = parse_newick("((a,d),(b,c));").unwrap();
        for t in p.trees() {
            assert!(over.agrees_with(t).unwrap());
        }
        let normalized = normalize_agreement_supertree(&over, &p, &g).unwrap();
        for t in p.trees() {
            assert!(normalized.agrees_with(t).unwrap());
        }
        // every edge of the normalized tree now maps to a minimal cut
        let psi = agreement_cut_function(&normalized, &p, &g).unwrap();
        let all: BTreeSet<usize> = (0..g.vertex_count()).collect();
        for cut in psi.values() {
            let edges: Vec<usize> = cut.iter().copied().collect();
            assert_eq!(components_within(&g, &all, &edges).len(), 2);
        }
        // and the star on the shared labels is the only shape left
        assert!(normalized.splits().len() < over.splits().len());
    }
}
