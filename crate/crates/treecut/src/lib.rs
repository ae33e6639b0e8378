//! Compatibility and agreement of unrooted phylogenetic trees, decided
//! through minimal cuts of the display graph.
//!
//! A profile of input trees is *compatible* when one supertree displays all
//! of them, and has an *agreement supertree* when one supertree restricts to
//! each input tree exactly. Both questions reduce to finding a complete set
//! of pairwise parallel legal minimal cuts of the display graph, the union
//! of the input trees with shared leaf labels identified; agreement
//! additionally bounds every cut to at most one edge per input tree. The
//! splits induced by a witness family synthesize the supertree directly.
//!
//! Modules:
//! - [`tree`]: trees, splits, restriction, display/agreement relations
//! - [`newick`]: Newick reading and deterministic writing
//! - [`display_graph`]: the union graph and its components
//! - [`elig`]: the edge label intersection graph (line graph) and minimal
//!   separators
//! - [`cuts`]: minimal cut enumeration and the legal/nice/parallel
//!   predicates
//! - [`solver`]: decision procedures, witnesses, verification, and the
//!   agreement cut function
//! - [`oracle`]: exhaustive tree catalogs for ground-truth comparison
//! - [`dot`]: DOT rendering
//! - [`generate`]: random instances for property tests
//! - [`samples`]: built-in example profiles

pub mod cuts;
pub mod display_graph;
pub mod dot;
pub mod elig;
pub mod generate;
pub mod newick;
pub mod oracle;
pub mod samples;
pub mod solver;
pub mod tree;

pub use display_graph::{build_display_graph, connected_components, DisplayGraph};
pub use newick::{parse_newick, to_newick, NewickError};
pub use solver::{
    decide_agreement, decide_compatibility, verify_witness, AgreementOutcome,
    CompatibilityOutcome, Mode, SolverConfig, Witness,
};
pub use tree::{Label, PhyloTree, Profile, Split, TreeError};
