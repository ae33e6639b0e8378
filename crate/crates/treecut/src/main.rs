//! Command-line front end: decide compatibility and agreement of Newick
//! profiles, emit witnesses, supertrees and DOT renderings.
//!
//! Exit codes for `compat` and `agree`: 0 = YES, 1 = NO, 2 = error,
//! 3 = resource limit exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use treecut::cuts::CutError;
use treecut::display_graph::build_display_graph;
use treecut::elig::build_elig;
use treecut::newick::{parse_newick, to_newick, NewickError};
use treecut::oracle::{self, OracleError};
use treecut::solver::{
    self, AgreementOutcome, CompatibilityOutcome, Mode, SolveError, SolverConfig, Witness,
};
use treecut::tree::{PhyloTree, Profile, TreeError};
use treecut::{dot, samples};

#[derive(Parser)]
#[command(
    name = "treecut",
    about = "Decide compatibility and agreement of unrooted phylogenetic trees via display-graph cuts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a supertree displays every input tree (prints YES/NO)
    Compat(DecideArgs),
    /// Decide whether an agreement supertree exists (prints YES/NO)
    Agree(DecideArgs),
    /// Construct a supertree and print it as Newick
    Supertree(SupertreeArgs),
    /// Render the display graph (and optionally its line graph) as DOT
    Dot(DotArgs),
    /// Run the built-in example checks
    Selftest,
}

#[derive(Args)]
struct DecideArgs {
    /// Newick input files; a file may hold several ';'-terminated trees
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Largest display-graph component the solver will enumerate
    #[arg(long, env = "TREECUT_LIMIT", default_value_t = solver::DEFAULT_VERTEX_LIMIT as u64,
          value_parser = clap::value_parser!(u64).range(4..))]
    limit: u64,
    /// Decide by exhaustive supertree search instead of cuts
    #[arg(long)]
    oracle: bool,
    /// Write the witness (cuts, splits, supertree) as JSON on a YES answer
    #[arg(long, conflicts_with = "oracle")]
    witness: Option<PathBuf>,
    /// Print the decision as JSON instead of YES/NO
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SupertreeArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Require an agreement supertree instead of a compatible one
    #[arg(long)]
    agree: bool,
    #[arg(long, env = "TREECUT_LIMIT", default_value_t = solver::DEFAULT_VERTEX_LIMIT as u64,
          value_parser = clap::value_parser!(u64).range(4..))]
    limit: u64,
    /// Search the exhaustive catalog instead of cuts
    #[arg(long)]
    oracle: bool,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DotArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Also render the edge label intersection graph
    #[arg(long)]
    elig: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{file}:{line}: {source}")]
    Parse {
        file: String,
        line: usize,
        source: NewickError,
    },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Solve(SolveError::LimitExceeded { .. })
            | CliError::Solve(SolveError::Cut(CutError::TooLarge(_)))
            | CliError::Oracle(OracleError::TooManyLabels(_)) => 3,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compat(args) => decide(args, Mode::Compatibility),
        Command::Agree(args) => decide(args, Mode::Agreement),
        Command::Supertree(args) => supertree(args),
        Command::Dot(args) => render_dot(args),
        Command::Selftest => Ok(selftest()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_profile(paths: &[PathBuf]) -> Result<Profile, CliError> {
    let mut trees = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        trees.extend(read_trees(&text, path)?);
    }
    Ok(Profile::new(trees)?)
}

/// Split file contents on ';' terminators; each non-blank chunk is one tree.
fn read_trees(text: &str, path: &Path) -> Result<Vec<PhyloTree>, CliError> {
    let file = path.display().to_string();
    let chunks: Vec<&str> = text.split(';').collect();
    let mut trees = Vec::new();
    let mut line = 1usize;
    for (i, chunk) in chunks.iter().enumerate() {
        let leading_newlines = chunk
            .chars()
            .take_while(|c| c.is_whitespace())
            .filter(|&c| c == '\n')
            .count();
        let chunk_line = line + leading_newlines;
        let last = i + 1 == chunks.len();
        if chunk.trim().is_empty() {
            line += chunk.matches('\n').count();
            continue;
        }
        if last {
            return Err(CliError::Parse {
                file,
                line: chunk_line,
                source: NewickError::Syntax {
                    pos: chunk.len(),
                    msg: "missing ';'".into(),
                },
            });
        }
        let tree = parse_newick(&format!("{chunk};")).map_err(|source| CliError::Parse {
            file: file.clone(),
            line: chunk_line,
            source,
        })?;
        trees.push(tree);
        line += chunk.matches('\n').count();
    }
    Ok(trees)
}

#[derive(Serialize)]
struct DecisionDoc {
    schema: u32,
    mode: &'static str,
    answer: &'static str,
}

#[derive(Serialize)]
struct WitnessDoc {
    schema: u32,
    mode: &'static str,
    cuts: Vec<Vec<String>>,
    splits: Vec<[Vec<String>; 2]>,
    supertree: String,
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Compatibility => "compatibility",
        Mode::Agreement => "agreement",
    }
}

fn witness_doc(profile: &Profile, witness: &Witness) -> WitnessDoc {
    let g = build_display_graph(profile);
    let side = |labels: &std::collections::BTreeSet<treecut::Label>| -> Vec<String> {
        labels.iter().map(|l| l.as_str().to_owned()).collect()
    };
    WitnessDoc {
        schema: 1,
        mode: mode_name(witness.mode),
        cuts: witness
            .cuts
            .iter()
            .map(|c| c.edges().iter().map(|&e| g.edge_name(e)).collect())
            .collect(),
        splits: witness
            .splits
            .iter()
            .map(|s| [side(s.first()), side(s.second())])
            .collect(),
        supertree: to_newick(&witness.supertree),
    }
}

fn write_witness(path: &Path, profile: &Profile, witness: &Witness) -> Result<(), CliError> {
    let doc = witness_doc(profile, witness);
    let json = serde_json::to_string_pretty(&doc).expect("witness serializes");
    fs::write(path, json + "\n").map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn decide(args: DecideArgs, mode: Mode) -> Result<u8, CliError> {
    let profile = read_profile(&args.inputs)?;
    if args.oracle {
        // the oracle produces a tree, not a cut family; only the decision
        // is reported
        let found = match mode {
            Mode::Compatibility => oracle::oracle_compatible(&profile)?,
            Mode::Agreement => oracle::oracle_agreement(&profile)?,
        };
        return finish_decision(args, mode, &profile, found.is_some(), None);
    }
    let config = SolverConfig {
        vertex_limit: args.limit as usize,
    };
    let witness: Option<Witness> = match mode {
        Mode::Compatibility => match solver::decide_compatibility(&profile, &config)? {
            CompatibilityOutcome::Compatible(w) => Some(w),
            CompatibilityOutcome::Incompatible => None,
        },
        Mode::Agreement => match solver::decide_agreement(&profile, &config)? {
            AgreementOutcome::Agreement(w) => Some(w),
            AgreementOutcome::NoAst => None,
        },
    };
    let yes = witness.is_some();
    finish_decision(args, mode, &profile, yes, witness)
}

fn finish_decision(
    args: DecideArgs,
    mode: Mode,
    profile: &Profile,
    yes: bool,
    witness: Option<Witness>,
) -> Result<u8, CliError> {
    if let (Some(path), Some(w)) = (&args.witness, &witness) {
        write_witness(path, profile, w)?;
    }
    if args.json {
        let doc = DecisionDoc {
            schema: 1,
            mode: mode_name(mode),
            answer: if yes { "YES" } else { "NO" },
        };
        println!("{}", serde_json::to_string(&doc).expect("serializes"));
    } else {
        println!("{}", if yes { "YES" } else { "NO" });
    }
    Ok(u8::from(!yes))
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn supertree(args: SupertreeArgs) -> Result<u8, CliError> {
    let profile = read_profile(&args.inputs)?;
    let config = SolverConfig {
        vertex_limit: args.limit as usize,
    };
    let found: Option<PhyloTree> = if args.oracle {
        if args.agree {
            oracle::oracle_agreement(&profile)?
        } else {
            oracle::oracle_compatible(&profile)?
        }
    } else if args.agree {
        match solver::decide_agreement(&profile, &config)? {
            AgreementOutcome::Agreement(w) => Some(w.supertree),
            AgreementOutcome::NoAst => None,
        }
    } else {
        match solver::decide_compatibility(&profile, &config)? {
            CompatibilityOutcome::Compatible(w) => Some(w.supertree),
            CompatibilityOutcome::Incompatible => None,
        }
    };
    match found {
        Some(tree) => {
            emit(args.output.as_ref(), &format!("{}\n", to_newick(&tree)))?;
            Ok(0)
        }
        None => {
            eprintln!(
                "no {} supertree exists for this profile",
                if args.agree { "agreement" } else { "compatible" }
            );
            Ok(1)
        }
    }
}

fn render_dot(args: DotArgs) -> Result<u8, CliError> {
    let profile = read_profile(&args.inputs)?;
    let g = build_display_graph(&profile);
    let mut text = dot::display_graph_dot(&g);
    if args.elig {
        text.push_str(&dot::elig_dot(&g, &build_elig(&g)));
    }
    emit(args.output.as_ref(), &text)?;
    Ok(0)
}

struct Harness {
    failed: usize,
}

impl Harness {
    fn check(&mut self, name: &str, ok: bool) {
        println!("{} - {}", if ok { "ok  " } else { "FAIL" }, name);
        if !ok {
            self.failed += 1;
        }
    }
}

/// Built-in example checks over the two sample profiles.
fn selftest() -> u8 {
    let mut h = Harness { failed: 0 };
    let config = SolverConfig::default();

    let compat_only = samples::compatible_pair();
    let g = build_display_graph(&compat_only);
    h.check(
        "display graph of the seven-taxon pair has 14 vertices and 18 edges",
        g.vertex_count() == 14 && g.edge_count() == 18,
    );

    let family: Option<Vec<_>> = [
        vec!["1-2", "5-6"],
        vec!["2-3", "6-7", "5-6"],
        vec!["4-5", "1-2", "1-c"],
        vec!["6-7", "2-f"],
    ]
    .iter()
    .map(|names| {
        let edges: Option<Vec<usize>> = names.iter().map(|n| g.edge_named(n)).collect();
        edges.and_then(|e| treecut::cuts::Cut::from_edges(&g, &e).ok())
    })
    .collect();
    match family {
        Some(cuts) => {
            let nice = cuts.iter().all(|c| treecut::cuts::is_nice_cut(&g, c));
            h.check("known four-cut family is nice and minimal", nice);
            let witness =
                solver::assemble_witness(&g, cuts, Mode::Compatibility).ok();
            let verified = witness
                .as_ref()
                .map(|w| solver::verify_witness(&compat_only, w).ok())
                .unwrap_or(false);
            h.check(
                "four-cut family verifies as a compatibility witness",
                verified,
            );
        }
        None => {
            h.check("known four-cut family is nice and minimal", false);
            h.check("four-cut family verifies as a compatibility witness", false);
        }
    }

    let compat = solver::decide_compatibility(&compat_only, &config);
    h.check(
        "seven-taxon pair is compatible",
        matches!(compat, Ok(CompatibilityOutcome::Compatible(_))),
    );
    let agree = solver::decide_agreement(&compat_only, &config);
    h.check(
        "seven-taxon pair has no agreement supertree",
        matches!(agree, Ok(AgreementOutcome::NoAst)),
    );

    let agreeing = samples::agreeing_pair();
    match solver::decide_agreement(&agreeing, &config) {
        Ok(AgreementOutcome::Agreement(w)) => {
            h.check("six-taxon pair has an agreement supertree", true);
            h.check(
                "agreement witness verifies",
                solver::verify_witness(&agreeing, &w).ok(),
            );
            let g2 = build_display_graph(&agreeing);
            let names: Vec<Vec<String>> = w
                .cuts
                .iter()
                .map(|c| c.edges().iter().map(|&e| g2.edge_name(e)).collect())
                .collect();
            h.check(
                "agreement witness contains the cut {1-2, 4-5}",
                names.contains(&vec!["1-2".to_owned(), "4-5".to_owned()]),
            );
            let both = agreeing
                .trees()
                .iter()
                .all(|t| w.supertree.agrees_with(t).unwrap_or(false));
            h.check("agreement supertree agrees with both inputs", both);
        }
        _ => {
            for name in [
                "six-taxon pair has an agreement supertree",
                "agreement witness verifies",
                "agreement witness contains the cut {1-2, 4-5}",
                "agreement supertree agrees with both inputs",
            ] {
                h.check(name, false);
            }
        }
    }

    let oracle_checks = (|| -> Result<bool, OracleError> {
        let a = oracle::oracle_compatible(&compat_only)?.is_some();
        let b = oracle::oracle_agreement(&compat_only)?.is_none();
        let c = oracle::oracle_agreement(&agreeing)?.is_some();
        Ok(a && b && c)
    })();
    h.check(
        "exhaustive oracle confirms both sample decisions",
        oracle_checks.unwrap_or(false),
    );

    let round_trip = samples::COMPATIBLE_PAIR
        .iter()
        .chain(samples::AGREEING_PAIR.iter())
        .all(|s| {
            let t = parse_newick(s).expect("sample parses");
            parse_newick(&to_newick(&t))
                .map(|back| back.is_isomorphic_to(&t))
                .unwrap_or(false)
        });
    h.check("sample trees round-trip through Newick", round_trip);

    if h.failed == 0 {
        println!("all checks passed");
        0
    } else {
        println!("{} check(s) failed", h.failed);
        1
    }
}
