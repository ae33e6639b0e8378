//! Newick reading and writing.
//!
//! The reader accepts standard Newick with branch lengths, internal node
//! names, quoted labels and square-bracket comments. Branch lengths and
//! internal names are parsed and discarded: the library works with abstract
//! unrooted topologies. A rooted expression (root of degree two, or chains of
//! unary groups) is silently unrooted by suppressing the redundant vertices.
//!
//! The writer is deterministic: the tree is rooted at the internal vertex
//! next to the least leaf label and children are ordered by the least label
//! in their subtree, so equal trees always serialize identically.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::tree::{Label, PhyloTree, TreeError};

#[derive(Debug, Error)]
pub enum NewickError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("duplicate leaf label '{label}'")]
    DuplicateLeaf { label: String },
    #[error("empty input")]
    Empty,
    #[error("invalid tree structure: {0}")]
    Structure(#[from] TreeError),
}

fn syntax(pos: usize, msg: impl Into<String>) -> NewickError {
    NewickError::Syntax {
        pos,
        msg: msg.into(),
    }
}

struct RawNode {
    name: Option<String>,
    children: Vec<usize>,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    nodes: Vec<RawNode>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
            nodes: Vec::new(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skip whitespace and `[...]` comments.
    fn skip_trivia(&mut self) -> Result<(), NewickError> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    let start = self.pos;
                    while let Some(b) = self.peek() {
                        self.pos += 1;
                        if b == b']' {
                            break;
                        }
                    }
                    if self.bytes.get(self.pos - 1) != Some(&b']') {
                        return Err(syntax(start, "unterminated comment"));
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn is_name_byte(b: u8) -> bool {
        b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'|' | b'-')
    }

    fn parse_name(&mut self) -> Result<Option<String>, NewickError> {
        self.skip_trivia()?;
        match self.peek() {
            Some(b'\'') => {
                let start = self.pos;
                self.pos += 1;
                let mut bytes = Vec::new();
                loop {
                    match self.peek() {
                        Some(b'\'') => {
                            self.pos += 1;
                            if self.peek() == Some(b'\'') {
                                bytes.push(b'\'');
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                        Some(b) => {
                            bytes.push(b);
                            self.pos += 1;
                        }
                        None => return Err(syntax(start, "unterminated quoted label")),
                    }
                }
                // quote delimiters are ascii, so the collected bytes stay on
                // character boundaries of the utf-8 input
                Ok(Some(
                    String::from_utf8(bytes).map_err(|_| syntax(start, "invalid utf-8"))?,
                ))
            }
            Some(b) if Self::is_name_byte(b) => {
                let start = self.pos;
                while let Some(b) = self.peek() {
                    if Self::is_name_byte(b) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                Ok(Some(
                    std::str::from_utf8(&self.bytes[start..self.pos])
                        .expect("name bytes are ascii")
                        .to_owned(),
                ))
            }
            _ => Ok(None),
        }
    }

    fn parse_branch_length(&mut self) -> Result<(), NewickError> {
        self.skip_trivia()?;
        if self.peek() != Some(b':') {
            return Ok(());
        }
        self.pos += 1;
        self.skip_trivia()?;
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_digit() || matches!(b, b'.' | b'+' | b'-' | b'e' | b'E') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        if text.parse::<f64>().is_err() {
            return Err(syntax(start, "invalid branch length"));
        }
        Ok(())
    }

    fn parse_subtree(&mut self) -> Result<usize, NewickError> {
        self.skip_trivia()?;
        if self.peek() == Some(b'(') {
            let open = self.pos;
            self.pos += 1;
            // allocate before the children so internal ids follow preorder
            let id = self.nodes.len();
            self.nodes.push(RawNode {
                name: None,
                children: Vec::new(),
            });
            loop {
                let child = self.parse_subtree()?;
                self.nodes[id].children.push(child);
                self.skip_trivia()?;
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(syntax(self.pos, "expected ',' or ')'")),
                }
            }
            if self.nodes[id].children.is_empty() {
                return Err(syntax(open, "empty group"));
            }
            // internal node name, if present, is discarded
            self.parse_name()?;
            self.parse_branch_length()?;
            Ok(id)
        } else {
            let start = self.pos;
            let name = self
                .parse_name()?
                .ok_or_else(|| syntax(start, "expected label or '('"))?;
            if name.is_empty() {
                return Err(syntax(start, "empty label"));
            }
            self.parse_branch_length()?;
            let id = self.nodes.len();
            self.nodes.push(RawNode {
                name: Some(name),
                children: Vec::new(),
            });
            Ok(id)
        }
    }
}

/// Parse a single Newick expression terminated by `;`.
pub fn parse_newick(text: &str) -> Result<PhyloTree, NewickError> {
    let mut parser = Parser::new(text);
    parser.skip_trivia()?;
    if parser.peek().is_none() {
        return Err(NewickError::Empty);
    }
    let root = parser.parse_subtree()?;
    parser.skip_trivia()?;
    if parser.peek() != Some(b';') {
        return Err(syntax(parser.pos, "expected ';'"));
    }
    parser.pos += 1;
    parser.skip_trivia()?;
    if parser.peek().is_some() {
        return Err(syntax(parser.pos, "unexpected text after ';'"));
    }
    let _ = root;

    // undirected adjacency over the raw nodes
    let n = parser.nodes.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (id, node) in parser.nodes.iter().enumerate() {
        for &c in &node.children {
            adj[id].insert(c);
            adj[c].insert(id);
        }
    }
    let labeled: Vec<Option<String>> = parser
        .nodes
        .iter()
        .map(|nd| {
            if nd.children.is_empty() {
                nd.name.clone()
            } else {
                None
            }
        })
        .collect();

    // unroot: drop or splice redundant unlabeled vertices (degree <= 2)
    let mut alive = vec![true; n];
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if !alive[v] || labeled[v].is_some() {
                continue;
            }
            match adj[v].len() {
                0 | 1 => {
                    let neighbors: Vec<usize> = adj[v].iter().copied().collect();
                    for w in neighbors {
                        adj[w].remove(&v);
                    }
                    adj[v].clear();
                    alive[v] = false;
                    changed = true;
                }
                2 => {
                    let mut it = adj[v].iter();
                    let x = *it.next().unwrap();
                    let y = *it.next().unwrap();
                    adj[x].remove(&v);
                    adj[y].remove(&v);
                    adj[x].insert(y);
                    adj[y].insert(x);
                    adj[v].clear();
                    alive[v] = false;
                    changed = true;
                }
                _ => {}
            }
        }
    }

    let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    if kept.is_empty() {
        return Err(NewickError::Empty);
    }
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
    let mut leaf_labels = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for &old in &kept {
        if let Some(name) = &labeled[old] {
            if !seen.insert(name.clone()) {
                return Err(NewickError::DuplicateLeaf {
                    label: name.clone(),
                });
            }
            leaf_labels.insert(remap[&old], Label::from(name.clone()));
        }
    }
    Ok(PhyloTree::new(kept.len(), &edges, &leaf_labels)?)
}

fn needs_quoting(name: &str) -> bool {
    name.is_empty()
        || !name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'|' | b'-'))
}

fn write_label(label: &Label) -> String {
    let name = label.as_str();
    if needs_quoting(name) {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_owned()
    }
}

/// Serialize a tree to Newick. Deterministic for a given topology.
pub fn to_newick(tree: &PhyloTree) -> String {
    if tree.vertex_count() == 1 {
        let label = tree.label_of(0).expect("single vertex is a leaf");
        return format!("{};", write_label(label));
    }
    if tree.vertex_count() == 2 {
        let mut names: Vec<&Label> = (0..2).map(|v| tree.label_of(v).unwrap()).collect();
        names.sort();
        return format!("({},{});", write_label(names[0]), write_label(names[1]));
    }
    // root at the internal vertex next to the least leaf
    let least_leaf = tree
        .vertex_of_label(tree.labels().min().expect("tree has leaves"))
        .unwrap();
    let root = tree.neighbors(least_leaf)[0];
    let (_, body) = render(tree, root, None);
    format!("{};", body)
}

/// Returns `(least label in subtree, rendered text)`.
fn render(tree: &PhyloTree, v: usize, parent: Option<usize>) -> (Label, String) {
    if let Some(label) = tree.label_of(v) {
        return (label.clone(), write_label(label));
    }
    let mut parts: Vec<(Label, String)> = tree
        .neighbors(v)
        .iter()
        .filter(|&&w| Some(w) != parent)
        .map(|&w| render(tree, w, Some(v)))
        .collect();
    parts.sort();
    let text = format!(
        "({})",
        parts
            .iter()
            .map(|(_, t)| t.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    (parts.into_iter().next().unwrap().0, text)
}
