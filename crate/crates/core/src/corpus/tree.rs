//! Constituency trees and the bracketed text format.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An ordered labeled parse tree. Phrase and POS nodes are `Node`s; every
/// POS node (preterminal) holds exactly one `Leaf` carrying the covered
/// token's index and surface form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstituencyTree {
    Node {
        label: String,
        children: Vec<ConstituencyTree>,
    },
    Leaf {
        index: usize,
        surface: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PtbError {
    #[error("unbalanced brackets near offset {0}")]
    UnbalancedBrackets(usize),
    #[error("empty node near offset {0}")]
    EmptyNode(usize),
    #[error("leaf under non-POS node near offset {0}")]
    LeafUnderNonPosNode(usize),
}

/// One internal node's production: its label and the labels of its
/// children, plus the child-index path from the root (the node handle).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub parent: String,
    pub children: Vec<String>,
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Open(usize),
    Close(usize),
    Atom(usize, &'a str),
}

fn tokenize(text: &str) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                toks.push(Tok::Atom(s, &text[s..i]));
            }
            if c == '(' {
                toks.push(Tok::Open(i));
            } else if c == ')' {
                toks.push(Tok::Close(i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        toks.push(Tok::Atom(s, &text[s..]));
    }
    toks
}

impl ConstituencyTree {
    /// Parses a single bracketed tree such as `(NP (DT the) (NN dog))`.
    /// Leaf token indices are assigned left to right starting at 0.
    pub fn parse_ptb(text: &str) -> Result<Self, PtbError> {
        let toks = tokenize(text);
        let mut pos = 0usize;
        let mut next_index = 0usize;
        let tree = parse_node(&toks, &mut pos, &mut next_index, text.len())?;
        if pos != toks.len() {
            let off = match toks[pos] {
                Tok::Open(o) | Tok::Close(o) | Tok::Atom(o, _) => o,
            };
            return Err(PtbError::UnbalancedBrackets(off));
        }
        Ok(tree)
    }

    /// Serializes back to bracketed text. `parse_ptb` of the result yields
    /// an equal tree whenever leaf indices are in left-to-right order.
    pub fn to_bracketed(&self) -> String {
        match self {
            ConstituencyTree::Leaf { surface, .. } => surface.clone(),
            ConstituencyTree::Node { label, children } => {
                let inner: Vec<String> = children.iter().map(|c| c.to_bracketed()).collect();
                format!("({} {})", label, inner.join(" "))
            }
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            ConstituencyTree::Node { label, .. } => Some(label),
            ConstituencyTree::Leaf { .. } => None,
        }
    }

    /// True for a node whose children are all token leaves.
    pub fn is_preterminal(&self) -> bool {
        match self {
            ConstituencyTree::Node { children, .. } => {
                children.iter().all(|c| matches!(c, ConstituencyTree::Leaf { .. }))
            }
            ConstituencyTree::Leaf { .. } => false,
        }
    }

    /// Token leaves in left-to-right order as (index, surface) pairs.
    pub fn leaves(&self) -> Vec<(usize, &str)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(usize, &'a str)>) {
        match self {
            ConstituencyTree::Leaf { index, surface } => out.push((*index, surface)),
            ConstituencyTree::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// Leaf token indices in left-to-right order.
    pub fn yield_indices(&self) -> Vec<usize> {
        self.leaves().iter().map(|(i, _)| *i).collect()
    }

    /// (token index, preterminal label) for every leaf.
    pub fn preterminal_labels(&self) -> Vec<(usize, &str)> {
        let mut out = Vec::new();
        self.collect_preterminals(&mut out);
        out
    }

    fn collect_preterminals<'a>(&'a self, out: &mut Vec<(usize, &'a str)>) {
        if let ConstituencyTree::Node { label, children } = self {
            for c in children {
                match c {
                    ConstituencyTree::Leaf { index, .. } => out.push((*index, label)),
                    node => node.collect_preterminals(out),
                }
            }
        }
    }

    /// Pre-order enumeration of the productions of all internal nodes.
    /// Preterminals contribute their label as a child symbol but have no
    /// production of their own, and a unary projection over a single POS
    /// node (there is nothing to reorder below it) is reported only when
    /// it is the root.
    pub fn productions(&self) -> Vec<Production> {
        let mut out = Vec::new();
        self.collect_productions(&mut Vec::new(), &mut out);
        out
    }

    fn collect_productions(&self, path: &mut Vec<usize>, out: &mut Vec<Production>) {
        if let ConstituencyTree::Node { label, children } = self {
            if self.is_preterminal() {
                return;
            }
            let trivial_unary = children.len() == 1 && children[0].is_preterminal();
            let child_labels: Vec<String> = children
                .iter()
                .map(|c| match c {
                    ConstituencyTree::Node { label, .. } => label.clone(),
                    ConstituencyTree::Leaf { surface, .. } => surface.clone(),
                })
                .collect();
            if !trivial_unary || path.is_empty() {
                out.push(Production {
                    parent: label.clone(),
                    children: child_labels,
                    path: path.clone(),
                });
            }
            for (i, c) in children.iter().enumerate() {
                path.push(i);
                c.collect_productions(path, out);
                path.pop();
            }
        }
    }

    /// The node addressed by a child-index path from the root.
    pub fn node_at(&self, path: &[usize]) -> Option<&ConstituencyTree> {
        let mut node = self;
        for &i in path {
            match node {
                ConstituencyTree::Node { children, .. } => node = children.get(i)?,
                ConstituencyTree::Leaf { .. } => return None,
            }
        }
        Some(node)
    }
}

fn parse_node(
    toks: &[Tok<'_>],
    pos: &mut usize,
    next_index: &mut usize,
    end: usize,
) -> Result<ConstituencyTree, PtbError> {
    match toks.get(*pos) {
        Some(Tok::Open(_)) => *pos += 1,
        Some(Tok::Close(o)) | Some(Tok::Atom(o, _)) => {
            return Err(PtbError::UnbalancedBrackets(*o))
        }
        None => return Err(PtbError::UnbalancedBrackets(end)),
    }
    let (label_off, label) = match toks.get(*pos) {
        Some(Tok::Atom(o, a)) => {
            *pos += 1;
            (*o, a.to_string())
        }
        Some(Tok::Open(o)) | Some(Tok::Close(o)) => return Err(PtbError::EmptyNode(*o)),
        None => return Err(PtbError::UnbalancedBrackets(end)),
    };
    let mut node_children: Vec<ConstituencyTree> = Vec::new();
    let mut words: Vec<(usize, &str)> = Vec::new();
    loop {
        match toks.get(*pos) {
            Some(Tok::Open(_)) => {
                node_children.push(parse_node(toks, pos, next_index, end)?);
            }
            Some(Tok::Atom(o, a)) => {
                words.push((*o, a));
                *pos += 1;
            }
            Some(Tok::Close(_)) => {
                *pos += 1;
                break;
            }
            None => return Err(PtbError::UnbalancedBrackets(end)),
        }
    }
    if node_children.is_empty() && words.is_empty() {
        return Err(PtbError::EmptyNode(label_off));
    }
    if !words.is_empty() {
        if !node_children.is_empty() || words.len() > 1 {
            return Err(PtbError::LeafUnderNonPosNode(words[0].0));
        }
        let leaf = ConstituencyTree::Leaf {
            index: *next_index,
            surface: words[0].1.to_string(),
        };
        *next_index += 1;
        return Ok(ConstituencyTree::Node {
            label,
            children: vec![leaf],
        });
    }
    Ok(ConstituencyTree::Node {
        label,
        children: node_children,
    })
}
