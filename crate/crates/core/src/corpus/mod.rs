//! Domain types for annotated sentences and the factored token format.

pub mod read;
pub mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use tree::{ConstituencyTree, Production, PtbError};

/// One token of a sentence. The token's index is its position in the
/// sentence's token list; it is not stored separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
}

impl Token {
    pub fn new(surface: &str, lemma: &str, pos: &str) -> Self {
        Token {
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            pos: pos.to_string(),
        }
    }
}

/// A single dependency edge. `head` is `None` for the root edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepEdge {
    pub rel: String,
    pub head: Option<usize>,
    pub dep: usize,
}

impl DepEdge {
    pub fn new(rel: &str, head: Option<usize>, dep: usize) -> Self {
        DepEdge {
            rel: rel.to_string(),
            head,
            dep,
        }
    }
}

/// Dependency edges of one sentence. Each token is a dependent of at most
/// one edge and exactly one edge attaches to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    edges: Vec<DepEdge>,
}

impl DependencyGraph {
    pub fn new(edges: Vec<DepEdge>, token_count: usize) -> Result<Self, InvariantError> {
        let mut seen_dep = vec![false; token_count];
        let mut roots = 0usize;
        for e in &edges {
            if e.rel.is_empty() || e.rel.chars().any(char::is_whitespace) {
                return Err(InvariantError::new(format!(
                    "dependency relation {:?} is empty or contains whitespace",
                    e.rel
                )));
            }
            if e.dep >= token_count {
                return Err(InvariantError::new(format!(
                    "dependent index {} out of range (sentence has {} tokens)",
                    e.dep, token_count
                )));
            }
            if let Some(h) = e.head {
                if h >= token_count {
                    return Err(InvariantError::new(format!(
                        "head index {} out of range (sentence has {} tokens)",
                        h, token_count
                    )));
                }
            } else {
                roots += 1;
            }
            if seen_dep[e.dep] {
                return Err(InvariantError::new(format!(
                    "token {} is the dependent of more than one edge",
                    e.dep
                )));
            }
            seen_dep[e.dep] = true;
        }
        if roots != 1 {
            return Err(InvariantError::new(format!(
                "expected exactly one root edge, found {roots}"
            )));
        }
        Ok(DependencyGraph { edges })
    }

    pub fn edges(&self) -> &[DepEdge] {
        &self.edges
    }

    /// The edge whose dependent is `token`, if any.
    pub fn incoming(&self, token: usize) -> Option<&DepEdge> {
        self.edges.iter().find(|e| e.dep == token)
    }

    /// The root-attached token.
    pub fn root(&self) -> usize {
        self.edges
            .iter()
            .find(|e| e.head.is_none())
            .map(|e| e.dep)
            .expect("validated graph has a root edge")
    }
}

/// A sentence with its tokens, constituency tree and dependency graph.
/// Construction validates all cross-structure invariants; instances are
/// immutable afterwards and safe to share across workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub id: String,
    pub tokens: Vec<Token>,
    pub tree: ConstituencyTree,
    pub deps: DependencyGraph,
}

impl AnnotatedSentence {
    pub fn new(
        id: &str,
        tokens: Vec<Token>,
        tree: ConstituencyTree,
        deps: DependencyGraph,
    ) -> Result<Self, InvariantError> {
        if tokens.is_empty() {
            return Err(InvariantError::new("sentence has no tokens"));
        }
        for (i, t) in tokens.iter().enumerate() {
            for (name, text) in [("surface", &t.surface), ("lemma", &t.lemma), ("pos", &t.pos)] {
                if text.is_empty() {
                    return Err(InvariantError::new(format!("token {i}: empty {name}")));
                }
                if text.chars().any(char::is_whitespace) {
                    return Err(InvariantError::new(format!(
                        "token {i}: {name} {text:?} contains whitespace"
                    )));
                }
            }
        }
        let leaves = tree.leaves();
        if leaves.len() != tokens.len() {
            return Err(InvariantError::new(format!(
                "tree yield length {} != token count {}",
                leaves.len(),
                tokens.len()
            )));
        }
        for (position, (index, surface)) in leaves.iter().enumerate() {
            if *index != position {
                return Err(InvariantError::new(format!(
                    "tree leaf at position {position} carries index {index}; leaves must be in token order"
                )));
            }
            if surface != &tokens[*index].surface {
                return Err(InvariantError::new(format!(
                    "tree leaf {index} surface {:?} != token surface {:?}",
                    surface, tokens[*index].surface
                )));
            }
        }
        for (index, label) in tree.preterminal_labels() {
            if label != tokens[index].pos {
                return Err(InvariantError::new(format!(
                    "leaf {index}: parent label {:?} != token POS {:?}",
                    label, tokens[index].pos
                )));
            }
        }
        Ok(AnnotatedSentence {
            id: id.to_string(),
            tokens,
            tree,
            deps,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Surfaces joined by single spaces, in token order.
    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{reason}")]
pub struct InvariantError {
    pub reason: String,
}

impl InvariantError {
    pub fn new(reason: impl Into<String>) -> Self {
        InvariantError {
            reason: reason.into(),
        }
    }
}

/// A token in the four-factor representation. The morphology factor is an
/// ordered list of atoms (POS tag, dependency relation, folded items).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredToken {
    pub word: String,
    pub lemma: String,
    pub word_class: String,
    pub morphology: Vec<String>,
}

impl FactoredToken {
    /// Parses the serialized `word|lemma|class|atom_atom` form.
    pub fn parse(text: &str) -> Result<Self, InvariantError> {
        let factors = split_unescaped(text, '|');
        if factors.len() != 4 {
            return Err(InvariantError::new(format!(
                "expected 4 factors, found {} in {text:?}",
                factors.len()
            )));
        }
        let morphology: Vec<String> = split_unescaped(&factors[3], '_')
            .iter()
            .map(|a| unescape_factor(a))
            .collect();
        if morphology.iter().any(String::is_empty) {
            return Err(InvariantError::new(format!("empty morphology atom in {text:?}")));
        }
        Ok(FactoredToken {
            word: unescape_factor(&factors[0]),
            lemma: unescape_factor(&factors[1]),
            word_class: unescape_factor(&factors[2]),
            morphology,
        })
    }
}

impl fmt::Display for FactoredToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}|{}|{}",
            escape_factor(&self.word),
            escape_factor(&self.lemma),
            escape_factor(&self.word_class),
            self.morphology
                .iter()
                .map(|a| escape_factor(a))
                .collect::<Vec<_>>()
                .join("_")
        )
    }
}

/// Escapes the characters that are structural in the factored corpus and
/// rule formats: `|`, `_`, `#`, and the escape character itself.
pub fn escape_factor(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '\\' | '|' | '_' | '#') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

pub fn unescape_factor(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Splits on unescaped occurrences of `sep`, keeping escapes in the pieces.
pub fn split_unescaped(text: &str, sep: char) -> Vec<String> {
    let mut pieces = vec![String::new()];
    let mut escaped = false;
    for c in text.chars() {
        if escaped {
            pieces.last_mut().unwrap().push(c);
            escaped = false;
        } else if c == '\\' {
            pieces.last_mut().unwrap().push(c);
            escaped = true;
        } else if c == sep {
            pieces.push(String::new());
        } else {
            pieces.last_mut().unwrap().push(c);
        }
    }
    pieces
}

/// Serializes factored tokens as one corpus line.
pub fn factored_line(tokens: &[FactoredToken]) -> String {
    tokens
        .iter()
        .map(FactoredToken::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_round_trip() {
        let raw = "a|b_c#d\\e";
        let escaped = escape_factor(raw);
        assert_eq!(escaped, "a\\|b\\_c\\#d\\\\e");
        assert_eq!(unescape_factor(&escaped), raw);
    }

    #[test]
    fn factored_token_display_and_parse() {
        let t = FactoredToken {
            word: "home".into(),
            lemma: "home".into(),
            word_class: "N".into(),
            morphology: vec!["NN".into(), "pobj".into(), "to".into()],
        };
        let line = t.to_string();
        assert_eq!(line, "home|home|N|NN_pobj_to");
        assert_eq!(FactoredToken::parse(&line).unwrap(), t);
    }

    #[test]
    fn factored_token_structural_chars_stay_separable() {
        let t = FactoredToken {
            word: "a|b".into(),
            lemma: "c_d".into(),
            word_class: "X".into(),
            morphology: vec!["P#Q".into(), "r_s".into()],
        };
        let line = t.to_string();
        // Exactly three unescaped pipes, regardless of content.
        assert_eq!(split_unescaped(&line, '|').len(), 4);
        assert_eq!(FactoredToken::parse(&line).unwrap(), t);
    }

    #[test]
    fn dependency_graph_rejects_double_heads() {
        let edges = vec![
            DepEdge::new("root", None, 1),
            DepEdge::new("nsubj", Some(1), 0),
            DepEdge::new("dobj", Some(1), 0),
        ];
        assert!(DependencyGraph::new(edges, 2).is_err());
    }

    #[test]
    fn dependency_graph_requires_single_root() {
        let edges = vec![DepEdge::new("nsubj", Some(1), 0)];
        assert!(DependencyGraph::new(edges, 2).is_err());
        let edges = vec![DepEdge::new("root", None, 0), DepEdge::new("root", None, 1)];
        assert!(DependencyGraph::new(edges, 2).is_err());
    }

    #[test]
    fn sentence_rejects_yield_mismatch() {
        let tree = ConstituencyTree::parse_ptb("(NP (NN home))").unwrap();
        let tokens = vec![Token::new("home", "home", "NN"), Token::new("x", "x", "NN")];
        let deps = DependencyGraph::new(vec![DepEdge::new("root", None, 0)], 2).unwrap();
        let err = AnnotatedSentence::new("s", tokens, tree, deps).unwrap_err();
        assert!(err.reason.contains("yield length"));
    }

    #[test]
    fn sentence_rejects_pos_mismatch() {
        let tree = ConstituencyTree::parse_ptb("(NP (NN home))").unwrap();
        let tokens = vec![Token::new("home", "home", "VB")];
        let deps = DependencyGraph::new(vec![DepEdge::new("root", None, 0)], 1).unwrap();
        assert!(AnnotatedSentence::new("s", tokens, tree, deps).is_err());
    }
}
