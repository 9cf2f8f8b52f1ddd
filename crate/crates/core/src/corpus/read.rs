//! Readers and writers for the external annotation formats.
//!
//! Two ingestion formats are supported:
//!
//! * JSONL (canonical): one object per line,
//!   `{"id", "tokens": [{"surface","lemma","pos"}...], "parse": "<bracketed tree>",
//!   "deps": [{"rel","head","dep"}...]}` with 0-based indices and `head: -1`
//!   for the root edge.
//! * ptb+conll: two parallel files, one bracketed tree per line plus
//!   CoNLL-style 10-column blocks separated by blank lines (columns used:
//!   ID, FORM, LEMMA, POSTAG, HEAD, DEPREL; 1-based IDs, HEAD 0 = root).

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tree::ConstituencyTree;
use super::{AnnotatedSentence, DepEdge, DependencyGraph, Token};

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("sentence {id}: {reason}")]
    Invariant { id: String, reason: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonToken {
    surface: String,
    lemma: String,
    pos: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonDep {
    rel: String,
    head: i64,
    dep: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonSentence {
    id: String,
    tokens: Vec<JsonToken>,
    parse: String,
    deps: Vec<JsonDep>,
}

/// Streams sentences out of a JSONL reader in input order.
pub struct JsonlReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> JsonlReader<R> {
    pub fn new(reader: R) -> Self {
        JsonlReader {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl<R: BufRead> Iterator for JsonlReader<R> {
    type Item = Result<AnnotatedSentence, ReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(ReadError::Io(e))),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(parse_jsonl_line(&line, self.line_no));
        }
    }
}

fn parse_jsonl_line(line: &str, line_no: usize) -> Result<AnnotatedSentence, ReadError> {
    let record: JsonSentence = serde_json::from_str(line).map_err(|e| ReadError::Format {
        line: line_no,
        reason: e.to_string(),
    })?;
    build_sentence(record, line_no)
}

fn build_sentence(record: JsonSentence, line_no: usize) -> Result<AnnotatedSentence, ReadError> {
    let id = record.id;
    let tokens: Vec<Token> = record
        .tokens
        .iter()
        .map(|t| Token::new(&t.surface, &t.lemma, &t.pos))
        .collect();
    let tree = ConstituencyTree::parse_ptb(&record.parse).map_err(|e| ReadError::Format {
        line: line_no,
        reason: format!("parse field: {e}"),
    })?;
    let mut edges = Vec::with_capacity(record.deps.len());
    for d in &record.deps {
        let head = if d.head < 0 {
            None
        } else {
            Some(d.head as usize)
        };
        edges.push(DepEdge::new(&d.rel, head, d.dep));
    }
    let deps = DependencyGraph::new(edges, tokens.len()).map_err(|e| ReadError::Invariant {
        id: id.clone(),
        reason: e.reason,
    })?;
    AnnotatedSentence::new(&id, tokens, tree, deps).map_err(|e| ReadError::Invariant {
        id,
        reason: e.reason,
    })
}

/// Serializes a sentence back to one JSONL line in the canonical schema.
pub fn to_jsonl(sentence: &AnnotatedSentence) -> String {
    let record = JsonSentence {
        id: sentence.id.clone(),
        tokens: sentence
            .tokens
            .iter()
            .map(|t| JsonToken {
                surface: t.surface.clone(),
                lemma: t.lemma.clone(),
                pos: t.pos.clone(),
            })
            .collect(),
        parse: sentence.tree.to_bracketed(),
        deps: sentence
            .deps
            .edges()
            .iter()
            .map(|e| JsonDep {
                rel: e.rel.clone(),
                head: e.head.map_or(-1, |h| h as i64),
                dep: e.dep,
            })
            .collect(),
    };
    serde_json::to_string(&record).expect("sentence serializes")
}

/// Streams sentences out of parallel tree and CoNLL dependency readers.
pub struct PtbConllReader<R: BufRead, S: BufRead> {
    trees: std::io::Lines<R>,
    conll: S,
    tree_line: usize,
    conll_line: usize,
    count: usize,
    done: bool,
}

impl<R: BufRead, S: BufRead> PtbConllReader<R, S> {
    pub fn new(trees: R, conll: S) -> Self {
        PtbConllReader {
            trees: trees.lines(),
            conll,
            tree_line: 0,
            conll_line: 0,
            count: 0,
            done: false,
        }
    }

    /// Reads the next non-empty CoNLL block, as (line number, columns) rows.
    fn next_block(&mut self) -> Result<Option<Vec<(usize, Vec<String>)>>, ReadError> {
        let mut rows = Vec::new();
        let mut buf = String::new();
        loop {
            buf.clear();
            let n = self.conll.read_line(&mut buf)?;
            if n == 0 {
                return Ok(if rows.is_empty() { None } else { Some(rows) });
            }
            self.conll_line += 1;
            let line = buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                if !rows.is_empty() {
                    return Ok(Some(rows));
                }
                continue;
            }
            let cols: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            rows.push((self.conll_line, cols));
        }
    }
}

impl<R: BufRead, S: BufRead> Iterator for PtbConllReader<R, S> {
    type Item = Result<AnnotatedSentence, ReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let tree_text = loop {
            match self.trees.next() {
                None => {
                    self.done = true;
                    // A leftover dependency block means the files disagree.
                    return match self.next_block() {
                        Ok(None) => None,
                        Ok(Some(rows)) => Some(Err(ReadError::Format {
                            line: rows[0].0,
                            reason: "dependency block without a matching tree".to_string(),
                        })),
                        Err(e) => Some(Err(e)),
                    };
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(ReadError::Io(e)));
                }
                Some(Ok(l)) => {
                    self.tree_line += 1;
                    if !l.trim().is_empty() {
                        break l;
                    }
                }
            }
        };
        let block = match self.next_block() {
            Ok(Some(b)) => b,
            Ok(None) => {
                self.done = true;
                return Some(Err(ReadError::Format {
                    line: self.tree_line,
                    reason: "tree without a matching dependency block".to_string(),
                }));
            }
            Err(e) => {
                self.done = true;
                return Some(Err(e));
            }
        };
        self.count += 1;
        Some(build_from_pair(
            &tree_text,
            self.tree_line,
            &block,
            &self.count.to_string(),
        ))
    }
}

fn build_from_pair(
    tree_text: &str,
    tree_line: usize,
    block: &[(usize, Vec<String>)],
    id: &str,
) -> Result<AnnotatedSentence, ReadError> {
    let tree = ConstituencyTree::parse_ptb(tree_text).map_err(|e| ReadError::Format {
        line: tree_line,
        reason: e.to_string(),
    })?;
    let mut tokens = Vec::with_capacity(block.len());
    let mut edges = Vec::with_capacity(block.len());
    for (expected, (line_no, cols)) in block.iter().enumerate() {
        if cols.len() < 8 {
            return Err(ReadError::Format {
                line: *line_no,
                reason: format!("expected at least 8 CoNLL columns, found {}", cols.len()),
            });
        }
        let conll_id: usize = cols[0].parse().map_err(|_| ReadError::Format {
            line: *line_no,
            reason: format!("bad token id {:?}", cols[0]),
        })?;
        if conll_id != expected + 1 {
            return Err(ReadError::Format {
                line: *line_no,
                reason: format!("token ids not contiguous: expected {}, found {conll_id}", expected + 1),
            });
        }
        let head: usize = cols[6].parse().map_err(|_| ReadError::Format {
            line: *line_no,
            reason: format!("bad head {:?}", cols[6]),
        })?;
        tokens.push(Token::new(&cols[1], &cols[2], &cols[4]));
        edges.push(DepEdge::new(
            &cols[7],
            if head == 0 { None } else { Some(head - 1) },
            expected,
        ));
    }
    let deps = DependencyGraph::new(edges, tokens.len()).map_err(|e| ReadError::Invariant {
        id: id.to_string(),
        reason: e.reason,
    })?;
    AnnotatedSentence::new(id, tokens, tree, deps).map_err(|e| ReadError::Invariant {
        id: id.to_string(),
        reason: e.reason,
    })
}
