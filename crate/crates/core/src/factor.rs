//! Four-factor token factorization: `word|lemma|word-class|morphology`.

use std::collections::HashMap;

use crate::corpus::{AnnotatedSentence, FactoredToken};

/// Maps Penn-style POS tags to minimized word-class tags
/// (N, V, ADJ, ADV, PRP, PRE, CONJ, DET, NUM, PUNCT, X).
#[derive(Debug, Clone)]
pub struct PosSimplificationMap {
    map: HashMap<String, String>,
}

const DEFAULT_MAPPING: &[(&str, &str)] = &[
    ("NN", "N"),
    ("NNS", "N"),
    ("NNP", "N"),
    ("NNPS", "N"),
    ("VB", "V"),
    ("VBD", "V"),
    ("VBG", "V"),
    ("VBN", "V"),
    ("VBP", "V"),
    ("VBZ", "V"),
    ("JJ", "ADJ"),
    ("JJR", "ADJ"),
    ("JJS", "ADJ"),
    ("RB", "ADV"),
    ("RBR", "ADV"),
    ("RBS", "ADV"),
    ("PRP", "PRP"),
    ("PRP$", "PRP"),
    ("IN", "PRE"),
    ("TO", "PRE"),
    ("CC", "CONJ"),
    ("DT", "DET"),
    ("CD", "NUM"),
    (".", "PUNCT"),
    (",", "PUNCT"),
    (":", "PUNCT"),
    ("``", "PUNCT"),
    ("''", "PUNCT"),
    ("-LRB-", "PUNCT"),
    ("-RRB-", "PUNCT"),
    ("#", "PUNCT"),
    ("$", "PUNCT"),
];

impl Default for PosSimplificationMap {
    fn default() -> Self {
        PosSimplificationMap {
            map: DEFAULT_MAPPING
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl PosSimplificationMap {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        PosSimplificationMap {
            map: pairs
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Word class for a POS tag; unknown tags fall back to `X`.
    pub fn simplify(&self, pos: &str) -> &str {
        self.map.get(pos).map_or("X", String::as_str)
    }

    pub fn is_known(&self, pos: &str) -> bool {
        self.map.contains_key(pos)
    }
}

/// Factorizes every token of a sentence. The word and lemma factors are
/// lowercased; the morphology factor starts with the POS tag followed by
/// the token's incoming dependency relation (lowercased). The relation
/// atom is omitted for the root-attached token, except in a one-token
/// sentence where the atom `root` keeps the factor informative.
pub fn factorize_sentence(
    sentence: &AnnotatedSentence,
    pos_map: &PosSimplificationMap,
) -> Vec<FactoredToken> {
    let root = sentence.deps.root();
    sentence
        .tokens
        .iter()
        .enumerate()
        .map(|(i, token)| {
            let mut morphology = vec![token.pos.clone()];
            if i == root {
                if sentence.len() == 1 {
                    morphology.push("root".to_string());
                }
            } else if let Some(edge) = sentence.deps.incoming(i) {
                morphology.push(edge.rel.to_lowercase());
            }
            FactoredToken {
                word: token.surface.to_lowercase(),
                lemma: token.lemma.to_lowercase(),
                word_class: pos_map.simplify(&token.pos).to_string(),
                morphology,
            }
        })
        .collect()
}
