//! Dependency-triggered compounding: deleting function words, auxiliaries
//! and modals and folding them, plus subject person-number-gender (PNG)
//! information, into the morphology factor of the governing content word.
//!
//! Rules live in a text file, one per line:
//!
//! ```text
//! id: deprel [dep_pos=TAG,TAG] [head_pos=TAG,TAG] [head_rel=REL] -> target action [delete]
//! ```
//!
//! `target` is `head` or `head_of_head`, `action` is `fold_surface`,
//! `fold_tag` or `fold_png`. Rules are tried in file order and the first
//! match wins, once per dependency edge.
//!
//! A `head`-targeted rule folds an atom derived from the edge's dependent
//! onto the head token and, with `delete`, removes the dependent. A
//! `head_of_head`-targeted rule handles function words that stand between
//! a content word and its governor (preposition-object chains): the atom
//! comes from the edge's head, is folded onto the dependent, the head is
//! deleted, and the dependent conceptually re-attaches to the head's own
//! head. Such a rule only fires when that grandparent exists.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::corpus::{AnnotatedSentence, FactoredToken, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PosPredicate {
    Any,
    OneOf(Vec<String>),
}

impl PosPredicate {
    fn matches(&self, pos: &str) -> bool {
        match self {
            PosPredicate::Any => true,
            PosPredicate::OneOf(tags) => tags.iter().any(|t| t == pos),
        }
    }

    fn tags(&self) -> &[String] {
        match self {
            PosPredicate::Any => &[],
            PosPredicate::OneOf(tags) => tags,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldTarget {
    Head,
    HeadOfHead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldAction {
    FoldSurface,
    FoldTag,
    FoldPng,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundRule {
    pub id: String,
    pub deprel: String,
    pub dep_pos: PosPredicate,
    pub head_pos: PosPredicate,
    /// Required incoming relation of the edge's head (used by
    /// `head_of_head` rules to pin down the function-word chain).
    pub head_rel: Option<String>,
    pub target: FoldTarget,
    pub action: FoldAction,
    pub delete: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompoundRuleSet {
    pub rules: Vec<CompoundRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompoundRuleError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: fold_png rules must not delete the subject")]
    DeleteWithPngFold { line: usize },
    #[error("line {line}: deleting rules must constrain the deleted token's POS")]
    UnboundedDelete { line: usize },
    #[error("line {line}: rule would delete content-class tokens ({tag})")]
    ContentClassDeletion { line: usize, tag: String },
}

// Nominal, adjectival and adverbial tags are never deletable. Verbal tags
// are deletable only through the auxiliary relations, where the relation
// itself marks the token as a function word.
const CONTENT_TAGS: &[&str] = &[
    "NN", "NNS", "NNP", "NNPS", "JJ", "JJR", "JJS", "RB", "RBR", "RBS",
];
const VERBAL_TAGS: &[&str] = &["VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "MD"];
const AUX_RELS: &[&str] = &["aux", "auxpass"];

impl CompoundRuleSet {
    pub fn parse(text: &str) -> Result<Self, CompoundRuleError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            rules.push(parse_rule(line, line_no)?);
        }
        Ok(CompoundRuleSet { rules })
    }
}

fn syntax(line: usize, reason: impl Into<String>) -> CompoundRuleError {
    CompoundRuleError::Syntax {
        line,
        reason: reason.into(),
    }
}

fn parse_rule(line: &str, line_no: usize) -> Result<CompoundRule, CompoundRuleError> {
    let (id, rest) = line
        .split_once(':')
        .ok_or_else(|| syntax(line_no, "expected `id: ...`"))?;
    let id = id.trim();
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(syntax(line_no, "rule id must be a single word"));
    }
    let (trigger, effect) = rest
        .split_once("->")
        .ok_or_else(|| syntax(line_no, "expected `->` between trigger and effect"))?;

    let mut trigger_parts = trigger.split_whitespace();
    let deprel = trigger_parts
        .next()
        .ok_or_else(|| syntax(line_no, "missing dependency relation"))?
        .to_string();
    let mut dep_pos = PosPredicate::Any;
    let mut head_pos = PosPredicate::Any;
    let mut head_rel = None;
    for part in trigger_parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| syntax(line_no, format!("unrecognized trigger option {part:?}")))?;
        let tags = || {
            PosPredicate::OneOf(
                value
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(str::to_string)
                    .collect(),
            )
        };
        match key {
            "dep_pos" => dep_pos = tags(),
            "head_pos" => head_pos = tags(),
            "head_rel" => head_rel = Some(value.to_string()),
            _ => return Err(syntax(line_no, format!("unknown trigger option {key:?}"))),
        }
    }

    let mut effect_parts = effect.split_whitespace();
    let target = match effect_parts.next() {
        Some("head") => FoldTarget::Head,
        Some("head_of_head") => FoldTarget::HeadOfHead,
        other => {
            return Err(syntax(
                line_no,
                format!("expected target `head` or `head_of_head`, found {other:?}"),
            ))
        }
    };
    let action = match effect_parts.next() {
        Some("fold_surface") => FoldAction::FoldSurface,
        Some("fold_tag") => FoldAction::FoldTag,
        Some("fold_png") => FoldAction::FoldPng,
        other => {
            return Err(syntax(
                line_no,
                format!("expected a fold action, found {other:?}"),
            ))
        }
    };
    let delete = match effect_parts.next() {
        None => false,
        Some("delete") => true,
        Some(other) => return Err(syntax(line_no, format!("unexpected token {other:?}"))),
    };
    if let Some(extra) = effect_parts.next() {
        return Err(syntax(line_no, format!("unexpected token {extra:?}")));
    }

    let rule = CompoundRule {
        id: id.to_string(),
        deprel,
        dep_pos,
        head_pos,
        head_rel,
        target,
        action,
        delete,
    };
    validate_rule(&rule, line_no)?;
    Ok(rule)
}

fn validate_rule(rule: &CompoundRule, line: usize) -> Result<(), CompoundRuleError> {
    if rule.action == FoldAction::FoldPng && rule.delete {
        return Err(CompoundRuleError::DeleteWithPngFold { line });
    }
    if rule.delete {
        let deleted_side = match rule.target {
            FoldTarget::Head => &rule.dep_pos,
            FoldTarget::HeadOfHead => &rule.head_pos,
        };
        if *deleted_side == PosPredicate::Any {
            return Err(CompoundRuleError::UnboundedDelete { line });
        }
        let aux_relation = AUX_RELS.contains(&rule.deprel.as_str());
        for tag in deleted_side.tags() {
            let content = CONTENT_TAGS.contains(&tag.as_str())
                || (VERBAL_TAGS.contains(&tag.as_str())
                    && !(aux_relation && rule.target == FoldTarget::Head));
            if content {
                return Err(CompoundRuleError::ContentClassDeletion {
                    line,
                    tag: tag.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Person-number-gender atoms keyed by subject lemma (lowercase entries)
/// or POS tag (uppercase entries). Unlisted subjects fall back to `3s`.
#[derive(Debug, Clone)]
pub struct PngLexicon {
    entries: HashMap<String, String>,
}

// `3s` is the gender-unspecified singular used for nouns and as the
// fallback; the gendered forms come from the pronoun paradigm.
pub const PNG_ATOMS: &[&str] = &["1s", "2s", "3s", "3sm", "3sf", "3sn", "1p", "2p", "3p"];

const DEFAULT_PNG: &[(&str, &str)] = &[
    ("i", "1s"),
    ("me", "1s"),
    ("myself", "1s"),
    ("we", "1p"),
    ("us", "1p"),
    ("ourselves", "1p"),
    ("you", "2s"),
    ("yourself", "2s"),
    ("yourselves", "2p"),
    ("he", "3sm"),
    ("him", "3sm"),
    ("himself", "3sm"),
    ("she", "3sf"),
    ("her", "3sf"),
    ("herself", "3sf"),
    ("it", "3sn"),
    ("itself", "3sn"),
    ("they", "3p"),
    ("them", "3p"),
    ("themselves", "3p"),
    ("NN", "3s"),
    ("NNP", "3s"),
    ("NNS", "3p"),
    ("NNPS", "3p"),
];

impl Default for PngLexicon {
    fn default() -> Self {
        PngLexicon {
            entries: DEFAULT_PNG
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct LexiconError {
    pub line: usize,
    pub reason: String,
}

impl PngLexicon {
    /// Parses `key atom` lines; `//` comments and blank lines ignored.
    /// Lowercase keys match subject lemmas, uppercase keys match POS tags.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap().to_string();
            let atom = parts.next().ok_or_else(|| LexiconError {
                line: i + 1,
                reason: "expected `key atom`".to_string(),
            })?;
            if parts.next().is_some() {
                return Err(LexiconError {
                    line: i + 1,
                    reason: "expected exactly two fields".to_string(),
                });
            }
            if !PNG_ATOMS.contains(&atom) {
                return Err(LexiconError {
                    line: i + 1,
                    reason: format!("unknown PNG atom {atom:?}"),
                });
            }
            entries.insert(key, atom.to_string());
        }
        Ok(PngLexicon { entries })
    }

    /// PNG atom for a subject token plus whether the lookup was covered by
    /// the lexicon (false means the `3s` fallback was used).
    pub fn lookup(&self, token: &Token) -> (&str, bool) {
        if let Some(atom) = self.entries.get(&token.lemma.to_lowercase()) {
            return (atom, true);
        }
        if let Some(atom) = self.entries.get(&token.pos) {
            return (atom, true);
        }
        ("3s", false)
    }
}

/// PNG atom for a subject token: pronoun paradigm by lemma, noun class by
/// POS tag, `3s` fallback for anything else.
pub fn extract_png(token: &Token, lexicon: &PngLexicon) -> String {
    lexicon.lookup(token).0.to_string()
}

/// One deleted token's fold, in sentence-local indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deletion {
    pub deleted: usize,
    pub target: usize,
    pub atom: String,
    pub rule_id: String,
}

#[derive(Debug, Clone)]
pub struct CompoundOutcome {
    /// Surviving tokens in their original relative order.
    pub tokens: Vec<FactoredToken>,
    pub deletions: Vec<Deletion>,
    /// Indices (into the sentence's edge list) of edges that fired a rule.
    pub consumed_edges: Vec<usize>,
    /// Subjects whose PNG atom came from the `3s` fallback.
    pub png_fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompoundError {
    #[error("fold target {target} was itself deleted by another rule")]
    DanglingTarget { target: usize },
    #[error("factored sequence length {factored} does not match sentence length {tokens}")]
    AlignmentMismatch { factored: usize, tokens: usize },
    #[error("permutation mismatch: {0}")]
    PermutationMismatch(String),
}

struct FoldOp {
    source: usize,
    receiver: usize,
    atom: String,
    delete: bool,
    rule_id: String,
    edge_idx: usize,
}

/// Applies compounding rules to a factorized sentence. Each dependency
/// edge is matched against the rules in file order; the first match fires.
/// Folded atoms land on their target in sentence order of the folded
/// tokens; deleted tokens are removed from the output sequence.
pub fn compound_sentence(
    factored: &[FactoredToken],
    sentence: &AnnotatedSentence,
    rules: &CompoundRuleSet,
    lexicon: &PngLexicon,
) -> Result<CompoundOutcome, CompoundError> {
    if factored.len() != sentence.len() {
        return Err(CompoundError::AlignmentMismatch {
            factored: factored.len(),
            tokens: sentence.len(),
        });
    }
    let tokens = &sentence.tokens;
    let mut ops: Vec<FoldOp> = Vec::new();
    let mut deleted: HashSet<usize> = HashSet::new();
    let mut consumed_edges = Vec::new();
    let mut png_fallbacks = 0usize;

    for (edge_idx, edge) in sentence.deps.edges().iter().enumerate() {
        let head = match edge.head {
            Some(h) => h,
            None => continue, // the root edge has no head token to fold onto
        };
        let fired = rules.rules.iter().find(|rule| {
            rule.deprel == edge.rel
                && rule.dep_pos.matches(&tokens[edge.dep].pos)
                && rule.head_pos.matches(&tokens[head].pos)
                && rule
                    .head_rel
                    .as_ref()
                    .map_or(true, |r| {
                        sentence.deps.incoming(head).map_or(false, |e| &e.rel == r)
                    })
                && (rule.target == FoldTarget::Head
                    || sentence
                        .deps
                        .incoming(head)
                        .and_then(|e| e.head)
                        .is_some())
        });
        let rule = match fired {
            Some(r) => r,
            None => continue,
        };
        let (source, receiver) = match rule.target {
            FoldTarget::Head => (edge.dep, head),
            FoldTarget::HeadOfHead => (head, edge.dep),
        };
        if rule.delete && deleted.contains(&source) {
            // Already claimed by an earlier edge (e.g. a preposition with
            // two objects); its contribution is placed exactly once.
            continue;
        }
        let atom = match rule.action {
            FoldAction::FoldSurface => tokens[source].surface.to_lowercase(),
            FoldAction::FoldTag => tokens[source].pos.clone(),
            FoldAction::FoldPng => {
                let (atom, known) = lexicon.lookup(&tokens[source]);
                if !known {
                    png_fallbacks += 1;
                }
                atom.to_string()
            }
        };
        if rule.delete {
            deleted.insert(source);
        }
        consumed_edges.push(edge_idx);
        ops.push(FoldOp {
            source,
            receiver,
            atom,
            delete: rule.delete,
            rule_id: rule.id.clone(),
            edge_idx,
        });
    }

    for op in &ops {
        if deleted.contains(&op.receiver) {
            return Err(CompoundError::DanglingTarget {
                target: op.receiver,
            });
        }
    }

    ops.sort_by_key(|op| (op.source, op.edge_idx));

    let mut out: Vec<FactoredToken> = factored.to_vec();
    let mut deletions = Vec::new();
    for op in &ops {
        out[op.receiver].morphology.push(op.atom.clone());
        if op.delete {
            deletions.push(Deletion {
                deleted: op.source,
                target: op.receiver,
                atom: op.atom.clone(),
                rule_id: op.rule_id.clone(),
            });
        }
    }
    let tokens_out: Vec<FactoredToken> = out
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !deleted.contains(i))
        .map(|(_, t)| t)
        .collect();

    Ok(CompoundOutcome {
        tokens: tokens_out,
        deletions,
        consumed_edges,
        png_fallbacks,
    })
}

/// Emits the surviving factored tokens in the order induced by a
/// reordering permutation over the original token indices.
pub fn integrate(
    compounded: &[FactoredToken],
    permutation: &[usize],
    deletions: &[Deletion],
) -> Result<Vec<FactoredToken>, CompoundError> {
    let n = compounded.len() + deletions.len();
    if permutation.len() != n {
        return Err(CompoundError::PermutationMismatch(format!(
            "permutation covers {} indices but the original sentence had {n} tokens",
            permutation.len()
        )));
    }
    let mut deleted = vec![false; n];
    for d in deletions {
        if d.deleted >= n || deleted[d.deleted] {
            return Err(CompoundError::PermutationMismatch(format!(
                "bad deletion index {}",
                d.deleted
            )));
        }
        deleted[d.deleted] = true;
    }
    let mut seen = vec![false; n];
    for &i in permutation {
        if i >= n || seen[i] {
            return Err(CompoundError::PermutationMismatch(format!(
                "index {i} repeated or out of range"
            )));
        }
        seen[i] = true;
    }
    // Position of each surviving original index inside `compounded`.
    let mut position = vec![usize::MAX; n];
    let mut next = 0usize;
    for (i, del) in deleted.iter().enumerate() {
        if !del {
            position[i] = next;
            next += 1;
        }
    }
    Ok(permutation
        .iter()
        .filter(|&&i| !deleted[i])
        .map(|&i| compounded[position[i]].clone())
        .collect())
}
