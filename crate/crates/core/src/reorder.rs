//! The reordering rule DSL and its application to constituency trees.
//!
//! A rule file holds one rule per line in three `#`-separated units:
//!
//! ```text
//! VP -> VBP PP # VP -> PP VBP # 0:1,1:0
//! ```
//!
//! The first unit is the source production pattern, the second the target
//! pattern, and the third the slot mapping read as `target:source` pairs
//! (the first child of the target comes from the second child of the
//! source, and so on). Pairs may be separated by commas or whitespace.
//! When the mapping unit is absent it is inferred, which is only possible
//! when the target symbols are a permutation of pairwise-distinct source
//! symbols. Blank lines and lines starting with `//` are ignored.
//!
//! A symbol written `NP*` is a wildcard: it matches one or more consecutive
//! `NP` children and the whole bound run moves as a block. Patterns are
//! anchored, so a rule matches only when it covers a node's entire child
//! sequence.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::{AnnotatedSentence, ConstituencyTree, DepEdge, DependencyGraph, Token};

/// One pattern symbol: a literal label, or a starred wildcard label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternSymbol {
    pub label: String,
    pub wildcard: bool,
}

impl fmt::Display for PatternSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.label, if self.wildcard { "*" } else { "" })
    }
}

/// A production pattern: parent label plus ordered child symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub parent: String,
    pub symbols: Vec<PatternSymbol>,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let syms: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
        write!(f, "{} -> {}", self.parent, syms.join(" "))
    }
}

/// A reordering rule. `mapping[t]` is the source slot that fills target
/// slot `t`; it is always a permutation of the source slots and maps
/// between slots carrying equal symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReorderRule {
    pub source: Pattern,
    pub target: Pattern,
    pub mapping: Vec<usize>,
    /// Line number in the rule file, for provenance and traces.
    pub line: usize,
}

/// An ordered rule set; earlier rules win.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReorderRuleSet {
    pub rules: Vec<ReorderRule>,
    pub source_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleParseError {
    #[error("line {line}: expected `PARENT -> SYMBOLS` in unit {unit}")]
    BadArrow { line: usize, unit: usize },
    #[error("line {line}: mapping is not a bijection between target and source slots")]
    MappingNotBijective { line: usize },
    #[error("line {line}: target symbols are not a reordering of the source symbols")]
    SymbolMultisetMismatch { line: usize },
    #[error("line {line}: source and target parent labels differ")]
    ParentLabelMismatch { line: usize },
    #[error("line {line}: mapping would move slot contents between different symbols")]
    MappingSymbolMismatch { line: usize },
    #[error("line {line}: mapping omitted but symbols repeat; spell it out")]
    AmbiguousMapping { line: usize },
    #[error("line {line}: source pattern already defined on line {first_line}")]
    DuplicateSourcePattern { line: usize, first_line: usize },
}

/// Which concrete children fill each source pattern slot: one
/// `(start, len)` span per slot, `len > 1` only for wildcard slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WildcardBinding {
    pub spans: Vec<(usize, usize)>,
}

/// One rule application in a reordering trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedRule {
    /// Child-index path from the root to the rewritten node.
    pub path: Vec<usize>,
    /// Index of the rule in the rule set.
    pub rule_index: usize,
    /// Rule-file line of that rule.
    pub line: usize,
}

pub fn parse_ruleset(text: &str) -> Result<ReorderRuleSet, RuleParseError> {
    let mut rules = Vec::new();
    let mut seen: HashMap<Pattern, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let rule = parse_rule(line, line_no)?;
        if let Some(first) = seen.get(&rule.source) {
            return Err(RuleParseError::DuplicateSourcePattern {
                line: line_no,
                first_line: *first,
            });
        }
        seen.insert(rule.source.clone(), line_no);
        rules.push(rule);
    }
    Ok(ReorderRuleSet {
        rules,
        source_path: None,
    })
}

fn parse_pattern(text: &str, line: usize, unit: usize) -> Result<Pattern, RuleParseError> {
    let (parent, rest) = text
        .split_once("->")
        .ok_or(RuleParseError::BadArrow { line, unit })?;
    let parent = parent.trim();
    if parent.is_empty() || parent.chars().any(char::is_whitespace) {
        return Err(RuleParseError::BadArrow { line, unit });
    }
    let symbols: Vec<PatternSymbol> = rest
        .split_whitespace()
        .map(|s| match s.strip_suffix('*') {
            Some(base) if !base.is_empty() => PatternSymbol {
                label: base.to_string(),
                wildcard: true,
            },
            _ => PatternSymbol {
                label: s.to_string(),
                wildcard: false,
            },
        })
        .collect();
    if symbols.is_empty() || symbols.iter().any(|s| s.label.is_empty()) {
        return Err(RuleParseError::BadArrow { line, unit });
    }
    Ok(Pattern {
        parent: parent.to_string(),
        symbols,
    })
}

fn parse_rule(line: &str, line_no: usize) -> Result<ReorderRule, RuleParseError> {
    let units: Vec<&str> = line.split('#').map(str::trim).collect();
    if units.len() < 2 || units.len() > 3 {
        return Err(RuleParseError::BadArrow {
            line: line_no,
            unit: units.len(),
        });
    }
    let source = parse_pattern(units[0], line_no, 1)?;
    let target = parse_pattern(units[1], line_no, 2)?;
    if source.parent != target.parent {
        return Err(RuleParseError::ParentLabelMismatch { line: line_no });
    }
    let mut source_sorted: Vec<&PatternSymbol> = source.symbols.iter().collect();
    let mut target_sorted: Vec<&PatternSymbol> = target.symbols.iter().collect();
    source_sorted.sort_by_key(|s| (s.label.clone(), s.wildcard));
    target_sorted.sort_by_key(|s| (s.label.clone(), s.wildcard));
    if source_sorted != target_sorted {
        return Err(RuleParseError::SymbolMultisetMismatch { line: line_no });
    }
    let mapping = match units.get(2) {
        Some(unit) if !unit.is_empty() => parse_mapping(unit, source.symbols.len(), line_no)?,
        _ => infer_mapping(&source, &target, line_no)?,
    };
    for (t, &s) in mapping.iter().enumerate() {
        if target.symbols[t] != source.symbols[s] {
            return Err(RuleParseError::MappingSymbolMismatch { line: line_no });
        }
    }
    Ok(ReorderRule {
        source,
        target,
        mapping,
        line: line_no,
    })
}

fn parse_mapping(text: &str, slots: usize, line: usize) -> Result<Vec<usize>, RuleParseError> {
    let mut mapping = vec![usize::MAX; slots];
    let mut used = vec![false; slots];
    let mut pairs = 0usize;
    for pair in text.split(|c: char| c == ',' || c.is_whitespace()) {
        if pair.is_empty() {
            continue;
        }
        pairs += 1;
        let (t, s) = pair
            .split_once(':')
            .ok_or(RuleParseError::MappingNotBijective { line })?;
        let t: usize = t
            .trim()
            .parse()
            .map_err(|_| RuleParseError::MappingNotBijective { line })?;
        let s: usize = s
            .trim()
            .parse()
            .map_err(|_| RuleParseError::MappingNotBijective { line })?;
        if t >= slots || s >= slots || mapping[t] != usize::MAX || used[s] {
            return Err(RuleParseError::MappingNotBijective { line });
        }
        mapping[t] = s;
        used[s] = true;
    }
    if pairs != slots {
        return Err(RuleParseError::MappingNotBijective { line });
    }
    Ok(mapping)
}

fn infer_mapping(
    source: &Pattern,
    target: &Pattern,
    line: usize,
) -> Result<Vec<usize>, RuleParseError> {
    let mut distinct: HashMap<&PatternSymbol, usize> = HashMap::new();
    for (i, sym) in source.symbols.iter().enumerate() {
        if distinct.insert(sym, i).is_some() {
            return Err(RuleParseError::AmbiguousMapping { line });
        }
    }
    // Multiset equality was already checked, so every target symbol is here.
    Ok(target
        .symbols
        .iter()
        .map(|sym| distinct[sym])
        .collect())
}

/// Matches a rule's source pattern against an ordered child-label list.
/// Wildcards are greedy and bind one or more consecutive equal labels;
/// the pattern must cover the whole production. Returns the spans of
/// children bound to each pattern slot, or `None` on no match.
pub fn match_production(rule: &ReorderRule, children: &[&str]) -> Option<WildcardBinding> {
    let mut spans = Vec::with_capacity(rule.source.symbols.len());
    if match_symbols(&rule.source.symbols, children, 0, 0, &mut spans) {
        Some(WildcardBinding { spans })
    } else {
        None
    }
}

fn match_symbols(
    symbols: &[PatternSymbol],
    children: &[&str],
    si: usize,
    ci: usize,
    spans: &mut Vec<(usize, usize)>,
) -> bool {
    if si == symbols.len() {
        return ci == children.len();
    }
    let sym = &symbols[si];
    if sym.wildcard {
        let mut run = 0;
        while ci + run < children.len() && children[ci + run] == sym.label {
            run += 1;
        }
        for take in (1..=run).rev() {
            spans.push((ci, take));
            if match_symbols(symbols, children, si + 1, ci + take, spans) {
                return true;
            }
            spans.pop();
        }
        false
    } else if ci < children.len() && children[ci] == sym.label {
        spans.push((ci, 1));
        if match_symbols(symbols, children, si + 1, ci + 1, spans) {
            return true;
        }
        spans.pop();
        false
    } else {
        false
    }
}

/// Applies a rule set to a tree top-down. At every internal node the first
/// rule (file order) whose source pattern matches the current child-label
/// sequence permutes the children; recursion then continues into the
/// permuted children. Nodes matching no rule are left untouched.
pub fn reorder_tree(
    tree: &ConstituencyTree,
    rules: &ReorderRuleSet,
) -> (ConstituencyTree, Vec<AppliedRule>) {
    let mut trace = Vec::new();
    let out = rewrite(tree, rules, &mut Vec::new(), &mut trace);
    (out, trace)
}

fn rewrite(
    tree: &ConstituencyTree,
    rules: &ReorderRuleSet,
    path: &mut Vec<usize>,
    trace: &mut Vec<AppliedRule>,
) -> ConstituencyTree {
    let (label, children) = match tree {
        ConstituencyTree::Leaf { .. } => return tree.clone(),
        ConstituencyTree::Node { label, children } => (label, children),
    };
    let mut new_children: Vec<ConstituencyTree> = children.clone();
    if !tree.is_preterminal() {
        let labels: Vec<&str> = children
            .iter()
            .map(|c| c.label().unwrap_or(""))
            .collect();
        for (rule_index, rule) in rules.rules.iter().enumerate() {
            if rule.source.parent != *label {
                continue;
            }
            if let Some(binding) = match_production(rule, &labels) {
                let mut permuted = Vec::with_capacity(children.len());
                for &source_slot in &rule.mapping {
                    let (start, len) = binding.spans[source_slot];
                    permuted.extend_from_slice(&children[start..start + len]);
                }
                new_children = permuted;
                trace.push(AppliedRule {
                    path: path.clone(),
                    rule_index,
                    line: rule.line,
                });
                break;
            }
        }
    }
    let rewritten = new_children
        .iter()
        .enumerate()
        .map(|(i, c)| {
            path.push(i);
            let out = rewrite(c, rules, path, trace);
            path.pop();
            out
        })
        .collect();
    ConstituencyTree::Node {
        label: label.clone(),
        children: rewritten,
    }
}

/// Reads the (possibly reordered) sentence off a tree's leaves: the
/// surfaces joined by single spaces, plus the permutation of original
/// token indices in leaf order.
pub fn regenerate_sentence(tree: &ConstituencyTree, tokens: &[Token]) -> (String, Vec<usize>) {
    let permutation = tree.yield_indices();
    let text = permutation
        .iter()
        .map(|&i| tokens[i].surface.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    (text, permutation)
}

/// Reorders a sentence and rewrites it in canonical form: tokens appear in
/// the new order, the tree's leaves run left to right again, and dependency
/// edges are remapped. Also returns the application trace and the
/// permutation (original token indices in new order).
pub fn reorder_sentence(
    sentence: &AnnotatedSentence,
    rules: &ReorderRuleSet,
) -> (AnnotatedSentence, Vec<AppliedRule>, Vec<usize>) {
    let (tree, trace) = reorder_tree(&sentence.tree, rules);
    let permutation = tree.yield_indices();
    let mut new_index = vec![0usize; permutation.len()];
    for (new, &old) in permutation.iter().enumerate() {
        new_index[old] = new;
    }
    let tokens: Vec<Token> = permutation
        .iter()
        .map(|&old| sentence.tokens[old].clone())
        .collect();
    let tree = renumber_leaves(&tree, &new_index);
    let edges: Vec<DepEdge> = sentence
        .deps
        .edges()
        .iter()
        .map(|e| DepEdge::new(&e.rel, e.head.map(|h| new_index[h]), new_index[e.dep]))
        .collect();
    let deps = DependencyGraph::new(edges, tokens.len())
        .expect("remapping a valid graph preserves validity");
    let reordered = AnnotatedSentence::new(&sentence.id, tokens, tree, deps)
        .expect("reordering preserves sentence invariants");
    (reordered, trace, permutation)
}

fn renumber_leaves(tree: &ConstituencyTree, new_index: &[usize]) -> ConstituencyTree {
    match tree {
        ConstituencyTree::Leaf { index, surface } => ConstituencyTree::Leaf {
            index: new_index[*index],
            surface: surface.clone(),
        },
        ConstituencyTree::Node { label, children } => ConstituencyTree::Node {
            label: label.clone(),
            children: children.iter().map(|c| renumber_leaves(c, new_index)).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedSentence, DepEdge, DependencyGraph};

    fn worked_tree() -> ConstituencyTree {
        ConstituencyTree::parse_ptb(
            "(S (NP (PRP I)) (VP (VBD bought) (NP (NNS vegetables)) (PP (TO to) (NP (PRP$ my) (NN home)))))",
        )
        .unwrap()
    }

    fn worked_tokens() -> Vec<Token> {
        [
            ("I", "i", "PRP"),
            ("bought", "buy", "VBD"),
            ("vegetables", "vegetable", "NNS"),
            ("to", "to", "TO"),
            ("my", "my", "PRP$"),
            ("home", "home", "NN"),
        ]
        .iter()
        .map(|(s, l, p)| Token::new(s, l, p))
        .collect()
    }

    #[test]
    fn parses_three_unit_rule() {
        let rules = parse_ruleset("VP -> VBP PP# VP -> PP VBP# 0:1,1:0").unwrap();
        assert_eq!(rules.rules.len(), 1);
        assert_eq!(rules.rules[0].mapping, vec![1, 0]);
    }

    #[test]
    fn infers_identity_mapping() {
        let rules = parse_ruleset("S -> NP VP # S -> NP VP").unwrap();
        assert_eq!(rules.rules[0].mapping, vec![0, 1]);
    }

    #[test]
    fn infers_permutation_mapping_with_wildcard() {
        let rules = parse_ruleset("VP -> VB NP* SBAR # VP -> NP* VB SBAR").unwrap();
        assert_eq!(rules.rules[0].mapping, vec![1, 0, 2]);
        assert!(rules.rules[0].target.symbols[0].wildcard);
    }

    #[test]
    fn rejects_non_bijective_mapping() {
        assert_eq!(
            parse_ruleset("VP -> VBD NP# VP -> NP VBD# 0:0,1:0"),
            Err(RuleParseError::MappingNotBijective { line: 1 })
        );
    }

    #[test]
    fn rejects_multiset_mismatch() {
        assert_eq!(
            parse_ruleset("VP -> VBD NP # VP -> VBD PP"),
            Err(RuleParseError::SymbolMultisetMismatch { line: 1 })
        );
        // A starred symbol is distinct from its unstarred form.
        assert_eq!(
            parse_ruleset("VP -> VBD NP* # VP -> NP VBD"),
            Err(RuleParseError::SymbolMultisetMismatch { line: 1 })
        );
    }

    #[test]
    fn rejects_ambiguous_inference() {
        assert_eq!(
            parse_ruleset("NP -> NN NN # NP -> NN NN"),
            Err(RuleParseError::AmbiguousMapping { line: 1 })
        );
    }

    #[test]
    fn rejects_duplicate_source() {
        let text = "VP -> VBD NP # VP -> NP VBD # 0:1,1:0\nVP -> VBD NP # VP -> VBD NP";
        assert_eq!(
            parse_ruleset(text),
            Err(RuleParseError::DuplicateSourcePattern {
                line: 2,
                first_line: 1
            })
        );
    }

    #[test]
    fn rejects_misaligned_explicit_mapping() {
        assert_eq!(
            parse_ruleset("VP -> VBD NP # VP -> NP VBD # 0:0,1:1"),
            Err(RuleParseError::MappingSymbolMismatch { line: 1 })
        );
    }

    #[test]
    fn rejects_bad_arrow_and_parent_mismatch() {
        assert!(matches!(
            parse_ruleset("VP VBD NP # VP -> NP VBD"),
            Err(RuleParseError::BadArrow { line: 1, .. })
        ));
        assert_eq!(
            parse_ruleset("VP -> VBD NP # S -> NP VBD"),
            Err(RuleParseError::ParentLabelMismatch { line: 1 })
        );
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let rules = parse_ruleset("// a comment\n\nS -> NP VP # S -> NP VP\n").unwrap();
        assert_eq!(rules.rules.len(), 1);
        assert_eq!(rules.rules[0].line, 3);
    }

    #[test]
    fn match_requires_exact_coverage() {
        let rules = parse_ruleset("VP -> VBD NP # VP -> NP VBD # 0:1,1:0").unwrap();
        let rule = &rules.rules[0];
        assert!(match_production(rule, &["VBD", "NP"]).is_some());
        assert!(match_production(rule, &["VBD", "NP", "PP"]).is_none());
        assert!(match_production(rule, &["NP", "VBD"]).is_none());
    }

    #[test]
    fn wildcard_binds_greedy_run() {
        let rules = parse_ruleset("VP -> VB NP* SBAR # VP -> NP* VB SBAR").unwrap();
        let binding = match_production(&rules.rules[0], &["VB", "NP", "NP", "SBAR"]).unwrap();
        assert_eq!(binding.spans, vec![(0, 1), (1, 2), (3, 1)]);
        assert!(match_production(&rules.rules[0], &["VB", "SBAR"]).is_none());
    }

    #[test]
    fn trivial_binding_on_exact_match() {
        let rules = parse_ruleset("VP -> VBD NP PP # VP -> PP NP VBD # 0:2,1:1,2:0").unwrap();
        let binding = match_production(&rules.rules[0], &["VBD", "NP", "PP"]).unwrap();
        assert_eq!(binding.spans, vec![(0, 1), (1, 1), (2, 1)]);
    }

    #[test]
    fn mapping_permutes_children() {
        let rules = parse_ruleset("VP -> VBD NP PP # VP -> PP NP VBD # 0:2,1:1,2:0").unwrap();
        let tree = ConstituencyTree::parse_ptb(
            "(VP (VBD bought) (NP (NNS vegetables)) (PP (TO to) (NP (NN home))))",
        )
        .unwrap();
        let (out, trace) = reorder_tree(&tree, &rules);
        let prods = out.productions();
        assert_eq!(prods[0].children, vec!["PP", "NP", "VBD"]);
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].path, Vec::<usize>::new());
    }

    #[test]
    fn wildcard_block_moves_intact() {
        let rules = parse_ruleset("VP -> VB NP* SBAR # VP -> NP* VB SBAR").unwrap();
        let tree = ConstituencyTree::parse_ptb(
            "(VP (VB give) (NP (NN a)) (NP (NN b)) (SBAR (IN that)))",
        )
        .unwrap();
        let (out, _) = reorder_tree(&tree, &rules);
        let (text, perm) = regenerate_sentence(
            &out,
            &[
                Token::new("give", "give", "VB"),
                Token::new("a", "a", "NN"),
                Token::new("b", "b", "NN"),
                Token::new("that", "that", "IN"),
            ],
        );
        assert_eq!(text, "a b give that");
        assert_eq!(perm, vec![1, 2, 0, 3]);
    }

    #[test]
    fn worked_example_reorders_per_listed_rules() {
        // Four explicit transformations, including the possessive swap.
        let text = "S -> NP VP # S -> NP VP\n\
                    VP -> VBD NP PP # VP -> PP NP VBD # 0:2,1:1,2:0\n\
                    PP -> TO NP # PP -> NP TO # 0:1,1:0\n\
                    NP -> PRP$ NN # NP -> NN PRP$ # 0:1,1:0\n";
        let rules = parse_ruleset(text).unwrap();
        let (out, trace) = reorder_tree(&worked_tree(), &rules);
        let prods: Vec<(String, Vec<String>)> = out
            .productions()
            .into_iter()
            .map(|p| (p.parent, p.children))
            .collect();
        assert_eq!(
            prods,
            vec![
                ("S".to_string(), vec!["NP".to_string(), "VP".to_string()]),
                (
                    "VP".to_string(),
                    vec!["PP".to_string(), "NP".to_string(), "VBD".to_string()]
                ),
                ("PP".to_string(), vec!["NP".to_string(), "TO".to_string()]),
                ("NP".to_string(), vec!["NN".to_string(), "PRP$".to_string()]),
            ]
        );
        assert_eq!(trace.len(), 4);
    }

    #[test]
    fn empty_rule_set_is_noop() {
        let rules = ReorderRuleSet::default();
        let (out, trace) = reorder_tree(&worked_tree(), &rules);
        assert_eq!(out, worked_tree());
        assert!(trace.is_empty());
    }

    #[test]
    fn regenerates_identity_without_rules() {
        let tokens = worked_tokens();
        let (text, perm) = regenerate_sentence(&worked_tree(), &tokens);
        assert_eq!(text, "I bought vegetables to my home");
        assert_eq!(perm, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn table_style_single_swap() {
        let rules = parse_ruleset("VP -> VBD NP # VP -> NP VBD # 0:1,1:0").unwrap();
        let tree = ConstituencyTree::parse_ptb(
            "(S (NP (PRP I)) (VP (VBD saw) (NP (DT a) (JJ beautiful) (NN child))))",
        )
        .unwrap();
        let tokens: Vec<Token> = [
            ("I", "i", "PRP"),
            ("saw", "see", "VBD"),
            ("a", "a", "DT"),
            ("beautiful", "beautiful", "JJ"),
            ("child", "child", "NN"),
        ]
        .iter()
        .map(|(s, l, p)| Token::new(s, l, p))
        .collect();
        let (out, _) = reorder_tree(&tree, &rules);
        let (text, _) = regenerate_sentence(&out, &tokens);
        assert_eq!(text, "I a beautiful child saw");
    }

    #[test]
    fn paired_inverse_rules_restore_after_two_passes() {
        let text = "VP -> VBP PP # VP -> PP VBP # 0:1,1:0\n\
                    VP -> PP VBP # VP -> VBP PP # 0:1,1:0\n";
        let rules = parse_ruleset(text).unwrap();
        let tree =
            ConstituencyTree::parse_ptb("(VP (VBP stay) (PP (IN at) (NP (NN home))))").unwrap();
        let (once, _) = reorder_tree(&tree, &rules);
        assert_ne!(once.yield_indices(), tree.yield_indices());
        let (twice, _) = reorder_tree(&once, &rules);
        assert_eq!(twice.yield_indices(), tree.yield_indices());
    }

    #[test]
    fn sentence_rewrite_is_canonical() {
        let rules = parse_ruleset("VP -> VBD NP # VP -> NP VBD # 0:1,1:0").unwrap();
        let tree =
            ConstituencyTree::parse_ptb("(S (NP (PRP He)) (VP (VBD came) (NP (JJ last) (NN week))))")
                .unwrap();
        let tokens: Vec<Token> = [
            ("He", "he", "PRP"),
            ("came", "come", "VBD"),
            ("last", "last", "JJ"),
            ("week", "week", "NN"),
        ]
        .iter()
        .map(|(s, l, p)| Token::new(s, l, p))
        .collect();
        let deps = DependencyGraph::new(
            vec![
                DepEdge::new("root", None, 1),
                DepEdge::new("nsubj", Some(1), 0),
                DepEdge::new("amod", Some(3), 2),
                DepEdge::new("tmod", Some(1), 3),
            ],
            4,
        )
        .unwrap();
        let sentence = AnnotatedSentence::new("t", tokens, tree, deps).unwrap();
        let (reordered, _trace, perm) = reorder_sentence(&sentence, &rules);
        assert_eq!(perm, vec![0, 2, 3, 1]);
        assert_eq!(reordered.text(), "He last week came");
        // Canonical form: leaves are again in token order, edges remapped.
        assert_eq!(reordered.tree.yield_indices(), vec![0, 1, 2, 3]);
        assert_eq!(reordered.deps.root(), 3);
        let amod = reordered.deps.incoming(1).unwrap();
        assert_eq!(amod.rel, "amod");
        assert_eq!(amod.head, Some(2));
    }
}
