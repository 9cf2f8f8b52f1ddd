//! Per-sentence orchestration of the pre-processing stages:
//! reorder -> factorize -> compound -> integrate.
//!
//! Reordering is applied first and rewrites the sentence in canonical
//! form, so factorization and compounding see the reordered token order
//! and the final emission order is simply the surviving tokens. The
//! deletion trace is reported in original (pre-reorder) token indices.

use crate::compound::{
    compound_sentence, CompoundError, CompoundRuleSet, Deletion, PngLexicon,
};
use crate::corpus::{AnnotatedSentence, FactoredToken};
use crate::factor::{factorize_sentence, PosSimplificationMap};
use crate::reorder::{reorder_sentence, ReorderRuleSet};

/// Stage configuration shared across sentences. Absent rule sets disable
/// their stage; factorization always runs.
#[derive(Clone, Copy)]
pub struct Stages<'a> {
    pub reorder: Option<&'a ReorderRuleSet>,
    pub compound: Option<&'a CompoundRuleSet>,
    pub pos_map: &'a PosSimplificationMap,
    pub png: &'a PngLexicon,
}

/// Everything a caller needs to emit one processed sentence.
#[derive(Debug, Clone)]
pub struct ProcessedSentence {
    pub id: String,
    /// Surviving factored tokens in final (reordered, integrated) order.
    pub factored: Vec<FactoredToken>,
    /// Original-cased surfaces aligned with `factored`.
    pub surfaces: Vec<String>,
    /// The reordered sentence in canonical form (tokens permuted,
    /// edges remapped), before any deletion.
    pub reordered: AnnotatedSentence,
    /// Original token indices in final order (reorder permutation).
    pub permutation: Vec<usize>,
    /// Deletion trace in original token indices.
    pub deletions: Vec<Deletion>,
    pub rules_fired: usize,
    pub tokens_in: usize,
    pub unknown_pos: usize,
    pub png_fallbacks: usize,
}

pub fn process_sentence(
    sentence: &AnnotatedSentence,
    stages: &Stages<'_>,
) -> Result<ProcessedSentence, CompoundError> {
    let (reordered, trace, permutation) = match stages.reorder {
        Some(rules) => reorder_sentence(sentence, rules),
        None => (
            sentence.clone(),
            Vec::new(),
            (0..sentence.len()).collect(),
        ),
    };
    let unknown_pos = reordered
        .tokens
        .iter()
        .filter(|t| !stages.pos_map.is_known(&t.pos))
        .count();
    let factored = factorize_sentence(&reordered, stages.pos_map);
    let mut rules_fired = trace.len();
    let (survivors, deletions, png_fallbacks) = match stages.compound {
        Some(rules) => {
            let outcome = compound_sentence(&factored, &reordered, rules, stages.png)?;
            rules_fired += outcome.consumed_edges.len();
            (outcome.tokens, outcome.deletions, outcome.png_fallbacks)
        }
        None => (factored, Vec::new(), 0),
    };
    let deleted: std::collections::HashSet<usize> =
        deletions.iter().map(|d| d.deleted).collect();
    let surfaces: Vec<String> = reordered
        .tokens
        .iter()
        .enumerate()
        .filter(|(i, _)| !deleted.contains(i))
        .map(|(_, t)| t.surface.clone())
        .collect();
    // Report deletions in pre-reorder indices for the sidecar trace.
    let deletions = deletions
        .into_iter()
        .map(|d| Deletion {
            deleted: permutation[d.deleted],
            target: permutation[d.target],
            atom: d.atom,
            rule_id: d.rule_id,
        })
        .collect();
    Ok(ProcessedSentence {
        id: sentence.id.clone(),
        factored: survivors,
        surfaces,
        reordered,
        permutation,
        deletions,
        rules_fired,
        tokens_in: sentence.len(),
        unknown_pos,
        png_fallbacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compound::integrate;
    use crate::corpus::factored_line;
    use crate::corpus::read::JsonlReader;
    use crate::reorder::parse_ruleset;
    use std::io::Cursor;

    const WORKED: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/fixtures/worked_example.jsonl"
    ));
    const SAMPLE_RULES: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/rules/sample.rr"
    ));
    const DEFAULT_COMPOUND: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/rules/default.cr"
    ));

    fn worked_sentence() -> AnnotatedSentence {
        JsonlReader::new(Cursor::new(WORKED)).next().unwrap().unwrap()
    }

    #[test]
    fn full_pipeline_on_worked_example() {
        let reorder = parse_ruleset(SAMPLE_RULES).unwrap();
        let compound = CompoundRuleSet::parse(DEFAULT_COMPOUND).unwrap();
        let pos_map = PosSimplificationMap::default();
        let png = PngLexicon::default();
        let stages = Stages {
            reorder: Some(&reorder),
            compound: Some(&compound),
            pos_map: &pos_map,
            png: &png,
        };
        let out = process_sentence(&worked_sentence(), &stages).unwrap();
        assert_eq!(out.permutation, vec![0, 4, 5, 3, 2, 1]);
        assert_eq!(out.surfaces.join(" "), "I my home vegetables bought");
        assert_eq!(
            factored_line(&out.factored),
            "i|i|PRP|PRP_nsubj my|my|PRP|PRP$_poss home|home|N|NN_pobj_to \
             vegetables|vegetable|N|NNS_dobj bought|buy|V|VBD_1s"
        );
        assert_eq!(out.tokens_in, 6);
        assert_eq!(out.factored.len(), 5);
        assert_eq!(out.deletions.len(), 1);
        // Trace is reported in original token indices: "to" was token 3,
        // its fold target "home" token 5.
        assert_eq!(out.deletions[0].deleted, 3);
        assert_eq!(out.deletions[0].target, 5);
    }

    #[test]
    fn pipeline_matches_spec_level_integration() {
        // Compounding the unreordered sentence and integrating with the
        // reorder permutation gives the same surviving multiset and the
        // same final order as the canonical-rewrite pipeline.
        let reorder = parse_ruleset(SAMPLE_RULES).unwrap();
        let compound = CompoundRuleSet::parse(DEFAULT_COMPOUND).unwrap();
        let pos_map = PosSimplificationMap::default();
        let png = PngLexicon::default();
        let sentence = worked_sentence();

        let stages = Stages {
            reorder: Some(&reorder),
            compound: Some(&compound),
            pos_map: &pos_map,
            png: &png,
        };
        let piped = process_sentence(&sentence, &stages).unwrap();

        let factored = factorize_sentence(&sentence, &pos_map);
        let outcome = compound_sentence(&factored, &sentence, &compound, &png).unwrap();
        let merged = integrate(&outcome.tokens, &piped.permutation, &outcome.deletions).unwrap();
        assert_eq!(merged, piped.factored);
    }

    #[test]
    fn no_stages_is_plain_factorization() {
        let pos_map = PosSimplificationMap::default();
        let png = PngLexicon::default();
        let stages = Stages {
            reorder: None,
            compound: None,
            pos_map: &pos_map,
            png: &png,
        };
        let sentence = worked_sentence();
        let out = process_sentence(&sentence, &stages).unwrap();
        assert_eq!(out.permutation, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(out.surfaces.join(" "), sentence.text());
        assert_eq!(out.factored.len(), 6);
        assert!(out.deletions.is_empty());
    }
}
