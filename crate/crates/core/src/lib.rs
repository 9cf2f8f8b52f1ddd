//! Source-side corpus pre-processing for translation into morphologically
//! rich, verb-final target languages.
//!
//! The library transforms syntactically annotated English sentences in three
//! stages: constituency-tree reordering driven by a production-rule DSL,
//! four-factor token factorization (`word|lemma|word-class|morphology`), and
//! dependency-triggered compounding that deletes function words and folds
//! them into the morphology factor of the governing content word. A small
//! evaluation module scores corpora with BLEU and a simplified METEOR so
//! pipeline variants can be compared.

pub mod compound;
pub mod corpus;
pub mod eval;
pub mod factor;
pub mod pipeline;
pub mod reorder;

pub use compound::{
    CompoundError, CompoundOutcome, CompoundRule, CompoundRuleError, CompoundRuleSet, Deletion,
    PngLexicon,
};
pub use corpus::{
    AnnotatedSentence, ConstituencyTree, DepEdge, DependencyGraph, FactoredToken, Token,
};
pub use eval::{BleuReport, CorpusStats, EvalError, MeteorReport, SmoothingPolicy};
pub use factor::PosSimplificationMap;
pub use reorder::{ReorderRule, ReorderRuleSet, RuleParseError};
