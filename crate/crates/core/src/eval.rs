//! Corpus scoring: BLEU (modified n-gram precision with a brevity
//! penalty), a simplified exact-match METEOR, and corpus statistics.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("hypothesis corpus has {hyps} segments but reference has {refs}")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("empty corpus")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothingPolicy {
    /// A zero precision at any order zeroes the cumulative score.
    #[default]
    None,
    /// Adds one to numerator and denominator of the n >= 2 precisions.
    Add1,
}

impl fmt::Display for SmoothingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmoothingPolicy::None => "none",
            SmoothingPolicy::Add1 => "add1",
        })
    }
}

/// Raw clipped counts for one n-gram order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramCounts {
    pub matched: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    /// Clipped counts per order, index 0 holding unigrams.
    pub per_n: Vec<NgramCounts>,
    pub brevity_penalty: f64,
    pub cumulative: f64,
    pub hyp_length: usize,
    pub ref_length: usize,
    pub smoothing: SmoothingPolicy,
}

impl BleuReport {
    /// Modified n-gram precision at order `n` (1-based) under the report's
    /// smoothing policy. An order with no hypothesis n-grams reports 0.
    pub fn precision(&self, n: usize) -> f64 {
        let c = self.per_n[n - 1];
        if c.total == 0 {
            return 0.0;
        }
        match self.smoothing {
            SmoothingPolicy::Add1 if n >= 2 => (c.matched + 1) as f64 / (c.total + 1) as f64,
            _ => c.matched as f64 / c.total as f64,
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts: HashMap<&[String], u64> = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU over aligned single-reference segments. Clipped
/// n-gram counts are summed across the corpus for n = 1..=max_n; the
/// cumulative score is the brevity penalty times the geometric mean of
/// the precisions at the orders where hypothesis n-grams exist.
pub fn bleu(
    hypotheses: &[Vec<String>],
    references: &[Vec<String>],
    max_n: usize,
    smoothing: SmoothingPolicy,
) -> Result<BleuReport, EvalError> {
    if hypotheses.len() != references.len() {
        return Err(EvalError::LengthMismatch {
            hyps: hypotheses.len(),
            refs: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut per_n = vec![NgramCounts { matched: 0, total: 0 }; max_n];
    let mut hyp_length = 0usize;
    let mut ref_length = 0usize;
    for (hyp, reference) in hypotheses.iter().zip(references) {
        hyp_length += hyp.len();
        ref_length += reference.len();
        for n in 1..=max_n {
            let ref_counts = ngram_counts(reference, n);
            for (gram, count) in ngram_counts(hyp, n) {
                let clip = ref_counts.get(gram).copied().unwrap_or(0);
                per_n[n - 1].matched += count.min(clip);
            }
            per_n[n - 1].total += hyp.len().saturating_sub(n - 1).min(hyp.len()) as u64;
        }
    }
    let brevity_penalty = if hyp_length == 0 {
        0.0
    } else if hyp_length < ref_length {
        (1.0 - ref_length as f64 / hyp_length as f64).exp()
    } else {
        1.0
    };
    let mut report = BleuReport {
        per_n,
        brevity_penalty,
        cumulative: 0.0,
        hyp_length,
        ref_length,
        smoothing,
    };
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    let mut zero = false;
    for n in 1..=max_n {
        if report.per_n[n - 1].total == 0 {
            continue;
        }
        let p = report.precision(n);
        if p == 0.0 {
            zero = true;
            break;
        }
        log_sum += p.ln();
        orders += 1;
    }
    if !zero && orders > 0 {
        report.cumulative = brevity_penalty * (log_sum / orders as f64).exp();
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    Surface,
    Lemma,
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Surface => "surface",
            MatchMode::Lemma => "lemma",
        })
    }
}

#[derive(Debug, Clone)]
pub struct MeteorReport {
    pub precision: f64,
    pub recall: f64,
    pub f_mean: f64,
    pub fragmentation_penalty: f64,
    pub score: f64,
    pub match_mode: MatchMode,
    pub matches: u64,
    pub chunks: u64,
    pub hyp_length: usize,
    pub ref_length: usize,
}

/// Simplified METEOR: exact unigram alignment that maximizes matches and
/// then minimizes chunks, aggregated over the corpus before the recall-
/// weighted harmonic mean and the cube fragmentation penalty are applied.
/// In lemma mode the caller passes lemma tokens; the matching itself is
/// always exact.
pub fn meteor_lite(
    hypotheses: &[Vec<String>],
    references: &[Vec<String>],
    mode: MatchMode,
) -> Result<MeteorReport, EvalError> {
    if hypotheses.len() != references.len() {
        return Err(EvalError::LengthMismatch {
            hyps: hypotheses.len(),
            refs: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut matches = 0u64;
    let mut chunks = 0u64;
    let mut hyp_length = 0usize;
    let mut ref_length = 0usize;
    for (hyp, reference) in hypotheses.iter().zip(references) {
        hyp_length += hyp.len();
        ref_length += reference.len();
        let (m, c) = align(hyp, reference);
        matches += m;
        chunks += c;
    }
    let mut report = MeteorReport {
        precision: 0.0,
        recall: 0.0,
        f_mean: 0.0,
        fragmentation_penalty: 0.0,
        score: 0.0,
        match_mode: mode,
        matches,
        chunks,
        hyp_length,
        ref_length,
    };
    if matches > 0 {
        let p = matches as f64 / hyp_length as f64;
        let r = matches as f64 / ref_length as f64;
        report.precision = p;
        report.recall = r;
        report.f_mean = 10.0 * p * r / (r + 9.0 * p);
        report.fragmentation_penalty = 0.5 * (chunks as f64 / matches as f64).powi(3);
        report.score = report.f_mean * (1.0 - report.fragmentation_penalty);
    }
    Ok(report)
}

/// Aligns one segment pair: returns (matches, chunks) where matches is the
/// maximum number of exact unigram matches and chunks is the minimum
/// number of runs contiguous in both sentences over such matchings.
/// Search is branch-and-bound seeded with a greedy solution; pathological
/// segments fall back to the greedy chunk count once a node budget runs
/// out, which keeps the result deterministic.
fn align(hyp: &[String], reference: &[String]) -> (u64, u64) {
    let mut ref_positions: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, w) in reference.iter().enumerate() {
        ref_positions.entry(w).or_default().push(j);
    }
    let mut hyp_counts: HashMap<&str, u64> = HashMap::new();
    for w in hyp {
        *hyp_counts.entry(w).or_insert(0) += 1;
    }
    let max_matches: u64 = hyp_counts
        .iter()
        .map(|(w, c)| (*c).min(ref_positions.get(*w).map_or(0, |v| v.len() as u64)))
        .sum();
    if max_matches == 0 {
        return (0, 0);
    }
    let greedy = greedy_chunks(hyp, &ref_positions);
    let mut search = AlignSearch {
        hyp,
        ref_positions: &ref_positions,
        used: vec![false; reference.len()],
        hyp_remaining: hyp_counts.clone(),
        ref_remaining: ref_positions
            .iter()
            .map(|(w, v)| (*w, v.len() as u64))
            .collect(),
        potential: max_matches,
        max_matches,
        best: greedy,
        nodes: 0,
    };
    search.recurse(0, 0, 0, None);
    (max_matches, search.best)
}

/// Leftmost-chaining greedy matching; always achieves maximum matches and
/// supplies the initial chunk bound.
fn greedy_chunks(hyp: &[String], ref_positions: &HashMap<&str, Vec<usize>>) -> u64 {
    let mut used: HashMap<&str, usize> = HashMap::new();
    let mut chunks = 0u64;
    let mut last: Option<(usize, usize)> = None;
    for (i, w) in hyp.iter().enumerate() {
        let positions = match ref_positions.get(w.as_str()) {
            Some(p) => p,
            None => continue,
        };
        let next = used.entry(w).or_insert(0);
        if *next >= positions.len() {
            continue;
        }
        let j = positions[*next];
        *next += 1;
        if last != Some((i.wrapping_sub(1), j.wrapping_sub(1))) {
            chunks += 1;
        }
        last = Some((i, j));
    }
    chunks
}

const ALIGN_NODE_BUDGET: u64 = 1 << 20;

struct AlignSearch<'a> {
    hyp: &'a [String],
    ref_positions: &'a HashMap<&'a str, Vec<usize>>,
    used: Vec<bool>,
    hyp_remaining: HashMap<&'a str, u64>,
    ref_remaining: HashMap<&'a str, u64>,
    potential: u64,
    max_matches: u64,
    best: u64,
    nodes: u64,
}

impl<'a> AlignSearch<'a> {
    fn recurse(&mut self, i: usize, matched: u64, chunks: u64, last: Option<(usize, usize)>) {
        if chunks >= self.best || matched + self.potential < self.max_matches {
            return;
        }
        if self.nodes >= ALIGN_NODE_BUDGET {
            return;
        }
        self.nodes += 1;
        if i == self.hyp.len() {
            if matched == self.max_matches {
                self.best = chunks;
            }
            return;
        }
        let word = self.hyp[i].as_str();
        if let Some(positions) = self.ref_positions.get(word) {
            if self.ref_remaining[word] > 0 {
                // Prefer chaining onto the previous match so good solutions
                // are found early and prune the rest.
                let chain = last.and_then(|(lh, lr)| {
                    (lh + 1 == i && positions.binary_search(&(lr + 1)).is_ok())
                        .then_some(lr + 1)
                });
                let candidates = chain
                    .into_iter()
                    .chain(positions.iter().copied().filter(|&j| Some(j) != chain));
                for j in candidates {
                    if self.used[j] {
                        continue;
                    }
                    let new_chunks = match last {
                        Some((lh, lr)) if lh + 1 == i && lr + 1 == j => chunks,
                        _ => chunks + 1,
                    };
                    self.used[j] = true;
                    *self.hyp_remaining.get_mut(word).unwrap() -= 1;
                    *self.ref_remaining.get_mut(word).unwrap() -= 1;
                    self.potential -= 1;
                    self.recurse(i + 1, matched + 1, new_chunks, Some((i, j)));
                    self.potential += 1;
                    *self.ref_remaining.get_mut(word).unwrap() += 1;
                    *self.hyp_remaining.get_mut(word).unwrap() += 1;
                    self.used[j] = false;
                }
            }
        }
        // Skip this hypothesis word. The match potential drops only when
        // the reference could still have absorbed this occurrence.
        let remaining = {
            let h = self.hyp_remaining.get_mut(word).unwrap();
            *h -= 1;
            *h
        };
        let capacity = self.ref_remaining.get(word).copied().unwrap_or(0);
        let decrement = remaining < capacity;
        if decrement {
            self.potential -= 1;
        }
        self.recurse(i + 1, matched, chunks, last);
        if decrement {
            self.potential += 1;
        }
        *self.hyp_remaining.get_mut(word).unwrap() += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub sentences: usize,
    pub tokens: usize,
    pub mean_length: f64,
    /// Distinct values per factor position, widest token deciding the
    /// number of positions.
    pub vocab_per_factor: Vec<usize>,
}

/// Exact counts over a corpus of factor-vector tokens. Plain corpora are
/// the single-factor case.
pub fn corpus_stats<I>(corpus: I) -> CorpusStats
where
    I: IntoIterator<Item = Vec<Vec<String>>>,
{
    let mut sentences = 0usize;
    let mut tokens = 0usize;
    let mut vocab: Vec<std::collections::HashSet<String>> = Vec::new();
    for sentence in corpus {
        sentences += 1;
        tokens += sentence.len();
        for token in sentence {
            if token.len() > vocab.len() {
                vocab.resize_with(token.len(), Default::default);
            }
            for (k, factor) in token.into_iter().enumerate() {
                vocab[k].insert(factor);
            }
        }
    }
    CorpusStats {
        sentences,
        tokens,
        mean_length: if sentences == 0 {
            0.0
        } else {
            tokens as f64 / sentences as f64
        },
        vocab_per_factor: vocab.iter().map(|s| s.len()).collect(),
    }
}
