//! End-to-end behavior of the `preflect` binary: exit codes, strictness,
//! stage composition, input formats, traces and scoring output.

use std::process::{Command, Output};

fn data(rel: &str) -> String {
    format!("{}/../../data/{rel}", env!("CARGO_MANIFEST_DIR"))
}

fn preflect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preflect"))
        .args(args)
        .env_remove("PREFLECT_WORKERS")
        .output()
        .unwrap()
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn preprocess_worked_example() {
    let out = preflect(&[
        "preprocess",
        "--in",
        &data("fixtures/worked_example.jsonl"),
        "--reorder",
        &data("rules/sample.rr"),
        "--compound",
        &data("rules/default.cr"),
        "--out",
        "factored",
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout_str(&out),
        "i|i|PRP|PRP_nsubj my|my|PRP|PRP$_poss home|home|N|NN_pobj_to \
         vegetables|vegetable|N|NNS_dobj bought|buy|V|VBD_1s\n"
    );
    let diagnostics = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(diagnostics.contains("tokens_in=6"));
    assert!(diagnostics.contains("tokens_out=5"));
    assert!(diagnostics.contains("deletions=1"));
}

#[test]
fn reorder_with_empty_rules_is_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.rr");
    std::fs::write(&empty, "// nothing\n").unwrap();
    let out = preflect(&[
        "reorder",
        "--in",
        &data("fixtures/table4.jsonl"),
        "--rules",
        empty.to_str().unwrap(),
        "--out",
        "plain",
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout_str(&out),
        "I saw a beautiful child\nHe came last week\nSharmi gave her book to Arthi\n\
         She went to shop for buying fruits\nCat is sleeping on the table\n"
    );
}

#[test]
fn preprocess_equals_stage_composition() {
    let dir = tempfile::tempdir().unwrap();
    let reordered = dir.path().join("reordered.jsonl");
    let out = preflect(&[
        "reorder",
        "--in",
        &data("fixtures/table4.jsonl"),
        "--rules",
        &data("rules/sample.rr"),
        "--out",
        "jsonl",
    ]);
    assert!(out.status.success());
    std::fs::write(&reordered, &out.stdout).unwrap();

    let composed = preflect(&[
        "compound",
        "--in",
        reordered.to_str().unwrap(),
        "--rules",
        &data("rules/default.cr"),
        "--out",
        "factored",
    ]);
    assert!(composed.status.success());

    let direct = preflect(&[
        "preprocess",
        "--in",
        &data("fixtures/table4.jsonl"),
        "--reorder",
        &data("rules/sample.rr"),
        "--compound",
        &data("rules/default.cr"),
        "--out",
        "factored",
    ]);
    assert!(direct.status.success());
    assert_eq!(stdout_str(&composed), stdout_str(&direct));
}

#[test]
fn factor_only_matches_preprocess_without_rules() {
    let factor = preflect(&["factor", "--in", &data("fixtures/worked_example.jsonl")]);
    let preprocess = preflect(&[
        "preprocess",
        "--in",
        &data("fixtures/worked_example.jsonl"),
    ]);
    assert!(factor.status.success());
    assert_eq!(stdout_str(&factor), stdout_str(&preprocess));
    assert_eq!(
        stdout_str(&factor),
        "i|i|PRP|PRP_nsubj bought|buy|V|VBD vegetables|vegetable|N|NNS_dobj \
         to|to|PRE|TO_prep my|my|PRP|PRP$_poss home|home|N|NN_pobj\n"
    );
}

#[test]
fn ptbconll_input_is_supported() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("trees.ptb");
    let conll = dir.path().join("deps.conll");
    std::fs::write(&trees, "(S (NP (PRP I)) (VP (VBD slept)))\n").unwrap();
    std::fs::write(
        &conll,
        "1\tI\ti\tPRP\tPRP\t_\t2\tnsubj\t_\t_\n2\tslept\tsleep\tVBD\tVBD\t_\t0\troot\t_\t_\n\n",
    )
    .unwrap();
    let out = preflect(&[
        "factor",
        "--in",
        trees.to_str().unwrap(),
        "--format",
        "ptbconll",
        "--deps",
        conll.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_str(&out), "i|i|PRP|PRP_nsubj slept|sleep|V|VBD\n");
}

#[test]
fn trace_sidecar_records_deletions() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let out = preflect(&[
        "preprocess",
        "--in",
        &data("fixtures/worked_example.jsonl"),
        "--reorder",
        &data("rules/sample.rr"),
        "--compound",
        &data("rules/default.cr"),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let trace: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(trace).unwrap().trim()).unwrap();
    assert_eq!(trace["sentence"], "worked-example");
    assert_eq!(trace["original_index"], 3);
    assert_eq!(trace["target_index"], 5);
    assert_eq!(trace["atom"], "to");
    assert_eq!(trace["rule"], "prep-fold");
}

#[test]
fn config_errors_exit_2() {
    let out = preflect(&[
        "preprocess",
        "--in",
        "/nonexistent/input.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad_rules = dir.path().join("bad.rr");
    std::fs::write(&bad_rules, "VP -> VBD NP# VP -> NP VBD# 0:0,1:0\n").unwrap();
    let out = preflect(&[
        "reorder",
        "--in",
        &data("fixtures/worked_example.jsonl"),
        "--rules",
        bad_rules.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bijection"));
}

#[test]
fn data_errors_abort_with_1_or_skip_with_flag() {
    let dir = tempfile::tempdir().unwrap();
    let mixed = dir.path().join("mixed.jsonl");
    let good = std::fs::read_to_string(data("fixtures/worked_example.jsonl")).unwrap();
    std::fs::write(&mixed, format!("not json\n{good}")).unwrap();

    let strict = preflect(&["factor", "--in", mixed.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(1));

    let lenient = preflect(&["factor", "--in", mixed.to_str().unwrap(), "--skip-bad"]);
    assert_eq!(lenient.status.code(), Some(0));
    assert_eq!(stdout_str(&lenient).lines().count(), 1);
    let diagnostics = String::from_utf8_lossy(&lenient.stderr).to_string();
    assert!(diagnostics.contains("skipped=1"));
}

#[test]
fn self_score_is_one() {
    let out = preflect(&[
        "score",
        "bleu",
        "--hyp",
        &data("fixtures/table4.expected"),
        "--ref",
        &data("fixtures/table4.expected"),
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("bleu: 1.0000000000 (x100: 100.00)"), "{text}");

    let mismatched = preflect(&[
        "score",
        "bleu",
        "--hyp",
        &data("fixtures/table4.expected"),
        "--ref",
        &data("fixtures/worked_example.jsonl"),
    ]);
    assert_eq!(mismatched.status.code(), Some(1));
}

#[test]
fn score_on_lemma_factor() {
    let dir = tempfile::tempdir().unwrap();
    let factored = dir.path().join("factored.txt");
    let out = preflect(&[
        "preprocess",
        "--in",
        &data("fixtures/worked_example.jsonl"),
        "--compound",
        &data("rules/default.cr"),
    ]);
    assert!(out.status.success());
    std::fs::write(&factored, &out.stdout).unwrap();
    let scored = preflect(&[
        "score",
        "meteor",
        "--hyp",
        factored.to_str().unwrap(),
        "--ref",
        factored.to_str().unwrap(),
        "--factor",
        "1",
        "--mode",
        "lemma",
    ]);
    assert!(scored.status.success());
    let text = stdout_str(&scored);
    assert!(text.contains("mode: lemma"));
    assert!(text.contains("matches: 5 chunks: 1"), "{text}");
}

#[test]
fn stats_reports_factor_vocabulary() {
    let out = preflect(&["stats", "--in", &data("fixtures/table4.expected")]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("sentences: 5"));
    assert!(text.contains("tokens: 28"));
    assert!(text.contains("vocab_factor_0: 27"), "{text}");
}

#[test]
fn validate_rules_reports_ok_and_failures() {
    let ok = preflect(&[
        "validate-rules",
        "--reorder",
        &data("rules/sample.rr"),
        "--compound",
        &data("rules/default.cr"),
        "--png-lexicon",
        &data("lexicon/png.lex"),
    ]);
    assert!(ok.status.success());
    let text = stdout_str(&ok);
    assert!(text.contains("reorder rules"));
    assert!(text.contains("ok (14 rules)"));
    assert!(text.contains("ok (5 rules)"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cr");
    std::fs::write(&bad, "x: dobj dep_pos=NN -> head fold_surface delete\n").unwrap();
    let fail = preflect(&["validate-rules", "--compound", bad.to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(2));

    let nothing = preflect(&["validate-rules"]);
    assert_eq!(nothing.status.code(), Some(2));
}

#[test]
fn workers_env_overrides_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_preflect"))
        .args([
            "factor",
            "--in",
            &data("fixtures/table4.jsonl"),
            "--workers",
            "1",
        ])
        .env("PREFLECT_WORKERS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PREFLECT_WORKERS"));
}

#[test]
fn plain_output_keeps_original_casing() {
    let out = preflect(&[
        "preprocess",
        "--in",
        &data("fixtures/worked_example.jsonl"),
        "--reorder",
        &data("rules/sample.rr"),
        "--compound",
        &data("rules/default.cr"),
        "--out",
        "plain",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_str(&out), "I my home vegetables bought\n");
}

#[test]
fn missing_deps_flag_for_ptbconll_is_config_error() {
    let out = preflect(&[
        "factor",
        "--in",
        &data("fixtures/worked_example.jsonl"),
        "--format",
        "ptbconll",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
