//! Acceptance suite. Each `criterion_*` test checks one gate condition and
//! prints a PASS line (visible with `--nocapture`); cargo's own per-test
//! output gives the one-line pass/fail status per criterion.

use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestCaseError, TestRunner};

use acr_eval::analysis::{
    aggregate, average_across_datasets, compare_rankings, histogram, relative_improvement,
    HistogramSpec, ModelSummary, QuestionWords,
};
use acr_eval::corpus::Task;
use acr_eval::metrics::edit::{distance, distance_with_script};
use acr_eval::metrics::{
    edit_distance, edit_progress, exact_match, normalized_edit_distance, token_edit_distance,
    EpScore, MetricRow,
};
use acr_eval::tokenize::{
    abstract_code, deabstract, lex, AbstractionMap, BpeModel, LexerProfile, Token, TokenKind,
    TokenSequence,
};

/// Tolerance for replaying one-decimal table cells: the display rounding
/// absorbs up to 0.05, plus a guard for binary representation of the
/// decimal fixtures.
const CELL_TOLERANCE: f64 = 0.05 + 1e-9;

fn seq(code: &str) -> TokenSequence {
    lex(code, &LexerProfile::java()).unwrap()
}

fn seq_from_texts(texts: &[String]) -> TokenSequence {
    TokenSequence::new(
        texts
            .iter()
            .map(|t| Token::new(t.clone(), TokenKind::Ident, 0, 0))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Criterion 1: worked-example golden values
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_worked_example_golden_values() {
    let started = Instant::now();

    let submitted = seq("public static double hypot(double x, double y)");
    let truth = seq("public static double cosh(double x)");
    let (d, script) = edit_distance(&submitted, &truth);
    assert_eq!(d, 4, "baseline edit distance must be exactly 4");
    assert_eq!(script.apply(&submitted.texts()), truth.texts());

    // Prediction 1 applied only the rename; three deletions remain.
    let rename_only = seq("public static double cosh(double x, double y)");
    assert_eq!(token_edit_distance(&rename_only, &truth), 3);
    let ep1 = edit_progress(&submitted, &truth, &rename_only);
    assert_eq!(ep1, EpScore::Percent(25.0), "prediction 1 must score 25%");

    // Prediction 2 left a single stray parameter token.
    let near_complete = seq("public static double cosh(double x y)");
    assert_eq!(token_edit_distance(&near_complete, &truth), 1);
    let ep2 = edit_progress(&submitted, &truth, &near_complete);
    assert_eq!(ep2, EpScore::Percent(75.0), "prediction 2 must score 75%");

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "golden test must finish in under 1s, took {elapsed:?}"
    );
    println!("ACCEPTANCE PASS: criterion 1 - worked example: distance 4, EP 25% / 75% exact ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// Criterion 2: aggregation replay of the published result tables
// ---------------------------------------------------------------------------

fn fixture(name: &str, em: f64, ep: f64) -> ModelSummary {
    ModelSummary {
        model_name: name.to_string(),
        n_instances: 1,
        em_pct: Some(em),
        ep_pct: Some(ep),
        ep_skipped: 0,
        bleu_pct: None,
        mean_ned: None,
    }
}

/// Per-dataset EM/EP cells and the published "Average" column for the code
/// revision before review benchmark (three datasets).
const CRB_CELLS: &[(&str, [f64; 3], [f64; 3], f64, f64)] = &[
    (
        "Trans-Review",
        [3.5, 0.1, 0.1],
        [-1.1, -16.6, -151.2],
        1.2,
        -56.3,
    ),
    (
        "AutoTransform",
        [6.6, 10.2, 0.8],
        [49.7, 29.9, 9.7],
        5.9,
        29.8,
    ),
    (
        "T5-Review",
        [7.4, 13.9, 3.3],
        [-14.9, -71.5, 13.8],
        8.2,
        -24.2,
    ),
    ("CodeBERT", [8.3, 8.6, 1.1], [49.8, -75.3, 22.3], 6.0, -1.1),
    (
        "GraphCodeBERT",
        [6.7, 6.1, 0.9],
        [50.6, -80.9, 22.6],
        4.6,
        -2.6,
    ),
    ("CodeT5", [8.8, 13.7, 5.4], [41.8, -67.8, 25.6], 9.3, -0.1),
];

/// Same layout for the code revision after review benchmark (two datasets).
const CRA_CELLS: &[(&str, [f64; 2], [f64; 2], f64, f64)] = &[
    ("Trans-Review", [13.5, 0.3], [52.5, -120.4], 6.9, -34.0),
    ("T5-Review", [24.4, 9.0], [65.6, 38.4], 16.7, 52.0),
    ("CodeBERT", [20.2, 11.3], [57.8, 35.2], 15.8, 46.5),
    ("GraphCodeBERT", [19.2, 11.8], [55.9, 35.8], 15.5, 45.9),
    ("CodeT5", [30.2, 16.1], [66.8, 41.9], 23.2, 54.4),
];

fn assert_average<const N: usize>(
    name: &str,
    em_cells: [f64; N],
    ep_cells: [f64; N],
    em_avg: f64,
    ep_avg: f64,
) -> ModelSummary {
    let per_dataset: Vec<ModelSummary> = em_cells
        .iter()
        .zip(&ep_cells)
        .map(|(&em, &ep)| fixture(name, em, ep))
        .collect();
    let averaged = average_across_datasets(name, &per_dataset).unwrap();
    let em = averaged.em_pct.unwrap();
    let ep = averaged.ep_pct.unwrap();
    assert!(
        (em - em_avg).abs() <= CELL_TOLERANCE,
        "{name}: EM average {em} vs published {em_avg}"
    );
    assert!(
        (ep - ep_avg).abs() <= CELL_TOLERANCE,
        "{name}: EP average {ep} vs published {ep_avg}"
    );
    averaged
}

#[test]
fn criterion_2_aggregation_replays_published_averages() {
    let started = Instant::now();
    let mut cells = 0;
    for (name, em_cells, ep_cells, em_avg, ep_avg) in CRB_CELLS {
        assert_average(name, *em_cells, *ep_cells, *em_avg, *ep_avg);
        cells += 2;
    }
    for (name, em_cells, ep_cells, em_avg, ep_avg) in CRA_CELLS {
        assert_average(name, *em_cells, *ep_cells, *em_avg, *ep_avg);
        cells += 2;
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "aggregation replay must finish in under 1s, took {elapsed:?}"
    );
    println!(
        "ACCEPTANCE PASS: criterion 2 - {cells} published average cells reproduced within +/-0.05 ({elapsed:?})"
    );
}

/// Companion check on the same fixtures: the two metrics rank the models
/// differently, with the EM winner not winning under EP.
#[test]
fn table_fixture_rankings_flip_between_metrics() {
    let averages: Vec<ModelSummary> = CRB_CELLS
        .iter()
        .map(|(name, em_cells, ep_cells, _, _)| {
            let per_dataset: Vec<ModelSummary> = em_cells
                .iter()
                .zip(ep_cells)
                .map(|(&em, &ep)| fixture(name, em, ep))
                .collect();
            average_across_datasets(name, &per_dataset).unwrap()
        })
        .collect();
    let ranking = compare_rankings(&averages, Task::Crb);
    assert_eq!(ranking.em_order[0], "CodeT5");
    assert_eq!(ranking.ep_order[0], "AutoTransform");
    assert!(
        !ranking.ep_order[..3].contains(&"CodeT5".to_string())
            || ranking.em_order[0] != ranking.ep_order[0]
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: relative-improvement arithmetic replay
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_relative_improvement_replay() {
    let cases = [
        (8.8, 7.4, 18.9),
        (5.4, 3.3, 63.6),
        (30.2, 24.4, 23.8),
        (16.1, 9.0, 78.9),
    ];
    for (new_score, old_score, published) in cases {
        let got = relative_improvement(new_score, old_score).unwrap();
        assert!(
            (got - published).abs() <= CELL_TOLERANCE,
            "({new_score}, {old_score}): got {got}, published {published}"
        );
    }
    println!("ACCEPTANCE PASS: criterion 3 - relative improvements 18.9/63.6/23.8/78.9 reproduced");
}

// ---------------------------------------------------------------------------
// Criterion 4: exhaustive oracle equivalence
// ---------------------------------------------------------------------------

/// The recursive definition of Levenshtein distance, evaluated directly
/// with no memoization. Independent of the DP implementation under test.
fn oracle_distance(a: &[u8], b: &[u8]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let substitute = oracle_distance(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
    let delete = oracle_distance(&a[1..], b) + 1;
    let insert = oracle_distance(a, &b[1..]) + 1;
    substitute.min(delete).min(insert)
}

fn all_sequences(alphabet: &[u8], max_len: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &frontier {
            for &c in alphabet {
                let mut s = prefix.clone();
                s.push(c);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn criterion_4_dp_matches_exhaustive_oracle() {
    let started = Instant::now();
    let sequences = all_sequences(b"abc", 5);
    assert_eq!(sequences.len(), 364);
    let mut pairs = 0usize;
    for a in &sequences {
        for b in &sequences {
            let expected = oracle_distance(a, b);
            assert_eq!(
                distance(a, b),
                expected,
                "rolling DP disagrees with oracle on {a:?} vs {b:?}"
            );
            let (with_script, script) = distance_with_script(a, b);
            assert_eq!(
                with_script, expected,
                "matrix DP disagrees with oracle on {a:?} vs {b:?}"
            );
            assert_eq!(script.cost, expected);
            pairs += 1;
        }
    }
    assert_eq!(pairs, 364 * 364);
    assert!(pairs >= 4096);
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "oracle sweep must finish in under 30s, took {elapsed:?}"
    );
    println!(
        "ACCEPTANCE PASS: criterion 4 - {pairs} pairs agree with the recursive oracle ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: randomized property suites, 1000 cases each
// ---------------------------------------------------------------------------

fn arb_tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::string::string_regex("[abc]{1,3}").unwrap(), 0..12)
}

fn arb_code() -> impl Strategy<Value = String> {
    let token = prop_oneof![
        Just("foo"),
        Just("bar"),
        Just("Baz"),
        Just("x"),
        Just("int"),
        Just("new"),
        Just("42"),
        Just("3.14"),
        Just("\"lit\""),
        Just("'c'"),
        Just("("),
        Just(")"),
        Just(";"),
        Just(","),
        Just("."),
        Just("="),
        Just("+"),
        Just("// note\n"),
        Just("/* block */"),
    ];
    prop::collection::vec(token, 0..30).prop_map(|ts| ts.join(" "))
}

fn run_suite<S: Strategy>(
    name: &str,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
    failures: &mut Vec<String>,
) {
    let mut runner = TestRunner::new(PtConfig {
        cases: 1000,
        failure_persistence: None,
        ..PtConfig::default()
    });
    match runner.run(&strategy, check) {
        Ok(()) => println!("  property suite `{name}`: 1000 cases ok"),
        Err(e) => failures.push(format!("{name}: {e}")),
    }
}

#[test]
fn criterion_5_property_suites() {
    let mut failures = Vec::new();

    run_suite(
        "edit-distance metric axioms",
        (arb_tokens(), arb_tokens(), arb_tokens()),
        |(a, b, c)| {
            prop_assert_eq!(distance(&a, &a), 0);
            prop_assert_eq!(distance(&a, &b), distance(&b, &a));
            prop_assert!(distance(&a, &c) <= distance(&a, &b) + distance(&b, &c));
            let d = distance(&a, &b);
            prop_assert!(d >= a.len().abs_diff(b.len()) && d <= a.len().max(b.len()));
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "edit-script replay",
        (arb_tokens(), arb_tokens()),
        |(a, b)| {
            let (d, script) = distance_with_script(&a, &b);
            prop_assert_eq!(script.apply(&a), b);
            prop_assert_eq!(script.cost, d);
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "em=1 iff distance 0 implies ep=100%",
        (arb_tokens(), arb_tokens(), arb_tokens()),
        |(sub, truth, pred)| {
            let (sub, truth, pred) = (
                seq_from_texts(&sub),
                seq_from_texts(&truth),
                seq_from_texts(&pred),
            );
            let em = exact_match(&pred, &truth);
            prop_assert_eq!(em == 1, token_edit_distance(&pred, &truth) == 0);
            if em == 1 {
                match edit_progress(&sub, &truth, &pred) {
                    EpScore::Percent(p) => prop_assert_eq!(p, 100.0),
                    EpScore::Skipped => {
                        prop_assert_eq!(token_edit_distance(&sub, &truth), 0)
                    }
                }
            }
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "ep of a copied input is 0%",
        (arb_tokens(), arb_tokens()),
        |(sub, truth)| {
            let (sub, truth) = (seq_from_texts(&sub), seq_from_texts(&truth));
            match edit_progress(&sub, &truth, &sub) {
                EpScore::Percent(p) => prop_assert_eq!(p, 0.0),
                EpScore::Skipped => prop_assert_eq!(token_edit_distance(&sub, &truth), 0),
            }
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "ned in [0,1]",
        ("\\PC{0,40}", "\\PC{0,40}"),
        |(x, y): (String, String)| {
            let ned = normalized_edit_distance(&x, &y);
            prop_assert!((0.0..=1.0).contains(&ned));
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "bpe reconstruction concat(subtokens) = token",
        (
            prop::collection::vec("\\PC{1,8}", 1..12),
            0usize..20,
            "\\PC{1,12}",
        ),
        |(tokens, merges, probe)| {
            let corpus = seq_from_texts(&tokens);
            let model = BpeModel::train(std::slice::from_ref(&corpus), merges).unwrap();
            for token in &tokens {
                prop_assert_eq!(model.apply_token(token).concat(), token.clone());
            }
            prop_assert_eq!(model.apply_token(&probe).concat(), probe);
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "abstraction round-trip",
        arb_code(),
        |code| {
            let seq = lex(&code, &LexerProfile::java()).unwrap();
            let (abstracted, map) = abstract_code(&seq, &AbstractionMap::new());
            let restored = deabstract(&abstracted, &map).unwrap();
            prop_assert_eq!(restored.texts(), seq.texts());
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "histogram count conservation",
        (
            prop::collection::vec(
                prop_oneof![(-500.0f64..=100.0).prop_map(Some), Just(None)],
                0..40,
            ),
            0.5f64..40.0,
            -250.0f64..=50.0,
        ),
        |(eps, bin_width, floor)| {
            let rows: Vec<MetricRow> = eps
                .iter()
                .enumerate()
                .map(|(i, ep)| MetricRow {
                    ep: Some(ep.map_or(EpScore::Skipped, EpScore::Percent)),
                    ..MetricRow::new(format!("i{i}"))
                })
                .collect();
            let bins = histogram(&rows, &HistogramSpec { bin_width, floor }).unwrap();
            let binned: u64 = bins.bins.iter().map(|b| b.count).sum();
            prop_assert_eq!(binned + bins.omitted_below_floor, bins.total);
            prop_assert_eq!(
                bins.total,
                eps.iter().filter(|e| e.is_some()).count() as u64
            );
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "ranking orders are permutations of the model set",
        prop::collection::vec((0.0f64..100.0, -200.0f64..100.0), 2..8),
        |scores| {
            let summaries: Vec<ModelSummary> = scores
                .iter()
                .enumerate()
                .map(|(i, (em, ep))| fixture(&format!("model{i}"), *em, *ep))
                .collect();
            let ranking = compare_rankings(&summaries, Task::Crb);
            let mut names: Vec<String> = summaries.iter().map(|s| s.model_name.clone()).collect();
            names.sort();
            let mut em_sorted = ranking.em_order.clone();
            em_sorted.sort();
            let mut ep_sorted = ranking.ep_order.clone();
            ep_sorted.sort();
            prop_assert_eq!(em_sorted, names.clone());
            prop_assert_eq!(ep_sorted, names);
            Ok(())
        },
        &mut failures,
    );

    assert!(
        failures.is_empty(),
        "property suites failed:\n{}",
        failures.join("\n")
    );
    println!("ACCEPTANCE PASS: criterion 5 - 9 property suites x 1000 cases all pass");
}

// ---------------------------------------------------------------------------
// Criterion 6: interrogative classifier fixture
// ---------------------------------------------------------------------------

/// Twenty hand-labeled review comments, including word-boundary traps
/// ("whatever", "somewhat", "shows", "doesn't") that must not match.
const LABELED_COMMENTS: &[(&str, bool)] = &[
    ("why is there a newArrayList?", true),
    ("Whatever you did here is fine", false),
    ("looks good to me", false),
    ("What does this method return", true),
    ("Please rename this variable", false),
    ("Is this thread-safe?", true),
    ("nit: extra whitespace", false),
    ("where is this constant defined", true),
    ("The wherewithal is impressive", false),
    ("which overload is intended here", true),
    ("use a switch statement instead", false),
    ("does this handle null inputs", true),
    ("this doesn't handle null", false),
    ("when is the cache invalidated", true),
    ("somewhat confusing but acceptable", false),
    ("how about extracting a helper method", true),
    ("shows the result correctly", false),
    ("who owns this lock", true),
    ("whose turn is it to update the docs?", true),
    ("remove this println", false),
];

#[test]
fn criterion_6_interrogative_classifier_fixture() {
    assert_eq!(LABELED_COMMENTS.len(), 20);
    let words = QuestionWords::default();
    let mut disagreements = Vec::new();
    for (comment, expected) in LABELED_COMMENTS {
        let got = acr_eval::is_interrogative(comment, &words);
        if got != *expected {
            disagreements.push(format!("{comment:?}: classifier {got}, label {expected}"));
        }
    }
    assert!(
        disagreements.is_empty(),
        "classifier disagrees with hand labels:\n{}",
        disagreements.join("\n")
    );
    println!("ACCEPTANCE PASS: criterion 6 - 20/20 hand-labeled comments classified correctly");
}

// ---------------------------------------------------------------------------
// Criterion 7: scope statement
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_scope_statement() {
    // The reference benchmark scores used as fixtures above (EM/EP/BLEU
    // percentages for six models over three datasets) come from training
    // and fine-tuning large neural models. Reproducing those numbers needs
    // those training runs and is out of scope for this toolkit; the suite
    // instead verifies metric computation exactly (criteria 1, 3, 4),
    // replays the published aggregation arithmetic (criterion 2), and pins
    // behavior with randomized properties (criterion 5). The pre-training
    // corpus interrogative ratios (33.8% / 69.7%) likewise require corpora
    // this toolkit does not ship; only the classifier rule is verified
    // (criterion 6).
    println!(
        "ACCEPTANCE PASS: criterion 7 - model benchmark scores and pre-training corpus ratios \
         are not reproducible at desk scale; criteria 1-6 verify the metric computations, \
         aggregation arithmetic, and classifier rule instead"
    );
}

// ---------------------------------------------------------------------------
// End-to-end: the worked example through the evaluate driver
// ---------------------------------------------------------------------------

#[test]
fn worked_example_through_the_driver() {
    use acr_eval::{evaluate, RunConfig};
    use std::io::Write as _;

    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("data.jsonl");
    std::fs::File::create(&dataset)
        .unwrap()
        .write_all(
            concat!(
                "{\"id\":\"fig\",\"submitted_code\":\"public static double hypot(double x, double y)\",",
                "\"ground_truth\":\"public static double cosh(double x)\"}\n",
            )
            .as_bytes(),
        )
        .unwrap();
    let mut write_preds = |name: &str, text: &str| {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "{{\"model_name\":\"{name}\"}}").unwrap();
        writeln!(f, "{{\"id\":\"fig\",\"prediction\":\"{text}\"}}").unwrap();
        path
    };
    let p1 = write_preds(
        "rename-only",
        "public static double cosh(double x, double y)",
    );
    let p2 = write_preds("near-complete", "public static double cosh(double x y)");

    let report = evaluate(&RunConfig::new(Task::Crb, dataset, vec![p1, p2])).unwrap();
    let ep_of = |name: &str| {
        report
            .models
            .iter()
            .find(|m| m.model_name == name)
            .unwrap()
            .summary
            .ep_pct
            .unwrap()
    };
    assert_eq!(ep_of("rename-only"), 25.0);
    assert_eq!(ep_of("near-complete"), 75.0);
}
