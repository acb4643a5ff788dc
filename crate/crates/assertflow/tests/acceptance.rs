//! Acceptance gate: one test per shipped guarantee, each printing a
//! single PASS line (visible with `--nocapture`). Tolerances and expected
//! numbers are pinned as constants next to the test that uses them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use assertflow::bench::{
    aggregate, load_inputs, load_manifest, percent, render_report, run_bench, BenchReport,
    ReportFormat,
};
use assertflow::llm_backend::{ReplayBackend, TranscriptStore};
use assertflow::pipeline::{
    AssertionRecord, AssertionStatus, Category, KnowledgeBase, PipelineConfig, PipelineRun,
};
use assertflow::signal_map::{
    match_deterministic, normalize, similarity, MatchMethod, DEFAULT_FUZZY_THRESHOLD,
};
use assertflow::sva::{generate::AstGenerator, parse_sva, parse_sva_multi, pretty_print};
use assertflow::trace_eval::{check_width, evaluate, Outcome, SignalTimeline, Trace, Value};
use assertflow::verilog_decl::parse_declarations;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Replay the shipped benchmark through the full pipeline.
fn replay_fixture() -> (BenchReport, PipelineRun, Duration) {
    let manifest = load_manifest(&root().join("fixtures/i2c/bench.toml")).expect("manifest");
    let store = TranscriptStore::load(manifest.transcripts.as_deref().expect("transcripts"))
        .expect("transcript store");
    let backend = ReplayBackend::new(store);
    let kb = KnowledgeBase::load(&root().join("fixtures/kb")).expect("kb");
    let config = PipelineConfig {
        model: "default".to_string(),
        workers: 1,
    };
    let start = Instant::now();
    let (report, run) = run_bench(&manifest, &backend, &kb, &config, false).expect("bench");
    (report, run, start.elapsed())
}

// ---------------------------------------------------------------------------

/// Pinned fixture totals: 23/16/17 assertions by category, all parse,
/// 50 hold on the trace, rendered as 100% syntax / 89% pass, under 10 s.
#[test]
fn c1_replay_bench_reproduces_fixture_totals() {
    const TIME_LIMIT: Duration = Duration::from_secs(10);
    let (report, run, elapsed) = replay_fixture();
    assert!(run.errors.is_empty(), "stage errors: {:?}", run.errors);
    assert_eq!(report.categories[&Category::Width].generated, 23);
    assert_eq!(report.categories[&Category::Connectivity].generated, 16);
    assert_eq!(report.categories[&Category::Function].generated, 17);
    assert_eq!(report.totals.generated, 56);
    assert_eq!(report.totals.syntax_ok, 56);
    assert_eq!(report.totals.trace_pass, 50);
    assert_eq!(report.totals.trace_fail, 6);
    assert_eq!(report.totals.vacuous, 0);
    assert_eq!(report.totals.inconclusive, 0);
    assert_eq!(report.unmapped_filtered, 2);
    let table = render_report(&report, ReportFormat::Table);
    assert!(
        table.contains("syntax correct: 100% / pass: 89%"),
        "unexpected rendering:\n{table}"
    );
    assert!(elapsed < TIME_LIMIT, "replay took {elapsed:?}");
    println!("ACCEPTANCE C1 PASS — replay bench: 56 generated (23/16/17), 56 syntax_ok, 50 pass, rendered 100%/89% in {elapsed:?}");
}

#[test]
fn c2_width_assertions_pass_static_check() {
    let (_, run, _) = replay_fixture();
    let manifest = load_manifest(&root().join("fixtures/i2c/bench.toml")).unwrap();
    let decls = load_inputs(&manifest).unwrap().declarations;
    let width_records: Vec<_> = run
        .records
        .iter()
        .filter(|r| r.category == Category::Width && r.status != AssertionStatus::UnmappedFiltered)
        .collect();
    assert_eq!(width_records.len(), 23);
    for record in &width_records {
        let ast = parse_sva(&record.text).expect("width assertion parses");
        let verdict = check_width(&ast, &decls).expect("width-check shape");
        assert_eq!(
            verdict.outcome,
            Outcome::Pass,
            "{} failed statically: {:?}",
            record.text,
            verdict.first_failure
        );
    }
    println!("ACCEPTANCE C2 PASS — all 23 width assertions pass the static declaration check");
}

/// Live-model accuracy is not an offline-checkable claim; the README must
/// say so and point at the replay criterion that substitutes for it.
#[test]
fn c3_live_accuracy_documented_as_replay_criterion() {
    let readme = std::fs::read_to_string(root().join("README.md")).expect("README.md");
    assert!(readme.contains("## Reproducibility"));
    assert!(readme.contains("not\nreproducible offline") || readme.contains("not reproducible offline"));
    assert!(readme.contains("replay criterion"));
    println!("ACCEPTANCE C3 PASS — live accuracy documented as non-reproducible, replaced by the replay criterion");
}

#[test]
fn c4_parser_corpus_roundtrip_and_fuzz() {
    const MIN_CORPUS: usize = 50;
    const RANDOM_ASTS: u64 = 1000;
    const FUZZ_INPUTS: usize = 100_000;

    let text = std::fs::read_to_string(root().join("fixtures/sva_corpus.sva")).unwrap();
    let corpus = parse_sva_multi(&text).expect("corpus parses");
    assert!(corpus.len() >= MIN_CORPUS, "only {} assertions", corpus.len());
    for ast in &corpus {
        let printed = pretty_print(ast);
        let reparsed = parse_sva(&printed)
            .unwrap_or_else(|e| panic!("round-trip parse failed for `{printed}`: {e}"));
        assert_eq!(&reparsed, ast, "round-trip changed `{printed}`");
    }

    for seed in 0..RANDOM_ASTS {
        let ast = AstGenerator::new(seed).assertion();
        let printed = pretty_print(&ast);
        let reparsed = parse_sva(&printed)
            .unwrap_or_else(|e| panic!("seed {seed}: `{printed}`: {e}"));
        assert_eq!(reparsed, ast, "seed {seed} round-trip changed `{printed}`");
    }

    // Byte fuzzing: random strings plus mutated corpus lines. The parser
    // must return Ok or Err, never panic (a panic aborts the test).
    let lines: Vec<&str> = text.lines().filter(|l| l.contains("assert")).collect();
    let pool: Vec<char> =
        "abcxyz_01239 \t()[]{}<>=!&|^~#$*:;'\"@.,%+-/\\`posedge$rose##".chars().collect();
    let mut rng = StdRng::seed_from_u64(0xf022);
    for _ in 0..FUZZ_INPUTS / 2 {
        let len = rng.gen_range(0..80);
        let s: String = (0..len).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        let _ = parse_sva(&s);
    }
    for _ in 0..FUZZ_INPUTS / 2 {
        let mut s: Vec<u8> = lines[rng.gen_range(0..lines.len())].bytes().collect();
        for _ in 0..rng.gen_range(1..4) {
            if s.is_empty() {
                break;
            }
            let at = rng.gen_range(0..s.len());
            match rng.gen_range(0..3) {
                0 => s[at] = rng.gen_range(0x20..0x7f),
                1 => {
                    s.remove(at);
                }
                _ => s.insert(at, pool[rng.gen_range(0..pool.len())] as u8),
            }
        }
        let _ = parse_sva(&String::from_utf8_lossy(&s));
    }
    println!(
        "ACCEPTANCE C4 PASS — corpus of {} parses, {} + {RANDOM_ASTS} round-trips, {FUZZ_INPUTS} fuzz inputs without panic",
        corpus.len(),
        corpus.len()
    );
}

// ---------------------------------------------------------------------------
// C5: exhaustive oracle equivalence for the trace evaluator
// ---------------------------------------------------------------------------

/// Clock period 10; edges at 10i+5; data changes at 10i.
fn bool_trace(a: &[bool], b: &[bool]) -> Trace {
    let len = a.len() as u64;
    let mut clk = vec![(0u64, Value::from_u64(0, 1))];
    for i in 0..len {
        clk.push((i * 10 + 5, Value::from_u64(1, 1)));
        clk.push((i * 10 + 10, Value::from_u64(0, 1)));
    }
    let wave = |vals: &[bool]| {
        let mut changes = Vec::new();
        let mut prev = None;
        for (i, &v) in vals.iter().enumerate() {
            if prev != Some(v) {
                changes.push((i as u64 * 10, Value::from_u64(v as u64, 1)));
                prev = Some(v);
            }
        }
        SignalTimeline { width: 1, changes }
    };
    let mut signals = BTreeMap::new();
    signals.insert("clk".to_string(), SignalTimeline { width: 1, changes: clk });
    signals.insert("a".to_string(), wave(a));
    signals.insert("b".to_string(), wave(b));
    Trace::from_timelines(signals)
}

#[derive(Clone, Copy, PartialEq)]
enum Attempt {
    Fail,
    NonvacuousPass,
    VacuousPass,
    Unknown,
}

/// Independent semantics for the six templates, written directly from
/// the sampled-value definitions rather than via the AST machinery.
fn oracle(template: usize, a: &[bool], b: &[bool]) -> Outcome {
    let len = a.len();
    let attempts: Vec<Attempt> = (0..len)
        .map(|i| match template {
            // a |-> b
            0 => match (a[i], b[i]) {
                (false, _) => Attempt::VacuousPass,
                (true, true) => Attempt::NonvacuousPass,
                (true, false) => Attempt::Fail,
            },
            // a |=> b and a |-> ##1 b are the same obligation
            1 | 2 => {
                if !a[i] {
                    Attempt::VacuousPass
                } else if i + 1 >= len {
                    Attempt::Unknown
                } else if b[i + 1] {
                    Attempt::NonvacuousPass
                } else {
                    Attempt::Fail
                }
            }
            // $rose(a) |-> b; no history at i == 0, so the antecedent is
            // undecidable: the attempt holds (vacuously) if b saves it,
            // otherwise stays open.
            3 => {
                if i == 0 {
                    if b[0] {
                        Attempt::VacuousPass
                    } else {
                        Attempt::Unknown
                    }
                } else if a[i] && !a[i - 1] {
                    if b[i] {
                        Attempt::NonvacuousPass
                    } else {
                        Attempt::Fail
                    }
                } else {
                    Attempt::VacuousPass
                }
            }
            // $stable(a)
            4 => {
                if i == 0 {
                    Attempt::Unknown
                } else if a[i] == a[i - 1] {
                    Attempt::NonvacuousPass
                } else {
                    Attempt::Fail
                }
            }
            // a |-> ##[1:2] b
            5 => {
                if !a[i] {
                    Attempt::VacuousPass
                } else if (i + 1 < len && b[i + 1]) || (i + 2 < len && b[i + 2]) {
                    Attempt::NonvacuousPass
                } else if i + 2 >= len {
                    Attempt::Unknown
                } else {
                    Attempt::Fail
                }
            }
            _ => unreachable!(),
        })
        .collect();
    if attempts.iter().any(|&x| x == Attempt::Fail) {
        Outcome::Fail
    } else if attempts.iter().any(|&x| x == Attempt::NonvacuousPass) {
        Outcome::Pass
    } else if attempts.iter().any(|&x| x == Attempt::Unknown) {
        Outcome::Inconclusive
    } else {
        Outcome::VacuousPass
    }
}

#[test]
fn c5_evaluator_matches_exhaustive_oracle() {
    const MAX_LEN: usize = 6;
    const TIME_LIMIT: Duration = Duration::from_secs(60);
    let templates = [
        "assert property (@(posedge clk) a |-> b);",
        "assert property (@(posedge clk) a |=> b);",
        "assert property (@(posedge clk) a |-> ##1 b);",
        "assert property (@(posedge clk) $rose(a) |-> b);",
        "assert property (@(posedge clk) $stable(a));",
        "assert property (@(posedge clk) a |-> ##[1:2] b);",
    ];
    let asts: Vec<_> = templates.iter().map(|t| parse_sva(t).unwrap()).collect();

    let start = Instant::now();
    let mut checked = 0usize;
    for len in 1..=MAX_LEN {
        for bits in 0..(1u32 << (2 * len)) {
            let a: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
            let b: Vec<bool> = (0..len).map(|i| bits >> (len + i) & 1 == 1).collect();
            let trace = bool_trace(&a, &b);
            for (t, ast) in asts.iter().enumerate() {
                let verdict = evaluate(ast, &trace).unwrap();
                let expected = oracle(t, &a, &b);
                assert_eq!(
                    verdict.outcome, expected,
                    "template `{}` diverges from oracle on a={a:?} b={b:?}",
                    templates[t]
                );
                assert_eq!(verdict.attempts, len);
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < TIME_LIMIT, "oracle sweep took {elapsed:?}");
    println!("ACCEPTANCE C5 PASS — evaluator equals oracle on {checked} (template, trace) pairs in {elapsed:?}");
}

// ---------------------------------------------------------------------------

#[test]
fn c6_mapper_corpus_against_oracle() {
    // 50 synthetic identifiers from a prefix x suffix grid.
    let prefixes = ["wb", "tx", "rx", "dma", "irq"];
    let suffixes = [
        "_data", "_addr", "_en", "_valid", "_ready", "_ctrl", "_status", "_count", "_mask", "_cfg",
    ];
    let idents: Vec<String> = prefixes
        .iter()
        .flat_map(|p| suffixes.iter().map(move |s| format!("{p}{s}")))
        .collect();
    let src: String = idents.iter().map(|i| format!("wire {i};\n")).collect();
    let decls = parse_declarations(&src).unwrap();

    // 100 cases: 35 exact, 30 normalized, 25 fuzzy typos, 10 far-off.
    let mut cases: Vec<(String, &'static str)> = Vec::new();
    for ident in idents.iter().take(35) {
        cases.push((ident.clone(), "exact"));
    }
    for ident in idents.iter().take(30) {
        cases.push((ident.to_uppercase().replace('_', " "), "normalized"));
    }
    let long: Vec<&String> = idents.iter().filter(|i| normalize(i).len() >= 6).collect();
    for ident in long.iter().take(25) {
        let mut typo = ident.to_string();
        typo.pop();
        cases.push((typo, "fuzzy"));
    }
    for n in 0..10 {
        cases.push((format!("zz_quux_{n}_blorp"), "unresolved"));
    }
    assert_eq!(cases.len(), 100);

    for (spec_name, tier) in &cases {
        let m = match_deterministic(
            std::slice::from_ref(spec_name),
            &decls,
            DEFAULT_FUZZY_THRESHOLD,
        )
        .unwrap()
        .remove(0);
        match *tier {
            "exact" => {
                assert_eq!(m.method, Some(MatchMethod::Exact), "{spec_name}");
                assert_eq!(m.hdl_identifier.as_deref(), Some(spec_name.as_str()));
                assert_eq!(m.confidence, 1.0);
            }
            "normalized" => {
                assert_eq!(m.method, Some(MatchMethod::Normalized), "{spec_name}");
                assert_eq!(
                    normalize(m.hdl_identifier.as_deref().unwrap()),
                    normalize(spec_name)
                );
                assert_eq!(m.confidence, 0.9);
            }
            "fuzzy" | "unresolved" => {
                // Brute-force oracle: best similarity over all identifiers,
                // ties to the lexicographically smallest, floor 0.8.
                let norm = normalize(spec_name);
                let mut best: Option<(&str, f64)> = None;
                for ident in &idents {
                    let s = similarity(&norm, &normalize(ident));
                    if s < DEFAULT_FUZZY_THRESHOLD {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bi, bs)) => s > bs || (s == bs && ident.as_str() < bi),
                    };
                    if better {
                        best = Some((ident, s));
                    }
                }
                if *tier == "unresolved" {
                    assert!(best.is_none(), "oracle found a match for {spec_name}");
                    assert!(!m.is_resolved(), "{spec_name}");
                } else {
                    assert_eq!(
                        m.hdl_identifier.as_deref(),
                        best.map(|(i, _)| i),
                        "fuzzy disagrees with oracle for {spec_name}"
                    );
                    assert_eq!(m.method, Some(MatchMethod::Fuzzy));
                    assert_eq!(m.confidence, best.unwrap().1);
                }
            }
            _ => unreachable!(),
        }
    }
    println!("ACCEPTANCE C6 PASS — 100-case mapper corpus: exact and normalized tiers 100%, fuzzy tier equals brute-force oracle");
}

#[test]
fn c7_count_conservation() {
    // The shipped fixture's records...
    let (report, run, _) = replay_fixture();
    assert!(report.totals.conserves());
    for row in &report.rows {
        assert!(row.counts.conserves(), "row {}", row.signal);
    }
    for (category, counts) in &report.categories {
        assert!(counts.conserves(), "category {category}");
    }
    let countable = run
        .records
        .iter()
        .filter(|r| r.status != AssertionStatus::UnmappedFiltered)
        .count();
    assert_eq!(report.totals.generated, countable);

    // ...and 1000 randomized record sets.
    // Final statuses only: `syntax_ok` is an intermediate state that trace
    // evaluation always promotes before anything is aggregated.
    const SETS: u64 = 1000;
    const STATUSES: [AssertionStatus; 7] = [
        AssertionStatus::SyntaxError,
        AssertionStatus::SubsetViolation,
        AssertionStatus::TracePass,
        AssertionStatus::TraceFail,
        AssertionStatus::Vacuous,
        AssertionStatus::Inconclusive,
        AssertionStatus::UnmappedFiltered,
    ];
    let signals = ["s0", "s1", "s2", "s3", "s4"];
    for seed in 0..SETS {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(0..60);
        let records: Vec<AssertionRecord> = (0..n)
            .map(|k| AssertionRecord {
                id: format!("r{k}"),
                target_signal: signals[rng.gen_range(0..signals.len())].to_string(),
                category: Category::ALL[rng.gen_range(0..3)],
                text: String::new(),
                rationale: String::new(),
                status: STATUSES[rng.gen_range(0..STATUSES.len())],
                error: None,
                verdict: None,
            })
            .collect();
        let order: Vec<String> = signals.iter().map(|s| s.to_string()).collect();
        let (rows, categories, totals, unmapped) = aggregate(&records, &order);
        assert!(totals.conserves(), "seed {seed}");
        let filtered = records
            .iter()
            .filter(|r| r.status == AssertionStatus::UnmappedFiltered)
            .count();
        assert_eq!(unmapped, filtered, "seed {seed}");
        assert_eq!(totals.generated + unmapped, records.len(), "seed {seed}");
        let row_sum: usize = rows.iter().map(|r| r.counts.generated).sum();
        let cat_sum: usize = categories.values().map(|c| c.generated).sum();
        assert_eq!(row_sum, totals.generated, "seed {seed}");
        assert_eq!(cat_sum, totals.generated, "seed {seed}");
        for row in &rows {
            assert!(row.counts.conserves(), "seed {seed} row {}", row.signal);
        }
        for counts in categories.values() {
            assert!(counts.conserves(), "seed {seed}");
        }
    }
    println!("ACCEPTANCE C7 PASS — conservation identities hold on the fixture and {SETS} randomized record sets");
}

#[test]
fn c8_cli_mock_bench_emits_schema_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_assertflow"))
        .current_dir(root())
        .args([
            "bench",
            "fixtures/i2c",
            "--backend",
            "mock",
            "--kb",
            "fixtures/kb",
            "--out",
        ])
        .arg(&out)
        .output()
        .expect("run assertflow");
    assert!(
        status.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        status.status.code(),
        String::from_utf8_lossy(&status.stdout),
        String::from_utf8_lossy(&status.stderr)
    );
    let report: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).expect("schema-valid report");
    assert_eq!(report.schema_version, assertflow::SCHEMA_VERSION);
    assert_eq!(report.backend, "mock");
    assert!(report.totals.conserves());
    assert!(report.totals.generated > 0);
    // Sanity on the percent helper the renderer uses.
    assert_eq!(percent(50, 56), Some(89));
    println!("ACCEPTANCE C8 PASS — `bench --backend mock` exits 0 with a schema-valid report");
}
