//! The three pipeline stages and their orchestration.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value as Json};

use crate::llm_backend::{extract_json_block, ChatBackend, ChatRequest};
use crate::signal_map::{self, MappingProposal, SignalMapping};
use crate::spec_ingest::{DesignSpec, SectionKind};
use crate::verilog_decl::DeclarationTable;

use super::kb::KnowledgeBase;
use super::{
    AssertionRecord, AssertionStatus, Category, PipelineRun, SignalDescription, SignalExtraction,
    SignalLabel, SignalSpec, StageError,
};

const SPEC_ANALYZER_PROMPT: &str = include_str!("../../prompts/spec_analyzer.txt");
const SIGNAL_MAPPER_PROMPT: &str = include_str!("../../prompts/signal_mapper.txt");
const SVA_GENERATOR_PROMPT: &str = include_str!("../../prompts/sva_generator.txt");

/// Passages retrieved per generation request.
const RETRIEVAL_TOP_K: usize = 4;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub model: String,
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            model: "offline".to_string(),
            workers: 1,
        }
    }
}

/// Stage 1: one extraction request per signal. Signals whose response stays
/// invalid after the reformat retry are reported in the error ledger and
/// skipped downstream.
pub fn run_spec_analyzer<B: ChatBackend + Sync + ?Sized>(
    backend: &B,
    spec: &DesignSpec,
    signals: &[SignalSpec],
    config: &PipelineConfig,
) -> (Vec<SignalExtraction>, Vec<StageError>) {
    let excerpts = spec_excerpts(spec);
    let results = parallel_map(signals, config.workers, |signal| {
        let context = json!({
            "design_name": spec.design_name,
            "signal_name": signal.name,
            "signal_type": signal.kind,
            "label": signal.label.as_str(),
        });
        let user = SPEC_ANALYZER_PROMPT
            .replace("{{design_name}}", &spec.design_name)
            .replace("{{signal_name}}", &signal.name)
            .replace("{{sections}}", &excerpts)
            .replace("{{context_json}}", &context.to_string());
        let request = ChatRequest::new(
            "spec_analyzer",
            &config.model,
            system_line(SPEC_ANALYZER_PROMPT),
            user,
        );
        complete_validated(backend, &request, |body| parse_extraction(body, &signal.name))
    });

    let mut extractions = Vec::new();
    let mut errors = Vec::new();
    for (signal, result) in signals.iter().zip(results) {
        match result {
            Ok(extraction) => extractions.push(extraction),
            Err(message) => errors.push(StageError {
                stage: "spec_analyzer".to_string(),
                signal: Some(signal.name.clone()),
                message,
            }),
        }
    }
    (extractions, errors)
}

/// Stage 2: deterministic matching first; a single model request fills the
/// remaining unresolved names, validated by [`signal_map::merge`].
pub fn run_signal_mapper<B: ChatBackend + Sync + ?Sized>(
    backend: &B,
    spec_names: &[String],
    declarations: &DeclarationTable,
    config: &PipelineConfig,
) -> (Vec<SignalMapping>, Vec<String>, Vec<StageError>) {
    let deterministic = match signal_map::match_deterministic(
        spec_names,
        declarations,
        signal_map::DEFAULT_FUZZY_THRESHOLD,
    ) {
        Ok(mappings) => mappings,
        Err(e) => {
            return (
                spec_names.iter().map(|n| SignalMapping::unresolved(n)).collect(),
                Vec::new(),
                vec![StageError {
                    stage: "signal_mapper".to_string(),
                    signal: None,
                    message: e.to_string(),
                }],
            )
        }
    };

    let unresolved: Vec<&str> = deterministic
        .iter()
        .filter(|m| !m.is_resolved())
        .map(|m| m.spec_name.as_str())
        .collect();
    if unresolved.is_empty() {
        return (deterministic, Vec::new(), Vec::new());
    }

    let context = json!({
        "unresolved": unresolved,
        "hdl_identifiers": declarations.identifiers().collect::<Vec<_>>(),
    });
    let user = SIGNAL_MAPPER_PROMPT.replace("{{context_json}}", &context.to_string());
    let request = ChatRequest::new(
        "signal_mapper",
        &config.model,
        system_line(SIGNAL_MAPPER_PROMPT),
        user,
    );
    match complete_validated(backend, &request, parse_proposals) {
        Ok(proposals) => {
            let (merged, warnings) = signal_map::merge(&deterministic, &proposals, declarations);
            (merged, warnings, Vec::new())
        }
        Err(message) => (
            deterministic,
            Vec::new(),
            vec![StageError {
                stage: "signal_mapper".to_string(),
                signal: None,
                message,
            }],
        ),
    }
}

/// Stage 3: one request per (signal, category); responses may carry any
/// number of assertions, including none.
#[allow(clippy::too_many_arguments)]
pub fn run_sva_generator<B: ChatBackend + Sync + ?Sized>(
    backend: &B,
    spec: &DesignSpec,
    extractions: &[SignalExtraction],
    mappings: &[SignalMapping],
    declarations: &DeclarationTable,
    kb: &KnowledgeBase,
    signals: &[SignalSpec],
    config: &PipelineConfig,
) -> (Vec<AssertionRecord>, Vec<StageError>) {
    let resolve = |spec_name: &str| -> Option<String> {
        mappings
            .iter()
            .find(|m| m.spec_name == spec_name)
            .and_then(|m| m.hdl_identifier.clone())
    };
    let clock = signals
        .iter()
        .find(|s| s.label == SignalLabel::Clock)
        .and_then(|s| resolve(&s.name));
    let reset = signals
        .iter()
        .find(|s| s.label == SignalLabel::Reset)
        .and_then(|s| resolve(&s.name));

    struct Job<'a> {
        extraction: &'a SignalExtraction,
        signal: &'a SignalSpec,
        hdl: String,
        category: Category,
    }
    let mut jobs = Vec::new();
    let mut errors = Vec::new();
    for extraction in extractions {
        let Some(signal) = signals.iter().find(|s| s.name == extraction.name) else {
            continue;
        };
        let Some(hdl) = resolve(&extraction.name) else {
            errors.push(StageError {
                stage: "sva_generator".to_string(),
                signal: Some(extraction.name.clone()),
                message: "signal has no HDL mapping; generation skipped".to_string(),
            });
            continue;
        };
        for category in Category::ALL {
            jobs.push(Job {
                extraction,
                signal,
                hdl: hdl.clone(),
                category,
            });
        }
    }

    let Some(clock) = clock else {
        errors.push(StageError {
            stage: "sva_generator".to_string(),
            signal: None,
            message: "no clock signal resolved; generation skipped".to_string(),
        });
        return (Vec::new(), errors);
    };

    let results = parallel_map(&jobs, config.workers, |job| {
        let width = declarations
            .lookup(&job.hdl)
            .map(|d| d.width_bits)
            .unwrap_or(1);
        let related: Vec<String> = job
            .extraction
            .interconnection_signals
            .iter()
            .filter_map(|n| resolve(n))
            .filter(|n| *n != job.hdl)
            .collect();
        let query = format!(
            "{} assertion {} {} {}",
            job.category,
            job.hdl,
            job.signal.label.as_str(),
            job.extraction.description.functionality
        );
        let passages = kb
            .retrieve(&query, RETRIEVAL_TOP_K)
            .iter()
            .map(|p| format!("[{}#{}] {}", p.doc_id, p.index, p.text))
            .collect::<Vec<_>>()
            .join("\n\n");
        let context = json!({
            "design_name": spec.design_name,
            "signal": {
                "name": job.hdl,
                "width": width,
                "label": job.signal.label.as_str(),
                "type": job.signal.kind,
            },
            "category": job.category.as_str(),
            "clock": clock,
            "reset": reset,
            "related": related,
            "description": job.extraction.description,
        });
        let user = SVA_GENERATOR_PROMPT
            .replace("{{passages}}", if passages.is_empty() { "(none)" } else { &passages })
            .replace("{{context_json}}", &context.to_string());
        let request = ChatRequest::new(
            "sva_generator",
            &config.model,
            system_line(SVA_GENERATOR_PROMPT),
            user,
        );
        complete_validated(backend, &request, |body| {
            parse_assertions(body, &job.hdl, job.category)
        })
    });

    let mut records = Vec::new();
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(items) => {
                for (n, (sva, rationale)) in items.into_iter().enumerate() {
                    records.push(AssertionRecord {
                        id: format!("{}-{}-{}", job.hdl, job.category, n + 1),
                        target_signal: job.hdl.clone(),
                        category: job.category,
                        text: sva,
                        rationale,
                        status: AssertionStatus::Generated,
                        error: None,
                        verdict: None,
                    });
                }
            }
            Err(message) => errors.push(StageError {
                stage: "sva_generator".to_string(),
                signal: Some(job.hdl.clone()),
                message: format!("{} generation failed: {message}", job.category),
            }),
        }
    }
    (records, errors)
}

/// All three stages plus syntax classification.
pub fn run_full<B: ChatBackend + Sync + ?Sized>(
    backend: &B,
    spec: &DesignSpec,
    signals: &[SignalSpec],
    declarations: &DeclarationTable,
    kb: &KnowledgeBase,
    config: &PipelineConfig,
) -> PipelineRun {
    let (extractions, mut errors) = run_spec_analyzer(backend, spec, signals, config);
    let spec_names: Vec<String> = signals.iter().map(|s| s.name.clone()).collect();
    let (mappings, mapping_warnings, mapper_errors) =
        run_signal_mapper(backend, &spec_names, declarations, config);
    errors.extend(mapper_errors);
    let (mut records, generator_errors) = run_sva_generator(
        backend,
        spec,
        &extractions,
        &mappings,
        declarations,
        kb,
        signals,
        config,
    );
    errors.extend(generator_errors);
    super::classify_records(&mut records, declarations);
    PipelineRun {
        schema_version: crate::SCHEMA_VERSION,
        design_name: spec.design_name.clone(),
        backend: backend.name().to_string(),
        model: config.model.clone(),
        extractions,
        mappings,
        mapping_warnings,
        records,
        errors,
    }
}

// ---------------------------------------------------------------------------

/// First line of a prompt template, used as the system message.
fn system_line(template: &str) -> String {
    template.lines().next().unwrap_or("").to_string()
}

/// Specification excerpts attached to stage-1 prompts: the section kinds
/// that talk about signals, falling back to the whole document.
fn spec_excerpts(spec: &DesignSpec) -> String {
    const KINDS: [SectionKind; 4] = [
        SectionKind::IoPorts,
        SectionKind::Registers,
        SectionKind::Operation,
        SectionKind::Architecture,
    ];
    let mut out = String::new();
    for kind in KINDS {
        for section in spec.sections_of(kind) {
            out.push_str(&section.raw_text);
            if !out.ends_with('\n') {
                out.push('\n');
            }
        }
    }
    if out.is_empty() {
        spec.body()
    } else {
        out
    }
}

/// Ask, validate, and on a malformed reply retry once with an explicit
/// reformat instruction appended.
fn complete_validated<B, T>(
    backend: &B,
    request: &ChatRequest,
    validate: impl Fn(&Json) -> Result<T, String>,
) -> Result<T, String>
where
    B: ChatBackend + Sync + ?Sized,
{
    let attempt = |req: &ChatRequest| -> Result<T, String> {
        let response = backend.complete(req).map_err(|e| e.to_string())?;
        let body = extract_json_block(&response.text)
            .ok_or_else(|| "reply contains no fenced json block".to_string())?;
        validate(&body)
    };
    match attempt(request) {
        Ok(value) => Ok(value),
        Err(first) => {
            let mut retry = request.clone();
            retry.user = format!(
                "{}\n\nYour previous reply could not be used ({first}). Respond again \
                 with only the fenced json block in the requested shape.",
                request.user
            );
            attempt(&retry).map_err(|second| {
                format!("invalid response ({first}); retry also failed ({second})")
            })
        }
    }
}

fn parse_extraction(body: &Json, expected_name: &str) -> Result<SignalExtraction, String> {
    let signal = body.get("signal").ok_or("missing `signal` object")?;
    let name = signal
        .get("name")
        .and_then(Json::as_str)
        .ok_or("missing `signal.name`")?;
    if name != expected_name {
        return Err(format!(
            "extraction is for `{name}`, expected `{expected_name}`"
        ));
    }
    let description: SignalDescription = serde_json::from_value(
        signal
            .get("description")
            .cloned()
            .ok_or("missing `signal.description`")?,
    )
    .map_err(|e| format!("bad `signal.description`: {e}"))?;
    let interconnection_signals: Vec<String> = serde_json::from_value(
        signal
            .get("interconnection_signals")
            .cloned()
            .unwrap_or_else(|| json!([])),
    )
    .map_err(|e| format!("bad `signal.interconnection_signals`: {e}"))?;
    for peer in &interconnection_signals {
        if !description.contains_verbatim(peer) {
            return Err(format!(
                "interconnection signal `{peer}` does not appear verbatim in the description"
            ));
        }
    }
    Ok(SignalExtraction {
        name: name.to_string(),
        description,
        interconnection_signals,
    })
}

fn parse_proposals(body: &Json) -> Result<Vec<MappingProposal>, String> {
    let mappings = body
        .get("mappings")
        .and_then(Json::as_array)
        .ok_or("missing `mappings` array")?;
    mappings
        .iter()
        .map(|m| {
            serde_json::from_value::<MappingProposal>(m.clone())
                .map_err(|e| format!("bad mapping entry: {e}"))
        })
        .collect()
}

fn parse_assertions(
    body: &Json,
    expected_signal: &str,
    expected_category: Category,
) -> Result<Vec<(String, String)>, String> {
    let items = body
        .get("assertions")
        .and_then(Json::as_array)
        .ok_or("missing `assertions` array")?;
    let mut out = Vec::new();
    for item in items {
        let sva = item
            .get("sva")
            .and_then(Json::as_str)
            .ok_or("assertion entry missing `sva`")?;
        if sva.trim().is_empty() {
            return Err("assertion entry has empty `sva`".to_string());
        }
        let category = item.get("category").and_then(Json::as_str).unwrap_or("");
        if Category::parse(category) != Some(expected_category) {
            return Err(format!(
                "assertion category `{category}` does not match requested `{expected_category}`"
            ));
        }
        let target = item
            .get("target_signal")
            .and_then(Json::as_str)
            .unwrap_or(expected_signal);
        if target != expected_signal {
            return Err(format!(
                "assertion targets `{target}`, expected `{expected_signal}`"
            ));
        }
        let rationale = item
            .get("rationale")
            .and_then(Json::as_str)
            .unwrap_or("")
            .to_string();
        out.push((sva.to_string(), rationale));
    }
    Ok(out)
}

/// Order-preserving parallel map over `items` with at most `workers`
/// threads. Results come back indexed, so output order never depends on
/// scheduling.
fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= items.len() {
                    break;
                }
                let result = f(&items[idx]);
                *slots[idx].lock().expect("slot lock") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot lock").expect("slot filled"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_backend::{BackendError, FnBackend, MockBackend};
    use crate::spec_ingest::parse_spec_text;
    use crate::verilog_decl::parse_declarations;

    fn spec() -> DesignSpec {
        parse_spec_text(
            "demo",
            "# Introduction\nA demo core.\n\n# IO ports\nclk drives everything; \
             req starts a transfer and ack completes it.\n\n# Operation\nAfter reset \
             ack stays low until req is seen.\n",
        )
    }

    fn signals() -> Vec<SignalSpec> {
        let mk = |name: &str, label: SignalLabel| SignalSpec {
            name: name.to_string(),
            kind: super::super::SignalKind::IoPort,
            label,
        };
        vec![
            mk("clk", SignalLabel::Clock),
            mk("rst", SignalLabel::Reset),
            mk("req", SignalLabel::Control),
            mk("ack", SignalLabel::Control),
        ]
    }

    fn decls() -> DeclarationTable {
        parse_declarations(
            "module demo (input wire clk, input wire rst, input wire req, output reg ack); endmodule",
        )
        .unwrap()
    }

    #[test]
    fn full_mock_run_produces_classified_records() {
        let backend = MockBackend::new(11);
        let kb = KnowledgeBase::from_documents(vec![(
            "notes".into(),
            "use $bits for width checks and |-> for handshakes".into(),
        )]);
        let run = run_full(
            &backend,
            &spec(),
            &signals(),
            &decls(),
            &kb,
            &PipelineConfig::default(),
        );
        assert!(run.errors.is_empty(), "{:?}", run.errors);
        assert_eq!(run.extractions.len(), 4);
        // One assertion per signal per category from the mock.
        assert_eq!(run.records.len(), 12);
        assert!(run
            .records
            .iter()
            .all(|r| r.status == AssertionStatus::SyntaxOk));
        // Mock runs are reproducible.
        let again = run_full(
            &backend,
            &spec(),
            &signals(),
            &decls(),
            &kb,
            &PipelineConfig::default(),
        );
        assert_eq!(run.records, again.records);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let backend = MockBackend::new(3);
        let kb = KnowledgeBase::default();
        let serial = run_full(
            &backend,
            &spec(),
            &signals(),
            &decls(),
            &kb,
            &PipelineConfig {
                workers: 1,
                ..Default::default()
            },
        );
        let parallel = run_full(
            &backend,
            &spec(),
            &signals(),
            &decls(),
            &kb,
            &PipelineConfig {
                workers: 4,
                ..Default::default()
            },
        );
        assert_eq!(serial.records, parallel.records);
        assert_eq!(serial.extractions, parallel.extractions);
    }

    #[test]
    fn reformat_retry_recovers_from_one_bad_reply() {
        let attempts = AtomicUsize::new(0);
        let backend = FnBackend::new(|req: &ChatRequest| {
            let n = attempts.fetch_add(1, Ordering::SeqCst);
            if n == 0 {
                Ok("sorry, here is prose instead of json".to_string())
            } else {
                assert!(req.user.contains("could not be used"));
                Ok("```json\n{\"mappings\": []}\n```".to_string())
            }
        });
        let request = ChatRequest::new("signal_mapper", "m", "s".into(), "u".into());
        let result = complete_validated(&backend, &request, parse_proposals);
        assert_eq!(result.unwrap(), Vec::new());
        assert_eq!(attempts.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn persistent_failure_lands_in_ledger() {
        let backend = FnBackend::new(|_: &ChatRequest| {
            Err(BackendError::Malformed("always broken".into()))
        });
        let (extractions, errors) = run_spec_analyzer(
            &backend,
            &spec(),
            &signals()[..1],
            &PipelineConfig::default(),
        );
        assert!(extractions.is_empty());
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].signal.as_deref(), Some("clk"));
    }

    #[test]
    fn verbatim_invariant_is_enforced() {
        let body: Json = serde_json::json!({
            "signal": {
                "name": "ack",
                "description": {
                    "definition": "ack output",
                    "functionality": "acknowledges req",
                    "interconnection": "follows req",
                    "additional": ""
                },
                "interconnection_signals": ["ghost"]
            }
        });
        let err = parse_extraction(&body, "ack").unwrap_err();
        assert!(err.contains("ghost"));
        let mut ok = body.clone();
        ok["signal"]["interconnection_signals"] = serde_json::json!(["req"]);
        assert!(parse_extraction(&ok, "ack").is_ok());
    }
}
