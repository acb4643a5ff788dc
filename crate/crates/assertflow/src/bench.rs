//! Benchmark directory contract and end-to-end evaluation.
//!
//! A benchmark is a directory with a `bench.toml` manifest pointing at the
//! specification document, an HDL signal-definition file, a waveform trace
//! of the golden design, and (optionally) recorded model transcripts. The
//! module runs the full pipeline over the manifest's signal list, evaluates
//! every syntactically valid assertion against the trace, and aggregates
//! per-signal and per-category counts.
//!
//! Counts obey two conservation identities, checked by `debug_assert` and
//! by the test suite:
//!
//! ```text
//! generated = syntax_error + subset_violation + syntax_ok
//! syntax_ok = trace_pass + trace_fail + vacuous + inconclusive
//! ```
//!
//! Percentages are always recomputed from counts at render time, rounded
//! half-up; an empty report renders an em dash.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm_backend::ChatBackend;
use crate::pipeline::{
    run_full, AssertionRecord, AssertionStatus, Category, KnowledgeBase, PipelineConfig,
    PipelineRun, SignalLabel, SignalSpec, StageError,
};
use crate::spec_ingest::{load_spec, DesignSpec};
use crate::sva::parse_sva;
use crate::trace_eval::{evaluate, parse_vcd, Outcome, Trace};
use crate::verilog_decl::{parse_declarations, DeclarationTable};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Spec(#[from] crate::spec_ingest::SpecIngestError),
    #[error("signal definitions: {0}")]
    Declarations(#[from] crate::verilog_decl::DeclParseError),
    #[error("trace: {0}")]
    Trace(#[from] crate::trace_eval::VcdError),
}

/// Parsed and validated `bench.toml`; all paths resolved against the
/// manifest's directory.
#[derive(Debug, Clone)]
pub struct BenchManifest {
    pub design_name: String,
    pub spec: PathBuf,
    pub signal_definition: PathBuf,
    pub golden_rtl: Option<PathBuf>,
    pub traces: PathBuf,
    pub transcripts: Option<PathBuf>,
    pub signals: Vec<SignalSpec>,
}

#[derive(Debug, Deserialize)]
struct RawManifest {
    design_name: String,
    spec: String,
    signal_definition: String,
    golden_rtl: Option<String>,
    traces: String,
    transcripts: Option<String>,
    #[serde(default)]
    signals: Vec<SignalSpec>,
}

pub fn load_manifest(path: &Path) -> Result<BenchManifest, BenchError> {
    let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawManifest = toml::from_str(&text).map_err(|e| BenchError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let err = |message: String| BenchError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    if raw.signals.is_empty() {
        return Err(err("manifest lists no signals".to_string()));
    }
    let clocks = raw
        .signals
        .iter()
        .filter(|s| s.label == SignalLabel::Clock)
        .count();
    if clocks != 1 {
        return Err(err(format!(
            "manifest must label exactly one clock signal, found {clocks}"
        )));
    }
    if raw
        .signals
        .iter()
        .filter(|s| s.label == SignalLabel::Reset)
        .count()
        > 1
    {
        return Err(err("manifest labels more than one reset signal".to_string()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in &raw.signals {
        if !seen.insert(&s.name) {
            return Err(err(format!("duplicate signal `{}`", s.name)));
        }
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| base.join(p);
    let manifest = BenchManifest {
        design_name: raw.design_name,
        spec: resolve(&raw.spec),
        signal_definition: resolve(&raw.signal_definition),
        golden_rtl: raw.golden_rtl.as_deref().map(resolve),
        traces: resolve(&raw.traces),
        transcripts: raw.transcripts.as_deref().map(resolve),
        signals: raw.signals,
    };
    for (what, p) in [
        ("spec", Some(&manifest.spec)),
        ("signal_definition", Some(&manifest.signal_definition)),
        ("traces", Some(&manifest.traces)),
        ("golden_rtl", manifest.golden_rtl.as_ref()),
    ] {
        if let Some(p) = p {
            if !p.exists() {
                return Err(err(format!("{what} file `{}` does not exist", p.display())));
            }
        }
    }
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub generated: usize,
    pub syntax_error: usize,
    pub subset_violation: usize,
    pub syntax_ok: usize,
    pub trace_pass: usize,
    pub trace_fail: usize,
    pub vacuous: usize,
    pub inconclusive: usize,
}

impl StatusCounts {
    /// Count one record. `unmapped_filtered` records are excluded from all
    /// accounting; still-`generated` records (never classified) are not
    /// countable and are rejected.
    pub fn add(&mut self, status: AssertionStatus) {
        match status {
            AssertionStatus::UnmappedFiltered => return,
            AssertionStatus::Generated => {
                debug_assert!(false, "record left unclassified");
                return;
            }
            AssertionStatus::SyntaxError => self.syntax_error += 1,
            AssertionStatus::SubsetViolation => self.subset_violation += 1,
            AssertionStatus::SyntaxOk => self.syntax_ok += 1,
            AssertionStatus::TracePass => {
                self.syntax_ok += 1;
                self.trace_pass += 1;
            }
            AssertionStatus::TraceFail => {
                self.syntax_ok += 1;
                self.trace_fail += 1;
            }
            AssertionStatus::Vacuous => {
                self.syntax_ok += 1;
                self.vacuous += 1;
            }
            AssertionStatus::Inconclusive => {
                self.syntax_ok += 1;
                self.inconclusive += 1;
            }
        }
        self.generated += 1;
    }

    pub fn merge(&mut self, other: &StatusCounts) {
        self.generated += other.generated;
        self.syntax_error += other.syntax_error;
        self.subset_violation += other.subset_violation;
        self.syntax_ok += other.syntax_ok;
        self.trace_pass += other.trace_pass;
        self.trace_fail += other.trace_fail;
        self.vacuous += other.vacuous;
        self.inconclusive += other.inconclusive;
    }

    /// Both conservation identities.
    pub fn conserves(&self) -> bool {
        self.generated == self.syntax_error + self.subset_violation + self.syntax_ok
            && self.syntax_ok
                == self.trace_pass + self.trace_fail + self.vacuous + self.inconclusive
    }

    pub fn passed(&self, include_vacuous: bool) -> usize {
        if include_vacuous {
            self.trace_pass + self.vacuous
        } else {
            self.trace_pass
        }
    }
}

/// Integer percentage rounded half-up; `None` when the denominator is zero.
pub fn percent(numerator: usize, denominator: usize) -> Option<u32> {
    if denominator == 0 {
        return None;
    }
    let n = numerator as u64;
    let d = denominator as u64;
    Some(((200 * n + d) / (2 * d)) as u32)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalRow {
    pub signal: String,
    pub counts: StatusCounts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub design_name: String,
    pub backend: String,
    pub include_vacuous: bool,
    pub elapsed_ms: u64,
    /// Per-signal rows in manifest order; signals without records get a
    /// zero row.
    pub rows: Vec<SignalRow>,
    /// Per-category totals keyed by category name.
    pub categories: BTreeMap<Category, StatusCounts>,
    pub totals: StatusCounts,
    pub unmapped_filtered: usize,
    pub errors: Vec<StageError>,
}

/// Aggregate classified records into per-signal and per-category counts.
pub fn aggregate(records: &[AssertionRecord], signal_order: &[String]) -> (Vec<SignalRow>, BTreeMap<Category, StatusCounts>, StatusCounts, usize) {
    let mut rows: Vec<SignalRow> = signal_order
        .iter()
        .map(|s| SignalRow {
            signal: s.clone(),
            counts: StatusCounts::default(),
        })
        .collect();
    let mut categories: BTreeMap<Category, StatusCounts> = Category::ALL
        .iter()
        .map(|c| (*c, StatusCounts::default()))
        .collect();
    let mut totals = StatusCounts::default();
    let mut unmapped = 0usize;
    for record in records {
        if record.status == AssertionStatus::UnmappedFiltered {
            unmapped += 1;
            continue;
        }
        if let Some(row) = rows.iter_mut().find(|r| r.signal == record.target_signal) {
            row.counts.add(record.status);
        } else {
            rows.push(SignalRow {
                signal: record.target_signal.clone(),
                counts: {
                    let mut c = StatusCounts::default();
                    c.add(record.status);
                    c
                },
            });
        }
        categories
            .get_mut(&record.category)
            .expect("all categories present")
            .add(record.status);
        totals.add(record.status);
    }
    debug_assert!(totals.conserves());
    (rows, categories, totals, unmapped)
}

// ---------------------------------------------------------------------------
// Evaluation and orchestration
// ---------------------------------------------------------------------------

/// Run every `syntax_ok` record against the trace and promote its status
/// to a trace outcome.
pub fn evaluate_records(records: &mut [AssertionRecord], trace: &Trace) {
    for record in records.iter_mut() {
        if record.status != AssertionStatus::SyntaxOk {
            continue;
        }
        // Classified syntax_ok implies the text parses.
        let ast = match parse_sva(&record.text) {
            Ok(ast) => ast,
            Err(e) => {
                record.status = AssertionStatus::SyntaxError;
                record.error = Some(e.to_string());
                continue;
            }
        };
        match evaluate(&ast, trace) {
            Ok(verdict) => {
                record.status = match verdict.outcome {
                    Outcome::Pass => AssertionStatus::TracePass,
                    Outcome::Fail => AssertionStatus::TraceFail,
                    Outcome::VacuousPass => AssertionStatus::Vacuous,
                    Outcome::Inconclusive => AssertionStatus::Inconclusive,
                };
                record.verdict = Some(verdict);
            }
            Err(e) => {
                record.status = AssertionStatus::Inconclusive;
                record.error = Some(e.to_string());
            }
        }
    }
}

/// Inputs loaded from a benchmark directory.
pub struct BenchInputs {
    pub spec: DesignSpec,
    pub declarations: DeclarationTable,
    pub trace: Trace,
}

pub fn load_inputs(manifest: &BenchManifest) -> Result<BenchInputs, BenchError> {
    let mut spec = load_spec(&manifest.spec)?;
    spec.design_name = manifest.design_name.clone();
    let decl_text =
        fs::read_to_string(&manifest.signal_definition).map_err(|source| BenchError::Io {
            path: manifest.signal_definition.clone(),
            source,
        })?;
    let declarations = parse_declarations(&decl_text)?;
    let vcd_text = fs::read_to_string(&manifest.traces).map_err(|source| BenchError::Io {
        path: manifest.traces.clone(),
        source,
    })?;
    let trace = parse_vcd(&vcd_text)?;
    Ok(BenchInputs {
        spec,
        declarations,
        trace,
    })
}

/// Full benchmark: pipeline, syntax gate, trace evaluation, aggregation.
pub fn run_bench<B: ChatBackend + Sync + ?Sized>(
    manifest: &BenchManifest,
    backend: &B,
    kb: &KnowledgeBase,
    config: &PipelineConfig,
    include_vacuous: bool,
) -> Result<(BenchReport, PipelineRun), BenchError> {
    let start = Instant::now();
    let inputs = load_inputs(manifest)?;
    let mut run = run_full(
        backend,
        &inputs.spec,
        &manifest.signals,
        &inputs.declarations,
        kb,
        config,
    );
    evaluate_records(&mut run.records, &inputs.trace);
    let signal_order: Vec<String> = run
        .mappings
        .iter()
        .filter_map(|m| m.hdl_identifier.clone())
        .collect();
    let (rows, categories, totals, unmapped) = aggregate(&run.records, &signal_order);
    let report = BenchReport {
        schema_version: crate::SCHEMA_VERSION,
        design_name: manifest.design_name.clone(),
        backend: run.backend.clone(),
        include_vacuous,
        elapsed_ms: start.elapsed().as_millis() as u64,
        rows,
        categories,
        totals,
        unmapped_filtered: unmapped,
        errors: run.errors.clone(),
    };
    Ok((report, run))
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<ReportFormat> {
        match s {
            "table" => Some(ReportFormat::Table),
            "json" => Some(ReportFormat::Json),
            "csv" => Some(ReportFormat::Csv),
            _ => None,
        }
    }
}

fn pct_str(numerator: usize, denominator: usize) -> String {
    match percent(numerator, denominator) {
        Some(p) => format!("{p}%"),
        None => "—".to_string(),
    }
}

pub fn render_report(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serializes") + "\n"
        }
        ReportFormat::Csv => {
            let mut out = String::from("signal,generated,syntax_ok,passed\n");
            for row in &report.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    row.signal,
                    row.counts.generated,
                    row.counts.syntax_ok,
                    row.counts.passed(report.include_vacuous)
                );
            }
            let t = &report.totals;
            let _ = writeln!(
                out,
                "TOTAL,{},{},{}",
                t.generated,
                t.syntax_ok,
                t.passed(report.include_vacuous)
            );
            out
        }
        ReportFormat::Table => render_table(report),
    }
}

fn render_table(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} — backend {}{}",
        report.design_name,
        report.backend,
        if report.include_vacuous {
            " (vacuous passes counted)"
        } else {
            ""
        }
    );
    let width = report
        .rows
        .iter()
        .map(|r| r.signal.len())
        .chain(["signal".len(), "TOTAL".len()])
        .max()
        .unwrap_or(6);
    let _ = writeln!(
        out,
        "{:width$}  {:>9}  {:>9}  {:>6}",
        "signal", "generated", "syntax_ok", "pass"
    );
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{:width$}  {:>9}  {:>9}  {:>6}",
            row.signal,
            row.counts.generated,
            row.counts.syntax_ok,
            row.counts.passed(report.include_vacuous)
        );
    }
    let t = &report.totals;
    let _ = writeln!(
        out,
        "{:width$}  {:>9}  {:>9}  {:>6}",
        "TOTAL",
        t.generated,
        t.syntax_ok,
        t.passed(report.include_vacuous)
    );
    out.push('\n');
    let _ = writeln!(out, "by category:");
    for (category, counts) in &report.categories {
        let _ = writeln!(
            out,
            "  {:12}  generated {:>3}  syntax_ok {:>3}  pass {:>3}  fail {:>3}  vacuous {:>3}  inconclusive {:>3}",
            category.as_str(),
            counts.generated,
            counts.syntax_ok,
            counts.passed(false),
            counts.trace_fail,
            counts.vacuous,
            counts.inconclusive,
        );
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "syntax correct: {} / pass: {}",
        pct_str(t.syntax_ok, t.generated),
        pct_str(t.passed(report.include_vacuous), t.generated)
    );
    if report.unmapped_filtered > 0 {
        let _ = writeln!(
            out,
            "(filtered {} assertion(s) referencing undeclared signals)",
            report.unmapped_filtered
        );
    }
    if !report.errors.is_empty() {
        let _ = writeln!(out, "stage errors: {}", report.errors.len());
    }
    out
}

// ---------------------------------------------------------------------------
// Formal-tool handoff
// ---------------------------------------------------------------------------

/// Bundle written by `export-fpv`: assertions plus an id manifest, so an
/// external formal property verifier can return verdicts keyed by id.
#[derive(Debug, Serialize, Deserialize)]
pub struct FpvBundle {
    pub schema_version: u32,
    pub design_name: String,
    pub assertions: Vec<FpvAssertion>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FpvAssertion {
    pub id: String,
    pub category: Category,
    pub sva: String,
}

pub fn export_fpv(
    design_name: &str,
    records: &[AssertionRecord],
    out_dir: &Path,
) -> std::io::Result<FpvBundle> {
    let assertions: Vec<FpvAssertion> = records
        .iter()
        .filter(|r| {
            !matches!(
                r.status,
                AssertionStatus::UnmappedFiltered
                    | AssertionStatus::SyntaxError
                    | AssertionStatus::SubsetViolation
            )
        })
        .map(|r| FpvAssertion {
            id: r.id.clone(),
            category: r.category,
            sva: r.text.clone(),
        })
        .collect();
    let bundle = FpvBundle {
        schema_version: crate::SCHEMA_VERSION,
        design_name: design_name.to_string(),
        assertions,
    };
    fs::create_dir_all(out_dir)?;
    let mut sva = String::new();
    for a in &bundle.assertions {
        let _ = writeln!(sva, "// {}", a.id);
        let _ = writeln!(sva, "{}\n", a.sva);
    }
    fs::write(out_dir.join("assertions.sva"), sva)?;
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&bundle).expect("bundle serializes") + "\n",
    )?;
    Ok(bundle)
}

/// External FPV verdicts: record id -> "pass" | "fail" | "inconclusive".
pub fn apply_fpv_results(
    records: &mut [AssertionRecord],
    results: &BTreeMap<String, String>,
) -> Vec<String> {
    let mut warnings = Vec::new();
    for record in records.iter_mut() {
        let Some(verdict) = results.get(&record.id) else {
            continue;
        };
        let status = match verdict.as_str() {
            "pass" => AssertionStatus::TracePass,
            "fail" => AssertionStatus::TraceFail,
            "inconclusive" => AssertionStatus::Inconclusive,
            other => {
                warnings.push(format!(
                    "unknown verdict `{other}` for `{}` ignored",
                    record.id
                ));
                continue;
            }
        };
        record.status = status;
    }
    for id in results.keys() {
        if !records.iter().any(|r| r.id == *id) {
            warnings.push(format!("verdict for unknown assertion `{id}` ignored"));
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(signal: &str, category: Category, status: AssertionStatus) -> AssertionRecord {
        AssertionRecord {
            id: format!("{signal}-{category}-x"),
            target_signal: signal.to_string(),
            category,
            text: String::new(),
            rationale: String::new(),
            status,
            error: None,
            verdict: None,
        }
    }

    #[test]
    fn aggregation_conserves_and_excludes_unmapped() {
        let records = vec![
            record("a", Category::Width, AssertionStatus::TracePass),
            record("a", Category::Function, AssertionStatus::TraceFail),
            record("a", Category::Function, AssertionStatus::SyntaxError),
            record("b", Category::Connectivity, AssertionStatus::Vacuous),
            record("b", Category::Connectivity, AssertionStatus::SubsetViolation),
            record("b", Category::Function, AssertionStatus::Inconclusive),
            record("b", Category::Width, AssertionStatus::UnmappedFiltered),
        ];
        let order = vec!["a".to_string(), "b".to_string()];
        let (rows, categories, totals, unmapped) = aggregate(&records, &order);
        assert_eq!(totals.generated, 6);
        assert_eq!(totals.syntax_ok, 4);
        assert!(totals.conserves());
        assert_eq!(unmapped, 1);
        assert_eq!(rows[0].counts.generated, 3);
        assert_eq!(rows[1].counts.generated, 3);
        assert_eq!(categories[&Category::Width].generated, 1);
        assert_eq!(totals.passed(false), 1);
        assert_eq!(totals.passed(true), 2);
    }

    #[test]
    fn percent_rounds_half_up() {
        assert_eq!(percent(50, 56), Some(89));
        assert_eq!(percent(1, 2), Some(50));
        assert_eq!(percent(1, 3), Some(33));
        assert_eq!(percent(5, 8), Some(63)); // 62.5 rounds up
        assert_eq!(percent(0, 0), None);
        assert_eq!(percent(56, 56), Some(100));
    }

    #[test]
    fn table_render_shows_dash_for_empty_report() {
        let report = BenchReport {
            schema_version: crate::SCHEMA_VERSION,
            design_name: "empty".into(),
            backend: "mock".into(),
            include_vacuous: false,
            elapsed_ms: 0,
            rows: Vec::new(),
            categories: BTreeMap::new(),
            totals: StatusCounts::default(),
            unmapped_filtered: 0,
            errors: Vec::new(),
        };
        let table = render_report(&report, ReportFormat::Table);
        assert!(table.contains("syntax correct: — / pass: —"));
    }

    #[test]
    fn fpv_results_override_statuses() {
        let mut records = vec![
            record("a", Category::Width, AssertionStatus::Inconclusive),
            record("b", Category::Width, AssertionStatus::TracePass),
        ];
        let mut results = BTreeMap::new();
        results.insert(records[0].id.clone(), "pass".to_string());
        results.insert("nope".to_string(), "fail".to_string());
        let warnings = apply_fpv_results(&mut records, &results);
        assert_eq!(records[0].status, AssertionStatus::TracePass);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("nope"));
    }

    #[test]
    fn manifest_validation_catches_label_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bench.toml");
        fs::write(
            &path,
            r#"
design_name = "demo"
spec = "spec.md"
signal_definition = "sig.v"
traces = "t.vcd"

[[signals]]
name = "a"
type = "io_port"
label = "data"
"#,
        )
        .unwrap();
        let err = load_manifest(&path).unwrap_err();
        assert!(err.to_string().contains("exactly one clock"));
    }
}
