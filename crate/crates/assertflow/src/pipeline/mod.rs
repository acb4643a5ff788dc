//! Three-stage specification-to-assertion pipeline.
//!
//! Stage 1 extracts a structured per-signal record from the specification,
//! stage 2 aligns spec-level names with HDL identifiers (deterministic
//! matching first, model fill-in second), stage 3 generates categorized
//! assertions with passage retrieval from a local knowledge base. Stage
//! failures land in a per-signal error ledger instead of aborting the run.

mod kb;
mod stages;

pub use kb::{KnowledgeBase, Passage, PASSAGE_WORDS};
pub use stages::{
    run_full, run_signal_mapper, run_spec_analyzer, run_sva_generator, PipelineConfig,
};

use serde::{Deserialize, Serialize};

use crate::signal_map::SignalMapping;
use crate::sva::SvaError;
use crate::trace_eval::Verdict;
use crate::verilog_decl::DeclarationTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Width,
    Connectivity,
    Function,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Width, Category::Connectivity, Category::Function];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Width => "width",
            Category::Connectivity => "connectivity",
            Category::Function => "function",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        match s {
            "width" => Some(Category::Width),
            "connectivity" => Some(Category::Connectivity),
            "function" => Some(Category::Function),
            _ => None,
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    IoPort,
    Register,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalLabel {
    Clock,
    Reset,
    Control,
    Data,
}

impl SignalLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalLabel::Clock => "clock",
            SignalLabel::Reset => "reset",
            SignalLabel::Control => "control",
            SignalLabel::Data => "data",
        }
    }
}

/// One signal the pipeline should process, as enumerated by the benchmark
/// manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: SignalKind,
    pub label: SignalLabel,
}

/// Four-part natural-language description produced by the spec analyzer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalDescription {
    pub definition: String,
    pub functionality: String,
    pub interconnection: String,
    pub additional: String,
}

impl SignalDescription {
    pub fn contains_verbatim(&self, needle: &str) -> bool {
        [
            &self.definition,
            &self.functionality,
            &self.interconnection,
            &self.additional,
        ]
        .iter()
        .any(|field| field.contains(needle))
    }
}

/// Structured per-signal record extracted from the specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalExtraction {
    pub name: String,
    pub description: SignalDescription,
    /// Related signal names; each appears verbatim in the description.
    pub interconnection_signals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub signal: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertionStatus {
    /// Produced by stage 3, not yet checked.
    Generated,
    /// References a signal that is not declared in the RTL; excluded from
    /// all downstream accounting.
    UnmappedFiltered,
    SyntaxError,
    SubsetViolation,
    SyntaxOk,
    TracePass,
    TraceFail,
    Vacuous,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionRecord {
    pub id: String,
    /// Signal the assertion was generated for (HDL identifier).
    pub target_signal: String,
    pub category: Category,
    pub text: String,
    pub rationale: String,
    pub status: AssertionStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

/// Everything one pipeline invocation produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineRun {
    pub schema_version: u32,
    pub design_name: String,
    pub backend: String,
    pub model: String,
    pub extractions: Vec<SignalExtraction>,
    pub mappings: Vec<SignalMapping>,
    pub mapping_warnings: Vec<String>,
    pub records: Vec<AssertionRecord>,
    pub errors: Vec<StageError>,
}

/// Move `Generated` records through the syntax gate: lexically unmapped
/// identifiers first, then a full parse of the assertion text.
pub fn classify_records(records: &mut [AssertionRecord], declarations: &DeclarationTable) {
    for record in records.iter_mut() {
        if record.status != AssertionStatus::Generated {
            continue;
        }
        let unknown: Vec<String> = lexical_identifiers(&record.text)
            .into_iter()
            .filter(|name| !declarations.contains(name))
            .collect();
        if !unknown.is_empty() {
            record.status = AssertionStatus::UnmappedFiltered;
            record.error = Some(format!("undeclared signals: {}", unknown.join(", ")));
            continue;
        }
        match crate::sva::parse_sva(&record.text) {
            Ok(_) => record.status = AssertionStatus::SyntaxOk,
            Err(e @ SvaError::SubsetViolation { .. }) => {
                record.status = AssertionStatus::SubsetViolation;
                record.error = Some(e.to_string());
            }
            Err(e) => {
                record.status = AssertionStatus::SyntaxError;
                record.error = Some(e.to_string());
            }
        }
    }
}

const SVA_KEYWORDS: &[&str] = &[
    "assert", "property", "posedge", "negedge", "disable", "iff", "not", "and", "or",
];

/// Identifier-shaped words in raw assertion text, skipping SVA keywords,
/// `$`-functions and the base/digit tail of sized literals (`8'hff`).
/// Works on unparseable text, which is exactly when it is needed.
pub fn lexical_identifiers(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            let word = &text[start..i];
            let preceded_by = start.checked_sub(1).map(|p| bytes[p] as char);
            if matches!(preceded_by, Some('$') | Some('\'')) {
                continue;
            }
            if SVA_KEYWORDS.contains(&word) {
                continue;
            }
            if !out.contains(&word.to_string()) {
                out.push(word.to_string());
            }
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog_decl::parse_declarations;

    #[test]
    fn lexical_scan_skips_keywords_literals_and_sysfuncs() {
        let ids = lexical_identifiers(
            "assert property (@(posedge wb_clk_i) $rose(sr[0]) |-> txr == 8'hff);",
        );
        assert_eq!(ids, vec!["wb_clk_i", "sr", "txr"]);
    }

    #[test]
    fn lexical_scan_handles_unparseable_text() {
        let ids = lexical_identifiers("assert property (@(posedge clk) a |-> );");
        assert_eq!(ids, vec!["clk", "a"]);
    }

    #[test]
    fn classification_orders_unmapped_before_syntax() {
        let decls = parse_declarations("module m (input wire clk, input wire a); endmodule")
            .unwrap();
        let mk = |text: &str| AssertionRecord {
            id: "t".into(),
            target_signal: "a".into(),
            category: Category::Function,
            text: text.into(),
            rationale: String::new(),
            status: AssertionStatus::Generated,
            error: None,
            verdict: None,
        };
        let mut records = vec![
            mk("assert property (@(posedge clk) ghost |-> );"),
            mk("assert property (@(posedge clk) a |-> );"),
            mk("assert property (@(posedge clk) a + a);"),
            mk("assert property (@(posedge clk) a |-> a);"),
        ];
        classify_records(&mut records, &decls);
        assert_eq!(records[0].status, AssertionStatus::UnmappedFiltered);
        assert_eq!(records[1].status, AssertionStatus::SyntaxError);
        assert_eq!(records[2].status, AssertionStatus::SubsetViolation);
        assert_eq!(records[3].status, AssertionStatus::SyntaxOk);
    }
}
