//! Specification-to-assertion pipeline for hardware verification.
//!
//! The crate implements a three-stage flow that turns a natural-language
//! design specification into categorized SystemVerilog Assertions:
//!
//! 1. spec analysis — extract a structured per-signal record from the
//!    specification document ([`pipeline::run_spec_analyzer`]);
//! 2. signal mapping — align spec-level signal names with HDL identifiers
//!    ([`signal_map`], [`pipeline::run_signal_mapper`]);
//! 3. SVA generation — produce width/connectivity/function assertions with
//!    local-knowledge retrieval ([`pipeline::run_sva_generator`]).
//!
//! Generated assertions are checked for syntax with a real parser ([`sva`])
//! and evaluated against golden-design waveform traces ([`trace_eval`]).
//! The [`bench`] module ties everything together behind a benchmark
//! directory contract and renders per-signal, per-category reports.

pub mod bench;
pub mod llm_backend;
pub mod pipeline;
pub mod signal_map;
pub mod spec_ingest;
pub mod sva;
pub mod trace_eval;
pub mod verilog_decl;

/// Schema version stamped into every JSON artifact the crate writes.
pub const SCHEMA_VERSION: u32 = 1;
