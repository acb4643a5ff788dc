//! Command-line front end for the specification-to-assertion pipeline.
//!
//! Exit codes: 0 success, 1 assertion-level failures (lint errors, failing
//! evaluations), 2 usage or environment errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use assertflow::bench::{
    apply_fpv_results, export_fpv, load_inputs, load_manifest, render_report, run_bench,
    BenchManifest, BenchReport, ReportFormat,
};
use assertflow::llm_backend::{
    ChatBackend, LiveBackend, MockBackend, RecordingBackend, ReplayBackend, TranscriptStore,
};
use assertflow::pipeline::{
    classify_records, run_signal_mapper, run_spec_analyzer, run_sva_generator, KnowledgeBase,
    PipelineConfig, PipelineRun,
};
use assertflow::sva::parse_sva_multi;
use assertflow::trace_eval::{evaluate, Outcome};

#[derive(Parser)]
#[command(name = "assertflow", version, about = "Generate and evaluate SystemVerilog assertions from design specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Completion backend.
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Mock)]
    backend: BackendKind,

    /// Transcript file or directory (overrides the manifest's).
    #[arg(long, global = true)]
    transcripts: Option<PathBuf>,

    /// Knowledge-base directory of .txt notes for retrieval.
    #[arg(long, global = true)]
    kb: Option<PathBuf>,

    /// Worker threads for per-signal requests.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Seed for the mock backend.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Count vacuous passes as passes.
    #[arg(long, global = true)]
    include_vacuous: bool,

    /// Model name (part of the transcript request key).
    #[arg(long, global = true, default_value = "default")]
    model: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Live,
    Replay,
    Mock,
}

#[derive(Subcommand)]
enum Command {
    /// Stage 1: extract structured signal records from the specification.
    Extract {
        /// Benchmark directory (containing bench.toml).
        bench: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stage 2: align spec signal names with HDL identifiers.
    Map {
        bench: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stages 1-3: generate assertions and run the syntax gate.
    Generate {
        bench: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse assertions from a .sva file and report syntax verdicts.
    Lint { file: PathBuf },
    /// Evaluate assertions from a .sva file against a benchmark's trace.
    Evaluate { bench: PathBuf, file: PathBuf },
    /// Full pipeline plus trace evaluation and aggregation.
    Bench {
        bench: PathBuf,
        /// Write the aggregated report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the full pipeline run (records, mappings, errors) as JSON.
        #[arg(long)]
        run_out: Option<PathBuf>,
    },
    /// Re-render a stored report.
    Report {
        /// Report JSON produced by `bench --out`.
        run: PathBuf,
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Export evaluable assertions for an external formal property verifier.
    ExportFpv {
        /// Pipeline run JSON produced by `bench --run-out` or `generate`.
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON object of record id -> pass|fail|inconclusive to merge back.
        #[arg(long)]
        fpv_results: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let config = PipelineConfig {
        model: cli.model.clone(),
        workers: cli.workers,
    };
    match &cli.command {
        Command::Extract { bench, out } => {
            let manifest = manifest_for(bench)?;
            let inputs = load_inputs(&manifest)?;
            let backend = make_backend(cli, &manifest)?;
            let (extractions, errors) =
                run_spec_analyzer(backend.as_ref(), &inputs.spec, &manifest.signals, &config);
            for e in &errors {
                eprintln!("{}: {}", e.signal.as_deref().unwrap_or("-"), e.message);
            }
            emit(
                out.as_deref(),
                &json!({
                    "schema_version": assertflow::SCHEMA_VERSION,
                    "design_name": manifest.design_name,
                    "extractions": extractions,
                    "errors": errors,
                }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Map { bench, out } => {
            let manifest = manifest_for(bench)?;
            let inputs = load_inputs(&manifest)?;
            let backend = make_backend(cli, &manifest)?;
            let spec_names: Vec<String> =
                manifest.signals.iter().map(|s| s.name.clone()).collect();
            let (mappings, warnings, errors) = run_signal_mapper(
                backend.as_ref(),
                &spec_names,
                &inputs.declarations,
                &config,
            );
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            emit(
                out.as_deref(),
                &json!({
                    "schema_version": assertflow::SCHEMA_VERSION,
                    "design_name": manifest.design_name,
                    "mappings": mappings,
                    "warnings": warnings,
                    "errors": errors,
                }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate { bench, out } => {
            let manifest = manifest_for(bench)?;
            let inputs = load_inputs(&manifest)?;
            let backend = make_backend(cli, &manifest)?;
            let kb = load_kb(cli)?;
            let (extractions, mut errors) =
                run_spec_analyzer(backend.as_ref(), &inputs.spec, &manifest.signals, &config);
            let spec_names: Vec<String> =
                manifest.signals.iter().map(|s| s.name.clone()).collect();
            let (mappings, mapping_warnings, mapper_errors) = run_signal_mapper(
                backend.as_ref(),
                &spec_names,
                &inputs.declarations,
                &config,
            );
            errors.extend(mapper_errors);
            let (mut records, generator_errors) = run_sva_generator(
                backend.as_ref(),
                &inputs.spec,
                &extractions,
                &mappings,
                &inputs.declarations,
                &kb,
                &manifest.signals,
                &config,
            );
            errors.extend(generator_errors);
            classify_records(&mut records, &inputs.declarations);
            let run = PipelineRun {
                schema_version: assertflow::SCHEMA_VERSION,
                design_name: manifest.design_name.clone(),
                backend: backend.name().to_string(),
                model: config.model.clone(),
                extractions,
                mappings,
                mapping_warnings,
                records,
                errors,
            };
            emit(out.as_deref(), &serde_json::to_value(&run)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Lint { file } => {
            let text = fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            match parse_sva_multi(&text) {
                Ok(asts) => {
                    for ast in &asts {
                        println!("ok: {}", assertflow::sva::pretty_print(ast));
                    }
                    println!("{} assertion(s), all parse", asts.len());
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    println!("{e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Evaluate { bench, file } => {
            let manifest = manifest_for(bench)?;
            let inputs = load_inputs(&manifest)?;
            let text = fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            let asts = match parse_sva_multi(&text) {
                Ok(asts) => asts,
                Err(e) => {
                    println!("{e}");
                    return Ok(ExitCode::from(1));
                }
            };
            let mut failures = 0usize;
            for (idx, ast) in asts.iter().enumerate() {
                let label = ast
                    .label
                    .clone()
                    .unwrap_or_else(|| format!("assertion {}", idx + 1));
                match evaluate(ast, &inputs.trace) {
                    Ok(verdict) => {
                        let outcome = match verdict.outcome {
                            Outcome::Pass => "pass",
                            Outcome::Fail => "FAIL",
                            Outcome::VacuousPass => "vacuous",
                            Outcome::Inconclusive => "inconclusive",
                        };
                        println!("{label}: {outcome} ({} attempts)", verdict.attempts);
                        if verdict.outcome == Outcome::Fail {
                            failures += 1;
                            if let Some(f) = &verdict.first_failure {
                                println!("  {}", f.detail);
                            }
                        }
                    }
                    Err(e) => {
                        println!("{label}: error: {e}");
                        failures += 1;
                    }
                }
            }
            Ok(if failures > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Bench {
            bench,
            out,
            run_out,
        } => {
            let manifest = manifest_for(bench)?;
            let backend = make_backend(cli, &manifest)?;
            let kb = load_kb(cli)?;
            let (report, run) = run_bench(
                &manifest,
                backend.as_ref(),
                &kb,
                &config,
                cli.include_vacuous,
            )?;
            print!("{}", render_report(&report, ReportFormat::Table));
            if let Some(path) = out {
                write_json(path, &serde_json::to_value(&report)?)?;
            }
            if let Some(path) = run_out {
                write_json(path, &serde_json::to_value(&run)?)?;
            }
            // Partial stage errors are reported in the table; a run where
            // every request failed produced nothing worth exiting 0 for.
            if report.totals.generated == 0 && !run.errors.is_empty() {
                anyhow::bail!(
                    "no assertions generated; first stage error: {}",
                    run.errors[0].message
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { run, format } => {
            let format = ReportFormat::parse(format)
                .with_context(|| format!("unknown report format `{format}`"))?;
            let text = fs::read_to_string(run)
                .with_context(|| format!("reading {}", run.display()))?;
            let report: BenchReport =
                serde_json::from_str(&text).context("parsing report JSON")?;
            if report.schema_version != assertflow::SCHEMA_VERSION {
                bail!(
                    "report schema version {} not supported (expected {})",
                    report.schema_version,
                    assertflow::SCHEMA_VERSION
                );
            }
            print!("{}", render_report(&report, format));
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportFpv {
            run,
            out,
            fpv_results,
        } => {
            let text = fs::read_to_string(run)
                .with_context(|| format!("reading {}", run.display()))?;
            let mut pipeline_run: PipelineRun =
                serde_json::from_str(&text).context("parsing pipeline run JSON")?;
            if let Some(results_path) = fpv_results {
                let results_text = fs::read_to_string(results_path)
                    .with_context(|| format!("reading {}", results_path.display()))?;
                let results: BTreeMap<String, String> =
                    serde_json::from_str(&results_text).context("parsing FPV results")?;
                for warning in apply_fpv_results(&mut pipeline_run.records, &results) {
                    eprintln!("warning: {warning}");
                }
                write_json(run, &serde_json::to_value(&pipeline_run)?)?;
            }
            let bundle = export_fpv(&pipeline_run.design_name, &pipeline_run.records, out)?;
            println!(
                "exported {} assertion(s) to {}",
                bundle.assertions.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Accept either a benchmark directory or a direct path to its manifest.
fn manifest_for(path: &Path) -> Result<BenchManifest> {
    let manifest_path = if path.is_dir() {
        path.join("bench.toml")
    } else {
        path.to_path_buf()
    };
    Ok(load_manifest(&manifest_path)?)
}

fn make_backend(cli: &Cli, manifest: &BenchManifest) -> Result<Box<dyn ChatBackend + Sync>> {
    match cli.backend {
        BackendKind::Mock => Ok(Box::new(MockBackend::new(cli.seed))),
        BackendKind::Replay => {
            let path = cli
                .transcripts
                .clone()
                .or_else(|| manifest.transcripts.clone())
                .context("replay backend needs --transcripts or a manifest transcripts path")?;
            let store = TranscriptStore::load(&path)?;
            if store.is_empty() {
                bail!("no transcripts found at {}", path.display());
            }
            Ok(Box::new(ReplayBackend::new(store)))
        }
        BackendKind::Live => {
            let live = LiveBackend::from_env()?;
            match cli.transcripts.clone().or_else(|| manifest.transcripts.clone()) {
                Some(path) => {
                    let store = TranscriptStore::load(&path)?;
                    Ok(Box::new(RecordingBackend::new(live, store)))
                }
                None => Ok(Box::new(live)),
            }
        }
    }
}

fn load_kb(cli: &Cli) -> Result<KnowledgeBase> {
    match &cli.kb {
        Some(dir) => {
            KnowledgeBase::load(dir).with_context(|| format!("loading kb from {}", dir.display()))
        }
        None => Ok(KnowledgeBase::default()),
    }
}

fn emit(out: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
