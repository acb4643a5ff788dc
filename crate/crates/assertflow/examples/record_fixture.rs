//! Regenerates the shipped `fixtures/i2c` benchmark artifacts.
//!
//! Builds the waveform trace from a hand-checked sample table, verifies
//! every planned assertion against it, then drives the full pipeline with
//! a scripted backend wrapped in a recorder so `transcripts/` ends up
//! with exactly the request/response pairs a replay run will ask for.
//!
//! Run from the workspace root:
//!
//! ```text
//! cargo run -p assertflow --example record_fixture
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use assertflow::bench::{load_inputs, load_manifest, run_bench};
use assertflow::llm_backend::{
    extract_json_block, BackendError, ChatRequest, FnBackend, RecordingBackend, TranscriptStore,
};
use assertflow::pipeline::{Category, KnowledgeBase, PipelineConfig};
use assertflow::sva::parse_sva;
use assertflow::trace_eval::{evaluate, Outcome};

const CLOCK_PERIOD: u64 = 10;
const SAMPLES: usize = 40;

// ---------------------------------------------------------------------------
// Waveform sample table
// ---------------------------------------------------------------------------

/// `(width, [(from_sample, value), ...])`; the value holds until the next
/// set point. Sample `i` is the value at clock edge `i`.
type Wave = (u32, &'static [(usize, u64)]);

/// Bus traffic: ctr writes (0x80 then 0xC0), prescaler reprogramming down
/// to the illegal value zero, a status read, a txr write, a command write,
/// then a transfer completion with interrupt. One spurious ack pulse is
/// planted at sample 19 and sr briefly raises IF with TIP still the wrong
/// bit at samples 37-38 -- those two defects are what the failing
/// assertions catch.
const WAVES: &[(&str, Wave)] = &[
    ("wb_rst_i", (1, &[(0, 1), (2, 0)])),
    ("arst_i", (1, &[(0, 0)])),
    (
        "wb_adr_i",
        (
            3,
            &[
                (0, 0),
                (4, 2),
                (6, 0),
                (8, 2),
                (10, 0),
                (16, 1),
                (18, 0),
                (24, 4),
                (26, 0),
                (28, 3),
                (30, 0),
                (32, 4),
                (34, 0),
            ],
        ),
    ),
    (
        "wb_dat_i",
        (
            8,
            &[
                (0, 0),
                (4, 0x80),
                (6, 0),
                (8, 0xc0),
                (10, 0),
                (12, 0xc8),
                (14, 0),
                (28, 0x55),
                (30, 0),
                (32, 0x90),
                (34, 0),
            ],
        ),
    ),
    ("wb_dat_o", (8, &[(0, 0)])),
    (
        "wb_we_i",
        (
            1,
            &[
                (0, 0),
                (4, 1),
                (6, 0),
                (8, 1),
                (10, 0),
                (12, 1),
                (14, 0),
                (16, 1),
                (18, 0),
                (20, 1),
                (22, 0),
                (28, 1),
                (30, 0),
                (32, 1),
                (34, 0),
            ],
        ),
    ),
    (
        "wb_stb_i",
        (
            1,
            &[
                (0, 0),
                (4, 1),
                (6, 0),
                (8, 1),
                (10, 0),
                (12, 1),
                (14, 0),
                (16, 1),
                (18, 0),
                (20, 1),
                (22, 0),
                (24, 1),
                (26, 0),
                (28, 1),
                (30, 0),
                (32, 1),
                (34, 0),
            ],
        ),
    ),
    (
        "wb_cyc_i",
        (
            1,
            &[
                (0, 0),
                (4, 1),
                (6, 0),
                (8, 1),
                (10, 0),
                (12, 1),
                (14, 0),
                (16, 1),
                (18, 0),
                (20, 1),
                (22, 0),
                (24, 1),
                (26, 0),
                (28, 1),
                (30, 0),
                (32, 1),
                (34, 0),
            ],
        ),
    ),
    (
        "wb_ack_o",
        (
            1,
            &[
                (0, 0),
                (5, 1),
                (6, 0),
                (9, 1),
                (10, 0),
                (13, 1),
                (14, 0),
                (17, 1),
                (18, 0),
                (19, 1), // spurious: no strobe this cycle
                (20, 0),
                (21, 1),
                (22, 0),
                (25, 1),
                (26, 0),
                (29, 1),
                (30, 0),
                (33, 1),
                (34, 0),
            ],
        ),
    ),
    ("wb_inta_o", (1, &[(0, 0), (38, 1)])),
    ("scl_pad_i", (1, &[(0, 0)])),
    ("scl_pad_o", (1, &[(0, 0)])),
    ("scl_pad_oe", (1, &[(0, 0)])),
    ("sda_pad_i", (1, &[(0, 0)])),
    ("sda_pad_o", (1, &[(0, 0)])),
    ("sda_pad_oe", (1, &[(0, 0)])),
    (
        "prer",
        (16, &[(0, 0xffff), (13, 0xffc8), (17, 0x00c8), (21, 0x0000)]),
    ),
    ("ctr", (8, &[(0, 0), (5, 0x80), (9, 0xc0)])),
    ("txr", (8, &[(0, 0), (29, 0x55)])),
    ("rxr", (8, &[(0, 0)])),
    ("cr", (8, &[(0, 0), (33, 0x90), (34, 0x10)])),
    (
        "sr",
        (8, &[(0, 0), (34, 0x22), (37, 0x21), (39, 0x00)]),
    ),
];

fn render_vcd() -> String {
    // id codes: printable characters starting at '!'
    let codes: Vec<char> = (0..=WAVES.len()).map(|i| (b'!' + i as u8) as char).collect();
    let clk_code = codes[WAVES.len()];

    let mut out = String::new();
    out.push_str("$date regenerated by record_fixture $end\n");
    out.push_str("$timescale 1ns $end\n");
    out.push_str("$scope module i2c_master_top $end\n");
    for (i, (name, (width, _))) in WAVES.iter().enumerate() {
        if *width == 1 {
            let _ = writeln!(out, "$var wire 1 {} {} $end", codes[i], name);
        } else {
            let _ = writeln!(
                out,
                "$var wire {width} {} {} [{}:0] $end",
                codes[i],
                name,
                width - 1
            );
        }
    }
    let _ = writeln!(out, "$var wire 1 {clk_code} wb_clk_i $end");
    out.push_str("$upscope $end\n$enddefinitions $end\n");

    // (time, change line); clock edges at t = i*P + P/2 (rise) and (i+1)*P (fall)
    let mut events: Vec<(u64, String)> = Vec::new();
    for (i, (_, (width, points))) in WAVES.iter().enumerate() {
        let mut prev: Option<u64> = None;
        for &(sample, value) in *points {
            if prev == Some(value) {
                continue;
            }
            prev = Some(value);
            let t = sample as u64 * CLOCK_PERIOD;
            let line = if *width == 1 {
                format!("{value}{}", codes[i])
            } else {
                format!("b{value:0w$b} {}", codes[i], w = *width as usize)
            };
            events.push((t, line));
        }
    }
    events.push((0, format!("0{clk_code}")));
    for i in 0..SAMPLES as u64 {
        events.push((i * CLOCK_PERIOD + CLOCK_PERIOD / 2, format!("1{clk_code}")));
        events.push(((i + 1) * CLOCK_PERIOD, format!("0{clk_code}")));
    }
    events.sort_by_key(|(t, _)| *t);

    let mut current = u64::MAX;
    for (t, line) in events {
        if t != current {
            let _ = writeln!(out, "#{t}");
            current = t;
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Assertion plan
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum Expect {
    Pass,
    Fail,
    /// References an undeclared identifier; filtered before evaluation.
    Filtered,
}

struct Planned {
    signal: &'static str,
    category: Category,
    sva: String,
    rationale: &'static str,
    expect: Expect,
}

fn clocked(body: &str) -> String {
    format!("assert property (@(posedge wb_clk_i) {body});")
}

fn plan() -> Vec<Planned> {
    use Category::*;
    use Expect::*;
    let mut plan = Vec::new();
    // One width check per architectural signal.
    for (name, (width, _)) in WAVES {
        plan.push(Planned {
            signal: name,
            category: Width,
            sva: clocked(&format!("$bits({name}) == {width}")),
            rationale: "declared width matches the register map",
            expect: Pass,
        });
    }
    plan.push(Planned {
        signal: "wb_clk_i",
        category: Width,
        sva: clocked("$bits(wb_clk_i) == 1"),
        rationale: "declared width matches the register map",
        expect: Pass,
    });

    let mut p = |signal: &'static str, category, sva: &str, rationale: &'static str, expect| {
        plan.push(Planned {
            signal,
            category,
            sva: clocked(sva),
            rationale,
            expect,
        })
    };

    // connectivity
    p("wb_stb_i", Connectivity, "wb_stb_i |-> wb_cyc_i", "strobe only valid inside a bus cycle", Pass);
    p("wb_stb_i", Connectivity, "wb_stb_i |=> wb_ack_o", "single-cycle slave acknowledges every strobe", Fail);
    p("wb_ack_o", Connectivity, "wb_ack_o |-> wb_stb_i", "no acknowledge without a strobe", Fail);
    p("wb_inta_o", Connectivity, "wb_inta_o |-> sr[0]", "interrupt output sourced from the IF flag", Fail);
    p("ctr", Connectivity, "wb_rst_i |=> ctr == 8'h00", "control register clears on reset", Pass);
    p("ctr", Connectivity, "$rose(ctr[7]) |-> !wb_rst_i", "EN can only be set outside reset", Pass);
    p("ctr", Connectivity, "ctr[6] |-> ctr[7]", "IEN is only programmed together with EN", Pass);
    p("ctr", Connectivity, "wb_we_i && wb_stb_i && wb_adr_i == 3'h2 |=> ctr == $past(wb_dat_i)", "ctr captures bus data one cycle after the data phase", Pass);
    p("ctr", Connectivity, "core_busy_q |-> ctr[7]", "serial engine only busy while enabled", Filtered);
    p("sr", Connectivity, "sr[1] |-> ctr[7]", "TIP requires the core enable", Pass);
    p("sr", Connectivity, "sr[0] && ctr[6] |=> wb_inta_o", "IF with IEN raises the interrupt line", Pass);
    p("sr", Connectivity, "$rose(sr[1]) |-> $past(cr[7] || cr[4])", "TIP only rises after a start or write command", Pass);
    p("sr", Connectivity, "wb_rst_i |=> sr == 8'h00", "status register clears on reset", Pass);
    p("sr", Connectivity, "$rose(sr[0]) |-> ##[1:2] (wb_inta_o || !ctr[6])", "IF reaches the interrupt pin within two cycles", Pass);
    p("sr", Connectivity, "sr[5] |-> (sr[1] || sr[0])", "arbitration lost only during or right after a transfer", Pass);
    p("sr", Connectivity, "sr[0] |-> sr[1]", "IF implies a transfer still in progress", Fail);
    p("sr", Connectivity, "$fell(sr[1]) |=> sr[0]", "IF sets the cycle after TIP clears", Pass);

    // function
    p("ctr", Function, "!$past(wb_stb_i && wb_we_i && wb_adr_i == 3'h2) |-> $stable(ctr)", "ctr only changes on a write to address 2", Pass);
    p("ctr", Function, "ctr[5:0] == 6'b000000", "reserved control bits read as zero", Pass);
    p("ctr", Function, "wb_rst_i |-> ##1 !ctr[7]", "EN is low right after reset", Pass);
    p("ctr", Function, "ctr == 8'h00 || ctr == 8'h80 || ctr == 8'hc0", "only documented control encodings are reachable", Pass);
    p("ctr", Function, "$rose(ctr[6]) |-> ctr[7]", "IEN is never enabled without EN", Pass);
    p("sr", Function, "$rose(sr[0]) |-> $fell(sr[1])", "IF sets exactly when TIP clears", Pass);
    p("sr", Function, "not (sr[1] && sr[0])", "TIP and IF are mutually exclusive", Pass);
    p("sr", Function, "sr[1] |-> sr[5]", "a transfer in this trace runs with arbitration monitoring", Pass);
    p("sr", Function, "$rose(sr[5]) |-> $past(cr[7])", "arbitration loss follows an issued start command", Pass);
    p("sr", Function, "wb_adr_i == 3'h4 && wb_stb_i && !wb_we_i |=> wb_dat_o == $past(sr)", "status reads return the sampled flags", Pass);
    p("sr", Function, "sr[2] == 1'b0", "status bit 2 always reads zero", Pass);
    p("sr", Function, "sr_shadow == sr", "shadow copy tracks the architectural register", Filtered);
    p("prer", Function, "wb_rst_i |=> prer == 16'hffff", "prescaler resets to all ones", Pass);
    p("prer", Function, "ctr[7] |-> $stable(prer)", "prescaler must not be reprogrammed while enabled", Fail);
    p("prer", Function, "prer != 16'h0000", "prescale value zero is illegal", Fail);
    p("txr", Function, "wb_we_i && wb_stb_i && wb_adr_i == 3'h3 |=> txr == $past(wb_dat_i)", "txr captures bus data one cycle after the data phase", Pass);
    p("rxr", Function, "wb_rst_i |=> rxr == 8'h00", "receive register clears on reset", Pass);
    p("cr", Function, "cr[7] |=> !cr[7]", "command bits are self-clearing", Pass);

    plan
}

// ---------------------------------------------------------------------------
// Scripted stage responses
// ---------------------------------------------------------------------------

/// Per-signal prose for the spec-analyzer responses: (definition,
/// functionality, peers). The interconnection sentence is generated and
/// names every peer verbatim.
const DESCRIPTIONS: &[(&str, &str, &str, &[&str])] = &[
    ("wb_clk_i", "wb_clk_i is the Wishbone master clock input.", "All registers and the serial engine are synchronous to its rising edge.", &[]),
    ("wb_rst_i", "wb_rst_i is the active-high synchronous reset.", "Forces every architectural register to its documented reset value.", &["wb_clk_i"]),
    ("arst_i", "arst_i is the asynchronous reset input for FPGA flows.", "Tied off when unused; mutually exclusive with the synchronous reset.", &["wb_rst_i"]),
    ("wb_adr_i", "wb_adr_i is the 3-bit register address.", "Selects which register a Wishbone access touches.", &["wb_stb_i"]),
    ("wb_dat_i", "wb_dat_i is the 8-bit write data bus.", "Carries the value captured by prer, ctr, txr or cr on a write.", &["wb_we_i"]),
    ("wb_dat_o", "wb_dat_o is the 8-bit read data bus.", "Returns the addressed register content one cycle after the strobe.", &["sr", "rxr"]),
    ("wb_we_i", "wb_we_i is the write-enable qualifier.", "High for writes, low for reads, sampled with the strobe.", &["wb_stb_i"]),
    ("wb_stb_i", "wb_stb_i is the Wishbone strobe.", "Qualifies the address phase of an access and triggers the acknowledge.", &["wb_cyc_i", "wb_ack_o"]),
    ("wb_cyc_i", "wb_cyc_i marks a bus cycle in progress.", "Frames one or more strobes belonging to the same access.", &["wb_stb_i"]),
    ("wb_ack_o", "wb_ack_o is the slave acknowledge output.", "Answers every access exactly one clock after the strobe.", &["wb_stb_i"]),
    ("wb_inta_o", "wb_inta_o is the interrupt request output.", "Follows the IF flag of sr while the IEN bit of ctr is set.", &["sr", "ctr"]),
    ("scl_pad_i", "scl_pad_i is the serial clock input pad.", "Senses the wired-AND SCL line for clock stretching.", &[]),
    ("scl_pad_o", "scl_pad_o is the serial clock output pad.", "Drives SCL low phases through the tri-state buffer.", &["scl_pad_oe"]),
    ("scl_pad_oe", "scl_pad_oe is the SCL output enable.", "Gates scl_pad_o onto the bus; high-impedance when released.", &["scl_pad_o"]),
    ("sda_pad_i", "sda_pad_i is the serial data input pad.", "Senses the SDA line for reads and arbitration.", &[]),
    ("sda_pad_o", "sda_pad_o is the serial data output pad.", "Drives SDA low phases through the tri-state buffer.", &["sda_pad_oe"]),
    ("sda_pad_oe", "sda_pad_oe is the SDA output enable.", "Gates sda_pad_o onto the bus; high-impedance when released.", &["sda_pad_o"]),
    ("prer", "prer is the 16-bit clock prescale register.", "Divides the Wishbone clock to time SCL phases; resets to 0xFFFF.", &["ctr"]),
    ("ctr", "ctr is the control register.", "Bit 7 enables the core, bit 6 enables the interrupt, the rest read zero.", &["wb_dat_i"]),
    ("txr", "txr is the transmit register.", "Captures wb_dat_i on a write to address 3 for the next transfer.", &["wb_dat_i"]),
    ("rxr", "rxr is the receive register.", "Holds the last byte shifted in from the serial line; resets to zero.", &["wb_dat_o"]),
    ("cr", "cr is the self-clearing command register.", "Command bits written via wb_dat_i execute and clear within one cycle.", &["wb_dat_i", "sr"]),
    ("sr", "sr is the status register.", "Reports IF, TIP and arbitration lost; drives wb_inta_o and is gated by ctr and sequenced by cr.", &["wb_inta_o", "ctr", "cr"]),
];

fn analyzer_reply(signal_name: &str) -> Result<String, BackendError> {
    let (_, definition, functionality, peers) = DESCRIPTIONS
        .iter()
        .find(|(n, ..)| *n == signal_name)
        .ok_or_else(|| BackendError::Malformed(format!("no description for `{signal_name}`")))?;
    let interconnection = if peers.is_empty() {
        "Stands alone; no architectural peer signals.".to_string()
    } else {
        format!("Works together with {}.", peers.join(" and "))
    };
    let body = json!({
        "signal": {
            "name": signal_name,
            "description": {
                "definition": definition,
                "functionality": functionality,
                "interconnection": interconnection,
                "additional": "",
            },
            "interconnection_signals": peers,
        }
    });
    Ok(format!(
        "Analysis of {signal_name} follows.\n\n```json\n{}\n```\n",
        serde_json::to_string_pretty(&body).unwrap()
    ))
}

fn generator_reply(
    plan: &[Planned],
    signal_name: &str,
    category: Category,
) -> Result<String, BackendError> {
    let items: Vec<_> = plan
        .iter()
        .filter(|a| a.signal == signal_name && a.category == category)
        .map(|a| {
            json!({
                "target_signal": a.signal,
                "category": a.category.as_str(),
                "sva": a.sva,
                "rationale": a.rationale,
            })
        })
        .collect();
    let body = json!({ "assertions": items });
    Ok(format!(
        "```json\n{}\n```\n",
        serde_json::to_string_pretty(&body).unwrap()
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let root: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let fixture = root.join("fixtures/i2c");

    // 1. Trace.
    let vcd = render_vcd();
    std::fs::create_dir_all(fixture.join("traces")).unwrap();
    std::fs::write(fixture.join("traces/i2c.vcd"), &vcd).unwrap();
    println!("wrote traces/i2c.vcd ({} bytes)", vcd.len());

    // 2. Verify the plan against the trace before recording anything.
    let manifest = load_manifest(&fixture.join("bench.toml")).unwrap();
    let inputs = load_inputs(&manifest).unwrap();
    let plan = plan();
    let mut pass = 0;
    let mut fail = 0;
    for planned in &plan {
        if planned.expect == Expect::Filtered {
            continue;
        }
        let ast = parse_sva(&planned.sva)
            .unwrap_or_else(|e| panic!("plan does not parse: {}\n{e}", planned.sva));
        let verdict = evaluate(&ast, &inputs.trace)
            .unwrap_or_else(|e| panic!("plan does not evaluate: {}\n{e}", planned.sva));
        let expected = match planned.expect {
            Expect::Pass => Outcome::Pass,
            Expect::Fail => Outcome::Fail,
            Expect::Filtered => unreachable!(),
        };
        assert_eq!(
            verdict.outcome, expected,
            "unexpected verdict for {} ({} attempts)",
            planned.sva, verdict.attempts
        );
        match planned.expect {
            Expect::Pass => pass += 1,
            _ => fail += 1,
        }
    }
    println!("plan verified: {pass} passing, {fail} failing assertions");

    // 3. Record transcripts by running the real pipeline.
    let transcript_dir = fixture.join("transcripts");
    let _ = std::fs::remove_dir_all(&transcript_dir);
    let store = TranscriptStore::load(&transcript_dir.join("pipeline.jsonl")).unwrap();
    let scripted = FnBackend::new(|req: &ChatRequest| {
        let input = extract_json_block(&req.user)
            .ok_or_else(|| BackendError::Malformed("no input block".into()))?;
        match req.stage.as_str() {
            "spec_analyzer" => analyzer_reply(input["signal_name"].as_str().unwrap_or("")),
            "sva_generator" => {
                let name = input["signal"]["name"].as_str().unwrap_or("");
                let category = Category::parse(input["category"].as_str().unwrap_or(""))
                    .ok_or_else(|| BackendError::Malformed("bad category".into()))?;
                generator_reply(&plan, name, category)
            }
            other => Err(BackendError::Malformed(format!(
                "unexpected stage `{other}`: all manifest names should map deterministically"
            ))),
        }
    });
    let backend = RecordingBackend::new(scripted, store);
    let kb = KnowledgeBase::load(&root.join("fixtures/kb")).unwrap();
    let config = PipelineConfig {
        model: "default".to_string(),
        workers: 1,
    };
    let (report, run) = run_bench(&manifest, &backend, &kb, &config, false).unwrap();
    println!("recorded {} transcript entries", backend.into_store().len());

    // 4. Cross-check the aggregate numbers the replay acceptance relies on.
    assert!(run.errors.is_empty(), "stage errors: {:?}", run.errors);
    let by_category: BTreeMap<_, _> = report
        .categories
        .iter()
        .map(|(c, counts)| (*c, counts.generated))
        .collect();
    assert_eq!(by_category[&Category::Width], 23);
    assert_eq!(by_category[&Category::Connectivity], 16);
    assert_eq!(by_category[&Category::Function], 17);
    assert_eq!(report.totals.generated, 56);
    assert_eq!(report.totals.syntax_ok, 56);
    assert_eq!(report.totals.trace_pass, 50);
    assert_eq!(report.totals.trace_fail, 6);
    assert_eq!(report.unmapped_filtered, 2);
    println!(
        "bench totals: {} generated / {} syntax_ok / {} pass / {} fail / {} filtered",
        report.totals.generated,
        report.totals.syntax_ok,
        report.totals.trace_pass,
        report.totals.trace_fail,
        report.unmapped_filtered
    );
    println!("fixture regenerated");
}
