//! Deterministic offline backend.
//!
//! The pipeline embeds a machine-readable input block (the last
//! json-fenced region of the user prompt). The mock parses that block and
//! fabricates a schema-valid response for the requesting stage, so the
//! whole pipeline can run without a network or transcripts. Responses are
//! a pure function of the request plus the configured seed.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value as Json};

use crate::signal_map::levenshtein;

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse};

pub struct MockBackend {
    seed: u64,
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        MockBackend { seed }
    }

    fn rng_for(&self, request: &ChatRequest) -> StdRng {
        // Same request + same seed => same response.
        let key = request.request_key();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&hex::decode(&key[..16]).expect("hex key")[..8]);
        StdRng::seed_from_u64(self.seed ^ u64::from_be_bytes(bytes))
    }
}

impl ChatBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let input = extract_json_block(&request.user).ok_or_else(|| {
            BackendError::Malformed("prompt has no fenced json input block".to_string())
        })?;
        let mut rng = self.rng_for(request);
        let body = match request.stage.as_str() {
            "spec_analyzer" => spec_analyzer_response(&input, &mut rng),
            "signal_mapper" => signal_mapper_response(&input),
            "sva_generator" => sva_generator_response(&input, &mut rng),
            other => {
                return Err(BackendError::Malformed(format!(
                    "unknown pipeline stage `{other}`"
                )))
            }
        }?;
        let text = format!("```json\n{}\n```", serde_json::to_string_pretty(&body).unwrap());
        Ok(ChatResponse { text })
    }
}

/// Last fenced ```json block in the text, parsed. Fences count only at
/// the start of a line, so prose mentioning ```json does not confuse it.
pub fn extract_json_block(text: &str) -> Option<Json> {
    let mut last: Option<String> = None;
    let mut current: Option<String> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        match &mut current {
            None if trimmed == "```json" => current = Some(String::new()),
            None => {}
            Some(buf) if trimmed == "```" => {
                last = Some(std::mem::take(buf));
                current = None;
            }
            Some(buf) => {
                buf.push_str(line);
                buf.push('\n');
            }
        }
    }
    serde_json::from_str(last?.trim()).ok()
}

fn str_field<'a>(input: &'a Json, field: &str) -> Result<&'a str, BackendError> {
    input
        .get(field)
        .and_then(Json::as_str)
        .ok_or_else(|| BackendError::Malformed(format!("input block missing `{field}`")))
}

fn spec_analyzer_response(input: &Json, rng: &mut StdRng) -> Result<Json, BackendError> {
    let name = str_field(input, "signal_name")?;
    let design = input
        .get("design_name")
        .and_then(Json::as_str)
        .unwrap_or("the design");
    let width = input.get("width").and_then(Json::as_u64).unwrap_or(1);
    let label = input.get("label").and_then(Json::as_str).unwrap_or("data");
    let opener = ["Captures", "Carries", "Holds"][rng.gen_range(0..3)];
    Ok(json!({
        "signal": {
            "name": name,
            "description": {
                "definition": format!("{name} is a {width}-bit {label} signal of {design}."),
                "functionality": format!("{opener} the {label} state observed on {name}."),
                "interconnection": format!("{name} interacts with the rest of {design} through its declared ports."),
                "additional": "",
            },
            "interconnection_signals": [],
        }
    }))
}

fn signal_mapper_response(input: &Json) -> Result<Json, BackendError> {
    let unresolved = input
        .get("unresolved")
        .and_then(Json::as_array)
        .ok_or_else(|| BackendError::Malformed("input block missing `unresolved`".into()))?;
    let candidates: Vec<&str> = input
        .get("hdl_identifiers")
        .and_then(Json::as_array)
        .map(|a| a.iter().filter_map(Json::as_str).collect())
        .unwrap_or_default();
    let mut mappings = Vec::new();
    for name in unresolved.iter().filter_map(Json::as_str) {
        // Closest identifier by edit distance, ties broken lexicographically.
        let best = candidates
            .iter()
            .min_by_key(|c| (levenshtein(name, c), c.to_string()));
        if let Some(best) = best {
            mappings.push(json!({ "spec_name": name, "hdl_identifier": best }));
        }
    }
    Ok(json!({ "mappings": mappings }))
}

fn sva_generator_response(input: &Json, rng: &mut StdRng) -> Result<Json, BackendError> {
    let signal = input
        .get("signal")
        .ok_or_else(|| BackendError::Malformed("input block missing `signal`".into()))?;
    let name = str_field(signal, "name")?;
    let width = signal.get("width").and_then(Json::as_u64).unwrap_or(1);
    let category = str_field(input, "category")?;
    let clock = str_field(input, "clock")?;
    let reset = input.get("reset").and_then(Json::as_str);
    let related: Vec<&str> = input
        .get("related")
        .and_then(Json::as_array)
        .map(|a| a.iter().filter_map(Json::as_str).collect())
        .unwrap_or_default();

    let bit = |sig: &str, w: u64| {
        if w <= 1 {
            sig.to_string()
        } else {
            format!("{sig}[0]")
        }
    };
    let sva = match category {
        "width" => format!("assert property (@(posedge {clock}) $bits({name}) == {width});"),
        "connectivity" => match related.first() {
            Some(peer) => format!(
                "assert property (@(posedge {clock}) {} |-> {});",
                bit(name, width),
                bit(peer, 1)
            ),
            None => format!(
                "assert property (@(posedge {clock}) $stable({name}) || !$stable({name}));"
            ),
        },
        "function" => match reset {
            Some(rst) => format!(
                "assert property (@(posedge {clock}) {rst} |=> {name} == {width}'h0);"
            ),
            None => format!("assert property (@(posedge {clock}) $onehot0({}));", bit(name, width)),
        },
        other => {
            return Err(BackendError::Malformed(format!(
                "unknown assertion category `{other}`"
            )))
        }
    };
    let verb = ["checks", "constrains", "guards"][rng.gen_range(0..3)];
    Ok(json!({
        "assertions": [{
            "target_signal": name,
            "category": category,
            "sva": sva,
            "rationale": format!("{verb} {name} ({category})"),
        }]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(stage: &str, input: serde_json::Value) -> ChatRequest {
        ChatRequest::new(
            stage,
            "mock-model",
            "ROLE: test".into(),
            format!("Do the thing.\n\n```json\n{input}\n```\n"),
        )
    }

    #[test]
    fn deterministic_per_seed() {
        let r = req("spec_analyzer", json!({"signal_name": "wb_ack_o", "width": 1}));
        let a = MockBackend::new(7).complete(&r).unwrap();
        let b = MockBackend::new(7).complete(&r).unwrap();
        assert_eq!(a.text, b.text);
    }

    #[test]
    fn mapper_picks_closest_identifier() {
        let r = req(
            "signal_mapper",
            json!({"unresolved": ["ACK output"], "hdl_identifiers": ["wb_ack_o", "wb_adr_i"]}),
        );
        let resp = MockBackend::new(0).complete(&r).unwrap();
        assert!(resp.text.contains("wb_ack_o"));
    }

    #[test]
    fn generator_output_is_parseable_sva() {
        for (cat, extra) in [
            ("width", json!({})),
            ("connectivity", json!({"related": ["wb_cyc_i"]})),
            ("function", json!({"reset": "wb_rst_i"})),
        ] {
            let mut input = json!({
                "signal": {"name": "ctr", "width": 8},
                "category": cat,
                "clock": "wb_clk_i",
            });
            for (k, v) in extra.as_object().unwrap() {
                input[k.as_str()] = v.clone();
            }
            let resp = MockBackend::new(1).complete(&req("sva_generator", input)).unwrap();
            let body = extract_json_block(&resp.text).unwrap();
            let sva = body["assertions"][0]["sva"].as_str().unwrap();
            crate::sva::parse_sva(sva).unwrap_or_else(|e| panic!("{cat}: {sva}\n{e}"));
        }
    }

    #[test]
    fn missing_input_block_is_malformed() {
        let r = ChatRequest::new("spec_analyzer", "m", "s".into(), "no block here".into());
        assert!(matches!(
            MockBackend::new(0).complete(&r),
            Err(BackendError::Malformed(_))
        ));
    }
}
