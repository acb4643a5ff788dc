//! Spec-name to HDL-identifier alignment.
//!
//! Deterministic matching runs in three tiers (exact, normalized, fuzzy
//! Levenshtein) and always takes precedence over LLM proposals, which only
//! fill unresolved slots and only when the proposed identifier actually
//! exists in the declaration table. Resolved mappings are injective.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verilog_decl::DeclarationTable;

/// Similarity floor for the fuzzy tier.
pub const DEFAULT_FUZZY_THRESHOLD: f64 = 0.8;
/// Confidence assigned to LLM-filled slots.
pub const LLM_CONFIDENCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    Exact,
    Normalized,
    Fuzzy,
    Llm,
}

/// One spec-name to HDL-identifier alignment (or an unresolved slot).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalMapping {
    pub spec_name: String,
    pub hdl_identifier: Option<String>,
    pub method: Option<MatchMethod>,
    pub confidence: f64,
}

impl SignalMapping {
    pub fn unresolved(spec_name: &str) -> Self {
        SignalMapping {
            spec_name: spec_name.to_string(),
            hdl_identifier: None,
            method: None,
            confidence: 0.0,
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.hdl_identifier.is_some()
    }
}

/// LLM-proposed alignment, prior to validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingProposal {
    pub spec_name: String,
    pub hdl_identifier: String,
}

#[derive(Debug, Error)]
pub enum SignalMapError {
    #[error("injectivity conflict: HDL identifier `{identifier}` matched by spec names {spec_names:?}")]
    InjectivityConflict {
        identifier: String,
        spec_names: Vec<String>,
    },
}

/// Levenshtein edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j + 1] + 1).min(cur[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Normalized similarity in [0,1]: `1 - dist / max_len`.
pub fn similarity(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / max_len as f64
}

/// Lowercase and strip non-alphanumerics.
pub fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Deterministic three-tier matcher.
///
/// Per spec name: exact match (confidence 1.0), then normalized match
/// (0.9), then best fuzzy match with normalized-Levenshtein similarity at
/// or above `fuzzy_threshold` (confidence = similarity, ties broken by
/// lexicographically smallest identifier); otherwise unresolved.
pub fn match_deterministic(
    spec_names: &[String],
    declarations: &DeclarationTable,
    fuzzy_threshold: f64,
) -> Result<Vec<SignalMapping>, SignalMapError> {
    let idents: Vec<&str> = declarations.identifiers().collect();
    let normalized: Vec<String> = idents.iter().map(|i| normalize(i)).collect();

    let mut mappings = Vec::with_capacity(spec_names.len());
    for spec_name in spec_names {
        let mapping = if declarations.contains(spec_name) {
            SignalMapping {
                spec_name: spec_name.clone(),
                hdl_identifier: Some(spec_name.clone()),
                method: Some(MatchMethod::Exact),
                confidence: 1.0,
            }
        } else {
            let norm = normalize(spec_name);
            let norm_hit = idents
                .iter()
                .zip(&normalized)
                .filter(|(_, n)| !norm.is_empty() && **n == norm)
                .map(|(i, _)| *i)
                .min();
            if let Some(ident) = norm_hit {
                SignalMapping {
                    spec_name: spec_name.clone(),
                    hdl_identifier: Some(ident.to_string()),
                    method: Some(MatchMethod::Normalized),
                    confidence: 0.9,
                }
            } else {
                let mut best: Option<(&str, f64)> = None;
                for (ident, n) in idents.iter().zip(&normalized) {
                    let score = similarity(&norm, n);
                    let better = match best {
                        None => score >= fuzzy_threshold,
                        Some((b_ident, b_score)) => {
                            score > b_score || (score == b_score && *ident < b_ident)
                        }
                    };
                    if better && score >= fuzzy_threshold {
                        best = Some((ident, score));
                    }
                }
                match best {
                    Some((ident, score)) => SignalMapping {
                        spec_name: spec_name.clone(),
                        hdl_identifier: Some(ident.to_string()),
                        method: Some(MatchMethod::Fuzzy),
                        confidence: score,
                    },
                    None => SignalMapping::unresolved(spec_name),
                }
            }
        };
        mappings.push(mapping);
    }

    check_injectivity(&mappings)?;
    Ok(mappings)
}

fn check_injectivity(mappings: &[SignalMapping]) -> Result<(), SignalMapError> {
    let mut seen: HashMap<&str, Vec<&str>> = HashMap::new();
    for m in mappings {
        if let Some(ident) = &m.hdl_identifier {
            seen.entry(ident).or_default().push(&m.spec_name);
        }
    }
    for (ident, names) in seen {
        if names.len() > 1 {
            return Err(SignalMapError::InjectivityConflict {
                identifier: ident.to_string(),
                spec_names: names.iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    Ok(())
}

/// Merge LLM proposals under the deterministic mapping.
///
/// Deterministic resolved entries always win. Proposals fill unresolved
/// slots only when the identifier exists in the declaration table and
/// does not break injectivity; invalid proposals are dropped with a
/// warning returned to the caller's ledger.
pub fn merge(
    deterministic: &[SignalMapping],
    llm_proposals: &[MappingProposal],
    declarations: &DeclarationTable,
) -> (Vec<SignalMapping>, Vec<String>) {
    let mut warnings = Vec::new();
    let mut merged: Vec<SignalMapping> = deterministic.to_vec();
    let mut taken: Vec<String> = merged
        .iter()
        .filter_map(|m| m.hdl_identifier.clone())
        .collect();

    for proposal in llm_proposals {
        let Some(slot) = merged.iter_mut().find(|m| m.spec_name == proposal.spec_name) else {
            warnings.push(format!(
                "mapper proposal for unknown spec name `{}` dropped",
                proposal.spec_name
            ));
            continue;
        };
        if slot.is_resolved() {
            if slot.hdl_identifier.as_deref() != Some(proposal.hdl_identifier.as_str()) {
                warnings.push(format!(
                    "mapper proposal `{}` -> `{}` overridden by deterministic match `{}`",
                    proposal.spec_name,
                    proposal.hdl_identifier,
                    slot.hdl_identifier.as_deref().unwrap_or("")
                ));
            }
            continue;
        }
        if !declarations.contains(&proposal.hdl_identifier) {
            warnings.push(format!(
                "mapper proposal `{}` -> `{}` dropped: identifier not declared",
                proposal.spec_name, proposal.hdl_identifier
            ));
            continue;
        }
        if taken.iter().any(|t| t == &proposal.hdl_identifier) {
            warnings.push(format!(
                "mapper proposal `{}` -> `{}` dropped: identifier already mapped",
                proposal.spec_name, proposal.hdl_identifier
            ));
            continue;
        }
        slot.hdl_identifier = Some(proposal.hdl_identifier.clone());
        slot.method = Some(MatchMethod::Llm);
        slot.confidence = LLM_CONFIDENCE;
        taken.push(proposal.hdl_identifier.clone());
    }

    (merged, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog_decl::parse_declarations;

    fn table(src: &str) -> DeclarationTable {
        parse_declarations(src).unwrap()
    }

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn exact_match_wins() {
        let t = table("wire prer;");
        let m = match_deterministic(&names(&["prer"]), &t, DEFAULT_FUZZY_THRESHOLD).unwrap();
        assert_eq!(m[0].hdl_identifier.as_deref(), Some("prer"));
        assert_eq!(m[0].method, Some(MatchMethod::Exact));
        assert_eq!(m[0].confidence, 1.0);
    }

    #[test]
    fn normalized_match() {
        let t = table("wire scl_pad_oe;");
        let m =
            match_deterministic(&names(&["SCL_pad_OE"]), &t, DEFAULT_FUZZY_THRESHOLD).unwrap();
        assert_eq!(m[0].hdl_identifier.as_deref(), Some("scl_pad_oe"));
        assert_eq!(m[0].method, Some(MatchMethod::Normalized));
        assert_eq!(m[0].confidence, 0.9);
    }

    #[test]
    fn fuzzy_matches_brute_force_oracle() {
        let t = table("wire prer; wire ctr; wire prescaler;");
        let spec = "prescale_reg";
        let m = match_deterministic(&names(&[spec]), &t, DEFAULT_FUZZY_THRESHOLD).unwrap();
        // Brute-force oracle over all identifiers.
        let norm = normalize(spec);
        let mut best: Option<(&str, f64)> = None;
        for ident in ["prer", "ctr", "prescaler"] {
            let s = similarity(&norm, &normalize(ident));
            match best {
                None if s >= DEFAULT_FUZZY_THRESHOLD => best = Some((ident, s)),
                Some((bi, bs)) if s > bs || (s == bs && ident < bi) => best = Some((ident, s)),
                _ => {}
            }
        }
        assert_eq!(
            m[0].hdl_identifier.as_deref(),
            best.map(|(i, _)| i),
            "fuzzy tier must agree with exhaustive scan"
        );
        if let Some((_, score)) = best {
            assert_eq!(m[0].confidence, score);
        }
    }

    #[test]
    fn unresolved_when_nothing_close() {
        let t = table("wire ctr;");
        let m = match_deterministic(&names(&["completely_different"]), &t, 0.8).unwrap();
        assert!(!m[0].is_resolved());
    }

    #[test]
    fn injectivity_conflict_reported() {
        let t = table("wire clk;");
        let err = match_deterministic(&names(&["clk", "CLK"]), &t, 0.8).unwrap_err();
        let SignalMapError::InjectivityConflict { identifier, .. } = err;
        assert_eq!(identifier, "clk");
    }

    #[test]
    fn deterministic_beats_llm() {
        let t = table("wire prer; wire ctr;");
        let det = match_deterministic(&names(&["prer"]), &t, 0.8).unwrap();
        let proposals = vec![MappingProposal {
            spec_name: "prer".into(),
            hdl_identifier: "ctr".into(),
        }];
        let (merged, warnings) = merge(&det, &proposals, &t);
        assert_eq!(merged[0].hdl_identifier.as_deref(), Some("prer"));
        assert_eq!(merged[0].method, Some(MatchMethod::Exact));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn llm_fills_unresolved_slot() {
        let t = table("wire core_ctrl;");
        let det = vec![SignalMapping::unresolved("control register")];
        let proposals = vec![MappingProposal {
            spec_name: "control register".into(),
            hdl_identifier: "core_ctrl".into(),
        }];
        let (merged, warnings) = merge(&det, &proposals, &t);
        assert_eq!(merged[0].hdl_identifier.as_deref(), Some("core_ctrl"));
        assert_eq!(merged[0].method, Some(MatchMethod::Llm));
        assert_eq!(merged[0].confidence, LLM_CONFIDENCE);
        assert!(warnings.is_empty());
    }

    #[test]
    fn llm_proposal_for_undeclared_identifier_dropped() {
        let t = table("wire a;");
        let det = vec![SignalMapping::unresolved("b")];
        let proposals = vec![MappingProposal {
            spec_name: "b".into(),
            hdl_identifier: "ghost".into(),
        }];
        let (merged, warnings) = merge(&det, &proposals, &t);
        assert!(!merged[0].is_resolved());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn merge_is_idempotent() {
        let t = table("wire core_ctrl; wire prer;");
        let det = vec![
            match_deterministic(&names(&["prer"]), &t, 0.8).unwrap().remove(0),
            SignalMapping::unresolved("control register"),
        ];
        let proposals = vec![MappingProposal {
            spec_name: "control register".into(),
            hdl_identifier: "core_ctrl".into(),
        }];
        let (once, _) = merge(&det, &proposals, &t);
        let (twice, _) = merge(&once, &proposals, &t);
        assert_eq!(once, twice);
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("", ""), 0);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("flaw", "lawn"), 2);
    }
}
