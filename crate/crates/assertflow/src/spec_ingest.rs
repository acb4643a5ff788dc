//! Loading and sectioning of natural-language specification documents.
//!
//! A document is split into sections at markdown headings (`#`–`####`) or,
//! for plain text, at numbered headings like `2.1 Clock generator`. Each
//! section heading is classified into a six-part taxonomy (introduction,
//! IO ports, registers, operation, architecture, usage examples) by a
//! fixed, first-match-wins keyword table; anything else is `Other`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Taxonomy bucket for a specification section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Introduction,
    IoPorts,
    Registers,
    Operation,
    Architecture,
    UsageExamples,
    Other,
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SectionKind::Introduction => "introduction",
            SectionKind::IoPorts => "io_ports",
            SectionKind::Registers => "registers",
            SectionKind::Operation => "operation",
            SectionKind::Architecture => "architecture",
            SectionKind::UsageExamples => "usage_examples",
            SectionKind::Other => "other",
        };
        f.write_str(s)
    }
}

/// One contiguous slice of the source document.
///
/// `raw_text` includes the heading line itself; concatenating the
/// `raw_text` of all sections in order reproduces the document body
/// byte-for-byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecSection {
    pub heading: String,
    pub raw_text: String,
    pub kind: SectionKind,
}

/// A parsed specification document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub design_name: String,
    pub sections: Vec<SpecSection>,
    pub source_path: PathBuf,
}

impl DesignSpec {
    /// Full document body (concatenation of all section texts).
    pub fn body(&self) -> String {
        self.sections.iter().map(|s| s.raw_text.as_str()).collect()
    }

    /// Sections of a given kind, in document order.
    pub fn sections_of(&self, kind: SectionKind) -> impl Iterator<Item = &SpecSection> {
        self.sections.iter().filter(move |s| s.kind == kind)
    }
}

#[derive(Debug, Error)]
pub enum SpecIngestError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8")]
    Encoding { path: PathBuf },
    #[error("{path} is empty")]
    EmptyDocument { path: PathBuf },
}

/// Classify a section heading into the six-part taxonomy.
///
/// Case-insensitive keyword rules, first match wins; total over all
/// strings (unknown headings map to [`SectionKind::Other`]).
pub fn classify_section(heading: &str) -> SectionKind {
    let h = heading.to_lowercase();
    const RULES: &[(&[&str], SectionKind)] = &[
        (
            &["introduction", "overview", "features"],
            SectionKind::Introduction,
        ),
        (&["io", "ports", "interface", "pins"], SectionKind::IoPorts),
        (&["register", "registers"], SectionKind::Registers),
        (
            &["operation", "protocol", "timing"],
            SectionKind::Operation,
        ),
        (
            &["architecture", "structure", "block"],
            SectionKind::Architecture,
        ),
        (
            &["example", "usage", "waveform"],
            SectionKind::UsageExamples,
        ),
    ];
    for (keywords, kind) in RULES {
        if keywords.iter().any(|k| contains_word(&h, k)) {
            return *kind;
        }
    }
    SectionKind::Other
}

// Keyword match on word boundaries, so "operation" does not fire on
// "cooperation" but "IO" fires on "IO ports" and "I/O ports".
fn contains_word(haystack: &str, word: &str) -> bool {
    let bytes = haystack.as_bytes();
    let mut start = 0;
    while let Some(pos) = haystack[start..].find(word) {
        let at = start + pos;
        let before_ok = at == 0 || !bytes[at - 1].is_ascii_alphanumeric();
        let end = at + word.len();
        let after_ok = end == bytes.len() || !bytes[end].is_ascii_alphanumeric();
        if before_ok && after_ok {
            return true;
        }
        start = at + 1;
    }
    false
}

/// Load a specification document from disk and split it into sections.
pub fn load_spec(path: &Path) -> Result<DesignSpec, SpecIngestError> {
    let bytes = std::fs::read(path).map_err(|source| SpecIngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|_| SpecIngestError::Encoding {
        path: path.to_path_buf(),
    })?;
    if text.trim().is_empty() {
        return Err(SpecIngestError::EmptyDocument {
            path: path.to_path_buf(),
        });
    }
    let design_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "design".to_string());
    Ok(DesignSpec {
        design_name,
        sections: split_sections(&text),
        source_path: path.to_path_buf(),
    })
}

/// Build a [`DesignSpec`] from in-memory text.
pub fn parse_spec_text(design_name: &str, text: &str) -> DesignSpec {
    DesignSpec {
        design_name: design_name.to_string(),
        sections: split_sections(text),
        source_path: PathBuf::new(),
    }
}

/// Split document text into sections at heading lines. Boundaries never
/// split a line; preamble text before the first heading becomes a
/// heading-less `Other` section.
pub fn split_sections(text: &str) -> Vec<SpecSection> {
    let mut sections: Vec<SpecSection> = Vec::new();
    let mut current_heading: Option<String> = None;
    let mut current_text = String::new();

    let flush = |sections: &mut Vec<SpecSection>, heading: Option<String>, raw: &mut String| {
        if raw.is_empty() {
            return;
        }
        let heading = heading.unwrap_or_default();
        let kind = if heading.is_empty() {
            SectionKind::Other
        } else {
            classify_section(&heading)
        };
        sections.push(SpecSection {
            heading,
            raw_text: std::mem::take(raw),
            kind,
        });
    };

    for line in split_lines_keep_ends(text) {
        if let Some(heading) = heading_of(line) {
            flush(&mut sections, current_heading.take(), &mut current_text);
            current_heading = Some(heading);
        }
        current_text.push_str(line);
    }
    flush(&mut sections, current_heading, &mut current_text);
    sections
}

fn heading_of(line: &str) -> Option<String> {
    let trimmed = line.trim_end_matches(['\n', '\r']);
    // Markdown heading: `#` to `####` followed by a space.
    let hashes = trimmed.bytes().take_while(|&b| b == b'#').count();
    if (1..=4).contains(&hashes) {
        if let Some(rest) = trimmed[hashes..].strip_prefix(' ') {
            return Some(rest.trim().to_string());
        }
    }
    // Plain-text numbered heading: `^\d+(\.\d+)*\s+\S`.
    let mut chars = trimmed.char_indices().peekable();
    let mut saw_digit = false;
    let mut end = 0;
    while let Some(&(i, c)) = chars.peek() {
        if c.is_ascii_digit() {
            saw_digit = true;
            end = i + c.len_utf8();
            chars.next();
        } else if c == '.' && saw_digit {
            chars.next();
            match chars.peek() {
                Some(&(_, d)) if d.is_ascii_digit() => {}
                _ => return None,
            }
        } else {
            break;
        }
    }
    if saw_digit && trimmed[end..].starts_with(char::is_whitespace) {
        let title = trimmed[end..].trim();
        if !title.is_empty() {
            return Some(title.to_string());
        }
    }
    None
}

// str::lines drops line endings; we need them for byte-exact reassembly.
fn split_lines_keep_ends(text: &str) -> impl Iterator<Item = &str> {
    let mut rest = text;
    std::iter::from_fn(move || {
        if rest.is_empty() {
            return None;
        }
        let line = match rest.find('\n') {
            Some(i) => &rest[..=i],
            None => rest,
        };
        rest = &rest[line.len()..];
        Some(line)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_keywords() {
        assert_eq!(classify_section("Registers"), SectionKind::Registers);
        assert_eq!(classify_section("Core architecture"), SectionKind::Architecture);
        assert_eq!(classify_section("Revision history"), SectionKind::Other);
        assert_eq!(classify_section("IO ports"), SectionKind::IoPorts);
        assert_eq!(classify_section("Features"), SectionKind::Introduction);
        assert_eq!(classify_section("Usage examples"), SectionKind::UsageExamples);
        assert_eq!(classify_section("Operation"), SectionKind::Operation);
        // Word-boundary rule: "cooperation" must not match "operation".
        assert_eq!(classify_section("Cooperation notes"), SectionKind::Other);
    }

    #[test]
    fn numbered_headings_split() {
        let text = "1 Introduction\nintro text\n2 IO ports\nports text\n";
        let sections = split_sections(text);
        assert_eq!(sections.len(), 2);
        assert_eq!(sections[0].kind, SectionKind::Introduction);
        assert_eq!(sections[1].kind, SectionKind::IoPorts);
        assert_eq!(sections[0].heading, "Introduction");
    }

    #[test]
    fn concatenation_reproduces_body() {
        let text = "preamble\n# One\nalpha\r\nbeta\n## Two and a half\ngamma";
        let sections = split_sections(text);
        let rebuilt: String = sections.iter().map(|s| s.raw_text.as_str()).collect();
        assert_eq!(rebuilt, text);
    }

    #[test]
    fn empty_file_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.md");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            load_spec(&path),
            Err(SpecIngestError::EmptyDocument { .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_spec(Path::new("/nonexistent/spec.md")),
            Err(SpecIngestError::Io { .. })
        ));
    }

    #[test]
    fn non_utf8_is_encoding_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.md");
        std::fs::write(&path, [0xff, 0xfe, 0x41]).unwrap();
        assert!(matches!(
            load_spec(&path),
            Err(SpecIngestError::Encoding { .. })
        ));
    }

    #[test]
    fn loader_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.md");
        std::fs::write(&path, "# A\nx\n# B\ny\n").unwrap();
        let a = load_spec(&path).unwrap();
        let b = load_spec(&path).unwrap();
        assert_eq!(a, b);
    }
}
