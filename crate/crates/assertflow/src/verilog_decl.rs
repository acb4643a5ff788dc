//! Parser for signal-definition HDL files (Verilog-2001 declaration subset).
//!
//! Extracts a declaration table from a module: ports (ANSI or non-ANSI
//! style), nets, variables and parameters, with `[msb:lsb]` ranges,
//! trailing same-line comments, and source lines. Statement bodies
//! (`always`, `assign`, instantiations) are skipped by balanced-delimiter
//! scanning; this is deliberately not a full IEEE 1800 front end.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Input,
    Output,
    Inout,
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclKind {
    Wire,
    Reg,
    Logic,
    Parameter,
}

/// One declared identifier with its direction, kind, range and comment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalDeclaration {
    pub identifier: String,
    pub direction: Direction,
    pub kind: DeclKind,
    pub width_bits: u32,
    pub msb: i64,
    pub lsb: i64,
    pub comment: String,
    pub source_line: u32,
}

impl SignalDeclaration {
    pub fn is_scalar(&self) -> bool {
        self.width_bits == 1 && self.msb == 0 && self.lsb == 0
    }
}

/// Immutable declaration table in source order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclarationTable {
    declarations: Vec<SignalDeclaration>,
}

impl DeclarationTable {
    pub fn declarations(&self) -> &[SignalDeclaration] {
        &self.declarations
    }

    pub fn len(&self) -> usize {
        self.declarations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.declarations.is_empty()
    }

    /// Exact, case-sensitive lookup.
    pub fn lookup(&self, identifier: &str) -> Option<&SignalDeclaration> {
        self.declarations.iter().find(|d| d.identifier == identifier)
    }

    pub fn contains(&self, identifier: &str) -> bool {
        self.lookup(identifier).is_some()
    }

    pub fn identifiers(&self) -> impl Iterator<Item = &str> {
        self.declarations.iter().map(|d| d.identifier.as_str())
    }

    /// Render the table back as a minimal Verilog module. Re-parsing the
    /// output yields an equal table (modulo source lines).
    pub fn pretty_print(&self, module_name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "module {module_name};");
        for d in &self.declarations {
            let mut line = String::from("  ");
            match (d.direction, d.kind) {
                (Direction::Internal, DeclKind::Parameter) => line.push_str("parameter"),
                (Direction::Internal, k) => line.push_str(kind_keyword(k)),
                (dir, k) => {
                    line.push_str(direction_keyword(dir));
                    line.push(' ');
                    line.push_str(kind_keyword(k));
                }
            }
            if !d.is_scalar() {
                let _ = write!(line, " [{}:{}]", d.msb, d.lsb);
            }
            let _ = write!(line, " {}", d.identifier);
            if d.kind == DeclKind::Parameter {
                line.push_str(" = 0");
            }
            line.push(';');
            if !d.comment.is_empty() {
                let _ = write!(line, " // {}", d.comment);
            }
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("endmodule\n");
        out
    }
}

fn direction_keyword(d: Direction) -> &'static str {
    match d {
        Direction::Input => "input",
        Direction::Output => "output",
        Direction::Inout => "inout",
        Direction::Internal => "",
    }
}

fn kind_keyword(k: DeclKind) -> &'static str {
    match k {
        DeclKind::Wire => "wire",
        DeclKind::Reg => "reg",
        DeclKind::Logic => "logic",
        DeclKind::Parameter => "parameter",
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeclParseError {
    #[error("lex error at line {line}, column {column}: {message}")]
    Lex {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("unsupported construct at line {line}: {construct}")]
    Unsupported { line: u32, construct: String },
    #[error("duplicate identifier `{identifier}` at line {line} (first declared at line {first_line})")]
    DuplicateIdentifier {
        identifier: String,
        line: u32,
        first_line: u32,
    },
    #[error("conflicting redeclaration of `{identifier}` at line {line}: {message}")]
    ConflictingDeclaration {
        identifier: String,
        line: u32,
        message: String,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: u32, message: String },
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(i64),
    Symbol(char),
    /// Trailing `//` comment text, attached to the statement on its line.
    LineComment(String),
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    line: u32,
}

fn lex(source: &str) -> Result<Vec<SpannedTok>, DeclParseError> {
    let mut toks = Vec::new();
    let mut chars = source.char_indices().peekable();
    let mut line: u32 = 1;
    let bytes = source.as_bytes();

    while let Some(&(i, c)) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '/' => {
                if bytes.get(i + 1) == Some(&b'/') {
                    let start = i + 2;
                    let end = source[start..]
                        .find('\n')
                        .map(|p| start + p)
                        .unwrap_or(source.len());
                    toks.push(SpannedTok {
                        tok: Tok::LineComment(source[start..end].trim().to_string()),
                        line,
                    });
                    while let Some(&(j, _)) = chars.peek() {
                        if j >= end {
                            break;
                        }
                        chars.next();
                    }
                } else if bytes.get(i + 1) == Some(&b'*') {
                    chars.next();
                    chars.next();
                    let mut closed = false;
                    while let Some((_, c2)) = chars.next() {
                        if c2 == '\n' {
                            line += 1;
                        }
                        if c2 == '*' {
                            if let Some(&(_, '/')) = chars.peek() {
                                chars.next();
                                closed = true;
                                break;
                            }
                        }
                    }
                    if !closed {
                        return Err(DeclParseError::Lex {
                            line,
                            column: 0,
                            message: "unterminated block comment".to_string(),
                        });
                    }
                } else {
                    toks.push(SpannedTok {
                        tok: Tok::Symbol('/'),
                        line,
                    });
                    chars.next();
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' || c == '\\' => {
                // Escaped identifiers (`\foo `) are not in the subset.
                if c == '\\' {
                    return Err(DeclParseError::Unsupported {
                        line,
                        construct: "escaped identifier".to_string(),
                    });
                }
                let start = i;
                let mut end = i;
                while let Some(&(j, c2)) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' || c2 == '$' {
                        end = j + c2.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(SpannedTok {
                    tok: Tok::Ident(source[start..end].to_string()),
                    line,
                });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let mut end = i;
                while let Some(&(j, c2)) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '\'' || c2 == '_' {
                        end = j + c2.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let text = &source[start..end];
                // Only plain decimal integers participate in ranges; sized
                // literals appear in skipped bodies and are carried opaquely.
                let value = text.replace('_', "").parse::<i64>().unwrap_or(-1);
                toks.push(SpannedTok {
                    tok: Tok::Number(value),
                    line,
                });
            }
            '-' => {
                chars.next();
                // Negative range bound: fuse with a following number.
                if let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        let mut value: i64 = 0;
                        let mut any = false;
                        while let Some(&(_, c2)) = chars.peek() {
                            if let Some(dv) = c2.to_digit(10) {
                                value = value * 10 + dv as i64;
                                any = true;
                                chars.next();
                            } else {
                                break;
                            }
                        }
                        if any {
                            toks.push(SpannedTok {
                                tok: Tok::Number(-value),
                                line,
                            });
                            continue;
                        }
                    }
                }
                toks.push(SpannedTok {
                    tok: Tok::Symbol('-'),
                    line,
                });
            }
            _ => {
                toks.push(SpannedTok {
                    tok: Tok::Symbol(c),
                    line,
                });
                chars.next();
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Range {
    msb: i64,
    lsb: i64,
}

#[derive(Debug)]
struct RawDecl {
    identifier: String,
    direction: Option<Direction>,
    kind: Option<DeclKind>,
    range: Option<Range>,
    comment: String,
    line: u32,
}

impl Parser {
    fn peek(&self) -> Option<&SpannedTok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<SpannedTok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn cur_line(&self) -> u32 {
        self.peek().map(|t| t.line).unwrap_or(0)
    }

    fn eat_symbol(&mut self, sym: char) -> bool {
        if let Some(SpannedTok {
            tok: Tok::Symbol(c),
            ..
        }) = self.peek()
        {
            if *c == sym {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(SpannedTok {
                tok: Tok::Ident(s), ..
            }) => Some(s.as_str()),
            _ => None,
        }
    }

    /// Trailing comment on the given source line, if any.
    fn trailing_comment(&self, line: u32) -> String {
        for t in &self.toks[self.pos..] {
            if t.line > line {
                break;
            }
            if let Tok::LineComment(text) = &t.tok {
                return text.clone();
            }
        }
        String::new()
    }

    fn skip_comments(&mut self) {
        while matches!(
            self.peek(),
            Some(SpannedTok {
                tok: Tok::LineComment(_),
                ..
            })
        ) {
            self.pos += 1;
        }
    }

    fn parse_range(&mut self) -> Result<Option<Range>, DeclParseError> {
        self.skip_comments();
        if !self.eat_symbol('[') {
            return Ok(None);
        }
        let line = self.cur_line();
        let msb = self.parse_bound(line)?;
        if !self.eat_symbol(':') {
            return Err(DeclParseError::Parse {
                line,
                message: "expected `:` in range".to_string(),
            });
        }
        let lsb = self.parse_bound(line)?;
        if !self.eat_symbol(']') {
            return Err(DeclParseError::Parse {
                line,
                message: "expected `]` closing range".to_string(),
            });
        }
        Ok(Some(Range { msb, lsb }))
    }

    fn parse_bound(&mut self, line: u32) -> Result<i64, DeclParseError> {
        match self.next() {
            Some(SpannedTok {
                tok: Tok::Number(n),
                ..
            }) if n >= i64::MIN => Ok(n),
            Some(SpannedTok {
                tok: Tok::Ident(name),
                line,
            }) => Err(DeclParseError::Unsupported {
                line,
                construct: format!("non-integer range bound `{name}`"),
            }),
            other => Err(DeclParseError::Parse {
                line: other.map(|t| t.line).unwrap_or(line),
                message: "expected integer range bound".to_string(),
            }),
        }
    }

    /// Skip to the end of the current statement: `;`, balancing
    /// `begin`/`end` and `case`/`endcase` blocks on the way.
    fn skip_statement(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.next() {
            match &t.tok {
                Tok::Ident(s) if s == "begin" || s == "case" || s == "casez" || s == "casex" => {
                    depth += 1;
                }
                Tok::Ident(s) if s == "end" || s == "endcase" => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        // A bare end closes a block statement without `;`.
                        if !matches!(
                            self.peek(),
                            Some(SpannedTok {
                                tok: Tok::Symbol(';'),
                                ..
                            })
                        ) {
                            return;
                        }
                    }
                }
                Tok::Symbol(';') if depth == 0 => return,
                _ => {}
            }
        }
    }
}

fn direction_of(word: &str) -> Option<Direction> {
    match word {
        "input" => Some(Direction::Input),
        "output" => Some(Direction::Output),
        "inout" => Some(Direction::Inout),
        _ => None,
    }
}

fn kind_of(word: &str) -> Option<DeclKind> {
    match word {
        "wire" => Some(DeclKind::Wire),
        "reg" => Some(DeclKind::Reg),
        "logic" => Some(DeclKind::Logic),
        "parameter" | "localparam" => Some(DeclKind::Parameter),
        _ => None,
    }
}

fn is_simple_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

/// Parse HDL text into a declaration table.
///
/// Accepts a full module, a header-only snippet, or bare declarations
/// without a `module` wrapper.
pub fn parse_declarations(source: &str) -> Result<DeclarationTable, DeclParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let mut raws: Vec<RawDecl> = Vec::new();

    loop {
        p.skip_comments();
        let Some(t) = p.peek().cloned() else { break };
        match &t.tok {
            Tok::Ident(word) => match word.as_str() {
                "module" | "macromodule" => {
                    p.next();
                    parse_module_header(&mut p, &mut raws)?;
                }
                "endmodule" => {
                    p.next();
                }
                "input" | "output" | "inout" | "wire" | "reg" | "logic" | "parameter"
                | "localparam" => {
                    parse_decl_statement(&mut p, &mut raws)?;
                }
                "timescale" => {
                    p.skip_statement();
                }
                _ => {
                    p.skip_statement();
                }
            },
            Tok::Symbol('`') => {
                // Compiler directive: skip to end of line.
                let line = t.line;
                while let Some(t2) = p.peek() {
                    if t2.line > line {
                        break;
                    }
                    p.pos += 1;
                }
            }
            _ => {
                p.next();
            }
        }
    }

    merge_raw_decls(raws)
}

fn parse_module_header(p: &mut Parser, raws: &mut Vec<RawDecl>) -> Result<(), DeclParseError> {
    // module name
    let line = p.cur_line();
    match p.next() {
        Some(SpannedTok {
            tok: Tok::Ident(_), ..
        }) => {}
        _ => {
            return Err(DeclParseError::Parse {
                line,
                message: "expected module name".to_string(),
            })
        }
    }
    p.skip_comments();
    // Parameter list `#( ... )` is unsupported when it declares widths;
    // skip it wholesale (parameter declarations inside are recorded).
    if p.eat_symbol('#') {
        if !p.eat_symbol('(') {
            return Err(DeclParseError::Parse {
                line: p.cur_line(),
                message: "expected `(` after `#`".to_string(),
            });
        }
        skip_balanced_parens(p);
    }
    p.skip_comments();
    if !p.eat_symbol('(') {
        // Header without port list.
        p.eat_symbol(';');
        return Ok(());
    }

    // Port list: ANSI entries carry direction/kind/range; non-ANSI entries
    // are bare names declared later in the body.
    let mut direction: Option<Direction> = None;
    let mut kind: Option<DeclKind> = None;
    let mut range: Option<Range> = None;
    loop {
        p.skip_comments();
        match p.peek().cloned() {
            Some(SpannedTok {
                tok: Tok::Symbol(')'),
                ..
            }) => {
                p.next();
                break;
            }
            Some(SpannedTok {
                tok: Tok::Symbol(','),
                ..
            }) => {
                p.next();
            }
            Some(SpannedTok {
                tok: Tok::Ident(word),
                line,
            }) => {
                if let Some(d) = direction_of(&word) {
                    p.next();
                    direction = Some(d);
                    kind = None;
                    if let Some(k) = p.peek_ident().and_then(kind_of) {
                        p.next();
                        kind = Some(k);
                    }
                    if p.peek_ident() == Some("signed") {
                        p.next();
                    }
                    range = p.parse_range()?;
                } else if word == "signed" {
                    p.next();
                } else {
                    p.next();
                    let name = word;
                    if !is_simple_identifier(&name) {
                        return Err(DeclParseError::Parse {
                            line,
                            message: format!("invalid port identifier `{name}`"),
                        });
                    }
                    // Per-port range override after the name is not supported
                    // (unpacked arrays).
                    if matches!(
                        p.peek(),
                        Some(SpannedTok {
                            tok: Tok::Symbol('['),
                            ..
                        })
                    ) {
                        return Err(DeclParseError::Unsupported {
                            line,
                            construct: "unpacked array port".to_string(),
                        });
                    }
                    raws.push(RawDecl {
                        identifier: name,
                        direction,
                        kind,
                        range,
                        comment: p.trailing_comment(line),
                        line,
                    });
                }
            }
            Some(SpannedTok {
                tok: Tok::Symbol('['),
                ..
            }) => {
                range = p.parse_range()?;
            }
            other => {
                return Err(DeclParseError::Parse {
                    line: other.map(|t| t.line).unwrap_or(0),
                    message: "unexpected token in port list".to_string(),
                })
            }
        }
    }
    p.eat_symbol(';');
    Ok(())
}

fn skip_balanced_parens(p: &mut Parser) {
    let mut depth = 1usize;
    while let Some(t) = p.next() {
        match t.tok {
            Tok::Symbol('(') => depth += 1,
            Tok::Symbol(')') => {
                depth -= 1;
                if depth == 0 {
                    return;
                }
            }
            _ => {}
        }
    }
}

fn parse_decl_statement(p: &mut Parser, raws: &mut Vec<RawDecl>) -> Result<(), DeclParseError> {
    let mut direction: Option<Direction> = None;
    let mut kind: Option<DeclKind> = None;

    while let Some(word) = p.peek_ident() {
        if let Some(d) = direction_of(word) {
            p.next();
            direction = Some(d);
        } else if let Some(k) = kind_of(word) {
            p.next();
            kind = Some(k);
        } else if word == "signed" {
            p.next();
        } else {
            break;
        }
    }
    let range = p.parse_range()?;

    loop {
        p.skip_comments();
        let line = p.cur_line();
        let name = match p.next() {
            Some(SpannedTok {
                tok: Tok::Ident(s),
                line,
            }) => {
                if !is_simple_identifier(&s) {
                    return Err(DeclParseError::Parse {
                        line,
                        message: format!("invalid identifier `{s}`"),
                    });
                }
                s
            }
            other => {
                return Err(DeclParseError::Parse {
                    line: other.map(|t| t.line).unwrap_or(line),
                    message: "expected identifier in declaration".to_string(),
                })
            }
        };
        if matches!(
            p.peek(),
            Some(SpannedTok {
                tok: Tok::Symbol('['),
                ..
            })
        ) {
            return Err(DeclParseError::Unsupported {
                line,
                construct: format!("unpacked array on `{name}`"),
            });
        }
        // Initializer (`parameter W = 8` or net init): skip expression.
        if p.eat_symbol('=') {
            while let Some(t) = p.peek() {
                match t.tok {
                    Tok::Symbol(',') | Tok::Symbol(';') => break,
                    Tok::Symbol('(') => {
                        p.next();
                        skip_balanced_parens(p);
                    }
                    _ => {
                        p.next();
                    }
                }
            }
        }
        raws.push(RawDecl {
            identifier: name,
            direction,
            kind,
            range,
            comment: p.trailing_comment(line),
            line,
        });
        p.skip_comments();
        if p.eat_symbol(',') {
            continue;
        }
        if p.eat_symbol(';') {
            break;
        }
        return Err(DeclParseError::Parse {
            line: p.cur_line(),
            message: "expected `,` or `;` in declaration".to_string(),
        });
    }
    Ok(())
}

fn merge_raw_decls(raws: Vec<RawDecl>) -> Result<DeclarationTable, DeclParseError> {
    let mut order: Vec<String> = Vec::new();
    let mut by_name: HashMap<String, RawDecl> = HashMap::new();

    for raw in raws {
        match by_name.get_mut(&raw.identifier) {
            None => {
                order.push(raw.identifier.clone());
                by_name.insert(raw.identifier.clone(), raw);
            }
            Some(existing) => {
                // Legal non-ANSI split: a direction-only declaration plus a
                // kind-only declaration. Same-class redeclaration is an error.
                let dup_direction = existing.direction.is_some() && raw.direction.is_some();
                let dup_kind = existing.kind.is_some() && raw.kind.is_some();
                if dup_direction || dup_kind {
                    return Err(DeclParseError::DuplicateIdentifier {
                        identifier: raw.identifier,
                        line: raw.line,
                        first_line: existing.line,
                    });
                }
                if let (Some(a), Some(b)) = (existing.range, raw.range) {
                    if a != b {
                        return Err(DeclParseError::ConflictingDeclaration {
                            identifier: raw.identifier,
                            line: raw.line,
                            message: format!(
                                "range [{}:{}] conflicts with [{}:{}]",
                                b.msb, b.lsb, a.msb, a.lsb
                            ),
                        });
                    }
                }
                existing.direction = existing.direction.or(raw.direction);
                existing.kind = existing.kind.or(raw.kind);
                existing.range = existing.range.or(raw.range);
                if existing.comment.is_empty() {
                    existing.comment = raw.comment;
                }
            }
        }
    }

    let mut declarations = Vec::with_capacity(order.len());
    for name in order {
        let raw = by_name.remove(&name).unwrap();
        let (msb, lsb, width_bits) = match raw.range {
            Some(Range { msb, lsb }) => (msb, lsb, (msb - lsb).unsigned_abs() as u32 + 1),
            None => (0, 0, 1),
        };
        let direction = raw.direction.unwrap_or(Direction::Internal);
        let kind = raw.kind.unwrap_or(DeclKind::Wire);
        declarations.push(SignalDeclaration {
            identifier: raw.identifier,
            direction,
            kind,
            width_bits,
            msb,
            lsb,
            comment: raw.comment,
            source_line: raw.line,
        });
    }
    Ok(DeclarationTable { declarations })
}
