//! Tokenizer for the SVA subset.

use super::ast::{Literal, LiteralBase};
use super::{Pos, SvaError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// System function name including the `$`.
    SysIdent(String),
    Literal(Literal),
    /// `$` alone (unbounded range marker).
    Dollar,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    At,
    /// `##`
    DoubleHash,
    /// `[*` introducer is lexed as LBracket + Star.
    Star,
    OverlapImpl,
    NonOverlapImpl,
    Bang,
    Tilde,
    AmpAmp,
    PipePipe,
    Amp,
    Pipe,
    Caret,
    EqEq,
    BangEq,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

// Constructs we can name precisely when refusing them.
const UNSUPPORTED_OPERATORS: &[(&str, &str)] = &[
    ("===", "case equality operator `===`"),
    ("!==", "case inequality operator `!==`"),
    ("<->", "equivalence operator `<->`"),
    ("->", "implies operator `->`"),
    ("<<<", "arithmetic shift `<<<`"),
    (">>>", "arithmetic shift `>>>`"),
    ("<<", "shift operator `<<`"),
    (">>", "shift operator `>>`"),
    ("+", "arithmetic operator `+`"),
    ("-", "arithmetic operator `-`"),
    ("*", "arithmetic operator `*`"),
    ("/", "arithmetic operator `/`"),
    ("%", "arithmetic operator `%`"),
];

pub struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn here(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src[self.pos..].chars().next()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s)
    }

    fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Spanned>, SvaError> {
        let mut toks = Vec::new();
        loop {
            self.skip_trivia()?;
            let pos = self.here();
            let Some(c) = self.peek() else {
                toks.push(Spanned { tok: Tok::Eof, pos });
                return Ok(toks);
            };
            let tok = match c {
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '[' => {
                    self.bump();
                    Tok::LBracket
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                ':' => {
                    self.bump();
                    Tok::Colon
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '@' => {
                    self.bump();
                    Tok::At
                }
                '#' => {
                    if self.starts_with("##") {
                        self.advance(2);
                        Tok::DoubleHash
                    } else {
                        return Err(SvaError::Lex {
                            pos,
                            message: "single `#` is not a valid token".to_string(),
                        });
                    }
                }
                '|' => {
                    if self.starts_with("|->") {
                        self.advance(3);
                        Tok::OverlapImpl
                    } else if self.starts_with("|=>") {
                        self.advance(3);
                        Tok::NonOverlapImpl
                    } else if self.starts_with("||") {
                        self.advance(2);
                        Tok::PipePipe
                    } else {
                        self.bump();
                        Tok::Pipe
                    }
                }
                '&' => {
                    if self.starts_with("&&") {
                        self.advance(2);
                        Tok::AmpAmp
                    } else {
                        self.bump();
                        Tok::Amp
                    }
                }
                '^' => {
                    self.bump();
                    Tok::Caret
                }
                '!' => {
                    if let Some((op, name)) = self.match_unsupported() {
                        return Err(SvaError::SubsetViolation {
                            pos,
                            construct: format!("{name} ({op})"),
                        });
                    }
                    if self.starts_with("!=") {
                        self.advance(2);
                        Tok::BangEq
                    } else {
                        self.bump();
                        Tok::Bang
                    }
                }
                '~' => {
                    self.bump();
                    Tok::Tilde
                }
                '=' => {
                    if let Some((op, name)) = self.match_unsupported() {
                        return Err(SvaError::SubsetViolation {
                            pos,
                            construct: format!("{name} ({op})"),
                        });
                    }
                    if self.starts_with("==") {
                        self.advance(2);
                        Tok::EqEq
                    } else {
                        return Err(SvaError::Lex {
                            pos,
                            message: "single `=` is not a valid token".to_string(),
                        });
                    }
                }
                '<' | '>' => {
                    if let Some((op, name)) = self.match_unsupported() {
                        return Err(SvaError::SubsetViolation {
                            pos,
                            construct: format!("{name} ({op})"),
                        });
                    }
                    if self.starts_with("<=") {
                        self.advance(2);
                        Tok::Le
                    } else if self.starts_with(">=") {
                        self.advance(2);
                        Tok::Ge
                    } else if c == '<' {
                        self.bump();
                        Tok::Lt
                    } else {
                        self.bump();
                        Tok::Gt
                    }
                }
                '*' => {
                    self.bump();
                    Tok::Star
                }
                '$' => {
                    self.bump();
                    let name = self.take_ident_tail();
                    if name.is_empty() {
                        Tok::Dollar
                    } else {
                        Tok::SysIdent(format!("${name}"))
                    }
                }
                c if c.is_ascii_digit() => self.lex_number(pos)?,
                '\'' => self.lex_based_literal(pos, None)?,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let name = self.take_ident_tail();
                    Tok::Ident(name)
                }
                other => {
                    if let Some((op, name)) = self.match_unsupported() {
                        return Err(SvaError::SubsetViolation {
                            pos,
                            construct: format!("{name} ({op})"),
                        });
                    }
                    return Err(SvaError::Lex {
                        pos,
                        message: format!("unexpected character `{other}`"),
                    });
                }
            };
            toks.push(Spanned { tok, pos });
        }
    }

    fn match_unsupported(&self) -> Option<(&'static str, &'static str)> {
        UNSUPPORTED_OPERATORS
            .iter()
            .find(|(op, _)| self.starts_with(op))
            .copied()
    }

    fn skip_trivia(&mut self) -> Result<(), SvaError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.starts_with("//") => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.starts_with("/*") => {
                    let start = self.here();
                    self.advance(2);
                    loop {
                        if self.starts_with("*/") {
                            self.advance(2);
                            break;
                        }
                        if self.bump().is_none() {
                            return Err(SvaError::Lex {
                                pos: start,
                                message: "unterminated block comment".to_string(),
                            });
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn take_ident_tail(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.bump();
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn lex_number(&mut self, pos: Pos) -> Result<Tok, SvaError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '_' {
                self.bump();
            } else {
                break;
            }
        }
        let digits = self.src[start..self.pos].replace('_', "");
        if self.peek() == Some('\'') {
            let width: u32 = digits.parse().map_err(|_| SvaError::Lex {
                pos,
                message: format!("invalid literal width `{digits}`"),
            })?;
            if width == 0 || width > 64 {
                return Err(SvaError::Lex {
                    pos,
                    message: format!("literal width {width} out of range 1..=64"),
                });
            }
            return self.lex_based_literal(pos, Some(width));
        }
        let value: u64 = digits.parse().map_err(|_| SvaError::Lex {
            pos,
            message: format!("decimal literal `{digits}` out of range"),
        })?;
        Ok(Tok::Literal(Literal::decimal(value)))
    }

    fn lex_based_literal(&mut self, pos: Pos, width: Option<u32>) -> Result<Tok, SvaError> {
        debug_assert_eq!(self.peek(), Some('\''));
        self.bump();
        let base_char = self.bump().ok_or_else(|| SvaError::Lex {
            pos,
            message: "unterminated based literal".to_string(),
        })?;
        let (base, radix) = match base_char.to_ascii_lowercase() {
            'b' => (LiteralBase::Binary, 2),
            'o' => (LiteralBase::Octal, 8),
            'd' => (LiteralBase::Decimal, 10),
            'h' => (LiteralBase::Hex, 16),
            other => {
                return Err(SvaError::Lex {
                    pos,
                    message: format!("unknown literal base `'{other}`"),
                })
            }
        };
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                // x/z digits are 4-state literals, outside the subset.
                if matches!(c.to_ascii_lowercase(), 'x' | 'z' | '?') {
                    return Err(SvaError::SubsetViolation {
                        pos,
                        construct: "x/z digit in literal".to_string(),
                    });
                }
                self.bump();
            } else {
                break;
            }
        }
        let digits = self.src[start..self.pos].replace('_', "");
        if digits.is_empty() {
            return Err(SvaError::Lex {
                pos,
                message: "based literal with no digits".to_string(),
            });
        }
        let value = u64::from_str_radix(&digits, radix).map_err(|_| SvaError::Lex {
            pos,
            message: format!("invalid digits `{digits}` for base {radix}"),
        })?;
        Ok(Tok::Literal(Literal { value, width, base }))
    }
}
