//! Recursive-descent parser for the SVA subset.
//!
//! Parsing is two-phase: a unified expression grammar first (boolean,
//! sequence and property operators in one precedence tower, so that
//! parentheses need no lookahead), then a lowering pass that assigns each
//! node to its layer and rejects e.g. an implication used as a boolean
//! operand.

use super::ast::*;
use super::lexer::{Lexer, Spanned, Tok};
use super::{Pos, SvaError};

use std::collections::HashMap;

/// Parse a single assertion (optionally written as a named
/// `property ... endproperty` plus an `assert property (name);`).
pub fn parse_sva(text: &str) -> Result<SvaAst, SvaError> {
    let mut items = parse_sva_multi(text)?;
    match items.len() {
        1 => Ok(items.remove(0)),
        0 => Err(SvaError::Parse {
            pos: Pos { line: 1, column: 1 },
            message: "no assertion found".to_string(),
        }),
        n => Err(SvaError::Parse {
            pos: Pos { line: 1, column: 1 },
            message: format!("expected one assertion, found {n}"),
        }),
    }
}

/// Parse a file with any number of assertions, one statement each.
pub fn parse_sva_multi(text: &str) -> Result<Vec<SvaAst>, SvaError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser {
        toks,
        pos: 0,
        named: HashMap::new(),
    };
    let mut out = Vec::new();
    while !p.at_eof() {
        if p.peek_ident() == Some("property") {
            p.parse_property_decl()?;
        } else {
            out.push(p.parse_assert_item()?);
        }
    }
    Ok(out)
}

// Property-layer keywords outside the subset. Meeting one of these is a
// subset violation, not a plain parse error.
const SUBSET_KEYWORDS: &[&str] = &[
    "throughout",
    "within",
    "intersect",
    "first_match",
    "until",
    "s_until",
    "until_with",
    "s_until_with",
    "eventually",
    "s_eventually",
    "nexttime",
    "s_nexttime",
    "always",
    "s_always",
    "strong",
    "weak",
    "accept_on",
    "reject_on",
    "sync_accept_on",
    "sync_reject_on",
    "sequence",
    "endsequence",
    "if",
    "else",
    "case",
    "expect",
    "assume",
    "cover",
    "restrict",
    "implies",
    "dist",
    "inside",
    "matched",
    "triggered",
    "local",
    "var",
];

const RESERVED: &[&str] = &[
    "assert",
    "property",
    "endproperty",
    "disable",
    "iff",
    "posedge",
    "negedge",
    "not",
    "and",
    "or",
];

const KNOWN_SYS_FUNCS: &[&str] = &[
    "$past", "$rose", "$fell", "$stable", "$bits", "$onehot", "$onehot0",
];

// ---------------------------------------------------------------------------
// Raw (untyped) expression tree
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum Raw {
    Ident(String, Pos),
    Literal(Literal, Pos),
    SysFunc(SysFunc, Pos),
    Unary(UnaryOp, Box<Raw>, Pos),
    Binary(BinaryOp, Box<Raw>, Box<Raw>, Pos),
    BitSelect(Box<Raw>, u32, Pos),
    PartSelect(Box<Raw>, u32, u32, Pos),
    Repeat(Box<Raw>, u32, Pos),
    DelayChain(Vec<Raw>, Vec<Delay>, Pos),
    PropNot(Box<Raw>, Pos),
    PropAnd(Box<Raw>, Box<Raw>, Pos),
    PropOr(Box<Raw>, Box<Raw>, Pos),
    Impl {
        antecedent: Box<Raw>,
        overlapping: bool,
        consequent: Box<Raw>,
        pos: Pos,
    },
}

impl Raw {
    fn pos(&self) -> Pos {
        match self {
            Raw::Ident(_, p)
            | Raw::Literal(_, p)
            | Raw::SysFunc(_, p)
            | Raw::Unary(_, _, p)
            | Raw::Binary(_, _, _, p)
            | Raw::BitSelect(_, _, p)
            | Raw::PartSelect(_, _, _, p)
            | Raw::Repeat(_, _, p)
            | Raw::DelayChain(_, _, p)
            | Raw::PropNot(_, p)
            | Raw::PropAnd(_, _, p)
            | Raw::PropOr(_, _, p)
            | Raw::Impl { pos: p, .. } => *p,
        }
    }
}

struct NamedProperty {
    clocking: Clocking,
    disable_iff: Option<Expr>,
    body: PropertyExpr,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    named: HashMap<String, NamedProperty>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek2(&self) -> &Spanned {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek().tok, Tok::Eof)
    }

    fn bump(&mut self) -> Spanned {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn peek_ident(&self) -> Option<&str> {
        match &self.peek().tok {
            Tok::Ident(s) => Some(s.as_str()),
            _ => None,
        }
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if self.peek_ident() == Some(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, SvaError> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn expect_plain_ident(&mut self, what: &str) -> Result<(String, Pos), SvaError> {
        match &self.peek().tok {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                if SUBSET_KEYWORDS.contains(&s.as_str()) {
                    return Err(SvaError::SubsetViolation {
                        pos: self.peek().pos,
                        construct: format!("`{s}`"),
                    });
                }
                let s = s.clone();
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// Error for an unexpected token; subset keywords become subset
    /// violations so that "valid SVA, unsupported here" is reported apart
    /// from plain syntax errors.
    fn unexpected(&self, what: &str) -> SvaError {
        let t = self.peek();
        if let Tok::Ident(s) = &t.tok {
            if SUBSET_KEYWORDS.contains(&s.as_str()) {
                return SvaError::SubsetViolation {
                    pos: t.pos,
                    construct: format!("`{s}`"),
                };
            }
        }
        SvaError::Parse {
            pos: t.pos,
            message: format!("expected {what}, found {}", describe(&t.tok)),
        }
    }

    // -- items ------------------------------------------------------------

    fn parse_property_decl(&mut self) -> Result<(), SvaError> {
        self.bump(); // property
        let (name, pos) = self.expect_plain_ident("property name")?;
        self.expect(Tok::Semi, "`;` after property name")?;
        let (clocking, disable_iff, body) = self.parse_prop_spec()?;
        self.eat(&Tok::Semi);
        if !self.eat_ident("endproperty") {
            return Err(self.unexpected("`endproperty`"));
        }
        if self.named.contains_key(&name) {
            return Err(SvaError::Parse {
                pos,
                message: format!("property `{name}` declared twice"),
            });
        }
        self.named.insert(
            name,
            NamedProperty {
                clocking,
                disable_iff,
                body,
            },
        );
        Ok(())
    }

    fn parse_assert_item(&mut self) -> Result<SvaAst, SvaError> {
        // Optional label.
        let mut label = None;
        if let Tok::Ident(s) = &self.peek().tok {
            if s != "assert" && matches!(self.peek2().tok, Tok::Colon) {
                let (name, _) = self.expect_plain_ident("label")?;
                self.bump(); // colon
                label = Some(name);
            }
        }
        if !self.eat_ident("assert") {
            return Err(self.unexpected("`assert`"));
        }
        if !self.eat_ident("property") {
            return Err(self.unexpected("`property`"));
        }
        self.expect(Tok::LParen, "`(`")?;

        // Named-property reference: a single identifier before `)`.
        if let Tok::Ident(name) = &self.peek().tok {
            if !RESERVED.contains(&name.as_str()) && matches!(self.peek2().tok, Tok::RParen) {
                let (name, pos) = self.expect_plain_ident("property name")?;
                self.bump(); // rparen
                self.expect(Tok::Semi, "`;`")?;
                let named = self.named.get(&name).ok_or_else(|| SvaError::Parse {
                    pos,
                    message: format!("unknown property `{name}`"),
                })?;
                return Ok(SvaAst {
                    label: label.or(Some(name.clone())),
                    clocking: named.clocking.clone(),
                    disable_iff: named.disable_iff.clone(),
                    body: named.body.clone(),
                });
            }
        }

        let (clocking, disable_iff, body) = self.parse_prop_spec()?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(SvaAst {
            label,
            clocking,
            disable_iff,
            body,
        })
    }

    fn parse_prop_spec(
        &mut self,
    ) -> Result<(Clocking, Option<Expr>, PropertyExpr), SvaError> {
        self.expect(Tok::At, "clocking event `@(...)`")?;
        self.expect(Tok::LParen, "`(` after `@`")?;
        let edge = if self.eat_ident("posedge") {
            Edge::Posedge
        } else if self.eat_ident("negedge") {
            Edge::Negedge
        } else {
            return Err(self.unexpected("`posedge` or `negedge`"));
        };
        let (clock, _) = self.expect_plain_ident("clock identifier")?;
        self.expect(Tok::RParen, "`)` closing clocking event")?;

        let disable_iff = if self.eat_ident("disable") {
            if !self.eat_ident("iff") {
                return Err(self.unexpected("`iff`"));
            }
            self.expect(Tok::LParen, "`(` after `disable iff`")?;
            let raw = self.parse_prop()?;
            self.expect(Tok::RParen, "`)` closing `disable iff`")?;
            Some(lower_bool(&raw)?)
        } else {
            None
        };

        let raw = self.parse_prop()?;
        let body = lower_property(&raw)?;
        Ok((Clocking { edge, clock }, disable_iff, body))
    }

    // -- unified expression tower -----------------------------------------

    fn parse_prop(&mut self) -> Result<Raw, SvaError> {
        self.parse_impl()
    }

    fn parse_impl(&mut self) -> Result<Raw, SvaError> {
        let lhs = self.parse_prop_or()?;
        let overlapping = match self.peek().tok {
            Tok::OverlapImpl => true,
            Tok::NonOverlapImpl => false,
            _ => return Ok(lhs),
        };
        let pos = self.bump().pos;
        let rhs = self.parse_impl()?;
        Ok(Raw::Impl {
            antecedent: Box::new(lhs),
            overlapping,
            consequent: Box::new(rhs),
            pos,
        })
    }

    fn parse_prop_or(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_prop_and()?;
        while self.peek_ident() == Some("or") {
            let pos = self.bump().pos;
            let rhs = self.parse_prop_and()?;
            lhs = Raw::PropOr(Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn parse_prop_and(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_prop_not()?;
        while self.peek_ident() == Some("and") {
            let pos = self.bump().pos;
            let rhs = self.parse_prop_not()?;
            lhs = Raw::PropAnd(Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn parse_prop_not(&mut self) -> Result<Raw, SvaError> {
        if self.peek_ident() == Some("not") {
            let pos = self.bump().pos;
            let inner = self.parse_prop_not()?;
            return Ok(Raw::PropNot(Box::new(inner), pos));
        }
        self.parse_seq()
    }

    fn parse_seq(&mut self) -> Result<Raw, SvaError> {
        let start = self.peek().pos;
        let mut terms: Vec<Raw> = Vec::new();
        let mut delays: Vec<Delay> = Vec::new();

        // A leading `##n` (common in consequents) is normalized to an
        // implicit true first term.
        if matches!(self.peek().tok, Tok::DoubleHash) {
            terms.push(Raw::Literal(
                Literal {
                    value: 1,
                    width: Some(1),
                    base: LiteralBase::Binary,
                },
                start,
            ));
        } else {
            terms.push(self.parse_repeat_term()?);
        }
        while matches!(self.peek().tok, Tok::DoubleHash) {
            self.bump();
            delays.push(self.parse_delay()?);
            terms.push(self.parse_repeat_term()?);
        }
        if delays.is_empty() {
            Ok(terms.pop().unwrap())
        } else {
            Ok(Raw::DelayChain(terms, delays, start))
        }
    }

    fn parse_delay(&mut self) -> Result<Delay, SvaError> {
        match self.peek().tok.clone() {
            Tok::Literal(lit) => {
                let pos = self.bump().pos;
                Ok(Delay {
                    lo: literal_u32(&lit, pos)?,
                    hi: None,
                })
            }
            Tok::LBracket => {
                self.bump();
                let lo_tok = self.bump();
                let lo = match &lo_tok.tok {
                    Tok::Literal(lit) => literal_u32(lit, lo_tok.pos)?,
                    _ => {
                        return Err(SvaError::Parse {
                            pos: lo_tok.pos,
                            message: "expected integer delay bound".to_string(),
                        })
                    }
                };
                self.expect(Tok::Colon, "`:` in delay range")?;
                if matches!(self.peek().tok, Tok::Dollar) {
                    return Err(SvaError::SubsetViolation {
                        pos: self.peek().pos,
                        construct: "unbounded delay range `##[m:$]`".to_string(),
                    });
                }
                let hi_tok = self.bump();
                let hi = match &hi_tok.tok {
                    Tok::Literal(lit) => literal_u32(lit, hi_tok.pos)?,
                    _ => {
                        return Err(SvaError::Parse {
                            pos: hi_tok.pos,
                            message: "expected integer delay bound".to_string(),
                        })
                    }
                };
                if lo > hi {
                    return Err(SvaError::Parse {
                        pos: hi_tok.pos,
                        message: format!("delay range [{lo}:{hi}] has lo > hi"),
                    });
                }
                self.expect(Tok::RBracket, "`]` closing delay range")?;
                Ok(Delay { lo, hi: Some(hi) })
            }
            _ => Err(self.unexpected("delay after `##`")),
        }
    }

    fn parse_repeat_term(&mut self) -> Result<Raw, SvaError> {
        let expr = self.parse_bool_or()?;
        if matches!(self.peek().tok, Tok::LBracket) && matches!(self.peek2().tok, Tok::Star) {
            let pos = self.bump().pos; // [
            self.bump(); // *
            let n_tok = self.bump();
            let n = match &n_tok.tok {
                Tok::Literal(lit) => literal_u32(lit, n_tok.pos)?,
                Tok::RBracket | Tok::Dollar => {
                    return Err(SvaError::SubsetViolation {
                        pos: n_tok.pos,
                        construct: "unbounded repetition".to_string(),
                    })
                }
                _ => {
                    return Err(SvaError::Parse {
                        pos: n_tok.pos,
                        message: "expected integer repetition count".to_string(),
                    })
                }
            };
            if matches!(self.peek().tok, Tok::Colon) {
                return Err(SvaError::SubsetViolation {
                    pos: self.peek().pos,
                    construct: "ranged repetition `[*m:n]`".to_string(),
                });
            }
            self.expect(Tok::RBracket, "`]` closing repetition")?;
            if n == 0 {
                return Err(SvaError::SubsetViolation {
                    pos,
                    construct: "empty repetition `[*0]`".to_string(),
                });
            }
            return Ok(Raw::Repeat(Box::new(expr), n, pos));
        }
        Ok(expr)
    }

    fn parse_bool_or(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_bool_and()?;
        while matches!(self.peek().tok, Tok::PipePipe) {
            let pos = self.bump().pos;
            let rhs = self.parse_bool_and()?;
            lhs = Raw::Binary(BinaryOp::LogicalOr, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn parse_bool_and(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_bit_or()?;
        while matches!(self.peek().tok, Tok::AmpAmp) {
            let pos = self.bump().pos;
            let rhs = self.parse_bit_or()?;
            lhs = Raw::Binary(BinaryOp::LogicalAnd, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn parse_bit_or(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_bit_xor()?;
        while matches!(self.peek().tok, Tok::Pipe) {
            let pos = self.bump().pos;
            let rhs = self.parse_bit_xor()?;
            lhs = Raw::Binary(BinaryOp::BitOr, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn parse_bit_xor(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_bit_and()?;
        while matches!(self.peek().tok, Tok::Caret) {
            let pos = self.bump().pos;
            let rhs = self.parse_bit_and()?;
            lhs = Raw::Binary(BinaryOp::BitXor, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn parse_bit_and(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_equality()?;
        while matches!(self.peek().tok, Tok::Amp) {
            let pos = self.bump().pos;
            let rhs = self.parse_equality()?;
            lhs = Raw::Binary(BinaryOp::BitAnd, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn parse_equality(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_relational()?;
        loop {
            let op = match self.peek().tok {
                Tok::EqEq => BinaryOp::Eq,
                Tok::BangEq => BinaryOp::Ne,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.parse_relational()?;
            lhs = Raw::Binary(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn parse_relational(&mut self) -> Result<Raw, SvaError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Lt => BinaryOp::Lt,
                Tok::Le => BinaryOp::Le,
                Tok::Gt => BinaryOp::Gt,
                Tok::Ge => BinaryOp::Ge,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.parse_unary()?;
            lhs = Raw::Binary(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn parse_unary(&mut self) -> Result<Raw, SvaError> {
        let op = match self.peek().tok {
            Tok::Bang => Some(UnaryOp::LogicalNot),
            Tok::Tilde => Some(UnaryOp::BitNot),
            _ => None,
        };
        if let Some(op) = op {
            let pos = self.bump().pos;
            let inner = self.parse_unary()?;
            return Ok(Raw::Unary(op, Box::new(inner), pos));
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> Result<Raw, SvaError> {
        let mut expr = self.parse_primary()?;
        while matches!(self.peek().tok, Tok::LBracket) {
            // `[*` is repetition, owned by the sequence layer.
            if matches!(self.peek2().tok, Tok::Star) {
                break;
            }
            let pos = self.bump().pos;
            let first = self.bump();
            let first_n = match &first.tok {
                Tok::Literal(lit) => literal_u32(lit, first.pos)?,
                Tok::Dollar => {
                    return Err(SvaError::SubsetViolation {
                        pos: first.pos,
                        construct: "`$` select bound".to_string(),
                    })
                }
                _ => {
                    return Err(SvaError::Parse {
                        pos: first.pos,
                        message: "expected integer select index".to_string(),
                    })
                }
            };
            if self.eat(&Tok::Colon) {
                let second = self.bump();
                let second_n = match &second.tok {
                    Tok::Literal(lit) => literal_u32(lit, second.pos)?,
                    _ => {
                        return Err(SvaError::Parse {
                            pos: second.pos,
                            message: "expected integer select bound".to_string(),
                        })
                    }
                };
                if second_n > first_n {
                    return Err(SvaError::Parse {
                        pos: second.pos,
                        message: format!("part-select [{first_n}:{second_n}] has lsb > msb"),
                    });
                }
                self.expect(Tok::RBracket, "`]` closing part-select")?;
                expr = Raw::PartSelect(Box::new(expr), first_n, second_n, pos);
            } else {
                self.expect(Tok::RBracket, "`]` closing bit-select")?;
                expr = Raw::BitSelect(Box::new(expr), first_n, pos);
            }
        }
        Ok(expr)
    }

    fn parse_primary(&mut self) -> Result<Raw, SvaError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::LParen => {
                self.bump();
                let inner = self.parse_prop()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Literal(lit) => {
                self.bump();
                Ok(Raw::Literal(*lit, t.pos))
            }
            Tok::Ident(name) => {
                if SUBSET_KEYWORDS.contains(&name.as_str()) {
                    return Err(SvaError::SubsetViolation {
                        pos: t.pos,
                        construct: format!("`{name}`"),
                    });
                }
                if RESERVED.contains(&name.as_str()) {
                    return Err(self.unexpected("expression"));
                }
                let name = name.clone();
                self.bump();
                Ok(Raw::Ident(name, t.pos))
            }
            Tok::SysIdent(name) => {
                if !KNOWN_SYS_FUNCS.contains(&name.as_str()) {
                    return Err(SvaError::SubsetViolation {
                        pos: t.pos,
                        construct: format!("system function `{name}`"),
                    });
                }
                let name = name.clone();
                self.bump();
                self.expect(Tok::LParen, "`(` after system function")?;
                let arg_raw = self.parse_bool_or()?;
                let arg = lower_bool(&arg_raw)?;
                let func = if name == "$past" {
                    let depth = if self.eat(&Tok::Comma) {
                        let d = self.bump();
                        match &d.tok {
                            Tok::Literal(lit) => {
                                let n = literal_u32(lit, d.pos)?;
                                if n == 0 {
                                    return Err(SvaError::Parse {
                                        pos: d.pos,
                                        message: "$past depth must be positive".to_string(),
                                    });
                                }
                                n
                            }
                            _ => {
                                return Err(SvaError::Parse {
                                    pos: d.pos,
                                    message: "expected integer $past depth".to_string(),
                                })
                            }
                        }
                    } else {
                        1
                    };
                    SysFunc::Past {
                        expr: Box::new(arg),
                        depth,
                    }
                } else {
                    let boxed = Box::new(arg);
                    match name.as_str() {
                        "$rose" => SysFunc::Rose(boxed),
                        "$fell" => SysFunc::Fell(boxed),
                        "$stable" => SysFunc::Stable(boxed),
                        "$bits" => SysFunc::Bits(boxed),
                        "$onehot" => SysFunc::Onehot(boxed),
                        "$onehot0" => SysFunc::Onehot0(boxed),
                        _ => unreachable!(),
                    }
                };
                self.expect(Tok::RParen, "`)` closing system function")?;
                Ok(Raw::SysFunc(func, t.pos))
            }
            Tok::Dollar => Err(SvaError::SubsetViolation {
                pos: t.pos,
                construct: "`$` outside a delay range".to_string(),
            }),
            Tok::Star => Err(SvaError::SubsetViolation {
                pos: t.pos,
                construct: "arithmetic operator `*`".to_string(),
            }),
            _ => Err(self.unexpected("expression")),
        }
    }
}

fn literal_u32(lit: &Literal, pos: Pos) -> Result<u32, SvaError> {
    u32::try_from(lit.value).map_err(|_| SvaError::Parse {
        pos,
        message: format!("integer {} out of range", lit.value),
    })
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::SysIdent(s) => format!("`{s}`"),
        Tok::Literal(l) => format!("literal {}", l.value),
        Tok::Eof => "end of input".to_string(),
        Tok::LParen => "`(`".to_string(),
        Tok::RParen => "`)`".to_string(),
        Tok::LBracket => "`[`".to_string(),
        Tok::RBracket => "`]`".to_string(),
        Tok::Colon => "`:`".to_string(),
        Tok::Semi => "`;`".to_string(),
        Tok::Comma => "`,`".to_string(),
        Tok::At => "`@`".to_string(),
        Tok::DoubleHash => "`##`".to_string(),
        Tok::Star => "`*`".to_string(),
        Tok::OverlapImpl => "`|->`".to_string(),
        Tok::NonOverlapImpl => "`|=>`".to_string(),
        Tok::Bang => "`!`".to_string(),
        Tok::Tilde => "`~`".to_string(),
        Tok::AmpAmp => "`&&`".to_string(),
        Tok::PipePipe => "`||`".to_string(),
        Tok::Amp => "`&`".to_string(),
        Tok::Pipe => "`|`".to_string(),
        Tok::Caret => "`^`".to_string(),
        Tok::EqEq => "`==`".to_string(),
        Tok::BangEq => "`!=`".to_string(),
        Tok::Lt => "`<`".to_string(),
        Tok::Le => "`<=`".to_string(),
        Tok::Gt => "`>`".to_string(),
        Tok::Ge => "`>=`".to_string(),
        Tok::Dollar => "`$`".to_string(),
    }
}

// ---------------------------------------------------------------------------
// Lowering: raw tree -> typed layers
// ---------------------------------------------------------------------------

fn lower_property(raw: &Raw) -> Result<PropertyExpr, SvaError> {
    match raw {
        Raw::Impl {
            antecedent,
            overlapping,
            consequent,
            ..
        } => Ok(PropertyExpr::Implication {
            antecedent: lower_sequence(antecedent)?,
            overlapping: *overlapping,
            consequent: Box::new(lower_property(consequent)?),
        }),
        Raw::PropNot(inner, _) => Ok(PropertyExpr::Not(Box::new(lower_property(inner)?))),
        Raw::PropAnd(a, b, _) => Ok(PropertyExpr::And(
            Box::new(lower_property(a)?),
            Box::new(lower_property(b)?),
        )),
        Raw::PropOr(a, b, _) => Ok(PropertyExpr::Or(
            Box::new(lower_property(a)?),
            Box::new(lower_property(b)?),
        )),
        other => Ok(PropertyExpr::Seq(lower_sequence(other)?)),
    }
}

fn lower_sequence(raw: &Raw) -> Result<Sequence, SvaError> {
    match raw {
        Raw::DelayChain(raw_terms, delays, _) => {
            let mut terms = Vec::with_capacity(raw_terms.len());
            for t in raw_terms {
                terms.push(lower_seq_term(t)?);
            }
            Ok(Sequence {
                terms,
                delays: delays.clone(),
            })
        }
        other => Ok(Sequence {
            terms: vec![lower_seq_term(other)?],
            delays: Vec::new(),
        }),
    }
}

fn lower_seq_term(raw: &Raw) -> Result<SeqTerm, SvaError> {
    match raw {
        Raw::Repeat(inner, n, _) => Ok(SeqTerm {
            expr: lower_bool(inner)?,
            repeat: Some(*n),
        }),
        other => Ok(SeqTerm {
            expr: lower_bool(other)?,
            repeat: None,
        }),
    }
}

fn lower_bool(raw: &Raw) -> Result<Expr, SvaError> {
    match raw {
        Raw::Ident(name, _) => Ok(Expr::Ident(name.clone())),
        Raw::Literal(lit, _) => Ok(Expr::Literal(*lit)),
        Raw::SysFunc(f, _) => Ok(Expr::SysFunc(f.clone())),
        Raw::Unary(op, inner, _) => Ok(Expr::Unary(*op, Box::new(lower_bool(inner)?))),
        Raw::Binary(op, a, b, _) => Ok(Expr::Binary(
            *op,
            Box::new(lower_bool(a)?),
            Box::new(lower_bool(b)?),
        )),
        Raw::BitSelect(base, index, _) => Ok(Expr::BitSelect {
            base: Box::new(lower_bool(base)?),
            index: *index,
        }),
        Raw::PartSelect(base, msb, lsb, _) => Ok(Expr::PartSelect {
            base: Box::new(lower_bool(base)?),
            msb: *msb,
            lsb: *lsb,
        }),
        Raw::DelayChain(..) | Raw::Repeat(..) => Err(SvaError::Parse {
            pos: raw.pos(),
            message: "sequence construct used in boolean context".to_string(),
        }),
        Raw::PropNot(..) | Raw::PropAnd(..) | Raw::PropOr(..) => Err(SvaError::Parse {
            pos: raw.pos(),
            message: "property operator used in boolean context".to_string(),
        }),
        Raw::Impl { .. } => Err(SvaError::Parse {
            pos: raw.pos(),
            message: "implication used in boolean context".to_string(),
        }),
    }
}
