//! AST node types for the SVA subset.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Posedge,
    Negedge,
}

/// The single clocking event of an assertion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clocking {
    pub edge: Edge,
    pub clock: String,
}

/// A complete concurrent assertion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvaAst {
    pub label: Option<String>,
    pub clocking: Clocking,
    pub disable_iff: Option<Expr>,
    pub body: PropertyExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropertyExpr {
    Seq(Sequence),
    Implication {
        antecedent: Sequence,
        /// `|->` when true, `|=>` when false.
        overlapping: bool,
        consequent: Box<PropertyExpr>,
    },
    Not(Box<PropertyExpr>),
    And(Box<PropertyExpr>, Box<PropertyExpr>),
    Or(Box<PropertyExpr>, Box<PropertyExpr>),
}

/// Delay-separated chain of boolean terms: `t0 ##d1 t1 ##d2 t2 ...`.
///
/// Invariant: `delays.len() + 1 == terms.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub terms: Vec<SeqTerm>,
    pub delays: Vec<Delay>,
}

impl Sequence {
    pub fn single(expr: Expr) -> Self {
        Sequence {
            terms: vec![SeqTerm { expr, repeat: None }],
            delays: Vec::new(),
        }
    }

    /// A sequence that is a bare boolean expression.
    pub fn as_boolean(&self) -> Option<&Expr> {
        if self.terms.len() == 1 && self.terms[0].repeat.is_none() {
            Some(&self.terms[0].expr)
        } else {
            None
        }
    }
}

/// `##n` (hi = None) or `##[lo:hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delay {
    pub lo: u32,
    pub hi: Option<u32>,
}

impl Delay {
    pub fn bounds(&self) -> (u32, u32) {
        (self.lo, self.hi.unwrap_or(self.lo))
    }
}

/// Boolean term, optionally with consecutive repetition `[*n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqTerm {
    pub expr: Expr,
    pub repeat: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnaryOp {
    /// `!`
    LogicalNot,
    /// `~`
    BitNot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryOp {
    LogicalOr,
    LogicalAnd,
    BitOr,
    BitXor,
    BitAnd,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinaryOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinaryOp::LogicalOr => "||",
            BinaryOp::LogicalAnd => "&&",
            BinaryOp::BitOr => "|",
            BinaryOp::BitXor => "^",
            BinaryOp::BitAnd => "&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiteralBase {
    Binary,
    Octal,
    Decimal,
    Hex,
}

/// Integer literal, optionally sized (`8'hff`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub value: u64,
    pub width: Option<u32>,
    pub base: LiteralBase,
}

impl Literal {
    pub fn decimal(value: u64) -> Self {
        Literal {
            value,
            width: None,
            base: LiteralBase::Decimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SysFunc {
    /// `$past(e)` / `$past(e, n)`; depth is at least 1.
    Past { expr: Box<Expr>, depth: u32 },
    Rose(Box<Expr>),
    Fell(Box<Expr>),
    Stable(Box<Expr>),
    Bits(Box<Expr>),
    Onehot(Box<Expr>),
    Onehot0(Box<Expr>),
}

impl SysFunc {
    pub fn name(&self) -> &'static str {
        match self {
            SysFunc::Past { .. } => "$past",
            SysFunc::Rose(_) => "$rose",
            SysFunc::Fell(_) => "$fell",
            SysFunc::Stable(_) => "$stable",
            SysFunc::Bits(_) => "$bits",
            SysFunc::Onehot(_) => "$onehot",
            SysFunc::Onehot0(_) => "$onehot0",
        }
    }

    pub fn argument(&self) -> &Expr {
        match self {
            SysFunc::Past { expr, .. } => expr,
            SysFunc::Rose(e)
            | SysFunc::Fell(e)
            | SysFunc::Stable(e)
            | SysFunc::Bits(e)
            | SysFunc::Onehot(e)
            | SysFunc::Onehot0(e) => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Ident(String),
    Literal(Literal),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    BitSelect { base: Box<Expr>, index: u32 },
    PartSelect { base: Box<Expr>, msb: u32, lsb: u32 },
    SysFunc(SysFunc),
}
