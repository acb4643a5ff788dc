//! Canonical single-line rendering of SVA ASTs.
//!
//! `parse_sva(pretty_print(ast))` is structurally equal to `ast`. Binary
//! boolean expressions print fully parenthesized; property operands print
//! parenthesized unless they are plain sequences.

use super::ast::*;
use std::fmt::Write;

pub fn pretty_print(ast: &SvaAst) -> String {
    let mut out = String::new();
    if let Some(label) = &ast.label {
        let _ = write!(out, "{label}: ");
    }
    let edge = match ast.clocking.edge {
        Edge::Posedge => "posedge",
        Edge::Negedge => "negedge",
    };
    let _ = write!(out, "assert property (@({edge} {})", ast.clocking.clock);
    if let Some(cond) = &ast.disable_iff {
        let _ = write!(out, " disable iff ({})", expr_str(cond));
    }
    let _ = write!(out, " {});", property_str(&ast.body));
    out
}

fn property_str(prop: &PropertyExpr) -> String {
    match prop {
        PropertyExpr::Seq(seq) => sequence_str(seq),
        PropertyExpr::Implication {
            antecedent,
            overlapping,
            consequent,
        } => {
            let arrow = if *overlapping { "|->" } else { "|=>" };
            format!(
                "{} {arrow} {}",
                sequence_str(antecedent),
                property_str(consequent)
            )
        }
        PropertyExpr::Not(inner) => format!("not {}", prop_operand_str(inner)),
        PropertyExpr::And(a, b) => {
            format!("{} and {}", prop_operand_str(a), prop_operand_str(b))
        }
        PropertyExpr::Or(a, b) => {
            format!("{} or {}", prop_operand_str(a), prop_operand_str(b))
        }
    }
}

// Operand of a property-level operator: sequences are unambiguous, any
// nested property operator gets explicit parentheses.
fn prop_operand_str(prop: &PropertyExpr) -> String {
    match prop {
        PropertyExpr::Seq(seq) => sequence_str(seq),
        other => format!("({})", property_str(other)),
    }
}

fn sequence_str(seq: &Sequence) -> String {
    let mut out = term_str(&seq.terms[0]);
    for (delay, term) in seq.delays.iter().zip(seq.terms.iter().skip(1)) {
        match delay.hi {
            None => {
                let _ = write!(out, " ##{} {}", delay.lo, term_str(term));
            }
            Some(hi) => {
                let _ = write!(out, " ##[{}:{}] {}", delay.lo, hi, term_str(term));
            }
        }
    }
    out
}

fn term_str(term: &SeqTerm) -> String {
    match term.repeat {
        Some(n) => format!("{} [*{}]", expr_str(&term.expr), n),
        None => expr_str(&term.expr),
    }
}

fn expr_str(expr: &Expr) -> String {
    match expr {
        Expr::Ident(name) => name.clone(),
        Expr::Literal(lit) => literal_str(lit),
        Expr::Unary(op, inner) => {
            let sym = match op {
                UnaryOp::LogicalNot => "!",
                UnaryOp::BitNot => "~",
            };
            format!("{sym}{}", operand_str(inner))
        }
        Expr::Binary(op, a, b) => {
            format!("({} {} {})", expr_str(a), op.symbol(), expr_str(b))
        }
        Expr::BitSelect { base, index } => format!("{}[{index}]", operand_str(base)),
        Expr::PartSelect { base, msb, lsb } => {
            format!("{}[{msb}:{lsb}]", operand_str(base))
        }
        Expr::SysFunc(f) => sysfunc_str(f),
    }
}

// Operand of a unary operator or select: atoms print bare, composites
// get parentheses.
fn operand_str(expr: &Expr) -> String {
    match expr {
        Expr::Ident(_)
        | Expr::Literal(_)
        | Expr::SysFunc(_)
        | Expr::BitSelect { .. }
        | Expr::PartSelect { .. } => expr_str(expr),
        _ => format!("({})", expr_str(expr)),
    }
}

fn sysfunc_str(f: &SysFunc) -> String {
    match f {
        SysFunc::Past { expr, depth } if *depth > 1 => {
            format!("$past({}, {depth})", expr_str(expr))
        }
        other => format!("{}({})", other.name(), expr_str(other.argument())),
    }
}

fn literal_str(lit: &Literal) -> String {
    let base_char = match lit.base {
        LiteralBase::Binary => 'b',
        LiteralBase::Octal => 'o',
        LiteralBase::Decimal => 'd',
        LiteralBase::Hex => 'h',
    };
    let digits = match lit.base {
        LiteralBase::Binary => format!("{:b}", lit.value),
        LiteralBase::Octal => format!("{:o}", lit.value),
        LiteralBase::Decimal => format!("{}", lit.value),
        LiteralBase::Hex => format!("{:x}", lit.value),
    };
    match (lit.width, lit.base) {
        (None, LiteralBase::Decimal) => digits,
        (None, _) => format!("'{base_char}{digits}"),
        (Some(w), _) => format!("{w}'{base_char}{digits}"),
    }
}
