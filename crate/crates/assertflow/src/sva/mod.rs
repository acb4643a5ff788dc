//! SystemVerilog Assertion subset: lexer, parser, AST, identifier scan
//! and canonical pretty-printer.
//!
//! The subset covers clocked concurrent assertions with one clocking
//! event: boolean expressions (logical/bitwise/relational/equality
//! operators, bit- and part-selects, integer literals), the sampled-value
//! functions `$past`, `$rose`, `$fell`, `$stable` plus `$bits`,
//! `$onehot`, `$onehot0`, sequence delay `##n` / `##[m:n]`, consecutive
//! repetition `[*n]`, overlapping and non-overlapping implication, and
//! property `not`/`and`/`or`. Recognized SVA constructs outside the
//! subset (e.g. `throughout`, arithmetic operators, unbounded ranges)
//! are reported as [`SvaError::SubsetViolation`], distinct from plain
//! parse errors. The operator precedence table is documented in
//! `docs/sva-subset.md`.

pub mod ast;
pub mod generate;
mod lexer;
mod parser;
mod printer;

pub use ast::{
    BinaryOp, Clocking, Delay, Edge, Expr, Literal, LiteralBase, PropertyExpr, SeqTerm, Sequence,
    SvaAst, SysFunc, UnaryOp,
};
pub use parser::{parse_sva, parse_sva_multi};
pub use printer::pretty_print;

use std::collections::BTreeSet;

use thiserror::Error;

/// Source position (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SvaError {
    #[error("lex error at {pos}: {message}")]
    Lex { pos: Pos, message: String },
    #[error("parse error at {pos}: {message}")]
    Parse { pos: Pos, message: String },
    #[error("unsupported SVA construct at {pos}: {construct}")]
    SubsetViolation { pos: Pos, construct: String },
}

impl SvaError {
    pub fn is_subset_violation(&self) -> bool {
        matches!(self, SvaError::SubsetViolation { .. })
    }
}

/// All signal identifiers referenced by an assertion, including the
/// clock and any `disable iff` condition; system-function names are not
/// identifiers.
pub fn scan_identifiers(ast: &SvaAst) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(ast.clocking.clock.clone());
    if let Some(cond) = &ast.disable_iff {
        scan_expr(cond, &mut out);
    }
    scan_property(&ast.body, &mut out);
    out
}

fn scan_property(prop: &PropertyExpr, out: &mut BTreeSet<String>) {
    match prop {
        PropertyExpr::Seq(seq) => scan_sequence(seq, out),
        PropertyExpr::Implication {
            antecedent,
            consequent,
            ..
        } => {
            scan_sequence(antecedent, out);
            scan_property(consequent, out);
        }
        PropertyExpr::Not(p) => scan_property(p, out),
        PropertyExpr::And(a, b) | PropertyExpr::Or(a, b) => {
            scan_property(a, out);
            scan_property(b, out);
        }
    }
}

fn scan_sequence(seq: &Sequence, out: &mut BTreeSet<String>) {
    for term in &seq.terms {
        scan_expr(&term.expr, out);
    }
}

fn scan_expr(expr: &Expr, out: &mut BTreeSet<String>) {
    match expr {
        Expr::Ident(name) => {
            out.insert(name.clone());
        }
        Expr::Literal(_) => {}
        Expr::Unary(_, e) => scan_expr(e, out),
        Expr::Binary(_, a, b) => {
            scan_expr(a, out);
            scan_expr(b, out);
        }
        Expr::BitSelect { base, .. } | Expr::PartSelect { base, .. } => scan_expr(base, out),
        Expr::SysFunc(f) => scan_expr(f.argument(), out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_implication() {
        let ast = parse_sva("assert property (@(posedge wb_clk_i) wb_stb_i |-> wb_cyc_i);")
            .unwrap();
        assert_eq!(ast.clocking.clock, "wb_clk_i");
        assert_eq!(ast.clocking.edge, Edge::Posedge);
        match &ast.body {
            PropertyExpr::Implication { overlapping, .. } => assert!(*overlapping),
            other => panic!("expected implication, got {other:?}"),
        }
    }

    #[test]
    fn parse_bits_comparison() {
        let ast = parse_sva("assert property (@(posedge clk) $bits(ctr) == 8);").unwrap();
        let PropertyExpr::Seq(seq) = &ast.body else {
            panic!("expected boolean body");
        };
        let Expr::Binary(BinaryOp::Eq, lhs, _) = &seq.terms[0].expr else {
            panic!("expected equality");
        };
        assert!(matches!(**lhs, Expr::SysFunc(SysFunc::Bits(_))));
    }

    #[test]
    fn malformed_input_positions_error() {
        let err = parse_sva("assert property (@(posedge clk) a |-> );").unwrap_err();
        let SvaError::Parse { pos, .. } = err else {
            panic!("expected parse error, got {err:?}");
        };
        // Error points at the close-paren.
        assert_eq!(pos.column, 39);
    }

    #[test]
    fn throughout_is_subset_violation() {
        let err =
            parse_sva("assert property (@(posedge clk) a throughout b ##1 c);").unwrap_err();
        assert!(err.is_subset_violation(), "{err:?}");
    }

    #[test]
    fn arithmetic_is_subset_violation() {
        let err = parse_sva("assert property (@(posedge clk) a + 1 == b);").unwrap_err();
        assert!(err.is_subset_violation(), "{err:?}");
    }

    #[test]
    fn scan_includes_clock_and_excludes_sysfuncs() {
        let ast = parse_sva("assert property (@(posedge clk) a |-> ##1 b);").unwrap();
        let ids = scan_identifiers(&ast);
        assert_eq!(
            ids.iter().map(String::as_str).collect::<Vec<_>>(),
            vec!["a", "b", "clk"]
        );

        let ast = parse_sva("assert property (@(posedge clk) $past(sr, 2) == sr);").unwrap();
        let ids = scan_identifiers(&ast);
        assert!(ids.contains("sr"));
        assert!(!ids.iter().any(|i| i.starts_with('$')));
    }

    #[test]
    fn named_property_form() {
        let src = "property p_stb;\n  @(posedge clk) stb |-> cyc;\nendproperty\nassert property (p_stb);";
        let ast = parse_sva(src).unwrap();
        assert_eq!(ast.label.as_deref(), Some("p_stb"));
        assert!(matches!(ast.body, PropertyExpr::Implication { .. }));
    }

    #[test]
    fn labeled_assert() {
        let ast = parse_sva("chk_width: assert property (@(posedge clk) $bits(sr) == 8);")
            .unwrap();
        assert_eq!(ast.label.as_deref(), Some("chk_width"));
    }

    #[test]
    fn disable_iff_parsed() {
        let ast = parse_sva(
            "assert property (@(posedge clk) disable iff (rst) req |=> ack);",
        )
        .unwrap();
        assert!(ast.disable_iff.is_some());
        assert!(scan_identifiers(&ast).contains("rst"));
    }

    #[test]
    fn delay_range_bounds_validated() {
        let err = parse_sva("assert property (@(posedge clk) a |-> ##[3:1] b);").unwrap_err();
        assert!(matches!(err, SvaError::Parse { .. }));
        let ok = parse_sva("assert property (@(posedge clk) a |-> ##[1:3] b);");
        assert!(ok.is_ok());
    }

    #[test]
    fn unbounded_delay_is_subset_violation() {
        let err = parse_sva("assert property (@(posedge clk) a |-> ##[1:$] b);").unwrap_err();
        assert!(err.is_subset_violation());
    }

    #[test]
    fn round_trip_examples() {
        for src in [
            "assert property (@(posedge wb_clk_i) wb_stb_i |-> wb_cyc_i);",
            "assert property (@(posedge clk) $bits(ctr) == 8);",
            "a1: assert property (@(negedge clk) disable iff (rst) (a && b) |=> ##[1:2] (c || !d));",
            "assert property (@(posedge clk) not (sr[1] && sr[0]));",
            "assert property (@(posedge clk) a [*3] ##1 b);",
            "assert property (@(posedge clk) ctr[5:0] == 6'b000000);",
        ] {
            let ast = parse_sva(src).unwrap();
            let printed = pretty_print(&ast);
            let reparsed = parse_sva(&printed)
                .unwrap_or_else(|e| panic!("canonical form failed to reparse: {printed}\n{e}"));
            assert_eq!(ast, reparsed, "round trip failed for {src}");
        }
    }

    #[test]
    fn missing_clocking_rejected() {
        let err = parse_sva("assert property (a |-> b);").unwrap_err();
        assert!(matches!(err, SvaError::Parse { .. }));
    }
}
