//! Seeded random AST generation, used by the round-trip test suites.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::ast::*;

const IDENT_POOL: &[&str] = &[
    "clk", "rst", "req", "ack", "stb", "cyc", "sr", "ctr", "prer", "txr", "rxr", "busy", "done",
    "valid", "ready",
];

pub struct AstGenerator {
    rng: StdRng,
}

impl AstGenerator {
    pub fn new(seed: u64) -> Self {
        AstGenerator {
            rng: StdRng::seed_from_u64(seed),
        }
    }

    pub fn assertion(&mut self) -> SvaAst {
        let label = if self.rng.gen_bool(0.3) {
            Some(format!("a_{}", self.rng.gen_range(0..1000)))
        } else {
            None
        };
        let edge = if self.rng.gen_bool(0.8) {
            Edge::Posedge
        } else {
            Edge::Negedge
        };
        let disable_iff = if self.rng.gen_bool(0.25) {
            Some(self.expr(2))
        } else {
            None
        };
        SvaAst {
            label,
            clocking: Clocking {
                edge,
                clock: self.ident(),
            },
            disable_iff,
            body: self.property(3),
        }
    }

    fn ident(&mut self) -> String {
        IDENT_POOL[self.rng.gen_range(0..IDENT_POOL.len())].to_string()
    }

    fn property(&mut self, depth: u32) -> PropertyExpr {
        if depth == 0 {
            return PropertyExpr::Seq(self.sequence(0));
        }
        match self.rng.gen_range(0..10) {
            0..=3 => PropertyExpr::Seq(self.sequence(depth)),
            4..=6 => PropertyExpr::Implication {
                antecedent: self.sequence(depth - 1),
                overlapping: self.rng.gen_bool(0.5),
                consequent: Box::new(self.property(depth - 1)),
            },
            7 => PropertyExpr::Not(Box::new(self.property(depth - 1))),
            8 => PropertyExpr::And(
                Box::new(self.property(depth - 1)),
                Box::new(self.property(depth - 1)),
            ),
            _ => PropertyExpr::Or(
                Box::new(self.property(depth - 1)),
                Box::new(self.property(depth - 1)),
            ),
        }
    }

    fn sequence(&mut self, depth: u32) -> Sequence {
        let n_terms = if depth == 0 {
            1
        } else {
            self.rng.gen_range(1..=3)
        };
        let mut terms = Vec::with_capacity(n_terms);
        let mut delays = Vec::with_capacity(n_terms.saturating_sub(1));
        for i in 0..n_terms {
            let repeat = if self.rng.gen_bool(0.15) {
                Some(self.rng.gen_range(1..=3))
            } else {
                None
            };
            terms.push(SeqTerm {
                expr: self.expr(2),
                repeat,
            });
            if i + 1 < n_terms {
                let lo = self.rng.gen_range(0..=3u32);
                let hi = if self.rng.gen_bool(0.3) {
                    Some(lo + self.rng.gen_range(0..=2u32))
                } else {
                    None
                };
                delays.push(Delay { lo, hi });
            }
        }
        Sequence { terms, delays }
    }

    fn expr(&mut self, depth: u32) -> Expr {
        if depth == 0 {
            return self.atom();
        }
        match self.rng.gen_range(0..12) {
            0..=3 => self.atom(),
            4 => {
                let op = if self.rng.gen_bool(0.7) {
                    UnaryOp::LogicalNot
                } else {
                    UnaryOp::BitNot
                };
                Expr::Unary(op, Box::new(self.expr(depth - 1)))
            }
            5..=9 => {
                let ops = [
                    BinaryOp::LogicalOr,
                    BinaryOp::LogicalAnd,
                    BinaryOp::BitOr,
                    BinaryOp::BitXor,
                    BinaryOp::BitAnd,
                    BinaryOp::Eq,
                    BinaryOp::Ne,
                    BinaryOp::Lt,
                    BinaryOp::Le,
                    BinaryOp::Gt,
                    BinaryOp::Ge,
                ];
                let op = ops[self.rng.gen_range(0..ops.len())];
                Expr::Binary(
                    op,
                    Box::new(self.expr(depth - 1)),
                    Box::new(self.expr(depth - 1)),
                )
            }
            10 => {
                let index = self.rng.gen_range(0..16u32);
                if self.rng.gen_bool(0.5) {
                    Expr::BitSelect {
                        base: Box::new(Expr::Ident(self.ident())),
                        index,
                    }
                } else {
                    let lsb = self.rng.gen_range(0..8u32);
                    Expr::PartSelect {
                        base: Box::new(Expr::Ident(self.ident())),
                        msb: lsb + self.rng.gen_range(0..8u32),
                        lsb,
                    }
                }
            }
            _ => Expr::SysFunc(self.sysfunc(depth)),
        }
    }

    fn sysfunc(&mut self, depth: u32) -> SysFunc {
        let arg = Box::new(self.expr(depth - 1));
        match self.rng.gen_range(0..7) {
            0 => SysFunc::Past {
                expr: arg,
                depth: self.rng.gen_range(1..=4),
            },
            1 => SysFunc::Rose(arg),
            2 => SysFunc::Fell(arg),
            3 => SysFunc::Stable(arg),
            4 => SysFunc::Bits(arg),
            5 => SysFunc::Onehot(arg),
            _ => SysFunc::Onehot0(arg),
        }
    }

    fn atom(&mut self) -> Expr {
        if self.rng.gen_bool(0.7) {
            Expr::Ident(self.ident())
        } else {
            let base = match self.rng.gen_range(0..4) {
                0 => LiteralBase::Binary,
                1 => LiteralBase::Octal,
                2 => LiteralBase::Decimal,
                _ => LiteralBase::Hex,
            };
            let width = if self.rng.gen_bool(0.6) {
                Some(self.rng.gen_range(1..=32u32))
            } else {
                None
            };
            let max = width.map(|w| 1u64 << w.min(63)).unwrap_or(1 << 16);
            Expr::Literal(Literal {
                value: self.rng.gen_range(0..max),
                width,
                base,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sva::{parse_sva, pretty_print};

    #[test]
    fn generated_asts_round_trip() {
        let mut gen = AstGenerator::new(7);
        for i in 0..200 {
            let ast = gen.assertion();
            let printed = pretty_print(&ast);
            let reparsed = parse_sva(&printed)
                .unwrap_or_else(|e| panic!("case {i}: {printed}\n{e}"));
            assert_eq!(ast, reparsed, "case {i}: {printed}");
        }
    }
}
