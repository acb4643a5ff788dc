//! Clocked evaluation of assertions against a waveform trace.
//!
//! One evaluation attempt starts at every clock sample. Sampled values are
//! taken at the edge time, after same-time changes apply. Three-valued logic
//! propagates x/z through boolean operators; an attempt whose obligation
//! cannot be decided (unknown values, missing history, or a match extending
//! past the end of the trace) is inconclusive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sva::ast::*;
use crate::verilog_decl::DeclarationTable;

use super::value::{Bit, Tri, Value};
use super::vcd::Trace;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("signal `{0}` does not appear in the trace")]
    UnknownSignal(String),
    #[error("clock `{0}` is not a scalar signal")]
    ClockNotScalar(String),
    #[error("not a width-check assertion: {0}")]
    NotAWidthAssertion(String),
    #[error("signal `{0}` is not declared")]
    UndeclaredSignal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    VacuousPass,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstFailure {
    pub sample_index: usize,
    pub time: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Evaluation attempts that were not cancelled by `disable iff`.
    pub attempts: usize,
    pub first_failure: Option<FirstFailure>,
}

/// Clock sample times for `clock` in `trace`: 0->1 transitions for posedge,
/// 1->0 for negedge. Transitions involving x/z are not edges.
pub fn sample(trace: &Trace, clock: &str, edge: Edge) -> Result<Vec<u64>, EvalError> {
    let tl = trace
        .timeline(clock)
        .ok_or_else(|| EvalError::UnknownSignal(clock.to_string()))?;
    if tl.width != 1 {
        return Err(EvalError::ClockNotScalar(clock.to_string()));
    }
    let (from, to) = match edge {
        Edge::Posedge => (Bit::Zero, Bit::One),
        Edge::Negedge => (Bit::One, Bit::Zero),
    };
    let mut prev = Bit::X;
    let mut edges = Vec::new();
    for (t, v) in &tl.changes {
        let cur = v.lsb();
        if prev == from && cur == to {
            edges.push(*t);
        }
        prev = cur;
    }
    Ok(edges)
}

/// Evaluate `ast` against `trace` using the assertion's own clocking event.
pub fn evaluate(ast: &SvaAst, trace: &Trace) -> Result<Verdict, EvalError> {
    for name in crate::sva::scan_identifiers(ast) {
        if trace.timeline(&name).is_none() {
            return Err(EvalError::UnknownSignal(name));
        }
    }
    let samples = sample(trace, &ast.clocking.clock, ast.clocking.edge)?;
    let ctx = Ctx {
        trace,
        samples: &samples,
    };
    let horizon = prop_horizon(&ast.body) as usize;

    let mut attempts = 0usize;
    let mut first_failure = None;
    let mut any_pass = false;
    let mut any_inconclusive = false;
    'attempt: for i in 0..samples.len() {
        if let Some(cond) = &ast.disable_iff {
            // Cancelled if the disable condition is definitely true anywhere
            // in the attempt's evaluation window.
            let end = (i + horizon).min(samples.len().saturating_sub(1));
            for j in i..=end {
                let v = ctx.eval_expr(cond, j);
                if matches!(v, Ok(ref v) if v.truth() == Tri::True) {
                    continue 'attempt;
                }
            }
        }
        attempts += 1;
        let res = ctx.eval_prop(&ast.body, i);
        match res.outcome {
            PropOutcome::Fails => {
                if first_failure.is_none() {
                    first_failure = Some(FirstFailure {
                        sample_index: i,
                        time: samples[i],
                        detail: format!(
                            "attempt starting at sample {i} (time {}) failed",
                            samples[i]
                        ),
                    });
                }
            }
            PropOutcome::Unknown => any_inconclusive = true,
            PropOutcome::Holds => {
                if res.nonvacuous {
                    any_pass = true;
                }
            }
        }
    }

    let outcome = if first_failure.is_some() {
        Outcome::Fail
    } else if any_pass {
        Outcome::Pass
    } else if any_inconclusive {
        Outcome::Inconclusive
    } else {
        Outcome::VacuousPass
    };
    Ok(Verdict {
        outcome,
        attempts,
        first_failure,
    })
}

/// Statically check a `$bits(sig) == N` assertion against declarations.
pub fn check_width(ast: &SvaAst, decls: &DeclarationTable) -> Result<Verdict, EvalError> {
    let shape_err = || {
        EvalError::NotAWidthAssertion(
            "expected a bare `$bits(signal) == <literal>` body".to_string(),
        )
    };
    let PropertyExpr::Seq(seq) = &ast.body else {
        return Err(shape_err());
    };
    let expr = seq.as_boolean().ok_or_else(shape_err)?;
    let Expr::Binary(BinaryOp::Eq, lhs, rhs) = expr else {
        return Err(shape_err());
    };
    let (name, expected) = match (lhs.as_ref(), rhs.as_ref()) {
        (Expr::SysFunc(SysFunc::Bits(arg)), Expr::Literal(lit))
        | (Expr::Literal(lit), Expr::SysFunc(SysFunc::Bits(arg))) => match arg.as_ref() {
            Expr::Ident(name) => (name, lit.value),
            _ => return Err(shape_err()),
        },
        _ => return Err(shape_err()),
    };
    let decl = decls
        .lookup(name)
        .ok_or_else(|| EvalError::UndeclaredSignal(name.clone()))?;
    let actual = u64::from(decl.width_bits);
    let first_failure = (actual != expected).then(|| FirstFailure {
        sample_index: 0,
        time: 0,
        detail: format!("`{name}` is declared {actual} bits wide, assertion expects {expected}"),
    });
    Ok(Verdict {
        outcome: if first_failure.is_none() {
            Outcome::Pass
        } else {
            Outcome::Fail
        },
        attempts: 1,
        first_failure,
    })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PropOutcome {
    Holds,
    Fails,
    Unknown,
}

#[derive(Debug, Clone, Copy)]
struct PropEval {
    outcome: PropOutcome,
    /// True when holding is backed by an actual match (not vacuous).
    nonvacuous: bool,
}

/// Missing history for `$past`-family functions near the start of the trace.
struct Gap;

struct Ctx<'a> {
    trace: &'a Trace,
    samples: &'a [u64],
}

impl Ctx<'_> {
    fn last(&self) -> usize {
        self.samples.len() - 1
    }

    fn sampled(&self, name: &str, i: usize) -> Value {
        self.trace
            .timeline(name)
            .expect("identifiers pre-checked")
            .value_at(self.samples[i])
    }

    fn eval_expr(&self, expr: &Expr, i: usize) -> Result<Value, Gap> {
        Ok(match expr {
            Expr::Ident(name) => self.sampled(name, i),
            Expr::Literal(lit) => Value::from_u64(lit.value, lit.width.unwrap_or(32)),
            Expr::Unary(op, inner) => {
                let v = self.eval_expr(inner, i)?;
                match op {
                    UnaryOp::LogicalNot => tri_value(v.truth().not()),
                    UnaryOp::BitNot => v.bit_not(),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = self.eval_expr(a, i)?;
                let b = self.eval_expr(b, i)?;
                match op {
                    BinaryOp::LogicalAnd => tri_value(a.truth().and(b.truth())),
                    BinaryOp::LogicalOr => tri_value(a.truth().or(b.truth())),
                    BinaryOp::BitAnd => a.bit_and(&b),
                    BinaryOp::BitOr => a.bit_or(&b),
                    BinaryOp::BitXor => a.bit_xor(&b),
                    BinaryOp::Eq => tri_value(a.logic_equal(&b)),
                    BinaryOp::Ne => tri_value(a.logic_equal(&b).not()),
                    BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                        match (a.to_u64(), b.to_u64()) {
                            (Some(x), Some(y)) => tri_value(Tri::from_bool(match op {
                                BinaryOp::Lt => x < y,
                                BinaryOp::Le => x <= y,
                                BinaryOp::Gt => x > y,
                                _ => x >= y,
                            })),
                            _ => tri_value(Tri::Unknown),
                        }
                    }
                }
            }
            Expr::BitSelect { base, index } => {
                let v = self.eval_expr(base, i)?;
                Value::new(vec![v.bit(*index)])
            }
            Expr::PartSelect { base, msb, lsb } => {
                let v = self.eval_expr(base, i)?;
                v.slice(*msb, *lsb)
            }
            Expr::SysFunc(f) => self.eval_sysfunc(f, i)?,
        })
    }

    fn eval_sysfunc(&self, f: &SysFunc, i: usize) -> Result<Value, Gap> {
        Ok(match f {
            SysFunc::Past { expr, depth } => {
                let d = *depth as usize;
                if i < d {
                    return Err(Gap);
                }
                self.eval_expr(expr, i - d)?
            }
            SysFunc::Rose(arg) | SysFunc::Fell(arg) => {
                if i == 0 {
                    return Err(Gap);
                }
                let prev = self.eval_expr(arg, i - 1)?.lsb();
                let cur = self.eval_expr(arg, i)?.lsb();
                if !prev.is_known() || !cur.is_known() {
                    tri_value(Tri::Unknown)
                } else {
                    let (from, to) = if matches!(f, SysFunc::Rose(_)) {
                        (Bit::Zero, Bit::One)
                    } else {
                        (Bit::One, Bit::Zero)
                    };
                    tri_value(Tri::from_bool(prev == from && cur == to))
                }
            }
            SysFunc::Stable(arg) => {
                if i == 0 {
                    return Err(Gap);
                }
                let prev = self.eval_expr(arg, i - 1)?;
                let cur = self.eval_expr(arg, i)?;
                // Sampled-value comparison: x is stable against x.
                tri_value(Tri::from_bool(cur.case_equal(&prev)))
            }
            SysFunc::Bits(arg) => Value::from_u64(u64::from(self.expr_width(arg)), 32),
            SysFunc::Onehot(arg) | SysFunc::Onehot0(arg) => {
                let v = self.eval_expr(arg, i)?;
                match v.count_ones() {
                    None => tri_value(Tri::Unknown),
                    Some(n) => {
                        let ok = if matches!(f, SysFunc::Onehot(_)) {
                            n == 1
                        } else {
                            n <= 1
                        };
                        tri_value(Tri::from_bool(ok))
                    }
                }
            }
        })
    }

    fn expr_width(&self, expr: &Expr) -> u32 {
        match expr {
            Expr::Ident(name) => self
                .trace
                .timeline(name)
                .map(|tl| tl.width)
                .unwrap_or(1),
            Expr::Literal(lit) => lit.width.unwrap_or(32),
            Expr::Unary(UnaryOp::LogicalNot, _) => 1,
            Expr::Unary(UnaryOp::BitNot, inner) => self.expr_width(inner),
            Expr::Binary(op, a, b) => match op {
                BinaryOp::BitAnd | BinaryOp::BitOr | BinaryOp::BitXor => {
                    self.expr_width(a).max(self.expr_width(b))
                }
                _ => 1,
            },
            Expr::BitSelect { .. } => 1,
            Expr::PartSelect { msb, lsb, .. } => msb - lsb + 1,
            Expr::SysFunc(SysFunc::Past { expr, .. }) => self.expr_width(expr),
            Expr::SysFunc(SysFunc::Bits(_)) => 32,
            Expr::SysFunc(_) => 1,
        }
    }

    fn expr_truth(&self, expr: &Expr, i: usize) -> Tri {
        match self.eval_expr(expr, i) {
            Ok(v) => v.truth(),
            Err(Gap) => Tri::Unknown,
        }
    }

    /// All possible match endpoints of `seq` starting at sample `i`.
    /// `beyond` reports candidate matches running past the end of the trace.
    fn match_seq(&self, seq: &Sequence, i: usize) -> SeqMatches {
        let mut out = SeqMatches {
            ends: Vec::new(),
            beyond: false,
        };
        if i > self.last() {
            out.beyond = true;
            return out;
        }
        self.match_from(seq, 0, i, Tri::True, &mut out);
        out
    }

    fn match_from(&self, seq: &Sequence, term_idx: usize, start: usize, acc: Tri, out: &mut SeqMatches) {
        let term = &seq.terms[term_idx];
        let reps = term.repeat.unwrap_or(1) as usize;
        let end = start + reps - 1;
        if end > self.last() {
            out.beyond = true;
            return;
        }
        let mut acc = acc;
        for j in start..=end {
            acc = acc.and(self.expr_truth(&term.expr, j));
            if acc == Tri::False {
                return;
            }
        }
        if term_idx + 1 == seq.terms.len() {
            out.ends.push((end, acc));
            return;
        }
        let (lo, hi) = seq.delays[term_idx].bounds();
        for k in lo..=hi {
            let next = end + k as usize;
            if next > self.last() {
                out.beyond = true;
            } else {
                self.match_from(seq, term_idx + 1, next, acc, out);
            }
        }
    }

    fn eval_prop(&self, prop: &PropertyExpr, i: usize) -> PropEval {
        match prop {
            PropertyExpr::Seq(seq) => {
                let m = self.match_seq(seq, i);
                if m.ends.iter().any(|(_, t)| *t == Tri::True) {
                    PropEval {
                        outcome: PropOutcome::Holds,
                        nonvacuous: true,
                    }
                } else if m.beyond || m.ends.iter().any(|(_, t)| *t == Tri::Unknown) {
                    PropEval {
                        outcome: PropOutcome::Unknown,
                        nonvacuous: false,
                    }
                } else {
                    PropEval {
                        outcome: PropOutcome::Fails,
                        nonvacuous: false,
                    }
                }
            }
            PropertyExpr::Implication {
                antecedent,
                overlapping,
                consequent,
            } => {
                let ant = self.match_seq(antecedent, i);
                let mut unknown = ant.beyond;
                let mut failed = false;
                let mut evidence = false;
                for (end, tri) in &ant.ends {
                    if *tri == Tri::False {
                        continue;
                    }
                    let start = if *overlapping { *end } else { *end + 1 };
                    if start > self.last() {
                        unknown = true;
                        continue;
                    }
                    let c = self.eval_prop(consequent, start);
                    match (*tri, c.outcome) {
                        (Tri::True, PropOutcome::Fails) => failed = true,
                        (Tri::True, PropOutcome::Holds) => evidence = true,
                        (Tri::True, PropOutcome::Unknown) => unknown = true,
                        // Antecedent match itself uncertain: a failure or an
                        // undecided consequent leaves the attempt open.
                        (Tri::Unknown, PropOutcome::Fails | PropOutcome::Unknown) => {
                            unknown = true
                        }
                        (Tri::Unknown, PropOutcome::Holds) => {}
                        (Tri::False, _) => unreachable!(),
                    }
                }
                let outcome = if failed {
                    PropOutcome::Fails
                } else if unknown {
                    PropOutcome::Unknown
                } else {
                    PropOutcome::Holds
                };
                PropEval {
                    outcome,
                    nonvacuous: evidence && outcome == PropOutcome::Holds,
                }
            }
            PropertyExpr::Not(inner) => {
                let e = self.eval_prop(inner, i);
                let outcome = match e.outcome {
                    PropOutcome::Holds => PropOutcome::Fails,
                    PropOutcome::Fails => PropOutcome::Holds,
                    PropOutcome::Unknown => PropOutcome::Unknown,
                };
                PropEval {
                    outcome,
                    nonvacuous: outcome == PropOutcome::Holds,
                }
            }
            PropertyExpr::And(a, b) => {
                let ea = self.eval_prop(a, i);
                let eb = self.eval_prop(b, i);
                let outcome = match (ea.outcome, eb.outcome) {
                    (PropOutcome::Fails, _) | (_, PropOutcome::Fails) => PropOutcome::Fails,
                    (PropOutcome::Holds, PropOutcome::Holds) => PropOutcome::Holds,
                    _ => PropOutcome::Unknown,
                };
                PropEval {
                    outcome,
                    nonvacuous: outcome == PropOutcome::Holds && (ea.nonvacuous || eb.nonvacuous),
                }
            }
            PropertyExpr::Or(a, b) => {
                let ea = self.eval_prop(a, i);
                let eb = self.eval_prop(b, i);
                let outcome = match (ea.outcome, eb.outcome) {
                    (PropOutcome::Holds, _) | (_, PropOutcome::Holds) => PropOutcome::Holds,
                    (PropOutcome::Fails, PropOutcome::Fails) => PropOutcome::Fails,
                    _ => PropOutcome::Unknown,
                };
                let nonvacuous = (ea.outcome == PropOutcome::Holds && ea.nonvacuous)
                    || (eb.outcome == PropOutcome::Holds && eb.nonvacuous);
                PropEval {
                    outcome,
                    nonvacuous,
                }
            }
        }
    }
}

struct SeqMatches {
    ends: Vec<(usize, Tri)>,
    beyond: bool,
}

fn tri_value(t: Tri) -> Value {
    Value::new(vec![match t {
        Tri::True => Bit::One,
        Tri::False => Bit::Zero,
        Tri::Unknown => Bit::X,
    }])
}

/// Number of samples past the attempt start the property can inspect.
fn prop_horizon(prop: &PropertyExpr) -> u32 {
    match prop {
        PropertyExpr::Seq(seq) => seq_horizon(seq),
        PropertyExpr::Implication {
            antecedent,
            overlapping,
            consequent,
        } => {
            seq_horizon(antecedent) + u32::from(!overlapping) + prop_horizon(consequent)
        }
        PropertyExpr::Not(inner) => prop_horizon(inner),
        PropertyExpr::And(a, b) | PropertyExpr::Or(a, b) => {
            prop_horizon(a).max(prop_horizon(b))
        }
    }
}

fn seq_horizon(seq: &Sequence) -> u32 {
    let reps: u32 = seq
        .terms
        .iter()
        .map(|t| t.repeat.unwrap_or(1) - 1)
        .sum();
    let delays: u32 = seq.delays.iter().map(|d| d.bounds().1).sum();
    reps + delays
}
