//! Waveform loading and clocked assertion evaluation.
//!
//! `parse_vcd` reads a value-change dump into per-signal timelines,
//! `evaluate` runs an assertion against the trace at its own clocking event,
//! and `check_width` decides `$bits(sig) == N` assertions statically from a
//! declaration table.

mod eval;
mod value;
mod vcd;

pub use eval::{check_width, evaluate, sample, EvalError, FirstFailure, Outcome, Verdict};
pub use value::{Bit, Tri, Value};
pub use vcd::{parse_vcd, SignalTimeline, Trace, VcdError};

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::sva::parse_sva;
    use crate::verilog_decl::parse_declarations;

    /// Build a trace with a clock (period 10, posedges at 5, 15, 25, ...) and
    /// per-sample signal values applied just before each edge.
    fn make_trace(signals: &[(&str, u32, Vec<u64>)]) -> Trace {
        let n = signals.iter().map(|(_, _, v)| v.len()).max().unwrap_or(0);
        let mut map = BTreeMap::new();
        let mut clk = Vec::new();
        for i in 0..n as u64 {
            clk.push((i * 10, Value::from_u64(0, 1)));
            clk.push((i * 10 + 5, Value::from_u64(1, 1)));
        }
        map.insert(
            "clk".to_string(),
            SignalTimeline {
                width: 1,
                changes: clk,
            },
        );
        for (name, width, values) in signals {
            let changes = values
                .iter()
                .enumerate()
                .map(|(i, v)| (i as u64 * 10, Value::from_u64(*v, *width)))
                .collect();
            map.insert(
                name.to_string(),
                SignalTimeline {
                    width: *width,
                    changes,
                },
            );
        }
        Trace::from_timelines(map)
    }

    fn run(src: &str, signals: &[(&str, u32, Vec<u64>)]) -> Verdict {
        let ast = parse_sva(src).unwrap();
        evaluate(&ast, &make_trace(signals)).unwrap()
    }

    #[test]
    fn clock_sampling_ignores_x_transitions() {
        let mut map = BTreeMap::new();
        map.insert(
            "clk".to_string(),
            SignalTimeline {
                width: 1,
                changes: vec![
                    // First change is x -> 1: not an edge.
                    (5, Value::from_u64(1, 1)),
                    (10, Value::from_u64(0, 1)),
                    (15, Value::from_u64(1, 1)),
                ],
            },
        );
        let trace = Trace::from_timelines(map);
        assert_eq!(
            sample(&trace, "clk", crate::sva::ast::Edge::Posedge).unwrap(),
            vec![15]
        );
    }

    #[test]
    fn overlapping_implication() {
        let v = run(
            "assert property (@(posedge clk) a |-> b);",
            &[("a", 1, vec![0, 1, 0, 1]), ("b", 1, vec![0, 1, 0, 1])],
        );
        assert_eq!(v.outcome, Outcome::Pass);
        assert_eq!(v.attempts, 4);

        let v = run(
            "assert property (@(posedge clk) a |-> b);",
            &[("a", 1, vec![0, 1]), ("b", 1, vec![0, 0])],
        );
        assert_eq!(v.outcome, Outcome::Fail);
        assert_eq!(v.first_failure.as_ref().unwrap().sample_index, 1);
    }

    #[test]
    fn vacuous_when_antecedent_never_matches() {
        let v = run(
            "assert property (@(posedge clk) a |-> b);",
            &[("a", 1, vec![0, 0, 0]), ("b", 1, vec![0, 0, 0])],
        );
        assert_eq!(v.outcome, Outcome::VacuousPass);
        assert_eq!(v.attempts, 3);
    }

    #[test]
    fn nonoverlapping_implication_at_trace_end_is_inconclusive() {
        // Antecedent holds on the last sample; the consequent sample does not exist.
        let v = run(
            "assert property (@(posedge clk) a |=> b);",
            &[("a", 1, vec![0, 0, 1]), ("b", 1, vec![0, 0, 0])],
        );
        assert_eq!(v.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn delay_range_consequent() {
        // b arrives two cycles after a rises: ##[1:2] covers it.
        let v = run(
            "assert property (@(posedge clk) a |-> ##[1:2] b);",
            &[("a", 1, vec![1, 0, 0, 0]), ("b", 1, vec![0, 0, 1, 0])],
        );
        assert_eq!(v.outcome, Outcome::Pass);

        let v = run(
            "assert property (@(posedge clk) a |-> ##1 b);",
            &[("a", 1, vec![1, 0, 0, 0]), ("b", 1, vec![0, 0, 1, 0])],
        );
        assert_eq!(v.outcome, Outcome::Fail);
    }

    #[test]
    fn past_needs_history() {
        // $past(a) at sample 0 has no history: that attempt is inconclusive,
        // later attempts decide the verdict.
        let v = run(
            "assert property (@(posedge clk) b |-> $past(a));",
            &[("a", 1, vec![1, 1, 1]), ("b", 1, vec![1, 1, 1])],
        );
        assert_eq!(v.outcome, Outcome::Pass);

        let v = run(
            "assert property (@(posedge clk) b |-> $past(a));",
            &[("a", 1, vec![1, 0, 1]), ("b", 1, vec![0, 0, 1])],
        );
        assert_eq!(v.outcome, Outcome::Fail);
    }

    #[test]
    fn rose_and_stable() {
        let v = run(
            "assert property (@(posedge clk) $rose(a) |-> b);",
            &[("a", 1, vec![0, 1, 1, 0]), ("b", 1, vec![0, 1, 0, 0])],
        );
        assert_eq!(v.outcome, Outcome::Pass);

        let v = run(
            "assert property (@(posedge clk) $stable(d));",
            &[("d", 8, vec![7, 7, 7, 9])],
        );
        assert_eq!(v.outcome, Outcome::Fail);
        // Attempt 0 has no history; the change lands at sample 3.
        assert_eq!(v.first_failure.as_ref().unwrap().sample_index, 3);
    }

    #[test]
    fn disable_iff_cancels_attempts() {
        let v = run(
            "assert property (@(posedge clk) disable iff (rst) a |-> b);",
            &[
                ("rst", 1, vec![1, 1, 0, 0]),
                ("a", 1, vec![1, 1, 1, 1]),
                ("b", 1, vec![0, 0, 1, 1]),
            ],
        );
        assert_eq!(v.outcome, Outcome::Pass);
        assert_eq!(v.attempts, 2);
    }

    #[test]
    fn repetition() {
        let v = run(
            "assert property (@(posedge clk) $rose(a) |-> b [*2]);",
            &[("a", 1, vec![0, 1, 1, 1]), ("b", 1, vec![0, 1, 1, 0])],
        );
        assert_eq!(v.outcome, Outcome::Pass);

        let v = run(
            "assert property (@(posedge clk) $rose(a) |-> b [*3]);",
            &[("a", 1, vec![0, 1, 1, 1]), ("b", 1, vec![0, 1, 1, 0])],
        );
        assert_eq!(v.outcome, Outcome::Fail);
    }

    #[test]
    fn property_not_and_or() {
        let v = run(
            "assert property (@(posedge clk) not (a && b));",
            &[("a", 1, vec![1, 1]), ("b", 1, vec![0, 0])],
        );
        assert_eq!(v.outcome, Outcome::Pass);

        let v = run(
            "assert property (@(posedge clk) (a |-> b) and (b |-> a));",
            &[("a", 1, vec![0, 1, 0]), ("b", 1, vec![0, 1, 0])],
        );
        assert_eq!(v.outcome, Outcome::Pass);
    }

    #[test]
    fn vector_compare_and_selects() {
        let v = run(
            "assert property (@(posedge clk) d == 8'h2a |-> d[5]);",
            &[("d", 8, vec![0, 42, 0])],
        );
        assert_eq!(v.outcome, Outcome::Pass);

        let v = run(
            "assert property (@(posedge clk) d[3:0] == 4'hf |-> d[7:4] == 4'h0);",
            &[("d", 8, vec![0x0f, 0x1f])],
        );
        assert_eq!(v.outcome, Outcome::Fail);
    }

    #[test]
    fn unknown_signal_is_an_error() {
        let ast = parse_sva("assert property (@(posedge clk) ghost |-> b);").unwrap();
        let trace = make_trace(&[("b", 1, vec![0])]);
        assert!(matches!(
            evaluate(&ast, &trace),
            Err(EvalError::UnknownSignal(name)) if name == "ghost"
        ));
    }

    #[test]
    fn x_values_make_attempts_inconclusive() {
        let mut map = BTreeMap::new();
        map.insert(
            "clk".to_string(),
            SignalTimeline {
                width: 1,
                changes: vec![(0, Value::from_u64(0, 1)), (5, Value::from_u64(1, 1))],
            },
        );
        map.insert(
            "a".to_string(),
            SignalTimeline {
                width: 1,
                changes: vec![],
            },
        );
        let trace = Trace::from_timelines(map);
        let ast = parse_sva("assert property (@(posedge clk) a == 1'b1);").unwrap();
        // `a` never dumps a value, so it samples as x.
        assert_eq!(
            evaluate(&ast, &trace).unwrap().outcome,
            Outcome::Inconclusive
        );
    }

    #[test]
    fn width_check_against_declarations() {
        let decls = parse_declarations(
            "module m (input wire [7:0] d, input wire c); endmodule",
        )
        .unwrap();
        let good = parse_sva("assert property (@(posedge c) $bits(d) == 8);").unwrap();
        assert_eq!(check_width(&good, &decls).unwrap().outcome, Outcome::Pass);

        let bad = parse_sva("assert property (@(posedge c) $bits(d) == 16);").unwrap();
        let v = check_width(&bad, &decls).unwrap();
        assert_eq!(v.outcome, Outcome::Fail);
        assert!(v.first_failure.unwrap().detail.contains("8 bits"));

        let shape = parse_sva("assert property (@(posedge c) d == 8'h00);").unwrap();
        assert!(matches!(
            check_width(&shape, &decls),
            Err(EvalError::NotAWidthAssertion(_))
        ));

        let missing = parse_sva("assert property (@(posedge c) $bits(q) == 8);").unwrap();
        assert!(matches!(
            check_width(&missing, &decls),
            Err(EvalError::UndeclaredSignal(_))
        ));
    }
}
