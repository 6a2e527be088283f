mod common;

use common::exprs::small_expressions;
use common::oracle::{self, Tri};
use proptest::prelude::*;
use svagen::semantics::{
    check_assertion, eval_boolean, eval_property, eval_sequence_function, equivalent, CheckOptions,
    EndOfTrace, EquivOptions, Equivalence, Trace, Truth, VerdictStatus,
};
use svagen::sva::{parse_assertion, parse_expression, SampledFunction, SignalTable};

fn to_trace(t: &oracle::OTrace) -> Trace {
    let cols: Vec<(&str, u32, Vec<u64>)> = t
        .names
        .iter()
        .zip(&t.widths)
        .zip(&t.cols)
        .map(|((n, w), c)| (n.as_str(), *w, c.clone()))
        .collect();
    Trace::from_columns(&cols).unwrap()
}

fn tri(t: Truth) -> Tri {
    match t {
        Truth::Holds => Tri::T,
        Truth::Fails => Tri::F,
        Truth::Pending => Tri::U,
    }
}

fn ff() -> &'static str {
    "assert property (@(posedge clk) disable iff (rst) (en |=> (out == $past(in))));"
}

#[test]
fn spec_boolean_examples() {
    let t = Trace::from_columns(&[("a", 1, vec![1]), ("b", 1, vec![0])]).unwrap();
    assert_eq!(eval_boolean(&parse_expression("a && b").unwrap(), &t, 0).unwrap(), 0);
    let t = Trace::from_columns(&[("req", 1, vec![0]), ("grant", 1, vec![1])]).unwrap();
    assert_eq!(eval_boolean(&parse_expression("req || grant").unwrap(), &t, 0).unwrap(), 1);
    let t = Trace::from_columns(&[("x", 2, vec![2])]).unwrap();
    assert_eq!(eval_boolean(&parse_expression("x == 2").unwrap(), &t, 0).unwrap(), 1);
}

#[test]
fn spec_sampled_function_examples() {
    assert_eq!(eval_sequence_function(SampledFunction::Rose, &[0, 1], 1), 1);
    assert_eq!(eval_sequence_function(SampledFunction::Past(1), &[1], 0), 0);
    assert_eq!(eval_sequence_function(SampledFunction::Onehot0, &[0], 0), 1);
    assert_eq!(eval_sequence_function(SampledFunction::Onehot0, &[6], 0), 0);
}

#[test]
fn spec_property_examples() {
    let t = Trace::from_columns(&[("a", 1, vec![1, 0]), ("b", 1, vec![0, 1])]).unwrap();
    let p = |s: &str| eval_property(&parse_expression(s).unwrap(), &t, 0).unwrap().truth;
    assert_eq!(p("a |-> b"), Truth::Fails);
    assert_eq!(p("a |=> b"), Truth::Holds);
    assert_eq!(p("a |-> a"), Truth::Holds);
    let t = Trace::from_columns(&[("pulse", 1, vec![1, 0])]).unwrap();
    let e = parse_expression("s_eventually (!pulse)").unwrap();
    assert_eq!(eval_property(&e, &t, 0).unwrap().truth, Truth::Holds);
}

#[test]
fn spec_check_assertion_examples() {
    let ast = parse_assertion(ff()).unwrap();
    let cols = |rst: Vec<u64>, out: Vec<u64>| {
        Trace::from_columns(&[
            ("rst", 1, rst),
            ("en", 1, vec![1, 0]),
            ("in", 1, vec![1, 0]),
            ("out", 1, out),
        ])
        .unwrap()
    };
    let opts = CheckOptions::default();
    let v = check_assertion(&ast, &cols(vec![1, 1], vec![1, 1]), opts).unwrap();
    assert_eq!(v.status, VerdictStatus::VacuousHolds);
    let v = check_assertion(&ast, &cols(vec![0, 0], vec![0, 1]), opts).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
    let v = check_assertion(&ast, &cols(vec![0, 0], vec![0, 0]), opts).unwrap();
    assert_eq!(v.status, VerdictStatus::Fails);
    assert_eq!(v.first_failure, Some(0));
}

#[test]
fn unknown_signal_is_reported() {
    let ast = parse_assertion("assert property (@(posedge clk) a |-> zz);").unwrap();
    let t = Trace::from_columns(&[("a", 1, vec![1])]).unwrap();
    assert!(check_assertion(&ast, &t, CheckOptions::default()).is_err());
}

#[test]
fn oracle_agrees_on_a_sample() {
    // The exhaustive sweep lives in the acceptance target; this is a quick
    // smoke run over every expression and traces of length 3.
    let exprs = small_expressions();
    assert!(exprs.len() > 1000, "generator produced {}", exprs.len());
    let traces = oracle::all_traces(&["a", "b", "c"], &[1, 1, 1], 3);
    for e in exprs.iter().step_by(7) {
        for ot in traces.iter().step_by(37) {
            let t = to_trace(ot);
            for cycle in 0..t.len() {
                let got = tri(eval_property(e, &t, cycle).unwrap().truth);
                assert_eq!(got, oracle::prop(e, ot, cycle), "{e:?} at {cycle}\n{}", t.to_table());
            }
        }
    }
}

#[test]
fn oracle_brute_force_equivalence_matches_counterexample() {
    // Independent enumeration with the reference evaluator: the first trace in
    // lexicographic order where `a |-> b` and `a |=> b` resolve differently.
    let g = parse_expression("a |-> b").unwrap();
    let c = parse_expression("a |=> b").unwrap();
    let mut first = None;
    'outer: for len in 1..=5 {
        for ot in oracle::all_traces(&["a", "b"], &[1, 1], len) {
            for t in 0..len {
                let (x, y) = (oracle::prop(&g, &ot, t), oracle::prop(&c, &ot, t));
                if x != Tri::U && y != Tri::U && x != y {
                    first = Some((ot.cols.clone(), t));
                    break 'outer;
                }
            }
        }
    }
    let (cols, cycle) = first.unwrap();
    assert_eq!(cols, vec![vec![1, 0], vec![0, 1]]);
    assert_eq!(cycle, 0);

    let table = SignalTable::from_widths([("clk", 1), ("a", 1), ("b", 1)]).unwrap();
    let ga = parse_assertion("assert property (@(posedge clk) a |-> b);").unwrap();
    let ca = parse_assertion("assert property (@(posedge clk) a |=> b);").unwrap();
    let Equivalence::Inequivalent(cx) = equivalent(&ga, &ca, &table, EquivOptions::default()).unwrap() else {
        panic!("expected counterexample");
    };
    assert_eq!(cx.cycle, cycle);
    assert_eq!(cx.trace.value_of("a", 0), Some(1));
    assert_eq!(cx.trace.value_of("a", 1), Some(0));
    assert_eq!(cx.trace.value_of("b", 0), Some(0));
    assert_eq!(cx.trace.value_of("b", 1), Some(1));
}

#[test]
fn ff_variant_is_distinguishable() {
    let table = SignalTable::from_widths([("clk", 1), ("rst", 1), ("en", 1), ("in", 2), ("out", 1)]).unwrap();
    let g = parse_assertion(ff()).unwrap();
    let c = parse_assertion(
        "assert property (@(posedge clk) disable iff (rst) (en == 1'b1 |=> out == in[1]));",
    )
    .unwrap();
    let r = equivalent(&g, &c, &table, EquivOptions::default()).unwrap();
    assert!(matches!(r, Equivalence::Inequivalent(_)), "{r:?}");
}

#[test]
fn differing_disables_use_full_attempts() {
    let table = SignalTable::from_widths([("clk", 1), ("rst", 1), ("a", 1), ("b", 1)]).unwrap();
    let g = parse_assertion("assert property (@(posedge clk) disable iff (rst) a |-> b);").unwrap();
    let c = parse_assertion("assert property (@(posedge clk) a |-> b);").unwrap();
    let r = equivalent(&g, &c, &table, EquivOptions::default()).unwrap();
    let Equivalence::Inequivalent(cx) = r else { panic!() };
    assert_eq!(cx.trace.value_of("rst", cx.cycle), Some(1));
}

fn pool() -> Vec<&'static str> {
    vec![
        "a |-> b",
        "a |=> b",
        "a |-> ##1 b",
        "(a ##1 1) |-> b",
        "$rose(a) |-> b",
        "a |-> $past(b)",
        "$stable(a) |=> b",
        "s_eventually b",
        "a ##2 b",
        "a && b",
        "$onehot0(a) |-> s_eventually b",
        "$fell(a) |=> !b",
    ]
}

fn arb_trace() -> impl Strategy<Value = Trace> {
    (1usize..6).prop_flat_map(|len| {
        proptest::collection::vec((0u64..2, 0u64..2), len).prop_map(|rows| {
            let a = rows.iter().map(|r| r.0).collect();
            let b = rows.iter().map(|r| r.1).collect();
            Trace::from_columns(&[("a", 1, a), ("b", 1, b)]).unwrap()
        })
    })
}

fn assertion(body: &str) -> svagen::sva::SvaAst {
    parse_assertion(&format!("assert property (@(posedge clk) {body});")).unwrap()
}

proptest! {
    #[test]
    fn stable_is_past_equality(trace in arb_trace(), w in 0usize..8) {
        let s = parse_expression("$stable(a)").unwrap();
        let d = parse_expression("$past(a, 1) == a").unwrap();
        let t = w % trace.len();
        prop_assume!(t >= 1);
        prop_assert_eq!(eval_boolean(&s, &trace, t).unwrap(), eval_boolean(&d, &trace, t).unwrap());
    }

    #[test]
    fn refutation_is_monotone(trace in arb_trace(), i in 0usize..12, extra in proptest::collection::vec((0u64..2, 0u64..2), 1..4)) {
        let ast = assertion(pool()[i]);
        for mode in [EndOfTrace::Weak, EndOfTrace::Strict] {
            let before = check_assertion(&ast, &trace, CheckOptions { mode }).unwrap();
            if mode == EndOfTrace::Strict || before.status != VerdictStatus::Fails {
                continue;
            }
            let mut longer = trace.clone();
            for (a, b) in &extra {
                longer.push_row(&[*a, *b]).unwrap();
            }
            let after = check_assertion(&ast, &longer, CheckOptions { mode }).unwrap();
            prop_assert_eq!(after.status, VerdictStatus::Fails);
            prop_assert!(after.first_failure <= before.first_failure);
        }
    }

    #[test]
    fn never_matching_antecedent_is_vacuous(len in 1usize..6, b in proptest::collection::vec(0u64..2, 6), i in 0usize..3) {
        let body = ["a |-> b", "a |=> b", "a ##1 b |-> b"][i];
        let trace = Trace::from_columns(&[("a", 1, vec![0; len]), ("b", 1, b[..len].to_vec())]).unwrap();
        let v = check_assertion(&assertion(body), &trace, CheckOptions::default()).unwrap();
        prop_assert_eq!(v.status, VerdictStatus::VacuousHolds);
    }

    #[test]
    fn equivalence_is_reflexive_and_symmetric(i in 0usize..12, j in 0usize..12) {
        let table = SignalTable::from_widths([("clk", 1), ("a", 1), ("b", 1)]).unwrap();
        let (x, y) = (assertion(pool()[i]), assertion(pool()[j]));
        let opts = EquivOptions::default();
        prop_assert!(equivalent(&x, &x, &table, opts).unwrap().is_equivalent());
        prop_assert_eq!(
            equivalent(&x, &y, &table, opts).unwrap().is_equivalent(),
            equivalent(&y, &x, &table, opts).unwrap().is_equivalent()
        );
    }

    #[test]
    fn table_format_round_trips(trace in arb_trace()) {
        prop_assert_eq!(Trace::parse_table(&trace.to_table()).unwrap(), trace);
    }
}
