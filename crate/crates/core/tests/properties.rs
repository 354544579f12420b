//! Property tests for the syntax, semantics, substitution, freshness and
//! arithmetic layers. Random structure comes from the seeded generator in
//! `plaidy_core::oracle`; proptest drives the seeds and shrinks them.

use std::collections::{BTreeMap, BTreeSet};

use plaidy_core::arith::{is_counterexample, linear_close, poly_normalize, sample_counterexample, Verdict};
use plaidy_core::ast::{AssignmentList, BoolExpr, HybridProgram, OdeSystem, RealExpr, RelOp, Variable, VarsOf};
use plaidy_core::eval::{bounded_outputs, eval_bool, eval_real, ode_flow, Budget};
use plaidy_core::fresh::{fresh_in_bool, fresh_program, fresh_variable};
use plaidy_core::oracle::{scope, Gen};
use plaidy_core::subst::{assign_sub, sub_bool, sub_re};
use plaidy_core::syntax::{parse_formula, parse_program, parse_spec, Printer};
use plaidy_core::{env_with, Environment, Sequent};
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn assignment(g: &mut Gen) -> AssignmentList {
    let mut pairs = Vec::new();
    for v in [Variable(0), Variable(1), Variable(2)] {
        if g.rng().gen_bool(0.5) {
            pairs.push((v, g.term(2)));
        }
    }
    AssignmentList::new(pairs).expect("distinct targets")
}

fn subformulas<'a>(f: &'a BoolExpr, out: &mut Vec<&'a BoolExpr>) {
    out.push(f);
    for c in f.children() {
        subformulas(c, out);
    }
}

// Environments and variables

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn lookup_after_update_is_pointwise(
        default in -10.0f64..10.0,
        updates in prop::collection::vec((0u32..6, -100.0f64..100.0), 0..12),
    ) {
        let base = Environment::constant(default);
        let updates: Vec<(Variable, f64)> = updates.into_iter().map(|(i, r)| (Variable(i), r)).collect();
        let e = env_with(&base, &updates);
        for i in 0..8 {
            let v = Variable(i);
            let expected = updates.iter().rev().find(|(w, _)| *w == v).map_or(default, |(_, r)| *r);
            prop_assert_eq!(e.lookup(v), expected);
        }
    }

    #[test]
    fn vars_of_is_monotone(seed in any::<u64>()) {
        let f = Gen::new(seed).any_formula(4);
        let whole = f.vars_of();
        let mut parts = Vec::new();
        subformulas(&f, &mut parts);
        for p in parts {
            prop_assert!(p.vars_of().is_subset(&whole));
        }
    }
}

// Syntax

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn formulas_round_trip(seed in any::<u64>()) {
        let sc = scope();
        let f = Gen::new(seed).any_formula(6);
        let text = Printer::new(&sc).formula(&f);
        prop_assert_eq!(parse_formula(&text, &sc), Ok(f), "{}", text);
    }

    #[test]
    fn programs_round_trip(seed in any::<u64>()) {
        let sc = scope();
        let a = Gen::new(seed).any_program(4);
        let text = Printer::new(&sc).program(&a);
        prop_assert_eq!(parse_program(&text, &sc), Ok(a), "{}", text);
    }
}

const CORPUS: &[&str] = &[
    include_str!("../../../examples/dubins.dl"),
    "var x, y, c; goal g : c > 0 |- [{x' = -y, y' = x & x >= 0}] x^2 + y^2 = c^2;",
    "var x; prog a := {x := x + 1 ++ ?(x > 0)}*; goal g : |- <a> x > 2 <-> exists x. x = 1;",
];

proptest! {
    #![proptest_config(config(2000))]

    /// Mutated corpus text either parses or fails with an in-range span.
    #[test]
    fn mutated_specs_never_crash(
        which in 0..CORPUS.len(),
        edits in prop::collection::vec((any::<prop::sample::Index>(), 0u8..3, prop::sample::select(
            vec!['(', ')', '{', '}', '[', ']', '<', '>', '=', '&', '|', '!', '-', '*', ';', ':', '\'', ',', 'x', '1', ' ', '.', '$'],
        )), 1..4),
    ) {
        let mut text: Vec<char> = CORPUS[which].chars().collect();
        for (at, kind, c) in edits {
            if text.is_empty() {
                break;
            }
            let i = at.index(text.len());
            match kind {
                0 => { text.remove(i); }
                1 => text.insert(i, c),
                _ => text[i] = c,
            }
        }
        let text: String = text.into_iter().collect();
        if let Err(e) = parse_spec(&text) {
            prop_assert!(e.span.start <= text.len() && e.span.end <= text.len(), "{e:?}");
            prop_assert!(e.span.line >= 1 && e.span.column >= 1);
        }
    }
}

// Bounded semantics

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn modalities_quantify_over_outputs(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let a = g.program(3, true);
        let p = g.test_formula();
        let e = g.env();
        let b = Budget::default();
        let Ok(outs) = bounded_outputs(&a, &e, &b) else { return Ok(()) };
        let holds: Vec<bool> = outs.iter().map(|o| eval_bool(&p, o, Some(&b)).unwrap()).collect();
        let boxed = eval_bool(&BoolExpr::box_(a.clone(), p.clone()), &e, Some(&b)).unwrap();
        let dia = eval_bool(&BoolExpr::diamond(a, p), &e, Some(&b)).unwrap();
        prop_assert_eq!(boxed, holds.iter().all(|h| *h));
        prop_assert_eq!(dia, holds.iter().any(|h| *h));
    }

    #[test]
    fn star_unrolls_one_iterate_at_a_time(seed in any::<u64>(), k in 1usize..5) {
        let mut g = Gen::new(seed);
        let body = g.program(2, false);
        let star = HybridProgram::star(body.clone());
        let e = g.env();
        let (Ok(now), Ok(before)) =
            (bounded_outputs(&star, &e, &Budget::with_star(k)), bounded_outputs(&star, &e, &Budget::with_star(k - 1)))
        else {
            return Ok(());
        };
        let mut expected = before.clone();
        for o in &before {
            expected.extend(bounded_outputs(&body, o, &Budget::default()).unwrap());
        }
        prop_assert_eq!(now, expected);
    }

    #[test]
    fn unlisted_variables_are_constant_along_flows(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let x = Variable(0);
        let y = Variable(1);
        let z = Variable(2);
        let k = |g: &mut Gen| RealExpr::int(g.rng().gen_range(-2..=2));
        let fx = k(&mut g) * RealExpr::var(y) + k(&mut g);
        let fy = k(&mut g) * RealExpr::var(x) + k(&mut g) * RealExpr::var(z);
        let sys = OdeSystem::new(AssignmentList::new(vec![(x, fx), (y, fy)]).unwrap(), BoolExpr::Top).unwrap();
        let e = g.env();
        let flow = ode_flow(&sys, &e, 1.0, 0.01).unwrap();
        for (_, env) in &flow.trajectory {
            prop_assert_eq!(env.lookup(z).to_bits(), e.lookup(z).to_bits());
            prop_assert_eq!(env.lookup(Variable(7)).to_bits(), e.lookup(Variable(7)).to_bits());
        }
    }
}

// Substitution

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn substitution_matches_updated_environment(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let l = assignment(&mut g);
        let p = g.test_formula();
        let e = g.env();
        let sub = sub_bool(&l, &p).unwrap();
        let updated = assign_sub(&l, &e).unwrap();
        prop_assert_eq!(eval_bool(&sub, &e, None).unwrap(), eval_bool(&p, &updated, None).unwrap());
    }

    #[test]
    fn empty_substitution_is_identity(seed in any::<u64>()) {
        let r = Gen::new(seed).any_real(4);
        prop_assert_eq!(sub_re(&AssignmentList::empty(), &r), r);
    }
}

#[test]
fn substitution_is_simultaneous() {
    let (x, y) = (Variable(0), Variable(1));
    let swap = AssignmentList::new(vec![(x, RealExpr::var(y)), (y, RealExpr::var(x))]).unwrap();
    assert_eq!(sub_re(&swap, &RealExpr::var(x)), RealExpr::var(y));
    assert_eq!(sub_re(&swap, &RealExpr::var(y)), RealExpr::var(x));
}

// Freshness

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn fresh_variables_do_not_matter(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let p = g.formula(3, true);
        let b = Budget::default();
        for v in [Variable(0), Variable(1), Variable(2), Variable(5)] {
            if !fresh_in_bool(v, &p) {
                continue;
            }
            for _ in 0..100 {
                let e = g.env();
                let r = g.rng().gen_range(-20i32..=20) as f64 / 4.0;
                let (Ok(a), Ok(c)) = (eval_bool(&p, &e, Some(&b)), eval_bool(&p, &env_with(&e, &[(v, r)]), Some(&b))) else {
                    continue;
                };
                prop_assert_eq!(a, c, "{:?} fresh in {:?}", v, p);
            }
        }
    }

    #[test]
    fn fresh_programs_preserve_the_formula(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let p = g.test_formula();
        let a = g.program(2, true);
        if !fresh_program(&p, &a) {
            return Ok(());
        }
        let b = Budget::default();
        for _ in 0..20 {
            let e = g.env();
            let before = eval_bool(&p, &e, None).unwrap();
            let Ok(outs) = bounded_outputs(&a, &e, &b) else { continue };
            for o in outs {
                prop_assert_eq!(eval_bool(&p, &o, None).unwrap(), before);
            }
        }
    }

    #[test]
    fn fresh_variable_is_the_least_unused_index(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let n = g.rng().gen_range(0..3);
        let m = g.rng().gen_range(0..3);
        let s = Sequent::new((0..n).map(|_| g.formula(2, true)).collect(), (0..m).map(|_| g.formula(2, true)).collect());
        let used = s.vars_of();
        let v = fresh_variable(&s);
        prop_assert!(!used.contains(&v));
        prop_assert!((0..v.index()).all(|i| used.contains(&Variable(i))));
    }
}

// Arithmetic

/// A term equal to `p` by construction, built from ring identities.
fn disguise(g: &mut Gen, p: RealExpr) -> RealExpr {
    let t = g.term(2);
    match g.rng().gen_range(0..5) {
        0 => (p + t.clone()) - t,
        1 => p * RealExpr::int(1) + RealExpr::int(0),
        2 => -(-p),
        3 => (t.clone() * RealExpr::int(2) + p) - (t.clone() + t),
        _ => match p {
            RealExpr::Add(a, b) => *b + *a,
            RealExpr::Mul(a, b) => *b * *a,
            other => other,
        },
    }
}

proptest! {
    #![proptest_config(config(200))]

    /// Normal forms agree iff the terms agree at 50 sample points.
    #[test]
    fn normal_form_decides_identity(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let p = g.term(3);
        let q = if g.rng().gen_bool(0.5) { disguise(&mut g, p.clone()) } else { g.term(3) };
        let same_nf = poly_normalize(&p).unwrap() == poly_normalize(&q).unwrap();
        let mut same_values = true;
        for _ in 0..50 {
            let e = g.env().with(&[(Variable(0), g.rng().gen_range(-30i32..=30) as f64 / 7.0)]);
            let (a, b) = (eval_real(&p, &e).unwrap(), eval_real(&q, &e).unwrap());
            same_values &= (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        }
        prop_assert_eq!(same_nf, same_values, "{:?} vs {:?}", p, q);
    }
}

fn linear_term(g: &mut Gen) -> RealExpr {
    let mut t = RealExpr::int(g.rng().gen_range(-3..=3));
    for v in [Variable(0), Variable(1), Variable(2)] {
        let k = g.rng().gen_range(-2..=2);
        if k != 0 {
            t = t + RealExpr::int(k) * RealExpr::var(v);
        }
    }
    t
}

fn linear_atom(g: &mut Gen) -> BoolExpr {
    let op = [RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge][g.rng().gen_range(0..6)];
    BoolExpr::rel(op, linear_term(g), RealExpr::int(g.rng().gen_range(-2..=2)))
}

proptest! {
    #![proptest_config(config(60))]

    #[test]
    fn fourier_motzkin_is_sound(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let n = g.rng().gen_range(1..=3);
        let m = g.rng().gen_range(0..=2);
        let s = Sequent::new((0..n).map(|_| linear_atom(&mut g)).collect(), (0..m).map(|_| linear_atom(&mut g)).collect());
        match linear_close(&s).unwrap() {
            Verdict::Proved(_) => prop_assert!(sample_counterexample(&s, 10_000, seed).is_none()),
            Verdict::Counterexample(cx) => {
                let values: BTreeMap<Variable, _> = cx.into_iter().collect();
                prop_assert!(is_counterexample(&s, &values));
            }
            Verdict::Unknown => {}
        }
    }
}

#[test]
fn generated_variables_stay_within_the_scope() {
    let mut g = Gen::new(3);
    let names: BTreeSet<Variable> = (0..3).map(Variable).collect();
    for _ in 0..50 {
        assert!(g.any_formula(4).vars_of().is_subset(&names));
    }
}

#[test]
fn linear_corpus_exercises_both_verdicts() {
    let (mut proved, mut refuted) = (0, 0);
    for seed in 0..200 {
        let mut g = Gen::new(seed);
        let n = g.rng().gen_range(1..=3);
        let m = g.rng().gen_range(0..=2);
        let s = Sequent::new((0..n).map(|_| linear_atom(&mut g)).collect(), (0..m).map(|_| linear_atom(&mut g)).collect());
        match linear_close(&s).unwrap() {
            Verdict::Proved(_) => proved += 1,
            Verdict::Counterexample(_) => refuted += 1,
            Verdict::Unknown => {}
        }
    }
    assert!(proved >= 10 && refuted >= 10, "proved {proved}, refuted {refuted}");
}
