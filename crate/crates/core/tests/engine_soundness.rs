//! Proved equations hold in every small model, refutations are genuine, and
//! terms and theories survive printing and parsing.

use std::sync::{Arc, OnceLock};

use eatwb_core::engine::{everywhere_defined, Definedness, Judgment, Limits, Prover};
use eatwb_core::enumerate::all_models;
use eatwb_core::fixtures;
use eatwb_core::gamma::{fragment_closure, Request};
use eatwb_core::model::{validate_model, Elem, FiniteModel, Tuples};
use eatwb_core::text::{parse_term, parse_theory, print_theory};
use eatwb_core::theory::{Context, Equation, Term, Theory};
use proptest::prelude::*;

/// Plain recursive evaluation; `None` when some application is undefined.
fn eval(m: &FiniteModel, t: &Term, asg: &[Elem]) -> Option<Elem> {
    match t {
        Term::Var(i) => Some(asg[*i]),
        Term::App(f, args) => {
            let vals = args.iter().map(|a| eval(m, a, asg)).collect::<Option<Vec<_>>>()?;
            let o = m.theory().op_index(f).unwrap();
            m.table(o).get(&vals)
        }
    }
}

fn holds_everywhere(models: &[Arc<FiniteModel>], eq: &Equation) -> bool {
    models.iter().all(|m| {
        let dims: Vec<usize> = eq.ctx.sorts().iter().map(|s| m.size(m.theory().sort_index(s).unwrap())).collect();
        Tuples::new(&dims).all(|a| match (eval(m, &eq.lhs, &a), eval(m, &eq.rhs, &a)) {
            (Some(x), Some(y)) => x == y,
            _ => true,
        })
    })
}

fn models_of(name: &'static str) -> &'static [Arc<FiniteModel>] {
    static Z2: OnceLock<Vec<Arc<FiniteModel>>> = OnceLock::new();
    static GROUPS: OnceLock<Vec<Arc<FiniteModel>>> = OnceLock::new();
    let cell = if name == "z2vec" { &Z2 } else { &GROUPS };
    cell.get_or_init(|| all_models(&fixtures::by_name(name).unwrap(), 4, 1_000_000).unwrap())
}

/// Random terms over a one-sorted theory with variables `0..vars`.
fn arb_term(theory: Arc<Theory>, vars: usize) -> impl Strategy<Value = Term> {
    let consts: Vec<String> = theory.ops().iter().filter(|o| o.arg_sorts.is_empty()).map(|o| o.name.clone()).collect();
    let mut leaves: Vec<Term> = (0..vars).map(Term::var).collect();
    leaves.extend(consts.into_iter().map(Term::constant));
    let leaf = prop::sample::select(leaves);
    let ops: Vec<(String, usize)> = theory
        .ops()
        .iter()
        .filter(|o| !o.arg_sorts.is_empty())
        .map(|o| (o.name.clone(), o.arg_sorts.len()))
        .collect();
    leaf.prop_recursive(3, 12, 2, move |inner| {
        prop::sample::select(ops.clone()).prop_flat_map(move |(name, n)| {
            prop::collection::vec(inner.clone(), n).prop_map(move |args| Term::app(name.clone(), args))
        })
    })
}

fn one_sorted_ctx(theory: &Theory, names: &[&str]) -> Context {
    let s = theory.sorts()[0].clone();
    Context::from_pairs(names.iter().map(|n| (*n, s.clone())))
}

fn prover_for(name: &'static str) -> &'static Prover {
    static Z2: OnceLock<Prover> = OnceLock::new();
    static GROUPS: OnceLock<Prover> = OnceLock::new();
    let cell = if name == "z2vec" { &Z2 } else { &GROUPS };
    cell.get_or_init(|| Prover::new(fixtures::by_name(name).unwrap(), Limits::with_depth(4)))
}

fn check_judgment(name: &'static str, eq: &Equation) -> Result<(), TestCaseError> {
    let models = models_of(name);
    match prover_for(name).prove(eq) {
        Judgment::Proved(_) => prop_assert!(holds_everywhere(models, eq), "proved but false: {eq}"),
        Judgment::Refuted { model, assignment } => {
            prop_assert!(validate_model(&model).is_ok());
            let (l, r) = (eval(&model, &eq.lhs, &assignment), eval(&model, &eq.rhs, &assignment));
            prop_assert!(l.is_some() && r.is_some() && l != r, "bogus countermodel for {eq}");
        }
        Judgment::Unknown { .. } => {}
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn boolean_group_judgments_are_sound(
        l in arb_term(fixtures::z2_vector_spaces(), 2),
        r in arb_term(fixtures::z2_vector_spaces(), 2),
    ) {
        let th = fixtures::z2_vector_spaces();
        let eq = Equation::new(one_sorted_ctx(&th, &["x", "y"]), l, r);
        check_judgment("z2vec", &eq)?;
    }

    #[test]
    fn group_judgments_are_sound(
        l in arb_term(fixtures::groups(), 2),
        r in arb_term(fixtures::groups(), 2),
    ) {
        let th = fixtures::groups();
        let eq = Equation::new(one_sorted_ctx(&th, &["x", "y"]), l, r);
        check_judgment("groups", &eq)?;
    }

    #[test]
    fn terms_round_trip_through_text(t in arb_term(fixtures::groups(), 3)) {
        let th = fixtures::groups();
        let ctx = one_sorted_ctx(&th, &["x", "y", "z"]);
        let shown = t.display(&ctx).to_string();
        let (back, _) = parse_term(&th, &ctx, &shown).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn total_terms_are_everywhere_defined(t in arb_term(fixtures::groups(), 2)) {
        let th = fixtures::groups();
        let ctx = one_sorted_ctx(&th, &["x", "y"]);
        prop_assert!(matches!(everywhere_defined(&th, &ctx, &t, 6), Definedness::Yes(_)));
    }
}

#[test]
fn theories_round_trip_through_text() {
    let mut theories: Vec<Theory> = ["gamma0", "free_binop", "z2vec", "groups", "pi_eta_eps"]
        .iter()
        .map(|n| fixtures::by_name(n).unwrap().as_ref().clone())
        .collect();
    let f = fragment_closure(&[Request::theta("x:star, y:star, z:star |- rho@star(x,y,z)")]).unwrap();
    theories.push(f.theory.clone());
    for t in theories {
        let text = print_theory(&t);
        let back = parse_theory(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(print_theory(&back), text);
    }
}

#[test]
fn partial_operation_is_not_everywhere_defined() {
    let th = fixtures::pi_eta_eps();
    let ctx = Context::from_pairs([("x", "s")]);
    let t = Term::app("pi", vec![Term::var(0)]);
    assert!(matches!(everywhere_defined(&th, &ctx, &t, 6), Definedness::Unknown { .. }));
}
