use std::collections::BTreeSet;
use std::sync::Arc;

use eatwb_core::fixtures;
use eatwb_core::maltsev::{verify_maltsev_term, z2_space};
use eatwb_core::model::{kernel_pair, Elem, FiniteModel, Homomorphism};
use eatwb_core::relation::{all_relations, compose, opposite, Relation};
use eatwb_core::text::parse_term;
use eatwb_core::theory::{Context, SortId};
use proptest::prelude::*;

fn set(n: usize) -> Arc<FiniteModel> {
    Arc::new(FiniteModel::with_sizes(fixtures::gamma0(), &[n]).unwrap())
}

fn from_mask(m: &Arc<FiniteModel>, n: usize, mask: u32) -> Relation {
    let pairs = (0..n * n)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| ((i / n) as Elem, (i % n) as Elem))
        .collect();
    Relation::new(m.clone(), m.clone(), vec![pairs]).unwrap()
}

/// Difunctionality by brute force over all quadruples.
fn difunctional_oracle(r: &Relation, n: usize) -> bool {
    let e = 0..n as Elem;
    e.clone().all(|x| {
        e.clone().all(|y| {
            e.clone().all(|y2| {
                e.clone().all(|x2| {
                    !(r.contains(0, x, y) && r.contains(0, x, y2) && r.contains(0, x2, y2)) || r.contains(0, x2, y)
                })
            })
        })
    })
}

#[test]
fn difunctional_check_agrees_with_composite_oracle() {
    for n in 0..=3 {
        let m = set(n);
        for mask in 0u32..1 << (n * n) {
            let r = from_mask(&m, n, mask);
            let rrr = compose(&compose(&r, &opposite(&r)).unwrap(), &r).unwrap();
            assert_eq!(r.is_difunctional(), rrr.is_subset(&r));
            assert_eq!(r.is_difunctional(), difunctional_oracle(&r, n));
        }
    }
}

#[test]
fn composition_is_associative_on_three_element_sets() {
    let m = set(3);
    // a spread of 14 relations
    let rels: Vec<Relation> = (0u32..512).step_by(37).map(|k| from_mask(&m, 3, k)).collect();
    for r in &rels {
        for s in &rels {
            let rs = compose(r, s).unwrap();
            for t in &rels {
                assert_eq!(compose(&rs, t).unwrap(), compose(r, &compose(s, t).unwrap()).unwrap());
            }
        }
    }
}

#[test]
fn kernel_pairs_are_equivalences() {
    let m = set(3);
    let two = set(2);
    for map in [[0, 0, 1], [0, 1, 0], [1, 1, 1], [0, 1, 1]] {
        let f = Homomorphism::new(m.clone(), two.clone(), vec![map.to_vec()]).unwrap();
        assert!(Relation::kernel(&f).unwrap().is_equivalence());
        assert_eq!(kernel_pair(&f).unwrap().model.size(0), Relation::kernel(&f).unwrap().len());
    }
}

#[test]
fn graph_of_a_function_is_difunctional() {
    let z2 = z2_space(&fixtures::z2_vector_spaces(), 2);
    let f = Homomorphism::new(z2.clone(), z2.clone(), vec![vec![0, 1, 1, 0]]).unwrap();
    assert!(Relation::graph(&f).is_difunctional());
    assert_eq!(compose(&Relation::graph(&f), &Relation::diagonal(z2.clone())).unwrap(), Relation::graph(&f));
}

#[test]
fn boolean_groups_have_a_verified_maltsev_term() {
    let th = fixtures::z2_vector_spaces();
    let v = SortId::new("v");
    let ctx = Context::from_pairs([("x", v.clone()), ("y", v.clone()), ("z", v.clone())]);
    let (p, _) = parse_term(&th, &ctx, "add(add(x,y),z)").unwrap();
    assert!(verify_maltsev_term(&th, &v, &p, 4).is_ok());
}

#[test]
fn every_relation_between_small_boolean_groups_is_difunctional() {
    let th = fixtures::z2_vector_spaces();
    let spaces: Vec<_> = (0..=2).map(|d| z2_space(&th, d)).collect();
    for a in &spaces[..2] {
        for b in &spaces[..2] {
            for r in all_relations(a, b).unwrap() {
                assert!(r.is_difunctional());
            }
        }
    }
    // between dimensions 1 and 2
    for r in all_relations(&spaces[1], &spaces[2]).unwrap() {
        assert!(r.is_difunctional());
    }
}

fn arb_pairs(n: usize) -> impl Strategy<Value = BTreeSet<(Elem, Elem)>> {
    prop::collection::btree_set((0..n as Elem, 0..n as Elem), 0..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_relations_in_boolean_groups_are_difunctional(pairs in arb_pairs(4)) {
        let z2 = z2_space(&fixtures::z2_vector_spaces(), 2);
        let r = Relation::generated(z2.clone(), z2.clone(), vec![pairs]).unwrap();
        prop_assert!(r.is_difunctional());
        if r.is_reflexive() {
            prop_assert!(r.is_equivalence());
        }
    }

    #[test]
    fn equivalences_on_boolean_groups_commute(a in arb_pairs(4), b in arb_pairs(4)) {
        let z2 = z2_space(&fixtures::z2_vector_spaces(), 2);
        let diag: BTreeSet<(Elem, Elem)> = (0..4).map(|i| (i, i)).collect();
        let r = Relation::generated(z2.clone(), z2.clone(), vec![a.union(&diag).copied().collect()]).unwrap();
        let s = Relation::generated(z2.clone(), z2.clone(), vec![b.union(&diag).copied().collect()]).unwrap();
        prop_assert!(r.is_equivalence() && s.is_equivalence());
        prop_assert_eq!(compose(&r, &s).unwrap(), compose(&s, &r).unwrap());
    }

    #[test]
    fn opposite_is_an_involution(mask in 0u32..512) {
        let m = set(3);
        let r = from_mask(&m, 3, mask);
        prop_assert_eq!(opposite(&opposite(&r)), r.clone());
        prop_assert_eq!(opposite(&r).len(), r.len());
    }
}
