//! Limits, images and iso/mono/epi on the bundled models, checked against
//! brute-force enumeration of homomorphisms and cones.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use eatwb_core::files::load_model;
use eatwb_core::maltsev::z2_space;
use eatwb_core::model::{
    equalizer, image, is_iso, is_mono, is_strong_epi, product, pullback, Elem, FiniteModel, Homomorphism, Tuples,
};
use eatwb_core::fixtures;

fn bundled(name: &str) -> Arc<FiniteModel> {
    load_model(&format!("{}/../../fixtures/models/{name}.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

/// Bundled models grouped by theory.
fn families() -> Vec<Vec<Arc<FiniteModel>>> {
    vec![
        vec![bundled("set2"), bundled("set3"), bundled("order_graph")],
        vec![z2_space(&fixtures::z2_vector_spaces(), 0), bundled("z2"), bundled("z2sq")],
        vec![bundled("z3")],
        vec![bundled("pi_fixture")],
    ]
}

/// Independent homomorphism check: every defined entry maps to a defined
/// entry with the mapped value.
fn preserves(a: &FiniteModel, b: &FiniteModel, maps: &[Vec<Elem>]) -> bool {
    let th = a.theory();
    th.ops().iter().enumerate().all(|(o, op)| {
        let sorts: Vec<usize> = op.arg_sorts.iter().map(|s| th.sort_index(s).unwrap()).collect();
        let rs = th.sort_index(&op.result_sort).unwrap();
        a.table(o).defined().all(|(args, v)| {
            let img: Vec<Elem> = args.iter().zip(&sorts).map(|(&x, &s)| maps[s][x as usize]).collect();
            b.apply(o, &img) == Some(maps[rs][v as usize])
        })
    })
}

fn all_homs(a: &Arc<FiniteModel>, b: &Arc<FiniteModel>) -> Vec<Homomorphism> {
    let n = a.theory().sorts().len();
    let dims: Vec<usize> = (0..n).flat_map(|s| std::iter::repeat_n(b.size(s), a.size(s))).collect();
    let mut out = Vec::new();
    for flat in Tuples::new(&dims) {
        let mut maps = Vec::with_capacity(n);
        let mut k = 0;
        for s in 0..n {
            maps.push(flat[k..k + a.size(s)].to_vec());
            k += a.size(s);
        }
        if preserves(a, b, &maps) {
            out.push(Homomorphism::unchecked(a.clone(), b.clone(), maps).unwrap());
        }
    }
    out
}

fn compose(f: &Homomorphism, g: &Homomorphism) -> Vec<Vec<Elem>> {
    f.maps.iter().enumerate().map(|(s, m)| m.iter().map(|&e| g.maps[s][e as usize]).collect()).collect()
}

type Maps = Vec<Vec<Elem>>;

/// How many homomorphisms in `homs` have each given pair of composites.
fn factor_counts(homs: &[Homomorphism], l: &Homomorphism, r: &Homomorphism) -> HashMap<(Maps, Maps), usize> {
    let mut m = HashMap::new();
    for u in homs {
        *m.entry((compose(u, l), compose(u, r))).or_insert(0) += 1;
    }
    m
}

fn small_enough(m: &FiniteModel, bound: usize) -> bool {
    m.total_size() <= bound
}

#[test]
fn products_are_universal() {
    for fam in families() {
        for a in &fam {
            for b in &fam {
                let p = product(a, b).unwrap();
                if !small_enough(&p.model, 16) {
                    continue;
                }
                assert!(p.p1.check().is_ok() && p.p2.check().is_ok());
                for c in &fam {
                    let counts = factor_counts(&all_homs(c, &p.model), &p.p1, &p.p2);
                    for f in all_homs(c, a) {
                        for g in all_homs(c, b) {
                            let n = counts.get(&(f.maps.clone(), g.maps)).copied().unwrap_or(0);
                            assert_eq!(n, 1, "product cone not unique");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn equalizers_and_pullbacks_are_universal() {
    for fam in families() {
        for a in &fam {
            for b in &fam {
                let homs = all_homs(a, b);
                for f in &homs {
                    for g in &homs {
                        let e = equalizer(f, g).unwrap();
                        for c in &fam {
                            let counts = factor_counts(&all_homs(c, &e.model), &e.inclusion, &e.inclusion);
                            for h in all_homs(c, a) {
                                let forks = compose(&h, f) == compose(&h, g);
                                let n = counts.get(&(h.maps.clone(), h.maps)).copied().unwrap_or(0);
                                assert_eq!(n, usize::from(forks));
                            }
                        }
                    }
                }
                // pullbacks of cospans a -> b <- a
                for f in &homs {
                    for g in &homs {
                        let pb = pullback(f, g).unwrap();
                        if !small_enough(&pb.model, 9) {
                            continue;
                        }
                        for c in &fam {
                            let counts = factor_counts(&all_homs(c, &pb.model), &pb.p1, &pb.p2);
                            let legs = all_homs(c, a);
                            for x in &legs {
                                for y in &legs {
                                    let commutes = compose(x, f) == compose(y, g);
                                    let n = counts.get(&(x.maps.clone(), y.maps.clone())).copied().unwrap_or(0);
                                    assert_eq!(n, usize::from(commutes));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// The smallest subset containing the set image and closed under defined
/// operations.
fn naive_closure(f: &Homomorphism) -> Vec<BTreeSet<Elem>> {
    let b = &f.target;
    let th = b.theory();
    let mut sets: Vec<BTreeSet<Elem>> = f.maps.iter().map(|m| m.iter().copied().collect()).collect();
    loop {
        let mut grew = false;
        for (o, op) in th.ops().iter().enumerate() {
            let sorts: Vec<usize> = op.arg_sorts.iter().map(|s| th.sort_index(s).unwrap()).collect();
            let rs = th.sort_index(&op.result_sort).unwrap();
            for (args, v) in b.table(o).defined() {
                if args.iter().zip(&sorts).all(|(x, &s)| sets[s].contains(x)) && sets[rs].insert(v) {
                    grew = true;
                }
            }
        }
        if !grew {
            return sets;
        }
    }
}

#[test]
fn image_factorisation_and_isomorphisms() {
    for fam in families() {
        for a in &fam {
            for b in &fam {
                let back = all_homs(b, a);
                for f in all_homs(a, b) {
                    let im = image(&f).unwrap();
                    assert_eq!(compose(&im.p, &im.i), f.maps, "f = i p");
                    assert!(is_mono(&im.i));
                    assert!(is_strong_epi(&im.p));
                    let closure = naive_closure(&f);
                    for (s, set) in closure.iter().enumerate() {
                        assert_eq!(set.len(), im.model.size(s));
                    }
                    let full = closure.iter().enumerate().all(|(s, set)| set.len() == b.size(s));
                    assert_eq!(is_strong_epi(&f), full);
                    let injective = f.maps.iter().all(|m| m.iter().collect::<BTreeSet<_>>().len() == m.len());
                    assert_eq!(is_mono(&f), injective);
                    let id_a = Homomorphism::identity(a.clone());
                    let id_b = Homomorphism::identity(b.clone());
                    let has_inverse = back
                        .iter()
                        .any(|g| compose(&f, g) == id_a.maps && compose(g, &f) == id_b.maps);
                    assert_eq!(is_iso(&f), has_inverse);
                    assert_eq!(has_inverse, is_mono(&f) && is_strong_epi(&f));
                }
            }
        }
    }
}
