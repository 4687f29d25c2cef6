//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its runtime; the test fails if any criterion fails.

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use eatwb_core::engine::{free_model, Judgment};
use eatwb_core::enumerate::all_models;
use eatwb_core::files::load_model;
use eatwb_core::fixtures;
use eatwb_core::gamma::{fragment_closure, GammaFragment, Request};
use eatwb_core::maltsev::{
    definedness_quotient, find_maltsev_term, points_cube_check, random_z2_cube, set_cube_counterexample,
    universal_approx_coop, verify_maltsev_term, MaltsevSearch,
};
use eatwb_core::model::{evaluate_term, homomorphisms, is_iso, is_strong_epi, Elem, FiniteModel};
use eatwb_core::relation::{all_relations, compose, opposite, Relation};
use eatwb_core::text::{parse_term, parse_theory};
use eatwb_core::theory::{Context, SortId, TypedTerm};
use rand_chacha::rand_core::{RngCore, SeedableRng};

type Criterion = (&'static str, fn() -> bool, u64);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn counts(f: &GammaFragment) -> (usize, usize, usize) {
    (f.theory.sorts().len(), f.theory.ops().len(), f.theory.equations().len())
}

fn xyz(s: &str) -> Context {
    Context::from_pairs([("x", s), ("y", s), ("z", s)])
}

fn criterion_1() -> bool {
    let out = Command::new(env!("CARGO_BIN_EXE_eatwb"))
        .args(["gammamal", "closure", "--delta", "star"])
        .output()
        .unwrap();
    let golden = std::fs::read(root().join("fixtures/golden/delta_star.eat")).unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, golden, "golden file differs");

    let th = parse_theory(std::str::from_utf8(&golden).unwrap()).unwrap();
    let sorts: Vec<String> = th.sorts().iter().map(|s| s.to_string()).collect();
    assert_eq!(sorts, ["star", "star@0", "star@1"]);
    let ops: BTreeSet<String> = th.ops().iter().map(|o| o.name.clone()).collect();
    let expected: BTreeSet<String> =
        ["alpha@star", "rho@star", "eta@star", "eps@star", "pi@star"].iter().map(|s| s.to_string()).collect();
    assert_eq!(ops, expected);
    assert!(!th.op("pi@star").unwrap().is_total());
    let eqs: Vec<String> = th.equations().iter().map(|e| e.to_string()).collect();
    assert_eq!(
        eqs,
        [
            "x:star, y:star |- rho@star(x,y,y) = alpha@star(x)",
            "x:star, y:star |- rho@star(x,x,y) = alpha@star(y)",
            "x:star |- eta@star(alpha@star(x)) = eps@star(alpha@star(x))",
            "x:star |- pi@star(alpha@star(x)) = x",
            "x:star@0 |- alpha@star(pi@star(x)) = x",
        ]
    );

    let base = GammaFragment::bootstrap();
    let d1 = base.delta_step(&[SortId::new("star")]).unwrap();
    let (s0, o0, e0) = counts(&base);
    let (s1, o1, e1) = counts(&d1);
    assert_eq!((s1 - s0, o1 - o0, e1 - e0), (2, 5, 5));
    let theta = d1.parse_theta("x:star@0 |- pi@star(x)").unwrap();
    let g = d1.gamma_step_for_terms(&[theta]).unwrap();
    let (s2, o2, e2) = counts(&g);
    assert_eq!((s2 - s1, o2 - o1, e2 - e1), (2, 5, 4));
    true
}

fn criterion_2() -> bool {
    let d1 = fragment_closure(&[Request::delta("star")]).unwrap();
    let results = d1.verify_maltsev_witnesses(4).unwrap();
    assert_eq!(results.len(), 1);
    let w = results[0].1.as_ref().expect("Mal'tsev obligations proved");
    assert_eq!(w.proofs.len(), 4);
    assert!(w.proofs.iter().all(|o| o.is_proved()));
    for src in ["x:star@0 |- pi@star(x)", "x:star |- alpha@star(x)", "x:star, y:star, z:star |- rho@star(x,y,z)"] {
        let f = fragment_closure(&[Request::theta(src)]).unwrap();
        let t = f.parse_theta(src).unwrap();
        let r = f.verify_regular_witnesses(&t, 4).unwrap();
        let w = r.unwrap_or_else(|e| panic!("{src}: {:?}", e.stuck()));
        assert!(w.proofs.iter().all(|o| o.is_proved()));
    }
    true
}

fn criterion_3() -> bool {
    for (th, sort) in [(fixtures::groups(), "g"), (fixtures::z2_vector_spaces(), "v")] {
        match find_maltsev_term(&th, &SortId::new(sort), 3, 4) {
            MaltsevSearch::Found { witness, .. } => {
                assert!(witness.p.depth() <= 3);
                assert!(witness.proofs.iter().all(|o| o.is_proved()));
            }
            other => panic!("no term for {sort}: {other:?}"),
        }
    }
    match find_maltsev_term(&fixtures::gamma0(), &SortId::new("star"), 3, 4) {
        MaltsevSearch::NotFoundWithinBound { rejected } => {
            assert!(!rejected.is_empty());
            for (_, j) in rejected {
                match j {
                    Judgment::Refuted { model, .. } => assert_eq!(model.size(0), 2),
                    other => panic!("expected a countermodel, got {}", other.status()),
                }
            }
        }
        other => panic!("unexpected term for sets: {other:?}"),
    }
    true
}

fn criterion_4() -> bool {
    let m = Arc::new(FiniteModel::with_sizes(fixtures::gamma0(), &[3]).unwrap());
    let mut mismatches = 0;
    for mask in 0u32..512 {
        let pairs = (0..9).filter(|i| mask >> i & 1 == 1).map(|i| ((i / 3) as Elem, (i % 3) as Elem)).collect();
        let r = Relation::new(m.clone(), m.clone(), vec![pairs]).unwrap();
        let rrr = compose(&compose(&r, &opposite(&r)).unwrap(), &r).unwrap();
        if r.is_difunctional() != rrr.is_subset(&r) {
            mismatches += 1;
        }
    }
    mismatches == 0
}

fn criterion_5() -> bool {
    let two = load_model(&root().join("fixtures/models/set2.json").to_string_lossy()).unwrap();
    let a = universal_approx_coop(&two, 3).unwrap();
    assert_eq!(a.m.total_size(), 0);
    assert!(!a.a_surjective && a.square_commutes);

    let z2 = load_model(&root().join("fixtures/models/z2.json").to_string_lossy()).unwrap();
    let a = universal_approx_coop(&z2, 4).unwrap();
    assert_eq!(a.m.size(0), 2);
    assert!(is_iso(&a.a_map) && a.square_commutes);
    true
}

fn criterion_6() -> bool {
    let th = fixtures::z2_vector_spaces();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let cube = random_z2_cube(&th, &mut rng);
        assert!(cube.f.source.size(0) <= 4 && cube.g.source.size(0) <= 4 && cube.q.target.size(0) <= 4);
        assert!(points_cube_check(&cube).unwrap().t_strong_epi);
    }
    let outcome = points_cube_check(&set_cube_counterexample(&fixtures::gamma0())).unwrap();
    !outcome.t_strong_epi
}

fn criterion_7() -> bool {
    let names = [
        vec!["set2", "set3", "order_graph"],
        vec!["z2", "z2sq"],
        vec!["z3"],
        vec!["pi_fixture"],
    ];
    for fam in names {
        let models: Vec<Arc<FiniteModel>> = fam
            .iter()
            .map(|n| load_model(&root().join(format!("fixtures/models/{n}.json")).to_string_lossy()).unwrap())
            .collect();
        for a in &models {
            for b in &models {
                let p = eatwb_core::model::product(a, b).unwrap();
                for c in &models {
                    let into_p = homomorphisms(c, &p.model);
                    for f in homomorphisms(c, a) {
                        for g in homomorphisms(c, b) {
                            let n = into_p
                                .iter()
                                .filter(|u| u.then(&p.p1).unwrap().maps == f.maps && u.then(&p.p2).unwrap().maps == g.maps)
                                .count();
                            assert_eq!(n, 1);
                        }
                    }
                }
                for f in homomorphisms(a, b) {
                    let im = eatwb_core::model::image(&f).unwrap();
                    assert_eq!(im.p.then(&im.i).unwrap().maps, f.maps);
                    assert!(eatwb_core::model::is_mono(&im.i) && is_strong_epi(&im.p));
                    let inverse = homomorphisms(b, a).into_iter().any(|g| {
                        f.then(&g).unwrap().maps == eatwb_core::model::Homomorphism::identity(a.clone()).maps
                            && g.then(&f).unwrap().maps == eatwb_core::model::Homomorphism::identity(b.clone()).maps
                    });
                    assert_eq!(inverse, eatwb_core::model::is_mono(&f) && is_strong_epi(&f));
                    assert_eq!(inverse, is_iso(&f));
                }
            }
        }
    }
    true
}

fn criterion_8() -> bool {
    let th = fixtures::z2_vector_spaces();
    let free = free_model(&th, Context::from_pairs([("x", "v"), ("y", "v")]), 3).unwrap();
    assert!(free.saturated);
    assert_eq!(free.model.size(0), 4);
    let (gx, gy) = (free.generators[0].1, free.generators[1].1);
    for b in all_models(&th, 4, 1_000_000).unwrap() {
        let homs = homomorphisms(&free.model, &b);
        for x in 0..b.size(0) as Elem {
            for y in 0..b.size(0) as Elem {
                let n = homs.iter().filter(|h| h.apply(0, gx) == x && h.apply(0, gy) == y).count();
                assert_eq!(n, 1, "extensions of ({x}, {y})");
            }
        }
    }
    true
}

fn criterion_9() -> bool {
    let th = fixtures::pi_eta_eps();
    let a = load_model(&root().join("fixtures/models/pi_fixture.json").to_string_lossy()).unwrap();
    let theta = TypedTerm::new(Context::from_pairs([("x", "s")]), parse_term(&th, &Context::from_pairs([("x", "s")]), "pi(x)").unwrap().0);
    let dq = definedness_quotient(&a, &theta, &[0], 2).unwrap();
    assert!(dq.bounded.saturated);
    assert_eq!(dq.bounded.model.sizes(), vec![2, 3]);
    assert!(is_strong_epi(&dq.q));
    let q = &dq.q;
    let mut competitors = 0;
    for b in all_models(&th, 3, 2_000_000).unwrap() {
        let from_q = homomorphisms(&dq.bounded.model, &b);
        for h in homomorphisms(&a, &b) {
            let image_of_tuple = [h.apply(0, 0)];
            if evaluate_term(&b, &theta.term, &image_of_tuple).is_err() {
                continue;
            }
            competitors += 1;
            let n = from_q.iter().filter(|k| q.then(k).unwrap().maps == h.maps).count();
            assert_eq!(n, 1);
        }
    }
    competitors > 0
}

fn criterion_10() -> bool {
    let th = fixtures::z2_vector_spaces();
    let v = SortId::new("v");
    let (p, _) = parse_term(&th, &xyz("v"), "add(add(x,y),z)").unwrap();
    assert!(verify_maltsev_term(&th, &v, &p, 4).is_ok());
    let check = |r: &Relation| {
        assert!(r.is_difunctional(), "{r}");
        if r.is_endo() && r.is_reflexive() {
            assert!(r.is_equivalence(), "{r}");
        }
    };
    let models = all_models(&th, 4, 1_000_000).unwrap();
    let small: Vec<_> = models.iter().filter(|m| m.size(0) <= 2).collect();
    for a in &small {
        for b in &small {
            for r in all_relations(a, b).unwrap() {
                check(&r);
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let a = &models[rng.next_u32() as usize % models.len()];
        let b = if rng.next_u32() % 2 == 0 { a } else { &models[rng.next_u32() as usize % models.len()] };
        let k = rng.next_u32() % 4;
        let pairs: BTreeSet<(Elem, Elem)> = (0..k)
            .map(|_| (rng.next_u32() % a.size(0) as u32, rng.next_u32() % b.size(0) as u32))
            .collect();
        let mut seed = pairs;
        if rng.next_u32() % 2 == 0 && Arc::ptr_eq(a, b) {
            seed.extend((0..a.size(0) as Elem).map(|i| (i, i)));
        }
        check(&Relation::generated(a.clone(), b.clone(), vec![seed]).unwrap());
    }
    true
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("completion fragment correctness", criterion_1, 1),
        ("Mal'tsev and regularity witnesses in the fragment", criterion_2, 10),
        ("Mal'tsev term search", criterion_3, 60),
        ("difunctionality oracle equivalence", criterion_4, 5),
        ("approximate co-operations", criterion_5, 5),
        ("cube lemma harness", criterion_6, 30),
        ("model-layer laws", criterion_7, 60),
        ("free-model universal property", criterion_8, 60),
        ("definedness quotient", criterion_9, 60),
        ("Mal'tsev to difunctional transfer", criterion_10, 60),
    ];
    let mut failed = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let ok = catch_unwind(AssertUnwindSafe(f)).unwrap_or(false);
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let verdict = if ok && in_time { "PASS" } else { "FAIL" };
        writeln!(
            stdout,
            "criterion {:>2}: {verdict} {name} ({:.2}s, limit {limit}s)",
            i + 1,
            elapsed.as_secs_f64()
        )
        .unwrap();
        if verdict == "FAIL" {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
