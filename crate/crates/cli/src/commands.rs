use std::fmt::Write as _;
use std::sync::Arc;

use eatwb_core::engine::{everywhere_defined_with, presented_model_with, Definedness, Judgment, Limits, Presentation, Prover};
use eatwb_core::files::{load_hom, load_model, load_model_unvalidated, load_relation, load_theory, model_to_json};
use eatwb_core::gamma::{fragment_closure, fragment_from_text, GammaFragment, Request};
use eatwb_core::maltsev::{
    coproduct, definedness_quotient, find_maltsev_term, maltsev_via_relation, points_cube_check, random_z2_cube,
    set_cube_counterexample, universal_approx_coop, verify_maltsev_with, verify_regularity_witness, Evidence,
    FailureReport, MaltsevSearch, Obligation, RegularityCandidate, ViaRelation,
};
use eatwb_core::model::{equalizer, image, is_iso, is_mono, is_strong_epi, product, pullback, validate_model, Elem, FiniteModel};
use eatwb_core::relation::{compose, reflexive_graph_pullback_check, Relation};
use eatwb_core::text::{infer_context, parse_context, parse_raw_term, parse_term, parse_typed_term};
use eatwb_core::theory::{validate_theory, Context, Equation, SortId, Term, Theory};
use eatwb_core::{fixtures, Error, Result};
use rand_chacha::rand_core::SeedableRng;
use serde_json::{json, Value};

use crate::{Command, GammaCmd, Global, ModelCmd, RelCmd};

const TRUE: u8 = 0;
const FALSE: u8 = 1;
const UNKNOWN: u8 = 2;

struct Out {
    text: String,
    json: Value,
    code: u8,
}

impl Out {
    fn new(code: u8, text: String, json: Value) -> Self {
        Out { text, json, code }
    }
}

pub fn run(g: &Global, cmd: Command) -> Result<u8> {
    let out = match dispatch(g, cmd) {
        Ok(out) => out,
        Err(Error::Unsaturated(what)) => Out::new(
            UNKNOWN,
            format!("unsaturated: {what}\n"),
            json!({"status": "Unsaturated", "detail": what}),
        ),
        Err(e) => return Err(e),
    };
    if g.json {
        println!("{}", serde_json::to_string_pretty(&out.json).expect("serialisable"));
    } else {
        print!("{}", out.text);
    }
    Ok(out.code)
}

fn limits(g: &Global, default_depth: u32) -> Limits {
    let mut l = Limits::with_depth(g.depth.unwrap_or(default_depth));
    if let Some(r) = g.refute_size {
        l.refute_size = r;
    }
    if let Some(b) = g.budget {
        l.class_cap = b;
    }
    l
}

fn write_out(g: &Global, contents: &str) -> Result<()> {
    if let Some(path) = &g.out {
        std::fs::write(path, contents).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    }
    Ok(())
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))
}

fn dispatch(g: &Global, cmd: Command) -> Result<Out> {
    match cmd {
        Command::Validate { theory } => validate(&theory),
        Command::Free {
            theory,
            gens,
            relations,
            forced,
        } => free(g, &theory, &gens, &relations, &forced),
        Command::Prove {
            theory,
            lhs,
            rhs,
            ctx,
            assumed,
        } => prove(g, &theory, &lhs, &rhs, ctx.as_deref(), &assumed),
        Command::Defined { theory, term, ctx } => defined(g, &theory, &term, ctx.as_deref()),
        Command::Maltsev {
            theory,
            sort,
            term,
            proof_depth,
        } => maltsev(g, &theory, &sort, term.as_deref(), proof_depth),
        Command::MaltsevRel { theory, sort } => maltsev_rel(g, &theory, &sort),
        Command::Regwitness {
            theory,
            theta,
            pi,
            alphas,
            mus,
        } => regwitness(g, &theory, &theta, &pi, &alphas, &mus),
        Command::Model(m) => model_cmd(g, m),
        Command::Rel(r) => rel_cmd(r),
        Command::Coop { model } => coop(g, &model),
        Command::Quotient { model, theta, tuple } => quotient(g, &model, &theta, &tuple),
        Command::Cube {
            seed,
            count,
            counterexample,
        } => cube(seed, count, counterexample),
        Command::Gammamal(c) => gammamal(g, c),
    }
}

fn validate(path: &str) -> Result<Out> {
    let th = load_theory(path)?;
    let report = validate_theory(&th);
    let mut text = format!(
        "theory {}: {} sorts, {} ops, {} equations\n",
        th.name,
        th.sorts().len(),
        th.ops().len(),
        th.equations().len()
    );
    for v in &report.violations {
        writeln!(text, "violation: {v}").unwrap();
    }
    for w in &report.warnings {
        writeln!(text, "warning: {w}").unwrap();
    }
    let json = json!({
        "theory": th.name,
        "sorts": th.sorts().len(),
        "ops": th.ops().len(),
        "equations": th.equations().len(),
        "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "warnings": report.warnings,
        "valid": report.is_ok(),
    });
    Ok(Out::new(if report.is_ok() { TRUE } else { FALSE }, text, json))
}

fn split_eq(src: &str) -> Result<(&str, &str)> {
    src.split_once('=').ok_or_else(|| Error::Parse {
        line: 1,
        col: 1,
        expected: format!("an equation 'lhs = rhs' in {src:?}"),
    })
}

fn free(g: &Global, theory: &str, gens: &str, relations: &[String], forced: &[String]) -> Result<Out> {
    let th = load_theory(theory)?;
    let ctx = parse_context(gens)?;
    let mut p = Presentation::free(th.clone(), ctx.clone());
    for r in relations {
        let (l, rr) = split_eq(r)?;
        p.relations.push((parse_term(&th, &ctx, l.trim())?.0, parse_term(&th, &ctx, rr.trim())?.0));
    }
    for f in forced {
        p.forced_defined.push(parse_term(&th, &ctx, f)?.0);
    }
    p.check()?;
    let l = limits(g, 3);
    let b = presented_model_with(&p, l.depth, l.class_cap)?;
    write_out(g, &model_to_json(&b.model, theory))?;
    let text = format!("{}saturated: {}\n", b.model, b.saturated);
    let json = json!({
        "saturated": b.saturated,
        "depth": b.depth,
        "sizes": b.model.sizes(),
        "carriers": b.model.carriers(),
    });
    Ok(Out::new(if b.saturated { TRUE } else { UNKNOWN }, text, json))
}

fn context_for(th: &Theory, ctx: Option<&str>, sides: &[&str]) -> Result<Context> {
    match ctx {
        Some(c) => parse_context(c),
        None => {
            let raws = sides.iter().map(|s| parse_raw_term(s)).collect::<Result<Vec<_>>>()?;
            infer_context(th, &raws.iter().collect::<Vec<_>>())
        }
    }
}

fn assignment_text(m: &FiniteModel, ctx: &Context, asg: &[Elem]) -> Vec<String> {
    ctx.iter()
        .zip(asg)
        .map(|((name, sort), &e)| {
            let s = m.theory().sort_index(sort).unwrap();
            format!("{name} = {}", m.label(s, e))
        })
        .collect()
}

fn judgment_out(j: &Judgment, ctx: &Context) -> (u8, String, Value) {
    match j {
        Judgment::Proved(trace) => (TRUE, format!("Proved\n{trace}"), json!({"status": "Proved", "trace": trace.lines()})),
        Judgment::Refuted { model, assignment } => {
            let asg = assignment_text(model, ctx, assignment);
            (
                FALSE,
                format!("Refuted\n{}at {}\n", model, asg.join(", ")),
                json!({"status": "Refuted", "model_sizes": model.sizes(), "assignment": asg}),
            )
        }
        Judgment::Unknown { depth } => (UNKNOWN, format!("Unknown (depth {depth})\n"), json!({"status": "Unknown", "depth": depth})),
    }
}

fn prove(g: &Global, theory: &str, lhs: &str, rhs: &str, ctx: Option<&str>, assumed: &[String]) -> Result<Out> {
    let th = load_theory(theory)?;
    let mut sides: Vec<&str> = vec![lhs, rhs];
    sides.extend(assumed.iter().map(String::as_str));
    let c = context_for(&th, ctx, &sides)?;
    let (l, ls) = parse_term(&th, &c, lhs)?;
    let (r, rs) = parse_term(&th, &c, rhs)?;
    if ls != rs {
        return Err(Error::SortMismatch {
            path: vec![],
            expected: ls.to_string(),
            found: rs.to_string(),
        });
    }
    let assumed = assumed.iter().map(|a| Ok(parse_term(&th, &c, a)?.0)).collect::<Result<Vec<Term>>>()?;
    let prover = Prover::new(th, limits(g, 6));
    let j = prover.prove_assuming(&Equation::new(c.clone(), l, r), &assumed);
    let (code, text, json) = judgment_out(&j, &c);
    Ok(Out::new(code, text, json))
}

fn defined(g: &Global, theory: &str, term: &str, ctx: Option<&str>) -> Result<Out> {
    let th = load_theory(theory)?;
    let c = context_for(&th, ctx, &[term])?;
    let (t, _) = parse_term(&th, &c, term)?;
    Ok(match everywhere_defined_with(&th, &c, &t, &limits(g, 6)) {
        Definedness::Yes(d) => Out::new(TRUE, format!("Proved\n{d}"), json!({"status": "Proved", "derivation": d.to_string()})),
        Definedness::Unknown { depth } => {
            Out::new(UNKNOWN, format!("Unknown (depth {depth})\n"), json!({"status": "Unknown", "depth": depth}))
        }
    })
}

fn obligations_out(obs: &[Obligation]) -> (u8, String, Value) {
    let mut text = String::new();
    for o in obs {
        writeln!(text, "  {o}").unwrap();
    }
    let code = if obs.iter().all(Obligation::is_proved) {
        TRUE
    } else if obs
        .iter()
        .any(|o| matches!(&o.evidence, Evidence::Theorem(Judgment::Refuted { .. }) | Evidence::Malformed(_)))
    {
        FALSE
    } else {
        UNKNOWN
    };
    let json = Value::Array(obs.iter().map(|o| json!({"label": o.label, "status": o.status()})).collect());
    (code, text, json)
}

fn report_out<T>(r: &std::result::Result<T, FailureReport>, proofs: impl Fn(&T) -> &[Obligation]) -> (u8, String, Value) {
    match r {
        Ok(w) => obligations_out(proofs(w)),
        Err(f) => obligations_out(&f.obligations),
    }
}

fn xyz(sort: &SortId) -> Context {
    Context::from_pairs([("x", sort.clone()), ("y", sort.clone()), ("z", sort.clone())])
}

fn maltsev(g: &Global, theory: &str, sort: &str, term: Option<&str>, proof_depth: u32) -> Result<Out> {
    let th = load_theory(theory)?;
    let s = SortId::new(sort);
    if !th.has_sort(&s) {
        return Err(Error::UnknownSort(sort.into()));
    }
    if let Some(src) = term {
        let (p, _) = parse_term(&th, &xyz(&s), src)?;
        let prover = Prover::new(th, limits(g, 4));
        let r = verify_maltsev_with(&prover, &s, &p);
        let (code, body, obs) = report_out(&r, |w| &w.proofs);
        return Ok(Out::new(
            code,
            format!("p(x,y,z) = {src}\n{body}"),
            json!({"term": src, "obligations": obs}),
        ));
    }
    let max_depth = g.depth.unwrap_or(3) as usize;
    Ok(match find_maltsev_term(&th, &s, max_depth, proof_depth) {
        MaltsevSearch::Found {
            witness,
            candidates_tried,
        } => {
            let p = witness.p.display(&xyz(&s)).to_string();
            let (_, body, obs) = obligations_out(&witness.proofs);
            Out::new(
                TRUE,
                format!("Found p(x,y,z) = {p} after {candidates_tried} candidates\n{body}"),
                json!({"status": "Found", "term": p, "candidates_tried": candidates_tried, "obligations": obs}),
            )
        }
        MaltsevSearch::NotFoundWithinBound { rejected } => {
            let mut text = format!("NotFoundWithinBound (depth {max_depth})\n");
            let mut items = Vec::new();
            let mut all_refuted = true;
            for (t, j) in &rejected {
                let shown = t.display(&xyz(&s)).to_string();
                let detail = match j {
                    Judgment::Refuted { model, .. } => format!("Refuted in a model of sizes {:?}", model.sizes()),
                    other => {
                        all_refuted = false;
                        other.status().to_string()
                    }
                };
                writeln!(text, "  {shown}: {detail}").unwrap();
                items.push(json!({"term": shown, "status": j.status()}));
            }
            Out::new(
                if all_refuted { FALSE } else { UNKNOWN },
                text,
                json!({"status": "NotFoundWithinBound", "depth": max_depth, "rejected": items}),
            )
        }
    })
}

fn maltsev_rel(g: &Global, theory: &str, sort: &str) -> Result<Out> {
    let th = load_theory(theory)?;
    let s = SortId::new(sort);
    if !th.has_sort(&s) {
        return Err(Error::UnknownSort(sort.into()));
    }
    Ok(match maltsev_via_relation(&th, &s, g.depth.unwrap_or(3))? {
        ViaRelation::Found { p, witness, saturated } => {
            let shown = p.display(&xyz(&s)).to_string();
            let (code, body, obs) = report_out(&witness, |w| &w.proofs);
            Out::new(
                code,
                format!("Found p(x,y,z) = {shown} (free model saturated: {saturated})\n{body}"),
                json!({"status": "Found", "term": shown, "saturated": saturated, "obligations": obs}),
            )
        }
        ViaRelation::NotFound { relation, saturated } => {
            let pairs: Vec<String> = relation.iter().map(|(a, b)| format!("({a}, {b})")).collect();
            Out::new(
                if saturated { FALSE } else { UNKNOWN },
                format!("NotFound: (y, x) is not in {{{}}} (saturated: {saturated})\n", pairs.join(", ")),
                json!({"status": "NotFound", "relation": relation, "saturated": saturated}),
            )
        }
    })
}

fn regwitness(g: &Global, theory: &str, theta: &str, pi: &str, alphas: &[String], mus: &[String]) -> Result<Out> {
    let th = load_theory(theory)?;
    let cand = RegularityCandidate {
        theta: parse_typed_term(&th, theta)?,
        pi: parse_typed_term(&th, pi)?,
        alphas: alphas.iter().map(|a| parse_typed_term(&th, a)).collect::<Result<_>>()?,
        mus: mus.iter().map(|m| parse_typed_term(&th, m)).collect::<Result<_>>()?,
    };
    let r = verify_regularity_witness(&th, &cand, g.depth.unwrap_or(4));
    let (code, body, obs) = report_out(&r, |w| &w.proofs);
    Ok(Out::new(code, format!("theta = {theta}\n{body}"), json!({"theta": theta, "obligations": obs})))
}

fn model_summary(m: &FiniteModel) -> Value {
    json!({"sizes": m.sizes(), "carriers": m.carriers()})
}

fn theory_ref(m: &FiniteModel) -> String {
    let name = &m.theory().name;
    if fixtures::by_name(name).is_some_and(|t| t.as_ref() == m.theory().as_ref()) {
        name.clone()
    } else {
        format!("{name}.eat")
    }
}

fn model_out(g: &Global, m: &Arc<FiniteModel>, extra: Value) -> Result<Out> {
    write_out(g, &model_to_json(m, &theory_ref(m)))?;
    let mut json = model_summary(m);
    if let (Value::Object(a), Value::Object(b)) = (&mut json, extra) {
        a.extend(b);
    }
    Ok(Out::new(TRUE, m.to_string(), json))
}

fn model_cmd(g: &Global, cmd: ModelCmd) -> Result<Out> {
    match cmd {
        ModelCmd::Validate { model } => {
            let m = load_model_unvalidated(&model)?;
            let report = validate_model(&m);
            let mut text = String::new();
            for v in &report.violations {
                writeln!(text, "violation: {v}").unwrap();
            }
            if report.is_ok() {
                text.push_str("valid\n");
            }
            let json = json!({"valid": report.is_ok(), "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>()});
            Ok(Out::new(if report.is_ok() { TRUE } else { FALSE }, text, json))
        }
        ModelCmd::Product { a, b } => {
            let p = product(&load_model(&a)?, &load_model(&b)?)?;
            model_out(g, &p.model, json!({}))
        }
        ModelCmd::Pullback { f, g: gg } => {
            let pb = pullback(&load_hom(&f)?, &load_hom(&gg)?)?;
            model_out(g, &pb.model, json!({}))
        }
        ModelCmd::Equalizer { f, g: gg } => {
            let e = equalizer(&load_hom(&f)?, &load_hom(&gg)?)?;
            model_out(g, &e.model, json!({}))
        }
        ModelCmd::Image { f } => {
            let f = load_hom(&f)?;
            let im = image(&f)?;
            let facts = json!({
                "surjective": is_strong_epi(&f) && im.sub.is_full(),
                "mono": is_mono(&f),
                "strong_epi": is_strong_epi(&f),
                "iso": is_iso(&f),
            });
            let mut out = model_out(g, &im.model, facts.clone())?;
            writeln!(out.text, "f mono: {}, strong epi: {}, iso: {}", is_mono(&f), is_strong_epi(&f), is_iso(&f)).unwrap();
            Ok(out)
        }
        ModelCmd::Coproduct { models } => {
            let ms = models.iter().map(|m| load_model(m)).collect::<Result<Vec<_>>>()?;
            let c = coproduct(&ms, g.depth.unwrap_or(3))?;
            let mut out = model_out(g, &c.bounded.model, json!({"saturated": c.bounded.saturated}))?;
            writeln!(out.text, "saturated: {}", c.bounded.saturated).unwrap();
            out.code = if c.bounded.saturated { TRUE } else { UNKNOWN };
            Ok(out)
        }
    }
}

fn bool_out(b: bool, label: &str, json: Value) -> Out {
    Out::new(if b { TRUE } else { FALSE }, format!("{label}: {b}\n"), json)
}

fn rel_cmd(cmd: RelCmd) -> Result<Out> {
    match cmd {
        RelCmd::Compose { r, s } => {
            let c = compose(&load_relation(&r)?, &load_relation(&s)?)?;
            let json = json!({"pairs": pairs_json(&c)});
            Ok(Out::new(TRUE, c.to_string(), json))
        }
        RelCmd::Difunctional { r } => {
            let rel = load_relation(&r)?;
            Ok(match rel.difunctionality_witness() {
                None => bool_out(true, "difunctional", json!({"difunctional": true})),
                Some(w) => {
                    let l = |m: &FiniteModel, e| m.label(w.sort, e).to_string();
                    let quad = [l(&rel.left, w.x), l(&rel.right, w.y), l(&rel.right, w.y2), l(&rel.left, w.x2)];
                    Out::new(
                        FALSE,
                        format!(
                            "difunctional: false\nwitness: {} R {}, {} R {}, {} R {} but not {} R {}\n",
                            quad[0], quad[1], quad[0], quad[2], quad[3], quad[2], quad[3], quad[1]
                        ),
                        json!({"difunctional": false, "witness": quad}),
                    )
                }
            })
        }
        RelCmd::Equiv { r } => {
            let rel = load_relation(&r)?;
            if !rel.is_endo() {
                return Err(Error::Invalid("equivalence checks need a relation on one model".into()));
            }
            let (re, sy, tr) = (rel.is_reflexive(), rel.is_symmetric(), rel.is_transitive());
            let eq = re && sy && tr;
            Ok(Out::new(
                if eq { TRUE } else { FALSE },
                format!("reflexive: {re}\nsymmetric: {sy}\ntransitive: {tr}\nequivalence: {eq}\n"),
                json!({"reflexive": re, "symmetric": sy, "transitive": tr, "equivalence": eq}),
            ))
        }
        RelCmd::Graphcheck { d, c, s } => {
            let ok = reflexive_graph_pullback_check(&load_hom(&d)?, &load_hom(&c)?, &load_hom(&s)?)?;
            Ok(bool_out(ok, "pullback leg is a strong epimorphism", json!({"strong_epi": ok})))
        }
    }
}

fn pairs_json(r: &Relation) -> Value {
    let th = r.left.theory();
    let mut map = serde_json::Map::new();
    for (s, set) in r.pairs.iter().enumerate() {
        let list: Vec<[String; 2]> = set
            .iter()
            .map(|&(a, b)| [r.left.label(s, a).to_string(), r.right.label(s, b).to_string()])
            .collect();
        map.insert(th.sorts()[s].to_string(), json!(list));
    }
    Value::Object(map)
}

fn coop(g: &Global, model: &str) -> Result<Out> {
    let x = load_model(model)?;
    let a = universal_approx_coop(&x, g.depth.unwrap_or(3))?;
    write_out(g, &model_to_json(&a.m, &theory_ref(&a.m)))?;
    let text = format!(
        "M(X) sizes: {:?}\na surjective: {}\na strong epi: {}\nsquare commutes: {}\n",
        a.m.sizes(),
        a.a_surjective,
        a.a_strong_epi,
        a.square_commutes
    );
    let json = json!({
        "m_sizes": a.m.sizes(),
        "a_surjective": a.a_surjective,
        "a_strong_epi": a.a_strong_epi,
        "square_commutes": a.square_commutes,
    });
    Ok(Out::new(if a.a_strong_epi { TRUE } else { FALSE }, text, json))
}

fn quotient(g: &Global, model: &str, theta: &str, tuple: &str) -> Result<Out> {
    let a = load_model(model)?;
    let th = a.theory().clone();
    let t = parse_typed_term(&th, theta)?;
    let labels: Vec<&str> = tuple.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if labels.len() != t.ctx.len() {
        return Err(Error::InvalidElement(format!("expected {} elements in the tuple", t.ctx.len())));
    }
    let elems = t
        .ctx
        .iter()
        .zip(&labels)
        .map(|((_, sort), l)| {
            let s = th.sort_index(sort).ok_or_else(|| Error::UnknownSort(sort.to_string()))?;
            a.find(s, l).ok_or_else(|| Error::InvalidElement(format!("{l} in sort {sort}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let dq = definedness_quotient(&a, &t, &elems, g.depth.unwrap_or(2))?;
    let m = &dq.bounded.model;
    write_out(g, &model_to_json(m, &theory_ref(m)))?;
    let strong = is_strong_epi(&dq.q);
    let text = format!(
        "{m}saturated: {}\ntheta defined: {}\nq strong epi: {strong}\n",
        dq.bounded.saturated,
        dq.theta_value.is_some()
    );
    let json = json!({
        "sizes": m.sizes(),
        "saturated": dq.bounded.saturated,
        "theta_defined": dq.theta_value.is_some(),
        "q_strong_epi": strong,
    });
    let code = if !dq.bounded.saturated { UNKNOWN } else if dq.theta_value.is_some() { TRUE } else { FALSE };
    Ok(Out::new(code, text, json))
}

fn cube(seed: u64, count: usize, counterexample: bool) -> Result<Out> {
    if counterexample {
        let c = set_cube_counterexample(&fixtures::gamma0());
        let o = points_cube_check(&c)?;
        let text = format!(
            "preconditions hold\nsource pullback size {}, target pullback size {}\nt strong epi: {}\n",
            o.left.model.total_size(),
            o.right.model.total_size(),
            o.t_strong_epi
        );
        return Ok(Out::new(
            if o.t_strong_epi { TRUE } else { FALSE },
            text,
            json!({"t_strong_epi": o.t_strong_epi}),
        ));
    }
    let th = fixtures::z2_vector_spaces();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..count {
        let o = points_cube_check(&random_z2_cube(&th, &mut rng))?;
        if !o.t_strong_epi {
            failures.push(i);
        }
    }
    Ok(Out::new(
        if failures.is_empty() { TRUE } else { FALSE },
        format!("{count} cubes (seed {seed}), {} failures\n", failures.len()),
        json!({"seed": seed, "count": count, "failures": failures}),
    ))
}

fn load_fragment(path: Option<&str>) -> Result<GammaFragment> {
    match path {
        Some(p) => fragment_from_text(&read(p)?),
        None => Ok(GammaFragment::bootstrap()),
    }
}

fn fragment_out(g: &Global, f: &GammaFragment) -> Result<Out> {
    let text = f.emit();
    let th = &f.theory;
    let json = json!({
        "sorts": th.sorts().len(),
        "ops": th.ops().len(),
        "equations": th.equations().len(),
        "steps": f.steps(),
    });
    if g.out.is_some() {
        write_out(g, &text)?;
        let summary = format!(
            "{} sorts, {} ops, {} equations\n",
            th.sorts().len(),
            th.ops().len(),
            th.equations().len()
        );
        return Ok(Out::new(TRUE, summary, json));
    }
    Ok(Out::new(TRUE, text, json))
}

fn gammamal(g: &Global, cmd: GammaCmd) -> Result<Out> {
    match cmd {
        GammaCmd::Delta { fragment, sorts } => {
            let f = load_fragment(fragment.as_deref())?;
            let sorts: Vec<SortId> = sorts.iter().map(|s| SortId::new(s.as_str())).collect();
            fragment_out(g, &f.delta_step(&sorts)?)
        }
        GammaCmd::Theta { fragment, terms } => {
            let f = load_fragment(fragment.as_deref())?;
            let thetas = terms.iter().map(|t| f.parse_theta(t)).collect::<Result<Vec<_>>>()?;
            fragment_out(g, &f.gamma_step_for_terms(&thetas)?)
        }
        GammaCmd::Closure { deltas, thetas } => {
            let reqs: Vec<Request> = deltas
                .iter()
                .map(|d| Request::delta(d.as_str()))
                .chain(thetas.iter().map(|t| Request::theta(t.as_str())))
                .collect();
            fragment_out(g, &fragment_closure(&reqs)?)
        }
        GammaCmd::Verify { fragment, thetas } => {
            let f = load_fragment(Some(&fragment))?;
            let depth = g.depth.unwrap_or(4);
            let mut code = TRUE;
            let mut text = String::new();
            let mut items = Vec::new();
            let mut merge = |c: u8| {
                code = match (code, c) {
                    (FALSE, _) | (_, FALSE) => FALSE,
                    (UNKNOWN, _) | (_, UNKNOWN) => UNKNOWN,
                    _ => TRUE,
                }
            };
            for (sort, r) in f.verify_maltsev_witnesses(depth)? {
                let (c, body, obs) = report_out(&r, |w| &w.proofs);
                merge(c);
                writeln!(text, "maltsev {sort}: p = pi@{sort}(rho@{sort}(x,y,z))\n{body}").unwrap();
                items.push(json!({"kind": "maltsev", "sort": sort.to_string(), "obligations": obs}));
            }
            for t in &thetas {
                let theta = f.parse_theta(t)?;
                let r = f.verify_regular_witnesses(&theta, depth)?;
                let (c, body, obs) = report_out(&r, |w| &w.proofs);
                merge(c);
                writeln!(text, "regularity {t}\n{body}").unwrap();
                items.push(json!({"kind": "regularity", "theta": t, "obligations": obs}));
            }
            let (_, missing) = f.delta_coverage();
            if !missing.is_empty() {
                let names: Vec<String> = missing.iter().map(|s| s.to_string()).collect();
                writeln!(text, "sorts without their apparatus: {}", names.join(", ")).unwrap();
            }
            Ok(Out::new(code, text, json!({"results": items})))
        }
    }
}
