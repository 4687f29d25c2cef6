//! Finite fragments of the theory whose models form the free regular
//! Mal'tsev setting: starting from one sort `star`, a delta step on a sort
//! `A` adds sorts `A@0`, `A@1` with operations `alpha@A`, `rho@A`, `eta@A`,
//! `eps@A` and a partial `pi@A`; a theta step for a term `C` adds sorts
//! `th[C]`, `th'[C]` with `alpha_th[C]`, `mu_th[C]`, `eta_th[C]`,
//! `eps_th[C]` and a partial `pi_th[C]`. Steps are generated on demand.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::engine::Limits;
use crate::error::{Error, Result};
use crate::maltsev::{self, FailureReport, MaltsevWitness, RegularityCandidate, RegularityWitness};
use crate::text::{parse_raw_typed, parse_theory, print_theory};
use crate::theory::{
    check_sorting, Context, Equation, OpSymbol, RawTerm, SortId, Term, Theory, TypedTerm,
};

pub const BASE_SORT: &str = "star";
pub const TOOL_TAG: &str = concat!("eatwb ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Base,
    DeltaSort(SortId, u8),
    ThetaSort(String),
    ThetaPrimeSort(String),
}

/// A requested construction step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Request {
    Delta(SortId),
    /// A term in the text syntax `ctx |- term`.
    Theta(String),
}

impl Request {
    pub fn theta(src: impl Into<String>) -> Self {
        Request::Theta(src.into())
    }

    pub fn delta(sort: impl Into<SortId>) -> Self {
        Request::Delta(sort.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaFragment {
    pub theory: Theory,
    pub level_of_sort: BTreeMap<SortId, usize>,
    pub origin: BTreeMap<SortId, Origin>,
    pub requested_terms: Vec<TypedTerm>,
    steps: Vec<String>,
}

fn split_suffix(name: &str) -> Option<(&str, u8)> {
    let (base, tail) = name.rsplit_once('@')?;
    if base.matches('[').count() != base.matches(']').count() {
        return None;
    }
    match tail {
        "0" => Some((base, 0)),
        "1" => Some((base, 1)),
        _ => None,
    }
}

fn bracket_body<'a>(name: &'a str, prefix: &str) -> Option<&'a str> {
    name.strip_prefix(prefix)?.strip_suffix(']')
}

const DELTA_OPS: [&str; 5] = ["alpha", "rho", "eta", "eps", "pi"];
const THETA_OPS: [&str; 5] = ["alpha", "mu", "eta", "eps", "pi"];

/// The step that introduces a sort, if any.
fn sort_dependency(s: &str) -> Option<Dep> {
    if let Some((base, _)) = split_suffix(s) {
        return Some(Dep::Delta(base.to_string()));
    }
    if let Some(c) = bracket_body(s, "th[").or_else(|| bracket_body(s, "th'[")) {
        return Some(Dep::Theta(c.to_string()));
    }
    None
}

/// The step that introduces an operation symbol, if any.
fn op_dependency(op: &str) -> Option<Dep> {
    for p in DELTA_OPS {
        if let Some(base) = op.strip_prefix(p).and_then(|r| r.strip_prefix('@')) {
            return Some(Dep::Delta(base.to_string()));
        }
    }
    for p in THETA_OPS {
        if let Some(c) = op.strip_prefix(p).and_then(|r| bracket_body(r, "_th[")) {
            return Some(Dep::Theta(c.to_string()));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Dep {
    Delta(String),
    Theta(String),
}

fn raw_symbols(raw: &RawTerm, ctx: &Context, out: &mut Vec<String>) {
    match &raw.args {
        None if ctx.index_of(&raw.head).is_some() => {}
        None => out.push(raw.head.clone()),
        Some(args) => {
            out.push(raw.head.clone());
            for a in args {
                raw_symbols(a, ctx, out);
            }
        }
    }
}

impl Default for GammaFragment {
    fn default() -> Self {
        Self::bootstrap()
    }
}

impl GammaFragment {
    /// One sort and nothing else: models are sets.
    pub fn bootstrap() -> Self {
        let mut theory = Theory::new("gamma_mal");
        theory.add_sort(BASE_SORT).expect("fresh theory");
        let mut f = GammaFragment {
            theory,
            level_of_sort: BTreeMap::from([(SortId::new(BASE_SORT), 0)]),
            origin: BTreeMap::from([(SortId::new(BASE_SORT), Origin::Base)]),
            requested_terms: Vec::new(),
            steps: Vec::new(),
        };
        f.stamp();
        f
    }

    fn stamp(&mut self) {
        let mut p = TOOL_TAG.to_string();
        for s in &self.steps {
            p.push_str("; ");
            p.push_str(s);
        }
        self.theory.set_provenance(Some(p));
    }

    pub fn theory_arc(&self) -> Arc<Theory> {
        Arc::new(self.theory.clone())
    }

    pub fn level(&self, s: &SortId) -> Option<usize> {
        self.level_of_sort.get(s).copied()
    }

    /// Level of the first theory in the chain whose signature contains
    /// the sort (for sorts) in its delta half.
    fn sig_level_of_sort(&self, s: &SortId) -> usize {
        match self.origin.get(s) {
            Some(Origin::Base) | None => 1,
            Some(Origin::DeltaSort(..)) => self.level(s).unwrap_or(1),
            Some(_) => self.level(s).unwrap_or(0) + 1,
        }
    }

    fn sig_level_of_op(&self, op: &str) -> usize {
        match op_dependency(op) {
            Some(Dep::Delta(base)) => self.level(&SortId::new(base)).unwrap_or(0) + 1,
            Some(Dep::Theta(c)) => self.level(&SortId::new(format!("th[{c}]"))).unwrap_or(0) + 1,
            None => 1,
        }
    }

    /// Level of the theta sorts generated for `theta`.
    pub fn theta_level(&self, theta: &TypedTerm) -> usize {
        let mut lvl = 1;
        for (_, s) in theta.ctx.iter() {
            lvl = lvl.max(self.sig_level_of_sort(s));
        }
        if let Ok(s) = self.theory.sort_of(&theta.ctx, &theta.term) {
            lvl = lvl.max(self.sig_level_of_sort(&s));
        }
        for op in theta.term.ops() {
            lvl = lvl.max(self.sig_level_of_op(&op));
        }
        lvl
    }

    pub fn has_delta(&self, s: &SortId) -> bool {
        self.theory.has_sort(&SortId::new(format!("{s}@0")))
    }

    /// Apply the delta step to each sort in `sorts`.
    pub fn delta_step(&self, sorts: &[SortId]) -> Result<GammaFragment> {
        let mut f = self.clone();
        for s in sorts {
            let lvl = f
                .level(s)
                .ok_or_else(|| Error::LevelError(format!("sort `{s}` is not in the fragment")))?;
            if f.has_delta(s) {
                return Err(Error::LevelError(format!("sort `{s}` already has its delta step")));
            }
            let s0 = SortId::new(format!("{s}@0"));
            let s1 = SortId::new(format!("{s}@1"));
            f.theory.add_sort(s0.clone())?;
            f.theory.add_sort(s1.clone())?;
            let name = |p: &str| format!("{p}@{s}");
            f.theory.add_op(OpSymbol::total(name("alpha"), vec![s.clone()], s0.clone()))?;
            f.theory.add_op(OpSymbol::total(name("rho"), vec![s.clone(); 3], s0.clone()))?;
            f.theory.add_op(OpSymbol::total(name("eta"), vec![s0.clone()], s1.clone()))?;
            f.theory.add_op(OpSymbol::total(name("eps"), vec![s0.clone()], s1.clone()))?;
            let x1 = Term::var(0);
            f.theory.add_op(OpSymbol::partial(
                name("pi"),
                vec![s0.clone()],
                s.clone(),
                vec![(Term::app(name("eta"), vec![x1.clone()]), Term::app(name("eps"), vec![x1]))],
            ))?;
            let (x, y) = (Term::var(0), Term::var(1));
            let xy = Context::from_pairs([("x", s.clone()), ("y", s.clone())]);
            let cx = Context::from_pairs([("x", s.clone())]);
            let cx0 = Context::from_pairs([("x", s0.clone())]);
            let a = |t: Term| Term::app(name("alpha"), vec![t]);
            let rho = |u: &Term, v: &Term, w: &Term| Term::app(name("rho"), vec![u.clone(), v.clone(), w.clone()]);
            let eqs = [
                Equation::new(xy.clone(), rho(&x, &y, &y), a(x.clone())),
                Equation::new(xy, rho(&x, &x, &y), a(y.clone())),
                Equation::new(
                    cx.clone(),
                    Term::app(name("eta"), vec![a(x.clone())]),
                    Term::app(name("eps"), vec![a(x.clone())]),
                ),
                Equation::new(cx, Term::app(name("pi"), vec![a(x.clone())]), x.clone()),
                Equation::new(cx0, a(Term::app(name("pi"), vec![x.clone()])), x.clone()),
            ];
            for e in eqs {
                f.theory.add_equation(e);
            }
            f.level_of_sort.insert(s0.clone(), lvl + 1);
            f.level_of_sort.insert(s1.clone(), lvl + 1);
            f.origin.insert(s0, Origin::DeltaSort(s.clone(), 0));
            f.origin.insert(s1, Origin::DeltaSort(s.clone(), 1));
            f.steps.push(format!("delta {s}"));
        }
        f.stamp();
        Ok(f)
    }

    /// Apply the theta step for each term; terms already present are skipped.
    pub fn gamma_step_for_terms(&self, thetas: &[TypedTerm]) -> Result<GammaFragment> {
        let mut f = self.clone();
        for theta in thetas {
            let result = f.theory.sort_of(&theta.ctx, &theta.term)?;
            let c = theta.canonical_string();
            let st = SortId::new(format!("th[{c}]"));
            if f.theory.has_sort(&st) {
                continue;
            }
            let lvl = f.theta_level(theta);
            let sp = SortId::new(format!("th'[{c}]"));
            f.theory.add_sort(st.clone())?;
            f.theory.add_sort(sp.clone())?;
            let name = |p: &str| format!("{p}_th[{c}]");
            let arg_sorts = theta.ctx.sorts();
            f.theory.add_op(OpSymbol::total(name("alpha"), vec![result.clone()], st.clone()))?;
            f.theory.add_op(OpSymbol::total(name("mu"), arg_sorts, st.clone()))?;
            f.theory.add_op(OpSymbol::total(name("eta"), vec![st.clone()], sp.clone()))?;
            f.theory.add_op(OpSymbol::total(name("eps"), vec![st.clone()], sp.clone()))?;
            let x1 = Term::var(0);
            f.theory.add_op(OpSymbol::partial(
                name("pi"),
                vec![st.clone()],
                result.clone(),
                vec![(Term::app(name("eta"), vec![x1.clone()]), Term::app(name("eps"), vec![x1]))],
            ))?;
            let x = Term::var(0);
            let a = |t: Term| Term::app(name("alpha"), vec![t]);
            let cx = Context::from_pairs([("x", result.clone())]);
            let ct = Context::from_pairs([("x", st.clone())]);
            let canon = theta.ctx.canonical();
            let vars: Vec<Term> = (0..canon.len()).map(Term::var).collect();
            let eqs = [
                Equation::new(
                    cx.clone(),
                    Term::app(name("eta"), vec![a(x.clone())]),
                    Term::app(name("eps"), vec![a(x.clone())]),
                ),
                Equation::new(cx, Term::app(name("pi"), vec![a(x.clone())]), x.clone()),
                Equation::new(ct, a(Term::app(name("pi"), vec![x.clone()])), x.clone()),
                Equation::new(canon, a(theta.term.clone()), Term::app(name("mu"), vars)),
            ];
            for e in eqs {
                f.theory.add_equation(e);
            }
            f.level_of_sort.insert(st.clone(), lvl);
            f.level_of_sort.insert(sp.clone(), lvl);
            f.origin.insert(st, Origin::ThetaSort(c.clone()));
            f.origin.insert(sp, Origin::ThetaPrimeSort(c.clone()));
            f.requested_terms.push(TypedTerm::new(theta.ctx.canonical(), theta.term.clone()));
            f.steps.push(format!("theta {c}"));
        }
        f.stamp();
        Ok(f)
    }

    /// Parse a theta request against this fragment.
    pub fn parse_theta(&self, src: &str) -> Result<TypedTerm> {
        let (ctx, raw) = parse_raw_typed(src)?;
        for (_, s) in ctx.iter() {
            if !self.theory.has_sort(s) {
                return Err(Error::UnknownSort(s.to_string()));
            }
        }
        let (term, _) = check_sorting(&self.theory, &ctx, &raw)?;
        Ok(TypedTerm::new(ctx, term))
    }

    /// Whether the theta step for `theta` is present.
    pub fn has_theta(&self, theta: &TypedTerm) -> bool {
        self.theory.has_sort(&SortId::new(format!("th[{}]", theta.canonical_string())))
    }

    /// Sorts with and without their delta apparatus, in theory order.
    pub fn delta_coverage(&self) -> (Vec<SortId>, Vec<SortId>) {
        self.theory
            .sorts()
            .iter()
            .cloned()
            .partition(|s| ["alpha", "rho", "pi"].iter().all(|p| self.theory.op(&format!("{p}@{s}")).is_some()))
    }

    /// Check the Mal'tsev term `pi@A(rho@A(x,y,z))` for every sort `A` that
    /// has its delta step.
    pub fn verify_maltsev_witnesses(&self, depth: u32) -> Result<Vec<(SortId, Result<MaltsevWitness, FailureReport>)>> {
        let (done, missing) = self.delta_coverage();
        if done.is_empty() {
            return Err(Error::IncompleteFragment(missing.iter().map(|s| s.to_string()).collect()));
        }
        let th = self.theory_arc();
        let prover = crate::engine::Prover::new(th, Limits::with_depth(depth));
        Ok(done
            .into_iter()
            .map(|s| {
                let p = Term::app(
                    format!("pi@{s}"),
                    vec![Term::app(format!("rho@{s}"), vec![Term::var(0), Term::var(1), Term::var(2)])],
                );
                let r = maltsev::verify_maltsev_with(&prover, &s, &p);
                (s, r)
            })
            .collect())
    }

    /// Check the regularity schema for `theta` with `pi_th`, `alpha_th`, `mu_th`.
    pub fn verify_regular_witnesses(&self, theta: &TypedTerm, depth: u32) -> Result<Result<RegularityWitness, FailureReport>> {
        if !self.has_theta(theta) {
            return Err(Error::MissingTheta(theta.canonical_string()));
        }
        let c = theta.canonical_string();
        let th = self.theory_arc();
        let result = th.sort_of(&theta.ctx, &theta.term)?;
        let st = SortId::new(format!("th[{c}]"));
        let n = theta.ctx.len();
        let cand = RegularityCandidate {
            theta: TypedTerm::new(theta.ctx.canonical(), theta.term.clone()),
            pi: TypedTerm::new(
                Context::positional(&[st]),
                Term::app(format!("pi_th[{c}]"), vec![Term::var(0)]),
            ),
            alphas: vec![TypedTerm::new(
                Context::positional(&[result]),
                Term::app(format!("alpha_th[{c}]"), vec![Term::var(0)]),
            )],
            mus: vec![TypedTerm::new(
                theta.ctx.canonical(),
                Term::app(format!("mu_th[{c}]"), (0..n).map(Term::var).collect()),
            )],
        };
        Ok(maltsev::verify_regularity_witness(&th, &cand, depth))
    }

    /// Text form, with a provenance line recording the steps applied.
    pub fn emit(&self) -> String {
        print_theory(&self.theory)
    }

    /// The steps recorded in the provenance line, in application order.
    pub fn steps(&self) -> &[String] {
        &self.steps
    }
}

/// The smallest fragment containing every request and its dependencies,
/// with steps applied in level order.
pub fn fragment_closure(requests: &[Request]) -> Result<GammaFragment> {
    let mut f = GammaFragment::bootstrap();
    let mut pending: Vec<Request> = requests.to_vec();
    // Repeatedly apply whichever pending step comes first in level order,
    // after queueing its missing dependencies.
    let mut guard = 0;
    while !pending.is_empty() {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::LevelError("request dependencies do not resolve".into()));
        }
        // expand dependencies of the first unresolved request
        let mut added = false;
        for r in pending.clone() {
            for d in request_deps(&r)? {
                let req = match &d {
                    Dep::Delta(s) => Request::Delta(SortId::new(s.clone())),
                    Dep::Theta(c) => Request::Theta(theta_src(c)),
                };
                let present = match &d {
                    Dep::Delta(s) => f.has_delta(&SortId::new(s.clone())),
                    Dep::Theta(c) => f.theory.has_sort(&SortId::new(format!("th[{c}]"))),
                };
                if !present && !pending.contains(&req) {
                    pending.push(req);
                    added = true;
                }
            }
        }
        if added {
            continue;
        }
        // pick the applicable request with the smallest order key
        let mut best: Option<(usize, String, usize)> = None;
        for (i, r) in pending.iter().enumerate() {
            if let Some((key, canon)) = order_key(&f, r)? {
                if best.as_ref().is_none_or(|(k, c, _)| (key, &canon) < (*k, c)) {
                    best = Some((key, canon, i));
                }
            }
        }
        let Some((_, _, i)) = best else {
            return Err(Error::LevelError("no request is applicable".into()));
        };
        let r = pending.remove(i);
        f = match r {
            Request::Delta(s) if f.has_delta(&s) => f,
            Request::Delta(s) => f.delta_step(&[s])?,
            Request::Theta(src) => {
                let t = f.parse_theta(&src)?;
                f.gamma_step_for_terms(&[t])?
            }
        };
        // drop requests that became satisfied
        pending.retain(|r| match r {
            Request::Delta(s) => !f.has_delta(s),
            Request::Theta(src) => f.parse_theta(src).map(|t| !f.has_theta(&t)).unwrap_or(true),
        });
    }
    Ok(f)
}

fn theta_src(canon: &str) -> String {
    // canonical "x1:S1,x2:S2|body" is valid request syntax after swapping the bar
    match split_top_bar(canon) {
        Some((ctx, body)) => format!("{} |- {}", ctx.replace(',', ", "), body),
        None => canon.to_string(),
    }
}

fn split_top_bar(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            '|' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

fn request_deps(r: &Request) -> Result<Vec<Dep>> {
    let mut out = Vec::new();
    match r {
        Request::Delta(s) => out.extend(sort_dependency(s.as_str())),
        Request::Theta(src) => {
            let (ctx, raw) = parse_raw_typed(src)?;
            for (_, s) in ctx.iter() {
                out.extend(sort_dependency(s.as_str()));
            }
            let mut syms = Vec::new();
            raw_symbols(&raw, &ctx, &mut syms);
            for op in syms {
                out.extend(op_dependency(&op));
            }
        }
    }
    Ok(out)
}

/// Order key of a request if all its dependencies are present.
fn order_key(f: &GammaFragment, r: &Request) -> Result<Option<(usize, String)>> {
    Ok(match r {
        Request::Delta(s) => f.level(s).map(|l| (2 * l + 1, s.to_string())),
        Request::Theta(src) => match f.parse_theta(src) {
            Ok(t) => Some((2 * f.theta_level(&t), t.canonical_string())),
            Err(_) => None,
        },
    })
}

/// Parse the step list from a fragment's provenance line.
pub fn requests_from_provenance(p: &str) -> Result<Vec<Request>> {
    let mut parts = p.split("; ");
    match parts.next() {
        Some(tag) if tag.starts_with("eatwb ") => {}
        _ => return Err(Error::Invalid("provenance does not come from this tool".into())),
    }
    parts
        .map(|s| {
            if let Some(sort) = s.strip_prefix("delta ") {
                Ok(Request::Delta(SortId::new(sort)))
            } else if let Some(c) = s.strip_prefix("theta ") {
                Ok(Request::Theta(theta_src(c)))
            } else {
                Err(Error::Invalid(format!("unrecognised provenance step `{s}`")))
            }
        })
        .collect()
}

/// Rebuild a fragment from emitted text, checking that the text is exactly
/// what its recorded steps produce.
pub fn fragment_from_text(src: &str) -> Result<GammaFragment> {
    let t = parse_theory(src)?;
    let p = t
        .provenance()
        .ok_or_else(|| Error::Invalid("fragment has no provenance line".into()))?;
    let f = fragment_closure(&requests_from_provenance(p)?)?;
    if f.theory != t {
        return Err(Error::Invalid("fragment text differs from what its provenance generates".into()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::validate_theory;

    fn counts(t: &Theory) -> (usize, usize, usize) {
        (t.sorts().len(), t.ops().len(), t.equations().len())
    }

    #[test]
    fn bootstrap_is_sets() {
        let f = GammaFragment::bootstrap();
        assert_eq!(counts(&f.theory), (1, 0, 0));
        assert_eq!(f.level(&SortId::new("star")), Some(0));
        assert!(validate_theory(&f.theory).is_ok());
    }

    #[test]
    fn delta_step_counts() {
        let f = GammaFragment::bootstrap().delta_step(&[SortId::new("star")]).unwrap();
        assert_eq!(counts(&f.theory), (3, 5, 5));
        let g = f.delta_step(&["star@0".into(), "star@1".into()]).unwrap();
        assert_eq!(counts(&g.theory), (7, 15, 15));
        assert_eq!(f.delta_step(&[]).unwrap().theory, f.theory);
        assert!(matches!(f.delta_step(&["star".into()]), Err(Error::LevelError(_))));
        assert!(validate_theory(&g.theory).is_ok());
    }

    #[test]
    fn theta_step_counts_and_idempotence() {
        let f = fragment_closure(&[Request::delta("star")]).unwrap();
        let t = f.parse_theta("x:star@0 |- pi@star(x)").unwrap();
        let g = f.gamma_step_for_terms(std::slice::from_ref(&t)).unwrap();
        assert_eq!(counts(&g.theory), (5, 10, 9));
        assert_eq!(g.gamma_step_for_terms(&[t]).unwrap(), g);
        assert!(validate_theory(&g.theory).is_ok());
        assert_eq!(g.level(&SortId::new("th[x1:star@0|pi@star(x1)]")), Some(1));
    }

    #[test]
    fn closure_pulls_in_dependencies() {
        let f = fragment_closure(&[Request::theta("x:star, y:star, z:star |- pi@star(rho@star(x,y,z))")]).unwrap();
        assert!(f.has_delta(&SortId::new("star")));
        assert_eq!(f.steps()[0], "delta star");
        assert_eq!(fragment_closure(&[]).unwrap(), GammaFragment::bootstrap());
    }

    #[test]
    fn emitted_text_round_trips() {
        let f = fragment_closure(&[Request::delta("star"), Request::theta("x:star |- alpha@star(x)")]).unwrap();
        let text = f.emit();
        let g = fragment_from_text(&text).unwrap();
        assert_eq!(g.emit(), text);
    }

    #[test]
    fn tampered_fragment_is_rejected() {
        let f = fragment_closure(&[Request::delta("star")]).unwrap();
        let text = f.emit().replace("eq x:star |- pi@star(alpha@star(x)) = x;\n", "");
        assert!(fragment_from_text(&text).is_err());
    }

    #[test]
    fn no_delta_apparatus_is_incomplete() {
        let f = GammaFragment::bootstrap();
        assert_eq!(f.verify_maltsev_witnesses(4).unwrap_err(), Error::IncompleteFragment(vec!["star".into()]));
    }

    #[test]
    fn delta_fragment_proves_maltsev_obligations() {
        let f = fragment_closure(&[Request::delta("star")]).unwrap();
        let results = f.verify_maltsev_witnesses(4).unwrap();
        assert_eq!(results.len(), 1);
        let w = results[0].1.as_ref().unwrap();
        assert_eq!(w.proofs.len(), 4);
    }

    #[test]
    fn regularity_schema_for_basic_thetas() {
        for src in ["x:star@0 |- pi@star(x)", "x:star |- alpha@star(x)", "x:star, y:star, z:star |- rho@star(x,y,z)"] {
            let f = fragment_closure(&[Request::theta(src)]).unwrap();
            let t = f.parse_theta(src).unwrap();
            let w = f.verify_regular_witnesses(&t, 4).unwrap();
            assert!(w.is_ok(), "{src}: {w:?}");
        }
        let f = fragment_closure(&[Request::delta("star")]).unwrap();
        let t = f.parse_theta("x:star |- alpha@star(x)").unwrap();
        assert!(matches!(f.verify_regular_witnesses(&t, 4), Err(Error::MissingTheta(_))));
    }
}
