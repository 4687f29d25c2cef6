//! Everywhere-definedness, theoremhood and bounded presented models.
//!
//! All three run the congruence closure of [`crate::egraph`] over terms in
//! a finite context of generators, bounded by term depth. Theoremhood is
//! undecidable in general, so proofs come back as a three-valued
//! [`Judgment`]: a replayable proof, a finite countermodel, or Unknown.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::egraph::{EGraph, Id, Trace};
use crate::enumerate::{all_models, DEFAULT_SEARCH_BUDGET};
use crate::error::{Error, Result};
use crate::model::{evaluate_term, Elem, FiniteModel, Homomorphism, Tuples};
use crate::theory::{Context, Equation, Term, Theory};

/// Environment variable overriding the default class cap.
pub const BUDGET_ENV: &str = "EATWB_BUDGET";

/// Search bounds shared by the engine entry points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    pub depth: u32,
    pub class_cap: usize,
    pub refute_size: usize,
    pub search_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        let class_cap = std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(5000);
        Limits {
            depth: 6,
            class_cap,
            refute_size: 3,
            search_budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

impl Limits {
    pub fn with_depth(depth: u32) -> Self {
        Limits { depth, ..Self::default() }
    }
}

/// How one node of a term was shown to be everywhere defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Projection(usize),
    Total(String),
    /// A partial symbol together with its Def instances, each a theorem.
    Partial(String, Vec<(Term, Term)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    pub term: Term,
    pub rule: Rule,
}

/// Bottom-up rule applications plus the equational trace that justifies
/// the Def instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub context: Context,
    pub steps: Vec<DerivationStep>,
    pub trace: Trace,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let t = s.term.display(&self.context);
            match &s.rule {
                Rule::Projection(_) => writeln!(f, "projection {t}")?,
                Rule::Total(_) => writeln!(f, "total {t}")?,
                Rule::Partial(_, defs) => {
                    let ds: Vec<String> = defs
                        .iter()
                        .map(|(l, r)| format!("{} = {}", l.display(&self.context), r.display(&self.context)))
                        .collect();
                    writeln!(f, "partial {t} by {}", ds.join(", "))?
                }
            }
        }
        for l in self.trace.lines() {
            writeln!(f, "  {l}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Definedness {
    Yes(Derivation),
    Unknown { depth: u32 },
}

impl Definedness {
    pub fn is_yes(&self) -> bool {
        matches!(self, Definedness::Yes(_))
    }
}

/// Decide whether `theta` (over `ctx`) is everywhere defined, using only
/// theorems established within `depth`.
pub fn everywhere_defined(theory: &Arc<Theory>, ctx: &Context, theta: &Term, depth: u32) -> Definedness {
    everywhere_defined_with(theory, ctx, theta, &Limits::with_depth(depth))
}

pub fn everywhere_defined_with(theory: &Arc<Theory>, ctx: &Context, theta: &Term, limits: &Limits) -> Definedness {
    let unknown = Definedness::Unknown { depth: limits.depth };
    let mut g = EGraph::new(theory.clone(), ctx.clone(), limits.class_cap, true);
    // terms built from total symbols need no search
    let all_total = theta.ops().iter().all(|o| theory.op(o).is_some_and(|op| op.is_total()));
    if !all_total {
        if g.saturate(limits.depth, std::slice::from_ref(theta), false).is_err() {
            return unknown;
        }
        if g.lookup_term(theta).is_none() {
            return unknown;
        }
    }
    let mut steps: Vec<DerivationStep> = Vec::new();
    for sub in theta.subterms_postorder() {
        if steps.iter().any(|s| &s.term == sub) {
            continue;
        }
        let rule = match sub {
            Term::Var(i) => Rule::Projection(*i),
            Term::App(name, args) => {
                let op = theory.op(name).expect("well-sorted term");
                if op.is_total() {
                    Rule::Total(name.clone())
                } else {
                    let defs = op
                        .def_equations()
                        .iter()
                        .map(|e| (e.lhs.substitute(args), e.rhs.substitute(args)))
                        .collect();
                    Rule::Partial(name.clone(), defs)
                }
            }
        };
        steps.push(DerivationStep { term: sub.clone(), rule });
    }
    Definedness::Yes(Derivation {
        context: ctx.clone(),
        steps,
        trace: g.take_trace(),
    })
}

/// Result of a theoremhood query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Judgment {
    Proved(Trace),
    /// A valid model and an assignment at which both sides are defined and
    /// differ (and every assumed term is defined).
    Refuted {
        model: Arc<FiniteModel>,
        assignment: Vec<Elem>,
    },
    Unknown {
        depth: u32,
    },
}

impl Judgment {
    pub fn is_proved(&self) -> bool {
        matches!(self, Judgment::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Judgment::Refuted { .. })
    }

    pub fn status(&self) -> &'static str {
        match self {
            Judgment::Proved(_) => "Proved",
            Judgment::Refuted { .. } => "Refuted",
            Judgment::Unknown { .. } => "Unknown",
        }
    }
}

/// A prover bound to one theory; caches the small models used for
/// refutation across queries.
pub struct Prover {
    theory: Arc<Theory>,
    limits: Limits,
    models: OnceLock<Option<Vec<Arc<FiniteModel>>>>,
}

impl Prover {
    pub fn new(theory: Arc<Theory>, limits: Limits) -> Self {
        Prover {
            theory,
            limits,
            models: OnceLock::new(),
        }
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    /// Valid models with every carrier of size at most `refute_size`, if the
    /// enumeration fits in the search budget.
    pub fn small_models(&self) -> Option<&[Arc<FiniteModel>]> {
        self.models
            .get_or_init(|| {
                if self.limits.refute_size == 0 {
                    return None;
                }
                all_models(&self.theory, self.limits.refute_size, self.limits.search_budget)
            })
            .as_deref()
    }

    pub fn prove(&self, eq: &Equation) -> Judgment {
        self.prove_assuming(eq, &[])
    }

    /// Prove `eq` wherever both sides and every term in `assumed` are defined.
    pub fn prove_assuming(&self, eq: &Equation, assumed: &[Term]) -> Judgment {
        if let Some(trace) = self.try_prove(eq, assumed) {
            return Judgment::Proved(trace);
        }
        match self.refute(eq, assumed) {
            Some((model, assignment)) => Judgment::Refuted { model, assignment },
            None => Judgment::Unknown { depth: self.limits.depth },
        }
    }

    fn try_prove(&self, eq: &Equation, assumed: &[Term]) -> Option<Trace> {
        let mut g = EGraph::new(self.theory.clone(), eq.ctx.clone(), self.limits.class_cap, true);
        for t in assumed {
            g.force(t);
        }
        let a = g.force(&eq.lhs);
        let b = g.force(&eq.rhs);
        if g.find(a) != g.find(b) {
            g.saturate(self.limits.depth, &[], false).ok()?;
        }
        let (a, b) = (g.lookup_term(&eq.lhs)?, g.lookup_term(&eq.rhs)?);
        (g.find(a) == g.find(b)).then(|| g.take_trace())
    }

    /// Search the cached small models for a counterexample.
    pub fn refute(&self, eq: &Equation, assumed: &[Term]) -> Option<(Arc<FiniteModel>, Vec<Elem>)> {
        let models = self.small_models()?;
        let sorts: Vec<usize> = eq.ctx.sorts().iter().map(|s| self.theory.sort_index(s).unwrap()).collect();
        for m in models {
            if let Some(asg) = counterexample(m, eq, assumed, &sorts) {
                return Some((m.clone(), asg));
            }
        }
        None
    }
}

/// An assignment in `m` where the assumptions and both sides are defined
/// and the sides differ.
pub fn counterexample(m: &FiniteModel, eq: &Equation, assumed: &[Term], sorts: &[usize]) -> Option<Vec<Elem>> {
    let dims: Vec<usize> = sorts.iter().map(|&s| m.size(s)).collect();
    Tuples::new(&dims).find(|asg| {
        assumed.iter().all(|t| evaluate_term(m, t, asg).is_ok())
            && matches!(
                (evaluate_term(m, &eq.lhs, asg), evaluate_term(m, &eq.rhs, asg)),
                (Ok(a), Ok(b)) if a != b
            )
    })
}

/// Prove `eq` with the given depth and refutation size.
pub fn prove_theorem(theory: &Arc<Theory>, eq: &Equation, depth: u32, refute_size: usize) -> Judgment {
    let limits = Limits {
        depth,
        refute_size,
        ..Limits::default()
    };
    Prover::new(theory.clone(), limits).prove(eq)
}

/// Generators, terms forced to be defined, and ground relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub theory: Arc<Theory>,
    pub generators: Context,
    pub forced_defined: Vec<Term>,
    pub relations: Vec<(Term, Term)>,
}

impl Presentation {
    /// The free model presentation on `generators`.
    pub fn free(theory: Arc<Theory>, generators: Context) -> Self {
        Presentation {
            theory,
            generators,
            forced_defined: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn check(&self) -> Result<()> {
        for s in self.generators.sorts() {
            if !self.theory.has_sort(&s) {
                return Err(Error::UnknownSort(s.to_string()));
            }
        }
        for t in &self.forced_defined {
            self.theory.sort_of(&self.generators, t)?;
        }
        for (a, b) in &self.relations {
            let (sa, sb) = (self.theory.sort_of(&self.generators, a)?, self.theory.sort_of(&self.generators, b)?);
            if sa != sb {
                return Err(Error::SortMismatch {
                    path: vec![],
                    expected: sa.to_string(),
                    found: sb.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// A presented model computed to a depth bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedModel {
    pub model: Arc<FiniteModel>,
    pub depth: u32,
    pub saturated: bool,
    /// Canonical representative of each element, per sort.
    pub class_reps: Vec<Vec<Term>>,
    /// Element of each generator, in generator order.
    pub generators: Vec<(usize, Elem)>,
}

impl BoundedModel {
    pub fn require_saturated(&self, what: &str) -> Result<()> {
        if self.saturated {
            Ok(())
        } else {
            Err(Error::Unsaturated(format!("{what} at depth {}", self.depth)))
        }
    }

    /// The map into `target` sending generator `i` to `images[i]`, defined
    /// by evaluating representatives. Fails if some representative is
    /// undefined there or the result is not a homomorphism.
    pub fn induced_hom(&self, target: &Arc<FiniteModel>, images: &[Elem]) -> Result<Homomorphism> {
        let mut maps = Vec::with_capacity(self.class_reps.len());
        for reps in &self.class_reps {
            let mut m = Vec::with_capacity(reps.len());
            for t in reps {
                let v = evaluate_term(target, t, images)
                    .map_err(|u| Error::NotHomomorphism(format!("representative undefined in target: {u}")))?;
                m.push(v);
            }
            maps.push(m);
        }
        Homomorphism::new(self.model.clone(), target.clone(), maps)
    }
}

struct Extracted {
    model: FiniteModel,
    reps: Vec<Vec<Term>>,
    gens: Vec<(usize, Elem)>,
    entries: usize,
}

fn best_terms(g: &EGraph, classes: &[Id]) -> HashMap<Id, Term> {
    let apps = g.applications();
    let mut best: HashMap<Id, Term> = HashMap::new();
    for &c in classes {
        if let Term::Var(_) = g.witness(c) {
            best.insert(c, g.witness(c).clone());
        }
    }
    // generators sit in their own nodes; pick the smallest among them
    loop {
        let mut changed = false;
        for (op, kids, c) in &apps {
            let args: Option<Vec<Term>> = kids.iter().map(|k| best.get(k).cloned()).collect();
            let Some(args) = args else { continue };
            let t = Term::App(g_op_name(g, *op), args);
            let better = match best.get(c) {
                None => true,
                Some(old) => t.order_key() < old.order_key(),
            };
            if better {
                best.insert(*c, t);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    best
}

fn g_op_name(g: &EGraph, op: u32) -> String {
    g.op_name(op).to_string()
}

fn extract(g: &EGraph, theory: &Arc<Theory>, gens: &Context) -> Extracted {
    let classes = g.classes();
    let mut best = best_terms(g, &classes);
    // a generator class keeps the smallest generator as representative
    for i in (0..gens.len()).rev() {
        let c = g.find(i as Id);
        let cur = best.get(&c).cloned();
        if matches!(cur, Some(Term::Var(j)) if j > i) || cur.is_none() {
            best.insert(c, Term::Var(i));
        }
    }
    let names: Vec<String> = gens.iter().map(|(n, _)| n.to_string()).collect();
    let n_sorts = theory.sorts().len();
    let mut per_sort: Vec<Vec<(Term, Id)>> = vec![Vec::new(); n_sorts];
    for &c in &classes {
        let t = best.get(&c).cloned().unwrap_or_else(|| g.witness(c).clone());
        per_sort[g.class_sort(c) as usize].push((t, c));
    }
    for v in per_sort.iter_mut() {
        v.sort_by_cached_key(|(t, _)| {
            let (d, s, _) = t.order_key();
            (d, s, t.display_with(&names).to_string())
        });
    }
    let mut index: HashMap<Id, Elem> = HashMap::new();
    for v in &per_sort {
        for (i, (_, c)) in v.iter().enumerate() {
            index.insert(*c, i as Elem);
        }
    }
    let carriers = per_sort
        .iter()
        .map(|v| v.iter().map(|(t, _)| t.display_with(&names).to_string()).collect())
        .collect();
    let mut model = FiniteModel::new(theory.clone(), carriers).expect("one carrier per sort");
    let mut entries = 0;
    for (op, kids, c) in g.applications() {
        let args: Vec<Elem> = kids.iter().map(|k| index[k]).collect();
        if model.table(op as usize).get(&args).is_none() {
            entries += 1;
        }
        model.table_mut(op as usize).set(&args, Some(index[&c]));
    }
    let gens_out = (0..gens.len())
        .map(|i| {
            let c = g.find(i as Id);
            (g.class_sort(c) as usize, index[&c])
        })
        .collect();
    Extracted {
        model,
        reps: per_sort.into_iter().map(|v| v.into_iter().map(|(t, _)| t).collect()).collect(),
        gens: gens_out,
        entries,
    }
}

fn run_presentation(p: &Presentation, depth: u32, cap: usize) -> Result<EGraph> {
    let mut g = EGraph::new(p.theory.clone(), p.generators.clone(), cap, false);
    for t in &p.forced_defined {
        g.force(t);
    }
    for (a, b) in &p.relations {
        g.assume_equal(a, b);
    }
    g.saturate(depth, &[], true)?;
    Ok(g)
}

/// Compute the model presented by `p`, up to term depth `depth`.
pub fn presented_model(p: &Presentation, depth: u32) -> Result<BoundedModel> {
    presented_model_with(p, depth, Limits::default().class_cap)
}

pub fn presented_model_with(p: &Presentation, depth: u32, cap: usize) -> Result<BoundedModel> {
    p.check()?;
    let g = run_presentation(p, depth, cap)?;
    let ex = extract(&g, &p.theory, &p.generators);
    // one-step probe: nothing new appears and nothing merges at depth + 1
    let saturated = match run_presentation(p, depth + 1, cap) {
        Ok(g2) => {
            let ex2 = extract(&g2, &p.theory, &p.generators);
            let same_sizes = ex.model.sizes() == ex2.model.sizes() && ex.entries == ex2.entries;
            same_sizes && {
                let mut seen = std::collections::HashSet::new();
                ex.reps.iter().flatten().all(|t| match g2.lookup_term(t) {
                    Some(c) => seen.insert(g2.find(c)),
                    None => false,
                })
            }
        }
        Err(_) => false,
    };
    Ok(BoundedModel {
        model: Arc::new(ex.model),
        depth,
        saturated,
        class_reps: ex.reps,
        generators: ex.gens,
    })
}

/// The free model on `generators`.
pub fn free_model(theory: &Arc<Theory>, generators: Context, depth: u32) -> Result<BoundedModel> {
    presented_model(&Presentation::free(theory.clone(), generators), depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egraph::{replay, Goal};
    use crate::fixtures;
    use crate::model::validate_model;
    use crate::text::parse_term;

    fn eq(th: &Theory, ctx: &str, l: &str, r: &str) -> Equation {
        let c = crate::text::parse_context(ctx).unwrap();
        let (l, _) = parse_term(th, &c, l).unwrap();
        let (r, _) = parse_term(th, &c, r).unwrap();
        Equation::new(c, l, r)
    }

    #[test]
    fn boolean_group_theorem_is_proved_and_replays() {
        let th = fixtures::z2_vector_spaces();
        let e = eq(&th, "x:v, y:v", "add(add(x,y),y)", "x");
        match prove_theorem(&th, &e, 4, 2) {
            Judgment::Proved(trace) => replay(&th, &trace, Goal::Equal(&e.lhs, &e.rhs)).unwrap(),
            j => panic!("{j:?}"),
        }
    }

    #[test]
    fn commutativity_of_free_binop_is_refuted() {
        let th = fixtures::free_binop();
        let e = eq(&th, "x:s, y:s", "m(x,y)", "m(y,x)");
        match prove_theorem(&th, &e, 4, 2) {
            Judgment::Refuted { model, assignment } => {
                assert_eq!(model.size(0), 2);
                let a = evaluate_term(&model, &e.lhs, &assignment).unwrap();
                let b = evaluate_term(&model, &e.rhs, &assignment).unwrap();
                assert_ne!(a, b);
            }
            j => panic!("{j:?}"),
        }
        assert_eq!(prove_theorem(&th, &e, 5, 0), Judgment::Unknown { depth: 5 });
    }

    #[test]
    fn variables_are_everywhere_defined() {
        let th = fixtures::pi_eta_eps();
        let c = Context::from_pairs([("x", "s")]);
        assert!(everywhere_defined(&th, &c, &Term::var(0), 1).is_yes());
        let (pi, _) = parse_term(&th, &c, "pi(x)").unwrap();
        assert!(!everywhere_defined(&th, &c, &pi, 4).is_yes());
    }

    #[test]
    fn free_boolean_group_on_two_generators() {
        let th = fixtures::z2_vector_spaces();
        let b = free_model(&th, Context::from_pairs([("x", "v"), ("y", "v")]), 4).unwrap();
        assert!(b.saturated);
        assert_eq!(b.model.carriers()[0], vec!["x", "y", "zero", "add(x,y)"]);
        assert!(validate_model(&b.model).is_ok());
    }

    #[test]
    fn free_set_on_one_generator() {
        let th = fixtures::gamma0();
        let b = free_model(&th, Context::from_pairs([("x", "star")]), 1).unwrap();
        assert!(b.saturated);
        assert_eq!(b.model.carriers()[0], vec!["x"]);
    }

    #[test]
    fn free_binop_never_saturates() {
        let th = fixtures::free_binop();
        let b = free_model(&th, Context::from_pairs([("x", "s")]), 3).unwrap();
        assert!(!b.saturated);
    }
}
