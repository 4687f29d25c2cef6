//! Mal'tsev and regularity witnesses, approximate co-operations, the
//! definedness quotient, and the cube lemma on points.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::engine::{
    counterexample, everywhere_defined_with, presented_model, BoundedModel, Definedness, Judgment, Limits,
    Presentation, Prover,
};
use crate::error::{Error, Result};
use crate::model::{
    generated_with_terms, is_strong_epi, is_surjective, product, pullback, Elem, FiniteModel, Homomorphism, Pullback,
};
use crate::theory::{Context, Equation, SortId, Term, Theory, TypedTerm};

/// One proof obligation and its outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub label: String,
    pub evidence: Evidence,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    Defined(Definedness),
    Theorem(Judgment),
    /// A shape problem found before any proof was attempted.
    Malformed(String),
}

impl Obligation {
    pub fn is_proved(&self) -> bool {
        match &self.evidence {
            Evidence::Defined(d) => d.is_yes(),
            Evidence::Theorem(j) => j.is_proved(),
            Evidence::Malformed(_) => false,
        }
    }

    pub fn status(&self) -> &'static str {
        match &self.evidence {
            Evidence::Defined(Definedness::Yes(_)) => "Proved",
            Evidence::Defined(Definedness::Unknown { .. }) => "Unknown",
            Evidence::Theorem(j) => j.status(),
            Evidence::Malformed(_) => "Malformed",
        }
    }
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.status())
    }
}

/// Obligations that did not all succeed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureReport {
    pub subject: String,
    pub obligations: Vec<Obligation>,
}

impl FailureReport {
    pub fn stuck(&self) -> Vec<&Obligation> {
        self.obligations.iter().filter(|o| !o.is_proved()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaltsevWitness {
    pub sort: SortId,
    /// Over the context `x, y, z` of the sort.
    pub p: Term,
    pub proofs: Vec<Obligation>,
}

fn xyz(sort: &SortId) -> Context {
    Context::from_pairs([("x", sort.clone()), ("y", sort.clone()), ("z", sort.clone())])
}

fn xy(sort: &SortId) -> Context {
    Context::from_pairs([("x", sort.clone()), ("y", sort.clone())])
}

/// The two specialisations `p(x,x,y)` and `p(x,y,y)` over `x, y`.
pub fn specialisations(p: &Term) -> (Term, Term) {
    let (x, y) = (Term::var(0), Term::var(1));
    (p.substitute(&[x.clone(), x.clone(), y.clone()]), p.substitute(&[x, y.clone(), y]))
}

pub fn verify_maltsev_term(theory: &Arc<Theory>, sort: &SortId, p: &Term, depth: u32) -> Result<MaltsevWitness, FailureReport> {
    verify_maltsev_with(&Prover::new(theory.clone(), Limits::with_depth(depth)), sort, p)
}

/// Check the four Mal'tsev obligations for `p` using a shared prover.
pub fn verify_maltsev_with(prover: &Prover, sort: &SortId, p: &Term) -> Result<MaltsevWitness, FailureReport> {
    let th = prover.theory();
    let ctx3 = xyz(sort);
    let subject = format!("p = {}", p.display(&ctx3));
    match th.sort_of(&ctx3, p) {
        Ok(s) if &s == sort => {}
        other => {
            let msg = match other {
                Ok(s) => format!("p has sort {s}, expected {sort}"),
                Err(e) => e.to_string(),
            };
            return Err(FailureReport {
                subject,
                obligations: vec![Obligation {
                    label: "signature s^3 -> s".into(),
                    evidence: Evidence::Malformed(msg),
                }],
            });
        }
    }
    let c = xy(sort);
    let (pxxy, pxyy) = specialisations(p);
    let names = |t: &Term| t.display(&c).to_string();
    let proofs = vec![
        Obligation {
            label: format!("defined {}", names(&pxxy)),
            evidence: Evidence::Defined(everywhere_defined_with(th, &c, &pxxy, prover.limits())),
        },
        Obligation {
            label: format!("defined {}", names(&pxyy)),
            evidence: Evidence::Defined(everywhere_defined_with(th, &c, &pxyy, prover.limits())),
        },
        Obligation {
            label: format!("theorem {} = y", names(&pxxy)),
            evidence: Evidence::Theorem(prover.prove(&Equation::new(c.clone(), pxxy, Term::var(1)))),
        },
        Obligation {
            label: format!("theorem {} = x", names(&pxyy)),
            evidence: Evidence::Theorem(prover.prove(&Equation::new(c.clone(), pxyy, Term::var(0)))),
        },
    ];
    if proofs.iter().all(Obligation::is_proved) {
        Ok(MaltsevWitness {
            sort: sort.clone(),
            p: p.clone(),
            proofs,
        })
    } else {
        Err(FailureReport { subject, obligations: proofs })
    }
}

/// All terms of sort `target` over `ctx` with depth at most `max_depth`,
/// ordered by (depth, size, canonical text). Stops after `limit` terms.
pub fn candidate_terms(theory: &Theory, ctx: &Context, target: &SortId, max_depth: usize, limit: usize) -> Vec<Term> {
    let n_sorts = theory.sorts().len();
    // by_depth[d][s]: terms of sort s with depth exactly d
    let mut by_depth: Vec<Vec<Vec<Term>>> = vec![vec![Vec::new(); n_sorts]];
    for (i, (_, s)) in ctx.iter().enumerate() {
        by_depth[0][theory.sort_index(s).unwrap()].push(Term::var(i));
    }
    let mut total = ctx.len();
    for d in 1..=max_depth {
        let mut layer = vec![Vec::new(); n_sorts];
        for op in theory.ops() {
            let arg_idx: Vec<usize> = op.arg_sorts.iter().map(|s| theory.sort_index(s).unwrap()).collect();
            let rs = theory.sort_index(&op.result_sort).unwrap();
            if arg_idx.is_empty() {
                if d == 1 {
                    layer[rs].push(Term::constant(op.name.clone()));
                }
                continue;
            }
            // choices per argument: depth < d, at least one exactly d - 1
            let pools: Vec<Vec<(usize, &Term)>> = arg_idx
                .iter()
                .map(|&s| (0..d).flat_map(|k| by_depth[k][s].iter().map(move |t| (k, t))).collect())
                .collect();
            let dims: Vec<usize> = pools.iter().map(Vec::len).collect();
            for pick in crate::model::Tuples::new(&dims) {
                let args: Vec<(usize, &Term)> = pick.iter().enumerate().map(|(k, &i)| pools[k][i as usize]).collect();
                if args.iter().all(|(k, _)| *k + 1 < d) {
                    continue;
                }
                layer[rs].push(Term::app(op.name.clone(), args.iter().map(|(_, t)| (*t).clone()).collect()));
                total += 1;
                if total > limit {
                    break;
                }
            }
        }
        by_depth.push(layer);
        if total > limit {
            break;
        }
    }
    let t = theory.sort_index(target).unwrap();
    let mut out: Vec<Term> = by_depth.into_iter().flat_map(|mut l| std::mem::take(&mut l[t])).collect();
    out.sort_by_cached_key(|t| t.order_key());
    out.truncate(limit);
    out
}

/// Outcome of a bounded search for a Mal'tsev term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaltsevSearch {
    Found {
        witness: MaltsevWitness,
        candidates_tried: usize,
    },
    /// Every candidate up to the bound failed; each carries the judgment
    /// that eliminated it (a countermodel when one was found).
    NotFoundWithinBound { rejected: Vec<(Term, Judgment)> },
}

/// Cap on the number of enumerated candidate terms.
pub const CANDIDATE_LIMIT: usize = 200_000;

/// Search candidate terms `s^3 -> s` in canonical order.
pub fn find_maltsev_term(theory: &Arc<Theory>, sort: &SortId, max_depth: usize, proof_depth: u32) -> MaltsevSearch {
    let prover = Prover::new(theory.clone(), Limits::with_depth(proof_depth));
    let ctx3 = xyz(sort);
    let c = xy(sort);
    let s = theory.sort_index(sort).unwrap();
    let mut rejected = Vec::new();
    let models: Vec<Arc<FiniteModel>> = prover.small_models().map(<[_]>::to_vec).unwrap_or_default();
    for (n, p) in candidate_terms(theory, &ctx3, sort, max_depth, CANDIDATE_LIMIT).into_iter().enumerate() {
        let (pxxy, pxyy) = specialisations(&p);
        let e1 = Equation::new(c.clone(), pxxy, Term::var(1));
        let e2 = Equation::new(c.clone(), pxyy, Term::var(0));
        let refuted = models.iter().find_map(|m| {
            [&e1, &e2]
                .iter()
                .find_map(|e| counterexample(m, e, &[], &[s, s]))
                .map(|asg| Judgment::Refuted { model: m.clone(), assignment: asg })
        });
        if let Some(j) = refuted {
            rejected.push((p, j));
            continue;
        }
        match verify_maltsev_with(&prover, sort, &p) {
            Ok(witness) => {
                return MaltsevSearch::Found {
                    witness,
                    candidates_tried: n + 1,
                }
            }
            Err(report) => {
                let j = report
                    .obligations
                    .iter()
                    .find_map(|o| match &o.evidence {
                        Evidence::Theorem(j) if !j.is_proved() => Some(j.clone()),
                        _ => None,
                    })
                    .unwrap_or(Judgment::Unknown { depth: proof_depth });
                rejected.push((p, j));
            }
        }
    }
    MaltsevSearch::NotFoundWithinBound { rejected }
}

/// Outcome of the relational construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViaRelation {
    Found {
        p: Term,
        witness: Result<MaltsevWitness, FailureReport>,
        saturated: bool,
    },
    NotFound {
        /// Pairs of the generated relation in the sort.
        relation: Vec<(String, String)>,
        saturated: bool,
    },
}

/// Build the free model on `x, y`, close `{(x,x), (x,y), (y,y)}` in its
/// square, and read a Mal'tsev term off the pair `(y, x)` if it appears.
pub fn maltsev_via_relation(theory: &Arc<Theory>, sort: &SortId, depth: u32) -> Result<ViaRelation> {
    let s = theory.sort_index(sort).ok_or_else(|| Error::UnknownSort(sort.to_string()))?;
    let free = presented_model(&Presentation::free(theory.clone(), xy(sort)), depth)?;
    let (x, y) = (free.generators[0].1, free.generators[1].1);
    let sq = product(&free.model, &free.model)?;
    let seeds = [(s, sq.pair_index(s, x, x)), (s, sq.pair_index(s, x, y)), (s, sq.pair_index(s, y, y))];
    let (sub, terms) = generated_with_terms(&sq.model, &seeds);
    let target = sq.pair_index(s, y, x);
    if sub.contains(s, target) {
        let p = terms[s][target as usize].clone().expect("selected elements have terms");
        let witness = verify_maltsev_term(theory, sort, &p, depth.max(4));
        Ok(ViaRelation::Found {
            p,
            witness,
            saturated: free.saturated,
        })
    } else {
        let relation = sub
            .elements(s)
            .into_iter()
            .map(|e| {
                let (a, b) = (sq.p1.apply(s, e), sq.p2.apply(s, e));
                (free.model.label(s, a).to_string(), free.model.label(s, b).to_string())
            })
            .collect();
        Ok(ViaRelation::NotFound {
            relation,
            saturated: free.saturated,
        })
    }
}

/// Candidate data for the regularity schema of a term `theta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityCandidate {
    pub theta: TypedTerm,
    /// Over a context with one variable per component.
    pub pi: TypedTerm,
    /// Each over a one-variable context of the result sort of `theta`.
    pub alphas: Vec<TypedTerm>,
    /// Each over the context of `theta`.
    pub mus: Vec<TypedTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityWitness {
    pub candidate: RegularityCandidate,
    pub proofs: Vec<Obligation>,
}

fn shape_error(c: &RegularityCandidate, theory: &Theory) -> Option<String> {
    let m = c.pi.ctx.len();
    if c.alphas.len() != m || c.mus.len() != m {
        return Some(format!("pi has {m} arguments but {} alphas and {} mus", c.alphas.len(), c.mus.len()));
    }
    let s = match theory.sort_of(&c.theta.ctx, &c.theta.term) {
        Ok(s) => s,
        Err(e) => return Some(format!("theta: {e}")),
    };
    match theory.sort_of(&c.pi.ctx, &c.pi.term) {
        Ok(ps) if ps == s => {}
        Ok(ps) => return Some(format!("pi has sort {ps}, theta has sort {s}")),
        Err(e) => return Some(format!("pi: {e}")),
    }
    for j in 0..m {
        let want = c.pi.ctx.sort(j);
        let a = &c.alphas[j];
        if a.ctx.len() != 1 || a.ctx.sort(0) != &s {
            return Some(format!("alpha_{} must take one argument of sort {s}", j + 1));
        }
        match theory.sort_of(&a.ctx, &a.term) {
            Ok(t) if &t == want => {}
            _ => return Some(format!("alpha_{} does not land in {want}", j + 1)),
        }
        let mu = &c.mus[j];
        if mu.ctx != c.theta.ctx {
            return Some(format!("mu_{} must use the context of theta", j + 1));
        }
        match theory.sort_of(&mu.ctx, &mu.term) {
            Ok(t) if &t == want => {}
            _ => return Some(format!("mu_{} does not land in {want}", j + 1)),
        }
    }
    None
}

/// Check the regularity schema: alphas and mus everywhere defined,
/// `pi(alpha(x))` everywhere defined and equal to `x`, and
/// `alpha_j(theta) = mu_j` wherever `theta` is defined.
pub fn verify_regularity_witness(theory: &Arc<Theory>, c: &RegularityCandidate, depth: u32) -> Result<RegularityWitness, FailureReport> {
    let subject = format!("theta = {}", c.theta);
    if let Some(msg) = shape_error(c, theory) {
        return Err(FailureReport {
            subject,
            obligations: vec![Obligation {
                label: "shape".into(),
                evidence: Evidence::Malformed(msg),
            }],
        });
    }
    let limits = Limits::with_depth(depth);
    let prover = Prover::new(theory.clone(), limits.clone());
    let mut proofs = Vec::new();
    for (j, a) in c.alphas.iter().enumerate() {
        proofs.push(Obligation {
            label: format!("defined alpha_{} = {}", j + 1, a.term.display(&a.ctx)),
            evidence: Evidence::Defined(everywhere_defined_with(theory, &a.ctx, &a.term, &limits)),
        });
    }
    for (j, mu) in c.mus.iter().enumerate() {
        proofs.push(Obligation {
            label: format!("defined mu_{} = {}", j + 1, mu.term.display(&mu.ctx)),
            evidence: Evidence::Defined(everywhere_defined_with(theory, &mu.ctx, &mu.term, &limits)),
        });
    }
    let xctx = c.alphas[0].ctx.clone();
    let composite = c.pi.term.substitute(&c.alphas.iter().map(|a| a.term.clone()).collect::<Vec<_>>());
    proofs.push(Obligation {
        label: format!("defined {}", composite.display(&xctx)),
        evidence: Evidence::Defined(everywhere_defined_with(theory, &xctx, &composite, &limits)),
    });
    proofs.push(Obligation {
        label: format!("theorem {} = {}", composite.display(&xctx), xctx.name(0)),
        evidence: Evidence::Theorem(prover.prove(&Equation::new(xctx.clone(), composite.clone(), Term::var(0)))),
    });
    let ctx = &c.theta.ctx;
    for (j, (a, mu)) in c.alphas.iter().zip(&c.mus).enumerate() {
        let lhs = a.term.substitute(std::slice::from_ref(&c.theta.term));
        let eq = Equation::new(ctx.clone(), lhs, mu.term.clone());
        proofs.push(Obligation {
            label: format!("theorem {} = {} where theta is defined", eq.lhs.display(ctx), eq.rhs.display(ctx)),
            evidence: Evidence::Theorem(prover.prove_assuming(&eq, std::slice::from_ref(&c.theta.term))),
        });
        let _ = j;
    }
    if proofs.iter().all(Obligation::is_proved) {
        Ok(RegularityWitness {
            candidate: c.clone(),
            proofs,
        })
    } else {
        Err(FailureReport { subject, obligations: proofs })
    }
}

/// A bounded coproduct with its injections.
#[derive(Clone, Debug)]
pub struct Coproduct {
    pub bounded: BoundedModel,
    pub injections: Vec<Homomorphism>,
}

/// Coproduct of finitely many models over one theory, presented by the
/// disjoint union of their elements subject to their operation tables.
pub fn coproduct(models: &[Arc<FiniteModel>], depth: u32) -> Result<Coproduct> {
    let Some(first) = models.first() else {
        return Err(Error::Invalid("coproduct of no models".into()));
    };
    let theory = first.theory().clone();
    if models.iter().any(|m| !m.same_theory(first)) {
        return Err(Error::TheoryMismatch);
    }
    let mut gens = Context::new();
    let mut gen_of: Vec<Vec<Vec<usize>>> = Vec::new();
    for (k, m) in models.iter().enumerate() {
        let mut per_sort = Vec::new();
        for (s, sort) in theory.sorts().iter().enumerate() {
            let ids = (0..m.size(s) as Elem)
                .map(|e| gens.push(format!("in{}[{}]", k + 1, m.label(s, e)), sort.clone()))
                .collect();
            per_sort.push(ids);
        }
        gen_of.push(per_sort);
    }
    let mut relations = Vec::new();
    for (k, m) in models.iter().enumerate() {
        for (o, op) in theory.ops().iter().enumerate() {
            let arg_idx: Vec<usize> = op.arg_sorts.iter().map(|s| theory.sort_index(s).unwrap()).collect();
            let rs = theory.sort_index(&op.result_sort).unwrap();
            for (args, v) in m.table(o).defined() {
                let lhs = Term::app(
                    op.name.clone(),
                    args.iter().zip(&arg_idx).map(|(&a, &s)| Term::var(gen_of[k][s][a as usize])).collect(),
                );
                relations.push((lhs, Term::var(gen_of[k][rs][v as usize])));
            }
        }
    }
    let forced_defined = relations.iter().map(|(l, _)| l.clone()).collect();
    let p = Presentation {
        theory: theory.clone(),
        generators: gens,
        forced_defined,
        relations,
    };
    let bounded = presented_model(&p, depth)?;
    let injections = models
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let maps = gen_of[k]
                .iter()
                .map(|ids| ids.iter().map(|&g| bounded.generators[g].1).collect())
                .collect();
            let h = Homomorphism::unchecked(m.clone(), bounded.model.clone(), maps)?;
            if bounded.saturated {
                h.check().map_err(Error::NotHomomorphism)?;
            }
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Coproduct { bounded, injections })
}

/// The universal approximate co-operation on a model.
#[derive(Clone, Debug)]
pub struct ApproxCoop {
    pub x: Arc<FiniteModel>,
    pub two_x: Coproduct,
    pub three_x: Coproduct,
    /// The pullback object.
    pub m: Arc<FiniteModel>,
    pub p_map: Homomorphism,
    pub a_map: Homomorphism,
    pub matrix: Homomorphism,
    pub diagonal: Homomorphism,
    pub a_surjective: bool,
    pub a_strong_epi: bool,
    pub square_commutes: bool,
}

/// Pull back the matrix map `3X -> (2X)^2` along `X -> (2X)^2`.
pub fn universal_approx_coop(x: &Arc<FiniteModel>, depth: u32) -> Result<ApproxCoop> {
    let two = coproduct(&[x.clone(), x.clone()], depth)?;
    two.bounded.require_saturated("coproduct 2X")?;
    let three = coproduct(&[x.clone(), x.clone(), x.clone()], depth)?;
    three.bounded.require_saturated("coproduct 3X")?;
    let sq = product(&two.bounded.model, &two.bounded.model)?;
    let (i1, i2) = (&two.injections[0], &two.injections[1]);
    let theory = x.theory().clone();
    // generators of 3X are copy k of each element, in order
    let rows: [(&Homomorphism, &Homomorphism); 3] = [(i1, i1), (i2, i1), (i2, i2)];
    let mut images = Vec::new();
    for (a, b) in rows {
        for s in 0..theory.sorts().len() {
            for e in 0..x.size(s) as Elem {
                images.push(sq.pair_index(s, a.apply(s, e), b.apply(s, e)));
            }
        }
    }
    let matrix = three.bounded.induced_hom(&sq.model, &images)?;
    let diag_maps = (0..theory.sorts().len())
        .map(|s| (0..x.size(s) as Elem).map(|e| sq.pair_index(s, i1.apply(s, e), i2.apply(s, e))).collect())
        .collect();
    let diagonal = Homomorphism::new(x.clone(), sq.model.clone(), diag_maps)?;
    let Pullback { model: m, p1, p2 } = pullback(&matrix, &diagonal)?;
    let square_commutes = (0..theory.sorts().len()).all(|s| {
        (0..m.size(s) as Elem).all(|e| matrix.apply(s, p1.apply(s, e)) == diagonal.apply(s, p2.apply(s, e)))
    });
    Ok(ApproxCoop {
        x: x.clone(),
        a_surjective: is_surjective(&p2),
        a_strong_epi: is_strong_epi(&p2),
        two_x: two,
        three_x: three,
        m,
        p_map: p1,
        a_map: p2,
        matrix,
        diagonal,
        square_commutes,
    })
}

/// The quotient of a model that makes `theta` defined at a tuple.
#[derive(Clone, Debug)]
pub struct DefinednessQuotient {
    pub bounded: BoundedModel,
    pub q: Homomorphism,
    /// Element of `theta(q(tuple))` when it is defined in the quotient.
    pub theta_value: Option<Elem>,
}

/// Present the quotient of `a` generated by its own elements and tables
/// with `theta(tuple)` forced to be defined. `tuple` gives one element per
/// context variable of `theta`.
pub fn definedness_quotient(a: &Arc<FiniteModel>, theta: &TypedTerm, tuple: &[Elem], depth: u32) -> Result<DefinednessQuotient> {
    let theory = a.theory().clone();
    if tuple.len() != theta.ctx.len() {
        return Err(Error::InvalidElement("tuple length differs from the context of theta".into()));
    }
    let mut gens = Context::new();
    let mut gen_of: Vec<Vec<usize>> = Vec::new();
    for (s, sort) in theory.sorts().iter().enumerate() {
        gen_of.push((0..a.size(s) as Elem).map(|e| gens.push(a.label(s, e), sort.clone())).collect());
    }
    let mut relations = Vec::new();
    for (o, op) in theory.ops().iter().enumerate() {
        let arg_idx: Vec<usize> = op.arg_sorts.iter().map(|s| theory.sort_index(s).unwrap()).collect();
        let rs = theory.sort_index(&op.result_sort).unwrap();
        for (args, v) in a.table(o).defined() {
            let lhs = Term::app(
                op.name.clone(),
                args.iter().zip(&arg_idx).map(|(&x, &s)| Term::var(gen_of[s][x as usize])).collect(),
            );
            relations.push((lhs, Term::var(gen_of[rs][v as usize])));
        }
    }
    let mut subst = Vec::with_capacity(tuple.len());
    for (i, (_, sort)) in theta.ctx.iter().enumerate() {
        let s = theory.sort_index(sort).ok_or_else(|| Error::UnknownSort(sort.to_string()))?;
        let e = tuple[i];
        if e as usize >= a.size(s) {
            return Err(Error::InvalidElement(format!("{e} is not an element of {sort}")));
        }
        subst.push(Term::var(gen_of[s][e as usize]));
    }
    let forced = theta.term.substitute(&subst);
    let p = Presentation {
        theory: theory.clone(),
        generators: gens,
        forced_defined: vec![forced.clone()],
        relations,
    };
    let bounded = presented_model(&p, depth)?;
    let maps = gen_of.iter().map(|ids| ids.iter().map(|&g| bounded.generators[g].1).collect()).collect();
    let q = Homomorphism::unchecked(a.clone(), bounded.model.clone(), maps)?;
    if bounded.saturated {
        q.check().map_err(Error::NotHomomorphism)?;
    }
    let images: Vec<Elem> = (0..p.generators.len()).map(|g| bounded.generators[g].1).collect();
    let theta_value = crate::model::evaluate_term(&bounded.model, &forced, &images).ok();
    Ok(DefinednessQuotient { bounded, q, theta_value })
}

/// A commutative square of points, as a cube: split epis `g: Z -> Y` and
/// `k: W -> V` with sections `g_sec`, `k_sec`, maps `q: Z -> W`,
/// `r: Y -> V`, and bottom maps `f: X -> Y`, `h: U -> V`, `p: X -> U`.
/// The left and right faces are the pullbacks of `g` along `f` and of `k`
/// along `h`.
#[derive(Clone, Debug)]
pub struct Cube {
    pub f: Homomorphism,
    pub g: Homomorphism,
    pub g_sec: Homomorphism,
    pub p: Homomorphism,
    pub q: Homomorphism,
    pub r: Homomorphism,
    pub h: Homomorphism,
    pub k: Homomorphism,
    pub k_sec: Homomorphism,
}

#[derive(Clone, Debug)]
pub struct CubeOutcome {
    pub left: Pullback,
    pub right: Pullback,
    pub t: Homomorphism,
    pub t_strong_epi: bool,
}

fn same_obj(a: &Arc<FiniteModel>, b: &Arc<FiniteModel>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Validate the cube and test whether the comparison map between the two
/// pullbacks is a strong epimorphism.
pub fn points_cube_check(c: &Cube) -> Result<CubeOutcome> {
    let fail = |m: &str| Err(Error::PreconditionFailed(m.to_string()));
    let shapes = [
        (&c.f.target, &c.g.target, "f and g must share codomain Y"),
        (&c.g_sec.source, &c.g.target, "g' must start at Y"),
        (&c.g_sec.target, &c.g.source, "g' must land in Z"),
        (&c.p.source, &c.f.source, "p must start at X"),
        (&c.q.source, &c.g.source, "q must start at Z"),
        (&c.q.target, &c.k.source, "q must land in W"),
        (&c.r.source, &c.g.target, "r must start at Y"),
        (&c.r.target, &c.k.target, "r must land in V"),
        (&c.h.source, &c.p.target, "h must start at U"),
        (&c.h.target, &c.k.target, "h must land in V"),
        (&c.k_sec.source, &c.k.target, "k' must start at V"),
        (&c.k_sec.target, &c.k.source, "k' must land in W"),
    ];
    for (a, b, m) in shapes {
        if !same_obj(a, b) {
            return fail(m);
        }
    }
    for (hom, name) in [
        (&c.f, "f"),
        (&c.g, "g"),
        (&c.g_sec, "g'"),
        (&c.p, "p"),
        (&c.q, "q"),
        (&c.r, "r"),
        (&c.h, "h"),
        (&c.k, "k"),
        (&c.k_sec, "k'"),
    ] {
        if let Err(e) = hom.check() {
            return fail(&format!("{name} is not a homomorphism: {e}"));
        }
    }
    let id_y = Homomorphism::identity(c.g.target.clone());
    let id_v = Homomorphism::identity(c.k.target.clone());
    if !c.g_sec.then(&c.g)?.same_maps(&id_y) {
        return fail("g g' is not the identity");
    }
    if !c.k_sec.then(&c.k)?.same_maps(&id_v) {
        return fail("k k' is not the identity");
    }
    if !c.q.then(&c.k)?.same_maps(&c.g.then(&c.r)?) {
        return fail("k q differs from r g");
    }
    if !c.g_sec.then(&c.q)?.same_maps(&c.r.then(&c.k_sec)?) {
        return fail("q g' differs from k' r");
    }
    if !c.p.then(&c.h)?.same_maps(&c.f.then(&c.r)?) {
        return fail("h p differs from r f");
    }
    if !is_surjective(&c.p) || !is_surjective(&c.q) {
        return fail("p and q must be surjective");
    }
    let left = pullback(&c.f, &c.g)?;
    let right = pullback(&c.h, &c.k)?;
    let rp = product(&c.p.target, &c.q.target)?;
    let sorts = c.f.maps.len();
    // t(x, z) = (p x, q z), located inside the right-hand pullback
    let mut maps = Vec::with_capacity(sorts);
    for s in 0..sorts {
        let mut m = Vec::with_capacity(left.model.size(s));
        for e in 0..left.model.size(s) as Elem {
            let (xv, zv) = (left.p1.apply(s, e), left.p2.apply(s, e));
            let (u, w) = (c.p.apply(s, xv), c.q.apply(s, zv));
            let idx = (0..right.model.size(s) as Elem)
                .find(|&j| right.p1.apply(s, j) == u && right.p2.apply(s, j) == w)
                .ok_or_else(|| Error::PreconditionFailed("comparison leaves the right-hand pullback".into()))?;
            m.push(idx);
        }
        maps.push(m);
    }
    let _ = rp;
    let t = Homomorphism::new(left.model.clone(), right.model.clone(), maps)?;
    let t_strong_epi = is_strong_epi(&t);
    Ok(CubeOutcome {
        left,
        right,
        t,
        t_strong_epi,
    })
}

/// The model `(Z/2)^d` of the two-element-field theory, elements as bit
/// masks.
pub fn z2_space(theory: &Arc<Theory>, d: usize) -> Arc<FiniteModel> {
    let n = 1usize << d;
    let labels = (0..n).map(|i| format!("{i:0w$b}", w = d.max(1))).collect();
    let mut m = FiniteModel::new(theory.clone(), vec![labels]).expect("one sort");
    m.set("zero", &[], Some(0)).expect("zero");
    for a in 0..n as Elem {
        for b in 0..n as Elem {
            m.set("add", &[a, b], Some(a ^ b)).expect("add");
        }
    }
    Arc::new(m)
}

/// The linear map with the given images of basis vectors.
pub fn z2_linear(src: &Arc<FiniteModel>, dst: &Arc<FiniteModel>, basis_images: &[Elem]) -> Homomorphism {
    let map = (0..src.size(0) as Elem)
        .map(|v| {
            basis_images
                .iter()
                .enumerate()
                .filter(|(i, _)| v >> i & 1 == 1)
                .fold(0, |acc, (_, &w)| acc ^ w)
        })
        .collect();
    Homomorphism::new(src.clone(), dst.clone(), vec![map]).expect("linear maps are homomorphisms")
}

fn dim(m: &FiniteModel) -> usize {
    m.size(0).trailing_zeros() as usize
}

fn random_linear(rng: &mut impl Rng, src: &Arc<FiniteModel>, dst: &Arc<FiniteModel>) -> Homomorphism {
    let imgs: Vec<Elem> = (0..dim(src)).map(|_| rng.gen_range(0..dst.size(0) as Elem)).collect();
    z2_linear(src, dst, &imgs)
}

fn random_surjection(rng: &mut impl Rng, src: &Arc<FiniteModel>, dst: &Arc<FiniteModel>) -> Homomorphism {
    loop {
        let h = random_linear(rng, src, dst);
        if is_surjective(&h) {
            return h;
        }
    }
}

/// A random cube of vector spaces over the two-element field satisfying the
/// cube preconditions, with every object of dimension at most 2.
pub fn random_z2_cube(theory: &Arc<Theory>, rng: &mut impl Rng) -> Cube {
    loop {
        // Z = Y + K and W = V + L with the split projections
        let dy = rng.gen_range(0..=2usize);
        let dk = rng.gen_range(0..=2 - dy);
        let dv = rng.gen_range(0..=dy);
        let dl = rng.gen_range(0..=dk.min(2 - dv));
        let (y, z) = (z2_space(theory, dy), z2_space(theory, dy + dk));
        let (v, w) = (z2_space(theory, dv), z2_space(theory, dv + dl));
        let g = z2_linear(&z, &y, &(0..dy + dk).map(|i| if i < dy { 1 << i } else { 0 }).collect::<Vec<_>>());
        let g_sec = z2_linear(&y, &z, &(0..dy).map(|i| 1 << i).collect::<Vec<_>>());
        let k = z2_linear(&w, &v, &(0..dv + dl).map(|i| if i < dv { 1 << i } else { 0 }).collect::<Vec<_>>());
        let k_sec = z2_linear(&v, &w, &(0..dv).map(|i| 1 << i).collect::<Vec<_>>());
        let r = random_surjection(rng, &y, &v);
        let kk = z2_space(theory, dk);
        let ll = z2_space(theory, dl);
        let big_q = random_surjection(rng, &kk, &ll);
        // q(y, c) = (r y, Q c)
        let q_imgs: Vec<Elem> = (0..dy + dk)
            .map(|i| {
                if i < dy {
                    r.apply(0, 1 << i)
                } else {
                    big_q.apply(0, 1 << (i - dy)) << dv
                }
            })
            .collect();
        let q = z2_linear(&z, &w, &q_imgs);
        let dx = rng.gen_range(0..=2usize);
        let du = rng.gen_range(0..=dx);
        let (x, u) = (z2_space(theory, dx), z2_space(theory, du));
        for _ in 0..64 {
            let p = random_surjection(rng, &x, &u);
            let f = random_linear(rng, &x, &y);
            let h = random_linear(rng, &u, &v);
            if p.then(&h).unwrap().same_maps(&f.then(&r).unwrap()) {
                return Cube {
                    f,
                    g,
                    g_sec,
                    p,
                    q,
                    r,
                    h,
                    k,
                    k_sec,
                };
            }
        }
    }
}

/// A cube of sets meeting every precondition whose comparison map is not
/// surjective.
pub fn set_cube_counterexample(theory: &Arc<Theory>) -> Cube {
    let set = |labels: &[&str]| {
        Arc::new(FiniteModel::new(theory.clone(), vec![labels.iter().map(|s| s.to_string()).collect()]).unwrap())
    };
    let hom = |a: &Arc<FiniteModel>, b: &Arc<FiniteModel>, m: &[Elem]| {
        Homomorphism::new(a.clone(), b.clone(), vec![m.to_vec()]).unwrap()
    };
    let x = set(&["x0"]);
    let y = set(&["y0", "y1"]);
    let z = set(&["z0", "z1", "z2"]);
    let u = set(&["u0"]);
    let v = set(&["v0"]);
    let w = set(&["w0", "w1"]);
    Cube {
        f: hom(&x, &y, &[0]),
        g: hom(&z, &y, &[0, 1, 1]),
        g_sec: hom(&y, &z, &[0, 1]),
        p: hom(&x, &u, &[0]),
        q: hom(&z, &w, &[0, 0, 1]),
        r: hom(&y, &v, &[0, 0]),
        h: hom(&u, &v, &[0]),
        k: hom(&w, &v, &[0, 0]),
        k_sec: hom(&v, &w, &[0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::text::parse_term;
    use rand::SeedableRng;

    #[test]
    fn boolean_group_maltsev_term() {
        let th = fixtures::z2_vector_spaces();
        let v = SortId::new("v");
        let (p, _) = parse_term(&th, &xyz(&v), "add(add(x,y),z)").unwrap();
        assert!(verify_maltsev_term(&th, &v, &p, 4).is_ok());
    }

    #[test]
    fn projection_is_not_maltsev_for_sets() {
        let th = fixtures::gamma0();
        let s = SortId::new("star");
        let err = verify_maltsev_term(&th, &s, &Term::var(0), 4).unwrap_err();
        let stuck = err.stuck();
        assert_eq!(stuck.len(), 1);
        match &stuck[0].evidence {
            Evidence::Theorem(Judgment::Refuted { model, .. }) => assert_eq!(model.size(0), 2),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn candidates_are_ordered() {
        let th = fixtures::z2_vector_spaces();
        let c = candidate_terms(&th, &xyz(&SortId::new("v")), &SortId::new("v"), 1, 1000);
        assert_eq!(c.len(), 3 + 1 + 9);
        assert!(c.windows(2).all(|w| w[0].order_key() <= w[1].order_key()));
    }

    #[test]
    fn via_relation_for_sets_finds_nothing() {
        let th = fixtures::gamma0();
        match maltsev_via_relation(&th, &SortId::new("star"), 2).unwrap() {
            ViaRelation::NotFound { relation, saturated } => {
                assert!(saturated);
                assert_eq!(relation.len(), 3);
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn definedness_quotient_of_pi_fixture() {
        let th = fixtures::pi_eta_eps();
        let mut a = FiniteModel::new(th.clone(), vec![vec!["a".into()], vec!["u".into(), "v".into()]]).unwrap();
        a.set("eta", &[0], Some(0)).unwrap();
        a.set("eps", &[0], Some(1)).unwrap();
        let a = Arc::new(a);
        let theta = TypedTerm::new(Context::from_pairs([("x", "s")]), Term::app("pi", vec![Term::var(0)]));
        let dq = definedness_quotient(&a, &theta, &[0], 2).unwrap();
        assert!(dq.bounded.saturated);
        assert_eq!(dq.bounded.model.sizes(), vec![2, 3]);
        assert!(dq.theta_value.is_some());
        assert!(is_strong_epi(&dq.q));
        let shallow = definedness_quotient(&a, &theta, &[0], 1).unwrap();
        assert!(!shallow.bounded.saturated);
    }

    #[test]
    fn set_counterexample_fails_conclusion() {
        let th = fixtures::gamma0();
        let out = points_cube_check(&set_cube_counterexample(&th)).unwrap();
        assert!(!out.t_strong_epi);
    }

    #[test]
    fn random_vector_space_cubes_pass() {
        let th = fixtures::z2_vector_spaces();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            assert!(points_cube_check(&random_z2_cube(&th, &mut rng)).unwrap().t_strong_epi);
        }
    }

    #[test]
    fn search_finds_terms_for_groups_and_vector_spaces() {
        for (th, sort) in [(fixtures::groups(), "g"), (fixtures::z2_vector_spaces(), "v")] {
            match find_maltsev_term(&th, &SortId::new(sort), 3, 4) {
                MaltsevSearch::Found { witness, .. } => assert_eq!(witness.proofs.len(), 4),
                r => panic!("{sort}: {r:?}"),
            }
        }
    }

    #[test]
    fn search_fails_for_sets_with_countermodels() {
        let th = fixtures::gamma0();
        match find_maltsev_term(&th, &SortId::new("star"), 3, 4) {
            MaltsevSearch::NotFoundWithinBound { rejected } => {
                assert_eq!(rejected.len(), 3);
                for (_, j) in rejected {
                    match j {
                        Judgment::Refuted { model, .. } => assert_eq!(model.size(0), 2),
                        j => panic!("{j:?}"),
                    }
                }
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn approximate_cooperations() {
        let sets = fixtures::gamma0();
        let two = Arc::new(FiniteModel::with_sizes(sets, &[2]).unwrap());
        let a = universal_approx_coop(&two, 3).unwrap();
        assert_eq!(a.m.size(0), 0);
        assert!(!a.a_surjective && a.square_commutes);

        let z2 = z2_space(&fixtures::z2_vector_spaces(), 1);
        let a = universal_approx_coop(&z2, 4).unwrap();
        assert_eq!(a.m.size(0), 2);
        assert!(crate::model::is_iso(&a.a_map) && a.square_commutes);
    }
}
