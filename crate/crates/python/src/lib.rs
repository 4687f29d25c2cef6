//! Python bindings: theories, proving, bounded free models, Mal'tsev
//! witnesses, relations and completion-theory fragments.

use std::sync::Arc;

use eatwb_core::engine::{everywhere_defined_with, free_model, presented_model, Judgment, Limits, Presentation, Prover};
use eatwb_core::files::{load_model, load_relation, load_theory, model_to_json};
use eatwb_core::gamma::{fragment_closure, fragment_from_text, GammaFragment, Request};
use eatwb_core::maltsev::{find_maltsev_term, verify_maltsev_term, MaltsevSearch};
use eatwb_core::model::FiniteModel;
use eatwb_core::relation::{compose, Relation as CoreRelation};
use eatwb_core::text::{infer_context, parse_context, parse_raw_term, parse_term, parse_theory, print_theory};
use eatwb_core::theory::{validate_theory, Context, Equation, SortId, Term, Theory as CoreTheory};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: eatwb_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn limits(depth: u32, refute_size: Option<usize>) -> Limits {
    let mut l = Limits::with_depth(depth);
    if let Some(r) = refute_size {
        l.refute_size = r;
    }
    l
}

fn xyz(sort: &SortId) -> Context {
    Context::from_pairs([("x", sort.clone()), ("y", sort.clone()), ("z", sort.clone())])
}

/// A finitary essentially algebraic theory.
#[pyclass(frozen, module = "eatwb")]
struct Theory {
    inner: Arc<CoreTheory>,
}

impl Theory {
    fn context(&self, ctx: Option<&str>, sides: &[&str]) -> PyResult<Context> {
        match ctx {
            Some(c) => parse_context(c).map_err(err),
            None => {
                let raws = sides.iter().map(|s| parse_raw_term(s)).collect::<Result<Vec<_>, _>>().map_err(err)?;
                infer_context(&self.inner, &raws.iter().collect::<Vec<_>>()).map_err(err)
            }
        }
    }

    fn term(&self, ctx: &Context, src: &str) -> PyResult<(Term, SortId)> {
        parse_term(&self.inner, ctx, src).map_err(err)
    }
}

#[pymethods]
impl Theory {
    /// Parse a theory from its text form.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Theory { inner: Arc::new(parse_theory(text).map_err(err)?) })
    }

    /// Load a theory file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Theory { inner: load_theory(path).map_err(err)? })
    }

    /// One of the bundled theories: gamma0, free_binop, z2vec, groups, pi_eta_eps.
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        eatwb_core::fixtures::by_name(name)
            .map(|inner| Theory { inner })
            .ok_or_else(|| PyValueError::new_err(format!("no bundled theory named {name:?}")))
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn sorts(&self) -> Vec<String> {
        self.inner.sorts().iter().map(|s| s.to_string()).collect()
    }

    #[getter]
    fn ops(&self) -> Vec<String> {
        self.inner.ops().iter().map(|o| o.name.clone()).collect()
    }

    #[getter]
    fn equations(&self) -> Vec<String> {
        self.inner.equations().iter().map(|e| e.to_string()).collect()
    }

    /// Well-formedness violations; empty when the theory is valid.
    fn validate(&self) -> Vec<String> {
        validate_theory(&self.inner).violations.iter().map(|v| v.to_string()).collect()
    }

    fn text(&self) -> String {
        print_theory(&self.inner)
    }

    /// Decide `lhs = rhs`. Returns ("Proved" | "Refuted" | "Unknown", detail).
    #[pyo3(signature = (lhs, rhs, ctx=None, assume=Vec::new(), depth=6, refute_size=None))]
    fn prove(
        &self,
        lhs: &str,
        rhs: &str,
        ctx: Option<&str>,
        assume: Vec<String>,
        depth: u32,
        refute_size: Option<usize>,
    ) -> PyResult<(String, String)> {
        let mut sides = vec![lhs, rhs];
        sides.extend(assume.iter().map(String::as_str));
        let c = self.context(ctx, &sides)?;
        let (l, ls) = self.term(&c, lhs)?;
        let (r, rs) = self.term(&c, rhs)?;
        if ls != rs {
            return Err(PyValueError::new_err(format!("sides have sorts {ls} and {rs}")));
        }
        let assumed = assume.iter().map(|a| Ok(self.term(&c, a)?.0)).collect::<PyResult<Vec<_>>>()?;
        let prover = Prover::new(self.inner.clone(), limits(depth, refute_size));
        let j = prover.prove_assuming(&Equation::new(c, l, r), &assumed);
        let detail = match &j {
            Judgment::Proved(trace) => trace.to_string(),
            Judgment::Refuted { model, assignment } => format!("{model}at {assignment:?}"),
            Judgment::Unknown { depth } => format!("depth {depth}"),
        };
        Ok((j.status().to_string(), detail))
    }

    /// True if the term is derivably everywhere defined within `depth`.
    #[pyo3(signature = (term, ctx=None, depth=6))]
    fn is_everywhere_defined(&self, term: &str, ctx: Option<&str>, depth: u32) -> PyResult<bool> {
        let c = self.context(ctx, &[term])?;
        let (t, _) = self.term(&c, term)?;
        Ok(everywhere_defined_with(&self.inner, &c, &t, &Limits::with_depth(depth)).is_yes())
    }

    /// Bounded model presented by generators ("x:v, y:v") and relations ("lhs = rhs").
    #[pyo3(signature = (gens, relations=Vec::new(), depth=3))]
    fn free_model(&self, gens: &str, relations: Vec<String>, depth: u32) -> PyResult<Model> {
        let ctx = parse_context(gens).map_err(err)?;
        let b = if relations.is_empty() {
            free_model(&self.inner, ctx, depth).map_err(err)?
        } else {
            let mut p = Presentation::free(self.inner.clone(), ctx.clone());
            for r in &relations {
                let (l, rr) = r
                    .split_once('=')
                    .ok_or_else(|| PyValueError::new_err(format!("expected 'lhs = rhs', got {r:?}")))?;
                p.relations.push((self.term(&ctx, l.trim())?.0, self.term(&ctx, rr.trim())?.0));
            }
            p.check().map_err(err)?;
            presented_model(&p, depth).map_err(err)?
        };
        Ok(Model { inner: b.model, saturated: Some(b.saturated) })
    }

    /// Prove the Mal'tsev identities for a term in x, y, z.
    #[pyo3(signature = (sort, term, depth=4))]
    fn verify_maltsev_term(&self, sort: &str, term: &str, depth: u32) -> PyResult<bool> {
        let s = SortId::new(sort);
        let (p, _) = self.term(&xyz(&s), term)?;
        Ok(verify_maltsev_term(&self.inner, &s, &p, depth).is_ok())
    }

    /// Search for a Mal'tsev term; None when none is found within the bound.
    #[pyo3(signature = (sort, max_depth=3, proof_depth=4))]
    fn find_maltsev_term(&self, sort: &str, max_depth: usize, proof_depth: u32) -> Option<String> {
        let s = SortId::new(sort);
        match find_maltsev_term(&self.inner, &s, max_depth, proof_depth) {
            MaltsevSearch::Found { witness, .. } => Some(witness.p.display(&xyz(&s)).to_string()),
            MaltsevSearch::NotFoundWithinBound { .. } => None,
        }
    }

    fn __repr__(&self) -> String {
        format!("Theory({:?}, sorts={}, ops={})", self.inner.name, self.inner.sorts().len(), self.inner.ops().len())
    }
}

/// A finite model with partial operation tables.
#[pyclass(frozen, module = "eatwb")]
struct Model {
    inner: Arc<FiniteModel>,
    saturated: Option<bool>,
}

#[pymethods]
impl Model {
    /// Load and validate a model file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Model { inner: load_model(path).map_err(err)?, saturated: None })
    }

    #[getter]
    fn sizes(&self) -> Vec<usize> {
        self.inner.sizes()
    }

    /// Element labels per sort.
    #[getter]
    fn carriers(&self) -> Vec<Vec<String>> {
        self.inner.carriers().to_vec()
    }

    /// For bounded free models, whether the bound was reached without loss.
    #[getter]
    fn saturated(&self) -> Option<bool> {
        self.saturated
    }

    fn to_json(&self) -> String {
        model_to_json(&self.inner, &self.inner.theory().name)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// A closed relation between two models.
#[pyclass(frozen, module = "eatwb")]
struct Relation {
    inner: CoreRelation,
}

#[pymethods]
impl Relation {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Relation { inner: load_relation(path).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn is_difunctional(&self) -> bool {
        self.inner.is_difunctional()
    }

    /// A quadruple violating difunctionality, as text.
    fn difunctionality_witness(&self) -> Option<String> {
        self.inner.difunctionality_witness().map(|q| q.to_string())
    }

    fn is_equivalence(&self) -> bool {
        self.inner.is_equivalence()
    }

    fn compose(&self, other: &Relation) -> PyResult<Relation> {
        Ok(Relation { inner: compose(&self.inner, &other.inner).map_err(err)? })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// A fragment of the free regular Mal'tsev completion theory.
#[pyclass(frozen, module = "eatwb")]
struct Fragment {
    inner: GammaFragment,
}

#[pymethods]
impl Fragment {
    /// Smallest fragment containing the expansion of each sort in `delta`
    /// and the apparatus for each "ctx |- term" in `theta`.
    #[staticmethod]
    #[pyo3(signature = (delta=Vec::new(), theta=Vec::new()))]
    fn closure(delta: Vec<String>, theta: Vec<String>) -> PyResult<Self> {
        let mut reqs: Vec<Request> = delta.iter().map(|s| Request::delta(SortId::new(s.as_str()))).collect();
        reqs.extend(theta.into_iter().map(Request::theta));
        Ok(Fragment { inner: fragment_closure(&reqs).map_err(err)? })
    }

    /// Parse an emitted fragment.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Fragment { inner: fragment_from_text(text).map_err(err)? })
    }

    fn theory(&self) -> Theory {
        Theory { inner: self.inner.theory_arc() }
    }

    fn emit(&self) -> String {
        self.inner.emit()
    }

    /// Prove the Mal'tsev obligations for every expanded sort.
    #[pyo3(signature = (depth=4))]
    fn verify_maltsev(&self, depth: u32) -> PyResult<bool> {
        let results = self.inner.verify_maltsev_witnesses(depth).map_err(err)?;
        Ok(!results.is_empty() && results.iter().all(|(_, r)| r.is_ok()))
    }

    /// Prove the regularity obligations for one theta.
    #[pyo3(signature = (theta, depth=4))]
    fn verify_regularity(&self, theta: &str, depth: u32) -> PyResult<bool> {
        let t = self.inner.parse_theta(theta).map_err(err)?;
        Ok(self.inner.verify_regular_witnesses(&t, depth).map_err(err)?.is_ok())
    }
}

#[pymodule]
fn eatwb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Theory>()?;
    m.add_class::<Model>()?;
    m.add_class::<Relation>()?;
    m.add_class::<Fragment>()?;
    Ok(())
}
