//! Finitary essentially algebraic theories and well-sorted terms.
//!
//! A [`Theory`] carries sorts, operation symbols (each total or partial with
//! its domain-of-definition equations), and equations. Terms are finite trees
//! whose variables are positions in an ordered [`Context`]; variable names are
//! only used for display, so two terms that differ by a renaming compare equal.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// Canonical name of a sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(String);

impl SortId {
    pub fn new(name: impl Into<String>) -> Self {
        SortId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SortId {
    fn from(s: &str) -> Self {
        SortId(s.to_string())
    }
}

/// Ordered, sorted variable context. Equality and hashing ignore the names.
#[derive(Clone, Debug, Default)]
pub struct Context {
    vars: Vec<(String, SortId)>,
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.vars.len() == other.vars.len()
            && self.vars.iter().zip(&other.vars).all(|(a, b)| a.1 == b.1)
    }
}

impl Eq for Context {}

impl Hash for Context {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vars.len().hash(state);
        for (_, s) in &self.vars {
            s.hash(state);
        }
    }
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, N, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (N, S)>,
        N: Into<String>,
        S: Into<SortId>,
    {
        Context {
            vars: pairs.into_iter().map(|(n, s)| (n.into(), s.into())).collect(),
        }
    }

    /// Context `x1:s1, ..., xn:sn`.
    pub fn positional(sorts: &[SortId]) -> Self {
        Context {
            vars: sorts
                .iter()
                .enumerate()
                .map(|(i, s)| (format!("x{}", i + 1), s.clone()))
                .collect(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, sort: SortId) -> usize {
        self.vars.push((name.into(), sort));
        self.vars.len() - 1
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vars[i].0
    }

    pub fn sort(&self, i: usize) -> &SortId {
        &self.vars[i].1
    }

    pub fn sorts(&self) -> Vec<SortId> {
        self.vars.iter().map(|(_, s)| s.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|(n, _)| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SortId)> {
        self.vars.iter().map(|(n, s)| (n.as_str(), s))
    }

    /// Same sorts, names replaced by `x1..xn`.
    pub fn canonical(&self) -> Context {
        Context::positional(&self.sorts())
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, s)) in self.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}:{s}")?;
        }
        Ok(())
    }
}

/// A term tree. `Var(i)` refers to position `i` of the surrounding context.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn app(op: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(op.into(), args)
    }

    pub fn constant(op: impl Into<String>) -> Term {
        Term::App(op.into(), Vec::new())
    }

    /// Variables have depth 0; an application is one deeper than its deepest argument.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Var(i) => {
                out.insert(*i);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn ops(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_ops(&mut out);
        out
    }

    fn collect_ops(&self, out: &mut BTreeSet<String>) {
        if let Term::App(op, args) = self {
            out.insert(op.clone());
            args.iter().for_each(|a| a.collect_ops(out));
        }
    }

    /// Replace `Var(i)` by `args[i]`.
    pub fn substitute(&self, args: &[Term]) -> Term {
        match self {
            Term::Var(i) => args[*i].clone(),
            Term::App(op, xs) => Term::App(op.clone(), xs.iter().map(|x| x.substitute(args)).collect()),
        }
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Term::App(_, args) => args.get(i)?.subterm(rest),
                Term::Var(_) => None,
            },
        }
    }

    /// Subterms in post-order (children before parents), without duplicates.
    pub fn subterms_postorder(&self) -> Vec<&Term> {
        fn go<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
            if let Term::App(_, args) = t {
                for a in args {
                    go(a, out);
                }
            }
            if !out.contains(&t) {
                out.push(t);
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn display<'a>(&'a self, ctx: &'a Context) -> TermDisplay<'a> {
        TermDisplay { term: self, names: Names::Ctx(ctx) }
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> TermDisplay<'a> {
        TermDisplay { term: self, names: Names::List(names) }
    }

    /// Print with variables named `x1..xn` by position.
    pub fn canonical_string(&self) -> String {
        TermDisplay { term: self, names: Names::Positional }.to_string()
    }

    /// Ordering key used for representatives and candidate enumeration.
    pub fn order_key(&self) -> (usize, usize, String) {
        (self.depth(), self.size(), self.canonical_string())
    }
}

enum Names<'a> {
    Ctx(&'a Context),
    List(&'a [String]),
    Positional,
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    names: Names<'a>,
}

impl TermDisplay<'_> {
    fn write(&self, t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match t {
            Term::Var(i) => match &self.names {
                Names::Ctx(c) if *i < c.len() => f.write_str(c.name(*i)),
                Names::List(l) if *i < l.len() => f.write_str(&l[*i]),
                _ => write!(f, "x{}", i + 1),
            },
            Term::App(op, args) => {
                f.write_str(op)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (k, a) in args.iter().enumerate() {
                        if k > 0 {
                            f.write_str(",")?;
                        }
                        self.write(a, f)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.term, f)
    }
}

/// A term together with its context, i.e. a term `s_1 x ... x s_n -> s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypedTerm {
    pub ctx: Context,
    pub term: Term,
}

impl TypedTerm {
    pub fn new(ctx: Context, term: Term) -> Self {
        TypedTerm { ctx, term }
    }

    /// `x1:s1,x2:s2|body` with positional variable names.
    pub fn canonical_string(&self) -> String {
        let ctx: Vec<String> = self
            .ctx
            .iter()
            .enumerate()
            .map(|(i, (_, s))| format!("x{}:{}", i + 1, s))
            .collect();
        format!("{}|{}", ctx.join(","), self.term.canonical_string())
    }
}

impl fmt::Display for TypedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.ctx, self.term.display(&self.ctx))
    }
}

/// An equation in a context. Stored directionally for display only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub ctx: Context,
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(ctx: Context, lhs: Term, rhs: Term) -> Self {
        Equation { ctx, lhs, rhs }
    }

    /// Same equation up to orientation.
    pub fn same_as(&self, other: &Equation) -> bool {
        self.ctx == other.ctx
            && ((self.lhs == other.lhs && self.rhs == other.rhs)
                || (self.lhs == other.rhs && self.rhs == other.lhs))
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} |- {} = {}",
            self.ctx,
            self.lhs.display(&self.ctx),
            self.rhs.display(&self.ctx)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Totality {
    Total,
    /// Domain of definition: the tuples satisfying these equations, each in
    /// the context `x1..xn` of the argument sorts.
    Partial(Vec<Equation>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpSymbol {
    pub name: String,
    pub arg_sorts: Vec<SortId>,
    pub result_sort: SortId,
    pub totality: Totality,
}

impl OpSymbol {
    pub fn total(name: impl Into<String>, arg_sorts: Vec<SortId>, result_sort: SortId) -> Self {
        OpSymbol {
            name: name.into(),
            arg_sorts,
            result_sort,
            totality: Totality::Total,
        }
    }

    /// Partial symbol; each `(lhs, rhs)` is over `x1..xn` of the argument sorts.
    pub fn partial(
        name: impl Into<String>,
        arg_sorts: Vec<SortId>,
        result_sort: SortId,
        def: Vec<(Term, Term)>,
    ) -> Self {
        let ctx = Context::positional(&arg_sorts);
        OpSymbol {
            name: name.into(),
            totality: Totality::Partial(
                def.into_iter()
                    .map(|(l, r)| Equation::new(ctx.clone(), l, r))
                    .collect(),
            ),
            arg_sorts,
            result_sort,
        }
    }

    pub fn is_total(&self) -> bool {
        matches!(self.totality, Totality::Total)
    }

    pub fn arity(&self) -> usize {
        self.arg_sorts.len()
    }

    pub fn def_equations(&self) -> &[Equation] {
        match &self.totality {
            Totality::Total => &[],
            Totality::Partial(eqs) => eqs,
        }
    }
}

/// A finitary essentially algebraic theory.
#[derive(Clone, Debug, Default)]
pub struct Theory {
    pub name: String,
    sorts: Vec<SortId>,
    ops: Vec<OpSymbol>,
    equations: Vec<Equation>,
    provenance: Option<String>,
    sort_index: HashMap<SortId, usize>,
    op_index: HashMap<String, usize>,
}

impl PartialEq for Theory {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.sorts == other.sorts
            && self.ops == other.ops
            && self.equations == other.equations
            && self.provenance == other.provenance
    }
}

impl Eq for Theory {}

impl Theory {
    pub fn new(name: impl Into<String>) -> Self {
        Theory {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_sort(&mut self, sort: impl Into<SortId>) -> Result<usize> {
        let sort = sort.into();
        if self.sort_index.contains_key(&sort) {
            return Err(Error::Duplicate(sort.to_string()));
        }
        self.sort_index.insert(sort.clone(), self.sorts.len());
        self.sorts.push(sort);
        Ok(self.sorts.len() - 1)
    }

    pub fn add_op(&mut self, op: OpSymbol) -> Result<usize> {
        if self.op_index.contains_key(&op.name) {
            return Err(Error::Duplicate(op.name));
        }
        self.op_index.insert(op.name.clone(), self.ops.len());
        self.ops.push(op);
        Ok(self.ops.len() - 1)
    }

    pub fn add_equation(&mut self, eq: Equation) {
        self.equations.push(eq);
    }

    pub fn set_provenance(&mut self, p: Option<String>) {
        self.provenance = p;
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn sorts(&self) -> &[SortId] {
        &self.sorts
    }

    pub fn ops(&self) -> &[OpSymbol] {
        &self.ops
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn sort_index(&self, s: &SortId) -> Option<usize> {
        self.sort_index.get(s).copied()
    }

    pub fn has_sort(&self, s: &SortId) -> bool {
        self.sort_index.contains_key(s)
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.op_index.get(name).copied()
    }

    pub fn op(&self, name: &str) -> Option<&OpSymbol> {
        self.op_index(name).map(|i| &self.ops[i])
    }

    /// Sort of a term, checking well-sortedness.
    pub fn sort_of(&self, ctx: &Context, term: &Term) -> Result<SortId> {
        self.sort_at(ctx, term, &mut Vec::new())
    }

    fn sort_at(&self, ctx: &Context, term: &Term, path: &mut Vec<usize>) -> Result<SortId> {
        match term {
            Term::Var(i) => {
                if *i < ctx.len() {
                    Ok(ctx.sort(*i).clone())
                } else {
                    Err(Error::UnknownVariable(format!("#{i}")))
                }
            }
            Term::App(name, args) => {
                let op = self.op(name).ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                if op.arity() != args.len() {
                    return Err(Error::ArityMismatch {
                        path: path.clone(),
                        op: name.clone(),
                        expected: op.arity(),
                        found: args.len(),
                    });
                }
                for (k, (a, expected)) in args.iter().zip(&op.arg_sorts).enumerate() {
                    path.push(k);
                    let found = self.sort_at(ctx, a, path)?;
                    if &found != expected {
                        return Err(Error::SortMismatch {
                            path: path.clone(),
                            expected: expected.to_string(),
                            found: found.to_string(),
                        });
                    }
                    path.pop();
                }
                Ok(op.result_sort.clone())
            }
        }
    }

    pub fn check_equation(&self, eq: &Equation) -> Result<SortId> {
        let l = self.sort_of(&eq.ctx, &eq.lhs)?;
        let r = self.sort_of(&eq.ctx, &eq.rhs)?;
        if l != r {
            return Err(Error::SortMismatch {
                path: vec![],
                expected: l.to_string(),
                found: r.to_string(),
            });
        }
        Ok(l)
    }

    pub fn is_total_term(&self, term: &Term) -> bool {
        term.ops().iter().all(|o| self.op(o).is_some_and(OpSymbol::is_total))
    }
}

/// An unchecked term tree as produced by a parser.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTerm {
    pub head: String,
    /// `None` for a bare identifier, which may be a variable or a constant.
    pub args: Option<Vec<RawTerm>>,
}

impl RawTerm {
    pub fn ident(name: impl Into<String>) -> Self {
        RawTerm { head: name.into(), args: None }
    }

    pub fn app(name: impl Into<String>, args: Vec<RawTerm>) -> Self {
        RawTerm { head: name.into(), args: Some(args) }
    }
}

/// Resolve a raw tree against a theory and context, producing a well-sorted
/// term. Bare identifiers are variables when the context binds them and
/// constants otherwise.
pub fn check_sorting(theory: &Theory, ctx: &Context, raw: &RawTerm) -> Result<(Term, SortId)> {
    fn resolve(theory: &Theory, ctx: &Context, raw: &RawTerm) -> Result<Term> {
        match &raw.args {
            None => {
                if let Some(i) = ctx.index_of(&raw.head) {
                    Ok(Term::Var(i))
                } else if theory.op(&raw.head).is_some() {
                    Ok(Term::App(raw.head.clone(), Vec::new()))
                } else {
                    Err(Error::UnknownVariable(raw.head.clone()))
                }
            }
            Some(args) => {
                if theory.op(&raw.head).is_none() {
                    return Err(Error::UnknownSymbol(raw.head.clone()));
                }
                let args = args
                    .iter()
                    .map(|a| resolve(theory, ctx, a))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Term::App(raw.head.clone(), args))
            }
        }
    }
    let term = resolve(theory, ctx, raw)?;
    let sort = theory.sort_of(ctx, &term)?;
    Ok((term, sort))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Offending symbol, equation or sort.
    pub subject: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, subject: impl Into<String>, rule: impl Into<String>) {
        self.violations.push(Violation {
            subject: subject.into(),
            rule: rule.into(),
        });
    }
}

pub fn validate_theory(t: &Theory) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if t.sorts.is_empty() {
        rep.warnings.push("theory declares no sorts".into());
    }
    for op in &t.ops {
        for s in op.arg_sorts.iter().chain(std::iter::once(&op.result_sort)) {
            if !t.has_sort(s) {
                rep.push(&op.name, format!("unknown sort `{s}`"));
            }
        }
        for eq in op.def_equations() {
            let subject = format!("{} when {}", op.name, eq);
            if eq.ctx.sorts() != op.arg_sorts {
                rep.push(&subject, "Def context must be the argument variables x1..xn");
            }
            for o in eq.lhs.ops().union(&eq.rhs.ops()) {
                match t.op(o) {
                    Some(sym) if !sym.is_total() => {
                        rep.push(&subject, format!("Def references non-total symbol `{o}`"))
                    }
                    None => rep.push(&subject, format!("Def references unknown symbol `{o}`")),
                    _ => {}
                }
            }
            if let Err(e) = t.check_equation(eq) {
                rep.push(&subject, format!("ill-sorted Def equation: {e}"));
            }
        }
    }
    for eq in &t.equations {
        for (_, s) in eq.ctx.iter() {
            if !t.has_sort(s) {
                rep.push(eq.to_string(), format!("unknown sort `{s}`"));
            }
        }
        if let Err(e) = t.check_equation(eq) {
            rep.push(eq.to_string(), format!("ill-sorted equation: {e}"));
        }
    }
    rep
}

/// Union of `base` and `delta`, checking that `base` is included in the
/// result: totality flags are preserved and Def is unchanged on shared symbols.
pub fn extend_theory(base: &Theory, delta: &Theory) -> Result<Theory> {
    let mut out = base.clone();
    for s in &delta.sorts {
        if !out.has_sort(s) {
            out.add_sort(s.clone())?;
        }
    }
    for op in &delta.ops {
        match base.op(&op.name) {
            None => {
                out.add_op(op.clone())?;
            }
            Some(old) => {
                if old.is_total() != op.is_total() {
                    return Err(Error::InclusionViolation {
                        symbol: op.name.clone(),
                        reason: if old.is_total() {
                            "total symbol re-declared as partial".into()
                        } else {
                            "partial symbol re-declared as total".into()
                        },
                    });
                }
                if old.arg_sorts != op.arg_sorts || old.result_sort != op.result_sort {
                    return Err(Error::InclusionViolation {
                        symbol: op.name.clone(),
                        reason: "signature changed".into(),
                    });
                }
                if old.def_equations() != op.def_equations() {
                    return Err(Error::InclusionViolation {
                        symbol: op.name.clone(),
                        reason: "Def changed".into(),
                    });
                }
            }
        }
    }
    for eq in &delta.equations {
        if !out.equations.iter().any(|e| e.same_as(eq)) {
            out.add_equation(eq.clone());
        }
    }
    if delta.provenance.is_some() {
        out.provenance = delta.provenance.clone();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> SortId {
        SortId::from("star")
    }

    #[test]
    fn gamma_zero_is_valid() {
        let mut t = Theory::new("g0");
        t.add_sort("star").unwrap();
        assert!(validate_theory(&t).is_ok());
    }

    #[test]
    fn total_binop_is_valid() {
        let mut t = Theory::new("binop");
        t.add_sort("s").unwrap();
        t.add_op(OpSymbol::total("m", vec!["s".into(), "s".into()], "s".into()))
            .unwrap();
        assert!(validate_theory(&t).is_ok());
    }

    #[test]
    fn def_citing_partial_symbol_is_a_violation() {
        let mut t = Theory::new("bad");
        t.add_sort("s").unwrap();
        t.add_op(OpSymbol::partial(
            "p",
            vec!["s".into()],
            "s".into(),
            vec![(Term::var(0), Term::var(0))],
        ))
        .unwrap();
        t.add_op(OpSymbol::partial(
            "q",
            vec!["s".into()],
            "s".into(),
            vec![(Term::app("p", vec![Term::var(0)]), Term::var(0))],
        ))
        .unwrap();
        let rep = validate_theory(&t);
        assert!(!rep.is_ok());
        assert!(rep.violations[0].rule.contains("Def references non-total symbol"));
    }

    #[test]
    fn empty_theory_warns() {
        let rep = validate_theory(&Theory::new("empty"));
        assert!(rep.is_ok());
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn sorting_reports_path() {
        let mut t = Theory::new("d");
        t.add_sort("star").unwrap();
        t.add_sort("star@0").unwrap();
        t.add_op(OpSymbol::total("alpha", vec![star()], "star@0".into()))
            .unwrap();
        let ctx = Context::from_pairs([("x", "star")]);
        let raw = RawTerm::app("alpha", vec![RawTerm::app("alpha", vec![RawTerm::ident("x")])]);
        match check_sorting(&t, &ctx, &raw) {
            Err(Error::SortMismatch { path, .. }) => assert_eq!(path, vec![0]),
            other => panic!("unexpected {other:?}"),
        }
        let (v, s) = check_sorting(&t, &ctx, &RawTerm::ident("x")).unwrap();
        assert_eq!(v.depth(), 0);
        assert_eq!(s, star());
        assert!(matches!(
            check_sorting(&t, &ctx, &RawTerm::ident("y")),
            Err(Error::UnknownVariable(_))
        ));
        assert!(matches!(
            check_sorting(&t, &ctx, &RawTerm::app("beta", vec![])),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn contexts_compare_up_to_renaming() {
        let a = Context::from_pairs([("x", "s"), ("y", "s")]);
        let b = Context::from_pairs([("u", "s"), ("v", "s")]);
        assert_eq!(a, b);
        let e1 = Equation::new(a, Term::var(0), Term::var(1));
        let e2 = Equation::new(b, Term::var(1), Term::var(0));
        assert!(e1.same_as(&e2));
    }

    #[test]
    fn extend_with_empty_delta_is_identity() {
        let mut t = Theory::new("t");
        t.add_sort("s").unwrap();
        t.add_op(OpSymbol::total("f", vec!["s".into()], "s".into())).unwrap();
        let e = extend_theory(&t, &Theory::new("t")).unwrap();
        assert_eq!(e, t);
    }

    #[test]
    fn extend_rejects_totality_change() {
        let mut t = Theory::new("t");
        t.add_sort("s").unwrap();
        t.add_op(OpSymbol::total("f", vec!["s".into()], "s".into())).unwrap();
        let mut d = Theory::new("t");
        d.add_sort("s").unwrap();
        d.add_op(OpSymbol::partial("f", vec!["s".into()], "s".into(), vec![]))
            .unwrap();
        assert!(matches!(
            extend_theory(&t, &d),
            Err(Error::InclusionViolation { .. })
        ));
    }

    #[test]
    fn term_metrics() {
        let t = Term::app("f", vec![Term::var(0), Term::app("g", vec![Term::var(1)])]);
        assert_eq!(t.depth(), 2);
        assert_eq!(t.size(), 4);
        assert_eq!(t.canonical_string(), "f(x1,g(x2))");
        assert_eq!(Term::constant("e").depth(), 1);
    }
}
