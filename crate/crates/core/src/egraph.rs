//! Congruence closure over ground terms with partial operations.
//!
//! Every node in the graph stands for a term known to be defined. A partial
//! application is only added once its Def equations hold in the current
//! closure (or when it is explicitly assumed). Equations of the theory are
//! instantiated by e-matching one side against existing nodes and building
//! the other side; they are never applied at undefined tuples.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::theory::{Context, SortId, Term, Theory};

pub(crate) type Id = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Head {
    Gen(u32),
    Op(u32),
}

#[derive(Clone, Debug)]
struct Node {
    head: Head,
    children: Vec<Id>,
    sort: u32,
    alive: bool,
}

/// Patterns are terms with resolved operation indices.
#[derive(Clone, Debug)]
pub(crate) enum Pat {
    Var(usize),
    App(u32, Vec<Pat>),
}

impl Pat {
    pub(crate) fn compile(theory: &Theory, t: &Term) -> Pat {
        match t {
            Term::Var(i) => Pat::Var(*i),
            Term::App(name, args) => Pat::App(
                theory.op_index(name).expect("well-sorted term") as u32,
                args.iter().map(|a| Pat::compile(theory, a)).collect(),
            ),
        }
    }

    fn vars(&self, out: &mut Vec<usize>) {
        match self {
            Pat::Var(i) => {
                if !out.contains(i) {
                    out.push(*i)
                }
            }
            Pat::App(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }
}

/// One recorded reasoning step. Terms are ground terms over the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceStep {
    AssumeDefined(Term),
    Assume(Term, Term),
    /// An instance of equation `k` of the theory, as `lhs = rhs`.
    Axiom(usize, Term, Term),
}

/// Ordered list of steps; replayable by [`replay`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub generators: Context,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn lines(&self) -> Vec<String> {
        let names: Vec<String> = self.generators.iter().map(|(n, _)| n.to_string()).collect();
        self.steps
            .iter()
            .map(|s| match s {
                TraceStep::AssumeDefined(t) => format!("assume-defined {}", t.display_with(&names)),
                TraceStep::Assume(a, b) => {
                    format!("assume {} = {}", a.display_with(&names), b.display_with(&names))
                }
                TraceStep::Axiom(k, a, b) => {
                    format!("axiom {k}: {} = {}", a.display_with(&names), b.display_with(&names))
                }
            })
            .collect()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

pub(crate) struct EGraph {
    theory: Arc<Theory>,
    gens: Context,
    op_args: Vec<Vec<u32>>,
    op_res: Vec<u32>,
    eqs: Vec<(Pat, Pat, Vec<u32>)>,
    defs: Vec<Vec<(Pat, Pat)>>,
    nodes: Vec<Node>,
    terms: Vec<Term>,
    parent: Vec<Id>,
    memo: HashMap<(Head, Vec<Id>), Id>,
    depth: Vec<u32>,
    class_nodes: Vec<Vec<Id>>,
    op_nodes: Vec<Vec<Id>>,
    cap: usize,
    unions: usize,
    trace: Option<Vec<TraceStep>>,
}

impl EGraph {
    pub(crate) fn new(theory: Arc<Theory>, gens: Context, cap: usize, tracing: bool) -> Self {
        let th = theory.clone();
        let sidx = |s: &SortId| -> u32 { th.sort_index(s).expect("validated theory") as u32 };
        let op_args = theory.ops().iter().map(|o| o.arg_sorts.iter().map(sidx).collect()).collect();
        let op_res = theory.ops().iter().map(|o| sidx(&o.result_sort)).collect();
        let eqs = theory
            .equations()
            .iter()
            .map(|e| {
                (
                    Pat::compile(&theory, &e.lhs),
                    Pat::compile(&theory, &e.rhs),
                    e.ctx.sorts().iter().map(sidx).collect(),
                )
            })
            .collect();
        let defs = theory
            .ops()
            .iter()
            .map(|o| {
                o.def_equations()
                    .iter()
                    .map(|e| (Pat::compile(&theory, &e.lhs), Pat::compile(&theory, &e.rhs)))
                    .collect()
            })
            .collect();
        let n_ops = theory.ops().len();
        let mut g = EGraph {
            gens: gens.clone(),
            op_args,
            op_res,
            eqs,
            defs,
            nodes: Vec::new(),
            terms: Vec::new(),
            parent: Vec::new(),
            memo: HashMap::new(),
            depth: Vec::new(),
            class_nodes: Vec::new(),
            op_nodes: vec![Vec::new(); n_ops],
            cap,
            unions: 0,
            trace: tracing.then(Vec::new),
            theory,
        };
        for i in 0..gens.len() {
            let s = sidx(gens.sort(i));
            g.add_node(Head::Gen(i as u32), Vec::new(), s, 0, Term::Var(i));
        }
        g.rebuild();
        g
    }

    pub(crate) fn take_trace(&mut self) -> Trace {
        Trace {
            generators: self.gens.clone(),
            steps: self.trace.take().unwrap_or_default(),
        }
    }

    fn record(&mut self, step: TraceStep) {
        if let Some(t) = self.trace.as_mut() {
            t.push(step);
        }
    }

    pub(crate) fn find(&self, mut a: Id) -> Id {
        while self.parent[a as usize] != a {
            a = self.parent[a as usize];
        }
        a
    }

    fn canon(&self, children: &[Id]) -> Vec<Id> {
        children.iter().map(|&c| self.find(c)).collect()
    }

    fn add_node(&mut self, head: Head, children: Vec<Id>, sort: u32, depth: u32, term: Term) -> Id {
        let id = self.nodes.len() as Id;
        self.memo.insert((head, children.clone()), id);
        if let Head::Op(o) = head {
            self.op_nodes[o as usize].push(id);
        }
        self.nodes.push(Node {
            head,
            children,
            sort,
            alive: true,
        });
        self.terms.push(term);
        self.parent.push(id);
        self.depth.push(depth);
        self.class_nodes.push(vec![id]);
        id
    }

    fn lookup(&self, head: Head, children: &[Id]) -> Option<Id> {
        self.memo.get(&(head, self.canon(children))).map(|&n| self.find(n))
    }

    pub(crate) fn union(&mut self, a: Id, b: Id) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.parent[hi as usize] = lo;
        let moved = std::mem::take(&mut self.class_nodes[hi as usize]);
        self.class_nodes[lo as usize].extend(moved);
        let d = self.depth[hi as usize].min(self.depth[lo as usize]);
        self.depth[lo as usize] = d;
        self.unions += 1;
        true
    }

    pub(crate) fn op_name(&self, op: u32) -> &str {
        &self.theory.ops()[op as usize].name
    }

    pub(crate) fn class_depth(&self, c: Id) -> u32 {
        self.depth[self.find(c) as usize]
    }

    pub(crate) fn witness(&self, c: Id) -> &Term {
        &self.terms[self.find(c) as usize]
    }

    fn app_term(&self, op: u32, children: &[Id]) -> Term {
        Term::App(
            self.theory.ops()[op as usize].name.clone(),
            children.iter().map(|&c| self.witness(c).clone()).collect(),
        )
    }

    /// Whether the Def equations of `op` hold at `children`.
    fn def_holds(&mut self, op: u32, children: &[Id]) -> bool {
        let defs = self.defs[op as usize].clone();
        let subst: Vec<Option<Id>> = children.iter().map(|&c| Some(c)).collect();
        defs.iter().all(|(l, r)| {
            let a = self.build(l, &subst, None);
            let b = self.build(r, &subst, None);
            matches!((a, b), (Some(a), Some(b)) if self.find(a) == self.find(b))
        })
    }

    /// Add `op(children)` if it is derivably defined and within `bound`.
    fn make_app(&mut self, op: u32, children: Vec<Id>, bound: Option<u32>) -> Option<Id> {
        let children = self.canon(&children);
        if let Some(id) = self.lookup(Head::Op(op), &children) {
            return Some(id);
        }
        let d = 1 + children.iter().map(|&c| self.class_depth(c)).max().unwrap_or(0);
        if bound.is_some_and(|b| d > b) {
            return None;
        }
        if !self.defs[op as usize].is_empty() && !self.def_holds(op, &children) {
            return None;
        }
        let t = self.app_term(op, &children);
        let children = self.canon(&children);
        if let Some(id) = self.lookup(Head::Op(op), &children) {
            return Some(id);
        }
        Some(self.add_node(Head::Op(op), children, self.op_res[op as usize], d, t))
    }

    /// Build an instance of `pat` (variables bound by `subst`) if every
    /// subterm is derivably defined. Unbound variables fail.
    pub(crate) fn build(&mut self, pat: &Pat, subst: &[Option<Id>], bound: Option<u32>) -> Option<Id> {
        match pat {
            Pat::Var(i) => subst[*i].map(|c| self.find(c)),
            Pat::App(op, args) => {
                let mut kids = Vec::with_capacity(args.len());
                for a in args {
                    kids.push(self.build(a, subst, bound)?);
                }
                self.make_app(*op, kids, bound)
            }
        }
    }

    pub(crate) fn lookup_term(&self, t: &Term) -> Option<Id> {
        match t {
            Term::Var(i) => Some(self.find(*i as Id)),
            Term::App(name, args) => {
                let op = self.theory.op_index(name)? as u32;
                let kids: Option<Vec<Id>> = args.iter().map(|a| self.lookup_term(a)).collect();
                self.lookup(Head::Op(op), &kids?)
            }
        }
    }

    fn force_inner(&mut self, t: &Term) -> Id {
        match t {
            Term::Var(i) => self.find(*i as Id),
            Term::App(name, args) => {
                let op = self.theory.op_index(name).expect("well-sorted term") as u32;
                let kids: Vec<Id> = args.iter().map(|a| self.force_inner(a)).collect();
                let kids = self.canon(&kids);
                if let Some(id) = self.lookup(Head::Op(op), &kids) {
                    return id;
                }
                let defs = self.defs[op as usize].clone();
                let subst: Vec<Option<Id>> = kids.iter().map(|&c| Some(c)).collect();
                for (l, r) in &defs {
                    let a = self.build(l, &subst, None).expect("Def sides are total");
                    let b = self.build(r, &subst, None).expect("Def sides are total");
                    self.union(a, b);
                }
                let d = 1 + kids.iter().map(|&c| self.class_depth(c)).max().unwrap_or(0);
                let term = self.app_term(op, &kids);
                let kids = self.canon(&kids);
                match self.lookup(Head::Op(op), &kids) {
                    Some(id) => id,
                    None => self.add_node(Head::Op(op), kids, self.op_res[op as usize], d, term),
                }
            }
        }
    }

    /// Assume a term (and hence all its subterms) defined.
    pub(crate) fn force(&mut self, t: &Term) -> Id {
        self.record(TraceStep::AssumeDefined(t.clone()));
        let id = self.force_inner(t);
        self.rebuild();
        id
    }

    /// Assume two terms defined and equal.
    pub(crate) fn assume_equal(&mut self, a: &Term, b: &Term) {
        self.record(TraceStep::Assume(a.clone(), b.clone()));
        let x = self.force_inner(a);
        let y = self.force_inner(b);
        self.union(x, y);
        self.rebuild();
    }

    /// Restore congruence, drop duplicate nodes, recompute class depths and
    /// the per-class and per-operation node indices.
    pub(crate) fn rebuild(&mut self) {
        loop {
            for i in 0..self.parent.len() {
                let r = self.find(i as Id);
                self.parent[i] = r;
            }
            let mut memo: HashMap<(Head, Vec<Id>), Id> = HashMap::with_capacity(self.nodes.len());
            let mut merges = Vec::new();
            for i in 0..self.nodes.len() {
                if !self.nodes[i].alive {
                    continue;
                }
                let key = (self.nodes[i].head, self.canon(&self.nodes[i].children));
                match memo.get(&key) {
                    Some(&j) => {
                        self.nodes[i].alive = false;
                        merges.push((j, i as Id));
                    }
                    None => {
                        memo.insert(key, i as Id);
                    }
                }
            }
            self.memo = memo;
            let mut changed = false;
            for (a, b) in merges {
                changed |= self.union(a, b);
            }
            if !changed {
                break;
            }
        }
        for i in 0..self.nodes.len() {
            self.nodes[i].children = self.canon(&self.nodes[i].children);
        }
        // class depths: least fixpoint from generators upward
        let n = self.nodes.len();
        let mut depth = vec![u32::MAX; n];
        loop {
            let mut changed = false;
            for i in 0..n {
                let node = &self.nodes[i];
                if !node.alive {
                    continue;
                }
                let d = match node.head {
                    Head::Gen(_) => 0,
                    Head::Op(_) => {
                        let m = node.children.iter().map(|&c| depth[c as usize]).max().unwrap_or(0);
                        if m == u32::MAX {
                            continue;
                        }
                        m + 1
                    }
                };
                let r = self.parent[i] as usize;
                if d < depth[r] {
                    depth[r] = d;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        // forced nodes whose depth could not be derived keep their old value
        for (i, d) in depth.iter_mut().enumerate().take(n) {
            if self.parent[i] as usize == i && *d == u32::MAX {
                *d = self.depth[i];
            }
        }
        self.depth = depth;
        for v in self.class_nodes.iter_mut() {
            v.clear();
        }
        for v in self.op_nodes.iter_mut() {
            v.clear();
        }
        for i in 0..n {
            if self.nodes[i].alive {
                self.class_nodes[self.parent[i] as usize].push(i as Id);
                if let Head::Op(o) = self.nodes[i].head {
                    self.op_nodes[o as usize].push(i as Id);
                }
            }
        }
    }

    /// Canonical class ids, in creation order.
    pub(crate) fn classes(&self) -> Vec<Id> {
        (0..self.nodes.len() as Id)
            .filter(|&i| self.parent[i as usize] == i && !self.class_nodes[i as usize].is_empty())
            .collect()
    }

    pub(crate) fn class_sort(&self, c: Id) -> u32 {
        self.nodes[self.find(c) as usize].sort
    }

    pub(crate) fn class_count(&self) -> usize {
        self.classes().len()
    }

    fn classes_by_sort(&self) -> Vec<Vec<Id>> {
        let mut out = vec![Vec::new(); self.theory.sorts().len()];
        for c in self.classes() {
            out[self.class_sort(c) as usize].push(c);
        }
        out
    }

    /// Operation nodes (op, canonical children, class) for table extraction.
    pub(crate) fn applications(&self) -> Vec<(u32, Vec<Id>, Id)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.alive)
            .filter_map(|(i, n)| match n.head {
                Head::Op(o) => Some((o, self.canon(&n.children), self.find(i as Id))),
                Head::Gen(_) => None,
            })
            .collect()
    }

    fn match_class(&self, pat: &Pat, class: Id, subst: &[Option<Id>], out: &mut Vec<Vec<Option<Id>>>) {
        match pat {
            Pat::Var(i) => match subst[*i] {
                None => {
                    let mut s = subst.to_vec();
                    s[*i] = Some(class);
                    out.push(s);
                }
                Some(c) if self.find(c) == class => out.push(subst.to_vec()),
                Some(_) => {}
            },
            Pat::App(op, args) => {
                for &n in &self.class_nodes[class as usize] {
                    let node = &self.nodes[n as usize];
                    if node.head == Head::Op(*op) {
                        self.match_children(args, &node.children, subst, out);
                    }
                }
            }
        }
    }

    fn match_children(&self, args: &[Pat], kids: &[Id], subst: &[Option<Id>], out: &mut Vec<Vec<Option<Id>>>) {
        let mut partial = vec![subst.to_vec()];
        for (a, &k) in args.iter().zip(kids) {
            let mut next = Vec::new();
            for s in &partial {
                self.match_class(a, self.find(k), s, &mut next);
            }
            if next.is_empty() {
                return;
            }
            partial = next;
        }
        out.extend(partial);
    }

    fn ematch(&self, pat: &Pat, nvars: usize) -> Vec<Vec<Option<Id>>> {
        let mut out = Vec::new();
        if let Pat::App(op, args) = pat {
            for &n in &self.op_nodes[*op as usize] {
                let node = &self.nodes[n as usize];
                self.match_children(args, &node.children, &vec![None; nvars], &mut out);
            }
        }
        let mut seen = HashSet::new();
        out.retain(|s| seen.insert(s.clone()));
        out
    }

    fn instance(&self, pat: &Pat, subst: &[Option<Id>]) -> Term {
        match pat {
            Pat::Var(i) => self.witness(subst[*i].expect("bound variable")).clone(),
            Pat::App(op, args) => Term::App(
                self.theory.ops()[*op as usize].name.clone(),
                args.iter().map(|a| self.instance(a, subst)).collect(),
            ),
        }
    }

    /// Saturate up to term depth `bound`.
    ///
    /// `goals` are rebuilt (without depth limit) on every round. With
    /// `expand`, every operation is also applied to every tuple of classes
    /// and equation variables not bound by matching range over all classes.
    pub(crate) fn saturate(&mut self, bound: u32, goals: &[Term], expand: bool) -> Result<()> {
        let theory = self.theory.clone();
        let goal_pats: Vec<Pat> = goals.iter().map(|g| Pat::compile(&theory, g)).collect();
        let all_gens: Vec<Option<Id>> = (0..self.gens.len() as Id).map(Some).collect();
        loop {
            let before = (self.nodes.len(), self.unions);
            for p in &goal_pats {
                self.build(p, &all_gens, None);
            }
            let eqs = self.eqs.clone();
            for (k, (l, r, ctx_sorts)) in eqs.iter().enumerate() {
                let nvars = ctx_sorts.len();
                for (pat, other, flipped) in [(l, r, false), (r, l, true)] {
                    if let (Pat::Var(i), Pat::Var(j)) = (pat, other) {
                        if i != j && !flipped {
                            self.collapse_sort(k, ctx_sorts[*i]);
                        }
                        continue;
                    }
                    let mut substs = self.ematch(pat, nvars);
                    if expand {
                        substs = self.extend_unbound(substs, other, ctx_sorts);
                    }
                    for s in substs {
                        let a = match self.build(pat, &s, None) {
                            Some(a) => a,
                            None => continue,
                        };
                        let b = match self.build(other, &s, Some(bound)) {
                            Some(b) => b,
                            None => continue,
                        };
                        if self.find(a) != self.find(b) {
                            if self.trace.is_some() {
                                let (li, ri) = (self.instance(pat, &s), self.instance(other, &s));
                                let step = if flipped {
                                    TraceStep::Axiom(k, ri, li)
                                } else {
                                    TraceStep::Axiom(k, li, ri)
                                };
                                self.record(step);
                            }
                            self.union(a, b);
                        }
                    }
                }
            }
            if expand {
                self.expand_once(bound);
            }
            self.rebuild();
            if self.class_count() > self.cap {
                return Err(Error::BudgetExceeded(self.cap));
            }
            if (self.nodes.len(), self.unions) == before {
                return Ok(());
            }
        }
    }

    fn extend_unbound(&self, substs: Vec<Vec<Option<Id>>>, other: &Pat, ctx_sorts: &[u32]) -> Vec<Vec<Option<Id>>> {
        let mut vars = Vec::new();
        other.vars(&mut vars);
        let by_sort = self.classes_by_sort();
        let mut out = Vec::new();
        for s in substs {
            let mut acc = vec![s];
            for &v in &vars {
                if acc[0][v].is_some() {
                    continue;
                }
                let mut next = Vec::new();
                for a in &acc {
                    for &c in &by_sort[ctx_sorts[v] as usize] {
                        let mut b = a.clone();
                        b[v] = Some(c);
                        next.push(b);
                    }
                }
                acc = next;
            }
            out.extend(acc);
        }
        out
    }

    /// An equation `x = y` between distinct variables identifies every pair
    /// of elements of that sort.
    fn collapse_sort(&mut self, k: usize, sort: u32) {
        let cs: Vec<Id> = self.classes().into_iter().filter(|&c| self.class_sort(c) == sort).collect();
        if let Some((&first, rest)) = cs.split_first() {
            for &c in rest {
                if self.find(first) != self.find(c) {
                    let (a, b) = (self.witness(first).clone(), self.witness(c).clone());
                    self.record(TraceStep::Axiom(k, a, b));
                    self.union(first, c);
                }
            }
        }
    }

    fn expand_once(&mut self, bound: u32) {
        let by_sort = self.classes_by_sort();
        for op in 0..self.op_args.len() as u32 {
            let dims: Vec<usize> = self.op_args[op as usize].iter().map(|&s| by_sort[s as usize].len()).collect();
            for pick in crate::model::Tuples::new(&dims) {
                let kids: Vec<Id> = pick
                    .iter()
                    .zip(&self.op_args[op as usize])
                    .map(|(&i, &s)| by_sort[s as usize][i as usize])
                    .collect();
                let d = 1 + kids.iter().map(|&c| self.class_depth(c)).max().unwrap_or(0);
                if d <= bound {
                    self.make_app(op, kids, Some(bound));
                }
            }
        }
    }
}

/// Independent check of a trace: replays its steps with a fresh, naive
/// congruence closure and the same definedness rules, verifying that every
/// axiom step is an instance of the cited equation at defined terms.
pub struct Replay {
    theory: Arc<Theory>,
    nodes: Vec<(Head, Vec<Id>)>,
    parent: Vec<Id>,
    memo: HashMap<(Head, Vec<Id>), Id>,
}

impl Replay {
    pub fn new(theory: Arc<Theory>, gens: &Context) -> Self {
        let mut r = Replay {
            theory,
            nodes: Vec::new(),
            parent: Vec::new(),
            memo: HashMap::new(),
        };
        for i in 0..gens.len() as u32 {
            r.insert(Head::Gen(i), Vec::new());
        }
        r
    }

    fn find(&self, mut a: Id) -> Id {
        while self.parent[a as usize] != a {
            a = self.parent[a as usize];
        }
        a
    }

    fn insert(&mut self, head: Head, kids: Vec<Id>) -> Id {
        let kids: Vec<Id> = kids.iter().map(|&k| self.find(k)).collect();
        if let Some(&n) = self.memo.get(&(head, kids.clone())) {
            return self.find(n);
        }
        let id = self.nodes.len() as Id;
        self.nodes.push((head, kids.clone()));
        self.parent.push(id);
        self.memo.insert((head, kids), id);
        id
    }

    fn merge(&mut self, a: Id, b: Id) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        self.parent[a.max(b) as usize] = a.min(b);
        loop {
            let mut memo = HashMap::new();
            let mut pending = Vec::new();
            for i in 0..self.nodes.len() {
                let (h, kids) = &self.nodes[i];
                let key = (*h, kids.iter().map(|&k| self.find(k)).collect::<Vec<_>>());
                if let Some(&j) = memo.get(&key) {
                    pending.push((j, i as Id));
                } else {
                    memo.insert(key, i as Id);
                }
            }
            self.memo = memo;
            let mut changed = false;
            for (x, y) in pending {
                let (x, y) = (self.find(x), self.find(y));
                if x != y {
                    self.parent[x.max(y) as usize] = x.min(y);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn def_instances(&self, op: usize, args: &[Term]) -> Vec<(Term, Term)> {
        self.theory.ops()[op]
            .def_equations()
            .iter()
            .map(|e| (e.lhs.substitute(args), e.rhs.substitute(args)))
            .collect()
    }

    /// The class of `t` if it is derivably defined now.
    pub fn defined(&mut self, t: &Term) -> Option<Id> {
        match t {
            Term::Var(i) => Some(self.find(*i as Id)),
            Term::App(name, args) => {
                let op = self.theory.op_index(name)?;
                let kids: Option<Vec<Id>> = args.iter().map(|a| self.defined(a)).collect();
                let kids: Vec<Id> = kids?.iter().map(|&k| self.find(k)).collect();
                if let Some(&n) = self.memo.get(&(Head::Op(op as u32), kids.clone())) {
                    return Some(self.find(n));
                }
                for (l, r) in self.def_instances(op, args) {
                    let a = self.defined(&l)?;
                    let b = self.defined(&r)?;
                    if self.find(a) != self.find(b) {
                        return None;
                    }
                }
                Some(self.insert(Head::Op(op as u32), kids))
            }
        }
    }

    fn assume(&mut self, t: &Term) -> Id {
        match t {
            Term::Var(i) => self.find(*i as Id),
            Term::App(name, args) => {
                let op = self.theory.op_index(name).expect("known symbol");
                let kids: Vec<Id> = args.iter().map(|a| self.assume(a)).collect();
                for (l, r) in self.def_instances(op, args) {
                    let a = self.defined(&l).expect("Def sides are total");
                    let b = self.defined(&r).expect("Def sides are total");
                    self.merge(a, b);
                }
                self.insert(Head::Op(op as u32), kids)
            }
        }
    }

    /// Apply one step; `Err` describes why it is not justified.
    pub fn step(&mut self, s: &TraceStep) -> Result<(), String> {
        match s {
            TraceStep::AssumeDefined(t) => {
                self.assume(t);
            }
            TraceStep::Assume(a, b) => {
                let x = self.assume(a);
                let y = self.assume(b);
                self.merge(x, y);
            }
            TraceStep::Axiom(k, a, b) => {
                let eq = self.theory.equations().get(*k).ok_or("no such equation")?;
                let fits = |l: &Term, r: &Term| {
                    let mut binding = vec![None; eq.ctx.len()];
                    match_ground(l, a, &mut binding) && match_ground(r, b, &mut binding)
                };
                if !(fits(&eq.lhs, &eq.rhs) || fits(&eq.rhs, &eq.lhs)) {
                    return Err(format!("step is not an instance of equation {k}"));
                }
                let x = self.defined(a).ok_or("left side not derivably defined")?;
                let y = self.defined(b).ok_or("right side not derivably defined")?;
                self.merge(x, y);
            }
        }
        Ok(())
    }

    pub fn equal(&mut self, a: &Term, b: &Term) -> bool {
        match (self.defined(a), self.defined(b)) {
            (Some(x), Some(y)) => self.find(x) == self.find(y),
            _ => false,
        }
    }
}

fn match_ground(pat: &Term, t: &Term, binding: &mut Vec<Option<Term>>) -> bool {
    match (pat, t) {
        (Term::Var(i), _) => match &binding[*i] {
            Some(b) => b == t,
            None => {
                binding[*i] = Some(t.clone());
                true
            }
        },
        (Term::App(f, ps), Term::App(g, ts)) => {
            f == g && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, x)| match_ground(p, x, binding))
        }
        _ => false,
    }
}

/// What a replayed trace should establish.
pub enum Goal<'a> {
    Defined(&'a Term),
    Equal(&'a Term, &'a Term),
}

/// Replay `trace` and check `goal`. Returns the index of the first bad step
/// and the reason on failure.
pub fn replay(theory: &Arc<Theory>, trace: &Trace, goal: Goal<'_>) -> Result<(), String> {
    let mut r = Replay::new(theory.clone(), &trace.generators);
    for (i, s) in trace.steps.iter().enumerate() {
        r.step(s).map_err(|e| format!("step {i}: {e}"))?;
    }
    let ok = match goal {
        Goal::Defined(t) => r.defined(t).is_some(),
        Goal::Equal(a, b) => r.equal(a, b),
    };
    if ok {
        Ok(())
    } else {
        Err("goal not established by the trace".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::text::parse_term;

    fn ctx(n: usize, sort: &str) -> Context {
        Context::from_pairs((0..n).map(|i| (["x", "y", "z", "w"][i], sort)))
    }

    #[test]
    fn boolean_group_identity_by_matching() {
        let th = fixtures::z2_vector_spaces();
        let c = ctx(2, "v");
        let (lhs, _) = parse_term(&th, &c, "add(add(x,y),y)").unwrap();
        let rhs = Term::var(0);
        let mut g = EGraph::new(th.clone(), c, 5000, true);
        let a = g.force(&lhs);
        g.saturate(4, &[], false).unwrap();
        assert_eq!(g.find(a), g.find(0));
        let trace = g.take_trace();
        replay(&th, &trace, Goal::Equal(&lhs, &rhs)).unwrap();
    }

    #[test]
    fn partial_application_needs_def() {
        let th = fixtures::pi_eta_eps();
        let c = Context::from_pairs([("a", "s")]);
        let (t, _) = parse_term(&th, &c, "pi(a)").unwrap();
        let mut g = EGraph::new(th.clone(), c.clone(), 100, true);
        g.saturate(3, std::slice::from_ref(&t), false).unwrap();
        assert!(g.lookup_term(&t).is_none());
        let (e, _) = parse_term(&th, &c, "eta(a)").unwrap();
        let (p, _) = parse_term(&th, &c, "eps(a)").unwrap();
        g.assume_equal(&e, &p);
        g.saturate(3, std::slice::from_ref(&t), false).unwrap();
        assert!(g.lookup_term(&t).is_some());
        let trace = g.take_trace();
        replay(&th, &trace, Goal::Defined(&t)).unwrap();
        // a trace without the assumption does not justify the goal
        let bare = Trace { generators: c, steps: vec![] };
        assert!(replay(&th, &bare, Goal::Defined(&t)).is_err());
    }

    #[test]
    fn expansion_builds_free_boolean_group() {
        let th = fixtures::z2_vector_spaces();
        let mut g = EGraph::new(th, ctx(2, "v"), 5000, false);
        g.saturate(4, &[], true).unwrap();
        assert_eq!(g.class_count(), 4);
    }

    #[test]
    fn forged_axiom_step_is_rejected() {
        let th = fixtures::z2_vector_spaces();
        let c = ctx(2, "v");
        let bogus = Trace {
            generators: c,
            steps: vec![TraceStep::Axiom(3, Term::var(0), Term::var(1))],
        };
        assert!(replay(&th, &bogus, Goal::Equal(&Term::var(0), &Term::var(1))).is_err());
    }
}
