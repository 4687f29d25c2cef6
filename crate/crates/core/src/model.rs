//! Finite models, homomorphisms, finite limits and images.
//!
//! Elements of a sort are indices `0..n` into the carrier; labels are kept for
//! printing. Limits are computed sortwise as in sets; images are computed by
//! closing the set-theoretic image under defined operations.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::theory::{Term, Theory, ValidationReport};

pub type Elem = u32;

/// Iterator over all tuples of a mixed-radix shape, last coordinate fastest.
#[derive(Clone, Debug)]
pub struct Tuples {
    dims: Vec<usize>,
    cur: Vec<Elem>,
    done: bool,
}

impl Tuples {
    pub fn new(dims: &[usize]) -> Self {
        Tuples {
            dims: dims.to_vec(),
            cur: vec![0; dims.len()],
            done: dims.contains(&0),
        }
    }
}

impl Iterator for Tuples {
    type Item = Vec<Elem>;

    fn next(&mut self) -> Option<Vec<Elem>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut k = self.dims.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cur[k] += 1;
            if (self.cur[k] as usize) < self.dims[k] {
                break;
            }
            self.cur[k] = 0;
        }
        Some(out)
    }
}

/// Partial operation table indexed by argument tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpTable {
    dims: Vec<usize>,
    entries: Vec<Option<Elem>>,
}

impl OpTable {
    pub fn new(dims: Vec<usize>) -> Self {
        let n = dims.iter().product::<usize>();
        OpTable {
            dims,
            entries: vec![None; n],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index(&self, args: &[Elem]) -> usize {
        args.iter()
            .zip(&self.dims)
            .fold(0usize, |acc, (&a, &d)| acc * d + a as usize)
    }

    pub fn tuple(&self, mut idx: usize) -> Vec<Elem> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = (idx % self.dims[k]) as Elem;
            idx /= self.dims[k];
        }
        out
    }

    pub fn get(&self, args: &[Elem]) -> Option<Elem> {
        self.entries[self.index(args)]
    }

    pub fn get_at(&self, idx: usize) -> Option<Elem> {
        self.entries[idx]
    }

    pub fn set(&mut self, args: &[Elem], v: Option<Elem>) {
        let i = self.index(args);
        self.entries[i] = v;
    }

    pub fn set_at(&mut self, idx: usize, v: Option<Elem>) {
        self.entries[idx] = v;
    }

    pub fn defined(&self) -> impl Iterator<Item = (Vec<Elem>, Elem)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|v| (self.tuple(i), v)))
    }

    pub fn defined_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }
}

/// Evaluation failure: the innermost application that is undefined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Undefined {
    pub path: Vec<usize>,
    pub op: String,
}

impl fmt::Display for Undefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "undefined at `{}` (path {:?})", self.op, self.path)
    }
}

/// A finite model: sorted carriers plus partial operation tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    theory: Arc<Theory>,
    carriers: Vec<Vec<String>>,
    tables: Vec<OpTable>,
}

impl FiniteModel {
    /// Model with the given carrier labels (one list per sort, in theory
    /// order) and every table empty.
    pub fn new(theory: Arc<Theory>, carriers: Vec<Vec<String>>) -> Result<Self> {
        if carriers.len() != theory.sorts().len() {
            return Err(Error::Invalid(format!(
                "expected {} carriers, got {}",
                theory.sorts().len(),
                carriers.len()
            )));
        }
        let tables = theory
            .ops()
            .iter()
            .map(|op| {
                let dims = op
                    .arg_sorts
                    .iter()
                    .map(|s| carriers[theory.sort_index(s).expect("validated theory")].len())
                    .collect();
                OpTable::new(dims)
            })
            .collect();
        Ok(FiniteModel {
            theory,
            carriers,
            tables,
        })
    }

    /// Model whose carriers are `0..n` per sort.
    pub fn with_sizes(theory: Arc<Theory>, sizes: &[usize]) -> Result<Self> {
        let carriers = sizes
            .iter()
            .map(|&n| (0..n).map(|i| i.to_string()).collect())
            .collect();
        Self::new(theory, carriers)
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn carriers(&self) -> &[Vec<String>] {
        &self.carriers
    }

    pub fn size(&self, sort: usize) -> usize {
        self.carriers[sort].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.carriers.iter().map(Vec::len).collect()
    }

    pub fn total_size(&self) -> usize {
        self.carriers.iter().map(Vec::len).sum()
    }

    pub fn label(&self, sort: usize, e: Elem) -> &str {
        &self.carriers[sort][e as usize]
    }

    pub fn find(&self, sort: usize, label: &str) -> Option<Elem> {
        self.carriers[sort].iter().position(|l| l == label).map(|i| i as Elem)
    }

    pub fn sort_named(&self, name: &str) -> Result<usize> {
        self.theory
            .sort_index(&name.into())
            .ok_or_else(|| Error::UnknownSort(name.to_string()))
    }

    pub fn op_named(&self, name: &str) -> Result<usize> {
        self.theory
            .op_index(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn table(&self, op: usize) -> &OpTable {
        &self.tables[op]
    }

    pub fn table_mut(&mut self, op: usize) -> &mut OpTable {
        &mut self.tables[op]
    }

    pub fn apply(&self, op: usize, args: &[Elem]) -> Option<Elem> {
        self.tables[op].get(args)
    }

    /// Set an entry by operation name; `None` leaves it undefined.
    pub fn set(&mut self, op: &str, args: &[Elem], v: Option<Elem>) -> Result<()> {
        let i = self.op_named(op)?;
        self.tables[i].set(args, v);
        Ok(())
    }

    pub fn same_theory(&self, other: &FiniteModel) -> bool {
        Arc::ptr_eq(&self.theory, &other.theory) || *self.theory == *other.theory
    }

    /// Relabel every element as a fresh string without changing structure.
    pub fn relabelled(&self, f: impl Fn(usize, Elem, &str) -> String) -> FiniteModel {
        let mut m = self.clone();
        for (s, c) in m.carriers.iter_mut().enumerate() {
            for (i, l) in c.iter_mut().enumerate() {
                *l = f(s, i as Elem, l);
            }
        }
        m
    }
}

impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, sort) in self.theory.sorts().iter().enumerate() {
            writeln!(f, "{sort}: {{{}}}", self.carriers[s].join(", "))?;
        }
        for (o, op) in self.theory.ops().iter().enumerate() {
            for (args, v) in self.tables[o].defined() {
                let labels: Vec<&str> = args
                    .iter()
                    .zip(&op.arg_sorts)
                    .map(|(&a, s)| self.label(self.theory.sort_index(s).unwrap(), a))
                    .collect();
                let rs = self.theory.sort_index(&op.result_sort).unwrap();
                writeln!(f, "{}({}) = {}", op.name, labels.join(","), self.label(rs, v))?;
            }
        }
        Ok(())
    }
}

/// Strict bottom-up evaluation of a term under an assignment of its context.
pub fn evaluate_term(m: &FiniteModel, term: &Term, assignment: &[Elem]) -> Result<Elem, Undefined> {
    fn go(m: &FiniteModel, t: &Term, asg: &[Elem], path: &mut Vec<usize>) -> Result<Elem, Undefined> {
        match t {
            Term::Var(i) => Ok(asg[*i]),
            Term::App(name, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for (k, a) in args.iter().enumerate() {
                    path.push(k);
                    vals.push(go(m, a, asg, path)?);
                    path.pop();
                }
                let op = m.theory.op_index(name).ok_or_else(|| Undefined {
                    path: path.clone(),
                    op: name.clone(),
                })?;
                m.tables[op].get(&vals).ok_or_else(|| Undefined {
                    path: path.clone(),
                    op: name.clone(),
                })
            }
        }
    }
    go(m, term, assignment, &mut Vec::new())
}

const MAX_VIOLATIONS: usize = 64;

pub fn validate_model(m: &FiniteModel) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let th = m.theory.clone();
    let labels = |sorts: &[crate::theory::SortId], args: &[Elem]| -> String {
        let ls: Vec<&str> = sorts
            .iter()
            .zip(args)
            .map(|(s, &a)| m.label(th.sort_index(s).unwrap(), a))
            .collect();
        format!("({})", ls.join(","))
    };
    for (o, op) in th.ops().iter().enumerate() {
        let rs = th.sort_index(&op.result_sort).unwrap();
        for (idx, args) in Tuples::new(m.tables[o].dims()).enumerate() {
            if rep.violations.len() >= MAX_VIOLATIONS {
                return rep;
            }
            let val = m.tables[o].get_at(idx);
            if let Some(v) = val {
                if v as usize >= m.size(rs) {
                    rep.push(&op.name, format!("result out of range at {}", labels(&op.arg_sorts, &args)));
                }
            }
            if op.is_total() {
                if val.is_none() {
                    rep.push(&op.name, format!("total symbol undefined at {}", labels(&op.arg_sorts, &args)));
                }
                continue;
            }
            let mut def_holds = true;
            for eq in op.def_equations() {
                match (evaluate_term(m, &eq.lhs, &args), evaluate_term(m, &eq.rhs, &args)) {
                    (Ok(a), Ok(b)) => def_holds &= a == b,
                    _ => def_holds = false,
                }
            }
            match (def_holds, val.is_some()) {
                (true, false) => rep.push(
                    &op.name,
                    format!("Def holds but symbol undefined at {}", labels(&op.arg_sorts, &args)),
                ),
                (false, true) => rep.push(
                    &op.name,
                    format!("Def fails but symbol defined at {}", labels(&op.arg_sorts, &args)),
                ),
                _ => {}
            }
        }
    }
    for eq in th.equations() {
        let dims: Vec<usize> = eq
            .ctx
            .sorts()
            .iter()
            .map(|s| m.size(th.sort_index(s).unwrap()))
            .collect();
        for asg in Tuples::new(&dims) {
            if let (Ok(a), Ok(b)) = (evaluate_term(m, &eq.lhs, &asg), evaluate_term(m, &eq.rhs, &asg)) {
                if a != b {
                    rep.push(
                        eq.to_string(),
                        format!("equation fails at {}", labels(&eq.ctx.sorts(), &asg)),
                    );
                    if rep.violations.len() >= MAX_VIOLATIONS {
                        return rep;
                    }
                }
            }
        }
    }
    rep
}

/// A sorted map between models over the same theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    pub source: Arc<FiniteModel>,
    pub target: Arc<FiniteModel>,
    pub maps: Vec<Vec<Elem>>,
}

impl Homomorphism {
    /// Build and check the preservation law.
    pub fn new(source: Arc<FiniteModel>, target: Arc<FiniteModel>, maps: Vec<Vec<Elem>>) -> Result<Self> {
        let h = Self::unchecked(source, target, maps)?;
        h.check().map_err(Error::NotHomomorphism)?;
        Ok(h)
    }

    /// Build without checking preservation (shapes are still checked).
    pub fn unchecked(source: Arc<FiniteModel>, target: Arc<FiniteModel>, maps: Vec<Vec<Elem>>) -> Result<Self> {
        if !source.same_theory(&target) {
            return Err(Error::TheoryMismatch);
        }
        if maps.len() != source.carriers.len() {
            return Err(Error::NotHomomorphism("wrong number of sort maps".into()));
        }
        for (s, map) in maps.iter().enumerate() {
            if map.len() != source.size(s) || map.iter().any(|&e| e as usize >= target.size(s)) {
                return Err(Error::NotHomomorphism(format!(
                    "map for sort `{}` has the wrong shape",
                    source.theory.sorts()[s]
                )));
            }
        }
        Ok(Homomorphism { source, target, maps })
    }

    pub fn identity(m: Arc<FiniteModel>) -> Self {
        let maps = m.sizes().iter().map(|&n| (0..n as Elem).collect()).collect();
        Homomorphism { source: m.clone(), target: m, maps }
    }

    pub fn apply(&self, sort: usize, e: Elem) -> Elem {
        self.maps[sort][e as usize]
    }

    /// `f(σ(a)) = σ(f(a))` wherever `σ(a)` is defined in the source.
    pub fn check(&self) -> Result<(), String> {
        let th = self.source.theory.clone();
        for (o, op) in th.ops().iter().enumerate() {
            let arg_idx: Vec<usize> = op.arg_sorts.iter().map(|s| th.sort_index(s).unwrap()).collect();
            let rs = th.sort_index(&op.result_sort).unwrap();
            for (args, v) in self.source.tables[o].defined() {
                let mapped: Vec<Elem> = args.iter().zip(&arg_idx).map(|(&a, &s)| self.apply(s, a)).collect();
                match self.target.apply(o, &mapped) {
                    Some(w) if w == self.apply(rs, v) => {}
                    Some(_) => {
                        return Err(format!("`{}` not preserved at {:?}", op.name, args));
                    }
                    None => {
                        return Err(format!("`{}` undefined in target at image of {:?}", op.name, args));
                    }
                }
            }
        }
        Ok(())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Homomorphism) -> Result<Homomorphism> {
        if !(Arc::ptr_eq(&self.target, &other.source) || self.target == other.source) {
            return Err(Error::Invalid("homomorphisms are not composable".into()));
        }
        let maps = self
            .maps
            .iter()
            .enumerate()
            .map(|(s, m)| m.iter().map(|&e| other.apply(s, e)).collect())
            .collect();
        Homomorphism::unchecked(self.source.clone(), other.target.clone(), maps)
    }

    pub fn same_maps(&self, other: &Homomorphism) -> bool {
        self.maps == other.maps
    }
}

/// Per-sort subsets of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubModel {
    pub ambient: Arc<FiniteModel>,
    pub selected: Vec<Vec<bool>>,
}

impl SubModel {
    pub fn empty(ambient: Arc<FiniteModel>) -> Self {
        let selected = ambient.sizes().iter().map(|&n| vec![false; n]).collect();
        SubModel { ambient, selected }
    }

    pub fn full(ambient: Arc<FiniteModel>) -> Self {
        let selected = ambient.sizes().iter().map(|&n| vec![true; n]).collect();
        SubModel { ambient, selected }
    }

    pub fn contains(&self, sort: usize, e: Elem) -> bool {
        self.selected[sort][e as usize]
    }

    pub fn elements(&self, sort: usize) -> Vec<Elem> {
        (0..self.selected[sort].len() as Elem).filter(|&e| self.contains(sort, e)).collect()
    }

    pub fn count(&self) -> usize {
        self.selected.iter().map(|v| v.iter().filter(|&&b| b).count()).sum()
    }

    pub fn is_full(&self) -> bool {
        self.selected.iter().all(|v| v.iter().all(|&b| b))
    }

    /// A defined application with selected arguments and unselected result, if any.
    pub fn closure_witness(&self) -> Option<(String, Vec<Elem>)> {
        let m = &self.ambient;
        let th = m.theory.clone();
        for (o, op) in th.ops().iter().enumerate() {
            let arg_idx: Vec<usize> = op.arg_sorts.iter().map(|s| th.sort_index(s).unwrap()).collect();
            let rs = th.sort_index(&op.result_sort).unwrap();
            for (args, v) in m.tables[o].defined() {
                if args.iter().zip(&arg_idx).all(|(&a, &s)| self.contains(s, a)) && !self.contains(rs, v) {
                    return Some((op.name.clone(), args));
                }
            }
        }
        None
    }

    pub fn is_closed(&self) -> bool {
        self.closure_witness().is_none()
    }

    /// The submodel as a model in its own right, with its inclusion.
    pub fn to_model(&self) -> Result<(Arc<FiniteModel>, Homomorphism)> {
        let amb = &self.ambient;
        let elems: Vec<Vec<Elem>> = (0..self.selected.len()).map(|s| self.elements(s)).collect();
        let mut back: Vec<Vec<Option<Elem>>> = amb.sizes().iter().map(|&n| vec![None; n]).collect();
        for (s, es) in elems.iter().enumerate() {
            for (i, &e) in es.iter().enumerate() {
                back[s][e as usize] = Some(i as Elem);
            }
        }
        let carriers = elems
            .iter()
            .enumerate()
            .map(|(s, es)| es.iter().map(|&e| amb.label(s, e).to_string()).collect())
            .collect();
        let mut sub = FiniteModel::new(amb.theory.clone(), carriers)?;
        let th = amb.theory.clone();
        for (o, op) in th.ops().iter().enumerate() {
            let arg_idx: Vec<usize> = op.arg_sorts.iter().map(|s| th.sort_index(s).unwrap()).collect();
            let rs = th.sort_index(&op.result_sort).unwrap();
            let dims: Vec<usize> = arg_idx.iter().map(|&s| elems[s].len()).collect();
            for args in Tuples::new(&dims) {
                let amb_args: Vec<Elem> = args
                    .iter()
                    .zip(&arg_idx)
                    .map(|(&a, &s)| elems[s][a as usize])
                    .collect();
                if let Some(v) = amb.apply(o, &amb_args) {
                    let w = back[rs][v as usize].ok_or_else(|| {
                        Error::NotClosed(format!("`{}` leaves the subset", op.name))
                    })?;
                    sub.tables[o].set(&args, Some(w));
                }
            }
        }
        let sub = Arc::new(sub);
        let inc = Homomorphism::unchecked(sub.clone(), amb.clone(), elems)?;
        Ok((sub, inc))
    }
}

/// Least closed subset containing `seed`: repeated rounds over the
/// operations in declaration order until nothing new is added.
pub fn generated_submodel(b: &Arc<FiniteModel>, seed: &[Vec<Elem>]) -> Result<SubModel> {
    let mut sub = SubModel::empty(b.clone());
    for (s, es) in seed.iter().enumerate() {
        for &e in es {
            if e as usize >= b.size(s) {
                return Err(Error::InvalidElement(format!("{e} not in sort {s}")));
            }
            sub.selected[s][e as usize] = true;
        }
    }
    close(&mut sub, |_, _, _| {});
    Ok(sub)
}

/// Closure with a generating term for every element. Seeds are `Var(i)` in
/// seed order; each added element records the first application found, so
/// terms have minimal depth.
pub fn generated_with_terms(b: &Arc<FiniteModel>, seeds: &[(usize, Elem)]) -> (SubModel, Vec<Vec<Option<Term>>>) {
    let mut sub = SubModel::empty(b.clone());
    let mut terms: Vec<Vec<Option<Term>>> = b.sizes().iter().map(|&n| vec![None; n]).collect();
    for (i, &(s, e)) in seeds.iter().enumerate() {
        if !sub.selected[s][e as usize] {
            sub.selected[s][e as usize] = true;
            terms[s][e as usize] = Some(Term::Var(i));
        }
    }
    let th = b.theory.clone();
    let mut record = |o: usize, args: &[(usize, Elem)], (rs, v): (usize, Elem)| {
        let t = Term::App(
            th.ops()[o].name.clone(),
            args.iter().map(|&(s, a)| terms[s][a as usize].clone().unwrap()).collect(),
        );
        terms[rs][v as usize] = Some(t);
    };
    close(&mut sub, &mut record);
    (sub, terms)
}

fn close(sub: &mut SubModel, mut on_add: impl FnMut(usize, &[(usize, Elem)], (usize, Elem))) {
    let m = sub.ambient.clone();
    let th = m.theory.clone();
    let shapes: Vec<(Vec<usize>, usize)> = th
        .ops()
        .iter()
        .map(|op| {
            (
                op.arg_sorts.iter().map(|s| th.sort_index(s).unwrap()).collect(),
                th.sort_index(&op.result_sort).unwrap(),
            )
        })
        .collect();
    loop {
        let snapshot = sub.selected.clone();
        let mut added = Vec::new();
        for (o, (arg_idx, rs)) in shapes.iter().enumerate() {
            let choices: Vec<Vec<Elem>> = arg_idx
                .iter()
                .map(|&s| (0..snapshot[s].len() as Elem).filter(|&e| snapshot[s][e as usize]).collect())
                .collect();
            let dims: Vec<usize> = choices.iter().map(Vec::len).collect();
            for pick in Tuples::new(&dims) {
                let args: Vec<Elem> = pick.iter().enumerate().map(|(k, &i)| choices[k][i as usize]).collect();
                if let Some(v) = m.apply(o, &args) {
                    if !sub.selected[*rs][v as usize] {
                        sub.selected[*rs][v as usize] = true;
                        let sorted_args: Vec<(usize, Elem)> = arg_idx.iter().copied().zip(args).collect();
                        added.push((o, sorted_args, (*rs, v)));
                    }
                }
            }
        }
        if added.is_empty() {
            break;
        }
        for (o, args, res) in &added {
            on_add(*o, args, *res);
        }
    }
}

/// Binary product with its projections.
#[derive(Clone, Debug)]
pub struct Product {
    pub model: Arc<FiniteModel>,
    pub p1: Homomorphism,
    pub p2: Homomorphism,
}

impl Product {
    fn right_size(&self, sort: usize) -> usize {
        self.p2.target.size(sort)
    }

    pub fn pair_index(&self, sort: usize, a: Elem, b: Elem) -> Elem {
        (a as usize * self.right_size(sort) + b as usize) as Elem
    }

    /// Mediating map `<f, g>` into the product.
    pub fn pair(&self, f: &Homomorphism, g: &Homomorphism) -> Result<Homomorphism> {
        if f.source.carriers != g.source.carriers {
            return Err(Error::Invalid("pairing maps with different sources".into()));
        }
        let maps = (0..f.maps.len())
            .map(|s| {
                f.maps[s]
                    .iter()
                    .zip(&g.maps[s])
                    .map(|(&a, &b)| self.pair_index(s, a, b))
                    .collect()
            })
            .collect();
        Homomorphism::new(f.source.clone(), self.model.clone(), maps)
    }
}

pub fn product(a: &Arc<FiniteModel>, b: &Arc<FiniteModel>) -> Result<Product> {
    if !a.same_theory(b) {
        return Err(Error::TheoryMismatch);
    }
    let th = a.theory.clone();
    let carriers: Vec<Vec<String>> = (0..th.sorts().len())
        .map(|s| {
            let mut c = Vec::with_capacity(a.size(s) * b.size(s));
            for la in &a.carriers[s] {
                for lb in &b.carriers[s] {
                    c.push(format!("({la},{lb})"));
                }
            }
            c
        })
        .collect();
    let mut m = FiniteModel::new(th.clone(), carriers)?;
    for (o, op) in th.ops().iter().enumerate() {
        let arg_idx: Vec<usize> = op.arg_sorts.iter().map(|s| th.sort_index(s).unwrap()).collect();
        let rs = th.sort_index(&op.result_sort).unwrap();
        let dims: Vec<usize> = arg_idx.iter().map(|&s| a.size(s) * b.size(s)).collect();
        for args in Tuples::new(&dims) {
            let left: Vec<Elem> = args
                .iter()
                .zip(&arg_idx)
                .map(|(&x, &s)| x / b.size(s) as Elem)
                .collect();
            let right: Vec<Elem> = args
                .iter()
                .zip(&arg_idx)
                .map(|(&x, &s)| x % b.size(s) as Elem)
                .collect();
            if let (Some(u), Some(v)) = (a.apply(o, &left), b.apply(o, &right)) {
                m.tables[o].set(&args, Some((u as usize * b.size(rs) + v as usize) as Elem));
            }
        }
    }
    let m = Arc::new(m);
    let p1 = (0..th.sorts().len())
        .map(|s| (0..(a.size(s) * b.size(s))).map(|x| (x / b.size(s)) as Elem).collect())
        .collect();
    let p2 = (0..th.sorts().len())
        .map(|s| (0..(a.size(s) * b.size(s))).map(|x| (x % b.size(s)) as Elem).collect())
        .collect();
    Ok(Product {
        p1: Homomorphism::unchecked(m.clone(), a.clone(), p1)?,
        p2: Homomorphism::unchecked(m.clone(), b.clone(), p2)?,
        model: m,
    })
}

/// Equalizer of a parallel pair, as a submodel of the source and its inclusion.
#[derive(Clone, Debug)]
pub struct Equalizer {
    pub sub: SubModel,
    pub model: Arc<FiniteModel>,
    pub inclusion: Homomorphism,
}

pub fn equalizer(f: &Homomorphism, g: &Homomorphism) -> Result<Equalizer> {
    if f.source != g.source || f.target != g.target {
        return Err(Error::Invalid("equalizer needs a parallel pair".into()));
    }
    let mut sub = SubModel::empty(f.source.clone());
    for s in 0..f.maps.len() {
        for e in 0..f.maps[s].len() {
            sub.selected[s][e] = f.maps[s][e] == g.maps[s][e];
        }
    }
    assert!(sub.is_closed(), "equalizer of homomorphisms is closed");
    let (model, inclusion) = sub.to_model()?;
    Ok(Equalizer { sub, model, inclusion })
}

/// Pullback object with its two projections.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub model: Arc<FiniteModel>,
    pub p1: Homomorphism,
    pub p2: Homomorphism,
}

pub fn pullback(f: &Homomorphism, g: &Homomorphism) -> Result<Pullback> {
    if f.target != g.target {
        return Err(Error::Invalid("pullback needs a common codomain".into()));
    }
    let prod = product(&f.source, &g.source)?;
    let mut sub = SubModel::empty(prod.model.clone());
    for s in 0..f.maps.len() {
        for a in 0..f.source.size(s) as Elem {
            for b in 0..g.source.size(s) as Elem {
                if f.apply(s, a) == g.apply(s, b) {
                    sub.selected[s][prod.pair_index(s, a, b) as usize] = true;
                }
            }
        }
    }
    assert!(sub.is_closed(), "pullback of homomorphisms is closed");
    let (model, inc) = sub.to_model()?;
    Ok(Pullback {
        p1: inc.then(&prod.p1)?,
        p2: inc.then(&prod.p2)?,
        model,
    })
}

pub fn kernel_pair(f: &Homomorphism) -> Result<Pullback> {
    pullback(f, f)
}

/// Image factorization `f = i ∘ p`.
#[derive(Clone, Debug)]
pub struct Image {
    pub sub: SubModel,
    pub model: Arc<FiniteModel>,
    pub p: Homomorphism,
    pub i: Homomorphism,
}

pub fn image(f: &Homomorphism) -> Result<Image> {
    let seed: Vec<Vec<Elem>> = f
        .maps
        .iter()
        .map(|m| m.iter().copied().collect::<BTreeSet<_>>().into_iter().collect())
        .collect();
    let sub = generated_submodel(&f.target, &seed)?;
    let (model, i) = sub.to_model()?;
    let p_maps = f
        .maps
        .iter()
        .enumerate()
        .map(|(s, m)| {
            m.iter()
                .map(|&e| i.maps[s].iter().position(|&x| x == e).unwrap() as Elem)
                .collect()
        })
        .collect();
    let p = Homomorphism::unchecked(f.source.clone(), model.clone(), p_maps)?;
    Ok(Image { sub, model, p, i })
}

pub fn is_mono(f: &Homomorphism) -> bool {
    f.maps.iter().all(|m| {
        let set: BTreeSet<_> = m.iter().collect();
        set.len() == m.len()
    })
}

pub fn is_surjective(f: &Homomorphism) -> bool {
    f.maps.iter().enumerate().all(|(s, m)| {
        let set: BTreeSet<_> = m.iter().collect();
        set.len() == f.target.size(s)
    })
}

pub fn is_iso(f: &Homomorphism) -> bool {
    is_mono(f) && is_surjective(f)
}

/// Strong epimorphism: the image is the whole codomain.
pub fn is_strong_epi(f: &Homomorphism) -> bool {
    image(f).map(|im| im.sub.is_full()).unwrap_or(false)
}

/// Every homomorphism `a -> b`, by exhaustive search over carrier maps.
/// The search space is the product of `|b_s|^|a_s|` over sorts.
pub fn homomorphisms(a: &Arc<FiniteModel>, b: &Arc<FiniteModel>) -> Vec<Homomorphism> {
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
        let h = Homomorphism {
            source: a.clone(),
            target: b.clone(),
            maps,
        };
        if h.check().is_ok() {
            out.push(h);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn tuples_enumerate_in_order() {
        let v: Vec<_> = Tuples::new(&[2, 3]).collect();
        assert_eq!(v.len(), 6);
        assert_eq!(v[1], vec![0, 1]);
        assert_eq!(Tuples::new(&[]).count(), 1);
        assert_eq!(Tuples::new(&[2, 0]).count(), 0);
    }

    #[test]
    fn table_indexing_round_trips() {
        let t = OpTable::new(vec![2, 3, 4]);
        for (i, tup) in Tuples::new(&[2, 3, 4]).enumerate() {
            assert_eq!(t.index(&tup), i);
            assert_eq!(t.tuple(i), tup);
        }
    }

    #[test]
    fn non_associative_table_is_flagged() {
        let th = fixtures::z2_vector_spaces();
        let mut m = FiniteModel::with_sizes(th, &[2]).unwrap();
        m.set("zero", &[], Some(0)).unwrap();
        // x + y = 1 except 1 + 1 = 0 and 0 + 0 = 0 breaks x + 0 = x, use a
        // table that keeps the unit law but breaks associativity elsewhere
        for (a, b, c) in [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)] {
            m.set("add", &[a, b], Some(c)).unwrap();
        }
        let rep = validate_model(&m);
        assert!(!rep.is_ok());
        assert!(rep.violations.iter().any(|v| v.subject.contains("add(x,x) = zero")));
    }

    #[test]
    fn undefined_reports_innermost_application() {
        let th = fixtures::pi_eta_eps();
        let mut m = FiniteModel::new(th, vec![vec!["a".into()], vec!["u".into(), "v".into()]]).unwrap();
        m.set("eta", &[0], Some(0)).unwrap();
        m.set("eps", &[0], Some(1)).unwrap();
        assert!(validate_model(&m).is_ok());
        let t = Term::app("eta", vec![Term::app("pi", vec![Term::var(0)])]);
        let err = evaluate_term(&m, &t, &[0]).unwrap_err();
        assert_eq!(err.op, "pi");
        assert_eq!(err.path, vec![0]);
    }
}
