//! Finite relations between models: composition, difunctionality and the
//! equivalence-relation checks.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{generated_submodel, is_strong_epi, kernel_pair, product, pullback, Elem, FiniteModel, Homomorphism, Product, SubModel};

/// A relation `R ↣ X × Y`, stored as per-sort pair sets closed under the
/// operations of the product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub left: Arc<FiniteModel>,
    pub right: Arc<FiniteModel>,
    pub pairs: Vec<BTreeSet<(Elem, Elem)>>,
}

/// Elements `x R y`, `x R y'`, `x' R y'` with `x' R y` failing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quadruple {
    pub sort: usize,
    pub x: Elem,
    pub y: Elem,
    pub y2: Elem,
    pub x2: Elem,
}

impl fmt::Display for Quadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sort {}: ({}, {}, {}, {})", self.sort, self.x, self.y, self.y2, self.x2)
    }
}

fn to_submodel(p: &Product, pairs: &[BTreeSet<(Elem, Elem)>]) -> SubModel {
    let mut sub = SubModel::empty(p.model.clone());
    for (s, set) in pairs.iter().enumerate() {
        for &(a, b) in set {
            sub.selected[s][p.pair_index(s, a, b) as usize] = true;
        }
    }
    sub
}

fn from_submodel(p: &Product, sub: &SubModel) -> Vec<BTreeSet<(Elem, Elem)>> {
    (0..sub.selected.len())
        .map(|s| sub.elements(s).into_iter().map(|e| (p.p1.apply(s, e), p.p2.apply(s, e))).collect())
        .collect()
}

impl Relation {
    /// Check that the pairs lie in the carriers and are closed.
    pub fn new(left: Arc<FiniteModel>, right: Arc<FiniteModel>, pairs: Vec<BTreeSet<(Elem, Elem)>>) -> Result<Self> {
        if !left.same_theory(&right) {
            return Err(Error::TheoryMismatch);
        }
        let n = left.theory().sorts().len();
        if pairs.len() != n {
            return Err(Error::Invalid(format!("expected pair sets for {n} sorts, got {}", pairs.len())));
        }
        for (s, set) in pairs.iter().enumerate() {
            if let Some(&(a, b)) = set.iter().find(|&&(a, b)| a as usize >= left.size(s) || b as usize >= right.size(s)) {
                return Err(Error::InvalidElement(format!("pair ({a}, {b}) outside the carriers of sort {s}")));
            }
        }
        let p = product(&left, &right)?;
        if let Some((op, args)) = to_submodel(&p, &pairs).closure_witness() {
            return Err(Error::NotClosed(format!("{op} applied to {args:?} leaves the relation")));
        }
        Ok(Relation { left, right, pairs })
    }

    /// The relation generated by the given pairs.
    pub fn generated(left: Arc<FiniteModel>, right: Arc<FiniteModel>, pairs: Vec<BTreeSet<(Elem, Elem)>>) -> Result<Self> {
        let p = product(&left, &right)?;
        let seed = to_submodel(&p, &pairs).selected.iter().map(|v| (0..v.len() as Elem).filter(|&i| v[i as usize]).collect()).collect::<Vec<Vec<Elem>>>();
        let sub = generated_submodel(&p.model, &seed)?;
        Ok(Relation {
            left,
            right,
            pairs: from_submodel(&p, &sub),
        })
    }

    pub fn diagonal(m: Arc<FiniteModel>) -> Self {
        let pairs = (0..m.theory().sorts().len()).map(|s| (0..m.size(s) as Elem).map(|e| (e, e)).collect()).collect();
        Relation {
            left: m.clone(),
            right: m,
            pairs,
        }
    }

    /// The graph `{(x, f x)}` of a homomorphism.
    pub fn graph(f: &Homomorphism) -> Self {
        let pairs = f.maps.iter().map(|m| m.iter().enumerate().map(|(x, &y)| (x as Elem, y)).collect()).collect();
        Relation {
            left: f.source.clone(),
            right: f.target.clone(),
            pairs,
        }
    }

    /// The kernel pair `{(x, x') | f x = f x'}`.
    pub fn kernel(f: &Homomorphism) -> Result<Self> {
        let k = kernel_pair(f)?;
        let n = f.maps.len();
        let pairs = (0..n)
            .map(|s| (0..k.model.size(s) as Elem).map(|e| (k.p1.apply(s, e), k.p2.apply(s, e))).collect())
            .collect();
        Ok(Relation {
            left: f.source.clone(),
            right: f.source.clone(),
            pairs,
        })
    }

    pub fn contains(&self, sort: usize, x: Elem, y: Elem) -> bool {
        self.pairs[sort].contains(&(x, y))
    }

    pub fn len(&self) -> usize {
        self.pairs.iter().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.pairs.iter().zip(&other.pairs).all(|(a, b)| a.is_subset(b))
    }

    /// The relation as a submodel of `left × right`, with that product.
    pub fn as_submodel(&self) -> Result<(Product, SubModel)> {
        let p = product(&self.left, &self.right)?;
        let sub = to_submodel(&p, &self.pairs);
        Ok((p, sub))
    }

    pub fn is_endo(&self) -> bool {
        Arc::ptr_eq(&self.left, &self.right) || self.left == self.right
    }

    fn require_endo(&self) {
        assert!(self.is_endo(), "endo-relation expected");
    }

    pub fn is_reflexive(&self) -> bool {
        self.require_endo();
        (0..self.pairs.len()).all(|s| (0..self.left.size(s) as Elem).all(|x| self.contains(s, x, x)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.require_endo();
        self.pairs.iter().enumerate().all(|(s, set)| set.iter().all(|&(x, y)| self.contains(s, y, x)))
    }

    pub fn is_transitive(&self) -> bool {
        self.require_endo();
        self.pairs.iter().enumerate().all(|(s, set)| {
            set.iter().all(|&(x, y)| set.range((y, 0)..=(y, Elem::MAX)).all(|&(_, z)| self.contains(s, x, z)))
        })
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }

    /// A failing quadruple for difunctionality, if any.
    pub fn difunctionality_witness(&self) -> Option<Quadruple> {
        for (s, set) in self.pairs.iter().enumerate() {
            for &(x, y) in set {
                for &(_, y2) in set.range((x, 0)..=(x, Elem::MAX)) {
                    for &(x2, y2b) in set {
                        if y2b == y2 && !set.contains(&(x2, y)) {
                            return Some(Quadruple { sort: s, x, y, y2, x2 });
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_difunctional(&self) -> bool {
        self.difunctionality_witness().is_none()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, set) in self.pairs.iter().enumerate() {
            let sort = &self.left.theory().sorts()[s];
            let items: Vec<String> = set
                .iter()
                .map(|&(a, b)| format!("({}, {})", self.left.label(s, a), self.right.label(s, b)))
                .collect();
            writeln!(f, "{sort}: {{{}}}", items.join(", "))?;
        }
        Ok(())
    }
}

/// `s ∘ r`: pairs `(x, z)` with `x r y` and `y s z` for some `y`, closed
/// under the operations.
pub fn compose(r: &Relation, s: &Relation) -> Result<Relation> {
    if !(Arc::ptr_eq(&r.right, &s.left) || r.right == s.left) {
        return Err(Error::Invalid("relations do not share a middle model".into()));
    }
    let pairs: Vec<BTreeSet<(Elem, Elem)>> = r
        .pairs
        .iter()
        .zip(&s.pairs)
        .map(|(rs, ss)| {
            rs.iter()
                .flat_map(|&(x, y)| ss.range((y, 0)..=(y, Elem::MAX)).map(move |&(_, z)| (x, z)))
                .collect()
        })
        .collect();
    Relation::generated(r.left.clone(), s.right.clone(), pairs)
}

pub fn opposite(r: &Relation) -> Relation {
    Relation {
        left: r.right.clone(),
        right: r.left.clone(),
        pairs: r.pairs.iter().map(|set| set.iter().map(|&(a, b)| (b, a)).collect()).collect(),
    }
}

/// For a reflexive graph `d, c: G -> X` with common section `s`, pull
/// `(d, c)` back along `(c, d)` and test whether the leg over the
/// `(c, d)` copy of `G` is a strong epimorphism.
pub fn reflexive_graph_pullback_check(d: &Homomorphism, c: &Homomorphism, s: &Homomorphism) -> Result<bool> {
    let id = Homomorphism::identity(d.target.clone());
    if !s.then(d)?.same_maps(&id) || !s.then(c)?.same_maps(&id) {
        return Err(Error::SectionMismatch("d s and c s must both be the identity".into()));
    }
    let xx = product(&d.target, &d.target)?;
    let dc = xx.pair(d, c)?;
    let cd = xx.pair(c, d)?;
    let pb = pullback(&cd, &dc)?;
    Ok(is_strong_epi(&pb.p1))
}

/// Every closed relation between two models (exponential in the product
/// size; intended for small carriers).
pub fn all_relations(left: &Arc<FiniteModel>, right: &Arc<FiniteModel>) -> Result<Vec<Relation>> {
    let p = product(left, right)?;
    let total = p.model.total_size();
    if total > 20 {
        return Err(Error::BudgetExceeded(1 << 20));
    }
    let sizes = p.model.sizes();
    let mut out = Vec::new();
    for mask in 0u32..(1 << total) {
        let mut sub = SubModel::empty(p.model.clone());
        let mut bit = 0;
        for (s, &n) in sizes.iter().enumerate() {
            for e in 0..n {
                sub.selected[s][e] = mask >> bit & 1 == 1;
                bit += 1;
            }
        }
        if sub.is_closed() {
            out.push(Relation {
                left: left.clone(),
                right: right.clone(),
                pairs: from_submodel(&p, &sub),
            });
        }
    }
    Ok(out)
}
