//! Exhaustive search for valid finite models of a theory.
//!
//! Total operation tables are filled cell by cell with equation-based
//! pruning; once they are complete, the domain of every partial operation is
//! determined by its Def equations and only those cells are filled.

use std::sync::Arc;

use crate::model::{validate_model, Elem, FiniteModel, Tuples};
use crate::theory::{Term, Theory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Val {
    Known(Elem),
    Undef,
    Unknown,
}

struct Search<'a> {
    theory: &'a Theory,
    model: FiniteModel,
    assigned: Vec<Vec<bool>>,
    // per equation: sort indices of its context
    eq_dims: Vec<Vec<usize>>,
    // equations mentioning each op
    eqs_of_op: Vec<Vec<usize>>,
    budget: usize,
    exhausted: bool,
}

impl Search<'_> {
    fn eval(&self, t: &Term, asg: &[Elem]) -> Val {
        match t {
            Term::Var(i) => Val::Known(asg[*i]),
            Term::App(name, args) => {
                let mut vals = Vec::with_capacity(args.len());
                let mut unknown = false;
                for a in args {
                    match self.eval(a, asg) {
                        Val::Known(v) => vals.push(v),
                        Val::Undef => return Val::Undef,
                        Val::Unknown => unknown = true,
                    }
                }
                if unknown {
                    return Val::Unknown;
                }
                let op = self.theory.op_index(name).unwrap();
                let idx = self.model.table(op).index(&vals);
                if !self.assigned[op][idx] {
                    return Val::Unknown;
                }
                match self.model.table(op).get_at(idx) {
                    Some(v) => Val::Known(v),
                    None => Val::Undef,
                }
            }
        }
    }

    fn consistent(&self, op: usize) -> bool {
        for &k in &self.eqs_of_op[op] {
            let eq = &self.theory.equations()[k];
            let dims: Vec<usize> = self.eq_dims[k].iter().map(|&s| self.model.size(s)).collect();
            for asg in Tuples::new(&dims) {
                if let (Val::Known(a), Val::Known(b)) = (self.eval(&eq.lhs, &asg), self.eval(&eq.rhs, &asg)) {
                    if a != b {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn def_holds(&self, op: usize, args: &[Elem]) -> bool {
        self.theory.ops()[op]
            .def_equations()
            .iter()
            .all(|e| match (self.eval(&e.lhs, args), self.eval(&e.rhs, args)) {
                (Val::Known(a), Val::Known(b)) => a == b,
                _ => false,
            })
    }

    fn run(&mut self, cells: &[(usize, usize)], k: usize, partial_phase: bool, f: &mut dyn FnMut(&FiniteModel) -> bool) -> bool {
        if self.budget == 0 {
            self.exhausted = true;
            return false;
        }
        self.budget -= 1;
        if k == cells.len() {
            if !partial_phase {
                return self.start_partial_phase(f);
            }
            debug_assert!(validate_model(&self.model).is_ok());
            return f(&self.model);
        }
        let (op, idx) = cells[k];
        let rs = self.theory.sort_index(&self.theory.ops()[op].result_sort).unwrap();
        for v in 0..self.model.size(rs) as Elem {
            self.model.table_mut(op).set_at(idx, Some(v));
            self.assigned[op][idx] = true;
            if self.consistent(op) && !self.run(cells, k + 1, partial_phase, f) {
                self.model.table_mut(op).set_at(idx, None);
                self.assigned[op][idx] = false;
                return false;
            }
        }
        self.model.table_mut(op).set_at(idx, None);
        self.assigned[op][idx] = false;
        true
    }

    fn start_partial_phase(&mut self, f: &mut dyn FnMut(&FiniteModel) -> bool) -> bool {
        let mut cells = Vec::new();
        let mut undefined = Vec::new();
        for (o, op) in self.theory.ops().iter().enumerate() {
            if op.is_total() {
                continue;
            }
            for idx in 0..self.model.table(o).len() {
                let args = self.model.table(o).tuple(idx);
                if self.def_holds(o, &args) {
                    cells.push((o, idx));
                } else {
                    undefined.push((o, idx));
                }
            }
        }
        for &(o, idx) in &undefined {
            self.assigned[o][idx] = true;
        }
        let touched: Vec<usize> = undefined.iter().map(|&(o, _)| o).collect();
        let ok = touched.iter().all(|&o| self.consistent(o));
        let cont = !ok || self.run(&cells, 0, true, f);
        for &(o, idx) in &undefined {
            self.assigned[o][idx] = false;
        }
        cont
    }
}

/// Outcome of an enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enumeration {
    /// Every model was visited.
    Complete,
    /// The callback asked to stop.
    Stopped,
    /// The search-node budget ran out.
    BudgetExhausted,
}

/// Visit every valid model with exactly the given carrier sizes (labels
/// `0..n`). The callback returns `false` to stop. `budget` counts search
/// nodes and is decremented in place.
pub fn for_each_model(
    theory: &Arc<Theory>,
    sizes: &[usize],
    budget: &mut usize,
    mut f: impl FnMut(&FiniteModel) -> bool,
) -> Enumeration {
    let model = FiniteModel::with_sizes(theory.clone(), sizes).expect("one size per sort");
    let assigned = theory.ops().iter().enumerate().map(|(o, _)| vec![false; model.table(o).len()]).collect();
    let eq_dims = theory
        .equations()
        .iter()
        .map(|e| e.ctx.sorts().iter().map(|s| theory.sort_index(s).unwrap()).collect())
        .collect();
    let eqs_of_op = theory
        .ops()
        .iter()
        .map(|op| {
            theory
                .equations()
                .iter()
                .enumerate()
                .filter(|(_, e)| e.lhs.ops().contains(&op.name) || e.rhs.ops().contains(&op.name))
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let mut cells = Vec::new();
    for (o, op) in theory.ops().iter().enumerate() {
        if op.is_total() {
            cells.extend((0..model.table(o).len()).map(|i| (o, i)));
        }
    }
    let mut s = Search {
        theory,
        model,
        assigned,
        eq_dims,
        eqs_of_op,
        budget: *budget,
        exhausted: false,
    };
    // equations without operations (x = y) are checked on the empty tables
    let var_only_ok = (0..theory.equations().len()).all(|k| {
        let eq = &theory.equations()[k];
        if !eq.lhs.ops().is_empty() || !eq.rhs.ops().is_empty() {
            return true;
        }
        let dims: Vec<usize> = s.eq_dims[k].iter().map(|&x| s.model.size(x)).collect();
        Tuples::new(&dims).all(|asg| s.eval(&eq.lhs, &asg) == s.eval(&eq.rhs, &asg))
    });
    let finished = !var_only_ok || s.run(&cells, 0, false, &mut f);
    *budget = s.budget;
    if s.exhausted {
        Enumeration::BudgetExhausted
    } else if finished {
        Enumeration::Complete
    } else {
        Enumeration::Stopped
    }
}

/// All carrier-size vectors with entries in `0..=max`, by total size then
/// lexicographically.
pub fn size_vectors(n_sorts: usize, max: usize) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = Tuples::new(&vec![max + 1; n_sorts])
        .map(|t| t.into_iter().map(|x| x as usize).collect())
        .collect();
    v.sort_by_key(|s: &Vec<usize>| (s.iter().sum::<usize>(), s.clone()));
    v
}

/// Every valid model with each carrier of size at most `max`, or `None` if
/// the budget runs out first.
pub fn all_models(theory: &Arc<Theory>, max: usize, budget: usize) -> Option<Vec<Arc<FiniteModel>>> {
    let mut out = Vec::new();
    let mut budget = budget;
    for sizes in size_vectors(theory.sorts().len(), max) {
        let r = for_each_model(theory, &sizes, &mut budget, |m| {
            out.push(Arc::new(m.clone()));
            true
        });
        if r == Enumeration::BudgetExhausted {
            return None;
        }
    }
    Some(out)
}

/// Default number of search nodes for exhaustive enumerations.
pub const DEFAULT_SEARCH_BUDGET: usize = 2_000_000;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn count(theory: &Arc<Theory>, sizes: &[usize]) -> usize {
        let mut n = 0;
        let mut b = DEFAULT_SEARCH_BUDGET;
        assert_eq!(for_each_model(theory, sizes, &mut b, |_| { n += 1; true }), Enumeration::Complete);
        n
    }

    #[test]
    fn free_binop_has_all_tables() {
        assert_eq!(count(&fixtures::free_binop(), &[2]), 16);
        assert_eq!(count(&fixtures::free_binop(), &[0]), 1);
    }

    #[test]
    fn labelled_boolean_groups() {
        let t = fixtures::z2_vector_spaces();
        // labelled Boolean groups: n! / |Aut|
        assert_eq!(count(&t, &[1]), 1);
        assert_eq!(count(&t, &[2]), 2);
        assert_eq!(count(&t, &[3]), 0);
        assert_eq!(count(&t, &[4]), 4);
    }

    #[test]
    fn labelled_groups_of_order_three() {
        // Z/3 has 2 automorphisms
        assert_eq!(count(&fixtures::groups(), &[3]), 3);
    }

    #[test]
    fn partial_domains_follow_def() {
        let t = fixtures::pi_eta_eps();
        // sizes (1,2): eta, eps in 4 ways; pi defined iff equal (2 ways) with 1 value
        assert_eq!(count(&t, &[1, 2]), 4);
    }
}
