//! Classical propositional reasoning over ground clauses: a DPLL
//! satisfiability solver with unit propagation, and entailment via
//! refutation. Ground first-order atoms are treated as propositional
//! variables, which is sound for the function-free fragment because every
//! axiom set is instantiated over a finite constant set before it gets here.

use std::collections::BTreeMap;

use crate::syntax::{to_cnf, Atom, Clause, Formula};

/// Decides satisfiability of a set of ground clauses.
///
/// Branching is deterministic: atoms are indexed in their canonical order
/// and the lowest-indexed unassigned atom is split first, trying `true`
/// before `false`. An empty clause anywhere makes the set unsatisfiable; an
/// empty set is satisfiable.
pub fn is_satisfiable(clauses: &[Clause]) -> bool {
    debug_assert!(
        clauses.iter().all(|c| c.is_ground()),
        "satisfiability is defined over ground clauses"
    );
    let mut index: BTreeMap<&Atom, usize> = BTreeMap::new();
    for c in clauses {
        for l in c.literals() {
            let next = index.len();
            index.entry(&l.atom).or_insert(next);
        }
    }
    let encoded: Vec<Vec<(usize, bool)>> = clauses
        .iter()
        .map(|c| c.literals().map(|l| (index[&l.atom], l.positive)).collect())
        .collect();
    let mut assignment = vec![None; index.len()];
    dpll(&encoded, &mut assignment)
}

fn dpll(clauses: &[Vec<(usize, bool)>], assignment: &mut Vec<Option<bool>>) -> bool {
    // Unit propagation to a fixed point; record trail for backtracking.
    let mut trail = Vec::new();
    loop {
        let mut changed = false;
        for clause in clauses {
            let mut satisfied = false;
            let mut unassigned = None;
            let mut unassigned_count = 0;
            for &(var, positive) in clause {
                match assignment[var] {
                    Some(v) if v == positive => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        unassigned = Some((var, positive));
                        unassigned_count += 1;
                    }
                }
            }
            if satisfied {
                continue;
            }
            match unassigned_count {
                0 => {
                    for var in trail {
                        assignment[var] = None;
                    }
                    return false;
                }
                1 => {
                    let (var, positive) = unassigned.unwrap();
                    assignment[var] = Some(positive);
                    trail.push(var);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    match assignment.iter().position(|v| v.is_none()) {
        None => true,
        Some(var) => {
            for value in [true, false] {
                assignment[var] = Some(value);
                if dpll(clauses, assignment) {
                    return true;
                }
                assignment[var] = None;
            }
            for var in trail {
                assignment[var] = None;
            }
            false
        }
    }
}

/// Classical entailment by refutation: `axioms` entail `f` iff
/// `axioms` together with the clauses of `~f` are unsatisfiable.
pub fn entails(axioms: &[Clause], f: &Formula) -> bool {
    entails_with(axioms, &[], f)
}

/// Entailment from `axioms` extended with `extra` clauses. Used for tests
/// of the form "axioms plus a rule's consequent entail f" without
/// re-allocating the axiom set.
pub fn entails_with(axioms: &[Clause], extra: &[Clause], f: &Formula) -> bool {
    debug_assert!(f.is_ground(), "entailment queries must be ground");
    let mut clauses: Vec<Clause> = Vec::with_capacity(axioms.len() + extra.len() + 2);
    clauses.extend_from_slice(axioms);
    clauses.extend_from_slice(extra);
    clauses.extend(to_cnf(&f.negate()));
    !is_satisfiable(&clauses)
}

/// True iff `f` holds under every assignment, i.e. is entailed by nothing.
pub fn is_tautology(f: &Formula) -> bool {
    entails(&[], f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Literal;

    fn plit(name: &str) -> Literal {
        Literal::pos(Atom::prop(name))
    }

    fn nlit(name: &str) -> Literal {
        Literal::neg(Atom::prop(name))
    }

    #[test]
    fn empty_set_is_satisfiable_and_empty_clause_is_not() {
        assert!(is_satisfiable(&[]));
        assert!(!is_satisfiable(&[Clause::new([])]));
    }

    #[test]
    fn unit_propagation_finds_the_only_model() {
        let clauses = [
            Clause::new([plit("a")]),
            Clause::new([nlit("a"), plit("b")]),
            Clause::new([nlit("b"), plit("c")]),
        ];
        assert!(is_satisfiable(&clauses));
        let contradicted = [
            Clause::new([plit("a")]),
            Clause::new([nlit("a"), plit("b")]),
            Clause::new([nlit("b")]),
        ];
        assert!(!is_satisfiable(&contradicted));
    }

    #[test]
    fn tautologous_clauses_never_block_models() {
        let clauses = [Clause::new([plit("a"), nlit("a")]), Clause::new([nlit("a")])];
        assert!(is_satisfiable(&clauses));
    }

    #[test]
    fn entailment_by_refutation() {
        let axioms = [Clause::new([nlit("a"), plit("b")]), Clause::new([plit("a")])];
        assert!(entails(&axioms, &Formula::prop("b")));
        assert!(!entails(&axioms, &Formula::prop("b").negate()));
        assert!(!entails(&[], &Formula::prop("a")));
    }

    #[test]
    fn tautology_checks() {
        let p = Formula::prop("p");
        assert!(is_tautology(&Formula::or([p.clone(), p.negate()])));
        assert!(!is_tautology(&p));
    }
}
