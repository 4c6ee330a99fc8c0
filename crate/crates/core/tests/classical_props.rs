mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{eval_clause, tt_entails, tt_satisfiable};
use plaus::classical::{entails, entails_with, is_satisfiable, is_tautology};
use plaus::syntax::{Atom, Clause, Formula, Literal};

const NAMES: [&str; 4] = ["p", "q", "r", "w"];

fn arb_clause() -> impl Strategy<Value = Clause> {
    prop::collection::btree_set((0..NAMES.len(), any::<bool>()), 1..4).prop_map(|lits| {
        Clause::new(lits.into_iter().map(|(i, positive)| {
            let atom = Atom::prop(NAMES[i]);
            if positive {
                Literal::pos(atom)
            } else {
                Literal::neg(atom)
            }
        }))
    })
}

fn arb_clause_set() -> impl Strategy<Value = Vec<Clause>> {
    prop::collection::vec(arb_clause(), 0..6)
}

fn arb_literal_formula() -> impl Strategy<Value = Formula> {
    (0..NAMES.len(), any::<bool>()).prop_map(|(i, positive)| {
        let atom = Atom::prop(NAMES[i]);
        Formula::lit(if positive {
            Literal::pos(atom)
        } else {
            Literal::neg(atom)
        })
    })
}

fn arb_small_formula() -> impl Strategy<Value = Formula> {
    arb_literal_formula().prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            prop::collection::btree_set(inner.clone(), 1..3).prop_map(Formula::and),
            prop::collection::btree_set(inner.clone(), 1..3).prop_map(Formula::or),
            inner.prop_map(|f| f.negate()),
        ]
    })
}

proptest! {
    #[test]
    fn satisfiability_matches_the_truth_table(clauses in arb_clause_set()) {
        prop_assert_eq!(is_satisfiable(&clauses), tt_satisfiable(&clauses, &[]));
    }

    #[test]
    fn entailment_matches_the_truth_table(
        clauses in arb_clause_set(),
        goal in arb_small_formula(),
    ) {
        prop_assert_eq!(entails(&clauses, &goal), tt_entails(&clauses, &[], &goal));
    }

    #[test]
    fn entailment_with_extras_matches_the_truth_table(
        clauses in arb_clause_set(),
        extra in arb_small_formula(),
        goal in arb_small_formula(),
    ) {
        let extra_clauses = plaus::syntax::to_cnf(&extra);
        prop_assert_eq!(
            entails_with(&clauses, &extra_clauses, &goal),
            tt_entails(&clauses, std::slice::from_ref(&extra), &goal),
        );
    }

    #[test]
    fn tautology_matches_the_truth_table(f in arb_small_formula()) {
        let mut atoms = BTreeSet::new();
        common::formula_atoms(&f, &mut atoms);
        let atoms: Vec<Atom> = atoms.into_iter().collect();
        let everywhere_true = (0u32..(1 << atoms.len())).all(|mask| {
            let tru: BTreeSet<Atom> = atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.clone())
                .collect();
            common::eval_formula(&f, &tru)
        });
        prop_assert_eq!(is_tautology(&f), everywhere_true);
    }
}

#[test]
fn the_empty_clause_is_unsatisfiable() {
    let empty = Clause::new(std::iter::empty::<Literal>());
    assert!(!is_satisfiable(std::slice::from_ref(&empty)));
    assert!(empty.literals().next().is_none());
    let tru = BTreeSet::new();
    assert!(!eval_clause(&empty, &tru));
}
