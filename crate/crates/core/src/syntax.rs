//! Terms, atoms, literals, formulas, clauses and substitutions.
//!
//! The language is function-free first-order logic: terms are constants or
//! variables, atoms apply a predicate to terms, and formulas are built from
//! literals with negation, conjunction and disjunction. Conjunction and
//! disjunction take *sets* of operands, so `a & b` and `b & a` are the same
//! formula. Variables are named with an initial uppercase letter, constants
//! and predicates with an initial lowercase letter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A term: a constant or a variable. Function symbols are not supported.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Const(n) | Term::Var(n) => n,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A predicate applied to zero or more terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Zero-ary atom, the propositional case.
    pub fn prop(predicate: impl Into<String>) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for t in &self.args {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        }
    }

    fn substituted(&self, s: &Substitution) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => match s.get(v) {
                        Some(c) => Term::Const(c.to_string()),
                        None => t.clone(),
                    },
                    Term::Const(_) => t.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// An atom or its negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }

    /// The complementary literal.
    pub fn negated(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            write!(f, "~")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A formula over literals, closed under `~`, `&` and `|`.
///
/// Invariants maintained by the constructors:
/// - `And`/`Or` operand sets are non-empty; singletons collapse to the
///   single operand.
/// - `Not` only ever wraps an `And` or `Or`; negation of a literal flips its
///   sign and double negations cancel. This makes [`Formula::negate`] an
///   involution on the structural level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Lit(Literal),
    Not(Box<Formula>),
    And(BTreeSet<Formula>),
    Or(BTreeSet<Formula>),
}

impl Formula {
    pub fn lit(l: Literal) -> Self {
        Formula::Lit(l)
    }

    /// Positive zero-ary literal, a convenience for tests and fixtures.
    pub fn prop(name: &str) -> Self {
        Formula::Lit(Literal::pos(Atom::prop(name)))
    }

    /// Conjunction of the given operands. Panics on an empty operand set;
    /// a singleton collapses to its only member.
    pub fn and(operands: impl IntoIterator<Item = Formula>) -> Self {
        let set: BTreeSet<Formula> = operands.into_iter().collect();
        assert!(!set.is_empty(), "conjunction needs at least one operand");
        if set.len() == 1 {
            return set.into_iter().next().unwrap();
        }
        Formula::And(set)
    }

    /// Disjunction of the given operands. Panics on an empty operand set;
    /// a singleton collapses to its only member.
    pub fn or(operands: impl IntoIterator<Item = Formula>) -> Self {
        let set: BTreeSet<Formula> = operands.into_iter().collect();
        assert!(!set.is_empty(), "disjunction needs at least one operand");
        if set.len() == 1 {
            return set.into_iter().next().unwrap();
        }
        Formula::Or(set)
    }

    /// Structural negation: flips literal signs, cancels double negation,
    /// and wraps conjunctions and disjunctions in `Not` without De Morgan
    /// rewriting. `f.negate().negate() == f`.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::Lit(l) => Formula::Lit(l.negated()),
            Formula::Not(g) => (**g).clone(),
            Formula::And(_) | Formula::Or(_) => Formula::Not(Box::new(self.clone())),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Formula::Lit(l) => l.is_ground(),
            Formula::Not(g) => g.is_ground(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|g| g.is_ground()),
        }
    }

    /// The set of variable names occurring (free) in the formula. There are
    /// no quantifiers below the implicit universal closure, so every
    /// occurrence is free.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Lit(l) => l.atom.collect_vars(out),
            Formula::Not(g) => g.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => {
                for g in fs {
                    g.collect_vars(out);
                }
            }
        }
    }

    /// Replaces variables by the constants the substitution assigns them.
    /// Variables outside the substitution's domain are left in place, so the
    /// result is ground iff the substitution covers `free_vars`.
    pub fn apply_substitution(&self, s: &Substitution) -> Formula {
        match self {
            Formula::Lit(l) => Formula::Lit(Literal {
                atom: l.atom.substituted(s),
                positive: l.positive,
            }),
            Formula::Not(g) => Formula::Not(Box::new(g.apply_substitution(s))),
            Formula::And(fs) => Formula::and(fs.iter().map(|g| g.apply_substitution(s))),
            Formula::Or(fs) => Formula::or(fs.iter().map(|g| g.apply_substitution(s))),
        }
    }
}

impl fmt::Display for Formula {
    /// Canonical rendering: operands are printed recursively, sorted
    /// lexicographically and joined with the connective; non-literal
    /// operands are parenthesised. Parsing the output yields the original
    /// formula.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Lit(l) => write!(f, "{l}"),
            Formula::Not(g) => write!(f, "~({g})"),
            Formula::And(fs) => f.write_str(&join_operands(fs, " & ")),
            Formula::Or(fs) => f.write_str(&join_operands(fs, " | ")),
        }
    }
}

fn join_operands(fs: &BTreeSet<Formula>, sep: &str) -> String {
    let mut parts: Vec<String> = fs
        .iter()
        .map(|g| match g {
            Formula::Lit(_) | Formula::Not(_) => g.to_string(),
            Formula::And(_) | Formula::Or(_) => format!("({g})"),
        })
        .collect();
    parts.sort();
    parts.join(sep)
}

/// A disjunction of literals, stored as a set: duplicate literals collapse
/// and the order is canonical. A clause containing an atom both positively
/// and negatively is tautologous; such clauses are kept only when stated
/// explicitly by the user.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    literals: BTreeSet<Literal>,
}

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Self {
        Clause {
            literals: literals.into_iter().collect(),
        }
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.literals.contains(l)
    }

    /// True when some atom occurs with both signs.
    pub fn is_tautologous(&self) -> bool {
        self.literals
            .iter()
            .any(|l| l.positive && self.literals.contains(&l.negated()))
    }

    pub fn is_ground(&self) -> bool {
        self.literals.iter().all(|l| l.is_ground())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for l in &self.literals {
            l.atom.collect_vars(&mut out);
        }
        out
    }

    pub fn apply_substitution(&self, s: &Substitution) -> Clause {
        Clause::new(self.literals.iter().map(|l| Literal {
            atom: l.atom.substituted(s),
            positive: l.positive,
        }))
    }

    /// The clause as a formula: a bare literal when unary, otherwise the
    /// disjunction of its literals. Panics on the empty clause, which has no
    /// formula counterpart here.
    pub fn to_formula(&self) -> Formula {
        assert!(!self.is_empty(), "empty clause has no formula form");
        Formula::or(self.literals.iter().cloned().map(Formula::Lit))
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Clause::new(iter)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        parts.sort();
        f.write_str(&parts.join(" | "))
    }
}

/// A mapping from variable names to constant names.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(BTreeMap<String, String>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Substitution(
            pairs
                .into_iter()
                .map(|(v, c)| (v.to_string(), c.to_string()))
                .collect(),
        )
    }

    pub fn insert(&mut self, var: impl Into<String>, constant: impl Into<String>) {
        self.0.insert(var.into(), constant.into());
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(|s| s.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(v, c)| (v.as_str(), c.as_str()))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (v, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}={c}")?;
        }
        write!(f, "]")
    }
}

/// Converts a formula to an equivalent set of clauses by negation-normal
/// form and distribution. Tautologous clauses produced by distribution are
/// dropped (they are valid, so the conjunction is unchanged); duplicate
/// clauses collapse. The result is in canonical order.
pub fn to_cnf(f: &Formula) -> Vec<Clause> {
    let clauses: BTreeSet<Clause> = cnf_pos(f)
        .into_iter()
        .map(Clause::new)
        .filter(|c| !c.is_tautologous())
        .collect();
    clauses.into_iter().collect()
}

fn cnf_pos(f: &Formula) -> Vec<BTreeSet<Literal>> {
    match f {
        Formula::Lit(l) => vec![BTreeSet::from([l.clone()])],
        Formula::Not(g) => cnf_neg(g),
        Formula::And(fs) => fs.iter().flat_map(cnf_pos).collect(),
        Formula::Or(fs) => distribute(fs.iter().map(cnf_pos)),
    }
}

fn cnf_neg(f: &Formula) -> Vec<BTreeSet<Literal>> {
    match f {
        Formula::Lit(l) => vec![BTreeSet::from([l.negated()])],
        Formula::Not(g) => cnf_pos(g),
        Formula::And(fs) => distribute(fs.iter().map(cnf_neg)),
        Formula::Or(fs) => fs.iter().flat_map(cnf_neg).collect(),
    }
}

/// Cross-product union: CNF of a disjunction of parts already in CNF.
fn distribute(parts: impl Iterator<Item = Vec<BTreeSet<Literal>>>) -> Vec<BTreeSet<Literal>> {
    let mut acc: Vec<BTreeSet<Literal>> = vec![BTreeSet::new()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for left in &acc {
            for right in &part {
                let mut c = left.clone();
                c.extend(right.iter().cloned());
                next.push(c);
            }
        }
        acc = next;
    }
    acc
}
