//! Plausible descriptions: a satisfiable axiom set, strict rules compiled
//! from the axioms' clauses, user-supplied defeasible and warning rules, and
//! a priority relation over rule instances.
//!
//! Building a description grounds everything over the (finite) constant set,
//! so all reasoning downstream is over a finite set of ground rule
//! instances. Evidence sets (supporters and foes of a formula) and the
//! well-foundedness of the priority relation composed through them are
//! computed here and cached on the immutable description.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classical;
use crate::syntax::{to_cnf, Clause, Formula, Literal, Substitution};

/// Index of a rule instance in a description's canonical instance order.
pub type InstId = usize;

/// The eight proof algorithms. The unprimed five form the proving side of
/// the hierarchy; `psi'` and `pi'` are the duals used to disable foes, and
/// `theta'` is self-contained ambiguity propagation.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Phi,
    Pi,
    Psi,
    Theta,
    ThetaPrime,
    Beta,
    PsiPrime,
    PiPrime,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Phi,
        Algorithm::Pi,
        Algorithm::Psi,
        Algorithm::Theta,
        Algorithm::ThetaPrime,
        Algorithm::Beta,
        Algorithm::PsiPrime,
        Algorithm::PiPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Phi => "phi",
            Algorithm::Pi => "pi",
            Algorithm::Psi => "psi",
            Algorithm::Theta => "theta",
            Algorithm::ThetaPrime => "theta'",
            Algorithm::Beta => "beta",
            Algorithm::PsiPrime => "psi'",
            Algorithm::PiPrime => "pi'",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "phi" => Ok(Algorithm::Phi),
            "pi" => Ok(Algorithm::Pi),
            "psi" => Ok(Algorithm::Psi),
            "theta" => Ok(Algorithm::Theta),
            "theta'" | "thetap" | "theta_prime" => Ok(Algorithm::ThetaPrime),
            "beta" => Ok(Algorithm::Beta),
            "psi'" | "psip" | "psi_prime" => Ok(Algorithm::PsiPrime),
            "pi'" | "pip" | "pi_prime" => Ok(Algorithm::PiPrime),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Rule strength. Strict rules arise only by compiling axiom clauses;
/// defeasible and warning rules are user-supplied. Warning rules can attack
/// but never support a conclusion.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Strict,
    Defeasible,
    Warning,
}

impl RuleKind {
    pub fn arrow(self) -> &'static str {
        match self {
            RuleKind::Strict => "->",
            RuleKind::Defeasible => "=>",
            RuleKind::Warning => "~>",
        }
    }
}

/// A rule: a finite set of antecedent formulas and a consequent formula.
/// Schemas may contain variables; instances are ground. Equality is
/// structural, so two instances with the same kind, antecedents and
/// consequent are the same rule.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub kind: RuleKind,
    pub antecedents: BTreeSet<Formula>,
    pub consequent: Formula,
}

impl Rule {
    pub fn new(
        kind: RuleKind,
        antecedents: impl IntoIterator<Item = Formula>,
        consequent: Formula,
    ) -> Self {
        Rule {
            kind,
            antecedents: antecedents.into_iter().collect(),
            consequent,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut vars = BTreeSet::new();
        for a in &self.antecedents {
            vars.extend(a.free_vars());
        }
        vars.extend(self.consequent.free_vars());
        vars
    }

    pub fn is_ground(&self) -> bool {
        self.antecedents.iter().all(|a| a.is_ground()) && self.consequent.is_ground()
    }

    pub fn apply_substitution(&self, s: &Substitution) -> Rule {
        Rule {
            kind: self.kind,
            antecedents: self
                .antecedents
                .iter()
                .map(|a| a.apply_substitution(s))
                .collect(),
            consequent: self.consequent.apply_substitution(s),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.antecedents.iter().map(|a| a.to_string()).collect();
        parts.sort();
        write!(f, "{} {} {}", parts.join(", "), self.kind.arrow(), self.consequent)
    }
}

/// A named rule as written by the user (defeasible or warning only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserRule {
    pub name: String,
    pub rule: Rule,
}

/// A ground rule instance: the grounded rule plus the name and substitution
/// it came from. Two origins that ground to the same rule are merged; the
/// stored name and substitution are the first origin in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInstance {
    pub name: String,
    pub subst: Substitution,
    pub rule: Rule,
}

impl RuleInstance {
    /// Display label: the rule name, with the substitution appended when
    /// non-empty, e.g. `r1[X=nancy]`.
    pub fn label(&self) -> String {
        if self.subst.is_empty() {
            self.name.clone()
        } else {
            format!("{}{}", self.name, self.subst)
        }
    }
}

/// A reference to a rule inside a priority statement: either a user rule by
/// name (optionally with explicit bindings) or a compiled strict rule by its
/// generated name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleRef {
    User {
        name: String,
        bindings: Option<Substitution>,
    },
    Generated {
        name: String,
    },
}

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleRef::User {
                name,
                bindings: None,
            } => f.write_str(name),
            RuleRef::User {
                name,
                bindings: Some(b),
            } => write!(f, "{name}{b}"),
            RuleRef::Generated { name } => write!(f, "\"{name}\""),
        }
    }
}

/// One `prefer superior > inferior` statement, before expansion over
/// substitutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriorityStatement {
    pub superior: RuleRef,
    pub inferior: RuleRef,
}

/// Which rule kinds an evidence query ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// Strict, defeasible and warning instances.
    All,
    /// Strict and defeasible instances only: the rules able to support a
    /// conclusion.
    StrictAndDefeasible,
}

/// Errors raised while building or querying a description.
#[derive(Debug, Error)]
pub enum DescriptionError {
    #[error("axioms are unsatisfiable; minimal conflicting clauses: {}", .core.join("; "))]
    UnsatisfiableAxioms { core: Vec<String> },

    #[error("rule `{name}` is strict; strict rules arise only from axioms")]
    StrictUserRule { name: String },

    #[error("duplicate rule name `{name}`")]
    DuplicateRuleName { name: String },

    #[error("variables occur in `{context}` but the constant set is empty")]
    NoConstants { context: String },

    #[error("priority statement refers to unknown rule `{name}`")]
    UnknownRuleReference { name: String },

    #[error("priority reference `{reference}` does not pick out a ground instance")]
    UnresolvedPriorityReference { reference: String },

    #[error(
        "priority relation is not well-founded for `{formula}`: {}",
        .witness.join(" > ")
    )]
    NotWellFounded {
        formula: String,
        witness: Vec<String>,
    },
}

/// Compiles one clause into its strict rules: for every non-empty subset K
/// of the clause's literals there is a rule concluding the disjunction of K.
/// Its antecedent set is empty when K is the whole clause; otherwise it
/// holds the single formula obtained by negating what is left out, a bare
/// negated literal when one literal is left out and one conjunction formula
/// (not a set of literals) when more are. An n-literal clause yields
/// 2^n - 1 rules.
pub fn rul(clause: &Clause) -> Vec<Rule> {
    let lits: Vec<&Literal> = clause.literals().collect();
    let n = lits.len();
    let mut rules = Vec::with_capacity((1usize << n) - 1);
    for mask in 1u32..(1u32 << n) {
        let kept: Vec<&Literal> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| lits[i]).collect();
        let left_out: Vec<&Literal> = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| lits[i]).collect();
        let antecedents: BTreeSet<Formula> = match left_out.len() {
            0 => BTreeSet::new(),
            1 => BTreeSet::from([Formula::Lit(left_out[0].negated())]),
            _ => BTreeSet::from([Formula::and(
                left_out.iter().map(|l| Formula::Lit(l.negated())),
            )]),
        };
        rules.push(Rule {
            kind: RuleKind::Strict,
            antecedents,
            consequent: Formula::or(kept.iter().map(|l| Formula::Lit((*l).clone()))),
        });
    }
    rules
}

/// The generated name of a compiled strict rule: the index of its source
/// clause in the canonical ground-axiom order, a colon, and the kept
/// literals in canonical order. These names are valid quoted rule
/// references in priority statements.
pub fn strict_rule_name(clause_index: usize, consequent: &Formula) -> String {
    let mut lits: Vec<String> = match consequent {
        Formula::Or(fs) => fs.iter().map(|g| g.to_string()).collect(),
        other => vec![other.to_string()],
    };
    lits.sort();
    format!("ax{clause_index}:{}", lits.join(","))
}

/// Grounds rule schemas over a constant set: every substitution of the
/// rule's variables by constants yields one instance. Ground rules map to
/// themselves under the empty substitution. Instances that coincide as
/// ground rules are merged, keeping the first origin.
pub fn ground(
    rules: &[UserRule],
    constants: &BTreeSet<String>,
) -> Result<Vec<RuleInstance>, DescriptionError> {
    let mut out = Vec::new();
    let mut seen: HashSet<Rule> = HashSet::new();
    for ur in rules {
        let vars: Vec<String> = ur.rule.free_vars().into_iter().collect();
        if vars.is_empty() {
            if seen.insert(ur.rule.clone()) {
                out.push(RuleInstance {
                    name: ur.name.clone(),
                    subst: Substitution::new(),
                    rule: ur.rule.clone(),
                });
            }
            continue;
        }
        if constants.is_empty() {
            return Err(DescriptionError::NoConstants {
                context: ur.name.clone(),
            });
        }
        for subst in all_substitutions(&vars, constants) {
            let grounded = ur.rule.apply_substitution(&subst);
            debug_assert!(grounded.is_ground());
            if seen.insert(grounded.clone()) {
                out.push(RuleInstance {
                    name: ur.name.clone(),
                    subst,
                    rule: grounded,
                });
            }
        }
    }
    Ok(out)
}

/// All assignments of the given variables to constants, in odometer order
/// over the sorted constant set.
fn all_substitutions(vars: &[String], constants: &BTreeSet<String>) -> Vec<Substitution> {
    let consts: Vec<&String> = constants.iter().collect();
    let mut out = Vec::new();
    let mut counters = vec![0usize; vars.len()];
    loop {
        let mut s = Substitution::new();
        for (v, &i) in vars.iter().zip(counters.iter()) {
            s.insert(v.clone(), consts[i].clone());
        }
        out.push(s);
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            counters[pos] += 1;
            if counters[pos] < consts.len() {
                break;
            }
            counters[pos] = 0;
        }
    }
}

/// Supporters of a formula within one scope, cached per formula.
#[derive(Debug, Default)]
struct Evidence {
    all: Vec<InstId>,
    sd: Vec<InstId>,
}

/// Instances sharing a consequent, with the consequent's clauses and its
/// joint satisfiability with the axioms precomputed.
#[derive(Debug)]
struct ConsequentGroup {
    cnf: Vec<Clause>,
    sat_with_ax: bool,
    members: Vec<InstId>,
}

#[derive(Default)]
struct Caches {
    ax_entails: HashMap<Formula, bool>,
    evidence: HashMap<Formula, Arc<Evidence>>,
    wf_ok: HashSet<Formula>,
}

enum NameTarget {
    User(usize),
    Strict(InstId),
}

/// An immutable, fully ground plausible description.
pub struct PlausibleDescription {
    constants: BTreeSet<String>,
    ground_axioms: Vec<Clause>,
    instances: Vec<RuleInstance>,
    groups: Vec<ConsequentGroup>,
    priority_pairs: BTreeSet<(InstId, InstId)>,
    user_rules: Vec<UserRule>,
    name_index: HashMap<String, NameTarget>,
    ground_lookup: HashMap<Rule, InstId>,
    caches: RwLock<Caches>,
}

impl fmt::Debug for PlausibleDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlausibleDescription")
            .field("constants", &self.constants)
            .field("ground_axioms", &self.ground_axioms.len())
            .field("instances", &self.instances.len())
            .field("priority_pairs", &self.priority_pairs.len())
            .finish()
    }
}

/// Builds a description from declared constants, axiom formulas, user rules
/// and priority statements.
///
/// Axiom formulas that are not already clauses are split into clauses.
/// Everything is instantiated over the effective constant set: the declared
/// constants plus any constant occurring in the axioms or rules. Rejects
/// unsatisfiable axioms (naming a minimal conflicting clause subset), user
/// strict rules, duplicate or unknown rule names, and priority relations
/// whose composition through some rule consequent's evidence sets is
/// cyclic.
pub fn build_description(
    constants: impl IntoIterator<Item = String>,
    axioms: &[Formula],
    user_rules: Vec<UserRule>,
    priorities: &[PriorityStatement],
) -> Result<PlausibleDescription, DescriptionError> {
    // Reject strict user rules and duplicate names up front.
    let mut names_seen = HashSet::new();
    for ur in &user_rules {
        if ur.rule.kind == RuleKind::Strict {
            return Err(DescriptionError::StrictUserRule {
                name: ur.name.clone(),
            });
        }
        if !names_seen.insert(ur.name.clone()) {
            return Err(DescriptionError::DuplicateRuleName {
                name: ur.name.clone(),
            });
        }
    }

    // Axioms to clause schemas: clause-shaped formulas are kept verbatim
    // (even if tautologous); the rest are split by CNF conversion.
    let mut schemas: BTreeSet<Clause> = BTreeSet::new();
    for f in axioms {
        match as_clause(f) {
            Some(c) => {
                schemas.insert(c);
            }
            None => schemas.extend(to_cnf(f)),
        }
    }

    // Effective constants: declared plus occurring.
    let mut all_constants: BTreeSet<String> = constants.into_iter().collect();
    for c in &schemas {
        collect_clause_constants(c, &mut all_constants);
    }
    for ur in &user_rules {
        for a in &ur.rule.antecedents {
            collect_formula_constants(a, &mut all_constants);
        }
        collect_formula_constants(&ur.rule.consequent, &mut all_constants);
    }

    // Ground the axiom schemas.
    let mut ground_axioms: BTreeSet<Clause> = BTreeSet::new();
    for schema in &schemas {
        let vars: Vec<String> = schema.free_vars().into_iter().collect();
        if vars.is_empty() {
            ground_axioms.insert(schema.clone());
        } else {
            if all_constants.is_empty() {
                return Err(DescriptionError::NoConstants {
                    context: schema.to_string(),
                });
            }
            for subst in all_substitutions(&vars, &all_constants) {
                ground_axioms.insert(schema.apply_substitution(&subst));
            }
        }
    }
    let ground_axioms: Vec<Clause> = ground_axioms.into_iter().collect();

    if !classical::is_satisfiable(&ground_axioms) {
        let core = minimal_unsat_core(&ground_axioms);
        return Err(DescriptionError::UnsatisfiableAxioms {
            core: core.iter().map(|c| c.to_string()).collect(),
        });
    }

    // Compile strict rules and ground the user rules, then merge into the
    // canonical instance order.
    let mut candidates: Vec<RuleInstance> = Vec::new();
    for (i, clause) in ground_axioms.iter().enumerate() {
        for rule in rul(clause) {
            candidates.push(RuleInstance {
                name: strict_rule_name(i, &rule.consequent),
                subst: Substitution::new(),
                rule,
            });
        }
    }
    candidates.extend(ground(&user_rules, &all_constants)?);

    let mut merged: Vec<RuleInstance> = Vec::new();
    let mut seen: HashSet<Rule> = HashSet::new();
    for inst in candidates {
        if seen.insert(inst.rule.clone()) {
            merged.push(inst);
        }
    }
    merged.sort_by(|a, b| {
        instance_sort_key(a).cmp(&instance_sort_key(b))
    });
    let instances = merged;

    let mut ground_lookup = HashMap::new();
    let mut name_index: HashMap<String, NameTarget> = HashMap::new();
    for (id, inst) in instances.iter().enumerate() {
        ground_lookup.insert(inst.rule.clone(), id);
        if inst.rule.kind == RuleKind::Strict {
            name_index.insert(inst.name.clone(), NameTarget::Strict(id));
        }
    }
    for (i, ur) in user_rules.iter().enumerate() {
        name_index.insert(ur.name.clone(), NameTarget::User(i));
    }

    // Group instances by consequent and precompute each consequent's
    // clauses and satisfiability with the axioms.
    let mut by_consequent: BTreeMap<Formula, Vec<InstId>> = BTreeMap::new();
    for (id, inst) in instances.iter().enumerate() {
        by_consequent
            .entry(inst.rule.consequent.clone())
            .or_default()
            .push(id);
    }
    let groups = by_consequent
        .into_iter()
        .map(|(consequent, members)| {
            let cnf = to_cnf(&consequent);
            let sat_with_ax = {
                let mut clauses = ground_axioms.clone();
                clauses.extend(cnf.iter().cloned());
                classical::is_satisfiable(&clauses)
            };
            ConsequentGroup {
                cnf,
                sat_with_ax,
                members,
            }
        })
        .collect();

    let desc = PlausibleDescription {
        constants: all_constants,
        ground_axioms,
        instances,
        groups,
        priority_pairs: BTreeSet::new(),
        user_rules,
        name_index,
        ground_lookup,
        caches: RwLock::new(Caches::default()),
    };

    // Expand priority statements over substitutions and install the pairs.
    let mut pairs: BTreeSet<(InstId, InstId)> = BTreeSet::new();
    for stmt in priorities {
        for pair in desc.expand_priority(stmt)? {
            pairs.insert(pair);
        }
    }
    let mut desc = desc;
    desc.priority_pairs = pairs;

    // Eager well-foundedness check on every instance consequent and its
    // negation; other formulas are checked lazily when first queried.
    if !desc.priority_pairs.is_empty() {
        let mut targets: BTreeSet<Formula> = BTreeSet::new();
        for inst in &desc.instances {
            targets.insert(inst.rule.consequent.clone());
            targets.insert(inst.rule.consequent.negate());
        }
        for f in targets {
            desc.check_well_founded(&f)?;
        }
    }

    Ok(desc)
}

fn instance_sort_key(inst: &RuleInstance) -> (u8, Formula, BTreeSet<Formula>, String, Substitution) {
    let kind_rank = match inst.rule.kind {
        RuleKind::Strict => 0u8,
        RuleKind::Defeasible => 1,
        RuleKind::Warning => 2,
    };
    (
        kind_rank,
        inst.rule.consequent.clone(),
        inst.rule.antecedents.clone(),
        inst.name.clone(),
        inst.subst.clone(),
    )
}

/// Clause-shaped formulas (a literal or a disjunction of literals) pass
/// through axiom splitting verbatim.
fn as_clause(f: &Formula) -> Option<Clause> {
    match f {
        Formula::Lit(l) => Some(Clause::new([l.clone()])),
        Formula::Or(fs) => {
            let mut lits = Vec::with_capacity(fs.len());
            for g in fs {
                match g {
                    Formula::Lit(l) => lits.push(l.clone()),
                    _ => return None,
                }
            }
            Some(Clause::new(lits))
        }
        _ => None,
    }
}

fn collect_formula_constants(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Lit(l) => {
            for t in &l.atom.args {
                if let crate::syntax::Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        Formula::Not(g) => collect_formula_constants(g, out),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                collect_formula_constants(g, out);
            }
        }
    }
}

fn collect_clause_constants(c: &Clause, out: &mut BTreeSet<String>) {
    for l in c.literals() {
        for t in &l.atom.args {
            if let crate::syntax::Term::Const(cn) = t {
                out.insert(cn.clone());
            }
        }
    }
}

/// Deletion-minimal unsatisfiable subset of an unsatisfiable clause set.
fn minimal_unsat_core(clauses: &[Clause]) -> Vec<Clause> {
    let mut core: Vec<Clause> = clauses.to_vec();
    let mut i = 0;
    while i < core.len() {
        let mut without: Vec<Clause> = core.clone();
        without.remove(i);
        if !classical::is_satisfiable(&without) {
            core = without;
        } else {
            i += 1;
        }
    }
    core
}

impl PlausibleDescription {
    pub fn constants(&self) -> &BTreeSet<String> {
        &self.constants
    }

    /// The ground axiom clauses in canonical order; strict rule names index
    /// into this order.
    pub fn axioms(&self) -> &[Clause] {
        &self.ground_axioms
    }

    /// All rule instances in canonical order.
    pub fn instances(&self) -> &[RuleInstance] {
        &self.instances
    }

    pub fn instance(&self, id: InstId) -> &RuleInstance {
        &self.instances[id]
    }

    pub fn priority_pairs(&self) -> impl Iterator<Item = (InstId, InstId)> + '_ {
        self.priority_pairs.iter().copied()
    }

    /// True iff `superior` beats `inferior` in the priority relation.
    pub fn is_superior(&self, superior: InstId, inferior: InstId) -> bool {
        self.priority_pairs.contains(&(superior, inferior))
    }

    /// Classical entailment from the axioms, cached per formula.
    pub fn ax_entails(&self, f: &Formula) -> bool {
        if let Some(&v) = self.caches.read().unwrap().ax_entails.get(f) {
            return v;
        }
        let v = classical::entails(&self.ground_axioms, f);
        self.caches
            .write()
            .unwrap()
            .ax_entails
            .insert(f.clone(), v);
        v
    }

    /// The instances evidencing `f`: those whose consequent, added to the
    /// axioms, keeps them satisfiable and entails `f`, provided the axioms
    /// alone do not already entail `f` (in which case there are none).
    /// Checks lazily that the priority relation composed through `f`'s
    /// evidence is well-founded.
    pub fn supporters(&self, f: &Formula, scope: Scope) -> Result<Vec<InstId>, DescriptionError> {
        self.ensure_well_founded(f)?;
        let ev = self.evidence(f);
        Ok(match scope {
            Scope::All => ev.all.clone(),
            Scope::StrictAndDefeasible => ev.sd.clone(),
        })
    }

    /// Supporters of `f` that are superior to the instance `inferior`.
    pub fn superior_supporters(
        &self,
        f: &Formula,
        inferior: InstId,
    ) -> Result<Vec<InstId>, DescriptionError> {
        Ok(self
            .supporters(f, Scope::StrictAndDefeasible)?
            .into_iter()
            .filter(|&t| self.is_superior(t, inferior))
            .collect())
    }

    /// The foes a supporter `r` of `f` must overcome under `alg`: every
    /// instance evidencing `~f` for the team-defeat algorithms, none for
    /// `phi` and `pi'`, and only those superior to `r` for `psi'`.
    pub fn foe(
        &self,
        alg: Algorithm,
        f: &Formula,
        r: InstId,
    ) -> Result<Vec<InstId>, DescriptionError> {
        match alg {
            Algorithm::Phi | Algorithm::PiPrime => Ok(Vec::new()),
            Algorithm::PsiPrime => Ok(self
                .supporters(&f.negate(), Scope::All)?
                .into_iter()
                .filter(|&s| self.is_superior(s, r))
                .collect()),
            Algorithm::Pi
            | Algorithm::Psi
            | Algorithm::Theta
            | Algorithm::ThetaPrime
            | Algorithm::Beta => self.supporters(&f.negate(), Scope::All),
        }
    }

    fn evidence(&self, f: &Formula) -> Arc<Evidence> {
        if let Some(ev) = self.caches.read().unwrap().evidence.get(f) {
            return ev.clone();
        }
        let ev = Arc::new(self.compute_evidence(f));
        self.caches
            .write()
            .unwrap()
            .evidence
            .insert(f.clone(), ev.clone());
        ev
    }

    fn compute_evidence(&self, f: &Formula) -> Evidence {
        if self.ax_entails(f) {
            return Evidence::default();
        }
        let mut ev = Evidence::default();
        for group in &self.groups {
            if !group.sat_with_ax {
                continue;
            }
            if classical::entails_with(&self.ground_axioms, &group.cnf, f) {
                for &id in &group.members {
                    ev.all.push(id);
                    if self.instances[id].rule.kind != RuleKind::Warning {
                        ev.sd.push(id);
                    }
                }
            }
        }
        ev.all.sort_unstable();
        ev.sd.sort_unstable();
        ev
    }

    fn ensure_well_founded(&self, f: &Formula) -> Result<(), DescriptionError> {
        if self.priority_pairs.is_empty() {
            return Ok(());
        }
        if self.caches.read().unwrap().wf_ok.contains(f) {
            return Ok(());
        }
        self.check_well_founded(f)?;
        self.caches.write().unwrap().wf_ok.insert(f.clone());
        Ok(())
    }

    /// Checks that the priority relation composed through `f`'s evidence is
    /// acyclic: with supporters r, r'' of `f` and s of `~f`, the relation
    /// "r'' > s > r" must admit no cycle. On failure the error carries an
    /// alternating witness chain of instance labels.
    pub fn check_well_founded(&self, f: &Formula) -> Result<(), DescriptionError> {
        if self.priority_pairs.is_empty() {
            return Ok(());
        }
        let sd_f = self.evidence(f).sd.clone();
        let sd_neg = self.evidence(&f.negate()).sd.clone();
        // edges[r''] lists (r, witness s) with r'' > s > r.
        let mut edges: HashMap<InstId, Vec<(InstId, InstId)>> = HashMap::new();
        for &s in &sd_neg {
            let above: Vec<InstId> = sd_f
                .iter()
                .copied()
                .filter(|&r| self.is_superior(r, s))
                .collect();
            let below: Vec<InstId> = sd_f
                .iter()
                .copied()
                .filter(|&r| self.is_superior(s, r))
                .collect();
            for &hi in &above {
                for &lo in &below {
                    edges.entry(hi).or_default().push((lo, s));
                }
            }
        }
        if let Some(cycle) = find_cycle(&sd_f, &edges) {
            let mut witness = Vec::new();
            for window in cycle.windows(2) {
                let (from, to) = (window[0], window[1]);
                let &(_, s) = edges[&from]
                    .iter()
                    .find(|(r, _)| *r == to)
                    .expect("cycle edge has a witness");
                witness.push(self.instances[from].label());
                witness.push(self.instances[s].label());
            }
            witness.push(self.instances[cycle[cycle.len() - 1]].label());
            return Err(DescriptionError::NotWellFounded {
                formula: f.to_string(),
                witness,
            });
        }
        Ok(())
    }

    /// Resolves a rule name and substitution to the instance it denotes.
    pub fn resolve_instance(&self, name: &str, subst: &Substitution) -> Option<InstId> {
        match self.name_index.get(name)? {
            NameTarget::Strict(id) => {
                if subst.is_empty() {
                    Some(*id)
                } else {
                    None
                }
            }
            NameTarget::User(i) => {
                let grounded = self.user_rules[*i].rule.apply_substitution(subst);
                if !grounded.is_ground() {
                    return None;
                }
                self.ground_lookup.get(&grounded).copied()
            }
        }
    }

    fn expand_priority(
        &self,
        stmt: &PriorityStatement,
    ) -> Result<Vec<(InstId, InstId)>, DescriptionError> {
        enum Side {
            Fixed(InstId),
            Open(Rule),
        }
        let resolve = |r: &RuleRef| -> Result<Side, DescriptionError> {
            match r {
                RuleRef::Generated { name } => match self.name_index.get(name) {
                    Some(NameTarget::Strict(id)) => Ok(Side::Fixed(*id)),
                    _ => Err(DescriptionError::UnknownRuleReference { name: name.clone() }),
                },
                RuleRef::User { name, bindings } => {
                    let base = match self.name_index.get(name) {
                        Some(NameTarget::User(i)) => &self.user_rules[*i].rule,
                        _ => {
                            return Err(DescriptionError::UnknownRuleReference {
                                name: name.clone(),
                            })
                        }
                    };
                    match bindings {
                        Some(b) => {
                            let grounded = base.apply_substitution(b);
                            if !grounded.is_ground() {
                                return Err(DescriptionError::UnresolvedPriorityReference {
                                    reference: r.to_string(),
                                });
                            }
                            match self.ground_lookup.get(&grounded) {
                                Some(&id) => Ok(Side::Fixed(id)),
                                None => Err(DescriptionError::UnresolvedPriorityReference {
                                    reference: r.to_string(),
                                }),
                            }
                        }
                        None => Ok(Side::Open(base.clone())),
                    }
                }
            }
        };

        let sup = resolve(&stmt.superior)?;
        let inf = resolve(&stmt.inferior)?;
        let lookup_open = |rule: &Rule, subst: &Substitution| -> Option<InstId> {
            let grounded = rule.apply_substitution(subst);
            if grounded.is_ground() {
                self.ground_lookup.get(&grounded).copied()
            } else {
                None
            }
        };

        // Shared variables between the two open sides range over the same
        // substitution, so expansion is over the union of their variables.
        let mut open_vars: BTreeSet<String> = BTreeSet::new();
        if let Side::Open(r) = &sup {
            open_vars.extend(r.free_vars());
        }
        if let Side::Open(r) = &inf {
            open_vars.extend(r.free_vars());
        }
        let substs = if open_vars.is_empty() {
            vec![Substitution::new()]
        } else {
            if self.constants.is_empty() {
                return Err(DescriptionError::NoConstants {
                    context: format!("prefer {} > {}", stmt.superior, stmt.inferior),
                });
            }
            all_substitutions(&open_vars.iter().cloned().collect::<Vec<_>>(), &self.constants)
        };

        let mut pairs = Vec::new();
        for s in &substs {
            let sup_id = match &sup {
                Side::Fixed(id) => Some(*id),
                Side::Open(r) => lookup_open(r, s),
            };
            let inf_id = match &inf {
                Side::Fixed(id) => Some(*id),
                Side::Open(r) => lookup_open(r, s),
            };
            match (sup_id, inf_id) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                _ => {
                    return Err(DescriptionError::UnresolvedPriorityReference {
                        reference: format!("prefer {} > {}", stmt.superior, stmt.inferior),
                    })
                }
            }
        }
        Ok(pairs)
    }

    /// A canonical, parse-independent rendering of the built description:
    /// constants, ground axiom clauses, instances and priority pairs, one
    /// per line in canonical order.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for c in &self.constants {
            out.push_str(&format!("const {c}.\n"));
        }
        for c in &self.ground_axioms {
            out.push_str(&format!("axiom {c}.\n"));
        }
        for inst in &self.instances {
            out.push_str(&format!("{}: {}\n", inst.label(), inst.rule));
        }
        for &(a, b) in &self.priority_pairs {
            out.push_str(&format!(
                "prefer {} > {}.\n",
                self.instances[a].label(),
                self.instances[b].label()
            ));
        }
        out
    }

    /// SHA-256 of the canonical text, identifying the description inside
    /// certificates.
    pub fn canonical_digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_text().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Depth-first search for a directed cycle; returns it as a node sequence
/// whose first and last elements coincide.
fn find_cycle(
    nodes: &[InstId],
    edges: &HashMap<InstId, Vec<(InstId, InstId)>>,
) -> Option<Vec<InstId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let mut color: HashMap<InstId, Color> = nodes.iter().map(|&n| (n, Color::White)).collect();
    let mut parent: HashMap<InstId, InstId> = HashMap::new();

    fn visit(
        n: InstId,
        edges: &HashMap<InstId, Vec<(InstId, InstId)>>,
        color: &mut HashMap<InstId, Color>,
        parent: &mut HashMap<InstId, InstId>,
    ) -> Option<(InstId, InstId)> {
        color.insert(n, Color::Grey);
        if let Some(outs) = edges.get(&n) {
            for &(m, _) in outs {
                match color.get(&m).copied().unwrap_or(Color::Black) {
                    Color::Grey => return Some((n, m)),
                    Color::White => {
                        parent.insert(m, n);
                        if let Some(found) = visit(m, edges, color, parent) {
                            return Some(found);
                        }
                    }
                    Color::Black => {}
                }
            }
        }
        color.insert(n, Color::Black);
        None
    }

    for &n in nodes {
        if color[&n] == Color::White {
            if let Some((from, back_to)) = visit(n, edges, &mut color, &mut parent) {
                // Walk parents from `from` up to `back_to` to recover the cycle.
                let mut path = vec![from];
                let mut cur = from;
                while cur != back_to {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                path.push(back_to);
                return Some(path);
            }
        }
    }
    None
}
