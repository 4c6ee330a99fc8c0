//! Shared test support: example descriptions, truth-table entailment, a
//! direct transcription of the proof-value definition used as an independent
//! oracle, and a seeded random description generator.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plaus::description::{Algorithm, PlausibleDescription, RuleKind};
use plaus::engine::EvalTarget;
use plaus::lang::parse_description;
use plaus::syntax::{Atom, Clause, Formula, Literal};

pub fn build(text: &str) -> PlausibleDescription {
    parse_description(text)
        .expect("fixture parses")
        .build()
        .expect("fixture builds")
}

pub fn fml(text: &str) -> Formula {
    plaus::lang::parse_formula(text).expect("formula parses")
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

/// Facts a, b and c; e is supported by a, attacked through an ambiguous d.
/// The attack on e is live only if d survives, so algorithms that block
/// ambiguity accept e while algorithms that propagate it reject e.
pub const AMBIGUITY: &str = "
axiom a.
axiom b.
axiom c.
def r2: a => e.
def r3: d => ~e.
def r4: b => d.
def r5: c => ~d.
";

/// Nancy the cephalopod. Nautiluses are cephalopods with external shells;
/// cephalopods usually lack them. `knows_nautilus` adds the later discovery
/// that Nancy is a nautilus, flipping the shell conclusion.
pub fn nautilus(knows_nautilus: bool) -> String {
    let mut t = String::from(
        "const nancy.
axiom ~n(X) | c(X).
axiom ~n(X) | s(X).
axiom c(nancy).
def r1: c(X) => ~s(X).
",
    );
    if knows_nautilus {
        t.push_str("axiom n(nancy).\n");
    }
    t
}

/// Molluscs usually have shells, cephalopods usually do not, and the more
/// specific rule is preferred. Exercises team defeat of an opposing rule.
pub const CEPHALOPOD: &str = "
const nancy.
axiom ~c(X) | m(X).
axiom c(nancy).
def r1: m(X) => s(X).
def r2: c(X) => ~s(X).
prefer r2 > r1.
";

/// An n-way lottery: exactly one of s1..sn wins, and each ticket is
/// individually unlikely to win. `extra_axioms` add later factual discoveries.
pub fn lottery(n: usize, extra_axioms: &[&str]) -> String {
    let mut t = String::new();
    let all: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    writeln!(t, "axiom {}.", all.join(" | ")).unwrap();
    for i in 1..=n {
        for j in i + 1..=n {
            writeln!(t, "axiom ~s{i} | ~s{j}.").unwrap();
        }
    }
    for i in 1..=n {
        writeln!(t, "def d{i}: => ~s{i}.").unwrap();
    }
    for ax in extra_axioms {
        writeln!(t, "axiom {ax}.").unwrap();
    }
    t
}

// ---------------------------------------------------------------------------
// Truth-table entailment, independent of the solver under test
// ---------------------------------------------------------------------------

pub fn formula_atoms(f: &Formula, out: &mut BTreeSet<Atom>) {
    match f {
        Formula::Lit(l) => {
            out.insert(l.atom.clone());
        }
        Formula::Not(g) => formula_atoms(g, out),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                formula_atoms(g, out);
            }
        }
    }
}

pub fn clause_atoms(c: &Clause, out: &mut BTreeSet<Atom>) {
    for l in c.literals() {
        out.insert(l.atom.clone());
    }
}

pub fn eval_formula(f: &Formula, made_true: &BTreeSet<Atom>) -> bool {
    match f {
        Formula::Lit(l) => made_true.contains(&l.atom) == l.positive,
        Formula::Not(g) => !eval_formula(g, made_true),
        Formula::And(fs) => fs.iter().all(|g| eval_formula(g, made_true)),
        Formula::Or(fs) => fs.iter().any(|g| eval_formula(g, made_true)),
    }
}

pub fn eval_clause(c: &Clause, made_true: &BTreeSet<Atom>) -> bool {
    c.literals()
        .any(|l| made_true.contains(&l.atom) == l.positive)
}

fn assignments(atoms: &[Atom]) -> impl Iterator<Item = BTreeSet<Atom>> + '_ {
    assert!(atoms.len() <= 24, "truth table too large");
    (0u32..(1 << atoms.len())).map(move |mask| {
        atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect()
    })
}

/// axioms ∪ extra ⊨ goal, by exhausting assignments over every mentioned atom.
pub fn tt_entails(axioms: &[Clause], extra: &[Formula], goal: &Formula) -> bool {
    let mut atoms = BTreeSet::new();
    for c in axioms {
        clause_atoms(c, &mut atoms);
    }
    for f in extra {
        formula_atoms(f, &mut atoms);
    }
    formula_atoms(goal, &mut atoms);
    let atoms: Vec<Atom> = atoms.into_iter().collect();
    let holds = assignments(&atoms).all(|tru| {
        let premises_hold = axioms.iter().all(|c| eval_clause(c, &tru))
            && extra.iter().all(|f| eval_formula(f, &tru));
        !premises_hold || eval_formula(goal, &tru)
    });
    holds
}

/// axioms ∪ extra is satisfiable.
pub fn tt_satisfiable(axioms: &[Clause], extra: &[Formula]) -> bool {
    let mut atoms = BTreeSet::new();
    for c in axioms {
        clause_atoms(c, &mut atoms);
    }
    for f in extra {
        formula_atoms(f, &mut atoms);
    }
    let atoms: Vec<Atom> = atoms.into_iter().collect();
    let holds = assignments(&atoms).any(|tru| {
        axioms.iter().all(|c| eval_clause(c, &tru)) && extra.iter().all(|f| eval_formula(f, &tru))
    });
    holds
}

// ---------------------------------------------------------------------------
// The oracle: a direct transcription of the proof-value clauses
// ---------------------------------------------------------------------------

/// Evaluates proof values by spelling out the +1 condition and the -1
/// condition separately and asserting that exactly one of them holds, which
/// re-checks coherence at every visited node. Evidence sets are recomputed
/// from scratch with truth tables; nothing is shared with the engine except
/// the built description's instance list, axioms and priority pairs. Results
/// are memoised keyed on the untouched arguments, so the memo cannot change
/// any value.
pub struct Oracle<'d> {
    desc: &'d PlausibleDescription,
    pairs: BTreeSet<(usize, usize)>,
    memo: HashMap<(Algorithm, Vec<(Algorithm, usize)>, EvalTarget), i8>,
    steps: u64,
}

fn oracle_co(alg: Algorithm) -> Algorithm {
    match alg {
        Algorithm::Phi => Algorithm::Phi,
        Algorithm::Pi => Algorithm::PiPrime,
        Algorithm::PiPrime => Algorithm::Pi,
        Algorithm::Psi => Algorithm::PsiPrime,
        Algorithm::PsiPrime => Algorithm::Psi,
        Algorithm::Theta => Algorithm::ThetaPrime,
        Algorithm::ThetaPrime => Algorithm::Theta,
        Algorithm::Beta => Algorithm::Beta,
    }
}

impl<'d> Oracle<'d> {
    pub fn new(desc: &'d PlausibleDescription) -> Self {
        Oracle {
            desc,
            pairs: desc.priority_pairs().collect(),
            memo: HashMap::new(),
            steps: 0,
        }
    }

    pub fn prove(&mut self, alg: Algorithm, f: &Formula) -> i8 {
        self.value(alg, &[], &EvalTarget::Formula(f.clone()))
    }

    pub fn value(&mut self, alg: Algorithm, hist: &[(Algorithm, usize)], x: &EvalTarget) -> i8 {
        let key = (alg, hist.to_vec(), x.clone());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        self.steps += 1;
        assert!(self.steps < 10_000_000, "oracle runaway on {x}");
        let plus = self.plus_holds(alg, hist, x);
        let minus = self.minus_holds(alg, hist, x);
        assert!(
            plus != minus,
            "exactly one proof condition must hold for {x} under {}: +1 {plus}, -1 {minus}",
            alg.name()
        );
        let v = if plus { 1 } else { -1 };
        self.memo.insert(key, v);
        v
    }

    fn plus_holds(&mut self, alg: Algorithm, hist: &[(Algorithm, usize)], x: &EvalTarget) -> bool {
        match x {
            EvalTarget::Set(fs) => fs
                .iter()
                .all(|f| self.value(alg, hist, &EvalTarget::Formula(f.clone())) == 1),
            EvalTarget::Formula(f) => {
                let entailed = tt_entails(self.desc.axioms(), &[], f);
                if alg == Algorithm::Phi || entailed {
                    return entailed;
                }
                let supporters = self.evidence(f, true);
                supporters.iter().any(|&r| {
                    !hist.contains(&(alg, r))
                        && self.antecedents(hist, alg, r) == 1
                        && self.foes(alg, f, r).iter().all(|&s| {
                            self.team_defeats(alg, hist, &supporters, s)
                                || self.disables(alg, hist, s)
                        })
                })
            }
        }
    }

    fn minus_holds(&mut self, alg: Algorithm, hist: &[(Algorithm, usize)], x: &EvalTarget) -> bool {
        match x {
            EvalTarget::Set(fs) => fs
                .iter()
                .any(|f| self.value(alg, hist, &EvalTarget::Formula(f.clone())) == -1),
            EvalTarget::Formula(f) => {
                let entailed = tt_entails(self.desc.axioms(), &[], f);
                if alg == Algorithm::Phi {
                    return !entailed;
                }
                if entailed {
                    return false;
                }
                let supporters = self.evidence(f, true);
                supporters.iter().all(|&r| {
                    let dead =
                        hist.contains(&(alg, r)) || self.antecedents(hist, alg, r) == -1;
                    dead || self.foes(alg, f, r).iter().any(|&s| {
                            self.no_team_defeats(alg, hist, &supporters, s)
                                && self.not_disabled(alg, hist, s)
                        })
                })
            }
        }
    }

    /// P(tag, hist + (tag, inst), antecedents of inst). The tag is the
    /// algorithm of the nested evaluation: the outer one for supporters and
    /// team defeaters, the co-algorithm for disabling checks.
    fn antecedents(
        &mut self,
        hist: &[(Algorithm, usize)],
        tag: Algorithm,
        inst: usize,
    ) -> i8 {
        let mut h = hist.to_vec();
        h.push((tag, inst));
        let ants = self.desc.instance(inst).rule.antecedents.clone();
        self.value(tag, &h, &EvalTarget::Set(ants))
    }

    fn team_defeats(
        &mut self,
        alg: Algorithm,
        hist: &[(Algorithm, usize)],
        supporters: &[usize],
        foe: usize,
    ) -> bool {
        supporters.iter().any(|&t| {
            self.pairs.contains(&(t, foe))
                && !hist.contains(&(alg, t))
                && self.antecedents(hist, alg, t) == 1
        })
    }

    fn no_team_defeats(
        &mut self,
        alg: Algorithm,
        hist: &[(Algorithm, usize)],
        supporters: &[usize],
        foe: usize,
    ) -> bool {
        supporters.iter().all(|&t| {
            !self.pairs.contains(&(t, foe))
                || hist.contains(&(alg, t))
                || self.antecedents(hist, alg, t) == -1
        })
    }

    fn disables(&mut self, alg: Algorithm, hist: &[(Algorithm, usize)], foe: usize) -> bool {
        let co = oracle_co(alg);
        !hist.contains(&(co, foe)) && self.antecedents(hist, co, foe) == -1
    }

    fn not_disabled(&mut self, alg: Algorithm, hist: &[(Algorithm, usize)], foe: usize) -> bool {
        let co = oracle_co(alg);
        hist.contains(&(co, foe)) || self.antecedents(hist, co, foe) == 1
    }

    /// Instances whose consequent, together with the axioms, consistently
    /// implies `f`; empty when the axioms already settle `f`.
    fn evidence(&self, f: &Formula, strict_or_defeasible_only: bool) -> Vec<usize> {
        let ax = self.desc.axioms();
        if tt_entails(ax, &[], f) {
            return Vec::new();
        }
        (0..self.desc.instances().len())
            .filter(|&i| {
                let rule = &self.desc.instance(i).rule;
                if strict_or_defeasible_only && rule.kind == RuleKind::Warning {
                    return false;
                }
                let c = std::slice::from_ref(&rule.consequent);
                tt_satisfiable(ax, c) && tt_entails(ax, c, f)
            })
            .collect()
    }

    fn foes(&self, alg: Algorithm, f: &Formula, supporter: usize) -> Vec<usize> {
        match alg {
            Algorithm::Phi | Algorithm::PiPrime => Vec::new(),
            Algorithm::PsiPrime => self
                .evidence(&f.negate(), false)
                .into_iter()
                .filter(|&s| self.pairs.contains(&(s, supporter)))
                .collect(),
            _ => self.evidence(&f.negate(), false),
        }
    }
}

// ---------------------------------------------------------------------------
// Query universes
// ---------------------------------------------------------------------------

/// Every ground literal over the atoms mentioned by the description.
pub fn literal_universe(desc: &PlausibleDescription) -> Vec<Formula> {
    let mut atoms = BTreeSet::new();
    for c in desc.axioms() {
        clause_atoms(c, &mut atoms);
    }
    for inst in desc.instances() {
        for a in &inst.rule.antecedents {
            formula_atoms(a, &mut atoms);
        }
        formula_atoms(&inst.rule.consequent, &mut atoms);
    }
    let mut out = Vec::new();
    for a in atoms {
        out.push(Formula::lit(Literal::pos(a.clone())));
        out.push(Formula::lit(Literal::neg(a)));
    }
    out
}

// ---------------------------------------------------------------------------
// Random descriptions
// ---------------------------------------------------------------------------

pub struct CorpusItem {
    pub seed: u64,
    pub text: String,
    pub desc: PlausibleDescription,
}

/// Yields `count` buildable random descriptions; seeds whose text fails to
/// build (unsatisfiable axioms, priority cycles) are skipped.
pub fn corpus(count: usize, base_seed: u64) -> Vec<CorpusItem> {
    let mut out = Vec::new();
    let mut seed = base_seed;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = random_description_text(&mut rng);
        if let Ok(file) = parse_description(&text) {
            if let Ok(desc) = file.build() {
                out.push(CorpusItem { seed, text, desc });
            }
        }
        seed += 1;
    }
    out
}

fn random_description_text(rng: &mut ChaCha8Rng) -> String {
    let unary = rng.gen_bool(0.5);
    let (atom_names, schema_names): (Vec<String>, Vec<String>) = if unary {
        let preds = ["p", "q", "r"];
        let consts = ["a", "b"];
        let np = rng.gen_range(1..=3);
        let nc = rng.gen_range(1..=2);
        let mut ground = Vec::new();
        for p in &preds[..np] {
            for c in &consts[..nc] {
                ground.push(format!("{p}({c})"));
            }
        }
        (ground, preds[..np].iter().map(|p| format!("{p}(X)")).collect())
    } else {
        let names = ["p", "q", "r", "s", "t", "w"];
        let n = rng.gen_range(2..=6);
        (
            names[..n].iter().map(|s| s.to_string()).collect(),
            Vec::new(),
        )
    };
    let ground_instances_per_schema = if unary { atom_names.len() / schema_names.len() } else { 1 };

    let mut text = String::new();
    if unary {
        text.push_str("const a");
        if atom_names.iter().any(|a| a.ends_with("(b)")) {
            text.push_str(", b");
        }
        text.push_str(".\n");
    }

    let lit = |rng: &mut ChaCha8Rng, pool: &[String]| {
        let a = &pool[rng.gen_range(0..pool.len())];
        if rng.gen_bool(0.5) {
            a.clone()
        } else {
            format!("~{a}")
        }
    };

    for _ in 0..rng.gen_range(0..=2) {
        let schema = unary && rng.gen_bool(0.3);
        let pool: &[String] = if schema { &schema_names } else { &atom_names };
        let width = rng.gen_range(1..=2.min(pool.len()));
        let mut lits = BTreeSet::new();
        while lits.len() < width {
            lits.insert(lit(rng, pool));
        }
        writeln!(
            text,
            "axiom {}.",
            lits.into_iter().collect::<Vec<_>>().join(" | ")
        )
        .unwrap();
    }

    let mut rule_names = Vec::new();
    let budget = rng.gen_range(1..=8usize);
    let mut spent = 0;
    while spent < budget {
        let schema = unary && rng.gen_bool(0.4);
        let cost = if schema { ground_instances_per_schema } else { 1 };
        if spent + cost > budget {
            break;
        }
        spent += cost;
        let pool: &[String] = if schema { &schema_names } else { &atom_names };
        let name = format!("r{}", rule_names.len() + 1);
        let keyword = if rng.gen_bool(0.8) { "def" } else { "wrn" };
        let arrow = if keyword == "def" { "=>" } else { "~>" };
        let n_ants = rng.gen_range(0..=2);
        let mut ants = BTreeSet::new();
        while ants.len() < n_ants {
            ants.insert(lit(rng, pool));
        }
        let ants: Vec<String> = ants.into_iter().collect();
        let consequent = lit(rng, pool);
        writeln!(
            text,
            "{keyword} {name}: {}{}{arrow} {consequent}.",
            ants.join(", "),
            if ants.is_empty() { "" } else { " " },
        )
        .unwrap();
        rule_names.push(name);
    }

    if rule_names.len() >= 2 && rng.gen_bool(0.5) {
        for _ in 0..rng.gen_range(1..=3) {
            let hi = rng.gen_range(0..rule_names.len());
            let lo = rng.gen_range(0..rule_names.len());
            if hi != lo {
                writeln!(text, "prefer {} > {}.", rule_names[hi], rule_names[lo]).unwrap();
            }
        }
    }
    text
}
