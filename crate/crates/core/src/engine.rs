//! Proof-value evaluation for the eight algorithms.
//!
//! A proof value is `+1` (proved) or `-1` (disproved); evaluation is total
//! over ground targets. The recursion follows four clauses:
//!
//! - a set of formulas is proved iff every member is;
//! - a formula entailed by the axioms is proved; under `phi` entailment is
//!   also necessary;
//! - otherwise a formula's value is the maximum over its strict and
//!   defeasible supporters of the supporter's value;
//! - a supporter's value is the minimum of its antecedent's value (with the
//!   supporter pushed onto the history, or `-1` when already there) and,
//!   over each foe, whether the foe is defeated: beaten by a superior
//!   supporter whose antecedent is proved, or disabled because the
//!   co-algorithm disproves the foe's antecedent.
//!
//! The history is a repeat-free sequence of (algorithm, instance) pairs;
//! values depend on it only through membership, which makes memoisation on
//! (algorithm, history set, formula) sound. History length is bounded by
//! twice the instance count, so evaluation always terminates.

pub mod rad;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use rad::{build_evaluation_rad, ArcClass, EvaluationRad, NodeKey, RadArc, RadNode};

use crate::description::{
    Algorithm, DescriptionError, InstId, PlausibleDescription, Scope,
};
use crate::syntax::Formula;

/// `+1` for proved, `-1` for disproved.
pub type ProofValue = i8;

/// The co-algorithm used when testing whether a foe is disabled. `phi` and
/// `beta` are their own duals; the remaining algorithms swap with their
/// primed forms.
pub fn co_algorithm(alg: Algorithm) -> Algorithm {
    match alg {
        Algorithm::Phi => Algorithm::Phi,
        Algorithm::Beta => Algorithm::Beta,
        Algorithm::Pi => Algorithm::PiPrime,
        Algorithm::PiPrime => Algorithm::Pi,
        Algorithm::Psi => Algorithm::PsiPrime,
        Algorithm::PsiPrime => Algorithm::Psi,
        Algorithm::Theta => Algorithm::ThetaPrime,
        Algorithm::ThetaPrime => Algorithm::Theta,
    }
}

/// One history entry: which algorithm pushed which rule instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HistoryEntry {
    pub alg: Algorithm,
    pub inst: InstId,
}

/// What gets evaluated: a single formula or a finite set of formulas (a
/// rule's antecedents).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EvalTarget {
    Formula(Formula),
    Set(BTreeSet<Formula>),
}

impl EvalTarget {
    pub fn is_ground(&self) -> bool {
        match self {
            EvalTarget::Formula(f) => f.is_ground(),
            EvalTarget::Set(fs) => fs.iter().all(|f| f.is_ground()),
        }
    }
}

impl From<Formula> for EvalTarget {
    fn from(f: Formula) -> Self {
        EvalTarget::Formula(f)
    }
}

impl fmt::Display for EvalTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalTarget::Formula(g) => write!(f, "{g}"),
            EvalTarget::Set(fs) => {
                let mut parts: Vec<String> = fs.iter().map(|g| g.to_string()).collect();
                parts.sort();
                write!(f, "{{{}}}", parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Description(#[from] DescriptionError),

    #[error("query is not ground: `{target}`")]
    NonGroundQuery { target: String },

    #[error(
        "history entry {index} is tagged `{found}`; only `{alg}` and its co-algorithm `{co}` may appear"
    )]
    ForeignHistoryTag {
        index: usize,
        found: Algorithm,
        alg: Algorithm,
        co: Algorithm,
    },

    #[error("history entry {index} repeats an earlier entry")]
    RepeatedHistoryEntry { index: usize },

    #[error("history entry {index} names rule instance {inst}, outside the description")]
    UnknownHistoryInstance { index: usize, inst: InstId },

    #[error("{op} precondition violated: {why}")]
    Precondition { op: &'static str, why: String },
}

/// A resumable evaluation context: the memo table survives across calls, so
/// one evaluator can serve many histories of the same top-level query (the
/// rad builder relies on this).
pub struct Evaluator<'d> {
    desc: &'d PlausibleDescription,
    root: Algorithm,
    memo: HashMap<(Algorithm, Box<[u64]>, u32), ProofValue>,
    formula_ids: HashMap<Formula, u32>,
    hist: Vec<HistoryEntry>,
    bits: Vec<u64>,
    max_hist_len: usize,
}

impl<'d> Evaluator<'d> {
    /// A fresh evaluator for queries under `root` (and its co-algorithm).
    pub fn new(desc: &'d PlausibleDescription, root: Algorithm) -> Self {
        let words = (2 * desc.instances().len()).div_ceil(64).max(1);
        Evaluator {
            desc,
            root,
            memo: HashMap::new(),
            formula_ids: HashMap::new(),
            hist: Vec::new(),
            bits: vec![0; words],
            max_hist_len: 0,
        }
    }

    pub fn description(&self) -> &'d PlausibleDescription {
        self.desc
    }

    /// The longest history reached so far; bounded by twice the number of
    /// rule instances.
    pub fn max_history_len(&self) -> usize {
        self.max_hist_len
    }

    /// Evaluates the proof value of `x` under `alg` starting from the given
    /// history. `alg` must be the evaluator's root algorithm or its
    /// co-algorithm.
    pub fn eval(
        &mut self,
        alg: Algorithm,
        history: &[HistoryEntry],
        x: &EvalTarget,
    ) -> Result<ProofValue, EngineError> {
        if !x.is_ground() {
            return Err(EngineError::NonGroundQuery {
                target: x.to_string(),
            });
        }
        self.check_alg(alg)?;
        self.load_history(history)?;
        let value = match x {
            EvalTarget::Formula(f) => self.p_formula(alg, f),
            EvalTarget::Set(fs) => self.p_set(alg, fs),
        };
        self.unload_history();
        value
    }

    /// The value min{x, n} of a supporter `r` of `f`: x from its antecedent
    /// under the extended history, n from defeating every foe.
    pub fn eval_for(
        &mut self,
        alg: Algorithm,
        history: &[HistoryEntry],
        f: &Formula,
        r: InstId,
    ) -> Result<ProofValue, EngineError> {
        self.check_alg(alg)?;
        self.check_supporter_preconditions("For", alg, f, r)?;
        self.load_history(history)?;
        let value = self.for_value(alg, f, r);
        self.unload_history();
        value
    }

    /// Whether the foe `s` of `f` is defeated while `r` supports `f`:
    /// beaten by a superior supporter or disabled by the co-algorithm.
    pub fn eval_dftd(
        &mut self,
        alg: Algorithm,
        history: &[HistoryEntry],
        f: &Formula,
        r: InstId,
        s: InstId,
    ) -> Result<ProofValue, EngineError> {
        self.check_alg(alg)?;
        self.check_supporter_preconditions("Dftd", alg, f, r)?;
        if s >= self.desc.instances().len() || !self.desc.foe(alg, f, r)?.contains(&s) {
            return Err(EngineError::Precondition {
                op: "Dftd",
                why: format!("instance {s} is not a foe of `{f}` against supporter {r}"),
            });
        }
        self.load_history(history)?;
        let value = self.dftd_value(alg, f, s);
        self.unload_history();
        value
    }

    fn check_alg(&self, alg: Algorithm) -> Result<(), EngineError> {
        if alg != self.root && alg != co_algorithm(self.root) {
            return Err(EngineError::Precondition {
                op: "eval",
                why: format!(
                    "algorithm `{alg}` is neither this evaluator's root `{}` nor its co-algorithm",
                    self.root
                ),
            });
        }
        Ok(())
    }

    fn check_supporter_preconditions(
        &self,
        op: &'static str,
        alg: Algorithm,
        f: &Formula,
        r: InstId,
    ) -> Result<(), EngineError> {
        if !f.is_ground() {
            return Err(EngineError::NonGroundQuery {
                target: f.to_string(),
            });
        }
        if alg == Algorithm::Phi {
            return Err(EngineError::Precondition {
                op,
                why: "phi proves by entailment alone and has no supporter rules".into(),
            });
        }
        if self.desc.ax_entails(f) {
            return Err(EngineError::Precondition {
                op,
                why: format!("axioms already entail `{f}`"),
            });
        }
        if r >= self.desc.instances().len()
            || !self
                .desc
                .supporters(f, Scope::StrictAndDefeasible)?
                .contains(&r)
        {
            return Err(EngineError::Precondition {
                op,
                why: format!("instance {r} does not support `{f}`"),
            });
        }
        Ok(())
    }

    fn entry_bit(&self, e: HistoryEntry) -> usize {
        2 * e.inst + usize::from(e.alg != self.root)
    }

    fn contains(&self, e: HistoryEntry) -> bool {
        let bit = self.entry_bit(e);
        self.bits[bit / 64] & (1 << (bit % 64)) != 0
    }

    fn push(&mut self, e: HistoryEntry) {
        debug_assert!(!self.contains(e));
        let bit = self.entry_bit(e);
        self.bits[bit / 64] |= 1 << (bit % 64);
        self.hist.push(e);
        assert!(
            self.hist.len() <= 2 * self.desc.instances().len(),
            "history exceeded the repeat-free bound"
        );
        self.max_hist_len = self.max_hist_len.max(self.hist.len());
    }

    fn pop(&mut self) {
        let e = self.hist.pop().expect("pop on empty history");
        let bit = self.entry_bit(e);
        self.bits[bit / 64] &= !(1 << (bit % 64));
    }

    fn load_history(&mut self, history: &[HistoryEntry]) -> Result<(), EngineError> {
        debug_assert!(self.hist.is_empty());
        let co = co_algorithm(self.root);
        for (index, &e) in history.iter().enumerate() {
            if e.alg != self.root && e.alg != co {
                self.unload_history();
                return Err(EngineError::ForeignHistoryTag {
                    index,
                    found: e.alg,
                    alg: self.root,
                    co,
                });
            }
            if e.inst >= self.desc.instances().len() {
                self.unload_history();
                return Err(EngineError::UnknownHistoryInstance {
                    index,
                    inst: e.inst,
                });
            }
            if self.contains(e) {
                self.unload_history();
                return Err(EngineError::RepeatedHistoryEntry { index });
            }
            self.push(e);
        }
        Ok(())
    }

    fn unload_history(&mut self) {
        while !self.hist.is_empty() {
            self.pop();
        }
    }

    fn formula_id(&mut self, f: &Formula) -> u32 {
        if let Some(&id) = self.formula_ids.get(f) {
            return id;
        }
        let id = self.formula_ids.len() as u32;
        self.formula_ids.insert(f.clone(), id);
        id
    }

    /// A set of formulas is proved iff every member is.
    fn p_set(&mut self, alg: Algorithm, fs: &BTreeSet<Formula>) -> Result<ProofValue, EngineError> {
        for f in fs {
            if self.p_formula(alg, f)? == -1 {
                return Ok(-1);
            }
        }
        Ok(1)
    }

    fn p_formula(&mut self, alg: Algorithm, f: &Formula) -> Result<ProofValue, EngineError> {
        if self.desc.ax_entails(f) {
            return Ok(1);
        }
        if alg == Algorithm::Phi {
            return Ok(-1);
        }
        let fid = self.formula_id(f);
        let key = (alg, self.bits.clone().into_boxed_slice(), fid);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let supporters = self.desc.supporters(f, Scope::StrictAndDefeasible)?;
        let mut value = -1;
        for r in supporters {
            if self.for_value(alg, f, r)? == 1 {
                value = 1;
                break;
            }
        }
        self.memo.insert(key, value);
        Ok(value)
    }

    fn for_value(
        &mut self,
        alg: Algorithm,
        f: &Formula,
        r: InstId,
    ) -> Result<ProofValue, EngineError> {
        let desc = self.desc;
        let entry = HistoryEntry { alg, inst: r };
        // Antecedent part: -1 outright when the supporter is already in the
        // history (an empty max), which forces the minimum to -1.
        if self.contains(entry) {
            return Ok(-1);
        }
        self.push(entry);
        let x = self.p_set(alg, &desc.instance(r).rule.antecedents);
        self.pop();
        if x? == -1 {
            return Ok(-1);
        }
        for s in desc.foe(alg, f, r)? {
            if self.dftd_value(alg, f, s)? == -1 {
                return Ok(-1);
            }
        }
        Ok(1)
    }

    fn dftd_value(
        &mut self,
        alg: Algorithm,
        f: &Formula,
        s: InstId,
    ) -> Result<ProofValue, EngineError> {
        let desc = self.desc;
        // Team defeat: some superior supporter of f, not yet in the
        // history, has a proved antecedent.
        for t in desc.superior_supporters(f, s)? {
            let entry = HistoryEntry { alg, inst: t };
            if self.contains(entry) {
                continue;
            }
            self.push(entry);
            let v = self.p_set(alg, &desc.instance(t).rule.antecedents);
            self.pop();
            if v? == 1 {
                return Ok(1);
            }
        }
        // Disabling: the co-algorithm disproves the foe's antecedent.
        let co = co_algorithm(alg);
        let entry = HistoryEntry { alg: co, inst: s };
        if !self.contains(entry) {
            self.push(entry);
            let v = self.p_set(co, &desc.instance(s).rule.antecedents);
            self.pop();
            if v? == -1 {
                return Ok(1);
            }
        }
        Ok(-1)
    }
}

/// Evaluates P(alg, history, x) on a fresh evaluator.
pub fn eval_p(
    desc: &PlausibleDescription,
    alg: Algorithm,
    history: &[HistoryEntry],
    x: &EvalTarget,
) -> Result<ProofValue, EngineError> {
    Evaluator::new(desc, alg).eval(alg, history, x)
}

/// Evaluates the supporter value For(alg, history, f, r) on a fresh
/// evaluator, checking the preconditions.
pub fn eval_for(
    desc: &PlausibleDescription,
    alg: Algorithm,
    history: &[HistoryEntry],
    f: &Formula,
    r: InstId,
) -> Result<ProofValue, EngineError> {
    Evaluator::new(desc, alg).eval_for(alg, history, f, r)
}

/// Evaluates the foe-defeat value Dftd(alg, history, f, r, s) on a fresh
/// evaluator, checking the preconditions.
pub fn eval_dftd(
    desc: &PlausibleDescription,
    alg: Algorithm,
    history: &[HistoryEntry],
    f: &Formula,
    r: InstId,
    s: InstId,
) -> Result<ProofValue, EngineError> {
    Evaluator::new(desc, alg).eval_dftd(alg, history, f, r, s)
}

/// The subset of `universe` proved under `alg` from the empty history. One
/// evaluator serves all queries; its memo table is sound to share because
/// values are functions of (algorithm, history set, formula) alone.
pub fn provable_set(
    desc: &PlausibleDescription,
    alg: Algorithm,
    universe: &[Formula],
) -> Result<BTreeSet<Formula>, EngineError> {
    let mut ev = Evaluator::new(desc, alg);
    let mut proved = BTreeSet::new();
    for f in universe {
        if ev.eval(alg, &[], &EvalTarget::Formula(f.clone()))? == 1 {
            proved.insert(f.clone());
        }
    }
    Ok(proved)
}
