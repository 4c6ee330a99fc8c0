//! The four-valued truth function an algorithm induces on ground formulas:
//! a formula is true when it alone is provable, false when only its
//! negation is, ambiguous when both are, and unknown when neither is.

use std::fmt;

use crate::description::{Algorithm, PlausibleDescription};
use crate::engine::{EngineError, EvalTarget, Evaluator};
use crate::syntax::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TruthValue {
    True,
    False,
    Ambiguous,
    Unknown,
}

impl TruthValue {
    /// The single-letter form used by the command line: t, f, a or u.
    pub fn letter(self) -> char {
        match self {
            TruthValue::True => 't',
            TruthValue::False => 'f',
            TruthValue::Ambiguous => 'a',
            TruthValue::Unknown => 'u',
        }
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// V(alg, f): combines the proof values of `f` and `~f` from the empty
/// history.
pub fn truth_value(
    desc: &PlausibleDescription,
    alg: Algorithm,
    f: &Formula,
) -> Result<TruthValue, EngineError> {
    let mut ev = Evaluator::new(desc, alg);
    let pos = ev.eval(alg, &[], &EvalTarget::Formula(f.clone()))?;
    let neg = ev.eval(alg, &[], &EvalTarget::Formula(f.negate()))?;
    Ok(match (pos, neg) {
        (1, 1) => TruthValue::Ambiguous,
        (1, _) => TruthValue::True,
        (_, 1) => TruthValue::False,
        _ => TruthValue::Unknown,
    })
}
