//! Evaluation rads: rooted acyclic digraphs that record why a proof value
//! holds, ready for export as a checkable certificate.
//!
//! The full evaluation rad of a node has one child per sub-evaluation: a
//! set node has a child per member formula; a formula node has a child per
//! supporter; a supporter node has its antecedent (under the extended
//! history) and one defeat node per foe; a defeat node has one team child
//! per superior supporter not yet in the history plus the co-algorithm
//! disabling child. Children are classified against the parent's value:
//!
//! - when the parent's value is the one that quantifies over *all* children
//!   (a proved set, a disproved formula, a proved supporter, an undefeated
//!   foe) every child is necessary and all are kept;
//! - otherwise a child justifying the parent's value on its own is
//!   optional, and exactly one (the first in deterministic order) is kept;
//!   children that justify nothing are irrelevant and pruned.
//!
//! A supporter node that is disproved because its rule is already in the
//! history keeps no children: the history itself is the justification.

use std::collections::{HashMap, VecDeque};

use crate::description::{Algorithm, InstId, PlausibleDescription, Scope};
use crate::syntax::Formula;

use super::{co_algorithm, EngineError, EvalTarget, Evaluator, HistoryEntry, ProofValue};

/// Identity of a rad node. Two occurrences of the same evaluation share one
/// node, so the structure is a dag rather than a tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKey {
    /// P(alg, hist, F) for a set of formulas.
    Set {
        alg: Algorithm,
        hist: Vec<HistoryEntry>,
        formulas: std::collections::BTreeSet<Formula>,
    },
    /// P(alg, hist, f) for a single formula.
    Formula {
        alg: Algorithm,
        hist: Vec<HistoryEntry>,
        formula: Formula,
    },
    /// For(alg, hist, f, r): the supporter r arguing for f.
    Supporter {
        alg: Algorithm,
        hist: Vec<HistoryEntry>,
        formula: Formula,
        rule: InstId,
    },
    /// Dftd(alg, hist, f, r, s): whether the foe s is defeated.
    Defeat {
        alg: Algorithm,
        hist: Vec<HistoryEntry>,
        formula: Formula,
        rule: InstId,
        foe: InstId,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcClass {
    /// Required by the parent's value; all such children are kept.
    Necessary,
    /// One sufficient justification of the parent's value; exactly one is
    /// kept.
    Optional,
}

#[derive(Clone, Debug)]
pub struct RadNode {
    pub key: NodeKey,
    pub value: ProofValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RadArc {
    pub from: usize,
    pub to: usize,
    pub class: ArcClass,
}

/// A pruned evaluation rad. Node 0 is the root; arcs run from parent to
/// child in discovery order, which is deterministic.
#[derive(Clone, Debug)]
pub struct EvaluationRad {
    pub alg: Algorithm,
    pub target: EvalTarget,
    pub nodes: Vec<RadNode>,
    pub arcs: Vec<RadArc>,
}

impl EvaluationRad {
    pub fn root(&self) -> usize {
        0
    }

    pub fn verdict(&self) -> ProofValue {
        self.nodes[0].value
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &RadArc> {
        self.arcs.iter().filter(move |a| a.from == id)
    }
}

/// Builds the pruned evaluation rad for P(alg, (), x).
pub fn build_evaluation_rad(
    desc: &PlausibleDescription,
    alg: Algorithm,
    x: &EvalTarget,
) -> Result<EvaluationRad, EngineError> {
    if !x.is_ground() {
        return Err(EngineError::NonGroundQuery {
            target: x.to_string(),
        });
    }
    let mut b = Builder {
        desc,
        ev: Evaluator::new(desc, alg),
        nodes: Vec::new(),
        index: HashMap::new(),
        arcs: Vec::new(),
    };
    let root_key = match x {
        EvalTarget::Formula(f) => NodeKey::Formula {
            alg,
            hist: Vec::new(),
            formula: f.clone(),
        },
        EvalTarget::Set(fs) => NodeKey::Set {
            alg,
            hist: Vec::new(),
            formulas: fs.clone(),
        },
    };
    let (root, _) = b.intern(root_key)?;
    debug_assert_eq!(root, 0);
    let mut queue = VecDeque::from([root]);
    while let Some(id) = queue.pop_front() {
        for (child_key, class) in b.retained_children(id)? {
            let (child, fresh) = b.intern(child_key)?;
            b.arcs.push(RadArc {
                from: id,
                to: child,
                class,
            });
            if fresh {
                queue.push_back(child);
            }
        }
    }
    Ok(EvaluationRad {
        alg,
        target: x.clone(),
        nodes: b.nodes,
        arcs: b.arcs,
    })
}

struct Builder<'d> {
    desc: &'d PlausibleDescription,
    ev: Evaluator<'d>,
    nodes: Vec<RadNode>,
    index: HashMap<NodeKey, usize>,
    arcs: Vec<RadArc>,
}

impl<'d> Builder<'d> {
    fn node_value(&mut self, key: &NodeKey) -> Result<ProofValue, EngineError> {
        match key {
            NodeKey::Set { alg, hist, formulas } => {
                self.ev
                    .eval(*alg, hist, &EvalTarget::Set(formulas.clone()))
            }
            NodeKey::Formula { alg, hist, formula } => {
                self.ev
                    .eval(*alg, hist, &EvalTarget::Formula(formula.clone()))
            }
            NodeKey::Supporter {
                alg,
                hist,
                formula,
                rule,
            } => self.ev.eval_for(*alg, hist, formula, *rule),
            NodeKey::Defeat {
                alg,
                hist,
                formula,
                rule,
                foe,
            } => self.ev.eval_dftd(*alg, hist, formula, *rule, *foe),
        }
    }

    fn intern(&mut self, key: NodeKey) -> Result<(usize, bool), EngineError> {
        if let Some(&id) = self.index.get(&key) {
            return Ok((id, false));
        }
        let value = self.node_value(&key)?;
        let id = self.nodes.len();
        self.index.insert(key.clone(), id);
        self.nodes.push(RadNode { key, value });
        Ok((id, true))
    }

    /// The children kept after classification: all of them when every child
    /// is necessary, the first justifying child when the parent's value
    /// rests on a choice, and none when the history alone justifies it.
    fn retained_children(
        &mut self,
        id: usize,
    ) -> Result<Vec<(NodeKey, ArcClass)>, EngineError> {
        let node = self.nodes[id].clone();
        let value = node.value;
        match node.key {
            NodeKey::Set {
                alg,
                hist,
                formulas,
            } => {
                let keys = formulas.iter().map(|f| NodeKey::Formula {
                    alg,
                    hist: hist.clone(),
                    formula: f.clone(),
                });
                if value == 1 {
                    Ok(keys.map(|k| (k, ArcClass::Necessary)).collect())
                } else {
                    self.first_justifying(keys, -1)
                }
            }
            NodeKey::Formula { alg, hist, formula } => {
                if self.desc.ax_entails(&formula) || alg == Algorithm::Phi {
                    return Ok(Vec::new());
                }
                let keys: Vec<NodeKey> = self
                    .desc
                    .supporters(&formula, Scope::StrictAndDefeasible)?
                    .into_iter()
                    .map(|r| NodeKey::Supporter {
                        alg,
                        hist: hist.clone(),
                        formula: formula.clone(),
                        rule: r,
                    })
                    .collect();
                if value == -1 {
                    Ok(keys
                        .into_iter()
                        .map(|k| (k, ArcClass::Necessary))
                        .collect())
                } else {
                    self.first_justifying(keys.into_iter(), 1)
                }
            }
            NodeKey::Supporter {
                alg,
                hist,
                formula,
                rule,
            } => {
                let entry = HistoryEntry { alg, inst: rule };
                let in_history = hist.contains(&entry);
                if value == -1 && in_history {
                    return Ok(Vec::new());
                }
                let mut keys = Vec::new();
                if !in_history {
                    let mut ext = hist.clone();
                    ext.push(entry);
                    keys.push(NodeKey::Set {
                        alg,
                        hist: ext,
                        formulas: self.desc.instance(rule).rule.antecedents.clone(),
                    });
                }
                for s in self.desc.foe(alg, &formula, rule)? {
                    keys.push(NodeKey::Defeat {
                        alg,
                        hist: hist.clone(),
                        formula: formula.clone(),
                        rule,
                        foe: s,
                    });
                }
                if value == 1 {
                    Ok(keys
                        .into_iter()
                        .map(|k| (k, ArcClass::Necessary))
                        .collect())
                } else {
                    self.first_justifying(keys.into_iter(), -1)
                }
            }
            NodeKey::Defeat {
                alg,
                hist,
                formula,
                rule: _,
                foe,
            } => {
                // The defeat of a foe is settled by set nodes: one per
                // superior team member's antecedent and one for the foe's
                // own antecedent under the co-algorithm. A team child
                // justifies defeat by proving; the disabling child
                // justifies it by *disproving*, so classification compares
                // against each child's own justifying value.
                let mut team = Vec::new();
                for t in self.desc.superior_supporters(&formula, foe)? {
                    let entry = HistoryEntry { alg, inst: t };
                    if hist.contains(&entry) {
                        continue;
                    }
                    let mut ext = hist.clone();
                    ext.push(entry);
                    team.push(NodeKey::Set {
                        alg,
                        hist: ext,
                        formulas: self.desc.instance(t).rule.antecedents.clone(),
                    });
                }
                let co = co_algorithm(alg);
                let dis_entry = HistoryEntry { alg: co, inst: foe };
                let disabling = if hist.contains(&dis_entry) {
                    None
                } else {
                    let mut ext = hist.clone();
                    ext.push(dis_entry);
                    Some(NodeKey::Set {
                        alg: co,
                        hist: ext,
                        formulas: self.desc.instance(foe).rule.antecedents.clone(),
                    })
                };
                if value == -1 {
                    let mut out: Vec<(NodeKey, ArcClass)> = team
                        .into_iter()
                        .map(|k| (k, ArcClass::Necessary))
                        .collect();
                    if let Some(d) = disabling {
                        out.push((d, ArcClass::Necessary));
                    }
                    Ok(out)
                } else {
                    for k in team {
                        if self.node_value(&k)? == 1 {
                            return Ok(vec![(k, ArcClass::Optional)]);
                        }
                    }
                    let d = disabling
                        .expect("a defeated foe has a witness among its children");
                    debug_assert_eq!(self.node_value(&d)?, -1);
                    Ok(vec![(d, ArcClass::Optional)])
                }
            }
        }
    }

    fn first_justifying(
        &mut self,
        keys: impl Iterator<Item = NodeKey>,
        justifying: ProofValue,
    ) -> Result<Vec<(NodeKey, ArcClass)>, EngineError> {
        for k in keys {
            if self.node_value(&k)? == justifying {
                return Ok(vec![(k, ArcClass::Optional)]);
            }
        }
        unreachable!("a decided node has a justifying child or none at all")
    }
}
