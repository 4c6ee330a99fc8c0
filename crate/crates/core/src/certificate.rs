//! Proof certificates: a serialisable form of an evaluation rad, plus an
//! independent validator.
//!
//! A certificate is self-contained: it names the description by digest, the
//! algorithm, the query, the verdict, and every node with its history
//! (algorithm tag, rule name, substitution), subject formulas in canonical
//! text, rule references and value. The validator re-derives everything
//! bottom-up from the description and the recursion's defining equations;
//! it never re-runs the engine's search, so it accepts exactly the
//! certificates whose structure proves their verdict:
//!
//! - where a value quantifies over all children (a proved set, a disproved
//!   formula, a proved supporter, an undefeated foe), the recorded children
//!   must be the complete child set recomputed from the description, every
//!   one bearing the forced value;
//! - where a value rests on a choice, exactly one justifying child must be
//!   recorded (or none, when a supporter is disproved because its rule is
//!   already in the history).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::description::{Algorithm, InstId, PlausibleDescription, Scope};
use crate::engine::rad::{ArcClass, EvaluationRad, NodeKey};
use crate::engine::{co_algorithm, EvalTarget, HistoryEntry, ProofValue};
use crate::lang;
use crate::syntax::{Formula, Substitution};

pub const FORMAT_VERSION: u32 = 1;

/// A query subject: one canonical formula string or a set of them.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(untagged)]
pub enum Subject {
    Formula(String),
    Set(Vec<String>),
}

/// A rule instance reference by name and substitution.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct RuleRefJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subst: BTreeMap<String, String>,
}

/// One history entry: which algorithm pushed which rule instance.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct HistoryEntryJson {
    pub alg: Algorithm,
    pub rule: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subst: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum NodeKindJson {
    Set,
    Formula,
    Supporter,
    Defeat,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ArcClassJson {
    Necessary,
    Optional,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proved,
    Disproved,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CertNode {
    pub id: usize,
    pub kind: NodeKindJson,
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<HistoryEntryJson>,
    pub subject: Subject,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleRefJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foe: Option<RuleRefJson>,
    pub value: i8,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertArc {
    pub from: usize,
    pub to: usize,
    pub class: ArcClassJson,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Certificate {
    pub format_version: u32,
    pub description_sha256: String,
    pub algorithm: Algorithm,
    pub subject: Subject,
    pub verdict: Verdict,
    pub root: usize,
    pub nodes: Vec<CertNode>,
    pub arcs: Vec<CertArc>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Certificate, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// GraphViz rendering: boxes labelled with kind, algorithm, subject and
    /// value; optional arcs are dashed.
    pub fn to_dot(&self) -> String {
        fn esc(s: &str) -> String {
            s.replace('\\', "\\\\").replace('"', "\\\"")
        }
        let mut out = String::from("digraph rad {\n  node [shape=box, fontname=\"monospace\"];\n");
        for n in &self.nodes {
            let kind = match n.kind {
                NodeKindJson::Set => "set",
                NodeKindJson::Formula => "formula",
                NodeKindJson::Supporter => "supporter",
                NodeKindJson::Defeat => "defeat",
            };
            let subject = match &n.subject {
                Subject::Formula(f) => f.clone(),
                Subject::Set(fs) => format!("{{{}}}", fs.join(", ")),
            };
            let mut label = format!("{kind} {} P={:+}\\n{}", n.algorithm, n.value, esc(&subject));
            if let Some(r) = &n.rule {
                label.push_str(&format!("\\nrule {}", esc(&r.name)));
            }
            if let Some(s) = &n.foe {
                label.push_str(&format!("\\nfoe {}", esc(&s.name)));
            }
            let color = if n.value == 1 { "darkgreen" } else { "firebrick" };
            out.push_str(&format!(
                "  n{} [label=\"{}\", color={}];\n",
                n.id, label, color
            ));
        }
        for a in &self.arcs {
            let style = match a.class {
                ArcClassJson::Necessary => "solid",
                ArcClassJson::Optional => "dashed",
            };
            out.push_str(&format!("  n{} -> n{} [style={}];\n", a.from, a.to, style));
        }
        out.push_str("}\n");
        out
    }
}

fn subst_map(s: &Substitution) -> BTreeMap<String, String> {
    s.iter()
        .map(|(v, c)| (v.to_string(), c.to_string()))
        .collect()
}

fn subst_of_map(m: &BTreeMap<String, String>) -> Substitution {
    let mut s = Substitution::new();
    for (v, c) in m {
        s.insert(v.clone(), c.clone());
    }
    s
}

fn subject_of_target(target: &EvalTarget) -> Subject {
    match target {
        EvalTarget::Formula(f) => Subject::Formula(f.to_string()),
        EvalTarget::Set(fs) => {
            let mut parts: Vec<String> = fs.iter().map(|f| f.to_string()).collect();
            parts.sort();
            Subject::Set(parts)
        }
    }
}

/// Serialises an evaluation rad into a self-contained certificate.
pub fn extract_certificate(desc: &PlausibleDescription, rad: &EvaluationRad) -> Certificate {
    let rule_ref = |i: InstId| -> RuleRefJson {
        let inst = desc.instance(i);
        RuleRefJson {
            name: inst.name.clone(),
            subst: subst_map(&inst.subst),
        }
    };
    let history = |h: &[HistoryEntry]| -> Vec<HistoryEntryJson> {
        h.iter()
            .map(|e| {
                let inst = desc.instance(e.inst);
                HistoryEntryJson {
                    alg: e.alg,
                    rule: inst.name.clone(),
                    subst: subst_map(&inst.subst),
                }
            })
            .collect()
    };
    let nodes = rad
        .nodes
        .iter()
        .enumerate()
        .map(|(id, n)| match &n.key {
            NodeKey::Set {
                alg,
                hist,
                formulas,
            } => CertNode {
                id,
                kind: NodeKindJson::Set,
                algorithm: *alg,
                history: history(hist),
                subject: subject_of_target(&EvalTarget::Set(formulas.clone())),
                rule: None,
                foe: None,
                value: n.value,
            },
            NodeKey::Formula { alg, hist, formula } => CertNode {
                id,
                kind: NodeKindJson::Formula,
                algorithm: *alg,
                history: history(hist),
                subject: Subject::Formula(formula.to_string()),
                rule: None,
                foe: None,
                value: n.value,
            },
            NodeKey::Supporter {
                alg,
                hist,
                formula,
                rule,
            } => CertNode {
                id,
                kind: NodeKindJson::Supporter,
                algorithm: *alg,
                history: history(hist),
                subject: Subject::Formula(formula.to_string()),
                rule: Some(rule_ref(*rule)),
                foe: None,
                value: n.value,
            },
            NodeKey::Defeat {
                alg,
                hist,
                formula,
                rule,
                foe,
            } => CertNode {
                id,
                kind: NodeKindJson::Defeat,
                algorithm: *alg,
                history: history(hist),
                subject: Subject::Formula(formula.to_string()),
                rule: Some(rule_ref(*rule)),
                foe: Some(rule_ref(*foe)),
                value: n.value,
            },
        })
        .collect();
    let arcs = rad
        .arcs
        .iter()
        .map(|a| CertArc {
            from: a.from,
            to: a.to,
            class: match a.class {
                ArcClass::Necessary => ArcClassJson::Necessary,
                ArcClass::Optional => ArcClassJson::Optional,
            },
        })
        .collect();
    Certificate {
        format_version: FORMAT_VERSION,
        description_sha256: desc.canonical_digest(),
        algorithm: rad.alg,
        subject: subject_of_target(&rad.target),
        verdict: if rad.verdict() == 1 {
            Verdict::Proved
        } else {
            Verdict::Disproved
        },
        root: rad.root(),
        nodes,
        arcs,
    }
}

#[derive(Debug, Error)]
#[error("invalid certificate: {0}")]
pub struct ValidationError(pub String);

/// Validates a certificate against a description: digest, shape (one root,
/// reachable, acyclic), resolvable references, and every node's value
/// re-derived from the description and its recorded children.
pub fn validate_certificate(
    desc: &PlausibleDescription,
    cert: &Certificate,
) -> Result<(), ValidationError> {
    Validator { desc, cert }.run()
}

/// A certificate node after parsing and reference resolution.
struct VNode {
    kind: NodeKindJson,
    alg: Algorithm,
    hist: Vec<HistoryEntry>,
    formula: Option<Formula>,
    formulas: Option<BTreeSet<Formula>>,
    rule: Option<InstId>,
    foe: Option<InstId>,
    value: ProofValue,
}

struct Validator<'a> {
    desc: &'a PlausibleDescription,
    cert: &'a Certificate,
}

impl<'a> Validator<'a> {
    fn fail(&self, msg: impl Into<String>) -> ValidationError {
        ValidationError(msg.into())
    }

    fn node_fail(&self, id: usize, msg: impl std::fmt::Display) -> ValidationError {
        ValidationError(format!("node {id}: {msg}"))
    }

    fn resolve_rule(&self, id: usize, r: &RuleRefJson) -> Result<InstId, ValidationError> {
        self.desc
            .resolve_instance(&r.name, &subst_of_map(&r.subst))
            .ok_or_else(|| {
                self.node_fail(id, format!("unresolvable rule reference `{}`", r.name))
            })
    }

    fn parse_formula(&self, id: usize, text: &str) -> Result<Formula, ValidationError> {
        let f = lang::parse_formula(text)
            .map_err(|e| self.node_fail(id, format!("unparseable formula `{text}`: {e}")))?;
        if !f.is_ground() {
            return Err(self.node_fail(id, format!("formula `{text}` is not ground")));
        }
        Ok(f)
    }

    fn supporters(&self, id: usize, f: &Formula) -> Result<Vec<InstId>, ValidationError> {
        self.desc
            .supporters(f, Scope::StrictAndDefeasible)
            .map_err(|e| self.node_fail(id, e))
    }

    fn parse_node(&self, n: &CertNode) -> Result<VNode, ValidationError> {
        let id = n.id;
        if n.value != 1 && n.value != -1 {
            return Err(self.node_fail(id, format!("value must be +1 or -1, got {}", n.value)));
        }
        let co = co_algorithm(self.cert.algorithm);
        if n.algorithm != self.cert.algorithm && n.algorithm != co {
            return Err(self.node_fail(
                id,
                format!(
                    "algorithm `{}` is neither `{}` nor its co-algorithm",
                    n.algorithm, self.cert.algorithm
                ),
            ));
        }
        let mut hist = Vec::with_capacity(n.history.len());
        let mut seen = HashSet::new();
        for (i, e) in n.history.iter().enumerate() {
            if e.alg != self.cert.algorithm && e.alg != co {
                return Err(self.node_fail(id, format!("history entry {i} has a foreign tag")));
            }
            let inst = self
                .desc
                .resolve_instance(&e.rule, &subst_of_map(&e.subst))
                .ok_or_else(|| {
                    self.node_fail(id, format!("history entry {i} names unknown rule `{}`", e.rule))
                })?;
            let entry = HistoryEntry { alg: e.alg, inst };
            if !seen.insert(entry) {
                return Err(self.node_fail(id, format!("history entry {i} repeats an entry")));
            }
            hist.push(entry);
        }
        let (formula, formulas) = match (&n.kind, &n.subject) {
            (NodeKindJson::Set, Subject::Set(parts)) => {
                let mut set = BTreeSet::new();
                for p in parts {
                    set.insert(self.parse_formula(id, p)?);
                }
                (None, Some(set))
            }
            (NodeKindJson::Set, Subject::Formula(_)) => {
                return Err(self.node_fail(id, "set node subject must be a list of formulas"))
            }
            (_, Subject::Formula(text)) => (Some(self.parse_formula(id, text)?), None),
            (_, Subject::Set(_)) => {
                return Err(self.node_fail(id, "only set nodes take a list subject"))
            }
        };
        let rule = match (&n.kind, &n.rule) {
            (NodeKindJson::Supporter | NodeKindJson::Defeat, Some(r)) => {
                Some(self.resolve_rule(id, r)?)
            }
            (NodeKindJson::Supporter | NodeKindJson::Defeat, None) => {
                return Err(self.node_fail(id, "supporter/defeat node needs a rule reference"))
            }
            (_, Some(_)) => {
                return Err(self.node_fail(id, "only supporter/defeat nodes take a rule"))
            }
            (_, None) => None,
        };
        let foe = match (&n.kind, &n.foe) {
            (NodeKindJson::Defeat, Some(s)) => Some(self.resolve_rule(id, s)?),
            (NodeKindJson::Defeat, None) => {
                return Err(self.node_fail(id, "defeat node needs a foe reference"))
            }
            (_, Some(_)) => return Err(self.node_fail(id, "only defeat nodes take a foe")),
            (_, None) => None,
        };
        Ok(VNode {
            kind: n.kind,
            alg: n.algorithm,
            hist,
            formula,
            formulas,
            rule,
            foe,
            value: n.value,
        })
    }

    fn run(&self) -> Result<(), ValidationError> {
        let cert = self.cert;
        if cert.format_version != FORMAT_VERSION {
            return Err(self.fail(format!(
                "unsupported format version {}",
                cert.format_version
            )));
        }
        if cert.description_sha256 != self.desc.canonical_digest() {
            return Err(self.fail("description digest does not match"));
        }
        if cert.nodes.is_empty() {
            return Err(self.fail("certificate has no nodes"));
        }
        for (i, n) in cert.nodes.iter().enumerate() {
            if n.id != i {
                return Err(self.fail(format!("node ids must be dense; node {i} has id {}", n.id)));
            }
        }
        if cert.root >= cert.nodes.len() {
            return Err(self.fail("root id out of range"));
        }

        let nodes: Vec<VNode> = cert
            .nodes
            .iter()
            .map(|n| self.parse_node(n))
            .collect::<Result<_, _>>()?;

        // Arc shape: in-range endpoints, no duplicates, root without
        // parents, everything reachable, no cycles.
        let mut children: Vec<Vec<(usize, ArcClassJson)>> = vec![Vec::new(); nodes.len()];
        let mut indegree = vec![0usize; nodes.len()];
        let mut seen_arcs = HashSet::new();
        for a in &cert.arcs {
            if a.from >= nodes.len() || a.to >= nodes.len() {
                return Err(self.fail(format!("arc {} -> {} out of range", a.from, a.to)));
            }
            if !seen_arcs.insert((a.from, a.to)) {
                return Err(self.fail(format!("duplicate arc {} -> {}", a.from, a.to)));
            }
            children[a.from].push((a.to, a.class));
            indegree[a.to] += 1;
        }
        if indegree[cert.root] != 0 {
            return Err(self.fail("root has a parent"));
        }
        let mut reached = vec![false; nodes.len()];
        let mut queue = VecDeque::from([cert.root]);
        reached[cert.root] = true;
        while let Some(id) = queue.pop_front() {
            for &(c, _) in &children[id] {
                if !reached[c] {
                    reached[c] = true;
                    queue.push_back(c);
                }
            }
        }
        if let Some(i) = reached.iter().position(|&r| !r) {
            return Err(self.fail(format!("node {i} is unreachable from the root")));
        }
        let mut remaining = indegree.clone();
        let mut topo = VecDeque::from([cert.root]);
        let mut consumed = 0;
        while let Some(id) = topo.pop_front() {
            consumed += 1;
            for &(c, _) in &children[id] {
                remaining[c] -= 1;
                if remaining[c] == 0 {
                    topo.push_back(c);
                }
            }
        }
        if consumed != nodes.len() {
            return Err(self.fail("arcs form a cycle"));
        }

        // Root consistency.
        let root = &nodes[cert.root];
        if !root.hist.is_empty() {
            return Err(self.fail("root history must be empty"));
        }
        if root.alg != cert.algorithm {
            return Err(self.fail("root algorithm differs from the certificate's"));
        }
        let root_subject_ok = match (&cert.subject, root.kind) {
            (Subject::Formula(text), NodeKindJson::Formula) => {
                self.parse_formula(cert.root, text)? == *root.formula.as_ref().unwrap()
            }
            (Subject::Set(parts), NodeKindJson::Set) => {
                let mut set = BTreeSet::new();
                for p in parts {
                    set.insert(self.parse_formula(cert.root, p)?);
                }
                set == *root.formulas.as_ref().unwrap()
            }
            _ => false,
        };
        if !root_subject_ok {
            return Err(self.fail("root subject differs from the certificate's query"));
        }
        let expected_verdict = if root.value == 1 {
            Verdict::Proved
        } else {
            Verdict::Disproved
        };
        if cert.verdict != expected_verdict {
            return Err(self.fail("verdict does not match the root value"));
        }

        for id in 0..nodes.len() {
            self.check_node(id, &nodes, &children[id])?;
        }
        Ok(())
    }

    /// Re-derives one node's value from the description and its recorded
    /// children.
    fn check_node(
        &self,
        id: usize,
        nodes: &[VNode],
        children: &[(usize, ArcClassJson)],
    ) -> Result<(), ValidationError> {
        let n = &nodes[id];
        match n.kind {
            NodeKindJson::Set => self.check_set(id, n, nodes, children),
            NodeKindJson::Formula => self.check_formula(id, n, nodes, children),
            NodeKindJson::Supporter => self.check_supporter(id, n, nodes, children),
            NodeKindJson::Defeat => self.check_defeat(id, n, nodes, children),
        }
    }

    fn expect_class(
        &self,
        id: usize,
        children: &[(usize, ArcClassJson)],
        class: ArcClassJson,
    ) -> Result<(), ValidationError> {
        if let Some((c, _)) = children.iter().find(|(_, cl)| *cl != class) {
            return Err(self.node_fail(
                id,
                format!("arc to node {c} must be {}", match class {
                    ArcClassJson::Necessary => "necessary",
                    ArcClassJson::Optional => "optional",
                }),
            ));
        }
        Ok(())
    }

    fn check_set(
        &self,
        id: usize,
        n: &VNode,
        nodes: &[VNode],
        children: &[(usize, ArcClassJson)],
    ) -> Result<(), ValidationError> {
        let members = n.formulas.as_ref().unwrap();
        let mut covered: BTreeSet<&Formula> = BTreeSet::new();
        for &(c, _) in children {
            let child = &nodes[c];
            if child.kind != NodeKindJson::Formula
                || child.alg != n.alg
                || child.hist != n.hist
            {
                return Err(self.node_fail(id, format!("node {c} is not a member evaluation")));
            }
            let cf = child.formula.as_ref().unwrap();
            if !members.contains(cf) {
                return Err(self.node_fail(id, format!("node {c} evaluates a non-member formula")));
            }
            if !covered.insert(cf) {
                return Err(self.node_fail(id, format!("member `{cf}` evaluated twice")));
            }
        }
        if n.value == 1 {
            self.expect_class(id, children, ArcClassJson::Necessary)?;
            if covered.len() != members.len() {
                return Err(self.node_fail(id, "a proved set must evaluate every member"));
            }
            if let Some(&(c, _)) = children.iter().find(|&&(c, _)| nodes[c].value != 1) {
                return Err(self.node_fail(id, format!("member node {c} is not proved")));
            }
        } else {
            self.expect_class(id, children, ArcClassJson::Optional)?;
            if children.len() != 1 {
                return Err(self.node_fail(id, "a disproved set keeps exactly one witness"));
            }
            if nodes[children[0].0].value != -1 {
                return Err(self.node_fail(id, "the witness member must be disproved"));
            }
        }
        Ok(())
    }

    fn check_formula(
        &self,
        id: usize,
        n: &VNode,
        nodes: &[VNode],
        children: &[(usize, ArcClassJson)],
    ) -> Result<(), ValidationError> {
        let f = n.formula.as_ref().unwrap();
        if self.desc.ax_entails(f) {
            if n.value != 1 || !children.is_empty() {
                return Err(self.node_fail(id, "axioms entail the formula: proved leaf required"));
            }
            return Ok(());
        }
        if n.alg == Algorithm::Phi {
            if n.value != -1 || !children.is_empty() {
                return Err(self.node_fail(
                    id,
                    "phi disproves anything the axioms do not entail: disproved leaf required",
                ));
            }
            return Ok(());
        }
        let sd = self.supporters(id, f)?;
        let mut covered: BTreeSet<InstId> = BTreeSet::new();
        for &(c, _) in children {
            let child = &nodes[c];
            if child.kind != NodeKindJson::Supporter
                || child.alg != n.alg
                || child.hist != n.hist
                || child.formula.as_ref() != Some(f)
            {
                return Err(self.node_fail(id, format!("node {c} is not a supporter of `{f}`")));
            }
            let r = child.rule.unwrap();
            if !sd.contains(&r) {
                return Err(self.node_fail(id, format!("rule of node {c} does not support `{f}`")));
            }
            if !covered.insert(r) {
                return Err(self.node_fail(id, format!("supporter {r} recorded twice")));
            }
        }
        if n.value == -1 {
            self.expect_class(id, children, ArcClassJson::Necessary)?;
            if covered.len() != sd.len() {
                return Err(self.node_fail(
                    id,
                    format!(
                        "a disproved formula must refute all {} supporters, found {}",
                        sd.len(),
                        covered.len()
                    ),
                ));
            }
            if let Some(&(c, _)) = children.iter().find(|&&(c, _)| nodes[c].value != -1) {
                return Err(self.node_fail(id, format!("supporter node {c} is not refuted")));
            }
        } else {
            self.expect_class(id, children, ArcClassJson::Optional)?;
            if children.len() != 1 || nodes[children[0].0].value != 1 {
                return Err(self.node_fail(
                    id,
                    "a proved formula keeps exactly one proved supporter",
                ));
            }
        }
        Ok(())
    }

    fn check_supporter(
        &self,
        id: usize,
        n: &VNode,
        nodes: &[VNode],
        children: &[(usize, ArcClassJson)],
    ) -> Result<(), ValidationError> {
        let f = n.formula.as_ref().unwrap();
        let r = n.rule.unwrap();
        if n.alg == Algorithm::Phi {
            return Err(self.node_fail(id, "phi has no supporter nodes"));
        }
        if self.desc.ax_entails(f) {
            return Err(self.node_fail(id, "axioms already entail the formula"));
        }
        if !self.supporters(id, f)?.contains(&r) {
            return Err(self.node_fail(id, format!("rule {r} does not support `{f}`")));
        }
        let entry = HistoryEntry {
            alg: n.alg,
            inst: r,
        };
        let in_history = n.hist.contains(&entry);
        let foes = self
            .desc
            .foe(n.alg, f, r)
            .map_err(|e| self.node_fail(id, e))?;

        // Classify children into the antecedent evaluation and per-foe
        // defeat nodes.
        let mut antecedent: Option<usize> = None;
        let mut defeat_of: HashMap<InstId, usize> = HashMap::new();
        let mut ext = n.hist.clone();
        ext.push(entry);
        let ants = &self.desc.instance(r).rule.antecedents;
        for &(c, _) in children {
            let child = &nodes[c];
            match child.kind {
                NodeKindJson::Set => {
                    if in_history
                        || child.alg != n.alg
                        || child.hist != ext
                        || child.formulas.as_ref() != Some(ants)
                        || antecedent.is_some()
                    {
                        return Err(self.node_fail(
                            id,
                            format!("node {c} is not this supporter's antecedent evaluation"),
                        ));
                    }
                    antecedent = Some(c);
                }
                NodeKindJson::Defeat => {
                    if child.alg != n.alg
                        || child.hist != n.hist
                        || child.formula.as_ref() != Some(f)
                        || child.rule != Some(r)
                    {
                        return Err(self.node_fail(id, format!("node {c} defends a different claim")));
                    }
                    let s = child.foe.unwrap();
                    if !foes.contains(&s) {
                        return Err(self.node_fail(id, format!("node {c} defeats a non-foe")));
                    }
                    if defeat_of.insert(s, c).is_some() {
                        return Err(self.node_fail(id, format!("foe {s} defeated twice")));
                    }
                }
                _ => {
                    return Err(self.node_fail(id, format!("node {c} cannot be a supporter child")))
                }
            }
        }

        if n.value == 1 {
            self.expect_class(id, children, ArcClassJson::Necessary)?;
            if in_history {
                return Err(self.node_fail(
                    id,
                    "a supporter already in the history cannot be proved",
                ));
            }
            let a = antecedent
                .ok_or_else(|| self.node_fail(id, "proved supporter lacks its antecedent"))?;
            if nodes[a].value != 1 {
                return Err(self.node_fail(id, "antecedent of a proved supporter must be proved"));
            }
            if defeat_of.len() != foes.len() {
                return Err(self.node_fail(
                    id,
                    format!(
                        "a proved supporter must defeat all {} foes, found {}",
                        foes.len(),
                        defeat_of.len()
                    ),
                ));
            }
            if let Some((&s, &c)) = defeat_of.iter().find(|(_, &c)| nodes[c].value != 1) {
                return Err(self.node_fail(id, format!("foe {s} (node {c}) is not defeated")));
            }
        } else if in_history {
            if !children.is_empty() {
                return Err(self.node_fail(
                    id,
                    "a supporter refuted by the history keeps no children",
                ));
            }
        } else {
            self.expect_class(id, children, ArcClassJson::Optional)?;
            if children.len() != 1 {
                return Err(self.node_fail(id, "a refuted supporter keeps exactly one witness"));
            }
            let c = children[0].0;
            let justified = match nodes[c].kind {
                NodeKindJson::Set => nodes[c].value == -1,
                NodeKindJson::Defeat => nodes[c].value == -1,
                _ => false,
            };
            if !justified {
                return Err(self.node_fail(
                    id,
                    "the witness must refute the antecedent or leave a foe undefeated",
                ));
            }
        }
        Ok(())
    }

    fn check_defeat(
        &self,
        id: usize,
        n: &VNode,
        nodes: &[VNode],
        children: &[(usize, ArcClassJson)],
    ) -> Result<(), ValidationError> {
        let f = n.formula.as_ref().unwrap();
        let r = n.rule.unwrap();
        let s = n.foe.unwrap();
        if !self.supporters(id, f)?.contains(&r) {
            return Err(self.node_fail(id, format!("rule {r} does not support `{f}`")));
        }
        let foes = self
            .desc
            .foe(n.alg, f, r)
            .map_err(|e| self.node_fail(id, e))?;
        if !foes.contains(&s) {
            return Err(self.node_fail(id, format!("instance {s} is not a foe here")));
        }
        let team: Vec<InstId> = self
            .desc
            .superior_supporters(f, s)
            .map_err(|e| self.node_fail(id, e))?
            .into_iter()
            .filter(|&t| {
                !n.hist.contains(&HistoryEntry {
                    alg: n.alg,
                    inst: t,
                })
            })
            .collect();
        let co = co_algorithm(n.alg);
        let dis_entry = HistoryEntry { alg: co, inst: s };
        let dis_possible = !n.hist.contains(&dis_entry);

        // Every child is a set node: a team member's antecedent under this
        // algorithm, or the foe's antecedent under the co-algorithm. The
        // history tail identifies which.
        let mut team_child: HashMap<InstId, usize> = HashMap::new();
        let mut disabling: Option<usize> = None;
        for &(c, _) in children {
            let child = &nodes[c];
            if child.kind != NodeKindJson::Set
                || child.hist.len() != n.hist.len() + 1
                || child.hist[..n.hist.len()] != n.hist[..]
            {
                return Err(self.node_fail(id, format!("node {c} is not a defeat sub-evaluation")));
            }
            let tail = *child.hist.last().unwrap();
            if tail == dis_entry && dis_possible {
                if child.alg != co
                    || child.formulas.as_ref() != Some(&self.desc.instance(s).rule.antecedents)
                    || disabling.is_some()
                {
                    return Err(self.node_fail(id, format!("node {c} is not the disabling check")));
                }
                disabling = Some(c);
            } else {
                if tail.alg != n.alg || !team.contains(&tail.inst) {
                    return Err(self.node_fail(
                        id,
                        format!("node {c} does not evaluate a fresh superior supporter"),
                    ));
                }
                let t = tail.inst;
                if child.alg != n.alg
                    || child.formulas.as_ref() != Some(&self.desc.instance(t).rule.antecedents)
                {
                    return Err(self.node_fail(id, format!("node {c} mismatches team member {t}")));
                }
                if team_child.insert(t, c).is_some() {
                    return Err(self.node_fail(id, format!("team member {t} evaluated twice")));
                }
            }
        }

        if n.value == -1 {
            self.expect_class(id, children, ArcClassJson::Necessary)?;
            if team_child.len() != team.len() {
                return Err(self.node_fail(
                    id,
                    format!(
                        "an undefeated foe must rebut all {} team members, found {}",
                        team.len(),
                        team_child.len()
                    ),
                ));
            }
            if let Some((&t, &c)) = team_child.iter().find(|(_, &c)| nodes[c].value != -1) {
                return Err(self.node_fail(
                    id,
                    format!("team member {t} (node {c}) must be refuted"),
                ));
            }
            if dis_possible {
                let d = disabling.ok_or_else(|| {
                    self.node_fail(id, "an undefeated foe must record the disabling check")
                })?;
                if nodes[d].value != 1 {
                    return Err(self.node_fail(
                        id,
                        "an undefeated foe's antecedent must survive the co-algorithm",
                    ));
                }
            }
        } else {
            self.expect_class(id, children, ArcClassJson::Optional)?;
            if children.len() != 1 {
                return Err(self.node_fail(id, "a defeated foe keeps exactly one witness"));
            }
            let c = children[0].0;
            let ok = if disabling == Some(c) {
                nodes[c].value == -1
            } else {
                nodes[c].value == 1
            };
            if !ok {
                return Err(self.node_fail(
                    id,
                    "the witness must prove a superior antecedent or disable the foe",
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subject_serialises_untagged() {
        let f = Subject::Formula("a | b".into());
        let s = Subject::Set(vec!["a".into(), "b".into()]);
        assert_eq!(serde_json::to_string(&f).unwrap(), "\"a | b\"");
        assert_eq!(serde_json::to_string(&s).unwrap(), "[\"a\",\"b\"]");
        let back: Subject = serde_json::from_str("[\"a\",\"b\"]").unwrap();
        assert_eq!(back, s);
    }
}
