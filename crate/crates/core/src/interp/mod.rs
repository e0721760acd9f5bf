//! Finite interpretations, concept evaluation, violations, cost, and
//! evaluation of conjunctive queries and first-order formulas.

mod cq;
pub mod fo;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::kb::{Assertion, Axiom, Concept, Role, Signature, WeightedKb};
use crate::weight::Cost;

pub use cq::{cq_holds, cq_match};
pub use fo::{fo_eval, Formula, FoTerm, Level};

/// Errors raised while evaluating against an interpretation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpError {
    #[error("individual `{0}` is not an element of the interpretation")]
    UnknownIndividual(String),
    #[error("formula has free variable v{0}")]
    FreeVariable(u32),
    #[error("predicate `{0}` is not declared in the interpretation")]
    UnknownPredicate(String),
    #[error("query is not Boolean")]
    NotBoolean,
}

/// A finite interpretation. Elements `0..n_named` are named individuals
/// (standard names); the rest are anonymous. Declared predicate keys form the
/// signature, so an empty extension differs from an unknown predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    elements: Vec<String>,
    n_named: usize,
    index: HashMap<String, usize>,
    concepts: BTreeMap<String, BTreeSet<usize>>,
    roles: BTreeMap<String, BTreeSet<(usize, usize)>>,
}

impl Interpretation {
    /// Interpretation over the given named individuals and `anonymous` extra
    /// elements, with no predicates declared.
    pub fn new(named: impl IntoIterator<Item = String>, anonymous: usize) -> Interpretation {
        let mut elements: Vec<String> = vec![];
        let mut index = HashMap::new();
        for n in named {
            if !index.contains_key(&n) {
                index.insert(n.clone(), elements.len());
                elements.push(n);
            }
        }
        let n_named = elements.len();
        for i in 0..anonymous {
            elements.push(format!("_:w{i}"));
        }
        Interpretation { elements, n_named, index, concepts: BTreeMap::new(), roles: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn n_named(&self) -> usize {
        self.n_named
    }

    pub fn n_anonymous(&self) -> usize {
        self.elements.len() - self.n_named
    }

    pub fn is_named(&self, e: usize) -> bool {
        e < self.n_named
    }

    pub fn element_name(&self, e: usize) -> &str {
        &self.elements[e]
    }

    pub fn named(&self) -> &[String] {
        &self.elements[..self.n_named]
    }

    /// Element denoting the named individual `a`.
    pub fn find(&self, a: &str) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn declare_concept(&mut self, name: &str) {
        self.concepts.entry(name.to_string()).or_default();
    }

    pub fn declare_role(&mut self, name: &str) {
        self.roles.entry(name.to_string()).or_default();
    }

    pub fn declare(&mut self, sig: &Signature) {
        for c in &sig.concepts {
            self.declare_concept(c);
        }
        for r in &sig.roles {
            self.declare_role(r);
        }
    }

    pub fn add_concept(&mut self, name: &str, e: usize) {
        assert!(e < self.len(), "element out of range");
        self.concepts.entry(name.to_string()).or_default().insert(e);
    }

    pub fn add_role(&mut self, name: &str, e: usize, f: usize) {
        assert!(e < self.len() && f < self.len(), "element out of range");
        self.roles.entry(name.to_string()).or_default().insert((e, f));
    }

    pub fn has_concept(&self, name: &str, e: usize) -> bool {
        self.concepts.get(name).is_some_and(|s| s.contains(&e))
    }

    pub fn has_role(&self, name: &str, e: usize, f: usize) -> bool {
        self.roles.get(name).is_some_and(|s| s.contains(&(e, f)))
    }

    /// Whether `(e, f)` is in the extension of the possibly inverted role.
    pub fn has_role_pm(&self, r: &Role, e: usize, f: usize) -> bool {
        if r.inverse {
            self.has_role(&r.name, f, e)
        } else {
            self.has_role(&r.name, e, f)
        }
    }

    pub fn concept_ext(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.concepts.get(name)
    }

    pub fn role_ext(&self, name: &str) -> Option<&BTreeSet<(usize, usize)>> {
        self.roles.get(name)
    }

    pub fn concept_names(&self) -> impl Iterator<Item = &String> {
        self.concepts.keys()
    }

    pub fn role_names(&self) -> impl Iterator<Item = &String> {
        self.roles.keys()
    }

    pub fn signature(&self) -> Signature {
        Signature {
            concepts: self.concepts.keys().cloned().collect(),
            roles: self.roles.keys().cloned().collect(),
        }
    }

    /// Pairs of the (possibly inverted) role extension.
    pub fn role_pairs(&self, r: &Role) -> Vec<(usize, usize)> {
        match self.roles.get(&r.name) {
            None => vec![],
            Some(s) if r.inverse => s.iter().map(|&(a, b)| (b, a)).collect(),
            Some(s) => s.iter().copied().collect(),
        }
    }

    /// Distinct `r`-successors of `e`.
    pub fn successors(&self, r: &Role, e: usize) -> BTreeSet<usize> {
        self.role_pairs(r).into_iter().filter(|&(a, _)| a == e).map(|(_, b)| b).collect()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domain: {}", self.elements.join(", "))?;
        for (c, ext) in &self.concepts {
            let xs: Vec<&str> = ext.iter().map(|&e| self.element_name(e)).collect();
            writeln!(f, "{c}: {{{}}}", xs.join(", "))?;
        }
        for (r, ext) in &self.roles {
            let xs: Vec<String> = ext
                .iter()
                .map(|&(a, b)| format!("({},{})", self.element_name(a), self.element_name(b)))
                .collect();
            writeln!(f, "{r}: {{{}}}", xs.join(", "))?;
        }
        Ok(())
    }
}

/// Membership of every element in the extension of `c`.
pub fn eval_concept(i: &Interpretation, c: &Concept) -> Vec<bool> {
    let n = i.len();
    match c {
        Concept::Top => vec![true; n],
        Concept::Bottom => vec![false; n],
        Concept::Name(a) => {
            let mut v = vec![false; n];
            if let Some(ext) = i.concept_ext(a) {
                for &e in ext {
                    v[e] = true;
                }
            }
            v
        }
        Concept::Nominal(a) => {
            let mut v = vec![false; n];
            if let Some(e) = i.find(a) {
                v[e] = true;
            }
            v
        }
        Concept::Exists(r) => {
            let mut v = vec![false; n];
            for (a, _) in i.role_pairs(r) {
                v[a] = true;
            }
            v
        }
        Concept::ExistsQ(r, d) => {
            let inner = eval_concept(i, d);
            let mut v = vec![false; n];
            for (a, b) in i.role_pairs(r) {
                if inner[b] {
                    v[a] = true;
                }
            }
            v
        }
        Concept::Not(d) => eval_concept(i, d).into_iter().map(|b| !b).collect(),
        Concept::And(a, b) => {
            let (x, y) = (eval_concept(i, a), eval_concept(i, b));
            x.into_iter().zip(y).map(|(p, q)| p && q).collect()
        }
        Concept::Or(a, b) => {
            let (x, y) = (eval_concept(i, a), eval_concept(i, b));
            x.into_iter().zip(y).map(|(p, q)| p || q).collect()
        }
    }
}

/// Violations of every TBox axiom and ABox assertion, keyed by position in
/// the KB. Only violated items appear.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ViolationReport {
    /// Elements violating each concept inclusion.
    pub concept_inclusions: BTreeMap<usize, BTreeSet<usize>>,
    /// Pairs violating each role inclusion.
    pub role_inclusions: BTreeMap<usize, BTreeSet<(usize, usize)>>,
    /// Positions of violated assertions.
    pub assertions: Vec<usize>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.concept_inclusions.is_empty() && self.role_inclusions.is_empty() && self.assertions.is_empty()
    }
}

/// Computes all violations of `kb` in `i`. Every ABox individual must be a
/// named element of `i`.
pub fn violations(kb: &WeightedKb, i: &Interpretation) -> Result<ViolationReport, InterpError> {
    let mut rep = ViolationReport::default();
    for (idx, (ax, _)) in kb.tbox.iter().enumerate() {
        match ax {
            Axiom::Ci(l, r) => {
                let (lv, rv) = (eval_concept(i, l), eval_concept(i, r));
                let bad: BTreeSet<usize> = (0..i.len()).filter(|&e| lv[e] && !rv[e]).collect();
                if !bad.is_empty() {
                    rep.concept_inclusions.insert(idx, bad);
                }
            }
            Axiom::Ri(l, r) => {
                let bad: BTreeSet<(usize, usize)> = i
                    .role_pairs(l)
                    .into_iter()
                    .filter(|&(a, b)| !i.has_role_pm(r, a, b))
                    .collect();
                if !bad.is_empty() {
                    rep.role_inclusions.insert(idx, bad);
                }
            }
        }
    }
    let el = |a: &str| i.find(a).ok_or_else(|| InterpError::UnknownIndividual(a.to_string()));
    for (idx, (asr, _)) in kb.abox.iter().enumerate() {
        let holds = match asr {
            Assertion::Concept(c, a) => i.has_concept(c, el(a)?),
            Assertion::Role(r, a, b) => i.has_role(r, el(a)?, el(b)?),
        };
        if !holds {
            rep.assertions.push(idx);
        }
    }
    Ok(rep)
}

/// Cost of `i` w.r.t. `kb`: the weighted count of violations.
pub fn cost(kb: &WeightedKb, i: &Interpretation) -> Result<Cost, InterpError> {
    let rep = violations(kb, i)?;
    let mut total = Cost::zero();
    for (idx, els) in &rep.concept_inclusions {
        total = total + Cost::scaled(&kb.tbox[*idx].1, els.len());
    }
    for (idx, pairs) in &rep.role_inclusions {
        total = total + Cost::scaled(&kb.tbox[*idx].1, pairs.len());
    }
    for idx in &rep.assertions {
        total = total + Cost::scaled(&kb.abox[*idx].1, 1);
    }
    Ok(total)
}

/// A 1-type over a signature: the concept names an element belongs to and the
/// roles `r ∈ N_R^±` with `∃r` holding at it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OneType {
    pub concepts: BTreeSet<String>,
    pub exists: BTreeSet<Role>,
}

impl OneType {
    pub fn has_concept(&self, a: &str) -> bool {
        self.concepts.contains(a)
    }

    pub fn has_exists(&self, r: &Role) -> bool {
        self.exists.contains(r)
    }

    /// Truth of a DL-Lite_bool concept in this type. Qualified restrictions
    /// and nominals evaluate to false.
    pub fn satisfies(&self, c: &Concept) -> bool {
        match c {
            Concept::Top => true,
            Concept::Bottom => false,
            Concept::Name(a) => self.concepts.contains(a),
            Concept::Exists(r) => self.exists.contains(r),
            Concept::Not(d) => !self.satisfies(d),
            Concept::And(a, b) => self.satisfies(a) && self.satisfies(b),
            Concept::Or(a, b) => self.satisfies(a) || self.satisfies(b),
            Concept::ExistsQ(..) | Concept::Nominal(_) => false,
        }
    }

    /// All 1-types over `sig`, in a fixed order.
    pub fn all(sig: &Signature) -> Vec<OneType> {
        let concepts: Vec<&String> = sig.concepts.iter().collect();
        let roles = sig.roles_pm();
        let bits = concepts.len() + roles.len();
        assert!(bits < 32, "signature too large to enumerate 1-types");
        (0u64..(1u64 << bits))
            .map(|mask| {
                let mut t = OneType::default();
                for (i, c) in concepts.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        t.concepts.insert((*c).clone());
                    }
                }
                for (j, r) in roles.iter().enumerate() {
                    if mask >> (concepts.len() + j) & 1 == 1 {
                        t.exists.insert(r.clone());
                    }
                }
                t
            })
            .collect()
    }
}

impl fmt::Display for OneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.concepts.iter().cloned().collect();
        parts.extend(self.exists.iter().map(|r| format!("exists {r}")));
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The 1-type of element `d` over `sig`.
pub fn one_type(i: &Interpretation, sig: &Signature, d: usize) -> OneType {
    let mut t = OneType::default();
    for c in &sig.concepts {
        if i.has_concept(c, d) {
            t.concepts.insert(c.clone());
        }
    }
    for r in sig.roles_pm() {
        if i.role_pairs(&r).iter().any(|&(a, _)| a == d) {
            t.exists.insert(r);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Weight;

    fn sample() -> (WeightedKb, Interpretation) {
        let kb = WeightedKb::new(
            vec![
                (Axiom::Ci(Concept::name("A"), Concept::exists(Role::new("r"))), Weight::finite(2)),
                (Axiom::Ri(Role::new("r"), Role::new("s")), Weight::finite(5)),
            ],
            vec![
                (Assertion::concept("A", "a"), Weight::finite(1)),
                (Assertion::concept("A", "b"), Weight::finite(1)),
                (Assertion::role("r", "a", "b"), Weight::Infinite),
            ],
        );
        let mut i = Interpretation::new(["a".to_string(), "b".to_string()], 0);
        i.add_concept("A", 0);
        i.add_concept("A", 1);
        i.add_role("r", 0, 1);
        (kb, i)
    }

    #[test]
    fn violations_and_cost() {
        let (kb, i) = sample();
        let rep = violations(&kb, &i).unwrap();
        assert_eq!(rep.concept_inclusions[&0], BTreeSet::from([1]));
        assert_eq!(rep.role_inclusions[&1], BTreeSet::from([(0, 1)]));
        assert!(rep.assertions.is_empty());
        assert_eq!(cost(&kb, &i).unwrap(), Cost::finite(7));
    }

    #[test]
    fn violated_infinite_assertion_costs_infinity() {
        let (kb, mut i) = sample();
        i.roles.clear();
        assert_eq!(cost(&kb, &i).unwrap(), Cost::Infinite);
    }

    #[test]
    fn missing_individual_is_an_error() {
        let (kb, _) = sample();
        let i = Interpretation::new(["a".to_string()], 1);
        assert_eq!(violations(&kb, &i), Err(InterpError::UnknownIndividual("b".into())));
    }

    #[test]
    fn one_types_read_inverse_roles() {
        let (_, i) = sample();
        let sig = Signature {
            concepts: ["A".to_string()].into(),
            roles: ["r".to_string()].into(),
        };
        let t = one_type(&i, &sig, 1);
        assert!(t.has_concept("A"));
        assert!(t.has_exists(&Role::inv("r")));
        assert!(!t.has_exists(&Role::new("r")));
        assert_eq!(OneType::all(&sig).len(), 8);
    }

    #[test]
    fn qualified_existentials_and_nominals() {
        let (_, i) = sample();
        let c = Concept::exists_q(Role::new("r"), Concept::Nominal("b".into()));
        assert_eq!(eval_concept(&i, &c), vec![true, false]);
        let c = Concept::exists_q(Role::inv("r"), Concept::not(Concept::name("A")));
        assert_eq!(eval_concept(&i, &c), vec![false, false]);
    }
}
