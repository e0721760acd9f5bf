//! Knowledge-base model: concepts, roles, axioms, assertions, weighted KBs and
//! conjunctive queries.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::weight::Weight;

/// A role name, possibly inverted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Role {
    pub name: String,
    pub inverse: bool,
}

impl Role {
    pub fn new(name: impl Into<String>) -> Role {
        Role { name: name.into(), inverse: false }
    }

    pub fn inv(name: impl Into<String>) -> Role {
        Role { name: name.into(), inverse: true }
    }

    /// The inverse of this role (`r` becomes `r-` and vice versa).
    pub fn inverted(&self) -> Role {
        Role { name: self.name.clone(), inverse: !self.inverse }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}-", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

/// Concept expressions up to ALCHIO.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Top,
    Bottom,
    Name(String),
    Nominal(String),
    /// Unqualified existential restriction `∃r`.
    Exists(Role),
    /// Qualified existential restriction `∃r.C`.
    ExistsQ(Role, Box<Concept>),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
}

impl Concept {
    pub fn name(n: impl Into<String>) -> Concept {
        Concept::Name(n.into())
    }

    pub fn exists(r: Role) -> Concept {
        Concept::Exists(r)
    }

    pub fn exists_q(r: Role, c: Concept) -> Concept {
        Concept::ExistsQ(r, Box::new(c))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Concept {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Concept {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Concept {
        Concept::Or(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `⊤` for an empty list.
    pub fn and_all(cs: impl IntoIterator<Item = Concept>) -> Concept {
        cs.into_iter().reduce(Concept::and).unwrap_or(Concept::Top)
    }

    /// Left-nested disjunction; `⊥` for an empty list.
    pub fn or_all(cs: impl IntoIterator<Item = Concept>) -> Concept {
        cs.into_iter().reduce(Concept::or).unwrap_or(Concept::Bottom)
    }

    /// Basic DL-Lite concept: a concept name or an unqualified `∃r`.
    pub fn is_basic(&self) -> bool {
        matches!(self, Concept::Name(_) | Concept::Exists(_))
    }

    /// Visits every sub-concept together with its polarity (`true` when it
    /// occurs under an even number of negations).
    pub fn visit_polarity(&self, positive: bool, f: &mut dyn FnMut(&Concept, bool)) {
        f(self, positive);
        match self {
            Concept::ExistsQ(_, c) => c.visit_polarity(positive, f),
            Concept::Not(c) => c.visit_polarity(!positive, f),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.visit_polarity(positive, f);
                b.visit_polarity(positive, f);
            }
            _ => {}
        }
    }

    fn collect_signature(&self, sig: &mut Signature, inds: &mut BTreeSet<String>) {
        self.visit_polarity(true, &mut |c, _| match c {
            Concept::Name(n) => {
                sig.concepts.insert(n.clone());
            }
            Concept::Nominal(a) => {
                inds.insert(a.clone());
            }
            Concept::Exists(r) | Concept::ExistsQ(r, _) => {
                sig.roles.insert(r.name.clone());
            }
            _ => {}
        });
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => write!(f, "top"),
            Concept::Bottom => write!(f, "bot"),
            Concept::Name(n) => write!(f, "{n}"),
            Concept::Nominal(a) => write!(f, "{{{a}}}"),
            Concept::Exists(r) => write!(f, "exists {r}"),
            Concept::ExistsQ(r, c) => write!(f, "exists {r} . {c}"),
            Concept::Not(c) => write!(f, "not {c}"),
            Concept::And(a, b) => write!(f, "({a} and {b})"),
            Concept::Or(a, b) => write!(f, "({a} or {b})"),
        }
    }
}

/// A TBox axiom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    /// Concept inclusion `lhs ⊑ rhs`.
    Ci(Concept, Concept),
    /// Role inclusion `lhs ⊑ rhs`.
    Ri(Role, Role),
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Ci(l, r) => write!(f, "{l} [= {r}"),
            Axiom::Ri(l, r) => write!(f, "{l} [= {r}"),
        }
    }
}

/// An ABox assertion over concept and role names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assertion {
    Concept(String, String),
    Role(String, String, String),
}

impl Assertion {
    pub fn concept(c: impl Into<String>, a: impl Into<String>) -> Assertion {
        Assertion::Concept(c.into(), a.into())
    }

    pub fn role(r: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Assertion {
        Assertion::Role(r.into(), a.into(), b.into())
    }

    pub fn individuals(&self) -> Vec<&str> {
        match self {
            Assertion::Concept(_, a) => vec![a],
            Assertion::Role(_, a, b) => vec![a, b],
        }
    }

    pub fn predicate(&self) -> &str {
        match self {
            Assertion::Concept(c, _) => c,
            Assertion::Role(r, _, _) => r,
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::Concept(c, a) => write!(f, "{c}({a})"),
            Assertion::Role(r, a, b) => write!(f, "{r}({a},{b})"),
        }
    }
}

/// Concept and role names of some vocabulary.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn of_tbox(tbox: &[(Axiom, Weight)]) -> Signature {
        let mut sig = Signature::new();
        let mut inds = BTreeSet::new();
        for (ax, _) in tbox {
            match ax {
                Axiom::Ci(l, r) => {
                    l.collect_signature(&mut sig, &mut inds);
                    r.collect_signature(&mut sig, &mut inds);
                }
                Axiom::Ri(l, r) => {
                    sig.roles.insert(l.name.clone());
                    sig.roles.insert(r.name.clone());
                }
            }
        }
        sig
    }

    pub fn of_abox(abox: &[(Assertion, Weight)]) -> Signature {
        let mut sig = Signature::new();
        for (a, _) in abox {
            match a {
                Assertion::Concept(c, _) => sig.concepts.insert(c.clone()),
                Assertion::Role(r, _, _) => sig.roles.insert(r.clone()),
            };
        }
        sig
    }

    pub fn of_query(q: &Query) -> Signature {
        let mut sig = Signature::new();
        for atom in &q.atoms {
            match atom {
                QueryAtom::Concept(c, _) => sig.concepts.insert(c.clone()),
                QueryAtom::Role(r, _, _) => sig.roles.insert(r.clone()),
            };
        }
        sig
    }

    pub fn extend(&mut self, other: &Signature) {
        self.concepts.extend(other.concepts.iter().cloned());
        self.roles.extend(other.roles.iter().cloned());
    }

    pub fn union(&self, other: &Signature) -> Signature {
        let mut s = self.clone();
        s.extend(other);
        s
    }

    /// Whether every name of `self` also belongs to `other`.
    pub fn is_subset(&self, other: &Signature) -> bool {
        self.concepts.is_subset(&other.concepts) && self.roles.is_subset(&other.roles)
    }

    pub fn contains_name(&self, n: &str) -> bool {
        self.concepts.contains(n) || self.roles.contains(n)
    }

    /// Role names and their inverses, in the order `r, r-, s, s-, ...`.
    pub fn roles_pm(&self) -> Vec<Role> {
        self.roles
            .iter()
            .flat_map(|r| [Role::new(r.clone()), Role::inv(r.clone())])
            .collect()
    }
}

/// A weighted knowledge base: weighted TBox axioms and ABox assertions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightedKb {
    pub tbox: Vec<(Axiom, Weight)>,
    pub abox: Vec<(Assertion, Weight)>,
}

impl WeightedKb {
    pub fn new(tbox: Vec<(Axiom, Weight)>, abox: Vec<(Assertion, Weight)>) -> WeightedKb {
        WeightedKb { tbox, abox }
    }

    /// Individuals of the ABox together with those occurring in nominals.
    pub fn individuals(&self) -> BTreeSet<String> {
        let mut inds: BTreeSet<String> = self
            .abox
            .iter()
            .flat_map(|(a, _)| a.individuals().into_iter().map(String::from))
            .collect();
        inds.extend(self.nominals());
        inds
    }

    /// Individuals occurring in nominals of the TBox.
    pub fn nominals(&self) -> BTreeSet<String> {
        let mut sig = Signature::new();
        let mut inds = BTreeSet::new();
        for (ax, _) in &self.tbox {
            if let Axiom::Ci(l, r) = ax {
                l.collect_signature(&mut sig, &mut inds);
                r.collect_signature(&mut sig, &mut inds);
            }
        }
        inds
    }

    pub fn tbox_signature(&self) -> Signature {
        Signature::of_tbox(&self.tbox)
    }

    pub fn signature(&self) -> Signature {
        self.tbox_signature().union(&Signature::of_abox(&self.abox))
    }
}

/// A query term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Ind(String),
}

impl Term {
    pub fn var(v: impl Into<String>) -> Term {
        Term::Var(v.into())
    }

    pub fn ind(a: impl Into<String>) -> Term {
        Term::Ind(a.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(v) | Term::Ind(v) => v,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

/// A query atom over concept or role names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryAtom {
    Concept(String, Term),
    Role(String, Term, Term),
}

impl QueryAtom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            QueryAtom::Concept(_, t) => vec![t],
            QueryAtom::Role(_, s, t) => vec![s, t],
        }
    }

    pub fn predicate(&self) -> &str {
        match self {
            QueryAtom::Concept(c, _) | QueryAtom::Role(c, _, _) => c,
        }
    }
}

/// A conjunctive query `∃ȳ φ(x̄, ȳ)`. A Boolean query has no answer variables;
/// an instance query consists of a single atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Query {
    pub answer_vars: Vec<String>,
    pub exists_vars: Vec<String>,
    pub atoms: Vec<QueryAtom>,
}

impl Query {
    pub fn new(answer_vars: Vec<String>, exists_vars: Vec<String>, atoms: Vec<QueryAtom>) -> Query {
        Query { answer_vars, exists_vars, atoms }
    }

    /// Boolean query with the given existential variables.
    pub fn boolean(exists_vars: &[&str], atoms: Vec<QueryAtom>) -> Query {
        Query {
            answer_vars: vec![],
            exists_vars: exists_vars.iter().map(|s| s.to_string()).collect(),
            atoms,
        }
    }

    pub fn is_boolean(&self) -> bool {
        self.answer_vars.is_empty()
    }

    pub fn is_iq(&self) -> bool {
        self.atoms.len() == 1
    }

    /// Distinct terms in order of first occurrence.
    pub fn terms(&self) -> Vec<Term> {
        let mut seen = HashSet::new();
        let mut out = vec![];
        for atom in &self.atoms {
            for t in atom.terms() {
                if seen.insert(t.clone()) {
                    out.push(t.clone());
                }
            }
        }
        out
    }

    /// Number of distinct terms, used as the query size in bounds.
    pub fn size(&self) -> usize {
        self.terms().len()
    }

    pub fn individuals(&self) -> BTreeSet<String> {
        self.terms()
            .into_iter()
            .filter_map(|t| match t {
                Term::Ind(a) => Some(a),
                Term::Var(_) => None,
            })
            .collect()
    }

    pub fn variables(&self) -> Vec<String> {
        self.answer_vars.iter().chain(&self.exists_vars).cloned().collect()
    }

    pub fn signature(&self) -> Signature {
        Signature::of_query(self)
    }

    /// Undirected edges between distinct terms, with parallel edges merged.
    fn term_edges(&self) -> (Vec<Term>, BTreeSet<(usize, usize)>) {
        let terms = self.terms();
        let idx: BTreeMap<&Term, usize> = terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut edges = BTreeSet::new();
        for atom in &self.atoms {
            if let QueryAtom::Role(_, s, t) = atom {
                let (i, j) = (idx[s], idx[t]);
                if i != j {
                    edges.insert((i.min(j), i.max(j)));
                }
            }
        }
        (terms, edges)
    }

    /// Whether the term graph is a forest (parallel edges merged, self-loops
    /// ignored).
    pub fn is_acyclic(&self) -> bool {
        let (terms, edges) = self.term_edges();
        let mut parent: Vec<usize> = (0..terms.len()).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (i, j) in edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// Whether the term graph is connected.
    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Connected components of the term graph, as lists of term indices into
    /// [`Query::terms`].
    pub fn components(&self) -> Vec<Vec<usize>> {
        let (terms, edges) = self.term_edges();
        let n = terms.len();
        let mut adj = vec![vec![]; n];
        for (i, j) in edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; n];
        let mut comps = vec![];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(x) = stack.pop() {
                comp.push(x);
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Substitutes the answer variables by the given individuals, producing a
    /// Boolean query.
    pub fn ground(&self, tuple: &[String]) -> Query {
        let map: BTreeMap<&String, &String> = self.answer_vars.iter().zip(tuple).collect();
        let sub = |t: &Term| match t {
            Term::Var(v) => match map.get(v) {
                Some(a) => Term::Ind((*a).clone()),
                None => t.clone(),
            },
            Term::Ind(_) => t.clone(),
        };
        Query {
            answer_vars: vec![],
            exists_vars: self.exists_vars.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|a| match a {
                    QueryAtom::Concept(c, t) => QueryAtom::Concept(c.clone(), sub(t)),
                    QueryAtom::Role(r, s, t) => QueryAtom::Role(r.clone(), sub(s), sub(t)),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cq[{}]:", self.answer_vars.join(","))?;
        if !self.exists_vars.is_empty() {
            write!(f, " exists {} .", self.exists_vars.join(","))?;
        }
        let atoms: Vec<String> = self
            .atoms
            .iter()
            .map(|a| match a {
                QueryAtom::Concept(c, t) => format!("{c}({})", t.name()),
                QueryAtom::Role(r, s, t) => format!("{r}({},{})", s.name(), t.name()),
            })
            .collect();
        if !atoms.is_empty() {
            write!(f, " {}", atoms.join(", "))?;
        }
        Ok(())
    }
}

/// Description-logic dialects recognised by [`validate_kb`], from most to least
/// specific.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dialect {
    DlLiteCore,
    DlLiteCoreH,
    DlLiteBool,
    DlLiteBoolH,
    El,
    ElBot,
    Alchio,
    Invalid,
}

impl Dialect {
    pub fn is_dllite(self) -> bool {
        matches!(
            self,
            Dialect::DlLiteCore | Dialect::DlLiteCoreH | Dialect::DlLiteBool | Dialect::DlLiteBoolH
        )
    }

    pub fn is_el(self) -> bool {
        matches!(self, Dialect::El | Dialect::ElBot)
    }

    pub fn label(self) -> &'static str {
        match self {
            Dialect::DlLiteCore => "DL-Lite_core",
            Dialect::DlLiteCoreH => "DL-Lite_core^H",
            Dialect::DlLiteBool => "DL-Lite_bool",
            Dialect::DlLiteBoolH => "DL-Lite_bool^H",
            Dialect::El => "EL",
            Dialect::ElBot => "EL_bot",
            Dialect::Alchio => "ALCHIO",
            Dialect::Invalid => "invalid",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Result of [`validate_kb`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DialectReport {
    pub dialect: Dialect,
    /// Problems that make the KB invalid (zero weights, duplicates).
    pub issues: Vec<String>,
}

fn is_core_ci(l: &Concept, r: &Concept) -> bool {
    let rhs_ok = r.is_basic()
        || matches!(r, Concept::Bottom)
        || matches!(r, Concept::Not(b) if b.is_basic());
    match l {
        c if c.is_basic() => rhs_ok,
        Concept::And(a, b) => a.is_basic() && b.is_basic() && matches!(r, Concept::Bottom),
        _ => false,
    }
}

fn is_bool_concept(c: &Concept) -> bool {
    match c {
        Concept::Top | Concept::Bottom | Concept::Name(_) | Concept::Exists(_) => true,
        Concept::Not(a) => is_bool_concept(a),
        Concept::And(a, b) | Concept::Or(a, b) => is_bool_concept(a) && is_bool_concept(b),
        _ => false,
    }
}

fn is_el_concept(c: &Concept, allow_bottom: bool) -> bool {
    match c {
        Concept::Top | Concept::Name(_) => true,
        Concept::Bottom => allow_bottom,
        Concept::Exists(r) => !r.inverse,
        Concept::ExistsQ(r, d) => !r.inverse && is_el_concept(d, allow_bottom),
        Concept::And(a, b) => is_el_concept(a, allow_bottom) && is_el_concept(b, allow_bottom),
        _ => false,
    }
}

/// Classifies a KB into the most specific dialect and reports problems.
///
/// Disjointness `B ⊑ ¬B'` counts as DL-Lite_core.
pub fn validate_kb(kb: &WeightedKb) -> DialectReport {
    let mut issues = vec![];
    let mut seen_ax = HashSet::new();
    for (ax, w) in &kb.tbox {
        if w.is_zero() {
            issues.push(format!("axiom `{ax}` has weight 0"));
        }
        if !seen_ax.insert(ax) {
            issues.push(format!("duplicate axiom `{ax}`"));
        }
    }
    let mut seen_as = HashSet::new();
    for (a, w) in &kb.abox {
        if w.is_zero() {
            issues.push(format!("assertion `{a}` has weight 0"));
        }
        if !seen_as.insert(a) {
            issues.push(format!("duplicate assertion `{a}`"));
        }
    }
    if !issues.is_empty() {
        return DialectReport { dialect: Dialect::Invalid, issues };
    }
    DialectReport { dialect: tbox_dialect(&kb.tbox), issues }
}

/// Most specific dialect of a TBox (weights ignored).
pub fn tbox_dialect(tbox: &[(Axiom, Weight)]) -> Dialect {
    let has_ri = tbox.iter().any(|(a, _)| matches!(a, Axiom::Ri(..)));
    let cis = || {
        tbox.iter().filter_map(|(a, _)| match a {
            Axiom::Ci(l, r) => Some((l, r)),
            Axiom::Ri(..) => None,
        })
    };
    if cis().all(|(l, r)| is_core_ci(l, r)) {
        return if has_ri { Dialect::DlLiteCoreH } else { Dialect::DlLiteCore };
    }
    if cis().all(|(l, r)| is_bool_concept(l) && is_bool_concept(r)) {
        return if has_ri { Dialect::DlLiteBoolH } else { Dialect::DlLiteBool };
    }
    if !has_ri {
        if cis().all(|(l, r)| is_el_concept(l, false) && is_el_concept(r, false)) {
            return Dialect::El;
        }
        if cis().all(|(l, r)| is_el_concept(l, true) && is_el_concept(r, true)) {
            return Dialect::ElBot;
        }
    }
    Dialect::Alchio
}

/// Errors of KB-level operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum KbError {
    #[error("expected a Boolean instance query with exactly one atom")]
    NotAnIq,
    #[error("instance query `{0}` repeats a variable in a role atom")]
    SelfLoop(String),
}

/// Picks a name based on `base` that is not in `avoid`, and reserves it.
pub fn fresh_name(base: &str, avoid: &mut BTreeSet<String>) -> String {
    let mut name = base.to_string();
    let mut i = 0;
    while avoid.contains(&name) {
        name = format!("{base}{i}");
        i += 1;
    }
    avoid.insert(name.clone());
    name
}

/// Rewrites a Boolean IQ with a role atom and at least one variable into a
/// concept IQ, adding `∞`-weighted axioms that define a fresh concept as `∃r`
/// or `∃r⁻`. Concept atoms and ground role atoms are returned unchanged.
pub fn normalize_iq(
    tbox: &[(Axiom, Weight)],
    q: &Query,
) -> Result<(Vec<(Axiom, Weight)>, Query), KbError> {
    normalize_iq_avoiding(tbox, q, &BTreeSet::new())
}

/// [`normalize_iq`] with extra names the fresh concept must avoid.
pub fn normalize_iq_avoiding(
    tbox: &[(Axiom, Weight)],
    q: &Query,
    avoid: &BTreeSet<String>,
) -> Result<(Vec<(Axiom, Weight)>, Query), KbError> {
    if !q.is_iq() || !q.is_boolean() {
        return Err(KbError::NotAnIq);
    }
    let (role, out_term) = match &q.atoms[0] {
        QueryAtom::Concept(..) => return Ok((tbox.to_vec(), q.clone())),
        QueryAtom::Role(r, s, t) => match (s, t) {
            (Term::Ind(_), Term::Ind(_)) => return Ok((tbox.to_vec(), q.clone())),
            (Term::Ind(a), Term::Var(_)) => (Role::new(r.clone()), Term::Ind(a.clone())),
            (Term::Var(_), Term::Ind(a)) => (Role::inv(r.clone()), Term::Ind(a.clone())),
            (Term::Var(x), Term::Var(y)) => {
                if x == y {
                    return Err(KbError::SelfLoop(q.to_string()));
                }
                (Role::new(r.clone()), Term::Var(x.clone()))
            }
        },
    };
    let mut used = avoid.clone();
    let sig = Signature::of_tbox(tbox).union(&q.signature());
    used.extend(sig.concepts.iter().cloned());
    used.extend(sig.roles.iter().cloned());
    let base = if role.inverse { format!("Ex_{}_inv", role.name) } else { format!("Ex_{}", role.name) };
    let b = fresh_name(&base, &mut used);
    let mut out = tbox.to_vec();
    out.push((Axiom::Ci(Concept::Exists(role.clone()), Concept::name(b.clone())), Weight::Infinite));
    out.push((Axiom::Ci(Concept::name(b.clone()), Concept::Exists(role)), Weight::Infinite));
    let exists_vars = match &out_term {
        Term::Var(x) => vec![x.clone()],
        Term::Ind(_) => vec![],
    };
    let nq = Query {
        answer_vars: vec![],
        exists_vars,
        atoms: vec![QueryAtom::Concept(b, out_term)],
    };
    Ok((out, nq))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ci(l: Concept, r: Concept) -> (Axiom, Weight) {
        (Axiom::Ci(l, r), Weight::Infinite)
    }

    fn n(s: &str) -> Concept {
        Concept::name(s)
    }

    #[test]
    fn dialects_follow_specificity_order() {
        let kb = WeightedKb::new(
            vec![ci(n("A"), n("B"))],
            vec![(Assertion::concept("A", "a"), Weight::finite(1))],
        );
        assert_eq!(validate_kb(&kb).dialect, Dialect::DlLiteCore);

        let kb = WeightedKb::new(
            vec![ci(Concept::and(n("A"), Concept::not(n("B"))), Concept::Bottom)],
            vec![],
        );
        assert_eq!(validate_kb(&kb).dialect, Dialect::DlLiteBool);

        let kb = WeightedKb::new(
            vec![ci(n("A"), Concept::exists_q(Role::new("r"), n("B")))],
            vec![],
        );
        assert_eq!(validate_kb(&kb).dialect, Dialect::El);

        let kb = WeightedKb::new(
            vec![
                ci(n("A"), Concept::exists_q(Role::new("r"), n("B"))),
                ci(Concept::and(n("A"), n("B")), Concept::Bottom),
            ],
            vec![],
        );
        assert_eq!(validate_kb(&kb).dialect, Dialect::ElBot);

        let mut kb = WeightedKb::new(vec![ci(n("A"), Concept::not(n("B")))], vec![]);
        kb.tbox.push((Axiom::Ri(Role::new("r"), Role::new("s")), Weight::Infinite));
        assert_eq!(validate_kb(&kb).dialect, Dialect::DlLiteCoreH);

        let kb = WeightedKb::new(vec![ci(Concept::Nominal("a".into()), n("B"))], vec![]);
        assert_eq!(validate_kb(&kb).dialect, Dialect::Alchio);
    }

    #[test]
    fn zero_weights_and_duplicates_are_invalid() {
        let kb = WeightedKb::new(vec![(Axiom::Ci(n("A"), n("B")), Weight::finite(0))], vec![]);
        let rep = validate_kb(&kb);
        assert_eq!(rep.dialect, Dialect::Invalid);
        assert_eq!(rep.issues.len(), 1);

        let a = (Assertion::concept("A", "a"), Weight::finite(1));
        let kb = WeightedKb::new(vec![], vec![a.clone(), a]);
        assert_eq!(validate_kb(&kb).dialect, Dialect::Invalid);
    }

    #[test]
    fn normalize_role_iqs() {
        let q = Query::boolean(&["y"], vec![QueryAtom::Role("r".into(), Term::ind("a"), Term::var("y"))]);
        let (t, nq) = normalize_iq(&[], &q).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(nq.atoms, vec![QueryAtom::Concept("Ex_r".into(), Term::ind("a"))]);
        assert!(nq.exists_vars.is_empty());
        let (t2, nq2) = normalize_iq(&t, &nq).unwrap();
        assert_eq!((t2, nq2), (t.clone(), nq.clone()));

        let q = Query::boolean(&["y"], vec![QueryAtom::Role("r".into(), Term::var("y"), Term::ind("a"))]);
        let (t, _) = normalize_iq(&[], &q).unwrap();
        assert_eq!(t[0].0, Axiom::Ci(Concept::Exists(Role::inv("r")), n("Ex_r_inv")));

        let q = Query::boolean(&["x", "y"], vec![QueryAtom::Role("r".into(), Term::var("x"), Term::var("y"))]);
        let (_, nq) = normalize_iq(&[], &q).unwrap();
        assert_eq!(nq.exists_vars, vec!["x".to_string()]);

        let q = Query::boolean(&["x"], vec![QueryAtom::Role("r".into(), Term::var("x"), Term::var("x"))]);
        assert!(matches!(normalize_iq(&[], &q), Err(KbError::SelfLoop(_))));

        let q = Query::boolean(&[], vec![]);
        assert_eq!(normalize_iq(&[], &q), Err(KbError::NotAnIq));
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let tbox = vec![ci(n("Ex_r"), n("B"))];
        let q = Query::boolean(&["y"], vec![QueryAtom::Role("r".into(), Term::ind("a"), Term::var("y"))]);
        let (_, nq) = normalize_iq(&tbox, &q).unwrap();
        assert_eq!(nq.atoms[0].predicate(), "Ex_r0");
        let avoid: BTreeSet<String> = ["Ex_r0".to_string()].into();
        let (_, nq) = normalize_iq_avoiding(&tbox, &q, &avoid).unwrap();
        assert_eq!(nq.atoms[0].predicate(), "Ex_r1");
    }

    #[test]
    fn query_shape_flags() {
        let x = || Term::var("x");
        let y = || Term::var("y");
        let z = || Term::var("z");
        let path = Query::boolean(
            &["x", "y", "z"],
            vec![QueryAtom::Role("r".into(), x(), y()), QueryAtom::Role("s".into(), y(), z())],
        );
        assert!(path.is_acyclic() && path.is_connected());
        let tri = Query::boolean(
            &["x", "y", "z"],
            vec![
                QueryAtom::Role("r".into(), x(), y()),
                QueryAtom::Role("r".into(), y(), z()),
                QueryAtom::Role("r".into(), z(), x()),
            ],
        );
        assert!(!tri.is_acyclic());
        let two = Query::boolean(
            &["x", "y"],
            vec![QueryAtom::Concept("A".into(), x()), QueryAtom::Concept("B".into(), y())],
        );
        assert!(two.is_acyclic() && !two.is_connected());
        assert_eq!(two.size(), 2);
    }
}
