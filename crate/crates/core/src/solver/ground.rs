//! Grounding of a weighted KB over a finite domain into clauses plus one
//! weighted at-most constraint over relaxation variables.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::sat::{Lit, Solver};
use super::SolverError;
use crate::interp::{Interpretation, OneType};
use crate::kb::{Assertion, Axiom, Concept, Query, QueryAtom, Role, Signature, Term, WeightedKb};
use crate::weight::Weight;

/// How anonymous elements are added to the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnonMode {
    None,
    /// Up to `n` unconstrained elements, used in index order.
    Free(usize),
    /// One optional witness per 1-type over `type_sig`, whose concept names
    /// and existential restrictions are fixed by the type. Predicates outside
    /// `type_sig` are free when `extras` is set and false otherwise.
    Typed { types: Vec<OneType>, type_sig: Signature, extras: bool },
}

/// Names whose atoms occur only negatively in the TBox. Atoms over them that
/// are neither asserted nor protected can be fixed to false without losing
/// optimal models.
#[derive(Clone, Debug, Default)]
pub struct Polarity {
    pub pos_concepts: BTreeSet<String>,
    pub pos_roles: BTreeSet<String>,
    /// Whether some `∃r` or `∃r.C` occurs positively.
    pub pos_exists: bool,
}

impl Polarity {
    pub fn of_tbox(tbox: &[(Axiom, Weight)]) -> Polarity {
        let mut p = Polarity::default();
        for (ax, _) in tbox {
            match ax {
                Axiom::Ci(l, r) => {
                    let mut visit = |c: &Concept, pos: bool| {
                        if !pos {
                            return;
                        }
                        match c {
                            Concept::Name(a) => {
                                p.pos_concepts.insert(a.clone());
                            }
                            Concept::Exists(r) | Concept::ExistsQ(r, _) => {
                                p.pos_roles.insert(r.name.clone());
                                p.pos_exists = true;
                            }
                            _ => {}
                        }
                    };
                    l.visit_polarity(false, &mut visit);
                    r.visit_polarity(true, &mut visit);
                }
                Axiom::Ri(_, r) => {
                    p.pos_roles.insert(r.name.clone());
                }
            }
        }
        p
    }
}

/// Grounding parameters.
#[derive(Clone, Debug)]
pub struct GroundSpec {
    /// Named elements beyond the KB individuals (e.g. query individuals).
    pub extra_named: Vec<String>,
    /// Predicates to ground.
    pub signature: Signature,
    pub anon: AnonMode,
    /// Enables fixing of negative-only atoms to false.
    pub fix_negative: bool,
    /// Predicates exempt from fixing (query predicates in possible mode).
    pub protected: Signature,
}

/// A grounded KB inside a SAT engine.
pub struct Grounding {
    pub sat: Solver,
    t: Lit,
    elements: Vec<String>,
    n_named: usize,
    presence: Vec<Lit>,
    typed: Vec<Option<OneType>>,
    type_sig: Signature,
    extras: bool,
    concept_ids: BTreeMap<String, usize>,
    role_ids: BTreeMap<String, usize>,
    concept_atoms: Vec<Vec<Lit>>,
    role_atoms: Vec<Vec<Lit>>,
    concept_cache: HashMap<(Concept, usize), Lit>,
    gate_cache: HashMap<(bool, Vec<Lit>), Lit>,
    /// Relaxation literals with their weights and the KB item they relax
    /// (`Ok(i)` for TBox axiom `i`, `Err(i)` for ABox assertion `i`).
    pub relax: Vec<(Lit, u128, Result<usize, usize>)>,
}

fn finite_weight(w: &Weight) -> Result<Option<u128>, SolverError> {
    match w {
        Weight::Infinite => Ok(None),
        Weight::Finite(_) => w.to_u128().map(Some).ok_or(SolverError::WeightTooLarge),
    }
}

impl Grounding {
    /// Grounds `kb` according to `spec`.
    pub fn build(kb: &WeightedKb, spec: &GroundSpec) -> Result<Grounding, SolverError> {
        let mut named: BTreeSet<String> = kb.individuals();
        named.extend(spec.extra_named.iter().cloned());
        let mut elements: Vec<String> = named.into_iter().collect();
        let n_named = elements.len();
        let mut sat = Solver::new();
        let t = sat.new_var();
        sat.add_clause(&[t]);
        let mut presence = vec![t; n_named];
        let mut typed: Vec<Option<OneType>> = vec![None; n_named];
        let (type_sig, extras) = match &spec.anon {
            AnonMode::None => (Signature::new(), true),
            AnonMode::Free(n) => {
                for i in 0..*n {
                    elements.push(format!("_:w{i}"));
                    let p = sat.new_var();
                    if i > 0 {
                        let prev = *presence.last().unwrap();
                        sat.add_clause(&[!p, prev]);
                    }
                    presence.push(p);
                    typed.push(None);
                }
                (Signature::new(), true)
            }
            AnonMode::Typed { types, type_sig, extras } => {
                for (i, ty) in types.iter().enumerate() {
                    elements.push(format!("_:w{i}"));
                    presence.push(sat.new_var());
                    typed.push(Some(ty.clone()));
                }
                (type_sig.clone(), *extras)
            }
        };
        let mut g = Grounding {
            sat,
            t,
            elements,
            n_named,
            presence,
            typed,
            type_sig,
            extras,
            concept_ids: BTreeMap::new(),
            role_ids: BTreeMap::new(),
            concept_atoms: vec![],
            role_atoms: vec![],
            concept_cache: HashMap::new(),
            gate_cache: HashMap::new(),
            relax: vec![],
        };
        g.allocate_atoms(kb, spec);
        g.witness_constraints();
        if n_named == 0 && !g.elements.is_empty() {
            let ps = g.presence.clone();
            g.sat.add_clause(&ps);
        }
        g.encode_kb(kb)?;
        Ok(g)
    }

    fn allocate_atoms(&mut self, kb: &WeightedKb, spec: &GroundSpec) {
        let pol = if spec.fix_negative { Some(Polarity::of_tbox(&kb.tbox)) } else { None };
        let mut asserted_c: BTreeSet<(&str, &str)> = BTreeSet::new();
        let mut asserted_r: BTreeSet<(&str, &str, &str)> = BTreeSet::new();
        for (a, _) in &kb.abox {
            match a {
                Assertion::Concept(c, x) => {
                    asserted_c.insert((c, x));
                }
                Assertion::Role(r, x, y) => {
                    asserted_r.insert((r, x, y));
                }
            }
        }
        let n = self.elements.len();
        let f = !self.t;
        for c in &spec.signature.concepts {
            let fixable = pol.as_ref().is_some_and(|p| !p.pos_concepts.contains(c)) && !spec.protected.concepts.contains(c);
            let mut row = Vec::with_capacity(n);
            for e in 0..n {
                let lit = if fixable && !(e < self.n_named && asserted_c.contains(&(c.as_str(), self.elements[e].as_str()))) {
                    f
                } else {
                    match &self.typed[e] {
                        Some(ty) if self.type_sig.concepts.contains(c) => {
                            if ty.has_concept(c) {
                                self.presence[e]
                            } else {
                                f
                            }
                        }
                        Some(_) if !self.extras => f,
                        _ => self.atom_var(e, None),
                    }
                };
                row.push(lit);
            }
            self.concept_ids.insert(c.clone(), self.concept_atoms.len());
            self.concept_atoms.push(row);
        }
        for r in &spec.signature.roles {
            let fixable = pol.as_ref().is_some_and(|p| !p.pos_roles.contains(r)) && !spec.protected.roles.contains(r);
            let in_types = self.type_sig.roles.contains(r);
            let mut m = Vec::with_capacity(n * n);
            for e in 0..n {
                for g in 0..n {
                    let asserted = e < self.n_named
                        && g < self.n_named
                        && asserted_r.contains(&(r.as_str(), self.elements[e].as_str(), self.elements[g].as_str()));
                    let blocked = |ty: &Option<OneType>, role: Role| match ty {
                        Some(t) if in_types => !t.has_exists(&role),
                        Some(_) => !self.extras,
                        None => false,
                    };
                    let lit = if (fixable && !asserted)
                        || blocked(&self.typed[e], Role::new(r.clone()))
                        || blocked(&self.typed[g], Role::inv(r.clone()))
                    {
                        f
                    } else {
                        self.atom_var(e, Some(g))
                    };
                    m.push(lit);
                }
            }
            self.role_ids.insert(r.clone(), self.role_atoms.len());
            self.role_atoms.push(m);
        }
    }

    fn atom_var(&mut self, e: usize, g: Option<usize>) -> Lit {
        let v = self.sat.new_var();
        for x in std::iter::once(e).chain(g) {
            if x >= self.n_named {
                let p = self.presence[x];
                self.sat.add_clause(&[!v, p]);
            }
        }
        v
    }

    fn witness_constraints(&mut self) {
        let roles = self.type_sig.roles_pm();
        for w in self.n_named..self.elements.len() {
            let Some(ty) = self.typed[w].clone() else { continue };
            for r in &roles {
                if ty.has_exists(r) {
                    let mut cl = vec![!self.presence[w]];
                    for f in 0..self.elements.len() {
                        cl.push(self.role_lit(r, w, f));
                    }
                    self.sat.add_clause(&cl);
                }
            }
        }
    }

    fn add_relaxed(&mut self, mut clause: Vec<Lit>, w: &Weight, item: Result<usize, usize>) -> Result<(), SolverError> {
        if clause.contains(&self.t) {
            return Ok(());
        }
        clause.retain(|&l| l != !self.t);
        match finite_weight(w)? {
            None => {
                self.sat.add_clause(&clause);
            }
            Some(wt) => {
                let v = self.sat.new_var();
                clause.push(v);
                self.sat.add_clause(&clause);
                self.sat.add_pb_term(v, wt);
                self.relax.push((v, wt, item));
            }
        }
        Ok(())
    }

    fn encode_kb(&mut self, kb: &WeightedKb) -> Result<(), SolverError> {
        let mut total: u128 = 0;
        for w in kb.tbox.iter().map(|x| &x.1).chain(kb.abox.iter().map(|x| &x.1)) {
            if let Some(x) = finite_weight(w)? {
                let scale = (self.elements.len() as u128).pow(2).max(1);
                total = x.checked_mul(scale).and_then(|y| total.checked_add(y)).ok_or(SolverError::WeightTooLarge)?;
            }
        }
        let n = self.elements.len();
        for (idx, (ax, w)) in kb.tbox.iter().enumerate() {
            match ax {
                Axiom::Ci(l, r) => {
                    for e in 0..n {
                        let cl = self.concept_lit(l, e);
                        if cl == !self.t {
                            continue;
                        }
                        let cr = self.concept_lit(r, e);
                        let p = self.presence[e];
                        self.add_relaxed(vec![!p, !cl, cr], w, Ok(idx))?;
                    }
                }
                Axiom::Ri(l, r) => {
                    for e in 0..n {
                        for f in 0..n {
                            let a = self.role_lit(l, e, f);
                            if a == !self.t {
                                continue;
                            }
                            let b = self.role_lit(r, e, f);
                            self.add_relaxed(vec![!a, b], w, Ok(idx))?;
                        }
                    }
                }
            }
        }
        for (idx, (a, w)) in kb.abox.iter().enumerate() {
            let lit = match a {
                Assertion::Concept(c, x) => {
                    let e = self.element(x).expect("ABox individual is named");
                    self.concept_atom(c, e)
                }
                Assertion::Role(r, x, y) => {
                    let (e, f) = (self.element(x).unwrap(), self.element(y).unwrap());
                    self.role_lit(&Role::new(r.clone()), e, f)
                }
            };
            self.add_relaxed(vec![lit], w, Err(idx))?;
        }
        Ok(())
    }

    pub fn true_lit(&self) -> Lit {
        self.t
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_named(&self) -> usize {
        self.n_named
    }

    pub fn presence(&self, e: usize) -> Lit {
        self.presence[e]
    }

    /// Element of the named individual `a`.
    pub fn element(&self, a: &str) -> Option<usize> {
        self.elements[..self.n_named].iter().position(|x| x == a)
    }

    /// Literal of the concept atom `A(e)`; false for unknown names.
    pub fn concept_atom(&self, c: &str, e: usize) -> Lit {
        match self.concept_ids.get(c) {
            Some(&i) => self.concept_atoms[i][e],
            None => !self.t,
        }
    }

    /// Literal of `r(e, f)` for a possibly inverted role.
    pub fn role_lit(&self, r: &Role, e: usize, f: usize) -> Lit {
        let (a, b) = if r.inverse { (f, e) } else { (e, f) };
        match self.role_ids.get(&r.name) {
            Some(&i) => self.role_atoms[i][a * self.elements.len() + b],
            None => !self.t,
        }
    }

    fn gate(&mut self, is_and: bool, lits: Vec<Lit>) -> Lit {
        let (unit, zero) = if is_and { (self.t, !self.t) } else { (!self.t, self.t) };
        let mut ls: Vec<Lit> = vec![];
        for l in lits {
            if l == zero {
                return zero;
            }
            if l != unit {
                ls.push(l);
            }
        }
        ls.sort_unstable();
        ls.dedup();
        if ls.windows(2).any(|w| w[1] == !w[0]) {
            return zero;
        }
        match ls.len() {
            0 => return unit,
            1 => return ls[0],
            _ => {}
        }
        if let Some(&x) = self.gate_cache.get(&(is_and, ls.clone())) {
            return x;
        }
        let x = self.sat.new_var();
        if is_and {
            for &l in &ls {
                self.sat.add_clause(&[!x, l]);
            }
            let mut cl: Vec<Lit> = ls.iter().map(|&l| !l).collect();
            cl.push(x);
            self.sat.add_clause(&cl);
        } else {
            for &l in &ls {
                self.sat.add_clause(&[x, !l]);
            }
            let mut cl = ls.clone();
            cl.push(!x);
            self.sat.add_clause(&cl);
        }
        self.gate_cache.insert((is_and, ls), x);
        x
    }

    /// Literal equivalent to the conjunction of `lits`.
    pub fn and(&mut self, lits: Vec<Lit>) -> Lit {
        self.gate(true, lits)
    }

    /// Literal equivalent to the disjunction of `lits`.
    pub fn or(&mut self, lits: Vec<Lit>) -> Lit {
        self.gate(false, lits)
    }

    fn exists_lit(&mut self, r: &Role, e: usize) -> Lit {
        if let Some(ty) = &self.typed[e] {
            if self.type_sig.roles.contains(&r.name) {
                return if ty.has_exists(r) { self.presence[e] } else { !self.t };
            }
        }
        let lits: Vec<Lit> = (0..self.elements.len()).map(|f| self.role_lit(r, e, f)).collect();
        self.or(lits)
    }

    /// Literal equivalent to `e ∈ C`.
    pub fn concept_lit(&mut self, c: &Concept, e: usize) -> Lit {
        match c {
            Concept::Top => return self.t,
            Concept::Bottom => return !self.t,
            Concept::Name(a) => return self.concept_atom(a, e),
            Concept::Nominal(a) => {
                return if e < self.n_named && self.elements[e] == *a { self.t } else { !self.t };
            }
            Concept::Not(d) => return !self.concept_lit(d, e),
            _ => {}
        }
        if let Some(&l) = self.concept_cache.get(&(c.clone(), e)) {
            return l;
        }
        let l = match c {
            Concept::Exists(r) => self.exists_lit(r, e),
            Concept::ExistsQ(r, d) => {
                let mut alts = vec![];
                for f in 0..self.elements.len() {
                    let edge = self.role_lit(r, e, f);
                    if edge == !self.t {
                        continue;
                    }
                    let inner = self.concept_lit(d, f);
                    alts.push(self.and(vec![edge, inner]));
                }
                self.or(alts)
            }
            Concept::And(a, b) => {
                let (x, y) = (self.concept_lit(a, e), self.concept_lit(b, e));
                self.and(vec![x, y])
            }
            Concept::Or(a, b) => {
                let (x, y) = (self.concept_lit(a, e), self.concept_lit(b, e));
                self.or(vec![x, y])
            }
            _ => unreachable!(),
        };
        self.concept_cache.insert((c.clone(), e), l);
        l
    }

    fn term_elements(&self, t: &Term) -> Vec<usize> {
        match t {
            Term::Ind(a) => self.element(a).into_iter().collect(),
            Term::Var(_) => (0..self.elements.len()).collect(),
        }
    }

    /// Literal equivalent to "the Boolean query `q` has a match", for queries
    /// whose term graph is a forest.
    pub fn query_lit_acyclic(&mut self, q: &Query) -> Lit {
        assert!(q.is_acyclic());
        let terms = q.terms();
        let n = self.elements.len();
        let idx: HashMap<&Term, usize> = terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut comp_lits = vec![];
        for comp in q.components() {
            let root = comp[0];
            // Orient the component as a tree rooted at `root`.
            let mut order = vec![root];
            let mut parent: HashMap<usize, usize> = HashMap::new();
            let mut i = 0;
            while i < order.len() {
                let x = order[i];
                i += 1;
                for atom in &q.atoms {
                    if let QueryAtom::Role(_, s, t) = atom {
                        let (a, b) = (idx[s], idx[t]);
                        for (u, v) in [(a, b), (b, a)] {
                            if u == x && v != x && v != root && !parent.contains_key(&v) {
                                parent.insert(v, x);
                                order.push(v);
                            }
                        }
                    }
                }
            }
            let mut m: HashMap<usize, Vec<Lit>> = HashMap::new();
            for &x in order.iter().rev() {
                let allowed: Vec<usize> = self.term_elements(&terms[x]);
                let children: Vec<usize> = order.iter().copied().filter(|c| parent.get(c) == Some(&x)).collect();
                let mut row = vec![!self.t; n];
                for &e in &allowed {
                    let mut conj = vec![];
                    if terms[x].is_var() {
                        conj.push(self.presence[e]);
                    }
                    for atom in &q.atoms {
                        match atom {
                            QueryAtom::Concept(c, t) if idx[t] == x => conj.push(self.concept_atom(c, e)),
                            QueryAtom::Role(r, s, t) if idx[s] == x && idx[t] == x => {
                                conj.push(self.role_lit(&Role::new(r.clone()), e, e))
                            }
                            _ => {}
                        }
                    }
                    for &c in &children {
                        let mut alts = vec![];
                        for f in 0..n {
                            let mc = m[&c][f];
                            if mc == !self.t {
                                continue;
                            }
                            let mut edge = vec![mc];
                            for atom in &q.atoms {
                                if let QueryAtom::Role(r, s, t) = atom {
                                    let role = Role::new(r.clone());
                                    if idx[s] == x && idx[t] == c {
                                        edge.push(self.role_lit(&role, e, f));
                                    } else if idx[s] == c && idx[t] == x {
                                        edge.push(self.role_lit(&role, f, e));
                                    }
                                }
                            }
                            alts.push(self.and(edge));
                        }
                        conj.push(self.or(alts));
                    }
                    row[e] = self.and(conj);
                }
                m.insert(x, row);
            }
            let root_row = m[&root].clone();
            comp_lits.push(self.or(root_row));
        }
        self.and(comp_lits)
    }

    /// Asserts that the Boolean query `q` has a match, using one selector
    /// variable per query variable and element.
    pub fn assert_query_selectors(&mut self, q: &Query) {
        let n = self.elements.len();
        let mut sel: HashMap<Term, Vec<Lit>> = HashMap::new();
        for t in q.terms() {
            let row = match &t {
                Term::Ind(a) => {
                    let e = self.element(a).expect("query individual is named");
                    (0..n).map(|x| if x == e { self.t } else { !self.t }).collect()
                }
                Term::Var(_) => {
                    let row: Vec<Lit> = (0..n).map(|_| self.sat.new_var()).collect();
                    self.sat.add_clause(&row);
                    for (e, &x) in row.iter().enumerate() {
                        let p = self.presence[e];
                        self.sat.add_clause(&[!x, p]);
                    }
                    row
                }
            };
            sel.insert(t, row);
        }
        for atom in &q.atoms {
            match atom {
                QueryAtom::Concept(c, t) => {
                    for e in 0..n {
                        let a = self.concept_atom(c, e);
                        self.sat.add_clause(&[!sel[t][e], a]);
                    }
                }
                QueryAtom::Role(r, s, t) => {
                    let role = Role::new(r.clone());
                    for e in 0..n {
                        for f in 0..n {
                            let a = self.role_lit(&role, e, f);
                            self.sat.add_clause(&[!sel[s][e], !sel[t][f], a]);
                        }
                    }
                }
            }
        }
    }

    /// Adds a clause forbidding the given match of `q` (variables mapped to
    /// grounding elements). Returns `false` when the match cannot be avoided.
    pub fn block_match(&mut self, q: &Query, assign: &HashMap<String, usize>) -> bool {
        let mut cl = vec![];
        for atom in &q.atoms {
            let el = |t: &Term| match t {
                Term::Ind(a) => self.element(a).unwrap(),
                Term::Var(v) => assign[v],
            };
            let l = match atom {
                QueryAtom::Concept(c, t) => self.concept_atom(c, el(t)),
                QueryAtom::Role(r, s, t) => self.role_lit(&Role::new(r.clone()), el(s), el(t)),
            };
            if l != self.t {
                cl.push(!l);
            }
        }
        if cl.is_empty() {
            return false;
        }
        self.sat.add_clause(&cl);
        true
    }

    /// The interpretation of the last model, restricted to present elements.
    pub fn extract(&self) -> Interpretation {
        self.extract_with_map().0
    }

    /// Like [`Grounding::extract`], also returning the grounding element of
    /// every interpretation element.
    pub fn extract_with_map(&self) -> (Interpretation, Vec<usize>) {
        let present: Vec<usize> = (0..self.elements.len()).filter(|&e| self.sat.model_value(self.presence[e])).collect();
        let mut map = vec![usize::MAX; self.elements.len()];
        for (i, &e) in present.iter().enumerate() {
            map[e] = i;
        }
        let n_anon = present.len() - self.n_named;
        let mut i = Interpretation::new(self.elements[..self.n_named].iter().cloned(), n_anon);
        for (c, &ci) in &self.concept_ids {
            i.declare_concept(c);
            for &e in &present {
                if self.sat.model_value(self.concept_atoms[ci][e]) {
                    i.add_concept(c, map[e]);
                }
            }
        }
        let n = self.elements.len();
        for (r, &ri) in &self.role_ids {
            i.declare_role(r);
            for &e in &present {
                for &f in &present {
                    if self.sat.model_value(self.role_atoms[ri][e * n + f]) {
                        i.add_role(r, map[e], map[f]);
                    }
                }
            }
        }
        (i, present)
    }

    /// Weight of true relaxation literals in the last model.
    pub fn model_relax_weight(&self) -> u128 {
        self.relax.iter().filter(|(l, _, _)| self.sat.model_value(*l)).map(|(_, w, _)| *w).sum()
    }
}
