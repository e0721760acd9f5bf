//! Assembly of the first-order disjunct of one strategy.

use std::collections::{BTreeSet, HashMap};

use crate::interp::fo::{FoTerm, Formula, Level};
use crate::interp::{one_type, OneType};
use crate::kb::{Assertion, Role};

use super::strategy::{maximal_good_types, slot_index, Strategy};
use super::Setup;

fn role_atom(r: &Role, s: FoTerm, t: FoTerm) -> Formula {
    if r.inverse {
        Formula::Role(r.name.clone(), t, s)
    } else {
        Formula::Role(r.name.clone(), s, t)
    }
}

fn level_of(t: &FoTerm) -> usize {
    match t {
        FoTerm::Var(i) => *i as usize + 1,
        FoTerm::Const(_) => 0,
    }
}

/// `v` is not an individual with a concept or role outside `t`.
fn within_type(setup: &Setup, t: &OneType, v: u32) -> Formula {
    let mut conj = vec![];
    for c in setup.signature.concepts.difference(&setup.hidden) {
        if !t.has_concept(c) {
            conj.push(Formula::not(Formula::Concept(c.clone(), FoTerm::Var(v))));
        }
    }
    for r in setup.signature.roles_pm() {
        if !t.has_exists(&r) {
            conj.push(Formula::not(Formula::exists(v + 1, role_atom(&r, FoTerm::Var(v), FoTerm::Var(v + 1)))));
        }
    }
    Formula::And(conj)
}

/// `v` has exactly the ABox type `(t, many)`.
fn exact_type(setup: &Setup, t: &OneType, many: &BTreeSet<Role>, v: u32) -> Formula {
    let mut conj = vec![];
    for c in setup.signature.concepts.difference(&setup.hidden) {
        let a = Formula::Concept(c.clone(), FoTerm::Var(v));
        conj.push(if t.has_concept(c) { a } else { Formula::not(a) });
    }
    for r in setup.signature.roles_pm() {
        let edge = role_atom(&r, FoTerm::Var(v), FoTerm::Var(v + 1));
        let some = Formula::exists(v + 1, edge.clone());
        conj.push(if t.has_exists(&r) { some } else { Formula::not(some) });
        if t.has_exists(&r) {
            let lots = Formula::count_exists(setup.k, v + 1, edge);
            conj.push(if many.contains(&r) { lots } else { Formula::not(lots) });
        }
    }
    Formula::And(conj)
}

fn subsets(items: &[Role]) -> Vec<BTreeSet<Role>> {
    (0u32..1 << items.len())
        .map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r.clone()).collect())
        .collect()
}

/// Individual `v` has a safe ABox type.
fn safe_formula(setup: &Setup, s: &Strategy, v: u32, full_types: bool) -> Formula {
    let maximal = maximal_good_types(setup, &s.model);
    if !full_types {
        return Formula::Or(maximal.iter().map(|t| within_type(setup, t, v)).collect());
    }
    let mut sig = setup.signature.clone();
    sig.concepts.retain(|c| !setup.hidden.contains(c));
    let mut alts = vec![];
    for t in OneType::all(&sig) {
        let fits = maximal.iter().any(|m| t.concepts.is_subset(&m.concepts) && t.exists.is_subset(&m.exists));
        if !fits {
            continue;
        }
        let exists: Vec<Role> = t.exists.iter().cloned().collect();
        for many in subsets(&exists) {
            alts.push(exact_type(setup, &t, &many, v));
        }
    }
    Formula::Or(alts)
}

/// The disjunct `q_σ` of a strategy. Unlabelled slots become existential
/// variables `0, 1, ...`, query individuals stay constants; each conjunct is
/// placed directly under the innermost quantifier it depends on.
pub fn build_strategy_query(setup: &Setup, s: &Strategy, full_types: bool) -> Formula {
    let m = &s.model;
    let terms: Vec<FoTerm> = s
        .gamma
        .iter()
        .map(|&d| {
            let name = m.element_name(d);
            match slot_index(name) {
                Some(i) => FoTerm::Var(i),
                None => FoTerm::Const(name.to_string()),
            }
        })
        .collect();
    let n_vars = terms.iter().filter(|t| matches!(t, FoTerm::Var(_))).count() as u32;
    let mut layers: Vec<Vec<Formula>> = vec![vec![]; n_vars as usize + 1];

    for (i, a) in terms.iter().enumerate() {
        for b in &terms[..i] {
            let lvl = level_of(a).max(level_of(b));
            if lvl > 0 {
                layers[lvl].push(Formula::not(Formula::Eq(a.clone(), b.clone())));
            }
        }
    }

    let allowed: HashMap<&Assertion, u64> = s.violations.iter().map(|(a, w)| (a, *w)).collect();
    let name = |i: usize| m.element_name(s.gamma[i]).to_string();
    for c in setup.signature.concepts.difference(&setup.hidden) {
        for (i, &d) in s.gamma.iter().enumerate() {
            if m.has_concept(c, d) {
                continue;
            }
            let t = &terms[i];
            let atom = Formula::Concept(c.clone(), t.clone());
            let f = match allowed.get(&Assertion::concept(c.clone(), name(i))) {
                Some(&w) => Formula::implies(atom, Formula::WConcept(c.clone(), Level::Finite(w), t.clone())),
                None => Formula::not(atom),
            };
            layers[level_of(t)].push(f);
        }
    }
    for r in &setup.signature.roles {
        for (i, &d) in s.gamma.iter().enumerate() {
            for (j, &e) in s.gamma.iter().enumerate() {
                if m.has_role(r, d, e) {
                    continue;
                }
                let (ti, tj) = (&terms[i], &terms[j]);
                let atom = Formula::Role(r.clone(), ti.clone(), tj.clone());
                let f = match allowed.get(&Assertion::role(r.clone(), name(i), name(j))) {
                    Some(&w) => Formula::implies(atom, Formula::WRole(r.clone(), Level::Finite(w), ti.clone(), tj.clone())),
                    None => Formula::not(atom),
                };
                layers[level_of(ti).max(level_of(tj))].push(f);
            }
        }
    }

    let v = n_vars;
    let others = |v: u32| Formula::And(terms.iter().map(|t| Formula::not(Formula::Eq(FoTerm::Var(v), t.clone()))).collect());
    let mut body = vec![Formula::forall(v, Formula::implies(others(v), safe_formula(setup, s, v, full_types)))];
    for (i, &d) in s.gamma.iter().enumerate() {
        let tp = one_type(m, &setup.signature, d);
        for r in setup.signature.roles_pm() {
            if setup.closure.supers(&r).iter().all(|x| tp.has_exists(x)) {
                continue;
            }
            let inside = Formula::Or(terms.iter().map(|t| Formula::Eq(FoTerm::Var(v), t.clone())).collect());
            body.push(Formula::forall(v, Formula::implies(role_atom(&r, terms[i].clone(), FoTerm::Var(v)), inside)));
        }
    }

    let mut f = Formula::And(body);
    for i in (0..n_vars).rev() {
        let mut conj = std::mem::take(&mut layers[i as usize + 1]);
        conj.push(f);
        f = Formula::exists(i, Formula::And(conj));
    }
    let mut conj = std::mem::take(&mut layers[0]);
    conj.push(f);
    Formula::And(conj).simplify()
}
