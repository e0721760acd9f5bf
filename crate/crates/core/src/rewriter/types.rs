//! Role subsumption, ABox types, rare types, the core of an ABox and the
//! domain-size bound of the rewriting.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigUint;
use num_traits::One;

use crate::interp::OneType;
use crate::kb::{Assertion, Axiom, Role, Signature};
use crate::weight::Weight;

use super::RewriteError;

/// Reflexive-transitive closure of the role inclusions of a TBox, closed
/// under inverses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoleClosure {
    supers: BTreeMap<Role, BTreeSet<Role>>,
}

impl RoleClosure {
    /// Whether `r ⊑_T s`. Every role subsumes itself.
    pub fn subsumes(&self, r: &Role, s: &Role) -> bool {
        r == s || self.supers.get(r).is_some_and(|x| x.contains(s))
    }

    /// All `s` with `r ⊑_T s`, including `r`.
    pub fn supers(&self, r: &Role) -> BTreeSet<Role> {
        let mut out = self.supers.get(r).cloned().unwrap_or_default();
        out.insert(r.clone());
        out
    }

    /// All pairs `(r, s)` with `r ⊑_T s` over the roles mentioned in the TBox.
    pub fn pairs(&self) -> BTreeSet<(Role, Role)> {
        self.supers.iter().flat_map(|(r, ss)| ss.iter().map(move |s| (r.clone(), s.clone()))).collect()
    }
}

/// Computes `⊑_T` from the role inclusions of `tbox` (weights are ignored).
pub fn role_closure(tbox: &[(Axiom, Weight)]) -> RoleClosure {
    let mut edges: BTreeMap<Role, BTreeSet<Role>> = BTreeMap::new();
    for r in Signature::of_tbox(tbox).roles_pm() {
        edges.entry(r).or_default();
    }
    for (ax, _) in tbox {
        if let Axiom::Ri(l, r) = ax {
            edges.entry(l.clone()).or_default().insert(r.clone());
            edges.entry(l.inverted()).or_default().insert(r.inverted());
            edges.entry(r.clone()).or_default();
            edges.entry(r.inverted()).or_default();
        }
    }
    let mut supers = BTreeMap::new();
    for start in edges.keys() {
        let mut seen: BTreeSet<Role> = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(r) = queue.pop_front() {
            for s in &edges[&r] {
                if seen.insert(s.clone()) {
                    queue.push_back(s.clone());
                }
            }
        }
        supers.insert(start.clone(), seen);
    }
    RoleClosure { supers }
}

/// The ABox type of an individual: its 1-type in the ABox seen as an
/// interpretation, plus the roles with more than `k` distinct successors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AboxType {
    pub one_type: OneType,
    pub many_succ: BTreeSet<Role>,
}

fn successors<'a>(abox: &'a [(Assertion, Weight)], a: &str, r: &Role) -> BTreeSet<&'a str> {
    abox.iter()
        .filter_map(|(asr, _)| match asr {
            Assertion::Role(name, x, y) if *name == r.name => {
                let (from, to) = if r.inverse { (y, x) } else { (x, y) };
                (from == a).then_some(to.as_str())
            }
            _ => None,
        })
        .collect()
}

/// ABox type of `a` over `sig`, with `∃^{>k} r` for every role with at least
/// `k + 1` distinct successors (predecessors for inverse roles).
pub fn abox_type(abox: &[(Assertion, Weight)], sig: &Signature, a: &str, k: u64) -> Result<AboxType, RewriteError> {
    if !abox.iter().any(|(asr, _)| asr.individuals().contains(&a)) {
        return Err(RewriteError::UnknownIndividual(a.to_string()));
    }
    let mut t = AboxType::default();
    for (asr, _) in abox {
        if let Assertion::Concept(c, x) = asr {
            if x == a && sig.concepts.contains(c) {
                t.one_type.concepts.insert(c.clone());
            }
        }
    }
    for r in sig.roles_pm() {
        let n = successors(abox, a, &r).len() as u64;
        if n > 0 {
            t.one_type.exists.insert(r.clone());
        }
        if n > k {
            t.many_succ.insert(r);
        }
    }
    Ok(t)
}

fn abox_individuals(abox: &[(Assertion, Weight)]) -> BTreeSet<String> {
    abox.iter().flat_map(|(a, _)| a.individuals()).map(str::to_string).collect()
}

/// ABox types of all individuals.
pub fn abox_types(abox: &[(Assertion, Weight)], sig: &Signature, k: u64) -> BTreeMap<String, AboxType> {
    abox_individuals(abox)
        .into_iter()
        .map(|a| {
            let t = abox_type(abox, sig, &a, k).expect("individual occurs in the ABox");
            (a, t)
        })
        .collect()
}

/// ABox types realized by at most `2k` individuals.
pub fn rare_types(abox: &[(Assertion, Weight)], sig: &Signature, k: u64) -> BTreeSet<AboxType> {
    let mut counts: BTreeMap<AboxType, u64> = BTreeMap::new();
    for t in abox_types(abox, sig, k).into_values() {
        *counts.entry(t).or_default() += 1;
    }
    counts.into_iter().filter(|(_, n)| *n <= 2 * k).map(|(t, _)| t).collect()
}

/// Pre-core and core of an ABox.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreSets {
    pub precore: BTreeSet<String>,
    pub core: BTreeSet<String>,
}

/// The pre-core (rare-typed individuals plus `query_individuals`) and the
/// core, which adds everything reachable from the pre-core in at most `k + 1`
/// steps along role assertions `r(a, b)` (either direction) such that `a`
/// does not have more than `k` `r`-successors.
pub fn core(
    abox: &[(Assertion, Weight)],
    sig: &Signature,
    query_individuals: &BTreeSet<String>,
    k: u64,
) -> CoreSets {
    let types = abox_types(abox, sig, k);
    let rare = rare_types(abox, sig, k);
    let mut precore: BTreeSet<String> = types.iter().filter(|(_, t)| rare.contains(t)).map(|(a, _)| a.clone()).collect();
    precore.extend(query_individuals.iter().cloned());

    let mut step: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (asr, _) in abox {
        if let Assertion::Role(r, a, b) = asr {
            if !sig.roles.contains(r) {
                continue;
            }
            for (x, y, role) in [(a, b, Role::new(r.clone())), (b, a, Role::inv(r.clone()))] {
                if !types[x.as_str()].many_succ.contains(&role) {
                    step.entry(x).or_default().insert(y);
                }
            }
        }
    }
    let mut core = precore.clone();
    let mut frontier: Vec<String> = precore.iter().cloned().collect();
    for _ in 0..=k {
        let mut next = vec![];
        for a in &frontier {
            for &b in step.get(a.as_str()).into_iter().flatten() {
                if core.insert(b.to_string()) {
                    next.push(b.to_string());
                }
            }
        }
        frontier = next;
    }
    CoreSets { precore, core }
}

fn pow2(e: usize) -> BigUint {
    BigUint::one() << e
}

/// `P_0 = 2k · 2^{|N_C|+4|N_R|} + |q|`, the pre-core size bound.
pub fn precore_bound(n_concepts: usize, n_roles: usize, query_size: usize, k: u64) -> BigUint {
    BigUint::from(2 * k) * pow2(n_concepts + 4 * n_roles) + BigUint::from(query_size)
}

/// `P_0 · (2k|N_R|)^k`, the core size bound.
pub fn core_bound(n_concepts: usize, n_roles: usize, query_size: usize, k: u64) -> BigUint {
    let base = BigUint::from(2 * k * n_roles as u64);
    let factor = if k == 0 { BigUint::one() } else { base.pow(k as u32) };
    precore_bound(n_concepts, n_roles, query_size, k) * factor
}

/// `M = P_0 · (2k|N_R|)^k + 2^{|N_C|+2|N_R|}`, the domain-size bound of the
/// interpretations a full rewriting ranges over.
pub fn m_bound(n_concepts: usize, n_roles: usize, query_size: usize, k: u64) -> BigUint {
    core_bound(n_concepts, n_roles, query_size, k) + pow2(n_concepts + 2 * n_roles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::Concept;

    fn ri(l: Role, r: Role) -> (Axiom, Weight) {
        (Axiom::Ri(l, r), Weight::Infinite)
    }

    #[test]
    fn closure_is_reflexive_transitive_and_inverse_closed() {
        let c = role_closure(&[ri(Role::new("r"), Role::new("s")), ri(Role::new("s"), Role::new("u"))]);
        assert!(c.subsumes(&Role::new("r"), &Role::new("u")));
        assert!(c.subsumes(&Role::inv("r"), &Role::inv("s")));
        assert!(c.subsumes(&Role::inv("r"), &Role::inv("u")));
        assert!(!c.subsumes(&Role::new("s"), &Role::new("r")));
        assert!(!c.subsumes(&Role::new("r"), &Role::inv("s")));
        assert!(c.subsumes(&Role::new("x"), &Role::new("x")));
        let empty = role_closure(&[]);
        assert!(empty.pairs().is_empty());
        assert_eq!(empty.supers(&Role::new("r")), BTreeSet::from([Role::new("r")]));
    }

    #[test]
    fn many_successors_need_k_plus_one() {
        let w = Weight::finite(1);
        let abox: Vec<_> = ["b1", "b2", "b3"].iter().map(|b| (Assertion::role("r", "a", *b), w.clone())).collect();
        let sig = Signature::of_abox(&abox);
        assert!(abox_type(&abox, &sig, "a", 2).unwrap().many_succ.contains(&Role::new("r")));
        assert!(abox_type(&abox, &sig, "a", 3).unwrap().many_succ.is_empty());
        assert!(abox_type(&abox, &sig, "b1", 0).unwrap().many_succ.contains(&Role::inv("r")));
        assert!(matches!(abox_type(&abox, &sig, "z", 1), Err(RewriteError::UnknownIndividual(_))));
    }

    fn example_abox() -> Vec<(Assertion, Weight)> {
        let mut abox = vec![(Assertion::concept("A", "a0"), Weight::Infinite)];
        for i in 0..8 {
            abox.push((Assertion::role("r", format!("a{i}"), format!("b{i}")), Weight::Infinite));
            abox.push((Assertion::role("t", format!("b{i}"), format!("c{i}")), Weight::finite(1)));
        }
        abox
    }

    fn example_sig() -> Signature {
        let tbox = vec![
            (Axiom::Ci(Concept::name("A"), Concept::exists(Role::new("u"))), Weight::Infinite),
            (Axiom::Ci(Concept::exists(Role::new("t")), Concept::exists(Role::inv("s"))), Weight::Infinite),
            ri(Role::new("r"), Role::new("s")),
        ];
        Signature::of_tbox(&tbox)
    }

    #[test]
    fn running_example_types_and_core() {
        let abox = example_abox();
        let sig = example_sig();
        let t = abox_type(&abox, &sig, "a0", 3).unwrap();
        assert!(t.one_type.has_concept("A") && t.one_type.has_exists(&Role::new("r")));
        assert!(t.many_succ.is_empty());
        let rare = rare_types(&abox, &sig, 3);
        assert!(rare.contains(&t));
        assert!(!rare.contains(&abox_type(&abox, &sig, "b0", 3).unwrap()));
        assert!(!rare.contains(&abox_type(&abox, &sig, "c0", 3).unwrap()));
        let cs = core(&abox, &sig, &BTreeSet::new(), 3);
        assert_eq!(cs.precore, BTreeSet::from(["a0".to_string()]));
        assert_eq!(cs.core, ["a0", "b0", "c0"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn rare_types_edge_cases() {
        assert!(rare_types(&[], &Signature::new(), 1).is_empty());
        let abox = vec![(Assertion::concept("A", "a"), Weight::finite(1))];
        assert_eq!(rare_types(&abox, &Signature::of_abox(&abox), 1).len(), 1);
    }

    #[test]
    fn core_skips_many_successor_edges() {
        let w = Weight::finite(1);
        let mut abox = vec![(Assertion::concept("A", "a"), w.clone())];
        for i in 0..3 {
            abox.push((Assertion::role("r", "a", format!("b{i}")), w.clone()));
        }
        let sig = Signature::of_abox(&abox);
        let q = BTreeSet::from(["a".to_string()]);
        // k = 1: `a` has more than one r-successor, so no b_i is entered via r.
        let cs = core(&abox, &sig, &q, 1);
        assert!(cs.core.contains("a"));
        // The b_i share one type realized 3 > 2 times, so they are not rare.
        assert_eq!(cs.core.len(), 1);
        // Disconnected frequent individuals leave just the query individuals.
        let many: Vec<_> = (0..5).map(|i| (Assertion::concept("A", format!("x{i}")), w.clone())).collect();
        let cs = core(&many, &Signature::of_abox(&many), &q, 1);
        assert_eq!(cs.core, q);
    }

    #[test]
    fn bounds() {
        assert_eq!(precore_bound(1, 1, 1, 1), BigUint::from(65u32));
        assert_eq!(m_bound(1, 1, 1, 1), BigUint::from(138u32));
        assert_eq!(precore_bound(0, 0, 1, 1), BigUint::from(3u32));
        assert_eq!(m_bound(0, 0, 1, 1), BigUint::one());
        let d = m_bound(1, 1, 2, 1) - m_bound(1, 1, 1, 1);
        assert_eq!(d, BigUint::from(2u32));
        assert_eq!(core_bound(2, 1, 3, 0), BigUint::from(3u32));
    }
}
