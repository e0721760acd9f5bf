//! Polynomial transformations between the decision problems: satisfiability
//! to possible IQ answering, possible IQ answering to the complement of
//! certain IQ answering, and raising the budget by one.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::kb::{fresh_name, tbox_dialect, Assertion, Axiom, Concept, Query, QueryAtom, Role, Term, WeightedKb};
use crate::weight::Weight;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("expected a Boolean instance query")]
    NotAnIq,
    #[error("the TBox is {0}; expected DL-Lite or EL")]
    Dialect(String),
    #[error("query `{query}` has no gadget for {dialect}")]
    UnsupportedShape { query: String, dialect: String },
}

fn used_names(kb: &WeightedKb, q: Option<&Query>) -> BTreeSet<String> {
    let mut sig = kb.signature();
    let mut used = kb.individuals();
    if let Some(q) = q {
        sig.extend(&q.signature());
        used.extend(q.individuals());
    }
    used.extend(sig.concepts);
    used.extend(sig.roles);
    used
}

/// An individual of the KB or query, or a fresh one when there is none.
///
/// Under standard names a fresh individual is an extra domain element, which
/// pays for every TBox axiom it violates (for example `⊤ ⊑ B`); reusing an
/// existing individual only touches fresh predicates.
fn anchor(kb: &WeightedKb, q: Option<&Query>, used: &mut BTreeSet<String>, base: &str) -> String {
    let mut inds = kb.individuals();
    if let Some(q) = q {
        inds.extend(q.individuals());
    }
    match inds.into_iter().next() {
        Some(a) => a,
        None => fresh_name(base, used),
    }
}

/// Adds `a` at weight `∞`, replacing a finite copy if present.
fn force(kb: &mut WeightedKb, a: Assertion) {
    kb.abox.retain(|(b, _)| *b != a);
    kb.abox.push((a, Weight::Infinite));
}

fn inf() -> Weight {
    Weight::Infinite
}

fn one() -> Weight {
    Weight::finite(1)
}

/// Satisfiability at cost `k` as a possible-answer question: the KB is
/// unchanged and the query asks a fresh concept of some individual.
pub fn bcs_to_iqa_p(kb: &WeightedKb, k: u64) -> (WeightedKb, Query, u64) {
    let mut used = used_names(kb, None);
    let a = fresh_name("Fresh", &mut used);
    let ind = anchor(kb, None, &mut used, "fresh");
    let q = Query::boolean(&[], vec![QueryAtom::Concept(a, Term::ind(ind))]);
    (kb.clone(), q, k)
}

/// Adds a fresh concept that is unsatisfiable but asserted of an individual
/// at weight 1, so that every interpretation pays exactly 1 more. Returns the
/// new KB and budget `k + 1`.
pub fn pad_cost(kb: &WeightedKb, k: u64) -> (WeightedKb, u64) {
    let mut used = used_names(kb, None);
    let a = fresh_name("Pad", &mut used);
    let ind = anchor(kb, None, &mut used, "pad");
    let mut out = kb.clone();
    out.tbox.push((Axiom::Ci(Concept::name(a.clone()), Concept::Bottom), inf()));
    out.abox.push((Assertion::concept(a, ind), one()));
    (out, k + 1)
}

/// Normal shapes handled by the gadgets.
enum Shape {
    Instance(String, String),
    Somewhere(String),
    Edge(String, String, String),
}

/// Turns a possible-IQ instance into a certain-IQ instance with budget
/// `k + 1` whose answer is the negation of the original one.
///
/// Role IQs with variables are first replaced by concept IQs over a fresh
/// `B ≡ ∃r` (or `∃r⁻`). Over EL the shape `∃y r(y,a)` is rejected: without
/// inverse roles there is no concept to name it, and it is not equivalent to
/// `∃x∃y r(x,y)` once `⊥` occurs.
pub fn iqa_p_to_co_iqa_c(kb: &WeightedKb, q: &Query, k: u64) -> Result<(WeightedKb, Query, u64), ReductionError> {
    if !q.is_boolean() || !q.is_iq() {
        return Err(ReductionError::NotAnIq);
    }
    let dialect = tbox_dialect(&kb.tbox);
    let el = if dialect.is_dllite() {
        false
    } else if dialect.is_el() {
        true
    } else {
        return Err(ReductionError::Dialect(dialect.label().to_string()));
    };
    let mut used = used_names(kb, Some(q));
    let mut out = kb.clone();
    let define = |out: &mut WeightedKb, used: &mut BTreeSet<String>, r: Role| {
        let b = fresh_name(&format!("Ex_{}", r.name), used);
        out.tbox.push((Axiom::Ci(Concept::name(b.clone()), Concept::Exists(r.clone())), inf()));
        out.tbox.push((Axiom::Ci(Concept::Exists(r), Concept::name(b.clone())), inf()));
        b
    };
    let shape = match &q.atoms[0] {
        QueryAtom::Concept(c, Term::Ind(a)) => Shape::Instance(c.clone(), a.clone()),
        QueryAtom::Concept(c, Term::Var(_)) => Shape::Somewhere(c.clone()),
        QueryAtom::Role(r, Term::Ind(a), Term::Ind(b)) => Shape::Edge(r.clone(), a.clone(), b.clone()),
        QueryAtom::Role(r, Term::Ind(a), Term::Var(_)) => Shape::Instance(define(&mut out, &mut used, Role::new(r.clone())), a.clone()),
        QueryAtom::Role(r, Term::Var(_), Term::Ind(a)) => {
            if el {
                return Err(ReductionError::UnsupportedShape { query: q.to_string(), dialect: dialect.label().to_string() });
            }
            Shape::Instance(define(&mut out, &mut used, Role::inv(r.clone())), a.clone())
        }
        QueryAtom::Role(r, Term::Var(_), Term::Var(_)) => Shape::Somewhere(define(&mut out, &mut used, Role::new(r.clone()))),
    };
    let bar = |used: &mut BTreeSet<String>, base: &str| fresh_name(&format!("{base}_bar"), used);
    let nq = match shape {
        Shape::Instance(c, a) => {
            let cb = bar(&mut used, &c);
            out.tbox.push((Axiom::Ci(Concept::and(Concept::name(c.clone()), Concept::name(cb.clone())), Concept::Bottom), inf()));
            force(&mut out, Assertion::concept(c, a.clone()));
            out.abox.push((Assertion::concept(cb.clone(), a.clone()), one()));
            Query::boolean(&[], vec![QueryAtom::Concept(cb, Term::ind(a))])
        }
        Shape::Edge(r, a, b) => {
            let rb = bar(&mut used, &r);
            out.tbox.push((Axiom::Ci(Concept::and(Concept::name(rb.clone()), Concept::exists(Role::new(r.clone()))), Concept::Bottom), inf()));
            force(&mut out, Assertion::role(r, a.clone(), b));
            out.abox.push((Assertion::concept(rb.clone(), a.clone()), one()));
            Query::boolean(&[], vec![QueryAtom::Concept(rb, Term::ind(a))])
        }
        Shape::Somewhere(c) => {
            let cb = bar(&mut used, &c);
            let a0 = fresh_name(&format!("{c}_0"), &mut used);
            let s = fresh_name("s_in", &mut used);
            let r = fresh_name("r_out", &mut used);
            let a = anchor(kb, Some(q), &mut used, "root");
            let name = |n: &str| Concept::name(n);
            if el {
                let a1 = fresh_name(&format!("{c}_1"), &mut used);
                out.tbox.push((Axiom::Ci(name(&a0), Concept::exists_q(Role::new(s), name(&c))), inf()));
                out.tbox.push((Axiom::Ci(name(&c), Concept::exists_q(Role::new(r), name(&a1))), inf()));
                out.tbox.push((Axiom::Ci(name(&a1), name(&cb)), one()));
            } else {
                out.tbox.push((Axiom::Ci(name(&a0), Concept::exists(Role::new(s.clone()))), inf()));
                out.tbox.push((Axiom::Ci(Concept::exists(Role::inv(s)), name(&c)), inf()));
                out.tbox.push((Axiom::Ci(name(&c), Concept::exists(Role::new(r.clone()))), inf()));
                out.tbox.push((Axiom::Ci(Concept::exists(Role::inv(r)), name(&cb)), one()));
            }
            out.abox.push((Assertion::concept(a0, a), inf()));
            Query::boolean(&["y"], vec![QueryAtom::Concept(cb, Term::var("y"))])
        }
    };
    Ok((out, nq, k + 1))
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::interp::{cost, cq_holds};
    use crate::kb::{validate_kb, Dialect};
    use crate::reductions::random::{random_iq, random_kb, KbParams, TBoxShape};
    use crate::solver::{enumerate_over, entails_bounded, k_satisfiable, optimal_cost, Mode, SearchConfig};
    use crate::weight::Cost;

    /// Brute force over the named elements plus up to `m` anonymous ones.
    fn brute(kb: &WeightedKb, q: Option<&Query>, m: usize) -> Vec<(Cost, bool)> {
        let mut named = kb.individuals();
        let mut sig = kb.signature();
        if let Some(q) = q {
            named.extend(q.individuals());
            sig.extend(&q.signature());
        }
        let named: Vec<String> = named.into_iter().collect();
        let mut out = vec![];
        for extra in usize::from(named.is_empty())..=m {
            for i in enumerate_over(named.clone(), &sig, extra) {
                let holds = q.is_some_and(|q| cq_holds(&i, q).unwrap());
                out.push((cost(kb, &i).unwrap(), holds));
            }
        }
        out
    }

    fn possible(kb: &WeightedKb, q: &Query, k: u64) -> bool {
        entails_bounded(kb, q, k, Mode::Possible, &SearchConfig::default()).unwrap().answer
    }

    fn certain(kb: &WeightedKb, q: &Query, k: u64) -> bool {
        entails_bounded(kb, q, k, Mode::Certain, &SearchConfig::default()).unwrap().answer
    }

    fn tiny(shape: TBoxShape) -> KbParams {
        KbParams { max_individuals: 2, concepts: 2, roles: 1, max_tbox: 3, max_abox: 3, shape, ..KbParams::default() }
    }

    #[test]
    fn fresh_query_tracks_satisfiability() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let kb = random_kb(&mut rng, &tiny(TBoxShape::Core));
            let k = rng.gen_range(0..4);
            let (kb2, q, k2) = bcs_to_iqa_p(&kb, k);
            let sat = k_satisfiable(&kb, k, &SearchConfig::default()).unwrap().answer;
            let oracle = brute(&kb, None, 1).iter().any(|(c, _)| c.at_most(k));
            assert_eq!(sat, oracle, "{kb:?}");
            assert_eq!(possible(&kb2, &q, k2), sat);
        }
    }

    #[test]
    fn padding_adds_one_to_every_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let shape = if rng.gen_bool(0.5) { TBoxShape::BoolH } else { TBoxShape::El };
            let kb = random_kb(&mut rng, &tiny(shape));
            let k = rng.gen_range(0..4);
            let (kb2, k2) = pad_cost(&kb, k);
            assert_eq!(k2, k + 1);
            let cfg = SearchConfig::default();
            assert_eq!(k_satisfiable(&kb, k, &cfg).unwrap().answer, k_satisfiable(&kb2, k2, &cfg).unwrap().answer);
            assert!(!k_satisfiable(&kb2, 0, &cfg).unwrap().answer);
            let (o1, o2) = (optimal_cost(&kb, &cfg).unwrap().cost, optimal_cost(&kb2, &cfg).unwrap().cost);
            let oracle = brute(&kb, None, 1).into_iter().map(|(c, _)| c).min().unwrap();
            assert_eq!(o1, oracle);
            assert_eq!(o2, o1 + Cost::finite(1));
        }
        let bad = WeightedKb::new(vec![], vec![(Assertion::concept("A", "a"), inf())]);
        let bad = WeightedKb::new(vec![(Axiom::Ci(Concept::name("A"), Concept::Bottom), inf())], bad.abox);
        let (padded, _) = pad_cost(&bad, 5);
        assert_eq!(optimal_cost(&padded, &SearchConfig::default()).unwrap().cost, Cost::Infinite);
    }

    #[test]
    fn instance_gadget_on_inconsistent_fact() {
        let kb = WeightedKb::new(
            vec![(Axiom::Ci(Concept::name("A"), Concept::Bottom), inf())],
            vec![(Assertion::concept("A", "a"), one())],
        );
        let q = Query::boolean(&[], vec![QueryAtom::Concept("A".into(), Term::ind("a"))]);
        assert!(!possible(&kb, &q, 0));
        assert!(!brute(&kb, Some(&q), 0).iter().any(|(c, h)| c.at_most(0) && *h));
        let (kb2, q2, k2) = iqa_p_to_co_iqa_c(&kb, &q, 0).unwrap();
        assert_eq!(k2, 1);
        assert!(certain(&kb2, &q2, k2));
    }

    fn check_round_trip(kb: &WeightedKb, q: &Query, k: u64) {
        let p = possible(kb, q, k);
        let oracle = brute(kb, Some(q), 1).iter().any(|(c, h)| c.at_most(k) && *h);
        assert_eq!(p, oracle, "{kb:?} {q}");
        let (kb2, q2, k2) = iqa_p_to_co_iqa_c(kb, q, k).unwrap();
        assert_eq!(certain(&kb2, &q2, k2), !p, "{kb:?} {q} at {k}");
    }

    #[test]
    fn round_trip_on_dllite_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..60 {
            let kb = random_kb(&mut rng, &tiny(TBoxShape::Core));
            let q = random_iq(&mut rng, 2, 1, 2);
            check_round_trip(&kb, &q, rng.gen_range(0..3));
        }
    }

    #[test]
    fn round_trip_on_el_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut done = 0;
        while done < 30 {
            let kb = random_kb(&mut rng, &tiny(TBoxShape::El));
            let q = random_iq(&mut rng, 2, 1, 2);
            let is_el = !tbox_dialect(&kb.tbox).is_dllite();
            if is_el && matches!(&q.atoms[0], QueryAtom::Role(_, Term::Var(_), Term::Ind(_))) {
                assert!(matches!(iqa_p_to_co_iqa_c(&kb, &q, 0), Err(ReductionError::UnsupportedShape { .. })));
                continue;
            }
            check_round_trip(&kb, &q, rng.gen_range(0..3));
            done += 1;
        }
    }

    #[test]
    fn shape_examples() {
        let kb = WeightedKb::new(
            vec![(Axiom::Ci(Concept::name("A"), Concept::not(Concept::name("B"))), Weight::finite(2))],
            vec![(Assertion::concept("A", "a"), one()), (Assertion::concept("B", "a"), one())],
        );
        let somewhere = Query::boolean(&["y"], vec![QueryAtom::Concept("A".into(), Term::var("y"))]);
        for k in 0..3 {
            check_round_trip(&kb, &somewhere, k);
        }
        let kb = WeightedKb::new(
            vec![(Axiom::Ci(Concept::exists(Role::new("r")), Concept::Bottom), Weight::finite(2))],
            vec![(Assertion::role("r", "a", "b"), one())],
        );
        let edge = Query::boolean(&[], vec![QueryAtom::Role("r".into(), Term::ind("a"), Term::ind("b"))]);
        for k in 0..4 {
            check_round_trip(&kb, &edge, k);
        }
    }

    #[test]
    fn gadgets_stay_in_the_dialect() {
        let core = WeightedKb::new(vec![(Axiom::Ci(Concept::name("A"), Concept::name("B")), inf())], vec![]);
        let el = WeightedKb::new(
            vec![(Axiom::Ci(Concept::name("A"), Concept::exists_q(Role::new("r"), Concept::name("B"))), inf())],
            vec![],
        );
        let q = Query::boolean(&["y"], vec![QueryAtom::Concept("B".into(), Term::var("y"))]);
        let (c2, _, _) = iqa_p_to_co_iqa_c(&core, &q, 0).unwrap();
        assert_eq!(validate_kb(&c2).dialect, Dialect::DlLiteCore);
        let (e2, _, _) = iqa_p_to_co_iqa_c(&el, &q, 0).unwrap();
        assert_eq!(validate_kb(&e2).dialect, Dialect::El);
        let alc = WeightedKb::new(
            vec![(Axiom::Ci(Concept::exists_q(Role::inv("r"), Concept::name("A")), Concept::name("B")), inf())],
            vec![],
        );
        assert!(matches!(iqa_p_to_co_iqa_c(&alc, &q, 0), Err(ReductionError::Dialect(_))));
    }
}
