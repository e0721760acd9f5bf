use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::kb::{Assertion, Concept, QueryAtom, Role, Term};
use crate::reductions::random::{random_bcq, random_iq, random_kb, KbParams, TBoxShape};

fn inf() -> Weight {
    Weight::Infinite
}

fn w(n: u64) -> Weight {
    Weight::finite(n)
}

/// Brute-force answers over the named elements plus up to `m` anonymous ones.
struct Oracle {
    /// Costs of all interpretations, with whether the query holds.
    models: Vec<(Cost, bool)>,
}

impl Oracle {
    fn new(kb: &WeightedKb, q: Option<&Query>, m: usize) -> Oracle {
        let mut named = kb.individuals();
        let mut sig = kb.signature();
        if let Some(q) = q {
            named.extend(q.individuals());
            sig.extend(&q.signature());
        }
        let named: Vec<String> = named.into_iter().collect();
        let start = usize::from(named.is_empty());
        let mut models = vec![];
        for k in start..=m.max(start) {
            for i in enumerate_over(named.clone(), &sig, k) {
                let c = interp::cost(kb, &i).unwrap();
                let holds = q.map(|q| cq_holds(&i, q).unwrap()).unwrap_or(false);
                models.push((c, holds));
            }
        }
        Oracle { models }
    }

    fn satisfiable(&self, k: u64) -> bool {
        self.models.iter().any(|(c, _)| c.at_most(k))
    }

    fn possible(&self, k: u64) -> bool {
        self.models.iter().any(|(c, h)| c.at_most(k) && *h)
    }

    fn certain(&self, k: u64) -> bool {
        self.models.iter().all(|(c, h)| !c.at_most(k) || *h)
    }

    fn optimum(&self) -> Cost {
        self.models.iter().map(|(c, _)| c.clone()).min().unwrap_or(Cost::Infinite)
    }
}

fn free(m: usize) -> Plan {
    Plan { anon: AnonMode::Free(m), complete: false }
}

/// Tiny random KBs: at most two individuals, so that the brute-force oracle
/// stays below 2^15 interpretations with one anonymous element.
fn tiny_params(shape: TBoxShape) -> KbParams {
    KbParams { max_individuals: 2, concepts: 2, roles: 1, max_tbox: 3, max_abox: 4, shape, ..KbParams::default() }
}

#[test]
fn fixed_domain_grounding_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..240 {
        let shape = [TBoxShape::Core, TBoxShape::BoolH, TBoxShape::El][round % 3];
        let kb = random_kb(&mut rng, &tiny_params(shape));
        if validate_kb(&kb).dialect == Dialect::Invalid {
            continue;
        }
        let q = if rng.gen_bool(0.5) { random_bcq(&mut rng, 2, 1, 0, 2) } else { random_iq(&mut rng, 2, 1, 0) };
        let m = if kb.individuals().len() + q.individuals().len() <= 1 { 2 } else { 1 };
        let oracle = Oracle::new(&kb, Some(&q), m);
        let plain = Oracle::new(&kb, None, m);
        let plan = free(m);
        for k in 0..=3u64 {
            let ctx = format!("round {round} k={k}\n{}\nq = {q}", crate::textio::serialize_kb(&kb));
            assert_eq!(satisfiable_with(&kb, k, &plan).unwrap().answer, plain.satisfiable(k), "sat {ctx}");
            let pos = entails_with(&kb, &q, k, Mode::Possible, &plan).unwrap();
            assert_eq!(pos.answer, oracle.possible(k), "possible {ctx}");
            let cer = entails_with(&kb, &q, k, Mode::Certain, &plan).unwrap();
            assert_eq!(cer.answer, oracle.certain(k), "certain {ctx}");
        }
        assert_eq!(optimum_with(&kb, &plan).unwrap().cost, plain.optimum(), "optimum round {round}");
    }
}

#[test]
fn public_verdicts_are_consistent_with_small_domains() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = SearchConfig::default();
    for round in 0..150 {
        let shape = if round % 2 == 0 { TBoxShape::Core } else { TBoxShape::BoolH };
        let kb = random_kb(&mut rng, &tiny_params(shape));
        let report = validate_kb(&kb);
        if !report.dialect.is_dllite() {
            continue;
        }
        let q = random_iq(&mut rng, 2, 1, 0);
        let oracle = Oracle::new(&kb, Some(&q), 1);
        let plain = Oracle::new(&kb, None, 1);
        for k in 0..=2u64 {
            let ctx = format!("round {round} k={k}\n{}\nq = {q}", crate::textio::serialize_kb(&kb));
            let sat = k_satisfiable(&kb, k, &cfg).unwrap();
            assert!(sat.complete);
            assert!(sat.answer || !plain.satisfiable(k), "sat {ctx}");
            let pos = entails_bounded(&kb, &q, k, Mode::Possible, &cfg).unwrap();
            assert!(pos.answer || !oracle.possible(k), "possible {ctx}");
            let cer = entails_bounded(&kb, &q, k, Mode::Certain, &cfg).unwrap();
            assert!(!cer.answer || oracle.certain(k), "certain {ctx}");
            // A satisfiable KB has no certain answer that fails at every model.
            if !sat.answer {
                assert!(!pos.answer && cer.answer, "unsat {ctx}");
            }
        }
        let opt = optimal_cost(&kb, &cfg).unwrap();
        assert!(opt.cost <= plain.optimum(), "optimum round {round}");
    }
}

#[test]
fn kbs_without_existentials_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SearchConfig::default();
    let mut p = tiny_params(TBoxShape::BoolH);
    p.max_individuals = 3;
    for round in 0..120 {
        let kb = random_kb(&mut rng, &p);
        if validate_kb(&kb).dialect == Dialect::Invalid || Polarity::of_tbox(&kb.tbox).pos_exists {
            continue;
        }
        let q = random_iq(&mut rng, 2, 1, 2);
        if q.terms().iter().any(|t| t.is_var()) {
            continue;
        }
        let oracle = Oracle::new(&kb, Some(&q), 0);
        for k in 0..=2u64 {
            let ctx = format!("round {round} k={k}\n{}\nq = {q}", crate::textio::serialize_kb(&kb));
            let pos = entails_bounded(&kb, &q, k, Mode::Possible, &cfg).unwrap();
            let cer = entails_bounded(&kb, &q, k, Mode::Certain, &cfg).unwrap();
            assert!(pos.complete && cer.complete);
            assert_eq!(pos.answer, oracle.possible(k), "possible {ctx}");
            assert_eq!(cer.answer, oracle.certain(k), "certain {ctx}");
        }
    }
}

fn example_one() -> WeightedKb {
    let mut abox = vec![(Assertion::concept("A", "a0"), inf())];
    for i in 0..8 {
        abox.push((Assertion::role("r", format!("a{i}"), format!("b{i}")), inf()));
        abox.push((Assertion::role("t", format!("b{i}"), format!("c{i}")), w(1)));
    }
    let tbox = vec![
        (
            Axiom::Ci(Concept::name("A"), Concept::and(Concept::exists(Role::new("u")), Concept::not(Concept::exists(Role::new("s"))))),
            inf(),
        ),
        (
            Axiom::Ci(
                Concept::exists(Role::inv("u")),
                Concept::and(Concept::exists(Role::inv("r")), Concept::not(Concept::exists(Role::inv("s")))),
            ),
            inf(),
        ),
        (Axiom::Ci(Concept::exists(Role::new("t")), Concept::exists(Role::inv("s"))), inf()),
        (Axiom::Ri(Role::new("r"), Role::new("s")), w(2)),
    ];
    WeightedKb::new(tbox, abox)
}

#[test]
fn running_example_bounded_cost() {
    let kb = example_one();
    let cfg = SearchConfig::default();
    assert!(k_satisfiable(&kb, 3, &cfg).unwrap().answer);
    assert!(!k_satisfiable(&kb, 2, &cfg).unwrap().answer);
    let q = Query::boolean(&[], vec![QueryAtom::Role("t".into(), Term::ind("b0"), Term::ind("c0"))]);
    assert!(!entails_bounded(&kb, &q, 3, Mode::Possible, &cfg).unwrap().answer);
    assert!(entails_bounded(&kb, &q, 10, Mode::Possible, &cfg).unwrap().answer);
    assert_eq!(optimal_cost(&kb, &cfg).unwrap().cost, Cost::finite(3));
}

#[test]
fn infinite_optimum_conventions() {
    let kb = WeightedKb::new(
        vec![(Axiom::Ci(Concept::name("A"), Concept::Bottom), inf())],
        vec![(Assertion::concept("A", "a"), inf())],
    );
    let cfg = SearchConfig::default();
    assert_eq!(optimal_cost(&kb, &cfg).unwrap().cost, Cost::Infinite);
    let q = Query::boolean(&[], vec![QueryAtom::Concept("B".into(), Term::ind("a"))]);
    assert!(entails_opt(&kb, &q, Mode::Certain, &cfg).unwrap().answer);
    assert!(!entails_opt(&kb, &q, Mode::Possible, &cfg).unwrap().answer);
}

#[test]
fn domain_bounds() {
    let kb = WeightedKb::new(vec![(Axiom::Ci(Concept::name("A"), Concept::exists(Role::new("r"))), inf())], vec![]);
    assert_eq!(domain_bound(&kb, Task::Satisfiability), DomainBound::Elements(BigUint::from(8u32)));
    assert_eq!(domain_bound(&WeightedKb::default(), Task::Certain), DomainBound::Elements(BigUint::one()));
    let el = WeightedKb::new(
        vec![(Axiom::Ci(Concept::name("A"), Concept::exists_q(Role::new("r"), Concept::name("B"))), inf())],
        vec![(Assertion::concept("A", "a"), w(1))],
    );
    assert_eq!(domain_bound(&el, Task::Certain), DomainBound::Unknown);
    // |T| = 3 concept nodes (A, ∃r.B, B), one individual: 1 + 3 + 2^18.
    assert_eq!(domain_bound(&el, Task::Possible), DomainBound::Elements(BigUint::from(4u64 + (1u64 << 18))));
}

#[test]
fn exhaustive_flag_rejects_incomplete_searches() {
    let el = WeightedKb::new(
        vec![(Axiom::Ci(Concept::name("A"), Concept::exists_q(Role::new("r"), Concept::name("B"))), inf())],
        vec![(Assertion::concept("A", "a"), w(1))],
    );
    let cfg = SearchConfig { exhaustive: true, ..SearchConfig::default() };
    assert!(matches!(k_satisfiable(&el, 0, &cfg), Err(SolverError::Incomplete(_))));
    let lite = WeightedKb::new(
        vec![(Axiom::Ci(Concept::name("A"), Concept::exists(Role::new("r"))), inf())],
        vec![(Assertion::concept("A", "a"), w(1))],
    );
    assert!(k_satisfiable(&lite, 0, &cfg).unwrap().answer);
}

#[test]
fn cyclic_certain_query_uses_refinement() {
    // r(a,b), r(b,a) each weight 1; the cyclic query r(x,y) ∧ r(y,x) holds in
    // every model of cost 0 but not at cost 1.
    let kb = WeightedKb::new(vec![], vec![(Assertion::role("r", "a", "b"), w(1)), (Assertion::role("r", "b", "a"), w(1))]);
    let q = Query::boolean(
        &["x", "y"],
        vec![
            QueryAtom::Role("r".into(), Term::var("x"), Term::var("y")),
            QueryAtom::Role("r".into(), Term::var("y"), Term::var("x")),
        ],
    );
    let cfg = SearchConfig::default();
    assert!(entails_bounded(&kb, &q, 0, Mode::Certain, &cfg).unwrap().answer);
    let v = entails_bounded(&kb, &q, 1, Mode::Certain, &cfg).unwrap();
    assert!(!v.answer);
    assert!(!cq_holds(v.witness.as_ref().unwrap(), &q).unwrap());
}

#[test]
fn non_boolean_queries_are_rejected() {
    let q = Query {
        answer_vars: vec!["x".into()],
        exists_vars: vec![],
        atoms: vec![QueryAtom::Concept("A".into(), Term::var("x"))],
    };
    let r = entails_bounded(&WeightedKb::default(), &q, 0, Mode::Certain, &SearchConfig::default());
    assert_eq!(r, Err(SolverError::NotBoolean));
}
