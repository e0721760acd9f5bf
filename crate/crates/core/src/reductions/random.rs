//! Seeded random instances: weighted KBs, queries, CNFs and graphs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::formats::{Cnf, Graph};
use crate::kb::{Assertion, Axiom, Concept, Query, QueryAtom, Role, Term, WeightedKb};
use crate::solver::Mode;
use crate::weight::Weight;

/// TBox shape of random KBs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TBoxShape {
    /// Inclusions and disjointness between basic concepts.
    Core,
    /// Boolean combinations of basic concepts and role inclusions.
    BoolH,
    /// EL concept inclusions with qualified existentials.
    El,
}

/// Parameters of [`random_kb`].
#[derive(Clone, Debug)]
pub struct KbParams {
    pub max_individuals: usize,
    pub concepts: usize,
    pub roles: usize,
    pub max_tbox: usize,
    pub max_abox: usize,
    /// Weights drawn uniformly for every item.
    pub weights: Vec<Weight>,
    pub shape: TBoxShape,
}

impl Default for KbParams {
    fn default() -> Self {
        KbParams {
            max_individuals: 4,
            concepts: 2,
            roles: 1,
            max_tbox: 3,
            max_abox: 5,
            weights: vec![Weight::finite(1), Weight::finite(2), Weight::Infinite],
            shape: TBoxShape::BoolH,
        }
    }
}

const CONCEPTS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
const ROLES: [&str; 4] = ["r", "s", "p", "q"];
const INDIVIDUALS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn concept_names(n: usize) -> Vec<String> {
    CONCEPTS[..n].iter().map(|s| s.to_string()).collect()
}

pub fn role_names(n: usize) -> Vec<String> {
    ROLES[..n].iter().map(|s| s.to_string()).collect()
}

pub fn individual_names(n: usize) -> Vec<String> {
    INDIVIDUALS[..n].iter().map(|s| s.to_string()).collect()
}

fn random_role<R: Rng>(rng: &mut R, roles: usize, inverse: bool) -> Role {
    let name = ROLES[rng.gen_range(0..roles)];
    if inverse && rng.gen_bool(0.5) {
        Role::inv(name)
    } else {
        Role::new(name)
    }
}

fn random_basic<R: Rng>(rng: &mut R, p: &KbParams) -> Concept {
    if p.roles > 0 && rng.gen_bool(0.4) {
        Concept::Exists(random_role(rng, p.roles, true))
    } else {
        Concept::name(CONCEPTS[rng.gen_range(0..p.concepts.max(1))])
    }
}

fn random_bool_concept<R: Rng>(rng: &mut R, p: &KbParams, depth: usize) -> Concept {
    if depth == 0 || rng.gen_bool(0.5) {
        return match rng.gen_range(0..12) {
            0 => Concept::Top,
            1 => Concept::Bottom,
            _ => random_basic(rng, p),
        };
    }
    match rng.gen_range(0..3) {
        0 => Concept::not(random_bool_concept(rng, p, depth - 1)),
        1 => Concept::and(random_bool_concept(rng, p, depth - 1), random_bool_concept(rng, p, depth - 1)),
        _ => Concept::or(random_bool_concept(rng, p, depth - 1), random_bool_concept(rng, p, depth - 1)),
    }
}

fn random_el_concept<R: Rng>(rng: &mut R, p: &KbParams, depth: usize) -> Concept {
    let atom = |rng: &mut R| {
        if rng.gen_range(0..8) == 0 {
            Concept::Top
        } else {
            Concept::name(CONCEPTS[rng.gen_range(0..p.concepts.max(1))])
        }
    };
    if depth == 0 || rng.gen_bool(0.5) {
        return atom(rng);
    }
    if p.roles > 0 && rng.gen_bool(0.5) {
        Concept::exists_q(random_role(rng, p.roles, false), random_el_concept(rng, p, depth - 1))
    } else {
        Concept::and(random_el_concept(rng, p, depth - 1), random_el_concept(rng, p, depth - 1))
    }
}

fn random_axiom<R: Rng>(rng: &mut R, p: &KbParams) -> Axiom {
    match p.shape {
        TBoxShape::Core => match rng.gen_range(0..4) {
            0 => Axiom::Ci(Concept::and(random_basic(rng, p), random_basic(rng, p)), Concept::Bottom),
            1 => Axiom::Ci(random_basic(rng, p), Concept::not(random_basic(rng, p))),
            _ => Axiom::Ci(random_basic(rng, p), random_basic(rng, p)),
        },
        TBoxShape::BoolH => {
            if p.roles > 0 && rng.gen_range(0..5) == 0 {
                let l = random_role(rng, p.roles, true);
                let r = random_role(rng, p.roles, true);
                Axiom::Ri(l, r)
            } else {
                Axiom::Ci(random_bool_concept(rng, p, 2), random_bool_concept(rng, p, 2))
            }
        }
        TBoxShape::El => Axiom::Ci(random_el_concept(rng, p, 2), random_el_concept(rng, p, 2)),
    }
}

/// A random weighted KB without duplicate items.
pub fn random_kb<R: Rng>(rng: &mut R, p: &KbParams) -> WeightedKb {
    let mut kb = WeightedKb::default();
    let mut seen_ax = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=p.max_tbox) {
        let ax = random_axiom(rng, p);
        if seen_ax.insert(ax.clone()) {
            kb.tbox.push((ax, p.weights.choose(rng).unwrap().clone()));
        }
    }
    let n_ind = rng.gen_range(1..=p.max_individuals.max(1));
    let mut seen = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=p.max_abox) {
        let a = INDIVIDUALS[rng.gen_range(0..n_ind)];
        let asr = if p.roles > 0 && rng.gen_bool(0.4) {
            let b = INDIVIDUALS[rng.gen_range(0..n_ind)];
            Assertion::role(ROLES[rng.gen_range(0..p.roles)], a, b)
        } else {
            Assertion::concept(CONCEPTS[rng.gen_range(0..p.concepts.max(1))], a)
        };
        if seen.insert(asr.clone()) {
            kb.abox.push((asr, p.weights.choose(rng).unwrap().clone()));
        }
    }
    kb
}

/// A random ABox over the given predicates and `individuals` individuals.
pub fn random_abox<R: Rng>(
    rng: &mut R,
    concepts: &[String],
    roles: &[String],
    individuals: usize,
    max_assertions: usize,
    weights: &[Weight],
) -> Vec<(Assertion, Weight)> {
    let mut out = vec![];
    let mut seen = BTreeSet::new();
    let n = individuals.max(1);
    for _ in 0..rng.gen_range(0..=max_assertions) {
        let a = INDIVIDUALS[rng.gen_range(0..n)];
        let asr = if !roles.is_empty() && (concepts.is_empty() || rng.gen_bool(0.4)) {
            let b = INDIVIDUALS[rng.gen_range(0..n)];
            Assertion::role(roles.choose(rng).unwrap().clone(), a, b)
        } else if !concepts.is_empty() {
            Assertion::concept(concepts.choose(rng).unwrap().clone(), a)
        } else {
            continue;
        };
        if seen.insert(asr.clone()) {
            out.push((asr, weights.choose(rng).unwrap().clone()));
        }
    }
    out
}

fn random_term<R: Rng>(rng: &mut R, vars: &[&str], individuals: usize) -> Term {
    if individuals > 0 && rng.gen_range(0..3) == 0 {
        Term::ind(INDIVIDUALS[rng.gen_range(0..individuals)])
    } else {
        Term::var(*vars.choose(rng).unwrap())
    }
}

/// A random Boolean CQ with 1 to `max_atoms` atoms over variables `y0, y1,
/// ...` and the first `individuals` individuals.
pub fn random_bcq<R: Rng>(rng: &mut R, concepts: usize, roles: usize, individuals: usize, max_atoms: usize) -> Query {
    let vars = ["y0", "y1", "y2"];
    let n_atoms = rng.gen_range(1..=max_atoms.max(1));
    let mut atoms = vec![];
    for _ in 0..n_atoms {
        let atom = if roles > 0 && (concepts == 0 || rng.gen_bool(0.5)) {
            QueryAtom::Role(
                ROLES[rng.gen_range(0..roles)].to_string(),
                random_term(rng, &vars, individuals),
                random_term(rng, &vars, individuals),
            )
        } else {
            QueryAtom::Concept(CONCEPTS[rng.gen_range(0..concepts.max(1))].to_string(), random_term(rng, &vars, individuals))
        };
        if !atoms.contains(&atom) {
            atoms.push(atom);
        }
    }
    let q = Query { answer_vars: vec![], exists_vars: vec![], atoms };
    let used: Vec<String> = q.terms().into_iter().filter(|t| t.is_var()).map(|t| t.name().to_string()).collect();
    Query { exists_vars: used, ..q }
}

/// A random Boolean instance query of any shape: `A(a)`, `∃y A(y)`,
/// `r(a,b)`, `∃y r(a,y)`, `∃y r(y,a)` or `∃x∃y r(x,y)`.
pub fn random_iq<R: Rng>(rng: &mut R, concepts: usize, roles: usize, individuals: usize) -> Query {
    let ind = |rng: &mut R| Term::ind(INDIVIDUALS[rng.gen_range(0..individuals.max(1))]);
    let shape = if roles == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..6) };
    let concept = CONCEPTS[rng.gen_range(0..concepts.max(1))].to_string();
    let role = ROLES[rng.gen_range(0..roles.max(1))].to_string();
    match shape {
        0 => Query::boolean(&[], vec![QueryAtom::Concept(concept, ind(rng))]),
        1 => Query::boolean(&["y"], vec![QueryAtom::Concept(concept, Term::var("y"))]),
        2 => Query::boolean(&[], vec![QueryAtom::Role(role, ind(rng), ind(rng))]),
        3 => Query::boolean(&["y"], vec![QueryAtom::Role(role, ind(rng), Term::var("y"))]),
        4 => Query::boolean(&["y"], vec![QueryAtom::Role(role, Term::var("y"), ind(rng))]),
        _ => Query::boolean(&["x", "y"], vec![QueryAtom::Role(role, Term::var("x"), Term::var("y"))]),
    }
}

/// A random 3-CNF with 1 to `max_vars` variables and 1 to `max_clauses`
/// clauses.
pub fn random_cnf<R: Rng>(rng: &mut R, max_vars: usize, max_clauses: usize) -> Cnf {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(1..=max_clauses);
    let clauses = (0..m)
        .map(|_| {
            let mut c = [0i32; 3];
            for l in c.iter_mut() {
                let v = rng.gen_range(1..=n as i32);
                *l = if rng.gen_bool(0.5) { v } else { -v };
            }
            c
        })
        .collect();
    Cnf { num_vars: n, clauses }
}

/// A random simple graph with 1 to `max_vertices` vertices.
pub fn random_graph<R: Rng>(rng: &mut R, max_vertices: usize, edge_prob: f64) -> Graph {
    let n = rng.gen_range(1..=max_vertices);
    let mut edges = BTreeSet::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.insert((u, v));
            }
        }
    }
    Graph { vertices: (0..n).map(|i| format!("n{i}")).collect(), edges }
}

/// One instance of the rewriting agreement harness: a DL-Lite_bool^H KB with
/// at most 5 axioms, 4 individuals, 2 concept names and 1 role name, weights in
/// `{1, 2, ∞}`, `k ∈ {1, 2}`, and a BCQ of at most 2 atoms (possible mode) or
/// a Boolean IQ of any shape (certain mode).
pub fn harness_instance<R: Rng>(rng: &mut R, mode: Mode) -> (WeightedKb, Query, u64) {
    let p = KbParams { shape: TBoxShape::BoolH, max_individuals: 4, concepts: 2, roles: 1, max_tbox: 5, ..KbParams::default() };
    let kb = random_kb(rng, &p);
    let n = kb.individuals().len().max(1);
    let q = match mode {
        Mode::Possible => random_bcq(rng, 2, 1, n, 2),
        Mode::Certain => random_iq(rng, 2, 1, n),
    };
    let k = rng.gen_range(1..=2);
    (kb, q, k)
}
