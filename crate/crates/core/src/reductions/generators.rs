//! Hard instance families with known answers: satisfiability from 3-SAT,
//! certain answers from 3-DNF tautology, satisfiability from 3-colouring and
//! optimal-cost answers from the lexicographically maximal model of a CNF.

use num_bigint::BigUint;
use num_traits::One;

use super::formats::{Cnf, Dnf, Graph};
use crate::kb::{Assertion, Axiom, Concept, Query, QueryAtom, Role, Term, WeightedKb};
use crate::weight::Weight;

fn inf() -> Weight {
    Weight::Infinite
}

fn name(n: &str) -> Concept {
    Concept::name(n)
}

fn ex(r: &str, c: &str) -> Concept {
    Concept::exists_q(Role::new(r), name(c))
}

fn var_name(l: i32) -> String {
    format!("v{}", l.unsigned_abs())
}

/// ABox shared by the propositional encodings: `a` stands for false, each
/// clause or term `c_i` points to its literals through `pos_j` / `neg_j`.
fn literal_abox(num_vars: usize, rows: &[[i32; 3]]) -> Vec<(Assertion, Weight)> {
    let mut abox = vec![(Assertion::concept("False", "a"), inf()), (Assertion::concept("Bool", "a"), inf())];
    for v in 1..=num_vars {
        abox.push((Assertion::concept("Var", format!("v{v}")), inf()));
    }
    for (i, row) in rows.iter().enumerate() {
        let c = format!("c{}", i + 1);
        abox.push((Assertion::role("clause", "a", c.clone()), inf()));
        for (j, &l) in row.iter().enumerate() {
            let role = if l > 0 { format!("pos{}", j + 1) } else { format!("neg{}", j + 1) };
            abox.push((Assertion::role(role, c.clone(), var_name(l)), inf()));
        }
    }
    abox
}

/// The eight `∃lit_1.X ⊓ ∃lit_2.Y ⊓ ∃lit_3.Z ⊑ target` axioms, where a
/// positive slot tests `pos_j` against `on_pos` and a negative one `neg_j`
/// against `on_neg`.
fn sign_axioms(on_pos: &str, on_neg: &str, target: &str) -> Vec<(Axiom, Weight)> {
    (0..8u8)
        .map(|mask| {
            let parts = (0..3).map(|j| {
                if mask >> (2 - j) & 1 == 0 {
                    ex(&format!("pos{}", j + 1), on_pos)
                } else {
                    ex(&format!("neg{}", j + 1), on_neg)
                }
            });
            (Axiom::Ci(Concept::and_all(parts), name(target)), inf())
        })
        .collect()
}

/// EL_⊥ KB that is 1-satisfiable iff `phi` is satisfiable.
pub fn gen_3sat(phi: &Cnf) -> WeightedKb {
    let mut tbox = vec![
        (Axiom::Ci(name("Bool"), name("True")), Weight::finite(1)),
        (Axiom::Ci(Concept::and(name("True"), name("False")), Concept::Bottom), inf()),
        (Axiom::Ci(name("Var"), ex("val", "Bool")), inf()),
        (Axiom::Ci(ex("val", "True"), name("True")), inf()),
        (Axiom::Ci(ex("val", "False"), name("False")), inf()),
        (Axiom::Ci(ex("clause", "False"), name("True")), inf()),
    ];
    tbox.extend(sign_axioms("False", "True", "False"));
    WeightedKb::new(tbox, literal_abox(phi.num_vars, &phi.clauses))
}

/// EL KB and `True(a)` such that `phi` is a tautology iff the query is a
/// certain answer at cost 1.
pub fn gen_3dnf_certain(phi: &Dnf) -> (WeightedKb, Query, u64) {
    let mut tbox = vec![
        (Axiom::Ci(name("Bool"), name("True")), Weight::finite(1)),
        (Axiom::Ci(name("Var"), ex("val", "Bool")), inf()),
        (Axiom::Ci(ex("val", "True"), name("True")), inf()),
        (Axiom::Ci(ex("val", "False"), name("False")), inf()),
        (Axiom::Ci(ex("clause", "True"), name("True")), inf()),
    ];
    tbox.extend(sign_axioms("True", "False", "True"));
    let q = Query::boolean(&[], vec![QueryAtom::Concept("True".into(), Term::ind("a"))]);
    (WeightedKb::new(tbox, literal_abox(phi.num_vars, &phi.terms)), q, 1)
}

const COLOURS: [&str; 3] = ["r", "g", "b"];

/// DL-Lite_core KB that is `4|E|`-satisfiable iff `g` is 3-colourable. Each
/// edge is oriented from its smaller vertex index.
pub fn gen_3col(g: &Graph) -> (WeightedKb, u64) {
    let mut tbox = vec![];
    for (x, s) in COLOURS.iter().enumerate() {
        for t in &COLOURS[x + 1..] {
            for i in 1..=2 {
                for j in 1..=2 {
                    let l = Concept::and(Concept::exists(Role::new(format!("{s}{i}"))), Concept::exists(Role::new(format!("{t}{j}"))));
                    tbox.push((Axiom::Ci(l, Concept::Bottom), inf()));
                }
            }
        }
        let l = Concept::and(Concept::exists(Role::inv(format!("{s}1"))), Concept::exists(Role::inv(format!("{s}2"))));
        tbox.push((Axiom::Ci(l, Concept::Bottom), inf()));
    }
    let mut abox = vec![];
    for &(u, v) in &g.edges {
        let (un, vn) = (&g.vertices[u], &g.vertices[v]);
        let e = format!("e_{un}_{vn}");
        for s in COLOURS {
            abox.push((Assertion::role(format!("{s}1"), un.clone(), e.clone()), Weight::finite(1)));
            abox.push((Assertion::role(format!("{s}2"), vn.clone(), e.clone()), Weight::finite(1)));
        }
    }
    (WeightedKb::new(tbox, abox), 4 * g.edges.len() as u64)
}

/// DL-Lite_core KB and `T(x_index)` whose optimal-cost answer (certain or
/// possible) is the value of `x_index` in the lexicographically maximal model
/// of `phi` under the order `x_1, ..., x_n`.
///
/// `phi` must be satisfiable; this is not checked. Literal assertions weigh
/// `u^n` and `T(x_i)` weighs `u^(n-i)`, with `u = 3m + 1`.
pub fn gen_lexmax(phi: &Cnf, index: usize) -> (WeightedKb, Query) {
    let n = phi.num_vars;
    let u = BigUint::from(3 * phi.clauses.len() + 1);
    let pow = |e: usize| Weight::Finite((0..e).fold(BigUint::one(), |acc, _| acc * &u));
    let role = |sign: char, l: usize| Role::new(format!("{sign}{l}"));
    let not = Concept::not;
    let mut tbox = vec![];
    for l in 1..=3 {
        tbox.push((Axiom::Ci(Concept::exists(role('n', l).inverted()), not(name("T"))), inf()));
    }
    for l in 1..=3 {
        for l2 in 1..=3 {
            tbox.push((Axiom::Ci(Concept::exists(role('p', l)), not(Concept::exists(role('n', l2)))), inf()));
            tbox.push((Axiom::Ci(Concept::exists(role('p', l).inverted()), not(Concept::exists(role('n', l2).inverted()))), inf()));
            if l != l2 {
                tbox.push((Axiom::Ci(Concept::exists(role('p', l)), not(Concept::exists(role('p', l2)))), inf()));
                tbox.push((Axiom::Ci(Concept::exists(role('n', l)), not(Concept::exists(role('n', l2)))), inf()));
            }
        }
    }
    let mut abox = vec![];
    for (j, clause) in phi.clauses.iter().enumerate() {
        let c = format!("c{}", j + 1);
        for (l, &lit) in clause.iter().enumerate() {
            let sign = if lit > 0 { 'p' } else { 'n' };
            let x = format!("x{}", lit.unsigned_abs());
            let a = Assertion::role(format!("{sign}{}", l + 1), c.clone(), x);
            if !abox.iter().any(|(b, _)| *b == a) {
                abox.push((a, pow(n)));
            }
        }
    }
    for i in 1..=n {
        abox.push((Assertion::concept("T", format!("x{i}")), pow(n - i)));
    }
    let q = Query::boolean(&[], vec![QueryAtom::Concept("T".into(), Term::ind(format!("x{index}")))]);
    (WeightedKb::new(tbox, abox), q)
}

fn sign_label(s: u8) -> String {
    (0..3).map(|j| if s >> (2 - j) & 1 == 1 { '1' } else { '0' }).collect()
}

/// DL-Lite_core KB and a connected acyclic Boolean CQ such that `phi` is a
/// tautology iff the query is a certain answer at cost 1.
///
/// A term's sign vector `s` has `s_j = 1` when its `j`th literal is positive.
/// The hub `a_s` links to the terms with vector `s`; the other hubs and `d`
/// give trivial matches for the blocks of the query that are not in use.
pub fn gen_3dnf_cq_certain(phi: &Dnf) -> (WeightedKb, Query, u64) {
    let tbox = vec![
        (Axiom::Ci(name("Bool"), name("True")), Weight::finite(1)),
        (Axiom::Ci(name("Var"), Concept::exists(Role::new("val"))), inf()),
        (Axiom::Ci(Concept::exists(Role::inv("val")), name("Bool")), inf()),
    ];
    let mut abox = vec![];
    let mut add = |a: Assertion| abox.push((a, inf()));
    add(Assertion::concept("False", "a"));
    add(Assertion::concept("True", "b"));
    add(Assertion::concept("Bool", "a"));
    add(Assertion::concept("Bool", "b"));
    add(Assertion::role("val", "a", "a"));
    add(Assertion::role("val", "a", "b"));
    add(Assertion::role("val", "d", "a"));
    for v in 1..=phi.num_vars {
        add(Assertion::concept("Var", format!("v{v}")));
    }
    let clause = |s: u8| format!("clause_{}", sign_label(s));
    let lit = |j: usize, p: u8| format!("lit_{j}_{p}");
    let hub = |s: u8| format!("a_{}", sign_label(s));
    let mut lit_edges = vec![];
    for (i, term) in phi.terms.iter().enumerate() {
        let c = format!("c{}", i + 1);
        let s = term.iter().fold(0u8, |acc, &l| acc << 1 | u8::from(l > 0));
        add(Assertion::role(clause(s), hub(s), c.clone()));
        for (j, &l) in term.iter().enumerate() {
            let a = Assertion::role(lit(j + 1, u8::from(l > 0)), c.clone(), var_name(l));
            if !lit_edges.contains(&a) {
                lit_edges.push(a);
            }
        }
    }
    for a in lit_edges {
        add(a);
    }
    for s in 0..8u8 {
        for s2 in 0..8u8 {
            if s != s2 {
                add(Assertion::role(clause(s), hub(s2), "a"));
            }
        }
        add(Assertion::role(clause(s), "d", "d"));
    }
    for j in 1..=3 {
        for p in 0..2u8 {
            add(Assertion::role(lit(j, p), "a", "a"));
            add(Assertion::role(lit(j, p), "d", "d"));
        }
    }

    let mut vars = vec!["y".to_string()];
    let mut atoms = vec![];
    for s in 0..8u8 {
        let label = sign_label(s);
        let y0 = format!("y_{label}_0");
        atoms.push(QueryAtom::Role(clause(s), Term::var("y"), Term::var(y0.clone())));
        vars.push(y0.clone());
        for j in 1..=3usize {
            let bit = s >> (3 - j) & 1;
            let (yj, yj2) = (format!("y_{label}_{j}"), format!("z_{label}_{j}"));
            atoms.push(QueryAtom::Role(lit(j, bit), Term::var(y0.clone()), Term::var(yj.clone())));
            atoms.push(QueryAtom::Role("val".into(), Term::var(yj.clone()), Term::var(yj2.clone())));
            let c = if bit == 1 { "True" } else { "False" };
            atoms.push(QueryAtom::Concept(c.into(), Term::var(yj2.clone())));
            vars.push(yj);
            vars.push(yj2);
        }
    }
    let q = Query::new(vec![], vars, atoms);
    (WeightedKb::new(tbox, abox), q, 1)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::kb::{validate_kb, Dialect};
    use crate::reductions::random::{random_cnf, random_graph};
    use crate::solver::{entails_bounded, entails_opt, k_satisfiable, Mode, SearchConfig};

    fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u32..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
    }

    fn satisfiable(phi: &Cnf) -> bool {
        assignments(phi.num_vars).any(|a| phi.eval(&a))
    }

    fn tautology(phi: &Dnf) -> bool {
        assignments(phi.num_vars).all(|a| phi.eval(&a))
    }

    fn colourable(g: &Graph) -> bool {
        let n = g.vertices.len();
        (0..3usize.pow(n as u32)).any(|mut code| {
            let colour: Vec<usize> = (0..n)
                .map(|_| {
                    let c = code % 3;
                    code /= 3;
                    c
                })
                .collect();
            g.is_proper(&colour)
        })
    }

    /// Lexicographically largest model, with `true > false` on `x_1` first.
    fn lexmax(phi: &Cnf) -> Option<Vec<bool>> {
        let n = phi.num_vars;
        (0u32..1 << n)
            .rev()
            .map(|m| (0..n).map(|i| m >> (n - 1 - i) & 1 == 1).collect::<Vec<bool>>())
            .find(|a| phi.eval(a))
    }

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    fn sat(kb: &WeightedKb, k: u64) -> bool {
        k_satisfiable(kb, k, &cfg()).unwrap().answer
    }

    fn certain(kb: &WeightedKb, q: &Query, k: u64) -> bool {
        entails_bounded(kb, q, k, Mode::Certain, &cfg()).unwrap().answer
    }

    fn dnf(n: usize, terms: &[Vec<i32>]) -> Dnf {
        Dnf::new(n, terms).unwrap()
    }

    #[test]
    fn three_sat_examples() {
        let yes = Cnf::new(1, &[vec![1]]).unwrap();
        let no = Cnf::new(1, &[vec![1], vec![-1]]).unwrap();
        assert!(sat(&gen_3sat(&yes), 1));
        assert!(!sat(&gen_3sat(&no), 1));
        assert_eq!(validate_kb(&gen_3sat(&no)).dialect, Dialect::ElBot);
    }

    #[test]
    fn three_sat_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut seen = [0, 0];
        for _ in 0..25 {
            let phi = random_cnf(&mut rng, 3, 6);
            let expected = satisfiable(&phi);
            seen[usize::from(expected)] += 1;
            assert_eq!(sat(&gen_3sat(&phi), 1), expected, "{phi:?}");
        }
        assert!(seen[0] > 0 && seen[1] > 0);
    }

    #[test]
    fn dnf_iq_examples() {
        let taut = dnf(1, &[vec![1], vec![-1]]);
        let not_taut = dnf(1, &[vec![1]]);
        let (kb, q, k) = gen_3dnf_certain(&taut);
        assert!(certain(&kb, &q, k));
        let (kb, q, k) = gen_3dnf_certain(&not_taut);
        assert!(!certain(&kb, &q, k));
        assert_eq!(validate_kb(&kb).dialect, Dialect::El);
        assert!(kb.tbox.iter().all(|(ax, _)| !ax.to_string().contains("bot")));
    }

    #[test]
    fn dnf_iq_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let c = random_cnf(&mut rng, 3, 5);
            let phi = Dnf { num_vars: c.num_vars, terms: c.clauses };
            let (kb, q, k) = gen_3dnf_certain(&phi);
            assert_eq!(certain(&kb, &q, k), tautology(&phi), "{phi:?}");
        }
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        let mut g = Graph { vertices: (0..n).map(|i| format!("n{i}")).collect(), ..Graph::default() };
        for &(u, v) in edges {
            g.add_edge(u, v).unwrap();
        }
        g
    }

    #[test]
    fn colouring_examples() {
        let (kb, k) = gen_3col(&graph(2, &[(0, 1)]));
        assert_eq!(k, 4);
        assert!(sat(&kb, 4) && !sat(&kb, 3));
        let (kb, k) = gen_3col(&graph(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!(k, 12);
        assert!(sat(&kb, k));
        let k4: Vec<(usize, usize)> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        let (kb, k) = gen_3col(&graph(4, &k4));
        assert_eq!(k, 24);
        assert!(!sat(&kb, k));
        assert_eq!(validate_kb(&kb).dialect, Dialect::DlLiteCore);
    }

    #[test]
    fn colouring_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 5, 0.6);
            let (kb, k) = gen_3col(&g);
            assert_eq!(sat(&kb, k), colourable(&g), "{g:?}");
        }
    }

    #[test]
    fn lexmax_example_and_weights() {
        let phi = Cnf::new(2, &[vec![1, 2]]).unwrap();
        let (kb, q) = gen_lexmax(&phi, 1);
        assert!(entails_opt(&kb, &q, Mode::Certain, &cfg()).unwrap().answer);
        assert!(entails_opt(&kb, &q, Mode::Possible, &cfg()).unwrap().answer);
        assert_eq!(validate_kb(&kb).dialect, Dialect::DlLiteCore);
        let t_weights: Vec<Weight> =
            kb.abox.iter().filter(|(a, _)| a.predicate() == "T").map(|(_, w)| w.clone()).collect();
        assert_eq!(t_weights, vec![Weight::finite(4), Weight::finite(1)]);
        assert!(kb.abox.iter().filter(|(a, _)| a.predicate() != "T").all(|(_, w)| *w == Weight::finite(16)));
    }

    #[test]
    fn lexmax_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let mut done = 0;
        while done < 15 {
            let phi = random_cnf(&mut rng, 3, 4);
            let Some(best) = lexmax(&phi) else { continue };
            for i in 1..=phi.num_vars {
                let (kb, q) = gen_lexmax(&phi, i);
                let c = entails_opt(&kb, &q, Mode::Certain, &cfg()).unwrap().answer;
                let p = entails_opt(&kb, &q, Mode::Possible, &cfg()).unwrap().answer;
                assert_eq!(c, best[i - 1], "{phi:?} x{i}");
                assert_eq!(p, c);
            }
            done += 1;
        }
    }

    #[test]
    fn dnf_cq_shape() {
        let (kb, q, k) = gen_3dnf_cq_certain(&dnf(1, &[vec![1]]));
        assert_eq!(k, 1);
        assert!(q.is_boolean() && q.is_connected() && q.is_acyclic());
        assert_eq!(q.atoms.len(), 8 * 10);
        assert_eq!(validate_kb(&kb).dialect, Dialect::DlLiteCore);
        assert!(kb.tbox.iter().all(|(ax, _)| !ax.to_string().contains("bot")));
    }

    #[test]
    fn dnf_cq_examples() {
        let cases = [
            (dnf(1, &[vec![1], vec![-1]]), true),
            (dnf(1, &[vec![1]]), false),
            (dnf(2, &[vec![1, 2], vec![-1], vec![1, -2]]), true),
            (dnf(2, &[vec![1, 2], vec![-1, -2]]), false),
            (dnf(2, &[vec![1, -2, 1], vec![-1, 2, 2], vec![1, 2, 1], vec![-1, -2, -2]]), true),
        ];
        for (phi, expected) in cases {
            assert_eq!(tautology(&phi), expected);
            let (kb, q, k) = gen_3dnf_cq_certain(&phi);
            assert_eq!(certain(&kb, &q, k), expected, "{phi:?}");
        }
    }

    #[test]
    fn dnf_cq_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..12 {
            let c = random_cnf(&mut rng, 2, 4);
            let phi = Dnf { num_vars: c.num_vars, terms: c.clauses };
            let (kb, q, k) = gen_3dnf_cq_certain(&phi);
            assert_eq!(certain(&kb, &q, k), tautology(&phi), "{phi:?}");
        }
    }
}
