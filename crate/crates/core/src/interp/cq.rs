//! Backtracking homomorphism search for conjunctive queries.

use std::collections::HashMap;

use super::{InterpError, Interpretation};
use crate::kb::{Query, QueryAtom, Term};

#[derive(Clone, Copy)]
enum Slot {
    Elem(usize),
    Var(usize),
}

struct Atom<'a> {
    pred: &'a str,
    args: Vec<Slot>,
}

struct Matcher<'a> {
    i: &'a Interpretation,
    atoms: Vec<Atom<'a>>,
    /// Atoms mentioning each variable.
    occurs: Vec<Vec<usize>>,
    assign: Vec<Option<usize>>,
}

impl Matcher<'_> {
    fn value(&self, s: Slot) -> Option<usize> {
        match s {
            Slot::Elem(e) => Some(e),
            Slot::Var(v) => self.assign[v],
        }
    }

    /// `Some(false)` when the atom is fully assigned and fails.
    fn check(&self, a: &Atom) -> Option<bool> {
        match a.args.as_slice() {
            [t] => Some(self.i.has_concept(a.pred, self.value(*t)?)),
            [s, t] => Some(self.i.has_role(a.pred, self.value(*s)?, self.value(*t)?)),
            _ => unreachable!(),
        }
    }

    fn unassigned_neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.occurs[v].iter().flat_map(move |&a| {
            self.atoms[a].args.iter().filter_map(|s| match s {
                Slot::Var(w) if self.assign[*w].is_none() => Some(*w),
                _ => None,
            })
        })
    }

    /// Splits unassigned variables into groups linked by atoms.
    fn components(&self, vars: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.assign.len()];
        let mut out = vec![];
        for &v in vars {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            let mut comp = vec![v];
            let mut k = 0;
            while k < comp.len() {
                let u = comp[k];
                k += 1;
                let next: Vec<usize> = self.unassigned_neighbours(u).collect();
                for w in next {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Number of atoms tying `v` to fixed elements.
    fn anchored(&self, v: usize) -> usize {
        self.occurs[v]
            .iter()
            .filter(|&&a| self.atoms[a].args.iter().all(|s| matches!(s, Slot::Var(w) if *w == v) || self.value(*s).is_some()))
            .count()
    }

    fn solve(&mut self, vars: &[usize]) -> bool {
        if vars.is_empty() {
            return true;
        }
        let comps = self.components(vars);
        if comps.len() > 1 {
            for c in &comps {
                if !self.solve(c) {
                    for &v in vars {
                        self.assign[v] = None;
                    }
                    return false;
                }
            }
            return true;
        }
        let v = *vars.iter().max_by_key(|&&v| (self.anchored(v), std::cmp::Reverse(v))).unwrap();
        let rest: Vec<usize> = vars.iter().copied().filter(|&w| w != v).collect();
        for e in 0..self.i.len() {
            self.assign[v] = Some(e);
            if self.occurs[v].iter().all(|&a| self.check(&self.atoms[a]) != Some(false)) && self.solve(&rest) {
                return true;
            }
        }
        self.assign[v] = None;
        false
    }
}

/// Finds a match of `q` in `i` that sends the answer variables to `answer`
/// (one element per answer variable). Returns the full variable assignment.
///
/// Variables are chosen next to already fixed terms, and parts of the query
/// that no longer share a free variable are matched independently.
pub fn cq_match(
    i: &Interpretation,
    q: &Query,
    answer: &[usize],
) -> Result<Option<HashMap<String, usize>>, InterpError> {
    assert_eq!(answer.len(), q.answer_vars.len(), "answer tuple arity mismatch");
    for a in q.individuals() {
        if i.find(&a).is_none() {
            return Err(InterpError::UnknownIndividual(a));
        }
    }
    let mut names: Vec<String> = q.answer_vars.clone();
    for t in q.terms() {
        if let Term::Var(v) = t {
            if !names.contains(&v) {
                names.push(v);
            }
        }
    }
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(k, v)| (v.as_str(), k)).collect();
    let slot = |t: &Term| match t {
        Term::Ind(a) => Slot::Elem(i.find(a).unwrap()),
        Term::Var(v) => Slot::Var(index[v.as_str()]),
    };
    let atoms: Vec<Atom> = q
        .atoms
        .iter()
        .map(|a| match a {
            QueryAtom::Concept(c, t) => Atom { pred: c, args: vec![slot(t)] },
            QueryAtom::Role(r, s, t) => Atom { pred: r, args: vec![slot(s), slot(t)] },
        })
        .collect();
    let mut occurs = vec![vec![]; names.len()];
    for (k, a) in atoms.iter().enumerate() {
        for s in &a.args {
            if let Slot::Var(v) = s {
                if !occurs[*v].contains(&k) {
                    occurs[*v].push(k);
                }
            }
        }
    }
    let mut assign = vec![None; names.len()];
    for (k, &e) in answer.iter().enumerate() {
        assign[k] = Some(e);
    }
    let mut m = Matcher { i, atoms, occurs, assign };
    if m.atoms.iter().any(|a| m.check(a) == Some(false)) {
        return Ok(None);
    }
    let free: Vec<usize> = (answer.len()..names.len()).collect();
    if !m.solve(&free) {
        return Ok(None);
    }
    Ok(Some(names.into_iter().zip(m.assign).map(|(v, e)| (v, e.unwrap())).collect()))
}

/// Whether the Boolean query `q` holds in `i`.
pub fn cq_holds(i: &Interpretation, q: &Query) -> Result<bool, InterpError> {
    if !q.is_boolean() {
        return Err(InterpError::NotBoolean);
    }
    Ok(cq_match(i, q, &[])?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Interpretation {
        let mut i = Interpretation::new(["a".to_string(), "b".to_string()], 1);
        i.add_role("r", 0, 1);
        i.add_role("r", 1, 2);
        i.add_concept("A", 2);
        i
    }

    #[test]
    fn finds_paths_through_anonymous_elements() {
        let i = chain();
        let q = Query::boolean(
            &["y", "z"],
            vec![
                QueryAtom::Role("r".into(), Term::ind("a"), Term::var("y")),
                QueryAtom::Role("r".into(), Term::var("y"), Term::var("z")),
                QueryAtom::Concept("A".into(), Term::var("z")),
            ],
        );
        let m = cq_match(&i, &q, &[]).unwrap().unwrap();
        assert_eq!(m["y"], 1);
        assert_eq!(m["z"], 2);
    }

    #[test]
    fn respects_answer_tuple() {
        let i = chain();
        let q = Query::new(
            vec!["x".into()],
            vec!["y".into()],
            vec![QueryAtom::Role("r".into(), Term::var("x"), Term::var("y"))],
        );
        assert!(cq_match(&i, &q, &[0]).unwrap().is_some());
        assert!(cq_match(&i, &q, &[2]).unwrap().is_none());
        assert_eq!(cq_holds(&i, &q), Err(InterpError::NotBoolean));
    }

    #[test]
    fn empty_query_always_matches() {
        let i = chain();
        assert!(cq_holds(&i, &Query::default()).unwrap());
    }

    #[test]
    fn unknown_individual_is_reported() {
        let i = chain();
        let q = Query::boolean(&[], vec![QueryAtom::Concept("A".into(), Term::ind("zz"))]);
        assert!(matches!(cq_holds(&i, &q), Err(InterpError::UnknownIndividual(_))));
    }
}
