//! Strategy search: small models with a designated individual part `Γ`,
//! found with the SAT engine up to dominance of what a disjunct can observe.
//!
//! A disjunct only sees the atoms over `Γ`, the 1-types of the `Γ` elements
//! and, for each role, whether some element can receive a fresh edge without
//! violating a role inclusion. These facts form the profile of a model. A
//! model whose profile has more true facts and a lower TBox cost yields a
//! weaker disjunct, so the search keeps only dominance-maximal profiles,
//! taken up to renaming of the unlabelled slots.

use std::collections::{BTreeSet, HashMap};

use crate::interp::{cost, one_type, Interpretation, OneType};
use crate::kb::{Assertion, Axiom, Concept, QueryAtom, Role, Term, WeightedKb};
use crate::solver::ground::{AnonMode, GroundSpec, Grounding};
use crate::solver::sat::Lit;
use crate::solver::{hard_types, Mode};

use super::{AboxType, RewriteError, Setup};

/// One disjunct of the rewriting: a model, its individual part and the ABox
/// violations it allows.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    /// Named elements are the `Γ` slots: query individuals under their own
    /// names and `_:s0, _:s1, ...` for the others. Anonymous elements are
    /// witnesses.
    pub model: Interpretation,
    pub gamma: Vec<usize>,
    /// ABox assertions over `Γ`, false in the model, that may occur in the
    /// ABox with exactly the given weight.
    pub violations: Vec<(Assertion, u64)>,
    /// Cost of the model under the TBox alone.
    pub tbox_cost: u64,
}

const SLOT_PREFIX: &str = "_:s";

pub(crate) fn slot_name(i: usize) -> String {
    format!("{SLOT_PREFIX}{i}")
}

/// Index of an unlabelled slot, or `None` for a query individual.
pub(crate) fn slot_index(name: &str) -> Option<u32> {
    name.strip_prefix(SLOT_PREFIX).and_then(|s| s.parse().ok())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Bit {
    Concept(usize, usize),
    Role(usize, usize, usize),
    Exists(usize, usize),
    /// Some element has `∃s⁻` for every `s ⊒ r`.
    Receiver(usize),
}

impl Bit {
    fn permute(self, p: &[usize]) -> Bit {
        match self {
            Bit::Concept(c, d) => Bit::Concept(c, p[d]),
            Bit::Role(r, d, e) => Bit::Role(r, p[d], p[e]),
            Bit::Exists(r, d) => Bit::Exists(r, p[d]),
            Bit::Receiver(r) => Bit::Receiver(r),
        }
    }
}

/// Profile bits for `g` slots, the first `labels` of which are query
/// individuals.
struct Layout {
    concepts: Vec<String>,
    roles: Vec<String>,
    roles_pm: Vec<Role>,
    slots: Vec<String>,
    bits: Vec<Bit>,
    /// For every renaming of the unlabelled slots, the image of each bit.
    perms: Vec<Vec<usize>>,
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = vec![];
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

impl Layout {
    fn new(setup: &Setup, g: usize) -> Layout {
        let concepts: Vec<String> = setup.signature.concepts.difference(&setup.hidden).cloned().collect();
        let roles: Vec<String> = setup.signature.roles.iter().cloned().collect();
        let roles_pm = setup.signature.roles_pm();
        let n_labels = setup.labels.len();
        let slots: Vec<String> = setup.labels.iter().cloned().chain((0..g - n_labels).map(slot_name)).collect();
        let mut bits = vec![];
        for c in 0..concepts.len() {
            bits.extend((0..g).map(|d| Bit::Concept(c, d)));
        }
        for r in 0..roles.len() {
            for d in 0..g {
                bits.extend((0..g).map(|e| Bit::Role(r, d, e)));
            }
        }
        for r in 0..roles_pm.len() {
            bits.extend((0..g).map(|d| Bit::Exists(r, d)));
        }
        bits.extend((0..roles_pm.len()).map(Bit::Receiver));
        let index: HashMap<Bit, usize> = bits.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let free: Vec<usize> = (n_labels..g).collect();
        let perms = permutations(&free)
            .into_iter()
            .map(|p| {
                let full: Vec<usize> = (0..n_labels).chain(p).collect();
                bits.iter().map(|b| index[&b.permute(&full)]).collect()
            })
            .collect();
        Layout { concepts, roles, roles_pm, slots, bits, perms }
    }
}

/// SAT search over models with `Γ` slots and typed witnesses at one TBox
/// cost level.
struct Search<'a> {
    layout: &'a Layout,
    ground: Grounding,
    lits: Vec<Lit>,
}

impl<'a> Search<'a> {
    fn new(setup: &Setup, kb: &WeightedKb, layout: &'a Layout, types: &[OneType], level: u64) -> Result<Self, RewriteError> {
        let spec = GroundSpec {
            extra_named: layout.slots.clone(),
            signature: setup.signature.clone(),
            anon: AnonMode::Typed { types: types.to_vec(), type_sig: setup.signature.clone(), extras: true },
            fix_negative: false,
            protected: Default::default(),
        };
        let mut ground = Grounding::build(kb, &spec)?;
        let q = &setup.query;
        match setup.mode {
            Mode::Possible if q.is_acyclic() => {
                let l = ground.query_lit_acyclic(q);
                ground.sat.add_clause(&[l]);
            }
            Mode::Possible => ground.assert_query_selectors(q),
            Mode::Certain => {
                let l = ground.query_lit_acyclic(q);
                ground.sat.add_clause(&[!l]);
            }
        }
        ground.sat.set_pb_bound(u128::from(level));
        let elem: Vec<usize> = layout.slots.iter().map(|s| ground.element(s).expect("slot is named")).collect();
        let n = ground.num_elements();
        let mut lits = Vec::with_capacity(layout.bits.len());
        for b in &layout.bits {
            let l = match *b {
                Bit::Concept(c, d) => ground.concept_atom(&layout.concepts[c], elem[d]),
                Bit::Role(r, d, e) => ground.role_lit(&Role::new(layout.roles[r].clone()), elem[d], elem[e]),
                Bit::Exists(r, d) => ground.concept_lit(&Concept::Exists(layout.roles_pm[r].clone()), elem[d]),
                Bit::Receiver(r) => {
                    let supers = setup.closure.supers(&layout.roles_pm[r]);
                    let mut alts = vec![];
                    for e in 0..n {
                        let conj: Vec<Lit> =
                            supers.iter().map(|s| ground.concept_lit(&Concept::Exists(s.inverted()), e)).collect();
                        alts.push(ground.and(conj));
                    }
                    ground.or(alts)
                }
            };
            lits.push(l);
        }
        Ok(Search { layout, ground, lits })
    }

    fn read(&self) -> Vec<bool> {
        self.lits.iter().map(|&l| self.ground.sat.model_value(l)).collect()
    }

    /// A model whose profile is maximal among the unblocked ones, with that
    /// profile.
    fn next_maximal(&mut self) -> Option<(Vec<bool>, Interpretation)> {
        if !self.ground.sat.solve(&[]) {
            return None;
        }
        let mut val = self.read();
        let mut stale = false;
        for b in 0..val.len() {
            if val[b] {
                continue;
            }
            let mut assumptions: Vec<Lit> = (0..val.len()).filter(|&i| val[i]).map(|i| self.lits[i]).collect();
            assumptions.push(self.lits[b]);
            if self.ground.sat.solve(&assumptions) {
                val = self.read();
                stale = false;
            } else {
                stale = true;
            }
        }
        if stale {
            let assumptions: Vec<Lit> = (0..val.len()).filter(|&i| val[i]).map(|i| self.lits[i]).collect();
            let ok = self.ground.sat.solve(&assumptions);
            debug_assert!(ok);
        }
        Some((val, self.ground.extract()))
    }

    /// Forbids every model whose profile is contained in a renaming of `p`.
    fn block(&mut self, p: &[bool]) {
        for perm in &self.layout.perms {
            let mut image = vec![false; p.len()];
            for (i, &v) in p.iter().enumerate() {
                if v {
                    image[perm[i]] = true;
                }
            }
            let clause: Vec<Lit> = (0..p.len()).filter(|&i| !image[i]).map(|i| self.lits[i]).collect();
            self.ground.sat.add_clause(&clause);
        }
    }
}

/// Dominance-maximal strategies with `|Γ|` between the number of query
/// individuals and `max_gamma`.
pub fn enumerate_strategies(setup: &Setup, max_gamma: usize) -> Result<Vec<Strategy>, RewriteError> {
    let n_labels = setup.labels.len();
    if max_gamma < n_labels {
        return Err(RewriteError::GammaTooSmall { bound: max_gamma, needed: n_labels });
    }
    let kb = WeightedKb::new(setup.tbox.clone(), vec![]);
    let types = hard_types(&setup.tbox, &setup.signature);
    let mut out = vec![];
    for g in n_labels..=max_gamma {
        let layout = Layout::new(setup, g);
        let mut found: Vec<Vec<bool>> = vec![];
        for level in 0..=setup.k {
            let mut search = Search::new(setup, &kb, &layout, &types, level)?;
            for p in &found {
                search.block(p);
            }
            while let Some((profile, model)) = search.next_maximal() {
                out.extend(variants(setup, &kb, &layout, &profile, model)?);
                search.block(&profile);
                found.push(profile);
            }
        }
    }
    Ok(out)
}

/// Assignments of exact weights to some false `Γ` atoms whose sum fits in
/// `budget`, maximal in that no further atom can be added.
fn weight_assignments(n: usize, budget: u64) -> Vec<Vec<(usize, u64)>> {
    fn go(i: usize, n: usize, left: u64, cur: &mut Vec<(usize, u64)>, out: &mut Vec<Vec<(usize, u64)>>) {
        if i == n {
            if left == 0 || cur.len() == n {
                out.push(cur.clone());
            }
            return;
        }
        go(i + 1, n, left, cur, out);
        for v in 1..=left {
            cur.push((i, v));
            go(i + 1, n, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    go(0, n, budget, &mut vec![], &mut out);
    out
}

fn variants(
    setup: &Setup,
    kb: &WeightedKb,
    layout: &Layout,
    profile: &[bool],
    model: Interpretation,
) -> Result<Vec<Strategy>, RewriteError> {
    let tbox_cost = cost(kb, &model)?.to_u128().expect("model is within the cost bound") as u64;
    let budget = setup.k - tbox_cost;
    let false_atoms: Vec<usize> = layout
        .bits
        .iter()
        .enumerate()
        .filter(|(i, b)| !profile[*i] && matches!(b, Bit::Concept(..) | Bit::Role(..)))
        .map(|(i, _)| i)
        .collect();
    let automorphisms: Vec<&Vec<usize>> = layout
        .perms
        .iter()
        .filter(|perm| (0..profile.len()).all(|i| profile[i] == profile[perm[i]]))
        .collect();
    let gamma: Vec<usize> = (0..model.n_named()).collect();
    let mut out = vec![];
    for assignment in weight_assignments(false_atoms.len(), budget) {
        let v: Vec<(usize, u64)> = assignment.iter().map(|&(i, w)| (false_atoms[i], w)).collect();
        let canonical = automorphisms.iter().all(|perm| {
            let mut image: Vec<(usize, u64)> = v.iter().map(|&(b, w)| (perm[b], w)).collect();
            image.sort_unstable();
            image >= v
        });
        if !canonical {
            continue;
        }
        let violations = v
            .iter()
            .map(|&(b, w)| {
                let asr = match layout.bits[b] {
                    Bit::Concept(c, d) => Assertion::concept(layout.concepts[c].clone(), layout.slots[d].clone()),
                    Bit::Role(r, d, e) => {
                        Assertion::role(layout.roles[r].clone(), layout.slots[d].clone(), layout.slots[e].clone())
                    }
                    _ => unreachable!(),
                };
                (asr, w)
            })
            .collect();
        out.push(Strategy { model: model.clone(), gamma: gamma.clone(), violations, tbox_cost });
    }
    Ok(out)
}

/// Concept `A` when the (normalized) query is `∃y A(y)` in certain mode.
fn excluded_concept(setup: &Setup) -> Option<&str> {
    match (setup.mode, setup.query.atoms.as_slice()) {
        (Mode::Certain, [QueryAtom::Concept(a, Term::Var(_))]) => Some(a),
        _ => None,
    }
}

/// 1-types `t′` over the rewriting signature that a non-`Γ` individual can
/// take next to `model` without adding cost: every CI holds in `t′`, `t′` is
/// closed under role inclusions, each `∃r ∈ t′` can be realized by an edge to
/// a model element that already has `∃s⁻` for all `s ⊒ r`, and in certain
/// mode the query concept of `∃y A(y)` is absent.
pub fn good_types(setup: &Setup, model: &Interpretation) -> Vec<OneType> {
    let sig = &setup.signature;
    let tps: Vec<OneType> = (0..model.len()).map(|d| one_type(model, sig, d)).collect();
    let receiver = |r: &Role| tps.iter().any(|t| setup.closure.supers(r).iter().all(|s| t.has_exists(&s.inverted())));
    let excluded = excluded_concept(setup);
    OneType::all(sig)
        .into_iter()
        .filter(|t| {
            setup.tbox.iter().all(|(ax, _)| match ax {
                Axiom::Ci(l, r) => !t.satisfies(l) || t.satisfies(r),
                Axiom::Ri(..) => true,
            }) && t.exists.iter().all(|r| setup.closure.supers(r).iter().all(|s| t.has_exists(s)) && receiver(r))
                && excluded.is_none_or(|a| !t.has_concept(a))
        })
        .collect()
}

/// A good type (see [`good_types`]) extending the 1-type part of `t`, if any.
pub fn safe_type(setup: &Setup, sigma: &Strategy, t: &AboxType) -> Option<OneType> {
    good_types(setup, &sigma.model)
        .into_iter()
        .find(|g| t.one_type.concepts.is_subset(&g.concepts) && t.one_type.exists.is_subset(&g.exists))
}

/// Good types restricted to ABox predicates, keeping only the maximal ones.
pub(crate) fn maximal_good_types(setup: &Setup, model: &Interpretation) -> Vec<OneType> {
    let projected: BTreeSet<OneType> = good_types(setup, model)
        .into_iter()
        .map(|mut t| {
            t.concepts.retain(|c| !setup.hidden.contains(c));
            t
        })
        .collect();
    let below = |a: &OneType, b: &OneType| a != b && a.concepts.is_subset(&b.concepts) && a.exists.is_subset(&b.exists);
    projected.iter().filter(|t| !projected.iter().any(|u| below(t, u))).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments_are_maximal() {
        assert_eq!(weight_assignments(0, 2), vec![Vec::<(usize, u64)>::new()]);
        assert_eq!(weight_assignments(1, 0), vec![vec![]]);
        assert_eq!(weight_assignments(1, 2), vec![vec![(0, 1)], vec![(0, 2)]]);
        let two = weight_assignments(2, 1);
        assert_eq!(two, vec![vec![(1, 1)], vec![(0, 1)]]);
        for a in weight_assignments(3, 2) {
            let s: u64 = a.iter().map(|x| x.1).sum();
            assert!(s == 2 || a.len() == 3);
        }
    }

    #[test]
    fn slot_names_round_trip() {
        assert_eq!(slot_index(&slot_name(7)), Some(7));
        assert_eq!(slot_index("a"), None);
    }
}
