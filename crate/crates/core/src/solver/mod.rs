//! Exact bounded-domain solver for bounded-cost satisfiability, bounded-cost
//! and optimal-cost query entailment, and optimal cost.
//!
//! The KB is grounded over its individuals, the query individuals and a set
//! of anonymous elements, then handed to a CDCL engine whose weighted
//! constraint caps the cost. For DL-Lite TBoxes the anonymous elements are one
//! witness per admissible TBox 1-type, which is exhaustive for satisfiability,
//! possible CQ answering and certain IQ answering. Other cases use a capped
//! number of free elements and report `complete = false`.

mod enumerate;
pub mod ground;
pub mod sat;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::interp::{self, cq_holds, cq_match, InterpError, Interpretation, OneType};
use crate::kb::{validate_kb, Axiom, Dialect, Query, Signature, WeightedKb};
use crate::weight::{Cost, Weight};

pub use enumerate::{enumerate_interpretations, enumerate_over};
use ground::{AnonMode, GroundSpec, Grounding, Polarity};

/// Certain or possible answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Certain,
    Possible,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Certain => "certain",
            Mode::Possible => "possible",
        }
    }
}

/// Search parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Number of free anonymous elements when typed witnesses are not used.
    pub max_anonymous: usize,
    /// Fail with [`SolverError::Incomplete`] instead of returning a verdict
    /// that is not backed by a sufficient domain.
    pub exhaustive: bool,
    /// Seed reserved for randomized heuristics; the search is deterministic.
    pub seed: u64,
    /// Largest number of typed witnesses before falling back to free ones.
    pub typed_limit: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_anonymous: 2, exhaustive: false, seed: 0, typed_limit: 64 }
    }
}

/// Answer of a decision procedure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub answer: bool,
    /// A model (for satisfiability and possible answers) or a countermodel
    /// (for a negative certain answer).
    pub witness: Option<Interpretation>,
    /// Whether the searched domain is large enough for the answer to be exact.
    pub complete: bool,
}

/// Result of [`optimal_cost`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    pub cost: Cost,
    pub witness: Option<Interpretation>,
    pub complete: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("invalid KB: {}", .0.join("; "))]
    InvalidKb(Vec<String>),
    #[error("a finite weight does not fit the solver's 128-bit arithmetic")]
    WeightTooLarge,
    #[error("the query must be Boolean")]
    NotBoolean,
    #[error("search is not exhaustive: {0}")]
    Incomplete(String),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("internal check failed: {0}")]
    Internal(String),
}

/// Reasoning task, for [`domain_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Satisfiability,
    Possible,
    Certain,
    Optimal,
}

/// Number of anonymous elements that suffices for a task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainBound {
    Elements(BigUint),
    Unknown,
}

fn concept_size(c: &crate::kb::Concept) -> usize {
    let mut n = 0;
    c.visit_polarity(true, &mut |_, _| n += 1);
    n
}

/// Syntactic size of a TBox: number of concept nodes plus two per role
/// inclusion.
pub fn tbox_size(tbox: &[(Axiom, Weight)]) -> usize {
    tbox.iter()
        .map(|(a, _)| match a {
            Axiom::Ci(l, r) => concept_size(l) + concept_size(r),
            Axiom::Ri(..) => 2,
        })
        .sum()
}

/// Domain-size bound on anonymous elements: `2^{|N_C|+2|N_R|}` over the TBox
/// signature for DL-Lite; `|Ind| + |T| + 2^{2|T|²}` for ALCHIO satisfiability,
/// possible answers and optimal cost; unknown for ALCHIO certain answers.
pub fn domain_bound(kb: &WeightedKb, task: Task) -> DomainBound {
    let sig = kb.tbox_signature();
    if validate_kb(kb).dialect.is_dllite() || kb.tbox.is_empty() {
        let bits = sig.concepts.len() + 2 * sig.roles.len();
        return DomainBound::Elements(BigUint::one() << bits);
    }
    if task == Task::Certain {
        return DomainBound::Unknown;
    }
    let t = tbox_size(&kb.tbox);
    let exp = 2 * t * t;
    DomainBound::Elements(BigUint::from(kb.individuals().len() + t) + (BigUint::one() << exp))
}

struct Plan {
    anon: AnonMode,
    complete: bool,
}

/// 1-types over `sig` that satisfy every `∞`-weighted axiom of `tbox`.
pub fn hard_types(tbox: &[(Axiom, Weight)], sig: &Signature) -> Vec<OneType> {
    OneType::all(sig)
        .into_iter()
        .filter(|t| {
            tbox.iter().all(|(ax, w)| {
                !w.is_infinite()
                    || match ax {
                        Axiom::Ci(l, r) => !t.satisfies(l) || t.satisfies(r),
                        Axiom::Ri(l, r) => {
                            (!t.has_exists(l) || t.has_exists(r))
                                && (!t.has_exists(&l.inverted()) || t.has_exists(&r.inverted()))
                        }
                    }
            })
        })
        .collect()
}

/// [`hard_types`] whose names can be true in some optimal model.
fn admissible_types(kb: &WeightedKb, sig: &Signature, pol: &Polarity, protected: &Signature) -> Vec<OneType> {
    hard_types(&kb.tbox, sig)
        .into_iter()
        .filter(|t| {
            t.concepts.iter().all(|c| pol.pos_concepts.contains(c) || protected.concepts.contains(c))
                && t.exists.iter().all(|r| pol.pos_roles.contains(&r.name) || protected.roles.contains(&r.name))
        })
        .collect()
}

fn plan(kb: &WeightedKb, query: Option<(&Query, Mode)>, cfg: &SearchConfig) -> Result<Plan, SolverError> {
    let report = validate_kb(kb);
    if report.dialect == Dialect::Invalid {
        return Err(SolverError::InvalidKb(report.issues));
    }
    let pol = Polarity::of_tbox(&kb.tbox);
    let possible_vars = matches!(query, Some((q, Mode::Possible)) if q.terms().iter().any(|t| t.is_var()));
    let certain = matches!(query, Some((_, Mode::Certain)));
    let certain_cq = matches!(query, Some((q, Mode::Certain)) if !q.is_iq());
    let has_named = !kb.individuals().is_empty() || query.is_some_and(|(q, _)| !q.individuals().is_empty());
    if !pol.pos_exists && !possible_vars {
        // Dropping anonymous elements never adds violations or matches here.
        let anon = if has_named { AnonMode::None } else { AnonMode::Free(1) };
        return Ok(Plan { anon, complete: true });
    }
    let protected = match query {
        Some((q, Mode::Possible)) => q.signature(),
        _ => Signature::new(),
    };
    if report.dialect.is_dllite() {
        let sig = kb.tbox_signature();
        let bits = sig.concepts.len() + 2 * sig.roles.len();
        if bits <= 16 {
            let types = admissible_types(kb, &sig, &pol, &protected);
            if types.len() <= cfg.typed_limit {
                let anon = AnonMode::Typed { types, type_sig: sig, extras: !certain };
                return Ok(Plan { anon, complete: !certain_cq });
            }
            let complete = cfg.max_anonymous >= types.len() && !certain_cq;
            return Ok(Plan { anon: AnonMode::Free(cfg.max_anonymous), complete });
        }
        return Ok(Plan { anon: AnonMode::Free(cfg.max_anonymous), complete: false });
    }
    let complete = match domain_bound(kb, if certain { Task::Certain } else { Task::Possible }) {
        DomainBound::Elements(b) if !certain => BigUint::from(cfg.max_anonymous) >= b,
        _ => false,
    };
    Ok(Plan { anon: AnonMode::Free(cfg.max_anonymous), complete })
}

fn ground(kb: &WeightedKb, query: Option<(&Query, Mode)>, plan: &Plan) -> Result<Grounding, SolverError> {
    let mut signature = kb.signature();
    let mut extra_named = vec![];
    let mut protected = Signature::new();
    if let Some((q, mode)) = query {
        signature.extend(&q.signature());
        extra_named.extend(q.individuals());
        if mode == Mode::Possible {
            protected = q.signature();
        }
    }
    let spec = GroundSpec { extra_named, signature, anon: plan.anon.clone(), fix_negative: true, protected };
    Grounding::build(kb, &spec)
}

fn check_exhaustive(plan: &Plan, cfg: &SearchConfig, what: &str) -> Result<(), SolverError> {
    if cfg.exhaustive && !plan.complete {
        return Err(SolverError::Incomplete(format!("the anonymous domain is not proven sufficient for {what}")));
    }
    Ok(())
}

fn verified_witness(kb: &WeightedKb, g: &Grounding, k: Option<u64>) -> Result<Interpretation, SolverError> {
    let w = g.extract();
    let c = interp::cost(kb, &w)?;
    let ok = match k {
        Some(k) => c.at_most(k),
        None => !c.is_infinite(),
    };
    if !ok {
        return Err(SolverError::Internal(format!("model cost {c} exceeds the bound")));
    }
    Ok(w)
}

/// Whether some interpretation has cost at most `k`.
pub fn k_satisfiable(kb: &WeightedKb, k: u64, cfg: &SearchConfig) -> Result<Verdict, SolverError> {
    let plan = plan(kb, None, cfg)?;
    check_exhaustive(&plan, cfg, "satisfiability")?;
    satisfiable_with(kb, k, &plan)
}

fn satisfiable_with(kb: &WeightedKb, k: u64, plan: &Plan) -> Result<Verdict, SolverError> {
    let mut g = ground(kb, None, plan)?;
    g.sat.set_pb_bound(u128::from(k));
    if g.sat.solve(&[]) {
        let w = verified_witness(kb, &g, Some(k))?;
        Ok(Verdict { answer: true, witness: Some(w), complete: plan.complete })
    } else {
        Ok(Verdict { answer: false, witness: None, complete: plan.complete })
    }
}

/// Bounded-cost entailment of a Boolean CQ: certain when every interpretation
/// of cost at most `k` satisfies `q`, possible when some does.
pub fn entails_bounded(
    kb: &WeightedKb,
    q: &Query,
    k: u64,
    mode: Mode,
    cfg: &SearchConfig,
) -> Result<Verdict, SolverError> {
    if !q.is_boolean() {
        return Err(SolverError::NotBoolean);
    }
    let plan = plan(kb, Some((q, mode)), cfg)?;
    check_exhaustive(&plan, cfg, "this query")?;
    entails_with(kb, q, k, mode, &plan)
}

fn entails_with(kb: &WeightedKb, q: &Query, k: u64, mode: Mode, plan: &Plan) -> Result<Verdict, SolverError> {
    let complete = plan.complete;
    let mut g = ground(kb, Some((q, mode)), plan)?;
    g.sat.set_pb_bound(u128::from(k));
    match mode {
        Mode::Possible => {
            if q.is_acyclic() {
                let l = g.query_lit_acyclic(q);
                g.sat.add_clause(&[l]);
            } else {
                g.assert_query_selectors(q);
            }
            if !g.sat.solve(&[]) {
                return Ok(Verdict { answer: false, witness: None, complete });
            }
            let w = verified_witness(kb, &g, Some(k))?;
            if !cq_holds(&w, q)? {
                return Err(SolverError::Internal("model does not satisfy the query".into()));
            }
            Ok(Verdict { answer: true, witness: Some(w), complete })
        }
        Mode::Certain => {
            if q.is_acyclic() {
                let l = g.query_lit_acyclic(q);
                g.sat.add_clause(&[!l]);
                if !g.sat.solve(&[]) {
                    return Ok(Verdict { answer: true, witness: None, complete });
                }
                let w = verified_witness(kb, &g, Some(k))?;
                if cq_holds(&w, q)? {
                    return Err(SolverError::Internal("countermodel satisfies the query".into()));
                }
                return Ok(Verdict { answer: false, witness: Some(w), complete });
            }
            loop {
                if !g.sat.solve(&[]) {
                    return Ok(Verdict { answer: true, witness: None, complete });
                }
                let (w, map) = g.extract_with_map();
                match cq_match(&w, q, &[])? {
                    None => {
                        verified_witness(kb, &g, Some(k))?;
                        return Ok(Verdict { answer: false, witness: Some(w), complete });
                    }
                    Some(m) => {
                        let m = m.into_iter().map(|(v, e)| (v, map[e])).collect();
                        if !g.block_match(q, &m) {
                            return Ok(Verdict { answer: true, witness: None, complete });
                        }
                    }
                }
            }
        }
    }
}

/// Minimum cost over all interpretations (`∞` when every interpretation
/// violates an `∞`-weighted item).
pub fn optimal_cost(kb: &WeightedKb, cfg: &SearchConfig) -> Result<Optimum, SolverError> {
    let plan = plan(kb, None, cfg)?;
    check_exhaustive(&plan, cfg, "optimal cost")?;
    optimum_with(kb, &plan)
}

fn optimum_with(kb: &WeightedKb, plan: &Plan) -> Result<Optimum, SolverError> {
    let mut g = ground(kb, None, plan)?;
    if !g.sat.solve(&[]) {
        return Ok(Optimum { cost: Cost::Infinite, witness: None, complete: plan.complete });
    }
    let mut best: Option<(u128, Interpretation)> = None;
    loop {
        let w = verified_witness(kb, &g, None)?;
        let c = interp::cost(kb, &w)?.to_u128().ok_or(SolverError::WeightTooLarge)?;
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, w));
        }
        let b = best.as_ref().unwrap().0;
        if b == 0 {
            break;
        }
        g.sat.set_pb_bound(b - 1);
        if !g.sat.solve(&[]) {
            break;
        }
    }
    let (c, w) = best.unwrap();
    Ok(Optimum { cost: Cost::from_u128(c), witness: Some(w), complete: plan.complete })
}

/// Optimal-cost entailment: bounded entailment at the optimal cost. With an
/// infinite optimum every query is certain and none is possible.
pub fn entails_opt(kb: &WeightedKb, q: &Query, mode: Mode, cfg: &SearchConfig) -> Result<Verdict, SolverError> {
    let opt = optimal_cost(kb, cfg)?;
    match opt.cost {
        Cost::Infinite => Ok(Verdict { answer: mode == Mode::Certain, witness: None, complete: opt.complete }),
        Cost::Finite(_) => {
            let k = opt.cost.to_u128().and_then(|c| u64::try_from(c).ok()).ok_or(SolverError::WeightTooLarge)?;
            let mut v = entails_bounded(kb, q, k, mode, cfg)?;
            v.complete &= opt.complete;
            Ok(v)
        }
    }
}

#[cfg(test)]
mod tests;
