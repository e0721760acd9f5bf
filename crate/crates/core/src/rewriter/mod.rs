//! FO-rewriting of bounded-cost query answering over DL-Lite_bool^H TBoxes.
//!
//! For a weighted TBox, a query and a cost bound `k`, [`rewrite`] produces a
//! first-order formula over the ABox signature extended with weight
//! predicates `W[A,n]` and `w[r,n]`. Evaluating it on the encoding of any
//! weighted ABox ([`encode_weighted_abox`]) decides possible answers to a
//! Boolean CQ, or (negated) certain answers to a Boolean instance query.
//!
//! The formula is a disjunction over strategies: small interpretations with a
//! designated individual part `Γ` and the ABox violations they allow. A
//! strategy matches an ABox when `Γ` maps onto distinct individuals that look
//! like the model up to the allowed violations, and every other individual has
//! an ABox type that can be completed without new violations.

mod query;
mod strategy;
pub mod types;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::interp::fo::{wconcept_key, wrole_key, FoTerm, Formula, Level};
use crate::interp::{fo_eval, InterpError, Interpretation};
use crate::kb::{normalize_iq, tbox_dialect, Assertion, Axiom, KbError, Query, Signature};
use crate::solver::{Mode, SolverError};
use crate::textio::{read_fo_file, write_fo_file, FoHeader, ParseError};
use crate::weight::Weight;

pub use query::build_strategy_query;
pub use strategy::{enumerate_strategies, good_types, safe_type, Strategy};
pub use types::{abox_type, core, core_bound, m_bound, precore_bound, rare_types, role_closure, AboxType, CoreSets, RoleClosure};

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("the TBox is {0}, not DL-Lite_bool^H")]
    NotDlLite(String),
    #[error("invalid TBox: {0}")]
    InvalidTbox(String),
    #[error("unsupported query: {0}")]
    QueryShape(String),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("Γ bound {bound} is smaller than the {needed} query individuals")]
    GammaTooSmall { bound: usize, needed: usize },
    #[error("rewriting does not match the encoded ABox: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Normalized input of the rewriting.
#[derive(Clone, Debug)]
pub struct Setup {
    /// The TBox, extended with the defining axioms of a normalized IQ.
    pub tbox: Vec<(Axiom, Weight)>,
    pub query: Query,
    pub mode: Mode,
    pub k: u64,
    /// Predicates the rewriting speaks about: those of the TBox and query.
    pub signature: Signature,
    pub closure: RoleClosure,
    /// Query individuals, which label slots of `Γ`.
    pub labels: Vec<String>,
    /// Concepts introduced by IQ normalization; they never occur in ABoxes.
    pub hidden: BTreeSet<String>,
}

impl Setup {
    /// Checks the TBox dialect and the query shape. In certain mode the IQ is
    /// normalized to a concept IQ or a ground role atom.
    pub fn new(tbox: &[(Axiom, Weight)], q: &Query, k: u64, mode: Mode) -> Result<Setup, RewriteError> {
        if !q.is_boolean() {
            return Err(RewriteError::QueryShape("the query must be Boolean".into()));
        }
        for (i, (_, w)) in tbox.iter().enumerate() {
            if w.is_zero() {
                return Err(RewriteError::InvalidTbox(format!("axiom {} has weight 0", i + 1)));
            }
        }
        let dialect = tbox_dialect(tbox);
        if !dialect.is_dllite() {
            return Err(RewriteError::NotDlLite(dialect.label().to_string()));
        }
        let original = Signature::of_tbox(tbox).union(&q.signature());
        let (tbox, query) = match mode {
            Mode::Possible => (tbox.to_vec(), q.clone()),
            Mode::Certain => {
                if !q.is_iq() {
                    return Err(RewriteError::QueryShape("certain answers are rewritten for instance queries only".into()));
                }
                normalize_iq(tbox, q)?
            }
        };
        let signature = Signature::of_tbox(&tbox).union(&query.signature());
        let hidden = signature.concepts.difference(&original.concepts).cloned().collect();
        let closure = role_closure(&tbox);
        let labels = query.individuals().into_iter().collect();
        Ok(Setup { tbox, query, mode, k, signature, closure, labels, hidden })
    }
}

/// Completeness regime of a rewriting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Correct on every ABox.
    Complete,
    /// Correct on ABoxes with at most this many individuals.
    Bounded(usize),
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Complete => write!(f, "complete"),
            Regime::Bounded(n) => write!(f, "bounded({n})"),
        }
    }
}

/// Options of [`rewrite`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteOptions {
    /// Largest number of ABox individuals the rewriting must serve. `None`
    /// (or any value of at least `2k`) gives a complete rewriting.
    pub max_individuals: Option<usize>,
    /// Test each safe ABox type separately, counting quantifiers included,
    /// instead of the minimized safety test.
    pub full_types: bool,
}

/// A rewritten query with its metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Rewriting {
    pub formula: Formula,
    pub mode: Mode,
    pub k: u64,
    /// Largest `|Γ|` over the strategies considered.
    pub max_gamma: usize,
    /// Largest model domain: `max_gamma` plus one witness per 1-type.
    pub cap: usize,
    pub regime: Regime,
    /// Number of strategies (disjuncts before simplification).
    pub strategies: usize,
    pub signature: Signature,
}

impl Rewriting {
    /// Metadata for the `.fo` header.
    pub fn header(&self) -> FoHeader {
        let mut h = FoHeader::default();
        h.set("mode", self.mode.label());
        h.set("k", self.k.to_string());
        h.set("gamma", self.max_gamma.to_string());
        h.set("cap", self.cap.to_string());
        h.set("regime", self.regime.to_string());
        h.set("strategies", self.strategies.to_string());
        h.set("concepts", self.signature.concepts.iter().cloned().collect::<Vec<_>>().join(" "));
        h.set("roles", self.signature.roles.iter().cloned().collect::<Vec<_>>().join(" "));
        h
    }

    /// The `.fo` file text.
    pub fn to_fo_text(&self) -> String {
        write_fo_file(&self.header(), &self.formula)
    }

    /// Reads a `.fo` file written by [`Rewriting::to_fo_text`].
    pub fn from_fo_text(text: &str) -> Result<Rewriting, RewriteError> {
        let (h, formula) = read_fo_file(text)?;
        let get = |key: &str| h.get(key).ok_or_else(|| RewriteError::Mismatch(format!("missing header `{key}`")));
        let num = |key: &str| -> Result<u64, RewriteError> {
            get(key)?.parse().map_err(|_| RewriteError::Mismatch(format!("bad header `{key}`")))
        };
        let mode = match get("mode")? {
            "certain" => Mode::Certain,
            "possible" => Mode::Possible,
            m => return Err(RewriteError::Mismatch(format!("unknown mode `{m}`"))),
        };
        let regime = match get("regime")? {
            "complete" => Regime::Complete,
            r => {
                let n = r.strip_prefix("bounded(").and_then(|x| x.strip_suffix(')')).and_then(|x| x.parse().ok());
                Regime::Bounded(n.ok_or_else(|| RewriteError::Mismatch(format!("bad regime `{r}`")))?)
            }
        };
        let words = |key: &str| -> Result<BTreeSet<String>, RewriteError> {
            Ok(get(key)?.split_whitespace().map(str::to_string).collect())
        };
        Ok(Rewriting {
            formula,
            mode,
            k: num("k")?,
            max_gamma: num("gamma")? as usize,
            cap: num("cap")? as usize,
            regime,
            strategies: num("strategies")? as usize,
            signature: Signature { concepts: words("concepts")?, roles: words("roles")? },
        })
    }

    /// Answers the rewritten query on a weighted ABox.
    pub fn answer(&self, abox: &[(Assertion, Weight)]) -> Result<bool, RewriteError> {
        answer_rewritten(&self.formula, abox, self.k, self.mode)
    }
}

/// Largest `|Γ|` needed: the query individuals plus at most `2k` individuals
/// involved in violations, capped by the ABox size when known.
fn gamma_bound(setup: &Setup, opts: &RewriteOptions) -> (usize, Regime) {
    let violators = 2 * setup.k as usize;
    match opts.max_individuals {
        Some(n) if n < violators => (setup.labels.len() + n, Regime::Bounded(n)),
        _ => (setup.labels.len() + violators, Regime::Complete),
    }
}

/// Rewrites `(tbox, q, k, mode)` into a first-order query over encoded
/// weighted ABoxes. Possible mode accepts Boolean CQs; certain mode accepts
/// Boolean instance queries.
pub fn rewrite(
    tbox: &[(Axiom, Weight)],
    q: &Query,
    k: u64,
    mode: Mode,
    opts: &RewriteOptions,
) -> Result<Rewriting, RewriteError> {
    let setup = Setup::new(tbox, q, k, mode)?;
    let (max_gamma, regime) = gamma_bound(&setup, opts);
    let strategies = enumerate_strategies(&setup, max_gamma)?;
    let disjuncts: Vec<Formula> = strategies.iter().map(|s| build_strategy_query(&setup, s, opts.full_types)).collect();
    let n_types = 1usize << (setup.signature.concepts.len() + 2 * setup.signature.roles.len());
    Ok(Rewriting {
        formula: Formula::Or(disjuncts).simplify(),
        mode,
        k,
        max_gamma,
        cap: max_gamma + n_types,
        regime,
        strategies: strategies.len(),
        signature: setup.signature,
    })
}

fn level_of(w: &Weight, k: u64) -> Level {
    match w.to_u128() {
        Some(n) if n <= u128::from(k) => Level::Finite(n as u64),
        _ => Level::Inf,
    }
}

fn encode_with(abox: &[(Assertion, Weight)], k: u64, extra: &BTreeSet<String>) -> Interpretation {
    let mut names: BTreeSet<String> = abox.iter().flat_map(|(a, _)| a.individuals()).map(str::to_string).collect();
    names.extend(extra.iter().cloned());
    let mut i = Interpretation::new(names, 0);
    let sig = Signature::of_abox(abox);
    i.declare(&sig);
    let levels: Vec<Level> = (1..=k).map(Level::Finite).chain([Level::Inf]).collect();
    for c in &sig.concepts {
        for &l in &levels {
            i.declare_concept(&wconcept_key(c, l));
        }
    }
    for r in &sig.roles {
        for &l in &levels {
            i.declare_role(&wrole_key(r, l));
        }
    }
    for (a, w) in abox {
        let l = level_of(w, k);
        match a {
            Assertion::Concept(c, x) => {
                let e = i.find(x).unwrap();
                i.add_concept(c, e);
                i.add_concept(&wconcept_key(c, l), e);
            }
            Assertion::Role(r, x, y) => {
                let (e, f) = (i.find(x).unwrap(), i.find(y).unwrap());
                i.add_role(r, e, f);
                i.add_role(&wrole_key(r, l), e, f);
            }
        }
    }
    i
}

/// The interpretation of a weighted ABox over the extended signature: the
/// base assertions, plus `W[A,n](a)` for `A(a)` of weight `n ≤ k` and
/// `W[A,inf](a)` for larger or infinite weights (`w[r,·]` likewise).
pub fn encode_weighted_abox(abox: &[(Assertion, Weight)], k: u64) -> Interpretation {
    encode_with(abox, k, &BTreeSet::new())
}

#[derive(Default)]
struct Mentions {
    constants: BTreeSet<String>,
    concepts: BTreeSet<String>,
    roles: BTreeSet<String>,
    levels: BTreeSet<Level>,
}

fn collect_mentions(f: &Formula, m: &mut Mentions) {
    let term = |t: &FoTerm, m: &mut Mentions| {
        if let FoTerm::Const(c) = t {
            m.constants.insert(c.clone());
        }
    };
    match f {
        Formula::True | Formula::False => {}
        Formula::Concept(c, t) => {
            m.concepts.insert(c.clone());
            term(t, m);
        }
        Formula::WConcept(c, l, t) => {
            m.concepts.insert(wconcept_key(c, *l));
            m.levels.insert(*l);
            term(t, m);
        }
        Formula::Role(r, s, t) => {
            m.roles.insert(r.clone());
            term(s, m);
            term(t, m);
        }
        Formula::WRole(r, l, s, t) => {
            m.roles.insert(wrole_key(r, *l));
            m.levels.insert(*l);
            term(s, m);
            term(t, m);
        }
        Formula::Eq(s, t) => {
            term(s, m);
            term(t, m);
        }
        Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) | Formula::CountExists(_, _, g) => {
            collect_mentions(g, m)
        }
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect_mentions(g, m)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_mentions(a, m);
            collect_mentions(b, m);
        }
    }
}

/// Evaluates a rewriting on the encoding of `abox`. Possible mode returns the
/// value of the formula; certain mode returns its negation, since the
/// formula detects countermodels. Constants of the formula that do not occur
/// in the ABox denote fresh individuals; predicates absent from the ABox are
/// empty.
pub fn answer_rewritten(f: &Formula, abox: &[(Assertion, Weight)], k: u64, mode: Mode) -> Result<bool, RewriteError> {
    let mut m = Mentions::default();
    collect_mentions(f, &mut m);
    if let Some(Level::Finite(n)) = m.levels.iter().find(|l| matches!(l, Level::Finite(n) if *n > k)) {
        return Err(RewriteError::Mismatch(format!("weight level {n} exceeds k = {k}")));
    }
    let mut i = encode_with(abox, k, &m.constants);
    for c in &m.concepts {
        i.declare_concept(c);
    }
    for r in &m.roles {
        i.declare_role(r);
    }
    let holds = fo_eval(&i, f)?;
    Ok(match mode {
        Mode::Possible => holds,
        Mode::Certain => !holds,
    })
}
