//! First-order formulas over concept, role and weight predicates, and their
//! evaluation over finite interpretations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{InterpError, Interpretation};

/// Term of a first-order formula: a variable or an individual constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FoTerm {
    Var(u32),
    Const(String),
}

/// Weight level of a weight predicate: a positive integer or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Finite(u64),
    Inf,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(n) => write!(f, "{n}"),
            Level::Inf => write!(f, "inf"),
        }
    }
}

/// Predicate key of the concept weight predicate `W[A,n]`.
pub fn wconcept_key(name: &str, level: Level) -> String {
    format!("W[{name},{level}]")
}

/// Predicate key of the role weight predicate `w[r,n]`.
pub fn wrole_key(name: &str, level: Level) -> String {
    format!("w[{name},{level}]")
}

/// First-order formula with equality and counting quantifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Concept(String, FoTerm),
    Role(String, FoTerm, FoTerm),
    WConcept(String, Level, FoTerm),
    WRole(String, Level, FoTerm, FoTerm),
    Eq(FoTerm, FoTerm),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(u32, Box<Formula>),
    Forall(u32, Box<Formula>),
    /// `∃^{>k} v. φ`: more than `k` witnesses.
    CountExists(u64, u32, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: u32, f: Formula) -> Formula {
        Formula::Exists(v, Box::new(f))
    }

    pub fn forall(v: u32, f: Formula) -> Formula {
        Formula::Forall(v, Box::new(f))
    }

    pub fn count_exists(k: u64, v: u32, f: Formula) -> Formula {
        Formula::CountExists(k, v, Box::new(f))
    }

    pub fn var(v: u32) -> FoTerm {
        FoTerm::Var(v)
    }

    /// Free variables.
    pub fn free_vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut vec![], &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<u32>, out: &mut BTreeSet<u32>) {
        let mut term = |t: &FoTerm, bound: &Vec<u32>| {
            if let FoTerm::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(*v);
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Concept(_, t) | Formula::WConcept(_, _, t) => term(t, bound),
            Formula::Role(_, s, t) | Formula::WRole(_, _, s, t) | Formula::Eq(s, t) => {
                term(s, bound);
                term(t, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) | Formula::CountExists(_, v, f) => {
                bound.push(*v);
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Constant folding of `φ ∧ ⊤`, `φ ∨ ⊥`, `⊥ → φ` and friends, plus
    /// flattening of nested conjunctions and disjunctions.
    pub fn simplify(self) -> Formula {
        match self {
            Formula::Not(f) => match f.simplify() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Not(g) => *g,
                g => Formula::not(g),
            },
            Formula::And(fs) => {
                let mut out = vec![];
                for f in fs {
                    match f.simplify() {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        Formula::And(gs) => out.extend(gs),
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => Formula::True,
                    1 => out.pop().unwrap(),
                    _ => Formula::And(out),
                }
            }
            Formula::Or(fs) => {
                let mut out = vec![];
                for f in fs {
                    match f.simplify() {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        Formula::Or(gs) => out.extend(gs),
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => Formula::False,
                    1 => out.pop().unwrap(),
                    _ => Formula::Or(out),
                }
            }
            Formula::Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::False, _) | (_, Formula::True) => Formula::True,
                (Formula::True, g) => g,
                (g, Formula::False) => Formula::not(g).simplify(),
                (g, h) => Formula::implies(g, h),
            },
            Formula::Iff(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::True, g) | (g, Formula::True) => g,
                (Formula::False, g) | (g, Formula::False) => Formula::not(g).simplify(),
                (g, h) => Formula::iff(g, h),
            },
            Formula::Exists(v, f) => match f.simplify() {
                Formula::False => Formula::False,
                g => Formula::exists(v, g),
            },
            Formula::Forall(v, f) => match f.simplify() {
                Formula::True => Formula::True,
                g => Formula::forall(v, g),
            },
            Formula::CountExists(k, v, f) => match f.simplify() {
                Formula::False => Formula::False,
                g => Formula::count_exists(k, v, g),
            },
            f => f,
        }
    }

    /// Largest variable index mentioned, if any.
    pub fn max_var(&self) -> Option<u32> {
        let t = |t: &FoTerm| match t {
            FoTerm::Var(v) => Some(*v),
            FoTerm::Const(_) => None,
        };
        match self {
            Formula::True | Formula::False => None,
            Formula::Concept(_, a) | Formula::WConcept(_, _, a) => t(a),
            Formula::Role(_, a, b) | Formula::WRole(_, _, a, b) | Formula::Eq(a, b) => t(a).max(t(b)),
            Formula::Not(f) => f.max_var(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().filter_map(|f| f.max_var()).max(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => a.max_var().max(b.max_var()),
            Formula::Exists(v, f) | Formula::Forall(v, f) | Formula::CountExists(_, v, f) => {
                Some(*v).max(f.max_var())
            }
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) | Formula::CountExists(_, _, f) => {
                f.size()
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::size).sum(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => a.size() + b.size(),
            _ => 0,
        }
    }
}

#[derive(Clone, Copy)]
enum CTerm {
    Var(usize),
    Elem(usize),
}

enum Compiled {
    Const(bool),
    Concept(usize, CTerm),
    Role(usize, CTerm, CTerm),
    Eq(CTerm, CTerm),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Iff(Box<Compiled>, Box<Compiled>),
    Exists(usize, Box<Compiled>),
    Forall(usize, Box<Compiled>),
    Count(u64, usize, Box<Compiled>),
}

struct Tables {
    n: usize,
    concepts: Vec<Vec<bool>>,
    roles: Vec<Vec<bool>>,
    concept_ids: HashMap<String, usize>,
    role_ids: HashMap<String, usize>,
}

impl Tables {
    fn new(i: &Interpretation) -> Tables {
        let n = i.len();
        let mut t = Tables { n, concepts: vec![], roles: vec![], concept_ids: HashMap::new(), role_ids: HashMap::new() };
        for c in i.concept_names() {
            let mut row = vec![false; n];
            for &e in i.concept_ext(c).unwrap() {
                row[e] = true;
            }
            t.concept_ids.insert(c.clone(), t.concepts.len());
            t.concepts.push(row);
        }
        for r in i.role_names() {
            let mut m = vec![false; n * n];
            for &(a, b) in i.role_ext(r).unwrap() {
                m[a * n + b] = true;
            }
            t.role_ids.insert(r.clone(), t.roles.len());
            t.roles.push(m);
        }
        t
    }
}

struct Compiler<'a> {
    i: &'a Interpretation,
    tables: &'a Tables,
    scope: HashMap<u32, Vec<usize>>,
    slots: usize,
}

impl Compiler<'_> {
    fn term(&self, t: &FoTerm) -> Result<CTerm, InterpError> {
        match t {
            FoTerm::Var(v) => match self.scope.get(v).and_then(|s| s.last()) {
                Some(&slot) => Ok(CTerm::Var(slot)),
                None => Err(InterpError::FreeVariable(*v)),
            },
            FoTerm::Const(a) => self
                .i
                .find(a)
                .map(CTerm::Elem)
                .ok_or_else(|| InterpError::UnknownIndividual(a.clone())),
        }
    }

    fn concept(&self, key: &str) -> Result<usize, InterpError> {
        self.tables.concept_ids.get(key).copied().ok_or_else(|| InterpError::UnknownPredicate(key.to_string()))
    }

    fn role(&self, key: &str) -> Result<usize, InterpError> {
        self.tables.role_ids.get(key).copied().ok_or_else(|| InterpError::UnknownPredicate(key.to_string()))
    }

    fn bind(&mut self, v: u32, f: &Formula) -> Result<(usize, Compiled), InterpError> {
        let slot = self.slots;
        self.slots += 1;
        self.scope.entry(v).or_default().push(slot);
        let body = self.compile(f);
        self.scope.get_mut(&v).unwrap().pop();
        Ok((slot, body?))
    }

    fn compile(&mut self, f: &Formula) -> Result<Compiled, InterpError> {
        Ok(match f {
            Formula::True => Compiled::Const(true),
            Formula::False => Compiled::Const(false),
            Formula::Concept(c, t) => Compiled::Concept(self.concept(c)?, self.term(t)?),
            Formula::WConcept(c, l, t) => Compiled::Concept(self.concept(&wconcept_key(c, *l))?, self.term(t)?),
            Formula::Role(r, s, t) => Compiled::Role(self.role(r)?, self.term(s)?, self.term(t)?),
            Formula::WRole(r, l, s, t) => Compiled::Role(self.role(&wrole_key(r, *l))?, self.term(s)?, self.term(t)?),
            Formula::Eq(s, t) => Compiled::Eq(self.term(s)?, self.term(t)?),
            Formula::Not(g) => Compiled::Not(Box::new(self.compile(g)?)),
            Formula::And(gs) => Compiled::And(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => Compiled::Or(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?),
            Formula::Implies(a, b) => Compiled::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Iff(a, b) => Compiled::Iff(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Exists(v, g) => {
                let (s, b) = self.bind(*v, g)?;
                Compiled::Exists(s, Box::new(b))
            }
            Formula::Forall(v, g) => {
                let (s, b) = self.bind(*v, g)?;
                Compiled::Forall(s, Box::new(b))
            }
            Formula::CountExists(k, v, g) => {
                let (s, b) = self.bind(*v, g)?;
                Compiled::Count(*k, s, Box::new(b))
            }
        })
    }
}

fn eval(c: &Compiled, t: &Tables, env: &mut [usize]) -> bool {
    let val = |x: CTerm, env: &[usize]| match x {
        CTerm::Var(s) => env[s],
        CTerm::Elem(e) => e,
    };
    match c {
        Compiled::Const(b) => *b,
        Compiled::Concept(p, x) => t.concepts[*p][val(*x, env)],
        Compiled::Role(p, x, y) => t.roles[*p][val(*x, env) * t.n + val(*y, env)],
        Compiled::Eq(x, y) => val(*x, env) == val(*y, env),
        Compiled::Not(g) => !eval(g, t, env),
        Compiled::And(gs) => gs.iter().all(|g| eval(g, t, env)),
        Compiled::Or(gs) => gs.iter().any(|g| eval(g, t, env)),
        Compiled::Implies(a, b) => !eval(a, t, env) || eval(b, t, env),
        Compiled::Iff(a, b) => eval(a, t, env) == eval(b, t, env),
        Compiled::Exists(s, g) => (0..t.n).any(|e| {
            env[*s] = e;
            eval(g, t, env)
        }),
        Compiled::Forall(s, g) => (0..t.n).all(|e| {
            env[*s] = e;
            eval(g, t, env)
        }),
        Compiled::Count(k, s, g) => {
            let mut seen = 0u64;
            for e in 0..t.n {
                env[*s] = e;
                if eval(g, t, env) {
                    seen += 1;
                    if seen > *k {
                        return true;
                    }
                }
            }
            false
        }
    }
}

/// Evaluates a closed formula in `i`. Free variables, undeclared predicates
/// and unknown constants are errors.
pub fn fo_eval(i: &Interpretation, f: &Formula) -> Result<bool, InterpError> {
    let tables = Tables::new(i);
    let mut comp = Compiler { i, tables: &tables, scope: HashMap::new(), slots: 0 };
    let compiled = comp.compile(f)?;
    let mut env = vec![0usize; comp.slots];
    Ok(eval(&compiled, &tables, &mut env))
}
