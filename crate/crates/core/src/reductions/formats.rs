//! Propositional formulas and graphs with their text formats.
//!
//! CNF and DNF files follow DIMACS: comment lines start with `c`, the header
//! is `p cnf <vars> <clauses>` (or `p dnf <vars> <terms>`), and each clause or
//! term is a list of signed variable indices ending in `0`. Clauses with fewer
//! than three literals are padded by repeating their last literal. Graphs are
//! edge lists: one `u v` pair per line, with `#` comments and optional
//! `v <name>` lines declaring vertices.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

/// A 3-CNF: a conjunction of clauses, each a disjunction of three literals.
/// Literal `i > 0` is variable `i`, `-i` its negation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

/// A 3-DNF: a disjunction of terms, each a conjunction of three literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dnf {
    pub num_vars: usize,
    pub terms: Vec<[i32; 3]>,
}

/// A simple undirected graph; edges are stored as `(u, v)` with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Graph {
    pub vertices: Vec<String>,
    pub edges: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("literal {0} is out of range")]
    LiteralRange(i32),
    #[error("self-loop on vertex {0}")]
    SelfLoop(String),
}

fn lit_value(l: i32, assignment: &[bool]) -> bool {
    let v = assignment[l.unsigned_abs() as usize - 1];
    if l > 0 {
        v
    } else {
        !v
    }
}

fn check_range(lits: &[[i32; 3]], n: usize) -> Result<(), FormatError> {
    for &l in lits.iter().flatten() {
        if l == 0 || l.unsigned_abs() as usize > n {
            return Err(FormatError::LiteralRange(l));
        }
    }
    Ok(())
}

impl Cnf {
    /// Builds a CNF from clauses of one to three literals, padding short ones.
    pub fn new(num_vars: usize, clauses: &[Vec<i32>]) -> Result<Cnf, FormatError> {
        let clauses = clauses.iter().map(|c| pad(c)).collect::<Result<Vec<_>, _>>()?;
        check_range(&clauses, num_vars)?;
        Ok(Cnf { num_vars, clauses })
    }

    /// Value under `assignment[i]` for variable `i + 1`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| lit_value(l, assignment)))
    }
}

impl Dnf {
    pub fn new(num_vars: usize, terms: &[Vec<i32>]) -> Result<Dnf, FormatError> {
        let terms = terms.iter().map(|c| pad(c)).collect::<Result<Vec<_>, _>>()?;
        check_range(&terms, num_vars)?;
        Ok(Dnf { num_vars, terms })
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.terms.iter().any(|t| t.iter().all(|&l| lit_value(l, assignment)))
    }
}

fn pad(c: &[i32]) -> Result<[i32; 3], FormatError> {
    match c {
        [a] => Ok([*a, *a, *a]),
        [a, b] => Ok([*a, *b, *b]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(FormatError::Syntax { line: 0, message: format!("expected 1 to 3 literals, got {}", c.len()) }),
    }
}

impl Graph {
    /// Adds an edge between two vertex indices.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), FormatError> {
        if u == v {
            return Err(FormatError::SelfLoop(self.vertices[u].clone()));
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    /// Whether `colour[v]` differs at the ends of every edge.
    pub fn is_proper(&self, colour: &[usize]) -> bool {
        self.edges.iter().all(|&(u, v)| colour[u] != colour[v])
    }
}

fn parse_dimacs(text: &str, kind: &str) -> Result<(usize, Vec<Vec<i32>>), FormatError> {
    let mut num_vars = None;
    let mut groups = vec![];
    let mut current = vec![];
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |message: String| FormatError::Syntax { line: idx + 1, message };
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != kind {
                return Err(err(format!("expected `p {kind} <vars> <count>`")));
            }
            num_vars = Some(parts[2].parse::<usize>().map_err(|e| err(e.to_string()))?);
            continue;
        }
        if num_vars.is_none() {
            return Err(err("literal line before the header".into()));
        }
        for tok in line.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| err(format!("bad literal `{tok}`")))?;
            if l == 0 {
                if !current.is_empty() {
                    groups.push(std::mem::take(&mut current));
                }
            } else {
                current.push(l);
            }
        }
    }
    if !current.is_empty() {
        groups.push(current);
    }
    let n = num_vars.ok_or(FormatError::Syntax { line: 0, message: format!("missing `p {kind}` header") })?;
    Ok((n, groups))
}

/// Parses a DIMACS CNF with at most three literals per clause.
pub fn parse_cnf(text: &str) -> Result<Cnf, FormatError> {
    let (n, groups) = parse_dimacs(text, "cnf")?;
    Cnf::new(n, &groups)
}

/// Parses a DIMACS-style DNF (`p dnf` header, one term per `0`-terminated
/// group).
pub fn parse_dnf(text: &str) -> Result<Dnf, FormatError> {
    let (n, groups) = parse_dimacs(text, "dnf")?;
    Dnf::new(n, &groups)
}

/// Parses an edge list.
pub fn parse_edge_list(text: &str) -> Result<Graph, FormatError> {
    let mut g = Graph::default();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut vertex = |g: &mut Graph, name: &str| {
        *index.entry(name.to_string()).or_insert_with(|| {
            g.vertices.push(name.to_string());
            g.vertices.len() - 1
        })
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["v", name] => {
                vertex(&mut g, name);
            }
            [a, b] => {
                let u = vertex(&mut g, a);
                let v = vertex(&mut g, b);
                g.add_edge(u, v)?;
            }
            _ => return Err(FormatError::Syntax { line: idx + 1, message: "expected `u v` or `v <name>`".into() }),
        }
    }
    Ok(g)
}

fn write_groups(kind: &str, n: usize, groups: &[[i32; 3]]) -> String {
    let mut s = format!("p {kind} {n} {}\n", groups.len());
    for c in groups {
        s.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
    }
    s
}

pub fn write_cnf(f: &Cnf) -> String {
    write_groups("cnf", f.num_vars, &f.clauses)
}

pub fn write_dnf(f: &Dnf) -> String {
    write_groups("dnf", f.num_vars, &f.terms)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut s = String::new();
    for v in &g.vertices {
        s.push_str(&format!("v {v}\n"));
    }
    for &(u, v) in &g.edges {
        s.push_str(&format!("{} {}\n", g.vertices[u], g.vertices[v]));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_round_trip_and_padding() {
        let f = parse_cnf("c demo\np cnf 3 2\n1 -2 0\n3 0\n").unwrap();
        assert_eq!(f.clauses, vec![[1, -2, -2], [3, 3, 3]]);
        assert_eq!(parse_cnf(&write_cnf(&f)).unwrap(), f);
        assert!(f.eval(&[true, false, true]));
        assert!(!f.eval(&[true, false, false]));
        assert_eq!(parse_cnf("p cnf 1 1\n2 0\n"), Err(FormatError::LiteralRange(2)));
        assert!(parse_cnf("1 0\n").is_err());
        assert!(parse_cnf("p cnf 2 1\n1 2 1 2 0\n").is_err());
    }

    #[test]
    fn dnf_evaluation() {
        let f = parse_dnf("p dnf 1 2\n1 0\n-1 0\n").unwrap();
        assert!(f.eval(&[true]) && f.eval(&[false]));
        assert_eq!(parse_dnf(&write_dnf(&f)).unwrap(), f);
    }

    #[test]
    fn edge_lists() {
        let g = parse_edge_list("# triangle\na b\nb c\nc a\nv d\n").unwrap();
        assert_eq!(g.vertices.len(), 4);
        assert_eq!(g.edges.len(), 3);
        assert!(g.is_proper(&[0, 1, 2, 0]));
        assert!(!g.is_proper(&[0, 1, 1, 0]));
        assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
        assert!(matches!(parse_edge_list("a a\n"), Err(FormatError::SelfLoop(_))));
    }
}
