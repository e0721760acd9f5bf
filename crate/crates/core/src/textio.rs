//! Text formats: weighted KBs (`.wkb`), conjunctive queries (`.q`) and
//! first-order formulas (`.fo`).
//!
//! KB syntax, one item per line after a `[tbox]` or `[abox]` header:
//!
//! ```text
//! [tbox]
//! inf | A [= exists r . (B and not C)
//! 2   | r [= s-
//! [abox]
//! 1   | A(a)
//! inf | r(a,b)
//! ```
//!
//! An inclusion between two bare names is read as a role inclusion when a side
//! carries `-` or both names start with a lowercase letter.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::interp::fo::{FoTerm, Formula, Level};
use crate::kb::{Assertion, Axiom, Concept, Query, QueryAtom, Role, Term, WeightedKb};
use crate::weight::Weight;

/// Parse error with a 1-based source position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "<->", "->", "[=", "|", "(", ")", "{", "}", ".", ",", "-", ":", "[", "]", "!", "&", "=", ">", "'",
];

fn lex(text: &str, first_line: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = vec![];
    for (li, line) in text.lines().enumerate() {
        let line_no = first_line + li;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: line_no, col });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Token { tok: Tok::Int(chars[start..i].iter().collect()), line: line_no, col });
                continue;
            }
            let rest: String = chars[i..].iter().take(3).collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push(Token { tok: Tok::Sym(s), line: line_no, col });
                    i += s.chars().count();
                }
                None => {
                    return Err(ParseError { line: line_no, col, message: format!("unexpected character `{c}`") })
                }
            }
        }
    }
    let (line, col) = out.last().map(|t| (t.line, t.col + 1)).unwrap_or((first_line, 1));
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Parser {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError { line: t.line, col: t.col, message: message.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            t => self.err(format!("expected {what}, found {t}")),
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        let s = self.ident(what)?;
        if KEYWORDS.contains(&s.as_str()) {
            self.pos -= 1;
            return self.err(format!("keyword `{s}` cannot be used as {what}"));
        }
        Ok(s)
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.peek()))
        }
    }

    fn role(&mut self) -> Result<Role, ParseError> {
        let n = self.name("a role name")?;
        Ok(if self.eat_sym("-") { Role::inv(n) } else { Role::new(n) })
    }

    fn concept(&mut self) -> Result<Concept, ParseError> {
        if self.is_kw("top") {
            self.next();
            return Ok(Concept::Top);
        }
        if self.is_kw("bot") {
            self.next();
            return Ok(Concept::Bottom);
        }
        if self.is_kw("not") {
            self.next();
            return Ok(Concept::not(self.concept()?));
        }
        if self.is_kw("exists") {
            self.next();
            let r = self.role()?;
            if self.eat_sym(".") {
                return Ok(Concept::exists_q(r, self.concept()?));
            }
            return Ok(Concept::Exists(r));
        }
        if self.eat_sym("{") {
            let a = self.name("an individual")?;
            self.expect_sym("}")?;
            return Ok(Concept::Nominal(a));
        }
        if self.eat_sym("(") {
            let mut c = self.concept()?;
            let mut op: Option<String> = None;
            while self.is_kw("and") || self.is_kw("or") {
                let o = match self.next() {
                    Tok::Ident(s) => s,
                    _ => unreachable!(),
                };
                if op.as_ref().is_some_and(|p| *p != o) {
                    self.pos -= 1;
                    return self.err("mixing `and` and `or` needs parentheses");
                }
                let d = self.concept()?;
                c = if o == "and" { Concept::and(c, d) } else { Concept::or(c, d) };
                op = Some(o);
            }
            self.expect_sym(")")?;
            return Ok(c);
        }
        Ok(Concept::Name(self.name("a concept")?))
    }
}

const KEYWORDS: &[&str] = &["top", "bot", "not", "exists", "and", "or", "inf", "forall", "true", "false", "cq"];

fn starts_lower(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_lowercase())
}

fn parse_weight(p: &mut Parser) -> Result<Weight, ParseError> {
    let w = match p.peek().clone() {
        Tok::Ident(s) if s == "inf" => Weight::Infinite,
        Tok::Int(s) => s.parse().map_err(|m: String| ParseError {
            line: p.toks[p.pos].line,
            col: p.toks[p.pos].col,
            message: m,
        })?,
        t => return p.err(format!("expected a weight (`inf` or an integer), found {t}")),
    };
    p.next();
    p.expect_sym("|")?;
    Ok(w)
}

fn parse_axiom(p: &mut Parser) -> Result<Axiom, ParseError> {
    // Role inclusion: `name[-] [= name[-]` with nothing else on the line.
    let mut k = 0;
    let mut sides = vec![];
    for _ in 0..2 {
        match p.peek_at(k) {
            Tok::Ident(n) if !KEYWORDS.contains(&n.as_str()) => {
                let inv = matches!(p.peek_at(k + 1), Tok::Sym("-"));
                sides.push((n.clone(), inv));
                k += if inv { 2 } else { 1 };
            }
            _ => break,
        }
        if sides.len() == 1 {
            if !matches!(p.peek_at(k), Tok::Sym("[=")) {
                break;
            }
            k += 1;
        }
    }
    if sides.len() == 2 && *p.peek_at(k) == Tok::Eof {
        let is_role = sides.iter().any(|s| s.1) || sides.iter().all(|s| starts_lower(&s.0));
        if is_role {
            let l = p.role()?;
            p.expect_sym("[=")?;
            let r = p.role()?;
            return Ok(Axiom::Ri(l, r));
        }
    }
    let l = p.concept()?;
    p.expect_sym("[=")?;
    let r = p.concept()?;
    Ok(Axiom::Ci(l, r))
}

fn parse_assertion(p: &mut Parser) -> Result<Assertion, ParseError> {
    let pred = p.name("a predicate")?;
    p.expect_sym("(")?;
    let a = p.name("an individual")?;
    let out = if p.eat_sym(",") {
        let b = p.name("an individual")?;
        Assertion::Role(pred, a, b)
    } else {
        Assertion::Concept(pred, a)
    };
    p.expect_sym(")")?;
    Ok(out)
}

/// Parses a weighted KB.
pub fn parse_kb(text: &str) -> Result<WeightedKb, ParseError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        TBox,
        ABox,
    }
    let mut kb = WeightedKb::default();
    let mut section = Section::None;
    for (li, raw) in text.lines().enumerate() {
        let line_no = li + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed {
            "[tbox]" => {
                section = Section::TBox;
                continue;
            }
            "[abox]" => {
                section = Section::ABox;
                continue;
            }
            _ => {}
        }
        let mut p = Parser::new(lex(body, line_no)?);
        let w = match section {
            Section::None => return p.err("item outside of a `[tbox]` or `[abox]` section"),
            _ => parse_weight(&mut p)?,
        };
        if section == Section::TBox {
            let ax = parse_axiom(&mut p)?;
            p.expect_eof()?;
            kb.tbox.push((ax, w));
        } else {
            let a = parse_assertion(&mut p)?;
            p.expect_eof()?;
            kb.abox.push((a, w));
        }
    }
    Ok(kb)
}

/// Renders a KB in the syntax accepted by [`parse_kb`].
pub fn serialize_kb(kb: &WeightedKb) -> String {
    let mut out = String::from("[tbox]\n");
    for (ax, w) in &kb.tbox {
        out.push_str(&format!("{w} | {ax}\n"));
    }
    out.push_str("[abox]\n");
    for (a, w) in &kb.abox {
        out.push_str(&format!("{w} | {a}\n"));
    }
    out
}

/// Parses `cq[x,...]: exists y,... . atom, ...`. Declared identifiers are
/// variables, all others individuals. An empty body is the true query.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(lex(text, 1)?);
    if !p.is_kw("cq") {
        return p.err("query must start with `cq[`");
    }
    p.next();
    p.expect_sym("[")?;
    let mut answer = vec![];
    let mut declared: BTreeSet<String> = BTreeSet::new();
    if !p.is_sym("]") {
        loop {
            let v = p.name("a variable")?;
            if !declared.insert(v.clone()) {
                p.pos -= 1;
                return p.err(format!("duplicate variable `{v}`"));
            }
            answer.push(v);
            if !p.eat_sym(",") {
                break;
            }
        }
    }
    p.expect_sym("]")?;
    p.expect_sym(":")?;
    let mut exists = vec![];
    if p.is_kw("exists") {
        p.next();
        loop {
            let v = p.name("a variable")?;
            if !declared.insert(v.clone()) {
                p.pos -= 1;
                return p.err(format!("duplicate variable `{v}`"));
            }
            exists.push(v);
            if !p.eat_sym(",") {
                break;
            }
        }
        p.expect_sym(".")?;
    }
    let mut atoms = vec![];
    let mut used = BTreeSet::new();
    if *p.peek() != Tok::Eof {
        loop {
            let pred = p.name("a predicate")?;
            p.expect_sym("(")?;
            let mut terms = vec![p.name("a term")?];
            if p.eat_sym(",") {
                terms.push(p.name("a term")?);
            }
            if !p.is_sym(")") {
                return p.err("malformed atom: expected `)`");
            }
            p.next();
            let terms: Vec<Term> = terms
                .into_iter()
                .map(|t| {
                    if declared.contains(&t) {
                        used.insert(t.clone());
                        Term::Var(t)
                    } else {
                        Term::Ind(t)
                    }
                })
                .collect();
            let mut it = terms.into_iter();
            let s = it.next().unwrap();
            atoms.push(match it.next() {
                Some(t) => QueryAtom::Role(pred, s, t),
                None => QueryAtom::Concept(pred, s),
            });
            if !p.eat_sym(",") {
                break;
            }
        }
    }
    p.expect_eof()?;
    for v in answer.iter().chain(&exists) {
        if !used.contains(v) {
            return Err(ParseError { line: 1, col: 1, message: format!("variable `{v}` does not occur in the query body") });
        }
    }
    Ok(Query::new(answer, exists, atoms))
}

/// Renders a query in the syntax accepted by [`parse_query`].
pub fn serialize_query(q: &Query) -> String {
    q.to_string()
}

fn looks_like_var(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some('u') | Some('v')) && {
        let rest: String = cs.collect();
        !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
    }
}

struct FoPrinter {
    counter: usize,
    free: HashMap<u32, String>,
    scope: HashMap<u32, Vec<String>>,
}

impl FoPrinter {
    fn term(&self, t: &FoTerm) -> String {
        match t {
            FoTerm::Var(v) => match self.scope.get(v).and_then(|s| s.last()) {
                Some(n) => n.clone(),
                None => self.free[v].clone(),
            },
            FoTerm::Const(c) if looks_like_var(c) || KEYWORDS.contains(&c.as_str()) => format!("'{c}"),
            FoTerm::Const(c) => c.clone(),
        }
    }

    fn operand(&mut self, f: &Formula, out: &mut String) {
        if matches!(f, Formula::Exists(..) | Formula::Forall(..) | Formula::CountExists(..)) {
            out.push('(');
            self.print(f, out);
            out.push(')');
        } else {
            self.print(f, out);
        }
    }

    fn print(&mut self, f: &Formula, out: &mut String) {
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Concept(c, t) => out.push_str(&format!("{c}({})", self.term(t))),
            Formula::Role(r, s, t) => out.push_str(&format!("{r}({},{})", self.term(s), self.term(t))),
            Formula::WConcept(c, l, t) => out.push_str(&format!("W[{c},{l}]({})", self.term(t))),
            Formula::WRole(r, l, s, t) => out.push_str(&format!("w[{r},{l}]({},{})", self.term(s), self.term(t))),
            Formula::Eq(s, t) => out.push_str(&format!("({} = {})", self.term(s), self.term(t))),
            Formula::Not(g) => {
                out.push('!');
                self.operand(g, out);
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let op = if matches!(f, Formula::And(_)) { " & " } else { " | " };
                out.push('(');
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(op);
                    }
                    self.operand(g, out);
                }
                out.push(')');
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let op = if matches!(f, Formula::Implies(..)) { " -> " } else { " <-> " };
                out.push('(');
                self.operand(a, out);
                out.push_str(op);
                self.operand(b, out);
                out.push(')');
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) | Formula::CountExists(_, v, g) => {
                let name = format!("v{}", self.counter);
                self.counter += 1;
                match f {
                    Formula::Exists(..) => out.push_str("exists "),
                    Formula::Forall(..) => out.push_str("forall "),
                    Formula::CountExists(k, ..) => out.push_str(&format!("exists>{k} ")),
                    _ => unreachable!(),
                }
                out.push_str(&name);
                out.push_str(". ");
                self.scope.entry(*v).or_default().push(name);
                self.print(g, out);
                self.scope.get_mut(v).unwrap().pop();
            }
        }
    }
}

fn free_in_order(f: &Formula, bound: &mut Vec<u32>, seen: &mut Vec<u32>) {
    let term = |t: &FoTerm, bound: &Vec<u32>, seen: &mut Vec<u32>| {
        if let FoTerm::Var(v) = t {
            if !bound.contains(v) && !seen.contains(v) {
                seen.push(*v);
            }
        }
    };
    match f {
        Formula::True | Formula::False => {}
        Formula::Concept(_, t) | Formula::WConcept(_, _, t) => term(t, bound, seen),
        Formula::Role(_, s, t) | Formula::WRole(_, _, s, t) | Formula::Eq(s, t) => {
            term(s, bound, seen);
            term(t, bound, seen);
        }
        Formula::Not(g) => free_in_order(g, bound, seen),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| free_in_order(g, bound, seen)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            free_in_order(a, bound, seen);
            free_in_order(b, bound, seen);
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) | Formula::CountExists(_, v, g) => {
            bound.push(*v);
            free_in_order(g, bound, seen);
            bound.pop();
        }
    }
}

/// Renders a formula fully parenthesized after constant folding. Free
/// variables are named `u<i>` and bound ones `v<i>` in binder pre-order, with
/// one counter shared by both.
pub fn serialize_fo(f: &Formula) -> String {
    let f = f.clone().simplify();
    let mut free = vec![];
    free_in_order(&f, &mut vec![], &mut free);
    let mut pr = FoPrinter { counter: 0, free: HashMap::new(), scope: HashMap::new() };
    for v in free {
        pr.free.insert(v, format!("u{}", pr.counter));
        pr.counter += 1;
    }
    let mut out = String::new();
    pr.print(&f, &mut out);
    out
}

struct FoParser {
    p: Parser,
    ids: HashMap<String, u32>,
}

impl FoParser {
    fn var_id(&mut self, name: &str) -> u32 {
        let n = self.ids.len() as u32;
        *self.ids.entry(name.to_string()).or_insert(n)
    }

    fn term(&mut self) -> Result<FoTerm, ParseError> {
        if self.p.eat_sym("'") {
            return Ok(FoTerm::Const(self.p.ident("a constant")?));
        }
        let s = self.p.ident("a term")?;
        if looks_like_var(&s) {
            Ok(FoTerm::Var(self.var_id(&s)))
        } else {
            Ok(FoTerm::Const(s))
        }
    }

    fn level(&mut self) -> Result<Level, ParseError> {
        match self.p.next() {
            Tok::Ident(s) if s == "inf" => Ok(Level::Inf),
            Tok::Int(s) => s.parse().map(Level::Finite).or_else(|_| {
                self.p.pos -= 1;
                self.p.err("weight level out of range")
            }),
            _ => {
                self.p.pos -= 1;
                self.p.err("expected a weight level")
            }
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.p.is_kw("exists") || self.p.is_kw("forall") {
            let kw = self.p.ident("a quantifier")?;
            let count = if kw == "exists" && self.p.eat_sym(">") {
                match self.p.next() {
                    Tok::Int(s) => Some(s.parse::<u64>().or_else(|_| self.p.err("count out of range"))?),
                    _ => {
                        self.p.pos -= 1;
                        return self.p.err("expected a count after `exists>`");
                    }
                }
            } else {
                None
            };
            let name = self.p.ident("a variable")?;
            if !looks_like_var(&name) {
                self.p.pos -= 1;
                return self.p.err("bound variables are named `v<n>` or `u<n>`");
            }
            let v = self.var_id(&name);
            self.p.expect_sym(".")?;
            let body = self.formula()?;
            return Ok(match (kw.as_str(), count) {
                ("forall", _) => Formula::forall(v, body),
                (_, Some(k)) => Formula::count_exists(k, v, body),
                _ => Formula::exists(v, body),
            });
        }
        let first = self.unary()?;
        self.chain(first)
    }

    fn chain(&mut self, first: Formula) -> Result<Formula, ParseError> {
        let op = match self.p.peek() {
            Tok::Sym(s @ ("&" | "|" | "->" | "<->")) => *s,
            _ => return Ok(first),
        };
        let mut items = vec![first];
        while self.p.eat_sym(op) {
            items.push(self.formula_operand()?);
            if matches!(op, "->" | "<->") {
                break;
            }
        }
        if matches!(self.p.peek(), Tok::Sym("&" | "|" | "->" | "<->")) {
            return self.p.err("mixed connectives need parentheses");
        }
        Ok(match op {
            "&" => Formula::And(items),
            "|" => Formula::Or(items),
            "->" => {
                let b = items.pop().unwrap();
                Formula::implies(items.pop().unwrap(), b)
            }
            _ => {
                let b = items.pop().unwrap();
                Formula::iff(items.pop().unwrap(), b)
            }
        })
    }

    fn formula_operand(&mut self) -> Result<Formula, ParseError> {
        if self.p.is_kw("exists") || self.p.is_kw("forall") {
            return self.formula();
        }
        self.unary()
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.p.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.p.eat_sym("(") {
            let is_eq = matches!((self.p.peek(), self.p.peek_at(1)), (Tok::Ident(_), Tok::Sym("=")))
                || matches!((self.p.peek(), self.p.peek_at(2)), (Tok::Sym("'"), Tok::Sym("=")));
            let f = if is_eq {
                let s = self.term()?;
                self.p.expect_sym("=")?;
                let t = self.term()?;
                Formula::Eq(s, t)
            } else {
                self.formula()?
            };
            self.p.expect_sym(")")?;
            return Ok(f);
        }
        let name = self.p.ident("a formula")?;
        match name.as_str() {
            "true" => return Ok(Formula::True),
            "false" => return Ok(Formula::False),
            _ => {}
        }
        if (name == "W" || name == "w") && self.p.is_sym("[") {
            self.p.next();
            let pred = self.p.ident("a predicate")?;
            self.p.expect_sym(",")?;
            let level = self.level()?;
            self.p.expect_sym("]")?;
            self.p.expect_sym("(")?;
            let s = self.term()?;
            let f = if name == "w" {
                self.p.expect_sym(",")?;
                let t = self.term()?;
                Formula::WRole(pred, level, s, t)
            } else {
                Formula::WConcept(pred, level, s)
            };
            self.p.expect_sym(")")?;
            return Ok(f);
        }
        self.p.expect_sym("(")?;
        let s = self.term()?;
        let f = if self.p.eat_sym(",") {
            let t = self.term()?;
            Formula::Role(name, s, t)
        } else {
            Formula::Concept(name, s)
        };
        self.p.expect_sym(")")?;
        Ok(f)
    }
}

/// Parses the formula syntax produced by [`serialize_fo`]. Top-level chains of
/// a single connective are accepted without parentheses.
pub fn parse_fo(text: &str) -> Result<Formula, ParseError> {
    let mut fp = FoParser { p: Parser::new(lex(text, 1)?), ids: HashMap::new() };
    let f = fp.formula()?;
    fp.p.expect_eof()?;
    Ok(f)
}

/// Key/value metadata stored as `# key: value` comment lines at the top of a
/// `.fo` file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoHeader {
    pub entries: Vec<(String, String)>,
}

impl FoHeader {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }
}

/// Renders a `.fo` file: header comments followed by the formula.
pub fn write_fo_file(header: &FoHeader, f: &Formula) -> String {
    let mut out = String::new();
    for (k, v) in &header.entries {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&serialize_fo(f));
    out.push('\n');
    out
}

/// Reads a `.fo` file written by [`write_fo_file`].
pub fn read_fo_file(text: &str) -> Result<(FoHeader, Formula), ParseError> {
    let mut header = FoHeader::default();
    for line in text.lines() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                header.set(k.trim(), v.trim());
            }
        } else if !t.is_empty() {
            break;
        }
    }
    Ok((header, parse_fo(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kb_round_trip() {
        let text = "\
# example
[tbox]
inf | A [= exists u
inf | A [= not exists s
inf | exists u- [= (exists r- and not exists s-)
inf | exists t [= exists s-
2 | r [= s
inf | B [= exists r . {a}
[abox]
inf | A(a0)
1 | t(b0,c0)
";
        let kb = parse_kb(text).unwrap();
        assert_eq!(kb.tbox.len(), 6);
        assert_eq!(kb.tbox[4].0, Axiom::Ri(Role::new("r"), Role::new("s")));
        assert_eq!(kb.tbox[4].1, Weight::finite(2));
        assert_eq!(kb.abox[1].0, Assertion::role("t", "b0", "c0"));
        let again = parse_kb(&serialize_kb(&kb)).unwrap();
        assert_eq!(again, kb);
    }

    #[test]
    fn kb_errors_carry_positions() {
        let e = parse_kb("[tbox]\ninf | A [= (B and\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_kb("A(a)\n").unwrap_err();
        assert_eq!((e.line, e.col), (1, 1));
        let e = parse_kb("[abox]\n1 | A(a) junk\n").unwrap_err();
        assert_eq!((e.line, e.col), (2, 10));
        assert!(parse_kb("[tbox]\nx | A [= B\n").is_err());
    }

    #[test]
    fn uppercase_inclusions_are_concepts() {
        let kb = parse_kb("[tbox]\ninf | A [= B\ninf | r- [= S\n").unwrap();
        assert!(matches!(kb.tbox[0].0, Axiom::Ci(..)));
        assert_eq!(kb.tbox[1].0, Axiom::Ri(Role::inv("r"), Role::new("S")));
    }

    #[test]
    fn query_parsing() {
        let q = parse_query("cq[x]: exists y . r(x,y), A(y), B(a)").unwrap();
        assert_eq!(q.answer_vars, vec!["x"]);
        assert_eq!(q.atoms[2], QueryAtom::Concept("B".into(), Term::ind("a")));
        assert_eq!(parse_query(&serialize_query(&q)).unwrap(), q);
        let t = parse_query("cq[]:").unwrap();
        assert!(t.atoms.is_empty());
        assert!(parse_query("cq[]: exists y . A(a)").is_err());
        assert!(parse_query("cq[x]: exists x . A(x)").is_err());
        assert!(parse_query("cq[]: A(a").is_err());
        assert!(parse_query("cq[]: A(a,b,c)").is_err());
    }

    #[test]
    fn fo_serialization_names_variables() {
        let f = Formula::exists(7, Formula::Concept("A".into(), FoTerm::Var(7)));
        assert_eq!(serialize_fo(&f), "exists v0. A(v0)");
        let g = Formula::count_exists(2, 3, Formula::Role("r".into(), FoTerm::Var(9), FoTerm::Var(3)));
        assert_eq!(serialize_fo(&g), "exists>2 v1. r(u0,v1)");
        let h = Formula::And(vec![f.clone(), Formula::Concept("B".into(), FoTerm::Const("v1".into()))]);
        assert_eq!(serialize_fo(&h), "((exists v0. A(v0)) & B('v1))");
    }

    #[test]
    fn fo_round_trip() {
        let text = "forall v0. (A(v0) -> ((exists>1 v1. r(v0,v1)) | !(v0 = a) | W[A,inf](v0) | w[r,2](v0,v0)))";
        let f = parse_fo(text).unwrap();
        assert_eq!(serialize_fo(&f), text);
        let mut h = FoHeader::default();
        h.set("mode", "p");
        h.set("k", "2");
        let file = write_fo_file(&h, &f);
        let (h2, f2) = read_fo_file(&file).unwrap();
        assert_eq!(h2, h);
        assert_eq!(f2, f);
    }
}
