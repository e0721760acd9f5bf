//! Conflict-driven clause-learning SAT engine with one native weighted
//! at-most constraint `Σ w_i·l_i ≤ K`.
//!
//! Two-watched-literal propagation, VSIDS branching with phase saving, Luby
//! restarts, learnt-clause reduction and solving under assumptions. The
//! weighted constraint propagates eagerly and explains its implications
//! lazily from the trail.

use std::ops::Not;

/// A literal: variable index with polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Lit {
        Lit(var << 1 | u32::from(!positive))
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

const UNDEF: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reason {
    None,
    Clause(u32),
    Pb,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

struct Heap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl Heap {
    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] >= 0
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = i as i32;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] { r } else { l };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i as i32;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

enum Conflict {
    Clause(u32),
    Lits(Vec<Lit>),
}

/// Weighted at-most constraint over literals.
#[derive(Default)]
struct Pb {
    /// Terms sorted by weight, heaviest first.
    terms: Vec<(Lit, u128)>,
    /// Weight per literal index (0 when the literal is not a term).
    weight: Vec<u128>,
    bound: Option<u128>,
    /// Weight of true terms on the trail.
    sum: u128,
}

/// The SAT engine.
pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail_pos: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: Heap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    pb: Pb,
    model: Vec<bool>,
    n_learnts: usize,
    max_learnts: usize,
    /// Conflicts encountered so far.
    pub conflicts: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let (mut size, mut seq) = (1u64, 0i32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            clauses: vec![],
            watches: vec![],
            assigns: vec![],
            level: vec![],
            reason: vec![],
            trail_pos: vec![],
            trail: vec![],
            trail_lim: vec![],
            qhead: 0,
            activity: vec![],
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: Heap { heap: vec![], pos: vec![] },
            phase: vec![],
            seen: vec![],
            ok: true,
            pb: Pb::default(),
            model: vec![],
            n_learnts: 0,
            max_learnts: 4000,
            conflicts: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| !c.deleted && !c.learnt).count()
    }

    /// Allocates a fresh variable and returns its positive literal.
    pub fn new_var(&mut self) -> Lit {
        let v = self.assigns.len() as u32;
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(Reason::None);
        self.trail_pos.push(0);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(vec![]);
        self.watches.push(vec![]);
        self.pb.weight.push(0);
        self.pb.weight.push(0);
        self.heap.pos.push(-1);
        self.heap.insert(v, &self.activity);
        Lit::new(v, true)
    }

    fn value(&self, l: Lit) -> u8 {
        let a = self.assigns[l.var() as usize];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l.0 & 1) as u8
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, r: Reason) {
        let v = l.var() as usize;
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = u8::from(l.is_positive());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = r;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(l);
        let w = self.pb.weight[l.index()];
        if w > 0 {
            self.pb.sum = self.pb.sum.saturating_add(w);
        }
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            self.phase[v] = l.is_positive();
            self.assigns[v] = UNDEF;
            self.reason[v] = Reason::None;
            let w = self.pb.weight[l.index()];
            if w > 0 {
                self.pb.sum -= w;
            }
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl);
        self.qhead = self.trail.len();
    }

    /// Adds a clause permanently. Returns `false` once the formula is known to
    /// be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut ls: Vec<Lit> = lits.to_vec();
        ls.sort_unstable();
        ls.dedup();
        let mut out = vec![];
        for (i, &l) in ls.iter().enumerate() {
            if i + 1 < ls.len() && ls[i + 1] == !l {
                return true;
            }
            match self.value(l) {
                1 => return true,
                0 => {}
                _ => out.push(l),
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(out[0], Reason::None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(out, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].index()].push(cref);
        self.watches[lits[1].index()].push(cref);
        self.clauses.push(Clause { lits, learnt, deleted: false, activity: 0.0 });
        if learnt {
            self.n_learnts += 1;
        }
        cref
    }

    /// Adds a term `w·l` to the weighted constraint. Only valid at decision
    /// level 0, before or between solves.
    pub fn add_pb_term(&mut self, l: Lit, w: u128) {
        if w == 0 {
            return;
        }
        self.cancel_until(0);
        self.pb.weight[l.index()] += w;
        if self.value(l) == 1 {
            self.pb.sum = self.pb.sum.saturating_add(w);
        }
        match self.pb.terms.iter_mut().find(|(m, _)| *m == l) {
            Some(t) => t.1 += w,
            None => self.pb.terms.push((l, w)),
        }
        self.pb.terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    }

    /// Sets the bound `K` of the weighted constraint. Learnt clauses may
    /// depend on the bound, so it can only be tightened.
    pub fn set_pb_bound(&mut self, bound: u128) {
        assert!(self.pb.bound.is_none_or(|b| bound <= b), "weighted bound can only be tightened");
        self.cancel_until(0);
        self.pb.bound = Some(bound);
    }

    pub fn pb_bound(&self) -> Option<u128> {
        self.pb.bound
    }

    /// Checks the weighted constraint after `p` became true (or for the whole
    /// trail when `p` is `None`), propagating forced literals.
    fn pb_check(&mut self) -> Option<Conflict> {
        let k = self.pb.bound?;
        if self.pb.sum > k {
            let lits: Vec<Lit> = self
                .pb
                .terms
                .iter()
                .filter(|(l, _)| self.value(*l) == 1)
                .map(|(l, _)| !*l)
                .collect();
            return Some(Conflict::Lits(lits));
        }
        let slack = k - self.pb.sum;
        let mut forced = vec![];
        for &(l, w) in &self.pb.terms {
            if w <= slack {
                break;
            }
            if self.value(l) == UNDEF {
                forced.push(!l);
            }
        }
        for l in forced {
            if self.value(l) == UNDEF {
                self.enqueue(l, Reason::Pb);
            }
        }
        None
    }

    fn pb_explain(&self, p: Lit) -> Vec<Lit> {
        let pos = self.trail_pos[p.var() as usize];
        self.pb
            .terms
            .iter()
            .filter(|(l, _)| self.value(*l) == 1 && self.trail_pos[l.var() as usize] < pos)
            .map(|(l, _)| !*l)
            .collect()
    }

    fn propagate(&mut self) -> Option<Conflict> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            if self.pb.weight[p.index()] > 0 {
                if let Some(c) = self.pb_check() {
                    return Some(c);
                }
            }
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cref = ws[i];
                i += 1;
                let c = &mut self.clauses[cref as usize];
                if c.deleted {
                    continue;
                }
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                let first = c.lits[0];
                let fv = {
                    let a = self.assigns[first.var() as usize];
                    if a == UNDEF { UNDEF } else { a ^ (first.0 & 1) as u8 }
                };
                if fv == 1 {
                    ws[j] = cref;
                    j += 1;
                    continue;
                }
                let mut found = false;
                for k in 2..c.lits.len() {
                    let l = c.lits[k];
                    let a = self.assigns[l.var() as usize];
                    let lv = if a == UNDEF { UNDEF } else { a ^ (l.0 & 1) as u8 };
                    if lv != 0 {
                        c.lits.swap(1, k);
                        self.watches[c.lits[1].index()].push(cref);
                        found = true;
                        break;
                    }
                }
                if found {
                    continue;
                }
                ws[j] = cref;
                j += 1;
                if fv == 0 {
                    conflict = Some(Conflict::Clause(cref));
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Reason::Clause(cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.index()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        if self.heap.contains(v) {
            let i = self.heap.pos[v as usize] as usize;
            self.heap.up(i, &self.activity);
        }
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn reason_lits(&self, p: Lit) -> Vec<Lit> {
        match self.reason[p.var() as usize] {
            Reason::Clause(c) => self.clauses[c as usize].lits[1..].to_vec(),
            Reason::Pb => self.pb_explain(p),
            Reason::None => vec![],
        }
    }

    fn analyze(&mut self, conflict: Conflict) -> (Vec<Lit>, usize) {
        let mut lits = match conflict {
            Conflict::Clause(c) => {
                self.bump_clause(c);
                self.clauses[c as usize].lits.clone()
            }
            Conflict::Lits(ls) => ls,
        };
        let cur = self.decision_level() as u32;
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut index = self.trail.len();
        let p;
        loop {
            for &q in &lits {
                let v = q.var();
                if !self.seen[v as usize] && self.level[v as usize] > 0 {
                    self.seen[v as usize] = true;
                    self.bump_var(v);
                    if self.level[v as usize] >= cur {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let q = self.trail[index];
            self.seen[q.var() as usize] = false;
            path -= 1;
            if path == 0 {
                p = q;
                break;
            }
            if let Reason::Clause(c) = self.reason[q.var() as usize] {
                self.bump_clause(c);
            }
            lits = self.reason_lits(q);
        }
        learnt[0] = !p;
        // Drop literals implied by other learnt literals through clause reasons.
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                if i == 0 {
                    return true;
                }
                match self.reason[l.var() as usize] {
                    Reason::Clause(c) => self.clauses[c as usize].lits[1..]
                        .iter()
                        .any(|q| !self.seen[q.var() as usize] && self.level[q.var() as usize] > 0),
                    _ => true,
                }
            })
            .collect();
        for l in &learnt {
            self.seen[l.var() as usize] = false;
        }
        let mut out: Vec<Lit> = learnt.into_iter().zip(keep).filter(|(_, k)| *k).map(|(l, _)| l).collect();
        let mut bt = 0usize;
        if out.len() > 1 {
            let mut mi = 1;
            for i in 2..out.len() {
                if self.level[out[i].var() as usize] > self.level[out[mi].var() as usize] {
                    mi = i;
                }
            }
            out.swap(1, mi);
            bt = self.level[out[1].var() as usize] as usize;
        }
        (out, bt)
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<(f64, u32)> = vec![];
        for (i, c) in self.clauses.iter().enumerate() {
            if c.learnt && !c.deleted && c.lits.len() > 2 {
                let l0 = c.lits[0];
                let locked = self.value(l0) == 1 && self.reason[l0.var() as usize] == Reason::Clause(i as u32);
                if !locked {
                    cands.push((c.activity, i as u32));
                }
            }
        }
        cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for &(_, i) in cands.iter().take(cands.len() / 2) {
            let c = &mut self.clauses[i as usize];
            c.deleted = true;
            c.lits = vec![];
            self.n_learnts -= 1;
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                return Some(Lit::new(v, self.phase[v as usize]));
            }
        }
        None
    }

    /// Solves under the given assumptions. On success the model is available
    /// through [`Solver::model_value`].
    pub fn solve(&mut self, assumptions: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return false;
        }
        if self.pb_check().is_some() || self.propagate().is_some() {
            self.ok = false;
            return false;
        }
        let mut restart = 0u64;
        loop {
            let budget = (luby(2.0, restart) * 100.0) as u64;
            restart += 1;
            match self.search(budget, assumptions) {
                Some(r) => {
                    self.cancel_until(0);
                    return r;
                }
                None => self.cancel_until(0),
            }
        }
    }

    fn search(&mut self, budget: u64, assumptions: &[Lit]) -> Option<bool> {
        let mut local = 0u64;
        loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                local += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(false);
                }
                let (learnt, bt) = self.analyze(conflict);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], Reason::None);
                } else {
                    let l0 = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(l0, Reason::Clause(cref));
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
            } else {
                if local >= budget {
                    return None;
                }
                if self.n_learnts >= self.max_learnts + self.trail.len() {
                    self.reduce_db();
                    self.max_learnts = self.max_learnts * 11 / 10;
                }
                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let a = assumptions[self.decision_level()];
                    match self.value(a) {
                        1 => self.trail_lim.push(self.trail.len()),
                        0 => return Some(false),
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let l = match next {
                    Some(l) => l,
                    None => match self.pick_branch() {
                        Some(l) => l,
                        None => {
                            self.model = (0..self.num_vars()).map(|v| self.assigns[v] == 1).collect();
                            return Some(true);
                        }
                    },
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(l, Reason::None);
            }
        }
    }

    /// Value of a literal in the last model.
    pub fn model_value(&self, l: Lit) -> bool {
        self.model[l.var() as usize] == l.is_positive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(s: &mut Solver, n: usize) -> Vec<Lit> {
        (0..n).map(|_| s.new_var()).collect()
    }

    #[test]
    fn simple_sat_and_unsat() {
        let mut s = Solver::new();
        let x = lits(&mut s, 3);
        s.add_clause(&[x[0], x[1]]);
        s.add_clause(&[!x[0], x[2]]);
        s.add_clause(&[!x[1], x[2]]);
        assert!(s.solve(&[]));
        assert!(s.model_value(x[2]));
        assert!(!s.solve(&[!x[2]]));
        assert!(s.solve(&[]));
        s.add_clause(&[!x[2]]);
        assert!(!s.solve(&[]));
    }

    fn pigeonhole(s: &mut Solver, holes: usize) {
        let pigeons = holes + 1;
        let v: Vec<Vec<Lit>> = (0..pigeons).map(|_| lits(s, holes)).collect();
        for p in &v {
            s.add_clause(p);
        }
        for h in 0..holes {
            for a in 0..pigeons {
                for b in a + 1..pigeons {
                    s.add_clause(&[!v[a][h], !v[b][h]]);
                }
            }
        }
    }

    #[test]
    fn pigeonhole_is_unsat() {
        let mut s = Solver::new();
        pigeonhole(&mut s, 6);
        assert!(!s.solve(&[]));
    }

    #[test]
    fn weighted_bound_is_respected() {
        // Choose at least 3 of 5 items with weights 1..=5, minimise weight.
        let mut s = Solver::new();
        let x = lits(&mut s, 5);
        for (i, &l) in x.iter().enumerate() {
            s.add_pb_term(l, i as u128 + 1);
        }
        // at least 3 of 5 true <=> every set of 3 literals contains a true one
        for a in 0..5 {
            for b in a + 1..5 {
                for c in b + 1..5 {
                    s.add_clause(&[x[a], x[b], x[c]]);
                }
            }
        }
        s.set_pb_bound(6);
        assert!(s.solve(&[]));
        let total: u128 = x.iter().enumerate().filter(|(_, l)| s.model_value(**l)).map(|(i, _)| i as u128 + 1).sum();
        assert!(total <= 6);
        s.set_pb_bound(5);
        assert!(!s.solve(&[]));
    }

    #[test]
    fn random_instances_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(1..=30);
            let clauses: Vec<Vec<(usize, bool)>> = (0..m)
                .map(|_| (0..rng.gen_range(1..=3)).map(|_| (rng.gen_range(0..n), rng.gen())).collect())
                .collect();
            let weights: Vec<u128> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let bound = rng.gen_range(0..8u128);
            let brute = (0..1u32 << n).any(|mask| {
                let val = |i: usize| mask >> i & 1 == 1;
                clauses.iter().all(|c| c.iter().any(|&(v, pos)| val(v) == pos))
                    && (0..n).filter(|&i| val(i)).map(|i| weights[i]).sum::<u128>() <= bound
            });
            let mut s = Solver::new();
            let x = lits(&mut s, n);
            for (i, &w) in weights.iter().enumerate() {
                s.add_pb_term(x[i], w);
            }
            s.set_pb_bound(bound);
            for c in &clauses {
                let cl: Vec<Lit> = c.iter().map(|&(v, pos)| if pos { x[v] } else { !x[v] }).collect();
                s.add_clause(&cl);
            }
            assert_eq!(s.solve(&[]), brute);
            if brute {
                let val = |i: usize| s.model_value(x[i]);
                assert!(clauses.iter().all(|c| c.iter().any(|&(v, pos)| val(v) == pos)));
                assert!((0..n).filter(|&i| val(i)).map(|i| weights[i]).sum::<u128>() <= bound);
            }
        }
    }
}
