//! Brute-force enumeration of small interpretations, used as a reference
//! oracle.

use crate::interp::{cost, Interpretation};
use crate::kb::{Signature, WeightedKb};
use crate::weight::Cost;

struct Layout {
    named: Vec<String>,
    n: usize,
    concepts: Vec<String>,
    roles: Vec<String>,
}

impl Layout {
    fn bits(&self) -> usize {
        self.concepts.len() * self.n + self.roles.len() * self.n * self.n
    }

    /// Bit index of every atom after renaming elements by `perm`.
    fn permuted_index(&self, perm: &[usize]) -> Vec<usize> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.bits());
        for c in 0..self.concepts.len() {
            for e in 0..n {
                out.push(c * n + perm[e]);
            }
        }
        let base = self.concepts.len() * n;
        for r in 0..self.roles.len() {
            for e in 0..n {
                for f in 0..n {
                    out.push(base + r * n * n + perm[e] * n + perm[f]);
                }
            }
        }
        out
    }

    fn build(&self, mask: u64) -> Interpretation {
        let n = self.n;
        let mut i = Interpretation::new(self.named.iter().cloned(), n - self.named.len());
        let mut bit = 0;
        for c in &self.concepts {
            i.declare_concept(c);
            for e in 0..n {
                if mask >> bit & 1 == 1 {
                    i.add_concept(c, e);
                }
                bit += 1;
            }
        }
        for r in &self.roles {
            i.declare_role(r);
            for e in 0..n {
                for f in 0..n {
                    if mask >> bit & 1 == 1 {
                        i.add_role(r, e, f);
                    }
                    bit += 1;
                }
            }
        }
        i
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// All interpretations over the given named elements plus `m` anonymous ones
/// and signature `sig`, one representative per permutation class of the
/// anonymous elements.
///
/// # Panics
/// When the number of atoms exceeds 30.
pub fn enumerate_over(named: Vec<String>, sig: &Signature, m: usize) -> impl Iterator<Item = Interpretation> {
    let n = named.len() + m;
    let layout = Layout {
        n,
        named,
        concepts: sig.concepts.iter().cloned().collect(),
        roles: sig.roles.iter().cloned().collect(),
    };
    let bits = layout.bits();
    assert!(bits <= 30, "too many atoms to enumerate ({bits})");
    let nn = layout.named.len();
    let perms: Vec<Vec<usize>> = permutations(m)
        .into_iter()
        .filter(|p| p.iter().enumerate().any(|(i, &x)| i != x))
        .map(|p| {
            let full: Vec<usize> = (0..nn).chain(p.iter().map(|x| x + nn)).collect();
            layout.permuted_index(&full)
        })
        .collect();
    (0u64..(1u64 << bits)).filter_map(move |mask| {
        let canonical = perms.iter().all(|idx| {
            let mut pm = 0u64;
            for (b, &t) in idx.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    pm |= 1 << t;
                }
            }
            pm >= mask
        });
        canonical.then(|| layout.build(mask))
    })
}

/// Interpretations over `Ind(K)` plus `m` anonymous elements and the KB
/// signature whose cost is at most `k`, up to renaming anonymous elements.
pub fn enumerate_interpretations(kb: &WeightedKb, m: usize, k: &Cost) -> Vec<Interpretation> {
    let named: Vec<String> = kb.individuals().into_iter().collect();
    enumerate_over(named, &kb.signature(), m)
        .filter(|i| cost(kb, i).map(|c| c <= *k).unwrap_or(false))
        .collect()
}
