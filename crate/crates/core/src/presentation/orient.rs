//! Orientability: choose `σ(e) ∈ {±1}` so that every letter occurrence
//! `e_j^s` in the word of `e_i` satisfies `σ(e_i) · s · σ(e_j) = +1`.
//!
//! The constraints are parity equations over GF(2), solved with a
//! union-find that tracks each node's parity relative to its root.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{inverse_word, GraphPresentation, Letter, Sign, WrappingRule};

/// Constraint contributed by letter `position` (1-based) of the word of `source`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityConstraint {
    pub source: usize,
    pub position: usize,
    pub target: usize,
    pub sign: Sign,
}

impl ParityConstraint {
    fn odd(&self) -> bool {
        self.sign == Sign::Minus
    }
}

/// A closed cycle of constraints whose sign product is `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityWitness {
    pub cycle: Vec<ParityConstraint>,
}

impl ParityWitness {
    /// Checks the witness independently: every edge is touched an even
    /// number of times and the signs multiply to `-1`.
    pub fn is_contradiction(&self, edge_count: usize) -> bool {
        let mut degree = vec![0usize; edge_count];
        let mut odd = false;
        for c in &self.cycle {
            if c.source >= edge_count || c.target >= edge_count {
                return false;
            }
            degree[c.source] += 1;
            degree[c.target] += 1;
            odd ^= c.odd();
        }
        !self.cycle.is_empty() && odd && degree.iter().all(|d| d % 2 == 0)
    }

    pub fn describe(&self, p: &GraphPresentation) -> String {
        self.cycle
            .iter()
            .map(|c| {
                format!(
                    "{}[{}] = {}{}",
                    p.edge_name(c.source),
                    c.position,
                    if c.sign == Sign::Minus { "~" } else { "" },
                    p.edge_name(c.target)
                )
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Orientability {
    /// Sign assignment and the re-oriented presentation (all letters positive).
    Orientable {
        signs: Vec<Sign>,
        oriented: GraphPresentation,
    },
    NonOrientable {
        witness: ParityWitness,
    },
}

impl Orientability {
    pub fn is_orientable(&self) -> bool {
        matches!(self, Orientability::Orientable { .. })
    }
}

struct ParityUnionFind {
    parent: Vec<usize>,
    parity: Vec<bool>,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            parity: vec![false; n],
        }
    }

    /// Root of `x` and the parity of `x` relative to that root.
    fn find(&mut self, x: usize) -> (usize, bool) {
        let p = self.parent[x];
        if p == x {
            return (x, false);
        }
        let (root, up) = self.find(p);
        self.parent[x] = root;
        self.parity[x] ^= up;
        (root, self.parity[x])
    }

    /// Imposes `parity(a) xor parity(b) = odd`. Returns `Some(true)` if a
    /// union happened, `Some(false)` if already implied, `None` on conflict.
    fn relate(&mut self, a: usize, b: usize, odd: bool) -> Option<bool> {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return (pa ^ pb == odd).then_some(false);
        }
        self.parent[ra] = rb;
        self.parity[ra] = pa ^ pb ^ odd;
        Some(true)
    }
}

fn constraints(p: &GraphPresentation) -> Vec<ParityConstraint> {
    p.rule()
        .words()
        .iter()
        .enumerate()
        .flat_map(|(source, word)| {
            word.iter().enumerate().map(move |(j, l)| ParityConstraint {
                source,
                position: j + 1,
                target: l.edge,
                sign: l.sign,
            })
        })
        .collect()
}

/// Path of tree constraints from `from` to `to` in the spanning forest.
fn tree_path(n: usize, tree: &[ParityConstraint], from: usize, to: usize) -> Vec<ParityConstraint> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, c) in tree.iter().enumerate() {
        adj[c.source].push(k);
        adj[c.target].push(k);
    }
    let mut via: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        for &k in &adj[x] {
            let c = tree[k];
            let y = if c.source == x { c.target } else { c.source };
            if !seen[y] {
                seen[y] = true;
                via[y] = Some(k);
                queue.push_back(y);
            }
        }
    }
    let mut path = Vec::new();
    let mut x = to;
    while x != from {
        let k = via[x].expect("endpoints share a union-find component");
        let c = tree[k];
        path.push(c);
        x = if c.source == x { c.target } else { c.source };
    }
    path.reverse();
    path
}

pub fn check_orientable(p: &GraphPresentation) -> Orientability {
    let n = p.edge_count();
    let mut uf = ParityUnionFind::new(n);
    let mut tree = Vec::new();
    for c in constraints(p) {
        match uf.relate(c.source, c.target, c.odd()) {
            Some(true) => tree.push(c),
            Some(false) => {}
            None => {
                let mut cycle = tree_path(n, &tree, c.target, c.source);
                cycle.push(c);
                return Orientability::NonOrientable {
                    witness: ParityWitness { cycle },
                };
            }
        }
    }

    // parity true means σ = -1 relative to the root; the lowest edge of each component gets +1
    let found: Vec<(usize, bool)> = (0..n).map(|e| uf.find(e)).collect();
    let mut anchor: Vec<Option<bool>> = vec![None; n];
    for &(root, parity) in &found {
        anchor[root].get_or_insert(parity);
    }
    let signs: Vec<Sign> = found
        .iter()
        .map(|&(root, parity)| {
            if parity ^ anchor[root].unwrap() {
                Sign::Minus
            } else {
                Sign::Plus
            }
        })
        .collect();
    let oriented = reorient(p, &signs);
    Orientability::Orientable { signs, oriented }
}

/// Reverses every edge with `σ(e) = -1`: its word is inverted and each
/// letter's sign is multiplied by the target's `σ`.
pub(crate) fn reorient(p: &GraphPresentation, signs: &[Sign]) -> GraphPresentation {
    let words = p
        .rule()
        .words()
        .iter()
        .enumerate()
        .map(|(e, w)| {
            let base = match signs[e] {
                Sign::Plus => w.clone(),
                Sign::Minus => inverse_word(w),
            };
            base.into_iter()
                .map(|l| Letter::new(l.edge, l.sign.times(signs[l.edge])))
                .collect()
        })
        .collect();
    p.with_rule(WrappingRule::new(words).expect("re-orientation keeps words valid"))
        .expect("edges unchanged")
}
