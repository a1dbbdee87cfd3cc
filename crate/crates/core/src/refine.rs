//! Uniform split of each branch probability over the distinct successors it
//! produced.

use num_traits::Zero;

use crate::error::rational_string;
use crate::model::{Atom, MdpGraph, Rational};

/// Edges with the same `(src, action, branch_idx)` share their branch
/// probability equally. Idempotent: the split is always recomputed from
/// `branch_prob`.
pub fn refine(g: MdpGraph) -> MdpGraph {
    let sizes: Vec<i64> = {
        let edges = g.edges();
        let mut sizes = vec![0i64; edges.len()];
        let mut start = 0;
        while start < edges.len() {
            let key = (
                edges[start].src,
                &edges[start].action,
                edges[start].branch_idx,
            );
            let mut end = start + 1;
            while end < edges.len()
                && (edges[end].src, &edges[end].action, edges[end].branch_idx) == key
            {
                end += 1;
            }
            for s in &mut sizes[start..end] {
                *s = (end - start) as i64;
            }
            start = end;
        }
        sizes
    };
    let mut i = 0;
    g.map_edges(|e| {
        e.prob = e.branch_prob / Rational::from_integer(sizes[i]);
        i += 1;
    })
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    pub state: usize,
    pub action: Atom,
    pub sum: Rational,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "state {}, action `{}`: probabilities sum to {}",
            self.state,
            self.action,
            rational_string(&self.sum)
        )
    }
}

/// Every `(state, action)` must distribute exactly probability one.
pub fn check_normalization(g: &MdpGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in 0..g.num_states() {
        for c in g.choices(s) {
            let sum = c.edges.iter().fold(Rational::zero(), |acc, e| acc + e.prob);
            if sum != Rational::from_integer(1) {
                out.push(Violation {
                    state: s,
                    action: c.action.clone(),
                    sum,
                });
            }
        }
    }
    out
}
