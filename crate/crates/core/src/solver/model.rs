//! Compressed floating-point view of an annotated graph.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::model::{Atom, MdpGraph, Rational};

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Choices of state `s` are `state_start[s]..state_start[s+1]`, in canonical
/// action order; transitions of choice `c` are `choice_start[c]..choice_start[c+1]`,
/// merged per target and sorted by target.
#[derive(Clone, Debug)]
pub struct SolverModel {
    state_start: Vec<usize>,
    actions: Vec<Atom>,
    rewards: Vec<f64>,
    choice_start: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
}

impl SolverModel {
    pub fn from_graph(g: &MdpGraph) -> Self {
        let mut m = SolverModel {
            state_start: vec![0],
            actions: Vec::new(),
            rewards: Vec::new(),
            choice_start: vec![0],
            targets: Vec::new(),
            probs: Vec::new(),
        };
        for s in 0..g.num_states() {
            for c in g.choices(s) {
                let mut dist: BTreeMap<usize, Rational> = BTreeMap::new();
                let mut reward = Rational::from_integer(0);
                for e in c.edges {
                    *dist
                        .entry(e.dst)
                        .or_insert_with(|| Rational::from_integer(0)) += e.prob;
                    reward += e.prob * e.reward;
                }
                for (t, p) in dist {
                    m.targets.push(t);
                    m.probs.push(to_f64(&p));
                }
                m.actions.push(c.action.clone());
                m.rewards.push(to_f64(&reward));
                m.choice_start.push(m.targets.len());
            }
            m.state_start.push(m.actions.len());
        }
        m
    }

    pub fn num_states(&self) -> usize {
        self.state_start.len() - 1
    }

    pub fn num_choices(&self) -> usize {
        self.actions.len()
    }

    pub fn choices(&self, s: usize) -> std::ops::Range<usize> {
        self.state_start[s]..self.state_start[s + 1]
    }

    pub fn action(&self, c: usize) -> &Atom {
        &self.actions[c]
    }

    pub fn reward(&self, c: usize) -> f64 {
        self.rewards[c]
    }

    pub fn transitions(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.choice_start[c]..self.choice_start[c + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.probs[r].iter().copied())
    }

    pub fn successors(&self, c: usize) -> &[usize] {
        &self.targets[self.choice_start[c]..self.choice_start[c + 1]]
    }

    /// `Σ p · x[t]` over the transitions of `c`.
    pub fn expect(&self, c: usize, x: &[f64]) -> f64 {
        self.transitions(c).map(|(t, p)| p * x[t]).sum()
    }

    /// For every state, the choices that have it as a successor.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.num_states()];
        for c in 0..self.num_choices() {
            for &t in self.successors(c) {
                if pred[t].last() != Some(&c) {
                    pred[t].push(c);
                }
            }
        }
        pred
    }

    /// Owning state of every choice.
    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.num_choices()];
        for s in 0..self.num_states() {
            for c in self.choices(s) {
                owner[c] = s;
            }
        }
        owner
    }
}

/// Strongly connected components in reverse topological order (sinks
/// first). `succ(v, out)` appends the successors of `v`.
pub fn sccs(n: usize, mut succ: impl FnMut(usize, &mut Vec<usize>)) -> Vec<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let mut index = vec![NONE; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    let mut adj: Vec<Vec<usize>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut s = Vec::new();
        succ(v, &mut s);
        adj.push(s);
    }
    for root in 0..n {
        if index[root] != NONE {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == NONE {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}
