use std::collections::{BTreeSet, HashMap};
use std::ops::Range;

use super::state::State;
use super::term::{Atom, Rational};

/// One transition of the explicit MDP.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// Grounded schema head.
    pub action: Atom,
    pub branch_idx: usize,
    /// Probability of the whole branch, before splitting.
    pub branch_prob: Rational,
    pub prob: Rational,
    pub reward: Rational,
    /// Number of distinct delete-extensions that produced this successor.
    pub multiplicity: u32,
    pub self_loop: bool,
}

/// All edges of one grounded action leaving one state.
#[derive(Clone, Copy, Debug)]
pub struct Choice<'a> {
    pub action: &'a Atom,
    pub edges: &'a [Edge],
}

/// Indexed states plus edges sorted by `(src, action, branch_idx, dst)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MdpGraph {
    states: Vec<State>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
}

fn edge_key(e: &Edge) -> (usize, &Atom, usize, usize) {
    (e.src, &e.action, e.branch_idx, e.dst)
}

impl MdpGraph {
    /// Builds the adjacency index; state 0 is the initial state.
    pub fn new(states: Vec<State>, mut edges: Vec<Edge>) -> Self {
        assert!(
            edges
                .iter()
                .all(|e| e.src < states.len() && e.dst < states.len()),
            "edge endpoint out of range"
        );
        if !edges.windows(2).all(|w| edge_key(&w[0]) <= edge_key(&w[1])) {
            edges.sort_by(|a, b| edge_key(a).cmp(&edge_key(b)));
        }
        let mut offsets = vec![0; states.len() + 1];
        for e in &edges {
            offsets[e.src + 1] += 1;
        }
        for i in 0..states.len() {
            offsets[i + 1] += offsets[i];
        }
        MdpGraph {
            states,
            edges,
            offsets,
        }
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &State {
        &self.states[i]
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_range(&self, s: usize) -> Range<usize> {
        self.offsets[s]..self.offsets[s + 1]
    }

    pub fn out_edges(&self, s: usize) -> &[Edge] {
        &self.edges[self.out_range(s)]
    }

    /// Edges grouped by grounded action, in canonical action order.
    pub fn choices(&self, s: usize) -> Vec<Choice<'_>> {
        self.out_edges(s)
            .chunk_by(|a, b| a.action == b.action)
            .map(|edges| Choice {
                action: &edges[0].action,
                edges,
            })
            .collect()
    }

    pub fn choice(&self, s: usize, action: &Atom) -> Option<Choice<'_>> {
        self.choices(s).into_iter().find(|c| c.action == action)
    }

    pub fn enabled(&self, s: usize) -> Vec<&Atom> {
        self.choices(s).into_iter().map(|c| c.action).collect()
    }

    /// Distinct grounded action heads appearing on any edge.
    pub fn distinct_actions(&self) -> BTreeSet<&Atom> {
        self.edges.iter().map(|e| &e.action).collect()
    }

    pub fn num_choices(&self) -> usize {
        (0..self.num_states()).map(|s| self.choices(s).len()).sum()
    }

    pub fn state_index(&self) -> HashMap<&State, usize> {
        self.states
            .iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect()
    }

    /// Replaces edge payloads in place, keeping order and adjacency.
    pub fn map_edges(mut self, mut f: impl FnMut(&mut Edge)) -> Self {
        for e in &mut self.edges {
            let key = (e.src, e.dst, e.branch_idx);
            f(e);
            debug_assert_eq!(key, (e.src, e.dst, e.branch_idx));
        }
        self
    }

    pub fn into_parts(self) -> (Vec<State>, Vec<Edge>) {
        (self.states, self.edges)
    }

    /// Every state is reachable from state 0.
    pub fn all_reachable(&self) -> bool {
        if self.states.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for e in self.out_edges(s) {
                if !seen[e.dst] {
                    seen[e.dst] = true;
                    stack.push(e.dst);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }
}
