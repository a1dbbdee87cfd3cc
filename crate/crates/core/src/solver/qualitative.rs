//! Graph-based precomputation of the states with extreme reachability
//! probabilities.

use std::collections::VecDeque;

use super::model::SolverModel;

/// States that reach `target` with positive probability under some policy
/// that only uses choices accepted by `allowed`.
pub fn can_reach(m: &SolverModel, target: &[bool], allowed: impl Fn(usize) -> bool) -> Vec<bool> {
    let pred = m.predecessors();
    let owner = m.owners();
    let mut seen = target.to_vec();
    let mut queue: VecDeque<usize> = (0..m.num_states()).filter(|&s| target[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &c in &pred[t] {
            let s = owner[c];
            if !seen[s] && allowed(c) {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// States where the maximal probability of reaching `goal` is zero.
pub fn prob0e(m: &SolverModel, goal: &[bool]) -> Vec<bool> {
    can_reach(m, goal, |_| true)
        .into_iter()
        .map(|r| !r)
        .collect()
}

/// States where some policy reaches `goal` with probability one.
pub fn prob1e(m: &SolverModel, goal: &[bool]) -> Vec<bool> {
    let mut u = vec![true; m.num_states()];
    loop {
        let r = can_reach(m, goal, |c| m.successors(c).iter().all(|&t| u[t]));
        if r == u {
            return u;
        }
        u = r;
    }
}

/// Backward breadth-first layering from `goal`. A state enters layer `k+1`
/// through its first accepted choice that has a successor in a layer `<= k`;
/// that choice is returned with it.
pub fn attractor(
    m: &SolverModel,
    goal: &[bool],
    allowed: impl Fn(usize) -> bool,
) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let n = m.num_states();
    let pred = m.predecessors();
    let owner = m.owners();
    let mut layer: Vec<Option<usize>> = (0..n).map(|s| goal[s].then_some(0)).collect();
    let mut choice = vec![None; n];
    let mut frontier: Vec<usize> = (0..n).filter(|&s| goal[s]).collect();
    let mut level = 0;
    while !frontier.is_empty() {
        let mut candidates: Vec<usize> = frontier
            .iter()
            .flat_map(|&t| pred[t].iter().map(|&c| owner[c]))
            .filter(|&s| layer[s].is_none())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let mut next = Vec::new();
        for s in candidates {
            let pick = m.choices(s).find(|&c| {
                allowed(c)
                    && m.successors(c)
                        .iter()
                        .any(|&t| layer[t].is_some_and(|l| l <= level))
            });
            if let Some(c) = pick {
                choice[s] = Some(c);
                next.push(s);
            }
        }
        level += 1;
        for &s in &next {
            layer[s] = Some(level);
        }
        frontier = next;
    }
    (layer, choice)
}
