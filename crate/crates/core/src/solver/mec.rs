//! Maximal end components.

use super::model::{sccs, SolverModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndComponent {
    pub states: Vec<usize>,
    pub choices: Vec<usize>,
}

/// Maximal end components of the sub-MDP made of the states in `within`
/// and the accepted choices that never leave it.
pub fn maximal_end_components(
    m: &SolverModel,
    within: &[bool],
    allowed: impl Fn(usize) -> bool,
) -> Vec<EndComponent> {
    let n = m.num_states();
    let owner = m.owners();
    let mut alive = within.to_vec();
    let mut active: Vec<bool> = (0..m.num_choices())
        .map(|c| within[owner[c]] && allowed(c) && m.successors(c).iter().all(|&t| within[t]))
        .collect();
    loop {
        let comps = sccs(n, |v, out| {
            if alive[v] {
                for c in m.choices(v).filter(|&c| active[c]) {
                    out.extend(m.successors(c).iter().filter(|&&t| alive[t]));
                }
            }
        });
        let mut comp = vec![usize::MAX; n];
        for (i, cs) in comps.iter().enumerate() {
            for &s in cs {
                comp[s] = i;
            }
        }
        let mut changed = false;
        for c in 0..m.num_choices() {
            if active[c] {
                let s = owner[c];
                if !alive[s]
                    || m.successors(c)
                        .iter()
                        .any(|&t| !alive[t] || comp[t] != comp[s])
                {
                    active[c] = false;
                    changed = true;
                }
            }
        }
        for (s, live) in alive.iter_mut().enumerate() {
            if *live && !m.choices(s).any(|c| active[c]) {
                *live = false;
                changed = true;
            }
        }
        if !changed {
            return comps
                .into_iter()
                .filter(|cs| alive[cs[0]])
                .map(|states| {
                    let choices = states
                        .iter()
                        .flat_map(|&s| m.choices(s).filter(|&c| active[c]))
                        .collect();
                    EndComponent { states, choices }
                })
                .collect();
        }
    }
}
