//! Value iteration for maximal reachability and optimal expected total
//! reward.

use crate::model::{Objective, Sense};
use crate::par::Exec;

use super::linear::evaluate_policy;
use super::mec::maximal_end_components;
use super::model::SolverModel;
use super::qualitative::{attractor, can_reach, prob0e, prob1e};

pub const TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Iterated {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi sweeps of `update` over the states flagged in `maybe`, starting
/// from `x`.
fn iterate(
    mut x: Vec<f64>,
    maybe: &[bool],
    exec: Exec,
    update: impl Fn(usize, &[f64]) -> f64 + Sync + Send,
) -> Iterated {
    if !maybe.iter().any(|&b| b) {
        return Iterated {
            values: x,
            iterations: 0,
            residual: 0.0,
        };
    }
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < MAX_ITERATIONS {
        let next = exec.map_range(x.len(), |s| if maybe[s] { update(s, &x) } else { x[s] });
        residual = next
            .iter()
            .zip(&x)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        iterations += 1;
        if residual < TOLERANCE {
            break;
        }
    }
    Iterated {
        values: x,
        iterations,
        residual,
    }
}

fn best(values: impl Iterator<Item = f64>, sense: Sense) -> f64 {
    match sense {
        Sense::Max => values.fold(f64::NEG_INFINITY, f64::max),
        Sense::Min => values.fold(f64::INFINITY, f64::min),
    }
}

/// Maximal probability of reaching `goal`.
pub fn pmax_values(m: &SolverModel, goal: &[bool], exec: Exec) -> Iterated {
    let zero = prob0e(m, goal);
    let one = prob1e(m, goal);
    let x: Vec<f64> = one.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let maybe: Vec<bool> = (0..m.num_states()).map(|s| !zero[s] && !one[s]).collect();
    iterate(x, &maybe, exec, |s, x| {
        m.choices(s).map(|c| m.expect(c, x)).fold(0.0, f64::max)
    })
}

/// Optimal expected total reward until `goal`, over the policies that reach
/// it almost surely. States without such a policy get `+∞` (minimizing) or
/// `−∞` (maximizing); states that can enter a reward-improving end component
/// get the opposite infinity.
pub fn reward_values(m: &SolverModel, goal: &[bool], objective: Objective, exec: Exec) -> Iterated {
    let n = m.num_states();
    let sense = objective.direction();
    let (lost, won) = match sense {
        Sense::Min => (f64::INFINITY, f64::NEG_INFINITY),
        Sense::Max => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let one = prob1e(m, goal);
    let owner = m.owners();
    let allowed = |c: usize| one[owner[c]] && m.successors(c).iter().all(|&t| one[t]);

    let (_, proper) = attractor(m, goal, allowed);
    let mut x = evaluate_policy(m, goal, &proper, objective);

    let inner: Vec<bool> = (0..n).map(|s| one[s] && !goal[s]).collect();
    let improving = |c: usize| match sense {
        Sense::Max => m.reward(c) > 0.0,
        Sense::Min => m.reward(c) < 0.0,
    };
    let mut seed = vec![false; n];
    for ec in maximal_end_components(m, &inner, allowed) {
        if ec.choices.iter().any(|&c| improving(c)) {
            for &s in &ec.states {
                seed[s] = true;
            }
        }
    }
    let unbounded = can_reach(m, &seed, |c| allowed(c) && !goal[owner[c]]);

    let mut maybe = vec![false; n];
    for s in 0..n {
        if goal[s] {
            x[s] = 0.0;
        } else if !one[s] {
            x[s] = lost;
        } else if unbounded[s] {
            x[s] = won;
        } else {
            maybe[s] = true;
        }
    }
    iterate(x, &maybe, exec, |s, x| {
        best(
            m.choices(s)
                .filter(|&c| allowed(c))
                .map(|c| m.reward(c) + m.expect(c, x)),
            sense,
        )
    })
}

/// Relative slack under which a choice counts as optimal.
const OPTIMAL_SLACK: f64 = 1e-7;

fn close(q: f64, v: f64) -> bool {
    (q - v).abs() <= OPTIMAL_SLACK * v.abs().max(1.0)
}

/// Optimal choice per state: among the choices whose value matches the
/// state's, the first (least action) that moves closer to the goal.
/// Remaining states with choices take the best one, ties to the least action.
pub fn extract_choices(
    m: &SolverModel,
    goal: &[bool],
    values: &[f64],
    objective: Objective,
) -> Vec<Option<usize>> {
    let n = m.num_states();
    let owner = m.owners();
    let q = |c: usize| -> f64 {
        match objective {
            Objective::Pmax => m.expect(c, values),
            _ => m.reward(c) + m.expect(c, values),
        }
    };
    let usable = |c: usize| -> bool {
        let s = owner[c];
        if !values[s].is_finite() {
            return false;
        }
        match objective {
            Objective::Pmax => values[s] > 0.0 && close(q(c), values[s]),
            _ => m.successors(c).iter().all(|&t| values[t].is_finite()) && close(q(c), values[s]),
        }
    };
    let (_, progress) = attractor(m, goal, usable);
    let sense = objective.direction();
    (0..n)
        .map(|s| {
            if let Some(c) = progress[s] {
                return Some(c);
            }
            let mut it = m.choices(s);
            let first = it.next()?;
            let mut pick = (first, q(first));
            for c in it {
                let v = q(c);
                let better = match sense {
                    Sense::Max => v > pick.1,
                    Sense::Min => v < pick.1,
                };
                if better {
                    pick = (c, v);
                }
            }
            Some(pick.0)
        })
        .collect()
}
