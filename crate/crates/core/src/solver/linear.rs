//! Exact evaluation of a fixed memoryless policy by solving the induced
//! linear system one strongly connected component at a time.

use crate::model::Objective;

use super::model::{sccs, SolverModel};

/// Values of the Markov chain obtained by fixing `choice` (indexed by
/// state). Goal states are absorbing. Reward objectives give `±∞` to states
/// that miss the goal with positive probability.
pub fn evaluate_policy(
    m: &SolverModel,
    goal: &[bool],
    choice: &[Option<usize>],
    objective: Objective,
) -> Vec<f64> {
    let n = m.num_states();
    let step = |s: usize| -> Option<usize> {
        if goal[s] {
            None
        } else {
            choice[s]
        }
    };

    // states that reach the goal with positive probability
    let mut reach = goal.to_vec();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if !reach[s] && step(s).is_some_and(|c| m.successors(c).iter().any(|&t| reach[t])) {
                reach[s] = true;
                changed = true;
            }
        }
    }

    let mut x = vec![0.0; n];
    let mut unknown = vec![false; n];
    match objective {
        Objective::Pmax => {
            for s in 0..n {
                if goal[s] {
                    x[s] = 1.0;
                } else if reach[s] {
                    unknown[s] = true;
                }
            }
        }
        Objective::Rmin | Objective::Rmax => {
            // states that may fall into a region never reaching the goal
            let mut lost: Vec<bool> = (0..n).map(|s| !reach[s]).collect();
            let mut changed = true;
            while changed {
                changed = false;
                for s in 0..n {
                    if !lost[s] && step(s).is_some_and(|c| m.successors(c).iter().any(|&t| lost[t]))
                    {
                        lost[s] = true;
                        changed = true;
                    }
                }
            }
            let inf = match objective {
                Objective::Rmax => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            };
            for s in 0..n {
                if lost[s] {
                    x[s] = inf;
                } else if !goal[s] {
                    unknown[s] = true;
                }
            }
        }
    }

    let with_reward = objective != Objective::Pmax;
    let comps = sccs(n, |v, out| {
        if unknown[v] {
            if let Some(c) = step(v) {
                out.extend(m.successors(c).iter().filter(|&&t| unknown[t]));
            }
        }
    });
    for comp in comps {
        if !unknown[comp[0]] {
            continue;
        }
        let k = comp.len();
        let pos = |s: usize| comp.binary_search(&s).ok();
        let mut a = vec![vec![0.0; k + 1]; k];
        for (i, &s) in comp.iter().enumerate() {
            let c = step(s).expect("unknown states have a choice");
            a[i][i] += 1.0;
            if with_reward {
                a[i][k] += m.reward(c);
            }
            for (t, p) in m.transitions(c) {
                match pos(t) {
                    Some(j) => a[i][j] -= p,
                    None => a[i][k] += p * x[t],
                }
            }
        }
        let sol = gauss(a);
        for (i, &s) in comp.iter().enumerate() {
            x[s] = sol[i];
        }
    }
    x
}

/// Solves the augmented system `a` by Gaussian elimination with partial
/// pivoting.
fn gauss(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty pivot range");
        a.swap(col, piv);
        let p = a[col][col];
        if p == 0.0 {
            continue;
        }
        for row in col + 1..k {
            let f = a[row][col] / p;
            if f != 0.0 {
                let (top, rest) = a.split_at_mut(row);
                for (x, y) in rest[0][col..=k].iter_mut().zip(&top[col][col..=k]) {
                    *x -= f * y;
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][k] - s) / a[i][i];
    }
    x
}
