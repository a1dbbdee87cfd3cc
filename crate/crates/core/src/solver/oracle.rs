//! Finite-horizon backward induction, used as an independent reference for
//! the iterative solvers on small models.

use crate::error::ModelError;
use crate::model::{Objective, Sense};

use super::model::SolverModel;

pub const MAX_STATES: usize = 2000;
pub const MAX_HORIZON: usize = 500;

/// Value standing for an unfinished run in reward objectives.
pub const UNFINISHED: f64 = 1e12;
/// Magnitudes from here on are reported as infinite.
pub const INFINITE_FROM: f64 = 1e9;

/// Optimal values over `horizon` steps. For `Pmax` a run that has not
/// reached the goal is worth 0; for reward objectives it costs
/// [`UNFINISHED`] (with the sign that makes it the worst outcome), and
/// values of that magnitude come back as infinities.
pub fn oracle_enumerate(
    m: &SolverModel,
    goal: &[bool],
    horizon: usize,
    objective: Objective,
) -> Result<Vec<f64>, ModelError> {
    let n = m.num_states();
    if n > MAX_STATES {
        return Err(ModelError::Invalid(format!(
            "oracle limited to {MAX_STATES} states, model has {n}"
        )));
    }
    if horizon > MAX_HORIZON {
        return Err(ModelError::Invalid(format!(
            "oracle limited to horizon {MAX_HORIZON}, got {horizon}"
        )));
    }
    let sense = objective.direction();
    let worst = match (objective, sense) {
        (Objective::Pmax, _) => 0.0,
        (_, Sense::Min) => UNFINISHED,
        (_, Sense::Max) => -UNFINISHED,
    };
    let at_goal = if objective == Objective::Pmax {
        1.0
    } else {
        0.0
    };
    let mut v: Vec<f64> = (0..n)
        .map(|s| if goal[s] { at_goal } else { worst })
        .collect();
    for _ in 0..horizon {
        let prev = v.clone();
        for s in 0..n {
            if goal[s] {
                continue;
            }
            let mut acc: Option<f64> = None;
            for c in m.choices(s) {
                let mut q: f64 = m.transitions(c).map(|(t, p)| p * prev[t]).sum();
                if objective != Objective::Pmax {
                    q += m.reward(c);
                }
                acc = Some(match (acc, sense) {
                    (None, _) => q,
                    (Some(a), Sense::Max) => a.max(q),
                    (Some(a), Sense::Min) => a.min(q),
                });
            }
            v[s] = acc.unwrap_or(worst);
        }
    }
    if objective != Objective::Pmax {
        for x in &mut v {
            if x.abs() >= INFINITE_FROM {
                *x = x.signum() * f64::INFINITY;
            }
        }
    }
    Ok(v)
}
