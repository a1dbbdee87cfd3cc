//! Policy synthesis on explicit MDPs: maximal reachability probability and
//! optimal expected total reward to a labelled goal set.

mod linear;
mod mec;
mod model;
mod oracle;
mod qualitative;
mod value_iter;

use std::collections::BTreeMap;

pub use linear::evaluate_policy;
pub use mec::{maximal_end_components, EndComponent};
pub use model::{sccs, SolverModel};
pub use oracle::{oracle_enumerate, INFINITE_FROM, MAX_HORIZON, MAX_STATES, UNFINISHED};
pub use qualitative::{attractor, can_reach, prob0e, prob1e};
pub use value_iter::{
    extract_choices, pmax_values, reward_values, Iterated, MAX_ITERATIONS, TOLERANCE,
};

use crate::error::{rational_string, ModelError};
use crate::labels::label_states;
use crate::model::{DomainSpec, MdpGraph, Objective, Policy};
use crate::par::Exec;
use crate::refine::check_normalization;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub objective: Objective,
    pub values: Vec<f64>,
    pub policy: Policy,
    pub iterations: usize,
    pub residual: f64,
}

impl SolveResult {
    pub fn initial_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

fn ensure_normalized(g: &MdpGraph) -> Result<(), ModelError> {
    match check_normalization(g).into_iter().next() {
        Some(v) => Err(ModelError::Unnormalized {
            state: v.state,
            action: v.action.to_string(),
            sum: rational_string(&v.sum),
        }),
        None => Ok(()),
    }
}

pub fn goal_mask(n: usize, goal: &std::collections::BTreeSet<usize>) -> Vec<bool> {
    (0..n).map(|s| goal.contains(&s)).collect()
}

/// Turns per-state choice indices into a policy over action heads.
pub fn to_policy(m: &SolverModel, choices: &[Option<usize>], objective: Objective) -> Policy {
    let mut p = Policy::new(objective);
    p.choice = choices
        .iter()
        .enumerate()
        .filter_map(|(s, c)| c.map(|c| (s, m.action(c).clone())))
        .collect::<BTreeMap<_, _>>();
    p
}

/// Solves `objective` for the goal set `goal` on a refined, annotated graph.
pub fn solve_goal(
    g: &MdpGraph,
    goal: &[bool],
    objective: Objective,
    exec: Exec,
) -> Result<SolveResult, ModelError> {
    ensure_normalized(g)?;
    let m = SolverModel::from_graph(g);
    let it = match objective {
        Objective::Pmax => pmax_values(&m, goal, exec),
        Objective::Rmin | Objective::Rmax => reward_values(&m, goal, objective, exec),
    };
    let choices = extract_choices(&m, goal, &it.values, objective);
    Ok(SolveResult {
        objective,
        policy: to_policy(&m, &choices, objective),
        values: it.values,
        iterations: it.iterations,
        residual: it.residual,
    })
}

/// Solves `objective` towards the states satisfying `label` (the objective's
/// default label when `None`).
pub fn solve(
    g: &MdpGraph,
    d: &DomainSpec,
    objective: Objective,
    label: Option<&str>,
    exec: Exec,
) -> Result<SolveResult, ModelError> {
    let label = label.unwrap_or(objective.default_label());
    let goal = label_states(g, d, label)?;
    solve_goal(g, &goal_mask(g.num_states(), &goal), objective, exec)
}
