//! State-action tables and Monte Carlo evaluation of policies.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dsl::expr::{eval_bool, Env, Field, Value};
use crate::error::{EvalError, ModelError};
use crate::labels::label_states;
use crate::model::{Atom, DomainSpec, Edge, MdpGraph, Objective, Policy, Rational, Symbol};
use crate::par::Exec;

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum ExecutorKind {
    Exact,
    /// Picks a different enabled action with probability `p_f`.
    Faulty(f64),
    /// Picks any enabled action uniformly with probability `ε`.
    EpsilonGreedy(f64),
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Executor {
    pub kind: ExecutorKind,
    pub seed: u64,
}

impl Executor {
    pub fn exact(seed: u64) -> Self {
        Executor {
            kind: ExecutorKind::Exact,
            seed,
        }
    }

    pub fn faulty(p_f: f64, seed: u64) -> Self {
        Executor {
            kind: ExecutorKind::Faulty(p_f),
            seed,
        }
    }

    pub fn epsilon_greedy(eps: f64, seed: u64) -> Self {
        Executor {
            kind: ExecutorKind::EpsilonGreedy(eps),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let p = match self.kind {
            ExecutorKind::Exact => return Ok(()),
            ExecutorKind::Faulty(p) | ExecutorKind::EpsilonGreedy(p) => p,
        };
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(ModelError::Invalid(format!(
                "executor probability {p} is outside [0,1]"
            )))
        }
    }

    /// Index into `enabled` (length `k`) given the policy's index and one
    /// uniform draw `u`.
    fn select(&self, policy: usize, k: usize, u: f64) -> usize {
        let scaled = |u: f64, p: f64, n: usize| ((u / p * n as f64) as usize).min(n - 1);
        match self.kind {
            ExecutorKind::Exact => policy,
            ExecutorKind::Faulty(p) => {
                if k < 2 || u >= p {
                    return policy;
                }
                let j = scaled(u, p, k - 1);
                if j >= policy {
                    j + 1
                } else {
                    j
                }
            }
            ExecutorKind::EpsilonGreedy(e) => {
                if u >= e {
                    policy
                } else {
                    scaled(u, e, k)
                }
            }
        }
    }
}

impl fmt::Display for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ExecutorKind::Exact => f.write_str("exact"),
            ExecutorKind::Faulty(p) => write!(f, "faulty({p})"),
            ExecutorKind::EpsilonGreedy(e) => write!(f, "epsilon-greedy({e})"),
        }
    }
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial)
}

fn sample_edge<'a, R: Rng + ?Sized>(edges: &'a [Edge], rng: &mut R) -> &'a Edge {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for e in edges {
        acc += e.prob.to_f64().unwrap_or(0.0);
        if u < acc {
            return e;
        }
    }
    edges.last().expect("choices have at least one edge")
}

/// Samples one successor of `a` in `s`.
pub fn step<R: Rng + ?Sized>(
    g: &MdpGraph,
    s: usize,
    a: &Atom,
    rng: &mut R,
) -> Result<(usize, Rational), ModelError> {
    let c = g.choice(s, a).ok_or_else(|| ModelError::NotEnabled {
        state: s,
        action: a.to_string(),
    })?;
    let e = sample_edge(c.edges, rng);
    Ok((e.dst, e.reward))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimReport {
    pub executor: String,
    pub label: String,
    pub seed: u64,
    pub max_steps: usize,
    pub trials: u64,
    pub successes: u64,
    pub success_ratio: Rational,
    pub total_actions: u64,
    pub action_counts: BTreeMap<String, u64>,
    pub classifier_counts: BTreeMap<String, u64>,
}

impl SimReport {
    pub fn ratio(&self) -> f64 {
        self.success_ratio.to_f64().unwrap_or(f64::NAN)
    }

    /// `section,key,value` rows.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |a: &str, b: &str, c: String| {
            w.write_record([a, b, c.as_str()]).expect("in-memory write");
        };
        row("section", "key", "value".into());
        row("run", "executor", self.executor.clone());
        row("run", "label", self.label.clone());
        row("run", "seed", self.seed.to_string());
        row("run", "max_steps", self.max_steps.to_string());
        row("result", "trials", self.trials.to_string());
        row("result", "successes", self.successes.to_string());
        row("result", "success_ratio", format!("{:.6}", self.ratio()));
        row("result", "total_actions", self.total_actions.to_string());
        for (a, n) in &self.action_counts {
            row("action", a, n.to_string());
        }
        for (c, n) in &self.classifier_counts {
            row("classifier", c, n.to_string());
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "executor": self.executor,
            "label": self.label,
            "seed": self.seed,
            "max_steps": self.max_steps,
            "trials": self.trials,
            "successes": self.successes,
            "success_ratio": self.ratio(),
            "total_actions": self.total_actions,
            "action_counts": self.action_counts,
            "classifier_counts": self.classifier_counts,
        })
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "executor:      {} (seed {})", self.executor, self.seed)?;
        writeln!(
            f,
            "success ratio: {:.4} ({}/{} trials reached `{}` within {} steps)",
            self.ratio(),
            self.successes,
            self.trials,
            self.label,
            self.max_steps
        )?;
        writeln!(f, "total actions: {}", self.total_actions)?;
        for (c, n) in &self.classifier_counts {
            writeln!(f, "  {c}: {n}")?;
        }
        Ok(())
    }
}

struct ActionEnv<'a>(&'a Atom);

impl Env for ActionEnv<'_> {
    fn var(&self, _: &Symbol) -> Option<Value> {
        None
    }

    fn field(&self, field: &Field) -> Result<Value, EvalError> {
        match field {
            Field::ActionName => Ok(Value::Sym(self.0.functor.clone())),
            Field::ActionArg(k) => self
                .0
                .args
                .get(k - 1)
                .ok_or_else(|| EvalError::Unavailable(field.to_string()))
                .and_then(Value::from_term),
            _ => Err(EvalError::Unavailable(field.to_string())),
        }
    }
}

/// Per-state choices as edge ranges, with the policy's pick.
struct Runtime<'a> {
    g: &'a MdpGraph,
    actions: Vec<&'a Atom>,
    choices: Vec<Vec<(usize, std::ops::Range<usize>)>>,
    policy: Vec<Option<usize>>,
    goal: Vec<bool>,
}

impl<'a> Runtime<'a> {
    fn new(g: &'a MdpGraph, p: &Policy, goal: Vec<bool>) -> Self {
        let actions: Vec<&Atom> = g.distinct_actions().into_iter().collect();
        let mut choices = Vec::with_capacity(g.num_states());
        let mut policy = Vec::with_capacity(g.num_states());
        for s in 0..g.num_states() {
            let r = g.out_range(s);
            let edges = g.edges();
            let mut cs = Vec::new();
            let mut start = r.start;
            while start < r.end {
                let mut end = start + 1;
                while end < r.end && edges[end].action == edges[start].action {
                    end += 1;
                }
                let id = actions
                    .binary_search(&&edges[start].action)
                    .expect("action index covers every edge");
                cs.push((id, start..end));
                start = end;
            }
            let pick = p
                .get(s)
                .and_then(|a| cs.iter().position(|(id, _)| actions[*id] == a));
            policy.push(pick);
            choices.push(cs);
        }
        Runtime {
            g,
            actions,
            choices,
            policy,
            goal,
        }
    }

    fn trial(&self, exec: &Executor, trial: u64, max_steps: usize) -> (bool, Vec<u64>) {
        let mut rng = trial_rng(exec.seed, trial);
        let mut counts = vec![0u64; self.actions.len()];
        let mut s = 0;
        for _ in 0..max_steps {
            if self.goal[s] {
                return (true, counts);
            }
            let cs = &self.choices[s];
            let Some(policy) = self.policy[s] else {
                return (false, counts);
            };
            let u: f64 = rng.random();
            let (id, range) = &cs[exec.select(policy, cs.len(), u)];
            counts[*id] += 1;
            s = sample_edge(&self.g.edges()[range.clone()], &mut rng).dst;
        }
        (self.goal[s], counts)
    }
}

/// Runs `trials` independent episodes from state 0. A trial succeeds when a
/// state in `label` is reached within `max_steps` actions; states without a
/// policy action end the trial as a failure.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    g: &MdpGraph,
    d: &DomainSpec,
    p: &Policy,
    exec: &Executor,
    label: &str,
    trials: u64,
    max_steps: Option<usize>,
    mode: Exec,
) -> Result<SimReport, ModelError> {
    exec.validate()?;
    if trials == 0 {
        return Err(ModelError::Invalid("at least one trial is required".into()));
    }
    let goal_set = label_states(g, d, label)?;
    let goal = (0..g.num_states()).map(|s| goal_set.contains(&s)).collect();
    let max_steps = max_steps.unwrap_or(10 * g.num_states());
    let rt = Runtime::new(g, p, goal);

    let mut classified = Vec::with_capacity(d.classifiers.len());
    for c in &d.classifiers {
        let mut hits = Vec::with_capacity(rt.actions.len());
        for a in &rt.actions {
            hits.push(
                eval_bool(&c.cond, &ActionEnv(a))
                    .map_err(|e| ModelError::eval(format!("classifier `{}`", c.name), e))?,
            );
        }
        classified.push(hits);
    }

    let outcomes = mode.map_range(trials as usize, |t| rt.trial(exec, t as u64, max_steps));
    let mut successes = 0;
    let mut counts = vec![0u64; rt.actions.len()];
    for (ok, c) in outcomes {
        successes += ok as u64;
        for (acc, n) in counts.iter_mut().zip(c) {
            *acc += n;
        }
    }
    let action_counts = rt
        .actions
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(a, &n)| (a.to_string(), n))
        .collect();
    let classifier_counts = d
        .classifiers
        .iter()
        .zip(&classified)
        .map(|(c, hits)| {
            let n = hits
                .iter()
                .zip(&counts)
                .filter(|(h, _)| **h)
                .map(|(_, n)| n)
                .sum();
            (c.name.to_string(), n)
        })
        .collect();
    Ok(SimReport {
        executor: exec.to_string(),
        label: label.to_string(),
        seed: exec.seed,
        max_steps,
        trials,
        successes,
        success_ratio: Rational::new(successes as i64, trials as i64),
        total_actions: counts.iter().sum(),
        action_counts,
        classifier_counts,
    })
}

pub const TABLE_HEADER: [&str; 3] = ["state_index", "state", "action"];

/// One CSV row per state with a choice, by state index.
pub fn export_table(p: &Policy, g: &MdpGraph) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER).expect("in-memory write");
    for (s, a) in &p.choice {
        w.write_record([
            s.to_string(),
            g.state(*s).to_canonical_string(),
            a.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("malformed policy table: {0}")]
    Malformed(String),
    #[error("policy table is stale at state {index}: table has [{table}], model has [{model}]")]
    Stale {
        index: usize,
        table: String,
        model: String,
    },
    #[error("policy table row {index} names a state the model does not have")]
    UnknownState { index: usize },
    #[error("policy table picks `{action}` in state {index}, which is not enabled there")]
    NotEnabled { index: usize, action: String },
}

/// Reads a table written by [`export_table`] and checks it against `g`.
pub fn import_table(text: &str, g: &MdpGraph, objective: Objective) -> Result<Policy, TableError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| TableError::Malformed(e.to_string()))?
        .clone();
    if header.iter().ne(TABLE_HEADER) {
        return Err(TableError::Malformed(format!(
            "expected header `{}`",
            TABLE_HEADER.join(",")
        )));
    }
    let mut p = Policy::new(objective);
    for rec in r.records() {
        let rec = rec.map_err(|e| TableError::Malformed(e.to_string()))?;
        let index: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| TableError::Malformed(format!("bad state index `{}`", &rec[0])))?;
        if index >= g.num_states() {
            return Err(TableError::UnknownState { index });
        }
        let model = g.state(index).to_canonical_string();
        if rec[1] != model {
            return Err(TableError::Stale {
                index,
                table: rec[1].to_string(),
                model,
            });
        }
        let action = g
            .enabled(index)
            .into_iter()
            .find(|a| a.to_string() == rec[2])
            .ok_or_else(|| TableError::NotEnabled {
                index,
                action: rec[2].to_string(),
            })?;
        p.choice.insert(index, action.clone());
    }
    Ok(p)
}
