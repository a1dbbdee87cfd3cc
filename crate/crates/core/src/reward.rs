//! Transition rewards from necessary and sufficient rules, and their
//! collapse to state-action rewards.

use std::cell::OnceCell;

use num_traits::{Signed, Zero};

use crate::dsl::expr::{eval, eval_bool, Env, Field, Value};
use crate::error::{rational_string, EncodingError, EvalError, ModelError};
use crate::model::{
    Atom, Bindings, DomainSpec, Edge, MdpGraph, PatternScope, Rational, RewardRule, RuleKind,
    Sense, State, StateVarDecl, Symbol,
};
use crate::par::Exec;
use crate::prism::encode::encode_state;

/// Penalty with the sign that makes violations unattractive under `sense`.
pub fn signed_penalty(magnitude: Rational, sense: Sense) -> Rational {
    match sense {
        Sense::Max => -magnitude.abs(),
        Sense::Min => magnitude.abs(),
    }
}

/// Evaluation context for one transition.
struct TransitionEnv<'a> {
    bindings: &'a Bindings,
    cur: &'a State,
    next: &'a State,
    action: &'a Atom,
    statevars: &'a [StateVarDecl],
    cur_enc: &'a OnceCell<Result<Vec<i64>, EncodingError>>,
    next_enc: &'a OnceCell<Result<Vec<i64>, EncodingError>>,
}

impl TransitionEnv<'_> {
    fn statevar(
        &self,
        name: &Symbol,
        state: &State,
        cell: &OnceCell<Result<Vec<i64>, EncodingError>>,
    ) -> Result<Value, EvalError> {
        let i = self
            .statevars
            .iter()
            .position(|v| v.name == *name)
            .ok_or_else(|| EvalError::UnknownStateVar(name.to_string()))?;
        let enc = cell
            .get_or_init(|| encode_state(state, self.statevars))
            .as_ref()
            .map_err(|e| EvalError::Encoding(e.clone()))?;
        Ok(Value::Num(Rational::from_integer(enc[i])))
    }
}

impl Env for TransitionEnv<'_> {
    fn var(&self, name: &Symbol) -> Option<Value> {
        self.bindings.var(name)
    }

    fn field(&self, field: &Field) -> Result<Value, EvalError> {
        match field {
            Field::Cur(v) => self.statevar(v, self.cur, self.cur_enc),
            Field::Next(v) => self.statevar(v, self.next, self.next_enc),
            Field::ActionName => Ok(Value::Sym(self.action.functor.clone())),
            Field::ActionArg(k) => self
                .action
                .args
                .get(k - 1)
                .ok_or_else(|| EvalError::Unavailable(field.to_string()))
                .and_then(Value::from_term),
        }
    }
}

/// Scores transitions against a fixed rule set.
pub struct Scorer<'a> {
    rules: &'a [RewardRule],
    statevars: &'a [StateVarDecl],
    penalty: Rational,
}

impl<'a> Scorer<'a> {
    pub fn new(
        rules: &'a [RewardRule],
        statevars: &'a [StateVarDecl],
        penalty_magnitude: Rational,
        sense: Sense,
    ) -> Self {
        Scorer {
            rules,
            statevars,
            penalty: signed_penalty(penalty_magnitude, sense),
        }
    }

    pub fn for_domain(d: &'a DomainSpec, sense: Sense) -> Self {
        Scorer::new(&d.rewards, &d.statevars, d.penalty, sense)
    }

    pub fn penalty(&self) -> Rational {
        self.penalty
    }

    /// A violated necessary rule yields the penalty and nothing else;
    /// otherwise the values of all matching sufficient rules add up.
    pub fn score(&self, cur: &State, next: &State, action: &Atom) -> Result<Rational, ModelError> {
        let cur_enc = OnceCell::new();
        let next_enc = OnceCell::new();
        let mut total = Rational::zero();
        let mut sufficient = Vec::new();
        for rule in self.rules {
            if rule.kind == RuleKind::Sufficient {
                sufficient.push(rule);
                continue;
            }
            for b in rule_bindings(rule, cur, next, action) {
                let env = TransitionEnv {
                    bindings: &b,
                    cur,
                    next,
                    action,
                    statevars: self.statevars,
                    cur_enc: &cur_enc,
                    next_enc: &next_enc,
                };
                if !guard_holds(rule, &env)? {
                    continue;
                }
                let require = rule
                    .require
                    .as_ref()
                    .expect("necessary rules carry `require`");
                if !eval_bool(require, &env).map_err(|e| rule_error(rule, e))? {
                    return Ok(self.penalty);
                }
            }
        }
        for rule in sufficient {
            for b in rule_bindings(rule, cur, next, action) {
                let env = TransitionEnv {
                    bindings: &b,
                    cur,
                    next,
                    action,
                    statevars: self.statevars,
                    cur_enc: &cur_enc,
                    next_enc: &next_enc,
                };
                if !guard_holds(rule, &env)? {
                    continue;
                }
                let value = rule.value.as_ref().expect("sufficient rules carry `value`");
                let v = eval(value, &env)
                    .and_then(|v| v.as_num())
                    .map_err(|e| rule_error(rule, e))?;
                if v.is_negative() {
                    return Err(ModelError::NegativeReward {
                        rule: rule.name.to_string(),
                        value: rational_string(&v),
                    });
                }
                total += v;
                break;
            }
        }
        Ok(total)
    }
}

fn guard_holds(rule: &RewardRule, env: &TransitionEnv<'_>) -> Result<bool, ModelError> {
    match &rule.guard {
        Some(g) => eval_bool(g, env).map_err(|e| rule_error(rule, e)),
        None => Ok(true),
    }
}

fn rule_error(rule: &RewardRule, e: EvalError) -> ModelError {
    ModelError::eval(format!("reward rule `{}`", rule.name), e)
}

/// Bindings under which all patterns of `rule` match, left to right.
fn rule_bindings(rule: &RewardRule, cur: &State, next: &State, action: &Atom) -> Vec<Bindings> {
    let mut acc = vec![Bindings::new()];
    for p in &rule.patterns {
        let mut out = Vec::new();
        for b in &acc {
            match p.scope {
                PatternScope::Cur => out.extend(cur.match_all(std::slice::from_ref(&p.atom), b)),
                PatternScope::Next => out.extend(next.match_all(std::slice::from_ref(&p.atom), b)),
                PatternScope::Action => {
                    let mut nb = b.clone();
                    if p.atom.unify_with(action, &mut nb) {
                        out.push(nb);
                    }
                }
            }
        }
        acc = out;
        if acc.is_empty() {
            break;
        }
    }
    acc
}

pub fn score_edge(
    e: &Edge,
    g: &MdpGraph,
    d: &DomainSpec,
    sense: Sense,
) -> Result<Rational, ModelError> {
    Scorer::for_domain(d, sense).score(g.state(e.src), g.state(e.dst), &e.action)
}

/// Scores every edge. Errors are reported for the first failing edge in
/// edge order, whatever the execution mode.
pub fn annotate(
    g: MdpGraph,
    d: &DomainSpec,
    sense: Sense,
    exec: Exec,
) -> Result<MdpGraph, ModelError> {
    let scorer = Scorer::for_domain(d, sense);
    let scores = exec.map(g.edges(), |e| {
        scorer.score(g.state(e.src), g.state(e.dst), &e.action)
    });
    let scores: Vec<Rational> = scores.into_iter().collect::<Result<_, _>>()?;
    let mut i = 0;
    Ok(g.map_edges(|e| {
        e.reward = scores[i];
        i += 1;
    }))
}

/// Expected edge reward of taking `a` in `s`.
pub fn state_action_reward(g: &MdpGraph, s: usize, a: &Atom) -> Result<Rational, ModelError> {
    let c = g.choice(s, a).ok_or_else(|| ModelError::NotEnabled {
        state: s,
        action: a.to_string(),
    })?;
    Ok(c.edges
        .iter()
        .fold(Rational::zero(), |acc, e| acc + e.prob * e.reward))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_domain;
    use crate::ground::{build_graph, DEFAULT_STATE_CAP};
    use crate::model::Term;
    use crate::refine::refine;

    fn state(atoms: &[(&str, i64)]) -> State {
        State::canonicalize(atoms.iter().map(|&(f, v)| Atom::new(f, vec![Term::int(v)]))).unwrap()
    }

    const RULES: &str = "domain a;\ninit { section(0), estop(0) }\nstatevar section : [0..5] init 0 from section(?);\nstatevar estop : [0..1] init 0 from estop(?);\nreward necessary no_emergency_stop require next.estop = 0;\nreward sufficient arrive match next:section(S) when S = 5 value 100;\n";

    #[test]
    fn estop_is_penalized() {
        let d = parse_domain(RULES).unwrap();
        let sc = Scorer::for_domain(&d, Sense::Max);
        let r = sc
            .score(
                &state(&[("section", 4), ("estop", 0)]),
                &state(&[("section", 5), ("estop", 1)]),
                &Atom::new("proceed", vec![]),
            )
            .unwrap();
        assert_eq!(r, Rational::from_integer(-1000));
        let sc = Scorer::for_domain(&d, Sense::Min);
        let r = sc
            .score(
                &state(&[("section", 4), ("estop", 0)]),
                &state(&[("section", 4), ("estop", 1)]),
                &Atom::new("proceed", vec![]),
            )
            .unwrap();
        assert_eq!(r, Rational::from_integer(1000));
    }

    #[test]
    fn arriving_at_section_five_pays() {
        let d = parse_domain(RULES).unwrap();
        let sc = Scorer::for_domain(&d, Sense::Max);
        let proceed = Atom::new("proceed", vec![]);
        let r = sc
            .score(
                &state(&[("section", 4), ("estop", 0)]),
                &state(&[("section", 5), ("estop", 0)]),
                &proceed,
            )
            .unwrap();
        assert_eq!(r, Rational::from_integer(100));
        let r = sc
            .score(
                &state(&[("section", 2), ("estop", 0)]),
                &state(&[("section", 3), ("estop", 0)]),
                &proceed,
            )
            .unwrap();
        assert_eq!(r, Rational::zero());
    }

    #[test]
    fn negative_sufficient_value_is_an_error() {
        let d = parse_domain(
            "domain n;\ninit { t(0) }\nreward sufficient bad match cur:t(X) value X - 1;\n",
        )
        .unwrap();
        let sc = Scorer::for_domain(&d, Sense::Max);
        let s = state(&[("t", 0)]);
        let err = sc.score(&s, &s, &Atom::new("a", vec![])).unwrap_err();
        assert!(matches!(err, ModelError::NegativeReward { ref rule, .. } if rule == "bad"));
    }

    #[test]
    fn expectation_over_edges() {
        let d = parse_domain(
            "domain x;\ninit { at(0), slot(1), slot(2) }\nstatevar at : [0..3] init 0 from at(?);\naction go { pre-state at(0); eff 0.9 { del at(0); del slot(P); add at(P); } eff 0.1 { del at(0); add at(3); } }\nreward sufficient ten when next.at != 3 value 10;\n",
        )
        .unwrap();
        let g = build_graph(&d, DEFAULT_STATE_CAP).unwrap();
        let g = annotate(refine(g), &d, Sense::Max, Exec::Sequential).unwrap();
        let go = Atom::new("go", vec![]);
        assert_eq!(g.choice(0, &go).unwrap().edges.len(), 3);
        assert_eq!(
            state_action_reward(&g, 0, &go).unwrap(),
            Rational::from_integer(9)
        );
        assert!(matches!(
            state_action_reward(&g, 1, &go),
            Err(ModelError::NotEnabled { state: 1, .. })
        ));
    }
}
