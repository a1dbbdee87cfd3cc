//! Reachability analysis: grounds action schemas in every reachable state and
//! records one edge per distinct successor of every effect branch.

use std::collections::HashMap;

use num_traits::Zero;

use crate::dsl::expr::{eval, eval_bool};
use crate::error::{rational_string, ModelError};
use crate::model::{
    ActionSchema, Atom, Bindings, DomainSpec, Edge, EffectBranch, EffectOp, MdpGraph, Rational,
    State, VerifyClause,
};

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// One enabled instance of a schema.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Grounding {
    pub bindings: Bindings,
    pub head: Atom,
    /// Evaluated probability of every branch, in declaration order.
    pub probs: Vec<Rational>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BranchOutcome {
    /// Distinct successors in enumeration order, with the number of delete
    /// extensions that produced each.
    Successors(Vec<(State, u32)>),
    /// Some delete atom matched nothing: the branch is a no-op.
    SelfLoop,
}

fn bindings_string(b: &Bindings) -> String {
    let parts: Vec<String> = b.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(","))
}

/// All groundings of `schema` enabled in `s`, sorted by binding values.
pub fn enabled_groundings(
    s: &State,
    schema: &ActionSchema,
    facts: &State,
) -> Result<Vec<Grounding>, ModelError> {
    let statics = facts.match_all(&schema.static_pre, &Bindings::new());
    groundings_from(s, schema, &statics)
}

fn groundings_from(
    s: &State,
    schema: &ActionSchema,
    statics: &[Bindings],
) -> Result<Vec<Grounding>, ModelError> {
    let mut candidates = Vec::new();
    for sb in statics {
        'next: for mut b in s.match_all(&schema.state_pre, sb) {
            for clause in &schema.verify {
                match clause {
                    VerifyClause::Bind(v, e) => {
                        let value = eval(e, &b)
                            .and_then(|x| x.into_term())
                            .map_err(|err| verify_error(schema, &b, err))?;
                        b.insert(v.clone(), value);
                    }
                    VerifyClause::Check(e) => {
                        if !eval_bool(e, &b).map_err(|err| verify_error(schema, &b, err))? {
                            continue 'next;
                        }
                    }
                }
            }
            candidates.push(b);
        }
    }
    candidates.sort();
    candidates.dedup();

    let mut out: Vec<Grounding> = Vec::with_capacity(candidates.len());
    for b in candidates {
        let head = schema.head().substitute(&b);
        if let Some(prev) = out.iter().find(|g| g.head == head) {
            if prev.bindings != b {
                return Err(ModelError::AmbiguousGrounding {
                    schema: schema.name.to_string(),
                    head: head.to_string(),
                    state: s.to_string(),
                });
            }
        }
        let probs = branch_probs(schema, &b)?;
        out.push(Grounding {
            bindings: b,
            head,
            probs,
        });
    }
    Ok(out)
}

fn verify_error(schema: &ActionSchema, b: &Bindings, err: crate::error::EvalError) -> ModelError {
    ModelError::eval(
        format!(
            "verify clause of `{}` with {}",
            schema.name,
            bindings_string(b)
        ),
        err,
    )
}

fn branch_probs(schema: &ActionSchema, b: &Bindings) -> Result<Vec<Rational>, ModelError> {
    let mut probs = Vec::with_capacity(schema.branches.len());
    let mut sum = Rational::zero();
    for (i, br) in schema.branches.iter().enumerate() {
        let p = eval(&br.prob, b).and_then(|v| v.as_num()).map_err(|err| {
            ModelError::eval(
                format!(
                    "probability of branch {i} of `{}` with {}",
                    schema.name,
                    bindings_string(b)
                ),
                err,
            )
        })?;
        if p < Rational::zero() || p > Rational::from_integer(1) {
            return Err(ModelError::InvalidProbability {
                schema: schema.name.to_string(),
                bindings: bindings_string(b),
                branch: i,
                value: rational_string(&p),
            });
        }
        sum += p;
        probs.push(p);
    }
    if sum != Rational::from_integer(1) {
        return Err(ModelError::ProbabilitySum {
            schema: schema.name.to_string(),
            bindings: bindings_string(b),
            sum: rational_string(&sum),
        });
    }
    Ok(probs)
}

/// Applies one effect branch. Delete atoms with residual variables are
/// matched left to right against `s`; every consistent extension yields one
/// successor.
pub fn apply_branch(
    s: &State,
    sigma: &Bindings,
    branch: &EffectBranch,
) -> Result<BranchOutcome, ModelError> {
    let dels: Vec<&Atom> = branch.dels().collect();
    let mut exts: Vec<(Bindings, Vec<Atom>)> = vec![(sigma.clone(), Vec::new())];
    for pattern in dels {
        let mut next = Vec::new();
        for (b, deleted) in &exts {
            let pat = pattern.substitute(b);
            if pat.is_ground() {
                if s.contains(&pat) {
                    let mut d = deleted.clone();
                    d.push(pat);
                    next.push((b.clone(), d));
                }
                continue;
            }
            for cand in s.with_functor(&pat) {
                let mut nb = b.clone();
                if pat.unify_with(cand, &mut nb) {
                    let mut d = deleted.clone();
                    d.push(cand.clone());
                    next.push((nb, d));
                }
            }
        }
        if next.is_empty() {
            return Ok(BranchOutcome::SelfLoop);
        }
        exts = next;
    }

    let mut out: Vec<(State, u32)> = Vec::new();
    for (b, deleted) in exts {
        let mut atoms: Vec<Atom> = s
            .atoms()
            .iter()
            .filter(|a| !deleted.contains(a))
            .cloned()
            .collect();
        for op in &branch.ops {
            if let EffectOp::Add(a) = op {
                let g = a.substitute(&b);
                if !g.is_ground() {
                    return Err(ModelError::NonGroundAdd {
                        schema: String::new(),
                        atom: g,
                    });
                }
                atoms.push(g);
            }
        }
        let next = State::canonicalize(atoms)?;
        match out.iter_mut().find(|(st, _)| *st == next) {
            Some((_, m)) => *m += 1,
            None => out.push((next, 1)),
        }
    }
    Ok(BranchOutcome::Successors(out))
}

/// Explores every state reachable from the initial state, in breadth-first
/// order. Edges carry the unsplit branch probability.
pub fn build_graph(d: &DomainSpec, cap: usize) -> Result<MdpGraph, ModelError> {
    let statics: Vec<Vec<Bindings>> = d
        .schemas
        .iter()
        .map(|s| d.facts.match_all(&s.static_pre, &Bindings::new()))
        .collect();

    let mut states = vec![d.init.clone()];
    let mut index: HashMap<State, usize> = HashMap::new();
    index.insert(d.init.clone(), 0);
    let mut edges = Vec::new();
    let mut cursor = 0;

    while cursor < states.len() {
        let src = cursor;
        cursor += 1;
        let s = states[src].clone();
        for (schema, st) in d.schemas.iter().zip(&statics) {
            for g in groundings_from(&s, schema, st)? {
                for (bi, branch) in schema.branches.iter().enumerate() {
                    let p = g.probs[bi];
                    if p.is_zero() {
                        continue;
                    }
                    let outcome = apply_branch(&s, &g.bindings, branch).map_err(|e| match e {
                        ModelError::NonGroundAdd { atom, .. } => ModelError::NonGroundAdd {
                            schema: schema.name.to_string(),
                            atom,
                        },
                        other => other,
                    })?;
                    match outcome {
                        BranchOutcome::SelfLoop => edges.push(Edge {
                            src,
                            dst: src,
                            action: g.head.clone(),
                            branch_idx: bi,
                            branch_prob: p,
                            prob: p,
                            reward: Rational::zero(),
                            multiplicity: 1,
                            self_loop: true,
                        }),
                        BranchOutcome::Successors(list) => {
                            for (next, multiplicity) in list {
                                let dst = match index.get(&next) {
                                    Some(&i) => i,
                                    None => {
                                        if states.len() >= cap {
                                            return Err(ModelError::CapExceeded { limit: cap });
                                        }
                                        let i = states.len();
                                        index.insert(next.clone(), i);
                                        states.push(next);
                                        i
                                    }
                                };
                                edges.push(Edge {
                                    src,
                                    dst,
                                    action: g.head.clone(),
                                    branch_idx: bi,
                                    branch_prob: p,
                                    prob: p,
                                    reward: Rational::zero(),
                                    multiplicity,
                                    self_loop: false,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(MdpGraph::new(states, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_domain;
    use crate::model::{Symbol, Term};

    fn atom(f: &str, args: &[i64]) -> Atom {
        Atom::new(f, args.iter().map(|&v| Term::int(v)).collect())
    }

    fn state(atoms: Vec<Atom>) -> State {
        State::canonicalize(atoms).unwrap()
    }

    const TTI: &str = "domain s;\ninit { pil(1,2), pil(2,1), pil(3,0) }\naction tti(P1, P2) { pre-state pil(P1,2), pil(P2,1); eff 0.9 { del pil(P1,2); add pil(P1,3); } eff 0.1 { del pil(P2,1); add pil(P2,2); } }\n";

    #[test]
    fn tti_grounds_once() {
        let d = parse_domain(TTI).unwrap();
        let gs = enabled_groundings(&d.init, &d.schemas[0], &d.facts).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].head.to_string(), "tti(1,2)");
        assert_eq!(
            gs[0].probs,
            vec![Rational::new(9, 10), Rational::new(1, 10)]
        );
        let out = apply_branch(&d.init, &gs[0].bindings, &d.schemas[0].branches[0]).unwrap();
        assert_eq!(
            out,
            BranchOutcome::Successors(vec![(
                state(vec![
                    atom("pil", &[1, 3]),
                    atom("pil", &[2, 1]),
                    atom("pil", &[3, 0])
                ]),
                1
            )])
        );
    }

    const AGV_STEP: &str = "domain a;\ninit { section(0), estop(0), delay(0) }\naction proceed { pre-state section(S), estop(0); verify Pno := 1 - S/10, Pyes := S/10, NS := S + 1, S < 5; eff Pyes { del estop(0); add estop(1); } eff Pno { del section(S); add section(NS); } }\n";

    #[test]
    fn proceed_is_guarded_by_last_section() {
        let d = parse_domain(AGV_STEP).unwrap();
        let s5 = state(vec![
            atom("section", &[5]),
            atom("estop", &[0]),
            atom("delay", &[0]),
        ]);
        assert!(enabled_groundings(&s5, &d.schemas[0], &d.facts)
            .unwrap()
            .is_empty());
        let s1 = state(vec![
            atom("section", &[1]),
            atom("estop", &[0]),
            atom("delay", &[0]),
        ]);
        let gs = enabled_groundings(&s1, &d.schemas[0], &d.facts).unwrap();
        assert_eq!(gs.len(), 1);
        let b = &gs[0].bindings;
        assert_eq!(b[&Symbol::new("S")], Term::int(1));
        assert_eq!(b[&Symbol::new("Pno")], Term::Num(Rational::new(9, 10)));
        assert_eq!(b[&Symbol::new("Pyes")], Term::Num(Rational::new(1, 10)));
        assert_eq!(b[&Symbol::new("NS")], Term::int(2));
    }

    #[test]
    fn residual_delete_variables_fan_out() {
        let d = parse_domain(
            "domain b;\ninit { position(1,0), position(2,0), bi }\naction place { pre-state bi; eff 0.75 { del position(Pillar,0); add position(Pillar,1); } eff 0.25 { del bi; add bo; } }\n",
        )
        .unwrap();
        let out = apply_branch(&d.init, &Bindings::new(), &d.schemas[0].branches[0]).unwrap();
        let BranchOutcome::Successors(list) = out else {
            panic!()
        };
        assert_eq!(list.len(), 2);
        assert!(list[0].0.contains(&atom("position", &[1, 1])));
        assert!(list[1].0.contains(&atom("position", &[2, 1])));
    }

    #[test]
    fn unmatched_delete_is_a_self_loop() {
        let d = parse_domain(
            "domain b;\ninit { pil(1,0) }\naction lift { pre-state pil(1,0); eff 1 { del pil(P,1); add pil(P,2); } }\n",
        )
        .unwrap();
        let out = apply_branch(&d.init, &Bindings::new(), &d.schemas[0].branches[0]).unwrap();
        assert_eq!(out, BranchOutcome::SelfLoop);
        let g = build_graph(&d, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(g.num_states(), 1);
        assert_eq!(g.edges().len(), 1);
        assert!(g.edges()[0].self_loop);
        assert_eq!(g.edges()[0].prob, Rational::from_integer(1));
    }

    #[test]
    fn symbolic_probabilities_are_checked_per_grounding() {
        let d = parse_domain(
            "domain b;\ninit { c(3) }\naction a { pre-state c(N); verify P := 1/N; eff P { del c(N); add c(0); } eff P { del c(N); add c(1); } }\n",
        )
        .unwrap();
        let err = build_graph(&d, DEFAULT_STATE_CAP).unwrap_err();
        assert!(
            matches!(err, ModelError::ProbabilitySum { ref sum, .. } if sum == "2/3"),
            "{err}"
        );
    }

    #[test]
    fn nothing_enabled_gives_single_state() {
        let d = parse_domain("domain e;\ninit { idle }\n").unwrap();
        let g = build_graph(&d, DEFAULT_STATE_CAP).unwrap();
        assert_eq!((g.num_states(), g.edges().len()), (1, 0));
    }

    #[test]
    fn cap_is_enforced() {
        let d = parse_domain(
            "domain c;\ninit { n(0) }\naction inc { pre-state n(X); verify Y := X + 1; eff 1 { del n(X); add n(Y); } }\n",
        )
        .unwrap();
        assert_eq!(
            build_graph(&d, 50).unwrap_err(),
            ModelError::CapExceeded { limit: 50 }
        );
    }
}
