use mdpl_core::bundled;
use mdpl_core::dsl::parse_domain;
use mdpl_core::ground::{build_graph, DEFAULT_STATE_CAP};
use mdpl_core::model::{Atom, Rational, Sense, State, Term};
use mdpl_core::refine::refine;
use mdpl_core::reward::{annotate, state_action_reward, Scorer};
use mdpl_core::Exec;
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Rule {
    /// `next.h <= c`
    Cap(i64),
    /// `action:put(K)` requires `K != c`
    Forbid(i64),
    /// `value v` when `cur.h = c`
    At(i64, i64),
    /// `value K` for `action:put(K)`
    Kind,
}

fn rule() -> impl Strategy<Value = Rule> {
    prop_oneof![
        (0i64..6).prop_map(Rule::Cap),
        (0i64..3).prop_map(Rule::Forbid),
        (0i64..6, 0i64..50).prop_map(|(c, v)| Rule::At(c, v)),
        Just(Rule::Kind),
    ]
}

fn text(rules: &[Rule], penalty: i64) -> String {
    let mut t = format!(
        "domain g;\npenalty {penalty};\ninit {{ h(0) }}\nstatevar h : [0..5] init 0 from h(?);\nfacts {{ k(0), k(1), k(2) }}\naction put(K) {{ pre-static k(K); pre-state h(H); eff 1 {{ del h(H); add h(H); }} }}\n"
    );
    for (i, r) in rules.iter().enumerate() {
        t += &match r {
            Rule::Cap(c) => format!("reward necessary r{i} require next.h <= {c};\n"),
            Rule::Forbid(c) => {
                format!("reward necessary r{i} match action:put(K) require K != {c};\n")
            }
            Rule::At(c, v) => format!("reward sufficient r{i} when cur.h = {c} value {v};\n"),
            Rule::Kind => format!("reward sufficient r{i} match action:put(K) value K;\n"),
        };
    }
    t
}

fn expected(rules: &[Rule], cur: i64, next: i64, k: i64, signed_penalty: i64) -> i64 {
    let violated = rules.iter().any(|r| match r {
        Rule::Cap(c) => next > *c,
        Rule::Forbid(c) => k == *c,
        _ => false,
    });
    if violated {
        return signed_penalty;
    }
    rules
        .iter()
        .map(|r| match r {
            Rule::At(c, v) if cur == *c => *v,
            Rule::Kind => k,
            _ => 0,
        })
        .sum()
}

fn h(v: i64) -> State {
    State::canonicalize(vec![Atom::new("h", vec![Term::int(v)])]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn violations_gate_and_bonuses_add_up(
        rules in prop::collection::vec(rule(), 0..6),
        cur in 0i64..6,
        next in 0i64..6,
        k in 0i64..3,
        penalty in 1i64..3000,
        max in any::<bool>(),
    ) {
        let d = parse_domain(&text(&rules, penalty)).unwrap();
        let sense = if max { Sense::Max } else { Sense::Min };
        let signed = if max { -penalty } else { penalty };
        let got = Scorer::for_domain(&d, sense)
            .score(&h(cur), &h(next), &Atom::new("put", vec![Term::int(k)]))
            .unwrap();
        prop_assert_eq!(got, Rational::from_integer(expected(&rules, cur, next, k, signed)));
    }
}

#[test]
fn agv_state_action_rewards_by_hand() {
    let d = parse_domain(bundled::get("agv_t1").unwrap()).unwrap();
    let g = refine(build_graph(&d, DEFAULT_STATE_CAP).unwrap());
    let g = annotate(g, &d, Sense::Min, Exec::Sequential).unwrap();
    let proceed = Atom::new("proceed", vec![]);
    let wait = Atom::new("wait", vec![]);
    // Section 0: proceed is safe and costs one time unit.
    assert_eq!(
        state_action_reward(&g, 0, &proceed).unwrap(),
        Rational::from_integer(1)
    );
    // Waiting costs 1 + 20/10.
    assert_eq!(
        state_action_reward(&g, 0, &wait).unwrap(),
        Rational::from_integer(3)
    );
    let s1 = g
        .states()
        .iter()
        .position(|s| s.to_canonical_string() == "delay(0),estop(0),section(1)")
        .unwrap();
    // Section 1: 9/10 * 1 + 1/10 * 1000.
    assert_eq!(
        state_action_reward(&g, s1, &proceed).unwrap(),
        Rational::new(1009, 10)
    );
}
