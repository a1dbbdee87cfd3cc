use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use mdpl_core::bundled;
use mdpl_core::dsl::parse_domain;
use mdpl_core::fuzz::{random_domain, FuzzLimits};
use mdpl_core::ground::{
    apply_branch, build_graph, enabled_groundings, BranchOutcome, DEFAULT_STATE_CAP,
};
use mdpl_core::model::{DomainSpec, MdpGraph, Rational, State};
use mdpl_core::prism::encode_state;
use mdpl_core::refine::{check_normalization, refine};

type Dist = BTreeMap<Vec<i64>, Rational>;

/// Per state (as statevar vector) and action string, the merged successor
/// distribution of a refined graph.
fn observed(g: &MdpGraph, d: &DomainSpec) -> BTreeMap<Vec<i64>, BTreeMap<String, Dist>> {
    let enc: Vec<Vec<i64>> = g
        .states()
        .iter()
        .map(|s| encode_state(s, &d.statevars).unwrap())
        .collect();
    let mut out: BTreeMap<Vec<i64>, BTreeMap<String, Dist>> = BTreeMap::new();
    for s in 0..g.num_states() {
        let row = out.entry(enc[s].clone()).or_default();
        for c in g.choices(s) {
            let dist = row.entry(c.action.to_string()).or_default();
            for e in c.edges {
                *dist.entry(enc[e.dst].clone()).or_default() += e.prob;
            }
        }
    }
    out
}

fn explore(
    init: Vec<i64>,
    step: impl Fn(&[i64]) -> Vec<(String, Dist)>,
) -> BTreeMap<Vec<i64>, BTreeMap<String, Dist>> {
    let mut seen = BTreeMap::new();
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        if seen.contains_key(&s) {
            continue;
        }
        let row: BTreeMap<String, Dist> = step(&s).into_iter().collect();
        for dist in row.values() {
            queue.extend(dist.keys().cloned());
        }
        seen.insert(s, row);
    }
    seen
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Sections 0..5, proceed risks an emergency stop with probability S/10,
/// wait is safe and adds 20 to the delay.
fn agv_oracle(s: &[i64]) -> Vec<(String, Dist)> {
    let (sec, estop, delay) = (s[0], s[1], s[2]);
    if estop == 1 || sec >= 5 {
        return vec![];
    }
    let mut proceed = Dist::new();
    if sec > 0 {
        proceed.insert(vec![sec, 1, delay], r(sec, 10));
    }
    proceed.insert(vec![sec + 1, 0, delay], r(10 - sec, 10));
    let wait = Dist::from([(vec![sec + 1, 0, delay + 20], r(1, 1))]);
    vec![("proceed".into(), proceed), ("wait".into(), wait)]
}

/// Tray slots hold block types 0 (base), 1 (intermediate), 2 (top); a block
/// of type k fits any pillar of height k.
fn structure_oracle(h: &[i64]) -> Vec<(String, Dist)> {
    let names = ["b", "i", "t"];
    let slot_p = [r(6, 10), r(3, 10), r(1, 10)];
    let mut out = Vec::new();
    for x in 0..3 {
        for y in 0..3 {
            for z in 0..3 {
                let mut dist = Dist::new();
                for (slot, &k) in [x, y, z].iter().enumerate() {
                    let fits: Vec<usize> = (0..3).filter(|&p| h[p] == k).collect();
                    if fits.is_empty() {
                        *dist.entry(h.to_vec()).or_default() += slot_p[slot];
                        continue;
                    }
                    let share = slot_p[slot] / Rational::from_integer(fits.len() as i64);
                    for p in fits {
                        let mut n = h.to_vec();
                        n[p] += 1;
                        *dist.entry(n).or_default() += share;
                    }
                }
                let name = format!(
                    "tray({},{},{})",
                    names[x as usize], names[y as usize], names[z as usize]
                );
                out.push((name, dist));
            }
        }
    }
    out
}

fn compiled(name: &str) -> (DomainSpec, MdpGraph) {
    let d = parse_domain(bundled::get(name).unwrap()).unwrap();
    let g = refine(build_graph(&d, DEFAULT_STATE_CAP).unwrap());
    (d, g)
}

#[test]
fn agv_t1_matches_hand_written_dynamics() {
    let (d, g) = compiled("agv_t1");
    let want = explore(vec![0, 0, 0], agv_oracle);
    assert_eq!(want.len(), 35);
    assert_eq!(g.num_states(), 35);
    assert_eq!(g.distinct_actions().len(), 2);
    assert_eq!(observed(&g, &d), want);
}

#[test]
fn structure_t1_matches_hand_written_dynamics() {
    let (d, g) = compiled("structure_t1");
    let want = explore(vec![0, 0, 0], structure_oracle);
    assert_eq!(want.len(), 64);
    assert_eq!(g.num_states(), 64);
    assert_eq!(g.distinct_actions().len(), 27);
    assert_eq!(observed(&g, &d), want);
}

#[test]
fn bundled_counts_are_locked() {
    let want = [
        ("structure_t1", 64, 27),
        ("structure_t2", 64, 27),
        ("structure_t4", 125, 16),
        ("structure_t5", 17, 28),
        ("agv_t1", 35, 2),
        ("agv_t2", 120, 2),
        ("agv_t3", 35, 2),
        ("agv_t4", 100, 2),
        ("agv_t5", 36, 3),
        ("gripper_t1", 88, 14),
        ("gripper_t2", 28, 10),
        ("gripper_t3", 1215, 20),
        ("gripper_t4", 1279, 18),
        ("gripper_t5", 256, 18),
    ];
    for (name, states, actions) in want {
        let (_, g) = compiled(name);
        assert_eq!(
            (g.num_states(), g.distinct_actions().len()),
            (states, actions),
            "{name}"
        );
        assert!(check_normalization(&g).is_empty(), "{name}");
        assert!(g.all_reachable(), "{name}");
    }
}

/// Re-expands every state with the grounding primitives and checks the graph
/// is closed under them and has no extra states or edges.
fn assert_closed(d: &DomainSpec, g: &MdpGraph) {
    let index: HashMap<&State, usize> = g.state_index();
    let mut want: BTreeSet<(usize, String, usize, usize)> = BTreeSet::new();
    for (i, s) in g.states().iter().enumerate() {
        for schema in &d.schemas {
            for gr in enabled_groundings(s, schema, &d.facts).unwrap() {
                for (b, branch) in schema.branches.iter().enumerate() {
                    if gr.probs[b] == Rational::from_integer(0) {
                        continue;
                    }
                    match apply_branch(s, &gr.bindings, branch).unwrap() {
                        BranchOutcome::SelfLoop => {
                            want.insert((i, gr.head.to_string(), b, i));
                        }
                        BranchOutcome::Successors(next) => {
                            for (n, _) in next {
                                let j = *index.get(&n).expect("successor missing from graph");
                                want.insert((i, gr.head.to_string(), b, j));
                            }
                        }
                    }
                }
            }
        }
    }
    let got: BTreeSet<_> = g
        .edges()
        .iter()
        .map(|e| (e.src, e.action.to_string(), e.branch_idx, e.dst))
        .collect();
    assert_eq!(got, want);
}

#[test]
fn small_graphs_are_closed_under_expansion() {
    let mut checked = 0;
    for seed in 0..200 {
        let (_, d, g) = random_domain(seed, FuzzLimits::default());
        if g.num_states() <= 12 {
            assert_closed(&d, &g);
            checked += 1;
        }
    }
    assert!(checked > 20, "only {checked} small domains");
    for name in ["agv_t1", "structure_t5"] {
        let (d, g) = compiled(name);
        assert_closed(&d, &g);
    }
}

#[test]
fn cap_is_enforced() {
    let d = parse_domain(bundled::get("agv_t2").unwrap()).unwrap();
    let err = build_graph(&d, 50).unwrap_err();
    assert_eq!(err.to_string(), "state space exceeds the cap of 50 states");
}
