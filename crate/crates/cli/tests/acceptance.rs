//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use mdpl_core::bundled;
use mdpl_core::dsl::parse_domain;
use mdpl_core::fuzz::{random_domain, FuzzLimits};
use mdpl_core::ground::{build_graph, DEFAULT_STATE_CAP};
use mdpl_core::labels::label_states;
use mdpl_core::model::{Atom, DomainSpec, Edge, MdpGraph, Objective, Rational, Sense, State, Term};
use mdpl_core::pipeline::compile;
use mdpl_core::prism::parse::compare_with_source;
use mdpl_core::prism::{emit, parse_prism_subset, EmitMode};
use mdpl_core::refine::{check_normalization, refine};
use mdpl_core::reward::Scorer;
use mdpl_core::sim::{simulate, Executor};
use mdpl_core::solver::{
    evaluate_policy, extract_choices, goal_mask, oracle_enumerate, solve, SolverModel, MAX_STATES,
};
use mdpl_core::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// States and grounded actions reported for each test of each use case.
const REFERENCE_COUNTS: [(&str, usize, usize); 15] = [
    ("structure_t1", 64, 27),
    ("structure_t2", 64, 27),
    ("structure_t3", 1024, 27),
    ("structure_t4", 125, 16),
    ("structure_t5", 17, 28),
    ("agv_t1", 35, 2),
    ("agv_t2", 120, 2),
    ("agv_t3", 48, 2),
    ("agv_t4", 78, 2),
    ("agv_t5", 194, 3),
    ("gripper_t1", 14, 59),
    ("gripper_t2", 17, 5),
    ("gripper_t3", 104, 12),
    ("gripper_t4", 2027, 18),
    ("gripper_t5", 263, 19),
];

fn domain(name: &str) -> DomainSpec {
    parse_domain(bundled::get(name).expect("bundled")).expect("bundled domains parse")
}

fn graph(d: &DomainSpec, objective: Objective) -> MdpGraph {
    compile(d, objective.sense(), DEFAULT_STATE_CAP, Exec::default())
        .expect("bundled domains compile")
        .graph
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_counts() -> Outcome {
    let mut failures = Vec::new();
    for (name, states, actions) in [("agv_t1", 35, 2), ("structure_t1", 64, 27)] {
        let d = domain(name);
        let t = Instant::now();
        let c = compile(&d, Sense::Min, DEFAULT_STATE_CAP, Exec::default())
            .map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        let got = (c.stats.states, c.stats.actions);
        println!(
            "    {name}: {} states, {} actions in {secs:.4}s",
            got.0, got.1
        );
        if got != (states, actions) || secs >= 1.0 {
            failures.push(format!(
                "{name}: got {got:?} in {secs:.3}s, want ({states}, {actions}) under 1s"
            ));
        }
    }
    for (name, states, actions) in REFERENCE_COUNTS {
        let g = graph(&domain(name), Objective::Pmax);
        let got = (g.num_states(), g.distinct_actions().len());
        let verdict = if got == (states, actions) {
            "match".to_string()
        } else {
            format!("differs from reference {states}/{actions}; assumptions in the domain header")
        };
        println!(
            "    {name:<13} {:>5} states {:>3} actions  {verdict}",
            got.0, got.1
        );
    }
    if failures.is_empty() {
        Ok("agv_t1 35/2 and structure_t1 64/27".into())
    } else {
        Err(failures.join("; "))
    }
}

fn c2_split() -> Outcome {
    let st = |v: i64| State::canonicalize(vec![Atom::new("at", vec![Term::int(v)])]).unwrap();
    let edge = |dst: usize, branch: usize, p: Rational| Edge {
        src: 0,
        dst,
        action: Atom::new("a", vec![]),
        branch_idx: branch,
        branch_prob: p,
        prob: p,
        reward: Rational::from_integer(0),
        multiplicity: 1,
        self_loop: false,
    };
    let g = MdpGraph::new(
        vec![st(0), st(1), st(2), st(3)],
        vec![
            edge(1, 0, Rational::new(9, 10)),
            edge(2, 0, Rational::new(9, 10)),
            edge(3, 1, Rational::new(1, 10)),
        ],
    );
    let probs: Vec<Rational> = refine(g).edges().iter().map(|e| e.prob).collect();
    ensure(
        probs
            == [
                Rational::new(9, 20),
                Rational::new(9, 20),
                Rational::new(1, 10),
            ],
        || format!("got {probs:?}"),
    )?;
    Ok("0.9 over two successors gives 9/20 each".into())
}

const BI: &str = "domain toy;
init { position(1,0), position(2,0) }
action bi {
  eff 0.75 { del position(Pillar,0); add position(Pillar,1); }
  eff 0.25 { del position(Pillar,1); add position(Pillar,2); }
}
";

fn c3_toy() -> Outcome {
    let d = parse_domain(BI).map_err(|e| format!("{e:?}"))?;
    let g = refine(build_graph(&d, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?);
    let first: Vec<(String, Rational)> = g
        .out_edges(0)
        .iter()
        .filter(|e| e.branch_idx == 0)
        .map(|e| (g.state(e.dst).to_canonical_string(), e.prob))
        .collect();
    let want = vec![
        (
            "position(1,1),position(2,0)".to_string(),
            Rational::new(3, 8),
        ),
        (
            "position(1,0),position(2,1)".to_string(),
            Rational::new(3, 8),
        ),
    ];
    ensure(first == want, || format!("got {first:?}"))?;
    Ok("two successors at 3/8 each".into())
}

fn c4_normalization() -> Outcome {
    let mut edges = 0;
    for (name, _) in bundled::DOMAINS {
        let g = graph(&domain(name), Objective::Pmax);
        if let Some(v) = check_normalization(&g).first() {
            return Err(format!("{name}: {v}"));
        }
        edges += g.edges().len();
    }
    for seed in 0..200 {
        let (text, _, g) = random_domain(seed, FuzzLimits::default());
        let g = refine(g);
        ensure(g.num_states() <= 500, || {
            format!("fuzz {seed}: {} states", g.num_states())
        })?;
        if let Some(v) = check_normalization(&g).first() {
            return Err(format!("fuzz {seed}: {v}\n{text}"));
        }
        edges += g.edges().len();
    }
    Ok(format!("15 bundled + 200 random domains, {edges} edges"))
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

fn c5_oracle() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (name, _) in bundled::DOMAINS {
        let d = domain(name);
        for objective in [Objective::Pmax, Objective::Rmin, Objective::Rmax] {
            let g = graph(&d, objective);
            if g.num_states() > MAX_STATES {
                continue;
            }
            let r = solve(&g, &d, objective, None, Exec::default()).map_err(|e| e.to_string())?;
            let m = SolverModel::from_graph(&g);
            let goal = goal_mask(
                g.num_states(),
                &label_states(&g, &d, objective.default_label()).map_err(|e| e.to_string())?,
            );
            let oracle = oracle_enumerate(&m, &goal, 500, objective).map_err(|e| e.to_string())?;
            let gap = max_gap(&r.values, &oracle);
            ensure(gap <= 1e-6, || {
                format!("{name} {objective}: oracle gap {gap:e}")
            })?;
            worst = worst.max(gap);
            if objective == Objective::Pmax {
                let choices = extract_choices(&m, &goal, &r.values, objective);
                let exact = evaluate_policy(&m, &goal, &choices, objective);
                let gap = max_gap(&r.values, &exact);
                ensure(gap <= 1e-6, || {
                    format!("{name}: policy evaluation gap {gap:e}")
                })?;
                worst = worst.max(gap);
            }
            checked += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{checked} domain/objective pairs, max gap {worst:.1e}, {secs:.1}s"
    ))
}

fn storm_value(prism: &Path, prop: &str) -> Option<f64> {
    let out = Command::new("storm")
        .arg("--prism")
        .arg(prism)
        .arg("--prop")
        .arg(prop)
        .output()
        .ok()?;
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text
        .lines()
        .find(|l| l.contains("Result (for initial states):"))?;
    line.rsplit(':').next()?.trim().parse().ok()
}

fn c6_prism() -> Outcome {
    let storm = Command::new("storm").arg("--version").output().is_ok();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut storm_checked = 0;
    for (name, _) in bundled::DOMAINS {
        let d = domain(name);
        let g = graph(&d, Objective::Rmin);
        for mode in [EmitMode::Indexed, EmitMode::Factored] {
            let text = emit(&g, &d, mode).map_err(|e| format!("{name}: {e}"))?;
            let parsed = parse_prism_subset(&text).map_err(|e| format!("{name} {mode:?}: {e}"))?;
            compare_with_source(&parsed, &g, &d, mode)
                .map_err(|e| format!("{name} {mode:?}: {e}"))?;
            if storm && mode == EmitMode::Indexed {
                let path = dir.path().join(format!("{name}.prism"));
                std::fs::write(&path, &text).map_err(|e| e.to_string())?;
                for objective in [Objective::Pmax, Objective::Rmin] {
                    let want = solve(&g, &d, objective, None, Exec::default())
                        .map_err(|e| e.to_string())?
                        .initial_value();
                    let prop = match objective {
                        Objective::Pmax => "Pmax=? [ F \"doneP\" ]",
                        _ => "Rmin=? [ F \"doneR\" ]",
                    };
                    if let Some(v) = storm_value(&path, prop) {
                        ensure(v == want || (v - want).abs() <= 1e-6, || {
                            format!("{name} {objective}: storm {v} vs {want}")
                        })?;
                        storm_checked += 1;
                    }
                }
            }
        }
    }
    let external = if storm {
        format!("{storm_checked} values confirmed by storm")
    } else {
        "storm not installed, external check skipped".into()
    };
    Ok(format!("15 domains x 2 encodings isomorphic; {external}"))
}

fn sigma(v: f64, n: u64) -> f64 {
    (v * (1.0 - v) / n as f64).sqrt()
}

fn c7_simulation() -> Outcome {
    let n = 10_000;
    let mut lines = Vec::new();
    for (name, _) in bundled::DOMAINS {
        let d = domain(name);
        let g = graph(&d, Objective::Pmax);
        let r = solve(&g, &d, Objective::Pmax, None, Exec::default()).map_err(|e| e.to_string())?;
        let v = r.initial_value();
        let rep = simulate(
            &g,
            &d,
            &r.policy,
            &Executor::exact(2024),
            "doneP",
            n,
            None,
            Exec::default(),
        )
        .map_err(|e| e.to_string())?;
        let ratio = rep.ratio();
        ensure((ratio - v).abs() <= 3.0 * sigma(v, n) + 1e-12, || {
            format!("{name}: ratio {ratio} vs analytic {v}")
        })?;
        if name.starts_with("agv") && v == 1.0 {
            ensure(ratio == 1.0, || format!("{name}: ratio {ratio} with v = 1"))?;
        }
        lines.push(format!("{name} {ratio:.4}/{v:.4}"));
    }
    println!("    {}", lines.join(", "));
    Ok(format!("15 domains x {n} trials within 3 sigma"))
}

fn c8_faults() -> Outcome {
    let n = 10_000;
    let mut lines = Vec::new();
    for (name, _) in bundled::DOMAINS {
        let d = domain(name);
        let g = graph(&d, Objective::Pmax);
        let p = solve(&g, &d, Objective::Pmax, None, Exec::default())
            .map_err(|e| e.to_string())?
            .policy;
        let mut ratios = Vec::new();
        for pf in [0.0, 0.2, 0.4] {
            let exec = Executor::faulty(pf, 77);
            let rep = simulate(&g, &d, &p, &exec, "doneP", n, None, Exec::default())
                .map_err(|e| e.to_string())?;
            ratios.push(rep.ratio());
        }
        let exact = simulate(
            &g,
            &d,
            &p,
            &Executor::exact(77),
            "doneP",
            n,
            None,
            Exec::default(),
        )
        .map_err(|e| e.to_string())?
        .ratio();
        ensure(ratios[2] <= exact, || {
            format!("{name}: faulty {} above exact {exact}", ratios[2])
        })?;
        for w in ratios.windows(2) {
            let slack = 3.0 * (sigma(w[0], n).powi(2) + sigma(w[1], n).powi(2)).sqrt();
            ensure(w[1] <= w[0] + slack + 1e-12, || {
                format!("{name}: {ratios:?} increases")
            })?;
        }
        lines.push(format!(
            "{name} {:.4},{:.4},{:.4}",
            ratios[0], ratios[1], ratios[2]
        ));
    }
    println!("    {}", lines.join(", "));
    Ok("faulty(0.4) never beats exact; monotone in p_f within 3 sigma".into())
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mdplc"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "mdplc {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn c9_determinism() -> Outcome {
    let dirs = [
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    ];
    let cases = [
        ("agv_t1", "pmax"),
        ("structure_t1", "rmin"),
        ("gripper_t2", "rmax"),
    ];
    let mut compared = 0;
    for dir in &dirs {
        let out = dir.path().to_str().unwrap();
        for (name, objective) in cases {
            let src = format!("@{name}");
            run_cli(&["compile", &src, "-o", out, "--objective", objective])?;
            run_cli(&["solve", &src, "-o", out, "--objective", objective])?;
            let table = format!("{out}/{name}.{objective}.policy.csv");
            run_cli(&[
                "simulate",
                &src,
                "-o",
                out,
                "--objective",
                objective,
                "--policy",
                &table,
                "--trials",
                "500",
                "--seed",
                "5",
                "--fault",
                "0.2",
            ])?;
        }
    }
    for (name, objective) in cases {
        for file in [
            format!("{name}.prism"),
            format!("{name}.props"),
            format!("{name}.stats.json"),
            format!("{name}.{objective}.policy.csv"),
            format!("{name}.{objective}.solve.json"),
            format!("{name}.sim.csv"),
            format!("{name}.sim.json"),
        ] {
            let a =
                std::fs::read(dirs[0].path().join(&file)).map_err(|e| format!("{file}: {e}"))?;
            let b =
                std::fs::read(dirs[1].path().join(&file)).map_err(|e| format!("{file}: {e}"))?;
            ensure(a == b, || format!("{file} differs between runs"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} artifact pairs byte-identical"))
}

/// A random rule set over statevars x, y and action go(A), with the score
/// it must produce computed by hand.
struct GateCase {
    text: String,
    violated: bool,
    bonus: i64,
}

fn gate_case(
    rng: &mut ChaCha8Rng,
    cur: (i64, i64),
    next: (i64, i64),
    a: i64,
    penalty: i64,
) -> GateCase {
    let mut text = format!(
        "domain gate;\npenalty {penalty};\ninit {{ x(0), y(0) }}\nstatevar x : [0..9] init 0 from x(?);\nstatevar y : [0..9] init 0 from y(?);\nfacts {{ k(0), k(1), k(2), k(3) }}\naction go(A) {{ pre-static k(A); pre-state x(X); eff 1 {{ del x(X); add x(X); }} }}\n"
    );
    let mut violated = false;
    let mut bonus = 0;
    for k in 0..rng.random_range(0..4) {
        let c = rng.random_range(0..10);
        match rng.random_range(0..3) {
            0 => {
                let _ = writeln!(text, "reward necessary n{k} require next.x <= {c};");
                violated |= next.0 > c;
            }
            1 => {
                let _ = writeln!(
                    text,
                    "reward necessary n{k} when cur.y = {c} require next.y != {c};"
                );
                violated |= cur.1 == c && next.1 == c;
            }
            _ => {
                let _ = writeln!(
                    text,
                    "reward necessary n{k} match action:go(A) require A != {c};"
                );
                violated |= a == c;
            }
        }
    }
    for k in 0..rng.random_range(0..5) {
        let c = rng.random_range(0..10);
        let v = rng.random_range(0..20);
        bonus += sufficient_rule(&mut text, k, rng.random_range(0..3), c, v, cur, next, a);
    }
    GateCase {
        text,
        violated,
        bonus,
    }
}

#[allow(clippy::too_many_arguments)]
fn sufficient_rule(
    text: &mut String,
    k: usize,
    kind: u32,
    c: i64,
    v: i64,
    cur: (i64, i64),
    next: (i64, i64),
    a: i64,
) -> i64 {
    match kind {
        0 => {
            let _ = writeln!(text, "reward sufficient s{k} when cur.y = {c} value {v};");
            if cur.1 == c {
                v
            } else {
                0
            }
        }
        1 => {
            let _ = writeln!(
                text,
                "reward sufficient s{k} match next:x(X) when X >= {c} value X;"
            );
            if next.0 >= c {
                next.0
            } else {
                0
            }
        }
        _ => {
            let _ = writeln!(
                text,
                "reward sufficient s{k} match action:go(A) value A + {v};"
            );
            a + v
        }
    }
}

fn xy(x: i64, y: i64) -> State {
    State::canonicalize(vec![
        Atom::new("x", vec![Term::int(x)]),
        Atom::new("y", vec![Term::int(y)]),
    ])
    .unwrap()
}

fn score(
    text: &str,
    sense: Sense,
    cur: (i64, i64),
    next: (i64, i64),
    a: i64,
) -> Result<Rational, String> {
    let d = parse_domain(text).map_err(|e| format!("{e:?}\n{text}"))?;
    Scorer::for_domain(&d, sense)
        .score(
            &xy(cur.0, cur.1),
            &xy(next.0, next.1),
            &Atom::new("go", vec![Term::int(a)]),
        )
        .map_err(|e| format!("{e}\n{text}"))
}

fn c10_gate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut gated = 0;
    for i in 0..1000 {
        let cur = (rng.random_range(0..10), rng.random_range(0..10));
        let next = (rng.random_range(0..10), rng.random_range(0..10));
        let a = rng.random_range(0..4);
        let penalty = rng.random_range(1..5000);
        let sense = if rng.random_bool(0.5) {
            Sense::Max
        } else {
            Sense::Min
        };
        let case = gate_case(&mut rng, cur, next, a, penalty);
        let got = score(&case.text, sense, cur, next, a)?;
        let signed = match sense {
            Sense::Max => -penalty,
            Sense::Min => penalty,
        };
        let want = if case.violated { signed } else { case.bonus };
        ensure(got == Rational::from_integer(want), || {
            format!("instance {i}: got {got}, want {want}\n{}", case.text)
        })?;
        gated += case.violated as usize;

        let mut more = case.text.clone();
        let extra = sufficient_rule(
            &mut more,
            99,
            rng.random_range(0..3),
            rng.random_range(0..10),
            rng.random_range(0..20),
            cur,
            next,
            a,
        );
        let after = score(&more, sense, cur, next, a)?;
        if case.violated {
            ensure(after == got, || {
                format!("instance {i}: sufficient rule changed a gated score")
            })?;
        } else {
            ensure(
                after >= got && after - got == Rational::from_integer(extra),
                || format!("instance {i}: adding a sufficient rule moved {got} to {after}"),
            )?;
        }
    }
    Ok(format!("1000 instances, {gated} gated by a violation"))
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("C1", "state/action counts", c1_counts),
        ("C2", "branch split", c2_split),
        ("C3", "toy split", c3_toy),
        ("C4", "normalization", c4_normalization),
        ("C5", "oracle equivalence", c5_oracle),
        ("C6", "PRISM round-trip", c6_prism),
        ("C7", "simulation consistency", c7_simulation),
        ("C8", "fault degradation", c8_faults),
        ("C9", "determinism", c9_determinism),
        ("C10", "reward gate", c10_gate),
    ];
    let mut results = BTreeMap::new();
    for (id, title, f) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("{id} PASS {title}: {detail} ({secs:.2}s)"),
            Err(why) => println!("{id} FAIL {title}: {why} ({secs:.2}s)"),
        }
        results.insert(id, outcome.is_ok());
    }
    if results.values().all(|&ok| ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
