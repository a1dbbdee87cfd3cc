//! Random MDPL domains for property tests and benchmarks.

use std::fmt::Write;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::parse_domain;
use crate::ground::build_graph;
use crate::model::{DomainSpec, MdpGraph};

#[derive(Clone, Copy, Debug)]
pub struct FuzzLimits {
    pub max_schemas: usize,
    pub max_branches: usize,
    pub max_states: usize,
}

impl Default for FuzzLimits {
    fn default() -> Self {
        FuzzLimits {
            max_schemas: 5,
            max_branches: 4,
            max_states: 500,
        }
    }
}

const TOKENS: [&str; 4] = ["t0", "t1", "t2", "t3"];

/// Counters `c(I,V)` and a bag of `tok(_)` atoms. Branches increment, reset,
/// move tokens (a free delete variable, so possibly several successors),
/// delete an absent atom or put a counter back (both self-loops).
pub fn domain_text<R: Rng>(rng: &mut R, name: &str, limits: FuzzLimits) -> String {
    let counters = rng.random_range(1..=3);
    let top = rng.random_range(1..=4);
    let mut out = String::new();
    let _ = writeln!(out, "domain {name};");
    let idx: Vec<String> = (0..counters).map(|i| format!("idx({i})")).collect();
    let _ = writeln!(out, "facts {{ {} }}", idx.join(", "));
    let mut init: Vec<String> = (0..counters).map(|i| format!("c({i},0)")).collect();
    let ntok = rng.random_range(0..=3);
    for t in TOKENS.choose_multiple(rng, ntok) {
        init.push(format!("tok({t})"));
    }
    let _ = writeln!(out, "init {{ {} }}", init.join(", "));

    let schemas = rng.random_range(1..=limits.max_schemas);
    for k in 0..schemas {
        let branches = rng.random_range(1..=limits.max_branches);
        let weights: Vec<u32> = (0..branches).map(|_| rng.random_range(1..=6)).collect();
        let total: u32 = weights.iter().sum();
        let _ = write!(
            out,
            "action a{k}(I) {{ pre-static idx(I); pre-state c(I,V); verify V < {top}, NV := V + 1;"
        );
        for w in weights {
            let body = match rng.random_range(0..5) {
                0 | 1 => "del c(I,V); add c(I,NV);".to_string(),
                2 => "del c(I,V); add c(I,0);".to_string(),
                3 => format!("del tok(T); add tok({});", TOKENS.choose(rng).unwrap()),
                _ if rng.random_bool(0.5) => "del ghost;".to_string(),
                _ => "del c(I,V); add c(I,V);".to_string(),
            };
            let _ = write!(out, " eff {w}/{total} {{ {body} }}");
        }
        out.push_str(" }\n");
    }
    let _ = writeln!(out, "reward sufficient step value 1;");
    let _ = writeln!(out, "label doneP = has(c(0,{top}));");
    let _ = writeln!(out, "label doneR = has(c(0,{top}));");
    out
}

/// A domain whose reachable graph respects `limits.max_states`, derived
/// deterministically from `seed`.
pub fn random_domain(seed: u64, limits: FuzzLimits) -> (String, DomainSpec, MdpGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let text = domain_text(&mut rng, &format!("fuzz{seed}"), limits);
        let d = parse_domain(&text).expect("generated domains parse");
        if let Ok(g) = build_graph(&d, limits.max_states) {
            return (text, d, g);
        }
    }
}
