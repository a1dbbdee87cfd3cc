//! Ground, refine and annotate in one call, timing each stage.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::ModelError;
use crate::ground::build_graph;
use crate::model::{DomainSpec, MdpGraph, Sense};
use crate::par::Exec;
use crate::refine::refine;
use crate::reward::annotate;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct GraphStats {
    pub states: usize,
    /// Distinct grounded action heads.
    pub actions: usize,
    pub choices: usize,
    pub edges: usize,
}

impl GraphStats {
    pub fn of(g: &MdpGraph) -> Self {
        GraphStats {
            states: g.num_states(),
            actions: g.distinct_actions().len(),
            choices: g.num_choices(),
            edges: g.edges().len(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub struct Timings {
    pub build: Duration,
    pub refine: Duration,
    pub annotate: Duration,
    pub write: Duration,
}

impl Timings {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "build_s": self.build.as_secs_f64(),
            "refine_s": self.refine.as_secs_f64(),
            "annotate_s": self.annotate.as_secs_f64(),
            "write_s": self.write.as_secs_f64(),
        })
    }
}

pub struct Compiled {
    pub graph: MdpGraph,
    pub stats: GraphStats,
    pub timings: Timings,
}

pub fn compile(
    d: &DomainSpec,
    sense: Sense,
    cap: usize,
    exec: Exec,
) -> Result<Compiled, ModelError> {
    let mut timings = Timings::default();
    let t = Instant::now();
    let g = build_graph(d, cap)?;
    timings.build = t.elapsed();
    let t = Instant::now();
    let g = refine(g);
    timings.refine = t.elapsed();
    let t = Instant::now();
    let g = annotate(g, d, sense, exec)?;
    timings.annotate = t.elapsed();
    Ok(Compiled {
        stats: GraphStats::of(&g),
        graph: g,
        timings,
    })
}
