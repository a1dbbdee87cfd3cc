//! Plain-text and Graphviz dumps of an explicit MDP.

use std::fmt::Write;

use crate::model::term::fmt_rational;
use crate::model::MdpGraph;

/// One `src dst action branch prob reward` line per edge.
pub fn graph_dump(g: &MdpGraph) -> String {
    let mut out = String::new();
    for (i, s) in g.states().iter().enumerate() {
        let _ = writeln!(out, "# {i} {}", s.to_canonical_string());
    }
    for e in g.edges() {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            e.src,
            e.dst,
            e.action,
            e.branch_idx,
            fmt_rational(&e.prob),
            fmt_rational(&e.reward)
        );
    }
    out
}

pub fn to_dot(g: &MdpGraph) -> String {
    let mut out = String::from("digraph mdp {\n  node [shape=box, fontsize=10];\n");
    for (i, s) in g.states().iter().enumerate() {
        let _ = writeln!(
            out,
            "  s{i} [label=\"{i}: {}\"];",
            s.to_canonical_string().replace('"', "\\\"")
        );
    }
    for e in g.edges() {
        let _ = writeln!(
            out,
            "  s{} -> s{} [label=\"{} {}\"];",
            e.src,
            e.dst,
            e.action.to_string().replace('"', "\\\""),
            fmt_rational(&e.prob)
        );
    }
    out.push_str("}\n");
    out
}
