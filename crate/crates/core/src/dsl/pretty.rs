//! Renders a [`DomainSpec`] back to MDPL source. Parsing the output yields
//! the same domain.

use std::fmt::Write;

use crate::model::domain::{
    ActionSchema, DomainSpec, EffectOp, RewardRule, RuleKind, StateVarDecl, VerifyClause,
    DEFAULT_PENALTY,
};
use crate::model::term::{decimal_string, Atom, Rational};

pub fn print_domain(d: &DomainSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "domain {};", d.name);
    if d.penalty != Rational::from_integer(DEFAULT_PENALTY) {
        let _ = writeln!(out, "penalty {};", number(&d.penalty));
    }
    if !d.facts.is_empty() {
        let _ = writeln!(out, "facts {{ {} }}", join(d.facts.atoms()));
    }
    if !d.init.is_empty() {
        let _ = writeln!(out, "init {{ {} }}", join(d.init.atoms()));
    }
    for sv in &d.statevars {
        out.push_str(&statevar(sv));
    }
    for s in &d.schemas {
        out.push_str(&action(s));
    }
    for r in &d.rewards {
        out.push_str(&reward(r));
    }
    for l in &d.labels {
        let _ = writeln!(out, "label {} = {};", l.name, l.cond);
    }
    for c in &d.classifiers {
        let _ = writeln!(out, "classify {} = {};", c.name, c.cond);
    }
    out
}

fn number(r: &Rational) -> String {
    decimal_string(r).unwrap_or_else(|| format!("{}/{}", r.numer(), r.denom()))
}

fn join(atoms: &[Atom]) -> String {
    atoms
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn statevar(sv: &StateVarDecl) -> String {
    let args: Vec<String> = sv
        .pattern
        .args
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if i == sv.value_pos {
                "?".to_string()
            } else {
                t.to_string()
            }
        })
        .collect();
    format!(
        "statevar {} : [{}..{}] init {} from {}({});\n",
        sv.name,
        sv.lo,
        sv.hi,
        sv.init,
        sv.pattern.functor,
        args.join(",")
    )
}

fn action(s: &ActionSchema) -> String {
    let mut out = format!("action {}", s.name);
    if !s.params.is_empty() {
        let params: Vec<&str> = s.params.iter().map(|p| p.as_str()).collect();
        let _ = write!(out, "({})", params.join(", "));
    }
    out.push_str(" {\n");
    if !s.static_pre.is_empty() {
        let _ = writeln!(out, "  pre-static {};", join(&s.static_pre));
    }
    if !s.state_pre.is_empty() {
        let _ = writeln!(out, "  pre-state {};", join(&s.state_pre));
    }
    if !s.verify.is_empty() {
        let clauses: Vec<String> = s
            .verify
            .iter()
            .map(|c| match c {
                VerifyClause::Bind(v, e) => format!("{v} := {e}"),
                VerifyClause::Check(e) => e.to_string(),
            })
            .collect();
        let _ = writeln!(out, "  verify {};", clauses.join(", "));
    }
    for b in &s.branches {
        let _ = write!(out, "  eff {} {{", b.prob);
        for op in &b.ops {
            match op {
                EffectOp::Del(a) => {
                    let _ = write!(out, " del {a};");
                }
                EffectOp::Add(a) => {
                    let _ = write!(out, " add {a};");
                }
            }
        }
        out.push_str(" }\n");
    }
    out.push_str("}\n");
    out
}

fn reward(r: &RewardRule) -> String {
    let kind = match r.kind {
        RuleKind::Necessary => "necessary",
        RuleKind::Sufficient => "sufficient",
    };
    let mut out = format!("reward {kind} {}", r.name);
    if !r.patterns.is_empty() {
        let pats: Vec<String> = r
            .patterns
            .iter()
            .map(|p| format!("{}:{}", p.scope.keyword(), p.atom))
            .collect();
        let _ = write!(out, " match {}", pats.join(", "));
    }
    if let Some(g) = &r.guard {
        let _ = write!(out, " when {g}");
    }
    if let Some(c) = &r.require {
        let _ = write!(out, " require {c}");
    }
    if let Some(v) = &r.value {
        let _ = write!(out, " value {v}");
    }
    out.push_str(";\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_domain;

    #[test]
    fn printing_is_a_fixed_point() {
        let text = "domain toy;\npenalty 2.5;\nfacts { block(b), level(b,0) }\ninit { pil(1,0), flag }\nstatevar h : [0..3] init 0 from pil(1,?);\naction up(P) { pre-static block(b); pre-state pil(P,H); verify NH := H + 1, NH <= 3; eff 1/3 { del pil(P,H); add pil(P,NH); } eff 2/3 { del flag; add flag; } }\nreward necessary low match next:pil(1,H) require H < 3;\nreward sufficient step when true value 1;\nlabel doneP = h = 3 and has(flag);\nclassify ups = action.name = up;\n";
        let d = parse_domain(text).unwrap();
        let once = print_domain(&d);
        let again = print_domain(&parse_domain(&once).unwrap());
        assert_eq!(once, again);
        assert!(once.contains("eff 1 / 3 {"), "{once}");
    }
}
