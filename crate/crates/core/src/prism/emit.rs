use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use num_traits::{Signed, Zero};

use super::encode::encode_state;
use crate::dsl::expr::{BinOp, Expr, Func, Value};
use crate::error::{EncodingError, ModelError};
use crate::labels::label_states;
use crate::model::{Atom, DomainSpec, MdpGraph, Rational, Sense};
use crate::par::Exec;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum EmitMode {
    /// A single state-index variable.
    #[default]
    Indexed,
    /// One variable per declared statevar.
    Factored,
}

impl std::str::FromStr for EmitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "indexed" => Ok(EmitMode::Indexed),
            "factored" => Ok(EmitMode::Factored),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

const PRISM_KEYWORDS: &[&str] = &[
    "A",
    "bool",
    "C",
    "const",
    "ctmc",
    "cumul",
    "double",
    "dtmc",
    "E",
    "endinit",
    "endinvariant",
    "endmodule",
    "endrewards",
    "endsystem",
    "F",
    "false",
    "formula",
    "filter",
    "func",
    "G",
    "global",
    "I",
    "init",
    "invariant",
    "label",
    "max",
    "mdp",
    "min",
    "module",
    "X",
    "nondeterministic",
    "Pmax",
    "Pmin",
    "P",
    "probabilistic",
    "prob",
    "pta",
    "rate",
    "rewards",
    "Rmax",
    "Rmin",
    "R",
    "S",
    "stochastic",
    "system",
    "true",
    "U",
    "W",
    "int",
    "clock",
    "ceil",
    "floor",
    "pow",
    "mod",
    "log",
];

/// Name of the rewards block.
pub const REWARD_NAME: &str = "r";

/// Renders a rational as an exact decimal when its denominator is at most
/// one million, otherwise as `num/den`.
pub fn render_rational(r: &Rational) -> String {
    if r.is_negative() {
        return format!("-{}", render_rational(&r.abs()));
    }
    if *r.denom() <= 1_000_000 {
        if let Some(d) = crate::model::term::decimal_string(r) {
            return d;
        }
    }
    format!("{}/{}", r.numer(), r.denom())
}

fn sanitize(head: &Atom) -> String {
    let mut out = head.functor.as_str().to_string();
    for a in &head.args {
        out.push('_');
        for ch in a.to_string().chars() {
            match ch {
                c if c.is_ascii_alphanumeric() || c == '_' => out.push(c),
                '-' => out.push('m'),
                '/' => out.push('d'),
                _ => out.push('x'),
            }
        }
    }
    out
}

/// Bijective map from grounded heads to PRISM action tags.
pub fn action_tags(g: &MdpGraph, reserved: &[String]) -> BTreeMap<Atom, String> {
    let mut used: BTreeSet<String> = reserved.iter().cloned().collect();
    let mut out = BTreeMap::new();
    for head in g.distinct_actions() {
        let base = sanitize(head);
        let base = if PRISM_KEYWORDS.contains(&base.as_str()) || used.contains(&base) {
            format!("{base}_")
        } else {
            base
        };
        let mut tag = base.clone();
        let mut k = 2;
        while used.contains(&tag) {
            tag = format!("{base}{k}");
            k += 1;
        }
        used.insert(tag.clone());
        out.insert(head.clone(), tag);
    }
    out
}

/// Per-state valuations and variable declarations for one mode.
struct Layout {
    vars: Vec<(String, i64, i64, i64)>,
    values: Vec<Vec<i64>>,
}

impl Layout {
    fn indexed(g: &MdpGraph) -> Layout {
        let n = g.num_states() as i64;
        Layout {
            vars: vec![("s".to_string(), 0, (n - 1).max(0), 0)],
            values: (0..g.num_states()).map(|i| vec![i as i64]).collect(),
        }
    }

    fn factored(g: &MdpGraph, d: &DomainSpec, exec: Exec) -> Result<Layout, ModelError> {
        let encoded = exec.map(g.states(), |s| encode_state(s, &d.statevars));
        let values: Vec<Vec<i64>> = encoded.into_iter().collect::<Result<_, _>>()?;
        let mut seen: HashMap<&[i64], usize> = HashMap::new();
        for (i, v) in values.iter().enumerate() {
            if let Some(&j) = seen.get(v.as_slice()) {
                return Err(EncodingError::Collision {
                    a: j,
                    b: i,
                    first: g.state(j).to_string(),
                    second: g.state(i).to_string(),
                }
                .into());
            }
            seen.insert(v, i);
        }
        let init = values
            .first()
            .cloned()
            .unwrap_or_else(|| d.statevars.iter().map(|v| v.init).collect());
        Ok(Layout {
            vars: d
                .statevars
                .iter()
                .zip(init)
                .map(|(v, i)| (v.name.to_string(), v.lo, v.hi, i))
                .collect(),
            values,
        })
    }

    fn guard(&self, s: usize) -> String {
        if self.vars.is_empty() {
            return "true".to_string();
        }
        self.vars
            .iter()
            .zip(&self.values[s])
            .map(|((n, ..), v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(" & ")
    }

    fn update(&self, src: usize, dst: usize) -> String {
        let parts: Vec<String> = self
            .vars
            .iter()
            .zip(self.values[src].iter().zip(&self.values[dst]))
            .filter(|(_, (a, b))| a != b)
            .map(|((n, ..), (_, b))| format!("({n}'={b})"))
            .collect();
        if parts.is_empty() {
            "true".to_string()
        } else {
            parts.join(" & ")
        }
    }
}

/// Emits a PRISM MDP. `g` should be refined and annotated.
pub fn emit(g: &MdpGraph, d: &DomainSpec, mode: EmitMode) -> Result<String, ModelError> {
    emit_with(g, d, mode, Exec::default())
}

pub fn emit_with(
    g: &MdpGraph,
    d: &DomainSpec,
    mode: EmitMode,
    exec: Exec,
) -> Result<String, ModelError> {
    let layout = match mode {
        EmitMode::Indexed => Layout::indexed(g),
        EmitMode::Factored => Layout::factored(g, d, exec)?,
    };
    let reserved: Vec<String> = layout.vars.iter().map(|v| v.0.clone()).collect();
    let tags = action_tags(g, &reserved);

    let blocks = exec.map_range(g.num_states(), |s| {
        let guard = layout.guard(s);
        let mut cmds = String::new();
        let mut rews = String::new();
        for c in g.choices(s) {
            let mut dist: BTreeMap<usize, Rational> = BTreeMap::new();
            let mut expected = Rational::zero();
            for e in c.edges {
                *dist.entry(e.dst).or_insert_with(Rational::zero) += e.prob;
                expected += e.prob * e.reward;
            }
            let tag = &tags[c.action];
            let updates: Vec<String> = dist
                .iter()
                .map(|(dst, p)| format!("{}:{}", render_rational(p), layout.update(s, *dst)))
                .collect();
            let _ = writeln!(cmds, "  [{tag}] {guard} -> {};", updates.join(" + "));
            if !expected.is_zero() {
                let _ = writeln!(rews, "  [{tag}] {guard} : {};", render_rational(&expected));
            }
        }
        (cmds, rews)
    });

    let mut out = String::new();
    let _ = writeln!(out, "// {}: {} states", d.name, g.num_states());
    out.push_str("mdp\n\n");
    let _ = writeln!(out, "module {}", module_name(d));
    for (name, lo, hi, init) in &layout.vars {
        let _ = writeln!(out, "  {name} : [{lo}..{hi}] init {init};");
    }
    if !blocks.is_empty() {
        out.push('\n');
    }
    for (cmds, _) in &blocks {
        out.push_str(cmds);
    }
    out.push_str("endmodule\n\n");
    let _ = writeln!(out, "rewards \"{REWARD_NAME}\"");
    for (_, rews) in &blocks {
        out.push_str(rews);
    }
    out.push_str("endrewards\n");

    for l in &d.labels {
        let cond = match mode {
            EmitMode::Factored => match prism_expr(&l.cond, d) {
                Some(c) => c,
                None => valuation_disjunction(&label_states(g, d, l.name.as_str())?, &layout),
            },
            EmitMode::Indexed => index_disjunction(&label_states(g, d, l.name.as_str())?),
        };
        let _ = writeln!(out, "label \"{}\" = {};", l.name, cond);
    }
    Ok(out)
}

fn module_name(d: &DomainSpec) -> String {
    let n = d.name.as_str();
    if PRISM_KEYWORDS.contains(&n) {
        format!("{n}_")
    } else {
        n.to_string()
    }
}

/// `s=i` disjunction, with consecutive runs folded into ranges.
fn index_disjunction(states: &BTreeSet<usize>) -> String {
    let mut parts = Vec::new();
    let xs: Vec<usize> = states.iter().copied().collect();
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[j] + 1 {
            j += 1;
        }
        parts.push(if i == j {
            format!("s={}", xs[i])
        } else {
            format!("(s>={} & s<={})", xs[i], xs[j])
        });
        i = j + 1;
    }
    if parts.is_empty() {
        "false".to_string()
    } else {
        parts.join(" | ")
    }
}

fn valuation_disjunction(states: &BTreeSet<usize>, layout: &Layout) -> String {
    if states.is_empty() {
        return "false".to_string();
    }
    states
        .iter()
        .map(|&s| format!("({})", layout.guard(s)))
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Direct translation of a label condition, when PRISM can express it.
fn prism_expr(e: &Expr, d: &DomainSpec) -> Option<String> {
    Some(match e {
        Expr::Lit(Value::Num(r)) => {
            if r.is_integer() {
                r.numer().to_string()
            } else {
                format!("({})", render_rational(r))
            }
        }
        Expr::Lit(Value::Bool(b)) => b.to_string(),
        Expr::Ident(v) if d.statevar_index(v.as_str()).is_some() => v.to_string(),
        Expr::Neg(inner) => format!("(-{})", prism_expr(inner, d)?),
        Expr::Not(inner) => format!("!({})", prism_expr(inner, d)?),
        Expr::Bin(op, l, r) => {
            let sym = match op {
                BinOp::And => "&",
                BinOp::Or => "|",
                BinOp::Div => return None,
                other => other.symbol(),
            };
            format!("({} {sym} {})", prism_expr(l, d)?, prism_expr(r, d)?)
        }
        Expr::Call(f @ (Func::Min | Func::Max), args) => {
            let parts: Option<Vec<String>> = args.iter().map(|a| prism_expr(a, d)).collect();
            format!("{}({})", f.name(), parts?.join(", "))
        }
        _ => return None,
    })
}

/// Property file matching the declared labels.
pub fn props(d: &DomainSpec, sense: Sense) -> String {
    let mut out = String::new();
    if d.label("doneP").is_some() {
        out.push_str("Pmax=? [ F \"doneP\" ]\n");
    }
    if d.label("doneR").is_some() {
        let q = match sense {
            Sense::Min => "Rmin",
            Sense::Max => "Rmax",
        };
        let _ = writeln!(out, "{q}=? [ F \"doneR\" ]");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_rendering() {
        assert_eq!(render_rational(&Rational::new(9, 20)), "0.45");
        assert_eq!(render_rational(&Rational::new(1, 3)), "1/3");
        assert_eq!(render_rational(&Rational::new(-5, 2)), "-2.5");
        assert_eq!(render_rational(&Rational::new(1, 2_097_152)), "1/2097152");
        assert_eq!(render_rational(&Rational::from_integer(7)), "7");
    }

    #[test]
    fn tags_are_sanitized() {
        use crate::model::Term;
        let h = Atom::new("tti", vec![Term::int(1), Term::int(2)]);
        assert_eq!(sanitize(&h), "tti_1_2");
        let h = Atom::new("m", vec![Term::int(-1), Term::Num(Rational::new(3, 4))]);
        assert_eq!(sanitize(&h), "m_m1_3d4");
    }

    #[test]
    fn index_ranges() {
        let s: BTreeSet<usize> = [0, 1, 2, 5, 7, 8].into_iter().collect();
        assert_eq!(index_disjunction(&s), "(s>=0 & s<=2) | s=5 | (s>=7 & s<=8)");
        assert_eq!(index_disjunction(&BTreeSet::new()), "false");
    }
}
