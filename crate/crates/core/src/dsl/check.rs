//! Static lint over a parsed domain.

use super::expr::{BinOp, Expr, Field, Func, Value};
use super::{sort_diagnostics, Diagnostic};
use crate::model::domain::{DomainSpec, RuleKind};
use crate::model::term::Bindings;

pub fn check_domain(d: &DomainSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for s in &d.schemas {
        if !s.static_pre.is_empty()
            && d.facts
                .match_all(&s.static_pre, &Bindings::new())
                .is_empty()
        {
            out.push(Diagnostic::warning(
                s.span,
                format!(
                    "schema never enabled: static preconditions of `{}` match no facts",
                    s.name
                ),
            ));
        }
    }

    for sv in &d.statevars {
        let hits: Vec<_> = d.init.atoms().iter().filter(|a| sv.matches(a)).collect();
        match hits.as_slice() {
            [] => out.push(Diagnostic::error(
                sv.span,
                format!("statevar `{}` pattern matches no atom of init", sv.name),
            )),
            [one] => {
                let v = one.args[sv.value_pos].as_integer();
                if v != Some(sv.init) {
                    out.push(Diagnostic::warning(
                        sv.span,
                        format!(
                            "statevar `{}` declares init {} but init holds `{}`",
                            sv.name, sv.init, one
                        ),
                    ));
                }
            }
            many => out.push(Diagnostic::error(
                sv.span,
                format!(
                    "statevar `{}` pattern matches {} atoms of init",
                    sv.name,
                    many.len()
                ),
            )),
        }
    }

    for l in &d.labels {
        l.cond.visit(&mut |e| match e {
            Expr::Ident(name) if d.statevar_index(name.as_str()).is_none() => {
                out.push(Diagnostic::error(
                    l.span,
                    format!("label `{}` references undeclared statevar `{name}`", l.name),
                ))
            }
            Expr::Field(f) => out.push(Diagnostic::error(
                l.span,
                format!("label `{}` cannot use `{f}`", l.name),
            )),
            _ => {}
        });
    }

    for c in &d.classifiers {
        c.cond.visit(&mut |e| match e {
            Expr::Field(f @ (Field::Cur(_) | Field::Next(_))) => out.push(Diagnostic::error(
                c.span,
                format!(
                    "classifier `{}` can only inspect the action, not `{f}`",
                    c.name
                ),
            )),
            Expr::Has(_) => out.push(Diagnostic::error(
                c.span,
                format!("classifier `{}` cannot test state membership", c.name),
            )),
            _ => {}
        });
    }

    for r in &d.rewards {
        for e in [&r.guard, &r.require, &r.value].into_iter().flatten() {
            e.visit(&mut |e| match e {
                Expr::Field(f @ (Field::Cur(v) | Field::Next(v)))
                    if d.statevar_index(v.as_str()).is_none() =>
                {
                    out.push(Diagnostic::error(
                        r.span,
                        format!("rule `{}` references undeclared statevar in `{f}`", r.name),
                    ))
                }
                Expr::Has(_) => out.push(Diagnostic::error(
                    r.span,
                    format!("rule `{}` cannot use `has`; match the atom instead", r.name),
                )),
                _ => {}
            });
        }
        if r.kind == RuleKind::Sufficient {
            if let Some(v) = &r.value {
                let (lo, _) = bounds(v, d);
                if lo < 0.0 {
                    out.push(Diagnostic::warning(
                        r.span,
                        format!("sufficient rule `{}` value `{v}` can be negative", r.name),
                    ));
                }
            }
        }
    }

    sort_diagnostics(&mut out);
    out
}

/// Conservative interval of a numeric expression; statevar fields use their
/// declared ranges, everything else is unbounded.
fn bounds(e: &Expr, d: &DomainSpec) -> (f64, f64) {
    const FULL: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);
    match e {
        Expr::Lit(Value::Num(r)) => {
            let x = *r.numer() as f64 / *r.denom() as f64;
            (x, x)
        }
        Expr::Field(Field::Cur(v) | Field::Next(v)) => match d.statevar_index(v.as_str()) {
            Some(i) => (d.statevars[i].lo as f64, d.statevars[i].hi as f64),
            None => FULL,
        },
        Expr::Neg(inner) => {
            let (lo, hi) = bounds(inner, d);
            (-hi, -lo)
        }
        Expr::Bin(op, l, r) => {
            let (a, b) = (bounds(l, d), bounds(r, d));
            match op {
                BinOp::Add => (a.0 + b.0, a.1 + b.1),
                BinOp::Sub => (a.0 - b.1, a.1 - b.0),
                BinOp::Mul => hull(&[a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1]),
                BinOp::Div if b.0 > 0.0 || b.1 < 0.0 => {
                    hull(&[a.0 / b.0, a.0 / b.1, a.1 / b.0, a.1 / b.1])
                }
                _ => FULL,
            }
        }
        Expr::Call(func, args) => {
            let bs: Vec<(f64, f64)> = args.iter().map(|a| bounds(a, d)).collect();
            match func {
                Func::Abs => {
                    let (lo, hi) = bs[0];
                    if lo >= 0.0 {
                        (lo, hi)
                    } else if hi <= 0.0 {
                        (-hi, -lo)
                    } else {
                        (0.0, hi.max(-lo))
                    }
                }
                Func::Min => bs.iter().fold((f64::INFINITY, f64::INFINITY), |acc, b| {
                    (acc.0.min(b.0), acc.1.min(b.1))
                }),
                Func::Max => bs
                    .iter()
                    .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |acc, b| {
                        (acc.0.max(b.0), acc.1.max(b.1))
                    }),
            }
        }
        _ => FULL,
    }
}

fn hull(xs: &[f64]) -> (f64, f64) {
    if xs.iter().any(|x| x.is_nan()) {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}
