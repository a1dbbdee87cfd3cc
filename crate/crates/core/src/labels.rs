//! Evaluation of label conditions on states.

use std::cell::OnceCell;
use std::collections::BTreeSet;

use crate::dsl::expr::{eval_bool, Env, Expr, Value};
use crate::error::{EncodingError, EvalError, ModelError};
use crate::model::{Atom, DomainSpec, MdpGraph, Rational, State, StateVarDecl, Symbol};
use crate::prism::encode::encode_state;

/// Bare identifiers are statevars; `has(atom)` tests membership.
pub struct StateEnv<'a> {
    state: &'a State,
    statevars: &'a [StateVarDecl],
    enc: OnceCell<Result<Vec<i64>, EncodingError>>,
}

impl<'a> StateEnv<'a> {
    pub fn new(state: &'a State, statevars: &'a [StateVarDecl]) -> Self {
        StateEnv {
            state,
            statevars,
            enc: OnceCell::new(),
        }
    }
}

impl Env for StateEnv<'_> {
    fn var(&self, _: &Symbol) -> Option<Value> {
        None
    }

    fn ident(&self, name: &Symbol) -> Result<Value, EvalError> {
        let i = self
            .statevars
            .iter()
            .position(|v| v.name == *name)
            .ok_or_else(|| EvalError::UnknownStateVar(name.to_string()))?;
        let enc = self
            .enc
            .get_or_init(|| encode_state(self.state, self.statevars))
            .as_ref()
            .map_err(|e| EvalError::Encoding(e.clone()))?;
        Ok(Value::Num(Rational::from_integer(enc[i])))
    }

    fn has(&self, atom: &Atom) -> Result<bool, EvalError> {
        Ok(self.state.contains(atom))
    }
}

pub fn holds(cond: &Expr, s: &State, d: &DomainSpec) -> Result<bool, EvalError> {
    eval_bool(cond, &StateEnv::new(s, &d.statevars))
}

/// States satisfying the named label.
pub fn label_states(
    g: &MdpGraph,
    d: &DomainSpec,
    label: &str,
) -> Result<BTreeSet<usize>, ModelError> {
    let l = d
        .label(label)
        .ok_or_else(|| ModelError::UndeclaredLabel(label.to_string()))?;
    let mut out = BTreeSet::new();
    for (i, s) in g.states().iter().enumerate() {
        if holds(&l.cond, s, d).map_err(|e| ModelError::eval(format!("label `{label}`"), e))? {
            out.insert(i);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_domain;
    use crate::ground::{build_graph, DEFAULT_STATE_CAP};

    const D: &str = "domain l;\ninit { section(0) }\nstatevar section : [0..3] init 0 from section(?);\naction go { pre-state section(S); verify S < 3, N := S + 1; eff 1 { del section(S); add section(N); } }\nlabel doneR = section = 3;\nlabel never = false;\nlabel always = true;\nlabel start = has(section(0));\n";

    #[test]
    fn labels_select_states() {
        let d = parse_domain(D).unwrap();
        let g = build_graph(&d, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(
            label_states(&g, &d, "doneR").unwrap(),
            [3].into_iter().collect()
        );
        assert!(label_states(&g, &d, "never").unwrap().is_empty());
        assert_eq!(label_states(&g, &d, "always").unwrap().len(), 4);
        assert_eq!(
            label_states(&g, &d, "start").unwrap(),
            [0].into_iter().collect()
        );
        assert_eq!(
            label_states(&g, &d, "doneP").unwrap_err(),
            ModelError::UndeclaredLabel("doneP".into())
        );
    }
}
