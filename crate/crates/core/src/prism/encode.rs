use std::collections::BTreeMap;

use crate::error::EncodingError;
use crate::model::{State, StateVarDecl};

/// Extracts the value of every declared state variable, in declaration order.
pub fn encode_state(s: &State, decls: &[StateVarDecl]) -> Result<Vec<i64>, EncodingError> {
    decls.iter().map(|d| extract(s, d)).collect()
}

pub fn encode_state_map(
    s: &State,
    decls: &[StateVarDecl],
) -> Result<BTreeMap<String, i64>, EncodingError> {
    let values = encode_state(s, decls)?;
    Ok(decls
        .iter()
        .zip(values)
        .map(|(d, v)| (d.name.to_string(), v))
        .collect())
}

pub fn extract(s: &State, d: &StateVarDecl) -> Result<i64, EncodingError> {
    let hits: Vec<_> = s
        .with_functor(&d.pattern)
        .iter()
        .filter(|a| d.matches(a))
        .collect();
    let atom = match hits.as_slice() {
        [one] => *one,
        [] => {
            return Err(EncodingError::NoMatch {
                var: d.name.to_string(),
                state: s.to_string(),
            })
        }
        many => {
            return Err(EncodingError::Ambiguous {
                var: d.name.to_string(),
                state: s.to_string(),
                count: many.len(),
            })
        }
    };
    let term = &atom.args[d.value_pos];
    let v = term.as_integer().ok_or_else(|| EncodingError::NonInteger {
        var: d.name.to_string(),
        value: term.to_string(),
    })?;
    if v < d.lo || v > d.hi {
        return Err(EncodingError::OutOfRange {
            var: d.name.to_string(),
            value: v,
            lo: d.lo,
            hi: d.hi,
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_domain;
    use crate::model::{Atom, Term};

    fn state(atoms: &[(&str, i64)]) -> State {
        State::canonicalize(atoms.iter().map(|&(f, v)| Atom::new(f, vec![Term::int(v)]))).unwrap()
    }

    #[test]
    fn pillars_encode_to_zero() {
        let d = parse_domain(
            "domain s;\ninit { pil(1,0), pil(2,0), pil(3,0) }\nstatevar p1 : [0..3] init 0 from pil(1,?);\nstatevar p2 : [0..3] init 0 from pil(2,?);\nstatevar p3 : [0..3] init 0 from pil(3,?);\n",
        )
        .unwrap();
        let m = encode_state_map(&d.init, &d.statevars).unwrap();
        assert_eq!(
            m.into_iter().collect::<Vec<_>>(),
            vec![
                ("p1".to_string(), 0),
                ("p2".to_string(), 0),
                ("p3".to_string(), 0)
            ]
        );
    }

    const AGV_VARS: &str = "domain a;\ninit { section(0), estop(0), delay(0) }\nstatevar section : [0..5] init 0 from section(?);\nstatevar estop : [0..1] init 0 from estop(?);\nstatevar delay : [0..100] init 0 from delay(?);\n";

    #[test]
    fn direct_extraction() {
        let d = parse_domain(AGV_VARS).unwrap();
        let s = state(&[("section", 3), ("estop", 1), ("delay", 20)]);
        assert_eq!(encode_state(&s, &d.statevars).unwrap(), vec![3, 1, 20]);
    }

    #[test]
    fn missing_and_out_of_range() {
        let d = parse_domain(AGV_VARS).unwrap();
        let s = state(&[("section", 3), ("delay", 20)]);
        assert!(matches!(
            encode_state(&s, &d.statevars),
            Err(EncodingError::NoMatch { ref var, .. }) if var == "estop"
        ));
        let s = state(&[("section", 9), ("estop", 0), ("delay", 0)]);
        assert!(matches!(
            encode_state(&s, &d.statevars),
            Err(EncodingError::OutOfRange { value: 9, .. })
        ));
    }
}
