use std::fmt;

use super::term::{Atom, Bindings};
use crate::error::GroundingError;

/// A set of ground atoms kept in canonical order.
///
/// Two states are equal iff their canonical strings are byte-identical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct State {
    atoms: Vec<Atom>,
}

impl State {
    /// Removes duplicates and sorts by the canonical atom order.
    pub fn canonicalize<I: IntoIterator<Item = Atom>>(atoms: I) -> Result<State, GroundingError> {
        let mut atoms: Vec<Atom> = atoms.into_iter().collect();
        if let Some(bad) = atoms.iter().find(|a| !a.is_ground()) {
            return Err(GroundingError(bad.clone()));
        }
        atoms.sort();
        atoms.dedup();
        Ok(State { atoms })
    }

    pub fn empty() -> Self {
        State::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.binary_search(atom).is_ok()
    }

    /// Atoms sharing `functor`/`arity`; contiguous thanks to the canonical order.
    pub fn with_functor(&self, pattern: &Atom) -> &[Atom] {
        let start = self.atoms.partition_point(|a| {
            (a.functor.as_str(), a.arity()) < (pattern.functor.as_str(), pattern.arity())
        });
        let end = start
            + self.atoms[start..]
                .partition_point(|a| a.functor == pattern.functor && a.arity() == pattern.arity());
        &self.atoms[start..end]
    }

    /// All extensions of `bindings` under which every pattern occurs in this
    /// set, enumerated left to right in canonical atom order.
    pub fn match_all(&self, patterns: &[Atom], bindings: &Bindings) -> Vec<Bindings> {
        let mut out = Vec::new();
        let mut current = bindings.clone();
        self.match_rec(patterns, &mut current, &mut out);
        out
    }

    fn match_rec(&self, patterns: &[Atom], bindings: &mut Bindings, out: &mut Vec<Bindings>) {
        let Some((first, rest)) = patterns.split_first() else {
            out.push(bindings.clone());
            return;
        };
        let pat = first.substitute(bindings);
        if pat.is_ground() {
            if self.contains(&pat) {
                self.match_rec(rest, bindings, out);
            }
            return;
        }
        for cand in self.with_functor(&pat) {
            let before = bindings.clone();
            if pat.unify_with(cand, bindings) {
                self.match_rec(rest, bindings, out);
                *bindings = before;
            }
        }
    }

    /// Canonical serialization: atoms comma-separated, no spaces.
    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::term::{Symbol, Term};
    use proptest::prelude::*;

    fn pil(p: i64, h: i64) -> Atom {
        Atom::new("pil", vec![Term::int(p), Term::int(h)])
    }

    #[test]
    fn sorts_atoms() {
        let s = State::canonicalize(vec![pil(2, 1), pil(1, 0)]).unwrap();
        assert_eq!(s.atoms(), &[pil(1, 0), pil(2, 1)]);
    }

    #[test]
    fn removes_duplicates() {
        let e = Atom::new("estop", vec![Term::int(0)]);
        let s = State::canonicalize(vec![e.clone(), e.clone()]).unwrap();
        assert_eq!(s.atoms(), &[e]);
    }

    #[test]
    fn initial_pillars() {
        let s = State::canonicalize(vec![pil(3, 0), pil(1, 0), pil(2, 0)]).unwrap();
        assert_eq!(s.to_canonical_string(), "pil(1,0),pil(2,0),pil(3,0)");
    }

    #[test]
    fn rejects_variables() {
        let err = State::canonicalize(vec![Atom::new("pil", vec![Term::var("P"), Term::int(0)])]);
        assert!(err.is_err());
    }

    #[test]
    fn match_all_enumerates_in_order() {
        let s = State::canonicalize(vec![pil(1, 0), pil(2, 0), pil(3, 1)]).unwrap();
        let pat = Atom::new("pil", vec![Term::var("P"), Term::int(0)]);
        let found = s.match_all(&[pat], &Bindings::new());
        let ps: Vec<_> = found.iter().map(|b| b[&Symbol::new("P")].clone()).collect();
        assert_eq!(ps, vec![Term::int(1), Term::int(2)]);
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(raw in prop::collection::vec((0i64..4, 0i64..4), 0..12)) {
            let atoms: Vec<Atom> = raw.iter().map(|&(p, h)| pil(p, h)).collect();
            let once = State::canonicalize(atoms.clone()).unwrap();
            let twice = State::canonicalize(once.atoms().to_vec()).unwrap();
            prop_assert_eq!(&once, &twice);
            let mut rev = atoms;
            rev.reverse();
            let other = State::canonicalize(rev).unwrap();
            prop_assert_eq!(once.to_canonical_string(), other.to_canonical_string());
        }
    }
}
