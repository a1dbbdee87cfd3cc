use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;

/// Exact rational used for probabilities, rewards and numeric terms.
pub type Rational = Rational64;

/// A cheaply clonable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Variables start with an uppercase letter or an underscore.
    pub fn is_variable_name(name: &str) -> bool {
        name.chars()
            .next()
            .map(|c| c.is_ascii_uppercase() || c == '_')
            .unwrap_or(false)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Argument of an atom.
///
/// Integers are numbers with denominator one; there is a single numeric
/// variant so that `2` and `4/2` can never be two different terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Num(Rational),
    Sym(Symbol),
    /// Placeholder, only legal inside schemas and rules.
    Var(Symbol),
}

impl Term {
    pub fn int(v: i64) -> Self {
        Term::Num(Rational::from_integer(v))
    }

    pub fn sym(name: &str) -> Self {
        Term::Sym(Symbol::new(name))
    }

    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Var(_))
    }

    /// The anonymous `_` variable matches anything and never binds.
    pub fn is_wildcard(&self) -> bool {
        matches!(self, Term::Var(v) if v.as_str() == "_")
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Term::Num(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Term::Num(_) => 0,
            Term::Sym(_) => 1,
            Term::Var(_) => 2,
        }
    }
}

/// Numbers (by value) < symbols (by name) < variables (by name).
pub fn term_compare(a: &Term, b: &Term) -> Ordering {
    a.cmp(b)
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Num(a), Term::Num(b)) => a.cmp(b),
            (Term::Sym(a), Term::Sym(b)) => a.cmp(b),
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact decimal rendering, when the denominator has only factors 2 and 5.
pub fn decimal_string(r: &Rational) -> Option<String> {
    let mut den = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return None;
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return Some(r.numer().to_string());
    }
    let scale = 10i128.pow(digits);
    let scaled = *r.numer() as i128 * (scale / *r.denom() as i128);
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    let int_part = abs / scale as u128;
    let frac = abs % scale as u128;
    Some(format!(
        "{sign}{int_part}.{frac:0width$}",
        width = digits as usize
    ))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Num(r) => f.write_str(&fmt_rational(r)),
            Term::Sym(s) | Term::Var(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Variable bindings produced while matching lifted atoms.
pub type Bindings = BTreeMap<Symbol, Term>;

/// A predicate instance `functor(arg, ...)` with flat arguments.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub functor: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(functor: &str, args: Vec<Term>) -> Self {
        Atom {
            functor: Symbol::new(functor),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Named variables in argument order, without duplicates or `_`.
    pub fn vars(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        for t in &self.args {
            if let Term::Var(v) = t {
                if v.as_str() != "_" && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn substitute(&self, bindings: &Bindings) -> Atom {
        Atom {
            functor: self.functor.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
                    _ => t.clone(),
                })
                .collect(),
        }
    }

    /// Extends `bindings` so that `self` matches the ground atom `ground`.
    /// On failure `bindings` is left untouched.
    pub fn unify_with(&self, ground: &Atom, bindings: &mut Bindings) -> bool {
        if self.functor != ground.functor || self.args.len() != ground.args.len() {
            return false;
        }
        let mut added: Vec<Symbol> = Vec::new();
        for (p, g) in self.args.iter().zip(&ground.args) {
            let ok = match p {
                Term::Var(v) if v.as_str() == "_" => true,
                Term::Var(v) => match bindings.get(v) {
                    Some(bound) => bound == g,
                    None => {
                        bindings.insert(v.clone(), g.clone());
                        added.push(v.clone());
                        true
                    }
                },
                _ => p == g,
            };
            if !ok {
                for v in added {
                    bindings.remove(&v);
                }
                return false;
            }
        }
        true
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.functor
            .cmp(&other.functor)
            .then(self.args.len().cmp(&other.args.len()))
            .then_with(|| self.args.cmp(&other.args))
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.functor)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
