use thiserror::Error;

use crate::model::term::{Atom, Rational};

/// A state was built from an atom that still contains variables.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("non-ground atom `{0}` cannot appear in a state")]
pub struct GroundingError(pub Atom);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("type mismatch: {0}")]
    Type(String),
    #[error("`{0}` is not available in this context")]
    Unavailable(String),
    #[error("unknown state variable `{0}`")]
    UnknownStateVar(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("state variable `{var}` matches no atom in state [{state}]")]
    NoMatch { var: String, state: String },
    #[error("state variable `{var}` matches {count} atoms in state [{state}]")]
    Ambiguous {
        var: String,
        state: String,
        count: usize,
    },
    #[error("state variable `{var}` extracts non-integer value `{value}`")]
    NonInteger { var: String, value: String },
    #[error("state variable `{var}` = {value} is outside [{lo}..{hi}]")]
    OutOfRange {
        var: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("states {a} and {b} have the same encoding ([{first}] vs [{second}])")]
    Collision {
        a: usize,
        b: usize,
        first: String,
        second: String,
    },
}

/// Errors raised while expanding, annotating or solving a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error("action `{schema}` with {bindings}: branch probabilities sum to {sum}")]
    ProbabilitySum {
        schema: String,
        bindings: String,
        sum: String,
    },
    #[error(
        "action `{schema}` with {bindings}: branch {branch} has probability {value} outside [0,1]"
    )]
    InvalidProbability {
        schema: String,
        bindings: String,
        branch: usize,
        value: String,
    },
    #[error("action `{schema}`: distinct groundings share the head `{head}` in state [{state}]")]
    AmbiguousGrounding {
        schema: String,
        head: String,
        state: String,
    },
    #[error("action `{schema}`: added atom `{atom}` is still non-ground")]
    NonGroundAdd { schema: String, atom: Atom },
    #[error("{context}: {source}")]
    Eval {
        context: String,
        #[source]
        source: EvalError,
    },
    #[error("sufficient rule `{rule}` produced negative value {value}")]
    NegativeReward { rule: String, value: String },
    #[error("state space exceeds the cap of {limit} states")]
    CapExceeded { limit: usize },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("action `{action}` is not enabled in state {state}")]
    NotEnabled { state: usize, action: String },
    #[error("label `{0}` is not declared")]
    UndeclaredLabel(String),
    #[error("state {state}, action `{action}`: outgoing probabilities sum to {sum}")]
    Unnormalized {
        state: usize,
        action: String,
        sum: String,
    },
    #[error("{0}")]
    Invalid(String),
}

impl ModelError {
    pub fn eval(context: impl Into<String>, source: EvalError) -> Self {
        ModelError::Eval {
            context: context.into(),
            source,
        }
    }
}

pub(crate) fn rational_string(r: &Rational) -> String {
    crate::model::term::fmt_rational(r)
}
