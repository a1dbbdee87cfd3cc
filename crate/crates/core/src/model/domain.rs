//! Lifted domain description: facts, initial state, action schemas, reward
//! rules, labels and state-variable declarations.

use std::fmt;

use super::state::State;
use super::term::{Atom, Rational, Symbol};
use crate::dsl::expr::Expr;

/// 1-based source position.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug)]
pub enum VerifyClause {
    /// `Var := expr` introduces a new variable.
    Bind(Symbol, Expr),
    /// Filters groundings.
    Check(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EffectOp {
    Del(Atom),
    Add(Atom),
}

impl EffectOp {
    pub fn atom(&self) -> &Atom {
        match self {
            EffectOp::Del(a) | EffectOp::Add(a) => a,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EffectBranch {
    pub prob: Expr,
    pub ops: Vec<EffectOp>,
}

impl EffectBranch {
    pub fn dels(&self) -> impl Iterator<Item = &Atom> {
        self.ops.iter().filter_map(|op| match op {
            EffectOp::Del(a) => Some(a),
            EffectOp::Add(_) => None,
        })
    }

    pub fn adds(&self) -> impl Iterator<Item = &Atom> {
        self.ops.iter().filter_map(|op| match op {
            EffectOp::Add(a) => Some(a),
            EffectOp::Del(_) => None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ActionSchema {
    pub name: Symbol,
    pub params: Vec<Symbol>,
    pub static_pre: Vec<Atom>,
    pub state_pre: Vec<Atom>,
    pub verify: Vec<VerifyClause>,
    pub branches: Vec<EffectBranch>,
    pub span: Span,
}

impl ActionSchema {
    /// The lifted head `name(P1, ..., Pn)`.
    pub fn head(&self) -> Atom {
        Atom {
            functor: self.name.clone(),
            args: self
                .params
                .iter()
                .map(|p| super::term::Term::Var(p.clone()))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RuleKind {
    Necessary,
    Sufficient,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PatternScope {
    Cur,
    Next,
    Action,
}

impl PatternScope {
    pub fn keyword(self) -> &'static str {
        match self {
            PatternScope::Cur => "cur",
            PatternScope::Next => "next",
            PatternScope::Action => "action",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pattern {
    pub scope: PatternScope,
    pub atom: Atom,
}

/// Necessary rules are hard constraints: when the patterns and guard match
/// and `require` is false, the transition gets the penalty. Sufficient rules
/// add `value` when their patterns and guard match.
#[derive(Clone, Debug)]
pub struct RewardRule {
    pub kind: RuleKind,
    pub name: Symbol,
    pub patterns: Vec<Pattern>,
    pub guard: Option<Expr>,
    pub require: Option<Expr>,
    pub value: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct LabelDef {
    pub name: Symbol,
    pub cond: Expr,
    pub span: Span,
}

/// Named predicate over grounded action heads, used for simulation counts.
#[derive(Clone, Debug)]
pub struct Classifier {
    pub name: Symbol,
    pub cond: Expr,
    pub span: Span,
}

/// Integer variable extracted from a state by matching `pattern`; the
/// argument at `value_pos` carries the value, `_` positions match anything.
#[derive(Clone, Debug)]
pub struct StateVarDecl {
    pub name: Symbol,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
    pub pattern: Atom,
    pub value_pos: usize,
    pub span: Span,
}

impl StateVarDecl {
    pub fn matches(&self, atom: &Atom) -> bool {
        atom.functor == self.pattern.functor
            && atom.arity() == self.pattern.arity()
            && self
                .pattern
                .args
                .iter()
                .zip(&atom.args)
                .enumerate()
                .all(|(i, (p, a))| i == self.value_pos || p.is_wildcard() || p == a)
    }
}

pub const DEFAULT_PENALTY: i64 = 1000;

#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub name: Symbol,
    pub facts: State,
    pub init: State,
    pub statevars: Vec<StateVarDecl>,
    pub schemas: Vec<ActionSchema>,
    pub rewards: Vec<RewardRule>,
    pub labels: Vec<LabelDef>,
    pub classifiers: Vec<Classifier>,
    /// Magnitude of the necessary-violation penalty.
    pub penalty: Rational,
}

impl DomainSpec {
    pub fn label(&self, name: &str) -> Option<&LabelDef> {
        self.labels.iter().find(|l| l.name.as_str() == name)
    }

    pub fn statevar_index(&self, name: &str) -> Option<usize> {
        self.statevars.iter().position(|v| v.name.as_str() == name)
    }
}
