//! Intermediate representation shared by all pipeline stages.

pub mod domain;
pub mod graph;
pub mod policy;
pub mod state;
pub mod term;

pub use domain::{
    ActionSchema, Classifier, DomainSpec, EffectBranch, EffectOp, LabelDef, Pattern, PatternScope,
    RewardRule, RuleKind, Span, StateVarDecl, VerifyClause,
};
pub use graph::{Choice, Edge, MdpGraph};
pub use policy::{Objective, Policy, Sense};
pub use state::State;
pub use term::{term_compare, Atom, Bindings, Rational, Symbol, Term};
