//! PRISM model emission and a parser for the emitted subset.

pub mod emit;
pub mod encode;
pub mod parse;

pub use emit::{emit, props, EmitMode};
pub use encode::{encode_state, encode_state_map};
pub use parse::{parse_prism_subset, PrismError, PrismModel};
