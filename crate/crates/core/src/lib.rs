//! Compile probabilistic planning domains written in MDPL into explicit MDPs,
//! emit PRISM models, synthesize optimal policies and simulate them.

pub mod bundled;
pub mod dsl;
pub mod error;
pub mod export;
pub mod fuzz;
pub mod ground;
pub mod labels;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod prism;
pub mod refine;
pub mod reward;
pub mod sim;
pub mod solver;

pub use error::{EncodingError, EvalError, GroundingError, ModelError};
pub use par::Exec;
