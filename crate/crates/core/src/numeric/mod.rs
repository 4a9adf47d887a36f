//! Differentiable dense-array substrate.
//!
//! Everything the model needs from a numerics stack lives here: a row-major
//! 64-bit [`Array`], eager forward operations with reverse-mode gradients
//! recorded on a [`Tape`], a named [`ParamStore`] with the Adam update, and
//! seeded parameter initialization. All computation is CPU, f64, and
//! deterministic: the same inputs and parameters always produce bit-identical
//! outputs.

mod array;
mod init;
pub mod ops;
mod params;
mod tape;

pub use array::Array;
pub use init::{build_store, build_zero_store, rng_for, unit_f64, ParamSpec};
pub use params::{AdamConfig, ParamStore};
pub use tape::{BoundParams, Gradients, NodeId, Op, Tape};

use thiserror::Error;

/// Errors raised by array operations, tape construction, and the parameter
/// store.
#[derive(Debug, Error)]
pub enum NumericError {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("contract violation in {op}: {message}")]
    Contract { op: &'static str, message: String },
    #[error("unknown parameter path {0:?}")]
    UnknownParam(String),
    #[error("duplicate parameter path {0:?}")]
    DuplicateParam(String),
}

impl NumericError {
    pub(crate) fn contract(op: &'static str, message: impl Into<String>) -> Self {
        NumericError::Contract {
            op,
            message: message.into(),
        }
    }
}
