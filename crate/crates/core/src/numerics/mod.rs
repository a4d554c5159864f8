//! Dense `f64` tensors, a reverse-mode tape, finite-difference checking and
//! the Adam optimizer.

mod gradcheck;
mod graph;
mod optim;
mod tensor;

pub use gradcheck::{central_differences, finite_difference_check};
pub use graph::{GatherMap, Gradients, Graph, Var};
pub use optim::{clip_grad_norm, Adam, AdamState};
pub use tensor::{gemm_into, Tensor};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("data length {len} does not match shape {shape:?}")]
    DataLength { shape: Vec<usize>, len: usize },
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("backward requires a scalar root, got shape {shape:?}")]
    NonScalarRoot { shape: Vec<usize> },
    #[error("non-finite value at node {node} ({op})")]
    NonFinite { node: usize, op: &'static str },
    #[error("non-finite function value while probing coordinate {index}")]
    NonFiniteProbe { index: usize },
}
