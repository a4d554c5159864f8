//! The mirror (C2) action on every vector space of the task.
//!
//! Each space carries one [`SignedPermutation`]; a [`LayoutProfile`] names
//! the blocks of each space and assembles the permutations from them.

mod conformance;
mod perm;
mod profile;

pub use conformance::{check_reference_rows, g1_reference_rows, ReferenceRow, RowConformance};
pub use perm::{mirror_history, SignedPermutation};
pub use profile::{
    assemble, build_g1_profile, build_toy_profile, ComponentSpec, LayoutProfile, Space, TransformKind,
    G1_HEIGHT_LEFT, G1_HEIGHT_MIDDLE, G1_HEIGHT_RIGHT, TOY_EPISODE_PARAMS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("target is not a bijection")]
    NotBijection,
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i8),
    #[error("{0} transform is not an involution")]
    NotInvolution(String),
    #[error("latent size {0} is odd")]
    OddLatent(usize),
    #[error("invalid layout: {0}")]
    Layout(String),
}
