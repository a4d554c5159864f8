//! Equivariant networks by parameter sharing.
//!
//! Layers store only the free coefficients of the intertwiner space of
//! their input/output representations; hidden features are copies of the
//! 2-dimensional swap representation so pointwise activations commute with
//! the mirror. The actor (encoder, decoder, policy) is equivariant and the
//! critic invariant by construction, at initialization and after any update
//! of the free coefficients.

mod agent;
mod checkpoint;
mod intertwiner;
mod linear;
mod mlp;
mod normalizer;
mod policy;

pub use agent::{ActorCritic, DeterministicPolicy};
pub use checkpoint::{Checkpoint, NetworkRecord, NormalizerRecord, OptimizerRecord, Restored};
pub use intertwiner::{
    bias_residual, intertwiner_residual, project_bias, solve_intertwiner_basis, BiasOrbit, IntertwinerOrbit,
};
pub use linear::{BoundLinear, EquivariantLinear};
pub use mlp::{Activation, BoundMlp, EquivariantMlp, RealizedMlp};
pub use normalizer::ObsNormalizer;
pub use policy::{
    gaussian_log_prob, gaussian_log_prob_graph, Actor, ActorOutputs, BoundActor, Critic, GaussianPolicyHead,
    NetworkWidths, RealizedActor,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EqnnError {
    #[error("{0} representation is not an involution")]
    NotInvolution(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hidden width {0} must be even and positive")]
    OddWidth(usize),
    #[error("activation after layer {layer} acts on a signed representation")]
    UnsafeActivation { layer: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("invalid network configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
