//! Mirror-equivariant actor-critic reinforcement learning.

pub mod numerics;
pub mod symmetry;
pub mod eqnn;
pub mod env;
pub mod metrics;
pub mod rl;
pub mod cli;
