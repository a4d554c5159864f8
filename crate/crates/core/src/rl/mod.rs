//! PPO with generalized advantage estimation, the observation autoencoder,
//! the mirror-consistency penalty and the four compared variants.

mod buffer;
mod config;
mod gae;
mod jobs;
mod loss;
mod sweep;
mod train;
mod update;

use thiserror::Error;

use crate::eqnn::EqnnError;
use crate::env::EnvError;
use crate::metrics::MetricsError;
use crate::numerics::NumericsError;

pub use buffer::{collect_rollouts, EnvPool, RolloutBuffer};
pub use config::{PpoConfig, TrainConfig, Variant, VariantConfig};
pub use gae::{compute_gae, compute_gae_scaled, gae_trajectory, normalize_advantages, AdvantageEstimates};
pub use jobs::{
    config_hash, digest_hex, eval_job, load_policy, profile_family, rollout_job, run_hash, train_job, verify_job, EvalJob, EvalPreset,
    LoadedPolicy, RunManifest, VerifyJob, VerifyTarget,
};
pub use loss::{
    ae_loss, build_loss, gaussian_kl, ppo_loss, ppo_loss_graph, reg_loss, value_loss, LossBreakdown, LossGraph,
    LossWeights, Minibatch, SymmetryMaps,
};
pub use sweep::{run_sweep, SweepEval, SweepRun};
pub use train::{build_agent, train, IterationStats, TrainOutcome, METRICS_HEADER};
pub use update::{adapt_learning_rate, update, Learner, UpdateStats};

#[derive(Debug, Error)]
pub enum RlError {
    #[error("unknown variant '{0}'; expected one of: se-policy, se-actor-only, vanilla, vanilla-regu")]
    UnknownVariant(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("non-finite {what}")]
    NonFinite { what: String },
    #[error("update aborted at iteration {iteration}: {source}")]
    Aborted {
        iteration: usize,
        #[source]
        source: Box<RlError>,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Network(#[from] EqnnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
