use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RlError;
use crate::eqnn::{Activation, NetworkWidths};
use crate::env::EnvConfig;

/// The four compared training setups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Equivariant actor, invariant critic.
    SePolicy,
    /// Equivariant actor, unconstrained critic.
    SeActorOnly,
    /// Unconstrained actor and critic.
    Vanilla,
    /// Unconstrained networks plus the mirror-consistency penalty.
    VanillaRegu,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::SePolicy, Variant::SeActorOnly, Variant::Vanilla, Variant::VanillaRegu];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::SePolicy => "se-policy",
            Variant::SeActorOnly => "se-actor-only",
            Variant::Vanilla => "vanilla",
            Variant::VanillaRegu => "vanilla-regu",
        }
    }

    pub fn equivariant_actor(self) -> bool {
        matches!(self, Variant::SePolicy | Variant::SeActorOnly)
    }

    pub fn invariant_critic(self) -> bool {
        self == Variant::SePolicy
    }

    pub fn uses_regularizer(self) -> bool {
        self == Variant::VanillaRegu
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for Variant {
    type Err = RlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| RlError::UnknownVariant(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub learning_rate: f64,
    pub adaptive_lr: bool,
    pub desired_kl: f64,
    pub max_grad_norm: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub normalize_advantages: bool,
    /// Multiplies rewards before advantage estimation.
    pub reward_scale: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            lambda: 0.95,
            clip: 0.2,
            epochs: 5,
            minibatches: 4,
            learning_rate: 5e-4,
            adaptive_lr: true,
            desired_kl: 0.01,
            max_grad_norm: 1.0,
            value_coef: 1.0,
            entropy_coef: 0.0,
            normalize_advantages: true,
            reward_scale: 0.02,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |f: &str, why: &str| Err(RlError::Config(format!("ppo.{f}: {why}")));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", "must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda", "must lie in [0, 1]");
        }
        if !(self.clip > 0.0) {
            return bad("clip", "must be positive");
        }
        if self.epochs == 0 || self.minibatches == 0 {
            return bad("epochs", "epochs and minibatches must be at least 1");
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate", "must be finite and non-negative");
        }
        if !(self.desired_kl > 0.0) {
            return bad("desired_kl", "must be positive");
        }
        if !(self.max_grad_norm > 0.0) {
            return bad("max_grad_norm", "must be positive");
        }
        if !(self.reward_scale > 0.0) || !self.reward_scale.is_finite() {
            return bad("reward_scale", "must be finite and positive");
        }
        if !(self.value_coef >= 0.0 && self.entropy_coef >= 0.0) {
            return bad("value_coef", "loss weights must be non-negative");
        }
        Ok(())
    }
}

/// Everything that distinguishes one variant's optimization from another's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub variant: Variant,
    /// Weight of the symmetry penalty; read only by `vanilla-regu`.
    pub reg_weight: f64,
    pub ppo: PpoConfig,
}

impl VariantConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            reg_weight: 0.5,
            ppo: PpoConfig::default(),
        }
    }

    /// `λ_reg` as applied in the loss (zero unless `vanilla-regu`).
    pub fn effective_reg_weight(&self) -> f64 {
        if self.variant.uses_regularizer() {
            self.reg_weight
        } else {
            0.0
        }
    }
}

/// Full training run description, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub variant: Variant,
    pub reg_weight: f64,
    pub seeds: Vec<u64>,
    pub iterations: usize,
    pub num_envs: usize,
    pub horizon: usize,
    pub history_len: usize,
    pub widths: NetworkWidths,
    pub activation: Activation,
    pub init_log_std: f64,
    pub normalize_observations: bool,
    pub checkpoint_interval: usize,
    /// Rollout worker threads; 0 or 1 runs serially.
    pub workers: usize,
    pub env: EnvConfig,
    pub ppo: PpoConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variant: Variant::SePolicy,
            reg_weight: 0.5,
            seeds: vec![0],
            iterations: 200,
            num_envs: 16,
            horizon: 64,
            history_len: 5,
            widths: NetworkWidths::toy(),
            activation: Activation::Elu,
            init_log_std: 0.0,
            normalize_observations: true,
            checkpoint_interval: 50,
            workers: 1,
            env: EnvConfig::default(),
            ppo: PpoConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn variant_config(&self) -> VariantConfig {
        VariantConfig {
            variant: self.variant,
            reg_weight: self.reg_weight,
            ppo: self.ppo.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), RlError> {
        self.ppo.validate()?;
        self.env.validate().map_err(|e| RlError::Config(format!("env: {e}")))?;
        let bad = |f: &str, why: &str| Err(RlError::Config(format!("{f}: {why}")));
        if self.seeds.is_empty() {
            return bad("seeds", "must not be empty");
        }
        if self.num_envs == 0 || self.horizon == 0 {
            return bad("num_envs", "num_envs and horizon must be at least 1");
        }
        if self.num_envs * self.horizon < self.ppo.minibatches {
            return bad("ppo.minibatches", "more minibatches than samples");
        }
        if self.widths.encoder.is_empty() || self.widths.latent_size() % 2 != 0 {
            return bad("widths.encoder", "last entry is the latent size and must be even");
        }
        if !(self.reg_weight >= 0.0) {
            return bad("reg_weight", "must be non-negative");
        }
        Ok(())
    }

    /// Parses JSON; unknown keys are errors and the message carries the
    /// offending path.
    pub fn from_json(s: &str) -> Result<Self, RlError> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| RlError::Config(format!("{}: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
