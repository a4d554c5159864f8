use super::normalizer::ObsNormalizer;
use super::policy::{Actor, Critic, RealizedActor};
use super::EqnnError;
use crate::numerics::Tensor;

/// Dense snapshot of the actor's mean path plus the observation normalizer,
/// for fast batched inference.
#[derive(Clone, Debug)]
pub struct DeterministicPolicy {
    actor: RealizedActor,
    normalizer: Option<ObsNormalizer>,
    obs_dim: usize,
}

impl DeterministicPolicy {
    /// Normalizes every history row in place.
    pub fn normalize_histories(&self, histories: &mut Tensor) {
        if let Some(n) = &self.normalizer {
            for chunk in histories.data_mut().chunks_mut(self.obs_dim) {
                let z = n.normalize(chunk);
                chunk.copy_from_slice(&z);
            }
        }
    }

    /// Action means for raw `[batch, rows*obs]` histories.
    pub fn means(&self, histories: &Tensor) -> Result<Tensor, EqnnError> {
        match &self.normalizer {
            None => self.actor.mean(histories),
            Some(_) => {
                let mut h = histories.clone();
                self.normalize_histories(&mut h);
                self.actor.mean(&h)
            }
        }
    }
}

/// Actor, critic and optional observation normalizer trained together.
#[derive(Clone, Debug)]
pub struct ActorCritic {
    pub actor: Actor,
    pub critic: Critic,
    pub normalizer: Option<ObsNormalizer>,
}

impl ActorCritic {
    /// Actor parameters followed by critic parameters.
    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut v = self.actor.parameters();
        v.extend(self.critic.parameters());
        v
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = self.actor.parameters_mut();
        v.extend(self.critic.parameters_mut());
        v
    }

    pub fn num_params(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.parameters()
            .iter()
            .flat_map(|t| t.data().iter().copied())
            .collect()
    }

    /// Overwrites every parameter from a flat vector in [`flatten`](Self::flatten) order.
    pub fn assign(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params(), "parameter vector length");
        let mut off = 0;
        for t in self.parameters_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[off..off + n]);
            off += n;
        }
    }

    /// Normalized copy of an observation (identity when disabled).
    pub fn normalize(&self, obs: &[f64]) -> Vec<f64> {
        match &self.normalizer {
            Some(n) => n.normalize(obs),
            None => obs.to_vec(),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.actor.max_residual().max(self.critic.net.max_residual())
    }

    pub fn deterministic(&self) -> DeterministicPolicy {
        DeterministicPolicy {
            actor: self.actor.realize(),
            normalizer: self.normalizer.clone(),
            obs_dim: self.actor.obs_dim(),
        }
    }

    /// Critic values for raw terrain strips and current observations.
    pub fn values(&self, heights: &Tensor, obs: &Tensor) -> Result<Vec<f64>, EqnnError> {
        match &self.normalizer {
            None => self.critic.value(heights, obs),
            Some(n) => {
                let mut o = obs.clone();
                for chunk in o.data_mut().chunks_mut(self.actor.obs_dim()) {
                    let z = n.normalize(chunk);
                    chunk.copy_from_slice(&z);
                }
                self.critic.value(heights, &o)
            }
        }
    }
}
