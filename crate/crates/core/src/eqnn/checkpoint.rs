//! JSON checkpoints. Every floating value is written as the shortest decimal
//! string that parses back to the identical `f64`, so save → load is
//! bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::agent::ActorCritic;
use super::mlp::{Activation, EquivariantMlp};
use super::normalizer::ObsNormalizer;
use super::policy::{Actor, Critic, GaussianPolicyHead};
use super::EqnnError;
use crate::numerics::AdamState;
use crate::symmetry::{LayoutProfile, SignedPermutation};

fn encode(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format!("{v:?}")).collect()
}

fn decode(values: &[String]) -> Result<Vec<f64>, EqnnError> {
    values
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| EqnnError::Checkpoint(format!("bad decimal {s:?}")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkRecord {
    pub name: String,
    pub in_rep: SignedPermutation,
    pub out_rep: SignedPermutation,
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub equivariant: bool,
    pub free_params: Vec<String>,
}

impl NetworkRecord {
    fn of(name: &str, net: &EquivariantMlp, equivariant: bool) -> Self {
        Self {
            name: name.to_owned(),
            in_rep: net.in_rep().clone(),
            out_rep: net.out_rep().clone(),
            widths: net.widths(),
            activation: net.activation(),
            equivariant,
            free_params: encode(
                &net.parameters()
                    .iter()
                    .flat_map(|t| t.data().iter().copied())
                    .collect::<Vec<_>>(),
            ),
        }
    }

    fn build(&self) -> Result<EquivariantMlp, EqnnError> {
        let mut reps = vec![self.in_rep.clone()];
        for &w in &self.widths {
            reps.push(if self.equivariant {
                SignedPermutation::regular(w / 2)
            } else {
                SignedPermutation::identity(w)
            });
        }
        reps.push(self.out_rep.clone());
        let mut net = EquivariantMlp::from_reps::<rand::rngs::ThreadRng>(&reps, self.activation, None)?;
        let values = decode(&self.free_params)?;
        let expected = net.num_free();
        if values.len() != expected {
            return Err(EqnnError::Checkpoint(format!(
                "{}: {} free parameters, expected {expected}",
                self.name,
                values.len()
            )));
        }
        let mut off = 0;
        for t in net.parameters_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&values[off..off + n]);
            off += n;
        }
        Ok(net)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerRecord {
    pub learning_rate: String,
    pub step: u64,
    pub m: Vec<String>,
    pub v: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizerRecord {
    pub mean: Vec<String>,
    pub var: Vec<String>,
    pub count: String,
    pub clip: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub profile: LayoutProfile,
    pub variant: String,
    pub history_len: usize,
    /// Encoder, decoder, policy and critic networks, in that order.
    pub layers: Vec<NetworkRecord>,
    pub log_std: Vec<String>,
    pub tied_log_std: bool,
    pub optimizer: OptimizerRecord,
    pub training_step: u64,
    pub normalizer: Option<NormalizerRecord>,
}

/// Everything restored from a [`Checkpoint`].
#[derive(Clone, Debug)]
pub struct Restored {
    pub agent: ActorCritic,
    pub optimizer: AdamState,
    pub learning_rate: f64,
    pub training_step: u64,
}

impl Checkpoint {
    pub fn capture(
        profile: &LayoutProfile,
        variant: &str,
        agent: &ActorCritic,
        optimizer: &AdamState,
        learning_rate: f64,
        training_step: u64,
    ) -> Self {
        let a = &agent.actor;
        let eq = a.is_equivariant();
        Self {
            profile: profile.clone(),
            variant: variant.to_owned(),
            history_len: a.history_rows() - 1,
            layers: vec![
                NetworkRecord::of("encoder", &a.encoder, eq),
                NetworkRecord::of("decoder", &a.decoder, eq),
                NetworkRecord::of("policy", &a.policy, eq),
                NetworkRecord::of("critic", &agent.critic.net, agent.critic.is_invariant()),
            ],
            log_std: encode(a.head.params().data()),
            tied_log_std: eq,
            optimizer: OptimizerRecord {
                learning_rate: format!("{learning_rate:?}"),
                step: optimizer.step,
                m: encode(&optimizer.m),
                v: encode(&optimizer.v),
            },
            training_step,
            normalizer: agent.normalizer.as_ref().map(|n| NormalizerRecord {
                mean: encode(&n.mean),
                var: encode(&n.var),
                count: format!("{:?}", n.count),
                clip: format!("{:?}", n.clip),
            }),
        }
    }

    pub fn restore(&self) -> Result<Restored, EqnnError> {
        let find = |name: &str| {
            self.layers
                .iter()
                .find(|l| l.name == name)
                .ok_or_else(|| EqnnError::Checkpoint(format!("missing network {name}")))
        };
        let encoder = find("encoder")?.build()?;
        let decoder = find("decoder")?.build()?;
        let policy = find("policy")?.build()?;
        let critic_rec = find("critic")?;
        let critic_net = critic_rec.build()?;

        let obs_dim = self.profile.obs_dim();
        let rows = self.history_len + 1;
        if encoder.in_dim() != rows * obs_dim || policy.out_dim() != self.profile.action_dim() {
            return Err(EqnnError::Checkpoint("networks do not match the profile".into()));
        }
        let mut head = GaussianPolicyHead::new(self.profile.f_a(), self.tied_log_std, 0.0);
        let log_std = decode(&self.log_std)?;
        if log_std.len() != head.params().len() {
            return Err(EqnnError::Checkpoint("log_std length".into()));
        }
        head.params_mut().data_mut().copy_from_slice(&log_std);
        let eq = find("policy")?.equivariant;
        let actor = Actor::from_parts(obs_dim, rows, eq, encoder, decoder, policy, head);
        let critic = Critic::from_net(
            critic_net,
            self.profile.height_dim(),
            obs_dim,
            critic_rec.equivariant,
        );
        let normalizer = match &self.normalizer {
            None => None,
            Some(r) => {
                let mut n = ObsNormalizer::new(self.profile.f_o().clone(), decode(std::slice::from_ref(&r.clip))?[0]);
                n.mean = decode(&r.mean)?;
                n.var = decode(&r.var)?;
                n.count = decode(std::slice::from_ref(&r.count))?[0];
                Some(n)
            }
        };
        let lr = decode(std::slice::from_ref(&self.optimizer.learning_rate))?[0];
        Ok(Restored {
            agent: ActorCritic {
                actor,
                critic,
                normalizer,
            },
            optimizer: AdamState {
                step: self.optimizer.step,
                m: decode(&self.optimizer.m)?,
                v: decode(&self.optimizer.v)?,
            },
            learning_rate: lr,
            training_step: self.training_step,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, EqnnError> {
        serde_json::from_str(s).map_err(|e| EqnnError::Checkpoint(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), EqnnError> {
        std::fs::write(path, self.to_json()).map_err(|e| EqnnError::Checkpoint(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, EqnnError> {
        let s = std::fs::read_to_string(path).map_err(|e| EqnnError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqnn::NetworkWidths;
    use crate::symmetry::build_toy_profile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn agent(equivariant: bool) -> (LayoutProfile, ActorCritic) {
        let profile = build_toy_profile(2, 1).unwrap().with_latent_size(4).unwrap();
        let widths = NetworkWidths {
            actor: vec![8],
            critic: vec![8],
            encoder: vec![8, 4],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let actor = Actor::new(&profile, 2, &widths, Activation::Elu, equivariant, -0.7, &mut rng).unwrap();
        let critic = Critic::new(&profile, &widths.critic, Activation::Elu, equivariant, &mut rng).unwrap();
        let mut norm = ObsNormalizer::new(profile.f_o().clone(), 5.0);
        norm.update(&[vec![0.3; profile.obs_dim()], vec![-0.1; profile.obs_dim()]]);
        (
            profile,
            ActorCritic {
                actor,
                critic,
                normalizer: Some(norm),
            },
        )
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for eq in [true, false] {
            let (profile, agent) = agent(eq);
            let n = agent.num_params();
            let opt = AdamState {
                step: 7,
                m: (0..n).map(|i| (i as f64).sin() * 1e-3).collect(),
                v: (0..n).map(|i| (i as f64).cos().powi(2) * 1e-7).collect(),
            };
            let ck = Checkpoint::capture(&profile, "se-policy", &agent, &opt, 3.3e-4, 1234);
            let back = Checkpoint::from_json(&ck.to_json()).unwrap();
            assert_eq!(back, ck);
            let r = back.restore().unwrap();
            let (a, b) = (agent.flatten(), r.agent.flatten());
            assert_eq!(a.len(), b.len());
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert_eq!(r.optimizer, opt);
            assert_eq!(r.learning_rate.to_bits(), 3.3e-4f64.to_bits());
            assert_eq!(r.training_step, 1234);
            assert_eq!(r.agent.normalizer, agent.normalizer);
            assert_eq!(r.agent.actor.head.params(), agent.actor.head.params());
        }
    }

    #[test]
    fn rejects_unknown_fields_and_bad_counts() {
        let (profile, agent) = agent(true);
        let opt = AdamState {
            step: 0,
            m: vec![],
            v: vec![],
        };
        let mut ck = Checkpoint::capture(&profile, "se-policy", &agent, &opt, 1e-3, 0);
        let mut json: serde_json::Value = serde_json::from_str(&ck.to_json()).unwrap();
        json["extra"] = serde_json::json!(1);
        assert!(Checkpoint::from_json(&json.to_string()).is_err());
        ck.layers[0].free_params.pop();
        assert!(matches!(ck.restore(), Err(EqnnError::Checkpoint(_))));
    }
}
