use rand::seq::SliceRandom;
use rand::Rng;

use super::loss::{build_loss, LossWeights, Minibatch, SymmetryMaps};
use super::{normalize_advantages, AdvantageEstimates, RlError, RolloutBuffer, VariantConfig};
use crate::eqnn::ActorCritic;
use crate::numerics::{clip_grad_norm, Adam};

/// Optimizer state carried across updates.
#[derive(Clone, Debug, PartialEq)]
pub struct Learner {
    pub adam: Adam,
    pub learning_rate: f64,
    pub updates: u64,
}

impl Learner {
    pub fn new(agent: &ActorCritic, learning_rate: f64) -> Self {
        Self {
            adam: Adam::new(agent.num_params()),
            learning_rate,
            updates: 0,
        }
    }
}

/// Means over every minibatch step of one update.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub loss_total: f64,
    pub loss_ppo: f64,
    pub loss_value: f64,
    pub loss_ae: f64,
    pub loss_reg: f64,
    pub entropy: f64,
    pub kl: f64,
    pub grad_norm: f64,
    pub learning_rate: f64,
    pub excluded: usize,
}

/// Halve above twice the target, grow by half below half of it.
pub fn adapt_learning_rate(lr: f64, kl: f64, desired: f64) -> f64 {
    let next = if kl > 2.0 * desired {
        lr / 2.0
    } else if kl < desired / 2.0 {
        lr * 1.5
    } else {
        lr
    };
    next.clamp(1e-6, 1e-2)
}

/// Runs `epochs × minibatches` gradient steps, then adapts the learning
/// rate from the mean KL of those steps. A non-finite loss or
/// gradient restores parameters and optimizer state and returns an error.
pub fn update<R: Rng + ?Sized>(
    agent: &mut ActorCritic,
    learner: &mut Learner,
    buf: &RolloutBuffer,
    est: &AdvantageEstimates,
    cfg: &VariantConfig,
    maps: &SymmetryMaps,
    rng: &mut R,
) -> Result<UpdateStats, RlError> {
    let snapshot = (agent.flatten(), learner.clone());
    let result = run_update(agent, learner, buf, est, cfg, maps, rng);
    if result.is_err() {
        agent.assign(&snapshot.0);
        *learner = snapshot.1;
    }
    result
}

fn run_update<R: Rng + ?Sized>(
    agent: &mut ActorCritic,
    learner: &mut Learner,
    buf: &RolloutBuffer,
    est: &AdvantageEstimates,
    cfg: &VariantConfig,
    maps: &SymmetryMaps,
    rng: &mut R,
) -> Result<UpdateStats, RlError> {
    let ppo = &cfg.ppo;
    let advantages = if ppo.normalize_advantages {
        normalize_advantages(&est.advantages)
    } else {
        est.advantages.clone()
    };
    let weights = LossWeights {
        clip: ppo.clip,
        value_coef: ppo.value_coef,
        reg_weight: cfg.effective_reg_weight(),
        entropy_coef: ppo.entropy_coef,
    };
    let n = buf.len();
    let mb_size = n / ppo.minibatches;
    if mb_size == 0 {
        return Err(RlError::Config(format!("{n} samples cannot fill {} minibatches", ppo.minibatches)));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut stats = UpdateStats::default();
    let mut steps = 0usize;
    for _ in 0..ppo.epochs {
        order.shuffle(rng);
        for chunk in order.chunks_exact(mb_size) {
            let mb = Minibatch::from_buffer(agent, buf, &advantages, est, chunk);
            let lg = build_loss(agent, &mb, &weights, maps)?;
            let grads = lg.graph.backward(lg.root)?;
            let mut flat = Vec::with_capacity(agent.num_params());
            for (&v, t) in lg.params.iter().zip(agent.parameters()) {
                flat.extend_from_slice(grads.get_or_zeros(v, t).data());
            }
            let norm = clip_grad_norm(&mut flat, ppo.max_grad_norm);
            if !norm.is_finite() {
                return Err(RlError::NonFinite {
                    what: "gradient".into(),
                });
            }
            let b = lg.breakdown;
            if !b.total.is_finite() {
                return Err(RlError::NonFinite { what: "loss".into() });
            }
            let mut params = agent.flatten();
            learner.adam.step(&mut params, &flat, learner.learning_rate);
            if params.iter().any(|p| !p.is_finite()) {
                return Err(RlError::NonFinite {
                    what: "parameters".into(),
                });
            }
            agent.assign(&params);
            learner.updates += 1;

            stats.loss_total += b.total;
            stats.loss_ppo += b.ppo;
            stats.loss_value += b.value;
            stats.loss_ae += b.ae;
            stats.loss_reg += b.reg;
            stats.entropy += b.entropy;
            stats.kl += b.kl;
            stats.grad_norm += norm;
            stats.excluded += b.excluded;
            steps += 1;
        }
    }
    let k = steps.max(1) as f64;
    stats.loss_total /= k;
    stats.loss_ppo /= k;
    stats.loss_value /= k;
    stats.loss_ae /= k;
    stats.loss_reg /= k;
    stats.entropy /= k;
    stats.kl /= k;
    stats.grad_norm /= k;
    if ppo.adaptive_lr && stats.kl.is_finite() {
        learner.learning_rate = adapt_learning_rate(learner.learning_rate, stats.kl, ppo.desired_kl);
    }
    stats.learning_rate = learner.learning_rate;
    Ok(stats)
}
