use std::sync::Arc;

use super::{AdvantageEstimates, RlError, RolloutBuffer};
use crate::eqnn::{gaussian_log_prob_graph, Actor, ActorCritic, BoundActor};
use crate::numerics::{GatherMap, Graph, Tensor, Var};
use crate::symmetry::SignedPermutation;

/// Log-ratios beyond this magnitude overflow `exp`; such rows are dropped.
const MAX_LOG_RATIO: f64 = 700.0;

/// Mirror transforms on stacked histories and on actions.
#[derive(Clone, Debug)]
pub struct SymmetryMaps {
    pub f_hist: SignedPermutation,
    pub f_a: SignedPermutation,
}

/// Scalar weights of the combined objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub clip: f64,
    pub value_coef: f64,
    pub reg_weight: f64,
    pub entropy_coef: f64,
}

/// Training rows, already normalized if the agent carries a normalizer.
#[derive(Clone, Debug)]
pub struct Minibatch {
    pub histories: Tensor,
    /// `[heights | current observation]` rows.
    pub critic_inputs: Tensor,
    pub next_observations: Tensor,
    pub actions: Tensor,
    pub old_log_probs: Vec<f64>,
    pub old_means: Tensor,
    pub old_log_std: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Minibatch {
    pub fn len(&self) -> usize {
        self.old_log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Gathers rows `idx` of `buf`; `advantages` may already be normalized.
    pub fn from_buffer(
        agent: &ActorCritic,
        buf: &RolloutBuffer,
        advantages: &[f64],
        est: &AdvantageEstimates,
        idx: &[usize],
    ) -> Self {
        let od = buf.obs_dim;
        let norm_rows = |t: Tensor| -> Tensor {
            if agent.normalizer.is_none() {
                return t;
            }
            let (r, c) = (t.rows(), t.cols());
            let mut data = t.into_data();
            for chunk in data.chunks_mut(od) {
                let z = agent.normalize(chunk);
                chunk.copy_from_slice(&z);
            }
            Tensor::matrix(r, c, data)
        };
        let histories = norm_rows(RolloutBuffer::rows(&buf.histories, buf.history_width, idx));
        let obs = norm_rows(RolloutBuffer::rows(&buf.observations, od, idx));
        let heights = RolloutBuffer::rows(&buf.heights, buf.height_dim, idx);
        let mut ci = Vec::with_capacity(idx.len() * (buf.height_dim + od));
        for r in 0..idx.len() {
            ci.extend_from_slice(heights.row(r));
            ci.extend_from_slice(obs.row(r));
        }
        Self {
            histories,
            critic_inputs: Tensor::matrix(idx.len(), buf.height_dim + od, ci),
            next_observations: norm_rows(RolloutBuffer::rows(&buf.next_observations, od, idx)),
            actions: RolloutBuffer::rows(&buf.actions, buf.action_dim, idx),
            old_log_probs: idx.iter().map(|&i| buf.log_probs[i]).collect(),
            old_means: RolloutBuffer::rows(&buf.means, buf.action_dim, idx),
            old_log_std: buf.log_std.clone(),
            advantages: idx.iter().map(|&i| advantages[i]).collect(),
            returns: idx.iter().map(|&i| est.returns[i]).collect(),
        }
    }
}

/// Values of each term; `excluded` counts rows with non-finite ratios.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub ppo: f64,
    pub value: f64,
    pub ae: f64,
    pub reg: f64,
    pub entropy: f64,
    pub kl: f64,
    pub excluded: usize,
}

/// A recorded objective ready for `backward`. `params` follow
/// [`ActorCritic::parameters`] order.
pub struct LossGraph {
    pub graph: Graph,
    pub root: Var,
    pub params: Vec<Var>,
    pub breakdown: LossBreakdown,
}

/// Clipped surrogate on plain ratios: mean of `−min(ρA, clip(ρ)A)` over
/// finite ratios, plus the number of excluded rows.
pub fn ppo_loss(ratios: &[f64], advantages: &[f64], clip: f64) -> (f64, usize) {
    let mut total = 0.0;
    let mut used = 0;
    for (&r, &a) in ratios.iter().zip(advantages) {
        if !r.is_finite() {
            continue;
        }
        total += -(r * a).min(r.clamp(1.0 - clip, 1.0 + clip) * a);
        used += 1;
    }
    let excluded = ratios.len() - used;
    if used == 0 {
        (0.0, excluded)
    } else {
        (total / used as f64, excluded)
    }
}

/// Clipped surrogate from a `[B, 1]` log-probability node. Returns `None`
/// when every row is excluded.
pub fn ppo_loss_graph(
    g: &mut Graph,
    log_prob: Var,
    old_log_probs: &[f64],
    advantages: &[f64],
    clip: f64,
) -> (Option<Var>, usize) {
    let b = old_log_probs.len();
    let new = g.value(log_prob).data().to_vec();
    let keep: Vec<usize> = (0..b)
        .filter(|&i| {
            let lr = new[i] - old_log_probs[i];
            lr.is_finite() && lr.abs() < MAX_LOG_RATIO
        })
        .collect();
    let excluded = b - keep.len();
    if keep.is_empty() {
        return (None, excluded);
    }
    let old = g.input(Tensor::matrix(b, 1, old_log_probs.to_vec()));
    let log_ratio = g.sub(log_prob, old);
    let log_ratio = if excluded > 0 {
        let map = GatherMap {
            shape: vec![keep.len(), 1],
            source: keep.iter().map(|&i| Some(i)).collect(),
            sign: vec![1.0; keep.len()],
        };
        g.gather(log_ratio, Arc::new(map))
    } else {
        log_ratio
    };
    let adv = g.input(Tensor::matrix(keep.len(), 1, keep.iter().map(|&i| advantages[i]).collect()));
    let ratio = g.exp(log_ratio);
    let s1 = g.mul(ratio, adv);
    let clipped = g.clip(ratio, 1.0 - clip, 1.0 + clip);
    let s2 = g.mul(clipped, adv);
    let m = g.minimum(s1, s2);
    let mean = g.mean(m);
    (Some(g.neg(mean)), excluded)
}

/// Mean squared error between a `[B, 1]` value node and `returns`.
pub fn value_loss(g: &mut Graph, values: Var, returns: &[f64]) -> Var {
    let y = g.input(Tensor::matrix(returns.len(), 1, returns.to_vec()));
    let d = g.sub(values, y);
    let sq = g.square(d);
    g.mean(sq)
}

/// Mean squared reconstruction error against the next observations.
pub fn ae_loss(g: &mut Graph, reconstruction: Var, next_observations: &Tensor) -> Var {
    let y = g.input(next_observations.clone());
    let d = g.sub(reconstruction, y);
    let sq = g.square(d);
    g.mean(sq)
}

/// Row-wise `F_a` on a `[rows, A]` node.
fn mirror_rows_map(f_a: &SignedPermutation, rows: usize) -> GatherMap {
    let a = f_a.len();
    let mut source = vec![None; rows * a];
    let mut sign = vec![0.0; rows * a];
    for r in 0..rows {
        for i in 0..a {
            let o = r * a + f_a.target_of(i);
            source[o] = Some(r * a + i);
            sign[o] = f_a.sign_of(i);
        }
    }
    GatherMap {
        shape: vec![rows, a],
        source,
        sign,
    }
}

/// Mean over rows of `‖π(F(H)) − F_a(π(H))‖²` on deterministic means.
/// `mean` may pass an already computed `π(H)` node.
pub fn reg_loss(
    g: &mut Graph,
    actor: &Actor,
    bound: &BoundActor,
    histories: &Tensor,
    mean: Option<Var>,
    maps: &SymmetryMaps,
) -> Result<Var, RlError> {
    let mean = match mean {
        Some(m) => m,
        None => {
            let h = g.input(histories.clone());
            actor.mean_graph(bound, g, h)?
        }
    };
    let mirrored = maps
        .f_hist
        .apply_rows(histories)
        .map_err(|e| RlError::Config(e.to_string()))?;
    let hm = g.input(mirrored);
    let mean_m = actor.mean_graph(bound, g, hm)?;
    let fa = g.gather(mean, Arc::new(mirror_rows_map(&maps.f_a, histories.rows())));
    let d = g.sub(mean_m, fa);
    let sq = g.square(d);
    let per_row = g.row_sum(sq);
    Ok(g.mean(per_row))
}

/// `KL(old ‖ new)` between diagonal Gaussians.
pub fn gaussian_kl(old_mean: &[f64], old_log_std: &[f64], new_mean: &[f64], new_log_std: &[f64]) -> f64 {
    (0..old_mean.len())
        .map(|i| {
            let (lo, ln) = (old_log_std[i], new_log_std[i]);
            let dm = new_mean[i] - old_mean[i];
            ln - lo + ((2.0 * lo).exp() + dm * dm) / (2.0 * (2.0 * ln).exp()) - 0.5
        })
        .sum()
}

/// Records `L_PPO + c_v L_V + L_AE + λ_reg L_reg − c_e H` on a fresh tape.
/// The regularizer is only recorded when its weight is positive.
pub fn build_loss(
    agent: &ActorCritic,
    mb: &Minibatch,
    w: &LossWeights,
    maps: &SymmetryMaps,
) -> Result<LossGraph, RlError> {
    let mut g = Graph::new();
    let ba = agent.actor.bind(&mut g);
    let bc = agent.critic.bind(&mut g);
    let mut params = ba.params();
    params.extend(bc.params());

    let h = g.input(mb.histories.clone());
    let out = agent.actor.forward_graph(&ba, &mut g, h)?;
    let actions = g.input(mb.actions.clone());
    let logp = gaussian_log_prob_graph(&mut g, out.mean, out.log_std, actions);
    let (ppo, excluded) = ppo_loss_graph(&mut g, logp, &mb.old_log_probs, &mb.advantages, w.clip);

    let ci = g.input(mb.critic_inputs.clone());
    let v = agent.critic.forward_graph(&bc, &mut g, ci)?;
    let vl = value_loss(&mut g, v, &mb.returns);
    let ae = ae_loss(&mut g, out.reconstruction, &mb.next_observations);

    let mut root = g.scale(vl, w.value_coef);
    root = g.add(root, ae);
    if let Some(p) = ppo {
        root = g.add(root, p);
    }
    let mut reg_value = 0.0;
    if w.reg_weight > 0.0 {
        let reg = reg_loss(&mut g, &agent.actor, &ba, &mb.histories, Some(out.mean), maps)?;
        reg_value = g.value(reg).item();
        let scaled = g.scale(reg, w.reg_weight);
        root = g.add(root, scaled);
    }
    let dims = g.value(out.log_std).len() as f64;
    let ent_sum = g.sum(out.log_std);
    let entropy = g.add_scalar(ent_sum, dims * 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln());
    let entropy_value = g.value(entropy).item();
    if w.entropy_coef > 0.0 {
        let e = g.scale(entropy, -w.entropy_coef);
        root = g.add(root, e);
    }

    let means = g.value(out.mean);
    let new_log_std = g.value(out.log_std).data().to_vec();
    let kl = (0..mb.len())
        .map(|r| gaussian_kl(mb.old_means.row(r), &mb.old_log_std, means.row(r), &new_log_std))
        .sum::<f64>()
        / mb.len().max(1) as f64;

    let breakdown = LossBreakdown {
        total: g.value(root).item(),
        ppo: ppo.map_or(0.0, |p| g.value(p).item()),
        value: g.value(vl).item(),
        ae: g.value(ae).item(),
        reg: reg_value,
        entropy: entropy_value,
        kl,
        excluded,
    };
    Ok(LossGraph {
        graph: g,
        root,
        params,
        breakdown,
    })
}
