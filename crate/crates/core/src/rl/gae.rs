use super::RolloutBuffer;

/// Advantages and reward-to-go targets, laid out like the buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct AdvantageEstimates {
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

/// GAE along one trajectory. `values` has one more entry than `rewards`:
/// the bootstrap value of the state after the last step.
pub fn gae_trajectory(rewards: &[f64], values: &[f64], dones: &[bool], gamma: f64, lambda: f64) -> AdvantageEstimates {
    let n = rewards.len();
    assert_eq!(values.len(), n + 1, "values need a bootstrap entry");
    assert_eq!(dones.len(), n);
    let mut advantages = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * values[t + 1] * live - values[t];
        acc = delta + gamma * lambda * live * acc;
        advantages[t] = acc;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    AdvantageEstimates { advantages, returns }
}

/// GAE for every environment of a step-major buffer.
pub fn compute_gae(buf: &RolloutBuffer, gamma: f64, lambda: f64) -> AdvantageEstimates {
    compute_gae_scaled(buf, gamma, lambda, 1.0)
}

/// [`compute_gae`] with every reward multiplied by `reward_scale`.
pub fn compute_gae_scaled(buf: &RolloutBuffer, gamma: f64, lambda: f64, reward_scale: f64) -> AdvantageEstimates {
    let (n, h) = (buf.num_envs, buf.horizon);
    let mut advantages = vec![0.0; n * h];
    let mut returns = vec![0.0; n * h];
    for e in 0..n {
        let idx = |t: usize| t * n + e;
        let r: Vec<f64> = (0..h).map(|t| reward_scale * buf.rewards[idx(t)]).collect();
        let d: Vec<bool> = (0..h).map(|t| buf.dones[idx(t)]).collect();
        let mut v: Vec<f64> = (0..h).map(|t| buf.values[idx(t)]).collect();
        v.push(buf.bootstrap[e]);
        let est = gae_trajectory(&r, &v, &d, gamma, lambda);
        for t in 0..h {
            advantages[idx(t)] = est.advantages[t];
            returns[idx(t)] = est.returns[t];
        }
    }
    AdvantageEstimates { advantages, returns }
}

/// Zero-mean, unit-variance copy (unchanged when the spread vanishes).
pub fn normalize_advantages(a: &[f64]) -> Vec<f64> {
    let n = a.len().max(1) as f64;
    let mean = a.iter().sum::<f64>() / n;
    let var = a.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 {
        return a.iter().map(|x| x - mean).collect();
    }
    a.iter().map(|x| (x - mean) / (std + 1e-8)).collect()
}
