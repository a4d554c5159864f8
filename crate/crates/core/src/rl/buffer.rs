use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::RlError;
use crate::eqnn::{gaussian_log_prob, ActorCritic};
use crate::env::{BilateralTracker, HistoryWindow, ToyState};
use crate::numerics::Tensor;

struct Worker {
    state: ToyState,
    rng: ChaCha8Rng,
    history: HistoryWindow,
    episode_return: f64,
    episode_steps: usize,
    /// False until the first (staggered, truncated) episode ends.
    full_episode: bool,
}

/// A vector of environment instances with independent random streams.
pub struct EnvPool {
    env: BilateralTracker,
    workers: Vec<Worker>,
    history_rows: usize,
    /// Current curriculum level used by resets.
    pub level: f64,
    /// Step environments on the rayon pool instead of serially. Results are
    /// identical either way.
    pub parallel: bool,
}

impl EnvPool {
    /// Resets `n` instances; worker `i` draws from stream `i + 1` of `seed`.
    /// Initial episode clocks are staggered so episodes end at different
    /// iterations.
    pub fn new(env: BilateralTracker, n: usize, history_rows: usize, seed: u64, level: f64) -> Result<Self, RlError> {
        let mut workers = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let mut state = env.reset(&mut rng, level).map_err(RlError::Env)?;
            state.step = rng.random_range(0..env.config().episode_length);
            let mut history = HistoryWindow::new(history_rows, env.obs_dim());
            history.reset(&env.observe_noisy(&state, &mut rng));
            workers.push(Worker {
                state,
                rng,
                history,
                episode_return: 0.0,
                episode_steps: 0,
                full_episode: false,
            });
        }
        Ok(Self {
            env,
            workers,
            history_rows,
            level,
            parallel: false,
        })
    }

    pub fn env(&self) -> &BilateralTracker {
        &self.env
    }

    pub fn len(&self) -> usize {
        self.workers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.workers.is_empty()
    }

    pub fn history_rows(&self) -> usize {
        self.history_rows
    }

    pub fn states(&self) -> Vec<&ToyState> {
        self.workers.iter().map(|w| &w.state).collect()
    }

    fn histories(&self) -> Tensor {
        let width = self.history_rows * self.env.obs_dim();
        let mut data = Vec::with_capacity(self.len() * width);
        for w in &self.workers {
            data.extend_from_slice(w.history.as_slice());
        }
        Tensor::matrix(self.len(), width, data)
    }

    fn critic_inputs(&self) -> (Tensor, Tensor) {
        let (hd, od) = (3, self.env.obs_dim());
        let mut h = Vec::with_capacity(self.len() * hd);
        let mut o = Vec::with_capacity(self.len() * od);
        for w in &self.workers {
            h.extend(self.env.heights(&w.state));
            o.extend_from_slice(w.history.current());
        }
        (Tensor::matrix(self.len(), hd, h), Tensor::matrix(self.len(), od, o))
    }
}

/// On-policy samples, step-major: row `t * num_envs + e`.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutBuffer {
    pub num_envs: usize,
    pub horizon: usize,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub height_dim: usize,
    pub history_width: usize,
    pub histories: Vec<f64>,
    pub heights: Vec<f64>,
    /// Current observation `o_t` (last history row).
    pub observations: Vec<f64>,
    pub next_observations: Vec<f64>,
    pub actions: Vec<f64>,
    pub means: Vec<f64>,
    /// Sampling log-std (shared by every row).
    pub log_std: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    /// `V` of the state reached after the last step, per environment.
    pub bootstrap: Vec<f64>,
    pub tracking_ratios: Vec<f64>,
    /// Returns and lengths of episodes that ran from a reset; the first
    /// staggered episode of each environment is not counted.
    pub episode_returns: Vec<f64>,
    pub episode_lengths: Vec<usize>,
    pub divergences: usize,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.num_envs * self.horizon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn history(&self, i: usize) -> &[f64] {
        &self.histories[i * self.history_width..(i + 1) * self.history_width]
    }

    pub fn mean_tracking_ratio(&self) -> f64 {
        self.tracking_ratios.iter().sum::<f64>() / self.tracking_ratios.len().max(1) as f64
    }

    pub fn mean_reward(&self) -> f64 {
        self.rewards.iter().sum::<f64>() / self.rewards.len().max(1) as f64
    }

    /// Rows of a per-row matrix field.
    pub fn rows(field: &[f64], width: usize, idx: &[usize]) -> Tensor {
        let mut data = Vec::with_capacity(idx.len() * width);
        for &i in idx {
            data.extend_from_slice(&field[i * width..(i + 1) * width]);
        }
        Tensor::matrix(idx.len(), width, data)
    }
}

struct StepOut {
    action: Vec<f64>,
    log_prob: f64,
    reward: f64,
    done: bool,
    diverged: bool,
    tracking: f64,
    next_obs: Vec<f64>,
    finished: Option<(f64, usize)>,
}

fn advance(env: &BilateralTracker, w: &mut Worker, mean: &[f64], log_std: &[f64], level: f64) -> Result<StepOut, RlError> {
    let action: Vec<f64> = mean
        .iter()
        .zip(log_std)
        .map(|(m, l)| {
            let e: f64 = StandardNormal.sample(&mut w.rng);
            m + l.exp() * e
        })
        .collect();
    let log_prob = gaussian_log_prob(mean, log_std, &action);
    let res = env.step(&w.state, &action).map_err(RlError::Env)?;
    let next_obs = env.observe_noisy(&res.state, &mut w.rng);
    w.episode_return += res.reward;
    w.episode_steps += 1;
    let diverged = res.diagnostic.is_some();
    let mut finished = None;
    if res.done {
        if w.full_episode {
            finished = Some((w.episode_return, w.episode_steps));
        }
        w.full_episode = true;
        w.episode_return = 0.0;
        w.episode_steps = 0;
        w.state = env.reset(&mut w.rng, level).map_err(RlError::Env)?;
        let o = env.observe_noisy(&w.state, &mut w.rng);
        w.history.reset(&o);
    } else {
        w.state = res.state;
        w.history.push(&next_obs);
    }
    Ok(StepOut {
        action,
        log_prob,
        reward: if res.reward.is_finite() { res.reward } else { 0.0 },
        done: res.done,
        diverged,
        tracking: res.breakdown.tracking_ratio(),
        next_obs,
        finished,
    })
}

/// Runs the stochastic policy for `horizon` steps in every environment.
/// Terminated episodes reset in place; their last observation is kept as
/// the reconstruction target.
pub fn collect_rollouts(agent: &ActorCritic, pool: &mut EnvPool, horizon: usize) -> Result<RolloutBuffer, RlError> {
    if horizon == 0 {
        return Err(RlError::Config("horizon must be at least 1".into()));
    }
    let env = pool.env.clone();
    let n = pool.len();
    let obs_dim = env.obs_dim();
    let action_dim = env.action_dim();
    let width = pool.history_rows * obs_dim;
    let policy = agent.deterministic();
    let log_std = agent.actor.head.log_std();
    let mut buf = RolloutBuffer {
        num_envs: n,
        horizon,
        obs_dim,
        action_dim,
        height_dim: 3,
        history_width: width,
        histories: Vec::with_capacity(n * horizon * width),
        heights: Vec::with_capacity(n * horizon * 3),
        observations: Vec::with_capacity(n * horizon * obs_dim),
        next_observations: Vec::with_capacity(n * horizon * obs_dim),
        actions: Vec::with_capacity(n * horizon * action_dim),
        means: Vec::with_capacity(n * horizon * action_dim),
        log_std: log_std.clone(),
        log_probs: Vec::with_capacity(n * horizon),
        rewards: Vec::with_capacity(n * horizon),
        values: Vec::with_capacity(n * horizon),
        dones: Vec::with_capacity(n * horizon),
        bootstrap: Vec::new(),
        tracking_ratios: Vec::with_capacity(n * horizon),
        episode_returns: Vec::new(),
        episode_lengths: Vec::new(),
        divergences: 0,
    };
    for _ in 0..horizon {
        let hist = pool.histories();
        let (heights, obs) = pool.critic_inputs();
        let means = policy.means(&hist).map_err(RlError::Network)?;
        let values = agent.values(&heights, &obs).map_err(RlError::Network)?;
        buf.histories.extend_from_slice(hist.data());
        buf.heights.extend_from_slice(heights.data());
        buf.observations.extend_from_slice(obs.data());
        buf.means.extend_from_slice(means.data());
        buf.values.extend_from_slice(&values);

        let level = pool.level;
        let outs: Vec<Result<StepOut, RlError>> = if pool.parallel {
            pool.workers
                .par_iter_mut()
                .enumerate()
                .map(|(i, w)| advance(&env, w, means.row(i), &log_std, level))
                .collect()
        } else {
            pool.workers
                .iter_mut()
                .enumerate()
                .map(|(i, w)| advance(&env, w, means.row(i), &log_std, level))
                .collect()
        };
        for out in outs {
            let out = out?;
            buf.actions.extend_from_slice(&out.action);
            buf.log_probs.push(out.log_prob);
            buf.rewards.push(out.reward);
            buf.dones.push(out.done);
            buf.tracking_ratios.push(out.tracking);
            buf.next_observations.extend_from_slice(&out.next_obs);
            if out.diverged {
                buf.divergences += 1;
            }
            if let Some((r, l)) = out.finished {
                buf.episode_returns.push(r);
                buf.episode_lengths.push(l);
            }
        }
    }
    let (heights, obs) = pool.critic_inputs();
    buf.bootstrap = agent.values(&heights, &obs).map_err(RlError::Network)?;
    Ok(buf)
}
