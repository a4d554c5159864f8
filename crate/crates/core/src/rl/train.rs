use std::collections::VecDeque;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::loss::SymmetryMaps;
use super::update::{update, Learner};
use super::{collect_rollouts, compute_gae_scaled, EnvPool, RlError, RolloutBuffer, TrainConfig};
use crate::eqnn::{Actor, ActorCritic, Checkpoint, Critic, DeterministicPolicy, ObsNormalizer};
use crate::env::{update_curriculum, BilateralTracker};
use crate::metrics::{spat_s, temp_s};
use crate::symmetry::LayoutProfile;

/// Column order of the per-iteration metrics CSV.
pub const METRICS_HEADER: [&str; 19] = [
    "iteration",
    "mean_return",
    "mean_step_reward",
    "tracking_ratio",
    "episodes",
    "loss_total",
    "loss_ppo",
    "loss_value",
    "loss_ae",
    "loss_reg",
    "entropy",
    "kl",
    "learning_rate",
    "level",
    "spat_s",
    "temp_s",
    "grad_norm",
    "excluded",
    "run_hash",
];

/// Episodes kept in the rolling return window.
const RETURN_WINDOW: usize = 20;
/// Buffer rows scored for Spat-S each iteration.
const SPAT_ROWS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationStats {
    pub iteration: usize,
    /// Rolling mean over the last completed episodes (NaN before the first).
    pub mean_return: f64,
    pub mean_step_reward: f64,
    pub tracking_ratio: f64,
    /// Episodes completed during this iteration.
    pub episodes: usize,
    pub loss_total: f64,
    pub loss_ppo: f64,
    pub loss_value: f64,
    pub loss_ae: f64,
    pub loss_reg: f64,
    pub entropy: f64,
    pub kl: f64,
    pub learning_rate: f64,
    pub level: f64,
    pub spat_s: f64,
    pub temp_s: f64,
    pub grad_norm: f64,
    pub excluded: usize,
}

impl IterationStats {
    fn record(&self, run_hash: &str) -> Vec<String> {
        let f = |x: f64| format!("{x:?}");
        vec![
            self.iteration.to_string(),
            f(self.mean_return),
            f(self.mean_step_reward),
            f(self.tracking_ratio),
            self.episodes.to_string(),
            f(self.loss_total),
            f(self.loss_ppo),
            f(self.loss_value),
            f(self.loss_ae),
            f(self.loss_reg),
            f(self.entropy),
            f(self.kl),
            f(self.learning_rate),
            f(self.level),
            f(self.spat_s),
            f(self.temp_s),
            f(self.grad_norm),
            self.excluded.to_string(),
            run_hash.to_string(),
        ]
    }
}

/// Result of one seed's training run.
pub struct TrainOutcome {
    pub agent: ActorCritic,
    pub learner: Learner,
    pub profile: LayoutProfile,
    pub env: BilateralTracker,
    pub history: Vec<IterationStats>,
    pub level: f64,
    /// Checkpoint files written, in order.
    pub checkpoints: Vec<PathBuf>,
}

impl TrainOutcome {
    pub fn checkpoint(&self, variant: &str) -> Checkpoint {
        Checkpoint::capture(
            &self.profile,
            variant,
            &self.agent,
            &self.learner.adam.state,
            self.learner.learning_rate,
            self.learner.updates,
        )
    }

    pub fn write_csv<W: Write>(&self, out: W, run_hash: &str) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(METRICS_HEADER)?;
        for row in &self.history {
            w.write_record(row.record(run_hash))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Actor, critic and optional normalizer for `cfg.variant`.
pub fn build_agent<R: Rng + ?Sized>(
    profile: &LayoutProfile,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<ActorCritic, RlError> {
    let v = cfg.variant;
    let actor = Actor::new(
        profile,
        cfg.history_len,
        &cfg.widths,
        cfg.activation,
        v.equivariant_actor(),
        cfg.init_log_std,
        rng,
    )?;
    let critic = Critic::new(profile, &cfg.widths.critic, cfg.activation, v.invariant_critic(), rng)?;
    let normalizer = cfg
        .normalize_observations
        .then(|| ObsNormalizer::new(profile.f_o().clone(), 5.0));
    Ok(ActorCritic {
        actor,
        critic,
        normalizer,
    })
}

fn symmetry_scores(
    policy: &DeterministicPolicy,
    buf: &RolloutBuffer,
    maps: &SymmetryMaps,
    period: usize,
) -> Result<(f64, f64), RlError> {
    let rows: Vec<usize> = (0..buf.len().min(SPAT_ROWS)).collect();
    let h = RolloutBuffer::rows(&buf.histories, buf.history_width, &rows);
    let spat = spat_s(policy, &h, &maps.f_hist, &maps.f_a)?;
    let mut temp = 0.0;
    let mut counted = 0;
    for e in 0..buf.num_envs {
        let actions: Vec<Vec<f64>> = (0..buf.horizon)
            .map(|t| {
                let i = t * buf.num_envs + e;
                buf.means[i * buf.action_dim..(i + 1) * buf.action_dim].to_vec()
            })
            .collect();
        if let Ok(t) = temp_s(&actions, &maps.f_a, period) {
            temp += t;
            counted += 1;
        }
    }
    let temp = if counted == 0 { f64::NAN } else { temp / counted as f64 };
    Ok((spat, temp))
}

/// Collect, estimate advantages, update and adjust the curriculum for
/// `cfg.iterations` rounds. With `out`, writes `metrics.csv` and periodic
/// `checkpoint_<iter>.json` files tagged with `run_hash`.
pub fn train(cfg: &TrainConfig, seed: u64, out: Option<&Path>, run_hash: &str) -> Result<TrainOutcome, RlError> {
    cfg.validate()?;
    let env = BilateralTracker::new(cfg.env.clone())?;
    let profile = env
        .profile()
        .with_latent_size(cfg.widths.latent_size())
        .map_err(|e| RlError::Config(e.to_string()))?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agent = build_agent(&profile, cfg, &mut init_rng)?;
    let mut update_rng = ChaCha8Rng::seed_from_u64(seed);
    update_rng.set_stream(u64::MAX);
    let mut learner = Learner::new(&agent, cfg.ppo.learning_rate);
    let vcfg = cfg.variant_config();
    let rows = cfg.history_len + 1;
    let maps = SymmetryMaps {
        f_hist: profile.f_o().repeat(rows),
        f_a: profile.f_a().clone(),
    };
    let cur = &cfg.env.curriculum;
    let mut pool = EnvPool::new(env.clone(), cfg.num_envs, rows, seed, cur.initial_level)?;
    pool.parallel = cfg.workers > 1;
    let period = env.config().period_steps();

    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let mut returns: VecDeque<f64> = VecDeque::with_capacity(RETURN_WINDOW);
    let mut history = Vec::with_capacity(cfg.iterations);
    let mut checkpoints = Vec::new();
    for iteration in 1..=cfg.iterations {
        let wrap = |e: RlError| RlError::Aborted {
            iteration,
            source: Box::new(e),
        };
        let buf = collect_rollouts(&agent, &mut pool, cfg.horizon).map_err(wrap)?;
        let est = compute_gae_scaled(&buf, cfg.ppo.gamma, cfg.ppo.lambda, cfg.ppo.reward_scale);
        let (spat, temp) = symmetry_scores(&agent.deterministic(), &buf, &maps, period).map_err(wrap)?;
        let stats = update(&mut agent, &mut learner, &buf, &est, &vcfg, &maps, &mut update_rng).map_err(wrap)?;
        if let Some(n) = agent.normalizer.as_mut() {
            let obs: Vec<Vec<f64>> = buf.observations.chunks(buf.obs_dim).map(<[f64]>::to_vec).collect();
            n.update(&obs);
        }
        for &r in &buf.episode_returns {
            if returns.len() == RETURN_WINDOW {
                returns.pop_front();
            }
            returns.push_back(r);
        }
        let ratio = buf.mean_tracking_ratio();
        let level = pool.level;
        pool.level = update_curriculum(level, ratio, cur.threshold, cur.increment);
        history.push(IterationStats {
            iteration,
            mean_return: if returns.is_empty() {
                f64::NAN
            } else {
                returns.iter().sum::<f64>() / returns.len() as f64
            },
            mean_step_reward: buf.mean_reward(),
            tracking_ratio: ratio,
            episodes: buf.episode_returns.len(),
            loss_total: stats.loss_total,
            loss_ppo: stats.loss_ppo,
            loss_value: stats.loss_value,
            loss_ae: stats.loss_ae,
            loss_reg: stats.loss_reg,
            entropy: stats.entropy,
            kl: stats.kl,
            learning_rate: stats.learning_rate,
            level,
            spat_s: spat,
            temp_s: temp,
            grad_norm: stats.grad_norm,
            excluded: stats.excluded,
        });
        if let Some(dir) = out {
            let due = cfg.checkpoint_interval > 0 && iteration % cfg.checkpoint_interval == 0;
            if due || iteration == cfg.iterations {
                let path = dir.join(format!("checkpoint_{iteration}.json"));
                Checkpoint::capture(
                    &profile,
                    cfg.variant.tag(),
                    &agent,
                    &learner.adam.state,
                    learner.learning_rate,
                    learner.updates,
                )
                .save(&path)?;
                checkpoints.push(path);
            }
        }
    }
    let outcome = TrainOutcome {
        agent,
        learner,
        profile,
        env,
        history,
        level: pool.level,
        checkpoints,
    };
    if let Some(dir) = out {
        let f = std::fs::File::create(dir.join("metrics.csv"))?;
        outcome
            .write_csv(f, run_hash)
            .map_err(|e| RlError::Io(std::io::Error::other(e)))?;
    }
    Ok(outcome)
}

