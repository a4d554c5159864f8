//! BilateralTracker: a planar body driven by `2k + m` PD joints whose
//! left/right limbs push only during their stance half of the gait cycle.
//!
//! The transition and reward commute with the mirror `F_s` / `F_a`:
//! `step(F_s(s), F_a(a)) = F_s(step(s, a))` and
//! `reward(F_s(s), F_a(a), F_s(s')) = reward(s, a, s')`.

mod config;
mod state;
mod tracker;

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use thiserror::Error;

pub use config::{Curriculum, EnvConfig, Randomization};
pub use state::{EpisodeParams, ToyState};
pub use tracker::{update_curriculum, BilateralTracker, RewardBreakdown, StepResult};

use crate::symmetry::Space;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid env config: {0}")]
    Config(String),
    #[error("curriculum level {0} outside [0, 1]")]
    Level(f64),
    #[error("action length {got}, expected {expected}")]
    ActionLength { expected: usize, got: usize },
}

/// Arbitrary state for property tests: every field drawn independently,
/// with the phase landing exactly on a gate boundary one time in eight.
pub fn sample_state<R: Rng + ?Sized>(env: &BilateralTracker, rng: &mut R) -> ToyState {
    let c = env.config();
    let mut s = env.zero_state();
    let mut u = |scale: f64| rng.random_range(-scale..scale);
    s.position = [u(3.0), u(3.0)];
    s.heading = u(4.0);
    s.velocity = [u(1.5), u(1.5), u(1.5)];
    for x in s.joint_pos.iter_mut() {
        *x = u(1.0);
    }
    for x in s.joint_vel.iter_mut() {
        *x = u(3.0);
    }
    for x in s.prev_action.iter_mut().chain(s.prev_action2.iter_mut()) {
        *x = u(1.0);
    }
    s.command = [u(0.8), u(0.8), u(0.5)];
    let r = &c.randomization;
    for t in s.terrain.iter_mut() {
        *t = rng.random_range(r.terrain[0]..=r.terrain[1]);
    }
    s.params = EpisodeParams {
        kp_factor: rng.random_range(0.9..1.1),
        kd_factor: rng.random_range(0.9..1.1),
        motor_strength: rng.random_range(0.9..1.1),
        drag_factor: rng.random_range(0.9..1.1),
        action_delay: rng.random_range(0..=1),
    };
    match rng.random_range(0..8) {
        0 => s.clock = [0.0, if rng.random_bool(0.5) { 1.0 } else { -1.0 }],
        _ => s.set_phase(rng.random_range(0.0..TAU)),
    }
    s.step = rng.random_range(0..c.episode_length);
    s
}

/// One logged transition.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub state: ToyState,
    pub action: Vec<f64>,
    pub breakdown: RewardBreakdown,
    pub level: f64,
}

/// Column names for the trajectory CSV: step, state fields, action dims,
/// reward components, curriculum level, run hash.
pub fn trajectory_header(env: &BilateralTracker) -> Vec<String> {
    let mut h = vec!["step".to_string()];
    for comp in env.profile().components(Space::State) {
        for i in 0..comp.dim {
            h.push(format!("{}_{i}", comp.name));
        }
    }
    for i in 0..env.action_dim() {
        h.push(format!("action_{i}"));
    }
    h.extend(RewardBreakdown::NAMES.iter().map(|s| s.to_string()));
    h.push("reward".into());
    h.push("level".into());
    h.push("run_hash".into());
    h
}

pub fn write_trajectory_csv<W: Write>(
    env: &BilateralTracker,
    rows: &[TrajectoryRow],
    out: W,
    run_hash: &str,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(env))?;
    for r in rows {
        let mut rec = vec![r.step.to_string()];
        rec.extend(r.state.to_vector().iter().map(|v| format!("{v:?}")));
        rec.extend(r.action.iter().map(|v| format!("{v:?}")));
        rec.extend(r.breakdown.components().iter().map(|v| format!("{v:?}")));
        rec.push(format!("{:?}", r.breakdown.total()));
        rec.push(format!("{:?}", r.level));
        rec.push(run_hash.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Sliding window of the last `rows` observations, oldest first, flattened
/// row-major. Slots before the first observation of an episode are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryWindow {
    rows: usize,
    obs_dim: usize,
    data: Vec<f64>,
}

impl HistoryWindow {
    pub fn new(rows: usize, obs_dim: usize) -> Self {
        Self {
            rows,
            obs_dim,
            data: vec![0.0; rows * obs_dim],
        }
    }

    /// Clears the window and places `obs` in the newest slot.
    pub fn reset(&mut self, obs: &[f64]) {
        self.data.iter_mut().for_each(|x| *x = 0.0);
        let n = self.data.len();
        self.data[n - self.obs_dim..].copy_from_slice(obs);
    }

    pub fn push(&mut self, obs: &[f64]) {
        assert_eq!(obs.len(), self.obs_dim, "observation width");
        self.data.copy_within(self.obs_dim.., 0);
        let n = self.data.len();
        self.data[n - self.obs_dim..].copy_from_slice(obs);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn current(&self) -> &[f64] {
        &self.data[(self.rows - 1) * self.obs_dim..]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}
