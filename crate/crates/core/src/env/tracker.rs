use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::config::EnvConfig;
use super::state::{EpisodeParams, ToyState};
use super::EnvError;
use crate::symmetry::{build_toy_profile, LayoutProfile};

/// Signed reward contributions; penalties are stored negative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub tracking_lin: f64,
    pub tracking_ang: f64,
    pub alive: f64,
    pub action_rate: f64,
    pub action_smoothness: f64,
    pub torque: f64,
    pub swing_drive: f64,
}

impl RewardBreakdown {
    pub const NAMES: [&'static str; 7] = [
        "tracking_lin",
        "tracking_ang",
        "alive",
        "action_rate",
        "action_smoothness",
        "torque",
        "swing_drive",
    ];

    pub fn components(&self) -> [f64; 7] {
        [
            self.tracking_lin,
            self.tracking_ang,
            self.alive,
            self.action_rate,
            self.action_smoothness,
            self.torque,
            self.swing_drive,
        ]
    }

    pub fn total(&self) -> f64 {
        self.components().iter().sum()
    }

    /// Tracking reward as a fraction of its maximum (4.0).
    pub fn tracking_ratio(&self) -> f64 {
        (self.tracking_lin + self.tracking_ang) / 4.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub state: ToyState,
    pub observation: Vec<f64>,
    pub reward: f64,
    pub breakdown: RewardBreakdown,
    pub done: bool,
    /// Set when the episode ended because the state became non-finite.
    pub diagnostic: Option<String>,
}

/// The planar bilateral velocity-tracking task.
#[derive(Clone, Debug)]
pub struct BilateralTracker {
    config: EnvConfig,
    profile: LayoutProfile,
}

/// `ℓ' = min(1, ℓ + increment)` when `ρ̄` exceeds the threshold.
pub fn update_curriculum(level: f64, mean_ratio: f64, threshold: f64, increment: f64) -> f64 {
    if mean_ratio > threshold {
        (level + increment).min(1.0)
    } else {
        level
    }
}

impl BilateralTracker {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let profile = build_toy_profile(config.k, config.m).map_err(|e| EnvError::Config(e.to_string()))?;
        Ok(Self { config, profile })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn profile(&self) -> &LayoutProfile {
        &self.profile
    }

    pub fn obs_dim(&self) -> usize {
        self.profile.obs_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.config.action_dim()
    }

    pub fn zero_state(&self) -> ToyState {
        ToyState::zeros(self.config.k, self.config.m)
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R, level: f64) -> Result<ToyState, EnvError> {
        if !(0.0..=1.0).contains(&level) {
            return Err(EnvError::Level(level));
        }
        let mut s = self.zero_state();
        s.set_phase(rng.random_range(0.0..TAU));
        let lim = self.config.curriculum.command_limits;
        for i in 0..3 {
            let b = lim[i] * level;
            s.command[i] = if b > 0.0 { rng.random_range(-b..=b) } else { 0.0 };
        }
        let r = &self.config.randomization;
        if r.enabled {
            let mut draw = |[lo, hi]: [f64; 2]| if hi > lo { rng.random_range(lo..=hi) } else { lo };
            for t in s.terrain.iter_mut() {
                *t = draw(r.terrain);
            }
            s.params = EpisodeParams {
                kp_factor: draw(r.kp_factor),
                kd_factor: draw(r.kd_factor),
                motor_strength: draw(r.motor_strength),
                drag_factor: draw(r.drag_factor),
                action_delay: 0,
            };
            s.params.action_delay = rng.random_range(0..=r.max_action_delay);
        }
        Ok(s)
    }

    /// `F_s(s)`.
    pub fn mirror_state(&self, s: &ToyState) -> ToyState {
        let v = self.profile.f_s().apply(&s.to_vector()).expect("state width");
        ToyState::from_vector(&v, s.num_joints(), s.step)
    }

    pub fn mirror_action(&self, a: &[f64]) -> Vec<f64> {
        self.profile.f_a().apply(a).expect("action width")
    }

    /// Observation in toy-profile order: base velocity, commands, joint
    /// positions, joint velocities, last action, phase clock.
    pub fn observe(&self, s: &ToyState) -> Vec<f64> {
        let mut o = Vec::with_capacity(self.obs_dim());
        o.extend_from_slice(&s.velocity);
        o.extend_from_slice(&s.command);
        o.extend_from_slice(&s.joint_pos);
        o.extend_from_slice(&s.joint_vel);
        o.extend_from_slice(&s.prev_action);
        o.extend_from_slice(&s.clock);
        o
    }

    /// [`observe`](Self::observe) plus Gaussian noise when randomization is on.
    pub fn observe_noisy<R: Rng + ?Sized>(&self, s: &ToyState, rng: &mut R) -> Vec<f64> {
        let mut o = self.observe(s);
        let r = &self.config.randomization;
        if r.enabled && r.observation_noise > 0.0 {
            for x in o.iter_mut() {
                let n: f64 = StandardNormal.sample(rng);
                *x += r.observation_noise * n;
            }
        }
        o
    }

    /// Terrain strip `H` seen by the critic.
    pub fn heights(&self, s: &ToyState) -> Vec<f64> {
        s.terrain.to_vec()
    }

    /// Joint targets actually applied this step (after the action delay).
    pub fn applied_action<'a>(&self, s: &'a ToyState, a: &'a [f64]) -> &'a [f64] {
        if s.params.action_delay >= 1 {
            &s.prev_action
        } else {
            a
        }
    }

    pub fn joint_torques(&self, s: &ToyState, applied: &[f64]) -> Vec<f64> {
        let c = &self.config;
        let p = &s.params;
        let kp = c.kp * p.kp_factor;
        let kd = c.kd * p.kd_factor;
        applied
            .iter()
            .zip(s.joint_pos.iter().zip(&s.joint_vel))
            .map(|(a, (th, w))| p.motor_strength * (kp * (a - th) - kd * w))
            .collect()
    }

    fn drag(&self, s: &ToyState) -> f64 {
        let w = self.config.zone_half_width;
        let zone = if s.position[1] > w {
            s.terrain[0]
        } else if s.position[1] < -w {
            s.terrain[2]
        } else {
            s.terrain[1]
        };
        zone * s.params.drag_factor
    }

    /// Drives `(u_L, u_R)` from joint velocities: `u_L = −θ̇_L`, `u_R = θ̇_R`.
    fn drives(&self, joint_vel: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.config.k;
        let ul = joint_vel[..k].iter().map(|w| -w).collect();
        let ur = joint_vel[k..2 * k].to_vec();
        (ul, ur)
    }

    pub fn step(&self, s: &ToyState, a: &[f64]) -> Result<StepResult, EnvError> {
        let c = &self.config;
        let n = c.action_dim();
        if a.len() != n {
            return Err(EnvError::ActionLength { expected: n, got: a.len() });
        }
        let (k, dt) = (c.k, c.dt);
        let applied = self.applied_action(s, a);
        let tau = self.joint_torques(s, applied);

        let mut next = s.clone();
        for i in 0..n {
            next.joint_vel[i] = s.joint_vel[i] + tau[i] / c.inertia * dt;
            next.joint_pos[i] = s.joint_pos[i] + next.joint_vel[i] * dt;
        }
        let (ul, ur) = self.drives(&next.joint_vel);
        let (st_l, st_r) = (s.stance_left(), s.stance_right());
        let lat = 1.min(k - 1);
        let drag = self.drag(s);
        let [vx, vy, om] = s.velocity;
        let lateral = ul[lat] * st_l - ur[lat] * st_r;
        let center: f64 = next.joint_pos[2 * k..].iter().sum();
        let fx = c.c1 * (ul[0] * st_l + ur[0] * st_r) - c.d_x * vx * drag;
        let fy = c.c2 * lateral - c.d_y * vy * drag;
        let tz = c.c3 * lateral + c.c4 * center - c.d_omega * om * drag;

        next.velocity = [vx + fx * dt, vy + fy * dt, om + tz * dt];
        next.heading = s.heading + next.velocity[2] * dt;
        let (sn, cs) = next.heading.sin_cos();
        let (bx, by) = (next.velocity[0], next.velocity[1]);
        next.position = [
            s.position[0] + (cs * bx - sn * by) * dt,
            s.position[1] + (sn * bx + cs * by) * dt,
        ];

        let (ds, dc) = (TAU * dt / c.gait_period).sin_cos();
        let [ps, pc] = s.clock;
        let (ns, nc) = (ps * dc + pc * ds, pc * dc - ps * ds);
        let norm = (ns * ns + nc * nc).sqrt();
        next.clock = [ns / norm, nc / norm];

        next.prev_action2 = s.prev_action.clone();
        next.prev_action = a.to_vec();
        next.step = s.step + 1;

        let breakdown = self.reward(s, a, &next);
        let reward = breakdown.total();
        let mut diagnostic = None;
        if !next.is_finite() || !reward.is_finite() {
            diagnostic = Some(format!("non-finite state or reward at step {}", next.step));
        }
        let done = diagnostic.is_some() || next.step >= c.episode_length;
        Ok(StepResult {
            observation: self.observe(&next),
            state: next,
            reward,
            breakdown,
            done,
            diagnostic,
        })
    }

    /// Reward for the transition `s --a--> s'`.
    pub fn reward(&self, s: &ToyState, a: &[f64], next: &ToyState) -> RewardBreakdown {
        let c = &self.config;
        let sigma = c.sigma;
        let [vx, vy, om] = next.velocity;
        let [cx, cy, co] = s.command;
        let lin_err = (vx - cx) * (vx - cx) + (vy - cy) * (vy - cy);
        let ang_err = (om - co) * (om - co);
        let mut rate = 0.0;
        let mut smooth = 0.0;
        for i in 0..a.len() {
            let d1 = a[i] - s.prev_action[i];
            let d2 = a[i] - 2.0 * s.prev_action[i] + s.prev_action2[i];
            rate += d1 * d1;
            smooth += d2 * d2;
        }
        let tau = self.joint_torques(s, self.applied_action(s, a));
        let torque: f64 = tau.iter().map(|t| t * t).sum();
        let (ul, ur) = self.drives(&next.joint_vel);
        let (sw_l, sw_r) = (1.0 - s.stance_left(), 1.0 - s.stance_right());
        let swing: f64 = ul
            .iter()
            .zip(&ur)
            .map(|(l, r)| sw_l * l * l + sw_r * r * r)
            .sum();
        RewardBreakdown {
            tracking_lin: 2.0 * (-lin_err / sigma).exp(),
            tracking_ang: 2.0 * (-ang_err / sigma).exp(),
            alive: 2.0,
            action_rate: -0.005 * rate,
            action_smoothness: -0.01 * smooth,
            torque: -1e-5 * torque,
            swing_drive: -0.1 * swing,
        }
    }
}
