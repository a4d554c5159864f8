use serde::{Deserialize, Serialize};

use super::EnvError;

/// Per-episode randomization ranges. Every sampled quantity is a scalar
/// shared by both sides, so a draw never breaks the mirror.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Randomization {
    pub enabled: bool,
    pub kp_factor: [f64; 2],
    pub kd_factor: [f64; 2],
    pub motor_strength: [f64; 2],
    pub drag_factor: [f64; 2],
    pub terrain: [f64; 2],
    pub observation_noise: f64,
    pub max_action_delay: usize,
}

impl Default for Randomization {
    fn default() -> Self {
        Self {
            enabled: true,
            kp_factor: [0.9, 1.1],
            kd_factor: [0.9, 1.1],
            motor_strength: [0.9, 1.1],
            drag_factor: [0.9, 1.1],
            terrain: [0.8, 1.2],
            observation_noise: 0.01,
            max_action_delay: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Curriculum {
    pub initial_level: f64,
    pub threshold: f64,
    pub increment: f64,
    /// Command bounds `(c_x, c_y, c_ω)` at level 1.
    pub command_limits: [f64; 3],
}

impl Default for Curriculum {
    fn default() -> Self {
        Self {
            initial_level: 0.5,
            threshold: 0.8,
            increment: 0.05,
            command_limits: [0.8, 0.8, 0.5],
        }
    }
}

/// BilateralTracker parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub dt: f64,
    pub gait_period: f64,
    /// Joints per side.
    pub k: usize,
    /// Center joints.
    pub m: usize,
    pub kp: f64,
    pub kd: f64,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub d_x: f64,
    pub d_y: f64,
    pub d_omega: f64,
    pub zone_half_width: f64,
    pub episode_length: usize,
    pub sigma: f64,
    pub randomization: Randomization,
    pub curriculum: Curriculum,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            gait_period: 0.8,
            k: 2,
            m: 1,
            kp: 20.0,
            kd: 0.5,
            inertia: 0.1,
            c1: 1.5,
            c2: 0.8,
            c3: 0.4,
            c4: 0.6,
            d_x: 1.0,
            d_y: 1.0,
            d_omega: 0.8,
            zone_half_width: 0.5,
            episode_length: 400,
            sigma: 0.25,
            randomization: Randomization::default(),
            curriculum: Curriculum::default(),
        }
    }
}

impl EnvConfig {
    /// Nominal dynamics, no observation noise, no action delay.
    pub fn noise_free() -> Self {
        Self {
            randomization: Randomization {
                enabled: false,
                observation_noise: 0.0,
                ..Randomization::default()
            },
            ..Self::default()
        }
    }

    pub fn action_dim(&self) -> usize {
        2 * self.k + self.m
    }

    /// Gait period in control steps.
    pub fn period_steps(&self) -> usize {
        (self.gait_period / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |field: &str, why: &str| Err(EnvError::Config(format!("{field}: {why}")));
        let positive = [
            ("dt", self.dt),
            ("gait_period", self.gait_period),
            ("kp", self.kp),
            ("kd", self.kd),
            ("inertia", self.inertia),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
            ("d_x", self.d_x),
            ("d_y", self.d_y),
            ("d_omega", self.d_omega),
            ("sigma", self.sigma),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(name, "must be positive and finite");
            }
        }
        if self.k == 0 {
            return bad("k", "at least one joint per side");
        }
        if self.episode_length == 0 {
            return bad("episode_length", "must be at least 1");
        }
        if !(self.zone_half_width >= 0.0) {
            return bad("zone_half_width", "must be non-negative");
        }
        let r = &self.randomization;
        for (name, [lo, hi]) in [
            ("randomization.kp_factor", r.kp_factor),
            ("randomization.kd_factor", r.kd_factor),
            ("randomization.motor_strength", r.motor_strength),
            ("randomization.drag_factor", r.drag_factor),
            ("randomization.terrain", r.terrain),
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad(name, "expected 0 < lo <= hi");
            }
        }
        if r.terrain[0] < 0.8 || r.terrain[1] > 1.2 {
            return bad("randomization.terrain", "must lie within [0.8, 1.2]");
        }
        if !(r.observation_noise >= 0.0) {
            return bad("randomization.observation_noise", "must be non-negative");
        }
        if r.max_action_delay > 1 {
            return bad("randomization.max_action_delay", "0 or 1");
        }
        let c = &self.curriculum;
        if !(0.0..=1.0).contains(&c.initial_level) {
            return bad("curriculum.initial_level", "must lie in [0, 1]");
        }
        if c.command_limits.iter().any(|v| !(*v >= 0.0)) {
            return bad("curriculum.command_limits", "must be non-negative");
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, EnvError> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| EnvError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
