use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// Fixed per-episode dynamics parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeParams {
    pub kp_factor: f64,
    pub kd_factor: f64,
    pub motor_strength: f64,
    pub drag_factor: f64,
    pub action_delay: usize,
}

impl Default for EpisodeParams {
    fn default() -> Self {
        Self {
            kp_factor: 1.0,
            kd_factor: 1.0,
            motor_strength: 1.0,
            drag_factor: 1.0,
            action_delay: 0,
        }
    }
}

/// Full simulator state.
///
/// Joint vectors are laid out as `k` left joints, `k` right joints, then `m`
/// center joints. The gait phase is stored as the unit clock `(sin φ, cos φ)`
/// so that the half-period shift of the mirror is an exact sign flip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyState {
    pub position: [f64; 2],
    pub heading: f64,
    /// Body-frame `(v_x, v_y, ω)`.
    pub velocity: [f64; 3],
    pub joint_pos: Vec<f64>,
    pub joint_vel: Vec<f64>,
    pub clock: [f64; 2],
    pub command: [f64; 3],
    /// Drag multipliers of the left, middle and right zones.
    pub terrain: [f64; 3],
    pub prev_action: Vec<f64>,
    pub prev_action2: Vec<f64>,
    pub params: EpisodeParams,
    pub step: usize,
}

impl ToyState {
    /// All-zero state with phase 0 and unit terrain.
    pub fn zeros(k: usize, m: usize) -> Self {
        let n = 2 * k + m;
        Self {
            position: [0.0; 2],
            heading: 0.0,
            velocity: [0.0; 3],
            joint_pos: vec![0.0; n],
            joint_vel: vec![0.0; n],
            clock: [0.0, 1.0],
            command: [0.0; 3],
            terrain: [1.0; 3],
            prev_action: vec![0.0; n],
            prev_action2: vec![0.0; n],
            params: EpisodeParams::default(),
            step: 0,
        }
    }

    pub fn num_joints(&self) -> usize {
        self.joint_pos.len()
    }

    /// Phase in `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        let p = self.clock[0].atan2(self.clock[1]).rem_euclid(TAU);
        if p >= TAU {
            0.0
        } else {
            p
        }
    }

    pub fn set_phase(&mut self, phi: f64) {
        self.clock = [phi.sin(), phi.cos()];
    }

    pub fn stance_left(&self) -> f64 {
        if self.clock[0] > 0.0 {
            1.0
        } else {
            0.0
        }
    }

    pub fn stance_right(&self) -> f64 {
        if self.clock[0] < 0.0 {
            1.0
        } else {
            0.0
        }
    }

    /// Flattened state in toy-profile state order.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(27 + 4 * self.num_joints());
        v.extend_from_slice(&self.position);
        v.push(self.heading);
        v.extend_from_slice(&self.velocity);
        v.extend_from_slice(&self.joint_pos);
        v.extend_from_slice(&self.joint_vel);
        v.extend_from_slice(&self.clock);
        v.extend_from_slice(&self.command);
        v.extend_from_slice(&self.terrain);
        v.extend_from_slice(&self.prev_action);
        v.extend_from_slice(&self.prev_action2);
        let p = &self.params;
        v.extend_from_slice(&[
            p.kp_factor,
            p.kd_factor,
            p.motor_strength,
            p.drag_factor,
            p.action_delay as f64,
        ]);
        v
    }

    /// Inverse of [`to_vector`](Self::to_vector); `n` is the joint count.
    pub fn from_vector(v: &[f64], n: usize, step: usize) -> Self {
        let mut it = v.iter().copied();
        let mut take = |len: usize| -> Vec<f64> { (&mut it).take(len).collect() };
        let pos = take(2);
        let heading = take(1)[0];
        let vel = take(3);
        let joint_pos = take(n);
        let joint_vel = take(n);
        let clock = take(2);
        let cmd = take(3);
        let terrain = take(3);
        let prev_action = take(n);
        let prev_action2 = take(n);
        let p = take(5);
        Self {
            position: [pos[0], pos[1]],
            heading,
            velocity: [vel[0], vel[1], vel[2]],
            joint_pos,
            joint_vel,
            clock: [clock[0], clock[1]],
            command: [cmd[0], cmd[1], cmd[2]],
            terrain: [terrain[0], terrain[1], terrain[2]],
            prev_action,
            prev_action2,
            params: EpisodeParams {
                kp_factor: p[0],
                kd_factor: p[1],
                motor_strength: p[2],
                drag_factor: p[3],
                action_delay: p[4] as usize,
            },
            step,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|x| x.is_finite())
    }
}
