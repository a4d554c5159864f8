//! Tracking errors (TE-V, TE-P, TE-O), symmetry scores (Temp-S, Spat-S) and
//! mirrored-rollout analysis.

mod replot;
mod report;
mod rollout;
pub mod svg;
mod verify;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::eqnn::{DeterministicPolicy, EqnnError};
use crate::numerics::Tensor;
use crate::symmetry::SignedPermutation;

pub use replot::replot_dir;
pub use report::{MetricsReport, Stat};
pub use verify::{verify_agent, verify_env, verify_profile, CheckStatus, PropertyCheck, VerifyReport};
pub use rollout::{
    curves_svg, drive_profile, eight_direction_commands, eight_direction_svg, evaluate, mean_curve,
    mirror_rollout_error, record_episode, run_deterministic, run_eight_direction, write_drive_csv, write_eight_direction,
    write_error_curves, write_pose_csv, EvalOptions, Evaluation, RunOptions, RunOutput,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty trajectory")]
    Empty,
    #[error("trajectory of {len} steps is too short for half-period {half}")]
    TooShort { len: usize, half: usize },
    #[error("gait period {0} must be even")]
    OddPeriod(usize),
    #[error("rollout diverged at step {0}")]
    Diverged(usize),
    #[error(transparent)]
    Network(#[from] EqnnError),
    #[error("{0}")]
    Env(String),
}

/// One recorded control step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryStep {
    /// Body-frame `(v_x, v_y, ω)` after the step.
    pub velocity: [f64; 3],
    /// World pose `(x, y, ψ)` before the step.
    pub pose: [f64; 3],
    pub command: [f64; 3],
    pub action: Vec<f64>,
    pub history_hash: u64,
    pub phase: f64,
    /// `‖u_L‖`, `‖u_R‖` after the step.
    pub drive: [f64; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub steps: Vec<TrajectoryStep>,
}

/// Per-step curve with its mean.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub values: Vec<f64>,
    pub mean: f64,
}

impl Curve {
    fn of(values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Self { values, mean }
    }
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Mean `‖(v_x, v_y, ω) − (c_x, c_y, c_ω)‖` in the units of the record.
pub fn te_v(traj: &TrajectoryRecord) -> Result<f64, MetricsError> {
    if traj.steps.is_empty() {
        return Err(MetricsError::Empty);
    }
    let total: f64 = traj
        .steps
        .iter()
        .map(|s| norm((0..3).map(|i| s.velocity[i] - s.command[i])))
        .sum();
    Ok(total / traj.steps.len() as f64)
}

/// Ideal poses integrated from the commands, starting at the first pose.
pub fn ideal_poses(traj: &TrajectoryRecord) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(traj.steps.len());
    let Some(first) = traj.steps.first() else {
        return out;
    };
    let mut p = first.pose;
    for s in &traj.steps {
        out.push(p);
        let (sn, cs) = p[2].sin_cos();
        let [cx, cy, cw] = s.command;
        p = [
            p[0] + (cs * cx - sn * cy) * traj.dt,
            p[1] + (sn * cx + cs * cy) * traj.dt,
            p[2] + cw * traj.dt,
        ];
    }
    out
}

/// Planar distance to the ideal position at every step.
pub fn te_p(traj: &TrajectoryRecord) -> Result<Curve, MetricsError> {
    if traj.steps.is_empty() {
        return Err(MetricsError::Empty);
    }
    let ideal = ideal_poses(traj);
    Ok(Curve::of(
        traj.steps
            .iter()
            .zip(&ideal)
            .map(|(s, i)| (s.pose[0] - i[0]).hypot(s.pose[1] - i[1]))
            .collect(),
    ))
}

/// Wrapped heading error to the ideal heading at every step.
pub fn te_o(traj: &TrajectoryRecord) -> Result<Curve, MetricsError> {
    if traj.steps.is_empty() {
        return Err(MetricsError::Empty);
    }
    let ideal = ideal_poses(traj);
    Ok(Curve::of(
        traj.steps
            .iter()
            .zip(&ideal)
            .map(|(s, i)| wrap_angle(s.pose[2] - i[2]).abs())
            .collect(),
    ))
}

/// Mean `‖a_t − F_a(a_{t+δ/2})‖` over every `t` with a partner step.
pub fn temp_s(actions: &[Vec<f64>], f_a: &SignedPermutation, delta: usize) -> Result<f64, MetricsError> {
    if delta % 2 != 0 {
        return Err(MetricsError::OddPeriod(delta));
    }
    let half = delta / 2;
    if actions.len() <= half {
        return Err(MetricsError::TooShort {
            len: actions.len(),
            half,
        });
    }
    let n = actions.len() - half;
    let mut total = 0.0;
    for t in 0..n {
        let m = f_a.apply(&actions[t + half]).expect("action width");
        total += norm(actions[t].iter().zip(&m).map(|(a, b)| a - b));
    }
    Ok(total / n as f64)
}

/// Mean `‖π(H) − F_a(π(F_o(H)))‖` over the rows of `histories`.
pub fn spat_s(
    policy: &DeterministicPolicy,
    histories: &Tensor,
    f_hist: &SignedPermutation,
    f_a: &SignedPermutation,
) -> Result<f64, MetricsError> {
    let per_row = spat_s_rows(policy, histories, f_hist, f_a)?;
    Ok(per_row.iter().sum::<f64>() / per_row.len().max(1) as f64)
}

/// Spat-S contribution of each history row.
pub fn spat_s_rows(
    policy: &DeterministicPolicy,
    histories: &Tensor,
    f_hist: &SignedPermutation,
    f_a: &SignedPermutation,
) -> Result<Vec<f64>, MetricsError> {
    let mirrored = f_hist.apply_rows(histories).map_err(|e| MetricsError::Env(e.to_string()))?;
    let a = policy.means(histories)?;
    let b = policy.means(&mirrored)?;
    Ok((0..a.rows())
        .map(|r| {
            let mb = f_a.apply(b.row(r)).expect("action width");
            norm(a.row(r).iter().zip(&mb).map(|(x, y)| x - y))
        })
        .collect())
}

#[cfg(test)]
mod tests;
