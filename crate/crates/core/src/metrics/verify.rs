use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{spat_s_rows, MetricsError};
use crate::eqnn::ActorCritic;
use crate::env::{sample_state, BilateralTracker};
use crate::numerics::Tensor;
use crate::symmetry::{check_reference_rows, g1_reference_rows, LayoutProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Failed, but the component was not built to satisfy the property.
    ExpectedFail,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "FAIL",
            Self::ExpectedFail => "expected-fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl PropertyCheck {
    /// `residual <= tolerance` passes; a failure is downgraded to
    /// expected-fail when `required` is false.
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64, required: bool) -> Self {
        let status = if residual <= tolerance {
            CheckStatus::Pass
        } else if required {
            CheckStatus::Fail
        } else {
            CheckStatus::ExpectedFail
        };
        Self {
            name: name.into(),
            status,
            residual,
            tolerance,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn extend(&mut self, checks: Vec<PropertyCheck>) {
        self.checks.extend(checks);
    }

    pub fn render_table(&self) -> String {
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(8).max(8);
        let mut s = format!("{:<w$}  {:<13}  {:>12}  {:>9}\n", "property", "status", "max residual", "tolerance");
        for c in &self.checks {
            let _ = write!(
                s,
                "{:<w$}  {:<13}  {:>12.3e}  {:>9.0e}",
                c.name,
                c.status.label(),
                c.residual,
                c.tolerance
            );
            if !c.detail.is_empty() {
                let _ = write!(s, "  {}", c.detail);
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv<W: Write>(&self, out: W, run_hash: &str) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["property", "status", "max_residual", "tolerance", "detail", "run_hash"])?;
        for c in &self.checks {
            w.write_record([
                c.name.as_str(),
                c.status.label(),
                &format!("{:?}", c.residual),
                &format!("{:?}", c.tolerance),
                &c.detail,
                run_hash,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Involution of every transform, plus the reference table for `g1`.
pub fn verify_profile(profile: &LayoutProfile) -> Vec<PropertyCheck> {
    let mut checks: Vec<PropertyCheck> = [
        ("F_o", profile.f_o()),
        ("F_a", profile.f_a()),
        ("F_s", profile.f_s()),
        ("F_h", profile.f_h()),
        ("F_z", profile.f_z()),
    ]
    .into_iter()
    .map(|(name, f)| {
        let bad = if f.is_involution() { 0.0 } else { 1.0 };
        PropertyCheck::new(format!("involution {name}"), bad, 0.0, true).with_detail(format!("dim {}", f.len()))
    })
    .collect();
    if profile.name() == "g1" {
        let rows = check_reference_rows(profile, &g1_reference_rows());
        let worst = rows.iter().map(|r| r.max_error).fold(0.0, f64::max);
        let failing: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.label.as_str()).collect();
        let detail = if failing.is_empty() {
            format!("{} rows", rows.len())
        } else {
            format!("failing: {}", failing.join("; "))
        };
        checks.push(PropertyCheck::new("reference table rows", worst, 0.0, true).with_detail(detail));
    }
    checks
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| StandardNormal.sample(&mut *rng)).collect())
}

/// Intertwiner residual, actor equivariance (Spat-S) and critic invariance
/// on `samples` Gaussian inputs. Failures of properties not in `expect`
/// (actor, critic) are reported as expected failures.
pub fn verify_agent(
    agent: &ActorCritic,
    profile: &LayoutProfile,
    expect: (bool, bool),
    samples: usize,
    seed: u64,
) -> Result<Vec<PropertyCheck>, MetricsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = agent.actor.history_rows();
    let f_hist = profile.f_o().repeat(rows);
    let (actor_eq, critic_inv) = expect;

    let residual = PropertyCheck::new("intertwiner residual", agent.max_residual(), 1e-12, true);
    let h = gaussian_matrix(&mut rng, samples, agent.actor.history_width());
    let spat = spat_s_rows(&agent.deterministic(), &h, &f_hist, profile.f_a())?;
    let worst = spat.iter().copied().fold(0.0, f64::max);
    let actor = PropertyCheck::new("actor equivariance", worst, 1e-10, actor_eq)
        .with_detail(format!("max Spat-S over {samples} histories"));

    let hd = profile.height_dim();
    let od = profile.obs_dim();
    let heights = gaussian_matrix(&mut rng, samples, hd);
    let obs = gaussian_matrix(&mut rng, samples, od);
    let mh = profile.f_h().apply_rows(&heights).map_err(|e| MetricsError::Env(e.to_string()))?;
    let mo = profile.f_o().apply_rows(&obs).map_err(|e| MetricsError::Env(e.to_string()))?;
    let v = agent.values(&heights, &obs)?;
    let vm = agent.values(&mh, &mo)?;
    let worst = v.iter().zip(&vm).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let critic = PropertyCheck::new("critic invariance", worst, 1e-10, critic_inv)
        .with_detail(format!("max |dV| over {samples} inputs"));
    Ok(vec![residual, actor, critic])
}

/// Transition, observation and reward consistency with the mirror on
/// `samples` random state-action pairs.
pub fn verify_env(env: &BilateralTracker, samples: usize, seed: u64) -> Vec<PropertyCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f_o = env.profile().f_o();
    let n = env.action_dim();
    let (mut trans, mut obs, mut rew) = (0.0f64, 0.0f64, 0.0f64);
    let mut errors = 0usize;
    for _ in 0..samples {
        let s = sample_state(env, &mut rng);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ms = env.mirror_state(&s);
        let ma = env.mirror_action(&a);
        let (r1, r2) = match (env.step(&s, &a), env.step(&ms, &ma)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => {
                errors += 1;
                continue;
            }
        };
        let want = env.mirror_state(&r1.state).to_vector();
        for (p, q) in want.iter().zip(r2.state.to_vector()) {
            trans = trans.max((p - q).abs());
        }
        let o = f_o.apply(&env.observe(&s)).expect("observation width");
        for (p, q) in o.iter().zip(env.observe(&ms)) {
            obs = obs.max((p - q).abs());
        }
        for (p, q) in r1.breakdown.components().iter().zip(r2.breakdown.components()) {
            rew = rew.max((p - q).abs());
        }
    }
    if errors > 0 {
        trans = f64::INFINITY;
    }
    let d = format!("{samples} state-action pairs");
    vec![
        PropertyCheck::new("env transition mirror consistency", trans, 1e-10, true).with_detail(d.clone()),
        PropertyCheck::new("env observation commutation", obs, 1e-12, true).with_detail(d.clone()),
        PropertyCheck::new("env reward invariance", rew, 1e-12, true).with_detail(d),
    ]
}

