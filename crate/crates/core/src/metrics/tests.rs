use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::eqnn::{Activation, Actor, ActorCritic, Critic, NetworkWidths};
use crate::env::{BilateralTracker, EnvConfig};

fn step(v: [f64; 3], pose: [f64; 3], c: [f64; 3], a: Vec<f64>) -> TrajectoryStep {
    TrajectoryStep {
        velocity: v,
        pose,
        command: c,
        action: a,
        history_hash: 0,
        phase: 0.0,
        drive: [0.0; 2],
    }
}

fn record(steps: Vec<TrajectoryStep>) -> TrajectoryRecord {
    TrajectoryRecord { dt: 0.02, steps }
}

fn small_widths() -> NetworkWidths {
    NetworkWidths {
        actor: vec![16],
        critic: vec![16],
        encoder: vec![16, 8],
    }
}

fn agent(equivariant: bool, seed: u64) -> (BilateralTracker, ActorCritic) {
    let env = BilateralTracker::new(EnvConfig::noise_free()).unwrap();
    let profile = env.profile().with_latent_size(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actor = Actor::new(&profile, 2, &small_widths(), Activation::Elu, equivariant, -1.0, &mut rng).unwrap();
    let critic = Critic::new(&profile, &[16], Activation::Elu, equivariant, &mut rng).unwrap();
    (
        env,
        ActorCritic {
            actor,
            critic,
            normalizer: None,
        },
    )
}

#[test]
fn te_v_closed_forms() {
    let perfect = record(vec![step([0.3, 0.1, 0.2], [0.0; 3], [0.3, 0.1, 0.2], vec![]); 5]);
    assert_eq!(te_v(&perfect).unwrap(), 0.0);
    let biased = record(vec![step([0.4, 0.1, 0.2], [0.0; 3], [0.3, 0.1, 0.2], vec![]); 5]);
    assert!((te_v(&biased).unwrap() - 0.1).abs() < 1e-12);
    assert_eq!(te_v(&record(vec![])), Err(MetricsError::Empty));
}

#[test]
fn te_p_of_stationary_robot_grows_linearly() {
    let r = record(vec![step([0.0; 3], [0.0; 3], [1.0, 0.0, 0.0], vec![]); 50]);
    let c = te_p(&r).unwrap();
    for (t, v) in c.values.iter().enumerate() {
        assert!((v - t as f64 * 0.02).abs() < 1e-12);
    }
    assert!(c.values.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn te_p_and_te_o_vanish_under_perfect_tracking() {
    let cmd = [0.4, -0.2, 0.3];
    let mut rec = record(vec![]);
    let mut pose = [1.0, -2.0, 0.5];
    for _ in 0..100 {
        rec.steps.push(step(cmd, pose, cmd, vec![]));
        let (s, c) = pose[2].sin_cos();
        pose = [
            pose[0] + (c * cmd[0] - s * cmd[1]) * 0.02,
            pose[1] + (s * cmd[0] + c * cmd[1]) * 0.02,
            pose[2] + cmd[2] * 0.02,
        ];
    }
    assert!(te_p(&rec).unwrap().values.iter().all(|v| v.abs() < 1e-12));
    assert!(te_o(&rec).unwrap().values.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn te_o_bias_and_wrapping() {
    let mut rec = record(vec![]);
    for t in 0..100 {
        rec.steps.push(step([0.0; 3], [0.0, 0.0, 0.1 * t as f64 * 0.02], [0.0; 3], vec![]));
    }
    let c = te_o(&rec).unwrap();
    for (t, v) in c.values.iter().enumerate() {
        assert!((v - 0.1 * t as f64 * 0.02).abs() < 1e-12);
    }
    assert!((wrap_angle(3.1 - -3.1).abs() - (2.0 * std::f64::consts::PI - 6.2)).abs() < 1e-12);
    assert!((wrap_angle(3.1 - -3.1).abs() - 0.0832).abs() < 1e-3);
    assert_eq!(wrap_angle(std::f64::consts::PI), std::f64::consts::PI);
    assert_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
}

#[test]
fn temp_s_cases() {
    let env = BilateralTracker::new(EnvConfig::default()).unwrap();
    let f_a = env.profile().f_a();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let delta = 8;
    let mut actions: Vec<Vec<f64>> = (0..delta / 2)
        .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    for t in delta / 2..40 {
        let next = f_a.apply(&actions[t - delta / 2]).unwrap();
        actions.push(next);
    }
    assert!(temp_s(&actions, f_a, delta).unwrap() < 1e-15);
    let left_only = vec![vec![0.5, 0.2, 0.0, 0.0, 0.0]; 40];
    assert!(temp_s(&left_only, f_a, delta).unwrap() > 0.1);
    assert_eq!(temp_s(&left_only, f_a, 7), Err(MetricsError::OddPeriod(7)));
    assert!(matches!(temp_s(&left_only[..4], f_a, 8), Err(MetricsError::TooShort { .. })));
    let mirrored: Vec<Vec<f64>> = left_only.iter().map(|a| f_a.apply(a).unwrap()).collect();
    assert_eq!(temp_s(&mirrored, f_a, delta).unwrap(), temp_s(&left_only, f_a, delta).unwrap());
}

#[test]
fn tracking_errors_of_mirrored_trajectories_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rec = record(vec![]);
    let mut mir = record(vec![]);
    for _ in 0..60 {
        let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)];
        let c = [0.5, 0.3, -0.2];
        rec.steps.push(step(v, p, c, vec![]));
        mir.steps.push(step([v[0], -v[1], -v[2]], [p[0], -p[1], -p[2]], [c[0], -c[1], -c[2]], vec![]));
    }
    assert_eq!(te_v(&rec).unwrap(), te_v(&mir).unwrap());
    assert!((te_p(&rec).unwrap().mean - te_p(&mir).unwrap().mean).abs() < 1e-12);
    assert!((te_o(&rec).unwrap().mean - te_o(&mir).unwrap().mean).abs() < 1e-12);
}

fn random_histories(rng: &mut ChaCha8Rng, n: usize, width: usize) -> Tensor {
    Tensor::matrix(n, width, (0..n * width).map(|_| rng.random_range(-1.0..1.0)).collect())
}

#[test]
fn spat_s_separates_equivariant_and_vanilla_actors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (eq, seed) in [(true, 10), (false, 11)] {
        let (env, agent) = agent(eq, seed);
        let f_hist = env.profile().f_o().repeat(3);
        let h = random_histories(&mut rng, 200, 3 * 23);
        let p = agent.deterministic();
        let s = spat_s(&p, &h, &f_hist, env.profile().f_a()).unwrap();
        if eq {
            assert!(s < 1e-10, "{s}");
        } else {
            assert!(s > 1e-3, "{s}");
        }
        let hm = f_hist.apply_rows(&h).unwrap();
        let sm = spat_s(&p, &hm, &f_hist, env.profile().f_a()).unwrap();
        assert!((s - sm).abs() < 1e-12);
    }
}

#[test]
fn mirrored_rollouts_stay_mirrored_for_equivariant_policy() {
    let (env, se) = agent(true, 20);
    let (_, van) = agent(false, 21);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s0 = env.reset(&mut rng, 1.0).unwrap();
    let e = mirror_rollout_error(&se.deterministic(), &env, &s0, 3, 200).unwrap();
    assert!(e < 1e-6, "{e}");
    let v = mirror_rollout_error(&van.deterministic(), &env, &s0, 3, 200).unwrap();
    assert!(v > 1e-6, "{v}");
    let zero = env.zero_state();
    assert!(mirror_rollout_error(&se.deterministic(), &env, &zero, 3, 200).unwrap() < 1e-6);
}

#[test]
fn evaluation_produces_non_negative_report() {
    let (env, se) = agent(true, 30);
    let ev = evaluate(
        &se.deterministic(),
        &env,
        &EvalOptions {
            episodes: 4,
            level: 1.0,
            seed: 0,
            steps: Some(60),
            history_rows: 3,
        },
    )
    .unwrap();
    assert_eq!(ev.records.len(), 4);
    for (_, _, s) in ev.report.rows() {
        assert!(s.mean >= 0.0 && s.std >= 0.0);
    }
    assert!(ev.report.spat_s.mean < 1e-10);
    let mut buf = Vec::new();
    ev.report.write_csv(&mut buf, "abc").unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
    assert!(evaluate(
        &se.deterministic(),
        &env,
        &EvalOptions {
            episodes: 0,
            level: 1.0,
            seed: 0,
            steps: None,
            history_rows: 3
        }
    )
    .is_err());
}

#[test]
fn eight_direction_preset_writes_files() {
    let (env, se) = agent(true, 40);
    let dir = tempfile::tempdir().unwrap();
    let paths = write_eight_direction(&se.deterministic(), &env, 3, dir.path(), "h").unwrap();
    assert_eq!(paths.iter().filter(|p| p.extension().unwrap() == "csv").count(), 8);
    assert_eq!(paths.iter().filter(|p| p.extension().unwrap() == "svg").count(), 1);
    let rec = &run_eight_direction(&se.deterministic(), &env, 3).unwrap()[0];
    let prof = drive_profile(rec);
    assert!(prof.windows(2).all(|w| w[1].0 >= w[0].0));
    let files = write_drive_csv(rec, dir.path(), "h").unwrap();
    assert!(files.iter().all(|p| p.exists()));
}
