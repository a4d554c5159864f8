//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N ... PASS|FAIL` line before asserting.
//!
//! `cargo test --release --test acceptance`

use std::io::Write;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use symmeq::eqnn::{
    gaussian_log_prob_graph, Activation, ActorCritic, BoundActor, BoundMlp, Checkpoint, EquivariantMlp,
};
use symmeq::env::{sample_state, BilateralTracker, EnvConfig};
use symmeq::metrics::mirror_rollout_error;
use symmeq::numerics::{finite_difference_check, Graph, Tensor, Var};
use symmeq::rl::{
    ae_loss, build_agent, collect_rollouts, compute_gae, gae_trajectory, ppo_loss_graph, reg_loss, run_sweep,
    update, value_loss, EnvPool, Learner, SweepEval, SweepRun, SymmetryMaps, TrainConfig, Variant,
};
use symmeq::symmetry::{build_g1_profile, LayoutProfile, SignedPermutation};

/// Criteria run one at a time so each runtime bound measures only itself.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Writes to the process stdout directly so the line shows without
/// `--nocapture`.
fn report(n: u32, name: &str, pass: bool, detail: &str, start: Instant) {
    let status = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {n:>2} {name:<26} {status}  {detail}  ({:.1} s)\n",
        start.elapsed().as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| StandardNormal.sample(&mut *rng)).collect())
}

/// Dense matrix of a signed permutation built from its action on basis
/// vectors: column `j` is the image of `e_j`.
fn dense(p: &SignedPermutation) -> DMatrix<f64> {
    let n = p.len();
    DMatrix::from_fn(n, n, |i, j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        p.apply(&e).unwrap()[i]
    })
}

/// `F` applied to a row vector through its dense matrix.
fn mirror(p: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (p * nalgebra::DVector::from_row_slice(x)).iter().copied().collect()
}

/// Block-diagonal `F_o` over every history row.
fn history_mirror(f_o: &DMatrix<f64>, rows: usize) -> DMatrix<f64> {
    let d = f_o.nrows();
    let mut m = DMatrix::zeros(d * rows, d * rows);
    for r in 0..rows {
        m.view_mut((r * d, r * d), (d, d)).copy_from(f_o);
    }
    m
}

fn toy_env() -> BilateralTracker {
    BilateralTracker::new(EnvConfig::default()).unwrap()
}

fn agent_for(variant: Variant, seed: u64) -> (TrainConfig, LayoutProfile, ActorCritic) {
    let cfg = TrainConfig {
        variant,
        ..TrainConfig::default()
    };
    let env = toy_env();
    let profile = env.profile().with_latent_size(cfg.widths.latent_size()).unwrap();
    let agent = build_agent(&profile, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (cfg, profile, agent)
}

/// Runs PPO updates until at least `steps` optimizer steps have been taken.
fn optimize(cfg: &TrainConfig, profile: &LayoutProfile, agent: &mut ActorCritic, steps: u64) -> Learner {
    let env = toy_env();
    let rows = cfg.history_len + 1;
    let maps = SymmetryMaps {
        f_hist: profile.f_o().repeat(rows),
        f_a: profile.f_a().clone(),
    };
    let vc = cfg.variant_config();
    let mut learner = Learner::new(agent, vc.ppo.learning_rate);
    let mut pool = EnvPool::new(env, 4, rows, 1, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    while learner.updates < steps {
        let buf = collect_rollouts(agent, &mut pool, 32).unwrap();
        let est = compute_gae(&buf, vc.ppo.gamma, vc.ppo.lambda);
        update(agent, &mut learner, &buf, &est, &vc, &maps, &mut rng).unwrap();
    }
    learner
}

fn round_trip(profile: &LayoutProfile, variant: Variant, agent: &ActorCritic, learner: &Learner) -> ActorCritic {
    let ck = Checkpoint::capture(profile, variant.tag(), agent, &learner.adam.state, learner.learning_rate, learner.updates);
    Checkpoint::from_json(&ck.to_json()).unwrap().restore().unwrap().agent
}

/// Init, after 100 optimizer steps and after a checkpoint round trip.
fn three_checkpoints(variant: Variant) -> (LayoutProfile, Vec<(&'static str, ActorCritic)>) {
    let (cfg, profile, agent) = agent_for(variant, 11);
    let mut trained = agent.clone();
    let learner = optimize(&cfg, &profile, &mut trained, 100);
    assert!(learner.updates >= 100);
    let restored = round_trip(&profile, variant, &trained, &learner);
    (profile, vec![("init", agent), ("100 steps", trained), ("round trip", restored)])
}

/// Largest `‖π(F(H)) − F_a π(H)‖_∞` over 1000 Gaussian histories that are
/// not mirror-fixed.
fn max_spat(agent: &ActorCritic, profile: &LayoutProfile, seed: u64) -> f64 {
    let rows = agent.actor.history_rows();
    let fh = history_mirror(&dense(profile.f_o()), rows);
    let fa = dense(profile.f_a());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = gaussian(&mut rng, 1000, agent.actor.history_width());
    let mut mirrored = Vec::with_capacity(h.len());
    for r in 0..h.rows() {
        let m = mirror(&fh, h.row(r));
        assert!(m.iter().zip(h.row(r)).any(|(a, b)| a != b), "history is mirror-fixed");
        mirrored.extend(m);
    }
    let hm = Tensor::matrix(h.rows(), h.cols(), mirrored);
    let p = agent.deterministic();
    let (a, b) = (p.means(&h).unwrap(), p.means(&hm).unwrap());
    let mut worst: f64 = 0.0;
    for r in 0..a.rows() {
        for (x, y) in mirror(&fa, a.row(r)).iter().zip(b.row(r)) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

fn max_critic_gap(agent: &ActorCritic, profile: &LayoutProfile, seed: u64) -> f64 {
    let (fh, fo) = (dense(profile.f_h()), dense(profile.f_o()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let heights = gaussian(&mut rng, 1000, profile.height_dim());
    let obs = gaussian(&mut rng, 1000, profile.obs_dim());
    let mirror_rows = |f: &DMatrix<f64>, t: &Tensor| {
        Tensor::matrix(t.rows(), t.cols(), (0..t.rows()).flat_map(|r| mirror(f, t.row(r))).collect())
    };
    let v = agent.values(&heights, &obs).unwrap();
    let vm = agent.values(&mirror_rows(&fh, &heights), &mirror_rows(&fo, &obs)).unwrap();
    v.iter().zip(&vm).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_01_exact_actor_equivariance() {
    let _guard = serial();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for variant in [Variant::SePolicy, Variant::SeActorOnly] {
        let (profile, agents) = three_checkpoints(variant);
        for (stage, agent) in &agents {
            let s = max_spat(agent, &profile, 21);
            worst = worst.max(s);
            parts.push(format!("{variant}/{stage} {s:.1e}"));
        }
    }
    let pass = worst < 1e-10;
    report(1, "actor equivariance", pass, &format!("max Spat-S {worst:.2e}"), start);
    assert!(pass, "{parts:?}");
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn criterion_02_exact_critic_invariance() {
    let _guard = serial();
    let start = Instant::now();
    let (profile, agents) = three_checkpoints(Variant::SePolicy);
    let mut worst: f64 = 0.0;
    for (_, agent) in &agents {
        worst = worst.max(max_critic_gap(agent, &profile, 22));
    }
    let pass = worst < 1e-10;
    report(2, "critic invariance", pass, &format!("max |dV| {worst:.2e}"), start);
    assert!(pass);
    assert!(start.elapsed().as_secs() < 60);
}

/// Every representation of dimension 1..=6 made of trivial (1), sign (1)
/// and regular (2) blocks, with the blocks in a shuffled order.
fn small_reps(rng: &mut ChaCha8Rng) -> Vec<(String, SignedPermutation)> {
    let mut out = Vec::new();
    for c in 0..=3usize {
        for a in 0..=6usize {
            for b in 0..=6usize {
                let dim = a + b + 2 * c;
                if dim == 0 || dim > 6 {
                    continue;
                }
                let mut blocks: Vec<char> = std::iter::repeat_n('t', a)
                    .chain(std::iter::repeat_n('s', b))
                    .chain(std::iter::repeat_n('r', c))
                    .collect();
                for i in (1..blocks.len()).rev() {
                    blocks.swap(i, rng.random_range(0..=i));
                }
                let rep = blocks.iter().fold(SignedPermutation::identity(0), |acc, k| match k {
                    't' => acc.direct_sum(&SignedPermutation::identity(1)),
                    's' => acc.direct_sum(&SignedPermutation::negation(1)),
                    _ => acc.direct_sum(&SignedPermutation::regular(1)),
                });
                out.push((blocks.iter().collect(), rep));
            }
        }
    }
    out
}

/// Dimension of `{W : W ρ_in = ρ_out W}` from the SVD of the vectorized
/// constraint.
fn null_space_dim(rho_in: &DMatrix<f64>, rho_out: &DMatrix<f64>) -> usize {
    let (m, n) = (rho_out.nrows(), rho_in.nrows());
    let mut a = DMatrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..n {
            let mut e = DMatrix::zeros(m, n);
            e[(i, j)] = 1.0;
            let c = &e * rho_in - rho_out * &e;
            for (k, v) in c.iter().enumerate() {
                a[(k, i * n + j)] = *v;
            }
        }
    }
    let rank = a.svd(false, false).singular_values.iter().filter(|s| **s > 1e-9).count();
    m * n - rank
}

#[test]
fn criterion_03_intertwiner_completeness() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let reps = small_reps(&mut rng);
    let dense_reps: Vec<DMatrix<f64>> = reps.iter().map(|(_, r)| dense(r)).collect();
    let (mut mismatches, mut worst, mut pairs) = (Vec::new(), 0.0f64, 0);
    for (i, (ni, ri)) in reps.iter().enumerate() {
        for (o, (no, ro)) in reps.iter().enumerate() {
            pairs += 1;
            let free = symmeq::eqnn::solve_intertwiner_basis(ri, ro)
                .unwrap()
                .iter()
                .filter(|x| x.is_free())
                .count();
            let want = null_space_dim(&dense_reps[i], &dense_reps[o]);
            if free != want {
                mismatches.push(format!("{ni}->{no}: {free} vs {want}"));
            }
            let net = EquivariantMlp::from_reps(&[ri.clone(), ro.clone()], Activation::Elu, None::<&mut ChaCha8Rng>)
                .unwrap();
            let mut layer = net.layers()[0].clone();
            for _ in 0..200 {
                for t in layer.coefficients_mut() {
                    for x in t.data_mut() {
                        *x = StandardNormal.sample(&mut rng);
                    }
                }
                let w = layer.realize_weight();
                let wm = DMatrix::from_row_slice(w.rows(), w.cols(), w.data());
                let r = (&wm * &dense_reps[i] - &dense_reps[o] * &wm).amax();
                worst = worst.max(r);
            }
        }
    }
    let pass = mismatches.is_empty() && worst < 1e-12;
    report(
        3,
        "intertwiner completeness",
        pass,
        &format!("{pairs} pairs, {} count mismatches, max residual {worst:.1e}", mismatches.len()),
        start,
    );
    assert!(pass, "{mismatches:?}");
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn criterion_04_environment_symmetry() {
    let _guard = serial();
    let start = Instant::now();
    let env = toy_env();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut trans, mut rew) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let s = sample_state(&env, &mut rng);
        let a: Vec<f64> = (0..env.action_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r1 = env.step(&s, &a).unwrap();
        let r2 = env.step(&env.mirror_state(&s), &env.mirror_action(&a)).unwrap();
        for (p, q) in env.mirror_state(&r1.state).to_vector().iter().zip(r2.state.to_vector()) {
            trans = trans.max((p - q).abs());
        }
        for (p, q) in r1.breakdown.components().iter().zip(r2.breakdown.components()) {
            rew = rew.max((p - q).abs());
        }
        assert_eq!(r1.done, r2.done);
    }
    let pass = trans < 1e-10 && rew < 1e-12;
    report(
        4,
        "environment symmetry",
        pass,
        &format!("transition {trans:.1e}, reward {rew:.1e} over 1e4 pairs"),
        start,
    );
    assert!(pass);
    assert!(start.elapsed().as_secs() < 60);
}

/// Reverse-mode gradient of `record` over the agent's parameters against
/// central differences.
fn agent_gradient_error<F>(agent: &ActorCritic, record: F) -> f64
where
    F: Fn(&ActorCritic, &mut Graph, &BoundActor, &BoundMlp) -> Var,
{
    let run = |a: &ActorCritic| {
        let mut g = Graph::new();
        let ba = a.actor.bind(&mut g);
        let bc = a.critic.bind(&mut g);
        let root = record(a, &mut g, &ba, &bc);
        (g, root, ba, bc)
    };
    let (g, root, ba, bc) = run(agent);
    let grads = g.backward(root).unwrap();
    let mut params = ba.params();
    params.extend(bc.params());
    let mut analytic = Vec::new();
    for (&v, t) in params.iter().zip(agent.parameters()) {
        analytic.extend_from_slice(grads.get_or_zeros(v, t).data());
    }
    let x = agent.flatten();
    let f = |p: &[f64]| {
        let mut a = agent.clone();
        a.assign(p);
        let (g, root, _, _) = run(&a);
        g.value(root).item()
    };
    finite_difference_check(f, &analytic, &x, 1e-6).unwrap()
}

fn mlp_gradient_error(net: &EquivariantMlp, x: &Tensor) -> f64 {
    let run = |n: &EquivariantMlp| {
        let mut g = Graph::new();
        let b = n.bind(&mut g);
        let xi = g.input(x.clone());
        let y = n.forward_graph(&b, &mut g, xi).unwrap();
        let sq = g.square(y);
        let l = g.mean(sq);
        (g, l, b)
    };
    let (g, l, b) = run(net);
    let grads = g.backward(l).unwrap();
    let mut analytic = Vec::new();
    for (&v, t) in b.params().iter().zip(net.parameters()) {
        analytic.extend_from_slice(grads.get_or_zeros(v, t).data());
    }
    let p0: Vec<f64> = net.parameters().iter().flat_map(|t| t.data().to_vec()).collect();
    let f = |p: &[f64]| {
        let mut n = net.clone();
        let mut off = 0;
        for t in n.parameters_mut() {
            let k = t.len();
            t.data_mut().copy_from_slice(&p[off..off + k]);
            off += k;
        }
        let (g, l, _) = run(&n);
        g.value(l).item()
    };
    finite_difference_check(f, &analytic, &p0, 1e-6).unwrap()
}

fn small_agent(variant: Variant, seed: u64) -> (ActorCritic, SymmetryMaps) {
    let cfg = TrainConfig {
        variant,
        history_len: 1,
        widths: symmeq::eqnn::NetworkWidths {
            actor: vec![6],
            critic: vec![6],
            encoder: vec![6, 4],
        },
        ..TrainConfig::default()
    };
    let env = toy_env();
    let profile = env.profile().with_latent_size(4).unwrap();
    let agent = build_agent(&profile, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let maps = SymmetryMaps {
        f_hist: profile.f_o().repeat(2),
        f_a: profile.f_a().clone(),
    };
    (agent, maps)
}

#[test]
fn criterion_05_gradient_integrity() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut note = |name: &'static str, e: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some(w) => w.1 = w.1.max(e),
        None => worst.push((name, e)),
    };
    let rin = SignedPermutation::regular(2).direct_sum(&SignedPermutation::negation(1));
    let rout = SignedPermutation::regular(1).direct_sum(&SignedPermutation::identity(1));
    let batch = 4;
    for i in 0..100u64 {
        let x = gaussian(&mut rng, batch, rin.len());
        let lin = EquivariantMlp::from_reps(&[rin.clone(), rout.clone()], Activation::Elu, Some(&mut rng)).unwrap();
        note("equivariant linear", mlp_gradient_error(&lin, &x));
        let dense = EquivariantMlp::vanilla(5, &[], 3, Activation::Elu, Some(&mut rng)).unwrap();
        note("dense linear", mlp_gradient_error(&dense, &x));
        for (name, act) in [("elu mlp", Activation::Elu), ("relu mlp", Activation::Relu)] {
            let net = EquivariantMlp::equivariant(&rin, &[6, 4], &rout, act, &mut rng).unwrap();
            note(name, mlp_gradient_error(&net, &x));
        }

        let variant = if i % 2 == 0 { Variant::SePolicy } else { Variant::VanillaRegu };
        let (agent, maps) = small_agent(variant, i);
        let h = gaussian(&mut rng, batch, agent.actor.history_width());
        let next = gaussian(&mut rng, batch, 23);
        let actions = gaussian(&mut rng, batch, 5);
        let ci = gaussian(&mut rng, batch, agent.critic.height_dim() + agent.critic.obs_dim());
        let returns: Vec<f64> = (0..batch).map(|_| rng.random_range(-2.0..2.0)).collect();
        let advantages: Vec<f64> = (0..batch).map(|_| rng.random_range(-2.0..2.0)).collect();
        let jitter: Vec<f64> = (0..batch).map(|_| rng.random_range(-0.4..0.4)).collect();

        // Old log-probs within ±0.4 of the current ones put ratios on both
        // sides of the clip range.
        let old_lp = {
            let mut g = Graph::new();
            let b = agent.actor.bind(&mut g);
            let hv = g.input(h.clone());
            let out = agent.actor.forward_graph(&b, &mut g, hv).unwrap();
            let a = g.input(actions.clone());
            let lp = gaussian_log_prob_graph(&mut g, out.mean, out.log_std, a);
            g.value(lp).data().iter().zip(&jitter).map(|(l, j)| l + j).collect::<Vec<f64>>()
        };
        note(
            "ppo surrogate",
            agent_gradient_error(&agent, |a, g, ba, _| {
                let hv = g.input(h.clone());
                let out = a.actor.forward_graph(ba, g, hv).unwrap();
                let av = g.input(actions.clone());
                let lp = gaussian_log_prob_graph(g, out.mean, out.log_std, av);
                ppo_loss_graph(g, lp, &old_lp, &advantages, 0.2).0.unwrap()
            }),
        );
        note(
            "reconstruction",
            agent_gradient_error(&agent, |a, g, ba, _| {
                let hv = g.input(h.clone());
                let out = a.actor.forward_graph(ba, g, hv).unwrap();
                ae_loss(g, out.reconstruction, &next)
            }),
        );
        note(
            "symmetry regularizer",
            agent_gradient_error(&agent, |a, g, ba, _| reg_loss(g, &a.actor, ba, &h, None, &maps).unwrap()),
        );
        note(
            "value mse",
            agent_gradient_error(&agent, |a, g, _, bc| {
                let iv = g.input(ci.clone());
                let v = a.critic.forward_graph(bc, g, iv).unwrap();
                value_loss(g, v, &returns)
            }),
        );
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let pass = max < 1e-4;
    let detail: Vec<String> = worst.iter().map(|(n, e)| format!("{n} {e:.0e}")).collect();
    report(5, "gradient integrity", pass, &detail.join(", "), start);
    assert!(pass, "{worst:?}");
    assert!(start.elapsed().as_secs() < 300);
}

#[test]
fn criterion_06_gae_oracle() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let v: Vec<f64> = (0..=n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let d: Vec<bool> = (0..n).map(|_| rng.random_bool(0.25)).collect();
        let (gamma, lambda) = (rng.random_range(0.0..1.0), rng.random_range(0.0..=1.0));
        let est = gae_trajectory(&r, &v, &d, gamma, lambda);
        for t in 0..n {
            // Σ_l (γλ)^l δ_{t+l}, where a done at step k zeroes the bootstrap
            // and ends the sum.
            let mut sum = 0.0;
            for l in 0..n - t {
                let k = t + l;
                let boot = if d[k] { 0.0 } else { gamma * v[k + 1] };
                sum += (gamma * lambda).powi(l as i32) * (r[k] + boot - v[k]);
                if d[k] {
                    break;
                }
            }
            worst = worst.max((est.advantages[t] - sum).abs());
            worst = worst.max((est.returns[t] - (sum + v[t])).abs());
        }
    }
    let pass = worst < 1e-12;
    report(6, "gae oracle", pass, &format!("max error {worst:.1e} over 1000 trajectories"), start);
    assert!(pass);
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn criterion_07_reference_table() {
    let _guard = serial();
    let start = Instant::now();
    let p = build_g1_profile();
    // Observation: ω(3), g(3), commands(3), then positions, velocities and
    // previous action as (left arm 7, right arm 7, left leg 6, right leg 6,
    // waist 1), then the phase (2).
    let mut obs: Vec<(usize, usize, f64)> = Vec::new();
    let mut at = 0;
    for signs in [[-1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [1.0, -1.0, -1.0]] {
        for (i, s) in signs.iter().enumerate() {
            obs.push((at + i, at + i, *s));
        }
        at += 3;
    }
    let limbs = |base: usize, out: &mut Vec<(usize, usize, f64)>| {
        let (la, ra, ll, rl, w) = (base, base + 7, base + 14, base + 20, base + 26);
        for i in 0..7 {
            out.push((la + i, ra + i, -1.0));
            out.push((ra + i, la + i, -1.0));
        }
        for i in 0..6 {
            out.push((ll + i, rl + i, -1.0));
            out.push((rl + i, ll + i, -1.0));
        }
        out.push((w, w, 1.0));
        base + 27
    };
    for _ in 0..3 {
        at = limbs(at, &mut obs);
    }
    obs.push((at, at, -1.0));
    obs.push((at + 1, at + 1, -1.0));
    let mut act = Vec::new();
    limbs(0, &mut act);
    let mut hm = Vec::new();
    for i in 0..85 {
        hm.push((i, 102 + i, 1.0));
        hm.push((102 + i, i, 1.0));
    }
    for i in 85..102 {
        hm.push((i, i, 1.0));
    }

    let mut bad = Vec::new();
    for (name, f, table, dim) in [("obs", p.f_o(), &obs, 92), ("action", p.f_a(), &act, 27), ("height", p.f_h(), &hm, 187)] {
        if f.len() != dim || table.len() != dim {
            bad.push(format!("{name}: dim {} vs {dim}", f.len()));
            continue;
        }
        for &(from, to, s) in table {
            let mut e = vec![0.0; dim];
            e[from] = 1.0;
            let img = f.apply(&e).unwrap();
            let mut want = vec![0.0; dim];
            want[to] = s;
            if img != want {
                bad.push(format!("{name}[{from}]"));
            }
        }
    }
    for (name, f) in [("F_o", p.f_o()), ("F_a", p.f_a()), ("F_s", p.f_s()), ("F_z", p.f_z()), ("F_H", p.f_h())] {
        let d = dense(f);
        if (&d * &d - DMatrix::identity(d.nrows(), d.nrows())).amax() != 0.0 {
            bad.push(format!("{name} not an involution"));
        }
    }
    let pass = bad.is_empty();
    report(7, "reference table", pass, &format!("{} basis rows checked", obs.len() + act.len() + hm.len()), start);
    assert!(pass, "{bad:?}");
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

fn per_seed<'a>(runs: &'a [SweepRun], v: Variant) -> Vec<&'a SweepRun> {
    let mut r: Vec<&SweepRun> = runs.iter().filter(|r| r.variant == v).collect();
    r.sort_by_key(|r| r.seed);
    r
}

#[test]
fn criterion_08_directional_ordering() {
    let _guard = serial();
    let start = Instant::now();
    let cfg = TrainConfig {
        iterations: 200,
        ..TrainConfig::default()
    };
    let eval = SweepEval {
        episodes: 16,
        level: 1.0,
        steps: None,
    };
    let runs = run_sweep(&cfg, &Variant::ALL, &[0, 1, 2], &eval, false).unwrap();
    let se = per_seed(&runs, Variant::SePolicy);
    let van = per_seed(&runs, Variant::Vanilla);
    let regu = per_seed(&runs, Variant::VanillaRegu);
    println!("{:<14} {:>4} {:>8} {:>8} {:>10}", "variant", "seed", "TE-V", "Temp-S", "Spat-S");
    for r in &runs {
        println!(
            "{:<14} {:>4} {:>8.3} {:>8.4} {:>10.3e}",
            r.variant.tag(),
            r.seed,
            r.report.te_v.mean,
            r.report.temp_s.mean,
            r.report.spat_s.mean
        );
    }
    let count = |f: &dyn Fn(usize) -> bool| (0..3).filter(|&i| f(i)).count();
    let a = count(&|i| se[i].report.te_v.mean <= van[i].report.te_v.mean);
    let se_zero = se.iter().all(|r| r.report.spat_s.mean < 1e-10);
    let others_pos = van.iter().chain(&regu).all(|r| r.report.spat_s.mean > 0.0);
    let regu_lt = count(&|i| regu[i].report.spat_s.mean < van[i].report.spat_s.mean);
    let c = count(&|i| se[i].report.temp_s.mean <= van[i].report.temp_s.mean);
    let (pa, pb, pc) = (a >= 2, se_zero && others_pos && regu_lt >= 2, c >= 2);
    let pass = pa && pb && pc;
    report(
        8,
        "directional ordering",
        pass,
        &format!(
            "(a) TE-V {a}/3 {}, (b) Spat-S se zero {se_zero}, regu<vanilla {regu_lt}/3 {}, (c) Temp-S {c}/3 {}",
            if pa { "ok" } else { "fail" },
            if pb { "ok" } else { "fail" },
            if pc { "ok" } else { "fail" }
        ),
        start,
    );
    assert!(pa, "TE-V ordering held in {a}/3 seeds");
    assert!(pb, "Spat-S ordering failed");
    assert!(pc, "Temp-S ordering held in {c}/3 seeds");
    assert!(start.elapsed().as_secs() < 30 * 60);
}

#[test]
fn criterion_09_mirrored_rollouts() {
    let _guard = serial();
    let start = Instant::now();
    let env = BilateralTracker::new(EnvConfig::noise_free()).unwrap();
    let mut gaps = Vec::new();
    for variant in [Variant::SePolicy, Variant::Vanilla] {
        let cfg = TrainConfig {
            variant,
            env: env.config().clone(),
            ..TrainConfig::default()
        };
        let profile = env.profile().with_latent_size(cfg.widths.latent_size()).unwrap();
        let agent = build_agent(&profile, &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let policy = agent.deterministic();
        let mut worst: f64 = 0.0;
        for seed in 0..4 {
            let s0 = env.reset(&mut ChaCha8Rng::seed_from_u64(seed), 1.0).unwrap();
            worst = worst.max(mirror_rollout_error(&policy, &env, &s0, cfg.history_len + 1, 200).unwrap());
        }
        gaps.push(worst);
    }
    let pass = gaps[0] < 1e-6 && gaps[1] > 1e-3;
    report(
        9,
        "mirrored rollouts",
        pass,
        &format!("se-policy {:.1e}, vanilla {:.1e}", gaps[0], gaps[1]),
        start,
    );
    assert!(pass);
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn criterion_10_regularizer_fixed_point() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let (_, profile, agent) = agent_for(Variant::SePolicy, seed);
        let rows = agent.actor.history_rows();
        let maps = SymmetryMaps {
            f_hist: profile.f_o().repeat(rows),
            f_a: profile.f_a().clone(),
        };
        let h = gaussian(&mut rng, 64, agent.actor.history_width());
        let mut g = Graph::new();
        let b = agent.actor.bind(&mut g);
        let r = reg_loss(&mut g, &agent.actor, &b, &h, None, &maps).unwrap();
        worst = worst.max(g.value(r).item());
    }
    let pass = worst < 1e-18;
    report(10, "regularizer fixed point", pass, &format!("max L_reg {worst:.1e}"), start);
    assert!(pass);
    assert!(start.elapsed().as_secs_f64() < 1.0);
}
