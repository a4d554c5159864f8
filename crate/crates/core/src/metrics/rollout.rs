use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::svg::{LinePlot, Series};
use super::{ideal_poses, spat_s_rows, te_o, te_p, te_v, temp_s, MetricsError, MetricsReport, Stat};
use super::{TrajectoryRecord, TrajectoryStep};
use crate::eqnn::DeterministicPolicy;
use crate::env::{BilateralTracker, HistoryWindow, ToyState, TrajectoryRow};
use crate::numerics::Tensor;
use crate::symmetry::SignedPermutation;

fn history_hash(h: &[f64]) -> u64 {
    let mut d = Sha256::new();
    for x in h {
        d.update(x.to_le_bytes());
    }
    let out = d.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest length"))
}

/// Result of a batch of deterministic rollouts.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    /// Visited states per episode, including the initial one.
    pub states: Vec<Vec<ToyState>>,
    pub records: Vec<TrajectoryRecord>,
    /// Per-episode Spat-S when requested.
    pub spat_s: Vec<f64>,
    /// First step whose state became non-finite, per episode.
    pub diverged: Vec<Option<usize>>,
}

/// Options for [`run_deterministic`].
pub struct RunOptions<'a> {
    pub steps: usize,
    pub history_rows: usize,
    /// Per-episode observation-noise streams; `None` for clean observations.
    pub noise_seed: Option<u64>,
    /// `(F_o` on histories`, F_a)`: accumulate Spat-S along the way.
    pub spat: Option<(&'a SignedPermutation, &'a SignedPermutation)>,
    /// Stop an episode once `|x|` or `|y|` exceeds this bound.
    pub plane_half_width: Option<f64>,
}

/// Rolls the deterministic policy from each initial state in lockstep.
/// Episodes end at their time limit, on divergence, or when leaving the plane.
pub fn run_deterministic(
    policy: &DeterministicPolicy,
    env: &BilateralTracker,
    initial: &[ToyState],
    opts: &RunOptions<'_>,
) -> Result<RunOutput, MetricsError> {
    let n = initial.len();
    let obs_dim = env.obs_dim();
    let dt = env.config().dt;
    let mut noise: Vec<Option<ChaCha8Rng>> = (0..n)
        .map(|i| {
            opts.noise_seed.map(|s| {
                let mut r = ChaCha8Rng::seed_from_u64(s);
                r.set_stream(i as u64 + 1);
                r
            })
        })
        .collect();
    let observe = |s: &ToyState, rng: &mut Option<ChaCha8Rng>| match rng {
        Some(r) => env.observe_noisy(s, r),
        None => env.observe(s),
    };
    let mut out = RunOutput {
        states: initial.iter().map(|s| vec![s.clone()]).collect(),
        records: vec![TrajectoryRecord { dt, steps: Vec::new() }; n],
        spat_s: vec![0.0; n],
        diverged: vec![None; n],
    };
    let mut windows: Vec<HistoryWindow> = Vec::with_capacity(n);
    for (i, s) in initial.iter().enumerate() {
        let mut w = HistoryWindow::new(opts.history_rows, obs_dim);
        w.reset(&observe(s, &mut noise[i]));
        windows.push(w);
    }
    let mut current: Vec<ToyState> = initial.to_vec();
    let mut alive: Vec<bool> = vec![true; n];
    let width = opts.history_rows * obs_dim;
    let k = env.config().k;

    for _ in 0..opts.steps {
        let active: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        if active.is_empty() {
            break;
        }
        let mut data = Vec::with_capacity(active.len() * width);
        for &i in &active {
            data.extend_from_slice(windows[i].as_slice());
        }
        let histories = Tensor::matrix(active.len(), width, data);
        let means = policy.means(&histories)?;
        if let Some((f_hist, f_a)) = opts.spat {
            let rows = spat_s_rows(policy, &histories, f_hist, f_a)?;
            for (r, &i) in rows.iter().zip(&active) {
                out.spat_s[i] += r;
            }
        }
        for (r, &i) in active.iter().enumerate() {
            let s = &current[i];
            let a = means.row(r).to_vec();
            let res = env.step(s, &a).map_err(|e| MetricsError::Env(e.to_string()))?;
            let jv = &res.state.joint_vel;
            let drive = [
                jv[..k].iter().map(|v| v * v).sum::<f64>().sqrt(),
                jv[k..2 * k].iter().map(|v| v * v).sum::<f64>().sqrt(),
            ];
            out.records[i].steps.push(TrajectoryStep {
                velocity: res.state.velocity,
                pose: [s.position[0], s.position[1], s.heading],
                command: s.command,
                action: a,
                history_hash: history_hash(windows[i].as_slice()),
                phase: s.phase(),
                drive,
            });
            if res.diagnostic.is_some() {
                out.diverged[i] = Some(res.state.step);
                alive[i] = false;
                continue;
            }
            let obs = observe(&res.state, &mut noise[i]);
            windows[i].push(&obs);
            if res.done {
                alive[i] = false;
            }
            if let Some(half) = opts.plane_half_width {
                if res.state.position[0].abs() > half || res.state.position[1].abs() > half {
                    alive[i] = false;
                }
            }
            out.states[i].push(res.state.clone());
            current[i] = res.state;
        }
    }
    for (i, rec) in out.records.iter().enumerate() {
        if !rec.steps.is_empty() {
            out.spat_s[i] /= rec.steps.len() as f64;
        }
    }
    Ok(out)
}

/// Rolls out from `s0` and from `F_s(s0)` with clean observations and
/// returns the largest componentwise gap between the second trajectory and
/// the mirror of the first.
pub fn mirror_rollout_error(
    policy: &DeterministicPolicy,
    env: &BilateralTracker,
    s0: &ToyState,
    history_rows: usize,
    steps: usize,
) -> Result<f64, MetricsError> {
    let mut start = s0.clone();
    start.step = 0;
    let mirrored = env.mirror_state(&start);
    let opts = RunOptions {
        steps,
        history_rows,
        noise_seed: None,
        spat: None,
        plane_half_width: None,
    };
    let run = run_deterministic(policy, env, &[start, mirrored], &opts)?;
    for d in &run.diverged {
        if let Some(step) = d {
            return Err(MetricsError::Diverged(*step));
        }
    }
    let (a, b) = (&run.states[0], &run.states[1]);
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let mx = env.mirror_state(x).to_vector();
        for (p, q) in mx.iter().zip(y.to_vector()) {
            worst = worst.max((p - q).abs());
        }
    }
    Ok(worst)
}

/// Random-command evaluation settings.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalOptions {
    pub episodes: usize,
    pub level: f64,
    pub seed: u64,
    /// Steps per episode; defaults to the env episode length.
    pub steps: Option<usize>,
    pub history_rows: usize,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub records: Vec<TrajectoryRecord>,
    pub te_p_curves: Vec<Vec<f64>>,
    pub te_o_curves: Vec<Vec<f64>>,
}

/// Runs `episodes` deterministic episodes with commands sampled at the
/// given curriculum level and aggregates all five metrics.
pub fn evaluate(
    policy: &DeterministicPolicy,
    env: &BilateralTracker,
    opts: &EvalOptions,
) -> Result<Evaluation, MetricsError> {
    if opts.episodes == 0 {
        return Err(MetricsError::Empty);
    }
    let mut initial = Vec::with_capacity(opts.episodes);
    for i in 0..opts.episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(1_000_000 + i as u64);
        initial.push(
            env.reset(&mut rng, opts.level)
                .map_err(|e| MetricsError::Env(e.to_string()))?,
        );
    }
    let profile = env.profile();
    let f_hist = profile.f_o().repeat(opts.history_rows);
    let f_a = profile.f_a();
    let run = run_deterministic(
        policy,
        env,
        &initial,
        &RunOptions {
            steps: opts.steps.unwrap_or(env.config().episode_length),
            history_rows: opts.history_rows,
            noise_seed: Some(opts.seed),
            spat: Some((&f_hist, f_a)),
            plane_half_width: None,
        },
    )?;
    let delta = env.config().period_steps();
    let (mut v, mut p, mut o, mut t) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut pc, mut oc) = (Vec::new(), Vec::new());
    for rec in &run.records {
        v.push(100.0 * te_v(rec)?);
        let cp = te_p(rec)?;
        let co = te_o(rec)?;
        p.push(cp.mean);
        o.push(co.mean);
        pc.push(cp.values);
        oc.push(co.values);
        let actions: Vec<Vec<f64>> = rec.steps.iter().map(|s| s.action.clone()).collect();
        t.push(temp_s(&actions, f_a, delta)?);
    }
    Ok(Evaluation {
        report: MetricsReport {
            episodes: opts.episodes,
            te_v: Stat::of(&v),
            te_p: Stat::of(&p),
            te_o: Stat::of(&o),
            temp_s: Stat::of(&t),
            spat_s: Stat::of(&run.spat_s),
        },
        records: run.records,
        te_p_curves: pc,
        te_o_curves: oc,
    })
}

/// `(±0.5, 0)`, `(0, ±0.5)` and the four diagonals, in m/s.
pub fn eight_direction_commands() -> [[f64; 3]; 8] {
    [
        [0.5, 0.0, 0.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.0],
        [-0.5, 0.5, 0.0],
        [-0.5, 0.0, 0.0],
        [-0.5, -0.5, 0.0],
        [0.0, -0.5, 0.0],
        [0.5, -0.5, 0.0],
    ]
}

/// One trajectory per eight-direction command from the origin, clean
/// observations, confined to a 12 m square.
pub fn run_eight_direction(
    policy: &DeterministicPolicy,
    env: &BilateralTracker,
    history_rows: usize,
) -> Result<Vec<TrajectoryRecord>, MetricsError> {
    let initial: Vec<ToyState> = eight_direction_commands()
        .iter()
        .map(|c| {
            let mut s = env.zero_state();
            s.command = *c;
            s
        })
        .collect();
    let run = run_deterministic(
        policy,
        env,
        &initial,
        &RunOptions {
            steps: env.config().episode_length,
            history_rows,
            noise_seed: None,
            spat: None,
            plane_half_width: Some(6.0),
        },
    )?;
    Ok(run.records)
}

/// Writes `step, x, y, psi, ideal_x, ideal_y, ideal_psi` for one record.
pub fn write_pose_csv<W: Write>(rec: &TrajectoryRecord, out: W, run_hash: &str) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "x", "y", "psi", "ideal_x", "ideal_y", "ideal_psi", "run_hash"])?;
    for (t, (s, i)) in rec.steps.iter().zip(ideal_poses(rec)).enumerate() {
        w.write_record([
            t.to_string(),
            format!("{:?}", s.pose[0]),
            format!("{:?}", s.pose[1]),
            format!("{:?}", s.pose[2]),
            format!("{:?}", i[0]),
            format!("{:?}", i[1]),
            format!("{:?}", i[2]),
            run_hash.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Overlay of actual (solid) and ideal (dashed) paths.
pub fn eight_direction_svg(records: &[TrajectoryRecord], run_hash: &str) -> String {
    let mut plot = LinePlot::new("Eight-direction tracking", "x (m)", "y (m)");
    plot.equal_axes = true;
    plot.note = Some(format!("run_hash {run_hash}"));
    for (i, rec) in records.iter().enumerate() {
        let c = rec.steps.first().map(|s| s.command).unwrap_or_default();
        let name = format!("({:+.1}, {:+.1})", c[0], c[1]);
        plot.push(Series::new(name, rec.steps.iter().map(|s| (s.pose[0], s.pose[1])).collect()).color(i));
        plot.push(
            Series::new("", ideal_poses(rec).iter().map(|p| (p[0], p[1])).collect())
                .dashed()
                .color(i),
        );
    }
    plot.series.retain(|s| !s.points.is_empty());
    plot.render()
}

/// Writes `dir_{i}.csv` for each direction and `eight_dir_overlay.svg`.
pub fn write_eight_direction(
    policy: &DeterministicPolicy,
    env: &BilateralTracker,
    history_rows: usize,
    dir: &Path,
    run_hash: &str,
) -> Result<Vec<PathBuf>, MetricsError> {
    let io = |e: std::io::Error| MetricsError::Env(e.to_string());
    let records = run_eight_direction(policy, env, history_rows)?;
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut paths = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let p = dir.join(format!("dir_{i}.csv"));
        let f = std::fs::File::create(&p).map_err(io)?;
        write_pose_csv(rec, f, run_hash).map_err(|e| MetricsError::Env(e.to_string()))?;
        paths.push(p);
    }
    let svg = dir.join("eight_dir_overlay.svg");
    std::fs::write(&svg, eight_direction_svg(&records, run_hash)).map_err(io)?;
    paths.push(svg);
    Ok(paths)
}

/// `(travelled distance, ‖u_L‖, ‖u_R‖)` along a record.
pub fn drive_profile(rec: &TrajectoryRecord) -> Vec<(f64, f64, f64)> {
    let mut dist = 0.0;
    let mut prev: Option<[f64; 3]> = None;
    rec.steps
        .iter()
        .map(|s| {
            if let Some(p) = prev {
                dist += (s.pose[0] - p[0]).hypot(s.pose[1] - p[1]);
            }
            prev = Some(s.pose);
            (dist, s.drive[0], s.drive[1])
        })
        .collect()
}

/// Drive-magnitude CSV and its SVG rendering.
pub fn write_drive_csv(rec: &TrajectoryRecord, dir: &Path, run_hash: &str) -> Result<Vec<PathBuf>, MetricsError> {
    let io = |e: std::io::Error| MetricsError::Env(e.to_string());
    std::fs::create_dir_all(dir).map_err(io)?;
    let prof = drive_profile(rec);
    let csv_path = dir.join("drive_profile.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| MetricsError::Env(e.to_string()))?;
    let csv_err = |e: csv::Error| MetricsError::Env(e.to_string());
    w.write_record(["distance", "drive_left", "drive_right", "run_hash"]).map_err(csv_err)?;
    for (d, l, r) in &prof {
        w.write_record([format!("{d:?}"), format!("{l:?}"), format!("{r:?}"), run_hash.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    let mut plot = LinePlot::new("Drive magnitude per side", "distance (m)", "|u| (rad/s)");
    plot.note = Some(format!("run_hash {run_hash}"));
    plot.push(Series::new("left", prof.iter().map(|p| (p.0, p.1)).collect()));
    plot.push(Series::new("right", prof.iter().map(|p| (p.0, p.2)).collect()).color(1));
    let svg_path = dir.join("drive_profile.svg");
    std::fs::write(&svg_path, plot.render()).map_err(io)?;
    Ok(vec![csv_path, svg_path])
}

/// Pointwise mean of curves of possibly different lengths.
pub fn mean_curve(curves: &[Vec<f64>]) -> Vec<f64> {
    let len = curves.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|t| {
            let vals: Vec<f64> = curves.iter().filter_map(|c| c.get(t).copied()).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        })
        .collect()
}

/// One line per named curve against time.
pub fn curves_svg(title: &str, y_label: &str, dt: f64, curves: &[(String, Vec<f64>)], run_hash: &str) -> String {
    let mut plot = LinePlot::new(title, "time (s)", y_label);
    plot.note = Some(format!("run_hash {run_hash}"));
    for (i, (name, c)) in curves.iter().enumerate() {
        plot.push(Series::new(name.clone(), c.iter().enumerate().map(|(t, v)| (t as f64 * dt, *v)).collect()).color(i));
    }
    plot.render()
}

/// Writes `error_curves.csv` (mean TE-P/TE-O per step) and one SVG each.
pub fn write_error_curves(eval: &Evaluation, dt: f64, dir: &Path, run_hash: &str) -> Result<Vec<PathBuf>, MetricsError> {
    let io = |e: std::io::Error| MetricsError::Env(e.to_string());
    let csv_err = |e: csv::Error| MetricsError::Env(e.to_string());
    std::fs::create_dir_all(dir).map_err(io)?;
    let p = mean_curve(&eval.te_p_curves);
    let o = mean_curve(&eval.te_o_curves);
    let csv_path = dir.join("error_curves.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record(["step", "time", "te_p", "te_o", "run_hash"]).map_err(csv_err)?;
    for t in 0..p.len() {
        w.write_record([
            t.to_string(),
            format!("{:?}", t as f64 * dt),
            format!("{:?}", p[t]),
            format!("{:?}", o[t]),
            run_hash.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    let sp = dir.join("te_p.svg");
    std::fs::write(&sp, curves_svg("Position tracking error", "TE-P (m)", dt, &[("mean".into(), p)], run_hash))
        .map_err(io)?;
    let so = dir.join("te_o.svg");
    std::fs::write(&so, curves_svg("Orientation tracking error", "TE-O (rad)", dt, &[("mean".into(), o)], run_hash))
        .map_err(io)?;
    Ok(vec![csv_path, sp, so])
}

/// One deterministic episode from `s0` with clean observations, logged
/// transition by transition. Stops at the time limit or on divergence.
pub fn record_episode(
    policy: &DeterministicPolicy,
    env: &BilateralTracker,
    s0: &ToyState,
    steps: usize,
    history_rows: usize,
    level: f64,
) -> Result<Vec<TrajectoryRow>, MetricsError> {
    let mut window = HistoryWindow::new(history_rows, env.obs_dim());
    window.reset(&env.observe(s0));
    let mut s = s0.clone();
    let mut rows = Vec::with_capacity(steps);
    for t in 0..steps {
        let h = Tensor::matrix(1, window.as_slice().len(), window.as_slice().to_vec());
        let a = policy.means(&h)?.row(0).to_vec();
        let res = env.step(&s, &a).map_err(|e| MetricsError::Env(e.to_string()))?;
        rows.push(TrajectoryRow {
            step: t,
            state: s.clone(),
            action: a,
            breakdown: res.breakdown,
            level,
        });
        if res.diagnostic.is_some() || res.done {
            break;
        }
        window.push(&res.observation);
        s = res.state;
    }
    Ok(rows)
}
