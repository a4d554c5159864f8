use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{build_agent, train, RlError, TrainConfig, Variant};
use crate::eqnn::{ActorCritic, Checkpoint, NetworkWidths};
use crate::env::{write_trajectory_csv, BilateralTracker, EnvConfig};
use crate::metrics::{
    evaluate, record_episode, replot_dir, run_eight_direction, verify_agent, verify_env, verify_profile, write_drive_csv,
    write_eight_direction, write_error_curves, EvalOptions, MetricsReport, VerifyReport,
};
use crate::symmetry::{build_g1_profile, LayoutProfile, Space};

/// Hex SHA-256 of the concatenated parts, each followed by a NUL byte.
pub fn digest_hex(parts: &[&[u8]]) -> String {
    let mut d = Sha256::new();
    for p in parts {
        d.update(p);
        d.update([0u8]);
    }
    hex::encode(d.finalize())
}

/// Hash of the canonical JSON form of a config.
pub fn config_hash(cfg: &TrainConfig) -> String {
    digest_hex(&[cfg.to_json().as_bytes()])
}

/// Short tag written into every artifact of one run.
pub fn run_hash(parts: &[&str]) -> String {
    let bytes: Vec<&[u8]> = parts.iter().map(|p| p.as_bytes()).collect();
    digest_hex(&bytes)[..16].to_owned()
}

/// `manifest.json` of one command invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub variant: String,
    pub seed: u64,
    pub config_hash: String,
    pub run_hash: String,
    pub wall_time_s: f64,
    pub final_metrics: serde_json::Value,
    pub artifacts: Vec<String>,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, RlError> {
        let p = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).map_err(|e| RlError::Io(std::io::Error::other(e)))?;
        std::fs::write(&p, json)?;
        Ok(p)
    }
}

fn names(paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect()
}

/// Trains one seed into `dir` and writes its manifest.
pub fn train_job(cfg: &TrainConfig, seed: u64, dir: &Path) -> Result<RunManifest, RlError> {
    cfg.validate()?;
    let ch = config_hash(cfg);
    let hash = run_hash(&["train", &ch, &seed.to_string()]);
    let t0 = Instant::now();
    let outcome = train(cfg, seed, Some(dir), &hash)?;
    let mut artifacts = names(&outcome.checkpoints);
    artifacts.push("metrics.csv".into());
    artifacts.extend(names(&replot_dir(dir)?));
    artifacts.push("manifest.json".into());
    let final_metrics = outcome
        .history
        .last()
        .map(|s| serde_json::to_value(s).unwrap_or_default())
        .unwrap_or_default();
    let m = RunManifest {
        command: "train".into(),
        variant: cfg.variant.tag().into(),
        seed,
        config_hash: ch,
        run_hash: hash,
        wall_time_s: t0.elapsed().as_secs_f64(),
        final_metrics,
        artifacts,
        config: serde_json::to_value(cfg).unwrap_or_default(),
    };
    m.write(dir)?;
    Ok(m)
}

/// Which evaluation protocols to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalPreset {
    /// Randomly sampled commands, aggregated into a report.
    Random,
    /// One trajectory per compass and diagonal direction.
    EightDir,
    All,
}

impl FromStr for EvalPreset {
    type Err = RlError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Self::Random),
            "eight-dir" => Ok(Self::EightDir),
            "all" => Ok(Self::All),
            other => Err(RlError::Config(format!(
                "unknown preset '{other}'; expected one of: random, eight-dir, all"
            ))),
        }
    }
}

/// A checkpoint restored against a concrete environment.
pub struct LoadedPolicy {
    pub checkpoint: Checkpoint,
    pub agent: ActorCritic,
    pub env: BilateralTracker,
    /// Hash of the checkpoint file bytes.
    pub file_hash: String,
}

/// `toy` for every `toy-k*-m*` layout, otherwise the profile name.
pub fn profile_family(profile: &LayoutProfile) -> &str {
    match profile.name() {
        n if n.starts_with("toy") => "toy",
        n => n,
    }
}

fn same_spaces(a: &LayoutProfile, b: &LayoutProfile) -> bool {
    Space::ALL.iter().all(|&s| a.transform(s) == b.transform(s))
}

/// Loads a checkpoint and checks it against `env` and, when given, the
/// expected profile name.
pub fn load_policy(path: &Path, env: &EnvConfig, profile: Option<&str>) -> Result<LoadedPolicy, RlError> {
    let bytes = std::fs::read(path).map_err(|e| RlError::Config(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8_lossy(&bytes);
    let checkpoint = Checkpoint::from_json(&text)?;
    if let Some(p) = profile {
        if p != profile_family(&checkpoint.profile) && p != checkpoint.profile.name() {
            return Err(RlError::Mismatch(format!(
                "checkpoint profile '{}' but --profile {p}",
                checkpoint.profile.name()
            )));
        }
    }
    if profile_family(&checkpoint.profile) != "toy" {
        return Err(RlError::Mismatch(format!(
            "checkpoint profile '{}' has no simulator; only toy checkpoints can be rolled out",
            checkpoint.profile.name()
        )));
    }
    let env = BilateralTracker::new(env.clone())?;
    if !same_spaces(&checkpoint.profile, env.profile()) {
        return Err(RlError::Mismatch(format!(
            "checkpoint layout (obs {}, actions {}) does not match the environment (obs {}, actions {})",
            checkpoint.profile.obs_dim(),
            checkpoint.profile.action_dim(),
            env.obs_dim(),
            env.action_dim()
        )));
    }
    let agent = checkpoint.restore()?.agent;
    Ok(LoadedPolicy {
        checkpoint,
        agent,
        env,
        file_hash: digest_hex(&[&bytes]),
    })
}

#[derive(Clone, Debug)]
pub struct EvalJob {
    pub preset: EvalPreset,
    pub episodes: usize,
    pub seed: u64,
    pub level: f64,
}

/// Runs the selected presets on a loaded policy and writes the report
/// (CSV and JSON), error curves, eight-direction CSVs/SVG and the manifest.
pub fn eval_job(p: &LoadedPolicy, job: &EvalJob, dir: &Path) -> Result<(RunManifest, Option<MetricsReport>), RlError> {
    if job.episodes == 0 {
        return Err(RlError::Config("episodes must be at least 1".into()));
    }
    let env_json = serde_json::to_string(p.env.config()).unwrap_or_default();
    let hash = run_hash(&[
        "eval",
        &p.file_hash,
        &env_json,
        &format!("{:?}", job.preset),
        &job.episodes.to_string(),
        &job.seed.to_string(),
        &format!("{:?}", job.level),
    ]);
    std::fs::create_dir_all(dir)?;
    let t0 = Instant::now();
    let policy = p.agent.deterministic();
    let rows = p.checkpoint.history_len + 1;
    let mut artifacts = Vec::new();
    let mut report = None;
    if matches!(job.preset, EvalPreset::Random | EvalPreset::All) {
        let ev = evaluate(
            &policy,
            &p.env,
            &EvalOptions {
                episodes: job.episodes,
                level: job.level,
                seed: job.seed,
                steps: None,
                history_rows: rows,
            },
        )?;
        let f = std::fs::File::create(dir.join("report.csv"))?;
        ev.report
            .write_csv(f, &hash)
            .map_err(|e| RlError::Io(std::io::Error::other(e)))?;
        let mut json: serde_json::Value = serde_json::from_str(&ev.report.to_json()).unwrap_or_default();
        json["run_hash"] = hash.clone().into();
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&json).unwrap_or_default())?;
        artifacts.push(dir.join("report.csv"));
        artifacts.push(dir.join("report.json"));
        artifacts.extend(write_error_curves(&ev, p.env.config().dt, dir, &hash)?);
        report = Some(ev.report);
    }
    if matches!(job.preset, EvalPreset::EightDir | EvalPreset::All) {
        artifacts.extend(write_eight_direction(&policy, &p.env, rows, dir, &hash)?);
        let recs = run_eight_direction(&policy, &p.env, rows)?;
        if let Some(first) = recs.first() {
            artifacts.extend(write_drive_csv(first, dir, &hash)?);
        }
    }
    let mut artifacts = names(&artifacts);
    artifacts.push("manifest.json".into());
    let m = RunManifest {
        command: "eval".into(),
        variant: p.checkpoint.variant.clone(),
        seed: job.seed,
        config_hash: digest_hex(&[env_json.as_bytes()]),
        run_hash: hash,
        wall_time_s: t0.elapsed().as_secs_f64(),
        final_metrics: report
            .as_ref()
            .map(|r| serde_json::from_str(&r.to_json()).unwrap_or_default())
            .unwrap_or_default(),
        artifacts,
        config: serde_json::to_value(p.env.config()).unwrap_or_default(),
    };
    m.write(dir)?;
    Ok((m, report))
}

/// Exports `episodes` deterministic trajectories as `trajectory_<i>.csv`.
pub fn rollout_job(p: &LoadedPolicy, episodes: usize, seed: u64, level: f64, dir: &Path) -> Result<RunManifest, RlError> {
    if episodes == 0 {
        return Err(RlError::Config("episodes must be at least 1".into()));
    }
    let env_json = serde_json::to_string(p.env.config()).unwrap_or_default();
    let hash = run_hash(&[
        "rollout",
        &p.file_hash,
        &env_json,
        &episodes.to_string(),
        &seed.to_string(),
        &format!("{level:?}"),
    ]);
    std::fs::create_dir_all(dir)?;
    let t0 = Instant::now();
    let policy = p.agent.deterministic();
    let rows = p.checkpoint.history_len + 1;
    let mut artifacts = Vec::new();
    for i in 0..episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let s0 = p.env.reset(&mut rng, level)?;
        let traj = record_episode(&policy, &p.env, &s0, p.env.config().episode_length, rows, level)?;
        let name = format!("trajectory_{i}.csv");
        let f = std::fs::File::create(dir.join(&name))?;
        write_trajectory_csv(&p.env, &traj, f, &hash).map_err(|e| RlError::Io(std::io::Error::other(e)))?;
        artifacts.push(name);
    }
    artifacts.push("manifest.json".into());
    let m = RunManifest {
        command: "rollout".into(),
        variant: p.checkpoint.variant.clone(),
        seed,
        config_hash: digest_hex(&[env_json.as_bytes()]),
        run_hash: hash,
        wall_time_s: t0.elapsed().as_secs_f64(),
        final_metrics: serde_json::Value::Null,
        artifacts,
        config: serde_json::to_value(p.env.config()).unwrap_or_default(),
    };
    m.write(dir)?;
    Ok(m)
}

/// What `verify` checks: a saved checkpoint, or a freshly initialized agent
/// of `cfg.variant`. The variant decides which properties are required.
pub enum VerifyTarget<'a> {
    Checkpoint(&'a Path),
    Fresh,
}

#[derive(Clone, Debug)]
pub struct VerifyJob {
    /// `toy` or `g1`.
    pub profile: String,
    pub seed: u64,
    pub samples: usize,
    pub env_samples: usize,
}

/// Runs every property suite that applies to the profile.
pub fn verify_job(cfg: &TrainConfig, target: VerifyTarget<'_>, job: &VerifyJob) -> Result<VerifyReport, RlError> {
    let mut report = VerifyReport::default();
    let (profile, agent, variant) = match (job.profile.as_str(), target) {
        ("toy", VerifyTarget::Checkpoint(path)) => {
            let p = load_policy(path, &cfg.env, Some("toy"))?;
            let v: Variant = p.checkpoint.variant.parse()?;
            (p.checkpoint.profile.clone(), p.agent, v)
        }
        ("g1", VerifyTarget::Checkpoint(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| RlError::Config(format!("{}: {e}", path.display())))?;
            let ck = Checkpoint::from_json(&text)?;
            if profile_family(&ck.profile) != "g1" {
                return Err(RlError::Mismatch(format!(
                    "checkpoint profile '{}' but --profile g1",
                    ck.profile.name()
                )));
            }
            let v: Variant = ck.variant.parse()?;
            (ck.profile.clone(), ck.restore()?.agent, v)
        }
        ("toy", VerifyTarget::Fresh) => {
            let env = BilateralTracker::new(cfg.env.clone())?;
            let profile = env
                .profile()
                .with_latent_size(cfg.widths.latent_size())
                .map_err(|e| RlError::Config(e.to_string()))?;
            let agent = build_agent(&profile, cfg, &mut ChaCha8Rng::seed_from_u64(job.seed))?;
            (profile, agent, cfg.variant)
        }
        ("g1", VerifyTarget::Fresh) => {
            let mut g = cfg.clone();
            g.widths = NetworkWidths::g1();
            let profile = build_g1_profile()
                .with_latent_size(g.widths.latent_size())
                .map_err(|e| RlError::Config(e.to_string()))?;
            let agent = build_agent(&profile, &g, &mut ChaCha8Rng::seed_from_u64(job.seed))?;
            (profile, agent, cfg.variant)
        }
        (other, _) => {
            return Err(RlError::Config(format!("unknown profile '{other}'; expected one of: toy, g1")));
        }
    };
    report.extend(verify_profile(&profile));
    if profile_family(&profile) == "toy" {
        let env = BilateralTracker::new(cfg.env.clone())?;
        report.extend(verify_env(&env, job.env_samples, job.seed));
    }
    let expect = (variant.equivariant_actor(), variant.invariant_critic());
    report.extend(verify_agent(&agent, &profile, expect, job.samples, job.seed)?);
    Ok(report)
}
