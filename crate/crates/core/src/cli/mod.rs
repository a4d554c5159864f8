//! Command-line front end. Parses arguments, resolves output directories and
//! maps errors to exit codes; all work is delegated to [`crate::rl`] and
//! [`crate::metrics`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::metrics::replot_dir;
use crate::rl::{
    eval_job, load_policy, rollout_job, train_job, verify_job, EvalJob, EvalPreset, RlError, TrainConfig, Variant,
    VerifyJob, VerifyTarget,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable that sets the output root.
pub const OUT_ENV: &str = "SYMMEQ_OUT";

#[derive(Debug, Parser)]
#[command(name = "symmeq", version, about = "Mirror-equivariant actor-critic training and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one variant for one or more seeds.
    Train(TrainArgs),
    /// Evaluate a checkpoint on random commands and/or the eight-direction preset.
    Eval(EvalArgs),
    /// Run the symmetry property suites and print a pass/fail table.
    Verify(VerifyArgs),
    /// Export deterministic trajectories of a checkpoint as CSV.
    Rollout(RolloutArgs),
    /// Re-render SVG plots from the CSV files in a directory.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Training/environment config (JSON; unknown keys are errors).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; relative paths resolve under $SYMMEQ_OUT when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// se-policy, se-actor-only, vanilla or vanilla-regu; overrides the config.
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    /// Single training seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// PPO iterations; overrides the config.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Rayon worker threads for rollouts.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Serial execution; repeated runs produce byte-identical CSVs.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint JSON written by `train`.
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub common: ConfigArgs,
    /// random, eight-dir or all.
    #[arg(long, default_value = "random", value_parser = parse_preset)]
    pub preset: EvalPreset,
    /// Random-command episodes.
    #[arg(long, default_value_t = 64)]
    pub episodes: usize,
    /// Command-sampling seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Expected profile name of the checkpoint.
    #[arg(long)]
    pub profile: Option<String>,
    /// Rayon worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Serial execution.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Checkpoint to verify; a freshly initialized agent when omitted.
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Layout profile: toy or g1.
    #[arg(long, default_value = "toy")]
    pub profile: String,
    /// Variant of the fresh agent when no checkpoint is given.
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    /// Sampling and initialization seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    /// Checkpoint JSON written by `train`.
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Trajectories to export.
    #[arg(long, default_value_t = 1)]
    pub episodes: usize,
    /// Command-sampling seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Expected profile name of the checkpoint.
    #[arg(long)]
    pub profile: Option<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Directory holding metrics.csv, error_curves.csv, dir_*.csv or drive_profile.csv.
    pub dir: PathBuf,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: RlError| e.to_string())
}

fn parse_preset(s: &str) -> Result<EvalPreset, String> {
    s.parse().map_err(|e: RlError| e.to_string())
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<RlError> for Failure {
    fn from(e: RlError) -> Self {
        let code = match e {
            RlError::Config(_) | RlError::Mismatch(_) | RlError::UnknownVariant(_) => EXIT_USAGE,
            _ => EXIT_PROPERTY,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// `--out` (or `default`) under `$SYMMEQ_OUT`, or under the working
/// directory when the variable is unset.
pub fn resolve_out(out: Option<&Path>, default: &str) -> PathBuf {
    let rel = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(default));
    match std::env::var_os(OUT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(rel),
        _ => rel,
    }
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig, Failure> {
    match path {
        None => Ok(TrainConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            TrainConfig::from_json(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

fn set_workers(workers: Option<usize>, deterministic: bool) -> usize {
    let n = if deterministic { 1 } else { workers.unwrap_or(1).max(1) };
    if n > 1 {
        // Ignore the error if a pool was already installed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    n
}

fn cmd_train(a: TrainArgs) -> Result<(), Failure> {
    let mut cfg = load_config(a.common.config.as_deref())?;
    if let Some(v) = a.variant {
        cfg.variant = v;
    }
    if let Some(n) = a.iterations {
        cfg.iterations = n;
    }
    if let Some(s) = a.seed {
        cfg.seeds = vec![s];
    }
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    cfg.workers = set_workers(a.workers.or(Some(cfg.workers)), a.deterministic);
    cfg.validate()?;
    let root = resolve_out(a.common.out.as_deref(), &format!("runs/{}", cfg.variant.tag()));
    for &seed in &cfg.seeds {
        let dir = if cfg.seeds.len() == 1 {
            root.clone()
        } else {
            root.join(format!("seed_{seed}"))
        };
        let m = train_job(&cfg, seed, &dir)?;
        let ret = m.final_metrics.get("mean_return").and_then(|v| v.as_f64());
        println!(
            "{} seed {seed}: {} iterations in {:.1}s, final mean return {}, run {} -> {}",
            m.variant,
            cfg.iterations,
            m.wall_time_s,
            ret.map_or("n/a".into(), |r| format!("{r:.3}")),
            m.run_hash,
            dir.display()
        );
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    if a.episodes == 0 {
        return Err(usage("--episodes must be at least 1"));
    }
    set_workers(a.workers, a.deterministic);
    let cfg = load_config(a.common.config.as_deref())?;
    let policy = load_policy(&a.checkpoint, &cfg.env, a.profile.as_deref())?;
    let dir = resolve_out(a.common.out.as_deref(), "eval");
    let job = EvalJob {
        preset: a.preset,
        episodes: a.episodes,
        seed: a.seed,
        level: 1.0,
    };
    let (m, report) = eval_job(&policy, &job, &dir)?;
    if let Some(r) = report {
        println!("{:<8} {:>12} {:>12}  unit", "metric", "mean", "std");
        for (name, unit, s) in r.rows() {
            println!("{name:<8} {:>12.6} {:>12.6}  {unit}", s.mean, s.std);
        }
    }
    println!("{} artifacts, run {} -> {}", m.artifacts.len(), m.run_hash, dir.display());
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let mut cfg = load_config(a.common.config.as_deref())?;
    if let Some(v) = a.variant {
        cfg.variant = v;
    }
    let target = match &a.checkpoint {
        Some(p) => VerifyTarget::Checkpoint(p),
        None => VerifyTarget::Fresh,
    };
    let job = VerifyJob {
        profile: a.profile.clone(),
        seed: a.seed,
        samples: 1000,
        env_samples: 10_000,
    };
    let report = verify_job(&cfg, target, &job)?;
    print!("{}", report.render_table());
    if let Some(out) = &a.common.out {
        let dir = resolve_out(Some(out), "verify");
        std::fs::create_dir_all(&dir).map_err(|e| Failure::from(RlError::Io(e)))?;
        let f = std::fs::File::create(dir.join("verify.csv")).map_err(|e| Failure::from(RlError::Io(e)))?;
        let tag = crate::rl::run_hash(&["verify", &a.profile, &a.seed.to_string()]);
        report
            .write_csv(f, &tag)
            .map_err(|e| Failure::from(RlError::Io(std::io::Error::other(e))))?;
    }
    if report.passed() {
        Ok(())
    } else {
        let lines: Vec<String> = report
            .failures()
            .map(|c| format!("property failed: {} (max residual {:.3e}, tolerance {:.0e})", c.name, c.residual, c.tolerance))
            .collect();
        Err(Failure {
            code: EXIT_PROPERTY,
            message: lines.join("\n"),
        })
    }
}

fn cmd_rollout(a: RolloutArgs) -> Result<(), Failure> {
    if a.episodes == 0 {
        return Err(usage("--episodes must be at least 1"));
    }
    let cfg = load_config(a.common.config.as_deref())?;
    let policy = load_policy(&a.checkpoint, &cfg.env, a.profile.as_deref())?;
    let dir = resolve_out(a.common.out.as_deref(), "rollout");
    let m = rollout_job(&policy, a.episodes, a.seed, 1.0, &dir)?;
    println!("{} trajectories, run {} -> {}", a.episodes, m.run_hash, dir.display());
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> Result<(), Failure> {
    if !a.dir.is_dir() {
        return Err(usage(format!("{} is not a directory", a.dir.display())));
    }
    let written = replot_dir(&a.dir).map_err(|e| Failure {
        code: EXIT_PROPERTY,
        message: e.to_string(),
    })?;
    if written.is_empty() {
        return Err(usage(format!("no plottable CSV files in {}", a.dir.display())));
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

/// Runs a parsed command.
pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Rollout(a) => cmd_rollout(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
