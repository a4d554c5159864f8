//! Trains a short run into a directory, then evaluates its final checkpoint
//! on random commands and writes the report, error curves and plots.
//!
//! `cargo run --release --example evaluate_checkpoint -- [iterations] [out_dir]`

use std::path::PathBuf;

use symmeq::rl::{eval_job, load_policy, train_job, EvalJob, EvalPreset, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let root = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("symmeq_eval_example"));
    let cfg = TrainConfig {
        iterations,
        ..TrainConfig::default()
    };
    let run = train_job(&cfg, 0, &root.join("train"))?;
    let ckpt = root.join("train").join(run.artifacts.iter().rfind(|a| a.starts_with("checkpoint")).expect("checkpoint written"));
    let policy = load_policy(&ckpt, &cfg.env, Some("toy"))?;
    let job = EvalJob {
        preset: EvalPreset::Random,
        episodes: 16,
        seed: 0,
        level: 1.0,
    };
    let (m, report) = eval_job(&policy, &job, &root.join("eval"))?;
    let report = report.expect("random preset produces a report");
    for (name, unit, s) in report.rows() {
        println!("{name:<7} {:>10.4} ± {:<10.4} {unit}", s.mean, s.std);
    }
    println!("run {} wrote {:?} to {}", m.run_hash, m.artifacts, root.join("eval").display());
    Ok(())
}
