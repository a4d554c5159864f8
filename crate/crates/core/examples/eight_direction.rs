//! Eight-direction tracking preset: one trajectory per compass and diagonal
//! command, written as CSVs with an overlay of ideal and actual paths, plus
//! the per-side drive profile of the first direction.
//!
//! `cargo run --release --example eight_direction -- [iterations] [out_dir]`

use std::path::PathBuf;

use symmeq::env::BilateralTracker;
use symmeq::metrics::{run_eight_direction, te_p, write_drive_csv, write_eight_direction};
use symmeq::rl::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map(|s| s.parse()).transpose()?.unwrap_or(30);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("symmeq_eight_dir"));
    let cfg = TrainConfig {
        iterations,
        ..TrainConfig::default()
    };
    let out = train(&cfg, 0, None, "example")?;
    let env = BilateralTracker::new(cfg.env.clone())?;
    let policy = out.agent.deterministic();
    let rows = cfg.history_len + 1;
    for (i, rec) in run_eight_direction(&policy, &env, rows)?.iter().enumerate() {
        let c = rec.steps[0].command;
        println!("dir {i}: command ({:+.1}, {:+.1}), {} steps, mean TE-P {:.3} m", c[0], c[1], rec.steps.len(), te_p(rec)?.mean);
    }
    let written = write_eight_direction(&policy, &env, rows, &dir, "example")?;
    let first = &run_eight_direction(&policy, &env, rows)?[0];
    let drive = write_drive_csv(first, &dir, "example")?;
    println!("wrote {} files to {}", written.len() + drive.len(), dir.display());
    Ok(())
}
