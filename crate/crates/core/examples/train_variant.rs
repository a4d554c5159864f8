//! Trains one variant on the toy tracker and prints the learning curve.
//!
//! `cargo run --release --example train_variant -- vanilla 40 [config.json]`

use std::time::Instant;

use symmeq::metrics::{evaluate, EvalOptions};
use symmeq::rl::{train, TrainConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let variant: Variant = args.next().as_deref().unwrap_or("se-policy").parse()?;
    let iterations = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let base = match args.next() {
        Some(path) => TrainConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => TrainConfig::default(),
    };
    let cfg = TrainConfig {
        variant,
        iterations,
        ..base
    };
    let start = Instant::now();
    let out = train(&cfg, 0, None, "")?;
    for s in &out.history {
        println!(
            "{:4} return {:8.2} reward {:6.3} tracking {:5.3} level {:4.2} kl {:.4} lr {:.2e} spat {:.2e} temp {:.3}",
            s.iteration, s.mean_return, s.mean_step_reward, s.tracking_ratio, s.level, s.kl, s.learning_rate, s.spat_s, s.temp_s
        );
    }
    let ev = evaluate(
        &out.agent.deterministic(),
        &out.env,
        &EvalOptions {
            episodes: 16,
            level: 1.0,
            seed: 0,
            steps: None,
            history_rows: cfg.history_len + 1,
        },
    )?;
    for (name, unit, s) in ev.report.rows() {
        println!("{name:>7} {:10.4} ± {:8.4} {unit}", s.mean, s.std);
    }
    println!(
        "{variant}: {iterations} iterations in {:.1} s",
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
