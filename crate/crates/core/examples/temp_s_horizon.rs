//! Temp-S of trained SE-Policy and vanilla agents as a function of the
//! evaluation horizon. Joint targets drift over an episode, so the score
//! grows with horizon for both.
//!
//! `cargo run --release --example temp_s_horizon -- [iterations] [seed]`

use symmeq::env::BilateralTracker;
use symmeq::metrics::{evaluate, EvalOptions};
use symmeq::rl::{train, TrainConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let horizons = [60, 100, 200, 400];
    print!("{:<14}", "variant");
    for h in horizons {
        print!(" {:>9}", format!("{h} steps"));
    }
    println!();
    for variant in [Variant::SePolicy, Variant::Vanilla] {
        let cfg = TrainConfig {
            variant,
            iterations,
            ..TrainConfig::default()
        };
        let out = train(&cfg, seed, None, "")?;
        let env = BilateralTracker::new(cfg.env.clone())?;
        let policy = out.agent.deterministic();
        print!("{variant:<14}");
        for h in horizons {
            let ev = evaluate(
                &policy,
                &env,
                &EvalOptions {
                    episodes: 16,
                    level: 1.0,
                    seed,
                    steps: Some(h),
                    history_rows: cfg.history_len + 1,
                },
            )?;
            print!(" {:>9.3}", ev.report.temp_s.mean);
        }
        println!();
    }
    Ok(())
}
