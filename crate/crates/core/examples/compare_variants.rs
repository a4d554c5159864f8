//! Trains all four variants over several seeds and prints the evaluation
//! table (TE-V in cm/s, TE-P in m, TE-O in rad, Temp-S, Spat-S).
//!
//! `cargo run --release --example compare_variants -- 200 0,1,2`

use std::time::Instant;

use symmeq::rl::{run_sweep, SweepEval, TrainConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let seeds: Vec<u64> = args
        .next()
        .unwrap_or_else(|| "0".into())
        .split(',')
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let cfg = TrainConfig {
        iterations,
        ..TrainConfig::default()
    };
    let eval = SweepEval {
        episodes: 16,
        level: 1.0,
        steps: None,
    };
    let start = Instant::now();
    let runs = run_sweep(&cfg, &Variant::ALL, &seeds, &eval, false)?;
    println!("{:<14} {:>4} {:>8} {:>7} {:>7} {:>8} {:>10}", "variant", "seed", "TE-V", "TE-P", "TE-O", "Temp-S", "Spat-S");
    for r in &runs {
        let m = &r.report;
        println!(
            "{:<14} {:>4} {:>8.3} {:>7.3} {:>7.3} {:>8.4} {:>10.3e}",
            r.variant.tag(),
            r.seed,
            m.te_v.mean,
            m.te_p.mean,
            m.te_o.mean,
            m.temp_s.mean,
            m.spat_s.mean
        );
    }
    println!("{} runs in {:.1} s", runs.len(), start.elapsed().as_secs_f64());
    Ok(())
}
