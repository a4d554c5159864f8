//! Property suites for fresh agents of every variant on the toy layout, and
//! for an equivariant agent on the humanoid layout.
//!
//! `cargo run --release --example verify_symmetry`

use symmeq::rl::{verify_job, TrainConfig, Variant, VerifyJob, VerifyTarget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let job = |profile: &str| VerifyJob {
        profile: profile.into(),
        seed: 0,
        samples: 1000,
        env_samples: 10_000,
    };
    for variant in Variant::ALL {
        let cfg = TrainConfig {
            variant,
            ..TrainConfig::default()
        };
        let report = verify_job(&cfg, VerifyTarget::Fresh, &job("toy"))?;
        println!("== toy, {variant} (passed: {})", report.passed());
        print!("{}", report.render_table());
    }
    let report = verify_job(&TrainConfig::default(), VerifyTarget::Fresh, &job("g1"))?;
    println!("== g1, se-policy (passed: {})", report.passed());
    print!("{}", report.render_table());
    Ok(())
}
