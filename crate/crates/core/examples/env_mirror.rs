//! One transition of the toy tracker from a random state and from its
//! mirror image: the next states are mirrors of each other and every reward
//! term is unchanged.
//!
//! `cargo run --release --example env_mirror`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symmeq::env::{sample_state, BilateralTracker, EnvConfig, RewardBreakdown};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = BilateralTracker::new(EnvConfig::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = sample_state(&env, &mut rng);
    let a: Vec<f64> = (0..env.action_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let r = env.step(&s, &a)?;
    let m = env.step(&env.mirror_state(&s), &env.mirror_action(&a))?;
    let want = env.mirror_state(&r.state).to_vector();
    let gap = want
        .iter()
        .zip(m.state.to_vector())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    println!("state dim {}, max |F_s(step(s,a)) - step(F_s s, F_a a)| = {gap:.1e}", want.len());
    println!("{:<18} {:>12} {:>12}", "reward term", "original", "mirrored");
    for (name, (x, y)) in RewardBreakdown::NAMES
        .iter()
        .zip(r.breakdown.components().iter().zip(m.breakdown.components()))
    {
        println!("{name:<18} {x:>12.6} {y:>12.6}");
    }
    let o = env.profile().f_o().apply(&env.observe(&s))?;
    let same = o == env.observe(&env.mirror_state(&s));
    println!("observe(F_s s) == F_o(observe(s)): {same}");
    Ok(())
}
