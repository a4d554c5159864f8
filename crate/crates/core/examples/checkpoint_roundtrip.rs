//! Trains briefly, saves a checkpoint, restores it and compares outputs and
//! the equivariance residual before and after.
//!
//! `cargo run --release --example checkpoint_roundtrip`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symmeq::eqnn::Checkpoint;
use symmeq::numerics::Tensor;
use symmeq::rl::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = TrainConfig {
        iterations: 5,
        ..TrainConfig::default()
    };
    let out = train(&cfg, 0, None, "")?;
    let path = std::env::temp_dir().join("symmeq_roundtrip.json");
    out.checkpoint(cfg.variant.tag()).save(&path)?;
    let restored = Checkpoint::load(&path)?.restore()?;
    let width = out.agent.actor.history_width();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = Tensor::matrix(8, width, (0..8 * width).map(|_| rng.random_range(-1.0..1.0)).collect());
    let a = out.agent.deterministic().means(&h)?;
    let b = restored.agent.deterministic().means(&h)?;
    let gap = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("checkpoint {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!("max action difference after restore: {gap:e}");
    println!(
        "intertwiner residual before {:e}, after {:e}",
        out.agent.max_residual(),
        restored.agent.max_residual()
    );
    println!("optimizer step {}, learning rate {:e}", restored.optimizer.step, restored.learning_rate);
    std::fs::remove_file(&path)?;
    Ok(())
}
