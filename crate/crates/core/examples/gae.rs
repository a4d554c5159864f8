//! Generalized advantage estimation on a short trajectory with a terminal
//! step, next to the direct double sum it replaces.
//!
//! `cargo run --release --example gae`

use symmeq::rl::gae_trajectory;

fn main() {
    let rewards = [1.0, 0.0, 2.0, 1.0, 0.5];
    let values = [0.5, 0.2, 0.8, 0.1, 0.3, 0.9];
    let dones = [false, false, true, false, false];
    let (gamma, lambda) = (0.95, 0.9);
    let est = gae_trajectory(&rewards, &values, &dones, gamma, lambda);
    println!("{:>3} {:>10} {:>10} {:>10}", "t", "advantage", "direct", "return");
    for t in 0..rewards.len() {
        let mut direct = 0.0;
        let mut w = 1.0;
        for k in t..rewards.len() {
            let next = if dones[k] { 0.0 } else { values[k + 1] };
            direct += w * (rewards[k] + gamma * next - values[k]);
            if dones[k] {
                break;
            }
            w *= gamma * lambda;
        }
        println!("{t:>3} {:>10.6} {direct:>10.6} {:>10.6}", est.advantages[t], est.returns[t]);
    }
}
