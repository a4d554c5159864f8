//! Parameter sharing for equivariant linear maps: orbit counts per
//! representation pair and the residual of random equivariant weights.
//!
//! `cargo run --release --example intertwiner`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symmeq::eqnn::{intertwiner_residual, solve_intertwiner_basis, EquivariantLinear};
use symmeq::symmetry::SignedPermutation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trivial = SignedPermutation::identity(2);
    let sign = SignedPermutation::negation(2);
    let regular = SignedPermutation::regular(1);
    let mixed = regular.direct_sum(&sign).direct_sum(&SignedPermutation::identity(1));
    let reps = [("trivial(2)", &trivial), ("sign(2)", &sign), ("regular(1)", &regular), ("mixed(5)", &mixed)];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!("{:<12} {:<12} {:>7} {:>5} {:>12}", "in", "out", "orbits", "free", "residual");
    for (ni, ri) in &reps {
        for (no, ro) in &reps {
            let orbits = solve_intertwiner_basis(ri, ro)?;
            let free = orbits.iter().filter(|o| o.is_free()).count();
            let layer = EquivariantLinear::new((*ri).clone(), (*ro).clone(), &mut rng)?;
            let w = layer.realize_weight();
            let res = intertwiner_residual(w.data(), ri, ro);
            println!("{ni:<12} {no:<12} {:>7} {free:>5} {res:>12.1e}", orbits.len());
        }
    }
    Ok(())
}
