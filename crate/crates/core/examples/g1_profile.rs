//! The 27-joint humanoid layout: component blocks and their mirror images,
//! checked row by row against the index-form reference table.
//!
//! `cargo run --release --example g1_profile`

use symmeq::symmetry::{build_g1_profile, check_reference_rows, g1_reference_rows, Space, TransformKind};

fn main() {
    let p = build_g1_profile();
    println!(
        "obs {}  actions {}  height map {}  state {}  latent {}",
        p.obs_dim(),
        p.action_dim(),
        p.height_dim(),
        p.state_dim(),
        p.latent_size()
    );
    for space in [Space::Observation, Space::HeightMap, Space::Action] {
        println!("-- {space:?}");
        for c in p.components(space) {
            let (off, dim) = p.locate(space, &c.name).expect("component is located");
            let kind = match &c.kind {
                TransformKind::Fixed { signs } if signs.is_empty() => "fixed".to_string(),
                TransformKind::Fixed { signs } => format!("signs {signs:?}"),
                TransformKind::Negated => "negated".to_string(),
                TransformKind::Swap { partner, signs } => format!("swap with {partner}, sign {}", signs[0]),
            };
            println!("  {:<28} [{off:3}, {:3})  {kind}", c.name, off + dim);
        }
    }
    println!("-- reference rows");
    for r in check_reference_rows(&p, &g1_reference_rows()) {
        println!("  {:<32} {}", r.label, if r.passed { "ok" } else { "MISMATCH" });
    }
}
