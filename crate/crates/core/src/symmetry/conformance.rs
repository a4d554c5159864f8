use super::{LayoutProfile, Space};

/// One row of the humanoid reference table in index form: source block at
/// `from`, image block at `to`, every coordinate multiplied by its sign.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceRow {
    pub label: String,
    pub space: Space,
    pub from: usize,
    pub to: usize,
    pub signs: Vec<f64>,
}

/// Outcome of checking one reference row on basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct RowConformance {
    pub label: String,
    pub passed: bool,
    /// Largest absolute deviation over the row's basis vectors.
    pub max_error: f64,
}

fn row(label: &str, space: Space, from: usize, to: usize, signs: &[f64]) -> ReferenceRow {
    ReferenceRow {
        label: label.to_owned(),
        space,
        from,
        to,
        signs: signs.to_vec(),
    }
}

/// Arms (7), legs (6), waist (1) starting at `base`: left and right swap
/// with a sign flip, the waist stays.
fn limb_rows(label: &str, space: Space, base: usize) -> Vec<ReferenceRow> {
    let neg7 = [-1.0; 7];
    let neg6 = [-1.0; 6];
    vec![
        row(&format!("{label} left arm"), space, base, base + 7, &neg7),
        row(&format!("{label} right arm"), space, base + 7, base, &neg7),
        row(&format!("{label} left leg"), space, base + 14, base + 20, &neg6),
        row(&format!("{label} right leg"), space, base + 20, base + 14, &neg6),
        row(&format!("{label} waist"), space, base + 26, base + 26, &[1.0]),
    ]
}

/// The humanoid's observation, height-map and action mirror written out
/// block by block with absolute offsets.
pub fn g1_reference_rows() -> Vec<ReferenceRow> {
    use Space::*;
    let mut rows = vec![
        row("base angular velocity", Observation, 0, 0, &[-1.0, 1.0, -1.0]),
        row("projected gravity", Observation, 3, 3, &[1.0, -1.0, 1.0]),
        row("velocity commands", Observation, 6, 6, &[1.0, -1.0, -1.0]),
    ];
    rows.extend(limb_rows("joint positions", Observation, 9));
    rows.extend(limb_rows("joint velocities", Observation, 36));
    rows.extend(limb_rows("previous action", Observation, 63));
    rows.push(row("phase", Observation, 90, 90, &[-1.0, -1.0]));
    rows.push(row("height map left", HeightMap, 0, 102, &[1.0; 85]));
    rows.push(row("height map middle", HeightMap, 85, 85, &[1.0; 17]));
    rows.push(row("height map right", HeightMap, 102, 0, &[1.0; 85]));
    rows.extend(limb_rows("action", Action, 0));
    rows
}

/// Applies the profile's transform to every basis vector named by each
/// row and compares against the reference image.
pub fn check_reference_rows(profile: &LayoutProfile, rows: &[ReferenceRow]) -> Vec<RowConformance> {
    rows.iter()
        .map(|r| {
            let f = profile.transform(r.space);
            let n = f.len();
            let mut worst: f64 = 0.0;
            let mut ok = r.from + r.signs.len() <= n && r.to + r.signs.len() <= n;
            if ok {
                for (d, &s) in r.signs.iter().enumerate() {
                    let mut e = vec![0.0; n];
                    e[r.from + d] = 1.0;
                    let img = f.apply(&e).expect("basis length matches");
                    let mut want = vec![0.0; n];
                    want[r.to + d] = s;
                    for (a, b) in img.iter().zip(&want) {
                        worst = worst.max((a - b).abs());
                    }
                }
                ok = worst == 0.0;
            } else {
                worst = f64::INFINITY;
            }
            RowConformance {
                label: r.label.clone(),
                passed: ok,
                max_error: worst,
            }
        })
        .collect()
}
