use serde::{Deserialize, Serialize};

use super::{SignedPermutation, SymmetryError};

/// How one named block of a vector space transforms under the mirror.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformKind {
    /// Stays in place; each dimension multiplied by its sign (all `+1` when
    /// `signs` is empty).
    Fixed { signs: Vec<i8> },
    /// Stays in place, every dimension negated.
    Negated,
    /// Exchanges with the equally sized `partner` block; dimension `d` lands
    /// on the partner's dimension `d` multiplied by `signs[d]`.
    Swap { partner: String, signs: Vec<i8> },
}

/// Which vector space a component belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Observation,
    Action,
    State,
    HeightMap,
}

impl Space {
    pub const ALL: [Space; 4] = [
        Space::Observation,
        Space::Action,
        Space::State,
        Space::HeightMap,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawComponent", into = "RawComponent")]
pub struct ComponentSpec {
    pub space: Space,
    pub name: String,
    pub dim: usize,
    pub kind: TransformKind,
}

/// Flat JSON form: `{space, name, dim, kind, partner?, signs?}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    space: Space,
    name: String,
    dim: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signs: Option<Vec<i8>>,
}

impl TryFrom<RawComponent> for ComponentSpec {
    type Error = SymmetryError;
    fn try_from(raw: RawComponent) -> Result<Self, Self::Error> {
        let kind = match raw.kind.as_str() {
            "fixed" => TransformKind::Fixed {
                signs: raw.signs.unwrap_or_default(),
            },
            "negated" => TransformKind::Negated,
            "swap" => TransformKind::Swap {
                partner: raw
                    .partner
                    .ok_or_else(|| SymmetryError::Layout(format!("{}: swap without partner", raw.name)))?,
                signs: raw.signs.unwrap_or_else(|| vec![1; raw.dim]),
            },
            other => return Err(SymmetryError::Layout(format!("unknown kind {other:?}"))),
        };
        Ok(ComponentSpec {
            space: raw.space,
            name: raw.name,
            dim: raw.dim,
            kind,
        })
    }
}

impl From<ComponentSpec> for RawComponent {
    fn from(c: ComponentSpec) -> Self {
        let (kind, partner, signs) = match c.kind {
            TransformKind::Fixed { signs } if signs.is_empty() => ("fixed", None, None),
            TransformKind::Fixed { signs } => ("fixed", None, Some(signs)),
            TransformKind::Negated => ("negated", None, None),
            TransformKind::Swap { partner, signs } => ("swap", Some(partner), Some(signs)),
        };
        RawComponent {
            space: c.space,
            name: c.name,
            dim: c.dim,
            kind: kind.to_owned(),
            partner,
            signs,
        }
    }
}

impl ComponentSpec {
    pub fn fixed(space: Space, name: &str, dim: usize) -> Self {
        Self {
            space,
            name: name.to_owned(),
            dim,
            kind: TransformKind::Fixed { signs: Vec::new() },
        }
    }

    pub fn signed(space: Space, name: &str, signs: &[i8]) -> Self {
        Self {
            space,
            name: name.to_owned(),
            dim: signs.len(),
            kind: TransformKind::Fixed {
                signs: signs.to_vec(),
            },
        }
    }

    pub fn negated(space: Space, name: &str, dim: usize) -> Self {
        Self {
            space,
            name: name.to_owned(),
            dim,
            kind: TransformKind::Negated,
        }
    }

    pub fn swap(space: Space, name: &str, dim: usize, partner: &str, sign: i8) -> Self {
        Self {
            space,
            name: name.to_owned(),
            dim,
            kind: TransformKind::Swap {
                partner: partner.to_owned(),
                signs: vec![sign; dim],
            },
        }
    }
}

/// Assembles the signed permutation described by an ordered component list.
pub fn assemble(components: &[&ComponentSpec]) -> Result<SignedPermutation, SymmetryError> {
    let mut offsets = Vec::with_capacity(components.len());
    let mut n = 0;
    for c in components {
        offsets.push(n);
        n += c.dim;
    }
    let mut target = vec![usize::MAX; n];
    let mut sign = vec![0i8; n];
    for (c, &off) in components.iter().zip(&offsets) {
        match &c.kind {
            TransformKind::Fixed { signs } => {
                if !signs.is_empty() && signs.len() != c.dim {
                    return Err(SymmetryError::Layout(format!("{}: sign count != dim", c.name)));
                }
                for d in 0..c.dim {
                    target[off + d] = off + d;
                    sign[off + d] = signs.get(d).copied().unwrap_or(1);
                }
            }
            TransformKind::Negated => {
                for d in 0..c.dim {
                    target[off + d] = off + d;
                    sign[off + d] = -1;
                }
            }
            TransformKind::Swap { partner, signs } => {
                let (pi, pc) = components
                    .iter()
                    .enumerate()
                    .find(|(_, p)| &p.name == partner)
                    .ok_or_else(|| SymmetryError::Layout(format!("{}: missing partner {partner}", c.name)))?;
                if pc.dim != c.dim {
                    return Err(SymmetryError::Layout(format!(
                        "{} and {partner} differ in dimension",
                        c.name
                    )));
                }
                if signs.len() != c.dim {
                    return Err(SymmetryError::Layout(format!("{}: sign count != dim", c.name)));
                }
                match &pc.kind {
                    TransformKind::Swap { partner: back, .. } if back == &c.name => {}
                    _ => {
                        return Err(SymmetryError::Layout(format!(
                            "{partner} does not swap back with {}",
                            c.name
                        )))
                    }
                }
                for d in 0..c.dim {
                    target[off + d] = offsets[pi] + d;
                    sign[off + d] = signs[d];
                }
            }
        }
    }
    SignedPermutation::new(target, sign)
}

/// Named decomposition of every space the mirror acts on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct LayoutProfile {
    name: String,
    components: Vec<ComponentSpec>,
    latent_size: usize,
    transforms: Transforms,
}

#[derive(Clone, Debug, PartialEq)]
struct Transforms {
    observation: SignedPermutation,
    action: SignedPermutation,
    state: SignedPermutation,
    height_map: SignedPermutation,
    latent: SignedPermutation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    name: String,
    components: Vec<ComponentSpec>,
    latent_size: usize,
}

impl TryFrom<RawProfile> for LayoutProfile {
    type Error = SymmetryError;
    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        LayoutProfile::new(raw.name, raw.components, raw.latent_size)
    }
}

impl From<LayoutProfile> for RawProfile {
    fn from(p: LayoutProfile) -> Self {
        RawProfile {
            name: p.name,
            components: p.components,
            latent_size: p.latent_size,
        }
    }
}

impl LayoutProfile {
    /// Validates the layout: even latent size and every assembled transform
    /// an involution.
    pub fn new(
        name: impl Into<String>,
        components: Vec<ComponentSpec>,
        latent_size: usize,
    ) -> Result<Self, SymmetryError> {
        if latent_size % 2 != 0 {
            return Err(SymmetryError::OddLatent(latent_size));
        }
        let build = |space: Space| -> Result<SignedPermutation, SymmetryError> {
            let parts: Vec<&ComponentSpec> = components.iter().filter(|c| c.space == space).collect();
            let names: std::collections::HashSet<&str> = parts.iter().map(|c| c.name.as_str()).collect();
            if names.len() != parts.len() {
                return Err(SymmetryError::Layout(format!("duplicate component name in {space:?}")));
            }
            let p = assemble(&parts)?;
            if !p.is_involution() {
                return Err(SymmetryError::NotInvolution(format!("{space:?}")));
            }
            Ok(p)
        };
        let transforms = Transforms {
            observation: build(Space::Observation)?,
            action: build(Space::Action)?,
            state: build(Space::State)?,
            height_map: build(Space::HeightMap)?,
            latent: SignedPermutation::regular(latent_size / 2),
        };
        Ok(Self {
            name: name.into(),
            components,
            latent_size,
            transforms,
        })
    }

    /// Same layout with a different latent width.
    pub fn with_latent_size(&self, latent_size: usize) -> Result<Self, SymmetryError> {
        Self::new(self.name.clone(), self.components.clone(), latent_size)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn latent_size(&self) -> usize {
        self.latent_size
    }

    pub fn components(&self, space: Space) -> impl Iterator<Item = &ComponentSpec> {
        self.components.iter().filter(move |c| c.space == space)
    }

    /// Offset and dimension of a named component within its space.
    pub fn locate(&self, space: Space, name: &str) -> Option<(usize, usize)> {
        let mut off = 0;
        for c in self.components(space) {
            if c.name == name {
                return Some((off, c.dim));
            }
            off += c.dim;
        }
        None
    }

    pub fn transform(&self, space: Space) -> &SignedPermutation {
        match space {
            Space::Observation => &self.transforms.observation,
            Space::Action => &self.transforms.action,
            Space::State => &self.transforms.state,
            Space::HeightMap => &self.transforms.height_map,
        }
    }

    pub fn f_o(&self) -> &SignedPermutation {
        &self.transforms.observation
    }

    pub fn f_a(&self) -> &SignedPermutation {
        &self.transforms.action
    }

    pub fn f_s(&self) -> &SignedPermutation {
        &self.transforms.state
    }

    pub fn f_h(&self) -> &SignedPermutation {
        &self.transforms.height_map
    }

    pub fn f_z(&self) -> &SignedPermutation {
        &self.transforms.latent
    }

    pub fn obs_dim(&self) -> usize {
        self.f_o().len()
    }

    pub fn action_dim(&self) -> usize {
        self.f_a().len()
    }

    pub fn height_dim(&self) -> usize {
        self.f_h().len()
    }

    pub fn state_dim(&self) -> usize {
        self.f_s().len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SymmetryError> {
        serde_json::from_str(s).map_err(|e| SymmetryError::Layout(e.to_string()))
    }
}

fn joint_blocks(space: Space, prefix: &str) -> Vec<ComponentSpec> {
    let p = |s: &str| format!("{prefix}_{s}");
    vec![
        ComponentSpec::swap(space, &p("left_arm"), 7, &p("right_arm"), -1),
        ComponentSpec::swap(space, &p("right_arm"), 7, &p("left_arm"), -1),
        ComponentSpec::swap(space, &p("left_leg"), 6, &p("right_leg"), -1),
        ComponentSpec::swap(space, &p("right_leg"), 6, &p("left_leg"), -1),
        ComponentSpec::fixed(space, &p("waist"), 1),
    ]
}

/// Height-map columns: 187 points as 17 rows × 11 lateral columns; the five
/// outermost columns on each side form the left/right blocks.
pub const G1_HEIGHT_LEFT: usize = 85;
pub const G1_HEIGHT_MIDDLE: usize = 17;
pub const G1_HEIGHT_RIGHT: usize = 85;

/// The 27-joint humanoid layout: 92 observation dims, 27 actions, 187
/// height-map points and a 64-wide latent.
pub fn build_g1_profile() -> LayoutProfile {
    use Space::*;
    let mut c = vec![
        ComponentSpec::signed(Observation, "base_ang_vel", &[-1, 1, -1]),
        ComponentSpec::signed(Observation, "projected_gravity", &[1, -1, 1]),
        ComponentSpec::signed(Observation, "commands", &[1, -1, -1]),
    ];
    c.extend(joint_blocks(Observation, "dof_pos"));
    c.extend(joint_blocks(Observation, "dof_vel"));
    c.extend(joint_blocks(Observation, "last_action"));
    c.push(ComponentSpec::negated(Observation, "phase", 2));
    c.extend(joint_blocks(Action, "action"));
    c.push(ComponentSpec::swap(HeightMap, "height_left", G1_HEIGHT_LEFT, "height_right", 1));
    c.push(ComponentSpec::fixed(HeightMap, "height_middle", G1_HEIGHT_MIDDLE));
    c.push(ComponentSpec::swap(HeightMap, "height_right", G1_HEIGHT_RIGHT, "height_left", 1));
    // Privileged state seen by the critic: terrain followed by the observation.
    let state: Vec<ComponentSpec> = c
        .iter()
        .filter(|x| matches!(x.space, HeightMap | Observation))
        .map(|x| {
            let mut s = x.clone();
            s.space = State;
            s
        })
        .collect();
    let (mut hm, obs): (Vec<_>, Vec<_>) = state.into_iter().partition(|x| x.name.starts_with("height"));
    hm.extend(obs);
    c.extend(hm);
    LayoutProfile::new("g1", c, 64).expect("g1 profile is valid")
}

/// Names of the fixed per-episode parameters carried in the toy state.
pub const TOY_EPISODE_PARAMS: [&str; 5] = [
    "kp_factor",
    "kd_factor",
    "motor_strength",
    "drag_factor",
    "action_delay",
];

/// Desk-scale layout with `k` joints per side and `m` center joints.
pub fn build_toy_profile(k: usize, m: usize) -> Result<LayoutProfile, SymmetryError> {
    use Space::*;
    if k == 0 {
        return Err(SymmetryError::Layout("toy profile needs k >= 1".into()));
    }
    let joints = |space: Space, prefix: &str| -> Vec<ComponentSpec> {
        let l = format!("{prefix}_left");
        let r = format!("{prefix}_right");
        let mut v = vec![
            ComponentSpec::swap(space, &l, k, &r, -1),
            ComponentSpec::swap(space, &r, k, &l, -1),
        ];
        if m > 0 {
            v.push(ComponentSpec::negated(space, &format!("{prefix}_center"), m));
        }
        v
    };
    let mut c = vec![
        ComponentSpec::signed(Observation, "base_velocity", &[1, -1, -1]),
        ComponentSpec::signed(Observation, "commands", &[1, -1, -1]),
    ];
    c.extend(joints(Observation, "joint_pos"));
    c.extend(joints(Observation, "joint_vel"));
    c.extend(joints(Observation, "last_action"));
    c.push(ComponentSpec::negated(Observation, "phase", 2));

    c.extend(joints(Action, "action"));

    c.push(ComponentSpec::swap(HeightMap, "drag_left", 1, "drag_right", 1));
    c.push(ComponentSpec::fixed(HeightMap, "drag_middle", 1));
    c.push(ComponentSpec::swap(HeightMap, "drag_right", 1, "drag_left", 1));

    c.push(ComponentSpec::signed(State, "position", &[1, -1]));
    c.push(ComponentSpec::negated(State, "heading", 1));
    c.push(ComponentSpec::signed(State, "base_velocity", &[1, -1, -1]));
    c.extend(joints(State, "joint_pos"));
    c.extend(joints(State, "joint_vel"));
    c.push(ComponentSpec::negated(State, "phase_clock", 2));
    c.push(ComponentSpec::signed(State, "commands", &[1, -1, -1]));
    c.push(ComponentSpec::swap(State, "drag_left", 1, "drag_right", 1));
    c.push(ComponentSpec::fixed(State, "drag_middle", 1));
    c.push(ComponentSpec::swap(State, "drag_right", 1, "drag_left", 1));
    c.extend(joints(State, "prev_action"));
    c.extend(joints(State, "prev_action2"));
    for p in TOY_EPISODE_PARAMS {
        c.push(ComponentSpec::fixed(State, p, 1));
    }
    LayoutProfile::new(format!("toy-k{k}-m{m}"), c, 32)
}
