//! Actor (history encoder, observation decoder, policy network, Gaussian
//! head) and critic built from [`EquivariantMlp`]s.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, BoundMlp, EquivariantMlp, RealizedMlp};
use super::EqnnError;
use crate::numerics::{GatherMap, Graph, Tensor, Var};
use crate::symmetry::{LayoutProfile, SignedPermutation};

/// Layer widths for every network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkWidths {
    /// Policy hidden widths.
    pub actor: Vec<usize>,
    /// Critic hidden widths.
    pub critic: Vec<usize>,
    /// Encoder widths; the last entry is the latent size.
    pub encoder: Vec<usize>,
}

impl NetworkWidths {
    pub fn toy() -> Self {
        Self {
            actor: vec![64, 64],
            critic: vec![64, 64],
            encoder: vec![64, 32],
        }
    }

    /// Table-scale widths for the 27-joint humanoid.
    pub fn g1() -> Self {
        Self {
            actor: vec![512, 256, 128],
            critic: vec![512, 256, 128],
            encoder: vec![512, 256, 128, 64],
        }
    }

    pub fn latent_size(&self) -> usize {
        *self.encoder.last().expect("encoder widths non-empty")
    }

    /// Decoder widths: the encoder's, reversed (latent first).
    pub fn decoder(&self) -> Vec<usize> {
        self.encoder.iter().rev().copied().collect()
    }
}

/// Diagonal Gaussian head. Log standard deviations are stored once per orbit
/// of the action permutation, so mirrored joints share one value.
#[derive(Clone, Debug)]
pub struct GaussianPolicyHead {
    params: Tensor,
    map: Arc<GatherMap>,
}

impl GaussianPolicyHead {
    /// `tie` shares one entry per swapped action pair; otherwise every
    /// dimension is free.
    pub fn new(action_rep: &SignedPermutation, tie: bool, init_log_std: f64) -> Self {
        let n = action_rep.len();
        let mut source = vec![None; n];
        let mut k = 0;
        for i in 0..n {
            if source[i].is_some() {
                continue;
            }
            source[i] = Some(k);
            let t = action_rep.target_of(i);
            if tie && source[t].is_none() {
                source[t] = Some(k);
            }
            k += 1;
        }
        Self {
            params: Tensor::filled(&[k], init_log_std),
            map: Arc::new(GatherMap {
                shape: vec![n],
                source,
                sign: vec![1.0; n],
            }),
        }
    }

    pub fn params(&self) -> &Tensor {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Tensor {
        &mut self.params
    }

    /// Per-dimension log standard deviation.
    pub fn log_std(&self) -> Vec<f64> {
        self.map.apply(self.params.data()).into_data()
    }

    pub fn std(&self) -> Vec<f64> {
        self.log_std().into_iter().map(f64::exp).collect()
    }

    /// Draws `a ~ N(μ, diag σ²)` and returns it with its log-density.
    pub fn sample_action<R: Rng + ?Sized>(&self, mean: &[f64], rng: &mut R) -> Result<(Vec<f64>, f64), EqnnError> {
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(EqnnError::NonFinite("action mean"));
        }
        if mean.len() != self.map.shape[0] {
            return Err(EqnnError::DimensionMismatch {
                expected: self.map.shape[0],
                got: mean.len(),
            });
        }
        let std = self.std();
        let a: Vec<f64> = mean
            .iter()
            .zip(&std)
            .map(|(m, s)| {
                let eps: f64 = StandardNormal.sample(rng);
                m + s * eps
            })
            .collect();
        let lp = gaussian_log_prob(mean, &self.log_std(), &a);
        Ok((a, lp))
    }

    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        gaussian_log_prob(mean, &self.log_std(), action)
    }

    /// Entropy of the diagonal Gaussian.
    pub fn entropy(&self) -> f64 {
        self.log_std()
            .iter()
            .map(|l| l + 0.5 * (2.0 * PI * std::f64::consts::E).ln())
            .sum()
    }

    pub fn bind(&self, g: &mut Graph) -> (Var, Var) {
        let p = g.param(self.params.clone());
        let full = g.gather(p, Arc::clone(&self.map));
        (p, full)
    }
}

/// `Σ_i −(a_i−μ_i)²/(2σ_i²) − log σ_i − ½ log 2π`.
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, l), a)| {
            let z = (a - m) * (-l).exp();
            -0.5 * z * z - l - 0.5 * (2.0 * PI).ln()
        })
        .sum()
}

/// Per-row log-density of `actions` under `N(mean, diag exp(log_std)²)` as
/// a `[batch, 1]` graph node.
pub fn gaussian_log_prob_graph(g: &mut Graph, mean: Var, log_std: Var, actions: Var) -> Var {
    let diff = g.sub(actions, mean);
    let neg = g.neg(log_std);
    let inv_std = g.exp(neg);
    let z = g.mul_row(diff, inv_std);
    let z2 = g.square(z);
    let half = g.scale(z2, -0.5);
    let quad = g.row_sum(half);
    let sum_log_std = g.sum(log_std);
    let neg_sum = g.neg(sum_log_std);
    let out = g.add_row(quad, neg_sum);
    let dims = g.value(log_std).len() as f64;
    g.add_scalar(out, -0.5 * dims * (2.0 * PI).ln())
}

/// History encoder, observation decoder, policy network and Gaussian head.
#[derive(Clone, Debug)]
pub struct Actor {
    obs_dim: usize,
    history_rows: usize,
    equivariant: bool,
    pub encoder: EquivariantMlp,
    pub decoder: EquivariantMlp,
    pub policy: EquivariantMlp,
    pub head: GaussianPolicyHead,
}

/// Graph handles produced by [`Actor::forward_graph`].
#[derive(Clone, Copy, Debug)]
pub struct ActorOutputs {
    pub latent: Var,
    pub mean: Var,
    pub reconstruction: Var,
    pub log_std: Var,
}

#[derive(Clone, Debug)]
pub struct BoundActor {
    encoder: BoundMlp,
    decoder: BoundMlp,
    policy: BoundMlp,
    log_std_param: Var,
    log_std: Var,
}

impl BoundActor {
    /// Leaves in [`Actor::parameters`] order.
    pub fn params(&self) -> Vec<Var> {
        let mut v = self.encoder.params();
        v.extend(self.decoder.params());
        v.extend(self.policy.params());
        v.push(self.log_std_param);
        v
    }
}

/// Cached dense actor for rollouts.
#[derive(Clone, Debug)]
pub struct RealizedActor {
    obs_dim: usize,
    history_rows: usize,
    encoder: RealizedMlp,
    policy: RealizedMlp,
}

impl RealizedActor {
    /// Deterministic action means for `[batch, rows*obs]` histories.
    pub fn mean(&self, histories: &Tensor) -> Result<Tensor, EqnnError> {
        let z = self.encoder.forward(histories)?;
        let input = concat_current(histories, &z, self.obs_dim, self.history_rows);
        self.policy.forward(&input)
    }
}

/// `(o_t, z)` rows where `o_t` is the last observation of each history.
fn concat_current(histories: &Tensor, z: &Tensor, obs_dim: usize, rows: usize) -> Tensor {
    let batch = histories.rows();
    let zw = z.cols();
    let mut data = Vec::with_capacity(batch * (obs_dim + zw));
    for r in 0..batch {
        data.extend_from_slice(&histories.row(r)[(rows - 1) * obs_dim..]);
        data.extend_from_slice(z.row(r));
    }
    Tensor::matrix(batch, obs_dim + zw, data)
}

impl Actor {
    /// `history_len` is `h`: the encoder reads `h + 1` stacked observations.
    pub fn new<R: Rng + ?Sized>(
        profile: &LayoutProfile,
        history_len: usize,
        widths: &NetworkWidths,
        activation: Activation,
        equivariant: bool,
        init_log_std: f64,
        rng: &mut R,
    ) -> Result<Self, EqnnError> {
        let latent = widths.latent_size();
        if equivariant && latent != profile.latent_size() {
            return Err(EqnnError::Config(format!(
                "encoder latent {latent} != profile latent {}",
                profile.latent_size()
            )));
        }
        let rows = history_len + 1;
        let obs = profile.obs_dim();
        let enc_hidden = &widths.encoder[..widths.encoder.len() - 1];
        let dec = widths.decoder();
        let dec_hidden = &dec[1..];
        let (encoder, decoder, policy) = if equivariant {
            let f_o = profile.f_o();
            let f_z = SignedPermutation::regular(latent / 2);
            (
                EquivariantMlp::equivariant(&f_o.repeat(rows), enc_hidden, &f_z, activation, rng)?,
                EquivariantMlp::equivariant(&f_z, dec_hidden, f_o, activation, rng)?,
                EquivariantMlp::equivariant(&f_o.direct_sum(&f_z), &widths.actor, profile.f_a(), activation, rng)?,
            )
        } else {
            let a = profile.action_dim();
            (
                EquivariantMlp::vanilla(rows * obs, enc_hidden, latent, activation, Some(&mut *rng))?,
                EquivariantMlp::vanilla(latent, dec_hidden, obs, activation, Some(&mut *rng))?,
                EquivariantMlp::vanilla(obs + latent, &widths.actor, a, activation, Some(&mut *rng))?,
            )
        };
        Ok(Self {
            obs_dim: obs,
            history_rows: rows,
            equivariant,
            encoder,
            decoder,
            policy,
            head: GaussianPolicyHead::new(profile.f_a(), equivariant, init_log_std),
        })
    }

    /// Reassembles an actor from its networks (checkpoint loading).
    pub fn from_parts(
        obs_dim: usize,
        history_rows: usize,
        equivariant: bool,
        encoder: EquivariantMlp,
        decoder: EquivariantMlp,
        policy: EquivariantMlp,
        head: GaussianPolicyHead,
    ) -> Self {
        Self {
            obs_dim,
            history_rows,
            equivariant,
            encoder,
            decoder,
            policy,
            head,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn history_rows(&self) -> usize {
        self.history_rows
    }

    pub fn history_width(&self) -> usize {
        self.obs_dim * self.history_rows
    }

    pub fn latent_size(&self) -> usize {
        self.encoder.out_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.policy.out_dim()
    }

    pub fn is_equivariant(&self) -> bool {
        self.equivariant
    }

    fn check_width(&self, x: &Tensor, expected: usize) -> Result<(), EqnnError> {
        if x.cols() != expected || x.ndim() != 2 {
            return Err(EqnnError::DimensionMismatch {
                expected,
                got: x.cols(),
            });
        }
        Ok(())
    }

    /// Latent features for `[batch, rows*obs]` flattened histories.
    pub fn encode(&self, histories: &Tensor) -> Result<Tensor, EqnnError> {
        self.check_width(histories, self.history_width())?;
        self.encoder.forward(histories)
    }

    /// Encodes one `[rows, obs]` history matrix.
    pub fn encode_history(&self, history: &Tensor) -> Result<Tensor, EqnnError> {
        if history.rows() != self.history_rows || history.cols() != self.obs_dim {
            return Err(EqnnError::DimensionMismatch {
                expected: self.history_width(),
                got: history.len(),
            });
        }
        let flat = Tensor::matrix(1, self.history_width(), history.data().to_vec());
        self.encode(&flat)
    }

    /// Predicted next observation from latent features.
    pub fn decode(&self, z: &Tensor) -> Result<Tensor, EqnnError> {
        self.check_width(z, self.latent_size())?;
        self.decoder.forward(z)
    }

    /// Policy mean from the current observation and latent features.
    pub fn policy_mean(&self, obs: &Tensor, z: &Tensor) -> Result<Tensor, EqnnError> {
        self.check_width(obs, self.obs_dim)?;
        self.check_width(z, self.latent_size())?;
        if obs.rows() != z.rows() {
            return Err(EqnnError::DimensionMismatch {
                expected: obs.rows(),
                got: z.rows(),
            });
        }
        let mut data = Vec::with_capacity(obs.rows() * (obs.cols() + z.cols()));
        for r in 0..obs.rows() {
            data.extend_from_slice(obs.row(r));
            data.extend_from_slice(z.row(r));
        }
        self.policy
            .forward(&Tensor::matrix(obs.rows(), obs.cols() + z.cols(), data))
    }

    /// Deterministic action means for flattened histories.
    pub fn mean(&self, histories: &Tensor) -> Result<Tensor, EqnnError> {
        self.check_width(histories, self.history_width())?;
        self.realize().mean(histories)
    }

    pub fn realize(&self) -> RealizedActor {
        RealizedActor {
            obs_dim: self.obs_dim,
            history_rows: self.history_rows,
            encoder: self.encoder.realize(),
            policy: self.policy.realize(),
        }
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut v = self.encoder.parameters();
        v.extend(self.decoder.parameters());
        v.extend(self.policy.parameters());
        v.push(self.head.params());
        v
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = self.encoder.parameters_mut();
        v.extend(self.decoder.parameters_mut());
        v.extend(self.policy.parameters_mut());
        v.push(self.head.params_mut());
        v
    }

    pub fn max_residual(&self) -> f64 {
        self.encoder
            .max_residual()
            .max(self.decoder.max_residual())
            .max(self.policy.max_residual())
    }

    pub fn bind(&self, g: &mut Graph) -> BoundActor {
        let encoder = self.encoder.bind(g);
        let decoder = self.decoder.bind(g);
        let policy = self.policy.bind(g);
        let (log_std_param, log_std) = self.head.bind(g);
        BoundActor {
            encoder,
            decoder,
            policy,
            log_std_param,
            log_std,
        }
    }

    /// Full actor pass on a `[batch, rows*obs]` history node.
    pub fn forward_graph(&self, b: &BoundActor, g: &mut Graph, histories: Var) -> Result<ActorOutputs, EqnnError> {
        let width = g.value(histories).cols();
        if width != self.history_width() {
            return Err(EqnnError::DimensionMismatch {
                expected: self.history_width(),
                got: width,
            });
        }
        let latent = self.encoder.forward_graph(&b.encoder, g, histories)?;
        let reconstruction = self.decoder.forward_graph(&b.decoder, g, latent)?;
        let current = g.slice_cols(histories, width - self.obs_dim, width);
        let input = g.concat_cols(&[current, latent]);
        let mean = self.policy.forward_graph(&b.policy, g, input)?;
        Ok(ActorOutputs {
            latent,
            mean,
            reconstruction,
            log_std: b.log_std,
        })
    }

    /// Deterministic mean only (for the symmetry regularizer).
    pub fn mean_graph(&self, b: &BoundActor, g: &mut Graph, histories: Var) -> Result<Var, EqnnError> {
        let width = g.value(histories).cols();
        let latent = self.encoder.forward_graph(&b.encoder, g, histories)?;
        let current = g.slice_cols(histories, width - self.obs_dim, width);
        let input = g.concat_cols(&[current, latent]);
        self.policy.forward_graph(&b.policy, g, input)
    }
}

/// Value network `V(H, o)` reading the terrain strip and the current
/// observation.
#[derive(Clone, Debug)]
pub struct Critic {
    pub net: EquivariantMlp,
    height_dim: usize,
    obs_dim: usize,
    invariant: bool,
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(
        profile: &LayoutProfile,
        hidden: &[usize],
        activation: Activation,
        invariant: bool,
        rng: &mut R,
    ) -> Result<Self, EqnnError> {
        let (hd, od) = (profile.height_dim(), profile.obs_dim());
        let net = if invariant {
            let in_rep = profile.f_h().direct_sum(profile.f_o());
            EquivariantMlp::equivariant(&in_rep, hidden, &SignedPermutation::identity(1), activation, rng)?
        } else {
            EquivariantMlp::vanilla(hd + od, hidden, 1, activation, Some(rng))?
        };
        Ok(Self {
            net,
            height_dim: hd,
            obs_dim: od,
            invariant,
        })
    }

    pub fn from_net(net: EquivariantMlp, height_dim: usize, obs_dim: usize, invariant: bool) -> Self {
        Self {
            net,
            height_dim,
            obs_dim,
            invariant,
        }
    }

    pub fn is_invariant(&self) -> bool {
        self.invariant
    }

    pub fn height_dim(&self) -> usize {
        self.height_dim
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    /// Values for `[batch, H]` terrain and `[batch, obs]` observations.
    pub fn value(&self, heights: &Tensor, obs: &Tensor) -> Result<Vec<f64>, EqnnError> {
        if heights.cols() != self.height_dim || obs.cols() != self.obs_dim || heights.rows() != obs.rows() {
            return Err(EqnnError::DimensionMismatch {
                expected: self.height_dim + self.obs_dim,
                got: heights.cols() + obs.cols(),
            });
        }
        let mut data = Vec::with_capacity(obs.rows() * (self.height_dim + self.obs_dim));
        for r in 0..obs.rows() {
            data.extend_from_slice(heights.row(r));
            data.extend_from_slice(obs.row(r));
        }
        let x = Tensor::matrix(obs.rows(), self.height_dim + self.obs_dim, data);
        Ok(self.net.forward(&x)?.into_data())
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        self.net.parameters()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.net.parameters_mut()
    }

    pub fn bind(&self, g: &mut Graph) -> BoundMlp {
        self.net.bind(g)
    }

    /// `[batch, 1]` value node from `[batch, H + obs]` inputs.
    pub fn forward_graph(&self, b: &BoundMlp, g: &mut Graph, inputs: Var) -> Result<Var, EqnnError> {
        self.net.forward_graph(b, g, inputs)
    }
}
