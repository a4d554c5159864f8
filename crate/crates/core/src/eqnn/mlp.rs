use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linear::{BoundLinear, EquivariantLinear, Realized};
use super::EqnnError;
use crate::numerics::{Graph, Tensor, Var};
use crate::symmetry::SignedPermutation;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Elu,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Elu => {
                if x > 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
            Activation::Relu => x.max(0.0),
        }
    }

    fn graph(self, g: &mut Graph, x: Var) -> Var {
        match self {
            Activation::Elu => g.elu(x),
            Activation::Relu => g.relu(x),
        }
    }
}

/// Stack of linear layers with a pointwise activation after every layer but
/// the last. With regular hidden representations the whole network is
/// equivariant from the first layer's input rep to the last layer's output
/// rep; with identity reps it is an ordinary dense MLP.
#[derive(Clone, Debug)]
pub struct EquivariantMlp {
    layers: Vec<EquivariantLinear>,
    activation: Activation,
}

#[derive(Clone, Debug)]
pub struct BoundMlp {
    layers: Vec<BoundLinear>,
}

impl BoundMlp {
    /// Free-parameter leaves in [`EquivariantMlp::parameters`] order.
    pub fn params(&self) -> Vec<Var> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight_param, l.bias_param])
            .collect()
    }
}

/// Dense weights cached for inference.
#[derive(Clone, Debug)]
pub struct RealizedMlp {
    layers: Vec<Realized>,
    activation: Activation,
}

impl RealizedMlp {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor, EqnnError> {
        let mut h = x.clone();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.forward(&h)?;
            if i < last {
                let act = self.activation;
                h.data_mut().iter_mut().for_each(|v| *v = act.apply(*v));
            }
        }
        Ok(h)
    }
}

impl EquivariantMlp {
    /// Builds layers between consecutive representations in `reps`,
    /// rejecting any activation on a feature whose rep carries a sign.
    pub fn from_reps<R: Rng + ?Sized>(
        reps: &[SignedPermutation],
        activation: Activation,
        rng: Option<&mut R>,
    ) -> Result<Self, EqnnError> {
        if reps.len() < 2 {
            return Err(EqnnError::Config("an MLP needs at least one layer".into()));
        }
        for (i, hidden) in reps[1..reps.len() - 1].iter().enumerate() {
            if !hidden.is_pure_permutation() {
                return Err(EqnnError::UnsafeActivation { layer: i });
            }
        }
        let mut layers = Vec::with_capacity(reps.len() - 1);
        match rng {
            Some(rng) => {
                for w in reps.windows(2) {
                    layers.push(EquivariantLinear::new(w[0].clone(), w[1].clone(), rng)?);
                }
            }
            None => {
                for w in reps.windows(2) {
                    layers.push(EquivariantLinear::zeros(w[0].clone(), w[1].clone())?);
                }
            }
        }
        Ok(Self { layers, activation })
    }

    /// Equivariant network: hidden features are copies of the 2-dimensional
    /// swap representation, so every hidden width must be even.
    pub fn equivariant<R: Rng + ?Sized>(
        in_rep: &SignedPermutation,
        hidden: &[usize],
        out_rep: &SignedPermutation,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self, EqnnError> {
        let mut reps = vec![in_rep.clone()];
        for &w in hidden {
            if w % 2 != 0 || w == 0 {
                return Err(EqnnError::OddWidth(w));
            }
            reps.push(SignedPermutation::regular(w / 2));
        }
        reps.push(out_rep.clone());
        Self::from_reps(&reps, activation, Some(rng))
    }

    /// Unconstrained dense network (identity representations everywhere).
    pub fn vanilla<R: Rng + ?Sized>(
        in_dim: usize,
        hidden: &[usize],
        out_dim: usize,
        activation: Activation,
        rng: Option<&mut R>,
    ) -> Result<Self, EqnnError> {
        let mut reps = vec![SignedPermutation::identity(in_dim)];
        reps.extend(hidden.iter().map(|&w| SignedPermutation::identity(w)));
        reps.push(SignedPermutation::identity(out_dim));
        Self::from_reps(&reps, activation, rng)
    }

    pub fn layers(&self) -> &[EquivariantLinear] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn in_rep(&self) -> &SignedPermutation {
        self.layers[0].in_rep()
    }

    pub fn out_rep(&self) -> &SignedPermutation {
        self.layers[self.layers.len() - 1].out_rep()
    }

    pub fn in_dim(&self) -> usize {
        self.in_rep().len()
    }

    pub fn out_dim(&self) -> usize {
        self.out_rep().len()
    }

    /// Hidden widths.
    pub fn widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.out_dim())
            .collect()
    }

    pub fn num_free(&self) -> usize {
        self.layers.iter().map(|l| l.num_free()).sum()
    }

    /// Weight and bias coefficient tensors, layer by layer.
    pub fn parameters(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights(), l.bias()])
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.coefficients_mut())
            .collect()
    }

    /// Largest intertwiner and bias residual over all layers.
    pub fn max_residual(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                let (w, b) = l.residuals();
                w.max(b)
            })
            .fold(0.0, f64::max)
    }

    pub fn realize(&self) -> RealizedMlp {
        RealizedMlp {
            layers: self.layers.iter().map(Realized::of).collect(),
            activation: self.activation,
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, EqnnError> {
        self.realize().forward(x)
    }

    pub fn bind(&self, g: &mut Graph) -> BoundMlp {
        BoundMlp {
            layers: self.layers.iter().map(|l| l.bind(g)).collect(),
        }
    }

    pub fn forward_graph(&self, bound: &BoundMlp, g: &mut Graph, x: Var) -> Result<Var, EqnnError> {
        let cols = g.value(x).cols();
        if cols != self.in_dim() {
            return Err(EqnnError::DimensionMismatch {
                expected: self.in_dim(),
                got: cols,
            });
        }
        let mut h = x;
        let last = bound.layers.len() - 1;
        for (i, b) in bound.layers.iter().enumerate() {
            h = EquivariantLinear::forward_graph(b, g, h);
            if i < last {
                h = self.activation.graph(g, h);
            }
        }
        Ok(h)
    }
}
