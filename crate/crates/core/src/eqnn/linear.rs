use std::sync::Arc;

use rand::Rng;

use super::intertwiner::{
    bias_gather_map, bias_residual, intertwiner_residual, project_bias, solve_intertwiner_basis, weight_gather_map,
    BiasOrbit, IntertwinerOrbit,
};
use super::EqnnError;
use crate::numerics::{GatherMap, Graph, Tensor, Var};
use crate::symmetry::SignedPermutation;

/// Linear layer whose weight lives in the intertwiner space of
/// `(in_rep, out_rep)`. Only the free orbit coefficients are stored; the
/// dense weight is realized on demand.
#[derive(Clone, Debug)]
pub struct EquivariantLinear {
    in_rep: SignedPermutation,
    out_rep: SignedPermutation,
    weight_orbits: Vec<IntertwinerOrbit>,
    bias_orbits: Vec<BiasOrbit>,
    weight_map: Arc<GatherMap>,
    bias_map: Arc<GatherMap>,
    weights: Tensor,
    bias: Tensor,
}

/// Graph handles for one bound layer.
#[derive(Clone, Copy, Debug)]
pub struct BoundLinear {
    pub weight_param: Var,
    pub bias_param: Var,
    pub weight: Var,
    pub bias: Var,
}

impl EquivariantLinear {
    /// Zero-initialized layer.
    pub fn zeros(in_rep: SignedPermutation, out_rep: SignedPermutation) -> Result<Self, EqnnError> {
        let weight_orbits = solve_intertwiner_basis(&in_rep, &out_rep)?;
        let bias_orbits = project_bias(&out_rep)?;
        let (weight_map, nw) = weight_gather_map(&weight_orbits, out_rep.len(), in_rep.len());
        let (bias_map, nb) = bias_gather_map(&bias_orbits, out_rep.len());
        Ok(Self {
            in_rep,
            out_rep,
            weight_orbits,
            bias_orbits,
            weight_map,
            bias_map,
            weights: Tensor::zeros(&[nw]),
            bias: Tensor::zeros(&[nb]),
        })
    }

    /// Coefficients uniform in `±1/√fan_in`, so every realized entry has the
    /// usual fan-in-scaled uniform marginal.
    pub fn new<R: Rng + ?Sized>(
        in_rep: SignedPermutation,
        out_rep: SignedPermutation,
        rng: &mut R,
    ) -> Result<Self, EqnnError> {
        let mut layer = Self::zeros(in_rep, out_rep)?;
        let bound = 1.0 / (layer.in_dim().max(1) as f64).sqrt();
        for w in layer.weights.data_mut() {
            *w = rng.random_range(-bound..bound);
        }
        for b in layer.bias.data_mut() {
            *b = rng.random_range(-bound..bound);
        }
        Ok(layer)
    }

    pub fn in_rep(&self) -> &SignedPermutation {
        &self.in_rep
    }

    pub fn out_rep(&self) -> &SignedPermutation {
        &self.out_rep
    }

    pub fn in_dim(&self) -> usize {
        self.in_rep.len()
    }

    pub fn out_dim(&self) -> usize {
        self.out_rep.len()
    }

    pub fn weight_orbits(&self) -> &[IntertwinerOrbit] {
        &self.weight_orbits
    }

    pub fn bias_orbits(&self) -> &[BiasOrbit] {
        &self.bias_orbits
    }

    /// Free weight plus bias coefficients.
    pub fn num_free(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn bias(&self) -> &Tensor {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut Tensor {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut Tensor {
        &mut self.bias
    }

    /// Weight and bias coefficients, mutably.
    pub fn coefficients_mut(&mut self) -> [&mut Tensor; 2] {
        [&mut self.weights, &mut self.bias]
    }

    /// Dense `[out, in]` weight.
    pub fn realize_weight(&self) -> Tensor {
        self.weight_map.apply(self.weights.data())
    }

    pub fn realize_bias(&self) -> Tensor {
        self.bias_map.apply(self.bias.data())
    }

    /// `(max |Wρ_in − ρ_out W|, max |b − ρ_out b|)` of the realized layer.
    pub fn residuals(&self) -> (f64, f64) {
        (
            intertwiner_residual(self.realize_weight().data(), &self.in_rep, &self.out_rep),
            bias_residual(self.realize_bias().data(), &self.out_rep),
        )
    }

    /// `x · Wᵀ + b` for a `[batch, in]` matrix.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor, EqnnError> {
        Realized::of(self).forward(x)
    }

    pub fn bind(&self, g: &mut Graph) -> BoundLinear {
        let weight_param = g.param(self.weights.clone());
        let bias_param = g.param(self.bias.clone());
        let weight = g.gather(weight_param, Arc::clone(&self.weight_map));
        let bias = g.gather(bias_param, Arc::clone(&self.bias_map));
        BoundLinear {
            weight_param,
            bias_param,
            weight,
            bias,
        }
    }

    pub fn forward_graph(bound: &BoundLinear, g: &mut Graph, x: Var) -> Var {
        let y = g.matmul_t(x, bound.weight);
        g.add_row(y, bound.bias)
    }
}

/// Dense weights and bias cached for repeated inference.
#[derive(Clone, Debug)]
pub struct Realized {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Realized {
    pub fn of(layer: &EquivariantLinear) -> Self {
        Self {
            weight: layer.realize_weight(),
            bias: layer.realize_bias(),
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, EqnnError> {
        let (out, inp) = (self.weight.rows(), self.weight.cols());
        if x.cols() != inp || x.ndim() != 2 {
            return Err(EqnnError::DimensionMismatch {
                expected: inp,
                got: x.cols(),
            });
        }
        let rows = x.rows();
        let mut data = Vec::with_capacity(rows * out);
        for _ in 0..rows {
            data.extend_from_slice(self.bias.data());
        }
        crate::numerics::gemm_into(rows, inp, out, x.data(), self.weight.data(), &mut data);
        Ok(Tensor::matrix(rows, out, data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn realized_layer_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rin = SignedPermutation::new(vec![1, 0, 2], vec![-1, -1, -1]).unwrap();
        let rout = SignedPermutation::regular(2);
        for _ in 0..50 {
            let layer = EquivariantLinear::new(rin.clone(), rout.clone(), &mut rng).unwrap();
            let (rw, rb) = layer.residuals();
            assert!(rw < 1e-12 && rb < 1e-12);
        }
        let layer = EquivariantLinear::new(rin.clone(), rout.clone(), &mut rng).unwrap();
        assert!(layer.num_free() < 3 * 4 + 4);
        let x = Tensor::matrix(1, 3, vec![0.3, -1.2, 0.8]);
        let fx = rin.apply_rows(&x).unwrap();
        let y = layer.forward(&x).unwrap();
        let yf = layer.forward(&fx).unwrap();
        assert!(rout.apply_rows(&y).unwrap().max_abs_diff(&yf) < 1e-12);
    }

    #[test]
    fn graph_matches_plain_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layer =
            EquivariantLinear::new(SignedPermutation::negation(2), SignedPermutation::regular(2), &mut rng).unwrap();
        let x = Tensor::matrix(2, 2, vec![0.1, 0.2, -0.3, 0.4]);
        let mut g = Graph::new();
        let b = layer.bind(&mut g);
        let xv = g.input(x.clone());
        let y = EquivariantLinear::forward_graph(&b, &mut g, xv);
        assert!(g.value(y).max_abs_diff(&layer.forward(&x).unwrap()) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let layer = EquivariantLinear::zeros(SignedPermutation::identity(3), SignedPermutation::identity(2)).unwrap();
        assert!(layer.forward(&Tensor::matrix(1, 2, vec![0.0, 0.0])).is_err());
    }
}
