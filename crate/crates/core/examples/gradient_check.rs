//! Reverse-mode gradients of an equivariant MLP against central finite
//! differences, over the free orbit coefficients.
//!
//! `cargo run --release --example gradient_check`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symmeq::eqnn::{Activation, EquivariantMlp};
use symmeq::numerics::{finite_difference_check, Graph, Tensor};
use symmeq::symmetry::SignedPermutation;

fn loss(net: &EquivariantMlp, x: &Tensor) -> (f64, Vec<f64>) {
    let mut g = Graph::new();
    let b = net.bind(&mut g);
    let xi = g.input(x.clone());
    let y = net.forward_graph(&b, &mut g, xi).expect("shapes match");
    let sq = g.square(y);
    let l = g.mean(sq);
    let grads = g.backward(l).expect("scalar root");
    let mut flat = Vec::new();
    for (&v, t) in b.params().iter().zip(net.parameters()) {
        flat.extend_from_slice(grads.get_or_zeros(v, t).data());
    }
    (g.value(l).item(), flat)
}

fn flatten(net: &EquivariantMlp) -> Vec<f64> {
    net.parameters().iter().flat_map(|t| t.data().to_vec()).collect()
}

fn assign(net: &mut EquivariantMlp, p: &[f64]) {
    let mut off = 0;
    for t in net.parameters_mut() {
        let n = t.len();
        t.data_mut().copy_from_slice(&p[off..off + n]);
        off += n;
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho_in = SignedPermutation::regular(2).direct_sum(&SignedPermutation::negation(1));
    let rho_out = SignedPermutation::regular(1);
    for act in [Activation::Elu, Activation::Relu] {
        let net = EquivariantMlp::equivariant(&rho_in, &[6, 6], &rho_out, act, &mut rng)?;
        let x = Tensor::matrix(4, 5, (0..20).map(|_| rng.random_range(-1.0..1.0)).collect());
        let (value, analytic) = loss(&net, &x);
        let p0 = flatten(&net);
        let f = |p: &[f64]| {
            let mut n = net.clone();
            assign(&mut n, p);
            loss(&n, &x).0
        };
        let err = finite_difference_check(f, &analytic, &p0, 1e-6)?;
        println!("{act:?}: loss {value:.6}, {} coefficients, max relative error {err:.2e}", p0.len());
    }
    Ok(())
}
