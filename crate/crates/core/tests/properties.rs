//! Randomized invariants over the public API.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symmeq::eqnn::{intertwiner_residual, Activation, EquivariantMlp};
use symmeq::metrics::{temp_s, wrap_angle};
use symmeq::numerics::Tensor;
use symmeq::rl::{gae_trajectory, normalize_advantages};
use symmeq::symmetry::{build_toy_profile, SignedPermutation};

/// Direct sum of trivial (0), sign (1) and regular (2) blocks.
fn rep(blocks: &[u8]) -> SignedPermutation {
    blocks.iter().fold(SignedPermutation::identity(0), |acc, b| match b {
        0 => acc.direct_sum(&SignedPermutation::identity(1)),
        1 => acc.direct_sum(&SignedPermutation::negation(1)),
        _ => acc.direct_sum(&SignedPermutation::regular(1)),
    })
}

fn arb_rep() -> impl Strategy<Value = SignedPermutation> {
    prop::collection::vec(0u8..3, 1..6).prop_map(|b| rep(&b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equivariant_mlp_commutes_with_the_mirror(
        rin in arb_rep(),
        rout in arb_rep(),
        hidden in prop::collection::vec(1usize..4, 0..3),
        relu in any::<bool>(),
        seed in any::<u64>(),
        xs in prop::collection::vec(-3.0f64..3.0, 40),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let widths: Vec<usize> = hidden.iter().map(|h| 2 * h).collect();
        let act = if relu { Activation::Relu } else { Activation::Elu };
        let net = EquivariantMlp::equivariant(&rin, &widths, &rout, act, &mut rng).unwrap();
        prop_assert!(net.max_residual() < 1e-12);
        for layer in net.layers() {
            let w = layer.realize_weight();
            prop_assert!(intertwiner_residual(w.data(), layer.in_rep(), layer.out_rep()) < 1e-12);
        }
        let n = rin.len();
        let x: Vec<f64> = xs.iter().cycle().take(n).copied().collect();
        let y = net.forward(&Tensor::matrix(1, n, x.clone())).unwrap();
        let ym = net.forward(&Tensor::matrix(1, n, rin.apply(&x).unwrap())).unwrap();
        let want = rout.apply(y.data()).unwrap();
        for (a, b) in want.iter().zip(ym.data()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gae_returns_are_advantages_plus_values(
        rv in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, any::<bool>()), 1..30),
        last in -5.0f64..5.0,
        gamma in 0.0f64..1.0,
        lambda in 0.0f64..=1.0,
    ) {
        let r: Vec<f64> = rv.iter().map(|x| x.0).collect();
        let mut v: Vec<f64> = rv.iter().map(|x| x.1).collect();
        v.push(last);
        let d: Vec<bool> = rv.iter().map(|x| x.2).collect();
        let est = gae_trajectory(&r, &v, &d, gamma, lambda);
        let n = r.len();
        prop_assert_eq!(est.advantages.len(), n);
        for t in 0..n {
            prop_assert!((est.returns[t] - est.advantages[t] - v[t]).abs() < 1e-12);
        }
        // With λ = 0 the advantage is the one-step TD error.
        let td = gae_trajectory(&r, &v, &d, gamma, 0.0);
        for t in 0..n {
            let boot = if d[t] { 0.0 } else { gamma * v[t + 1] };
            prop_assert!((td.advantages[t] - (r[t] + boot - v[t])).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_advantages_have_zero_mean_unit_spread(a in prop::collection::vec(-100.0f64..100.0, 2..50)) {
        let z = normalize_advantages(&a);
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9);
        let var = z.iter().map(|x| x * x).sum::<f64>() / n;
        prop_assert!(var < 1.0 + 1e-9);
    }

    #[test]
    fn wrapped_angles_stay_in_range(a in -1e4f64..1e4) {
        let w = wrap_angle(a);
        prop_assert!(w > -std::f64::consts::PI - 1e-12 && w <= std::f64::consts::PI + 1e-12);
        let k = ((a - w) / (2.0 * std::f64::consts::PI)).round();
        prop_assert!((a - w - k * 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn temporal_score_vanishes_on_mirror_periodic_actions(
        k in 1usize..4,
        m in 0usize..3,
        half in 1usize..6,
        base in prop::collection::vec(-1.0f64..1.0, 12 * 6),
    ) {
        let profile = build_toy_profile(k, m).unwrap();
        let f_a = profile.f_a();
        let dim = f_a.len();
        // a_{t+half} = F_a(a_t) makes the sequence mirror-periodic.
        let mut actions: Vec<Vec<f64>> = (0..half).map(|t| base[t * dim..(t + 1) * dim].to_vec()).collect();
        for t in half..4 * half {
            let next = f_a.apply(&actions[t - half]).unwrap();
            actions.push(next);
        }
        prop_assert!(temp_s(&actions, f_a, 2 * half).unwrap() < 1e-12);
        let mut shifted = actions.clone();
        shifted[0][0] += 1.0;
        prop_assert!(temp_s(&shifted, f_a, 2 * half).unwrap() > 0.0);
    }

    #[test]
    fn toy_profiles_are_involutions(k in 1usize..6, m in 0usize..4) {
        let p = build_toy_profile(k, m).unwrap();
        for f in [p.f_o(), p.f_a(), p.f_s(), p.f_h(), p.f_z()] {
            prop_assert!(f.is_involution());
        }
        prop_assert_eq!(p.action_dim(), 2 * k + m);
    }
}
