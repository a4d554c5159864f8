//! Parameter-sharing solution of the intertwiner constraint
//! `W · ρ_in = ρ_out · W` for signed-permutation involutions.
//!
//! The mirror acts on matrix entries by `(i, j) ↦ (σ_out(i), σ_in(j))` with
//! factor `s_out(i) · s_in(j)`; an equivariant `W` is constant (up to that
//! factor) on each orbit, and vanishes on fixed entries whose factor is `-1`.

use std::sync::Arc;

use super::EqnnError;
use crate::numerics::GatherMap;
use crate::symmetry::SignedPermutation;

/// One orbit of matrix entries tied to a shared coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct IntertwinerOrbit {
    /// `(row, col)` positions; the first carries relative sign `+1`.
    pub entries: Vec<(usize, usize)>,
    /// Relative sign per entry.
    pub signs: Vec<f64>,
    /// Size-1 orbit with relative sign `-1`: forced to zero, no coefficient.
    pub zeroed: bool,
}

impl IntertwinerOrbit {
    pub fn is_free(&self) -> bool {
        !self.zeroed
    }
}

/// Bias orbit: a set of output indices sharing one coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasOrbit {
    pub entries: Vec<usize>,
    pub signs: Vec<f64>,
    pub zeroed: bool,
}

fn check_involution(p: &SignedPermutation, which: &str) -> Result<(), EqnnError> {
    if p.is_involution() {
        Ok(())
    } else {
        Err(EqnnError::NotInvolution(which.to_owned()))
    }
}

/// Partitions all `out × in` entries into orbits of the mirror action.
pub fn solve_intertwiner_basis(
    rho_in: &SignedPermutation,
    rho_out: &SignedPermutation,
) -> Result<Vec<IntertwinerOrbit>, EqnnError> {
    check_involution(rho_in, "input")?;
    check_involution(rho_out, "output")?;
    let (m, n) = (rho_out.len(), rho_in.len());
    let mut visited = vec![false; m * n];
    let mut orbits = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if visited[i * n + j] {
                continue;
            }
            let (pi, pj) = (rho_out.target_of(i), rho_in.target_of(j));
            let rel = rho_out.sign_of(i) * rho_in.sign_of(j);
            visited[i * n + j] = true;
            if (pi, pj) == (i, j) {
                orbits.push(IntertwinerOrbit {
                    entries: vec![(i, j)],
                    signs: vec![1.0],
                    zeroed: rel < 0.0,
                });
            } else {
                visited[pi * n + pj] = true;
                orbits.push(IntertwinerOrbit {
                    entries: vec![(i, j), (pi, pj)],
                    signs: vec![1.0, rel],
                    zeroed: false,
                });
            }
        }
    }
    Ok(orbits)
}

/// Orbits of the constraint `b = ρ_out · b`.
pub fn project_bias(rho_out: &SignedPermutation) -> Result<Vec<BiasOrbit>, EqnnError> {
    check_involution(rho_out, "output")?;
    let n = rho_out.len();
    let mut visited = vec![false; n];
    let mut orbits = Vec::new();
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let t = rho_out.target_of(i);
        let s = rho_out.sign_of(i);
        if t == i {
            orbits.push(BiasOrbit {
                entries: vec![i],
                signs: vec![1.0],
                zeroed: s < 0.0,
            });
        } else {
            visited[t] = true;
            orbits.push(BiasOrbit {
                entries: vec![i, t],
                signs: vec![1.0, s],
                zeroed: false,
            });
        }
    }
    Ok(orbits)
}

/// Gather map realizing a `[rows, cols]` matrix from free orbit
/// coefficients, numbered in orbit order skipping zeroed orbits.
pub fn weight_gather_map(orbits: &[IntertwinerOrbit], rows: usize, cols: usize) -> (Arc<GatherMap>, usize) {
    let mut source = vec![None; rows * cols];
    let mut sign = vec![0.0; rows * cols];
    let mut k = 0;
    for orbit in orbits.iter().filter(|o| o.is_free()) {
        for (&(i, j), &s) in orbit.entries.iter().zip(&orbit.signs) {
            source[i * cols + j] = Some(k);
            sign[i * cols + j] = s;
        }
        k += 1;
    }
    (
        Arc::new(GatherMap {
            shape: vec![rows, cols],
            source,
            sign,
        }),
        k,
    )
}

pub fn bias_gather_map(orbits: &[BiasOrbit], len: usize) -> (Arc<GatherMap>, usize) {
    let mut source = vec![None; len];
    let mut sign = vec![0.0; len];
    let mut k = 0;
    for orbit in orbits.iter().filter(|o| !o.zeroed) {
        for (&i, &s) in orbit.entries.iter().zip(&orbit.signs) {
            source[i] = Some(k);
            sign[i] = s;
        }
        k += 1;
    }
    (
        Arc::new(GatherMap {
            shape: vec![len],
            source,
            sign,
        }),
        k,
    )
}

/// `max |W ρ_in − ρ_out W|` for a row-major `[out, in]` matrix.
pub fn intertwiner_residual(w: &[f64], rho_in: &SignedPermutation, rho_out: &SignedPermutation) -> f64 {
    let (m, n) = (rho_out.len(), rho_in.len());
    // ρ[t(c), c] = s(c), so (W ρ_in)[a, c] = W[a, t_in(c)] s_in(c) and
    // (ρ_out W)[t_out(a), b] = s_out(a) W[a, b].
    let mut left = vec![0.0; m * n];
    let mut right = vec![0.0; m * n];
    for a in 0..m {
        for b in 0..n {
            left[a * n + b] = w[a * n + rho_in.target_of(b)] * rho_in.sign_of(b);
            right[rho_out.target_of(a) * n + b] = rho_out.sign_of(a) * w[a * n + b];
        }
    }
    left.iter()
        .zip(&right)
        .fold(0.0, |acc, (l, r)| acc.max((l - r).abs()))
}

/// `max |b − ρ_out b|`.
pub fn bias_residual(b: &[f64], rho_out: &SignedPermutation) -> f64 {
    let pb = rho_out.apply(b).expect("bias length");
    b.iter().zip(&pb).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(orbits: &[IntertwinerOrbit]) -> usize {
        orbits.iter().filter(|o| o.is_free()).count()
    }

    #[test]
    fn regular_to_regular() {
        let r = SignedPermutation::regular(1);
        let orbits = solve_intertwiner_basis(&r, &r).unwrap();
        assert_eq!(free(&orbits), 2);
        let (map, k) = weight_gather_map(&orbits, 2, 2);
        assert_eq!(k, 2);
        // a·I + b·swap
        let w = map.apply(&[3.0, 5.0]);
        assert_eq!(w.data(), &[3.0, 5.0, 5.0, 3.0]);
    }

    #[test]
    fn sign_to_regular() {
        let sign = SignedPermutation::negation(1);
        let r = SignedPermutation::regular(1);
        let orbits = solve_intertwiner_basis(&sign, &r).unwrap();
        assert_eq!(free(&orbits), 1);
        let (map, _) = weight_gather_map(&orbits, 2, 1);
        assert_eq!(map.apply(&[2.0]).data(), &[2.0, -2.0]);
    }

    #[test]
    fn trivial_to_sign_is_zero() {
        let orbits =
            solve_intertwiner_basis(&SignedPermutation::identity(1), &SignedPermutation::negation(1)).unwrap();
        assert_eq!(free(&orbits), 0);
        assert!(orbits[0].zeroed);
    }

    #[test]
    fn bias_cases() {
        let swap = project_bias(&SignedPermutation::regular(1)).unwrap();
        assert_eq!(swap.len(), 1);
        let (map, k) = bias_gather_map(&swap, 2);
        assert_eq!(k, 1);
        assert_eq!(map.apply(&[1.5]).data(), &[1.5, 1.5]);
        let neg = project_bias(&SignedPermutation::negation(1)).unwrap();
        assert!(neg[0].zeroed);
        let id = project_bias(&SignedPermutation::identity(3)).unwrap();
        assert_eq!(id.iter().filter(|o| !o.zeroed).count(), 3);
    }

    #[test]
    fn rejects_non_involution() {
        let cyc = SignedPermutation::new(vec![1, 2, 0], vec![1, 1, 1]).unwrap();
        assert!(solve_intertwiner_basis(&cyc, &SignedPermutation::identity(1)).is_err());
        assert!(project_bias(&cyc).is_err());
    }

    #[test]
    fn orbits_partition_entries() {
        let a = SignedPermutation::new(vec![2, 1, 0], vec![-1, -1, -1]).unwrap();
        let b = SignedPermutation::regular(2);
        let orbits = solve_intertwiner_basis(&a, &b).unwrap();
        let mut seen = vec![0; 12];
        for o in &orbits {
            assert!(o.entries.len() == 1 || o.entries.len() == 2);
            for &(i, j) in &o.entries {
                seen[i * 3 + j] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }
}
