use serde::{Deserialize, Serialize};

use crate::symmetry::SignedPermutation;

/// Running mean/variance observation normalizer whose statistics are kept
/// mirror-symmetric: `mean = F(mean)` and variances equal across swapped
/// pairs, so normalization commutes with `F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsNormalizer {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: f64,
    pub clip: f64,
    transform: SignedPermutation,
}

impl ObsNormalizer {
    pub fn new(transform: SignedPermutation, clip: f64) -> Self {
        let n = transform.len();
        Self {
            mean: vec![0.0; n],
            var: vec![1.0; n],
            count: 0.0,
            clip,
            transform,
        }
    }

    /// Merges a batch of rows into the running statistics, then symmetrizes.
    pub fn update(&mut self, rows: &[Vec<f64>]) {
        if rows.is_empty() {
            return;
        }
        let n = self.mean.len();
        let b = rows.len() as f64;
        let mut bm = vec![0.0; n];
        for r in rows {
            for (m, v) in bm.iter_mut().zip(r) {
                *m += v / b;
            }
        }
        let mut bv = vec![0.0; n];
        for r in rows {
            for ((s, v), m) in bv.iter_mut().zip(r).zip(&bm) {
                *s += (v - m) * (v - m) / b;
            }
        }
        let total = self.count + b;
        for i in 0..n {
            let delta = bm[i] - self.mean[i];
            let m2 = self.var[i] * self.count + bv[i] * b + delta * delta * self.count * b / total;
            self.mean[i] += delta * b / total;
            self.var[i] = m2 / total;
        }
        self.count = total;
        self.symmetrize();
    }

    /// Averages the statistics with their mirror images.
    pub fn symmetrize(&mut self) {
        let t = &self.transform;
        let mirrored_mean = t.apply(&self.mean).expect("normalizer width");
        let abs = SignedPermutation::new(t.target().to_vec(), vec![1; t.len()]).expect("valid permutation");
        let mirrored_var = abs.apply(&self.var).expect("normalizer width");
        for i in 0..self.mean.len() {
            self.mean[i] = (self.mean[i] + mirrored_mean[i]) / 2.0;
            self.var[i] = (self.var[i] + mirrored_var[i]) / 2.0;
        }
    }

    pub fn normalize(&self, obs: &[f64]) -> Vec<f64> {
        obs.iter()
            .zip(self.mean.iter().zip(&self.var))
            .map(|(o, (m, v))| ((o - m) / (v + 1e-8).sqrt()).clamp(-self.clip, self.clip))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normalization_commutes_with_mirror() {
        let f = SignedPermutation::new(vec![1, 0, 2, 3], vec![-1, -1, -1, 1]).unwrap();
        let mut norm = ObsNormalizer::new(f.clone(), 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|i| rng.random_range(-1.0..2.0) + i as f64).collect())
            .collect();
        norm.update(&rows);
        assert_eq!(norm.mean[2], 0.0);
        for r in &rows {
            let a = f.apply(&norm.normalize(r)).unwrap();
            let b = norm.normalize(&f.apply(r).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
