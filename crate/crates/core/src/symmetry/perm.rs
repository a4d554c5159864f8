use serde::{Deserialize, Serialize};

use super::SymmetryError;
use crate::numerics::Tensor;

/// A signed permutation: `out[target[i]] = sign[i] * x[i]`.
///
/// Every transform in this crate (observation, action, state, latent and
/// terrain mirrors) is one of these, and each is an involution.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPerm", into = "RawPerm")]
pub struct SignedPermutation {
    target: Vec<usize>,
    sign: Vec<i8>,
}

#[derive(Serialize, Deserialize)]
struct RawPerm {
    target: Vec<usize>,
    sign: Vec<i8>,
}

impl TryFrom<RawPerm> for SignedPermutation {
    type Error = SymmetryError;
    fn try_from(raw: RawPerm) -> Result<Self, Self::Error> {
        SignedPermutation::new(raw.target, raw.sign)
    }
}

impl From<SignedPermutation> for RawPerm {
    fn from(p: SignedPermutation) -> Self {
        RawPerm {
            target: p.target,
            sign: p.sign,
        }
    }
}

impl SignedPermutation {
    pub fn new(target: Vec<usize>, sign: Vec<i8>) -> Result<Self, SymmetryError> {
        let n = target.len();
        if sign.len() != n {
            return Err(SymmetryError::LengthMismatch {
                expected: n,
                got: sign.len(),
            });
        }
        let mut seen = vec![false; n];
        for &t in &target {
            if t >= n || seen[t] {
                return Err(SymmetryError::NotBijection);
            }
            seen[t] = true;
        }
        if let Some(&s) = sign.iter().find(|&&s| s != 1 && s != -1) {
            return Err(SymmetryError::BadSign(s));
        }
        Ok(Self { target, sign })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            target: (0..n).collect(),
            sign: vec![1; n],
        }
    }

    /// `n`-dimensional negation (`n` copies of the sign representation).
    pub fn negation(n: usize) -> Self {
        Self {
            target: (0..n).collect(),
            sign: vec![-1; n],
        }
    }

    /// `pairs` copies of the 2-dimensional swap representation, pairing
    /// indices `(2i, 2i+1)`.
    pub fn regular(pairs: usize) -> Self {
        Self {
            target: (0..2 * pairs).map(|i| i ^ 1).collect(),
            sign: vec![1; 2 * pairs],
        }
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn signs(&self) -> &[i8] {
        &self.sign
    }

    pub fn target_of(&self, i: usize) -> usize {
        self.target[i]
    }

    pub fn sign_of(&self, i: usize) -> f64 {
        f64::from(self.sign[i])
    }

    /// True when every sign is `+1` (pure permutation). Pointwise
    /// nonlinearities commute only with these.
    pub fn is_pure_permutation(&self) -> bool {
        self.sign.iter().all(|&s| s == 1)
    }

    pub fn is_identity(&self) -> bool {
        self.target.iter().enumerate().all(|(i, &t)| i == t) && self.is_pure_permutation()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, SymmetryError> {
        if x.len() != self.len() {
            return Err(SymmetryError::LengthMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`apply`](Self::apply) writing into `out`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for ((&t, &s), &v) in self.target.iter().zip(&self.sign).zip(x) {
            out[t] = if s < 0 { -v } else { v };
        }
    }

    /// Applies to every row of a matrix.
    pub fn apply_rows(&self, x: &Tensor) -> Result<Tensor, SymmetryError> {
        if x.cols() != self.len() {
            return Err(SymmetryError::LengthMismatch {
                expected: self.len(),
                got: x.cols(),
            });
        }
        let mut out = x.clone();
        for r in 0..x.rows() {
            self.apply_into(x.row(r), out.row_mut(r));
        }
        Ok(out)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self, SymmetryError> {
        if self.len() != other.len() {
            return Err(SymmetryError::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let mut target = vec![0; self.len()];
        let mut sign = vec![0; self.len()];
        for i in 0..self.len() {
            let mid = other.target[i];
            target[i] = self.target[mid];
            sign[i] = other.sign[i] * self.sign[mid];
        }
        Ok(Self { target, sign })
    }

    pub fn is_involution(&self) -> bool {
        self.compose(self).map(|c| c.is_identity()).unwrap_or(false)
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.len();
        let mut target = self.target.clone();
        target.extend(other.target.iter().map(|t| t + n));
        let mut sign = self.sign.clone();
        sign.extend_from_slice(&other.sign);
        Self { target, sign }
    }

    /// `copies`-fold direct sum of `self`.
    pub fn repeat(&self, copies: usize) -> Self {
        (0..copies).fold(Self::identity(0), |acc, _| acc.direct_sum(self))
    }

    /// Dense matrix `P` with `P[target[i], i] = sign[i]`, row-major.
    pub fn to_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[self.target[i] * n + i] = self.sign_of(i);
        }
        m
    }
}

/// Applies `f_o` independently to every timestep row of a stacked history.
pub fn mirror_history(f_o: &SignedPermutation, history: &Tensor) -> Result<Tensor, SymmetryError> {
    f_o.apply_rows(history)
}
