//! Tensor values with mixed co/contravariant index structure.
//!
//! A [`TensorValue`] stores the components of an element of
//! `(T_xM)^{⊗ n_out} ⊗ (T*_xM)^{⊗ n_in}` in the coordinate basis of a chart.
//! Components are laid out row-major over the full multi-index, contravariant
//! slots first, so a rank-(1,1) value in dimension 2 is stored as
//! `[T^0_0, T^0_1, T^1_0, T^1_1]`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::PointCoords;

/// Number of contravariant (`n_out`) and covariant (`n_in`) slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorRank {
    pub n_out: usize,
    pub n_in: usize,
}

impl TensorRank {
    pub const fn new(n_out: usize, n_in: usize) -> Self {
        Self { n_out, n_in }
    }

    pub const fn scalar() -> Self {
        Self::new(0, 0)
    }

    pub const fn vector() -> Self {
        Self::new(1, 0)
    }

    pub const fn covector() -> Self {
        Self::new(0, 1)
    }

    /// Total number of index slots.
    pub const fn total(&self) -> usize {
        self.n_out + self.n_in
    }

    /// Component count `d^(n_out + n_in)` in dimension `dim`.
    pub fn component_count(&self, dim: usize) -> usize {
        dim.pow(self.total() as u32)
    }
}

impl std::fmt::Display for TensorRank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n_out, self.n_in)
    }
}

/// Iterate all multi-indices of the given length with entries `0..dim`,
/// in row-major order (last slot fastest).
pub fn multi_indices(dim: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = dim.pow(len as u32);
    (0..count).map(move |flat| unflatten_index(flat, dim, len))
}

/// Flatten a multi-index to its row-major linear position.
pub fn flatten_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Inverse of [`flatten_index`].
pub fn unflatten_index(mut flat: usize, dim: usize, len: usize) -> Vec<usize> {
    let mut idx = vec![0usize; len];
    for slot in (0..len).rev() {
        idx[slot] = flat % dim;
        flat /= dim;
    }
    idx
}

/// A tensor value attached to a base point of a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    pub rank: TensorRank,
    pub base: PointCoords,
    pub components: Vec<f64>,
}

impl TensorValue {
    /// Builds a value, checking the component count against the rank and the
    /// base dimension, and that every component is finite.
    pub fn new(rank: TensorRank, base: PointCoords, components: Vec<f64>) -> Result<Self> {
        let expected = rank.component_count(base.dim());
        if components.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: components.len(),
            });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite tensor components {components:?}"
            )));
        }
        Ok(Self {
            rank,
            base,
            components,
        })
    }

    pub fn zeros(rank: TensorRank, base: PointCoords) -> Self {
        let n = rank.component_count(base.dim());
        Self {
            rank,
            base,
            components: vec![0.0; n],
        }
    }

    pub fn scalar(base: PointCoords, value: f64) -> Self {
        Self {
            rank: TensorRank::scalar(),
            base,
            components: vec![value],
        }
    }

    pub fn vector(base: PointCoords, components: Vec<f64>) -> Result<Self> {
        Self::new(TensorRank::vector(), base, components)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Component at a full multi-index (contravariant slots first).
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank.total());
        self.components[flatten_index(idx, self.dim())]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let d = self.dim();
        self.components[flatten_index(idx, d)] = value;
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest absolute componentwise difference to `other`.
    pub fn max_abs_diff(&self, other: &TensorValue) -> f64 {
        debug_assert_eq!(self.components.len(), other.components.len());
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Componentwise `self + scale * other`; ranks and bases must agree.
    pub fn axpy(&self, scale: f64, other: &TensorValue) -> Result<TensorValue> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                expected: self.rank.to_string(),
                actual: other.rank.to_string(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a + scale * b)
            .collect();
        Ok(TensorValue {
            rank: self.rank,
            base: self.base.clone(),
            components,
        })
    }

    pub fn scale(&self, factor: f64) -> TensorValue {
        TensorValue {
            rank: self.rank,
            base: self.base.clone(),
            components: self.components.iter().map(|c| factor * c).collect(),
        }
    }
}

/// Column labels for the components of a rank in dimension `dim`: `prefix`
/// followed by the concatenated multi-index digits, so a vector in d = 2
/// labels as `c_0, c_1` and a scalar as plain `c_`.
pub fn component_labels(rank: TensorRank, dim: usize, prefix: &str) -> Vec<String> {
    multi_indices(dim, rank.total())
        .map(|idx| {
            let digits: String = idx.iter().map(|i| i.to_string()).collect();
            format!("{prefix}{digits}")
        })
        .collect()
}

/// Applies the tensor action of an invertible Jacobian: every contravariant
/// slot is contracted with `j`, every covariant slot with the transpose of
/// `j_inv`. The base point is kept; callers that move a value between charts
/// rebase it themselves.
pub fn push_tensor(t: &TensorValue, j: &DMatrix<f64>, j_inv: &DMatrix<f64>) -> Result<TensorValue> {
    let d = t.dim();
    if j.nrows() != d || j.ncols() != d || j_inv.nrows() != d || j_inv.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: j.nrows(),
        });
    }
    if !j.iter().all(|v| v.is_finite()) || !j_inv.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("non-finite Jacobian".into()));
    }
    let total = t.rank.total();
    let n_out = t.rank.n_out;
    let mut out = TensorValue::zeros(t.rank, t.base.clone());
    for new_idx in multi_indices(d, total) {
        let mut acc = 0.0;
        for old_idx in multi_indices(d, total) {
            let mut factor = 1.0;
            for slot in 0..total {
                factor *= if slot < n_out {
                    j[(new_idx[slot], old_idx[slot])]
                } else {
                    // covariant: contract with (j_inv)^T
                    j_inv[(old_idx[slot], new_idx[slot])]
                };
                if factor == 0.0 {
                    break;
                }
            }
            if factor != 0.0 {
                acc += factor * t.get(&old_idx);
            }
        }
        out.set(&new_idx, acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(d: usize) -> DMatrix<f64> {
        DMatrix::identity(d, d)
    }

    #[test]
    fn multi_index_roundtrip() {
        for flat in 0..8 {
            let idx = unflatten_index(flat, 2, 3);
            assert_eq!(flatten_index(&idx, 2), flat);
        }
        let all: Vec<_> = multi_indices(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn component_count_matches_rank() {
        assert_eq!(TensorRank::new(1, 1).component_count(2), 4);
        assert_eq!(TensorRank::new(2, 1).component_count(2), 8);
        assert_eq!(TensorRank::scalar().component_count(2), 1);
        let bad = TensorValue::new(
            TensorRank::vector(),
            PointCoords::new(vec![0.0, 0.0]),
            vec![1.0, 2.0, 3.0],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn push_scalar_is_identity() {
        let x = PointCoords::new(vec![1.0, 2.0]);
        let s = TensorValue::scalar(x, 4.25);
        let j = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 0.0, 2.0]);
        let j_inv = j.clone().try_inverse().unwrap();
        let pushed = push_tensor(&s, &j, &j_inv).unwrap();
        assert_eq!(pushed.components, vec![4.25]);
    }

    #[test]
    fn push_vector_polar_to_cartesian_example() {
        // J for the polar->Cartesian map at (rho=2, psi=0).
        let x = PointCoords::new(vec![2.0, 0.0]);
        let v = TensorValue::vector(x, vec![1.0, 1.0]).unwrap();
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let j_inv = j.clone().try_inverse().unwrap();
        let pushed = push_tensor(&v, &j, &j_inv).unwrap();
        assert_eq!(pushed.components, vec![1.0, 2.0]);
    }

    #[test]
    fn push_identity_mixed_tensor_is_fixed() {
        // Rank (1,1) identity components are fixed by any conjugation.
        let x = PointCoords::new(vec![0.0, 0.0]);
        let t = TensorValue::new(
            TensorRank::new(1, 1),
            x,
            vec![1.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let j = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 0.5]);
        let j_inv = j.clone().try_inverse().unwrap();
        let pushed = push_tensor(&t, &j, &j_inv).unwrap();
        for (a, b) in pushed.components.iter().zip(&t.components) {
            assert!((a - b).abs() < 1e-12, "{pushed:?}");
        }
    }

    #[test]
    fn push_with_identity_jacobian_is_exact() {
        let x = PointCoords::new(vec![0.5, -1.0]);
        let t = TensorValue::new(
            TensorRank::new(1, 1),
            x,
            vec![0.3, -0.7, 2.0, 1.5],
        )
        .unwrap();
        let pushed = push_tensor(&t, &identity(2), &identity(2)).unwrap();
        assert_eq!(pushed.components, t.components);
    }
}
