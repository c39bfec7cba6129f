//! Chart-to-chart coordinate transitions and their Jacobians.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::PointCoords;

type CoordMap = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacobianMap = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type OverlapFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// A coordinate change between two charts on an overlap region.
///
/// `forward` maps source-chart coordinates to target-chart coordinates;
/// `jacobian(x)` is the matrix `d x'^mu / d x^nu` at `x`. The optional
/// `inverse` map enables pulling target-chart data back to the source chart.
#[derive(Clone)]
pub struct ChartTransition {
    name: String,
    dim: usize,
    forward: Arc<CoordMap>,
    jacobian: Arc<JacobianMap>,
    inverse: Option<Arc<CoordMap>>,
    overlap: Arc<OverlapFn>,
}

impl fmt::Debug for ChartTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartTransition")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("has_inverse", &self.inverse.is_some())
            .finish()
    }
}

impl ChartTransition {
    pub fn new<F, J, O>(
        name: impl Into<String>,
        dim: usize,
        forward: F,
        jacobian: J,
        overlap: O,
    ) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        O: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            forward: Arc::new(forward),
            jacobian: Arc::new(jacobian),
            inverse: None,
            overlap: Arc::new(overlap),
        }
    }

    pub fn with_inverse<I>(mut self, inverse: I) -> Self
    where
        I: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn in_overlap(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().all(|c| c.is_finite()) && (self.overlap)(x)
    }

    fn check_overlap(&self, x: &[f64]) -> Result<()> {
        if !self.in_overlap(x) {
            return Err(Error::OutsideOverlap {
                transition: self.name.clone(),
                coords: x.to_vec(),
            });
        }
        Ok(())
    }

    /// Target-chart coordinates of `x`.
    pub fn transition_point(&self, x: &PointCoords) -> Result<PointCoords> {
        self.check_overlap(x.as_slice())?;
        let out = (self.forward)(x.as_slice());
        if out.len() != self.dim || out.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical(format!(
                "transition {} produced invalid coordinates {out:?}",
                self.name
            )));
        }
        Ok(PointCoords::new(out))
    }

    /// Jacobian `d x'^mu / d x^nu` at `x`; checked invertible.
    pub fn transition_jacobian(&self, x: &PointCoords) -> Result<DMatrix<f64>> {
        self.check_overlap(x.as_slice())?;
        let j = (self.jacobian)(x.as_slice());
        if j.nrows() != self.dim || j.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: j.nrows(),
            });
        }
        if !j.iter().all(|v| v.is_finite()) || j.determinant().abs() < 1e-14 {
            return Err(Error::Numerical(format!(
                "transition {} has a singular Jacobian at {x}",
                self.name
            )));
        }
        Ok(j)
    }

    /// Source-chart coordinates of a target-chart point, when available.
    pub fn inverse_point(&self, xp: &PointCoords) -> Result<PointCoords> {
        let inv = self.inverse.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("transition {} has no inverse map", self.name))
        })?;
        let out = (inv)(xp.as_slice());
        if out.len() != self.dim || out.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical(format!(
                "inverse transition {} produced invalid coordinates {out:?}",
                self.name
            )));
        }
        Ok(PointCoords::new(out))
    }

    /// Finite-difference Jacobian of `forward`, for validating analytic ones.
    pub fn jacobian_fd(&self, x: &PointCoords, h: f64) -> Result<DMatrix<f64>> {
        self.check_overlap(x.as_slice())?;
        let d = self.dim;
        let mut j = DMatrix::zeros(d, d);
        for nu in 0..d {
            let mut plus = x.as_slice().to_vec();
            let mut minus = x.as_slice().to_vec();
            plus[nu] += h;
            minus[nu] -= h;
            let fp = (self.forward)(&plus);
            let fm = (self.forward)(&minus);
            for mu in 0..d {
                j[(mu, nu)] = (fp[mu] - fm[mu]) / (2.0 * h);
            }
        }
        Ok(j)
    }
}
