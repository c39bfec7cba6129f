//! Chart descriptions of Riemannian manifolds.
//!
//! A manifold is presented to this library as a single coordinate chart: an
//! open region of `R^d` together with a smooth metric field. Everything else
//! (Christoffel symbols, geodesics, transport) is computed from the metric in
//! these coordinates.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Coordinates of a point in some chart.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCoords(pub Vec<f64>);

impl PointCoords {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self(v.iter().copied().collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl fmt::Display for PointCoords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A tangent vector expressed in chart coordinates at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVec {
    pub base: PointCoords,
    pub components: Vec<f64>,
}

impl TangentVec {
    pub fn new(base: PointCoords, components: Vec<f64>) -> Result<Self> {
        if base.dim() != components.len() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                actual: components.len(),
            });
        }
        Ok(Self { base, components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.components)
    }
}

type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type DomainFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// A Riemannian manifold presented in a single chart.
///
/// The metric closure must return a symmetric positive-definite matrix at
/// every point of the domain; this is validated on each evaluation.
#[derive(Clone)]
pub struct ChartManifold {
    name: String,
    dim: usize,
    metric: Arc<MetricFn>,
    domain: Arc<DomainFn>,
}

impl fmt::Debug for ChartManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartManifold")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl ChartManifold {
    /// Builds a chart from a metric closure and a domain predicate.
    pub fn new<M, D>(name: impl Into<String>, dim: usize, metric: M, domain: D) -> Self
    where
        M: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        D: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            metric: Arc::new(metric),
            domain: Arc::new(domain),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True if `x` lies in the chart domain (and has the right dimension).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().all(|c| c.is_finite()) && (self.domain)(x)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(Error::InvalidPoint {
                chart: self.name.clone(),
                coords: x.to_vec(),
            });
        }
        Ok(())
    }

    /// Metric matrix `g_{mu nu}(x)`, validated symmetric positive-definite.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let g = (self.metric)(x);
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: g.nrows(),
            });
        }
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite metric at {x:?} in chart {}",
                self.name
            )));
        }
        let asym = (&g - g.transpose()).abs().max();
        if asym > 1e-12 * (1.0 + g.abs().max()) {
            return Err(Error::Numerical(format!(
                "metric not symmetric at {x:?} in chart {} (asymmetry {asym:.3e})",
                self.name
            )));
        }
        if g.clone().cholesky().is_none() {
            return Err(Error::Numerical(format!(
                "metric not positive-definite at {x:?} in chart {}",
                self.name
            )));
        }
        Ok(g)
    }

    /// Inverse metric `g^{mu nu}(x)`.
    pub fn inverse_metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(x)?;
        g.clone().try_inverse().ok_or_else(|| {
            Error::Numerical(format!(
                "metric not invertible at {x:?} in chart {}",
                self.name
            ))
        })
    }

    /// Riemannian volume density `sqrt(det g(x))`.
    pub fn volume_density(&self, x: &[f64]) -> Result<f64> {
        let g = self.metric_at(x)?;
        let det = g.determinant();
        if det <= 0.0 {
            return Err(Error::Numerical(format!(
                "non-positive metric determinant {det} at {x:?}"
            )));
        }
        Ok(det.sqrt())
    }

    /// Metric inner product of two tangent vectors at the same base point.
    pub fn inner(&self, u: &TangentVec, v: &TangentVec) -> Result<f64> {
        if u.base != v.base {
            return Err(Error::InvalidArgument(format!(
                "inner product requires a common base point, got {} and {}",
                u.base, v.base
            )));
        }
        let g = self.metric_at(u.base.as_slice())?;
        Ok((u.to_vector().transpose() * g * v.to_vector())[(0, 0)])
    }

    /// Metric norm `sqrt(g(v, v))`.
    pub fn norm(&self, v: &TangentVec) -> Result<f64> {
        Ok(self.inner(v, v)?.max(0.0).sqrt())
    }

    /// A g-orthonormal coordinate-frame matrix `E` at `x`: columns `E_i` obey
    /// `E_i^T g E_j = delta_ij`. Built from the Cholesky factor `g = L L^T`
    /// as `E = L^{-T}`, so `|det E| = 1 / sqrt(det g)`.
    pub fn orthonormal_frame(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(x)?;
        let chol = g
            .cholesky()
            .ok_or_else(|| Error::Numerical(format!("Cholesky failed at {x:?}")))?;
        let l = chol.l();
        l.transpose().try_inverse().ok_or_else(|| {
            Error::Numerical(format!("singular Cholesky factor at {x:?}"))
        })
    }
}
