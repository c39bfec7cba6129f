//! Tensor-valued feature fields over a chart, their sampling, and the
//! transport constructions that move localized field data along curves.

mod grid;

pub use grid::GridField;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{
    parallel_transport, trace_geodesic, transport_matrix, ChartManifold, Path, PointCoords,
    TangentVec,
};
use crate::kernel::TangentQuadrature;
use crate::tensor::{TensorRank, TensorValue};

type OracleFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type RegionFn = dyn Fn(&[f64]) -> bool + Send + Sync;

#[derive(Clone)]
enum FieldData {
    Oracle(Arc<OracleFn>),
    Grid(GridField),
}

/// A tensor field on a chart region: either an analytic oracle or a sampled
/// grid with componentwise bilinear interpolation.
#[derive(Clone)]
pub struct TensorField {
    rank: TensorRank,
    chart: String,
    data: FieldData,
    region: Arc<RegionFn>,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.data {
            FieldData::Oracle(_) => "oracle",
            FieldData::Grid(_) => "grid",
        };
        f.debug_struct("TensorField")
            .field("rank", &self.rank)
            .field("chart", &self.chart)
            .field("kind", &kind)
            .finish()
    }
}

impl TensorField {
    /// Field from an analytic component oracle, defined wherever the
    /// coordinates are finite.
    pub fn from_oracle<F>(rank: TensorRank, chart: impl Into<String>, oracle: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            rank,
            chart: chart.into(),
            data: FieldData::Oracle(Arc::new(oracle)),
            region: Arc::new(|_x| true),
        }
    }

    /// Field backed by a rectangular sample grid.
    pub fn from_grid(grid: GridField, chart: impl Into<String>) -> Self {
        let bounds = grid.bounds();
        Self {
            rank: grid.rank(),
            chart: chart.into(),
            data: FieldData::Grid(grid),
            region: Arc::new(move |x| bounds.contains(x)),
        }
    }

    /// Restricts the field to an explicit region predicate.
    pub fn with_region<R>(mut self, region: R) -> Self
    where
        R: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        self.region = Arc::new(region);
        self
    }

    pub fn rank(&self) -> TensorRank {
        self.rank
    }

    pub fn chart(&self) -> &str {
        &self.chart
    }

    pub fn in_region(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.is_finite()) && (self.region)(x)
    }

    /// Evaluates the field at `x`. Oracle fields are exact; grid fields
    /// interpolate bilinearly (exact at grid nodes).
    pub fn sample(&self, x: &PointCoords) -> Result<TensorValue> {
        if !self.in_region(x.as_slice()) {
            return Err(Error::OutOfRegion {
                coords: x.as_slice().to_vec(),
            });
        }
        let comps = match &self.data {
            FieldData::Oracle(f) => (f)(x.as_slice()),
            FieldData::Grid(g) => g.interpolate(x.as_slice())?,
        };
        TensorValue::new(self.rank, x.clone(), comps)
    }

    /// Pointwise linear combination `a*f + b*h` of two same-rank fields.
    pub fn linear_combination(a: f64, f: &TensorField, b: f64, h: &TensorField) -> Result<Self> {
        if f.rank != h.rank {
            return Err(Error::RankMismatch {
                expected: f.rank.to_string(),
                actual: h.rank.to_string(),
            });
        }
        let (fc, hc) = (f.clone(), h.clone());
        Ok(Self {
            rank: f.rank,
            chart: f.chart.clone(),
            data: FieldData::Oracle(Arc::new(move |x| {
                let p = PointCoords::new(x.to_vec());
                let fv = fc.sample(&p).map(|v| v.components).unwrap_or_default();
                let hv = hc.sample(&p).map(|v| v.components).unwrap_or_default();
                fv.iter().zip(&hv).map(|(u, w)| a * u + b * w).collect()
            })),
            region: {
                let (fr, hr) = (f.clone(), h.clone());
                Arc::new(move |x| fr.in_region(x) && hr.in_region(x))
            },
        })
    }
}

/// Built-in oracle fields selected by name with positional parameters:
/// `constant-scalar` (c), `linear-scalar` (a, b, c) for `a x1 + b x2 + c`,
/// `constant-vector` (v1, v2), `linear-vector` (a, b, c, d) for
/// `(a x1 + b x2, c x1 + d x2)`, `bump-scalar` (x0, y0, sigma, amplitude).
pub fn field_by_name(name: &str, params: &[f64], chart: &str) -> Result<TensorField> {
    let take = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
    match name {
        "constant-scalar" => {
            let c = take(0, 1.0);
            Ok(TensorField::from_oracle(
                TensorRank::scalar(),
                chart,
                move |_x| vec![c],
            ))
        }
        "linear-scalar" => {
            let (a, b, c) = (take(0, 1.0), take(1, 0.0), take(2, 0.0));
            Ok(TensorField::from_oracle(
                TensorRank::scalar(),
                chart,
                move |x| vec![a * x[0] + b * x[1] + c],
            ))
        }
        "constant-vector" => {
            let (v1, v2) = (take(0, 1.0), take(1, 0.0));
            Ok(TensorField::from_oracle(
                TensorRank::vector(),
                chart,
                move |_x| vec![v1, v2],
            ))
        }
        "linear-vector" => {
            let (a, b, c, d) = (take(0, 1.0), take(1, 0.0), take(2, 0.0), take(3, 0.0));
            Ok(TensorField::from_oracle(
                TensorRank::vector(),
                chart,
                move |x| vec![a * x[0] + b * x[1], c * x[0] + d * x[1]],
            ))
        }
        "bump-scalar" => {
            let (x0, y0) = (take(0, 0.0), take(1, 0.0));
            let sigma = take(2, 0.3);
            let amp = take(3, 1.0);
            if sigma <= 0.0 {
                return Err(Error::Config(format!(
                    "bump-scalar needs sigma > 0, got {sigma}"
                )));
            }
            Ok(TensorField::from_oracle(
                TensorRank::scalar(),
                chart,
                move |x| {
                    let d2 = (x[0] - x0).powi(2) + (x[1] - y0).powi(2);
                    vec![amp * (-d2 / (2.0 * sigma * sigma)).exp()]
                },
            ))
        }
        other => Err(Error::Config(format!("unknown field preset '{other}'"))),
    }
}

/// `f|_{exp_x v}(x)`: samples the field at the geodesic endpoint `exp_x v`
/// and parallel transports the value back to `x` along the reversed
/// geodesic.
pub fn transport_to_center(
    m: &ChartManifold,
    f: &TensorField,
    x: &PointCoords,
    v: &[f64],
    steps_per_unit: usize,
) -> Result<TensorValue> {
    if v.iter().all(|c| *c == 0.0) {
        return f.sample(x);
    }
    let start = TangentVec::new(x.clone(), v.to_vec())?;
    let geo = trace_geodesic(m, &start, steps_per_unit)?;
    let value = f.sample(geo.end())?;
    parallel_transport(m, &geo.path.reversed(), &value, steps_per_unit)
}

/// A field tabulated over a transported tangent ball: for each node `v_i` at
/// the base point, the value of the field at `exp(v_i)` already transported
/// to the base. This is exactly the data the covariant convolution consumes.
#[derive(Debug, Clone)]
pub struct TransportedBallField {
    pub base: PointCoords,
    pub rank: TensorRank,
    pub nodes: Vec<TangentVec>,
    pub centered_values: Vec<TensorValue>,
}

/// Carries a ball of localized field data from the start of `path` to its
/// end: nodes map through the path transport, and each centered sample
/// `f|_{exp_x v_i}(x)` is parallel transported along the path. The result
/// defines the transported field on the ball at the endpoint.
pub fn transported_localized_field(
    m: &ChartManifold,
    f: &TensorField,
    path: &Path,
    quad: &TangentQuadrature,
    steps_per_unit: usize,
) -> Result<TransportedBallField> {
    if quad.base() != path.start() {
        return Err(Error::InvalidArgument(format!(
            "quadrature based at {} but path starts at {}",
            quad.base(),
            path.start()
        )));
    }
    let p_mat = transport_matrix(m, path, steps_per_unit)?;
    let end = path.end().clone();
    let mut nodes = Vec::with_capacity(quad.nodes().len());
    let mut centered_values = Vec::with_capacity(quad.nodes().len());
    for node in quad.nodes() {
        let moved = &p_mat * node.to_vector();
        nodes.push(TangentVec::new(
            end.clone(),
            moved.iter().copied().collect(),
        )?);
        let at_center = transport_to_center(m, f, path.start(), &node.components, steps_per_unit)?;
        centered_values.push(parallel_transport(m, path, &at_center, steps_per_unit)?);
    }
    Ok(TransportedBallField {
        base: end,
        rank: f.rank(),
        nodes,
        centered_values,
    })
}
