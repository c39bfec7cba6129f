//! Covariant convolution over tangent-ball quadratures.
//!
//! At a point `x` the output is
//! `sqrt(|g(x)|) * sum_i w_i < K(x, v_i), f|_{exp_x v_i}(x) >`,
//! where the angle bracket contracts the kernel's covariant slots against
//! the input value's contravariant slots in listed order. The volume factor
//! is evaluated once at the center; nodes are summed in rule order, so
//! results are deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{transport_to_center, TensorField, TransportedBallField};
use crate::geometry::{
    exp_map_with_steps, log_map, trace_geodesic, ChartManifold, Path, PointCoords,
};
use crate::kernel::{share_kernel, SharedKernel};
use crate::tensor::{flatten_index, multi_indices, TensorRank, TensorValue};

/// How the kernel travels from its reference point to an output point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SharingMode {
    /// Evaluate at the reference point only.
    None,
    /// Straight segment in chart coordinates.
    #[default]
    ChartSegment,
    /// Geodesic from the reference point, found by the shooting log map.
    Geodesic,
}

/// Everything needed to evaluate the convolution at a set of points with a
/// shared kernel.
#[derive(Debug, Clone)]
pub struct ConvolutionSpec {
    pub sharing_mode: SharingMode,
    pub output_points: Vec<PointCoords>,
    pub steps_per_unit: usize,
}

/// Contracts a kernel coefficient against an input value: the coefficient's
/// covariant slots pair with the input's contravariant slots in order,
/// leaving the coefficient's contravariant slots as the output.
fn contract(coeff: &TensorValue, input: &TensorValue) -> Result<TensorValue> {
    let d = coeff.dim();
    let n_out = coeff.rank.n_out;
    let n_in = coeff.rank.n_in;
    if input.rank != TensorRank::new(n_in, 0) {
        return Err(Error::RankMismatch {
            expected: TensorRank::new(n_in, 0).to_string(),
            actual: input.rank.to_string(),
        });
    }
    let mut out = TensorValue::zeros(TensorRank::new(n_out, 0), coeff.base.clone());
    for out_idx in multi_indices(d, n_out) {
        let mut acc = 0.0;
        for in_idx in multi_indices(d, n_in) {
            let mut full = out_idx.clone();
            full.extend(&in_idx);
            acc += coeff.get(&full) * input.components[flatten_index(&in_idx, d)];
        }
        out.set(&out_idx, acc);
    }
    Ok(out)
}

/// Convolution at the kernel's own base point: transports the field to the
/// center node by node, contracts, and applies the volume factor.
pub fn convolve_at(
    m: &ChartManifold,
    k: &SharedKernel,
    f: &TensorField,
    steps_per_unit: usize,
) -> Result<TensorValue> {
    if f.rank() != k.rank_in() {
        return Err(Error::RankMismatch {
            expected: k.rank_in().to_string(),
            actual: f.rank().to_string(),
        });
    }
    let x = k.ref_point();
    let density = m.volume_density(x.as_slice())?;
    let mut acc = TensorValue::zeros(k.rank_out(), x.clone());
    for ((node, &w), coeff) in k
        .quad()
        .nodes()
        .iter()
        .zip(k.quad().weights())
        .zip(k.coeffs())
    {
        let centered = transport_to_center(m, f, x, &node.components, steps_per_unit)?;
        let term = contract(coeff, &centered)?;
        acc = acc.axpy(w, &term)?;
    }
    Ok(acc.scale(density))
}

/// Convolution against a ball of already centered values, as produced by
/// [`transported_localized_field`]. The tabulated nodes must match the
/// kernel's quadrature nodes.
///
/// [`transported_localized_field`]: crate::fields::transported_localized_field
pub fn convolve_tabulated(
    m: &ChartManifold,
    k: &SharedKernel,
    tab: &TransportedBallField,
) -> Result<TensorValue> {
    if tab.rank != k.rank_in() {
        return Err(Error::RankMismatch {
            expected: k.rank_in().to_string(),
            actual: tab.rank.to_string(),
        });
    }
    if tab.base != *k.ref_point() {
        return Err(Error::InvalidArgument(format!(
            "tabulated ball at {} but kernel anchored at {}",
            tab.base,
            k.ref_point()
        )));
    }
    if tab.nodes.len() != k.quad().len() {
        return Err(Error::DimensionMismatch {
            expected: k.quad().len(),
            actual: tab.nodes.len(),
        });
    }
    for (a, b) in tab.nodes.iter().zip(k.quad().nodes()) {
        let dev = a
            .components
            .iter()
            .zip(&b.components)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        if dev > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "tabulated node {:?} does not match kernel node {:?}",
                a.components, b.components
            )));
        }
    }
    let density = m.volume_density(tab.base.as_slice())?;
    let mut acc = TensorValue::zeros(k.rank_out(), tab.base.clone());
    for ((value, &w), coeff) in tab
        .centered_values
        .iter()
        .zip(k.quad().weights())
        .zip(k.coeffs())
    {
        let term = contract(coeff, value)?;
        acc = acc.axpy(w, &term)?;
    }
    Ok(acc.scale(density))
}

/// Builds the sharing path from the kernel reference point to `target`
/// under the given mode.
pub fn sharing_path(
    m: &ChartManifold,
    from: &PointCoords,
    to: &PointCoords,
    mode: SharingMode,
    steps_per_unit: usize,
) -> Result<Path> {
    match mode {
        SharingMode::None => Err(Error::InvalidArgument(
            "sharing mode 'none' defines no paths".into(),
        )),
        SharingMode::ChartSegment => {
            if from == to {
                Path::from_points(vec![from.clone(), to.clone()])
            } else {
                Path::segment(from.clone(), to.clone())
            }
        }
        SharingMode::Geodesic => {
            if from == to {
                return Path::from_points(vec![from.clone(), to.clone()]);
            }
            let v = log_map(m, from, to)?;
            let geo = trace_geodesic(m, &v, steps_per_unit)?;
            // Shooting tolerance leaves the endpoint within 1e-10 of the
            // target; snap it so downstream base checks see `to` exactly.
            let mut samples = geo.path.samples().to_vec();
            let dev: f64 = geo
                .path
                .end()
                .as_slice()
                .iter()
                .zip(to.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dev > 1e-8 {
                return Err(Error::Numerical(format!(
                    "geodesic sharing path misses target by {dev}"
                )));
            }
            *samples.last_mut().unwrap() = to.clone();
            Path::new(samples, geo.path.params().to_vec())
        }
    }
}

/// Shares the kernel to each output point along mode-defined paths and
/// convolves there. With [`SharingMode::None`] only the reference point is
/// evaluated and a single output is returned.
pub fn convolve_field(
    m: &ChartManifold,
    k: &SharedKernel,
    f: &TensorField,
    spec: &ConvolutionSpec,
) -> Result<Vec<TensorValue>> {
    if spec.sharing_mode == SharingMode::None {
        return Ok(vec![convolve_at(m, k, f, spec.steps_per_unit)?]);
    }
    let paths = spec
        .output_points
        .iter()
        .map(|p| sharing_path(m, k.ref_point(), p, spec.sharing_mode, spec.steps_per_unit))
        .collect::<Result<Vec<_>>>()?;
    convolve_field_with_paths(m, k, f, &paths, spec.steps_per_unit)
}

/// Shares the kernel along explicit paths (each starting at the kernel's
/// reference point) and convolves at each endpoint.
pub fn convolve_field_with_paths(
    m: &ChartManifold,
    k: &SharedKernel,
    f: &TensorField,
    paths: &[Path],
    steps_per_unit: usize,
) -> Result<Vec<TensorValue>> {
    paths
        .iter()
        .map(|path| {
            let shared = share_kernel(m, k, path, steps_per_unit)?;
            convolve_at(m, &shared, f, steps_per_unit)
        })
        .collect()
}

/// Direct planar quadrature of the same node set, valid on flat Cartesian
/// charts only: no transport, no volume factor, plain evaluation of the
/// field at `x + v`. The flat-reduction check compares [`convolve_at`]
/// against this.
pub fn planar_correlation_oracle(
    k: &SharedKernel,
    f: &TensorField,
    x: &PointCoords,
) -> Result<TensorValue> {
    let mut acc = TensorValue::zeros(k.rank_out(), x.clone());
    for ((node, &w), coeff) in k
        .quad()
        .nodes()
        .iter()
        .zip(k.quad().weights())
        .zip(k.coeffs())
    {
        let y = PointCoords::new(
            x.as_slice()
                .iter()
                .zip(&node.components)
                .map(|(a, b)| a + b)
                .collect(),
        );
        let fv = f.sample(&y)?;
        let term = contract(coeff, &TensorValue::new(fv.rank, x.clone(), fv.components)?)?;
        acc = acc.axpy(w, &term)?;
    }
    Ok(acc)
}

/// Exponential-map sample points of every kernel node, used by locality
/// tests to know exactly which ball the convolution reads.
pub fn ball_sample_points(
    m: &ChartManifold,
    k: &SharedKernel,
    steps_per_unit: usize,
) -> Result<Vec<PointCoords>> {
    k.quad()
        .nodes()
        .iter()
        .map(|node| exp_map_with_steps(m, k.ref_point(), &node.components, steps_per_unit))
        .collect()
}
