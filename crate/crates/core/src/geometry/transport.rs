//! Parallel transport of tensor values along polyline paths.
//!
//! Transport solves the first-order linear ODE obtained from vanishing
//! covariant derivative along the curve: each contravariant slot contributes
//! `-Gamma^mu_{alpha beta} xdot^alpha T^{..beta..}`, each covariant slot
//! `+Gamma^beta_{alpha nu} xdot^alpha T_{..beta..}`. Segments of the polyline
//! are traversed with constant coordinate velocity; each segment gets
//! `ceil(dt * steps_per_unit)` RK4 substeps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{ChartManifold, ChristoffelSymbols, Path};
use crate::tensor::{unflatten_index, TensorRank, TensorValue};

/// `M_{mu beta} = Gamma^mu_{alpha beta} xdot^alpha` at a point. The vector
/// transport ODE is `dT/dt = -M T`; covectors use `+M^T`.
fn connection_matrix(gamma: &ChristoffelSymbols, xdot: &[f64]) -> DMatrix<f64> {
    let d = gamma.dim();
    let mut m = DMatrix::zeros(d, d);
    for mu in 0..d {
        for beta in 0..d {
            let mut acc = 0.0;
            for (alpha, &u) in xdot.iter().enumerate() {
                acc += gamma.gamma(mu, alpha, beta) * u;
            }
            m[(mu, beta)] = acc;
        }
    }
    m
}

/// Transport ODE right-hand side for a full tensor component array.
fn transport_rhs(m_mat: &DMatrix<f64>, rank: TensorRank, dim: usize, comps: &[f64]) -> Vec<f64> {
    let total = rank.total();
    let mut out = vec![0.0; comps.len()];
    if total == 0 {
        return out;
    }
    for (flat, slot_out) in out.iter_mut().enumerate() {
        let idx = unflatten_index(flat, dim, total);
        let mut acc = 0.0;
        for (k, &ik) in idx.iter().enumerate() {
            let stride = dim.pow((total - 1 - k) as u32);
            let base_flat = flat - ik * stride;
            for beta in 0..dim {
                let t_beta = comps[base_flat + beta * stride];
                if k < rank.n_out {
                    acc -= m_mat[(ik, beta)] * t_beta;
                } else {
                    acc += m_mat[(beta, ik)] * t_beta;
                }
            }
        }
        *slot_out = acc;
    }
    out
}

/// One straight coordinate segment of a polyline, with its constant chart
/// velocity over the parameter interval `[t0, t1]`.
struct Segment<'a> {
    a: &'a [f64],
    b: &'a [f64],
    t0: f64,
    t1: f64,
    xdot: Vec<f64>,
}

impl Segment<'_> {
    fn point_at(&self, t: f64) -> Vec<f64> {
        let u = (t - self.t0) / (self.t1 - self.t0);
        self.a
            .iter()
            .zip(self.b)
            .map(|(p, q)| p + u * (q - p))
            .collect()
    }
}

/// Connection matrices at the three RK4 stage points of one substep along a
/// straight coordinate segment.
fn stage_matrices(
    m: &ChartManifold,
    seg: &Segment<'_>,
    s: f64,
    h: f64,
) -> Result<[DMatrix<f64>; 3]> {
    let mut mats = Vec::with_capacity(3);
    for t in [s, s + 0.5 * h, s + h] {
        let x = seg.point_at(t.min(seg.t1));
        let gamma = ChristoffelSymbols::compute(m, &x)?;
        mats.push(connection_matrix(&gamma, &seg.xdot));
    }
    Ok([mats.remove(0), mats.remove(0), mats.remove(0)])
}

/// Parallel transport of `value` along `path` with the given RK4 resolution.
/// The input must be based at the path start; the result is based at the end.
pub fn parallel_transport(
    m: &ChartManifold,
    path: &Path,
    value: &TensorValue,
    steps_per_unit: usize,
) -> Result<TensorValue> {
    if steps_per_unit == 0 {
        return Err(Error::InvalidArgument(
            "steps_per_unit must be positive".into(),
        ));
    }
    if value.base != *path.start() {
        return Err(Error::InvalidArgument(format!(
            "tensor based at {} but path starts at {}",
            value.base,
            path.start()
        )));
    }
    path.validate_in(m)?;
    let d = m.dim();
    if value.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: value.dim(),
        });
    }

    let mut comps = value.components.clone();
    for i in 0..path.samples().len() - 1 {
        let a = path.samples()[i].as_slice();
        let b = path.samples()[i + 1].as_slice();
        let t0 = path.params()[i];
        let t1 = path.params()[i + 1];
        let dt = t1 - t0;
        let xdot: Vec<f64> = a.iter().zip(b).map(|(p, q)| (q - p) / dt).collect();
        let seg = Segment { a, b, t0, t1, xdot };
        let n_sub = ((dt * steps_per_unit as f64).ceil() as usize).max(1);
        let h = dt / n_sub as f64;
        for sub in 0..n_sub {
            let s = t0 + sub as f64 * h;
            let [m0, m_mid, m1] = stage_matrices(m, &seg, s, h)?;
            let k1 = transport_rhs(&m0, value.rank, d, &comps);
            let y2: Vec<f64> = comps.iter().zip(&k1).map(|(c, k)| c + 0.5 * h * k).collect();
            let k2 = transport_rhs(&m_mid, value.rank, d, &y2);
            let y3: Vec<f64> = comps.iter().zip(&k2).map(|(c, k)| c + 0.5 * h * k).collect();
            let k3 = transport_rhs(&m_mid, value.rank, d, &y3);
            let y4: Vec<f64> = comps.iter().zip(&k3).map(|(c, k)| c + h * k).collect();
            let k4 = transport_rhs(&m1, value.rank, d, &y4);
            for i in 0..comps.len() {
                comps[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
    TensorValue::new(value.rank, path.end().clone(), comps)
}

/// Matrix of vector transport along `path`: column `j` is the transport of
/// the coordinate basis vector `e_j`. Covectors transport by the inverse
/// transpose; higher tensors by the induced tensor action.
pub fn transport_matrix(
    m: &ChartManifold,
    path: &Path,
    steps_per_unit: usize,
) -> Result<DMatrix<f64>> {
    let d = m.dim();
    let mut columns = Vec::with_capacity(d);
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        let v = TensorValue::new(TensorRank::vector(), path.start().clone(), e)?;
        let out = parallel_transport(m, path, &v, steps_per_unit)?;
        columns.push(out.components);
    }
    let mut p = DMatrix::zeros(d, d);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            p[(i, j)] = v;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::presets;
    use crate::geometry::{PointCoords, TangentVec};
    use crate::tensor::push_tensor;
    use std::f64::consts::FRAC_PI_2;

    fn p(x: f64, y: f64) -> PointCoords {
        PointCoords::new(vec![x, y])
    }

    #[test]
    fn flat_transport_is_identity() {
        let m = presets::flat2d_cartesian();
        let path = Path::from_points(vec![p(0.0, 0.0), p(2.0, 1.0), p(-1.0, 3.0)]).unwrap();
        let v = TensorValue::vector(p(0.0, 0.0), vec![1.0, 2.0]).unwrap();
        let out = parallel_transport(&m, &path, &v, 200).unwrap();
        assert!((out.components[0] - 1.0).abs() < 1e-12);
        assert!((out.components[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn polar_quarter_circle_matches_cartesian_constant() {
        // The Cartesian vector (1,0) carried to psi = pi/2 reads (0,-1) in
        // the polar frame there.
        let m = presets::flat2d_polar();
        let path = Path::segment(p(1.0, 0.0), p(1.0, FRAC_PI_2)).unwrap();
        let v = TensorValue::vector(p(1.0, 0.0), vec![1.0, 0.0]).unwrap();
        let out = parallel_transport(&m, &path, &v, 400).unwrap();
        assert!(out.components[0].abs() < 1e-8, "{:?}", out.components);
        assert!((out.components[1] + 1.0).abs() < 1e-8, "{:?}", out.components);
    }

    #[test]
    fn scalar_transport_preserves_value() {
        let m = presets::sphere(1.0, 1e-3);
        let path = Path::segment(p(FRAC_PI_2, 0.0), p(1.0, 1.0)).unwrap();
        let s = TensorValue::scalar(p(FRAC_PI_2, 0.0), 3.75);
        let out = parallel_transport(&m, &path, &s, 100).unwrap();
        assert_eq!(out.components[0], 3.75);
    }

    #[test]
    fn transport_preserves_metric_inner_product() {
        let m = presets::sphere(1.0, 1e-3);
        let a = p(1.2, 0.3);
        let b = p(0.7, 1.4);
        let path = Path::segment(a.clone(), b).unwrap();
        let u = TensorValue::vector(a.clone(), vec![0.4, -0.2]).unwrap();
        let w = TensorValue::vector(a.clone(), vec![-0.1, 0.9]).unwrap();
        let before = {
            let tu = TangentVec::new(a.clone(), u.components.clone()).unwrap();
            let tw = TangentVec::new(a.clone(), w.components.clone()).unwrap();
            m.inner(&tu, &tw).unwrap()
        };
        let u2 = parallel_transport(&m, &path, &u, 200).unwrap();
        let w2 = parallel_transport(&m, &path, &w, 200).unwrap();
        let after = {
            let tu = TangentVec::new(u2.base.clone(), u2.components).unwrap();
            let tw = TangentVec::new(w2.base.clone(), w2.components).unwrap();
            m.inner(&tu, &tw).unwrap()
        };
        assert!((before - after).abs() < 1e-8, "{before} vs {after}");
    }

    #[test]
    fn transport_reverses() {
        let m = presets::sphere(1.0, 1e-3);
        let path = Path::from_points(vec![p(1.0, 0.0), p(1.3, 0.8), p(0.9, 1.5)]).unwrap();
        let v = TensorValue::vector(p(1.0, 0.0), vec![0.7, 0.1]).unwrap();
        let fwd = parallel_transport(&m, &path, &v, 200).unwrap();
        let back = parallel_transport(&m, &path.reversed(), &fwd, 200).unwrap();
        assert!(back.max_abs_diff(&v) < 1e-8);
    }

    #[test]
    fn octant_loop_rotates_by_enclosed_angle() {
        let fixture = presets::octant_loop(1e-3);
        let start = fixture.path.start().clone();
        let v = TensorValue::vector(start, vec![1.0, 0.0]).unwrap();
        let out = parallel_transport(&fixture.manifold, &fixture.path, &v, 400).unwrap();
        // Enclosed solid angle (pi/2) cos(eps); e_theta and e_phi are
        // orthonormal at the equator, rotation angle read off components.
        let angle = out.components[1].atan2(out.components[0]);
        let expected = fixture.predicted_angle;
        assert!(
            (angle.abs() - expected).abs() < 1e-4,
            "angle {angle}, expected +-{expected}"
        );
    }

    #[test]
    fn covector_transport_matches_inverse_transpose_matrix() {
        let m = presets::sphere(1.0, 1e-3);
        let a = p(1.1, 0.2);
        let path = Path::segment(a.clone(), p(0.8, 1.0)).unwrap();
        let w = TensorValue::new(TensorRank::covector(), a, vec![0.3, -0.6]).unwrap();
        let direct = parallel_transport(&m, &path, &w, 300).unwrap();
        let p_mat = transport_matrix(&m, &path, 300).unwrap();
        let p_inv = p_mat.clone().try_inverse().unwrap();
        let via_matrix = push_tensor(&w, &p_mat, &p_inv).unwrap();
        assert!(direct.max_abs_diff(&via_matrix) < 1e-9);
    }

    #[test]
    fn full_param_flat_loop_has_identity_matrix() {
        let m = presets::flat2d_polar();
        let path = Path::from_points(vec![
            p(1.0, 0.0),
            p(2.0, 0.5),
            p(1.5, 1.5),
            p(1.0, 0.0),
        ])
        .unwrap();
        let mat = transport_matrix(&m, &path, 300).unwrap();
        let err = (&mat - DMatrix::identity(2, 2)).abs().max();
        assert!(err < 1e-9, "{mat}");
    }

    #[test]
    fn base_mismatch_is_rejected() {
        let m = presets::flat2d_cartesian();
        let path = Path::segment(p(0.0, 0.0), p(1.0, 0.0)).unwrap();
        let v = TensorValue::vector(p(5.0, 5.0), vec![1.0, 0.0]).unwrap();
        assert!(parallel_transport(&m, &path, &v, 100).is_err());
    }
}
