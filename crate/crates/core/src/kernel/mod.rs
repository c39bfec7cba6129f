//! Tangent-space convolution kernels tabulated over a ball quadrature, and
//! weight sharing by parallel transport from a reference point.

mod families;
mod quadrature;

pub use families::{kernel_from_family, load_kernel_csv, save_kernel_csv};
pub use quadrature::{build_quadrature, gauss_legendre, TangentQuadrature};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{transport_matrix, ChartManifold, Path, PointCoords, TangentVec};
use crate::tensor::{push_tensor, TensorRank, TensorValue};

/// A kernel anchored at a reference point: one coefficient tensor per
/// quadrature node. Coefficients have `rank_out.n_out` contravariant and
/// `rank_in.n_out` covariant slots; the covariant slots contract against the
/// input field's contravariant slots during convolution. Input and output
/// field ranks must be purely contravariant.
#[derive(Debug, Clone)]
pub struct SharedKernel {
    rank_in: TensorRank,
    rank_out: TensorRank,
    quad: TangentQuadrature,
    coeffs: Vec<TensorValue>,
}

impl SharedKernel {
    pub fn new(
        rank_in: TensorRank,
        rank_out: TensorRank,
        quad: TangentQuadrature,
        coeffs: Vec<TensorValue>,
    ) -> Result<Self> {
        if rank_in.n_in != 0 || rank_out.n_in != 0 {
            return Err(Error::RankMismatch {
                expected: "purely contravariant field ranks".into(),
                actual: format!("in {rank_in}, out {rank_out}"),
            });
        }
        if coeffs.len() != quad.len() {
            return Err(Error::DimensionMismatch {
                expected: quad.len(),
                actual: coeffs.len(),
            });
        }
        let coeff_rank = TensorRank::new(rank_out.n_out, rank_in.n_out);
        for c in &coeffs {
            if c.rank != coeff_rank {
                return Err(Error::RankMismatch {
                    expected: coeff_rank.to_string(),
                    actual: c.rank.to_string(),
                });
            }
            if c.base != *quad.base() {
                return Err(Error::InvalidArgument(format!(
                    "kernel coefficient based at {} but quadrature at {}",
                    c.base,
                    quad.base()
                )));
            }
        }
        Ok(Self {
            rank_in,
            rank_out,
            quad,
            coeffs,
        })
    }

    pub fn ref_point(&self) -> &PointCoords {
        self.quad.base()
    }

    pub fn rank_in(&self) -> TensorRank {
        self.rank_in
    }

    pub fn rank_out(&self) -> TensorRank {
        self.rank_out
    }

    /// Rank of the per-node coefficient tensors.
    pub fn coeff_rank(&self) -> TensorRank {
        TensorRank::new(self.rank_out.n_out, self.rank_in.n_out)
    }

    pub fn quad(&self) -> &TangentQuadrature {
        &self.quad
    }

    pub fn coeffs(&self) -> &[TensorValue] {
        &self.coeffs
    }

    /// Applies a linear tangent map at the reference point to the whole
    /// kernel table: nodes map through `p`, coefficients through the tensor
    /// action of `p`, weights pick up `|det p|` (the coordinate measure
    /// factor), and the table is rebased to `new_base`. Parallel transport
    /// and chart transitions are both instances of this.
    pub fn mapped(&self, p: &DMatrix<f64>, new_base: PointCoords) -> Result<SharedKernel> {
        let p_inv = p.clone().try_inverse().ok_or_else(|| {
            Error::Numerical("singular tangent map applied to kernel".into())
        })?;
        let det = p.determinant().abs();
        let mut nodes = Vec::with_capacity(self.quad.len());
        let mut weights = Vec::with_capacity(self.quad.len());
        let mut coeffs = Vec::with_capacity(self.quad.len());
        for ((node, w), coeff) in self
            .quad
            .nodes()
            .iter()
            .zip(self.quad.weights())
            .zip(&self.coeffs)
        {
            let moved = p * node.to_vector();
            nodes.push(TangentVec::new(
                new_base.clone(),
                moved.iter().copied().collect(),
            )?);
            weights.push(det * w);
            let pushed = push_tensor(coeff, p, &p_inv)?;
            coeffs.push(TensorValue::new(
                pushed.rank,
                new_base.clone(),
                pushed.components,
            )?);
        }
        let (n_r, n_ang) = self.quad.resolution();
        let quad = TangentQuadrature::from_parts(
            self.quad.radius(),
            new_base,
            nodes,
            weights,
            n_r,
            n_ang,
        )?;
        SharedKernel::new(self.rank_in, self.rank_out, quad, coeffs)
    }
}

/// Shares the kernel along `path` by parallel transport: node vectors and
/// coefficient tensors move with the transport map of the path, and weights
/// scale with its determinant so the shared table still discretizes the
/// coordinate measure at the endpoint. A zero-length path returns the input
/// kernel unchanged.
pub fn share_kernel(
    m: &ChartManifold,
    k: &SharedKernel,
    path: &Path,
    steps_per_unit: usize,
) -> Result<SharedKernel> {
    let start_dev: f64 = k
        .ref_point()
        .as_slice()
        .iter()
        .zip(path.start().as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if start_dev > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "sharing path starts at {} but kernel is anchored at {}",
            path.start(),
            k.ref_point()
        )));
    }
    if path.chord_length() == 0.0 {
        return Ok(k.clone());
    }
    let p = transport_matrix(m, path, steps_per_unit)?;
    let shared = k.mapped(&p, path.end().clone())?;
    shared.quad().validate(m)?;
    Ok(shared)
}

/// Outcome of the two-path consistency check: the largest componentwise
/// deviation between the path-1 kernel and the holonomy-conjugated path-2
/// kernel, plus the holonomy rotation angle measured in a g-orthonormal
/// frame at the common endpoint.
#[derive(Debug, Clone, Copy)]
pub struct TwoPathReport {
    pub max_deviation: f64,
    pub holonomy_angle: f64,
}

/// Shares `k` along two paths with common endpoints and verifies that the
/// results differ exactly by the holonomy `H` of the loop (reverse of path
/// 2, then path 1), computed independently by transporting a basis around
/// that loop: nodes satisfy `n1 = H n2`, coefficients `c1 = rho(H) c2`, and
/// weights `w1 = |det H| w2`.
pub fn kernel_two_path_relation(
    m: &ChartManifold,
    k: &SharedKernel,
    path1: &Path,
    path2: &Path,
    steps_per_unit: usize,
) -> Result<TwoPathReport> {
    let agree = |a: &PointCoords, b: &PointCoords| {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .all(|(x, y)| (x - y).abs() < 1e-12)
    };
    if !agree(path1.start(), path2.start()) || !agree(path1.end(), path2.end()) {
        return Err(Error::InvalidPath(
            "two-path relation needs paths with common start and end".into(),
        ));
    }

    let k1 = share_kernel(m, k, path1, steps_per_unit)?;
    let k2 = share_kernel(m, k, path2, steps_per_unit)?;

    let loop_path = path2.reversed().concat(path1)?;
    let h = transport_matrix(m, &loop_path, steps_per_unit)?;
    let conjugated = k2.mapped(&h, path1.end().clone())?;

    let mut max_dev: f64 = 0.0;
    for i in 0..k1.quad().len() {
        let n1 = &k1.quad().nodes()[i].components;
        let n2 = &conjugated.quad().nodes()[i].components;
        for (a, b) in n1.iter().zip(n2) {
            max_dev = max_dev.max((a - b).abs());
        }
        max_dev = max_dev.max(k1.coeffs()[i].max_abs_diff(&conjugated.coeffs()[i]));
        max_dev = max_dev.max((k1.quad().weights()[i] - conjugated.quad().weights()[i]).abs());
    }
    let angle = rotation_angle_in_frame(m, path1.end(), &h)?;
    Ok(TwoPathReport {
        max_deviation: max_dev,
        holonomy_angle: angle,
    })
}

/// Rotation angle of a linear tangent map at `x`, measured in a
/// g-orthonormal frame. For maps that are g-isometries this reads off the
/// holonomy angle; the sign depends on the frame orientation, so callers
/// compare absolute values.
pub fn rotation_angle_in_frame(
    m: &ChartManifold,
    x: &PointCoords,
    p: &DMatrix<f64>,
) -> Result<f64> {
    let e = m.orthonormal_frame(x.as_slice())?;
    let e_inv = e.clone().try_inverse().ok_or_else(|| {
        Error::Numerical(format!("singular orthonormal frame at {x}"))
    })?;
    let p_on = e_inv * p * e;
    let c = 0.5 * (p_on[(0, 0)] + p_on[(1, 1)]);
    let s = 0.5 * (p_on[(1, 0)] - p_on[(0, 1)]);
    Ok(s.atan2(c))
}
