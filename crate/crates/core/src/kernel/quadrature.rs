//! Tangent-ball quadrature: a polar Gauss-Legendre x uniform-angle product
//! rule in a metric-orthonormal frame, mapped to chart coordinates.

use crate::error::{Error, Result};
use crate::geometry::{ChartManifold, PointCoords, TangentVec};

/// Nodes and weights discretizing the integral over the metric ball
/// `B = {v : v^mu v^nu g_{mu nu}(base) < r^2}` in coordinate components.
/// Weights carry the coordinate measure, so they sum to the coordinate
/// volume of the ball, `pi r^2 / sqrt(det g(base))` in two dimensions.
#[derive(Debug, Clone)]
pub struct TangentQuadrature {
    radius: f64,
    base: PointCoords,
    nodes: Vec<TangentVec>,
    weights: Vec<f64>,
    n_r: usize,
    n_ang: usize,
}

impl TangentQuadrature {
    pub(crate) fn from_parts(
        radius: f64,
        base: PointCoords,
        nodes: Vec<TangentVec>,
        weights: Vec<f64>,
        n_r: usize,
        n_ang: usize,
    ) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::Numerical("quadrature weights must be positive".into()));
        }
        if nodes.iter().any(|n| n.base != base) {
            return Err(Error::InvalidArgument(
                "quadrature nodes must share the base point".into(),
            ));
        }
        Ok(Self {
            radius,
            base,
            nodes,
            weights,
            n_r,
            n_ang,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn base(&self) -> &PointCoords {
        &self.base
    }

    pub fn nodes(&self) -> &[TangentVec] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n_r, self.n_ang)
    }

    /// Sum of weights: the coordinate volume of the ball under this rule.
    pub fn coordinate_volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Checks the ball invariant (`|v|_g < r` for every node) and weight
    /// positivity against a manifold, with a small numerical slack.
    pub fn validate(&self, m: &ChartManifold) -> Result<()> {
        for node in &self.nodes {
            let norm = m.norm(node)?;
            if norm >= self.radius * (1.0 + 1e-9) {
                return Err(Error::Numerical(format!(
                    "quadrature node {:?} has norm {norm} outside radius {}",
                    node.components, self.radius
                )));
            }
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre polynomial with the standard Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (pm1 - x * p) / (1.0 - x * x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // Newton converges from descending Chebyshev guesses; sort ascending.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Builds the tangent-ball rule at `x`: `n_r` Gauss-Legendre radii times
/// `n_ang` uniform angles in a g-orthonormal frame, mapped to coordinate
/// components with the frame volume factor folded into the weights.
pub fn build_quadrature(
    m: &ChartManifold,
    x: &PointCoords,
    r: f64,
    n_r: usize,
    n_ang: usize,
) -> Result<TangentQuadrature> {
    if m.dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "tangent quadrature rules are implemented for d = 2, got d = {}",
            m.dim()
        )));
    }
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be positive, got {r}"
        )));
    }
    if n_r == 0 || n_ang == 0 {
        return Err(Error::InvalidArgument(format!(
            "quadrature resolutions must be positive, got n_r = {n_r}, n_ang = {n_ang}"
        )));
    }
    let frame = m.orthonormal_frame(x.as_slice())?;
    let det_frame = frame.determinant().abs();
    let (gl_nodes, gl_weights) = gauss_legendre(n_r);
    let d_ang = 2.0 * std::f64::consts::PI / n_ang as f64;

    let mut nodes = Vec::with_capacity(n_r * n_ang);
    let mut weights = Vec::with_capacity(n_r * n_ang);
    for (xi, gw) in gl_nodes.iter().zip(&gl_weights) {
        let s = r * 0.5 * (xi + 1.0);
        // Radial measure s ds over [0, r], mapped from [-1, 1].
        let w_radial = gw * (r * 0.5) * s;
        for l in 0..n_ang {
            let phi = d_ang * l as f64;
            let u = [s * phi.cos(), s * phi.sin()];
            let v = [
                frame[(0, 0)] * u[0] + frame[(0, 1)] * u[1],
                frame[(1, 0)] * u[0] + frame[(1, 1)] * u[1],
            ];
            nodes.push(TangentVec::new(x.clone(), v.to_vec())?);
            weights.push(w_radial * d_ang * det_frame);
        }
    }
    let quad = TangentQuadrature::from_parts(r, x.clone(), nodes, weights, n_r, n_ang)?;
    // The rule integrates the constant 1 exactly: sum must equal the
    // coordinate ball volume pi r^2 |det E|.
    let expect = std::f64::consts::PI * r * r * det_frame;
    if (quad.coordinate_volume() - expect).abs() > 1e-10 * expect.max(1.0) {
        return Err(Error::Numerical(format!(
            "quadrature weight sum {} deviates from ball volume {expect}",
            quad.coordinate_volume()
        )));
    }
    quad.validate(m)?;
    Ok(quad)
}
