//! Christoffel symbols of the Levi-Civita connection, computed from the
//! metric by central finite differences.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::ChartManifold;

/// Connection coefficients `Gamma^lambda_{mu nu}` at a point, symmetric in
/// the lower index pair by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelSymbols {
    dim: usize,
    /// Flattened as `lambda * d^2 + mu * d + nu`.
    values: Vec<f64>,
}

impl ChristoffelSymbols {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Gamma^lambda_{mu nu}`.
    pub fn gamma(&self, lambda: usize, mu: usize, nu: usize) -> f64 {
        self.values[(lambda * self.dim + mu) * self.dim + nu]
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Computes the symbols at `x` from metric derivatives:
    /// `Gamma^lambda_{mu nu} = (1/2) g^{lambda sigma}
    ///  (d_mu g_{sigma nu} + d_nu g_{sigma mu} - d_sigma g_{mu nu})`.
    ///
    /// Each partial derivative uses a central difference with per-coordinate
    /// step `h_mu = 1e-5 * max(1, |x^mu|)`; both stencil points must lie in
    /// the chart domain.
    pub fn compute(manifold: &ChartManifold, x: &[f64]) -> Result<Self> {
        let d = manifold.dim();
        let g_inv = manifold.inverse_metric_at(x)?;

        // dg[mu] holds the matrix d_mu g evaluated at x.
        let mut dg: Vec<DMatrix<f64>> = Vec::with_capacity(d);
        for mu in 0..d {
            let h = 1e-5 * x[mu].abs().max(1.0);
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[mu] += h;
            minus[mu] -= h;
            for stencil in [&plus, &minus] {
                if !manifold.contains(stencil) {
                    return Err(Error::StencilOutOfDomain {
                        chart: manifold.name().to_string(),
                        coords: x.to_vec(),
                        step: h,
                    });
                }
            }
            let gp = manifold.metric_at(&plus)?;
            let gm = manifold.metric_at(&minus)?;
            dg.push((gp - gm) / (2.0 * h));
        }

        let mut values = vec![0.0; d * d * d];
        for lambda in 0..d {
            for mu in 0..d {
                for nu in mu..d {
                    let mut acc = 0.0;
                    for sigma in 0..d {
                        acc += g_inv[(lambda, sigma)]
                            * (dg[mu][(sigma, nu)] + dg[nu][(sigma, mu)] - dg[sigma][(mu, nu)]);
                    }
                    let gamma = 0.5 * acc;
                    values[(lambda * d + mu) * d + nu] = gamma;
                    values[(lambda * d + nu) * d + mu] = gamma;
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite Christoffel symbols at {x:?}"
            )));
        }
        Ok(Self { dim: d, values })
    }
}

impl ChartManifold {
    /// Christoffel symbols at `x`; see [`ChristoffelSymbols::compute`].
    pub fn christoffel_at(&self, x: &[f64]) -> Result<ChristoffelSymbols> {
        ChristoffelSymbols::compute(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::presets;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn flat_symbols_vanish() {
        let m = presets::flat2d_cartesian();
        let c = m.christoffel_at(&[0.4, -1.2]).unwrap();
        assert!(c.max_abs() < 1e-10, "max {}", c.max_abs());
    }

    #[test]
    fn sphere_symbols_match_closed_form() {
        let m = presets::sphere(1.0, 1e-3);
        let theta = FRAC_PI_3;
        let c = m.christoffel_at(&[theta, 0.0]).unwrap();
        let expect_tpp = -theta.sin() * theta.cos();
        let expect_ptp = theta.cos() / theta.sin();
        assert!((c.gamma(0, 1, 1) - expect_tpp).abs() < 1e-7, "{}", c.gamma(0, 1, 1));
        assert!((c.gamma(1, 0, 1) - expect_ptp).abs() < 1e-7, "{}", c.gamma(1, 0, 1));
        assert!((c.gamma(1, 1, 0) - expect_ptp).abs() < 1e-7);
        assert!(c.gamma(0, 0, 0).abs() < 1e-8);
        assert!(c.gamma(1, 1, 1).abs() < 1e-8);
    }

    #[test]
    fn polar_symbols_match_closed_form() {
        let m = presets::flat2d_polar();
        let rho = 2.0;
        let c = m.christoffel_at(&[rho, 0.7]).unwrap();
        assert!((c.gamma(0, 1, 1) - (-rho)).abs() < 1e-8);
        assert!((c.gamma(1, 0, 1) - 1.0 / rho).abs() < 1e-8);
        assert!(c.gamma(0, 0, 0).abs() < 1e-9);
    }

    #[test]
    fn symmetry_in_lower_indices() {
        let m = presets::graph_quadratic(0.8);
        let c = m.christoffel_at(&[0.7, -0.3]).unwrap();
        for l in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    assert_eq!(c.gamma(l, a, b), c.gamma(l, b, a));
                }
            }
        }
    }

    #[test]
    fn stencil_near_boundary_errors() {
        let m = presets::sphere(1.0, 1e-3);
        // theta within 1e-5 of the polar margin: the minus stencil leaves the domain.
        let err = m.christoffel_at(&[1e-3 + 1e-6, 0.0]).unwrap_err();
        assert!(matches!(err, Error::StencilOutOfDomain { .. }));
    }
}
