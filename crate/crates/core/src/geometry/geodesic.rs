//! Geodesic integration, the exponential map, and its local inverse.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{ChartManifold, ChristoffelSymbols, Path, PointCoords, TangentVec};

/// Default RK4 steps per unit parameter for geodesics and transport.
pub const DEFAULT_STEPS: usize = 200;

/// A geodesic traced on `[0, 1]`: the sampled trajectory plus the velocity
/// at every sample, kept so transport along the geodesic can reuse it.
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub path: Path,
    pub velocities: Vec<Vec<f64>>,
}

impl Geodesic {
    pub fn end(&self) -> &PointCoords {
        self.path.end()
    }

    /// Velocity at the final sample, as a tangent vector there.
    pub fn end_velocity(&self) -> Result<TangentVec> {
        TangentVec::new(self.end().clone(), self.velocities.last().unwrap().clone())
    }
}

/// Geodesic equation right-hand side: state `(x, u)` with
/// `du^lambda/dt = -Gamma^lambda_{mu nu} u^mu u^nu`.
fn geodesic_rhs(m: &ChartManifold, x: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = m.dim();
    let gamma = ChristoffelSymbols::compute(m, x)?;
    let mut du = vec![0.0; d];
    for (lambda, slot) in du.iter_mut().enumerate() {
        let mut acc = 0.0;
        for mu in 0..d {
            for nu in 0..d {
                acc -= gamma.gamma(lambda, mu, nu) * u[mu] * u[nu];
            }
        }
        *slot = acc;
    }
    Ok((u.to_vec(), du))
}

/// Integrates the geodesic with initial condition `start` over parameter
/// `[0, 1]` with `n_steps` fixed RK4 steps. Every intermediate state must
/// stay inside the chart domain; leaving it reports the last valid sample.
pub fn trace_geodesic(m: &ChartManifold, start: &TangentVec, n_steps: usize) -> Result<Geodesic> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be positive".into()));
    }
    let d = m.dim();
    if start.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: start.dim(),
        });
    }
    if !m.contains(start.base.as_slice()) {
        return Err(Error::InvalidPoint {
            chart: m.name().to_string(),
            coords: start.base.as_slice().to_vec(),
        });
    }

    let h = 1.0 / n_steps as f64;
    let mut x = start.base.as_slice().to_vec();
    let mut u = start.components.clone();
    let mut samples = vec![PointCoords::new(x.clone())];
    let mut params = vec![0.0];
    let mut velocities = vec![u.clone()];

    let exit_err = |m: &ChartManifold, t: f64, last: &[f64]| Error::DomainExit {
        chart: m.name().to_string(),
        param: t,
        last_valid: last.to_vec(),
    };

    for step in 0..n_steps {
        let t = step as f64 * h;
        let stage = |xs: &[f64], us: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
            if !m.contains(xs) {
                return Err(exit_err(m, t, &x));
            }
            geodesic_rhs(m, xs, us)
        };

        let (k1x, k1u) = stage(&x, &u)?;
        let x2 = add_scaled(&x, &k1x, 0.5 * h);
        let u2 = add_scaled(&u, &k1u, 0.5 * h);
        let (k2x, k2u) = stage(&x2, &u2)?;
        let x3 = add_scaled(&x, &k2x, 0.5 * h);
        let u3 = add_scaled(&u, &k2u, 0.5 * h);
        let (k3x, k3u) = stage(&x3, &u3)?;
        let x4 = add_scaled(&x, &k3x, h);
        let u4 = add_scaled(&u, &k3u, h);
        let (k4x, k4u) = stage(&x4, &u4)?;

        for i in 0..d {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            u[i] += h / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
        }
        if !m.contains(&x) {
            return Err(exit_err(m, t + h, samples.last().unwrap().as_slice()));
        }
        samples.push(PointCoords::new(x.clone()));
        params.push(((step + 1) as f64 * h).min(1.0));
        velocities.push(u.clone());
    }
    *params.last_mut().unwrap() = 1.0;

    Ok(Geodesic {
        path: Path::new(samples, params)?,
        velocities,
    })
}

fn add_scaled(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// `exp_x v`: endpoint of the geodesic with initial velocity `v` at
/// parameter 1, with [`DEFAULT_STEPS`] RK4 steps.
pub fn exp_map(m: &ChartManifold, x: &PointCoords, v: &[f64]) -> Result<PointCoords> {
    exp_map_with_steps(m, x, v, DEFAULT_STEPS)
}

pub fn exp_map_with_steps(
    m: &ChartManifold,
    x: &PointCoords,
    v: &[f64],
    n_steps: usize,
) -> Result<PointCoords> {
    if v.iter().all(|c| *c == 0.0) {
        if !m.contains(x.as_slice()) {
            return Err(Error::InvalidPoint {
                chart: m.name().to_string(),
                coords: x.as_slice().to_vec(),
            });
        }
        return Ok(x.clone());
    }
    let start = TangentVec::new(x.clone(), v.to_vec())?;
    Ok(trace_geodesic(m, &start, n_steps)?.end().clone())
}

/// Local inverse of the exponential map by shooting: Newton iteration on the
/// initial velocity with a finite-difference Jacobian of `exp_x`, tolerance
/// 1e-10 on the coordinate residual, at most 50 iterations. Valid only
/// within the injectivity radius of the presets it is used with.
pub fn log_map(m: &ChartManifold, x: &PointCoords, y: &PointCoords) -> Result<TangentVec> {
    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 50;
    let d = m.dim();
    if y.dim() != d || x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: y.dim().max(x.dim()),
        });
    }
    let target = y.to_vector();
    let mut v = &target - x.to_vector();

    let shoot = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let end = exp_map(m, x, v.as_slice())?;
        Ok(end.to_vector())
    };

    for _ in 0..MAX_ITER {
        let f = shoot(&v)? - &target;
        if f.amax() < TOL {
            return TangentVec::new(x.clone(), v.iter().copied().collect());
        }
        // Columns: d(exp_x v)/dv_j by central differences.
        let mut jac = nalgebra::DMatrix::zeros(d, d);
        for j in 0..d {
            let h = 1e-6 * v[j].abs().max(1.0);
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[j] += h;
            vm[j] -= h;
            let col = (shoot(&vp)? - shoot(&vm)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let delta = jac.lu().solve(&f).ok_or_else(|| {
            Error::Numerical(format!("singular shooting Jacobian at {x} -> {y}"))
        })?;
        v -= delta;
    }
    Err(Error::Numerical(format!(
        "log map did not converge from {x} to {y} within {MAX_ITER} iterations"
    )))
}
