//! Built-in manifold charts, chart transitions, and holonomy loop fixtures.
//!
//! Presets are selected by name plus a parameter list, matching the harness
//! configuration format. All angles are radians.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{ChartManifold, ChartTransition, Path, PointCoords};

/// Default polar safety margin for spherical charts: theta is restricted to
/// `[margin, pi - margin]` to stay clear of the coordinate singularities.
pub const SPHERE_MARGIN: f64 = 1e-3;

/// Euclidean plane in Cartesian coordinates; the metric is the identity.
pub fn flat2d_cartesian() -> ChartManifold {
    ChartManifold::new(
        "flat2d-cartesian",
        2,
        |_x| DMatrix::identity(2, 2),
        |_x| true,
    )
}

/// Euclidean plane in polar coordinates `(rho, psi)`: metric diag(1, rho^2),
/// valid for `rho > 0`, `|psi| < pi`.
pub fn flat2d_polar() -> ChartManifold {
    ChartManifold::new(
        "flat2d-polar",
        2,
        |x| DMatrix::from_diagonal(&nalgebra::dvector![1.0, x[0] * x[0]]),
        |x| x[0] > 0.0 && x[1].abs() < PI,
    )
}

/// Round sphere of the given radius in angles `(theta, phi)`: metric
/// `radius^2 diag(1, sin^2 theta)`, valid for `theta` in
/// `[margin, pi - margin]`.
pub fn sphere(radius: f64, margin: f64) -> ChartManifold {
    let r2 = radius * radius;
    ChartManifold::new(
        format!("sphere-r{radius}"),
        2,
        move |x| {
            let s = x[0].sin();
            DMatrix::from_diagonal(&nalgebra::dvector![r2, r2 * s * s])
        },
        move |x| x[0] >= margin && x[0] <= PI - margin,
    )
}

/// Graph surface `z = c (x^2 + y^2)` with the induced metric
/// `g = I + grad h grad h^T`.
pub fn graph_quadratic(c: f64) -> ChartManifold {
    ChartManifold::new(
        format!("graph-quadratic-c{c}"),
        2,
        move |x| {
            let hx = 2.0 * c * x[0];
            let hy = 2.0 * c * x[1];
            DMatrix::from_row_slice(2, 2, &[1.0 + hx * hx, hx * hy, hx * hy, 1.0 + hy * hy])
        },
        |_x| true,
    )
}

/// Looks up a manifold preset by name with positional parameters:
/// `flat2d-cartesian` (none), `flat2d-polar` (none),
/// `sphere` (radius = 1, margin = 1e-3), `graph-quadratic` (c = 0.5).
pub fn manifold_by_name(name: &str, params: &[f64]) -> Result<ChartManifold> {
    let take = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
    match name {
        "flat2d-cartesian" => Ok(flat2d_cartesian()),
        "flat2d-polar" => Ok(flat2d_polar()),
        "sphere" => {
            let radius = take(0, 1.0);
            let margin = take(1, SPHERE_MARGIN);
            if radius <= 0.0 || margin <= 0.0 || margin >= PI / 2.0 {
                return Err(Error::Config(format!(
                    "sphere preset needs radius > 0 and margin in (0, pi/2), got {params:?}"
                )));
            }
            Ok(sphere(radius, margin))
        }
        "graph-quadratic" => Ok(graph_quadratic(take(0, 0.5))),
        other => Err(Error::Config(format!("unknown manifold preset '{other}'"))),
    }
}

/// Identity transition on a chart of the given dimension.
pub fn identity_transition(dim: usize) -> ChartTransition {
    ChartTransition::new(
        "identity",
        dim,
        |x| x.to_vec(),
        move |_x| DMatrix::identity(dim, dim),
        |_x| true,
    )
    .with_inverse(|x| x.to_vec())
}

/// Polar `(rho, psi)` to Cartesian `(x, y)`.
pub fn polar_to_cartesian() -> ChartTransition {
    ChartTransition::new(
        "polar-to-cartesian",
        2,
        |x| vec![x[0] * x[1].cos(), x[0] * x[1].sin()],
        |x| {
            let (rho, psi) = (x[0], x[1]);
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    psi.cos(),
                    -rho * psi.sin(),
                    psi.sin(),
                    rho * psi.cos(),
                ],
            )
        },
        |x| x[0] > 0.0 && x[1].abs() < PI - 0.05,
    )
    .with_inverse(|y| vec![y[0].hypot(y[1]), y[1].atan2(y[0])])
}

/// Cartesian `(x, y)` to polar `(rho, psi)`, away from the branch cut on the
/// negative x-axis.
pub fn cartesian_to_polar() -> ChartTransition {
    ChartTransition::new(
        "cartesian-to-polar",
        2,
        |x| vec![x[0].hypot(x[1]), x[1].atan2(x[0])],
        |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let r = r2.sqrt();
            DMatrix::from_row_slice(
                2,
                2,
                &[x[0] / r, x[1] / r, -x[1] / r2, x[0] / r2],
            )
        },
        |x| {
            let r = x[0].hypot(x[1]);
            r > 1e-6 && x[1].atan2(x[0]).abs() < PI - 0.05
        },
    )
    .with_inverse(|p| vec![p[0] * p[1].cos(), p[0] * p[1].sin()])
}

/// Rigid rotation of Cartesian coordinates by `angle`.
pub fn rotate_cartesian(angle: f64) -> ChartTransition {
    let (s, c) = angle.sin_cos();
    ChartTransition::new(
        format!("rotate-cartesian-{angle}"),
        2,
        move |x| vec![c * x[0] - s * x[1], s * x[0] + c * x[1]],
        move |_x| DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        |_x| true,
    )
    .with_inverse(move |y| vec![c * y[0] + s * y[1], -s * y[0] + c * y[1]])
}

/// Embedding unit vector of spherical angles.
fn sphere_embed(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Applies the rotation by `alpha` about the y-axis.
fn rot_y(alpha: f64, v: [f64; 3]) -> [f64; 3] {
    let (s, c) = alpha.sin_cos();
    [c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2]]
}

/// Transition from the standard spherical chart `(theta, phi)` to the chart
/// of a frame rotated by `alpha` about the y-axis. Both charts carry the
/// same round metric, so this transition is an isometry.
pub fn sphere_rotation(alpha: f64, margin: f64) -> ChartTransition {
    let forward = move |x: &[f64]| -> Vec<f64> {
        // New frame reads the point as R^{-1} n(theta, phi).
        let n = rot_y(-alpha, sphere_embed(x[0], x[1]));
        vec![n[2].clamp(-1.0, 1.0).acos(), n[1].atan2(n[0])]
    };
    let jac = move |x: &[f64]| -> DMatrix<f64> {
        let (theta, phi) = (x[0], x[1]);
        let np = rot_y(-alpha, sphere_embed(theta, phi));
        let dn_dtheta = rot_y(
            -alpha,
            [theta.cos() * phi.cos(), theta.cos() * phi.sin(), -theta.sin()],
        );
        let dn_dphi = rot_y(
            -alpha,
            [-theta.sin() * phi.sin(), theta.sin() * phi.cos(), 0.0],
        );
        let sin_tp = (1.0 - np[2] * np[2]).max(0.0).sqrt();
        let planar = np[0] * np[0] + np[1] * np[1];
        let dtheta = |dn: &[f64; 3]| -dn[2] / sin_tp;
        let dphi = |dn: &[f64; 3]| (np[0] * dn[1] - np[1] * dn[0]) / planar;
        DMatrix::from_row_slice(
            2,
            2,
            &[
                dtheta(&dn_dtheta),
                dtheta(&dn_dphi),
                dphi(&dn_dtheta),
                dphi(&dn_dphi),
            ],
        )
    };
    let fwd_for_overlap = forward;
    ChartTransition::new(
        format!("sphere-rotation-{alpha}"),
        2,
        forward,
        jac,
        move |x| {
            if !(x[0] > margin && x[0] < PI - margin && x[1].abs() < PI - 0.05) {
                return false;
            }
            let xp = fwd_for_overlap(x);
            xp[0] > margin && xp[0] < PI - margin && xp[1].abs() < PI - 0.05
        },
    )
    .with_inverse(move |xp| {
        let n = rot_y(alpha, sphere_embed(xp[0], xp[1]));
        vec![n[2].clamp(-1.0, 1.0).acos(), n[1].atan2(n[0])]
    })
}

/// Looks up a transition by name: `identity` (none), `polar-to-cartesian`
/// (none), `cartesian-to-polar` (none), `rotate-cartesian` (angle),
/// `sphere-rotation` (alpha, margin = 1e-3).
pub fn transition_by_name(name: &str, params: &[f64]) -> Result<ChartTransition> {
    let take = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
    match name {
        "identity" => Ok(identity_transition(2)),
        "polar-to-cartesian" => Ok(polar_to_cartesian()),
        "cartesian-to-polar" => Ok(cartesian_to_polar()),
        "rotate-cartesian" => Ok(rotate_cartesian(take(0, std::f64::consts::FRAC_PI_2))),
        "sphere-rotation" => Ok(sphere_rotation(take(0, 0.4), take(1, SPHERE_MARGIN))),
        other => Err(Error::Config(format!("unknown chart transition '{other}'"))),
    }
}

/// A closed loop fixture for holonomy checks: a manifold, the loop path, and
/// the predicted rotation angle of transported vectors (absolute value).
#[derive(Debug, Clone)]
pub struct LoopFixture {
    pub manifold: ChartManifold,
    pub path: Path,
    pub predicted_angle: f64,
    pub description: String,
}

fn pt(a: f64, b: f64) -> PointCoords {
    PointCoords::new(vec![a, b])
}

/// Spherical octant traversed equator, meridian, polar cap, meridian. The
/// polar cap at `theta = margin` trims the enclosed area: solid angle
/// `(pi/2) cos(margin)`.
pub fn octant_loop(margin: f64) -> LoopFixture {
    let half_pi = PI / 2.0;
    let path = Path::from_points(vec![
        pt(half_pi, 0.0),
        pt(half_pi, half_pi),
        pt(margin, half_pi),
        pt(margin, 0.0),
        pt(half_pi, 0.0),
    ])
    .expect("octant loop corners are valid");
    LoopFixture {
        // Half-margin domain keeps the Christoffel stencil inside the
        // chart at the cap corners.
        manifold: sphere(1.0, margin / 2.0),
        path,
        predicted_angle: half_pi * margin.cos(),
        description: "sphere octant loop".into(),
    }
}

/// Full lune between meridians `phi = 0` and `phi = alpha`, truncated at
/// both polar margins: solid angle `2 alpha cos(margin)`.
pub fn lune_loop(alpha: f64, margin: f64) -> Result<LoopFixture> {
    if !(0.0..PI).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::Config(format!(
            "lune angle must lie in (0, pi), got {alpha}"
        )));
    }
    let path = Path::from_points(vec![
        pt(margin, 0.0),
        pt(PI - margin, 0.0),
        pt(PI - margin, alpha),
        pt(margin, alpha),
        pt(margin, 0.0),
    ])?;
    Ok(LoopFixture {
        manifold: sphere(1.0, margin / 2.0),
        path,
        predicted_angle: 2.0 * alpha * margin.cos(),
        description: format!("sphere lune, longitude {alpha}"),
    })
}

/// Polar triangle: along the equator by `alpha`, meridian up to the polar
/// margin, cap arc back, meridian down. Solid angle `alpha cos(margin)`.
pub fn triangle_loop(alpha: f64, margin: f64) -> Result<LoopFixture> {
    if !(0.0..PI).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::Config(format!(
            "triangle angle must lie in (0, pi), got {alpha}"
        )));
    }
    let half_pi = PI / 2.0;
    let path = Path::from_points(vec![
        pt(half_pi, 0.0),
        pt(half_pi, alpha),
        pt(margin, alpha),
        pt(margin, 0.0),
        pt(half_pi, 0.0),
    ])?;
    Ok(LoopFixture {
        manifold: sphere(1.0, margin / 2.0),
        path,
        predicted_angle: alpha * margin.cos(),
        description: format!("sphere polar triangle, longitude {alpha}"),
    })
}

/// Coordinate rectangle in the flat Cartesian chart: zero holonomy.
pub fn rectangle_loop() -> LoopFixture {
    let path = Path::from_points(vec![
        pt(0.0, 0.0),
        pt(2.0, 0.0),
        pt(2.0, 1.0),
        pt(0.0, 1.0),
        pt(0.0, 0.0),
    ])
    .expect("rectangle corners are valid");
    LoopFixture {
        manifold: flat2d_cartesian(),
        path,
        predicted_angle: 0.0,
        description: "flat rectangle loop".into(),
    }
}

/// Looks up a holonomy loop fixture: `octant` (margin = 1e-3), `lune`
/// (alpha = pi/6, margin), `triangle` (alpha = pi/6, margin), `rectangle`.
pub fn loop_by_name(name: &str, params: &[f64]) -> Result<LoopFixture> {
    let take = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
    match name {
        "octant" => Ok(octant_loop(take(0, SPHERE_MARGIN))),
        "lune" => lune_loop(take(0, PI / 6.0), take(1, SPHERE_MARGIN)),
        "triangle" => triangle_loop(take(0, PI / 6.0), take(1, SPHERE_MARGIN)),
        "rectangle" => Ok(rectangle_loop()),
        other => Err(Error::Config(format!("unknown holonomy loop '{other}'"))),
    }
}
