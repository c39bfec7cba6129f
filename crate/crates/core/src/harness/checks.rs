//! The executable covariance checks.

use std::time::Instant;

use crate::convolution::{
    convolve_at, convolve_field_with_paths, convolve_tabulated, planar_correlation_oracle,
    sharing_path, SharingMode,
};
use crate::error::{Error, Result};
use crate::fields::{transported_localized_field, TensorField};
use crate::geometry::{
    parallel_transport, presets, transport_matrix, ChartManifold, ChartTransition, Path,
    PointCoords,
};
use crate::harness::config::{ExperimentConfig, LoopSpec};
use crate::harness::report::{CheckReport, PointError};
use crate::kernel::{
    build_quadrature, kernel_from_family, kernel_two_path_relation, rotation_angle_in_frame,
    share_kernel,
};
use crate::tensor::{push_tensor, TensorValue};

/// Names accepted by [`run_check`] and the CLI `check` subcommand.
pub const CHECK_NAMES: &[&str] = &[
    "flat-reduction",
    "gauge-equivariance",
    "weight-sharing",
    "holonomy",
];

/// Dispatches a named check against a configuration.
pub fn run_check(name: &str, cfg: &ExperimentConfig) -> Result<CheckReport> {
    match name {
        "flat-reduction" => check_flat_reduction(cfg),
        "gauge-equivariance" => check_gauge_equivariance(cfg),
        "weight-sharing" => check_weight_sharing(cfg),
        "holonomy" => check_holonomy(cfg),
        other => Err(Error::Config(format!(
            "unknown check '{other}'; available: {}",
            CHECK_NAMES.join(", ")
        ))),
    }
}

/// Output points and sharing paths implied by the config: mode `none`
/// evaluates at the reference point only, over a zero-length path.
fn effective_paths(
    m: &ChartManifold,
    x_star: &PointCoords,
    outputs: Vec<PointCoords>,
    mode: SharingMode,
    steps: usize,
) -> Result<(Vec<PointCoords>, Vec<Path>)> {
    if mode == SharingMode::None {
        let stay = Path::from_points(vec![x_star.clone(), x_star.clone()])?;
        return Ok((vec![x_star.clone()], vec![stay]));
    }
    let outs = if outputs.is_empty() {
        vec![x_star.clone()]
    } else {
        outputs
    };
    let paths = outs
        .iter()
        .map(|p| sharing_path(m, x_star, p, mode, steps))
        .collect::<Result<Vec<_>>>()?;
    Ok((outs, paths))
}

/// Covariant convolution on the flat Cartesian chart against the direct
/// planar quadrature oracle over the same nodes.
pub fn check_flat_reduction(cfg: &ExperimentConfig) -> Result<CheckReport> {
    let t0 = Instant::now();
    let m = cfg.build_manifold()?;
    if m.name() != "flat2d-cartesian" {
        return Err(Error::Config(format!(
            "flat-reduction runs on the flat2d-cartesian preset, not '{}'",
            m.name()
        )));
    }
    let x_star = cfg.ref_point()?;
    let kernel = cfg.build_kernel(&m, &x_star)?;
    let field = cfg.build_field(m.name())?;
    let steps = cfg.steps();
    let (outs, paths) = effective_paths(&m, &x_star, cfg.output_points(), cfg.sharing_mode, steps)?;

    let mut points = Vec::with_capacity(outs.len());
    let mut ref_scale = 0.0_f64;
    for (p, path) in outs.iter().zip(&paths) {
        let shared = share_kernel(&m, &kernel, path, steps)?;
        let conv = convolve_at(&m, &shared, &field, steps)?;
        let oracle = planar_correlation_oracle(&shared, &field, p)?;
        ref_scale = ref_scale.max(oracle.max_abs());
        points.push(PointError {
            coords: p.as_slice().to_vec(),
            error: conv.max_abs_diff(&oracle),
        });
    }
    let tol = cfg.tolerance.unwrap_or(1e-10);
    Ok(CheckReport::from_points(
        "flat-reduction",
        tol,
        points,
        ref_scale,
        t0.elapsed().as_secs_f64(),
    ))
}

/// Pulls an oracle field through a chart transition: sample in the source
/// chart, push by the pointwise Jacobian. Defined on the image of the
/// overlap region.
fn transitioned_field(
    f_a: &TensorField,
    ct: &ChartTransition,
    chart_b: &str,
) -> Result<TensorField> {
    let rank = f_a.rank();
    let n_comp = rank.component_count(2);
    let (ct_o, fa_o) = (ct.clone(), f_a.clone());
    let oracle = move |xb: &[f64]| -> Vec<f64> {
        let value = (|| -> Result<Vec<f64>> {
            let xa = ct_o.inverse_point(&PointCoords::new(xb.to_vec()))?;
            let va = fa_o.sample(&xa)?;
            let j = ct_o.transition_jacobian(&xa)?;
            let j_inv = j
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numerical("singular transition Jacobian".into()))?;
            Ok(push_tensor(&va, &j, &j_inv)?.components)
        })();
        value.unwrap_or_else(|_| vec![f64::NAN; n_comp])
    };
    let (ct_r, fa_r) = (ct.clone(), f_a.clone());
    let region = move |xb: &[f64]| {
        ct_r.inverse_point(&PointCoords::new(xb.to_vec()))
            .map(|xa| ct_r.in_overlap(xa.as_slice()) && fa_r.in_region(xa.as_slice()))
            .unwrap_or(false)
    };
    Ok(TensorField::from_oracle(rank, chart_b, oracle).with_region(region))
}

/// Maps a path samplewise through a transition, keeping the parameters.
fn transition_path(ct: &ChartTransition, path: &Path) -> Result<Path> {
    let samples = path
        .samples()
        .iter()
        .map(|s| ct.transition_point(s))
        .collect::<Result<Vec<_>>>()?;
    Path::new(samples, path.params().to_vec())
}

/// Runs the same convolution in two charts related by a transition and
/// compares: outputs computed in chart B on the transitioned kernel, field,
/// and sharing paths must equal the chart-A outputs pushed by the pointwise
/// Jacobian.
pub fn check_gauge_equivariance(cfg: &ExperimentConfig) -> Result<CheckReport> {
    let t0 = Instant::now();
    let m_a = cfg.build_manifold()?;
    let m_b = cfg.build_manifold_b()?;
    let ct = cfg.build_transition()?;
    let x_a = cfg.ref_point()?;
    let kernel_a = cfg.build_kernel(&m_a, &x_a)?;
    let field_a = cfg.build_field(m_a.name())?;
    let steps = cfg.steps();
    let (outs, paths_a) =
        effective_paths(&m_a, &x_a, cfg.output_points(), cfg.sharing_mode, steps)?;
    let outs_a = convolve_field_with_paths(&m_a, &kernel_a, &field_a, &paths_a, steps)?;

    let x_b = ct.transition_point(&x_a)?;
    let j_star = ct.transition_jacobian(&x_a)?;
    let kernel_b = kernel_a.mapped(&j_star, x_b)?;
    let field_b = transitioned_field(&field_a, &ct, m_b.name())?;
    let paths_b = paths_a
        .iter()
        .map(|p| transition_path(&ct, p))
        .collect::<Result<Vec<_>>>()?;
    let outs_b = convolve_field_with_paths(&m_b, &kernel_b, &field_b, &paths_b, steps)?;

    let mut points = Vec::with_capacity(outs.len());
    let mut ref_scale = 0.0_f64;
    for ((p_a, out_a), out_b) in outs.iter().zip(&outs_a).zip(&outs_b) {
        let j = ct.transition_jacobian(p_a)?;
        let j_inv = j
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular transition Jacobian".into()))?;
        let pushed = push_tensor(out_a, &j, &j_inv)?;
        let expected = TensorValue::new(pushed.rank, out_b.base.clone(), pushed.components)?;
        ref_scale = ref_scale.max(expected.max_abs());
        points.push(PointError {
            coords: p_a.as_slice().to_vec(),
            error: out_b.max_abs_diff(&expected),
        });
    }
    let tol = cfg
        .tolerance
        .unwrap_or(if m_a.name().starts_with("sphere") { 1e-3 } else { 1e-6 });
    Ok(CheckReport::from_points(
        "gauge-equivariance",
        tol,
        points,
        ref_scale,
        t0.elapsed().as_secs_f64(),
    ))
}

/// Transports a localized input and the kernel along the configured path
/// and compares the convolution at the endpoint against the parallel
/// transport of the source output.
pub fn check_weight_sharing(cfg: &ExperimentConfig) -> Result<CheckReport> {
    let t0 = Instant::now();
    let m = cfg.build_manifold()?;
    let path = cfg.build_path()?;
    path.validate_in(&m)?;
    let x = path.start().clone();
    let kernel = cfg.build_kernel(&m, &x)?;
    let field = cfg.build_field(m.name())?;
    let steps = cfg.steps();

    let out_source = convolve_at(&m, &kernel, &field, steps)?;
    let tab = transported_localized_field(&m, &field, &path, kernel.quad(), steps)?;
    let shared = share_kernel(&m, &kernel, &path, steps)?;
    let out_moved = convolve_tabulated(&m, &shared, &tab)?;
    let expected = parallel_transport(&m, &path, &out_source, steps)?;

    let points = vec![PointError {
        coords: path.end().as_slice().to_vec(),
        error: out_moved.max_abs_diff(&expected),
    }];
    let tol = cfg
        .tolerance
        .unwrap_or(if m.name() == "flat2d-cartesian" { 1e-10 } else { 1e-4 });
    Ok(CheckReport::from_points(
        "weight-sharing",
        tol,
        points,
        expected.max_abs(),
        t0.elapsed().as_secs_f64(),
    ))
}

/// Transports a frame around a closed loop, compares the rotation angle to
/// the Gauss-Bonnet prediction, and (where the loop's start point keeps a
/// well-conditioned coordinate frame) verifies the two-path kernel relation
/// across the loop.
pub fn check_holonomy(cfg: &ExperimentConfig) -> Result<CheckReport> {
    let t0 = Instant::now();
    let spec = cfg.loop_spec.clone().unwrap_or(LoopSpec {
        name: "octant".into(),
        params: vec![],
    });
    let fixture = presets::loop_by_name(&spec.name, &spec.params)?;
    let m = &fixture.manifold;
    let steps = cfg.steps();

    let p = transport_matrix(m, &fixture.path, steps)?;
    let angle = rotation_angle_in_frame(m, fixture.path.start(), &p)?;
    let angle_error = (angle.abs() - fixture.predicted_angle).abs();
    let start = fixture.path.start().clone();
    let mut points = vec![PointError {
        coords: start.as_slice().to_vec(),
        error: angle_error,
    }];

    // The lune loop starts at the polar margin where coordinate components
    // of tangent vectors degenerate, so the kernel relation runs on the
    // other fixtures. Split: first leg versus the remaining three reversed,
    // keeping both endpoints at well-conditioned corners.
    if matches!(spec.name.as_str(), "octant" | "triangle" | "rectangle") {
        let corners = fixture.path.samples();
        let path1 = Path::from_points(vec![corners[0].clone(), corners[1].clone()])?;
        let path2 = Path::from_points(vec![
            corners[4].clone(),
            corners[3].clone(),
            corners[2].clone(),
            corners[1].clone(),
        ])?;
        let quad = build_quadrature(m, &start, cfg.quadrature.radius, cfg.quadrature.n_r, cfg.quadrature.n_ang)?;
        let kernel = kernel_from_family(m, "linear-vector", &[], quad)?;
        let relation = kernel_two_path_relation(m, &kernel, &path1, &path2, steps)?;
        points.push(PointError {
            coords: start.as_slice().to_vec(),
            error: relation.max_deviation,
        });
    }

    let tol = cfg
        .tolerance
        .unwrap_or(if spec.name == "rectangle" { 1e-10 } else { 1e-4 });
    let ref_scale = if fixture.predicted_angle > 0.0 {
        fixture.predicted_angle
    } else {
        1.0
    };
    Ok(CheckReport::from_points(
        "holonomy",
        tol,
        points,
        ref_scale,
        t0.elapsed().as_secs_f64(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{FieldSpec, KernelSpec, ManifoldSpec, TransitionSpec};

    fn base_cfg(manifold: &str) -> ExperimentConfig {
        serde_json::from_str(&format!(
            r#"{{ "manifold": {{"name": "{manifold}"}} }}"#
        ))
        .unwrap()
    }

    #[test]
    fn flat_reduction_passes_on_defaults() {
        let mut cfg = base_cfg("flat2d-cartesian");
        cfg.ref_point = Some(vec![2.0, 0.0]);
        cfg.quadrature.radius = 1.0;
        cfg.field = Some(FieldSpec::Named {
            name: "linear-scalar".into(),
            params: vec![1.0, 0.0, 0.0],
        });
        cfg.output_points = vec![vec![2.0, 0.0], vec![3.0, 1.0]];
        let report = check_flat_reduction(&cfg).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.points.len(), 2);
    }

    #[test]
    fn flat_reduction_rejects_curved_manifolds() {
        let mut cfg = base_cfg("sphere");
        cfg.ref_point = Some(vec![1.0, 0.0]);
        let err = check_flat_reduction(&cfg).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn zero_kernel_reduction_is_exact() {
        let mut cfg = base_cfg("flat2d-cartesian");
        cfg.ref_point = Some(vec![0.0, 0.0]);
        cfg.kernel = Some(KernelSpec::Family {
            family: "constant-scalar".into(),
            params: vec![0.0],
        });
        let report = check_flat_reduction(&cfg).unwrap();
        assert!(report.passed());
        assert_eq!(report.max_abs_error, 0.0);
    }

    #[test]
    fn gauge_equivariance_identity_transition_is_tight() {
        let mut cfg = base_cfg("flat2d-cartesian");
        cfg.ref_point = Some(vec![1.0, 1.0]);
        cfg.chart_transition = Some(TransitionSpec {
            name: "identity".into(),
            params: vec![],
        });
        cfg.field = Some(FieldSpec::Named {
            name: "bump-scalar".into(),
            params: vec![1.2, 0.8, 0.6, 1.0],
        });
        cfg.kernel = Some(KernelSpec::Family {
            family: "linear-vector".into(),
            params: vec![],
        });
        cfg.quadrature.radius = 0.5;
        cfg.quadrature.n_r = 3;
        cfg.quadrature.n_ang = 6;
        cfg.integrator.steps_per_unit = 60;
        let report = check_gauge_equivariance(&cfg).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.max_abs_error < 1e-14, "{report:?}");
    }

    #[test]
    fn weight_sharing_flat_translation_passes() {
        let mut cfg = base_cfg("flat2d-cartesian");
        cfg.path = Some(vec![vec![0.0, 0.0], vec![3.0, 1.0]]);
        cfg.field = Some(FieldSpec::Named {
            name: "bump-scalar".into(),
            params: vec![0.2, -0.1, 0.5, 1.0],
        });
        cfg.kernel = Some(KernelSpec::Family {
            family: "radial-scalar".into(),
            params: vec![],
        });
        cfg.quadrature.radius = 0.6;
        cfg.quadrature.n_r = 3;
        cfg.quadrature.n_ang = 6;
        cfg.integrator.steps_per_unit = 60;
        let report = check_weight_sharing(&cfg).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.max_abs_error < 1e-10);
    }

    #[test]
    fn weight_sharing_zero_length_path_is_exact() {
        let mut cfg = base_cfg("flat2d-cartesian");
        cfg.path = Some(vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        cfg.quadrature.radius = 0.4;
        cfg.quadrature.n_r = 2;
        cfg.quadrature.n_ang = 4;
        cfg.integrator.steps_per_unit = 40;
        let report = check_weight_sharing(&cfg).unwrap();
        assert!(report.passed());
        assert!(report.max_abs_error < 1e-12, "{report:?}");
    }

    #[test]
    fn holonomy_rectangle_is_flat() {
        let mut cfg = base_cfg("flat2d-cartesian");
        cfg.loop_spec = Some(LoopSpec {
            name: "rectangle".into(),
            params: vec![],
        });
        cfg.quadrature.radius = 0.5;
        cfg.quadrature.n_r = 2;
        cfg.quadrature.n_ang = 4;
        cfg.integrator.steps_per_unit = 100;
        let report = check_holonomy(&cfg).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.max_abs_error < 1e-10);
        assert_eq!(report.points.len(), 2);
    }

    #[test]
    fn unknown_check_is_config_error() {
        let cfg = base_cfg("flat2d-cartesian");
        let err = run_check("nope", &cfg).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn run_check_dispatches_by_name() {
        let mut cfg = base_cfg("flat2d-cartesian");
        cfg.loop_spec = Some(LoopSpec {
            name: "rectangle".into(),
            params: vec![],
        });
        cfg.quadrature.n_r = 2;
        cfg.quadrature.n_ang = 4;
        cfg.integrator.steps_per_unit = 50;
        let report = run_check("holonomy", &cfg).unwrap();
        assert_eq!(report.check, "holonomy");
        let _ = ManifoldSpec {
            name: "sphere".into(),
            params: vec![],
        };
    }
}
