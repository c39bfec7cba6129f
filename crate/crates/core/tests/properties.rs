//! Property-based invariants of the geometry and kernel layers.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;

use covconv::geometry::{
    exp_map, log_map, parallel_transport, presets, trace_geodesic, transport_matrix, Path,
    PointCoords, TangentVec,
};
use covconv::kernel::{build_quadrature, kernel_from_family, share_kernel};
use covconv::tensor::{push_tensor, TensorRank, TensorValue};

/// Safe sphere sampling box: away from polar margins and branch issues.
fn sphere_point() -> impl Strategy<Value = PointCoords> {
    (0.5..PI - 0.5, -1.4..1.4_f64).prop_map(|(t, p)| PointCoords::new(vec![t, p]))
}

fn small_components() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0_f64, 2)
}

/// Random 2x2 matrix bounded away from singularity.
fn invertible_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.5..1.5_f64, 4)
        .prop_map(|e| DMatrix::from_row_slice(2, 2, &e))
        .prop_filter("determinant bounded below", |m| {
            m.determinant().abs() > 0.3
        })
}

fn tensor_rank() -> impl Strategy<Value = TensorRank> {
    prop_oneof![
        Just(TensorRank::scalar()),
        Just(TensorRank::vector()),
        Just(TensorRank::covector()),
        Just(TensorRank::new(1, 1)),
        Just(TensorRank::new(2, 0)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Parallel transport preserves the metric inner product.
    #[test]
    fn transport_preserves_inner_products(
        a in sphere_point(),
        b in sphere_point(),
        u in small_components(),
        w in small_components(),
    ) {
        prop_assume!(a != b);
        let m = presets::sphere(1.0, 1e-3);
        let path = Path::segment(a.clone(), b).unwrap();
        let before = m
            .inner(
                &TangentVec::new(a.clone(), u.clone()).unwrap(),
                &TangentVec::new(a.clone(), w.clone()).unwrap(),
            )
            .unwrap();
        let ut = parallel_transport(&m, &path, &TensorValue::vector(a.clone(), u).unwrap(), 150).unwrap();
        let wt = parallel_transport(&m, &path, &TensorValue::vector(a, w).unwrap(), 150).unwrap();
        let end = path.end().clone();
        let after = m
            .inner(
                &TangentVec::new(end.clone(), ut.components).unwrap(),
                &TangentVec::new(end, wt.components).unwrap(),
            )
            .unwrap();
        prop_assert!((before - after).abs() < 1e-8, "{before} vs {after}");
    }

    /// Transport along a path and back is the identity.
    #[test]
    fn transport_reverses(
        a in sphere_point(),
        b in sphere_point(),
        u in small_components(),
    ) {
        prop_assume!(a != b);
        let m = presets::sphere(1.0, 1e-3);
        let path = Path::segment(a.clone(), b).unwrap();
        let v = TensorValue::vector(a, u).unwrap();
        let fwd = parallel_transport(&m, &path, &v, 150).unwrap();
        let back = parallel_transport(&m, &path.reversed(), &fwd, 150).unwrap();
        prop_assert!(back.max_abs_diff(&v) < 1e-8);
    }

    /// Geodesics have constant metric speed.
    #[test]
    fn geodesic_speed_is_constant(
        x in sphere_point(),
        dir in 0.0..2.0 * PI,
        speed in 0.05..0.8_f64,
    ) {
        let m = presets::sphere(1.0, 1e-3);
        let v = vec![speed * dir.cos(), speed * dir.sin() / x.as_slice()[0].sin()];
        let start = TangentVec::new(x, v).unwrap();
        let geo = match trace_geodesic(&m, &start, 200) {
            Ok(g) => g,
            // Trajectories that exit the chart are rejected, not failures.
            Err(_) => return Ok(()),
        };
        // Near-margin transits (sin theta small) amplify the connection
        // coefficients beyond what the fixed step resolves; reject those.
        let min_sin = geo
            .path
            .samples()
            .iter()
            .map(|p| p.as_slice()[0].sin())
            .fold(f64::INFINITY, f64::min);
        if min_sin < 0.15 {
            return Ok(());
        }
        let s0 = m.norm(&start).unwrap();
        for (p, vel) in geo.path.samples().iter().zip(geo.velocities.iter()) {
            let s = m.norm(&TangentVec::new(p.clone(), vel.clone()).unwrap()).unwrap();
            prop_assert!((s - s0).abs() < 1e-8, "speed drifted {s0} -> {s}");
        }
    }

    /// log_map inverts exp_map for moderate velocities.
    #[test]
    fn log_inverts_exp(
        x in sphere_point(),
        dir in 0.0..2.0 * PI,
        speed in 0.05..0.6_f64,
    ) {
        let m = presets::sphere(1.0, 1e-3);
        let v = vec![speed * dir.cos(), speed * dir.sin() / x.as_slice()[0].sin()];
        let y = match exp_map(&m, &x, &v) {
            Ok(y) => y,
            Err(_) => return Ok(()),
        };
        let recovered = match log_map(&m, &x, &y) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        let err = recovered
            .components
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        prop_assert!(err < 1e-8, "log o exp deviates by {err}");
    }

    /// Pushing by J2 after J1 equals pushing by the composite J2 J1.
    #[test]
    fn push_composes(
        rank in tensor_rank(),
        comps in prop::collection::vec(-2.0..2.0_f64, 16),
        j1 in invertible_matrix(),
        j2 in invertible_matrix(),
    ) {
        let base = PointCoords::new(vec![0.0, 0.0]);
        let n = rank.component_count(2);
        let t = TensorValue::new(rank, base, comps[..n].to_vec()).unwrap();
        let j1_inv = j1.clone().try_inverse().unwrap();
        let j2_inv = j2.clone().try_inverse().unwrap();
        let step = push_tensor(&push_tensor(&t, &j1, &j1_inv).unwrap(), &j2, &j2_inv).unwrap();
        let composite = &j2 * &j1;
        let composite_inv = composite.clone().try_inverse().unwrap();
        let direct = push_tensor(&t, &composite, &composite_inv).unwrap();
        let scale = direct.max_abs().max(1.0);
        prop_assert!(step.max_abs_diff(&direct) < 1e-12 * scale);
    }

    /// Pushing by the identity changes nothing.
    #[test]
    fn push_identity_is_exact(
        rank in tensor_rank(),
        comps in prop::collection::vec(-2.0..2.0_f64, 16),
    ) {
        let base = PointCoords::new(vec![0.0, 0.0]);
        let n = rank.component_count(2);
        let t = TensorValue::new(rank, base, comps[..n].to_vec()).unwrap();
        let id = DMatrix::identity(2, 2);
        let pushed = push_tensor(&t, &id, &id).unwrap();
        prop_assert_eq!(pushed.components, t.components);
    }

    /// Quadrature weights are positive and sum to the coordinate ball volume.
    #[test]
    fn quadrature_weights_sum_to_ball_volume(
        x in sphere_point(),
        radius in 0.05..0.4_f64,
        n_r in 2..6_usize,
        n_ang in 4..12_usize,
    ) {
        let m = presets::sphere(1.0, 1e-3);
        let quad = build_quadrature(&m, &x, radius, n_r, n_ang).unwrap();
        prop_assert!(quad.weights().iter().all(|&w| w > 0.0));
        let total: f64 = quad.weights().iter().sum();
        let frame = m.orthonormal_frame(x.as_slice()).unwrap();
        let expected = PI * radius * radius * frame.determinant().abs();
        prop_assert!((total - expected).abs() < 1e-10 * expected.max(1.0));
        quad.validate(&m).unwrap();
    }

    /// Sharing a kernel preserves the metric norm of every node.
    #[test]
    fn share_preserves_node_norms(
        a in sphere_point(),
        b in sphere_point(),
        radius in 0.1..0.35_f64,
    ) {
        prop_assume!(a != b);
        let m = presets::sphere(1.0, 1e-3);
        let quad = build_quadrature(&m, &a, radius, 3, 6).unwrap();
        let k = kernel_from_family(&m, "radial-scalar", &[], quad).unwrap();
        let path = Path::segment(a, b).unwrap();
        let shared = share_kernel(&m, &k, &path, 150).unwrap();
        for (v0, v1) in k.quad().nodes().iter().zip(shared.quad().nodes()) {
            let n0 = m.norm(v0).unwrap();
            let n1 = m.norm(v1).unwrap();
            prop_assert!((n0 - n1).abs() < 1e-8, "node norm drifted {n0} -> {n1}");
        }
    }

    /// Transport computed in the polar chart matches the Cartesian result
    /// pushed through the transition Jacobian.
    #[test]
    fn transport_is_chart_equivariant(
        rho_a in 0.8..2.0_f64,
        psi_a in -1.0..1.0_f64,
        rho_b in 0.8..2.0_f64,
        psi_b in -1.0..1.0_f64,
        u in small_components(),
    ) {
        prop_assume!((rho_a - rho_b).abs() > 1e-3 || (psi_a - psi_b).abs() > 1e-3);
        let polar = presets::flat2d_polar();
        let cart = presets::flat2d_cartesian();
        let ct = presets::polar_to_cartesian();

        let a_p = PointCoords::new(vec![rho_a, psi_a]);
        let b_p = PointCoords::new(vec![rho_b, psi_b]);
        let path_p = Path::segment(a_p.clone(), b_p.clone()).unwrap();
        let v_p = TensorValue::vector(a_p.clone(), u.clone()).unwrap();
        let out_p = parallel_transport(&polar, &path_p, &v_p, 200).unwrap();

        // Same data in the Cartesian chart: transport there is trivial, but
        // the path must follow the image of the polar segment.
        let samples_c: Vec<PointCoords> = path_p
            .samples()
            .iter()
            .map(|s| ct.transition_point(s).unwrap())
            .collect();
        let path_c = Path::new(samples_c, path_p.params().to_vec()).unwrap();
        let j_a = ct.transition_jacobian(&a_p).unwrap();
        let j_a_inv = j_a.clone().try_inverse().unwrap();
        let v_c_raw = push_tensor(&v_p, &j_a, &j_a_inv).unwrap();
        let v_c =
            TensorValue::new(v_c_raw.rank, path_c.start().clone(), v_c_raw.components).unwrap();
        let out_c = parallel_transport(&cart, &path_c, &v_c, 200).unwrap();

        let j_b = ct.transition_jacobian(&b_p).unwrap();
        let j_b_inv = j_b.clone().try_inverse().unwrap();
        let pushed_raw = push_tensor(&out_p, &j_b, &j_b_inv).unwrap();
        let pushed =
            TensorValue::new(pushed_raw.rank, path_c.end().clone(), pushed_raw.components).unwrap();
        prop_assert!(
            pushed.max_abs_diff(&out_c) < 1e-6,
            "chart transport mismatch {} vs {:?}",
            pushed.max_abs_diff(&out_c),
            out_c.components
        );
    }

    /// Finite-difference Jacobians agree with the analytic ones for all
    /// preset transitions at random overlap points.
    #[test]
    fn transition_jacobians_match_fd(
        rho in 0.5..2.5_f64,
        psi in -2.0..2.0_f64,
    ) {
        let x = PointCoords::new(vec![rho, psi]);
        for name in ["polar-to-cartesian", "identity", "rotate-cartesian"] {
            let ct = presets::transition_by_name(name, &[0.7]).unwrap();
            if !ct.in_overlap(x.as_slice()) {
                continue;
            }
            let analytic = ct.transition_jacobian(&x).unwrap();
            let fd = ct.jacobian_fd(&x, 1e-6).unwrap();
            let err = (&analytic - &fd).abs().max();
            prop_assert!(err < 1e-6, "{name} Jacobian FD mismatch {err}");
        }
    }

    /// Christoffel symbols are symmetric in the lower indices.
    #[test]
    fn christoffel_lower_symmetry(x in sphere_point()) {
        let m = presets::sphere(1.0, 1e-3);
        let gamma = m.christoffel_at(x.as_slice()).unwrap();
        for l in 0..2 {
            for mu in 0..2 {
                for nu in 0..2 {
                    prop_assert_eq!(gamma.gamma(l, mu, nu), gamma.gamma(l, nu, mu));
                }
            }
        }
    }

    /// Holonomy of a closed loop is trivial on flat charts, whichever
    /// corners the loop visits.
    #[test]
    fn flat_loops_have_trivial_holonomy(
        corners in prop::collection::vec((-2.0..2.0_f64, -2.0..2.0_f64), 3..6),
    ) {
        let mut pts: Vec<PointCoords> = corners
            .iter()
            .map(|(a, b)| PointCoords::new(vec![*a, *b]))
            .collect();
        // Close the loop; degenerate repeated corners are rejected.
        for w in pts.windows(2) {
            prop_assume!(w[0] != w[1]);
        }
        prop_assume!(pts.first() != pts.last());
        pts.push(pts[0].clone());
        let m = presets::flat2d_cartesian();
        let path = Path::from_points(pts).unwrap();
        let h = transport_matrix(&m, &path, 100).unwrap();
        let err = (&h - DMatrix::identity(2, 2)).abs().max();
        prop_assert!(err < 1e-10);
    }
}
