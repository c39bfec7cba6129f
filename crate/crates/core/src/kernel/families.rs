//! Built-in kernel families with closed-form convolution oracles, and CSV
//! persistence for explicit node coefficient tables.
//!
//! Kernel CSV layout: header `v1,v2,c_<multi-index>...`, one row per
//! quadrature node in rule order. Weights are not stored; they are rebuilt
//! from the quadrature rule named in the configuration.

use std::path::Path as FsPath;

use crate::error::{Error, Result};
use crate::geometry::ChartManifold;
use crate::kernel::{SharedKernel, TangentQuadrature};
use crate::tensor::{component_labels, TensorRank, TensorValue};

/// Builds a kernel of a named family over the given quadrature:
/// `constant-scalar` (k0 = 1): scalar in, scalar out, constant coefficient;
/// `radial-scalar`: scalar in/out, `K(v) = |v|_g`;
/// `linear-covector`: vector in, scalar out, `K_nu(v) = g_{nu mu} v^mu`;
/// `linear-vector`: scalar in, vector out, `K^mu(v) = v^mu`.
pub fn kernel_from_family(
    m: &ChartManifold,
    family: &str,
    params: &[f64],
    quad: TangentQuadrature,
) -> Result<SharedKernel> {
    let base = quad.base().clone();
    let scalar = TensorRank::scalar();
    let vector = TensorRank::vector();
    match family {
        "constant-scalar" => {
            let k0 = params.first().copied().unwrap_or(1.0);
            let coeffs = quad
                .nodes()
                .iter()
                .map(|_| TensorValue::scalar(base.clone(), k0))
                .collect();
            SharedKernel::new(scalar, scalar, quad, coeffs)
        }
        "radial-scalar" => {
            let coeffs = quad
                .nodes()
                .iter()
                .map(|v| Ok(TensorValue::scalar(base.clone(), m.norm(v)?)))
                .collect::<Result<Vec<_>>>()?;
            SharedKernel::new(scalar, scalar, quad, coeffs)
        }
        "linear-covector" => {
            let g = m.metric_at(base.as_slice())?;
            let coeffs = quad
                .nodes()
                .iter()
                .map(|v| {
                    let lowered = &g * v.to_vector();
                    TensorValue::new(
                        TensorRank::covector(),
                        base.clone(),
                        lowered.iter().copied().collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            SharedKernel::new(vector, scalar, quad, coeffs)
        }
        "linear-vector" => {
            let coeffs = quad
                .nodes()
                .iter()
                .map(|v| TensorValue::vector(base.clone(), v.components.clone()))
                .collect::<Result<Vec<_>>>()?;
            SharedKernel::new(scalar, vector, quad, coeffs)
        }
        other => Err(Error::Config(format!("unknown kernel family '{other}'"))),
    }
}

/// Writes the kernel's node coefficient table as CSV.
pub fn save_kernel_csv(k: &SharedKernel, path: &FsPath) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["v1".to_string(), "v2".to_string()];
    header.extend(component_labels(k.coeff_rank(), 2, "c_"));
    w.write_record(&header)?;
    for (node, coeff) in k.quad().nodes().iter().zip(k.coeffs()) {
        let mut rec: Vec<String> = node.components.iter().map(|v| v.to_string()).collect();
        rec.extend(coeff.components.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a kernel coefficient table against an already built quadrature.
/// Rows must match the rule's nodes in order and position (tolerance 1e-8);
/// weights come from the rule, not the file.
pub fn load_kernel_csv(
    path: &FsPath,
    rank_in: TensorRank,
    rank_out: TensorRank,
    quad: TangentQuadrature,
) -> Result<SharedKernel> {
    let coeff_rank = TensorRank::new(rank_out.n_out, rank_in.n_out);
    let n_comp = coeff_rank.component_count(2);
    let mut r = csv::Reader::from_path(path)?;
    let expected_header: Vec<String> = {
        let mut h = vec!["v1".to_string(), "v2".to_string()];
        h.extend(component_labels(coeff_rank, 2, "c_"));
        h
    };
    let header: Vec<String> = r.headers()?.iter().map(|s| s.to_string()).collect();
    if header != expected_header {
        return Err(Error::Config(format!(
            "kernel CSV header {header:?} does not match coefficient rank {coeff_rank} (expected {expected_header:?})"
        )));
    }

    let base = quad.base().clone();
    let mut coeffs = Vec::with_capacity(quad.len());
    let mut rows = 0usize;
    for rec in r.records() {
        let rec = rec?;
        if rows >= quad.len() {
            rows += 1;
            continue;
        }
        if rec.len() != 2 + n_comp {
            return Err(Error::Config(format!(
                "kernel CSV row has {} columns, expected {}",
                rec.len(),
                2 + n_comp
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number '{s}' in kernel CSV: {e}")))
        };
        let v = [parse(&rec[0])?, parse(&rec[1])?];
        let node = &quad.nodes()[rows].components;
        if (v[0] - node[0]).abs() > 1e-8 || (v[1] - node[1]).abs() > 1e-8 {
            return Err(Error::Config(format!(
                "kernel CSV node {v:?} at row {rows} does not match rule node {node:?}"
            )));
        }
        let mut comps = Vec::with_capacity(n_comp);
        for k in 0..n_comp {
            comps.push(parse(&rec[2 + k])?);
        }
        coeffs.push(TensorValue::new(coeff_rank, base.clone(), comps)?);
        rows += 1;
    }
    if rows != quad.len() {
        return Err(Error::Config(format!(
            "kernel CSV has {rows} rows but the quadrature rule has {} nodes",
            quad.len()
        )));
    }
    SharedKernel::new(rank_in, rank_out, quad, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::presets;
    use crate::geometry::PointCoords;
    use crate::kernel::build_quadrature;

    #[test]
    fn families_have_expected_ranks() {
        let m = presets::flat2d_cartesian();
        let x = PointCoords::new(vec![0.0, 0.0]);
        let quad = build_quadrature(&m, &x, 1.0, 3, 6).unwrap();
        let k = kernel_from_family(&m, "constant-scalar", &[2.0], quad.clone()).unwrap();
        assert_eq!(k.coeff_rank(), TensorRank::scalar());
        assert_eq!(k.coeffs()[0].components, vec![2.0]);
        let k = kernel_from_family(&m, "radial-scalar", &[], quad.clone()).unwrap();
        let norm0 = m.norm(&k.quad().nodes()[0]).unwrap();
        assert!((k.coeffs()[0].components[0] - norm0).abs() < 1e-14);
        let k = kernel_from_family(&m, "linear-covector", &[], quad.clone()).unwrap();
        assert_eq!(k.coeff_rank(), TensorRank::covector());
        // Flat metric: lowered components equal the node components.
        assert_eq!(k.coeffs()[0].components, k.quad().nodes()[0].components);
        let k = kernel_from_family(&m, "linear-vector", &[], quad).unwrap();
        assert_eq!(k.coeff_rank(), TensorRank::vector());
        assert!(kernel_from_family(
            &m,
            "nope",
            &[],
            build_quadrature(&m, &PointCoords::new(vec![0.0, 0.0]), 1.0, 2, 4).unwrap()
        )
        .is_err());
    }

    #[test]
    fn covector_family_lowers_with_metric() {
        let m = presets::flat2d_polar();
        let x = PointCoords::new(vec![2.0, 0.0]);
        let quad = build_quadrature(&m, &x, 0.5, 3, 6).unwrap();
        let k = kernel_from_family(&m, "linear-covector", &[], quad).unwrap();
        for (node, coeff) in k.quad().nodes().iter().zip(k.coeffs()) {
            // g = diag(1, rho^2) at rho = 2.
            assert!((coeff.components[0] - node.components[0]).abs() < 1e-14);
            assert!((coeff.components[1] - 4.0 * node.components[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_csv_roundtrip() {
        let m = presets::flat2d_cartesian();
        let x = PointCoords::new(vec![1.0, -1.0]);
        let quad = build_quadrature(&m, &x, 0.8, 4, 7).unwrap();
        let k = kernel_from_family(&m, "linear-covector", &[], quad.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("kernel.csv");
        save_kernel_csv(&k, &file).unwrap();
        let loaded = load_kernel_csv(
            &file,
            TensorRank::vector(),
            TensorRank::scalar(),
            quad,
        )
        .unwrap();
        for (a, b) in k.coeffs().iter().zip(loaded.coeffs()) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
        assert_eq!(k.quad().weights(), loaded.quad().weights());
    }

    #[test]
    fn kernel_csv_node_mismatch_is_config_error() {
        let m = presets::flat2d_cartesian();
        let x = PointCoords::new(vec![0.0, 0.0]);
        let quad_a = build_quadrature(&m, &x, 0.8, 4, 7).unwrap();
        let quad_b = build_quadrature(&m, &x, 0.9, 4, 7).unwrap();
        let k = kernel_from_family(&m, "radial-scalar", &[], quad_a).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("kernel.csv");
        save_kernel_csv(&k, &file).unwrap();
        let err = load_kernel_csv(
            &file,
            TensorRank::scalar(),
            TensorRank::scalar(),
            quad_b,
        )
        .unwrap_err();
        assert!(err.is_config_error(), "{err:?}");
    }
}
