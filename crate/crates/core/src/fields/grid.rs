//! Rectangular sample grids with componentwise bilinear interpolation and
//! CSV persistence.
//!
//! CSV layout: header `coord1,coord2,c_<multi-index>...`, one sample per
//! row, rows in row-major grid order (coord1 outer, coord2 inner).

use std::path::Path as FsPath;

use crate::error::{Error, Result};
use crate::tensor::{component_labels, TensorRank};

/// Axis-aligned bounding box of a grid, used as its field region.
#[derive(Debug, Clone, Copy)]
pub struct GridBounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl GridBounds {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == 2
            && (self.min[0]..=self.max[0]).contains(&x[0])
            && (self.min[1]..=self.max[1]).contains(&x[1])
    }
}

/// A rank-tagged rectangular grid of tensor components on a 2d chart.
#[derive(Debug, Clone)]
pub struct GridField {
    rank: TensorRank,
    origin: [f64; 2],
    spacing: [f64; 2],
    shape: [usize; 2],
    /// Node components, indexed `ix * shape[1] + iy`.
    values: Vec<Vec<f64>>,
}

impl GridField {
    /// Builds a grid by sampling a component oracle at the grid nodes.
    pub fn tabulate<F>(
        rank: TensorRank,
        origin: [f64; 2],
        spacing: [f64; 2],
        shape: [usize; 2],
        oracle: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        if shape[0] < 2 || shape[1] < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 nodes per axis, got {shape:?}"
            )));
        }
        if spacing[0] <= 0.0 || spacing[1] <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid spacing must be positive, got {spacing:?}"
            )));
        }
        let n_comp = rank.component_count(2);
        let mut values = Vec::with_capacity(shape[0] * shape[1]);
        for ix in 0..shape[0] {
            for iy in 0..shape[1] {
                let x = [
                    origin[0] + ix as f64 * spacing[0],
                    origin[1] + iy as f64 * spacing[1],
                ];
                let comps = oracle(&x);
                if comps.len() != n_comp {
                    return Err(Error::DimensionMismatch {
                        expected: n_comp,
                        actual: comps.len(),
                    });
                }
                values.push(comps);
            }
        }
        Ok(Self {
            rank,
            origin,
            spacing,
            shape,
            values,
        })
    }

    pub fn rank(&self) -> TensorRank {
        self.rank
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn bounds(&self) -> GridBounds {
        GridBounds {
            min: self.origin,
            max: [
                self.origin[0] + (self.shape[0] - 1) as f64 * self.spacing[0],
                self.origin[1] + (self.shape[1] - 1) as f64 * self.spacing[1],
            ],
        }
    }

    fn node(&self, ix: usize, iy: usize) -> &[f64] {
        &self.values[ix * self.shape[1] + iy]
    }

    /// Componentwise bilinear interpolation; exact at grid nodes.
    pub fn interpolate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.bounds().contains(x) {
            return Err(Error::OutOfRegion { coords: x.to_vec() });
        }
        let locate = |coord: f64, axis: usize| -> (usize, f64) {
            let rel = (coord - self.origin[axis]) / self.spacing[axis];
            let cell = (rel.floor() as usize).min(self.shape[axis] - 2);
            (cell, rel - cell as f64)
        };
        let (ix, fx) = locate(x[0], 0);
        let (iy, fy) = locate(x[1], 1);
        let (c00, c01) = (self.node(ix, iy), self.node(ix, iy + 1));
        let (c10, c11) = (self.node(ix + 1, iy), self.node(ix + 1, iy + 1));
        let n = self.rank.component_count(2);
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let bottom = c00[k] * (1.0 - fx) + c10[k] * fx;
            let top = c01[k] * (1.0 - fx) + c11[k] * fx;
            out.push(bottom * (1.0 - fy) + top * fy);
        }
        Ok(out)
    }

    /// Writes the grid as CSV in row-major node order.
    pub fn save_csv(&self, path: &FsPath) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["coord1".to_string(), "coord2".to_string()];
        header.extend(component_labels(self.rank, 2, "c_"));
        w.write_record(&header)?;
        for ix in 0..self.shape[0] {
            for iy in 0..self.shape[1] {
                let x0 = self.origin[0] + ix as f64 * self.spacing[0];
                let x1 = self.origin[1] + iy as f64 * self.spacing[1];
                let mut rec = vec![x0.to_string(), x1.to_string()];
                rec.extend(self.node(ix, iy).iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Loads a grid written by [`GridField::save_csv`]. The declared rank
    /// fixes the component count; node coordinates must form a uniform
    /// rectangular grid in row-major order.
    pub fn load_csv(path: &FsPath, rank: TensorRank) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let n_comp = rank.component_count(2);
        let expected_header: Vec<String> = {
            let mut h = vec!["coord1".to_string(), "coord2".to_string()];
            h.extend(component_labels(rank, 2, "c_"));
            h
        };
        let header: Vec<String> = r.headers()?.iter().map(|s| s.to_string()).collect();
        if header != expected_header {
            return Err(Error::Config(format!(
                "grid CSV header {header:?} does not match rank {rank} (expected {expected_header:?})"
            )));
        }

        let mut coords: Vec<[f64; 2]> = Vec::new();
        let mut values: Vec<Vec<f64>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 2 + n_comp {
                return Err(Error::Config(format!(
                    "grid CSV row has {} columns, expected {}",
                    rec.len(),
                    2 + n_comp
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number '{s}' in grid CSV: {e}")))
            };
            coords.push([parse(&rec[0])?, parse(&rec[1])?]);
            let mut comps = Vec::with_capacity(n_comp);
            for k in 0..n_comp {
                comps.push(parse(&rec[2 + k])?);
            }
            values.push(comps);
        }
        if coords.len() < 4 {
            return Err(Error::Config(format!(
                "grid CSV has {} rows; need at least a 2x2 grid",
                coords.len()
            )));
        }

        // Infer shape: coord1 is constant within each inner block.
        let ny = coords
            .iter()
            .position(|c| (c[0] - coords[0][0]).abs() > 1e-12)
            .unwrap_or(coords.len());
        if ny < 2 || !coords.len().is_multiple_of(ny) {
            return Err(Error::Config(
                "grid CSV rows do not form a rectangular row-major grid".into(),
            ));
        }
        let nx = coords.len() / ny;
        if nx < 2 {
            return Err(Error::Config("grid CSV needs at least 2 coord1 levels".into()));
        }
        let origin = coords[0];
        let spacing = [coords[ny][0] - origin[0], coords[1][1] - origin[1]];
        if spacing[0] <= 0.0 || spacing[1] <= 0.0 {
            return Err(Error::Config(format!(
                "grid CSV spacing must be positive, got {spacing:?}"
            )));
        }
        let scale = |axis: usize| spacing[axis].abs().max(1.0);
        for ix in 0..nx {
            for iy in 0..ny {
                let c = coords[ix * ny + iy];
                let expect = [
                    origin[0] + ix as f64 * spacing[0],
                    origin[1] + iy as f64 * spacing[1],
                ];
                if (c[0] - expect[0]).abs() > 1e-9 * scale(0)
                    || (c[1] - expect[1]).abs() > 1e-9 * scale(1)
                {
                    return Err(Error::Config(format!(
                        "grid CSV node {c:?} deviates from uniform grid position {expect:?}"
                    )));
                }
            }
        }
        Ok(Self {
            rank,
            origin,
            spacing,
            shape: [nx, ny],
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product_grid() -> GridField {
        GridField::tabulate(
            TensorRank::scalar(),
            [0.0, 0.0],
            [0.5, 0.5],
            [5, 5],
            |x| vec![x[0] * x[1]],
        )
        .unwrap()
    }

    #[test]
    fn interpolation_is_exact_at_nodes() {
        let g = product_grid();
        let v = g.interpolate(&[1.0, 1.5]).unwrap();
        assert!((v[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bilinear_is_exact_for_bilinear_functions() {
        // x*y is itself bilinear, so interpolation reproduces it everywhere.
        let g = product_grid();
        let v = g.interpolate(&[0.8, 1.3]).unwrap();
        assert!((v[0] - 0.8 * 1.3).abs() < 1e-14, "{v:?}");
    }

    #[test]
    fn out_of_bounds_is_rejected() {
        let g = product_grid();
        assert!(matches!(
            g.interpolate(&[-0.1, 0.0]).unwrap_err(),
            Error::OutOfRegion { .. }
        ));
    }

    #[test]
    fn csv_roundtrip_preserves_values() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("grid.csv");
        let g = GridField::tabulate(
            TensorRank::vector(),
            [-1.0, 2.0],
            [0.25, 0.5],
            [4, 3],
            |x| vec![x[0] + x[1], x[0] - x[1]],
        )
        .unwrap();
        g.save_csv(&file).unwrap();
        let loaded = GridField::load_csv(&file, TensorRank::vector()).unwrap();
        assert_eq!(loaded.shape(), [4, 3]);
        assert!((loaded.spacing()[0] - 0.25).abs() < 1e-12);
        let a = g.interpolate(&[-0.3, 2.7]).unwrap();
        let b = loaded.interpolate(&[-0.3, 2.7]).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
        assert!((a[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn csv_header_mismatch_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("grid.csv");
        product_grid().save_csv(&file).unwrap();
        let err = GridField::load_csv(&file, TensorRank::vector()).unwrap_err();
        assert!(err.is_config_error(), "{err:?}");
    }
}
