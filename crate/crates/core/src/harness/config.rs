//! JSON experiment configuration: presets by name, quadrature and
//! integrator settings, and check selection.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::convolution::SharingMode;
use crate::error::{Error, Result};
use crate::fields::{field_by_name, GridField, TensorField};
use crate::geometry::{presets, ChartManifold, ChartTransition, Path, PointCoords};
use crate::kernel::{build_quadrature, kernel_from_family, load_kernel_csv, SharedKernel};
use crate::tensor::TensorRank;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// A field is either a named oracle preset or a grid CSV with a declared
/// rank `[n_out, n_in]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FieldSpec {
    Named {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    Csv {
        csv: PathBuf,
        rank: [usize; 2],
    },
}

/// A kernel is either a named family or a node coefficient CSV with
/// declared input/output ranks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum KernelSpec {
    Family {
        family: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    Csv {
        csv: PathBuf,
        rank_in: [usize; 2],
        rank_out: [usize; 2],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub radius: f64,
    #[serde(default = "default_n_r")]
    pub n_r: usize,
    #[serde(default = "default_n_ang")]
    pub n_ang: usize,
}

fn default_n_r() -> usize {
    6
}

fn default_n_ang() -> usize {
    12
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radius: 0.5,
            n_r: default_n_r(),
            n_ang: default_n_ang(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub steps_per_unit: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            steps_per_unit: crate::geometry::DEFAULT_STEPS,
        }
    }
}

/// One experiment: manifold and optional second chart, field, kernel,
/// quadrature, integrator, sharing, output points, and the check to run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold_b: Option<ManifoldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_transition: Option<TransitionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub sharing_mode: SharingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_point: Option<Vec<f64>>,
    #[serde(default)]
    pub output_points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    #[serde(default, rename = "loop", skip_serializing_if = "Option::is_none")]
    pub loop_spec: Option<LoopSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifacts_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads and validates a JSON config file.
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tolerance {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        if self.quadrature.radius <= 0.0 {
            return Err(Error::Config(format!(
                "quadrature radius must be positive, got {}",
                self.quadrature.radius
            )));
        }
        if self.quadrature.n_r == 0 || self.quadrature.n_ang == 0 {
            return Err(Error::Config(
                "quadrature resolutions must be positive".into(),
            ));
        }
        if self.integrator.steps_per_unit == 0 {
            return Err(Error::Config("integrator steps_per_unit must be positive".into()));
        }
        Ok(())
    }

    pub fn build_manifold(&self) -> Result<ChartManifold> {
        presets::manifold_by_name(&self.manifold.name, &self.manifold.params)
    }

    /// Second chart for gauge checks; defaults to the primary manifold.
    pub fn build_manifold_b(&self) -> Result<ChartManifold> {
        match &self.manifold_b {
            Some(spec) => presets::manifold_by_name(&spec.name, &spec.params),
            None => self.build_manifold(),
        }
    }

    pub fn build_transition(&self) -> Result<ChartTransition> {
        match &self.chart_transition {
            Some(spec) => presets::transition_by_name(&spec.name, &spec.params),
            None => Ok(presets::identity_transition(2)),
        }
    }

    pub fn build_field(&self, chart: &str) -> Result<TensorField> {
        match &self.field {
            Some(FieldSpec::Named { name, params }) => field_by_name(name, params, chart),
            Some(FieldSpec::Csv { csv, rank }) => {
                let grid = GridField::load_csv(csv, TensorRank::new(rank[0], rank[1]))?;
                Ok(TensorField::from_grid(grid, chart))
            }
            None => field_by_name("constant-scalar", &[1.0], chart),
        }
    }

    /// Builds the kernel over a fresh quadrature at `at`.
    pub fn build_kernel(&self, m: &ChartManifold, at: &PointCoords) -> Result<SharedKernel> {
        let quad = build_quadrature(
            m,
            at,
            self.quadrature.radius,
            self.quadrature.n_r,
            self.quadrature.n_ang,
        )?;
        match &self.kernel {
            Some(KernelSpec::Family { family, params }) => {
                kernel_from_family(m, family, params, quad)
            }
            Some(KernelSpec::Csv {
                csv,
                rank_in,
                rank_out,
            }) => load_kernel_csv(
                csv,
                TensorRank::new(rank_in[0], rank_in[1]),
                TensorRank::new(rank_out[0], rank_out[1]),
                quad,
            ),
            None => kernel_from_family(m, "constant-scalar", &[1.0], quad),
        }
    }

    pub fn ref_point(&self) -> Result<PointCoords> {
        match &self.ref_point {
            Some(coords) => Ok(PointCoords::new(coords.clone())),
            None => Err(Error::Config("config is missing 'ref_point'".into())),
        }
    }

    pub fn output_points(&self) -> Vec<PointCoords> {
        self.output_points
            .iter()
            .map(|c| PointCoords::new(c.clone()))
            .collect()
    }

    /// The sharing/transport path listed in the config.
    pub fn build_path(&self) -> Result<Path> {
        let points = self
            .path
            .as_ref()
            .ok_or_else(|| Error::Config("config is missing 'path'".into()))?;
        Path::from_points(points.iter().map(|c| PointCoords::new(c.clone())).collect())
            .map_err(|e| Error::Config(format!("invalid config path: {e}")))
    }

    pub fn steps(&self) -> usize {
        self.integrator.steps_per_unit
    }
}
