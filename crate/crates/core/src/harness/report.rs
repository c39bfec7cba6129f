//! Machine-readable check reports.

use serde::{Deserialize, Serialize};

/// Pass/fail verdict; pass means the largest absolute error stayed within
/// the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// Error attributed to one evaluation point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointError {
    pub coords: Vec<f64>,
    pub error: f64,
}

/// Outcome of one named check. Serializes to the JSON report the CLI
/// prints: `{check, status, max_abs_error, max_rel_error, tolerance,
/// points, wall_time_s}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: CheckStatus,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub points: Vec<PointError>,
    pub wall_time_s: f64,
}

impl CheckReport {
    /// Assembles a report from per-point errors. `ref_scale` is the
    /// magnitude of the reference values the errors were measured against;
    /// relative errors are absolute errors divided by it (or equal to the
    /// absolute errors when the reference is essentially zero).
    pub fn from_points(
        check: impl Into<String>,
        tolerance: f64,
        points: Vec<PointError>,
        ref_scale: f64,
        wall_time_s: f64,
    ) -> Self {
        let max_abs_error = points.iter().fold(0.0_f64, |m, p| m.max(p.error.abs()));
        let max_rel_error = if ref_scale > 1e-300 {
            max_abs_error / ref_scale
        } else {
            max_abs_error
        };
        let status = if max_abs_error <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            check: check.into(),
            status,
            max_abs_error,
            max_rel_error,
            tolerance,
            points,
            wall_time_s,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    /// One-line human summary, used by the CLI alongside the JSON report.
    pub fn summary(&self) -> String {
        format!(
            "{}: {} (max_abs_error {:.3e}, tolerance {:.3e})",
            self.check,
            match self.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
            },
            self.max_abs_error,
            self.tolerance
        )
    }
}
