//! Sampled curves in chart coordinates.
//!
//! A [`Path`] is a polyline: straight coordinate segments between samples,
//! parametrized on `[0, 1]`. Geodesics and user curves share this type, so
//! transport treats both uniformly.

use crate::error::{Error, Result};
use crate::geometry::{ChartManifold, PointCoords};

/// An ordered polyline with strictly increasing parameters spanning `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    samples: Vec<PointCoords>,
    params: Vec<f64>,
}

impl Path {
    /// Builds a path from explicit samples and parameters. Requires at least
    /// two samples, matching lengths, `params[0] = 0`, `params[last] = 1`,
    /// strictly increasing parameters, and a common coordinate dimension.
    pub fn new(samples: Vec<PointCoords>, params: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if samples.len() != params.len() {
            return Err(Error::InvalidPath(format!(
                "{} samples but {} parameters",
                samples.len(),
                params.len()
            )));
        }
        if params[0] != 0.0 || *params.last().unwrap() != 1.0 {
            return Err(Error::InvalidPath(format!(
                "parameters must span [0, 1], got [{}, {}]",
                params[0],
                params.last().unwrap()
            )));
        }
        if params.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPath(
                "parameters must be strictly increasing".into(),
            ));
        }
        let dim = samples[0].dim();
        if samples.iter().any(|s| s.dim() != dim || !s.is_finite()) {
            return Err(Error::InvalidPath(
                "samples must be finite and share one dimension".into(),
            ));
        }
        Ok(Self { samples, params })
    }

    /// Builds a path through the given points, parametrized by normalized
    /// cumulative coordinate chord length. Degenerate (zero total length)
    /// inputs fall back to uniform parameters, so a stationary two-point
    /// path is a valid zero-length path.
    pub fn from_points(points: Vec<PointCoords>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        let mut cumulative = vec![0.0];
        for w in points.windows(2) {
            let seg: f64 = w[0]
                .as_slice()
                .iter()
                .zip(w[1].as_slice())
                .map(|(a, b)| (b - a).powi(2))
                .sum::<f64>()
                .sqrt();
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        let total = *cumulative.last().unwrap();
        let n = points.len();
        let params = if total > 0.0 && cumulative.windows(2).all(|w| w[1] > w[0]) {
            let mut p: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
            p[n - 1] = 1.0;
            p
        } else {
            (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
        };
        Self::new(points, params)
    }

    /// Straight two-point segment.
    pub fn segment(from: PointCoords, to: PointCoords) -> Result<Self> {
        Self::new(vec![from, to], vec![0.0, 1.0])
    }

    pub fn samples(&self) -> &[PointCoords] {
        &self.samples
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    pub fn start(&self) -> &PointCoords {
        &self.samples[0]
    }

    pub fn end(&self) -> &PointCoords {
        self.samples.last().unwrap()
    }

    /// Total coordinate chord length of the polyline.
    pub fn chord_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| {
                w[0].as_slice()
                    .iter()
                    .zip(w[1].as_slice())
                    .map(|(a, b)| (b - a).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    /// Joins two polylines end to start, reparametrized to `[0, 1]` with the
    /// parameter split proportional to chord length (balanced halves when
    /// either piece is degenerate).
    pub fn concat(&self, other: &Path) -> Result<Path> {
        if self.end() != other.start() {
            return Err(Error::InvalidPath(format!(
                "cannot join paths: first ends at {} but second starts at {}",
                self.end(),
                other.start()
            )));
        }
        let (l1, l2) = (self.chord_length(), other.chord_length());
        let split = if l1 + l2 > 0.0 { l1 / (l1 + l2) } else { 0.5 };
        let split = split.clamp(1e-6, 1.0 - 1e-6);
        let mut samples = self.samples.clone();
        samples.extend(other.samples[1..].iter().cloned());
        let mut params: Vec<f64> = self.params.iter().map(|t| t * split).collect();
        params.extend(
            other.params[1..]
                .iter()
                .map(|t| split + t * (1.0 - split)),
        );
        *params.last_mut().unwrap() = 1.0;
        Path::new(samples, params)
    }

    /// The same polyline traversed backwards, reparametrized to `[0, 1]`.
    pub fn reversed(&self) -> Self {
        let samples: Vec<_> = self.samples.iter().rev().cloned().collect();
        let params: Vec<_> = self.params.iter().rev().map(|t| 1.0 - t).collect();
        Self { samples, params }
    }

    /// Checks that every sample lies in the chart domain.
    pub fn validate_in(&self, m: &ChartManifold) -> Result<()> {
        for s in &self.samples {
            if !m.contains(s.as_slice()) {
                return Err(Error::InvalidPoint {
                    chart: m.name().to_string(),
                    coords: s.as_slice().to_vec(),
                });
            }
        }
        Ok(())
    }
}
