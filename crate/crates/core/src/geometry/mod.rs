//! Chart-based Riemannian geometry: metrics, Christoffel symbols, geodesics,
//! parallel transport, and chart transitions.

mod chart;
mod christoffel;
mod geodesic;
mod manifold;
mod path;
pub mod presets;
mod transport;

pub use chart::ChartTransition;
pub use christoffel::ChristoffelSymbols;
pub use geodesic::{exp_map, exp_map_with_steps, log_map, trace_geodesic, Geodesic, DEFAULT_STEPS};
pub use manifold::{ChartManifold, PointCoords, TangentVec};
pub use path::Path;
pub use transport::{parallel_transport, transport_matrix};
