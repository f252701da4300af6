//! Time-stepping solver for the parametrized network flow
//! d_t gamma = d_x^2 gamma / |d_x gamma|^2 with Herring junction conditions,
//! soliton-patch startup from irregular data, self-similarity diagnostics,
//! the linearized junction boundary operator, and restarting through
//! standard transitions.

mod boundary_op;
mod distance;
mod events;
mod evolve;
mod startup;
mod step;

pub use boundary_op::{boundary_operator, junction_boundary_operator, BoundaryOperator};
pub use distance::geometric_distance;
pub use events::{detect_transition, restart, TransitionEvent};
pub use evolve::{evolve, EvolveOptions, Trajectory};
pub use startup::{start_from_irregular, StartupOptions};
pub use step::{stable_dt, step, BoundaryMotion, StepOptions};

use crate::net::Network;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("junction Newton failed at vertex {vertex}: residual {residual:.3e}")]
    StepFailure { vertex: usize, residual: f64 },
    #[error("parametrization degenerate on curve {curve}: min |d_x gamma| = {speed:.3e}")]
    DegenerateParametrization { curve: usize, speed: f64 },
    #[error("zero speed at junction arm {0}")]
    ZeroSpeed(usize),
    #[error("startup blend failed: {0} (reduce t0 or the excision radius)")]
    Startup(String),
    #[error("curvature {kappa:.3e} exceeds the cap {cap:.3e} near the vanishing edge")]
    UnsupportedSingularity { kappa: f64, cap: f64 },
    #[error("length audit failed: grew by {0:.3e}")]
    LengthGrew(f64),
    #[error(transparent)]
    Net(#[from] crate::net::NetError),
    #[error(transparent)]
    Expander(#[from] crate::expander::ExpanderError),
    #[error(transparent)]
    Expansion(#[from] crate::expansion::build::ExpansionError),
}

/// The evolving state: a network tagged with its time. Junction records are
/// the interior vertices of the network; exterior vertices stay pinned to
/// their initial positions bit-exactly.
#[derive(Debug, Clone, Serialize)]
pub struct FlowState {
    pub time: f64,
    pub net: Network,
}

impl FlowState {
    pub fn new(time: f64, net: Network) -> Self {
        FlowState { time, net }
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        self.net
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v.kind, crate::net::VertexKind::Interior))
            .map(|(i, _)| i)
            .collect()
    }

    /// Worst |sum of unit tangents| over interior vertices.
    pub fn junction_balance(&self) -> f64 {
        let mut worst = 0.0f64;
        for v in &self.net.vertices {
            if !matches!(v.kind, crate::net::VertexKind::Interior) {
                continue;
            }
            let mut sum = crate::geom::Vec2::default();
            for &(ci, end) in &v.incident {
                if let Ok(t) = self.net.curves[ci].inward_tangent(end) {
                    sum += t.normalized();
                }
            }
            worst = worst.max(sum.norm());
        }
        worst
    }

    /// Worst distance between a junction and its incident curve endpoints.
    pub fn junction_coincidence(&self) -> f64 {
        let mut worst = 0.0f64;
        for v in &self.net.vertices {
            for &(ci, end) in &v.incident {
                worst = worst.max(v.position.dist(self.net.curves[ci].endpoint(end)));
            }
        }
        worst
    }
}
