//! Curvature flow of planar curve networks with irregular junctions.
//!
//! The library computes expanding self-similar solitons (geodesic Steiner
//! networks in the expander metric e^{|x|^2} |dx|^2), resolves irregular
//! vertices by inserting truncated solitons, evolves the resulting regular
//! network under the parametrized curve-shortening flow with Herring
//! junction conditions, and independently verifies the corner-expansion
//! machinery behind that construction: the scalar heat-equation model on the
//! parabolic blowup of the quarter plane, the coefficient recursions and
//! their cross-chart identity, the nonlinear expansion operators, and the
//! junction boundary operator.
//!
//! Start with the runnable examples (`cargo run --example ...`); each one
//! demonstrates a capability end to end. The `netcurve` binary wraps the
//! same pipelines behind subcommands for reproducible runs.

pub mod geom;
pub mod numeric;

pub mod expander;
pub mod expansion;
pub mod flow;
pub mod heat;
pub mod net;

pub use geom::Vec2;
