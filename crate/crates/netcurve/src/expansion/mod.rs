//! Blowup coordinate toolkit and the nonlinear corner-expansion machinery:
//! charts on the parabolic blowup, lifted operators, polynomial jet algebra,
//! Q_j assembly, the L_j mode solves with parity and degree ledgers, the
//! junction chart, and assembled approximate flows with defect-order
//! studies.

pub mod build;
pub mod charts;
pub mod junction;
pub mod ljsolve;
pub mod poly;
pub mod qassembly;

pub use build::{
    build_expansion, defect_per_slice, observed_defect_order, ArcExpansion, ArcSeeds, Expansion,
};
pub use charts::{
    from_physical, lift_field, lifted_flow_residual, lifted_heat_apply, to_physical, Chart,
};
pub use junction::{
    junction_chart_eval, junction_chart_invert, junction_chart_jacobian_det, JunctionData,
    JunctionImage,
};
pub use ljsolve::{solve_lj, EtaMode};
pub use poly::{Poly, Poly2, Ring};
pub use qassembly::{assemble_q, q_by_series_inversion};
