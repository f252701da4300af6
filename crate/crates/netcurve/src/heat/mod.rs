//! The scalar model problem: the mixed Cauchy-Dirichlet heat equation on the
//! quarter plane, solved through its corner expansion on the parabolic
//! blowup plus a Dirichlet-kernel correction.
//!
//! The pipeline mirrors the construction the network flow uses at junctions,
//! in a setting where every step has an independent check: exact coefficient
//! recursions (`tables`), front-face mode functions (`modes`), an assembled
//! approximate solution with semi-analytic defect (`assemble`), the Duhamel
//! correction through the reflection kernel (`kernel`), and the combined
//! solver with Crank-Nicolson and similarity references (`solvemix`).

pub mod assemble;
pub mod kernel;
pub mod modes;
pub mod solvemix;
pub mod tables;

pub use assemble::{build_approximate_v, ApproxV, BoundaryData, Profile};
pub use kernel::{correction_w, dirichlet_kernel, TimeField};
pub use modes::{mode_v0, solve_inhomogeneous_mode, ModeFn, ModeGrid};
pub use solvemix::{erf_reference, lifted_smoothness_sup, solve_mixed, CnSolver, MixedParams};
pub use tables::{recursion_a, recursion_c, Rational, SeriesTable};
