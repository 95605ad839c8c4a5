//! Distributionally robust conditional portfolio allocation over
//! optimal-transport ambiguity sets.
//!
//! The usual entry points are [`solve_allocation`] and
//! [`worst_case_value`] on a [`ProblemSpec`]; [`feasibility`] computes the
//! thresholds that decide which regime a spec falls in.

pub mod backtest;
pub mod conic;
pub mod data_io;
pub mod error;
pub mod feasibility;
pub mod geometry;
pub mod loss;
pub mod oracle;
pub mod reformulations;
pub mod types;

extern crate openblas_src;

pub use conic::{Backend, ConicProgram, SolveOptions, SolveStatus, Solution};
pub use error::{Error, RegimeKind, Result};
pub use feasibility::{eps_lower, rho_max, rho_min, REGIME_TOL};
pub use geometry::{compute_geometry, GeometryStats, GroundCostConfig, XCost};
pub use loss::eval_loss;
pub use reformulations::{build_program, solve_allocation, worst_case_value, Decision, DualCertificate, ProblemSpec};
pub use types::{
    Allocation, AmbiguitySpec, Ellipsoid, FeasibleSet, FiberSpec, LossSpec, LossVariant, Sample, SampleSet,
    SupportSpec, Transport,
};
