//! Model curves and analytic oracles: the tripod system, seeded random
//! curves, and transitionless driving of a generated curve.

mod driving;
mod fixtures;
pub mod paths;
pub mod random_curves;
pub mod tripod;

pub use driving::{derivative_projectors, Transitionless};
pub use fixtures::zero_gamma_table;
pub use paths::PathFunction;
pub use random_curves::{random_zero_diagonal_unitary, split_frames, UnitaryPathGenerator};
pub use tripod::{
    tripod_frames, tripod_hamiltonian, tripod_oracle, OracleEntry, OracleSource, TripodGenerator,
    TripodOracle, TripodPath, DARK, MINUS, PLUS,
};
