//! Non-Abelian off-diagonal holonomies of noncyclically evolving orthogonal
//! subspace decompositions, the tripod model with its closed forms, and
//! simulation of Mach–Zehnder extraction protocols.

pub mod exec;
pub mod holonomy;
pub mod interferometer;
pub mod models;
pub mod numkernel;
pub mod propagate;
pub mod quadrature;
pub mod random;
pub mod subspaces;

pub use holonomy::{HolonomyError, HolonomyResult, HolonomyStatus, SigmaTable, StatusTolerance};
pub use numkernel::{ComplexMatrix, KernelError, RankTolerance};
pub use subspaces::{CurveFamily, Decomposition, Frame, SubspaceError};
