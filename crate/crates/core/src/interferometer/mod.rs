//! Mach–Zehnder extraction of off-diagonal holonomies.
//!
//! The particle enters path 0 in the internal state `P_{l1}(0)/n_{l1}`. After
//! a 50/50 beam splitter, path 1 receives `V` and path 0 receives the chain
//! of `U` applications and filterings of the chosen strategy; a second beam
//! splitter recombines the paths and `p` is the weight found in path 0.
//!
//! States are unnormalized `2N × 2N` density matrices ordered path-major
//! (`index = path · N + internal`). Filtering removes weight without
//! renormalizing.

mod dynamics;
mod extract;
mod protocol;

pub use dynamics::{
    adiabatic_limit_deviation, adiabatic_u, dynamical_phases, nonadiabatic_u, schrodinger_u,
    AdiabaticU, NonadiabaticU,
};
pub use extract::{
    extract_holonomy, optimality_sweep, random_admissible_v, Extraction, OptimalitySweep,
};
pub use protocol::{
    detection_probability, filtering_u_sequence, run_protocol, FilterOp, PathOp, Protocol,
    ProtocolOutcome, ProtocolSpec, Strategy,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::holonomy::HolonomyError;
use crate::numkernel::{hermitian_eigen, max_abs, ComplexMatrix, KernelError};
use crate::propagate::PropagateError;
use crate::subspaces::SubspaceError;

/// Tolerance for `[V, P_l(0)] = 0` and for the circuit/formula cross-check.
pub const EXACT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum InterferometerError {
    #[error("invalid protocol spec: {0}")]
    Spec(String),
    #[error("V does not commute with P_{l}(0) (defect {defect:e})")]
    NotAdmissible { l: usize, defect: f64 },
    #[error("circuit p = {simulated} disagrees with closed form {closed_form} (deviation {deviation:e})")]
    CrossCheck {
        simulated: f64,
        closed_form: f64,
        deviation: f64,
    },
    #[error("two-path state left the physical region: {0}")]
    State(String),
    #[error("curve does not follow the Schrödinger equation of H(s): defect {defect:e} at s = {s}")]
    Precondition { s: f64, defect: f64 },
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
}

/// `H ⊗ 1`: `|0⟩ → (|0⟩+|1⟩)/√2`, `|1⟩ → (|0⟩−|1⟩)/√2`.
pub fn beam_splitter(n: usize) -> ComplexMatrix {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut b = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        b[(i, i)] = r;
        b[(i, n + i)] = r;
        b[(n + i, i)] = r;
        b[(n + i, n + i)] = -r;
    }
    b
}

/// `|path⟩⟨path| ⊗ op + |other⟩⟨other| ⊗ 1`.
pub fn on_path(path: usize, op: &ComplexMatrix) -> ComplexMatrix {
    let n = op.nrows();
    let mut m = ComplexMatrix::identity(2 * n, 2 * n);
    m.view_mut((path * n, path * n), (n, n)).copy_from(op);
    m
}

#[derive(Debug, Clone)]
pub struct TwoPathState {
    rho: ComplexMatrix,
    n: usize,
}

impl TwoPathState {
    /// `|0⟩⟨0| ⊗ P / Tr P`.
    pub fn prepare(projector: &ComplexMatrix) -> Self {
        let n = projector.nrows();
        let weight = projector.trace().re;
        let mut rho = ComplexMatrix::zeros(2 * n, 2 * n);
        rho.view_mut((0, 0), (n, n)).copy_from(&projector.unscale(weight));
        Self { rho, n }
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn internal_dim(&self) -> usize {
        self.n
    }

    /// `ρ ← K ρ K†`.
    pub fn apply(&mut self, k: &ComplexMatrix) {
        self.rho = k * &self.rho * k.adjoint();
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn path_weight(&self, path: usize) -> f64 {
        let n = self.n;
        self.rho.view((path * n, path * n), (n, n)).trace().re
    }

    /// Hermitian, positive semidefinite and trace at most one, to `tol`.
    pub fn check(&self, tol: f64) -> Result<(), InterferometerError> {
        let herm = max_abs(&(&self.rho - self.rho.adjoint()));
        if herm > tol {
            return Err(InterferometerError::State(format!("not Hermitian ({herm:e})")));
        }
        let sym = (&self.rho + self.rho.adjoint()).scale(0.5);
        let (eig, _) = hermitian_eigen(&sym)?;
        if eig.first().copied().unwrap_or(0.0) < -tol {
            return Err(InterferometerError::State(format!(
                "negative eigenvalue {:e}",
                eig[0]
            )));
        }
        let tr = self.trace();
        if tr > 1.0 + tol {
            return Err(InterferometerError::State(format!("trace {tr} exceeds one")));
        }
        Ok(())
    }
}
