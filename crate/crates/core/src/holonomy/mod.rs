//! Off-diagonal holonomies of a [`CurveFamily`](crate::subspaces::CurveFamily).
//!
//! The pipeline is: per-subspace kernels `Γ_l` (two independent routes, see
//! [`kernel`]) → the block table `σ^{kl} = (F^k_0|F^l_1) T_l` assembled into
//! the unitary `S_tot` ([`SigmaTable`]) → products
//! `γ^{l1…lκ} = σ^{l1 lκ} σ^{lκ lκ−1} ⋯ σ^{l2 l1}` and their polar parts
//! `U^(κ) = Φ[γ]` ([`HolonomyResult`]).
//!
//! Subspace indices are zero-based throughout.

pub mod diagnostics;
pub mod kernel;
mod table;

pub use diagnostics::{
    nonzero_existence_check, rank_budget_report, RankBudgetEntry, RankBudgetReport, TraceCheck,
};
pub use kernel::{
    gamma_kernel_extrapolated, gamma_kernel_projector, gamma_kernel_transport, projector_product, richardson_extrapolate, richardson_ladder,
    transport_matrices, GammaKernel, KernelRoute, TransportOptions, TransportScheme,
};
pub use table::{
    build_sigma_table, build_sigma_table_with, enumerate_strict_sequences, gamma_product,
    holonomy_of_order, is_strict, sigma, SigmaTable, TableOptions,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkernel::{partial_isometry, svd, ComplexMatrix, KernelError, RankTolerance};
use crate::subspaces::SubspaceError;

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("subspace index {index} out of range for eta = {eta}")]
    IndexOutOfRange { index: usize, eta: usize },
    #[error("empty index sequence")]
    EmptySequence,
    #[error("strict sequences need 2 <= kappa <= eta, got kappa = {kappa}, eta = {eta}")]
    InvalidOrder { kappa: usize, eta: usize },
    #[error("S_tot is not unitary (defect {defect:e}); the grid is probably under-resolved")]
    UnitarityViolation { defect: f64 },
    #[error("frames of subspace {subspace} are not aligned on interval {interval} (step rotation {rotation:.3e}); regenerate the curve with continuous frames or a finer grid")]
    FramesNotAligned {
        subspace: usize,
        interval: usize,
        rotation: f64,
    },
    #[error("diagonal block sigma^{{{l}{l}}} is not zero (norm {norm:e})")]
    DiagonalNotZero { l: usize, norm: f64 },
    #[error("internal consistency failure: no strictly off-diagonal gamma of nonzero rank although all diagonal blocks vanish")]
    TheoremViolation,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Decides which singular values of `γ` count as nonzero.
///
/// A singular value is kept when it exceeds both the relative cutoff times
/// the largest singular value and the absolute `zero_floor`. The floor is
/// measured against `‖S_tot‖ = 1`, which bounds every `σ` block and every
/// `γ` product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatusTolerance {
    pub rank: RankTolerance,
    pub zero_floor: f64,
}

impl StatusTolerance {
    pub const DEFAULT_ZERO_FLOOR: f64 = 1e-6;

    pub fn threshold(&self, largest: f64) -> f64 {
        self.rank.threshold(largest).max(self.zero_floor)
    }

    pub fn with_floor(zero_floor: f64) -> Self {
        Self {
            zero_floor,
            ..Self::default()
        }
    }
}

impl Default for StatusTolerance {
    fn default() -> Self {
        Self {
            rank: RankTolerance::default(),
            zero_floor: Self::DEFAULT_ZERO_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HolonomyStatus {
    /// `rank = n_{l1}`: a unitary holonomy.
    Full,
    /// `0 < rank < n_{l1}`.
    Partial,
    /// `rank = 0`: `γ` vanishes (nodal point).
    Undefined,
}

impl HolonomyStatus {
    pub fn from_rank(rank: usize, dim: usize) -> Self {
        if rank == 0 {
            HolonomyStatus::Undefined
        } else if rank == dim {
            HolonomyStatus::Full
        } else {
            HolonomyStatus::Partial
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            HolonomyStatus::Full => "full",
            HolonomyStatus::Partial => "partial",
            HolonomyStatus::Undefined => "undefined",
        }
    }
}

impl std::fmt::Display for HolonomyStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `γ` for one index sequence together with its polar part `Φ[γ]`.
#[derive(Debug, Clone)]
pub struct HolonomyResult {
    pub seq: Vec<usize>,
    pub gamma: ComplexMatrix,
    pub holonomy: ComplexMatrix,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub status: HolonomyStatus,
}

impl HolonomyResult {
    pub fn from_gamma(
        seq: Vec<usize>,
        gamma: ComplexMatrix,
        tol: StatusTolerance,
    ) -> Result<Self, HolonomyError> {
        let dec = svd(&gamma)?;
        let largest = dec.singular_values.first().copied().unwrap_or(0.0);
        let threshold = tol.threshold(largest);
        let rank = dec.rank_above(threshold);
        let holonomy = partial_isometry(&dec, threshold);
        let status = HolonomyStatus::from_rank(rank, gamma.nrows());
        Ok(Self {
            seq,
            gamma,
            holonomy,
            rank,
            singular_values: dec.singular_values,
            status,
        })
    }

    pub fn to_record(&self) -> HolonomyRecord {
        HolonomyRecord {
            seq: self.seq.clone(),
            gamma: matrix_to_rows(&self.gamma),
            holonomy: matrix_to_rows(&self.holonomy),
            rank: self.rank,
            singular_values: self.singular_values.clone(),
            status: self.status,
        }
    }
}

/// JSON form of a [`HolonomyResult`]; matrices are row-major lists of `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyRecord {
    pub seq: Vec<usize>,
    pub gamma: Vec<Vec<[f64; 2]>>,
    pub holonomy: Vec<Vec<[f64; 2]>>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub status: HolonomyStatus,
}

impl Serialize for HolonomyResult {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(serializer)
    }
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix, HolonomyError> {
    let n = rows.len();
    let m = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != m) {
        return Err(HolonomyError::Shape("ragged matrix rows".into()));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| {
        num_complex::Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}
