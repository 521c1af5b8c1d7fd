//! Structural checks on a [`SigmaTable`]: rank budgets of the `σ` blocks,
//! the trace identity `Tr(S_tot^ν) = Σ_seq Tr γ^seq`, and the search for a
//! nonzero strictly off-diagonal `γ` when every diagonal block vanishes.

use num_complex::Complex64;
use serde::Serialize;

use super::table::{enumerate_strict_sequences, gamma_product, SigmaTable};
use super::{HolonomyError, StatusTolerance};
use crate::numkernel::{spectral_norm, svd, ComplexMatrix};

/// Relative size below which a diagonal block counts as zero for
/// [`nonzero_existence_check`].
pub const ZERO_DIAGONAL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct RankBudgetEntry {
    pub subspace: usize,
    pub dim: usize,
    /// `R(σ^{ll})`
    pub diagonal_rank: usize,
    /// `n_l − R(σ^{ll})`
    pub deficiency: usize,
    /// `Σ_{k≠l} R(σ^{kl})`
    pub column_offdiagonal_rank: usize,
    /// `Σ_{k≠l} R(σ^{lk})`
    pub row_offdiagonal_rank: usize,
    pub column_bound_holds: bool,
    pub row_bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceCheck {
    pub power: usize,
    pub trace_power: [f64; 2],
    pub sequence_sum: [f64; 2],
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankBudgetReport {
    pub entries: Vec<RankBudgetEntry>,
    pub traces: Vec<TraceCheck>,
}

impl RankBudgetReport {
    pub fn bounds_hold(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.column_bound_holds && e.row_bound_holds)
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.traces.iter().map(|t| t.deviation).fold(0.0, f64::max)
    }
}

fn block_rank(m: &ComplexMatrix, tol: StatusTolerance) -> Result<usize, HolonomyError> {
    let dec = svd(m)?;
    let largest = dec.singular_values.first().copied().unwrap_or(0.0);
    Ok(dec.rank_above(tol.threshold(largest)))
}

/// All index sequences of length `nu` over `0..eta`, repetitions allowed.
pub fn all_sequences(eta: usize, nu: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..nu {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..eta).map(move |l| {
                    let mut next = prefix.clone();
                    next.push(l);
                    next
                })
            })
            .collect();
    }
    out
}

/// Traces of `S_tot^ν` against `Σ_{l1…lν} Tr γ^{l1…lν}` for `ν = 1..=max_power`.
pub fn trace_identity(table: &SigmaTable, max_power: usize) -> Result<Vec<TraceCheck>, HolonomyError> {
    let mut power = table.s_tot().clone();
    let mut checks = Vec::with_capacity(max_power);
    for nu in 1..=max_power {
        if nu > 1 {
            power = &power * table.s_tot();
        }
        let lhs = power.trace();
        let mut rhs = Complex64::new(0.0, 0.0);
        for seq in all_sequences(table.eta(), nu) {
            rhs += gamma_product(table, &seq)?.trace();
        }
        checks.push(TraceCheck {
            power: nu,
            trace_power: [lhs.re, lhs.im],
            sequence_sum: [rhs.re, rhs.im],
            deviation: (lhs - rhs).norm(),
        });
    }
    Ok(checks)
}

/// Rank budget of every subspace plus the trace identity for `ν ≤ 4`.
pub fn rank_budget_report(
    table: &SigmaTable,
    tol: StatusTolerance,
) -> Result<RankBudgetReport, HolonomyError> {
    let eta = table.eta();
    let mut ranks = vec![vec![0usize; eta]; eta];
    for (k, row) in ranks.iter_mut().enumerate() {
        for (l, r) in row.iter_mut().enumerate() {
            *r = block_rank(table.block(k, l), tol)?;
        }
    }
    let entries = (0..eta)
        .map(|l| {
            let dim = table.dims()[l];
            let diagonal_rank = ranks[l][l];
            let deficiency = dim - diagonal_rank;
            let column: usize = (0..eta).filter(|&k| k != l).map(|k| ranks[k][l]).sum();
            let row: usize = (0..eta).filter(|&k| k != l).map(|k| ranks[l][k]).sum();
            RankBudgetEntry {
                subspace: l,
                dim,
                diagonal_rank,
                deficiency,
                column_offdiagonal_rank: column,
                row_offdiagonal_rank: row,
                column_bound_holds: column >= deficiency,
                row_bound_holds: row >= deficiency,
            }
        })
        .collect();
    Ok(RankBudgetReport {
        entries,
        traces: trace_identity(table, 4)?,
    })
}

/// When every `σ^{ll}` vanishes, returns a strictly off-diagonal sequence
/// whose `γ` has nonzero rank, searching `κ = 2..=η` in order.
pub fn nonzero_existence_check(
    table: &SigmaTable,
    tol: StatusTolerance,
) -> Result<Vec<usize>, HolonomyError> {
    let scale = spectral_norm(table.s_tot())?;
    for l in 0..table.eta() {
        let norm = spectral_norm(table.block(l, l))?;
        if norm >= ZERO_DIAGONAL_LIMIT * scale {
            return Err(HolonomyError::DiagonalNotZero { l, norm });
        }
    }
    for kappa in 2..=table.eta() {
        for seq in enumerate_strict_sequences(table.eta(), kappa)? {
            if block_rank(&gamma_product(table, &seq)?, tol)? > 0 {
                return Ok(seq);
            }
        }
    }
    Err(HolonomyError::TheoremViolation)
}
