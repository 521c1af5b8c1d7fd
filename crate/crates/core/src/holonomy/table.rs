use super::kernel::{projector_product, transport_matrices, KernelRoute, TransportOptions};
use super::{HolonomyError, HolonomyResult, StatusTolerance};
use crate::exec;
use crate::numkernel::{unitarity_defect, ComplexMatrix};
use crate::subspaces::{block_offsets, CurveFamily};

/// Largest `S_tot` unitarity defect accepted by [`build_sigma_table`].
pub const UNITARITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub route: KernelRoute,
    pub transport: TransportOptions,
    /// Reject tables whose `S_tot` defect exceeds [`UNITARITY_LIMIT`].
    pub check_unitarity: bool,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            route: KernelRoute::Transport,
            transport: TransportOptions::default(),
            check_unitarity: true,
        }
    }
}

/// The η × η block table of `σ^{kl}` matrices and its assembly `S_tot`.
#[derive(Debug, Clone)]
pub struct SigmaTable {
    dims: Vec<usize>,
    /// `blocks[k][l] = σ^{kl}`, of shape `n_k × n_l`.
    blocks: Vec<Vec<ComplexMatrix>>,
    s_tot: ComplexMatrix,
}

impl SigmaTable {
    /// Table from its blocks; `blocks[k][l]` must be `n_k × n_l`.
    pub fn from_blocks(
        dims: Vec<usize>,
        blocks: Vec<Vec<ComplexMatrix>>,
    ) -> Result<Self, HolonomyError> {
        let eta = dims.len();
        if blocks.len() != eta || blocks.iter().any(|r| r.len() != eta) {
            return Err(HolonomyError::Shape(format!("expected {eta}x{eta} blocks")));
        }
        for (k, row) in blocks.iter().enumerate() {
            for (l, b) in row.iter().enumerate() {
                if b.shape() != (dims[k], dims[l]) {
                    return Err(HolonomyError::Shape(format!(
                        "block ({k},{l}) is {:?}, expected {:?}",
                        b.shape(),
                        (dims[k], dims[l])
                    )));
                }
            }
        }
        let n: usize = dims.iter().sum();
        let offsets = block_offsets(&dims);
        let mut s_tot = ComplexMatrix::zeros(n, n);
        for (k, row) in blocks.iter().enumerate() {
            for (l, b) in row.iter().enumerate() {
                s_tot
                    .view_mut((offsets[k], offsets[l]), (dims[k], dims[l]))
                    .copy_from(b);
            }
        }
        Ok(Self { dims, blocks, s_tot })
    }

    /// Splits an `N × N` matrix into blocks along `dims`.
    pub fn from_matrix(dims: Vec<usize>, s_tot: &ComplexMatrix) -> Result<Self, HolonomyError> {
        let n: usize = dims.iter().sum();
        if s_tot.shape() != (n, n) {
            return Err(HolonomyError::Shape(format!(
                "S_tot is {:?}, dims add up to {n}",
                s_tot.shape()
            )));
        }
        let offsets = block_offsets(&dims);
        let blocks = (0..dims.len())
            .map(|k| {
                (0..dims.len())
                    .map(|l| {
                        s_tot
                            .view((offsets[k], offsets[l]), (dims[k], dims[l]))
                            .into_owned()
                    })
                    .collect()
            })
            .collect();
        Self::from_blocks(dims, blocks)
    }

    pub fn eta(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `σ^{kl}`.
    pub fn block(&self, k: usize, l: usize) -> &ComplexMatrix {
        &self.blocks[k][l]
    }

    pub fn s_tot(&self) -> &ComplexMatrix {
        &self.s_tot
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.s_tot).expect("S_tot is square")
    }

    /// Largest deviation of `Σ_k σ^{kl}†σ^{kl}` and `Σ_k σ^{lk}σ^{lk}†` from
    /// `I_{n_l}` over all `l`.
    pub fn block_identity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..self.eta() {
            let n = self.dims[l];
            let mut cols = ComplexMatrix::zeros(n, n);
            let mut rows = ComplexMatrix::zeros(n, n);
            for k in 0..self.eta() {
                cols += self.blocks[k][l].adjoint() * &self.blocks[k][l];
                rows += &self.blocks[l][k] * self.blocks[l][k].adjoint();
            }
            let id = ComplexMatrix::identity(n, n);
            worst = worst
                .max(crate::numkernel::max_abs(&(cols - &id)))
                .max(crate::numkernel::max_abs(&(rows - id)));
        }
        worst
    }

    fn check_seq(&self, seq: &[usize]) -> Result<(), HolonomyError> {
        if seq.is_empty() {
            return Err(HolonomyError::EmptySequence);
        }
        if let Some(&bad) = seq.iter().find(|&&l| l >= self.eta()) {
            return Err(HolonomyError::IndexOutOfRange {
                index: bad,
                eta: self.eta(),
            });
        }
        Ok(())
    }
}

/// `σ^{kl} = (F^k_0|F^l_1) T_l` on the transport route.
pub fn sigma(curve: &CurveFamily, k: usize, l: usize) -> Result<ComplexMatrix, HolonomyError> {
    for idx in [k, l] {
        if idx >= curve.eta() {
            return Err(HolonomyError::IndexOutOfRange {
                index: idx,
                eta: curve.eta(),
            });
        }
    }
    let t = transport_matrices(curve, TransportOptions::default())?;
    Ok(overlap(curve, k, l) * &t[l])
}

fn overlap(curve: &CurveFamily, k: usize, l: usize) -> ComplexMatrix {
    curve.start().frame(k).basis().adjoint() * curve.end().frame(l).basis()
}

pub fn build_sigma_table(curve: &CurveFamily) -> Result<SigmaTable, HolonomyError> {
    build_sigma_table_with(curve, TableOptions::default())
}

pub fn build_sigma_table_with(
    curve: &CurveFamily,
    opts: TableOptions,
) -> Result<SigmaTable, HolonomyError> {
    let eta = curve.eta();
    let transports = match opts.route {
        KernelRoute::Transport => transport_matrices(curve, opts.transport)?,
        KernelRoute::ProjectorProduct => exec::map_indexed(opts.transport.mode, eta, |l| {
            projector_product(curve, l).map(|k| k.transport)
        })
        .into_iter()
        .collect::<Result<_, _>>()?,
    };
    let blocks = (0..eta)
        .map(|k| {
            (0..eta)
                .map(|l| overlap(curve, k, l) * &transports[l])
                .collect()
        })
        .collect();
    let table = SigmaTable::from_blocks(curve.dims(), blocks)?;
    if opts.check_unitarity {
        let defect = table.unitarity_defect();
        if defect > UNITARITY_LIMIT {
            return Err(HolonomyError::UnitarityViolation { defect });
        }
    }
    Ok(table)
}

/// `γ^{l1…lκ} = σ^{l1 lκ} σ^{lκ lκ−1} ⋯ σ^{l3 l2} σ^{l2 l1}`.
///
/// The rightmost factor `σ^{l2 l1}` acts first; `κ = 1` gives `σ^{l1 l1}`.
/// The result is `n_{l1} × n_{l1}`.
pub fn gamma_product(table: &SigmaTable, seq: &[usize]) -> Result<ComplexMatrix, HolonomyError> {
    table.check_seq(seq)?;
    let n1 = table.dims[seq[0]];
    let mut acc = ComplexMatrix::identity(n1, n1);
    for i in 0..seq.len() {
        let from = seq[i];
        let to = seq[(i + 1) % seq.len()];
        acc = table.block(to, from) * acc;
    }
    Ok(acc)
}

/// `U^(κ)[C_{l1}, …, C_{lκ}] = Φ[γ^{l1…lκ}]` with rank and status.
pub fn holonomy_of_order(
    table: &SigmaTable,
    seq: &[usize],
    tol: StatusTolerance,
) -> Result<HolonomyResult, HolonomyError> {
    let gamma = gamma_product(table, seq)?;
    HolonomyResult::from_gamma(seq.to_vec(), gamma, tol)
}

/// Sequences of length `kappa` over `0..eta` in which no index repeats,
/// in lexicographic order. There are `η!/(η−κ)!` of them.
pub fn enumerate_strict_sequences(eta: usize, kappa: usize) -> Result<Vec<Vec<usize>>, HolonomyError> {
    if kappa < 2 || kappa > eta {
        return Err(HolonomyError::InvalidOrder { kappa, eta });
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(kappa);
    let mut used = vec![false; eta];
    fn recurse(
        eta: usize,
        kappa: usize,
        current: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == kappa {
            out.push(current.clone());
            return;
        }
        for l in 0..eta {
            if !used[l] {
                used[l] = true;
                current.push(l);
                recurse(eta, kappa, current, used, out);
                current.pop();
                used[l] = false;
            }
        }
    }
    recurse(eta, kappa, &mut current, &mut used, &mut out);
    Ok(out)
}

/// Whether `seq` is in the strictly off-diagonal set: length ≥ 2, entries
/// below `eta`, no repeats.
pub fn is_strict(seq: &[usize], eta: usize) -> bool {
    let mut seen = vec![false; eta];
    seq.len() >= 2
        && seq.iter().all(|&l| {
            if l >= eta || seen[l] {
                false
            } else {
                seen[l] = true;
                true
            }
        })
}
