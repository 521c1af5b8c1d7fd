use std::sync::Arc;

use super::curve::{uniform_grid, CurveFamily, Provenance};
use super::{Decomposition, SubspaceError};
use crate::exec::{self, ExecMode};
use crate::numkernel::{hermitian_eigen, reunitarize, ComplexMatrix, KernelError};

/// `s ↦ H(s)`, Hermitian for every `s ∈ [0, 1]`.
pub trait HamiltonianPath: Send + Sync {
    fn dim(&self) -> usize;

    fn hamiltonian_at(&self, s: f64) -> ComplexMatrix;
}

/// Closure-backed [`HamiltonianPath`].
pub struct FnHamiltonian<F> {
    dim: usize,
    f: F,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64) -> ComplexMatrix + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> HamiltonianPath for FnHamiltonian<F>
where
    F: Fn(f64) -> ComplexMatrix + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn hamiltonian_at(&self, s: f64) -> ComplexMatrix {
        (self.f)(s)
    }
}

/// Groups sorted eigenvalues into degenerate clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterRule {
    /// Eigenvalues closer than `relative_width · ‖H‖` share a cluster.
    pub relative_width: f64,
    /// Required ratio between the smallest inter-cluster gap and the widest cluster.
    pub separation_ratio: f64,
}

impl Default for ClusterRule {
    fn default() -> Self {
        Self {
            relative_width: 1e-8,
            separation_ratio: 10.0,
        }
    }
}

struct Clustered {
    bases: Vec<ComplexMatrix>,
    energies: Vec<f64>,
    min_gap: f64,
    max_width: f64,
}

fn cluster_eigenspaces(h: &ComplexMatrix, rule: ClusterRule) -> Result<Clustered, KernelError> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let join = rule.relative_width * if scale > 0.0 { scale } else { 1.0 };
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > join {
            groups.push((start, i));
            start = i;
        }
    }
    let n = h.nrows();
    let mut min_gap = f64::INFINITY;
    let mut max_width: f64 = 0.0;
    for (g, &(a, b)) in groups.iter().enumerate() {
        max_width = max_width.max(vals[b - 1] - vals[a]);
        if let Some(&(next, _)) = groups.get(g + 1) {
            min_gap = min_gap.min(vals[next] - vals[b - 1]);
        }
    }
    let bases = groups
        .iter()
        .map(|&(a, b)| vecs.view((0, a), (n, b - a)).into_owned())
        .collect();
    let energies = groups
        .iter()
        .map(|&(a, b)| vals[a..b].iter().sum::<f64>() / (b - a) as f64)
        .collect();
    Ok(Clustered {
        bases,
        energies,
        min_gap,
        max_width,
    })
}

impl CurveFamily {
    /// Instantaneous eigenspace clusters of `H(s)`, ordered by increasing
    /// energy, with frames aligned between neighbouring samples so that each
    /// inter-sample overlap `F(s_j)† F(s_{j+1})` is Hermitian positive.
    pub fn from_hamiltonian_path(
        path: Arc<dyn HamiltonianPath>,
        intervals: usize,
        rule: ClusterRule,
    ) -> Result<Self, SubspaceError> {
        if intervals == 0 {
            return Err(SubspaceError::InvalidGrid("zero intervals".into()));
        }
        let grid = uniform_grid(intervals);
        let raw = exec::map_slice(ExecMode::default(), &grid, |&s| {
            cluster_eigenspaces(&path.hamiltonian_at(s), rule)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

        let dims0: Vec<usize> = raw[0].bases.iter().map(|b| b.ncols()).collect();
        let mut samples: Vec<Decomposition> = Vec::with_capacity(raw.len());
        let mut energies = Vec::with_capacity(raw.len());
        for (j, cl) in raw.into_iter().enumerate() {
            let dims: Vec<usize> = cl.bases.iter().map(|b| b.ncols()).collect();
            if dims != dims0 {
                return Err(SubspaceError::DimensionChange {
                    sample: j,
                    s: grid[j],
                    expected: dims0,
                    found: dims,
                });
            }
            if cl.bases.len() > 1 && cl.min_gap <= rule.separation_ratio * cl.max_width {
                return Err(SubspaceError::PoorSeparation {
                    sample: j,
                    s: grid[j],
                    gap: cl.min_gap,
                    width: cl.max_width,
                });
            }
            let bases = match samples.last() {
                None => cl.bases,
                Some(prev) => cl
                    .bases
                    .into_iter()
                    .zip(prev.frames())
                    .map(|(b, f)| {
                        let w = reunitarize(&(b.adjoint() * f.basis()))?;
                        Ok(b * w)
                    })
                    .collect::<Result<Vec<_>, KernelError>>()?,
            };
            samples.push(Decomposition::from_bases(bases)?);
            energies.push(cl.energies);
        }
        Self::assemble(
            grid,
            samples,
            Provenance::Hamiltonian { path, rule },
            Some(energies),
        )
    }
}
