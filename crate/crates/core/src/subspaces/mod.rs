//! Smoothly parameterized orthogonal decompositions `H = H_1(s) ⊕ … ⊕ H_η(s)`.
//!
//! A [`CurveFamily`] holds the decomposition sampled on a grid of `s ∈ [0, 1]`
//! together with where the samples came from, so that generator-backed curves
//! can be refined and queried between grid points.

mod curve;
mod gauge;
mod hamiltonian;
mod io;

pub use curve::{uniform_grid, CurveFamily, FrameGenerator, Provenance};
pub use gauge::GaugeTransform;
pub use hamiltonian::{ClusterRule, FnHamiltonian, HamiltonianPath};
pub use io::{CurveDocument, ComplexEntry};

use thiserror::Error;

use crate::numkernel::{isometry_defect, max_abs, ComplexMatrix, KernelError};

/// Tolerance for column orthonormality and mutual orthogonality of frames.
pub const FRAME_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SubspaceError {
    #[error("frame columns are not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("frames {k} and {l} are not orthogonal (overlap {overlap:e})")]
    NotOrthogonal { k: usize, l: usize, overlap: f64 },
    #[error("subspace dimensions {dims:?} do not add up to the ambient dimension {ambient}")]
    DimensionSum { dims: Vec<usize>, ambient: usize },
    #[error("frame ambient dimension {found} differs from {expected}")]
    AmbientMismatch { expected: usize, found: usize },
    #[error("subspace dimensions change along the grid at sample {sample} (s = {s}): {expected:?} -> {found:?}")]
    DimensionChange {
        sample: usize,
        s: f64,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("eigenvalue clusters are not well separated at sample {sample} (s = {s}): gap {gap:e}, cluster width {width:e}")]
    PoorSeparation {
        sample: usize,
        s: f64,
        gap: f64,
        width: f64,
    },
    #[error("curve with explicit samples cannot be refined")]
    NotRefinable,
    #[error("gauge shape mismatch: {0}")]
    GaugeShape(String),
    #[error("gauge block at sample {sample}, subspace {l} is not unitary (defect {defect:e})")]
    GaugeNotUnitary { sample: usize, l: usize, defect: f64 },
    #[error("curve document: {0}")]
    Document(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Orthonormal basis of one subspace, stored as an `N × n_l` matrix whose
/// columns are the basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    basis: ComplexMatrix,
}

impl Frame {
    pub fn new(basis: ComplexMatrix) -> Result<Self, SubspaceError> {
        let defect = isometry_defect(&basis);
        if defect > FRAME_TOLERANCE {
            return Err(SubspaceError::NotOrthonormal { defect });
        }
        Ok(Self { basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn sub_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> ComplexMatrix {
        self.basis
    }

    /// Orthogonal projector `F F†` onto the spanned subspace.
    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }
}

pub fn projector(f: &Frame) -> ComplexMatrix {
    f.projector()
}

/// One sample of the decomposition: η mutually orthogonal frames spanning `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    frames: Vec<Frame>,
}

impl Decomposition {
    pub fn new(frames: Vec<Frame>) -> Result<Self, SubspaceError> {
        let ambient = frames.first().map(Frame::ambient_dim).unwrap_or(0);
        for f in &frames {
            if f.ambient_dim() != ambient {
                return Err(SubspaceError::AmbientMismatch {
                    expected: ambient,
                    found: f.ambient_dim(),
                });
            }
        }
        let dims: Vec<usize> = frames.iter().map(Frame::sub_dim).collect();
        if dims.iter().sum::<usize>() != ambient || frames.is_empty() {
            return Err(SubspaceError::DimensionSum { dims, ambient });
        }
        for k in 0..frames.len() {
            for l in (k + 1)..frames.len() {
                let overlap = max_abs(&(frames[k].basis.adjoint() * &frames[l].basis));
                if overlap > FRAME_TOLERANCE {
                    return Err(SubspaceError::NotOrthogonal { k, l, overlap });
                }
            }
        }
        Ok(Self { frames })
    }

    /// Builds a decomposition from raw basis matrices.
    pub fn from_bases(bases: Vec<ComplexMatrix>) -> Result<Self, SubspaceError> {
        Self::new(bases.into_iter().map(Frame::new).collect::<Result<_, _>>()?)
    }

    pub fn eta(&self) -> usize {
        self.frames.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frames[0].ambient_dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.frames.iter().map(Frame::sub_dim).collect()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, l: usize) -> &Frame {
        &self.frames[l]
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        self.frames.iter().map(Frame::projector).collect()
    }

    /// Offsets of each subspace's block in the concatenated basis.
    pub fn offsets(&self) -> Vec<usize> {
        block_offsets(&self.dims())
    }

    /// All frames side by side: a unitary `N × N` matrix.
    pub fn full_basis(&self) -> ComplexMatrix {
        let n = self.ambient_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        let mut col = 0;
        for f in &self.frames {
            out.view_mut((0, col), (n, f.sub_dim())).copy_from(f.basis());
            col += f.sub_dim();
        }
        out
    }

    /// `max |Σ_l P_l − I|`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.ambient_dim();
        let sum = self
            .projectors()
            .into_iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, p| acc + p);
        max_abs(&(sum - ComplexMatrix::identity(n, n)))
    }
}

pub(crate) fn block_offsets(dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .scan(0, |acc, &d| {
            let start = *acc;
            *acc += d;
            Some(start)
        })
        .collect()
}
