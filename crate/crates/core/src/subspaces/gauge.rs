use rand::Rng;

use super::{CurveFamily, Decomposition, SubspaceError};
use crate::numkernel::{expm_hermitian, unitarity_defect, ComplexMatrix};
use crate::random;

const GAUGE_TOLERANCE: f64 = 1e-10;

/// Per-sample, per-subspace change of frame `F_l(s) ↦ F_l(s) U_l(s)`.
#[derive(Debug, Clone)]
pub struct GaugeTransform {
    /// `blocks[j][l]` is the `n_l × n_l` unitary at grid sample `j`.
    blocks: Vec<Vec<ComplexMatrix>>,
}

impl GaugeTransform {
    pub fn new(blocks: Vec<Vec<ComplexMatrix>>) -> Result<Self, SubspaceError> {
        for (j, row) in blocks.iter().enumerate() {
            for (l, u) in row.iter().enumerate() {
                let defect = unitarity_defect(u)?;
                if defect > GAUGE_TOLERANCE {
                    return Err(SubspaceError::GaugeNotUnitary { sample: j, l, defect });
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn identity(curve: &CurveFamily) -> Self {
        let row: Vec<ComplexMatrix> = curve
            .dims()
            .iter()
            .map(|&n| ComplexMatrix::identity(n, n))
            .collect();
        Self {
            blocks: vec![row; curve.grid().len()],
        }
    }

    /// The same blocks at every grid sample.
    pub fn constant(curve: &CurveFamily, blocks: Vec<ComplexMatrix>) -> Result<Self, SubspaceError> {
        Self::new(vec![blocks; curve.grid().len()])
    }

    /// Smooth random gauge `U_l(s) = exp(−i s X_l) W_l` with Haar `W_l` and
    /// Hermitian `X_l` of norm scale `strength`.
    pub fn smooth_random<R: Rng + ?Sized>(curve: &CurveFamily, rng: &mut R, strength: f64) -> Self {
        let dims = curve.dims();
        let start: Vec<ComplexMatrix> = dims.iter().map(|&n| random::haar_unitary(rng, n)).collect();
        let gens: Vec<ComplexMatrix> = dims
            .iter()
            .map(|&n| random::hermitian(rng, n, strength))
            .collect();
        let blocks = curve
            .grid()
            .iter()
            .map(|&s| {
                gens.iter()
                    .zip(&start)
                    .map(|(x, w)| expm_hermitian(x, s).expect("finite generator") * w)
                    .collect()
            })
            .collect();
        Self { blocks }
    }

    pub fn at(&self, sample: usize, l: usize) -> &ComplexMatrix {
        &self.blocks[sample][l]
    }

    pub fn samples(&self) -> usize {
        self.blocks.len()
    }
}

impl CurveFamily {
    /// Frames replaced by `F_l(s) U_l(s)`; projectors are unchanged.
    pub fn apply_gauge(&self, gauge: &GaugeTransform) -> Result<CurveFamily, SubspaceError> {
        if gauge.samples() != self.grid().len() {
            return Err(SubspaceError::GaugeShape(format!(
                "{} gauge samples for {} grid points",
                gauge.samples(),
                self.grid().len()
            )));
        }
        let samples = self
            .samples()
            .iter()
            .enumerate()
            .map(|(j, d)| {
                let row = &gauge.blocks[j];
                if row.len() != d.eta() {
                    return Err(SubspaceError::GaugeShape(format!(
                        "{} gauge blocks for {} subspaces at sample {j}",
                        row.len(),
                        d.eta()
                    )));
                }
                let bases = d
                    .frames()
                    .iter()
                    .zip(row)
                    .enumerate()
                    .map(|(l, (f, u))| {
                        if u.nrows() != f.sub_dim() {
                            return Err(SubspaceError::GaugeShape(format!(
                                "block {l} at sample {j} is {}x{}, subspace has dimension {}",
                                u.nrows(),
                                u.ncols(),
                                f.sub_dim()
                            )));
                        }
                        Ok(f.basis() * u)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Decomposition::from_bases(bases)
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.with_samples(samples)
    }
}
