//! JSON exchange format for sampled curves.
//!
//! ```text
//! {
//!   "N": 4, "eta": 3, "dims": [1, 1, 2],
//!   "grid": [0.0, ..., 1.0],
//!   "frames": [              // one entry per grid sample
//!     [                      // one entry per subspace l
//!       [                    // one entry per basis column i (n_l of them)
//!         [re, im], ...      // N amplitudes <k|l^i(s)>
//!       ]
//!     ]
//!   ]
//! }
//! ```

use serde::{Deserialize, Serialize};

use super::{CurveFamily, Decomposition, SubspaceError};
use crate::numkernel::ComplexMatrix;
use num_complex::Complex64;

/// A complex number as `[re, im]`.
pub type ComplexEntry = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDocument {
    #[serde(rename = "N")]
    pub ambient_dim: usize,
    pub eta: usize,
    pub dims: Vec<usize>,
    pub grid: Vec<f64>,
    pub frames: Vec<Vec<Vec<Vec<ComplexEntry>>>>,
}

impl CurveDocument {
    pub fn from_curve(curve: &CurveFamily) -> Self {
        let frames = curve
            .samples()
            .iter()
            .map(|d| {
                d.frames()
                    .iter()
                    .map(|f| {
                        f.basis()
                            .column_iter()
                            .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            ambient_dim: curve.ambient_dim(),
            eta: curve.eta(),
            dims: curve.dims(),
            grid: curve.grid().to_vec(),
            frames,
        }
    }

    pub fn into_curve(self) -> Result<CurveFamily, SubspaceError> {
        let bad = |msg: String| SubspaceError::Document(msg);
        if self.dims.len() != self.eta {
            return Err(bad(format!("eta = {} but {} dims given", self.eta, self.dims.len())));
        }
        if self.frames.len() != self.grid.len() {
            return Err(bad(format!(
                "{} frame samples for {} grid points",
                self.frames.len(),
                self.grid.len()
            )));
        }
        let mut samples = Vec::with_capacity(self.frames.len());
        for (j, sample) in self.frames.into_iter().enumerate() {
            if sample.len() != self.eta {
                return Err(bad(format!("sample {j}: {} subspaces, expected {}", sample.len(), self.eta)));
            }
            let mut bases = Vec::with_capacity(self.eta);
            for (l, cols) in sample.into_iter().enumerate() {
                if cols.len() != self.dims[l] {
                    return Err(bad(format!(
                        "sample {j}, subspace {l}: {} columns, expected {}",
                        cols.len(),
                        self.dims[l]
                    )));
                }
                let mut basis = ComplexMatrix::zeros(self.ambient_dim, cols.len());
                for (i, col) in cols.into_iter().enumerate() {
                    if col.len() != self.ambient_dim {
                        return Err(bad(format!(
                            "sample {j}, subspace {l}, column {i}: length {}, expected {}",
                            col.len(),
                            self.ambient_dim
                        )));
                    }
                    for (k, [re, im]) in col.into_iter().enumerate() {
                        basis[(k, i)] = Complex64::new(re, im);
                    }
                }
                bases.push(basis);
            }
            samples.push(Decomposition::from_bases(bases)?);
        }
        CurveFamily::from_samples(self.grid, samples)
    }
}

impl CurveFamily {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&CurveDocument::from_curve(self)).expect("curve document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SubspaceError> {
        let doc: CurveDocument =
            serde_json::from_str(text).map_err(|e| SubspaceError::Document(e.to_string()))?;
        doc.into_curve()
    }
}
