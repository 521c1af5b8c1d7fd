//! Dense complex linear-algebra kernels: SVD, polar factor (Φ map),
//! numerical rank, unitarity checks and matrix exponentials of
//! (anti-)Hermitian generators.
//!
//! All routines are pure functions of their inputs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Dense rectangular complex matrix used throughout the crate.
pub type ComplexMatrix = DMatrix<Complex64>;


#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },
    #[error("Hermitian eigensolver did not converge for a {dim}x{dim} matrix")]
    EigenNonConvergence { dim: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry produced by {op} on a {rows}x{cols} matrix")]
    NonFinite {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("relative rank cutoff must lie in (0, 1), got {0}")]
    InvalidCutoff(f64),
}

/// Relative cutoff used to decide which singular values count as nonzero.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RankTolerance {
    relative_cutoff: f64,
}

impl RankTolerance {
    pub const DEFAULT_CUTOFF: f64 = 1e-10;

    pub fn new(relative_cutoff: f64) -> Result<Self, KernelError> {
        if relative_cutoff > 0.0 && relative_cutoff < 1.0 {
            Ok(Self { relative_cutoff })
        } else {
            Err(KernelError::InvalidCutoff(relative_cutoff))
        }
    }

    pub fn relative_cutoff(&self) -> f64 {
        self.relative_cutoff
    }

    /// Singular values strictly above this value are counted.
    pub fn threshold(&self, largest: f64) -> f64 {
        self.relative_cutoff * largest
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self {
            relative_cutoff: Self::DEFAULT_CUTOFF,
        }
    }
}

/// Thin singular value decomposition `M = U diag(s) V†`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Nonnegative, sorted descending.
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn rank_above(&self, threshold: f64) -> usize {
        self.singular_values
            .iter()
            .filter(|&&s| s > threshold)
            .count()
    }

    /// `U diag(w) V†` for the given weights (one per singular value).
    pub fn recompose_with(&self, weights: &[f64]) -> ComplexMatrix {
        let mut u = self.u.clone();
        for (j, &w) in weights.iter().enumerate() {
            u.column_mut(j).scale_mut(w);
        }
        u * self.v.adjoint()
    }
}

pub fn check_finite(m: &ComplexMatrix, op: &'static str) -> Result<(), KernelError> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(KernelError::NonFinite {
            op,
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

fn ensure_square(m: &ComplexMatrix) -> Result<(), KernelError> {
    if m.is_square() {
        Ok(())
    } else {
        Err(KernelError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Thin SVD with singular values sorted in descending order.
pub fn svd(m: &ComplexMatrix) -> Result<Svd, KernelError> {
    let (rows, cols) = m.shape();
    check_finite(m, "svd")?;
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: ComplexMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: ComplexMatrix::zeros(cols, 0),
        });
    }
    let a = faer::Mat::<Complex64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let dec = a
        .thin_svd()
        .map_err(|_| KernelError::SvdNonConvergence { rows, cols })?;
    let k = rows.min(cols);
    let su = ComplexMatrix::from_fn(rows, k, |i, j| dec.U()[(i, j)]);
    let sv = ComplexMatrix::from_fn(cols, k, |i, j| dec.V()[(i, j)]);
    let s: Vec<f64> = (0..k).map(|j| dec.S()[j].re.max(0.0)).collect();
    check_finite(&su, "svd")?;
    check_finite(&sv, "svd")?;
    Ok(Svd {
        u: su,
        singular_values: s,
        v: sv,
    })
}

/// Singular values only, descending.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>, KernelError> {
    Ok(svd(m)?.singular_values)
}

/// Number of singular values above `relative_cutoff * s_max`; zero for the zero matrix.
pub fn numerical_rank(m: &ComplexMatrix, tol: RankTolerance) -> Result<usize, KernelError> {
    let dec = svd(m)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(dec.rank_above(tol.threshold(smax)))
}

/// The Φ map `Z ↦ (√(ZZ†))^⊖ Z`, evaluated through the SVD truncation
/// `U diag(1[sᵢ > cutoff]) V†` with a relative cutoff.
pub fn phi_map(z: &ComplexMatrix, tol: RankTolerance) -> Result<ComplexMatrix, KernelError> {
    ensure_square(z)?;
    let dec = svd(z)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let threshold = if smax == 0.0 {
        f64::INFINITY
    } else {
        tol.threshold(smax)
    };
    Ok(partial_isometry(&dec, threshold))
}

/// Partial isometry of a decomposition keeping singular values above `threshold`.
pub fn partial_isometry(dec: &Svd, threshold: f64) -> ComplexMatrix {
    let weights: Vec<f64> = dec
        .singular_values
        .iter()
        .map(|&s| if s > threshold { 1.0 } else { 0.0 })
        .collect();
    dec.recompose_with(&weights)
}

/// Nearest unitary (full polar factor `U V†`) of a square matrix.
pub fn reunitarize(m: &ComplexMatrix) -> Result<ComplexMatrix, KernelError> {
    ensure_square(m)?;
    let dec = svd(m)?;
    Ok(&dec.u * dec.v.adjoint())
}

/// `max |(M†M − I)_ij|`.
pub fn unitarity_defect(m: &ComplexMatrix) -> Result<f64, KernelError> {
    ensure_square(m)?;
    let n = m.nrows();
    let g = m.adjoint() * m - ComplexMatrix::identity(n, n);
    Ok(max_abs(&g))
}

pub fn is_unitary(m: &ComplexMatrix, eps: f64) -> Result<bool, KernelError> {
    Ok(unitarity_defect(m)? <= eps)
}

/// `max |(M†M − I)_ij|` for a column-orthonormality check on a rectangular matrix.
pub fn isometry_defect(m: &ComplexMatrix) -> f64 {
    let n = m.ncols();
    max_abs(&(m.adjoint() * m - ComplexMatrix::identity(n, n)))
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64, KernelError> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), KernelError> {
    ensure_square(h)?;
    check_finite(h, "hermitian_eigen")?;
    let n = h.nrows();
    let herm = faer::Mat::<Complex64>::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = herm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| KernelError::EigenNonConvergence { dim: n })?;
    // faer returns eigenvalues in nondecreasing order
    let vals: Vec<f64> = (0..n).map(|j| eig.S()[j].re).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| eig.U()[(i, j)]);
    Ok((vals, vecs))
}

/// `exp(−i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, KernelError> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let mut scaled = vecs.clone();
    for (j, &lambda) in vals.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -t * lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    let out = scaled * vecs.adjoint();
    check_finite(&out, "expm_hermitian")?;
    Ok(out)
}

/// `exp(A)` for anti-Hermitian `A` (the result is unitary).
pub fn expm_anti_hermitian(a: &ComplexMatrix) -> Result<ComplexMatrix, KernelError> {
    // A = −iH with H = iA Hermitian.
    let h = a.map(|z| z * Complex64::i());
    expm_hermitian(&h, 1.0)
}
