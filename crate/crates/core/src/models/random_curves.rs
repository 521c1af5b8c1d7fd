//! Seeded synthetic curves `F_l(s) = V(s) F_l(0)` with
//! `V(s) = e^{−isK₁} e^{−isK₂} ⋯`, i.e. Schrödinger evolution of the initial
//! decomposition under `H(s) = Σ_m W_{m−1}(s) K_m W_{m−1}(s)†` where
//! `W_m = e^{−isK₁}⋯e^{−isK_m}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::numkernel::{hermitian_eigen, ComplexMatrix, KernelError};
use crate::random;
use crate::subspaces::{block_offsets, FrameGenerator, HamiltonianPath};

#[derive(Debug, Clone)]
struct Factor {
    generator: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl Factor {
    fn new(k: ComplexMatrix) -> Result<Self, KernelError> {
        let (eigenvalues, eigenvectors) = hermitian_eigen(&k)?;
        Ok(Self {
            generator: k,
            eigenvalues,
            eigenvectors,
        })
    }

    /// `e^{−isK}`.
    fn at(&self, s: f64) -> ComplexMatrix {
        let phases = nalgebra::DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -s * e)),
        );
        let scaled = ComplexMatrix::from_fn(self.eigenvectors.nrows(), self.eigenvectors.ncols(), |i, j| {
            self.eigenvectors[(i, j)] * phases[j]
        });
        scaled * self.eigenvectors.adjoint()
    }
}

/// Curve generated by a product of constant-generator exponentials.
#[derive(Debug, Clone)]
pub struct UnitaryPathGenerator {
    dims: Vec<usize>,
    initial: Vec<ComplexMatrix>,
    factors: Vec<Factor>,
    label: String,
}

/// Splits the columns of a unitary into frames of the given dims.
pub fn split_frames(u: &ComplexMatrix, dims: &[usize]) -> Vec<ComplexMatrix> {
    block_offsets(dims)
        .iter()
        .zip(dims)
        .map(|(&o, &n)| u.columns(o, n).into_owned())
        .collect()
}

impl UnitaryPathGenerator {
    pub fn new(initial: Vec<ComplexMatrix>, generators: Vec<ComplexMatrix>, label: &str) -> Result<Self, KernelError> {
        let dims = initial.iter().map(|f| f.ncols()).collect();
        let factors = generators.into_iter().map(Factor::new).collect::<Result<_, _>>()?;
        Ok(Self {
            dims,
            initial,
            factors,
            label: label.to_string(),
        })
    }

    /// Haar-random initial frames evolved by one random Hermitian generator
    /// of entry scale `strength`.
    pub fn random_open<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], strength: f64) -> Result<Self, KernelError> {
        let n: usize = dims.iter().sum();
        let initial = split_frames(&random::haar_unitary(rng, n), dims);
        let k = random::hermitian(rng, n, strength);
        Self::new(initial, vec![k], "random-open")
    }

    /// Cyclic curve: `K₁ = W diag(2π m) W†` with integer `m` closes to the
    /// identity at `s = 1`, and `K₂` is block diagonal in the initial frames,
    /// so `V(1)` maps every initial subspace onto itself.
    pub fn random_cyclic<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], strength: f64) -> Result<Self, KernelError> {
        let n: usize = dims.iter().sum();
        let initial = split_frames(&random::haar_unitary(rng, n), dims);
        let w = random::haar_unitary(rng, n);
        let winding = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
            Complex64::new(2.0 * PI * rng.gen_range(-1i32..=1) as f64, 0.0)
        }));
        let k_loop = &w * winding * w.adjoint();
        let mut k_block = ComplexMatrix::zeros(n, n);
        for f in &initial {
            let x = random::hermitian(rng, f.ncols(), strength);
            k_block += f * x * f.adjoint();
        }
        Self::new(initial, vec![k_loop, k_block], "random-cyclic")
    }

    /// `V(s)`.
    pub fn propagator(&self, s: f64) -> ComplexMatrix {
        let n = self.ambient_dim();
        self.factors
            .iter()
            .fold(ComplexMatrix::identity(n, n), |acc, f| acc * f.at(s))
    }

    fn derivative(&self, s: f64) -> ComplexMatrix {
        let n = self.ambient_dim();
        let minus_i = Complex64::new(0.0, -1.0);
        let exps: Vec<ComplexMatrix> = self.factors.iter().map(|f| f.at(s)).collect();
        let mut total = ComplexMatrix::zeros(n, n);
        for m in 0..exps.len() {
            let mut term = ComplexMatrix::identity(n, n);
            for (j, e) in exps.iter().enumerate() {
                term = if j == m {
                    term * (&self.factors[j].generator * e).map(|z| z * minus_i)
                } else {
                    term * e
                };
            }
            total += term;
        }
        total
    }
}

impl FrameGenerator for UnitaryPathGenerator {
    fn ambient_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    fn dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn frames_at(&self, s: f64) -> Vec<ComplexMatrix> {
        let v = self.propagator(s);
        self.initial.iter().map(|f| &v * f).collect()
    }

    fn frame_derivatives_at(&self, s: f64) -> Option<Vec<ComplexMatrix>> {
        let dv = self.derivative(s);
        Some(self.initial.iter().map(|f| &dv * f).collect())
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

impl HamiltonianPath for UnitaryPathGenerator {
    fn dim(&self) -> usize {
        self.ambient_dim()
    }

    fn hamiltonian_at(&self, s: f64) -> ComplexMatrix {
        let n = self.ambient_dim();
        let mut w = ComplexMatrix::identity(n, n);
        let mut h = ComplexMatrix::zeros(n, n);
        for f in &self.factors {
            h += &w * &f.generator * w.adjoint();
            w *= f.at(s);
        }
        h
    }
}

/// A random `N × N` unitary whose diagonal blocks (for `dims`) vanish,
/// found by alternating between zeroing the diagonal blocks and taking the
/// nearest unitary. Returns `None` if the iteration has not converged to
/// `1e-13` within `max_iter` sweeps.
pub fn random_zero_diagonal_unitary<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &[usize],
    max_iter: usize,
) -> Option<ComplexMatrix> {
    let offsets = block_offsets(dims);
    let zero_diagonal = |m: &mut ComplexMatrix| {
        for (&o, &n) in offsets.iter().zip(dims) {
            m.view_mut((o, o), (n, n)).fill(Complex64::new(0.0, 0.0));
        }
    };
    let diagonal_norm = |m: &ComplexMatrix| -> f64 {
        offsets
            .iter()
            .zip(dims)
            .map(|(&o, &n)| m.view((o, o), (n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    };
    let n: usize = dims.iter().sum();
    let mut u = random::haar_unitary(rng, n);
    for _ in 0..max_iter {
        zero_diagonal(&mut u);
        u = crate::numkernel::reunitarize(&u).ok()?;
        if diagonal_norm(&u) < 1e-13 {
            zero_diagonal(&mut u);
            return crate::numkernel::reunitarize(&u).ok();
        }
    }
    None
}
