use std::sync::Arc;

use num_complex::Complex64;

use crate::numkernel::ComplexMatrix;
use crate::subspaces::{FrameGenerator, HamiltonianPath};

/// `P_l(s)` and `∂_s P_l(s) = F'F† + FF'†` from a generator with derivatives.
pub fn derivative_projectors(
    g: &dyn FrameGenerator,
    s: f64,
) -> Option<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> {
    let frames = g.frames_at(s);
    let derivs = g.frame_derivatives_at(s)?;
    let p = frames.iter().map(|f| f * f.adjoint()).collect();
    let dp = frames
        .iter()
        .zip(&derivs)
        .map(|(f, d)| d * f.adjoint() + f * d.adjoint())
        .collect();
    Some((p, dp))
}

/// The transitionless Hamiltonian `H(s) = i Σ_l (∂_s P_l) P_l`, under which
/// every `P_l(s)` obeys `∂_s P_l = −i[H, P_l]` exactly.
#[derive(Clone)]
pub struct Transitionless {
    generator: Arc<dyn FrameGenerator>,
}

impl Transitionless {
    /// `None` when the generator has no closed-form derivatives.
    pub fn new(generator: Arc<dyn FrameGenerator>) -> Option<Self> {
        generator.frame_derivatives_at(0.0)?;
        Some(Self { generator })
    }
}

impl HamiltonianPath for Transitionless {
    fn dim(&self) -> usize {
        self.generator.ambient_dim()
    }

    fn hamiltonian_at(&self, s: f64) -> ComplexMatrix {
        let n = self.dim();
        let (p, dp) = derivative_projectors(self.generator.as_ref(), s)
            .expect("derivatives checked at construction");
        let sum = p
            .iter()
            .zip(&dp)
            .fold(ComplexMatrix::zeros(n, n), |acc, (p, dp)| acc + dp * p);
        let h = sum.map(|z| z * Complex64::new(0.0, 1.0));
        (&h + h.adjoint()).scale(0.5)
    }
}
