//! The kernel `Γ_l` of one subspace curve, by two independent routes.
//!
//! * Projector product: `Γ_l ≈ P_l(s_M) ⋯ P_l(s_1) P_l(s_0)`. Written in the
//!   frames this is `F_l(1) [Π_j F_l(s_{j+1})† F_l(s_j)] F_l(0)†`; the bracket
//!   is not unitary at finite `M` and converges at first order.
//! * Transport: `Γ_l = F_l(1) T_l F_l(0)†` with `T_l = P exp ∫ A_l ds` and
//!   `[A_l]_{ij} = ⟨∂_s l^i | l^j⟩`, i.e. `A_l = F_l'† F_l`. With closed-form
//!   frame derivatives each interval uses the fourth-order two-point Gauss
//!   Magnus step; otherwise the connection over an interval is taken from
//!   the polar factor of the inter-sample overlap. Each step is re-unitarized.

use std::f64::consts::PI;

use super::HolonomyError;
use crate::exec::{self, ExecMode};
use crate::numkernel::{
    expm_anti_hermitian, max_abs, reunitarize, spectral_norm, svd, ComplexMatrix,
};
use crate::subspaces::{CurveFamily, FrameGenerator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRoute {
    ProjectorProduct,
    Transport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportScheme {
    /// Magnus steps when the curve's generator supplies frame derivatives,
    /// overlap polar factors otherwise.
    #[default]
    Auto,
    /// Polar factors of inter-sample overlaps (works for any sampled curve).
    Overlap,
    /// Fourth-order Magnus steps; requires closed-form derivatives.
    Magnus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    pub scheme: TransportScheme,
    /// Largest rotation angle (radians) a single overlap step may carry
    /// before the frames are considered misaligned.
    pub max_step_angle: f64,
    pub mode: ExecMode,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            scheme: TransportScheme::Auto,
            max_step_angle: PI / 4.0,
            mode: ExecMode::default(),
        }
    }
}

/// `Γ_l` as an `N × N` operator together with its `n_l × n_l` frame matrix.
#[derive(Debug, Clone)]
pub struct GammaKernel {
    pub subspace: usize,
    pub route: KernelRoute,
    /// `Γ_l = F_l(1) T F_l(0)†`.
    pub operator: ComplexMatrix,
    /// Transport matrix `T` (unitary on the transport route).
    pub transport: ComplexMatrix,
    /// `‖Γ_l(M) − Γ_l(M')‖_max` between this grid and a coarser or finer one.
    pub convergence_estimate: Option<f64>,
}

impl GammaKernel {
    fn new(curve: &CurveFamily, l: usize, route: KernelRoute, transport: ComplexMatrix) -> Self {
        let f0 = curve.start().frame(l).basis();
        let f1 = curve.end().frame(l).basis();
        Self {
            subspace: l,
            route,
            operator: f1 * &transport * f0.adjoint(),
            transport,
            convergence_estimate: None,
        }
    }

    /// `(F^k_0 | F^l_1)`, the `n_k × n_l` overlap between the initial frame of
    /// subspace `k` and the final frame of this kernel's subspace.
    pub fn overlap(&self, curve: &CurveFamily, k: usize) -> ComplexMatrix {
        curve.start().frame(k).basis().adjoint() * curve.end().frame(self.subspace).basis()
    }
}

fn check_index(curve: &CurveFamily, l: usize) -> Result<(), HolonomyError> {
    if l >= curve.eta() {
        Err(HolonomyError::IndexOutOfRange {
            index: l,
            eta: curve.eta(),
        })
    } else {
        Ok(())
    }
}

/// Ordered projector product on the curve's own grid (no convergence estimate).
pub fn projector_product(curve: &CurveFamily, l: usize) -> Result<GammaKernel, HolonomyError> {
    check_index(curve, l)?;
    let n = curve.dims()[l];
    let mut t = ComplexMatrix::identity(n, n);
    for w in curve.samples().windows(2) {
        let step = w[1].frame(l).basis().adjoint() * w[0].frame(l).basis();
        t = step * t;
    }
    Ok(GammaKernel::new(curve, l, KernelRoute::ProjectorProduct, t))
}

/// Projector product with a convergence estimate from one grid change
/// (refinement by 2 for generator-backed curves, halving for explicit ones).
pub fn gamma_kernel_projector(curve: &CurveFamily, l: usize) -> Result<GammaKernel, HolonomyError> {
    let mut kernel = projector_product(curve, l)?;
    let other = if curve.is_refinable() {
        curve.refine(2).ok()
    } else if curve.intervals().is_multiple_of(2) && curve.intervals() >= 2 {
        curve.subsample(2).ok()
    } else {
        None
    };
    if let Some(other) = other {
        let k2 = projector_product(&other, l)?;
        kernel.convergence_estimate = Some(max_abs(&(&kernel.operator - &k2.operator)));
    }
    Ok(kernel)
}

/// First-order Richardson extrapolation `2 Γ(2M) − Γ(M)`.
pub fn richardson_extrapolate(coarse: &ComplexMatrix, fine: &ComplexMatrix) -> ComplexMatrix {
    fine.scale(2.0) - coarse
}

/// Repeated Richardson elimination over grids `M, 2M, 4M, …` (coarsest
/// first), removing the `1/M, 1/M², …` error terms in turn.
pub fn richardson_ladder(values: &[ComplexMatrix]) -> Option<ComplexMatrix> {
    let mut level: Vec<ComplexMatrix> = values.to_vec();
    let mut factor = 2.0;
    while level.len() > 1 {
        level = level
            .windows(2)
            .map(|w| (w[1].scale(factor) - &w[0]).unscale(factor - 1.0))
            .collect();
        factor *= 2.0;
    }
    level.pop()
}

/// Projector-route `Γ_l` extrapolated from the grids `M/2^(levels−1), …, M/2, M`
/// of a refinable curve with `M` intervals.
pub fn gamma_kernel_extrapolated(
    curve: &CurveFamily,
    l: usize,
    levels: usize,
) -> Result<ComplexMatrix, HolonomyError> {
    let m = curve.intervals();
    let levels = levels.max(1);
    let base = 1usize << (levels - 1);
    if !m.is_multiple_of(base) {
        return Err(HolonomyError::Shape(format!(
            "{m} intervals cannot be halved {} times",
            levels - 1
        )));
    }
    let mut values = Vec::with_capacity(levels);
    for k in (0..levels).rev() {
        let c = if k == 0 { curve.clone() } else { curve.subsample(1 << k)? };
        values.push(projector_product(&c, l)?.operator);
    }
    richardson_ladder(&values).ok_or(HolonomyError::EmptySequence)
}

/// Transport kernel `Γ_l` of one subspace.
pub fn gamma_kernel_transport(curve: &CurveFamily, l: usize) -> Result<GammaKernel, HolonomyError> {
    check_index(curve, l)?;
    let mut all = transport_matrices(curve, TransportOptions::default())?;
    Ok(GammaKernel::new(curve, l, KernelRoute::Transport, all.swap_remove(l)))
}

/// `T_l = P exp ∫₀¹ A_l ds` for every subspace.
pub fn transport_matrices(
    curve: &CurveFamily,
    opts: TransportOptions,
) -> Result<Vec<ComplexMatrix>, HolonomyError> {
    let generator = curve
        .generator()
        .filter(|g| g.frame_derivatives_at(0.0).is_some());
    let use_magnus = match opts.scheme {
        TransportScheme::Overlap => false,
        TransportScheme::Auto => generator.is_some(),
        TransportScheme::Magnus => {
            if generator.is_none() {
                return Err(HolonomyError::Shape(
                    "Magnus transport needs a generator with frame derivatives".into(),
                ));
            }
            true
        }
    };
    // steps[j][l]: propagator of subspace l over interval j
    let steps: Vec<Result<Vec<ComplexMatrix>, HolonomyError>> = if use_magnus {
        let g = generator.expect("checked above").as_ref();
        exec::map_indexed(opts.mode, curve.intervals(), |j| {
            magnus_step(g, curve.grid()[j], curve.grid()[j + 1])
        })
    } else {
        exec::map_indexed(opts.mode, curve.intervals(), |j| {
            overlap_step(curve, j, opts.max_step_angle)
        })
    };
    let dims = curve.dims();
    let mut t: Vec<ComplexMatrix> = dims.iter().map(|&n| ComplexMatrix::identity(n, n)).collect();
    for step in steps {
        let step = step?;
        for (tl, sl) in t.iter_mut().zip(step) {
            *tl = reunitarize(&(sl * &*tl))?;
        }
    }
    Ok(t)
}

fn overlap_step(
    curve: &CurveFamily,
    j: usize,
    max_angle: f64,
) -> Result<Vec<ComplexMatrix>, HolonomyError> {
    let (a, b) = (curve.sample(j), curve.sample(j + 1));
    // ‖U − I‖₂ = 2 sin(θ/2) for the largest rotation angle θ of U.
    let max_dev = 2.0 * (0.5 * max_angle).sin();
    (0..curve.eta())
        .map(|l| {
            let overlap = b.frame(l).basis().adjoint() * a.frame(l).basis();
            let dec = svd(&overlap)?;
            let smallest = dec.singular_values.last().copied().unwrap_or(1.0);
            let step = &dec.u * dec.v.adjoint();
            let n = step.nrows();
            let rotation = spectral_norm(&(&step - ComplexMatrix::identity(n, n)))?;
            if rotation > max_dev || smallest < 0.5 {
                return Err(HolonomyError::FramesNotAligned {
                    subspace: l,
                    interval: j,
                    rotation,
                });
            }
            Ok(step)
        })
        .collect()
}

fn connection(frames: &[ComplexMatrix], derivs: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    frames
        .iter()
        .zip(derivs)
        .map(|(f, d)| {
            let a = d.adjoint() * f;
            // project onto the anti-Hermitian part to remove roundoff
            (&a - a.adjoint()).scale(0.5)
        })
        .collect()
}

fn magnus_step(
    g: &dyn FrameGenerator,
    s0: f64,
    s1: f64,
) -> Result<Vec<ComplexMatrix>, HolonomyError> {
    let h = s1 - s0;
    let offset = 3f64.sqrt() / 6.0;
    let (sa, sb) = (s0 + (0.5 - offset) * h, s0 + (0.5 + offset) * h);
    let deriv = |s: f64| {
        g.frame_derivatives_at(s)
            .ok_or_else(|| HolonomyError::Shape("generator stopped supplying derivatives".into()))
    };
    let a1 = connection(&g.frames_at(sa), &deriv(sa)?);
    let a2 = connection(&g.frames_at(sb), &deriv(sb)?);
    let c = 3f64.sqrt() / 12.0 * h * h;
    a1.iter()
        .zip(&a2)
        .map(|(x, y)| {
            let omega = (x + y).scale(0.5 * h) + (y * x - x * y).scale(c);
            Ok(expm_anti_hermitian(&omega)?)
        })
        .collect()
}
