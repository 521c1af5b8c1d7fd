use num_complex::Complex64;

use super::InterferometerError;
use crate::holonomy::{transport_matrices, HolonomyError, TransportOptions};
use crate::models::derivative_projectors;
use crate::numkernel::{commutator, max_abs, spectral_norm, unitarity_defect, ComplexMatrix};
use crate::propagate::{dormand_prince, AdaptiveOptions};
use crate::subspaces::{CurveFamily, FrameGenerator, HamiltonianPath};

/// `φ_l = ∫₀¹ E_l(s) ds` by the trapezoid rule over the energies stored on a
/// curve built from a Hamiltonian path.
pub fn dynamical_phases(curve: &CurveFamily) -> Result<Vec<f64>, InterferometerError> {
    let energies = curve.energies().ok_or_else(|| {
        InterferometerError::Spec("curve carries no eigenvalues; supply the dynamical phases".into())
    })?;
    let grid = curve.grid();
    let mut phases = vec![0.0; curve.eta()];
    for j in 0..curve.intervals() {
        let h = grid[j + 1] - grid[j];
        for (l, phi) in phases.iter_mut().enumerate() {
            *phi += 0.5 * h * (energies[j][l] + energies[j + 1][l]);
        }
    }
    Ok(phases)
}

#[derive(Debug, Clone)]
pub struct AdiabaticU {
    pub u: ComplexMatrix,
    /// `‖U†U − 1‖_max`; zero up to roundoff when every `Γ_l` is taken on
    /// the transport route.
    pub unitarity_defect: f64,
}

/// Sum of `Γ_l` operators (transport route) weighted by `e^{iφ_l}`.
fn weighted_kernels(curve: &CurveFamily, phases: &[f64]) -> Result<ComplexMatrix, HolonomyError> {
    let t = transport_matrices(curve, TransportOptions::default())?;
    let n = curve.ambient_dim();
    let mut u = ComplexMatrix::zeros(n, n);
    for (l, tl) in t.iter().enumerate() {
        let f0 = curve.start().frame(l).basis();
        let f1 = curve.end().frame(l).basis();
        let phase = Complex64::from_polar(1.0, phases[l]);
        u += (f1 * tl * f0.adjoint()).map(|z| z * phase);
    }
    Ok(u)
}

/// `U = Σ_l e^{iφ_l} Γ_l`.
pub fn adiabatic_u(curve: &CurveFamily, phases: &[f64]) -> Result<AdiabaticU, InterferometerError> {
    if phases.len() != curve.eta() {
        return Err(InterferometerError::Spec(format!(
            "{} dynamical phases for {} subspaces",
            phases.len(),
            curve.eta()
        )));
    }
    let u = weighted_kernels(curve, phases)?;
    let unitarity_defect = unitarity_defect(&u)?;
    Ok(AdiabaticU { u, unitarity_defect })
}

#[derive(Debug, Clone)]
pub struct NonadiabaticU {
    /// `Ū(1)`.
    pub u: ComplexMatrix,
    /// `Σ_l Γ_l` on the transport route.
    pub reference: ComplexMatrix,
    pub reference_deviation: f64,
    /// Largest `‖∂P_l + i[H, P_l]‖` over the grid, relative to `max(1, ‖H‖)`.
    pub precondition_defect: f64,
    /// Largest `‖[H̄, P_l] − [H, P_l]‖_max` over the grid.
    pub commutator_defect: f64,
    pub accepted_steps: usize,
}

const PRECONDITION_LIMIT: f64 = 1e-6;
const DIFFERENCE_STEP: f64 = 1e-5;

fn projectors_with_derivatives(g: &dyn FrameGenerator, s: f64) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>, bool) {
    if let Some((p, dp)) = derivative_projectors(g, s) {
        return (p, dp, true);
    }
    let proj = |x: f64| -> Vec<ComplexMatrix> {
        g.frames_at(x).iter().map(|f| f * f.adjoint()).collect()
    };
    let (lo, hi) = ((s - DIFFERENCE_STEP).max(0.0), (s + DIFFERENCE_STEP).min(1.0));
    let (a, b) = (proj(lo), proj(hi));
    let dp = a.iter().zip(&b).map(|(a, b)| (b - a).unscale(hi - lo)).collect();
    (proj(s), dp, false)
}

fn modified(h: &ComplexMatrix, projectors: &[ComplexMatrix]) -> ComplexMatrix {
    projectors
        .iter()
        .fold(h.clone(), |acc, p| acc - p * h * p)
}

/// Integrates `i ∂_s U = H̄(s) U` from the identity and returns `Ū(1)`.
///
/// The curve must be generator-backed and follow the Schrödinger equation of
/// `H`, which is verified at every grid sample.
pub fn nonadiabatic_u(
    h: &dyn HamiltonianPath,
    curve: &CurveFamily,
    tolerance: f64,
) -> Result<NonadiabaticU, InterferometerError> {
    let g = curve.generator().ok_or_else(|| {
        InterferometerError::Spec("nonadiabatic evolution needs a generator-backed curve".into())
    })?;
    let minus_i = Complex64::new(0.0, -1.0);
    let mut precondition_defect: f64 = 0.0;
    let mut commutator_defect: f64 = 0.0;
    for &s in curve.grid() {
        let hs = h.hamiltonian_at(s);
        let (p, dp, exact) = projectors_with_derivatives(g.as_ref(), s);
        let scale = spectral_norm(&hs)?.max(1.0);
        let hbar = modified(&hs, &p);
        for (p, dp) in p.iter().zip(&dp) {
            let c = commutator(&hs, p);
            let expected = c.map(|z| z * minus_i);
            precondition_defect = precondition_defect.max(max_abs(&(dp - expected)) / scale);
            commutator_defect = commutator_defect.max(max_abs(&(commutator(&hbar, p) - c)));
        }
        let limit = if exact { PRECONDITION_LIMIT } else { 100.0 * PRECONDITION_LIMIT };
        if precondition_defect > limit {
            return Err(InterferometerError::Precondition {
                s,
                defect: precondition_defect,
            });
        }
    }
    let n = curve.ambient_dim();
    let hbar_at = |s: f64| {
        let hs = h.hamiltonian_at(s);
        let p: Vec<ComplexMatrix> = g.frames_at(s).iter().map(|f| f * f.adjoint()).collect();
        modified(&hs, &p)
    };
    let opts = AdaptiveOptions {
        tolerance,
        ..AdaptiveOptions::default()
    };
    let out = dormand_prince(hbar_at, &ComplexMatrix::identity(n, n), 0.0, 1.0, opts)?;
    let reference = weighted_kernels(curve, &vec![0.0; curve.eta()])?;
    let reference_deviation = max_abs(&(&out.propagator - &reference));
    Ok(NonadiabaticU {
        u: out.propagator,
        reference,
        reference_deviation,
        precondition_defect,
        commutator_defect,
        accepted_steps: out.accepted,
    })
}

/// Propagator of `i ∂_s U = scale · H(s) U` over `[0, 1]`.
pub fn schrodinger_u(
    h: &dyn HamiltonianPath,
    scale: f64,
    tolerance: f64,
) -> Result<ComplexMatrix, InterferometerError> {
    let n = h.dim();
    let opts = AdaptiveOptions {
        tolerance,
        initial_step: 1e-3 / scale.max(1.0),
        ..AdaptiveOptions::default()
    };
    let out = dormand_prince(
        |s| h.hamiltonian_at(s).scale(scale),
        &ComplexMatrix::identity(n, n),
        0.0,
        1.0,
        opts,
    )?;
    Ok(out.propagator)
}

/// `‖U_T − Σ_l e^{−iT∫E_l} Γ_l‖_max` where `U_T` solves the Schrödinger
/// equation of `H(t/T)` over `t ∈ [0, T]` and `energy_integrals[l] = ∫₀¹ E_l ds`.
pub fn adiabatic_limit_deviation(
    h: &dyn HamiltonianPath,
    curve: &CurveFamily,
    energy_integrals: &[f64],
    total_time: f64,
    tolerance: f64,
) -> Result<f64, InterferometerError> {
    let u_t = schrodinger_u(h, total_time, tolerance)?;
    let phases: Vec<f64> = energy_integrals.iter().map(|e| -total_time * e).collect();
    let ideal = adiabatic_u(curve, &phases)?;
    Ok(max_abs(&(&u_t - &ideal.u)))
}
