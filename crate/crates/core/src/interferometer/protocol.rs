use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::dynamics::{adiabatic_u, nonadiabatic_u};
use super::{beam_splitter, on_path, InterferometerError, TwoPathState, EXACT_TOLERANCE};
use crate::holonomy::{
    build_sigma_table, build_sigma_table_with, gamma_product, KernelRoute, SigmaTable, TableOptions,
};
use crate::numkernel::{commutator, max_abs, ComplexMatrix};
use crate::subspaces::{CurveFamily, HamiltonianPath};

/// How the path-0 map `U` is produced.
#[derive(Clone)]
pub enum Strategy {
    /// `U = Σ_l e^{iφ_l} Γ_l` with the given phases `φ_l`.
    Adiabatic { phases: Vec<f64> },
    /// Chains of projective filterings on a grid of `grid` intervals.
    Filtering { grid: usize },
    /// `Ū(1)` from `H̄(s) = H(s) − Σ_l P_l H P_l`.
    Nonadiabatic {
        hamiltonian: Arc<dyn HamiltonianPath>,
        tolerance: f64,
    },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Adiabatic { .. } => "adiabatic",
            Strategy::Filtering { .. } => "filtering",
            Strategy::Nonadiabatic { .. } => "nonadiabatic",
        }
    }
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Adiabatic { phases } => write!(f, "Adiabatic {{ phases: {phases:?} }}"),
            Strategy::Filtering { grid } => write!(f, "Filtering {{ grid: {grid} }}"),
            Strategy::Nonadiabatic { tolerance, .. } => {
                write!(f, "Nonadiabatic {{ tolerance: {tolerance:e} }}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub seq: Vec<usize>,
    pub strategy: Strategy,
    /// `N × N` unitary on path 1, commuting with every `P_l(0)`.
    pub v: ComplexMatrix,
}

impl ProtocolSpec {
    pub fn new(
        curve: &CurveFamily,
        seq: Vec<usize>,
        strategy: Strategy,
        v: ComplexMatrix,
    ) -> Result<Self, InterferometerError> {
        let spec = Self { seq, strategy, v };
        spec.validate(curve)?;
        Ok(spec)
    }

    pub fn validate(&self, curve: &CurveFamily) -> Result<(), InterferometerError> {
        validate_seq(curve, &self.seq)?;
        validate_strategy(curve, &self.strategy)?;
        check_admissible(curve, &self.v)
    }
}

fn validate_seq(curve: &CurveFamily, seq: &[usize]) -> Result<(), InterferometerError> {
    if seq.is_empty() {
        return Err(InterferometerError::Spec("empty index sequence".into()));
    }
    if let Some(bad) = seq.iter().find(|&&l| l >= curve.eta()) {
        return Err(InterferometerError::Spec(format!(
            "subspace index {bad} out of range for eta = {}",
            curve.eta()
        )));
    }
    Ok(())
}

fn validate_strategy(curve: &CurveFamily, strategy: &Strategy) -> Result<(), InterferometerError> {
    match strategy {
        Strategy::Adiabatic { phases } if phases.len() != curve.eta() => Err(InterferometerError::Spec(
            format!("{} dynamical phases for {} subspaces", phases.len(), curve.eta()),
        )),
        Strategy::Filtering { grid: 0 } => {
            Err(InterferometerError::Spec("filtering strategy needs a grid of at least one interval".into()))
        }
        Strategy::Nonadiabatic { hamiltonian, tolerance } => {
            if hamiltonian.dim() != curve.ambient_dim() {
                Err(InterferometerError::Spec(format!(
                    "Hamiltonian of dimension {} on a curve in dimension {}",
                    hamiltonian.dim(),
                    curve.ambient_dim()
                )))
            } else if !(*tolerance > 0.0) {
                Err(InterferometerError::Spec("integrator tolerance must be positive".into()))
            } else if curve.generator().is_none() {
                Err(InterferometerError::Spec(
                    "nonadiabatic strategy needs a generator-backed curve".into(),
                ))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

/// Checks `[V, P_l(0)] = 0` for every subspace.
pub(crate) fn check_admissible(curve: &CurveFamily, v: &ComplexMatrix) -> Result<(), InterferometerError> {
    let n = curve.ambient_dim();
    if v.nrows() != n || v.ncols() != n {
        return Err(InterferometerError::Spec(format!(
            "V is {}x{}, expected {n}x{n}",
            v.nrows(),
            v.ncols()
        )));
    }
    for (l, p) in curve.start().projectors().iter().enumerate() {
        let defect = max_abs(&commutator(v, p));
        if defect > EXACT_TOLERANCE {
            return Err(InterferometerError::NotAdmissible { l, defect });
        }
    }
    Ok(())
}

/// One filtering `|0⟩⟨0| ⊗ P_l(s) + |1⟩⟨1| ⊗ 1`.
#[derive(Debug, Clone)]
pub struct FilterOp {
    /// Position of the leg in the sequence; `None` for the closing filter.
    pub leg: Option<usize>,
    pub subspace: usize,
    pub s: f64,
    pub projector: ComplexMatrix,
}

/// The filterings realizing every leg `l_1, …, l_κ` on a grid of `grid`
/// intervals, followed by the closing `P_{l1}(0)`.
pub fn filtering_u_sequence(
    curve: &CurveFamily,
    seq: &[usize],
    grid: usize,
) -> Result<Vec<FilterOp>, InterferometerError> {
    validate_seq(curve, seq)?;
    let fine = curve.resample(grid)?;
    let mut ops = Vec::with_capacity(seq.len() * (grid + 1) + 1);
    for (leg, &l) in seq.iter().enumerate() {
        for (s, d) in fine.grid().iter().zip(fine.samples()) {
            ops.push(FilterOp {
                leg: Some(leg),
                subspace: l,
                s: *s,
                projector: d.frame(l).projector(),
            });
        }
    }
    ops.push(FilterOp {
        leg: None,
        subspace: seq[0],
        s: 0.0,
        projector: curve.start().frame(seq[0]).projector(),
    });
    Ok(ops)
}

/// An operation on the internal state in path 0.
#[derive(Debug, Clone)]
pub enum PathOp {
    Evolve(ComplexMatrix),
    Filter(ComplexMatrix),
}

impl PathOp {
    fn matrix(&self) -> &ComplexMatrix {
        match self {
            PathOp::Evolve(m) | PathOp::Filter(m) => m,
        }
    }
}

/// `p = 1/4 + Tr(γγ†)/(4n) + Re Tr(γ V†)/(2n)`, with any dynamical phase
/// already folded into `γ`.
pub fn detection_probability(gamma: &ComplexMatrix, v_block: &ComplexMatrix) -> f64 {
    let n = gamma.nrows() as f64;
    let weight = (gamma * gamma.adjoint()).trace().re;
    let overlap = (gamma * v_block.adjoint()).trace().re;
    0.25 + weight / (4.0 * n) + overlap / (2.0 * n)
}

/// A protocol with its expensive part (the path-0 chain) precomputed, so
/// many choices of `V` can be simulated cheaply.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub seq: Vec<usize>,
    pub strategy: &'static str,
    initial: CurveFamily,
    ops: Vec<PathOp>,
    composite: ComplexMatrix,
    /// `γ` realized by this strategy, including `e^{iΣφ}` for the adiabatic one.
    pub gamma: ComplexMatrix,
    /// `γ` of the ideal transport table (with the same phase factor).
    pub reference_gamma: ComplexMatrix,
    /// `Σ_k φ_{l_k}` (zero for filtering and nonadiabatic runs).
    pub phase_sum: f64,
    /// `‖U†U − 1‖_max` of the path-0 map, where one is applied.
    pub u_defect: Option<f64>,
    /// `‖Ū(1) − Σ_l Γ_l‖_max` for nonadiabatic runs.
    pub reference_deviation: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProtocolOutcome {
    /// Path-0 probability of the simulated circuit.
    pub p: f64,
    /// Closed form for the realized `γ`.
    pub closed_form_p: f64,
    pub cross_check_deviation: f64,
    /// Closed form with the ideal transport `γ`.
    pub reference_p: f64,
    /// Total weight left after all filterings (one minus the discarded fraction).
    pub surviving_weight: f64,
}

fn realized_table(curve: &CurveFamily, u: &ComplexMatrix) -> Result<SigmaTable, InterferometerError> {
    let basis = curve.start().full_basis();
    let s = basis.adjoint() * u * basis;
    Ok(SigmaTable::from_matrix(curve.dims(), &s)?)
}

fn u_chain(u: &ComplexMatrix, curve: &CurveFamily, seq: &[usize]) -> Vec<PathOp> {
    let kappa = seq.len();
    let mut ops = Vec::with_capacity(2 * kappa);
    for k in 0..kappa {
        ops.push(PathOp::Evolve(u.clone()));
        let next = seq[(k + 1) % kappa];
        ops.push(PathOp::Filter(curve.start().frame(next).projector()));
    }
    ops
}

impl Protocol {
    pub fn prepare(curve: &CurveFamily, seq: &[usize], strategy: &Strategy) -> Result<Self, InterferometerError> {
        validate_seq(curve, seq)?;
        validate_strategy(curve, strategy)?;
        let ideal = build_sigma_table(curve)?;
        let ideal_gamma = gamma_product(&ideal, seq)?;
        let (ops, gamma, reference_gamma, phase_sum, u_defect, reference_deviation) = match strategy {
            Strategy::Adiabatic { phases } => {
                let au = adiabatic_u(curve, phases)?;
                let phase_sum: f64 = seq.iter().map(|&l| phases[l]).sum();
                let factor = Complex64::from_polar(1.0, phase_sum);
                let gamma = ideal_gamma.map(|z| z * factor);
                (u_chain(&au.u, curve, seq), gamma.clone(), gamma, phase_sum, Some(au.unitarity_defect), None)
            }
            Strategy::Filtering { grid } => {
                let filters = filtering_u_sequence(curve, seq, *grid)?;
                let fine = curve.resample(*grid)?;
                let opts = TableOptions {
                    route: KernelRoute::ProjectorProduct,
                    check_unitarity: false,
                    ..TableOptions::default()
                };
                let table = build_sigma_table_with(&fine, opts)?;
                let gamma = gamma_product(&table, seq)?;
                let ops = filters.into_iter().map(|f| PathOp::Filter(f.projector)).collect();
                (ops, gamma, ideal_gamma, 0.0, None, None)
            }
            Strategy::Nonadiabatic { hamiltonian, tolerance } => {
                let nu = nonadiabatic_u(hamiltonian.as_ref(), curve, *tolerance)?;
                let gamma = gamma_product(&realized_table(curve, &nu.u)?, seq)?;
                let defect = crate::numkernel::unitarity_defect(&nu.u)?;
                (
                    u_chain(&nu.u, curve, seq),
                    gamma,
                    ideal_gamma,
                    0.0,
                    Some(defect),
                    Some(nu.reference_deviation),
                )
            }
        };
        let n = curve.ambient_dim();
        let composite = ops
            .iter()
            .fold(ComplexMatrix::identity(n, n), |acc, op| op.matrix() * acc);
        Ok(Self {
            seq: seq.to_vec(),
            strategy: strategy.name(),
            initial: curve.clone(),
            ops,
            composite,
            gamma,
            reference_gamma,
            phase_sum,
            u_defect,
            reference_deviation,
        })
    }

    pub fn ops(&self) -> &[PathOp] {
        &self.ops
    }

    /// `V_{ij} = ⟨l_1^i(0)|V|l_1^j(0)⟩`.
    pub fn v_block(&self, v: &ComplexMatrix) -> ComplexMatrix {
        let f = self.initial.start().frame(self.seq[0]).basis();
        f.adjoint() * v * f
    }

    fn simulate(&self, v: &ComplexMatrix, ops: &[PathOp]) -> Result<TwoPathState, InterferometerError> {
        let n = self.initial.ambient_dim();
        let bs = beam_splitter(n);
        let mut state = TwoPathState::prepare(&self.initial.start().frame(self.seq[0]).projector());
        state.apply(&bs);
        state.apply(&on_path(1, v));
        let mut weight = state.trace();
        for op in ops {
            state.apply(&on_path(0, op.matrix()));
            if let PathOp::Filter(_) = op {
                let now = state.trace();
                if now > weight + EXACT_TOLERANCE {
                    return Err(InterferometerError::State(format!(
                        "filtering increased the weight from {weight} to {now}"
                    )));
                }
                weight = now;
            }
        }
        state.apply(&bs);
        state.check(EXACT_TOLERANCE)?;
        Ok(state)
    }

    /// Full circuit simulation with the closed-form cross-check.
    pub fn run(&self, v: &ComplexMatrix) -> Result<ProtocolOutcome, InterferometerError> {
        check_admissible(&self.initial, v)?;
        let state = self.simulate(v, &self.ops)?;
        let p = state.path_weight(0);
        let vb = self.v_block(v);
        let closed_form_p = detection_probability(&self.gamma, &vb);
        let deviation = (p - closed_form_p).abs();
        if deviation > EXACT_TOLERANCE {
            return Err(InterferometerError::CrossCheck {
                simulated: p,
                closed_form: closed_form_p,
                deviation,
            });
        }
        Ok(ProtocolOutcome {
            p,
            closed_form_p,
            cross_check_deviation: deviation,
            reference_p: detection_probability(&self.reference_gamma, &vb),
            surviving_weight: state.trace(),
        })
    }

    /// Circuit probability using the precomposed path-0 map.
    pub fn probability(&self, v: &ComplexMatrix) -> Result<f64, InterferometerError> {
        let state = self.simulate(v, &[PathOp::Evolve(self.composite.clone())])?;
        Ok(state.path_weight(0))
    }

    pub fn curve(&self) -> &CurveFamily {
        &self.initial
    }
}

pub fn run_protocol(curve: &CurveFamily, spec: &ProtocolSpec) -> Result<ProtocolOutcome, InterferometerError> {
    spec.validate(curve)?;
    Protocol::prepare(curve, &spec.seq, &spec.strategy)?.run(&spec.v)
}
