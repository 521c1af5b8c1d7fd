use rand::Rng;
use serde::Serialize;

use super::protocol::Protocol;
use super::InterferometerError;
use crate::holonomy::{matrix_to_rows, StatusTolerance};
use crate::numkernel::{expm_hermitian, max_abs, svd, ComplexMatrix};
use crate::random;
use crate::subspaces::CurveFamily;

#[derive(Debug, Clone)]
pub struct Extraction {
    pub seq: Vec<usize>,
    /// Optimal `V` on the `l_1` block: `U_s V_s†` from the SVD of the
    /// realized `γ` (this is `e^{iΣφ} Φ[γ]` on the support of `γ`).
    pub v_star_block: ComplexMatrix,
    /// `V*` as an `N × N` operator, identity outside the `l_1` block.
    pub v_star: ComplexMatrix,
    pub p_max: f64,
    pub phase_sum: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `γ = 0`: every `V` gives `p = 1/4`.
    pub undefined: bool,
    /// `γ` is rank deficient, so `V*` is fixed only on its support.
    pub non_unique: bool,
    /// Right singular vectors spanning the support of `γ`.
    support: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionRecord {
    pub seq: Vec<usize>,
    pub v_star: Vec<Vec<[f64; 2]>>,
    pub p_max: f64,
    pub phase_sum: f64,
    pub rank: usize,
    pub undefined: bool,
    pub non_unique: bool,
}

impl Extraction {
    pub fn to_record(&self) -> ExtractionRecord {
        ExtractionRecord {
            seq: self.seq.clone(),
            v_star: matrix_to_rows(&self.v_star_block),
            p_max: self.p_max,
            phase_sum: self.phase_sum,
            rank: self.rank,
            undefined: self.undefined,
            non_unique: self.non_unique,
        }
    }

    /// Largest deviation of a candidate `V` block from `V*` on the support of `γ`.
    pub fn support_deviation(&self, v_block: &ComplexMatrix) -> f64 {
        max_abs(&((v_block - &self.v_star_block) * &self.support))
    }
}

/// Lifts an `n_l × n_l` block to `1 + F (B − 1) F†`.
fn lift(curve: &CurveFamily, l: usize, block: &ComplexMatrix) -> ComplexMatrix {
    let f = curve.start().frame(l).basis();
    let n = curve.ambient_dim();
    let k = block.nrows();
    ComplexMatrix::identity(n, n) + f * (block - ComplexMatrix::identity(k, k)) * f.adjoint()
}

/// The maximizing `V*` and `p_max = 1/4 + Tr(γγ†)/(4n) + Σ_i s_i(γ)/(2n)`.
pub fn extract_holonomy(protocol: &Protocol, tol: StatusTolerance) -> Result<Extraction, InterferometerError> {
    let gamma = &protocol.gamma;
    let n = gamma.nrows();
    let dec = svd(gamma)?;
    let largest = dec.singular_values.first().copied().unwrap_or(0.0);
    let rank = dec.rank_above(tol.threshold(largest));
    let undefined = rank == 0;
    let v_star_block = if undefined {
        ComplexMatrix::identity(n, n)
    } else {
        &dec.u * dec.v.adjoint()
    };
    let weight = (gamma * gamma.adjoint()).trace().re;
    let p_max = 0.25 + weight / (4.0 * n as f64) + dec.singular_values.iter().sum::<f64>() / (2.0 * n as f64);
    let support = dec.v.columns(0, rank).into_owned();
    let v_star = lift(protocol.curve(), protocol.seq[0], &v_star_block);
    Ok(Extraction {
        seq: protocol.seq.clone(),
        v_star_block,
        v_star,
        p_max,
        phase_sum: protocol.phase_sum,
        singular_values: dec.singular_values,
        rank,
        undefined,
        non_unique: rank < n,
        support,
    })
}

/// Random block-diagonal unitary commuting with every `P_l(0)`.
pub fn random_admissible_v<R: Rng + ?Sized>(curve: &CurveFamily, rng: &mut R) -> ComplexMatrix {
    let n = curve.ambient_dim();
    let mut v = ComplexMatrix::zeros(n, n);
    for frame in curve.start().frames() {
        let f = frame.basis();
        let u = random::haar_unitary(rng, f.ncols());
        v += f * u * f.adjoint();
    }
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalitySweep {
    pub trials: usize,
    /// Simulated `p(V*)`.
    pub p_star: f64,
    /// `|p(V*) − p_max|`.
    pub p_star_deviation: f64,
    /// `max_V p(V) − p(V*)` over the trials (non-positive when `V*` wins).
    pub max_excess: f64,
    /// Trials reaching `p(V*)` within `1e-9` while differing from `V*` by
    /// more than `1e-3` on the support of `γ`.
    pub spurious_maxima: usize,
}

/// Compares `p(V*)` with `p(V)` for random admissible `V`: half are Haar
/// random, half are perturbations `V* e^{−iεX}` with `ε ∈ [0.01, 0.5)`.
pub fn optimality_sweep<R: Rng + ?Sized>(
    protocol: &Protocol,
    extraction: &Extraction,
    trials: usize,
    rng: &mut R,
) -> Result<OptimalitySweep, InterferometerError> {
    let curve = protocol.curve();
    let p_star = protocol.probability(&extraction.v_star)?;
    let mut max_excess = f64::NEG_INFINITY;
    let mut spurious = 0;
    let l1 = protocol.seq[0];
    for t in 0..trials {
        let v = if t % 2 == 0 {
            random_admissible_v(curve, rng)
        } else {
            let n = extraction.v_star_block.nrows();
            let eps = rng.gen_range(0.01..0.5);
            let x = random::hermitian(rng, n, 1.0);
            let block = &extraction.v_star_block * expm_hermitian(&x, eps)?;
            let mut v = random_admissible_v(curve, rng);
            let f = curve.start().frame(l1).basis();
            v = &v - f * (f.adjoint() * &v * f) * f.adjoint() + f * block * f.adjoint();
            v
        };
        let p = protocol.probability(&v)?;
        let excess = p - p_star;
        max_excess = max_excess.max(excess);
        if excess.abs() < 1e-9 && extraction.support_deviation(&protocol.v_block(&v)) > 1e-3 {
            spurious += 1;
        }
    }
    Ok(OptimalitySweep {
        trials,
        p_star,
        p_star_deviation: (p_star - extraction.p_max).abs(),
        max_excess,
        spurious_maxima: spurious,
    })
}
