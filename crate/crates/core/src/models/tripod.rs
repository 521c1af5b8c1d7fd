//! The tripod system in the basis `(e, 0, 1, a)`:
//! `H = ω|e⟩(sinθ cosφ ⟨0| + sinθ sinφ ⟨1| + cosθ ⟨a|) + h.c.`
//!
//! Subspace order is `(B⁺, B⁻, dark)` with dims `(1, 1, 2)`:
//! `|B^±⟩ = (|e⟩ ± sinθcosφ|0⟩ ± sinθsinφ|1⟩ ± cosθ|a⟩)/√2`,
//! `|D₁⟩ = cosθcosφ|0⟩ + cosθsinφ|1⟩ − sinθ|a⟩`, `|D₂⟩ = −sinφ|0⟩ + cosφ|1⟩`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::paths::PathFunction;
use crate::holonomy::{HolonomyStatus, StatusTolerance};
use crate::numkernel::{svd, ComplexMatrix};
use crate::quadrature::{self, QuadratureError};
use crate::subspaces::{CurveFamily, Decomposition, FrameGenerator, HamiltonianPath, SubspaceError};

pub const PLUS: usize = 0;
pub const MINUS: usize = 1;
pub const DARK: usize = 2;
pub const TRIPOD_DIMS: [usize; 3] = [1, 1, 2];

/// Short label of a tripod subspace index: `+`, `-` or `d`.
pub fn subspace_label(l: usize) -> &'static str {
    match l {
        PLUS => "+",
        MINUS => "-",
        DARK => "d",
        _ => "?",
    }
}

/// Paths `(0, 0) → (θ₁, φ₁)` in parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripodPath {
    pub theta: PathFunction,
    pub phi: PathFunction,
    pub omega: f64,
}

impl TripodPath {
    pub fn new(theta: PathFunction, phi: PathFunction, omega: f64) -> Self {
        Self { theta, phi, omega }
    }

    pub fn linear(theta1: f64, phi1: f64, omega: f64) -> Self {
        Self::new(PathFunction::linear(theta1), PathFunction::linear(phi1), omega)
    }

    /// Truncated Fourier paths with `terms` sine modes per angle; endpoints
    /// drawn from `θ₁ ∈ [0.2, π − 0.2]`, `φ₁ ∈ [−π, π]`.
    pub fn random_fourier<R: Rng + ?Sized>(rng: &mut R, terms: usize) -> Self {
        let pi = std::f64::consts::PI;
        let theta = PathFunction::random(rng, (0.2, pi - 0.2), terms, 0.6);
        let phi = PathFunction::random(rng, (-pi, pi), terms, 0.8);
        Self::new(theta, phi, 1.0)
    }

    pub fn theta1(&self) -> f64 {
        self.theta.end()
    }

    pub fn phi1(&self) -> f64 {
        self.phi.end()
    }

    /// Instantaneous energies in subspace order: `(ω, −ω, 0)`.
    pub fn energies(&self) -> [f64; 3] {
        [self.omega, -self.omega, 0.0]
    }

    pub fn generator(&self) -> TripodGenerator {
        TripodGenerator { path: self.clone() }
    }

    pub fn curve(&self, intervals: usize) -> Result<CurveFamily, SubspaceError> {
        CurveFamily::from_generator(Arc::new(self.generator()), intervals)
    }

    /// `Z = ∫₀¹ cos θ(s) φ̇(s) ds`.
    pub fn z_integral(&self) -> Result<f64, QuadratureError> {
        let integral = quadrature::integrate(
            |s| self.theta.value(s).cos() * self.phi.derivative(s),
            0.0,
            1.0,
            1e-13,
        )?;
        Ok(integral.value)
    }
}

fn real(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)))
}

fn column(data: [f64; 4]) -> ComplexMatrix {
    real(4, 1, &data)
}

pub fn tripod_hamiltonian(path: &TripodPath, s: f64) -> ComplexMatrix {
    hamiltonian_at_angles(path.omega, path.theta.value(s), path.phi.value(s))
}

pub fn hamiltonian_at_angles(omega: f64, theta: f64, phi: f64) -> ComplexMatrix {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let row = [0.0, omega * st * cp, omega * st * sp, omega * ct];
    let mut h = ComplexMatrix::zeros(4, 4);
    for j in 1..4 {
        h[(0, j)] = Complex64::new(row[j], 0.0);
        h[(j, 0)] = Complex64::new(row[j], 0.0);
    }
    h
}

/// Bright and dark frames at angles `(θ, φ)` in subspace order.
pub fn frames_at_angles(theta: f64, phi: f64) -> Vec<ComplexMatrix> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let r = FRAC_1_SQRT_2;
    let bright = |sign: f64| column([r, sign * r * st * cp, sign * r * st * sp, sign * r * ct]);
    let dark = real(4, 2, &[0.0, 0.0, ct * cp, -sp, ct * sp, cp, -st, 0.0]);
    vec![bright(1.0), bright(-1.0), dark]
}

pub fn tripod_frames(path: &TripodPath, s: f64) -> Result<Decomposition, SubspaceError> {
    Decomposition::from_bases(frames_at_angles(path.theta.value(s), path.phi.value(s)))
}

/// [`FrameGenerator`] for the tripod eigenframes, with closed-form derivatives.
#[derive(Debug, Clone)]
pub struct TripodGenerator {
    path: TripodPath,
}

impl TripodGenerator {
    pub fn path(&self) -> &TripodPath {
        &self.path
    }
}

impl FrameGenerator for TripodGenerator {
    fn ambient_dim(&self) -> usize {
        4
    }

    fn dims(&self) -> Vec<usize> {
        TRIPOD_DIMS.to_vec()
    }

    fn frames_at(&self, s: f64) -> Vec<ComplexMatrix> {
        frames_at_angles(self.path.theta.value(s), self.path.phi.value(s))
    }

    fn frame_derivatives_at(&self, s: f64) -> Option<Vec<ComplexMatrix>> {
        let (st, ct) = self.path.theta.value(s).sin_cos();
        let (sp, cp) = self.path.phi.value(s).sin_cos();
        let dt = self.path.theta.derivative(s);
        let dp = self.path.phi.derivative(s);
        let r = FRAC_1_SQRT_2;
        let b = [
            0.0,
            ct * cp * dt - st * sp * dp,
            ct * sp * dt + st * cp * dp,
            -st * dt,
        ];
        let bright = |sign: f64| column(b.map(|x| sign * r * x));
        let dark = real(
            4,
            2,
            &[
                0.0,
                0.0,
                -st * cp * dt - ct * sp * dp,
                -cp * dp,
                -st * sp * dt + ct * cp * dp,
                -sp * dp,
                -ct * dt,
                0.0,
            ],
        );
        Some(vec![bright(1.0), bright(-1.0), dark])
    }

    fn label(&self) -> String {
        format!("tripod(theta1={}, phi1={})", self.path.theta1(), self.path.phi1())
    }
}

impl HamiltonianPath for TripodPath {
    fn dim(&self) -> usize {
        4
    }

    fn hamiltonian_at(&self, s: f64) -> ComplexMatrix {
        tripod_hamiltonian(self, s)
    }
}

/// Whether an oracle value is the published closed form or one derived here
/// from the same state list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleSource {
    Paper,
    Derived,
}

#[derive(Debug, Clone)]
pub struct OracleEntry {
    /// e.g. `U2[d,+]`.
    pub name: String,
    pub seq: Vec<usize>,
    pub gamma: ComplexMatrix,
    /// Closed-form holonomy; the zero matrix when undefined.
    pub holonomy: ComplexMatrix,
    pub status: HolonomyStatus,
    pub source: OracleSource,
}

/// Closed-form `γ` and holonomies of a tripod path.
#[derive(Debug, Clone)]
pub struct TripodOracle {
    pub theta1: f64,
    pub phi1: f64,
    pub z: f64,
    pub entries: Vec<OracleEntry>,
}

impl TripodOracle {
    pub fn entry(&self, seq: &[usize]) -> Option<&OracleEntry> {
        self.entries.iter().find(|e| e.seq == seq)
    }
}

pub fn sequence_name(seq: &[usize]) -> String {
    let labels: Vec<&str> = seq.iter().map(|&l| subspace_label(l)).collect();
    format!("U{}[{}]", seq.len(), labels.join(","))
}

fn scalar(x: f64) -> ComplexMatrix {
    real(1, 1, &[x])
}

fn status_of(gamma: &ComplexMatrix, tol: StatusTolerance) -> HolonomyStatus {
    let s = svd(gamma).expect("closed-form gamma is finite").singular_values;
    let threshold = tol.threshold(s[0]);
    HolonomyStatus::from_rank(s.iter().filter(|&&x| x > threshold).count(), gamma.nrows())
}

/// Evaluates every closed-form value for `path`.
///
/// With `c = cosθ₁`, `s = sinθ₁`, `u = (cosφ₁, sinφ₁)ᵀ`, `v = (cos Z, sin Z)`:
/// `γ^{±±} = (1+c)/2`, `γ^{±∓} = ((1−c)/2)²`, `γ^{±d} = −(s²/2) cos(φ₁−Z)`,
/// `γ^{d±} = −(s²/2) u v`, and the order-3 products carry an extra factor
/// `−(1−c)/2`. The dark diagonal block is `σ^{dd} = R(φ₁) diag(c, 1) R(−Z)`.
pub fn tripod_oracle(path: &TripodPath, tol: StatusTolerance) -> Result<TripodOracle, QuadratureError> {
    let z = path.z_integral()?;
    let (theta1, phi1) = (path.theta1(), path.phi1());
    let (st, ct) = theta1.sin_cos();
    let (sp, cp) = phi1.sin_cos();
    let (sz, cz) = z.sin_cos();
    let half_s2 = 0.5 * st * st;
    let cos_diff = (phi1 - z).cos();
    let sign = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
    let outer = real(2, 2, &[cp * cz, cp * sz, sp * cz, sp * sz]);
    let back = (1.0 - ct) / 2.0;
    let rot = |a: f64| {
        let (s, c) = a.sin_cos();
        real(2, 2, &[c, -s, s, c])
    };
    let dark_diag = |d: f64| rot(phi1) * real(2, 2, &[d, 0.0, 0.0, 1.0]) * rot(-z);

    let mut specs: Vec<(Vec<usize>, ComplexMatrix, ComplexMatrix, OracleSource)> = Vec::new();
    for (a, b) in [(PLUS, MINUS), (MINUS, PLUS)] {
        specs.push((vec![a], scalar((1.0 + ct) / 2.0), scalar(1.0), OracleSource::Paper));
        specs.push((vec![a, b], scalar(back * back), scalar(1.0), OracleSource::Paper));
        specs.push((vec![a, DARK], scalar(-half_s2 * cos_diff), scalar(-sign(cos_diff)), OracleSource::Paper));
        specs.push((vec![DARK, a], outer.scale(-half_s2), outer.scale(-1.0), OracleSource::Paper));
        specs.push((vec![a, b, DARK], scalar(half_s2 * back * cos_diff), scalar(sign(cos_diff)), OracleSource::Paper));
        specs.push((vec![a, DARK, b], scalar(half_s2 * back * cos_diff), scalar(sign(cos_diff)), OracleSource::Paper));
        specs.push((vec![DARK, a, b], outer.scale(half_s2 * back), outer.clone(), OracleSource::Paper));
    }
    let dark_gamma = dark_diag(ct);
    let dark_status = status_of(&dark_gamma, tol);
    let dark_holonomy = match dark_status {
        HolonomyStatus::Full => dark_diag(sign(ct)),
        _ => dark_diag(0.0),
    };
    let mut entries: Vec<OracleEntry> = specs
        .into_iter()
        .map(|(seq, gamma, holonomy, source)| {
            let status = status_of(&gamma, tol);
            let holonomy = if status == HolonomyStatus::Undefined {
                ComplexMatrix::zeros(gamma.nrows(), gamma.ncols())
            } else {
                holonomy
            };
            OracleEntry {
                name: sequence_name(&seq),
                seq,
                gamma,
                holonomy,
                status,
                source,
            }
        })
        .collect();
    entries.push(OracleEntry {
        name: sequence_name(&[DARK]),
        seq: vec![DARK],
        gamma: dark_gamma,
        holonomy: dark_holonomy,
        status: dark_status,
        source: OracleSource::Derived,
    });
    Ok(TripodOracle {
        theta1,
        phi1,
        z,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{commutator, hermitian_eigen, max_abs};
    use std::f64::consts::PI;

    #[test]
    fn hamiltonian_at_origin() {
        let h = hamiltonian_at_angles(2.0, 0.0, 0.0);
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 3)] = Complex64::new(2.0, 0.0);
        expected[(3, 0)] = Complex64::new(2.0, 0.0);
        assert_eq!(h, expected);
    }

    #[test]
    fn spectrum_and_trace() {
        let p = TripodPath::new(PathFunction::fourier(1.1, vec![0.3]), PathFunction::linear(0.7), 1.5);
        for &s in &[0.0, 0.3, 0.9] {
            let h = tripod_hamiltonian(&p, s);
            let (e, _) = hermitian_eigen(&h).unwrap();
            for (x, y) in e.iter().zip([-1.5, 0.0, 0.0, 1.5]) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!(h.trace().norm() < 1e-15);
        }
    }

    #[test]
    fn frames_at_origin() {
        let f = frames_at_angles(0.0, 0.0);
        let r = FRAC_1_SQRT_2;
        assert_eq!(f[PLUS], column([r, 0.0, 0.0, r]));
        assert_eq!(f[MINUS], column([r, 0.0, 0.0, -r]));
        assert_eq!(f[DARK], real(4, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn frames_are_eigenframes() {
        let p = TripodPath::linear(1.2, 0.4, 1.0);
        let d = tripod_frames(&p, 0.6).unwrap();
        assert!(d.completeness_defect() < 1e-12);
        let h = tripod_hamiltonian(&p, 0.6);
        let pd = d.frame(DARK).projector();
        assert!(max_abs(&commutator(&h, &pd)) < 1e-12);
        let hb = &h * d.frame(PLUS).basis() - d.frame(PLUS).basis().scale(1.0);
        assert!(max_abs(&hb) < 1e-12);
    }

    #[test]
    fn derivatives_match_differences() {
        let p = TripodPath::new(
            PathFunction::fourier(1.0, vec![0.2, -0.1]),
            PathFunction::fourier(-0.5, vec![0.4]),
            1.0,
        );
        let g = p.generator();
        let h = 1e-6;
        let s = 0.42;
        let (a, b) = (g.frames_at(s + h), g.frames_at(s - h));
        let d = g.frame_derivatives_at(s).unwrap();
        for l in 0..3 {
            let fd = (&a[l] - &b[l]).scale(0.5 / h);
            assert!(max_abs(&(&fd - &d[l])) < 1e-8);
        }
    }

    #[test]
    fn z_of_diagonal_linear_path() {
        let p = TripodPath::linear(PI / 2.0, PI / 2.0, 1.0);
        assert!((p.z_integral().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(TripodPath::linear(1.0, 0.0, 1.0).z_integral().unwrap(), 0.0);
    }

    #[test]
    fn oracle_at_phi_zero() {
        let o = tripod_oracle(&TripodPath::linear(1.0, 0.0, 1.0), StatusTolerance::default()).unwrap();
        assert_eq!(o.entry(&[PLUS, DARK]).unwrap().holonomy[(0, 0)].re, -1.0);
        let dp = o.entry(&[DARK, PLUS]).unwrap();
        assert_eq!(dp.holonomy, real(2, 2, &[-1.0, 0.0, 0.0, 0.0]));
        assert_eq!(dp.status, HolonomyStatus::Partial);
        assert_eq!(o.entries.len(), 15);
    }

    #[test]
    fn sign_rules_hold_identically() {
        let o = tripod_oracle(&TripodPath::linear(2.0, 1.3, 1.0), StatusTolerance::default()).unwrap();
        for (a, b) in [(PLUS, MINUS), (MINUS, PLUS)] {
            let two = &o.entry(&[a, DARK]).unwrap().holonomy;
            assert_eq!(two, &(-&o.entry(&[a, b, DARK]).unwrap().holonomy));
            assert_eq!(two, &(-&o.entry(&[a, DARK, b]).unwrap().holonomy));
            let d2 = &o.entry(&[DARK, a]).unwrap().holonomy;
            assert_eq!(d2, &(-&o.entry(&[DARK, a, b]).unwrap().holonomy));
        }
    }

    #[test]
    fn nodal_points_depend_on_path() {
        // straight path at θ₁ = π/2 has Z = 2φ₁/π; choose φ₁ so that φ₁ − Z = π/2
        let phi1 = PI * PI / (2.0 * (PI - 2.0));
        let straight = TripodPath::linear(PI / 2.0, phi1, 1.0);
        let detour = TripodPath::new(
            PathFunction::fourier(PI / 2.0, vec![0.0, 0.5]),
            PathFunction::linear(phi1),
            1.0,
        );
        let tol = StatusTolerance::default();
        let a = tripod_oracle(&straight, tol).unwrap();
        let b = tripod_oracle(&detour, tol).unwrap();
        assert!((phi1 - a.z - PI / 2.0).abs() < 1e-12);
        assert!((a.z - b.z).abs() > 1e-3);
        assert_eq!(a.entry(&[PLUS, DARK]).unwrap().status, HolonomyStatus::Undefined);
        assert_eq!(b.entry(&[PLUS, DARK]).unwrap().status, HolonomyStatus::Full);
    }
}
