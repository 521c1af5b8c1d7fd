use std::fmt;
use std::sync::Arc;

use super::hamiltonian::{ClusterRule, HamiltonianPath};
use super::{Decomposition, SubspaceError};
use crate::exec::{self, ExecMode};
use crate::numkernel::{max_abs, spectral_norm, ComplexMatrix};

/// Source of frames at arbitrary `s ∈ [0, 1]`.
///
/// Frames returned for nearby `s` must vary smoothly (no gauge jumps), since
/// the transport route differentiates them.
pub trait FrameGenerator: Send + Sync {
    fn ambient_dim(&self) -> usize;

    fn dims(&self) -> Vec<usize>;

    /// One `N × n_l` basis per subspace.
    fn frames_at(&self, s: f64) -> Vec<ComplexMatrix>;

    /// `d/ds` of [`FrameGenerator::frames_at`], when known in closed form.
    fn frame_derivatives_at(&self, _s: f64) -> Option<Vec<ComplexMatrix>> {
        None
    }

    fn label(&self) -> String {
        "generator".to_string()
    }
}

/// Where the samples of a [`CurveFamily`] came from.
#[derive(Clone)]
pub enum Provenance {
    Explicit,
    Generator(Arc<dyn FrameGenerator>),
    Hamiltonian {
        path: Arc<dyn HamiltonianPath>,
        rule: ClusterRule,
    },
}

impl fmt::Debug for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Explicit => write!(f, "Explicit"),
            Provenance::Generator(g) => write!(f, "Generator({})", g.label()),
            Provenance::Hamiltonian { rule, .. } => write!(f, "Hamiltonian({rule:?})"),
        }
    }
}

/// `intervals + 1` equally spaced points from 0 to 1.
pub fn uniform_grid(intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|j| {
            if j == intervals {
                1.0
            } else {
                j as f64 / intervals as f64
            }
        })
        .collect()
}

fn validate_grid(grid: &[f64]) -> Result<(), SubspaceError> {
    if grid.len() < 2 {
        return Err(SubspaceError::InvalidGrid("need at least two samples".into()));
    }
    if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
        return Err(SubspaceError::InvalidGrid("grid must start at 0 and end at 1".into()));
    }
    if let Some(j) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(SubspaceError::InvalidGrid(format!(
            "grid not strictly increasing at sample {}",
            j + 1
        )));
    }
    Ok(())
}

/// A decomposition sampled along `s ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct CurveFamily {
    grid: Vec<f64>,
    samples: Vec<Decomposition>,
    provenance: Provenance,
    smoothness: f64,
    energies: Option<Vec<Vec<f64>>>,
}

impl CurveFamily {
    /// Curve from explicitly given samples; such curves cannot be refined.
    pub fn from_samples(grid: Vec<f64>, samples: Vec<Decomposition>) -> Result<Self, SubspaceError> {
        Self::assemble(grid, samples, Provenance::Explicit, None)
    }

    /// Samples `generator` on a uniform grid with `intervals` steps.
    pub fn from_generator(
        generator: Arc<dyn FrameGenerator>,
        intervals: usize,
    ) -> Result<Self, SubspaceError> {
        Self::from_generator_with(generator, intervals, ExecMode::default())
    }

    pub fn from_generator_with(
        generator: Arc<dyn FrameGenerator>,
        intervals: usize,
        mode: ExecMode,
    ) -> Result<Self, SubspaceError> {
        if intervals == 0 {
            return Err(SubspaceError::InvalidGrid("zero intervals".into()));
        }
        let grid = uniform_grid(intervals);
        let samples = exec::map_slice(mode, &grid, |&s| {
            Decomposition::from_bases(generator.frames_at(s))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        Self::assemble(grid, samples, Provenance::Generator(generator), None)
    }

    pub(crate) fn assemble(
        grid: Vec<f64>,
        samples: Vec<Decomposition>,
        provenance: Provenance,
        energies: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, SubspaceError> {
        validate_grid(&grid)?;
        if samples.len() != grid.len() {
            return Err(SubspaceError::InvalidGrid(format!(
                "{} samples for {} grid points",
                samples.len(),
                grid.len()
            )));
        }
        let dims = samples[0].dims();
        let ambient = samples[0].ambient_dim();
        for (j, d) in samples.iter().enumerate() {
            if d.ambient_dim() != ambient {
                return Err(SubspaceError::AmbientMismatch {
                    expected: ambient,
                    found: d.ambient_dim(),
                });
            }
            if d.dims() != dims {
                return Err(SubspaceError::DimensionChange {
                    sample: j,
                    s: grid[j],
                    expected: dims,
                    found: d.dims(),
                });
            }
        }
        let smoothness = smoothness_constant(&grid, &samples)?;
        Ok(Self {
            grid,
            samples,
            provenance,
            smoothness,
            energies,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn intervals(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn samples(&self) -> &[Decomposition] {
        &self.samples
    }

    pub fn sample(&self, j: usize) -> &Decomposition {
        &self.samples[j]
    }

    pub fn start(&self) -> &Decomposition {
        &self.samples[0]
    }

    pub fn end(&self) -> &Decomposition {
        self.samples.last().expect("curve has samples")
    }

    pub fn eta(&self) -> usize {
        self.samples[0].eta()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.samples[0].dims()
    }

    pub fn ambient_dim(&self) -> usize {
        self.samples[0].ambient_dim()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn generator(&self) -> Option<&Arc<dyn FrameGenerator>> {
        match &self.provenance {
            Provenance::Generator(g) => Some(g),
            _ => None,
        }
    }

    /// Per-sample, per-subspace eigenvalues (Hamiltonian-path curves only).
    pub fn energies(&self) -> Option<&[Vec<f64>]> {
        self.energies.as_deref()
    }

    /// Recorded `C` with `‖P_l(s_{j+1}) − P_l(s_j)‖₂ ≤ C (s_{j+1} − s_j)`.
    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    pub fn satisfies_smoothness(&self, bound: f64) -> bool {
        self.smoothness <= bound
    }

    pub fn is_refinable(&self) -> bool {
        !matches!(self.provenance, Provenance::Explicit)
    }

    /// Same curve on a grid `factor` times finer, regenerated from the source.
    pub fn refine(&self, factor: usize) -> Result<Self, SubspaceError> {
        if factor == 0 {
            return Err(SubspaceError::InvalidGrid("refinement factor 0".into()));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        self.resample(self.intervals() * factor)
    }

    /// The curve on a uniform grid with the requested number of intervals.
    /// Explicit curves support this only by taking every k-th sample of a
    /// uniform grid.
    pub fn resample(&self, intervals: usize) -> Result<Self, SubspaceError> {
        match &self.provenance {
            Provenance::Generator(g) => Self::from_generator(g.clone(), intervals),
            Provenance::Hamiltonian { path, rule } => {
                Self::from_hamiltonian_path(path.clone(), intervals, *rule)
            }
            Provenance::Explicit => {
                if intervals == self.intervals() {
                    return Ok(self.clone());
                }
                if intervals == 0 || !self.intervals().is_multiple_of(intervals) {
                    return Err(SubspaceError::NotRefinable);
                }
                let stride = self.intervals() / intervals;
                let uniform = uniform_grid(self.intervals());
                if self
                    .grid
                    .iter()
                    .zip(&uniform)
                    .any(|(a, b)| (a - b).abs() > 1e-12)
                {
                    return Err(SubspaceError::NotRefinable);
                }
                self.subsample(stride)
            }
        }
    }

    /// Every `stride`-th sample, as an explicit curve.
    pub fn subsample(&self, stride: usize) -> Result<Self, SubspaceError> {
        if stride == 0 || !self.intervals().is_multiple_of(stride) {
            return Err(SubspaceError::InvalidGrid(format!(
                "stride {stride} does not divide {} intervals",
                self.intervals()
            )));
        }
        let idx: Vec<usize> = (0..=self.intervals()).step_by(stride).collect();
        let grid = idx.iter().map(|&j| self.grid[j]).collect();
        let samples = idx.iter().map(|&j| self.samples[j].clone()).collect();
        let energies = self
            .energies
            .as_ref()
            .map(|e| idx.iter().map(|&j| e[j].clone()).collect());
        Self::assemble(grid, samples, Provenance::Explicit, energies)
    }

    /// Whether every subspace returns to its starting point (`H_l(1) = H_l(0)`).
    pub fn is_cyclic(&self, tol: f64) -> bool {
        self.start()
            .projectors()
            .iter()
            .zip(self.end().projectors())
            .all(|(a, b)| max_abs(&(a - b)) <= tol)
    }

    /// Copy of this curve with the samples replaced (same grid), used by gauge
    /// changes. The result is explicit.
    pub(crate) fn with_samples(&self, samples: Vec<Decomposition>) -> Result<Self, SubspaceError> {
        Self::assemble(self.grid.clone(), samples, Provenance::Explicit, self.energies.clone())
    }
}

fn smoothness_constant(grid: &[f64], samples: &[Decomposition]) -> Result<f64, SubspaceError> {
    let mut c: f64 = 0.0;
    let mut prev = samples[0].projectors();
    for j in 1..samples.len() {
        let next = samples[j].projectors();
        let h = grid[j] - grid[j - 1];
        for (a, b) in prev.iter().zip(&next) {
            c = c.max(spectral_norm(&(b - a))? / h);
        }
        prev = next;
    }
    Ok(c)
}
