//! Scenario configuration: one TOML document per run, merged with command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Holonomy,
    Diagnostics,
    TripodSweep,
    Interferometer,
    OracleCheck,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Holonomy => "holonomy",
            ScenarioKind::Diagnostics => "diagnostics",
            ScenarioKind::TripodSweep => "tripod-sweep",
            ScenarioKind::Interferometer => "interferometer",
            ScenarioKind::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Output directory; not part of the config hash.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSpec>,
    /// Zero-based subspace index sequences; all strict ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub export_curve: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferometer: Option<InterferometerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

fn default_grid() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    Tripod { path: PathSpec },
    RandomOpen {
        dims: Vec<usize>,
        #[serde(default = "default_strength")]
        strength: f64,
    },
    RandomCyclic {
        dims: Vec<usize>,
        #[serde(default = "default_strength")]
        strength: f64,
    },
    /// A sampled curve in the JSON exchange format.
    File { file: PathBuf },
    /// The fixed `σ` table whose strictly off-diagonal `γ` all vanish.
    ZeroGammaFixture,
}

fn default_strength() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathType {
    Fourier,
    Linear,
}

/// Tripod path: `theta` and `phi` are `[end, b_1, b_2, …]`, with
/// `f(s) = end·s + Σ_k b_k sin(kπs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    #[serde(rename = "type")]
    pub path_type: PathType,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

fn default_omega() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.from + (self.to - self.from) * (i as f64 / last))
            .collect()
    }
}

/// Grid of linear tripod paths over the endpoints `(θ₁, φ₁)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_theta_range")]
    pub theta1: Range,
    #[serde(default = "default_phi_range")]
    pub phi1: Range,
    /// Sine amplitudes added to every path.
    #[serde(default)]
    pub theta_sine: Vec<f64>,
    #[serde(default)]
    pub phi_sine: Vec<f64>,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

fn default_theta_range() -> Range {
    Range { from: 0.0, to: std::f64::consts::PI, points: 13 }
}

fn default_phi_range() -> Range {
    Range { from: 0.0, to: 0.0, points: 1 }
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            theta1: default_theta_range(),
            phi1: default_phi_range(),
            theta_sine: Vec::new(),
            phi_sine: Vec::new(),
            omega: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Adiabatic,
    Filtering,
    Nonadiabatic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerSpec {
    #[serde(default = "default_strategy")]
    pub strategy: StrategyKind,
    /// Phases `φ_l` of the adiabatic strategy; zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(default = "default_filter_grid")]
    pub filter_grid: usize,
    #[serde(default = "default_ode_tolerance")]
    pub ode_tolerance: f64,
    /// Extra runs per sequence with seeded random admissible `V`.
    #[serde(default)]
    pub random_v: usize,
}

fn default_strategy() -> StrategyKind {
    StrategyKind::Adiabatic
}

fn default_filter_grid() -> usize {
    100
}

fn default_ode_tolerance() -> f64 {
    1e-9
}

impl Default for InterferometerSpec {
    fn default() -> Self {
        Self {
            strategy: default_strategy(),
            phases: None,
            filter_grid: default_filter_grid(),
            ode_tolerance: default_ode_tolerance(),
            random_v: 0,
        }
    }
}

/// Path set for the engine-vs-closed-form comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_random_paths")]
    pub random_paths: usize,
    #[serde(default = "default_harmonics")]
    pub harmonics: usize,
    /// Include the linear family over a 7 × 5 grid of endpoints.
    #[serde(default = "default_true")]
    pub linear: bool,
}

fn default_random_paths() -> usize {
    20
}

fn default_harmonics() -> usize {
    3
}

fn default_true() -> bool {
    true
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            random_paths: default_random_paths(),
            harmonics: default_harmonics(),
            linear: true,
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tolerance: Option<f64>,
}

impl ScenarioConfig {
    pub fn empty() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: None,
            seed: 0,
            grid: default_grid(),
            tolerance: None,
            out: None,
            curve: None,
            sequences: None,
            export_curve: false,
            sweep: None,
            interferometer: None,
            oracle: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config {
                field: if path == "." { String::new() } else { path },
                message: inner.message().trim().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // relative curve files are resolved against the config's directory
        if let Some(CurveSpec::File { file }) = &mut cfg.curve {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(g) = o.grid {
            self.grid = g;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(t) = o.tolerance {
            self.tolerance = Some(t);
        }
    }

    /// Checks everything serde cannot, reporting the offending field.
    pub fn validate(&self, kind: ScenarioKind) -> Result<(), CliError> {
        let bad = |field: &str, message: String| {
            Err(CliError::Config { field: field.to_string(), message })
        };
        if self.schema_version != SCHEMA_VERSION {
            return bad(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            );
        }
        if let Some(k) = self.scenario {
            if k != kind {
                return bad(
                    "scenario",
                    format!("config is for `{}` but `{}` was requested", k.as_str(), kind.as_str()),
                );
            }
        }
        if self.grid == 0 {
            return bad("grid", "must be at least 1".into());
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return bad("tolerance", format!("must be positive, got {t}"));
            }
        }
        if let Some(seqs) = &self.sequences {
            for (i, s) in seqs.iter().enumerate() {
                if s.is_empty() {
                    return bad(&format!("sequences[{i}]"), "empty sequence".into());
                }
            }
        }
        match &self.curve {
            Some(CurveSpec::Tripod { path }) => validate_path(path)?,
            Some(CurveSpec::RandomOpen { dims, strength } | CurveSpec::RandomCyclic { dims, strength }) => {
                if dims.is_empty() || dims.contains(&0) {
                    return bad("curve.dims", "dimensions must be positive and non-empty".into());
                }
                if !(*strength > 0.0 && strength.is_finite()) {
                    return bad("curve.strength", format!("must be positive, got {strength}"));
                }
            }
            Some(CurveSpec::File { file }) => {
                if !file.is_file() {
                    return bad("curve.file", format!("{} does not exist", file.display()));
                }
            }
            Some(CurveSpec::ZeroGammaFixture) => {
                if matches!(kind, ScenarioKind::Interferometer) || self.export_curve {
                    return bad("curve.kind", "the zero-gamma fixture is a σ table, not a curve".into());
                }
            }
            None => {}
        }
        if let Some(sw) = &self.sweep {
            for (name, r) in [("sweep.theta1", sw.theta1), ("sweep.phi1", sw.phi1)] {
                if r.points == 0 {
                    return bad(&format!("{name}.points"), "must be at least 1".into());
                }
            }
        }
        if let Some(i) = &self.interferometer {
            if i.filter_grid == 0 {
                return bad("interferometer.filter_grid", "must be at least 1".into());
            }
            if !(i.ode_tolerance > 0.0) {
                return bad("interferometer.ode_tolerance", "must be positive".into());
            }
        }
        Ok(())
    }

    /// sha256 of the canonical JSON form (everything except `out`).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn validate_path(p: &PathSpec) -> Result<(), CliError> {
    let bad = |field: &str, message: &str| {
        Err(CliError::Config { field: field.to_string(), message: message.to_string() })
    };
    for (name, c) in [("curve.path.theta", &p.theta), ("curve.path.phi", &p.phi)] {
        if c.is_empty() {
            return bad(name, "needs at least the endpoint value");
        }
        if p.path_type == PathType::Linear && c.len() != 1 {
            return bad(name, "a linear path takes exactly one value (the endpoint)");
        }
    }
    if !(p.omega > 0.0) {
        return bad("curve.path.omega", "must be positive");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let err = ScenarioConfig::parse("schema_version = 1\n[interferometer]\nstrategy = \"adiabatic\"\nphase = [0.0]\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("interferometer"), "{msg}");
        assert!(msg.contains("phase"), "{msg}");
    }

    #[test]
    fn range_includes_endpoints() {
        let v = Range { from: 0.0, to: std::f64::consts::PI, points: 13 }.values();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[6], std::f64::consts::FRAC_PI_2);
        assert_eq!(v[12], std::f64::consts::PI);
    }

    #[test]
    fn hash_ignores_output_directory() {
        let mut a = ScenarioConfig::empty();
        let h = a.hash();
        a.out = Some("somewhere".into());
        assert_eq!(a.hash(), h);
        a.seed = 3;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn tripod_curve_parses() {
        let cfg = ScenarioConfig::parse(
            "schema_version = 1\n[curve]\nkind = \"tripod\"\npath = { type = \"fourier\", theta = [1.2, 0.1], phi = [0.8], omega = 1.0 }\n",
        )
        .unwrap();
        assert!(matches!(cfg.curve, Some(CurveSpec::Tripod { .. })));
        cfg.validate(ScenarioKind::Holonomy).unwrap();
    }
}
