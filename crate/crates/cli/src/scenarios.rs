//! The five scenarios. Each writes its result files into the output
//! directory and returns the list of failed checks.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use offdiag_holonomy::exec::{self, ExecMode};
use offdiag_holonomy::holonomy::{
    build_sigma_table_with, enumerate_strict_sequences, holonomy_of_order,
    matrix_to_rows, nonzero_existence_check, rank_budget_report, HolonomyRecord, TableOptions,
};
use offdiag_holonomy::interferometer::{
    extract_holonomy, random_admissible_v, Protocol, Strategy, EXACT_TOLERANCE,
};
use offdiag_holonomy::models::{
    tripod_oracle, zero_gamma_table, PathFunction, Transitionless, TripodPath, UnitaryPathGenerator,
};
use offdiag_holonomy::numkernel::{max_abs, spectral_norm};
use offdiag_holonomy::random::seeded;
use offdiag_holonomy::{CurveFamily, HolonomyError, HolonomyStatus, SigmaTable, StatusTolerance};
use serde::Serialize;

use crate::config::{
    CurveSpec, InterferometerSpec, OracleSpec, PathSpec, PathType, ScenarioConfig, ScenarioKind,
    StrategyKind, SweepSpec,
};
use crate::error::CliError;

const DEFAULT_STRUCTURE_TOLERANCE: f64 = 1e-8;
const DEFAULT_ORACLE_TOLERANCE: f64 = 1e-5;
const DEFAULT_NONADIABATIC_TOLERANCE: f64 = 1e-6;

/// Result of one scenario run.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    pub failures: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    scenario: &'static str,
    config_hash: &'a str,
    seed: u64,
    grid: usize,
    tolerance: f64,
}

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    kind: ScenarioKind,
    hash: String,
    out: PathBuf,
    tolerance: f64,
    outcome: Outcome,
}

impl<'a> Context<'a> {
    fn meta(&self) -> Meta<'_> {
        Meta {
            tool: "odhol",
            version: env!("CARGO_PKG_VERSION"),
            scenario: self.kind.as_str(),
            config_hash: &self.hash,
            seed: self.cfg.seed,
            grid: self.cfg.grid,
            tolerance: self.tolerance,
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outcome.files.push(p.clone());
        p
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    fn csv(&mut self, name: &str) -> Result<csv::Writer<fs::File>, CliError> {
        let path = self.path(name);
        Ok(csv::Writer::from_path(path)?)
    }

    fn fail(&mut self, message: String) {
        self.outcome.failures.push(message);
    }

    fn note(&mut self, message: String) {
        self.outcome.summary.push(message);
    }
}

pub fn run(cfg: &ScenarioConfig, kind: ScenarioKind) -> Result<Outcome, CliError> {
    cfg.validate(kind)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("odhol-out"));
    fs::create_dir_all(&out)?;
    let default_tol = match kind {
        ScenarioKind::Holonomy | ScenarioKind::Diagnostics => DEFAULT_STRUCTURE_TOLERANCE,
        ScenarioKind::TripodSweep | ScenarioKind::OracleCheck => DEFAULT_ORACLE_TOLERANCE,
        ScenarioKind::Interferometer => match cfg.interferometer.as_ref().map(|i| i.strategy) {
            Some(StrategyKind::Nonadiabatic) => DEFAULT_NONADIABATIC_TOLERANCE,
            _ => EXACT_TOLERANCE,
        },
    };
    let mut ctx = Context {
        cfg,
        kind,
        hash: cfg.hash(),
        out,
        tolerance: cfg.tolerance.unwrap_or(default_tol),
        outcome: Outcome::default(),
    };
    match kind {
        ScenarioKind::Holonomy => holonomy(&mut ctx)?,
        ScenarioKind::Diagnostics => diagnostics(&mut ctx)?,
        ScenarioKind::TripodSweep => tripod_sweep(&mut ctx)?,
        ScenarioKind::Interferometer => interferometer(&mut ctx)?,
        ScenarioKind::OracleCheck => oracle_check(&mut ctx)?,
    }
    Ok(ctx.outcome)
}

enum Source {
    Curve(CurveFamily),
    Table(SigmaTable),
}

fn default_curve() -> CurveSpec {
    CurveSpec::Tripod {
        path: PathSpec {
            path_type: PathType::Fourier,
            theta: vec![1.3, 0.2],
            phi: vec![0.9, -0.3],
            omega: 1.0,
        },
    }
}

fn tripod_path(p: &PathSpec) -> TripodPath {
    let f = |c: &[f64]| PathFunction::from_coefficients(c).expect("validated non-empty");
    TripodPath::new(f(&p.theta), f(&p.phi), p.omega)
}

fn build_source(cfg: &ScenarioConfig) -> Result<Source, CliError> {
    let spec = cfg.curve.clone().unwrap_or_else(default_curve);
    let grid = cfg.grid;
    let curve = match spec {
        CurveSpec::Tripod { path } => tripod_path(&path).curve(grid)?,
        CurveSpec::RandomOpen { dims, strength } => {
            let g = UnitaryPathGenerator::random_open(&mut seeded(cfg.seed), &dims, strength)?;
            CurveFamily::from_generator(Arc::new(g), grid)?
        }
        CurveSpec::RandomCyclic { dims, strength } => {
            let g = UnitaryPathGenerator::random_cyclic(&mut seeded(cfg.seed), &dims, strength)?;
            CurveFamily::from_generator(Arc::new(g), grid)?
        }
        CurveSpec::File { file } => {
            let text = fs::read_to_string(&file)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
            CurveFamily::from_json(&text).map_err(|e| CliError::Config {
                field: "curve.file".into(),
                message: e.to_string(),
            })?
        }
        CurveSpec::ZeroGammaFixture => return Ok(Source::Table(zero_gamma_table())),
    };
    Ok(Source::Curve(curve))
}

fn build_table(ctx: &mut Context<'_>) -> Result<SigmaTable, CliError> {
    match build_source(ctx.cfg)? {
        Source::Table(t) => Ok(t),
        Source::Curve(curve) => {
            if ctx.cfg.export_curve {
                let path = ctx.path("curve.json");
                fs::write(path, curve.to_json())?;
            }
            let opts = TableOptions { check_unitarity: false, ..Default::default() };
            Ok(build_sigma_table_with(&curve, opts)?)
        }
    }
}

/// Every `U^(1)` sequence followed by all strict sequences.
fn all_sequences(eta: usize) -> Vec<Vec<usize>> {
    let mut seqs: Vec<Vec<usize>> = (0..eta).map(|l| vec![l]).collect();
    for kappa in 2..=eta {
        seqs.extend(enumerate_strict_sequences(eta, kappa).unwrap_or_default());
    }
    seqs
}

fn sequences(cfg: &ScenarioConfig, eta: usize) -> Result<Vec<Vec<usize>>, CliError> {
    match &cfg.sequences {
        None => Ok(all_sequences(eta)),
        Some(list) => {
            for (i, s) in list.iter().enumerate() {
                if let Some(&l) = s.iter().find(|&&l| l >= eta) {
                    return Err(CliError::Config {
                        field: format!("sequences[{i}]"),
                        message: format!("index {l} out of range for {eta} subspaces"),
                    });
                }
            }
            Ok(list.clone())
        }
    }
}

fn seq_key(seq: &[usize]) -> String {
    seq.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";")
}

fn holonomy(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let table = build_table(ctx)?;
    let seqs = sequences(ctx.cfg, table.eta())?;
    let status_tol = StatusTolerance::default();
    let results = seqs
        .iter()
        .map(|s| holonomy_of_order(&table, s, status_tol))
        .collect::<Result<Vec<_>, _>>()?;
    let defect = table.unitarity_defect();
    if defect > ctx.tolerance {
        ctx.fail(format!("S_tot unitarity defect {defect:e} exceeds {:e}", ctx.tolerance));
    }

    #[derive(Serialize)]
    struct Doc<'a> {
        meta: Meta<'a>,
        dims: &'a [usize],
        unitarity_defect: f64,
        results: Vec<HolonomyRecord>,
    }
    let doc = Doc {
        meta: ctx.meta(),
        dims: table.dims(),
        unitarity_defect: defect,
        results: results.iter().map(|r| r.to_record()).collect(),
    };
    let text = serde_json::to_string_pretty(&doc)?;
    let path = ctx.path("holonomy.json");
    fs::write(path, text + "\n")?;

    let mut w = ctx.csv("holonomy.csv")?;
    w.write_record(["config_hash", "seed", "grid", "seq", "status", "rank", "singular_values", "gamma_norm"])?;
    for r in &results {
        w.write_record([
            ctx.hash.clone(),
            ctx.cfg.seed.to_string(),
            ctx.cfg.grid.to_string(),
            seq_key(&r.seq),
            r.status.to_string(),
            r.rank.to_string(),
            join_floats(&r.singular_values),
            format!("{:e}", r.singular_values.first().copied().unwrap_or(0.0)),
        ])?;
    }
    w.flush()?;
    let counts = [HolonomyStatus::Full, HolonomyStatus::Partial, HolonomyStatus::Undefined]
        .map(|s| results.iter().filter(|r| r.status == s).count());
    ctx.note(format!(
        "{} sequences: {} full, {} partial, {} undefined; S_tot defect {defect:.2e}",
        results.len(),
        counts[0],
        counts[1],
        counts[2]
    ));
    Ok(())
}

fn diagnostics(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let table = build_table(ctx)?;
    let tol = ctx.tolerance;
    let status_tol = StatusTolerance::default();
    let eta = table.eta();
    let report = rank_budget_report(&table, status_tol)?;

    #[derive(Serialize)]
    struct StrictGamma {
        seq: Vec<usize>,
        norm: f64,
        rank: usize,
    }
    let mut strict = Vec::new();
    for kappa in 2..=eta {
        for seq in enumerate_strict_sequences(eta, kappa)? {
            let r = holonomy_of_order(&table, &seq, status_tol)?;
            let norm = spectral_norm(&r.gamma)?;
            strict.push(StrictGamma { seq, norm, rank: r.rank });
        }
    }
    let nonzero = strict.iter().filter(|g| g.rank > 0).count();
    let existence = match nonzero_existence_check(&table, status_tol) {
        Ok(seq) => serde_json::json!({ "applies": true, "witness": seq }),
        Err(HolonomyError::DiagonalNotZero { l, norm }) => {
            serde_json::json!({ "applies": false, "nonzero_diagonal": l, "norm": norm })
        }
        Err(e @ HolonomyError::TheoremViolation) => {
            ctx.fail(e.to_string());
            serde_json::json!({ "applies": true, "witness": null })
        }
        Err(e) => return Err(e.into()),
    };

    let defect = table.unitarity_defect();
    if defect > tol {
        ctx.fail(format!("S_tot unitarity defect {defect:e} exceeds {tol:e}"));
    }
    if !report.bounds_hold() {
        ctx.fail("rank bound Σ_k R(σ^kl) ≥ n_l violated".into());
    }
    let trace_dev = report.max_trace_deviation();
    if trace_dev > tol {
        ctx.fail(format!("trace identity deviation {trace_dev:e} exceeds {tol:e}"));
    }

    let doc = serde_json::json!({
        "meta": ctx.meta(),
        "dims": table.dims(),
        "unitarity_defect": defect,
        "block_identity_defect": table.block_identity_defect(),
        "rank_budget": report,
        "strict_gammas": strict,
        "existence_check": existence,
    });
    ctx.write_json("diagnostics.json", &doc)?;
    ctx.note(format!(
        "S_tot defect {defect:.2e}; rank bounds {}; trace identity max deviation {trace_dev:.2e}; {nonzero} of {} strictly off-diagonal γ nonzero",
        if report.bounds_hold() { "hold" } else { "VIOLATED" },
        strict.len()
    ));
    Ok(())
}

/// Engine vs closed form for one sequence.
struct EntryCheck {
    name: String,
    seq: Vec<usize>,
    engine: HolonomyStatus,
    oracle: HolonomyStatus,
    deviation: f64,
    source: &'static str,
}

/// Engine vs closed form on one tripod path.
struct TripodPoint {
    z: f64,
    entries: Vec<EntryCheck>,
}

fn evaluate_tripod(path: &TripodPath, grid: usize) -> Result<TripodPoint, CliError> {
    let status_tol = StatusTolerance::default();
    let oracle = tripod_oracle(path, status_tol)?;
    let table = build_sigma_table_with(&path.curve(grid)?, TableOptions::default())?;
    let mut entries = Vec::with_capacity(oracle.entries.len());
    for e in &oracle.entries {
        let r = holonomy_of_order(&table, &e.seq, status_tol)?;
        let dev = max_abs(&(&r.holonomy - &e.holonomy)).max(max_abs(&(&r.gamma - &e.gamma)));
        let source = match e.source {
            offdiag_holonomy::models::OracleSource::Paper => "paper",
            offdiag_holonomy::models::OracleSource::Derived => "derived",
        };
        entries.push(EntryCheck {
            name: e.name.clone(),
            seq: e.seq.clone(),
            engine: r.status,
            oracle: e.status,
            deviation: dev,
            source,
        });
    }
    Ok(TripodPoint { z: oracle.z, entries })
}

fn tripod_sweep(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let sweep = ctx.cfg.sweep.clone().unwrap_or_default();
    let SweepSpec { theta1, phi1, theta_sine, phi_sine, omega } = sweep;
    let points: Vec<(f64, f64)> = theta1
        .values()
        .into_iter()
        .flat_map(|t| phi1.values().into_iter().map(move |p| (t, p)))
        .collect();
    let grid = ctx.cfg.grid;
    let evaluated = exec::map_slice(ExecMode::Parallel, &points, |&(t, p)| {
        let path = TripodPath::new(
            PathFunction::fourier(t, theta_sine.clone()),
            PathFunction::fourier(p, phi_sine.clone()),
            omega,
        );
        evaluate_tripod(&path, grid)
    });
    let mut w = ctx.csv("tripod_sweep.csv")?;
    let mut header_written = false;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (&(t, p), point) in points.iter().zip(evaluated) {
        let point = point?;
        if !header_written {
            let mut h: Vec<String> = ["config_hash", "seed", "grid", "theta1", "phi1", "z", "max_deviation"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            h.extend(point.entries.iter().map(|e| e.name.clone()));
            w.write_record(&h)?;
            header_written = true;
        }
        let max_dev = point.entries.iter().map(|e| e.deviation).fold(0.0, f64::max);
        worst = worst.max(max_dev);
        let mut row = vec![
            ctx.hash.clone(),
            ctx.cfg.seed.to_string(),
            grid.to_string(),
            t.to_string(),
            p.to_string(),
            point.z.to_string(),
            format!("{max_dev:e}"),
        ];
        for EntryCheck { name, engine, oracle, deviation: dev, .. } in &point.entries {
            row.push(engine.to_string());
            if engine != oracle {
                failures.push(format!("θ₁={t} φ₁={p} {name}: engine {engine}, closed form {oracle}"));
            } else if *dev > ctx.tolerance {
                failures.push(format!("θ₁={t} φ₁={p} {name}: deviation {dev:e}"));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    for f in failures {
        ctx.fail(f);
    }
    ctx.note(format!("{} points, max engine vs closed-form deviation {worst:.2e}", points.len()));
    Ok(())
}

fn interferometer(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let spec = ctx.cfg.interferometer.clone().unwrap_or_default();
    let curve = match build_source(ctx.cfg)? {
        Source::Curve(c) => c,
        Source::Table(_) => unreachable!("rejected by validation"),
    };
    let eta = curve.eta();
    let strategy = strategy(&spec, &curve, eta)?;
    let seqs = sequences(ctx.cfg, eta)?;
    let status_tol = StatusTolerance::default();
    let tol = ctx.tolerance;

    #[derive(Serialize)]
    struct Record {
        spec_id: String,
        config_hash: String,
        strategy: &'static str,
        seq: Vec<usize>,
        v: String,
        p: f64,
        closed_form_p: f64,
        p_max: f64,
        reference_p: f64,
        cross_check_deviation: f64,
        surviving_weight: f64,
        v_star: Vec<Vec<[f64; 2]>>,
        flags: Vec<&'static str>,
    }

    let mut rng = seeded(ctx.cfg.seed);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (i, seq) in seqs.iter().enumerate() {
        let protocol = Protocol::prepare(&curve, seq, &strategy)?;
        let ex = extract_holonomy(&protocol, status_tol)?;
        let mut base_flags = Vec::new();
        if ex.undefined {
            base_flags.push("undefined");
        }
        if ex.non_unique {
            base_flags.push("non_unique");
        }
        if let Some(d) = protocol.reference_deviation {
            if d > tol {
                base_flags.push("reference_exceeded");
                failures.push(format!("seq {}: Ū(1) deviates from ΣΓ_l by {d:e}", seq_key(seq)));
            }
        }
        let mut vs = vec![("v_star".to_string(), ex.v_star.clone())];
        for k in 0..spec.random_v {
            vs.push((format!("random-{k}"), random_admissible_v(&curve, &mut rng)));
        }
        for (label, v) in vs {
            let o = protocol.run(&v)?;
            let mut flags = base_flags.clone();
            let cross_tol = tol.max(EXACT_TOLERANCE);
            if o.cross_check_deviation > cross_tol {
                flags.push("cross_check_exceeded");
                failures.push(format!(
                    "seq {} ({label}): circuit vs closed form {:e}",
                    seq_key(seq),
                    o.cross_check_deviation
                ));
            }
            if label == "v_star" && (o.p - ex.p_max).abs() > cross_tol {
                flags.push("p_max_mismatch");
                failures.push(format!("seq {}: p(V*) = {} but p_max = {}", seq_key(seq), o.p, ex.p_max));
            }
            records.push(Record {
                spec_id: format!("{i}:{label}"),
                config_hash: ctx.hash.clone(),
                strategy: strategy.name(),
                seq: seq.clone(),
                v: label,
                p: o.p,
                closed_form_p: o.closed_form_p,
                p_max: ex.p_max,
                reference_p: o.reference_p,
                cross_check_deviation: o.cross_check_deviation,
                surviving_weight: o.surviving_weight,
                v_star: matrix_to_rows(&ex.v_star_block),
                flags,
            });
        }
    }

    let path = ctx.path("interferometer.jsonl");
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    for r in &records {
        serde_json::to_writer(&mut file, r)?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    let mut w = ctx.csv("interferometer.csv")?;
    w.write_record([
        "config_hash", "seed", "spec_id", "strategy", "seq", "v", "p", "closed_form_p", "p_max",
        "reference_p", "cross_check_deviation", "surviving_weight", "flags",
    ])?;
    for r in &records {
        w.write_record([
            r.config_hash.clone(),
            ctx.cfg.seed.to_string(),
            r.spec_id.clone(),
            r.strategy.to_string(),
            seq_key(&r.seq),
            r.v.clone(),
            r.p.to_string(),
            r.closed_form_p.to_string(),
            r.p_max.to_string(),
            r.reference_p.to_string(),
            format!("{:e}", r.cross_check_deviation),
            r.surviving_weight.to_string(),
            r.flags.join(";"),
        ])?;
    }
    w.flush()?;
    for f in failures {
        ctx.fail(f);
    }
    let undefined = records.iter().filter(|r| r.v == "v_star" && r.flags.contains(&"undefined")).count();
    ctx.note(format!(
        "{} runs over {} sequences ({} strategy), {undefined} with γ = 0 (p = 1/4)",
        records.len(),
        seqs.len(),
        strategy.name()
    ));
    Ok(())
}

fn strategy(spec: &InterferometerSpec, curve: &CurveFamily, eta: usize) -> Result<Strategy, CliError> {
    Ok(match spec.strategy {
        StrategyKind::Adiabatic => {
            let phases = spec.phases.clone().unwrap_or_else(|| vec![0.0; eta]);
            if phases.len() != eta {
                return Err(CliError::Config {
                    field: "interferometer.phases".into(),
                    message: format!("{} phases for {eta} subspaces", phases.len()),
                });
            }
            Strategy::Adiabatic { phases }
        }
        StrategyKind::Filtering => Strategy::Filtering { grid: spec.filter_grid },
        StrategyKind::Nonadiabatic => {
            let h = curve
                .generator()
                .and_then(|g| Transitionless::new(g.clone()))
                .ok_or_else(|| CliError::Config {
                    field: "interferometer.strategy".into(),
                    message: "the nonadiabatic strategy needs a generated curve with closed-form derivatives".into(),
                })?;
            Strategy::Nonadiabatic { hamiltonian: Arc::new(h), tolerance: spec.ode_tolerance }
        }
    })
}

/// Fixture paths: seeded random Fourier paths and the linear family.
fn oracle_paths(spec: &OracleSpec, seed: u64) -> Vec<(String, TripodPath)> {
    let mut paths: Vec<(String, TripodPath)> = (0..spec.random_paths as u64)
        .map(|i| {
            let s = seed.wrapping_add(i);
            (format!("random-{s}"), TripodPath::random_fourier(&mut seeded(s), spec.harmonics))
        })
        .collect();
    if spec.linear {
        for k in 0..7 {
            let theta1 = PI * k as f64 / 6.0;
            for phi1 in [-2.0, -0.7, 0.0, 0.9, 2.5] {
                paths.push((format!("linear-{k}pi/6-{phi1}"), TripodPath::linear(theta1, phi1, 1.0)));
            }
        }
    }
    paths
}

fn oracle_check(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let spec = ctx.cfg.oracle.clone().unwrap_or_default();
    let wanted = ctx.cfg.sequences.clone();
    if let Some(list) = &wanted {
        sequences(ctx.cfg, 3)?;
        if list.is_empty() {
            ctx.note("no sequences requested; empty report".into());
        }
    }
    let skip_all = wanted.as_ref().is_some_and(|w| w.is_empty());
    let paths = if skip_all { Vec::new() } else { oracle_paths(&spec, ctx.cfg.seed) };
    let grid = ctx.cfg.grid;
    let evaluated = exec::map_slice(ExecMode::Parallel, &paths, |(_, p)| evaluate_tripod(p, grid));

    let mut w = ctx.csv("oracle_check.csv")?;
    w.write_record([
        "config_hash", "seed", "grid", "path", "theta1", "phi1", "z", "sequence", "source",
        "closed_form_status", "engine_status", "deviation", "ok",
    ])?;
    #[derive(Serialize, Default, Clone)]
    struct PerSequence {
        name: String,
        seq: Vec<usize>,
        max_deviation: f64,
        status_mismatches: usize,
    }
    let mut per_seq: Vec<PerSequence> = Vec::new();
    let mut failures = Vec::new();
    for ((id, path), point) in paths.iter().zip(evaluated) {
        let point = point?;
        for EntryCheck { name, seq, engine, oracle, deviation: dev, source } in point.entries {
            if let Some(list) = &wanted {
                if !list.contains(&seq) {
                    continue;
                }
            }
            let ok = engine == oracle && dev <= ctx.tolerance;
            if !ok {
                failures.push(format!("{id} {name}: deviation {dev:e}, engine {engine}, closed form {oracle}"));
            }
            let entry = match per_seq.iter_mut().position(|e| e.seq == seq) {
                Some(i) => &mut per_seq[i],
                None => {
                    per_seq.push(PerSequence { name: name.clone(), seq: seq.clone(), ..Default::default() });
                    per_seq.last_mut().expect("just pushed")
                }
            };
            entry.max_deviation = entry.max_deviation.max(dev);
            entry.status_mismatches += usize::from(engine != oracle);
            w.write_record([
                ctx.hash.clone(),
                ctx.cfg.seed.to_string(),
                grid.to_string(),
                id.clone(),
                path.theta1().to_string(),
                path.phi1().to_string(),
                point.z.to_string(),
                name,
                source.to_string(),
                oracle.to_string(),
                engine.to_string(),
                format!("{dev:e}"),
                ok.to_string(),
            ])?;
        }
    }
    w.flush()?;
    let worst = per_seq.iter().map(|e| e.max_deviation).fold(0.0, f64::max);
    let doc = serde_json::json!({
        "meta": ctx.meta(),
        "paths": paths.len(),
        "max_deviation": worst,
        "passed": failures.is_empty(),
        "sequences": per_seq,
        "failures": failures,
    });
    ctx.write_json("oracle_check.json", &doc)?;
    let n_fail = failures.len();
    for f in failures {
        ctx.fail(f);
    }
    ctx.note(format!(
        "{} paths, {} sequences, max deviation {worst:.2e} (tolerance {:e}), {n_fail} failures",
        paths.len(),
        per_seq.len(),
        ctx.tolerance
    ));
    Ok(())
}

pub fn describe_files(files: &[PathBuf]) -> String {
    files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
}

