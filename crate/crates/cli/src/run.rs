use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gcs_core::algebra::{su11_generators, su2_generators, un1_generators, oscillator_su11, OperatorMatrix, RepLabel};
use gcs_core::flow::{
    classical_flow, ermakov_solve, ChartPolicy, EpsilonStart, PhasePoint, StepControls, Track,
};
use gcs_core::observables::{
    su11_means_closed, su2_means_closed, thermal_average_check, uncertainty_product, un1_number_mean,
};
use gcs_core::oracle::{
    mobius_vs_riccati_experiment, reference_state, stability_experiment, EvolveOptions,
    StabilityOptions,
};
use gcs_core::states::{glauber_cs, parity_cs, su11_cs, StateVector, Truncation};
use gcs_core::verification::{run_suite, CheckOutcome, CHECKS};
use gcs_core::Execution;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentKind, Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::OUTPUT_DIR_ENV;

/// Relative agreement required in the observables experiment.
const OBSERVABLE_TOLERANCE: f64 = 1e-8;
const THERMAL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSummary {
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tail_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rel_discrepancy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub artifact: &'static str,
    pub version: &'static str,
    pub experiment: ExperimentKind,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wronskian_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<WeightSummary>,
    /// SHA-256 of the formatted phase-space columns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_hash: Option<String>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    pub config: ScenarioConfig,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub csv: String,
    pub summary: Summary,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV body built row by row; the phase-space columns also feed the hash.
struct Table {
    text: String,
    hasher: Sha256,
    rows: usize,
}

impl Table {
    fn new(header: &[String]) -> Self {
        Self {
            text: header.join(",") + "\n",
            hasher: Sha256::new(),
            rows: 0,
        }
    }

    fn row(&mut self, t: f64, z: &[String], rest: &[f64]) {
        let zs = z.join(",");
        self.hasher.update(zs.as_bytes());
        self.hasher.update(b"\n");
        let mut line = fmt(t);
        if !zs.is_empty() {
            line.push(',');
            line.push_str(&zs);
        }
        for v in rest {
            line.push(',');
            line.push_str(&fmt(*v));
        }
        self.text.push_str(&line);
        self.text.push('\n');
        self.rows += 1;
    }

    fn finish(self) -> (String, String, usize) {
        let digest = self.hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            let _ = write!(hex, "{b:02x}");
        }
        (self.text, hex, self.rows)
    }
}

fn z_header(modes: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "re_z".into(), "im_z".into()];
    for i in 2..=modes {
        h.push(format!("re_z{i}"));
        h.push(format!("im_z{i}"));
    }
    h
}

fn z_fields(point: &PhasePoint) -> (Vec<String>, f64) {
    let comps = point.components();
    let norm = comps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let fields = comps.iter().flat_map(|z| [fmt(z.re), fmt(z.im)]).collect();
    (fields, norm)
}

fn weight_of(rep: &RepLabel) -> f64 {
    match rep {
        RepLabel::HeisenbergWeyl { .. } => 0.0,
        RepLabel::Su2 { spin } => spin.value(),
        RepLabel::Su11 { k, .. } => *k,
        RepLabel::Oscillator { parity, .. } => parity.bargmann_index(),
        RepLabel::Un1 { m, .. } => *m as f64,
    }
}

fn controls(cfg: &ScenarioConfig) -> StepControls {
    cfg.max_step.map(StepControls::with_step).unwrap_or_default()
}

fn oscillator_wronskian(track: &Track, sc: &Scenario) -> Result<Option<f64>, CliError> {
    match track {
        Track::Oscillator { omega, friction, .. } => {
            let sol = ermakov_solve(omega, friction, &sc.grid, EpsilonStart::Identity, &controls(&sc.config))?;
            Ok(Some(sol.wronskian_drift()))
        }
        _ => Ok(None),
    }
}

fn base_summary(sc: &Scenario) -> Summary {
    Summary {
        artifact: "gcs",
        version: env!("CARGO_PKG_VERSION"),
        experiment: sc.config.experiment,
        rows: 0,
        min_fidelity: None,
        max_norm_drift: None,
        wronskian_drift: None,
        sup_distance: None,
        passed: None,
        weights: Vec::new(),
        trajectory_hash: None,
        wall_time_s: 0.0,
        csv: None,
        config: sc.config.clone(),
    }
}

/// Runs one validated scenario in memory.
pub fn run_scenario(sc: &Scenario) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let mut summary = base_summary(sc);
    let csv = match sc.config.experiment {
        ExperimentKind::Classical => classical(sc, &mut summary)?,
        ExperimentKind::Stability => stability(sc, &mut summary)?,
        ExperimentKind::MobiusVsRiccati => mobius(sc, &mut summary)?,
        ExperimentKind::Observables => observables(sc, &mut summary)?,
        ExperimentKind::Thermal => thermal(sc, &mut summary)?,
    };
    summary.wall_time_s = start.elapsed().as_secs_f64();
    Ok(RunOutput { csv, summary })
}

fn track_of(sc: &Scenario) -> &Track {
    sc.track.as_ref().expect("validated: trajectory experiments carry a track")
}

fn classical(sc: &Scenario, summary: &mut Summary) -> Result<String, CliError> {
    let track = track_of(sc);
    let traj = classical_flow(track, &sc.z0, &sc.grid, &controls(&sc.config), ChartPolicy::default())?;
    let mut header = z_header(sc.z0.len());
    header.push("abs_z".into());
    let mut table = Table::new(&header);
    for (t, p) in traj.times.iter().zip(&traj.points) {
        let (fields, norm) = z_fields(p);
        table.row(*t, &fields, &[norm]);
    }
    summary.wronskian_drift = oscillator_wronskian(track, sc)?;
    let (text, hash, rows) = table.finish();
    summary.trajectory_hash = Some(hash);
    summary.rows = rows;
    Ok(text)
}

fn stability(sc: &Scenario, summary: &mut Summary) -> Result<String, CliError> {
    let track = track_of(sc);
    let cfg = &sc.config;
    let options = StabilityOptions {
        evolve: EvolveOptions {
            segments: cfg.truncation.segments,
            leakage_threshold: cfg.truncation.leakage_threshold,
            ..EvolveOptions::default()
        },
        controls: controls(cfg),
        chart: ChartPolicy::default(),
        execution: Execution::Parallel,
    };
    let report = stability_experiment(&sc.reps, track, &sc.z0, &sc.grid, &options)?;
    let mut header = z_header(sc.z0.len());
    header.push("abs_z".into());
    for i in 1..=report.outcomes.len() {
        header.push(format!("fidelity_w{i}"));
    }
    header.push("fidelity".into());
    let mut table = Table::new(&header);
    for (i, (t, p)) in report.trajectory.times.iter().zip(&report.trajectory.points).enumerate() {
        let (fields, norm) = z_fields(p);
        let mut rest = vec![norm];
        rest.extend(report.outcomes.iter().map(|o| o.fidelity[i]));
        rest.push(report.outcomes.iter().map(|o| o.fidelity[i]).fold(f64::INFINITY, f64::min));
        table.row(*t, &fields, &rest);
    }
    summary.min_fidelity = Some(report.min_fidelity());
    summary.max_norm_drift = Some(report.max_norm_drift());
    summary.wronskian_drift = oscillator_wronskian(track, sc)?;
    summary.weights = report
        .outcomes
        .iter()
        .map(|o| WeightSummary {
            weight: weight_of(&o.rep),
            min_fidelity: Some(o.min_fidelity),
            norm_drift: Some(o.norm_drift),
            max_tail_mass: Some(o.max_tail_mass),
            k0_deviation: o.k0_deviation,
            max_rel_discrepancy: None,
        })
        .collect();
    let (text, hash, rows) = table.finish();
    summary.trajectory_hash = Some(hash);
    summary.rows = rows;
    Ok(text)
}

fn mobius(sc: &Scenario, summary: &mut Summary) -> Result<String, CliError> {
    let report = mobius_vs_riccati_experiment(track_of(sc), sc.z0[0], &sc.grid, &controls(&sc.config))?;
    let mut header = z_header(1);
    header.extend(["re_z_mobius", "im_z_mobius", "poincare_distance"].map(String::from));
    let mut table = Table::new(&header);
    for ((t, r), m) in report.times.iter().zip(&report.riccati).zip(&report.mobius) {
        let d = gcs_core::numeric::poincare_distance(*r, *m);
        table.row(*t, &[fmt(r.re), fmt(r.im)], &[m.re, m.im, d]);
    }
    summary.sup_distance = Some(report.sup_distance);
    summary.wronskian_drift = Some(report.wronskian_drift);
    summary.passed = Some(report.sup_distance < 1e-8);
    let (text, hash, rows) = table.finish();
    summary.trajectory_hash = Some(hash);
    summary.rows = rows;
    Ok(text)
}

/// The state used on the matrix side of the observables experiment: grown
/// until its tail is negligible for the infinite families.
fn matrix_state(rep: RepLabel, point: &PhasePoint) -> Result<StateVector, CliError> {
    let z = point.scalar();
    Ok(match rep {
        RepLabel::HeisenbergWeyl { .. } => glauber_cs(z.expect("plane point"), Truncation::default())?,
        RepLabel::Su11 { k, .. } => su11_cs(k, z.expect("disc point"), Truncation::default())?,
        RepLabel::Oscillator { parity, .. } => parity_cs(parity, z.expect("disc point"), Truncation::default())?,
        _ => reference_state(rep, point)?,
    })
}

/// Diagonal of the generator whose mean the experiment tracks, for a basis
/// of the given size.
fn tracked_diagonal(rep: RepLabel, dim: usize) -> Result<Vec<f64>, CliError> {
    let op: OperatorMatrix = match rep {
        RepLabel::HeisenbergWeyl { .. } => OperatorMatrix::from_diagonal((0..dim).map(|n| n as f64)),
        RepLabel::Su2 { spin } => su2_generators(spin).diagonal,
        RepLabel::Su11 { k, .. } => su11_generators(k, dim)?.diagonal,
        RepLabel::Oscillator { .. } => oscillator_su11(dim)?.k3,
        RepLabel::Un1 { n, m } => un1_generators(n, m)?.e(0, 0).clone(),
    };
    Ok(op.diagonal().iter().map(|d| d.re).collect())
}

fn closed_mean(rep: RepLabel, point: &PhasePoint) -> Result<f64, CliError> {
    let comps = point.components();
    Ok(match rep {
        RepLabel::HeisenbergWeyl { .. } => comps[0].norm_sqr(),
        RepLabel::Su2 { spin } => su2_means_closed(spin, comps[0]).zero,
        RepLabel::Su11 { k, .. } => su11_means_closed(k, comps[0])?.zero,
        RepLabel::Oscillator { parity, .. } => su11_means_closed(parity.bargmann_index(), comps[0])?.zero,
        RepLabel::Un1 { m, .. } => un1_number_mean(m, &comps, 0, 0).re,
    })
}

fn observables(sc: &Scenario, summary: &mut Summary) -> Result<String, CliError> {
    let track = track_of(sc);
    let traj = classical_flow(track, &sc.z0, &sc.grid, &controls(&sc.config), ChartPolicy::default())?;
    let disc = matches!(sc.reps[0], RepLabel::Su11 { .. } | RepLabel::Oscillator { .. });
    let mut header = z_header(sc.z0.len());
    for i in 1..=sc.reps.len() {
        header.push(format!("mean_w{i}"));
        header.push(format!("mean_matrix_w{i}"));
        if disc {
            header.push(format!("uncertainty_w{i}"));
        }
    }
    let mut table = Table::new(&header);
    let mut worst = vec![0.0f64; sc.reps.len()];
    let mut diagonals: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
    for (t, p) in traj.times.iter().zip(&traj.points) {
        let (fields, _) = z_fields(p);
        let mut rest = Vec::new();
        for (i, rep) in sc.reps.iter().enumerate() {
            let closed = closed_mean(*rep, p)?;
            let state = matrix_state(*rep, p)?;
            let diag = match diagonals.entry((i, state.dim())) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => e.insert(tracked_diagonal(*rep, state.dim())?),
            };
            let matrix: f64 = state.coeffs().iter().zip(diag.iter()).map(|(c, d)| c.norm_sqr() * d).sum();
            worst[i] = worst[i].max((matrix - closed).abs() / closed.abs().max(1.0));
            rest.push(closed);
            rest.push(matrix);
            if disc {
                let z = p.scalar().expect("disc point");
                rest.push(uncertainty_product(weight_of(rep), z)?);
            }
        }
        table.row(*t, &fields, &rest);
    }
    summary.weights = sc
        .reps
        .iter()
        .zip(&worst)
        .map(|(rep, w)| WeightSummary {
            weight: weight_of(rep),
            min_fidelity: None,
            norm_drift: None,
            max_tail_mass: None,
            k0_deviation: None,
            max_rel_discrepancy: Some(*w),
        })
        .collect();
    summary.passed = Some(worst.iter().all(|w| *w <= OBSERVABLE_TOLERANCE));
    summary.wronskian_drift = oscillator_wronskian(track, sc)?;
    let (text, hash, rows) = table.finish();
    summary.trajectory_hash = Some(hash);
    summary.rows = rows;
    Ok(text)
}

fn thermal(sc: &Scenario, summary: &mut Summary) -> Result<String, CliError> {
    let beta_omega = sc.config.beta_omega.expect("validated");
    // smallest basis whose dropped Boltzmann weight is below the check's tolerance
    let trunc = (15.0 * std::f64::consts::LN_10 / beta_omega).ceil() as usize + 8;
    let number = OperatorMatrix::from_diagonal((0..trunc).map(|n| n as f64));
    let report = thermal_average_check(beta_omega, &number, trunc)?;
    let bose = 1.0 / (beta_omega.exp() - 1.0);
    let cs = report.matrix_value.re;
    let trace = report.closed_form.re;
    let mut text = String::from("beta_omega,bose,cs_mean,trace_mean\n");
    text.push_str(&[beta_omega, bose, cs, trace].map(fmt).join(","));
    text.push('\n');
    summary.rows = 1;
    summary.passed = Some((cs - bose).abs() <= THERMAL_TOLERANCE && (trace - bose).abs() <= THERMAL_TOLERANCE);
    Ok(text)
}

fn output_dir(cfg: &ScenarioConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn stem(cfg: &ScenarioConfig, config_path: &Path) -> String {
    cfg.output.stem.clone().unwrap_or_else(|| {
        config_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into())
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("summaries serialize") + "\n"
}

/// `simulate`: validates, runs, and writes `<stem>.csv` and `<stem>.json`.
/// Returns the summary and the paths written.
pub fn simulate(config_path: &Path) -> Result<(Summary, PathBuf, PathBuf), CliError> {
    let cfg = crate::config::load_config(config_path)?;
    let scenario = cfg.validate()?;
    let dir = output_dir(&cfg);
    let stem = stem(&cfg, config_path);
    ensure_dir(&dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    if same_file(&json_path, config_path) {
        return Err(CliError::config(
            "output",
            format!("summary {} would overwrite the config; set output.stem or another directory", json_path.display()),
        ));
    }
    let out = run_scenario(&scenario)?;
    write(&csv_path, &out.csv)?;
    let mut summary = out.summary;
    summary.csv = Some(csv_path.display().to_string());
    write(&json_path, &to_json(&summary))?;
    Ok((summary, csv_path, json_path))
}

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub index: usize,
    pub coords: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub artifact: &'static str,
    pub version: &'static str,
    pub scenarios: Vec<SweepEntry>,
    pub failures: usize,
    pub config: ScenarioConfig,
}

/// `sweep`: every grid point runs independently (in parallel), writes its own
/// CSV, and lands in `<stem>_sweep.json` in grid order.
pub fn sweep(config_path: &Path) -> Result<(SweepReport, PathBuf), CliError> {
    let cfg = crate::config::load_config(config_path)?;
    if cfg.sweep.is_empty() {
        return Err(CliError::config("sweep", "no sweep axes given"));
    }
    // the base scenario must be sound before anything runs
    cfg.expand_sweep()
        .first()
        .expect("at least one scenario")
        .1
        .validate()?;
    let dir = output_dir(&cfg);
    let stem = stem(&cfg, config_path);
    ensure_dir(&dir)?;
    let path = dir.join(format!("{stem}_sweep.json"));
    if same_file(&path, config_path) {
        return Err(CliError::config("output", format!("{} would overwrite the config", path.display())));
    }
    let runs = cfg.expand_sweep();
    let entries = Execution::Parallel.map(&runs, |(coords, scenario_cfg)| {
        let index = runs
            .iter()
            .position(|(c, _)| c == coords)
            .expect("coordinates are unique");
        let result = scenario_cfg.validate().and_then(|sc| {
            let out = run_scenario(&sc)?;
            let csv_path = dir.join(format!("{stem}_{index:04}.csv"));
            write(&csv_path, &out.csv)?;
            let mut summary = out.summary;
            summary.csv = Some(csv_path.display().to_string());
            Ok(summary)
        });
        match result {
            Ok(summary) => SweepEntry {
                index,
                coords: coords.clone(),
                summary: Some(summary),
                error: None,
            },
            Err(e) => SweepEntry {
                index,
                coords: coords.clone(),
                summary: None,
                error: Some(e.to_string()),
            },
        }
    });
    let failures = entries.iter().filter(|e| e.error.is_some()).count();
    let report = SweepReport {
        artifact: "gcs",
        version: env!("CARGO_PKG_VERSION"),
        scenarios: entries,
        failures,
        config: cfg,
    };
    write(&path, &to_json(&report))?;
    Ok((report, path))
}

/// `verify`: the invariant suite, optionally restricted to names containing
/// `filter`.
pub fn verify(filter: Option<&str>) -> Result<Vec<CheckOutcome>, CliError> {
    if let Some(f) = filter {
        if !CHECKS.iter().any(|n| n.contains(f)) {
            return Err(CliError::config(
                "--filter",
                format!("no check matches '{f}'; available: {}", CHECKS.join(", ")),
            ));
        }
    }
    Ok(run_suite(filter, Execution::Parallel))
}
