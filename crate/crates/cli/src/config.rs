//! Scenario files: JSON trees parsed with field-addressed diagnostics and
//! validated before anything is computed.

use std::path::Path;

use gcs_core::algebra::{Coefficients, Parity, RepLabel, Spin};
use gcs_core::flow::{ComplexSignal, MatrixSignal, Signal, TimeGrid, Track};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    HeisenbergWeyl,
    Su2,
    Su11,
    /// su(1,1) in the quadratic realization; weights select the parity sector.
    Oscillator,
    Un1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Classical,
    Stability,
    MobiusVsRiccati,
    Observables,
    Thermal,
}

/// `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue(pub f64, pub f64);

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        Complex64::new(v.0, v.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Scalar(ComplexValue),
    Vector(Vec<ComplexValue>),
}

impl PointSpec {
    pub fn components(&self) -> Vec<Complex64> {
        match self {
            PointSpec::Scalar(z) => vec![(*z).into()],
            PointSpec::Vector(v) => v.iter().map(|z| (*z).into()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalForm {
    Constant(f64),
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
}

/// A real channel: a bare number or one of the tagged forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalSpec {
    Number(f64),
    Form(SignalForm),
}

impl SignalSpec {
    fn build(&self, field: &str) -> Result<Signal, CliError> {
        let s = match self {
            SignalSpec::Number(v) | SignalSpec::Form(SignalForm::Constant(v)) => Signal::Constant(*v),
            SignalSpec::Form(SignalForm::Piecewise { breaks, values }) => Signal::Piecewise {
                breaks: breaks.clone(),
                values: values.clone(),
            },
            SignalSpec::Form(SignalForm::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            }) => Signal::Sinusoid {
                offset: *offset,
                amplitude: *amplitude,
                frequency: *frequency,
                phase: *phase,
            },
        };
        s.validate().map_err(|e| CliError::config(field, e.to_string()))?;
        Ok(s)
    }
}

/// A complex channel: `[re, im]` constants or separate real channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSignalSpec {
    Constant(ComplexValue),
    Parts { re: SignalSpec, im: SignalSpec },
}

impl ComplexSignalSpec {
    fn build(&self, field: &str) -> Result<ComplexSignal, CliError> {
        Ok(match self {
            ComplexSignalSpec::Constant(z) => ComplexSignal::constant((*z).into()),
            ComplexSignalSpec::Parts { re, im } => ComplexSignal {
                re: re.build(&format!("{field}.re"))?,
                im: im.build(&format!("{field}.im"))?,
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackKind {
    /// `omega`, `force`.
    Glauber,
    /// `h0`, `h`.
    Su2,
    /// `h0`, `h`.
    Su11,
    /// `omega`, `friction`, `g`.
    Oscillator,
    /// `matrix`: constant Hermitian `h_ij`, one row per mode.
    Matrix,
}

/// Coefficient track. Kept flat rather than as a tagged enum so that parse
/// errors point at the offending channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackSpec {
    pub kind: TrackKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<SignalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<ComplexSignalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<SignalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<ComplexSignalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub friction: Option<SignalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexValue>>>,
}

fn real_channel(spec: &Option<SignalSpec>, field: &str, required: bool) -> Result<Signal, CliError> {
    match spec {
        Some(s) => s.build(field),
        None if required => Err(CliError::config(field, "missing")),
        None => Ok(Signal::Constant(0.0)),
    }
}

fn complex_channel(spec: &Option<ComplexSignalSpec>, field: &str) -> Result<ComplexSignal, CliError> {
    match spec {
        Some(s) => s.build(field),
        None => Ok(ComplexSignal::default()),
    }
}

impl TrackSpec {
    fn allowed(&self) -> &'static [&'static str] {
        match self.kind {
            TrackKind::Glauber => &["omega", "force"],
            TrackKind::Su2 | TrackKind::Su11 => &["h0", "h"],
            TrackKind::Oscillator => &["omega", "friction", "g"],
            TrackKind::Matrix => &["matrix"],
        }
    }

    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let fields = [
            ("omega", self.omega.is_some()),
            ("force", self.force.is_some()),
            ("h0", self.h0.is_some()),
            ("h", self.h.is_some()),
            ("friction", self.friction.is_some()),
            ("g", self.g.is_some()),
            ("matrix", self.matrix.is_some()),
        ];
        for (name, set) in fields {
            if set {
                out.push(name);
            }
        }
        out
    }

    pub fn build(&self) -> Result<Track, CliError> {
        let allowed = self.allowed();
        if let Some(extra) = self.present().into_iter().find(|f| !allowed.contains(f)) {
            return Err(CliError::config(
                format!("track.{extra}"),
                format!("not a channel of a {} track", self.kind_name()),
            ));
        }
        Ok(match self.kind {
            TrackKind::Glauber => Track::Glauber {
                omega: real_channel(&self.omega, "track.omega", true)?,
                force: complex_channel(&self.force, "track.force")?,
            },
            TrackKind::Su2 => Track::Su2 {
                h0: real_channel(&self.h0, "track.h0", true)?,
                h: complex_channel(&self.h, "track.h")?,
            },
            TrackKind::Su11 => Track::Su11 {
                h0: real_channel(&self.h0, "track.h0", true)?,
                h: complex_channel(&self.h, "track.h")?,
            },
            TrackKind::Oscillator => {
                let g = self.g.unwrap_or(0.0);
                if !(g.is_finite() && g > -0.125) {
                    return Err(CliError::config("track.g", format!("g = {g} must exceed -1/8")));
                }
                Track::Oscillator {
                    omega: real_channel(&self.omega, "track.omega", true)?,
                    friction: real_channel(&self.friction, "track.friction", false)?,
                    g,
                }
            }
            TrackKind::Matrix => {
                let Some(h) = &self.matrix else {
                    return Err(CliError::config("track.matrix", "missing"));
                };
                let n = h.len();
                if n < 2 || h.iter().any(|row| row.len() != n) {
                    return Err(CliError::config("track.matrix", "must be square of size N+1 >= 2"));
                }
                let m = nalgebra_matrix(h);
                Coefficients::Matrix(m.clone())
                    .validate()
                    .map_err(|e| CliError::config("track.matrix", e.to_string()))?;
                Track::Matrix(
                    MatrixSignal::constant(&m).map_err(|e| CliError::config("track.matrix", e.to_string()))?,
                )
            }
        })
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            TrackKind::Glauber => "glauber",
            TrackKind::Su2 => "su2",
            TrackKind::Su11 => "su11",
            TrackKind::Oscillator => "oscillator",
            TrackKind::Matrix => "matrix",
        }
    }
}

fn nalgebra_matrix(h: &[Vec<ComplexValue>]) -> DMatrix<Complex64> {
    let n = h.len();
    DMatrix::from_fn(n, n, |i, j| h[i][j].into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    /// Basis size for infinite-dimensional representations.
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_leakage")]
    pub leakage_threshold: f64,
    /// Propagator segments over `[0, T]`.
    #[serde(default = "default_segments")]
    pub segments: usize,
}

fn default_dim() -> usize {
    256
}

fn default_leakage() -> f64 {
    1e-8
}

fn default_segments() -> usize {
    2048
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self {
            dim: default_dim(),
            leakage_threshold: default_leakage(),
            segments: default_segments(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

/// Axes of a sweep; scenarios are the cartesian product of the non-empty
/// axes, each value replacing the corresponding scalar field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z0_re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z0_im: Vec<f64>,
    /// One weight per scenario.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weight: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta_omega: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub horizon: Vec<f64>,
}

impl SweepSpec {
    pub fn is_empty(&self) -> bool {
        self.z0_re.is_empty()
            && self.z0_im.is_empty()
            && self.weight.is_empty()
            && self.beta_omega.is_empty()
            && self.horizon.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub group: GroupKind,
    /// `j` for su(2), `k` for su(1,1) (`1/4` or `3/4` for the oscillator),
    /// `m` for u(N+1); ignored for Heisenberg-Weyl.
    #[serde(default)]
    pub weights: Vec<f64>,
    #[serde(default = "origin")]
    pub z0: PointSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<TrackSpec>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Output rows after the initial one.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub truncation: TruncationSpec,
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "SweepSpec::is_empty")]
    pub sweep: SweepSpec,
}

fn origin() -> PointSpec {
    PointSpec::Scalar(ComplexValue(0.0, 0.0))
}

fn default_horizon() -> f64 {
    10.0
}

fn default_samples() -> usize {
    200
}

/// Everything a run needs, checked.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub reps: Vec<RepLabel>,
    pub z0: Vec<Complex64>,
    pub track: Option<Track>,
    pub grid: TimeGrid,
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = if path.is_empty() || path == "." {
            "<root>".to_string()
        } else {
            path
        };
        CliError::config(field, inner.to_string())
    })
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_config(&text)
}

fn rep_for(group: GroupKind, weight: f64, trunc: usize, modes: usize, idx: usize) -> Result<RepLabel, CliError> {
    let field = format!("weights[{idx}]");
    let bad = |msg: String| CliError::config(&field, msg);
    let rep = match group {
        GroupKind::HeisenbergWeyl => RepLabel::HeisenbergWeyl { trunc },
        GroupKind::Su2 => RepLabel::Su2 {
            spin: Spin::new(weight).map_err(|e| bad(e.to_string()))?,
        },
        GroupKind::Su11 => RepLabel::Su11 { k: weight, trunc },
        GroupKind::Oscillator => {
            let parity = if weight == 0.25 {
                Parity::Even
            } else if weight == 0.75 {
                Parity::Odd
            } else {
                return Err(bad(format!("oscillator weights are 0.25 or 0.75, got {weight}")));
            };
            RepLabel::Oscillator { parity, trunc }
        }
        GroupKind::Un1 => {
            if !(weight >= 1.0 && weight.fract() == 0.0) {
                return Err(bad(format!("u(N+1) weight m must be a positive integer, got {weight}")));
            }
            RepLabel::Un1 {
                n: modes,
                m: weight as usize,
            }
        }
    };
    rep.validate().map_err(|e| bad(e.to_string()))?;
    Ok(rep)
}

fn track_fits(group: GroupKind, track: TrackKind) -> bool {
    matches!(
        (group, track),
        (GroupKind::HeisenbergWeyl, TrackKind::Glauber)
            | (GroupKind::Su2, TrackKind::Su2)
            | (GroupKind::Su11, TrackKind::Su11 | TrackKind::Oscillator)
            | (GroupKind::Oscillator, TrackKind::Oscillator)
            | (GroupKind::Un1, TrackKind::Matrix)
    )
}

impl ScenarioConfig {
    /// Checks every field and builds the objects a run needs.
    pub fn validate(&self) -> Result<Scenario, CliError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(CliError::config("horizon", format!("must be positive, got {}", self.horizon)));
        }
        if self.samples == 0 {
            return Err(CliError::config("samples", "must be at least 1"));
        }
        let t = &self.truncation;
        if t.dim < 4 {
            return Err(CliError::config("truncation.dim", format!("must be at least 4, got {}", t.dim)));
        }
        if !(t.leakage_threshold > 0.0 && t.leakage_threshold < 1.0) {
            return Err(CliError::config("truncation.leakage_threshold", "must lie in (0, 1)"));
        }
        if t.segments == 0 {
            return Err(CliError::config("truncation.segments", "must be at least 1"));
        }
        if let Some(h) = self.max_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(CliError::config("max_step", "must be positive"));
            }
        }
        let z0 = self.z0.components();
        if z0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::config("z0", "must be finite"));
        }
        let modes = z0.len();
        if self.group != GroupKind::Un1 && modes != 1 && self.experiment != ExperimentKind::Thermal {
            return Err(CliError::config("z0", "a single complex number [re, im] is expected"));
        }
        if matches!(self.group, GroupKind::Su11 | GroupKind::Oscillator) && z0[0].norm() >= 1.0 {
            return Err(CliError::config("z0", format!("|z0| = {} must be below 1 on the disc", z0[0].norm())));
        }
        let needs_weights = !matches!(self.group, GroupKind::HeisenbergWeyl)
            && matches!(
                self.experiment,
                ExperimentKind::Stability | ExperimentKind::Observables
            );
        if needs_weights && self.weights.is_empty() {
            return Err(CliError::config("weights", "at least one weight is required"));
        }
        let weights: Vec<f64> = if self.group == GroupKind::HeisenbergWeyl {
            vec![0.0]
        } else {
            self.weights.clone()
        };
        let reps = weights
            .iter()
            .enumerate()
            .map(|(i, w)| rep_for(self.group, *w, t.dim, modes, i))
            .collect::<Result<Vec<_>, _>>()?;

        let track = match (&self.track, self.experiment) {
            (None, ExperimentKind::Thermal) => None,
            (None, _) => return Err(CliError::config("track", "missing")),
            (Some(spec), _) => {
                if !track_fits(self.group, spec.kind) {
                    return Err(CliError::config(
                        "track.kind",
                        format!("a {} track does not drive the {:?} group", spec.kind_name(), self.group),
                    ));
                }
                if self.experiment == ExperimentKind::MobiusVsRiccati && spec.kind != TrackKind::Oscillator {
                    return Err(CliError::config("track.kind", "mobius-vs-riccati needs an oscillator track"));
                }
                if let Some(h) = &spec.matrix {
                    if h.len() != modes + 1 {
                        return Err(CliError::config(
                            "track.matrix",
                            format!("{} modes need a {}x{} matrix", modes, modes + 1, modes + 1),
                        ));
                    }
                }
                let track = spec.build()?;
                track
                    .validate(self.horizon)
                    .map_err(|e| CliError::config("track", e.to_string()))?;
                Some(track)
            }
        };
        if self.experiment == ExperimentKind::Thermal {
            match self.beta_omega {
                Some(b) if b.is_finite() && b > 0.0 => {}
                _ => return Err(CliError::config("beta_omega", "a positive value is required for thermal runs")),
            }
        }
        let grid = TimeGrid::uniform(self.horizon, self.samples)
            .map_err(|e| CliError::config("samples", e.to_string()))?;
        Ok(Scenario {
            config: self.clone(),
            reps,
            z0,
            track,
            grid,
        })
    }

    /// The cartesian product of the sweep axes, each paired with its
    /// coordinates.
    pub fn expand_sweep(&self) -> Vec<(Vec<(String, f64)>, ScenarioConfig)> {
        let mut base = self.clone();
        base.sweep = SweepSpec::default();
        let mut out = vec![(Vec::new(), base)];
        let axes: [(&str, &Vec<f64>); 5] = [
            ("z0_re", &self.sweep.z0_re),
            ("z0_im", &self.sweep.z0_im),
            ("weight", &self.sweep.weight),
            ("beta_omega", &self.sweep.beta_omega),
            ("horizon", &self.sweep.horizon),
        ];
        for (name, values) in axes {
            if values.is_empty() {
                continue;
            }
            out = out
                .into_iter()
                .flat_map(|(coords, cfg)| {
                    values.iter().map(move |v| {
                        let mut cfg = cfg.clone();
                        let mut coords = coords.clone();
                        coords.push((name.to_string(), *v));
                        apply_axis(&mut cfg, name, *v);
                        (coords, cfg)
                    })
                })
                .collect();
        }
        out
    }
}

fn apply_axis(cfg: &mut ScenarioConfig, name: &str, v: f64) {
    match name {
        "z0_re" | "z0_im" => {
            let mut z = match &cfg.z0 {
                PointSpec::Scalar(z) => *z,
                PointSpec::Vector(v) => v.first().copied().unwrap_or(ComplexValue(0.0, 0.0)),
            };
            if name == "z0_re" {
                z.0 = v;
            } else {
                z.1 = v;
            }
            cfg.z0 = PointSpec::Scalar(z);
        }
        "weight" => cfg.weights = vec![v],
        "beta_omega" => cfg.beta_omega = Some(v),
        "horizon" => cfg.horizon = v,
        _ => unreachable!("unknown sweep axis"),
    }
}
