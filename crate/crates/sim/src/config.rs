//! Run specification: JSON schema, parsing and validation.

use mpox_core::analysis::Lyapunov;
use mpox_core::engine::{PositivityPolicy, SimConfig, MAX_STEPS};
use mpox_core::model::{DEFAULT_GUARD_EPS, N_NOISE};
use mpox_core::schedule::Schedule;
use mpox_core::{Compartment, ParamSchedule, Params, State};
use serde::{Deserialize, Serialize};

/// Largest number of recorded samples per path when no stride is given.
pub const AUTO_MAX_SAMPLES: u64 = 10_000;

/// A constant or a piecewise-linear list of `[t, value]` knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    /// Same value at every time.
    Constant(f64),
    /// Interpolated knots, held after the last one.
    Knots(KnotList),
}

/// Object form of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotList {
    /// `[t, value]` pairs with strictly increasing `t`.
    pub knots: Vec<(f64, f64)>,
}

impl ScheduleSpec {
    fn build(&self) -> Result<Schedule, String> {
        match self {
            ScheduleSpec::Constant(v) if v.is_finite() => Ok(Schedule::constant(*v)),
            ScheduleSpec::Constant(_) => Err("values are finite".into()),
            ScheduleSpec::Knots(k) => Schedule::new(k.knots.clone()).map_err(|e| e.to_string()),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            ScheduleSpec::Constant(v) => vec![*v],
            ScheduleSpec::Knots(k) => k.knots.iter().map(|&(_, v)| v).collect(),
        }
    }
}

impl From<f64> for ScheduleSpec {
    fn from(v: f64) -> Self {
        ScheduleSpec::Constant(v)
    }
}

/// The thirteen rates, each a constant or a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(missing_docs)]
pub struct ParamsSpec {
    pub theta_h: ScheduleSpec,
    pub p: ScheduleSpec,
    pub eta1: ScheduleSpec,
    pub eta2: ScheduleSpec,
    pub eta3: ScheduleSpec,
    pub mu_h: ScheduleSpec,
    pub delta_h: ScheduleSpec,
    pub zeta: ScheduleSpec,
    pub gamma_h: ScheduleSpec,
    pub theta_q: ScheduleSpec,
    pub theta_r: ScheduleSpec,
    pub mu_r: ScheduleSpec,
    pub delta_r: ScheduleSpec,
}

impl ParamsSpec {
    fn fields(&self) -> [&ScheduleSpec; 13] {
        [
            &self.theta_h,
            &self.p,
            &self.eta1,
            &self.eta2,
            &self.eta3,
            &self.mu_h,
            &self.delta_h,
            &self.zeta,
            &self.gamma_h,
            &self.theta_q,
            &self.theta_r,
            &self.mu_r,
            &self.delta_r,
        ]
    }
}

impl From<&Params> for ParamsSpec {
    fn from(p: &Params) -> Self {
        ParamsSpec {
            theta_h: p.theta_h.into(),
            p: p.p.into(),
            eta1: p.eta1.into(),
            eta2: p.eta2.into(),
            eta3: p.eta3.into(),
            mu_h: p.mu_h.into(),
            delta_h: p.delta_h.into(),
            zeta: p.zeta.into(),
            gamma_h: p.gamma_h.into(),
            theta_q: p.theta_q.into(),
            theta_r: p.theta_r.into(),
            mu_r: p.mu_r.into(),
            delta_r: p.delta_r.into(),
        }
    }
}

/// Rates and noise intensities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Epidemiological rates.
    pub params: ParamsSpec,
    /// `sigma_1..sigma_8`.
    pub sigma: [ScheduleSpec; N_NOISE],
}

/// Initial compartment sizes, by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(missing_docs)]
pub struct InitSpec {
    pub s_h: f64,
    pub i_h: f64,
    pub q_h: f64,
    pub r_h: f64,
    pub s_r: f64,
    pub i_r: f64,
}

impl From<InitSpec> for State {
    fn from(i: InitSpec) -> Self {
        State::from_array([i.s_h, i.i_h, i.q_h, i.r_h, i.s_r, i.i_r])
    }
}

impl From<State> for InitSpec {
    fn from(s: State) -> Self {
        InitSpec {
            s_h: s.s_h,
            i_h: s.i_h,
            q_h: s.q_h,
            r_h: s.r_h,
            s_r: s.s_r,
            i_r: s.i_r,
        }
    }
}

/// Positivity policy names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[allow(missing_docs)]
pub enum PolicySpec {
    #[default]
    ProjectToZero,
    Reflect,
}

impl From<PolicySpec> for PositivityPolicy {
    fn from(p: PolicySpec) -> Self {
        match p {
            PolicySpec::ProjectToZero => PositivityPolicy::ProjectToZero,
            PolicySpec::Reflect => PositivityPolicy::Reflect,
        }
    }
}

fn default_guard_eps() -> f64 {
    DEFAULT_GUARD_EPS
}

/// Integrator settings and path count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    /// Step size in days.
    pub dt: f64,
    /// Horizon in days.
    pub t_end: f64,
    /// Key of the random stream.
    pub seed: u64,
    /// Handling of negative components.
    #[serde(default)]
    pub positivity_policy: PolicySpec,
    /// Denominator guard.
    #[serde(default = "default_guard_eps")]
    pub guard_eps: f64,
    /// Record every n-th step; chosen automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<u64>,
    /// Number of Monte Carlo paths.
    pub n_paths: u32,
}

/// Lyapunov shape for the growth bound.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LyapunovSpec {
    /// `ln(1 + x)`.
    #[default]
    Log1p,
    /// Sup constants of another shape.
    Custom {
        /// `sup |F'|`.
        sup_abs_f_prime: f64,
        /// `sup x F'`.
        c1_tilde: f64,
        /// `sup x^2 |F''|`.
        c2_tilde: f64,
    },
}

impl From<LyapunovSpec> for Lyapunov {
    fn from(l: LyapunovSpec) -> Self {
        match l {
            LyapunovSpec::Log1p => Lyapunov::Log1p,
            LyapunovSpec::Custom {
                sup_abs_f_prime,
                c1_tilde,
                c2_tilde,
            } => Lyapunov::Custom {
                sup_abs_f_prime,
                c1_tilde,
                c2_tilde,
            },
        }
    }
}

fn default_n_max() -> usize {
    20
}

fn default_tol() -> f64 {
    1e-6
}

/// Diagnostics settings. Absent values get defaults derived from the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Fit window for extinction slopes; defaults to the last three quarters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    /// Upper norm level; defaults to `10 (theta_h/mu_h + theta_r/mu_r)` at `t = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Lower norm level; defaults to `kappa`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    /// Lyapunov shape.
    #[serde(default)]
    pub lyapunov: LyapunovSpec,
    /// Number of series terms.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Terms at or below this count as zero.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Rodent/human ratio bound; the check is skipped when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kbar: Option<f64>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            window: None,
            kappa: None,
            chi: None,
            lyapunov: LyapunovSpec::Log1p,
            n_max: default_n_max(),
            tol: default_tol(),
            kbar: None,
        }
    }
}

fn default_bins() -> usize {
    30
}

/// Which files to write and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Also write every recorded sample of every path.
    #[serde(default)]
    pub paths_csv: bool,
    /// Compartment labels to histogram.
    #[serde(default)]
    pub histograms: Vec<String>,
    /// Histogram bin count.
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Histogram time; defaults to the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_t: Option<f64>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            paths_csv: false,
            histograms: Vec::new(),
            bins: default_bins(),
            histogram_t: None,
        }
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Rates and intensities.
    pub model: ModelSpec,
    /// Initial state.
    pub init: InitSpec,
    /// Integrator settings.
    pub sim: SimSpec,
    /// Diagnostics settings.
    #[serde(default)]
    pub analysis: AnalysisSpec,
    /// Output settings.
    #[serde(default)]
    pub output: OutputSpec,
    /// Free text copied into the analysis report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Malformed document: wrong type, unknown key or missing field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("schema error at {path}: {message}")]
pub struct SchemaError {
    /// JSON path such as `$.sim.dt`.
    pub path: String,
    /// Parser message.
    pub message: String,
}

/// Well-formed document that breaks a model invariant.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("validation error at {path}: requires {invariant}")]
pub struct ValidationError {
    /// JSON path of the offending value.
    pub path: String,
    /// The invariant, e.g. `p in [0, 1]`.
    pub invariant: String,
}

/// Failure of [`parse_config`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    /// See [`SchemaError`].
    #[error(transparent)]
    Schema(#[from] SchemaError),
    /// See [`ValidationError`].
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

fn json_path(path: &serde_path_to_error::Path, message: &str) -> String {
    let mut out = String::from("$");
    for seg in path.iter() {
        match seg {
            serde_path_to_error::Segment::Seq { index } => out.push_str(&format!("[{index}]")),
            serde_path_to_error::Segment::Map { key } => {
                out.push('.');
                out.push_str(key);
            }
            serde_path_to_error::Segment::Enum { variant } => {
                out.push('.');
                out.push_str(variant);
            }
            serde_path_to_error::Segment::Unknown => out.push_str(".?"),
        }
    }
    if let Some(rest) = message.strip_prefix("missing field `") {
        if let Some(end) = rest.find('`') {
            out.push('.');
            out.push_str(&rest[..end]);
        }
    }
    out
}

/// Parses and validates a JSON run specification.
pub fn parse_config(text: &str) -> Result<RunSpec, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: RunSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let message = e.inner().to_string();
        SchemaError {
            path: json_path(e.path(), &message),
            message,
        }
    })?;
    spec.validate()?;
    Ok(spec)
}

fn invalid(path: impl Into<String>, invariant: impl Into<String>) -> ValidationError {
    ValidationError {
        path: path.into(),
        invariant: invariant.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<(), ValidationError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            path,
            format!("{} > 0", path.rsplit('.').next().unwrap_or(path)),
        ))
    }
}

impl RunSpec {
    /// Serializes to pretty JSON that [`parse_config`] reads back unchanged.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run spec serializes")
    }

    /// Checks every invariant of every block.
    pub fn validate(&self) -> Result<(), ValidationError> {
        self.validate_model()?;
        self.validate_init()?;
        self.validate_sim()?;
        self.validate_analysis()?;
        self.validate_output()
    }

    fn validate_model(&self) -> Result<(), ValidationError> {
        for (name, field) in Params::NAMES.iter().zip(self.model.params.fields()) {
            let path = format!("$.model.params.{name}");
            field.build().map_err(|e| invalid(&path, e))?;
            for v in field.values() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(invalid(&path, format!("{name} >= 0")));
                }
                if (*name == "p" || *name == "theta_q") && v > 1.0 {
                    return Err(invalid(&path, format!("{name} in [0, 1]")));
                }
            }
        }
        for (i, field) in self.model.sigma.iter().enumerate() {
            let path = format!("$.model.sigma[{i}]");
            field.build().map_err(|e| invalid(&path, e))?;
            if field.values().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(invalid(&path, format!("sigma_{} >= 0", i + 1)));
            }
        }
        Ok(())
    }

    fn validate_init(&self) -> Result<(), ValidationError> {
        let s = State::from(self.init);
        for c in Compartment::ALL {
            let v = s.get(c);
            if !(v.is_finite() && v >= 0.0) {
                let name = c.label().to_lowercase();
                return Err(invalid(format!("$.init.{name}"), format!("{name} >= 0")));
            }
        }
        if !(s.human_total() > 0.0) {
            return Err(invalid("$.init", "s_h + i_h + q_h + r_h > 0"));
        }
        Ok(())
    }

    fn validate_sim(&self) -> Result<(), ValidationError> {
        let sim = &self.sim;
        positive("$.sim.dt", sim.dt)?;
        if !(sim.t_end.is_finite() && sim.t_end >= sim.dt) {
            return Err(invalid("$.sim.t_end", "t_end >= dt"));
        }
        positive("$.sim.guard_eps", sim.guard_eps)?;
        if sim.record_stride == Some(0) {
            return Err(invalid("$.sim.record_stride", "record_stride >= 1"));
        }
        if sim.n_paths == 0 {
            return Err(invalid("$.sim.n_paths", "n_paths >= 1"));
        }
        if (sim.t_end / sim.dt).round() > MAX_STEPS as f64 {
            return Err(invalid("$.sim", format!("t_end / dt <= {MAX_STEPS}")));
        }
        Ok(())
    }

    fn validate_analysis(&self) -> Result<(), ValidationError> {
        let a = &self.analysis;
        if let Some((lo, hi)) = a.window {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= self.sim.t_end) {
                return Err(invalid(
                    "$.analysis.window",
                    "0 <= window[0] < window[1] <= t_end",
                ));
            }
        }
        if let Some(k) = a.kappa {
            positive("$.analysis.kappa", k)?;
        }
        if let Some(c) = a.chi {
            positive("$.analysis.chi", c)?;
        }
        if let Some(k) = a.kbar {
            positive("$.analysis.kbar", k)?;
        }
        if let LyapunovSpec::Custom {
            sup_abs_f_prime,
            c1_tilde,
            c2_tilde,
        } = a.lyapunov
        {
            if [sup_abs_f_prime, c1_tilde, c2_tilde]
                .iter()
                .any(|v| !(v.is_finite() && *v >= 0.0))
            {
                return Err(invalid("$.analysis.lyapunov.custom", "sup constants >= 0"));
            }
        }
        if a.n_max < 4 {
            return Err(invalid("$.analysis.n_max", "n_max >= 4"));
        }
        if !(a.tol.is_finite() && a.tol >= 0.0) {
            return Err(invalid("$.analysis.tol", "tol >= 0"));
        }
        Ok(())
    }

    fn validate_output(&self) -> Result<(), ValidationError> {
        let o = &self.output;
        for (i, label) in o.histograms.iter().enumerate() {
            if Compartment::from_label(label).is_none() {
                return Err(invalid(
                    format!("$.output.histograms[{i}]"),
                    "one of S_h, I_h, Q_h, R_h, S_r, I_r",
                ));
            }
        }
        if o.bins == 0 {
            return Err(invalid("$.output.bins", "bins >= 1"));
        }
        if let Some(t) = o.histogram_t {
            if !(t.is_finite() && (0.0..=self.sim.t_end).contains(&t)) {
                return Err(invalid("$.output.histogram_t", "0 <= histogram_t <= t_end"));
            }
        }
        Ok(())
    }

    /// Rates and intensities as schedules.
    pub fn schedule(&self) -> ParamSchedule {
        let build = |s: &ScheduleSpec| s.build().expect("validated schedule");
        let rates = self.model.params.fields().map(build);
        let sigmas = std::array::from_fn(|i| build(&self.model.sigma[i]));
        ParamSchedule::new(rates, sigmas)
    }

    /// Initial state.
    pub fn initial_state(&self) -> State {
        self.init.into()
    }

    /// Integrator settings with the stride resolved.
    pub fn sim_config(&self) -> SimConfig {
        let sim = &self.sim;
        let n_steps = (sim.t_end / sim.dt).round() as u64;
        let record_stride = sim
            .record_stride
            .unwrap_or_else(|| n_steps.div_ceil(AUTO_MAX_SAMPLES).max(1));
        SimConfig {
            dt: sim.dt,
            t_end: sim.t_end,
            seed: sim.seed,
            positivity_policy: sim.positivity_policy.into(),
            guard_eps: sim.guard_eps,
            record_stride,
        }
    }

    /// Extinction fit window with the default applied.
    pub fn window(&self) -> (f64, f64) {
        self.analysis
            .window
            .unwrap_or((0.25 * self.sim.t_end, self.sim.t_end))
    }

    /// `kappa` with the default applied.
    pub fn kappa(&self) -> f64 {
        self.analysis.kappa.unwrap_or_else(|| {
            let (p, _) = self.schedule().eval(0.0);
            10.0 * (p.theta_h / p.mu_h.max(f64::MIN_POSITIVE)
                + p.theta_r / p.mu_r.max(f64::MIN_POSITIVE))
        })
    }

    /// `chi` with the default applied.
    pub fn chi(&self) -> f64 {
        self.analysis.chi.unwrap_or_else(|| self.kappa())
    }

    /// Histogram time with the default applied.
    pub fn histogram_t(&self) -> f64 {
        self.output.histogram_t.unwrap_or(self.sim.t_end)
    }
}
