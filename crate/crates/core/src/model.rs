//! Domain types and the coefficient functions of the six-compartment,
//! eight-noise transmission model.
//!
//! Compartments are ordered `(S_h, I_h, Q_h, R_h, S_r, I_r)` everywhere:
//! in [`State::to_array`], in the rows of [`DriftVector`] and
//! [`DiffusionMatrix`], and in every output the crate produces.

use core::fmt;

use crate::engine::Path;
use crate::error::DomainError;

/// Default lower bound on `N_h` (and on `N_r` when `I_r > 0`) below which
/// the incidence denominators are considered broken.
pub const DEFAULT_GUARD_EPS: f64 = 1e-12;

/// Number of compartments.
pub const N_COMPARTMENTS: usize = 6;
/// Number of independent Brownian sources.
pub const N_NOISE: usize = 8;

/// One of the six compartments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Compartment {
    /// Susceptible humans.
    SusceptibleHumans,
    /// Infected humans.
    InfectedHumans,
    /// Quarantined (isolated) humans.
    QuarantinedHumans,
    /// Recovered humans.
    RecoveredHumans,
    /// Susceptible rodents.
    SusceptibleRodents,
    /// Infected rodents.
    InfectedRodents,
}

impl Compartment {
    /// All compartments in canonical order.
    pub const ALL: [Compartment; N_COMPARTMENTS] = [
        Compartment::SusceptibleHumans,
        Compartment::InfectedHumans,
        Compartment::QuarantinedHumans,
        Compartment::RecoveredHumans,
        Compartment::SusceptibleRodents,
        Compartment::InfectedRodents,
    ];

    /// Position in the canonical ordering.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Short label used in files (`S_h`, `I_h`, ...).
    pub fn label(self) -> &'static str {
        match self {
            Compartment::SusceptibleHumans => "S_h",
            Compartment::InfectedHumans => "I_h",
            Compartment::QuarantinedHumans => "Q_h",
            Compartment::RecoveredHumans => "R_h",
            Compartment::SusceptibleRodents => "S_r",
            Compartment::InfectedRodents => "I_r",
        }
    }

    /// Inverse of [`Compartment::label`].
    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == label)
    }
}

impl fmt::Display for Compartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The thirteen epidemiological rate constants.
///
/// `theta_q` is the quarantine/treatment effectiveness; disease deaths in
/// the quarantined class happen at rate `(1 - theta_q) * delta_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Human recruitment rate [individuals/day].
    pub theta_h: f64,
    /// Enlightenment campaign effectiveness, in `[0, 1]`.
    pub p: f64,
    /// Rodent-to-human contact rate.
    pub eta1: f64,
    /// Human-to-human contact rate.
    pub eta2: f64,
    /// Rodent-to-rodent contact rate.
    pub eta3: f64,
    /// Human natural death rate.
    pub mu_h: f64,
    /// Human disease death rate.
    pub delta_h: f64,
    /// Progression rate from infected to quarantine.
    pub zeta: f64,
    /// Recovery rate of quarantined humans.
    pub gamma_h: f64,
    /// Quarantine/treatment effectiveness, in `[0, 1]`.
    pub theta_q: f64,
    /// Rodent recruitment rate [individuals/day].
    pub theta_r: f64,
    /// Rodent natural death rate.
    pub mu_r: f64,
    /// Rodent disease death rate.
    pub delta_r: f64,
}

impl Params {
    /// Field names in declaration order.
    pub const NAMES: [&'static str; 13] = [
        "theta_h", "p", "eta1", "eta2", "eta3", "mu_h", "delta_h", "zeta", "gamma_h", "theta_q",
        "theta_r", "mu_r", "delta_r",
    ];

    /// Values in the order of [`Params::NAMES`].
    pub fn to_array(&self) -> [f64; 13] {
        [
            self.theta_h,
            self.p,
            self.eta1,
            self.eta2,
            self.eta3,
            self.mu_h,
            self.delta_h,
            self.zeta,
            self.gamma_h,
            self.theta_q,
            self.theta_r,
            self.mu_r,
            self.delta_r,
        ]
    }

    /// Inverse of [`Params::to_array`].
    pub fn from_array(v: [f64; 13]) -> Self {
        Params {
            theta_h: v[0],
            p: v[1],
            eta1: v[2],
            eta2: v[3],
            eta3: v[4],
            mu_h: v[5],
            delta_h: v[6],
            zeta: v[7],
            gamma_h: v[8],
            theta_q: v[9],
            theta_r: v[10],
            mu_r: v[11],
            delta_r: v[12],
        }
    }

    /// Rates of the low-rodent-transmission scenario (`eta3 = 0.0027`, R0 < 1).
    pub fn table2() -> Self {
        Params {
            theta_h: 10.0,
            p: 0.041,
            eta1: 0.009,
            eta2: 0.002,
            eta3: 0.0027,
            mu_h: 0.05,
            delta_h: 0.003,
            zeta: 0.5,
            gamma_h: 0.2,
            theta_q: 0.043,
            theta_r: 10.0,
            mu_r: 0.02,
            delta_r: 0.004,
        }
    }

    /// Rates of the high-rodent-transmission scenario (`eta3 = 0.027`, R0 > 1).
    pub fn table3() -> Self {
        Params {
            eta3: 0.027,
            ..Self::table2()
        }
    }

    /// Checks every range invariant.
    pub fn validate(&self) -> Result<(), DomainError> {
        for (name, value) in Self::NAMES.into_iter().zip(self.to_array()) {
            if !value.is_finite() || value < 0.0 {
                return Err(DomainError::InvalidParameter { name, value });
            }
        }
        for (name, value) in [("p", self.p), ("theta_q", self.theta_q)] {
            if value > 1.0 {
                return Err(DomainError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// Intensities `sigma_1..sigma_8` of the eight Brownian sources.
///
/// Index 0 holds `sigma_1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseIntensities(pub [f64; N_NOISE]);

impl NoiseIntensities {
    /// No noise at all.
    pub const ZERO: NoiseIntensities = NoiseIntensities([0.0; N_NOISE]);

    /// Intensities shared by both preset scenarios.
    pub fn example() -> Self {
        NoiseIntensities([0.05, 0.04, 0.01, 0.05, 0.04, 0.01, 0.05, 0.04])
    }

    /// `sigma_i` with the 1-based index of the model.
    pub fn sigma(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    /// Checks `sigma_i >= 0`.
    pub fn validate(&self) -> Result<(), DomainError> {
        for (i, &value) in self.0.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(DomainError::InvalidParameter {
                    name: SIGMA_NAMES[i],
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Names of the noise intensities.
pub const SIGMA_NAMES: [&str; N_NOISE] = [
    "sigma1", "sigma2", "sigma3", "sigma4", "sigma5", "sigma6", "sigma7", "sigma8",
];

/// Compartment sizes (continuous).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    /// Susceptible humans.
    pub s_h: f64,
    /// Infected humans.
    pub i_h: f64,
    /// Quarantined humans.
    pub q_h: f64,
    /// Recovered humans.
    pub r_h: f64,
    /// Susceptible rodents.
    pub s_r: f64,
    /// Infected rodents.
    pub i_r: f64,
}

impl State {
    /// Builds a state from values in canonical order.
    pub fn from_array(v: [f64; N_COMPARTMENTS]) -> Self {
        State {
            s_h: v[0],
            i_h: v[1],
            q_h: v[2],
            r_h: v[3],
            s_r: v[4],
            i_r: v[5],
        }
    }

    /// Values in canonical order.
    pub fn to_array(&self) -> [f64; N_COMPARTMENTS] {
        [self.s_h, self.i_h, self.q_h, self.r_h, self.s_r, self.i_r]
    }

    /// Initial state shared by both preset scenarios.
    pub fn example() -> Self {
        State {
            s_h: 90.0,
            i_h: 60.0,
            q_h: 50.0,
            r_h: 70.0,
            s_r: 80.0,
            i_r: 30.0,
        }
    }

    /// Value of one compartment.
    pub fn get(&self, c: Compartment) -> f64 {
        self.to_array()[c.index()]
    }

    /// `N_h = S_h + I_h + Q_h + R_h`.
    pub fn human_total(&self) -> f64 {
        self.s_h + self.i_h + self.q_h + self.r_h
    }

    /// `N_r = S_r + I_r`.
    pub fn rodent_total(&self) -> f64 {
        self.s_r + self.i_r
    }

    /// `K = N_h + N_r`.
    pub fn total(&self) -> f64 {
        self.human_total() + self.rodent_total()
    }

    /// Infected mass `I_h + Q_h + I_r` tracked by the extinction results.
    pub fn infected_total(&self) -> f64 {
        self.i_h + self.q_h + self.i_r
    }

    /// Euclidean norm of the 6-vector.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.to_array().iter().map(|x| x * x).sum())
    }

    /// Checks that every component is finite and non-negative.
    pub fn validate(&self) -> Result<(), DomainError> {
        for (compartment, value) in self.to_array().into_iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(DomainError::InvalidState { compartment, value });
            }
        }
        Ok(())
    }
}

/// Deterministic rates per compartment, canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftVector(pub [f64; N_COMPARTMENTS]);

impl DriftVector {
    /// Component for one compartment.
    pub fn get(&self, c: Compartment) -> f64 {
        self.0[c.index()]
    }
}

/// 6x8 diffusion coefficients; column `j` multiplies `dB_{j+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(pub [[f64; N_NOISE]; N_COMPARTMENTS]);

impl DiffusionMatrix {
    /// Entry for a compartment row and a 1-based Brownian source.
    pub fn entry(&self, row: Compartment, source: usize) -> f64 {
        self.0[row.index()][source - 1]
    }

    /// `G * dW`.
    pub fn apply(&self, dw: &[f64; N_NOISE]) -> [f64; N_COMPARTMENTS] {
        let mut out = [0.0; N_COMPARTMENTS];
        for (o, row) in out.iter_mut().zip(self.0.iter()) {
            *o = row.iter().zip(dw).map(|(g, w)| g * w).sum();
        }
        out
    }
}

fn check_denominators(state: &State, guard_eps: f64) -> Result<(f64, f64), DomainError> {
    let n_h = state.human_total();
    if !(n_h >= guard_eps) {
        return Err(DomainError::HumanPopulationVanished { n_h });
    }
    let n_r = state.rodent_total();
    if !(n_r >= guard_eps) && state.i_r > 0.0 {
        return Err(DomainError::RodentPopulationVanished {
            n_r,
            i_r: state.i_r,
        });
    }
    Ok((n_h, n_r))
}

/// Drift with the default denominator guard.
pub fn drift(state: &State, params: &Params) -> Result<DriftVector, DomainError> {
    drift_guarded(state, params, DEFAULT_GUARD_EPS)
}

/// Deterministic rates of the model.
///
/// The human force of infection is `(1-p)(eta1*I_r + eta2*I_h)/N_h` applied
/// to `S_h`; rodent incidence is `eta3*S_r*I_r/N_r`, taken as zero when
/// `N_r` is below the guard and `I_r = 0`.
pub fn drift_guarded(
    state: &State,
    params: &Params,
    guard_eps: f64,
) -> Result<DriftVector, DomainError> {
    let (n_h, n_r) = check_denominators(state, guard_eps)?;
    let &State {
        s_h,
        i_h,
        q_h,
        r_h,
        s_r,
        i_r,
    } = state;
    let pr = params;

    let force = (1.0 - pr.p) * (pr.eta1 * i_r + pr.eta2 * i_h) / n_h;
    let human_incidence = force * s_h;
    let rodent_incidence = if n_r >= guard_eps {
        pr.eta3 * s_r * i_r / n_r
    } else {
        0.0
    };

    Ok(DriftVector([
        pr.theta_h - human_incidence - pr.mu_h * s_h,
        human_incidence - (pr.mu_h + pr.delta_h + pr.zeta) * i_h,
        pr.zeta * i_h - (pr.mu_h + pr.gamma_h + (1.0 - pr.theta_q) * pr.delta_h) * q_h,
        pr.gamma_h * q_h - pr.mu_h * r_h,
        pr.theta_r - rodent_incidence - pr.mu_r * s_r,
        rodent_incidence - (pr.mu_r + pr.delta_r) * i_r,
    ]))
}

/// Diffusion with the default denominator guard.
pub fn diffusion(
    state: &State,
    params: &Params,
    sigmas: &NoiseIntensities,
) -> Result<DiffusionMatrix, DomainError> {
    diffusion_guarded(state, params, sigmas, DEFAULT_GUARD_EPS)
}

/// Diffusion coefficients of the model.
///
/// `B_1` enters only the `S_h` row (there is no matching `I_h` term) and
/// `B_2` enters `S_h` and `I_h` with opposite signs. Every other source is
/// a multiplicative noise on its own compartment.
pub fn diffusion_guarded(
    state: &State,
    params: &Params,
    sigmas: &NoiseIntensities,
    guard_eps: f64,
) -> Result<DiffusionMatrix, DomainError> {
    let (n_h, _) = check_denominators(state, guard_eps)?;
    let s = &sigmas.0;
    let damp = 1.0 - params.p;

    let rodent_contact = damp * s[0] * state.i_r * state.s_h / n_h;
    let human_contact = damp * s[1] * state.i_h * state.s_h / n_h;

    let mut g = [[0.0; N_NOISE]; N_COMPARTMENTS];
    g[0][0] = -rodent_contact;
    g[0][1] = -human_contact;
    g[0][2] = s[2] * state.s_h;
    g[1][1] = human_contact;
    g[1][3] = s[3] * state.i_h;
    g[2][4] = s[4] * state.q_h;
    g[3][5] = s[5] * state.r_h;
    g[4][6] = s[6] * state.s_r;
    g[5][7] = s[7] * state.i_r;
    Ok(DiffusionMatrix(g))
}

/// Outcome of [`check_hr`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrReport {
    /// Largest `N_r / N_h` over the recorded samples.
    pub max_ratio: f64,
    /// `max_ratio <= kbar`.
    pub satisfied: bool,
}

/// Checks the rodent/human ratio bound `N_r <= kbar * N_h` along a path.
pub fn check_hr(path: &Path, kbar: f64) -> Result<HrReport, DomainError> {
    if path.states.is_empty() {
        return Err(DomainError::InsufficientData {
            found: 0,
            required: 1,
        });
    }
    let mut max_ratio = 0.0f64;
    for s in &path.states {
        let n_h = s.human_total();
        if !(n_h > 0.0) {
            return Err(DomainError::HumanPopulationVanished { n_h });
        }
        max_ratio = max_ratio.max(s.rodent_total() / n_h);
    }
    Ok(HrReport {
        max_ratio,
        satisfied: max_ratio <= kbar,
    })
}
