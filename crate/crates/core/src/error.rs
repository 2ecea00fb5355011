use core::fmt;

/// Evaluation of the model left its domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainError {
    /// Total human population fell below the denominator guard.
    HumanPopulationVanished {
        /// N_h at the failing evaluation.
        n_h: f64,
    },
    /// Rodent population fell below the guard while infected rodents remain.
    RodentPopulationVanished {
        /// N_r at the failing evaluation.
        n_r: f64,
        /// I_r at the failing evaluation.
        i_r: f64,
    },
    /// A compartment was negative or not finite.
    InvalidState {
        /// Index of the offending compartment.
        compartment: usize,
        /// Its value.
        value: f64,
    },
    /// A parameter violated its range invariant.
    InvalidParameter {
        /// Parameter name.
        name: &'static str,
        /// Its value.
        value: f64,
    },
    /// A threshold denominator was zero.
    ZeroDenominator,
    /// The time-averaged maximum mortality rate was not positive.
    NonPositiveMortality,
    /// A window or sample set held too few points.
    InsufficientData {
        /// Samples found.
        found: usize,
        /// Samples required.
        required: usize,
    },
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainError::HumanPopulationVanished { n_h } => {
                write!(
                    f,
                    "human population N_h = {n_h} is below the denominator guard"
                )
            }
            DomainError::RodentPopulationVanished { n_r, i_r } => write!(
                f,
                "rodent population N_r = {n_r} is below the denominator guard with I_r = {i_r}"
            ),
            DomainError::InvalidState { compartment, value } => {
                write!(f, "compartment {compartment} has invalid value {value}")
            }
            DomainError::InvalidParameter { name, value } => {
                write!(f, "parameter {name} = {value} is out of range")
            }
            DomainError::ZeroDenominator => {
                write!(f, "min(mu_h, mu_r) + min(delta_h, delta_r) is zero")
            }
            DomainError::NonPositiveMortality => {
                write!(f, "time-averaged max(mu_h, mu_r) must be positive")
            }
            DomainError::InsufficientData { found, required } => {
                write!(f, "insufficient data: {found} samples, need {required}")
            }
        }
    }
}

impl core::error::Error for DomainError {}

/// A path aborted by a [`DomainError`] at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimError {
    /// Simulation time of the failing step.
    pub time: f64,
    /// Underlying cause.
    pub source: DomainError,
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at t = {}: {}", self.time, self.source)
    }
}

impl core::error::Error for SimError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.source)
    }
}
