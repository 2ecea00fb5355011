//! Threshold and long-run diagnostics: the extinction number R0, empirical
//! extinction rates, the averaged extinction condition for time-varying
//! rates, the growth-rate bound, the noise series condition and
//! boundedness tail probabilities.
//!
//! Every time average over piecewise-linear schedules is computed in closed
//! form (see [`crate::schedule`]); constant schedules reduce to plain
//! arithmetic on the constants.

use alloc::vec::Vec;

use crate::ensemble::EnsembleResult;
use crate::error::DomainError;
use crate::model::Params;
use crate::schedule::{average_exact, integrate_exact, ParamSchedule, Rate, Schedule};

/// Distance from 1 within which R0 is reported as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;

/// Position of R0 relative to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// R0 < 1.
    Subcritical,
    /// R0 within [`CRITICAL_TOLERANCE`] of 1.
    Critical,
    /// R0 > 1.
    Supercritical,
}

impl Regime {
    /// Lower-case name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        }
    }

    fn classify(r0: f64) -> Self {
        if (r0 - 1.0).abs() <= CRITICAL_TOLERANCE {
            Regime::Critical
        } else if r0 < 1.0 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }
}

/// R0 with its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    /// `numerator / denominator`.
    pub r0: f64,
    /// `(1-p)(eta1+eta2) + eta3`.
    pub numerator: f64,
    /// `min(mu_h, mu_r) + min(delta_h, delta_r)`.
    pub denominator: f64,
    /// Classification of `r0`.
    pub regime: Regime,
}

#[inline]
fn transmission(p: f64, eta1: f64, eta2: f64, eta3: f64) -> f64 {
    (1.0 - p) * (eta1 + eta2) + eta3
}

#[inline]
fn removal(mu_h: f64, mu_r: f64, delta_h: f64, delta_r: f64) -> f64 {
    mu_h.min(mu_r) + delta_h.min(delta_r)
}

/// Extinction threshold for constant rates.
///
/// `R0 = ((1-p)(eta1+eta2) + eta3) / (min(mu_h,mu_r) + min(delta_h,delta_r))`;
/// R0 < 1 drives `I_h + Q_h + I_r` to zero almost surely.
pub fn r0_constant(params: &Params) -> Result<ThresholdReport, DomainError> {
    let numerator = transmission(params.p, params.eta1, params.eta2, params.eta3);
    let denominator = removal(params.mu_h, params.mu_r, params.delta_h, params.delta_r);
    if !(denominator > 0.0) {
        return Err(DomainError::ZeroDenominator);
    }
    let r0 = numerator / denominator;
    Ok(ThresholdReport {
        r0,
        numerator,
        denominator,
        regime: Regime::classify(r0),
    })
}

/// Least-squares slope of `ys` against `ts`.
pub fn least_squares_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(ys) {
        let dt = t - t_mean;
        sxy += dt * (y - y_mean);
        sxx += dt * dt;
    }
    sxy / sxx
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Empirical exponential decay rate of the infected mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionRate {
    /// `(path_index, slope)` for every path that stayed positive in the window.
    pub slope_per_path: Vec<(u32, f64)>,
    /// Paths excluded because the infected mass hit zero inside the window.
    pub excluded: Vec<u32>,
    /// Median of the per-path slopes.
    pub median_slope: f64,
    /// `(min mu + min delta)(R0 - 1)`, the almost-sure upper bound.
    pub theory_bound: f64,
}

/// Per-path least-squares slope of `ln(I_h + Q_h + I_r)` over `window`.
pub fn extinction_rate(
    ensemble: &EnsembleResult,
    params: &Params,
    window: (f64, f64),
) -> Result<ExtinctionRate, DomainError> {
    let (t_lo, t_hi) = window;
    let idx: Vec<usize> = ensemble
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= t_lo && t <= t_hi)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 3 {
        return Err(DomainError::InsufficientData {
            found: idx.len(),
            required: 3,
        });
    }
    let ts: Vec<f64> = idx.iter().map(|&i| ensemble.times[i]).collect();

    let mut slope_per_path = Vec::with_capacity(ensemble.paths.len());
    let mut excluded = Vec::new();
    let mut ys = Vec::with_capacity(idx.len());
    for path in &ensemble.paths {
        ys.clear();
        let mut positive = true;
        for &i in &idx {
            let mass = path.states[i].infected_total();
            if !(mass > 0.0) {
                positive = false;
                break;
            }
            ys.push(libm::log(mass));
        }
        if positive {
            slope_per_path.push((path.path_index, least_squares_slope(&ts, &ys)));
        } else {
            excluded.push(path.path_index);
        }
    }
    if slope_per_path.is_empty() {
        return Err(DomainError::InsufficientData {
            found: 0,
            required: 1,
        });
    }
    let mut slopes: Vec<f64> = slope_per_path.iter().map(|&(_, s)| s).collect();
    let threshold = r0_constant(params)?;
    Ok(ExtinctionRate {
        median_slope: median(&mut slopes),
        theory_bound: threshold.denominator * (threshold.r0 - 1.0),
        slope_per_path,
        excluded,
    })
}

/// Averaged extinction condition for time-varying rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorReport {
    /// Average of `(1-p)(eta1+eta2) + eta3` over `[0, T]`.
    pub lhs_avg: f64,
    /// Average of `min(mu_h,mu_r) + min(delta_h,delta_r)` over `[0, T]`.
    pub rhs_avg: f64,
    /// `lhs_avg < rhs_avg`.
    pub satisfied: bool,
}

/// Compares the averaged transmission and removal rates over `[0, horizon]`.
///
/// For constant schedules this is exactly `numerator < denominator` of
/// [`r0_constant`].
pub fn timevarying_extinction_indicator(schedule: &ParamSchedule, horizon: f64) -> IndicatorReport {
    let [p, e1, e2, e3] = [Rate::P, Rate::Eta1, Rate::Eta2, Rate::Eta3].map(|r| schedule.rate(r));
    let [mh, mr, dh, dr] =
        [Rate::MuH, Rate::MuR, Rate::DeltaH, Rate::DeltaR].map(|r| schedule.rate(r));

    let lhs_avg = average_exact(&[p, e1, e2, e3], &[], horizon, |t| {
        transmission(p.eval(t), e1.eval(t), e2.eval(t), e3.eval(t))
    });
    let rhs_avg = average_exact(&[mh, mr, dh, dr], &[(mh, mr), (dh, dr)], horizon, |t| {
        removal(mh.eval(t), mr.eval(t), dh.eval(t), dr.eval(t))
    });
    IndicatorReport {
        lhs_avg,
        rhs_avg,
        satisfied: lhs_avg < rhs_avg,
    }
}

/// Increasing Lyapunov shape `F` of the total population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lyapunov {
    /// `F(x) = ln(1 + x)`: `sup|F'| = 1`, `sup x F' = 1`, `sup x^2 |F''| = 1`.
    Log1p,
    /// User-supplied sup constants of some other shape.
    Custom {
        /// `sup |F'(x)|` over `x >= 0`.
        sup_abs_f_prime: f64,
        /// `sup x F'(x)`.
        c1_tilde: f64,
        /// `sup x^2 |F''(x)|`.
        c2_tilde: f64,
    },
}

impl Lyapunov {
    fn constants(self) -> (f64, f64, f64) {
        match self {
            Lyapunov::Log1p => (1.0, 1.0, 1.0),
            Lyapunov::Custom {
                sup_abs_f_prime,
                c1_tilde,
                c2_tilde,
            } => (sup_abs_f_prime, c1_tilde, c2_tilde),
        }
    }

    /// `F(x)` when the shape is known.
    pub fn value(self, x: f64) -> Option<f64> {
        match self {
            Lyapunov::Log1p => Some(libm::log1p(x)),
            Lyapunov::Custom { .. } => None,
        }
    }
}

/// Constants of the almost-sure growth bound on `F(K(t))/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBoundReport {
    /// `sup|F'|` times the average of `theta_h + theta_r`.
    pub a: f64,
    /// Average of `max(mu_h, mu_r)`.
    pub b: f64,
    /// Average of `(2 - theta_q) delta_h + delta_r`.
    pub c: f64,
    /// Average of `sigma_1^2 + 2 sigma_2^2`.
    pub d: f64,
    /// `sup x F'(x)`.
    pub c1_tilde: f64,
    /// `sup x^2 |F''(x)|`.
    pub c2_tilde: f64,
    /// `(1-p)^2`, taken at the smallest `p` of the schedule.
    pub one_minus_p_sq: f64,
    /// `a + 3 c1 (2b + c) + (1-p)^2 c2 d`.
    pub bound: f64,
}

/// Growth-rate bound over `[0, horizon]`.
pub fn growth_bound(
    schedule: &ParamSchedule,
    horizon: f64,
    lyapunov: Lyapunov,
) -> Result<GrowthBoundReport, DomainError> {
    let (sup_f_prime, c1_tilde, c2_tilde) = lyapunov.constants();
    let [th, tr, mh, mr, dh, dr, tq, p] = [
        Rate::ThetaH,
        Rate::ThetaR,
        Rate::MuH,
        Rate::MuR,
        Rate::DeltaH,
        Rate::DeltaR,
        Rate::ThetaQ,
        Rate::P,
    ]
    .map(|r| schedule.rate(r));
    let (s1, s2) = (schedule.sigma(1), schedule.sigma(2));

    let a = sup_f_prime * average_exact(&[th, tr], &[], horizon, |t| th.eval(t) + tr.eval(t));
    let b = average_exact(&[mh, mr], &[(mh, mr)], horizon, |t| {
        mh.eval(t).max(mr.eval(t))
    });
    if !(b > 0.0) {
        return Err(DomainError::NonPositiveMortality);
    }
    let c = average_exact(&[tq, dh, dr], &[], horizon, |t| {
        (2.0 - tq.eval(t)) * dh.eval(t) + dr.eval(t)
    });
    let d = average_exact(&[s1, s2], &[], horizon, |t| {
        let (x, y) = (s1.eval(t), s2.eval(t));
        x * x + 2.0 * y * y
    });
    let damp = 1.0 - p.value_range().0;
    let one_minus_p_sq = damp * damp;
    Ok(GrowthBoundReport {
        a,
        b,
        c,
        d,
        c1_tilde,
        c2_tilde,
        one_minus_p_sq,
        bound: a + 3.0 * c1_tilde * (2.0 * b + c) + one_minus_p_sq * c2_tilde * d,
    })
}

/// Largest `F(K(t))/t` over recorded samples with `t` in `window`, across
/// every path. `None` when the shape has no closed form or no sample fits.
pub fn empirical_growth(
    ensemble: &EnsembleResult,
    lyapunov: Lyapunov,
    window: (f64, f64),
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for path in &ensemble.paths {
        for (t, s) in path.times.iter().zip(&path.states) {
            if *t >= window.0 && *t <= window.1 && *t > 0.0 {
                let v = lyapunov.value(s.total())? / t;
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
    }
    best
}

/// Verdict of [`xi_series_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesClass {
    /// Terms vanish or shrink geometrically.
    Convergent,
    /// Neither test is decisive.
    Inconclusive,
    /// Terms do not decrease.
    Divergent,
}

impl SeriesClass {
    /// Lower-case name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesClass::Convergent => "convergent",
            SeriesClass::Inconclusive => "inconclusive",
            SeriesClass::Divergent => "divergent",
        }
    }
}

/// Partial sums of the noise series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    /// `term_k = 4^-k * int_0^{2^(k+1)} Xi(s) ds`, `k = 1..=n_max`.
    pub terms: Vec<f64>,
    /// Running sums of `terms`.
    pub partial_sums: Vec<f64>,
    /// Heuristic verdict.
    pub classification: SeriesClass,
}

/// Ratio of the last two terms below which the series counts as convergent.
pub const GEOMETRIC_RATIO: f64 = 0.9;

/// Series condition on `Xi(s) = max_j sigma_j(s)` over the given schedules.
///
/// Terms at or below `tol` count as zero. Otherwise the series is
/// convergent when the last two terms shrink by a factor below
/// [`GEOMETRIC_RATIO`], divergent when the last three terms are
/// non-decreasing, and inconclusive in between.
pub fn xi_series_check(
    sigma_schedules: &[&Schedule],
    n_max: usize,
    tol: f64,
) -> Result<SeriesReport, DomainError> {
    if n_max < 4 {
        return Err(DomainError::InsufficientData {
            found: n_max,
            required: 4,
        });
    }
    let mut pairs = Vec::new();
    for (i, a) in sigma_schedules.iter().enumerate() {
        for b in &sigma_schedules[i + 1..] {
            pairs.push((*a, *b));
        }
    }
    let xi = |t: f64| {
        sigma_schedules
            .iter()
            .map(|s| s.eval(t))
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    };

    let mut terms = Vec::with_capacity(n_max);
    let mut partial_sums = Vec::with_capacity(n_max);
    let mut sum = 0.0;
    for k in 1..=n_max {
        let upper = libm::ldexp(1.0, k as i32 + 1);
        let integral = integrate_exact(sigma_schedules, &pairs, 0.0, upper, xi);
        let term = libm::ldexp(integral, -2 * k as i32);
        sum += term;
        terms.push(term);
        partial_sums.push(sum);
    }

    let n = terms.len();
    let (t3, t2, t1) = (terms[n - 3], terms[n - 2], terms[n - 1]);
    let classification = if t1 <= tol || t1 < GEOMETRIC_RATIO * t2 {
        SeriesClass::Convergent
    } else if t3 <= t2 && t2 <= t1 {
        SeriesClass::Divergent
    } else {
        SeriesClass::Inconclusive
    };
    Ok(SeriesReport {
        terms,
        partial_sums,
        classification,
    })
}

/// [`xi_series_check`] on `sigma_3..sigma_8` of a schedule.
pub fn xi_series_check_schedule(
    schedule: &ParamSchedule,
    n_max: usize,
    tol: f64,
) -> Result<SeriesReport, DomainError> {
    let sigmas: Vec<&Schedule> = (3..=8).map(|i| schedule.sigma(i)).collect();
    xi_series_check(&sigmas, n_max, tol)
}

/// Tail probabilities of the state norm over the last quarter of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundednessReport {
    /// Empirical `P(|X| > kappa)`.
    pub p_exceed_kappa: f64,
    /// Empirical `P(|X| >= kappa)`.
    pub p_below_kappa_floor: f64,
    /// Empirical `P(|X| <= chi)`.
    pub p_within_chi: f64,
    /// Pooled samples.
    pub samples: usize,
}

/// Pools every sample with `t >= 0.75 * t_last` across paths.
pub fn boundedness_stats(ensemble: &EnsembleResult, kappa: f64, chi: f64) -> BoundednessReport {
    let t_last = ensemble.times.last().copied().unwrap_or(0.0);
    let start = ensemble.times.partition_point(|&t| t < 0.75 * t_last);
    let (mut above, mut at_or_above, mut within, mut samples) = (0usize, 0usize, 0usize, 0usize);
    for path in &ensemble.paths {
        for s in &path.states[start..] {
            let norm = s.norm();
            above += usize::from(norm > kappa);
            at_or_above += usize::from(norm >= kappa);
            within += usize::from(norm <= chi);
            samples += 1;
        }
    }
    let frac = |k: usize| {
        if samples == 0 {
            0.0
        } else {
            k as f64 / samples as f64
        }
    };
    BoundednessReport {
        p_exceed_kappa: frac(above),
        p_below_kappa_floor: frac(at_or_above),
        p_within_chi: frac(within),
        samples,
    }
}
