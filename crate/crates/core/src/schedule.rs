//! Piecewise-linear parameter schedules for the time-varying model, and
//! closed-form integration of expressions built from them.

use alloc::vec::Vec;
use core::fmt;

use crate::error::DomainError;
use crate::model::{NoiseIntensities, Params, N_NOISE};

/// Invalid schedule construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleError {
    /// No knots were given.
    Empty,
    /// Knot times are not strictly increasing.
    NotIncreasing {
        /// Index of the offending knot.
        index: usize,
    },
    /// A knot time or value is NaN or infinite.
    NonFinite {
        /// Index of the offending knot.
        index: usize,
    },
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::Empty => f.write_str("schedule has no knots"),
            ScheduleError::NotIncreasing { index } => {
                write!(
                    f,
                    "knot {index} does not strictly follow the previous knot time"
                )
            }
            ScheduleError::NonFinite { index } => write!(f, "knot {index} is not finite"),
        }
    }
}

impl core::error::Error for ScheduleError {}

/// A scalar function of time, linear between knots and held constant
/// before the first and after the last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    knots: Vec<(f64, f64)>,
}

impl Schedule {
    /// A single-knot schedule.
    pub fn constant(value: f64) -> Self {
        Schedule {
            knots: alloc::vec![(0.0, value)],
        }
    }

    /// Builds a schedule from `(time, value)` knots.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, ScheduleError> {
        if knots.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for (index, &(t, v)) in knots.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(ScheduleError::NonFinite { index });
            }
            if index > 0 && !(t > knots[index - 1].0) {
                return Err(ScheduleError::NotIncreasing { index });
            }
        }
        Ok(Schedule { knots })
    }

    /// The knots.
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// True when the schedule has a single knot.
    pub fn is_constant(&self) -> bool {
        self.knots.len() == 1
    }

    /// Value at time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        let last = k.len() - 1;
        if t <= k[0].0 {
            return k[0].1;
        }
        if t >= k[last].0 {
            return k[last].1;
        }
        // first knot strictly after t; exists because t < k[last].0
        let hi = k.partition_point(|&(tk, _)| tk <= t);
        let (t0, v0) = k[hi - 1];
        let (t1, v1) = k[hi];
        let w = (t - t0) / (t1 - t0);
        v0 + w * (v1 - v0)
    }

    /// Smallest and largest knot value; by linearity these bound the
    /// schedule everywhere.
    pub fn value_range(&self) -> (f64, f64) {
        self.knots
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| {
                (lo.min(v), hi.max(v))
            })
    }

    fn push_knot_times_within(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        out.extend(
            self.knots
                .iter()
                .map(|&(t, _)| t)
                .filter(|&t| t > lo && t < hi),
        );
    }
}

/// Index of a rate inside [`ParamSchedule`], in [`Params::NAMES`] order.
#[allow(missing_docs)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rate {
    ThetaH,
    P,
    Eta1,
    Eta2,
    Eta3,
    MuH,
    DeltaH,
    Zeta,
    GammaH,
    ThetaQ,
    ThetaR,
    MuR,
    DeltaR,
}

/// Time-varying parameters and noise intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSchedule {
    rates: [Schedule; 13],
    sigmas: [Schedule; N_NOISE],
}

impl ParamSchedule {
    /// Schedules for every rate (in [`Params::NAMES`] order) and every sigma.
    pub fn new(rates: [Schedule; 13], sigmas: [Schedule; N_NOISE]) -> Self {
        ParamSchedule { rates, sigmas }
    }

    /// Constant-in-time schedule.
    pub fn constant(params: &Params, sigmas: &NoiseIntensities) -> Self {
        ParamSchedule {
            rates: params.to_array().map(Schedule::constant),
            sigmas: sigmas.0.map(Schedule::constant),
        }
    }

    /// Schedule of one rate.
    pub fn rate(&self, r: Rate) -> &Schedule {
        &self.rates[r as usize]
    }

    /// All rate schedules, [`Params::NAMES`] order.
    pub fn rates(&self) -> &[Schedule; 13] {
        &self.rates
    }

    /// Schedule of `sigma_i` (1-based).
    pub fn sigma(&self, i: usize) -> &Schedule {
        &self.sigmas[i - 1]
    }

    /// All sigma schedules.
    pub fn sigmas(&self) -> &[Schedule; N_NOISE] {
        &self.sigmas
    }

    /// True when every schedule has a single knot.
    pub fn is_constant(&self) -> bool {
        self.rates
            .iter()
            .chain(self.sigmas.iter())
            .all(Schedule::is_constant)
    }

    /// Parameters and intensities at time `t`.
    pub fn eval(&self, t: f64) -> (Params, NoiseIntensities) {
        (
            Params::from_array(core::array::from_fn(|i| self.rates[i].eval(t))),
            NoiseIntensities(core::array::from_fn(|i| self.sigmas[i].eval(t))),
        )
    }

    /// Checks the parameter invariants at every knot, which is enough for
    /// piecewise-linear interpolation.
    pub fn validate(&self) -> Result<(), DomainError> {
        for (i, s) in self.rates.iter().enumerate() {
            let name = Params::NAMES[i];
            let (lo, hi) = s.value_range();
            if lo < 0.0 {
                return Err(DomainError::InvalidParameter { name, value: lo });
            }
            if matches!(name, "p" | "theta_q") && hi > 1.0 {
                return Err(DomainError::InvalidParameter { name, value: hi });
            }
        }
        for (i, s) in self.sigmas.iter().enumerate() {
            let (lo, _) = s.value_range();
            if lo < 0.0 {
                return Err(DomainError::InvalidParameter {
                    name: crate::model::SIGMA_NAMES[i],
                    value: lo,
                });
            }
        }
        Ok(())
    }

    /// 64-bit FNV-1a digest of every knot, for provenance records.
    pub fn digest(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        for s in self.rates.iter().chain(self.sigmas.iter()) {
            feed(s.knots.len() as u64);
            for &(t, v) in &s.knots {
                feed(t.to_bits());
                feed(v.to_bits());
            }
        }
        h
    }
}

/// Exact integral over `[lo, hi]` of an integrand that is a polynomial of
/// degree at most two in the values of `schedules`, possibly combined with
/// `min`/`max` over the pairs listed in `crossings`.
///
/// The interval is split at every knot and at every point where a pair in
/// `crossings` swaps order; on each piece the integrand is then a quadratic
/// and Simpson's rule is exact.
pub(crate) fn integrate_exact<F>(
    schedules: &[&Schedule],
    crossings: &[(&Schedule, &Schedule)],
    lo: f64,
    hi: f64,
    f: F,
) -> f64
where
    F: Fn(f64) -> f64,
{
    if !(hi > lo) {
        return 0.0;
    }
    let mut cuts = alloc::vec![lo, hi];
    for s in schedules {
        s.push_knot_times_within(lo, hi, &mut cuts);
    }
    sort_dedup(&mut cuts);

    let mut pieces = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        pieces.push(a);
        let start = pieces.len();
        for (x, y) in crossings {
            let da = x.eval(a) - y.eval(a);
            let db = x.eval(b) - y.eval(b);
            if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
                let root = a + (b - a) * da / (da - db);
                if root > a && root < b {
                    pieces.push(root);
                }
            }
        }
        pieces[start..].sort_by(f64::total_cmp);
    }
    pieces.push(hi);
    pieces.dedup();

    pieces
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        })
        .sum()
}

/// Time average over `[0, horizon]`; for all-constant schedules this is
/// the integrand itself, with no quadrature rounding.
pub(crate) fn average_exact<F>(
    schedules: &[&Schedule],
    crossings: &[(&Schedule, &Schedule)],
    horizon: f64,
    f: F,
) -> f64
where
    F: Fn(f64) -> f64,
{
    if schedules.iter().all(|s| s.is_constant()) {
        return f(0.0);
    }
    integrate_exact(schedules, crossings, 0.0, horizon, f) / horizon
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_schedule_everywhere() {
        let s = Schedule::constant(3.5);
        for t in [0.0, 1.0, 1e6] {
            assert_eq!(s.eval(t), 3.5);
        }
    }

    #[test]
    fn linear_interpolation() {
        let s = Schedule::new(vec![(0.0, 0.0), (10.0, 1.0)]).unwrap();
        assert_eq!(s.eval(5.0), 0.5);
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(10.0), 1.0);
    }

    #[test]
    fn hold_last_value() {
        let s = Schedule::new(vec![(0.0, 2.0), (10.0, 4.0)]).unwrap();
        assert_eq!(s.eval(25.0), 4.0);
    }

    #[test]
    fn interior_knot_is_hit_exactly() {
        let s = Schedule::new(vec![(0.0, 1.0), (2.0, 5.0), (4.0, -1.0)]).unwrap();
        assert_eq!(s.eval(2.0), 5.0);
        assert_eq!(s.eval(3.0), 2.0);
    }

    #[test]
    fn rejects_bad_knots() {
        assert_eq!(Schedule::new(vec![]), Err(ScheduleError::Empty));
        assert_eq!(
            Schedule::new(vec![(0.0, 1.0), (0.0, 2.0)]),
            Err(ScheduleError::NotIncreasing { index: 1 })
        );
        assert_eq!(
            Schedule::new(vec![(0.0, f64::NAN)]),
            Err(ScheduleError::NonFinite { index: 0 })
        );
    }

    #[test]
    fn product_of_ramps_is_integrated_exactly() {
        // int_0^4 t * (4 - t) dt = 32 - 64/3
        let up = Schedule::new(vec![(0.0, 0.0), (4.0, 4.0)]).unwrap();
        let down = Schedule::new(vec![(0.0, 4.0), (4.0, 0.0)]).unwrap();
        let got = integrate_exact(&[&up, &down], &[], 0.0, 4.0, |t| up.eval(t) * down.eval(t));
        assert!((got - (32.0 - 64.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn max_of_crossing_ramps() {
        // max(t, 2 - t) on [0, 2]: two triangles of area 1.5 each -> 3
        let up = Schedule::new(vec![(0.0, 0.0), (2.0, 2.0)]).unwrap();
        let down = Schedule::new(vec![(0.0, 2.0), (2.0, 0.0)]).unwrap();
        let got = integrate_exact(&[&up, &down], &[(&up, &down)], 0.0, 2.0, |t| {
            up.eval(t).max(down.eval(t))
        });
        assert!((got - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_average_is_the_value() {
        let s = Schedule::constant(0.1 + 0.2);
        assert_eq!(average_exact(&[&s], &[], 7.0, |t| s.eval(t)), 0.1 + 0.2);
    }

    #[test]
    fn schedule_validation() {
        let ok = ParamSchedule::constant(&Params::table2(), &NoiseIntensities::example());
        assert!(ok.validate().is_ok());
        let mut rates = ok.rates().clone();
        rates[Rate::P as usize] = Schedule::new(vec![(0.0, 0.5), (10.0, 1.2)]).unwrap();
        let bad = ParamSchedule::new(rates, ok.sigmas().clone());
        assert!(matches!(
            bad.validate(),
            Err(DomainError::InvalidParameter { name: "p", .. })
        ));
    }

    #[test]
    fn eval_round_trips_constants() {
        let p = Params::table3();
        let s = NoiseIntensities::example();
        let sched = ParamSchedule::constant(&p, &s);
        assert_eq!(sched.eval(123.0), (p, s));
        assert!(sched.is_constant());
    }

    #[test]
    fn digest_tracks_content() {
        let a = ParamSchedule::constant(&Params::table2(), &NoiseIntensities::example());
        let b = ParamSchedule::constant(&Params::table3(), &NoiseIntensities::example());
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
    }
}
