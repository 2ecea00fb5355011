//! Euler-Maruyama integration with a positivity policy, and a classical
//! RK4 integrator for the noise-free skeleton.

use alloc::vec::Vec;

use crate::error::{DomainError, SimError};
use crate::model::{self, State, DEFAULT_GUARD_EPS, N_COMPARTMENTS, N_NOISE};
use crate::rng;
use crate::schedule::ParamSchedule;

/// Upper bound on the number of steps of a single path.
pub const MAX_STEPS: u64 = 1_000_000_000;

/// What to do with a component that an Euler-Maruyama step drove negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositivityPolicy {
    /// Replace it by zero.
    #[default]
    ProjectToZero,
    /// Replace it by its absolute value.
    Reflect,
}

/// Integration settings shared by every path of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Step size [days].
    pub dt: f64,
    /// Horizon [days].
    pub t_end: f64,
    /// Key of the increment stream.
    pub seed: u64,
    /// Negative-component handling.
    pub positivity_policy: PositivityPolicy,
    /// Denominator guard passed to drift/diffusion.
    pub guard_eps: f64,
    /// Record every `record_stride`-th step (the final step is always kept).
    pub record_stride: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            t_end: 200.0,
            seed: 0,
            positivity_policy: PositivityPolicy::ProjectToZero,
            guard_eps: DEFAULT_GUARD_EPS,
            record_stride: 10,
        }
    }
}

impl SimConfig {
    /// Number of steps on the uniform grid.
    pub fn n_steps(&self) -> u64 {
        libm::round(self.t_end / self.dt) as u64
    }

    /// Checks `dt > 0`, `t_end >= dt`, `record_stride >= 1` and the step cap.
    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |name, value| Err(DomainError::InvalidParameter { name, value });
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt", self.dt);
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return bad("t_end", self.t_end);
        }
        if self.record_stride == 0 {
            return bad("record_stride", 0.0);
        }
        if !(self.guard_eps >= 0.0) {
            return bad("guard_eps", self.guard_eps);
        }
        if self.t_end / self.dt > MAX_STEPS as f64 {
            return bad("t_end", self.t_end);
        }
        Ok(())
    }
}

/// One recorded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// Sample times, starting at 0.
    pub times: Vec<f64>,
    /// State at each sample time.
    pub states: Vec<State>,
    /// Steps on which the positivity policy changed a component.
    pub projection_events: u64,
    /// Steps taken.
    pub total_steps: u64,
    /// Stream key the path was drawn from.
    pub seed: u64,
    /// Index of the path inside its ensemble.
    pub path_index: u32,
}

impl Path {
    /// Fraction of steps on which the positivity policy fired.
    pub fn projection_rate(&self) -> f64 {
        if self.total_steps == 0 {
            0.0
        } else {
            self.projection_events as f64 / self.total_steps as f64
        }
    }

    /// Last recorded state.
    pub fn terminal(&self) -> &State {
        self.states
            .last()
            .expect("paths always hold the initial state")
    }
}

/// Result of one Euler-Maruyama step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// New state.
    pub state: State,
    /// Whether the positivity policy changed any component.
    pub projected: bool,
}

/// `x' = x + f(x,t) dt + G(x,t) dW`, followed by the positivity policy.
pub fn em_step(
    state: &State,
    t: f64,
    schedule: &ParamSchedule,
    dw: &[f64; N_NOISE],
    config: &SimConfig,
) -> Result<Step, DomainError> {
    let (params, sigmas) = schedule.eval(t);
    let f = model::drift_guarded(state, &params, config.guard_eps)?;
    let g = model::diffusion_guarded(state, &params, &sigmas, config.guard_eps)?;
    let noise = g.apply(dw);
    let x = state.to_array();
    let mut next = [0.0; N_COMPARTMENTS];
    let mut projected = false;
    for i in 0..N_COMPARTMENTS {
        let v = x[i] + f.0[i] * config.dt + noise[i];
        next[i] = if v < 0.0 {
            projected = true;
            match config.positivity_policy {
                PositivityPolicy::ProjectToZero => 0.0,
                PositivityPolicy::Reflect => -v,
            }
        } else {
            v
        };
    }
    Ok(Step {
        state: State::from_array(next),
        projected,
    })
}

fn recorder(config: &SimConfig, init: &State) -> (Vec<f64>, Vec<State>) {
    let n = config.n_steps();
    let samples = (n / config.record_stride + 2) as usize;
    let mut times = Vec::with_capacity(samples);
    let mut states = Vec::with_capacity(samples);
    times.push(0.0);
    states.push(*init);
    (times, states)
}

#[inline]
fn should_record(k: u64, n: u64, stride: u64) -> bool {
    k.is_multiple_of(stride) || k == n
}

fn check_inputs(
    init: &State,
    schedule: &ParamSchedule,
    config: &SimConfig,
) -> Result<(), SimError> {
    let at_start = |source| SimError { time: 0.0, source };
    config.validate().map_err(at_start)?;
    schedule.validate().map_err(at_start)?;
    init.validate().map_err(at_start)
}

/// Euler-Maruyama path driven by an arbitrary increment source.
///
/// `noise(k)` must return `dB` for the step from `k*dt` to `(k+1)*dt`.
pub fn simulate_path_with_noise<N>(
    init: &State,
    schedule: &ParamSchedule,
    config: &SimConfig,
    path_index: u32,
    mut noise: N,
) -> Result<Path, SimError>
where
    N: FnMut(u64) -> [f64; N_NOISE],
{
    check_inputs(init, schedule, config)?;
    let n = config.n_steps();
    let (mut times, mut states) = recorder(config, init);
    let mut x = *init;
    let mut projection_events = 0;
    for k in 0..n {
        let t = k as f64 * config.dt;
        let dw = noise(k);
        let step =
            em_step(&x, t, schedule, &dw, config).map_err(|source| SimError { time: t, source })?;
        projection_events += u64::from(step.projected);
        x = step.state;
        if should_record(k + 1, n, config.record_stride) {
            times.push((k + 1) as f64 * config.dt);
            states.push(x);
        }
    }
    Ok(Path {
        times,
        states,
        projection_events,
        total_steps: n,
        seed: config.seed,
        path_index,
    })
}

/// Euler-Maruyama path whose increments come from the counter-based
/// stream keyed by `(config.seed, path_index, step)`.
pub fn simulate_path(
    init: &State,
    schedule: &ParamSchedule,
    config: &SimConfig,
    path_index: u32,
) -> Result<Path, SimError> {
    let (seed, dt) = (config.seed, config.dt);
    simulate_path_with_noise(init, schedule, config, path_index, |k| {
        rng::gen_increments(seed, path_index, k, dt)
    })
}

fn rhs(
    x: &[f64; N_COMPARTMENTS],
    t: f64,
    schedule: &ParamSchedule,
    eps: f64,
) -> Result<[f64; N_COMPARTMENTS], DomainError> {
    let (params, _) = schedule.eval(t);
    Ok(model::drift_guarded(&State::from_array(*x), &params, eps)?.0)
}

fn axpy(x: &[f64; N_COMPARTMENTS], a: f64, k: &[f64; N_COMPARTMENTS]) -> [f64; N_COMPARTMENTS] {
    core::array::from_fn(|i| x[i] + a * k[i])
}

/// Classical fourth-order Runge-Kutta integration of the drift field.
///
/// Noise intensities and the positivity policy are ignored.
pub fn simulate_ode(
    init: &State,
    schedule: &ParamSchedule,
    config: &SimConfig,
) -> Result<Path, SimError> {
    check_inputs(init, schedule, config)?;
    let n = config.n_steps();
    let h = config.dt;
    let eps = config.guard_eps;
    let (mut times, mut states) = recorder(config, init);
    let mut x = init.to_array();
    for k in 0..n {
        let t = k as f64 * h;
        let fail = |source| SimError { time: t, source };
        let k1 = rhs(&x, t, schedule, eps).map_err(fail)?;
        let k2 = rhs(&axpy(&x, 0.5 * h, &k1), t + 0.5 * h, schedule, eps).map_err(fail)?;
        let k3 = rhs(&axpy(&x, 0.5 * h, &k2), t + 0.5 * h, schedule, eps).map_err(fail)?;
        let k4 = rhs(&axpy(&x, h, &k3), t + h, schedule, eps).map_err(fail)?;
        for i in 0..N_COMPARTMENTS {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if should_record(k + 1, n, config.record_stride) {
            times.push((k + 1) as f64 * h);
            states.push(State::from_array(x));
        }
    }
    Ok(Path {
        times,
        states,
        projection_events: 0,
        total_steps: n,
        seed: config.seed,
        path_index: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NoiseIntensities, Params};

    fn table2() -> ParamSchedule {
        ParamSchedule::constant(&Params::table2(), &NoiseIntensities::example())
    }

    #[test]
    fn zero_noise_step_matches_drift() {
        let cfg = SimConfig {
            dt: 0.1,
            ..SimConfig::default()
        };
        let step = em_step(&State::example(), 0.0, &table2(), &[0.0; N_NOISE], &cfg).unwrap();
        assert!((step.state.s_h - 90.5375332).abs() < 1e-6);
        assert!(!step.projected);
    }

    #[test]
    fn zero_dt_is_identity() {
        let cfg = SimConfig {
            dt: 0.0,
            ..SimConfig::default()
        };
        let s = State::example();
        let step = em_step(&s, 3.0, &table2(), &[0.0; N_NOISE], &cfg).unwrap();
        assert_eq!(step.state, s);
    }

    #[test]
    fn negative_component_is_projected() {
        let s = State {
            s_h: 1e-6,
            ..State::example()
        };
        let mut dw = [0.0; N_NOISE];
        dw[2] = -1e8;
        let cfg = SimConfig {
            dt: 0.01,
            ..SimConfig::default()
        };
        let step = em_step(&s, 0.0, &table2(), &dw, &cfg).unwrap();
        assert_eq!(step.state.s_h, 0.0);
        assert!(step.projected);

        let reflect = SimConfig {
            positivity_policy: PositivityPolicy::Reflect,
            ..cfg
        };
        let step = em_step(&s, 0.0, &table2(), &dw, &reflect).unwrap();
        assert!(step.state.s_h > 0.0);
        assert!(step.projected);
    }

    #[test]
    fn path_counts_projection_events() {
        let s = State {
            s_h: 1e-6,
            ..State::example()
        };
        let cfg = SimConfig {
            dt: 0.01,
            t_end: 0.02,
            record_stride: 1,
            ..SimConfig::default()
        };
        let path = simulate_path_with_noise(&s, &table2(), &cfg, 0, |k| {
            let mut dw = [0.0; N_NOISE];
            if k == 0 {
                dw[2] = -1e8;
            }
            dw
        })
        .unwrap();
        assert_eq!(path.projection_events, 1);
        assert_eq!(path.total_steps, 2);
        assert_eq!(path.times, alloc::vec![0.0, 0.01, 0.02]);
    }

    #[test]
    fn recording_grid() {
        let cfg = SimConfig {
            dt: 0.1,
            t_end: 1.05,
            record_stride: 4,
            ..SimConfig::default()
        };
        // round(10.5) = 11 steps: samples at 0, 4, 8 and the final step 11
        let path = simulate_path(&State::example(), &table2(), &cfg, 0).unwrap();
        assert_eq!(path.total_steps, 11);
        assert_eq!(path.times.len(), 4);
        assert_eq!(*path.times.last().unwrap(), 11.0 * 0.1);
    }

    #[test]
    fn paths_are_reproducible() {
        let cfg = SimConfig {
            t_end: 20.0,
            seed: 5,
            ..SimConfig::default()
        };
        let a = simulate_path(&State::example(), &table2(), &cfg, 3).unwrap();
        let b = simulate_path(&State::example(), &table2(), &cfg, 3).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&State::example(), &table2(), &cfg, 4).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn disease_free_subspace_is_invariant() {
        let init = State {
            s_h: 150.0,
            s_r: 60.0,
            ..State::default()
        };
        let cfg = SimConfig {
            t_end: 50.0,
            seed: 11,
            ..SimConfig::default()
        };
        let path = simulate_path(&init, &table2(), &cfg, 0).unwrap();
        for s in &path.states {
            assert_eq!([s.i_h, s.q_h, s.r_h, s.i_r], [0.0; 4]);
        }
    }

    #[test]
    fn equilibrium_is_held_by_ode() {
        let p = Params {
            theta_h: 0.05 * 200.0,
            theta_r: 0.0,
            ..Params::table2()
        };
        let init = State {
            s_h: 200.0,
            ..State::default()
        };
        let sched = ParamSchedule::constant(&p, &NoiseIntensities::ZERO);
        let cfg = SimConfig {
            t_end: 30.0,
            ..SimConfig::default()
        };
        let path = simulate_ode(&init, &sched, &cfg).unwrap();
        for s in &path.states {
            assert_eq!(s.s_h, 200.0);
        }
    }

    #[test]
    fn rk4_step_refinement() {
        let sched = table2();
        let run = |dt| {
            let cfg = SimConfig {
                dt,
                t_end: 40.0,
                ..SimConfig::default()
            };
            *simulate_ode(&State::example(), &sched, &cfg)
                .unwrap()
                .terminal()
        };
        let coarse = run(1e-2).to_array();
        let fine = run(5e-3).to_array();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SimConfig {
            dt: -1.0,
            ..SimConfig::default()
        };
        let err = simulate_path(&State::example(), &table2(), &cfg, 0).unwrap_err();
        assert_eq!(err.time, 0.0);
        assert!(matches!(
            err.source,
            DomainError::InvalidParameter { name: "dt", .. }
        ));
    }

    #[test]
    fn failing_time_is_attached() {
        let init = State {
            s_h: 0.0,
            i_h: 0.0,
            q_h: 0.0,
            r_h: 0.0,
            ..State::example()
        };
        let err = simulate_path(&init, &table2(), &SimConfig::default(), 0).unwrap_err();
        assert!(matches!(
            err.source,
            DomainError::HumanPopulationVanished { .. }
        ));
    }
}
