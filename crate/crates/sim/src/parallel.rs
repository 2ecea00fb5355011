//! Multi-threaded ensembles with thread-count-independent results.

use mpox_core::engine::{simulate_path, SimConfig};
use mpox_core::ensemble::{provenance, EnsembleError, EnsembleResult};
use mpox_core::{ParamSchedule, State};
use rayon::prelude::*;

/// Simulates paths `0..n_paths` on `threads` workers, then aggregates in
/// path-index order. The result is bitwise identical for any `threads`.
pub fn run_ensemble(
    init: &State,
    schedule: &ParamSchedule,
    config: &SimConfig,
    n_paths: u32,
    threads: usize,
) -> Result<EnsembleResult, EnsembleError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    let outcomes = pool.install(|| {
        (0..n_paths)
            .into_par_iter()
            .map(|i| simulate_path(init, schedule, config, i))
            .collect()
    });
    EnsembleResult::from_outcomes(outcomes, provenance(schedule, config, n_paths))
}

/// Worker count used when none is requested.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpox_core::{NoiseIntensities, Params};

    #[test]
    fn matches_the_sequential_ensemble() {
        let sched = ParamSchedule::constant(&Params::table3(), &NoiseIntensities::example());
        let cfg = SimConfig {
            t_end: 20.0,
            seed: 5,
            ..SimConfig::default()
        };
        let seq = mpox_core::ensemble::run_ensemble(&State::example(), &sched, &cfg, 12).unwrap();
        for threads in [1, 3, 8] {
            let par = run_ensemble(&State::example(), &sched, &cfg, 12, threads).unwrap();
            assert_eq!(par, seq);
        }
    }
}
