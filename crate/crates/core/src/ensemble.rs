//! Monte Carlo ensembles: per-time mean/std aggregation and terminal
//! histograms.
//!
//! Aggregation always runs over stored paths in path-index order, two
//! passes per time sample, so the result does not depend on the order in
//! which the paths were produced.

use alloc::vec::Vec;
use core::fmt;

use crate::engine::{simulate_path, Path, SimConfig};
use crate::error::SimError;
use crate::model::{Compartment, State, N_COMPARTMENTS};
use crate::schedule::ParamSchedule;

/// Ensemble failure.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleError {
    /// `n_paths` was zero.
    Empty,
    /// Every path aborted; carries the first failure.
    AllPathsAborted {
        /// Index of the first aborted path.
        path_index: u32,
        /// Its error.
        error: SimError,
    },
    /// Stored paths do not share a time grid.
    GridMismatch {
        /// Index of the offending path.
        path_index: u32,
    },
    /// Requested time is farther than one recording interval from any sample.
    TimeNotOnGrid {
        /// Requested time.
        t: f64,
    },
    /// Zero histogram bins requested.
    NoBins,
    /// All pooled values coincide; the single-bin histogram is attached.
    Degenerate(Histogram),
}

impl fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleError::Empty => f.write_str("ensemble needs at least one path"),
            EnsembleError::AllPathsAborted { path_index, error } => {
                write!(f, "all paths aborted; path {path_index} failed {error}")
            }
            EnsembleError::GridMismatch { path_index } => {
                write!(f, "path {path_index} is recorded on a different time grid")
            }
            EnsembleError::TimeNotOnGrid { t } => write!(f, "t = {t} is not on the recorded grid"),
            EnsembleError::NoBins => f.write_str("histogram needs at least one bin"),
            EnsembleError::Degenerate(h) => write!(
                f,
                "all {} values equal {}; returning a single bin",
                h.total(),
                h.edges[0]
            ),
        }
    }
}

impl core::error::Error for EnsembleError {}

/// What an ensemble was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    /// Integration settings (including the seed).
    pub config: SimConfig,
    /// Requested number of paths.
    pub n_paths: u32,
    /// [`ParamSchedule::digest`] of the schedule used.
    pub schedule_digest: u64,
}

/// A set of paths with per-time aggregates.
///
/// Standard deviations use the population convention (divide by `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Common time grid.
    pub times: Vec<f64>,
    /// Surviving paths, in index order.
    pub paths: Vec<Path>,
    /// Paths aborted by a domain error.
    pub aborted: Vec<(u32, SimError)>,
    /// Mean per time sample and compartment.
    pub mean_series: Vec<[f64; N_COMPARTMENTS]>,
    /// Population standard deviation per time sample and compartment.
    pub std_series: Vec<[f64; N_COMPARTMENTS]>,
    /// Inputs of the run.
    pub provenance: Provenance,
}

impl EnsembleResult {
    /// Aggregates per-path outcomes given in path-index order.
    pub fn from_outcomes(
        outcomes: Vec<Result<Path, SimError>>,
        provenance: Provenance,
    ) -> Result<Self, EnsembleError> {
        if outcomes.is_empty() {
            return Err(EnsembleError::Empty);
        }
        let mut paths = Vec::with_capacity(outcomes.len());
        let mut aborted = Vec::new();
        for (i, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(p) => paths.push(p),
                Err(e) => aborted.push((i as u32, e)),
            }
        }
        let Some(first) = paths.first() else {
            let (path_index, error) = aborted[0];
            return Err(EnsembleError::AllPathsAborted { path_index, error });
        };
        let times = first.times.clone();
        if let Some(bad) = paths.iter().find(|p| p.times != times) {
            return Err(EnsembleError::GridMismatch {
                path_index: bad.path_index,
            });
        }

        let n = paths.len() as f64;
        let mut mean_series = Vec::with_capacity(times.len());
        let mut std_series = Vec::with_capacity(times.len());
        for k in 0..times.len() {
            // shifted by the first path so identical paths give exactly zero spread
            let shift = paths[0].states[k].to_array();
            let mut offset = [0.0; N_COMPARTMENTS];
            for p in &paths {
                for ((o, x), s) in offset.iter_mut().zip(p.states[k].to_array()).zip(shift) {
                    *o += x - s;
                }
            }
            let offset = offset.map(|o| o / n);
            let mut var = [0.0; N_COMPARTMENTS];
            for p in &paths {
                for (((v, x), s), o) in var
                    .iter_mut()
                    .zip(p.states[k].to_array())
                    .zip(shift)
                    .zip(offset)
                {
                    let d = (x - s) - o;
                    *v += d * d;
                }
            }
            mean_series.push(core::array::from_fn(|i| shift[i] + offset[i]));
            std_series.push(var.map(|v| libm::sqrt(v / n)));
        }

        Ok(EnsembleResult {
            times,
            paths,
            aborted,
            mean_series,
            std_series,
            provenance,
        })
    }

    /// Index of the recorded sample nearest to `t`, if it lies within one
    /// recording interval.
    pub fn sample_index(&self, t: f64) -> Option<usize> {
        let cfg = &self.provenance.config;
        let tol = cfg.dt * cfg.record_stride as f64;
        let (idx, dist) = self
            .times
            .iter()
            .enumerate()
            .map(|(i, &ti)| (i, (ti - t).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        (dist <= tol).then_some(idx)
    }

    /// Values of one compartment across surviving paths at sample `k`.
    pub fn values_at(&self, compartment: Compartment, k: usize) -> Vec<f64> {
        self.paths
            .iter()
            .map(|p| p.states[k].get(compartment))
            .collect()
    }

    /// Surviving path count.
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    /// Always false for a constructed ensemble.
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Simulates paths `0..n_paths` sequentially and aggregates them.
pub fn run_ensemble(
    init: &State,
    schedule: &ParamSchedule,
    config: &SimConfig,
    n_paths: u32,
) -> Result<EnsembleResult, EnsembleError> {
    let outcomes = (0..n_paths)
        .map(|i| simulate_path(init, schedule, config, i))
        .collect();
    EnsembleResult::from_outcomes(outcomes, provenance(schedule, config, n_paths))
}

/// Provenance record for a run.
pub fn provenance(schedule: &ParamSchedule, config: &SimConfig, n_paths: u32) -> Provenance {
    Provenance {
        config: *config,
        n_paths,
        schedule_digest: schedule.digest(),
    }
}

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `n_bins + 1` edges from the pooled minimum to the pooled maximum.
    pub edges: Vec<f64>,
    /// Count per bin; the last bin is closed on the right.
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Number of values binned.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bins pooled values with equal-width bins spanning `[min, max]`.
pub fn bin_values(values: &[f64], n_bins: usize) -> Result<Histogram, EnsembleError> {
    if n_bins == 0 {
        return Err(EnsembleError::NoBins);
    }
    if values.is_empty() {
        return Err(EnsembleError::Empty);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo == hi {
        return Err(EnsembleError::Degenerate(Histogram {
            edges: alloc::vec![lo, hi],
            counts: alloc::vec![values.len() as u64],
        }));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    let mut counts = alloc::vec![0u64; n_bins];
    for &v in values {
        let bin = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[bin] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Histogram of one compartment across paths at the sample nearest `t`.
pub fn histogram(
    ensemble: &EnsembleResult,
    compartment: Compartment,
    t: f64,
    n_bins: usize,
) -> Result<Histogram, EnsembleError> {
    let k = ensemble
        .sample_index(t)
        .ok_or(EnsembleError::TimeNotOnGrid { t })?;
    bin_values(&ensemble.values_at(compartment, k), n_bins)
}
