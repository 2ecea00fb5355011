//! Serializable analysis report.

use mpox_core::analysis::{
    boundedness_stats, empirical_growth, extinction_rate, growth_bound, r0_constant,
    timevarying_extinction_indicator, xi_series_check_schedule, Lyapunov,
};
use mpox_core::ensemble::EnsembleResult;
use mpox_core::model::check_hr;
use mpox_core::DomainError;
use serde::Serialize;

use crate::config::RunSpec;

/// Threshold at the `t = 0` rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdJson {
    /// Basic reproduction number.
    pub r0: f64,
    /// `(1-p)(eta1 + eta2) + eta3`.
    pub numerator: f64,
    /// `min(mu_h, mu_r) + min(delta_h, delta_r)`.
    pub denominator: f64,
    /// `subcritical`, `critical` or `supercritical`.
    pub regime: &'static str,
}

/// Growth-rate bound and its empirical counterpart.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct GrowthJson {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub c1_tilde: f64,
    pub c2_tilde: f64,
    pub one_minus_p_sq: f64,
    pub bound: f64,
    /// Largest `F(K(t))/t` over the fit window, when `F` has a closed form.
    pub empirical_max: Option<f64>,
    /// `empirical_max <= bound`.
    pub empirical_within_bound: Option<bool>,
}

/// Slope of one path.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct PathSlope {
    pub path_index: u32,
    pub slope: f64,
}

/// Extinction-rate estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionJson {
    /// Fit window.
    pub window: (f64, f64),
    /// Median per-path slope of `ln(I_h + Q_h + I_r)`.
    pub median_slope: f64,
    /// `(min mu + min delta)(R0 - 1)`.
    pub theory_bound: f64,
    /// Per-path slopes.
    pub slopes: Vec<PathSlope>,
    /// Paths whose infected mass reached zero inside the window.
    pub excluded: Vec<u32>,
}

/// Averaged extinction condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct IndicatorJson {
    pub horizon: f64,
    pub lhs_avg: f64,
    pub rhs_avg: f64,
    pub satisfied: bool,
}

/// Series condition on the noise intensities.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct SeriesJson {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub classification: &'static str,
}

/// Terminal-quartile norm statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct BoundednessJson {
    pub kappa: f64,
    pub chi: f64,
    pub p_exceed_kappa: f64,
    pub p_below_kappa_floor: f64,
    pub p_within_chi: f64,
    pub samples: usize,
}

/// Rodent/human ratio over every path.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct HrJson {
    pub kbar: f64,
    pub max_ratio: f64,
    pub satisfied: bool,
}

/// Positivity-policy activity.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct ProjectionJson {
    pub events: u64,
    pub steps: u64,
    pub rate: f64,
}

/// A path dropped from the aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct AbortedJson {
    pub path_index: u32,
    pub time: f64,
    pub error: String,
}

/// Contents of `analysis.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(missing_docs)]
pub struct AnalysisReport {
    pub threshold: ThresholdJson,
    pub growth_bound: GrowthJson,
    pub extinction: ExtinctionJson,
    pub indicator: IndicatorJson,
    pub series_check: SeriesJson,
    pub boundedness: BoundednessJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hr_check: Option<HrJson>,
    pub projection: ProjectionJson,
    pub paths_used: usize,
    pub aborted: Vec<AbortedJson>,
    /// Always `population`: spread divides by the path count.
    pub std_convention: &'static str,
    pub notes: Vec<String>,
}

/// Analysis stage and its failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    /// Stage name.
    pub stage: &'static str,
    /// Underlying error.
    pub source: DomainError,
}

fn at(stage: &'static str) -> impl Fn(DomainError) -> StageError {
    move |source| StageError { stage, source }
}

impl AnalysisReport {
    /// Runs every diagnostic on a finished ensemble.
    pub fn build(spec: &RunSpec, ensemble: &EnsembleResult) -> Result<Self, StageError> {
        let schedule = spec.schedule();
        let horizon = spec.sim.t_end;
        let (params0, _) = schedule.eval(0.0);
        let lyapunov: Lyapunov = spec.analysis.lyapunov.into();
        let window = spec.window();

        let t = r0_constant(&params0).map_err(at("threshold"))?;
        let g = growth_bound(&schedule, horizon, lyapunov).map_err(at("growth bound"))?;
        let empirical_max = empirical_growth(ensemble, lyapunov, window);
        let ext = extinction_rate(ensemble, &params0, window).map_err(at("extinction rate"))?;
        let ind = timevarying_extinction_indicator(&schedule, horizon);
        let series = xi_series_check_schedule(&schedule, spec.analysis.n_max, spec.analysis.tol)
            .map_err(at("series check"))?;
        let (kappa, chi) = (spec.kappa(), spec.chi());
        let b = boundedness_stats(ensemble, kappa, chi);

        let hr_check = match spec.analysis.kbar {
            Some(kbar) => {
                let mut max_ratio = 0.0f64;
                for path in &ensemble.paths {
                    max_ratio =
                        max_ratio.max(check_hr(path, kbar).map_err(at("hr check"))?.max_ratio);
                }
                Some(HrJson {
                    kbar,
                    max_ratio,
                    satisfied: max_ratio <= kbar,
                })
            }
            None => None,
        };

        let events: u64 = ensemble.paths.iter().map(|p| p.projection_events).sum();
        let steps: u64 = ensemble.paths.iter().map(|p| p.total_steps).sum();

        Ok(AnalysisReport {
            threshold: ThresholdJson {
                r0: t.r0,
                numerator: t.numerator,
                denominator: t.denominator,
                regime: t.regime.as_str(),
            },
            growth_bound: GrowthJson {
                a: g.a,
                b: g.b,
                c: g.c,
                d: g.d,
                c1_tilde: g.c1_tilde,
                c2_tilde: g.c2_tilde,
                one_minus_p_sq: g.one_minus_p_sq,
                bound: g.bound,
                empirical_max,
                empirical_within_bound: empirical_max.map(|m| m <= g.bound),
            },
            extinction: ExtinctionJson {
                window,
                median_slope: ext.median_slope,
                theory_bound: ext.theory_bound,
                slopes: ext
                    .slope_per_path
                    .iter()
                    .map(|&(path_index, slope)| PathSlope { path_index, slope })
                    .collect(),
                excluded: ext.excluded,
            },
            indicator: IndicatorJson {
                horizon,
                lhs_avg: ind.lhs_avg,
                rhs_avg: ind.rhs_avg,
                satisfied: ind.satisfied,
            },
            series_check: SeriesJson {
                terms: series.terms,
                partial_sums: series.partial_sums,
                classification: series.classification.as_str(),
            },
            boundedness: BoundednessJson {
                kappa,
                chi,
                p_exceed_kappa: b.p_exceed_kappa,
                p_below_kappa_floor: b.p_below_kappa_floor,
                p_within_chi: b.p_within_chi,
                samples: b.samples,
            },
            hr_check,
            projection: ProjectionJson {
                events,
                steps,
                rate: if steps == 0 {
                    0.0
                } else {
                    events as f64 / steps as f64
                },
            },
            paths_used: ensemble.paths.len(),
            aborted: ensemble
                .aborted
                .iter()
                .map(|(i, e)| AbortedJson {
                    path_index: *i,
                    time: e.time,
                    error: e.source.to_string(),
                })
                .collect(),
            std_convention: "population",
            notes: spec.notes.clone(),
        })
    }
}
