//! Scenario execution and file outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mpox_core::ensemble::{histogram, EnsembleError, EnsembleResult, Histogram};
use mpox_core::Compartment;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, RunSpec};
use crate::parallel::run_ensemble;
use crate::report::{AnalysisReport, StageError};

/// Tool version recorded in manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure of a run, mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad configuration.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// The ensemble could not be formed.
    #[error("ensemble: {0}")]
    Ensemble(EnsembleError),
    /// A diagnostic failed.
    #[error(transparent)]
    Analysis(#[from] StageError),
    /// Reading or writing a file failed.
    #[error("{stage} {path}: {source}")]
    Io {
        /// What was being done.
        stage: &'static str,
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
}

impl RunError {
    /// 2 for configuration, 3 for model errors, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Ensemble(_) | RunError::Analysis(_) => 3,
            RunError::Io { .. } => 1,
        }
    }
}

/// Where and how to run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Output directory, created if missing.
    pub out_dir: PathBuf,
    /// Worker threads for path simulation.
    pub threads: usize,
}

/// Checksum entry of the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    /// File name inside the output directory.
    pub name: String,
    /// Hex SHA-256 of the contents.
    pub sha256: String,
    /// Size in bytes.
    pub bytes: u64,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    /// Hex SHA-256 of the effective spec as written to `spec.json`.
    pub spec_sha256: String,
    /// Random stream key.
    pub seed: u64,
    /// Paths requested.
    pub n_paths: u32,
    /// Tool name and version.
    pub tool: String,
    /// RFC 3339 start time.
    pub started_at: String,
    /// RFC 3339 end time.
    pub finished_at: String,
    /// Elapsed seconds.
    pub wall_seconds: f64,
    /// Every other file written by the run.
    pub files: Vec<FileRecord>,
}

/// Result of [`run_scenario`].
#[derive(Debug)]
pub struct RunOutcome {
    /// The aggregated ensemble.
    pub ensemble: EnsembleResult,
    /// What went into `analysis.json`.
    pub report: AnalysisReport,
    /// What went into `manifest.json`.
    pub manifest: RunManifest,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn num(x: f64) -> String {
    ryu::Buffer::new().format(x).to_owned()
}

fn csv_bytes<I>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `t_days` then mean and std per compartment.
pub fn timeseries_csv(ensemble: &EnsembleResult) -> Vec<u8> {
    let mut header = vec!["t_days".to_owned()];
    for c in Compartment::ALL {
        header.push(format!("{}_mean", c.label()));
        header.push(format!("{}_std", c.label()));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = ensemble.times.iter().enumerate().map(|(k, &t)| {
        let mut row = vec![num(t)];
        for c in Compartment::ALL {
            row.push(num(ensemble.mean_series[k][c.index()]));
            row.push(num(ensemble.std_series[k][c.index()]));
        }
        row
    });
    csv_bytes(&header, rows)
}

/// Every recorded value in long format.
pub fn paths_csv(ensemble: &EnsembleResult) -> Vec<u8> {
    let rows = ensemble.paths.iter().flat_map(|p| {
        p.times.iter().zip(&p.states).flat_map(move |(&t, s)| {
            Compartment::ALL.into_iter().map(move |c| {
                vec![
                    p.path_index.to_string(),
                    num(t),
                    c.label().to_owned(),
                    num(s.get(c)),
                ]
            })
        })
    });
    csv_bytes(&["path_index", "t_days", "compartment", "value"], rows)
}

/// Bin edges and counts.
pub fn histogram_csv(h: &Histogram) -> Vec<u8> {
    let rows = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, n)| vec![num(h.edges[i]), num(h.edges[i + 1]), n.to_string()]);
    csv_bytes(&["bin_lo", "bin_hi", "count"], rows)
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileRecord, RunError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| RunError::Io {
        stage: "writing",
        path,
        source,
    })?;
    Ok(FileRecord {
        name: name.to_owned(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    })
}

/// Simulates the ensemble, runs every diagnostic and writes all outputs.
/// `manifest.json` is written last.
pub fn run_scenario(spec: &RunSpec, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    spec.validate().map_err(ConfigError::from)?;
    let started_at = chrono::Utc::now();
    let clock = Instant::now();

    let schedule = spec.schedule();
    let config = spec.sim_config();
    let ensemble = run_ensemble(
        &spec.initial_state(),
        &schedule,
        &config,
        spec.sim.n_paths,
        opts.threads,
    )
    .map_err(RunError::Ensemble)?;
    let report = AnalysisReport::build(spec, &ensemble)?;

    let t_hist = spec.histogram_t();
    let mut histograms = Vec::new();
    for label in &spec.output.histograms {
        let c = Compartment::from_label(label).expect("validated label");
        let h = match histogram(&ensemble, c, t_hist, spec.output.bins) {
            Ok(h) | Err(EnsembleError::Degenerate(h)) => h,
            Err(e) => return Err(RunError::Ensemble(e)),
        };
        histograms.push((format!("histogram_{label}.csv"), histogram_csv(&h)));
    }

    let dir = &opts.out_dir;
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        stage: "creating",
        path: dir.clone(),
        source,
    })?;

    let spec_json = spec.to_json();
    let mut files = vec![write(dir, "spec.json", spec_json.as_bytes())?];
    files.push(write(dir, "timeseries.csv", &timeseries_csv(&ensemble))?);
    if spec.output.paths_csv {
        files.push(write(dir, "paths.csv", &paths_csv(&ensemble))?);
    }
    for (name, bytes) in &histograms {
        files.push(write(dir, name, bytes)?);
    }
    let analysis = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    files.push(write(dir, "analysis.json", analysis.as_bytes())?);

    let manifest = RunManifest {
        spec_sha256: sha256_hex(spec_json.as_bytes()),
        seed: spec.sim.seed,
        n_paths: spec.sim.n_paths,
        tool: format!("mpox-sim {VERSION}"),
        started_at: started_at.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        finished_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        wall_seconds: clock.elapsed().as_secs_f64(),
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write(dir, "manifest.json", text.as_bytes())?;

    Ok(RunOutcome {
        ensemble,
        report,
        manifest,
    })
}
