use std::fs;

use mpox_sim::config::ScheduleSpec;
use mpox_sim::{presets, run_scenario, RunOptions, RunSpec};
use sha2::{Digest, Sha256};

fn short(mut s: RunSpec, t_end: f64, n_paths: u32) -> RunSpec {
    s.sim.t_end = t_end;
    s.sim.n_paths = n_paths;
    s.analysis.window = Some((0.25 * t_end, t_end));
    s
}

fn run(spec: &RunSpec, threads: usize) -> (tempfile::TempDir, mpox_sim::RunOutcome) {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out_dir: dir.path().to_path_buf(),
        threads,
    };
    let outcome = run_scenario(spec, &opts).unwrap();
    (dir, outcome)
}

fn analysis(dir: &tempfile::TempDir) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.path().join("analysis.json")).unwrap()).unwrap()
}

#[test]
fn low_transmission_preset_reports_subcritical_threshold() {
    let (dir, _) = run(&short(presets::example_4_2(), 20.0, 4), 2);
    let a = analysis(&dir);
    assert!((a["threshold"]["r0"].as_f64().unwrap() - 0.57604).abs() < 5e-5);
    assert_eq!(a["threshold"]["regime"], "subcritical");
    assert!((a["growth_bound"]["bound"].as_f64().unwrap() - 20.33485).abs() < 1e-4);
    assert_eq!(a["std_convention"], "population");
    assert!(a["notes"][1].as_str().unwrap().contains("0.567"));
}

#[test]
fn high_transmission_preset_reports_supercritical_threshold() {
    let (dir, _) = run(&short(presets::example_4_3(), 20.0, 4), 2);
    let a = analysis(&dir);
    assert!((a["threshold"]["r0"].as_f64().unwrap() - 1.6326).abs() < 5e-4);
    assert_eq!(a["threshold"]["regime"], "supercritical");
    assert_eq!(a["indicator"]["satisfied"], false);
}

#[test]
fn noise_free_single_path_has_zero_spread() {
    let mut s = short(presets::example_4_2(), 10.0, 1);
    s.model.sigma = std::array::from_fn(|_| ScheduleSpec::Constant(0.0));
    let (dir, _) = run(&s, 1);
    let text = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "t_days");
    assert_eq!(header.len(), 13);
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        for (name, cell) in header.iter().zip(&cells) {
            if name.ends_with("_std") {
                assert_eq!(*cell, "0.0");
            }
        }
        rows += 1;
    }
    assert_eq!(rows, 101);
}

#[test]
fn manifest_checksums_match_files() {
    let mut s = short(presets::example_4_3(), 5.0, 3);
    s.output.paths_csv = true;
    let (dir, outcome) = run(&s, 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), outcome.manifest.files.len());
    let names: Vec<&str> = files.iter().map(|f| f["name"].as_str().unwrap()).collect();
    for expected in [
        "spec.json",
        "timeseries.csv",
        "paths.csv",
        "analysis.json",
        "histogram_S_h.csv",
    ] {
        assert!(names.contains(&expected), "{expected} missing");
    }
    for f in files {
        let bytes = fs::read(dir.path().join(f["name"].as_str().unwrap())).unwrap();
        let hex: String = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        assert_eq!(f["sha256"].as_str().unwrap(), hex);
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    assert_eq!(manifest["seed"].as_u64().unwrap(), s.sim.seed);
    let spec_back =
        mpox_sim::parse_config(&fs::read_to_string(dir.path().join("spec.json")).unwrap()).unwrap();
    assert_eq!(spec_back, s);
}

#[test]
fn paths_csv_is_long_format() {
    let mut s = short(presets::example_4_2(), 1.0, 2);
    s.output.paths_csv = true;
    let (dir, outcome) = run(&s, 1);
    let text = fs::read_to_string(dir.path().join("paths.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "path_index,t_days,compartment,value");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * outcome.ensemble.times.len() * 6);
    assert_eq!(rows[0], "0,0.0,S_h,90.0");
    assert_eq!(rows[5], "0,0.0,I_r,30.0");
}

#[test]
fn histogram_counts_cover_every_path() {
    let (dir, _) = run(&short(presets::example_4_2(), 10.0, 17), 3);
    for label in ["S_h", "I_h", "Q_h", "R_h", "S_r", "I_r"] {
        let text = fs::read_to_string(dir.path().join(format!("histogram_{label}.csv"))).unwrap();
        let total: u64 = text
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, 17);
    }
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let s = short(presets::example_4_3(), 15.0, 9);
    let (a, _) = run(&s, 1);
    let (b, _) = run(&s, 4);
    for name in [
        "timeseries.csv",
        "analysis.json",
        "spec.json",
        "histogram_I_r.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn invalid_spec_is_rejected_before_running() {
    let mut s = short(presets::example_4_2(), 1.0, 1);
    s.model.params.p = ScheduleSpec::Constant(1.5);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let err = run_scenario(
        &s,
        &RunOptions {
            out_dir: out.clone(),
            threads: 1,
        },
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!out.exists());
}
