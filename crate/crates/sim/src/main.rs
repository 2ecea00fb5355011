use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mpox_sim::{parse_config, presets, run_scenario, RunError, RunOptions, RunSpec};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "MPOX_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "mpox",
    version,
    about = "Stochastic monkeypox model: ensembles and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON spec or a built-in preset.
    Run {
        /// Path to a JSON run specification.
        spec: Option<PathBuf>,
        /// Built-in scenario instead of a spec file.
        #[arg(long, value_parser = presets::NAMES, conflicts_with = "spec")]
        preset: Option<String>,
        /// Output directory. Falls back to the spec, then $MPOX_OUT_DIR, then ./out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of paths.
        #[arg(long)]
        paths: Option<u32>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn load(spec: Option<PathBuf>, preset: Option<String>) -> Result<RunSpec, RunError> {
    let text = match (spec, preset) {
        (_, Some(name)) => presets::by_name(&name).expect("checked by clap").to_owned(),
        (Some(path), None) => std::fs::read_to_string(&path).map_err(|source| RunError::Io {
            stage: "reading",
            path,
            source,
        })?,
        (None, None) => {
            eprintln!(
                "error: give a spec file or --preset ({})",
                presets::NAMES.join(", ")
            );
            std::process::exit(2);
        }
    };
    Ok(parse_config(&text)?)
}

fn main() -> ExitCode {
    let Command::Run {
        spec,
        preset,
        out,
        seed,
        paths,
        threads,
    } = Cli::parse().command;

    let result = load(spec, preset).and_then(|mut spec| {
        if let Some(seed) = seed {
            spec.sim.seed = seed;
        }
        if let Some(n) = paths {
            spec.sim.n_paths = n;
        }
        let out_dir = out
            .or_else(|| spec.output.dir.clone().map(PathBuf::from))
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let opts = RunOptions {
            out_dir,
            threads: threads.unwrap_or_else(mpox_sim::parallel::default_threads),
        };
        run_scenario(&spec, &opts).map(|o| (o, opts.out_dir))
    });

    match result {
        Ok((outcome, dir)) => {
            let t = &outcome.report.threshold;
            println!("wrote {}", dir.display());
            println!("r0 = {} ({})", t.r0, t.regime);
            println!(
                "paths used = {}, aborted = {}",
                outcome.report.paths_used,
                outcome.report.aborted.len()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
