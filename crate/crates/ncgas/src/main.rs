//! Command-line front end.
//!
//! `ncgas compute` runs an (r_s, tau) sweep from a config file and writes
//! the CSV table, the optional SVG plot and the run manifest. `ncgas
//! verify` runs the built-in acceptance suite. Exit codes: 0 success,
//! 1 validation error, 2 estimator failure.

use clap::{Args, Parser, Subcommand};
use ncgas::report::{
    self, config::build_config, ManifestStatus, RunConfig, RunManifest, SweepError,
};
use ncgas::verify;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ncgas", version, about = "Noncommutative electron gas energy tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV / SVG / manifest outputs.
    Compute(ComputeArgs),
    /// Run the built-in acceptance suite; nonzero exit on any failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// Run configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Override the sample budget.
    #[arg(long)]
    samples: Option<u64>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the CSV output path.
    #[arg(long)]
    out: Option<String>,
    /// Override the SVG output path.
    #[arg(long)]
    svg: Option<String>,
    /// Override the manifest output path.
    #[arg(long)]
    manifest: Option<String>,
    /// Worker threads (0 = all cores). Affects speed only, never results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run a single criterion (1..=8) instead of the whole suite.
    #[arg(long)]
    criterion: Option<u8>,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_ESTIMATOR: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints its own help/version through the error
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            };
        }
    };
    match cli.command {
        Command::Compute(args) => compute(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn compute(args: ComputeArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read config {}: {err}", args.config.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let config = match report::parse_config(&text).and_then(|cfg| apply_overrides(cfg, &args)) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build();
    let pool = match pool {
        Ok(pool) => pool,
        Err(err) => {
            eprintln!("error: cannot build worker pool: {err}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };

    match pool.install(|| report::run_sweep(&config)) {
        Ok(output) => {
            if let Err(code) = write_outputs(&config, &output.csv, &output.manifest) {
                return code;
            }
            println!(
                "wrote {} ({} cells) and {}",
                config.outputs.csv,
                output.manifest.cells.len(),
                config.outputs.manifest
            );
            ExitCode::SUCCESS
        }
        Err(SweepError::Estimator { source, manifest }) => {
            eprintln!("error: {source}");
            // leave the partial-results marker behind for post-mortems
            if let Err(err) = std::fs::write(&config.outputs.manifest, manifest.render()) {
                eprintln!("error: cannot write manifest {}: {err}", config.outputs.manifest);
            }
            ExitCode::from(EXIT_ESTIMATOR)
        }
    }
}

fn apply_overrides(cfg: RunConfig, args: &ComputeArgs) -> Result<RunConfig, report::ConfigError> {
    let outputs = report::OutputPaths {
        csv: args.out.clone().unwrap_or(cfg.outputs.csv),
        svg: args.svg.clone().or(cfg.outputs.svg),
        manifest: args.manifest.clone().unwrap_or(cfg.outputs.manifest),
    };
    build_config(
        cfg.rs_grid,
        cfg.tau_grid,
        args.samples.unwrap_or(cfg.sampler.n_samples),
        args.seed.unwrap_or(cfg.sampler.seed),
        cfg.sampler.q_tail_scale,
        cfg.sampler.batch_size,
        cfg.sampler.oracle_box,
        outputs,
    )
}

fn write_outputs(config: &RunConfig, csv: &str, manifest: &RunManifest) -> Result<(), ExitCode> {
    debug_assert!(matches!(manifest.status, ManifestStatus::Complete));
    let write = |path: &str, bytes: &str| -> Result<(), ExitCode> {
        std::fs::write(path, bytes).map_err(|err| {
            eprintln!("error: cannot write {path}: {err}");
            ExitCode::from(EXIT_VALIDATION)
        })
    };
    write(&config.outputs.csv, csv)?;
    if let Some(svg_path) = &config.outputs.svg {
        let svg = report::emit_svg(csv).map_err(|err| {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_ESTIMATOR)
        })?;
        write(svg_path, &svg)?;
    }
    write(&config.outputs.manifest, &manifest.render())?;
    Ok(())
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    let options = verify::Options {
        bin: std::env::current_exe().ok(),
    };
    let results = match args.criterion {
        Some(id) => match verify::run_criterion(id, &options) {
            Some(result) => vec![result],
            None => {
                eprintln!("error: criterion must be in 1..=8");
                return ExitCode::from(EXIT_VALIDATION);
            }
        },
        None => verify::run_all(&options),
    };
    let mut all_pass = true;
    for r in &results {
        println!("{r}");
        all_pass &= r.passed;
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ESTIMATOR)
    }
}
