//! `irs-mec` subcommands. Each returns the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::{
    offset_seed, run_experiment, seed_offset_from_env, traces_csv, write_outputs, ExperimentConfig,
};
use crate::bcd::{run_scheme, Scheme};
use crate::error::Error;
use crate::reflection::{model_report, ReflectionMode, ReflectionParams};
use crate::scenario::CarrierConfig;
use crate::trace::TraceLevel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CELLS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PASSIVITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "irs-mec", about = "IRS-assisted MEC latency experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Practical,
    Ideal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every (scheme, sweep value, seed) cell of a config.
    Run {
        config: PathBuf,
        /// Worker threads; defaults to the available cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory, overriding the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report amplitude and phase-slope ranges of the reflection model.
    ValidateModel {
        params: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "practical")]
        mode: ModeArg,
        /// Grid points per axis.
        #[arg(long, default_value_t = 721)]
        grid: usize,
    },
    /// Solve the first seed of each sweep point and dump all traces.
    Convergence {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { config, jobs, out } => cmd_run(&config, jobs, out.as_deref()),
        Command::ValidateModel { params, mode, grid } => {
            let mode = match mode {
                ModeArg::Practical => ReflectionMode::Practical,
                ModeArg::Ideal => ReflectionMode::Ideal,
            };
            cmd_validate_model(params.as_deref(), mode, grid)
        }
        Command::Convergence { config, out } => cmd_convergence(&config, out.as_deref()),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, i32> {
    ExperimentConfig::from_path(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_CONFIG
    })
}

fn seed_offset() -> Result<i64, i32> {
    seed_offset_from_env().map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}

pub fn cmd_run(config: &Path, jobs: Option<usize>, out: Option<&Path>) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let offset = match seed_offset() {
        Ok(o) => o,
        Err(code) => return code,
    };
    let dir = out.map_or_else(|| cfg.output_dir.clone(), Path::to_path_buf);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        pool = pool.num_threads(n.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let rows = match pool.install(|| run_experiment(&cfg, offset)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = write_outputs(&rows, &dir) {
        eprintln!("error: writing {}: {e}", dir.display());
        return EXIT_FAILED_CELLS;
    }
    let failed = rows.iter().filter(|r| r.is_failure()).count();
    println!(
        "{} cells, {failed} failed, results in {}",
        rows.len(),
        dir.join("results.csv").display()
    );
    if failed > 0 {
        EXIT_FAILED_CELLS
    } else {
        EXIT_OK
    }
}

pub fn cmd_validate_model(params: Option<&Path>, mode: ReflectionMode, grid: usize) -> i32 {
    let p = match params {
        Some(path) => match ReflectionParams::from_path(path) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        },
        None => ReflectionParams::default(),
    };
    let plan = match CarrierConfig::default().plan() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let report = match model_report(&p, &plan, grid, mode) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    println!(
        "amplitude  min {:.6} at theta={:.4} rad f={:.4} GHz",
        report.min_amp,
        report.min_amp_at.0,
        report.min_amp_at.1 / 1e9
    );
    println!(
        "amplitude  max {:.6} at theta={:.4} rad f={:.4} GHz",
        report.max_amp,
        report.max_amp_at.0,
        report.max_amp_at.1 / 1e9
    );
    println!(
        "phase slope range [{:.6}, {:.6}] rad/GHz",
        report.min_slope, report.max_slope
    );
    if report.is_passive() {
        println!("passive: yes");
        EXIT_OK
    } else {
        let (theta, freq_hz) = report.max_amp_at;
        let e = Error::PassivityViolation {
            theta,
            freq_hz,
            amplitude: report.max_amp,
        };
        eprintln!("error: {e}");
        EXIT_PASSIVITY
    }
}

/// Writes `convergence_<param>_<value>.csv` per sweep point (or
/// `convergence.csv` without a sweep) for the proposed scheme.
pub fn cmd_convergence(config: &Path, out: Option<&Path>) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let offset = match seed_offset() {
        Ok(o) => o,
        Err(code) => return code,
    };
    let seed = match offset_seed(cfg.seeds[0], offset) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let dir = out.map_or_else(|| cfg.output_dir.clone(), Path::to_path_buf);
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: {}: {e}", dir.display());
        return EXIT_FAILED_CELLS;
    }
    let opts = cfg.solver.options();
    let mut code = EXIT_OK;
    for (param, value, scenario_cfg) in cfg.points() {
        let name = match param {
            Some(p) => format!("convergence_{}_{}.csv", p.as_str(), p.format_value(value)),
            None => "convergence.csv".to_string(),
        };
        let report = scenario_cfg
            .build(seed)
            .and_then(|s| run_scheme(&s, Scheme::ProposedPractical, &opts));
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {name}: {e}");
                code = EXIT_FAILED_CELLS;
                continue;
            }
        };
        let longest = |level| {
            report
                .traces_at(level)
                .map(|t| t.iterations)
                .max()
                .unwrap_or(0)
        };
        println!(
            "{name}: latency {:.6e} s, outer {} iterations, alg2 <= {}, alg3 <= {}",
            report.solution.weighted_latency,
            report.outer_iterations,
            longest(TraceLevel::Alg2),
            longest(TraceLevel::Alg3)
        );
        if let Err(e) = fs::write(dir.join(&name), traces_csv(&report.traces)) {
            eprintln!("error: {name}: {e}");
            code = EXIT_FAILED_CELLS;
        }
    }
    code
}
