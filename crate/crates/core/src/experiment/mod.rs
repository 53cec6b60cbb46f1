//! Parameter sweeps over seeded scenarios and their CSV outputs.

pub mod cli;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcd::{run_scheme, Scheme, SolveOptions, SolveReport};
use crate::comm::OuterOptions;
use crate::error::{Error, Result};
use crate::reflection::Resolution;
use crate::scenario::{ResolutionSetting, ScenarioConfig};
use crate::trace::ConvergenceTrace;

pub const RESULTS_HEADER: &str =
    "scheme,sweep_param,sweep_value,seed,weighted_latency_s,outer_iterations,wall_time_s,per_device_latency_s";
pub const TRACE_HEADER: &str = "level,call,iteration,value";
pub const SEED_OFFSET_VAR: &str = "IRS_MEC_SEED_OFFSET";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    /// BS antennas.
    M,
    /// IRS elements.
    N,
    /// Phase resolution in bits; 0 selects continuous phases.
    #[serde(rename = "b")]
    B,
    /// Edge CPU budget (cycles/s).
    #[serde(rename = "F_total")]
    FTotal,
    /// Distance from the BS to the device cluster centre (m).
    L,
    /// Device count.
    K,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::M => "M",
            SweepParam::N => "N",
            SweepParam::B => "b",
            SweepParam::FTotal => "F_total",
            SweepParam::L => "L",
            SweepParam::K => "K",
        }
    }

    fn is_integer(&self) -> bool {
        !matches!(self, SweepParam::FTotal | SweepParam::L)
    }

    pub fn format_value(&self, v: f64) -> String {
        if self.is_integer() {
            format!("{}", v as u64)
        } else {
            format!("{v}")
        }
    }

    pub fn apply(&self, base: &ScenarioConfig, v: f64) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self {
            SweepParam::M => cfg.array.bs_antennas = v as usize,
            SweepParam::N => cfg.array.irs_elements = v as usize,
            SweepParam::B => {
                cfg.array.resolution = ResolutionSetting(if v == 0.0 {
                    Resolution::Continuous
                } else {
                    Resolution::Discrete(v as u32)
                })
            }
            SweepParam::FTotal => cfg.computing.edge_total = v,
            SweepParam::L => cfg.geometry.wd_center = v,
            SweepParam::K => cfg.geometry.devices = v as usize,
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

/// Solver tolerances exposed to configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub eps: f64,
    pub l3_max: usize,
    pub eps1: f64,
    pub l1_max: usize,
    pub eps2: f64,
    pub l2_max: usize,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolveOptions::default();
        Self {
            eps: s.eps,
            l3_max: s.l3_max,
            eps1: s.eps1,
            l1_max: s.l1_max,
            eps2: s.comm.eps2,
            l2_max: s.comm.l2_max,
            inner_tol: s.comm.inner.tol,
            inner_max_iter: s.comm.inner.max_iter,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        let base = SolveOptions::default();
        let mut comm = OuterOptions {
            eps2: self.eps2,
            l2_max: self.l2_max,
            ..base.comm
        };
        comm.inner.tol = self.inner_tol;
        comm.inner.max_iter = self.inner_max_iter;
        SolveOptions {
            eps: self.eps,
            l3_max: self.l3_max,
            eps1: self.eps1,
            l1_max: self.l1_max,
            comm,
            ..base
        }
    }
}

fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    pub seeds: Vec<u64>,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Off by default so that reruns produce identical files.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds: at least one seed is required".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("schemes: at least one scheme is required".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::InvalidConfig("sweep.values: empty".into()));
            }
            for &v in &sweep.values {
                let zero_ok = sweep.parameter == SweepParam::B;
                let sign_ok = v > 0.0 || (zero_ok && v == 0.0);
                if !v.is_finite() || !sign_ok {
                    return Err(Error::InvalidConfig(format!(
                        "sweep.values: {v} is not a valid {}",
                        sweep.parameter.as_str()
                    )));
                }
                if sweep.parameter.is_integer() && v.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "sweep.values: {} takes integers, got {v}",
                        sweep.parameter.as_str()
                    )));
                }
                sweep.parameter.apply(&self.scenario, v).plan_check()?;
            }
        }
        self.scenario.plan_check()
    }

    /// `(parameter, value, scenario)` per sweep point; a single point when no
    /// sweep is configured.
    pub fn points(&self) -> Vec<(Option<SweepParam>, f64, ScenarioConfig)> {
        match &self.sweep {
            Some(s) => s
                .values
                .iter()
                .map(|&v| (Some(s.parameter), v, s.parameter.apply(&self.scenario, v)))
                .collect(),
            None => vec![(None, 0.0, self.scenario.clone())],
        }
    }
}

trait PlanCheck {
    fn plan_check(&self) -> Result<()>;
}

impl PlanCheck for ScenarioConfig {
    fn plan_check(&self) -> Result<()> {
        self.geometry.validate()?;
        self.carrier.plan()?;
        if self.array.bs_antennas == 0 {
            return Err(Error::InvalidConfig("array.bs_antennas must be positive".into()));
        }
        if let Resolution::Discrete(b) = self.array.resolution.0 {
            if !(1..=16).contains(&b) {
                return Err(Error::InvalidConfig(format!("array.resolution: {b} bits")));
            }
        }
        Ok(())
    }
}

/// Seed offset from `IRS_MEC_SEED_OFFSET`, zero when unset.
pub fn seed_offset_from_env() -> Result<i64> {
    match std::env::var(SEED_OFFSET_VAR) {
        Ok(s) => s.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("{SEED_OFFSET_VAR}={s:?} is not an integer"))
        }),
        Err(_) => Ok(0),
    }
}

pub fn offset_seed(seed: u64, offset: i64) -> Result<u64> {
    seed.checked_add_signed(offset)
        .ok_or_else(|| Error::InvalidConfig(format!("seed {seed} with offset {offset} is out of range")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Solved {
        weighted_latency: f64,
        latency: Vec<f64>,
        outer_iterations: usize,
        traces: Vec<ConvergenceTrace>,
    },
    Infeasible(String),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub sweep_param: Option<SweepParam>,
    pub sweep_value: f64,
    pub seed: u64,
    pub wall_time_s: f64,
    pub outcome: CellOutcome,
}

fn sci(v: f64) -> String {
    format!("{v:.11e}")
}

impl ResultRow {
    pub fn is_failure(&self) -> bool {
        !matches!(self.outcome, CellOutcome::Solved { .. })
    }

    fn param_str(&self) -> &'static str {
        self.sweep_param.map_or("none", |p| p.as_str())
    }

    fn value_str(&self) -> String {
        self.sweep_param
            .map_or_else(|| "0".to_string(), |p| p.format_value(self.sweep_value))
    }

    pub fn csv_line(&self) -> String {
        let wall = if self.wall_time_s > 0.0 { sci(self.wall_time_s) } else { "0".into() };
        let (latency, iters, per_device) = match &self.outcome {
            CellOutcome::Solved {
                weighted_latency,
                latency,
                outer_iterations,
                ..
            } => (
                sci(*weighted_latency),
                outer_iterations.to_string(),
                latency.iter().map(|&t| sci(t)).collect::<Vec<_>>().join(";"),
            ),
            CellOutcome::Infeasible(_) => ("infeasible".into(), String::new(), String::new()),
            CellOutcome::Failed(_) => ("failed".into(), String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{latency},{iters},{wall},{per_device}",
            self.scheme.as_str(),
            self.param_str(),
            self.value_str(),
            self.seed
        )
    }

    /// `trace_<scheme>_<param>_<value>_seed<seed>.csv`
    pub fn trace_file_name(&self) -> String {
        format!(
            "trace_{}_{}_{}_seed{}.csv",
            self.scheme.as_str(),
            self.param_str(),
            self.value_str(),
            self.seed
        )
    }
}

pub fn traces_csv(traces: &[ConvergenceTrace]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for t in traces {
        for (i, v) in t.values.iter().enumerate() {
            let _ = writeln!(out, "{},{},{i},{}", t.level.as_str(), t.call, sci(*v));
        }
    }
    out
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

fn is_infeasible(e: &Error) -> bool {
    match e {
        Error::Infeasible(_) => true,
        Error::Outer { source, .. } => is_infeasible(source),
        _ => false,
    }
}

/// Runs one scheme on one seeded scenario.
pub fn run_cell(
    cfg: &ScenarioConfig,
    scheme: Scheme,
    seed: u64,
    opts: &SolveOptions,
) -> (CellOutcome, f64) {
    let start = Instant::now();
    let result = cfg
        .build(seed)
        .and_then(|s| run_scheme(&s, scheme, opts));
    let elapsed = start.elapsed().as_secs_f64();
    let outcome = match result {
        Ok(SolveReport {
            solution,
            traces,
            outer_iterations,
            ..
        }) => CellOutcome::Solved {
            weighted_latency: solution.weighted_latency,
            latency: solution.latency,
            outer_iterations,
            traces,
        },
        Err(e) if is_infeasible(&e) => CellOutcome::Infeasible(e.to_string()),
        Err(e) => CellOutcome::Failed(e.to_string()),
    };
    (outcome, elapsed)
}

/// Every `(scheme, sweep value, seed)` cell, in output order.
pub fn run_experiment(cfg: &ExperimentConfig, seed_offset: i64) -> Result<Vec<ResultRow>> {
    let opts = cfg.solver.options();
    let seeds = cfg
        .seeds
        .iter()
        .map(|&s| offset_seed(s, seed_offset))
        .collect::<Result<Vec<_>>>()?;
    let points = cfg.points();
    let mut cells = Vec::new();
    for &scheme in &cfg.schemes {
        for (param, value, scenario) in &points {
            for &seed in &seeds {
                cells.push((scheme, *param, *value, scenario, seed));
            }
        }
    }
    Ok(cells
        .into_par_iter()
        .map(|(scheme, sweep_param, sweep_value, scenario, seed)| {
            let (outcome, wall) = run_cell(scenario, scheme, seed, &opts);
            match &outcome {
                CellOutcome::Infeasible(msg) | CellOutcome::Failed(msg) => log::warn!(
                    "{} {}={sweep_value} seed {seed}: {msg}",
                    scheme.as_str(),
                    sweep_param.map_or("none", |p| p.as_str())
                ),
                CellOutcome::Solved { .. } => log::debug!(
                    "{} {}={sweep_value} seed {seed} done in {wall:.3} s",
                    scheme.as_str(),
                    sweep_param.map_or("none", |p| p.as_str())
                ),
            }
            ResultRow {
                scheme,
                sweep_param,
                sweep_value,
                seed,
                wall_time_s: if cfg.record_wall_time { wall } else { 0.0 },
                outcome,
            }
        })
        .collect())
}

/// Writes `results.csv` and one trace file per solved cell.
pub fn write_outputs(rows: &[ResultRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for r in rows {
        if let CellOutcome::Solved { traces, .. } = &r.outcome {
            fs::write(dir.join(r.trace_file_name()), traces_csv(traces))?;
        }
    }
    fs::write(dir.join("results.csv"), results_csv(rows))?;
    Ok(())
}

/// One parsed line of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub level: String,
    pub call: usize,
    pub iteration: usize,
    pub value: f64,
}

pub fn parse_traces_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::InvalidConfig("trace file header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::InvalidConfig(format!("trace line {}: {line:?}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad());
            }
            Ok(TraceRecord {
                level: f[0].to_string(),
                call: f[1].parse().map_err(|_| bad())?,
                iteration: f[2].parse().map_err(|_| bad())?,
                value: f[3].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_rejections() {
        let cfg = ExperimentConfig::from_json_str(r#"{"seeds": [1]}"#).unwrap();
        assert_eq!(cfg.schemes.len(), 4);
        assert_eq!(cfg.points().len(), 1);
        for bad in [
            r#"{"seeds": []}"#,
            r#"{"seeds": [1], "colour": 3}"#,
            r#"{"seeds": [1], "sweep": {"parameter": "N", "values": [-1]}}"#,
            r#"{"seeds": [1], "sweep": {"parameter": "M", "values": [2.5]}}"#,
            r#"{"seeds": [1], "sweep": {"parameter": "Q", "values": [1]}}"#,
            r#"{"seeds": [1], "sweep": {"parameter": "N", "values": [0]}}"#,
            r#"{"seeds": [1], "schemes": ["Oracle"]}"#,
        ] {
            assert!(ExperimentConfig::from_json_str(bad).is_err(), "{bad}");
        }
        let b0 = r#"{"seeds": [1], "sweep": {"parameter": "b", "values": [0, 3]}}"#;
        let cfg = ExperimentConfig::from_json_str(b0).unwrap();
        let pts = cfg.points();
        assert_eq!(pts[0].2.array.resolution.0, Resolution::Continuous);
        assert_eq!(pts[1].2.array.resolution.0, Resolution::Discrete(3));
    }

    #[test]
    fn sweep_application() {
        let base = ScenarioConfig::default();
        assert_eq!(SweepParam::M.apply(&base, 6.0).array.bs_antennas, 6);
        assert_eq!(SweepParam::N.apply(&base, 40.0).array.irs_elements, 40);
        assert_eq!(SweepParam::K.apply(&base, 5.0).geometry.devices, 5);
        assert_eq!(SweepParam::L.apply(&base, 250.0).geometry.wd_center, 250.0);
        assert_eq!(SweepParam::FTotal.apply(&base, 3e12).computing.edge_total, 3e12);
        assert_eq!(SweepParam::FTotal.format_value(3e12), "3000000000000");
        assert_eq!(SweepParam::L.format_value(262.5), "262.5");
    }

    #[test]
    fn seed_offsets() {
        assert_eq!(offset_seed(5, 3).unwrap(), 8);
        assert_eq!(offset_seed(5, -5).unwrap(), 0);
        assert!(offset_seed(5, -6).is_err());
    }

    #[test]
    fn row_formatting() {
        let row = ResultRow {
            scheme: Scheme::NoIrs,
            sweep_param: Some(SweepParam::N),
            sweep_value: 20.0,
            seed: 7,
            wall_time_s: 0.0,
            outcome: CellOutcome::Solved {
                weighted_latency: 1.5e-3,
                latency: vec![1e-3, 2e-3],
                outer_iterations: 2,
                traces: vec![],
            },
        };
        assert_eq!(
            row.csv_line(),
            "NoIrs,N,20,7,1.50000000000e-3,2,0,1.00000000000e-3;2.00000000000e-3"
        );
        assert_eq!(row.trace_file_name(), "trace_NoIrs_N_20_seed7.csv");
        let failed = ResultRow {
            outcome: CellOutcome::Infeasible("x".into()),
            ..row
        };
        assert_eq!(failed.csv_line(), "NoIrs,N,20,7,infeasible,,0,");
        assert!(failed.is_failure());
    }

    #[test]
    fn trace_round_trip() {
        let mut t = ConvergenceTrace::new(crate::trace::TraceLevel::Alg3, 4);
        t.values = vec![1.0 / 3.0, 2.5e-7, 12345.678];
        let parsed = parse_traces_csv(&traces_csv(&[t.clone()])).unwrap();
        assert_eq!(parsed.len(), 3);
        for (r, v) in parsed.iter().zip(&t.values) {
            assert_eq!(r.level, "alg3");
            assert_eq!(r.call, 4);
            assert!(((r.value - v) / v).abs() < 1e-11);
        }
    }
}
