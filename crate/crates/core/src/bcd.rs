//! Block-coordinate descent between the computing block (offload split and
//! edge CPU shares) and the communication block (receivers and phase
//! shifts), plus the benchmark schemes.

use serde::{Deserialize, Serialize};

use crate::comm::rates::rates;
use crate::comm::sum_ratio::LineSearchStep;
use crate::comm::{newton_like_outer, CommProblem, OuterOptions, ReceiveBank};
use crate::compute::{allocate_edge, latency, EdgeAllocation};
use crate::error::{Error, Result};
use crate::reflection::{BpsVector, ReflectionMode};
use crate::scenario::{rng_for, Scenario, STREAM_SOLVER};
use crate::trace::{ConvergenceTrace, TraceLevel};

/// A complete design and its latencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub d: Vec<u64>,
    pub edge_cpu: Vec<f64>,
    pub bank: ReceiveBank,
    pub theta: BpsVector,
    pub rates: Vec<f64>,
    pub latency: Vec<f64>,
    pub weighted_latency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative improvement below which the outer loop stops.
    pub eps: f64,
    pub l3_max: usize,
    /// Reflection model used inside the optimiser.
    pub mode: ReflectionMode,
    pub eps1: f64,
    pub l1_max: usize,
    pub comm: OuterOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            l3_max: 10,
            mode: ReflectionMode::Practical,
            eps1: 1e-9,
            l1_max: 20,
            comm: OuterOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Solution,
    pub traces: Vec<ConvergenceTrace>,
    pub line_search: Vec<LineSearchStep>,
    pub outer_iterations: usize,
    pub converged: bool,
}

impl SolveReport {
    pub fn traces_at(&self, level: TraceLevel) -> impl Iterator<Item = &ConvergenceTrace> {
        self.traces.iter().filter(move |t| t.level == level)
    }

    pub fn outer_trace(&self) -> &ConvergenceTrace {
        self.traces_at(TraceLevel::Outer)
            .next()
            .expect("every solve records an outer trace")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Joint design under the practical reflection model.
    ProposedPractical,
    /// Joint design assuming ideal reflection, deployed on practical hardware.
    IdealDesign,
    /// No IRS; receivers and computing only.
    NoIrs,
    /// Random phase shifts; receivers and computing optimised.
    RandomPhase,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::ProposedPractical,
        Scheme::IdealDesign,
        Scheme::NoIrs,
        Scheme::RandomPhase,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::ProposedPractical => "ProposedPractical",
            Scheme::IdealDesign => "IdealDesign",
            Scheme::NoIrs => "NoIrs",
            Scheme::RandomPhase => "RandomPhase",
        }
    }
}

fn comm_problem(scenario: &Scenario, mode: ReflectionMode) -> Result<CommProblem<'_>> {
    CommProblem::new(
        &scenario.channels,
        &scenario.plan,
        &scenario.reflection,
        mode,
        scenario.resolution,
    )
}

/// Rates and latencies of a given design under `mode`, after checking
/// feasibility.
pub fn evaluate(
    scenario: &Scenario,
    d: &[u64],
    edge_cpu: &[f64],
    bank: &ReceiveBank,
    theta: &BpsVector,
    mode: ReflectionMode,
) -> Result<Solution> {
    let prob = comm_problem(scenario, mode)?;
    let profile = &scenario.profile;
    let kk = profile.devices();
    let mut bad = Vec::new();
    if d.len() != kk || edge_cpu.len() != kk || bank.u.len() != kk {
        return Err(Error::Dimension(format!(
            "design covers {} / {} / {} devices, scenario has {kk}",
            d.len(),
            edge_cpu.len(),
            bank.u.len()
        )));
    }
    if bank.u.iter().any(|row| {
        row.len() != prob.subcarriers() || row.iter().any(|u| u.len() != prob.antennas())
    }) {
        return Err(Error::Dimension("receive bank shape does not match the scenario".into()));
    }
    for k in 0..kk {
        if d[k] > profile.data_bits[k] {
            bad.push(format!("d[{k}] = {} exceeds D = {}", d[k], profile.data_bits[k]));
        }
        if !(edge_cpu[k] >= 0.0) {
            bad.push(format!("edge share {k} = {} is negative", edge_cpu[k]));
        }
    }
    let used: f64 = edge_cpu.iter().sum();
    if used > profile.edge_total * (1.0 + 1e-9) {
        bad.push(format!(
            "edge shares sum to {used:e}, budget is {:e}",
            profile.edge_total
        ));
    }
    bad.extend(bank.violations());
    if theta.resolution != scenario.resolution {
        bad.push(format!(
            "phase resolution {:?} differs from the scenario's {:?}",
            theta.resolution, scenario.resolution
        ));
    }
    bad.extend(theta.violations());
    if !bad.is_empty() {
        return Err(Error::Infeasible(bad));
    }
    let h = prob.effective(&prob.reflection(theta)?);
    let r = rates(&h, bank, prob.plan, prob.cs.p_tx, prob.cs.sigma2);
    let lat: Vec<f64> = (0..kk)
        .map(|k| latency(k, d[k], edge_cpu[k], r[k], profile))
        .collect();
    let weighted_latency = lat.iter().zip(&profile.weights).map(|(t, w)| t * w).sum();
    Ok(Solution {
        d: d.to_vec(),
        edge_cpu: edge_cpu.to_vec(),
        bank: bank.clone(),
        theta: theta.clone(),
        rates: r,
        latency: lat,
        weighted_latency,
    })
}

fn alg1_trace(out: &EdgeAllocation, call: usize) -> ConvergenceTrace {
    ConvergenceTrace {
        level: TraceLevel::Alg1,
        call,
        values: out.trace.clone(),
        iterations: out.iterations,
        converged: true,
    }
}

/// Computing allocation for the rates of `(bank, theta)`, evaluated under `mode`.
fn refit(
    scenario: &Scenario,
    bank: &ReceiveBank,
    theta: &BpsVector,
    mode: ReflectionMode,
    opts: &SolveOptions,
) -> Result<(Solution, EdgeAllocation)> {
    let prob = comm_problem(scenario, mode)?;
    let h = prob.effective(&prob.reflection(theta)?);
    let r = rates(&h, bank, prob.plan, prob.cs.p_tx, prob.cs.sigma2);
    let alloc = allocate_edge(&r, &scenario.profile, opts.eps1, opts.l1_max)?;
    let sol = evaluate(
        scenario,
        &alloc.allocation.d,
        &alloc.allocation.edge_cpu,
        bank,
        theta,
        mode,
    )?;
    Ok((sol, alloc))
}

/// Alternates the computing and communication blocks from a seeded random
/// start and returns the best design found.
pub fn solve(scenario: &Scenario, opts: &SolveOptions) -> Result<SolveReport> {
    let prob = comm_problem(scenario, opts.mode)?;
    let mut rng = rng_for(scenario.seed, STREAM_SOLVER);
    let theta = prob.random_theta(&mut rng);
    let bank = ReceiveBank::matched(&prob.effective(&prob.reflection(&theta)?));
    solve_from(scenario, &prob, bank, theta, opts)
}

fn solve_from(
    scenario: &Scenario,
    prob: &CommProblem,
    bank: ReceiveBank,
    theta: BpsVector,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let mut traces = Vec::new();
    let mut line_search = Vec::new();
    let (mut best, alloc) = refit(scenario, &bank, &theta, opts.mode, opts)?;
    let mut alg1_calls = 0;
    traces.push(alg1_trace(&alloc, alg1_calls));
    alg1_calls += 1;
    let mut outer = ConvergenceTrace::new(TraceLevel::Outer, 0);
    outer.values.push(best.weighted_latency);
    let mut alg3_calls = 0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.l3_max {
        iterations += 1;
        let wrap = |e: Error| Error::Outer {
            iteration: iterations,
            source: Box::new(e),
        };
        let comm = newton_like_outer(
            prob,
            &scenario.profile,
            &best.d,
            &best.bank,
            &best.theta,
            &opts.comm,
        )
        .map_err(wrap)?;
        traces.push(ConvergenceTrace {
            level: TraceLevel::Alg2,
            call: iterations - 1,
            values: comm.trace.clone(),
            iterations: comm.iterations,
            converged: comm.converged,
        });
        for inner in &comm.inner {
            traces.push(ConvergenceTrace {
                level: TraceLevel::Alg3,
                call: alg3_calls,
                values: inner.trace.clone(),
                iterations: inner.iterations,
                converged: inner.converged,
            });
            alg3_calls += 1;
        }
        line_search.extend(comm.steps.iter().copied());

        let (candidate, alloc) =
            refit(scenario, &comm.bank, &comm.theta, opts.mode, opts).map_err(wrap)?;
        traces.push(alg1_trace(&alloc, alg1_calls));
        alg1_calls += 1;

        let prev = best.weighted_latency;
        let improved = candidate.weighted_latency < prev;
        if improved {
            best = candidate;
        }
        outer.values.push(best.weighted_latency);
        let rel = (prev - best.weighted_latency) / best.weighted_latency;
        if !improved || rel <= opts.eps {
            converged = true;
            break;
        }
    }
    outer.iterations = iterations;
    outer.converged = converged;
    traces.insert(0, outer);
    Ok(SolveReport {
        solution: best,
        traces,
        line_search,
        outer_iterations: iterations,
        converged,
    })
}

/// Runs one benchmark scheme. Every returned solution is evaluated under the
/// practical reflection model.
pub fn run_scheme(scenario: &Scenario, scheme: Scheme, opts: &SolveOptions) -> Result<SolveReport> {
    match scheme {
        Scheme::ProposedPractical => solve(
            scenario,
            &SolveOptions {
                mode: ReflectionMode::Practical,
                ..*opts
            },
        ),
        Scheme::IdealDesign => {
            let mut report = solve(
                scenario,
                &SolveOptions {
                    mode: ReflectionMode::Ideal,
                    ..*opts
                },
            )?;
            let design = &report.solution;
            let (practical, alloc) = refit(
                scenario,
                &design.bank,
                &design.theta,
                ReflectionMode::Practical,
                opts,
            )?;
            let calls = report.traces_at(TraceLevel::Alg1).count();
            report.traces.push(alg1_trace(&alloc, calls));
            report.solution = practical;
            Ok(report)
        }
        Scheme::NoIrs => solve(
            &scenario.without_irs(),
            &SolveOptions {
                mode: ReflectionMode::Practical,
                ..*opts
            },
        ),
        Scheme::RandomPhase => {
            let mut o = SolveOptions {
                mode: ReflectionMode::Practical,
                ..*opts
            };
            o.comm.inner.optimize_theta = false;
            solve(scenario, &o)
        }
    }
}
