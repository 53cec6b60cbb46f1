//! Per-call objective histories recorded by the solvers.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TraceLevel {
    /// Block-coordinate descent over communication and computing blocks.
    Outer,
    /// Sum-of-ratios loop with Newton-like multiplier updates.
    Alg2,
    /// WMMSE alternation over receivers and phase shifts.
    Alg3,
    /// Offload split and edge CPU alternation.
    Alg1,
}

impl TraceLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceLevel::Outer => "outer",
            TraceLevel::Alg2 => "alg2",
            TraceLevel::Alg3 => "alg3",
            TraceLevel::Alg1 => "alg1",
        }
    }

    /// Whether the level minimises (`true`) or maximises its objective.
    pub fn is_descent(&self) -> bool {
        !matches!(self, TraceLevel::Alg3)
    }
}

/// Objective values of one solver call, starting with the initial value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub level: TraceLevel,
    /// Index of this call among calls at the same level within one solve.
    pub call: usize,
    pub values: Vec<f64>,
    /// Update iterations performed.
    pub iterations: usize,
    pub converged: bool,
}

impl ConvergenceTrace {
    pub fn new(level: TraceLevel, call: usize) -> Self {
        Self {
            level,
            call,
            values: Vec::new(),
            iterations: 0,
            converged: false,
        }
    }

    /// Steps that move against the level's direction by more than `rel` of the
    /// larger magnitude, as `(index, before, after)`.
    pub fn violations(&self, rel: f64) -> Vec<(usize, f64, f64)> {
        self.values
            .windows(2)
            .enumerate()
            .filter_map(|(i, w)| {
                let slack = rel * w[0].abs().max(w[1].abs());
                let bad = if self.level.is_descent() {
                    w[1] > w[0] + slack
                } else {
                    w[1] < w[0] - slack
                };
                bad.then_some((i + 1, w[0], w[1]))
            })
            .collect()
    }

    pub fn is_monotone(&self, rel: f64) -> bool {
        self.violations(rel).is_empty()
    }
}
