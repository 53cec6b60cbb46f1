//! Computing-side design: per-device latency, the integer offload split, and
//! KKT/bisection allocation of the edge CPU budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-device task description plus the shared edge budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeProfile {
    /// Total task size `D_k`, bits.
    pub data_bits: Vec<u64>,
    /// Complexity `c_k`, cycles per bit.
    pub complexity: Vec<f64>,
    /// Local CPU speed `F^l_k`, cycles/s.
    pub local_cpu: Vec<f64>,
    /// Edge budget `F^e_total`, cycles/s.
    pub edge_total: f64,
    /// Latency weights, summing to one.
    pub weights: Vec<f64>,
}

impl ComputeProfile {
    pub fn new(
        data_bits: Vec<u64>,
        complexity: Vec<f64>,
        local_cpu: Vec<f64>,
        edge_total: f64,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let profile = Self {
            data_bits,
            complexity,
            local_cpu,
            edge_total,
            weights,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Equal weights `1/K`.
    pub fn with_equal_weights(
        data_bits: Vec<u64>,
        complexity: Vec<f64>,
        local_cpu: Vec<f64>,
        edge_total: f64,
    ) -> Result<Self> {
        let k = data_bits.len();
        Self::new(
            data_bits,
            complexity,
            local_cpu,
            edge_total,
            vec![1.0 / k as f64; k],
        )
    }

    pub fn devices(&self) -> usize {
        self.data_bits.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.data_bits.len();
        if k == 0 {
            return Err(Error::InvalidConfig("at least one device is required".into()));
        }
        if self.complexity.len() != k || self.local_cpu.len() != k || self.weights.len() != k {
            return Err(Error::Dimension(
                "compute profile vectors must all have one entry per device".into(),
            ));
        }
        let positive = |v: &f64| v.is_finite() && *v > 0.0;
        if self.data_bits.contains(&0)
            || !self.complexity.iter().all(positive)
            || !self.local_cpu.iter().all(positive)
            || !self.weights.iter().all(positive)
            || !positive(&self.edge_total)
        {
            return Err(Error::InvalidConfig(
                "compute profile entries must be positive".into(),
            ));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "latency weights must sum to one, got {sum}"
            )));
        }
        Ok(())
    }

    /// Latency of computing everything locally.
    pub fn local_only_latency(&self, k: usize) -> f64 {
        self.data_bits[k] as f64 * self.complexity[k] / self.local_cpu[k]
    }
}

/// Offload volumes, edge CPU shares and the budget multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeAllocation {
    pub d: Vec<u64>,
    pub edge_cpu: Vec<f64>,
    pub eta: f64,
}

/// Latency of device `k`: the slower of the local and the offloaded branch.
///
/// The offloaded branch is zero when nothing is offloaded; offloading over a
/// dead link or onto a zero CPU share yields `f64::INFINITY`.
pub fn latency(k: usize, d: u64, edge_cpu: f64, rate: f64, profile: &ComputeProfile) -> f64 {
    let total = profile.data_bits[k];
    let c = profile.complexity[k];
    let local = (total - d.min(total)) as f64 * c / profile.local_cpu[k];
    if d == 0 {
        return local;
    }
    if rate <= 0.0 || edge_cpu <= 0.0 {
        return f64::INFINITY;
    }
    let d = d as f64;
    local.max(d / rate + d * c / edge_cpu)
}

/// Continuous offload volume that equalises local and edge latency.
pub fn balanced_split(k: usize, rate: f64, edge_cpu: f64, profile: &ComputeProfile) -> f64 {
    if rate <= 0.0 || edge_cpu <= 0.0 {
        return 0.0;
    }
    let dk = profile.data_bits[k] as f64;
    let c = profile.complexity[k];
    let fl = profile.local_cpu[k];
    dk * c * rate * edge_cpu / (edge_cpu * fl + c * rate * (edge_cpu + fl))
}

/// Best integer offload volume: the better of floor and ceiling of the
/// balanced split (smaller volume on ties).
pub fn optimal_split(k: usize, rate: f64, edge_cpu: f64, profile: &ComputeProfile) -> u64 {
    let total = profile.data_bits[k];
    let hat = balanced_split(k, rate, edge_cpu, profile).clamp(0.0, total as f64);
    let lo = (hat.floor() as u64).min(total);
    let hi = (hat.ceil() as u64).min(total);
    if latency(k, hi, edge_cpu, rate, profile) < latency(k, lo, edge_cpu, rate, profile) {
        hi
    } else {
        lo
    }
}

/// Weighted latency `sum_k w_k T_k`.
pub fn weighted_latency(
    d: &[u64],
    edge_cpu: &[f64],
    rates: &[f64],
    profile: &ComputeProfile,
) -> f64 {
    (0..profile.devices())
        .map(|k| profile.weights[k] * latency(k, d[k], edge_cpu[k], rates[k], profile))
        .sum()
}

/// Weighted latency with the offload split relaxed to its balanced value,
/// as a function of the edge shares alone.
pub fn relaxed_objective(edge_cpu: &[f64], rates: &[f64], profile: &ComputeProfile) -> f64 {
    (0..profile.devices())
        .map(|k| {
            let w = profile.weights[k];
            let (dk, c, fl) = (
                profile.data_bits[k] as f64,
                profile.complexity[k],
                profile.local_cpu[k],
            );
            let (r, f) = (rates[k], edge_cpu[k]);
            if r <= 0.0 || f <= 0.0 {
                return w * dk * c / fl;
            }
            w * (dk * c * c * r + dk * c * f) / (f * fl + c * r * (f + fl))
        })
        .sum()
}

fn edge_share(k: usize, eta: f64, rate: f64, profile: &ComputeProfile) -> f64 {
    let w = profile.weights[k];
    let dk = profile.data_bits[k] as f64;
    let c = profile.complexity[k];
    let fl = profile.local_cpu[k];
    let num = (w * dk * c.powi(3) * rate * rate / eta).sqrt() - c * rate * fl;
    (num / (fl + c * rate)).max(0.0)
}

/// Stationarity residual `|dL/dF_k| / eta` of the edge-allocation Lagrangian.
pub fn stationarity_residual(
    k: usize,
    edge_cpu: f64,
    eta: f64,
    rate: f64,
    profile: &ComputeProfile,
) -> f64 {
    let w = profile.weights[k];
    let dk = profile.data_bits[k] as f64;
    let c = profile.complexity[k];
    let fl = profile.local_cpu[k];
    let den = c * rate * fl + (fl + c * rate) * edge_cpu;
    (-w * dk * c.powi(3) * rate * rate / (den * den) + eta).abs() / eta
}

/// Result of the alternating offload/edge-CPU optimisation.
#[derive(Debug, Clone)]
pub struct EdgeAllocation {
    pub allocation: ComputeAllocation,
    /// Weighted latency after each alternating iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    /// Relaxed objective at the returned edge shares.
    pub relaxed_objective: f64,
    /// Largest stationarity residual over devices with a positive share.
    pub max_stationarity_residual: f64,
    /// `|sum F - F_total| / F_total`.
    pub budget_gap: f64,
}

/// Bisection on the budget multiplier so that the shares exhaust the edge
/// budget. Devices with a non-positive rate get no share.
fn bisect_edge_shares(
    rates: &[f64],
    profile: &ComputeProfile,
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let k = profile.devices();
    let active: Vec<usize> = (0..k).filter(|&i| rates[i] > 0.0 && rates[i].is_finite()).collect();
    let mut shares = vec![0.0; k];
    if active.is_empty() {
        return Ok((shares, 0.0));
    }
    let total = profile.edge_total;
    let sum_at = |eta: f64| -> f64 {
        active
            .iter()
            .map(|&i| edge_share(i, eta, rates[i], profile))
            .sum()
    };
    // At the upper end every share is clamped to zero; the lower end starts
    // far below and is pushed down until the budget is exceeded.
    let eta_hi_start = active
        .iter()
        .map(|&i| {
            profile.weights[i] * profile.data_bits[i] as f64 * profile.complexity[i]
                / profile.local_cpu[i].powi(2)
        })
        .fold(0.0, f64::max);
    let mut hi = eta_hi_start;
    let mut lo = 1e-18 * hi;
    let mut widen = 0;
    while sum_at(lo) < total {
        lo *= 1e-6;
        widen += 1;
        if widen > 20 || lo == 0.0 {
            return Err(Error::Numerical(format!(
                "could not bracket the edge budget multiplier (eta_u = {eta_hi_start:e})"
            )));
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let s = sum_at(mid);
        if (s - total).abs() <= tol * total {
            for &i in &active {
                shares[i] = edge_share(i, mid, rates[i], profile);
            }
            return Ok((shares, mid));
        }
        if s > total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!(
        "edge budget bisection did not converge: bracket [{lo:e}, {hi:e}], sum {:e} vs budget {total:e}",
        sum_at((lo * hi).sqrt())
    )))
}

/// Alternating optimisation of offload volumes and edge CPU shares for fixed
/// rates. Devices with zero rate stay fully local with no edge share.
pub fn allocate_edge(
    rates: &[f64],
    profile: &ComputeProfile,
    eps1: f64,
    l1_max: usize,
) -> Result<EdgeAllocation> {
    let k = profile.devices();
    if rates.len() != k {
        return Err(Error::Dimension(format!(
            "{} rates for {k} devices",
            rates.len()
        )));
    }
    let mut trace = Vec::new();
    let mut best: Option<ComputeAllocation> = None;
    let mut iterations = 0;
    while iterations < l1_max.max(1) {
        iterations += 1;
        let (edge_cpu, eta) = bisect_edge_shares(rates, profile, eps1)?;
        let d: Vec<u64> = (0..k)
            .map(|i| optimal_split(i, rates[i], edge_cpu[i], profile))
            .collect();
        let obj = weighted_latency(&d, &edge_cpu, rates, profile);
        let prev = trace.last().copied();
        match prev {
            Some(p) if obj > p => {
                // keep the incumbent
                trace.push(p);
            }
            _ => {
                trace.push(obj);
                best = Some(ComputeAllocation { d, edge_cpu, eta });
            }
        }
        if let Some(p) = prev {
            let cur = *trace.last().unwrap();
            if (cur - p).abs() <= eps1 * cur {
                break;
            }
        }
    }
    let allocation = best.expect("at least one iteration runs");
    let max_stationarity_residual = if allocation.eta > 0.0 {
        (0..k)
            .filter(|&i| allocation.edge_cpu[i] > 0.0)
            .map(|i| stationarity_residual(i, allocation.edge_cpu[i], allocation.eta, rates[i], profile))
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let used: f64 = allocation.edge_cpu.iter().sum();
    let budget_gap = if allocation.eta > 0.0 {
        (used - profile.edge_total).abs() / profile.edge_total
    } else {
        0.0
    };
    Ok(EdgeAllocation {
        relaxed_objective: relaxed_objective(&allocation.edge_cpu, rates, profile),
        allocation,
        trace,
        iterations,
        max_stationarity_residual,
        budget_gap,
    })
}
