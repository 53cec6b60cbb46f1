//! WMMSE alternation for the weighted sum rate `sum_k w_k sum_p ln(1 + gamma_{k,p})`.
//!
//! The surrogate `sum_k w_k sum_p (ln rho - rho MSE + 1)` is maximised block
//! by block: MMSE scalars `Upsilon`, weights `rho`, receivers, then phase
//! shifts. Each block update is exact, so the surrogate never decreases, and
//! at the MMSE point it equals the weighted sum rate. The natural log makes
//! `rho = 1 / MSE = 1 + gamma` the exact maximiser.

use nalgebra::DVector;
use num_complex::Complex64;

use super::bps::{assemble_bps_data, sweep_bps, SearchParams};
use super::rates::sinr_with;
use super::receiver::solve_receivers;
use super::{CommProblem, DualState, EffectiveChannels, ReceiveBank};
use crate::error::{Error, Result};
use crate::reflection::{BpsVector, ReflectionMatrixSet};
use crate::scenario::{effective_channel, ChannelSet};

/// MSE-optimal weight for a given SINR.
pub fn update_rho(gamma: f64) -> f64 {
    1.0 + gamma
}

/// MMSE receive scalar `sqrt(p) u^H h_k / (sum_j p |u^H h_j|^2 + sigma^2)`.
pub fn upsilon_with(
    h: &EffectiveChannels,
    u: &DVector<Complex64>,
    k: usize,
    p: usize,
    p_tx: f64,
    sigma2: f64,
) -> Complex64 {
    let total: f64 = h.h.iter().map(|hj| u.dotc(&hj[p]).norm_sqr()).sum::<f64>() * p_tx + sigma2;
    u.dotc(&h.h[k][p]) * p_tx.sqrt() / total
}

/// MMSE receive scalar of device `k` on subcarrier `p`.
pub fn update_upsilon(
    cs: &ChannelSet,
    refl: &ReflectionMatrixSet,
    bank: &ReceiveBank,
    k: usize,
    p: usize,
) -> Result<Complex64> {
    let h = EffectiveChannels {
        h: (0..cs.devices())
            .map(|j| {
                (0..cs.subcarriers())
                    .map(|q| effective_channel(cs, refl, j, q))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(upsilon_with(&h, &bank.u[k][p], k, p, cs.p_tx, cs.sigma2))
}

/// `p |Ups|^2 sum_j |u^H h_j|^2 - 2 Re{Ups^* sqrt(p) u^H h_k} + |Ups|^2 sigma^2 + 1`.
pub fn mse_with(
    h: &EffectiveChannels,
    u: &DVector<Complex64>,
    ups: Complex64,
    k: usize,
    p: usize,
    p_tx: f64,
    sigma2: f64,
) -> f64 {
    let a2 = ups.norm_sqr();
    let power: f64 = h.h.iter().map(|hj| u.dotc(&hj[p]).norm_sqr()).sum();
    a2 * p_tx * power - 2.0 * (ups.conj() * p_tx.sqrt() * u.dotc(&h.h[k][p])).re
        + a2 * sigma2
        + 1.0
}

/// `sum_k w_k sum_p (ln rho - rho MSE + 1)`.
pub fn surrogate(
    prob: &CommProblem,
    h: &EffectiveChannels,
    bank: &ReceiveBank,
    dual: &DualState,
    weights: &[f64],
) -> f64 {
    let (p_tx, s2) = (prob.cs.p_tx, prob.cs.sigma2);
    let mut total = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for p in 0..prob.subcarriers() {
            let rho = dual.rho[k][p];
            let mse = mse_with(h, &bank.u[k][p], dual.upsilon[k][p], k, p, p_tx, s2);
            acc += rho.ln() - rho * mse + 1.0;
        }
        total += w * acc;
    }
    total
}

/// `sum_k w_k sum_p ln(1 + gamma_{k,p})`.
pub fn weighted_sum_rate(
    prob: &CommProblem,
    h: &EffectiveChannels,
    bank: &ReceiveBank,
    weights: &[f64],
) -> f64 {
    let (p_tx, s2) = (prob.cs.p_tx, prob.cs.sigma2);
    weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(k, w)| {
            w * (0..prob.subcarriers())
                .map(|p| sinr_with(h, &bank.u[k][p], k, p, p_tx, s2).ln_1p())
                .sum::<f64>()
        })
        .sum()
}

/// Sets every `Upsilon` to its MMSE value and every `rho` to `1 + gamma`,
/// both at the current receivers and channels.
pub fn refresh_mmse(prob: &CommProblem, h: &EffectiveChannels, bank: &ReceiveBank, dual: &mut DualState) {
    let (p_tx, s2) = (prob.cs.p_tx, prob.cs.sigma2);
    for k in 0..prob.devices() {
        for p in 0..prob.subcarriers() {
            let u = &bank.u[k][p];
            dual.upsilon[k][p] = upsilon_with(h, u, k, p, p_tx, s2);
            dual.rho[k][p] = update_rho(sinr_with(h, u, k, p, p_tx, s2));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    /// Relative change of the weighted sum rate that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest phase move (rad) that ends the element sweeps.
    pub theta_tol: f64,
    pub max_sweeps: usize,
    /// Keep the phase shifts fixed when false.
    pub optimize_theta: bool,
    pub search: SearchParams,
    /// Relative slack allowed before a decrease is reported as an error.
    pub monotone_slack: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 30,
            theta_tol: 1e-4,
            max_sweeps: 20,
            optimize_theta: true,
            search: SearchParams::default(),
            monotone_slack: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub bank: ReceiveBank,
    pub theta: BpsVector,
    /// Weighted sum rate at the start and after every iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn check_increase(stage: &'static str, before: f64, after: f64, slack: f64) -> Result<()> {
    if after < before - slack * before.abs().max(after.abs()) {
        return Err(Error::Monotonicity {
            stage,
            before,
            after,
        });
    }
    Ok(())
}

/// Alternating maximisation of the weighted sum rate from `(bank, theta)`.
/// `dual.rho` and `dual.upsilon` are left at their values from the last
/// iteration.
pub fn wmmse_inner(
    prob: &CommProblem,
    dual: &mut DualState,
    weights: &[f64],
    bank: &ReceiveBank,
    theta: &BpsVector,
    opts: &InnerOptions,
) -> Result<InnerOutcome> {
    if weights.len() != prob.devices() {
        return Err(Error::Dimension(format!(
            "{} weights for {} devices",
            weights.len(),
            prob.devices()
        )));
    }
    let mut bank = bank.clone();
    let mut theta = theta.clone();
    let mut refl = prob.reflection(&theta)?;
    let mut h = prob.effective(&refl);
    let mut wsr = weighted_sum_rate(prob, &h, &bank, weights);
    let mut trace = vec![wsr];
    let slack = opts.monotone_slack;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        refresh_mmse(prob, &h, &bank, dual);
        let f0 = surrogate(prob, &h, &bank, dual, weights);
        check_increase("MMSE weight update", wsr, f0, slack)?;

        bank = solve_receivers(prob, &h, dual, weights, &bank)?;
        let f1 = surrogate(prob, &h, &bank, dual, weights);
        check_increase("receiver update", f0, f1, slack)?;

        let mut f2 = f1;
        if opts.optimize_theta && prob.elements() > 0 {
            let data = assemble_bps_data(prob, &bank, dual, weights);
            sweep_bps(
                prob,
                &data,
                &mut theta,
                &mut refl,
                &opts.search,
                opts.theta_tol,
                opts.max_sweeps,
            )?;
            h = prob.effective(&refl);
            f2 = surrogate(prob, &h, &bank, dual, weights);
            check_increase("phase-shift update", f1, f2, slack)?;
        }

        let next = weighted_sum_rate(prob, &h, &bank, weights);
        check_increase("weighted sum rate", f2, next, slack)?;
        trace.push(next);
        let change = (next - wsr).abs();
        wsr = next;
        if change <= opts.tol * wsr.abs() {
            converged = true;
            break;
        }
    }
    Ok(InnerOutcome {
        bank,
        theta,
        trace,
        iterations,
        converged,
    })
}
