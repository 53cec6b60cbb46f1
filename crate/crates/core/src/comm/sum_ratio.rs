//! Sum-of-ratios loop for `min sum_k w_k d_k / R_k` over receivers and phase
//! shifts. Multipliers `chi_k` (target `1/R_k`) and `xi_k` (target
//! `w_k d_k / R_k`) define the weights `chi_k xi_k` of a weighted sum-rate
//! problem; they are moved by damped Newton-like steps with a backtracking
//! rule on the residuals
//!
//! ```text
//! Omega_k = chi_k R_k - 1,    psi_k = xi_k R_k - w_k d_k.
//! ```

use super::rates::rates;
use super::wmmse::{wmmse_inner, InnerOptions, InnerOutcome};
use super::{CommProblem, DualState, ReceiveBank};
use crate::compute::ComputeProfile;
use crate::error::{Error, Result};
use crate::reflection::BpsVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterOptions {
    /// Backtracking base `Gamma`.
    pub gamma: f64,
    /// Sufficient-decrease constant `tau`.
    pub tau: f64,
    pub eps2: f64,
    pub l2_max: usize,
    pub max_exponent: u32,
    pub inner: InnerOptions,
}

impl Default for OuterOptions {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            tau: 0.1,
            eps2: 1e-3,
            l2_max: 30,
            max_exponent: 64,
            inner: InnerOptions::default(),
        }
    }
}

/// One accepted multiplier step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchStep {
    pub exponent: u32,
    /// `sum (Omega^2 + psi^2)` before the step, at the new rates.
    pub merit_before: f64,
    pub merit_after: f64,
}

#[derive(Debug, Clone)]
pub struct OuterOutcome {
    pub bank: ReceiveBank,
    pub theta: BpsVector,
    pub dual: DualState,
    pub rates: Vec<f64>,
    /// `sum_k w_k d_k / R_k` at the start and after every iteration.
    pub trace: Vec<f64>,
    pub inner: Vec<InnerOutcome>,
    pub steps: Vec<LineSearchStep>,
    pub iterations: usize,
    pub converged: bool,
}

fn transmission_latency(d: &[u64], rates: &[f64], profile: &ComputeProfile) -> f64 {
    d.iter()
        .zip(rates)
        .zip(&profile.weights)
        .filter(|((d, _), _)| **d > 0)
        .map(|((d, r), w)| w * *d as f64 / r)
        .sum()
}

fn check_rates(d: &[u64], rates: &[f64]) -> Result<()> {
    let bad: Vec<String> = d
        .iter()
        .zip(rates)
        .enumerate()
        .filter(|(_, (d, r))| **d > 0 && !(**r > 0.0 && r.is_finite()))
        .map(|(k, (d, r))| format!("device {k} offloads {d} bits over rate {r}"))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Infeasible(bad))
    }
}

fn residuals(
    dual: &DualState,
    rates: &[f64],
    targets: &[f64],
    active: &[bool],
) -> (Vec<f64>, Vec<f64>) {
    let omega = (0..rates.len())
        .map(|k| if active[k] { dual.chi[k] * rates[k] - 1.0 } else { 0.0 })
        .collect();
    let psi = (0..rates.len())
        .map(|k| if active[k] { dual.xi[k] * rates[k] - targets[k] } else { 0.0 })
        .collect();
    (omega, psi)
}

fn merit(omega: &[f64], psi: &[f64]) -> f64 {
    omega.iter().chain(psi).map(|v| v * v).sum()
}

/// Receivers and phase shifts for a fixed offload split `d`, warm-started
/// from `(bank, theta)`. Devices that offload nothing carry zero weight.
pub fn newton_like_outer(
    prob: &CommProblem,
    profile: &ComputeProfile,
    d: &[u64],
    bank: &ReceiveBank,
    theta: &BpsVector,
    opts: &OuterOptions,
) -> Result<OuterOutcome> {
    let kk = prob.devices();
    if d.len() != kk || profile.devices() != kk {
        return Err(Error::Dimension(format!(
            "{} offload volumes and {} profiles for {kk} devices",
            d.len(),
            profile.devices()
        )));
    }
    let active: Vec<bool> = d.iter().map(|&v| v > 0).collect();
    let targets: Vec<f64> = (0..kk).map(|k| profile.weights[k] * d[k] as f64).collect();
    let (p_tx, s2) = (prob.cs.p_tx, prob.cs.sigma2);

    let mut bank = bank.clone();
    let mut theta = theta.clone();
    let h = prob.effective(&prob.reflection(&theta)?);
    let mut r = rates(&h, &bank, prob.plan, p_tx, s2);
    check_rates(d, &r)?;

    // multipliers at their stationary values for the warm start
    let mut dual = DualState::unit(kk, prob.subcarriers());
    for k in 0..kk {
        if active[k] {
            dual.chi[k] = 1.0 / r[k];
            dual.xi[k] = targets[k] / r[k];
        } else {
            dual.chi[k] = 0.0;
            dual.xi[k] = 0.0;
        }
    }

    let mut trace = vec![transmission_latency(d, &r, profile)];
    let mut inner = Vec::new();
    let mut steps = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    if !active.iter().any(|&a| a) {
        return Ok(OuterOutcome {
            bank,
            theta,
            dual,
            rates: r,
            trace,
            inner,
            steps,
            iterations,
            converged: true,
        });
    }
    while iterations < opts.l2_max {
        iterations += 1;
        let weights = dual.weights();
        let out = wmmse_inner(prob, &mut dual, &weights, &bank, &theta, &opts.inner)?;
        bank = out.bank.clone();
        theta = out.theta.clone();
        inner.push(out);
        let h = prob.effective(&prob.reflection(&theta)?);
        r = rates(&h, &bank, prob.plan, p_tx, s2);
        check_rates(d, &r)?;
        trace.push(transmission_latency(d, &r, profile));

        let (omega, psi) = residuals(&dual, &r, &targets, &active);
        let done = (0..kk).all(|k| {
            !active[k] || (omega[k].abs() <= opts.eps2 && psi[k].abs() <= opts.eps2 * targets[k])
        });
        if done {
            converged = true;
            break;
        }

        let before = merit(&omega, &psi);
        let mut accepted = None;
        for i in 1..=opts.max_exponent {
            let step = opts.gamma.powi(i as i32);
            let mut trial = dual.clone();
            for k in 0..kk {
                if active[k] {
                    trial.chi[k] -= step * omega[k] / r[k];
                    trial.xi[k] -= step * psi[k] / r[k];
                }
            }
            let (o2, p2) = residuals(&trial, &r, &targets, &active);
            let after = merit(&o2, &p2);
            let bound = (1.0 - opts.tau * step).powi(2) * before;
            if after <= bound {
                trial.step_exponent = i;
                accepted = Some((trial, after, i));
                break;
            }
        }
        let Some((next, after, exponent)) = accepted else {
            return Err(Error::StalledLineSearch {
                max_exponent: opts.max_exponent,
                merit: before,
            });
        };
        steps.push(LineSearchStep {
            exponent,
            merit_before: before,
            merit_after: after,
        });
        dual.chi = next.chi;
        dual.xi = next.xi;
        dual.step_exponent = next.step_exponent;
    }
    Ok(OuterOutcome {
        bank,
        theta,
        dual,
        rates: r,
        trace,
        inner,
        steps,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::{ReflectionMode, Resolution};
    use crate::scenario::{rng_for, ScenarioConfig};
    use approx::assert_relative_eq;

    #[test]
    fn fixed_point_and_merit_decrease() {
        let s = ScenarioConfig::default().build(8).unwrap();
        let prob = CommProblem::new(
            &s.channels,
            &s.plan,
            &s.reflection,
            ReflectionMode::Practical,
            Resolution::Discrete(3),
        )
        .unwrap();
        let theta = prob.random_theta(&mut rng_for(8, 3));
        let bank = ReceiveBank::matched(&prob.effective(&prob.reflection(&theta).unwrap()));
        let d = s.profile.data_bits.clone();
        let out = newton_like_outer(&prob, &s.profile, &d, &bank, &theta, &OuterOptions::default())
            .unwrap();
        assert!(out.converged, "trace {:?}", out.trace);
        for st in &out.steps {
            assert!(st.merit_after < st.merit_before);
        }
        for k in 0..2 {
            assert!((out.dual.chi[k] * out.rates[k] - 1.0).abs() <= 1e-3);
        }
        let xi_sum: f64 = out.dual.xi.iter().sum();
        assert_relative_eq!(xi_sum, *out.trace.last().unwrap(), max_relative = 1e-3);
    }

    #[test]
    fn single_device_ratio() {
        let mut cfg = ScenarioConfig::default();
        cfg.geometry.devices = 1;
        let s = cfg.build(9).unwrap();
        let prob = CommProblem::new(
            &s.channels,
            &s.plan,
            &s.reflection,
            ReflectionMode::Practical,
            Resolution::Continuous,
        )
        .unwrap();
        let theta = prob.random_theta(&mut rng_for(9, 3));
        let bank = ReceiveBank::matched(&prob.effective(&prob.reflection(&theta).unwrap()));
        let d = s.profile.data_bits.clone();
        let opts = OuterOptions {
            eps2: 1e-5,
            ..OuterOptions::default()
        };
        let out = newton_like_outer(&prob, &s.profile, &d, &bank, &theta, &opts).unwrap();
        let ratio = s.profile.weights[0] * d[0] as f64 / out.rates[0];
        assert_relative_eq!(out.dual.xi[0], ratio, max_relative = 1e-4);
    }

    #[test]
    fn idle_devices_need_no_rate() {
        let s = ScenarioConfig::default().build(10).unwrap();
        let prob = CommProblem::new(
            &s.channels,
            &s.plan,
            &s.reflection,
            ReflectionMode::Ideal,
            Resolution::Continuous,
        )
        .unwrap();
        let theta = prob.random_theta(&mut rng_for(10, 3));
        let bank = ReceiveBank::matched(&prob.effective(&prob.reflection(&theta).unwrap()));
        let out = newton_like_outer(&prob, &s.profile, &[0, 0], &bank, &theta, &OuterOptions::default())
            .unwrap();
        assert!(out.converged);
        assert_eq!(out.trace, vec![0.0]);
    }
}
