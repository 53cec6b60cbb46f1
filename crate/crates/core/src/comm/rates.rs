//! Per-subcarrier SINR and offloading rates.

use nalgebra::DVector;
use num_complex::Complex64;

use super::{EffectiveChannels, ReceiveBank};
use crate::error::{Error, Result};
use crate::reflection::{CarrierPlan, ReflectionMatrixSet};
use crate::scenario::{effective_channel, ChannelSet};

/// `p |u^H h_k|^2 / (p sum_{j != k} |u^H h_j|^2 + sigma^2)` over effective channels.
pub fn sinr_with(
    h: &EffectiveChannels,
    u: &DVector<Complex64>,
    k: usize,
    p: usize,
    p_tx: f64,
    sigma2: f64,
) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, hj) in h.h.iter().enumerate() {
        let g = u.dotc(&hj[p]).norm_sqr();
        if j == k {
            signal = g;
        } else {
            interference += g;
        }
    }
    p_tx * signal / (p_tx * interference + sigma2)
}

/// SINR of device `k` on subcarrier `p`.
pub fn sinr(
    cs: &ChannelSet,
    refl: &ReflectionMatrixSet,
    bank: &ReceiveBank,
    k: usize,
    p: usize,
) -> Result<f64> {
    if k >= cs.devices() || p >= cs.subcarriers() {
        return Err(Error::Dimension(format!("index ({k}, {p}) out of range")));
    }
    let u = &bank.u[k][p];
    let mut signal = 0.0;
    let mut interference = 0.0;
    for j in 0..cs.devices() {
        let h = effective_channel(cs, refl, j, p)?;
        if h.len() != u.len() {
            return Err(Error::Dimension(format!(
                "receive vector has {} entries, channel has {}",
                u.len(),
                h.len()
            )));
        }
        let g = u.dotc(&h).norm_sqr();
        if j == k {
            signal = g;
        } else {
            interference += g;
        }
    }
    Ok(cs.p_tx * signal / (cs.p_tx * interference + cs.sigma2))
}

/// `sum_p W log2(1 + gamma_p)` for per-subcarrier SINRs.
pub fn rate_from_sinr(gammas: impl IntoIterator<Item = f64>, plan: &CarrierPlan) -> f64 {
    let w = plan.subcarrier_bandwidth();
    gammas.into_iter().map(|g| w * (1.0 + g).log2()).sum()
}

/// Offloading rate of device `k`, bit/s.
pub fn rate(
    cs: &ChannelSet,
    refl: &ReflectionMatrixSet,
    bank: &ReceiveBank,
    plan: &CarrierPlan,
    k: usize,
) -> Result<f64> {
    let gammas = (0..cs.subcarriers())
        .map(|p| sinr(cs, refl, bank, k, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(rate_from_sinr(gammas, plan))
}

/// Rates of all devices over cached effective channels.
pub fn rates(
    h: &EffectiveChannels,
    bank: &ReceiveBank,
    plan: &CarrierPlan,
    p_tx: f64,
    sigma2: f64,
) -> Vec<f64> {
    (0..h.h.len())
        .map(|k| {
            rate_from_sinr(
                (0..plan.subcarriers).map(|p| sinr_with(h, &bank.u[k][p], k, p, p_tx, sigma2)),
                plan,
            )
        })
        .collect()
}
