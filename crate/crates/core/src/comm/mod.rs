//! Communication-side design: receive beamformers and IRS phase shifts for a
//! fixed offload split.
//!
//! The weighted latency `sum_k w_k d_k / R_k` is handled as a sum of ratios
//! ([`sum_ratio`]); for fixed multipliers it becomes a weighted sum rate,
//! which [`wmmse`] maximises by alternating closed-form MMSE weights, exact
//! per-block receivers ([`receiver`]) and element-wise phase searches
//! ([`bps`]).

pub mod bps;
pub mod rates;
pub mod receiver;
pub mod sum_ratio;
pub mod wmmse;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::reflection::{
    discrete_phases, response, BpsVector, CarrierPlan, ReflectionMatrixSet, ReflectionMode,
    ReflectionParams, Resolution,
};
use crate::scenario::ChannelSet;

pub use bps::{assemble_bps_data, g3, BpsSubproblemData, SearchParams};
pub use rates::{rate, rates, sinr};
pub use receiver::{solve_block, solve_receivers, BlockSolution};
pub use sum_ratio::{newton_like_outer, OuterOptions, OuterOutcome};
pub use wmmse::{update_rho, update_upsilon, wmmse_inner, InnerOptions, InnerOutcome};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Receive vectors `u[k][p]`, each of length M.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveBank {
    pub u: Vec<Vec<DVector<Complex64>>>,
}

impl ReceiveBank {
    /// Unit-norm matched filters to the given effective channels; a zero
    /// channel gets the first canonical vector.
    pub fn matched(h: &EffectiveChannels) -> Self {
        let u = h
            .h
            .iter()
            .map(|row| {
                row.iter()
                    .map(|hk| {
                        let n = hk.norm();
                        if n > 0.0 {
                            hk.unscale(n)
                        } else {
                            let mut e = DVector::zeros(hk.len());
                            e[0] = Complex64::new(1.0, 0.0);
                            e
                        }
                    })
                    .collect()
            })
            .collect();
        Self { u }
    }

    /// Entries breaking `||u||^2 <= 1 + 1e-9`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, row) in self.u.iter().enumerate() {
            for (p, u) in row.iter().enumerate() {
                let n2 = u.norm_squared();
                if !(n2 <= 1.0 + 1e-9) {
                    out.push(format!("||u[{k}][{p}]||^2 = {n2} exceeds 1"));
                }
            }
        }
        out
    }
}

/// Multipliers of the sum-of-ratios reformulation and the WMMSE auxiliaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub chi: Vec<f64>,
    pub xi: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    pub upsilon: Vec<Vec<Complex64>>,
    /// Exponent `i` of the last accepted damped step.
    pub step_exponent: u32,
}

impl DualState {
    /// `chi = xi = 1`, `rho = 1`, `Upsilon = 0`.
    pub fn unit(k: usize, p: usize) -> Self {
        Self {
            chi: vec![1.0; k],
            xi: vec![1.0; k],
            rho: vec![vec![1.0; p]; k],
            upsilon: vec![vec![ZERO; p]; k],
            step_exponent: 0,
        }
    }

    /// Rate weights `chi_k xi_k` of the weighted sum-rate subproblem.
    pub fn weights(&self) -> Vec<f64> {
        self.chi.iter().zip(&self.xi).map(|(c, x)| c * x).collect()
    }
}

/// Effective channels `h[k][p]` for one reflection setting.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    pub h: Vec<Vec<DVector<Complex64>>>,
}

/// Channels, carrier layout and reflection model, with per-link cascades
/// `G_p diag(h_r[k][p])` cached so effective channels are one mat-vec away.
#[derive(Debug, Clone)]
pub struct CommProblem<'a> {
    pub cs: &'a ChannelSet,
    pub plan: &'a CarrierPlan,
    pub params: &'a ReflectionParams,
    pub mode: ReflectionMode,
    pub resolution: Resolution,
    cascade: Vec<Vec<DMatrix<Complex64>>>,
    /// Coefficients over the discrete phase set, `table[s][p]`.
    table: Option<Vec<Vec<Complex64>>>,
}

impl<'a> CommProblem<'a> {
    pub fn new(
        cs: &'a ChannelSet,
        plan: &'a CarrierPlan,
        params: &'a ReflectionParams,
        mode: ReflectionMode,
        resolution: Resolution,
    ) -> Result<Self> {
        if cs.subcarriers() != plan.subcarriers {
            return Err(Error::Dimension(format!(
                "channels cover {} subcarriers, carrier plan has {}",
                cs.subcarriers(),
                plan.subcarriers
            )));
        }
        if let Resolution::Discrete(b) = resolution {
            if b == 0 || b > 16 {
                return Err(Error::InvalidConfig(format!(
                    "resolution must be 1..=16 bits, got {b}"
                )));
            }
        }
        let cascade = (0..cs.devices())
            .map(|k| (0..cs.subcarriers()).map(|p| cs.cascaded(k, p)).collect())
            .collect();
        let mut prob = Self {
            cs,
            plan,
            params,
            mode,
            resolution,
            cascade,
            table: None,
        };
        if let Resolution::Discrete(b) = resolution {
            let table = discrete_phases(b)
                .into_iter()
                .map(|t| prob.coefficients_direct(t))
                .collect::<Result<Vec<_>>>()?;
            prob.table = Some(table);
        }
        Ok(prob)
    }

    pub fn devices(&self) -> usize {
        self.cs.devices()
    }

    pub fn subcarriers(&self) -> usize {
        self.cs.subcarriers()
    }

    pub fn elements(&self) -> usize {
        self.cs.n
    }

    pub fn antennas(&self) -> usize {
        self.cs.m
    }

    pub fn cascade(&self, k: usize, p: usize) -> &DMatrix<Complex64> {
        &self.cascade[k][p]
    }

    fn coefficients_direct(&self, theta: f64) -> Result<Vec<Complex64>> {
        self.plan
            .freqs_hz
            .iter()
            .map(|&f| Ok(response(theta, f, self.params, self.mode)?.coefficient()))
            .collect()
    }

    /// Index of `theta` in the discrete phase set, if it is a member.
    pub fn discrete_index(&self, theta: f64) -> Option<usize> {
        let b = self.resolution.bits()?;
        let levels = 1usize << b;
        let step = 2.0 * PI / levels as f64;
        let i = ((theta + PI) / step).round();
        if !(0.0..levels as f64).contains(&i) {
            return None;
        }
        let i = i as usize;
        (discrete_phases(b)[i] == theta).then_some(i)
    }

    /// Coefficients of one element across subcarriers.
    pub fn coefficients(&self, theta: f64) -> Result<Vec<Complex64>> {
        if let (Some(table), Some(i)) = (&self.table, self.discrete_index(theta)) {
            return Ok(table[i].clone());
        }
        self.coefficients_direct(theta)
    }

    pub(crate) fn table(&self) -> Option<&Vec<Vec<Complex64>>> {
        self.table.as_ref()
    }

    /// Reflection vectors `phi[p]` for a full BPS vector.
    pub fn reflection(&self, theta: &BpsVector) -> Result<ReflectionMatrixSet> {
        if theta.len() != self.elements() {
            return Err(Error::Dimension(format!(
                "{} phase shifts for {} IRS elements",
                theta.len(),
                self.elements()
            )));
        }
        let mut phi = vec![Vec::with_capacity(theta.len()); self.subcarriers()];
        for &t in &theta.theta {
            for (row, c) in phi.iter_mut().zip(self.coefficients(t)?) {
                row.push(c);
            }
        }
        Ok(ReflectionMatrixSet { phi })
    }

    pub fn effective(&self, refl: &ReflectionMatrixSet) -> EffectiveChannels {
        let h = (0..self.devices())
            .map(|k| {
                (0..self.subcarriers())
                    .map(|p| {
                        let mut h = self.cs.h_d[k][p].clone();
                        if self.elements() > 0 {
                            let phi = DVector::from_column_slice(&refl.phi[p]);
                            h.gemv(
                                Complex64::new(1.0, 0.0),
                                &self.cascade[k][p],
                                &phi,
                                Complex64::new(1.0, 0.0),
                            );
                        }
                        h
                    })
                    .collect()
            })
            .collect();
        EffectiveChannels { h }
    }

    /// Uniformly random phases from `rng`, snapped to the phase set.
    pub fn random_theta<R: rand::Rng>(&self, rng: &mut R) -> BpsVector {
        let theta = (0..self.elements())
            .map(|_| rng.random_range(-PI..=PI))
            .collect();
        BpsVector::quantized(theta, self.resolution)
    }
}
