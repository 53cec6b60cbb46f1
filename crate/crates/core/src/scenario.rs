//! Simulation scenario: geometry, path loss, Rician fading and the
//! per-subcarrier channel triples seen by the BS.
//!
//! Randomness comes from ChaCha20 seeded with `seed_from_u64(seed)`. Each
//! purpose draws from its own stream so that, for example, removing the IRS
//! leaves device positions and direct channels untouched:
//!
//! | stream | use                                   |
//! |--------|---------------------------------------|
//! | 0      | device positions, then compute profile |
//! | 1      | direct WD-BS channels                 |
//! | 2      | BS-IRS and IRS-WD channels            |
//! | 3      | solver initialisation                 |

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::compute::ComputeProfile;
use crate::error::{Error, Result};
use crate::reflection::{
    BandwidthMode, CarrierPlan, ReflectionMatrixSet, ReflectionParams, Resolution,
};

pub const STREAM_GEOMETRY: u64 = 0;
pub const STREAM_DIRECT: u64 = 1;
pub const STREAM_IRS: u64 = 2;
pub const STREAM_SOLVER: u64 = 3;

/// Generator for one purpose-specific stream of a seed.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn default_bs_pos() -> [f64; 3] {
    [0.0, 0.0, 0.0]
}
fn default_irs_pos() -> [f64; 3] {
    [300.0, 0.0, 10.0]
}
fn default_center() -> f64 {
    290.0
}
fn default_radius() -> f64 {
    5.0
}
fn default_devices() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    #[serde(default = "default_bs_pos")]
    pub bs_pos: [f64; 3],
    #[serde(default = "default_irs_pos")]
    pub irs_pos: [f64; 3],
    /// Distance `L` from the BS to the centre of the device disc, along x.
    #[serde(default = "default_center")]
    pub wd_center: f64,
    /// Radius `r` of the device disc.
    #[serde(default = "default_radius")]
    pub wd_radius: f64,
    #[serde(default = "default_devices")]
    pub devices: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            bs_pos: default_bs_pos(),
            irs_pos: default_irs_pos(),
            wd_center: default_center(),
            wd_radius: default_radius(),
            devices: default_devices(),
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let finite = self
            .bs_pos
            .iter()
            .chain(&self.irs_pos)
            .all(|v| v.is_finite());
        if !finite || !(self.wd_center > 0.0) || !(self.wd_radius >= 0.0) || self.devices == 0 {
            return Err(Error::InvalidConfig(
                "geometry needs finite positions, L > 0, r >= 0 and K >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn default_c0() -> f64 {
    -30.0
}
fn default_kappa_bw() -> f64 {
    3.5
}
fn default_kappa_irs() -> f64 {
    2.2
}

/// `L(d) = C0 * d^-kappa` with `C0` given in dB at 1 m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossModel {
    #[serde(default = "default_c0")]
    pub c0_db: f64,
    #[serde(default = "default_kappa_bw")]
    pub kappa_bw: f64,
    #[serde(default = "default_kappa_irs")]
    pub kappa_bi: f64,
    #[serde(default = "default_kappa_irs")]
    pub kappa_iw: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            c0_db: default_c0(),
            kappa_bw: default_kappa_bw(),
            kappa_bi: default_kappa_irs(),
            kappa_iw: default_kappa_irs(),
        }
    }
}

impl PathLossModel {
    pub fn gain(&self, distance: f64, kappa: f64) -> Result<f64> {
        if !(distance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "link distance must be positive, got {distance}"
            )));
        }
        Ok(db_to_linear(self.c0_db) * distance.powf(-kappa))
    }

    fn check(&self) {
        for (name, k) in [
            ("kappa_bw", self.kappa_bw),
            ("kappa_bi", self.kappa_bi),
            ("kappa_iw", self.kappa_iw),
        ] {
            if k < 2.0 {
                warn!("path-loss exponent {name} = {k} is below free space");
            }
        }
    }
}

/// Rician K-factor of one link; `Los` is the pure line-of-sight limit.
///
/// In JSON a finite factor is a number and the limit is the string `"los"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RicianFactor {
    Finite(f64),
    Los,
}

impl RicianFactor {
    /// Weights `(sqrt(b/(1+b)), sqrt(1/(1+b)))` of the LoS and scattered parts.
    pub fn mix(&self) -> (f64, f64) {
        match *self {
            RicianFactor::Los => (1.0, 0.0),
            RicianFactor::Finite(b) => ((b / (1.0 + b)).sqrt(), (1.0 / (1.0 + b)).sqrt()),
        }
    }
}

impl Serialize for RicianFactor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RicianFactor::Finite(b) => s.serialize_f64(*b),
            RicianFactor::Los => s.serialize_str("los"),
        }
    }
}

impl<'de> Deserialize<'de> for RicianFactor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RicianFactor;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative number or \"los\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                if v >= 0.0 && v.is_finite() {
                    Ok(RicianFactor::Finite(v))
                } else {
                    Err(E::custom(format!("Rician factor must be >= 0, got {v}")))
                }
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(RicianFactor::Finite(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v {
                    "los" | "LoS" | "inf" => Ok(RicianFactor::Los),
                    _ => Err(E::custom(format!("unknown Rician factor {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

fn rayleigh() -> RicianFactor {
    RicianFactor::Finite(0.0)
}
fn los() -> RicianFactor {
    RicianFactor::Los
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingModel {
    #[serde(default = "rayleigh")]
    pub rice_bw: RicianFactor,
    #[serde(default = "los")]
    pub rice_bi: RicianFactor,
    #[serde(default = "rayleigh")]
    pub rice_iw: RicianFactor,
    /// Draw a fresh small-scale realisation on every subcarrier.
    #[serde(default)]
    pub independent_subcarrier_fading: bool,
}

impl Default for FadingModel {
    fn default() -> Self {
        Self {
            rice_bw: rayleigh(),
            rice_bi: los(),
            rice_iw: rayleigh(),
            independent_subcarrier_fading: false,
        }
    }
}

/// Baseband channels of every device on every subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Direct WD-to-BS channels, `h_d[k][p]` (length M).
    pub h_d: Vec<Vec<DVector<Complex64>>>,
    /// IRS-to-BS channels, `g[p]` (M x N).
    pub g: Vec<DMatrix<Complex64>>,
    /// WD-to-IRS channels, `h_r[k][p]` (length N).
    pub h_r: Vec<Vec<DVector<Complex64>>>,
    pub sigma2: f64,
    pub p_tx: f64,
    pub m: usize,
    pub n: usize,
}

impl ChannelSet {
    pub fn devices(&self) -> usize {
        self.h_d.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.g.len()
    }

    /// Same direct channels with the IRS removed.
    pub fn without_irs(&self) -> Self {
        let (k, p) = (self.devices(), self.subcarriers());
        Self {
            h_d: self.h_d.clone(),
            g: vec![DMatrix::zeros(self.m, 0); p],
            h_r: vec![vec![DVector::zeros(0); p]; k],
            sigma2: self.sigma2,
            p_tx: self.p_tx,
            m: self.m,
            n: 0,
        }
    }

    /// `G_p diag(h_r[k][p])`, so that the effective channel is `h_d + V phi`.
    pub fn cascaded(&self, k: usize, p: usize) -> DMatrix<Complex64> {
        let mut v = self.g[p].clone();
        for (n, mut col) in v.column_iter_mut().enumerate() {
            col *= self.h_r[k][p][n];
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.g.len();
        let ok_dims = self.h_r.len() == self.h_d.len()
            && self.h_d.iter().all(|row| row.len() == p && row.iter().all(|h| h.len() == self.m))
            && self.h_r.iter().all(|row| row.len() == p && row.iter().all(|h| h.len() == self.n))
            && self.g.iter().all(|g| g.nrows() == self.m && g.ncols() == self.n);
        if !ok_dims {
            return Err(Error::Dimension("channel set shapes are inconsistent".into()));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        let all_finite = self.h_d.iter().flatten().all(|h| h.iter().all(finite))
            && self.h_r.iter().flatten().all(|h| h.iter().all(finite))
            && self.g.iter().all(|g| g.iter().all(finite));
        if !all_finite {
            return Err(Error::Numerical("channel set has non-finite entries".into()));
        }
        Ok(())
    }
}

/// `h_d[k][p] + G_p Phi_p h_r[k][p]`.
pub fn effective_channel(
    cs: &ChannelSet,
    refl: &ReflectionMatrixSet,
    k: usize,
    p: usize,
) -> Result<DVector<Complex64>> {
    if k >= cs.devices() || p >= cs.subcarriers() {
        return Err(Error::Dimension(format!(
            "channel index ({k}, {p}) out of range ({}, {})",
            cs.devices(),
            cs.subcarriers()
        )));
    }
    let mut h = cs.h_d[k][p].clone();
    if cs.n == 0 {
        return Ok(h);
    }
    let phi = refl
        .phi
        .get(p)
        .filter(|row| row.len() == cs.n)
        .ok_or_else(|| {
            Error::Dimension(format!(
                "reflection set has no {}-element row for subcarrier {p}",
                cs.n
            ))
        })?;
    let hr = &cs.h_r[k][p];
    for (n, col) in cs.g[p].column_iter().enumerate() {
        h.axpy(phi[n] * hr[n], &col, Complex64::new(1.0, 0.0));
    }
    Ok(h)
}

/// Half-wavelength ULA along the y axis: `exp(j pi m cos(angle to y))`.
fn steering(len: usize, from: [f64; 3], to: [f64; 3]) -> DVector<Complex64> {
    let d = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let cos_y = d[1] / norm;
    DVector::from_iterator(
        len,
        (0..len).map(|m| Complex64::from_polar(1.0, PI * m as f64 * cos_y)),
    )
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn cn01(rng: &mut ChaCha20Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn rician_matrix(
    los: &DMatrix<Complex64>,
    factor: RicianFactor,
    gain: f64,
    rng: &mut ChaCha20Rng,
) -> DMatrix<Complex64> {
    let (a, b) = factor.mix();
    let amp = gain.sqrt();
    if b == 0.0 {
        return los * Complex64::new(a * amp, 0.0);
    }
    // entries are visited column-major, which fixes the draw order
    los.map(|l| (l * a + cn01(rng) * b) * amp)
}

/// Uniform points in the device disc at ground level.
pub fn draw_positions(geometry: &Geometry, rng: &mut ChaCha20Rng) -> Vec<[f64; 3]> {
    (0..geometry.devices)
        .map(|_| {
            let rad = geometry.wd_radius * rng.random::<f64>().sqrt();
            let ang = 2.0 * PI * rng.random::<f64>();
            [
                geometry.wd_center + rad * ang.cos(),
                rad * ang.sin(),
                0.0,
            ]
        })
        .collect()
}

/// Channels for one seed. Positions come from stream 0, direct links from
/// stream 1 and IRS links from stream 2.
#[allow(clippy::too_many_arguments)]
pub fn synth_scenario(
    geometry: &Geometry,
    path_loss: &PathLossModel,
    fading: &FadingModel,
    plan: &CarrierPlan,
    m: usize,
    n: usize,
    power: &PowerConfig,
    seed: u64,
) -> Result<ChannelSet> {
    geometry.validate()?;
    path_loss.check();
    if m == 0 {
        return Err(Error::InvalidConfig("the BS needs at least one antenna".into()));
    }
    let positions = draw_positions(geometry, &mut rng_for(seed, STREAM_GEOMETRY));
    synth_channels(geometry, &positions, path_loss, fading, plan, m, n, power, seed)
}

#[allow(clippy::too_many_arguments)]
fn synth_channels(
    geometry: &Geometry,
    positions: &[[f64; 3]],
    path_loss: &PathLossModel,
    fading: &FadingModel,
    plan: &CarrierPlan,
    m: usize,
    n: usize,
    power: &PowerConfig,
    seed: u64,
) -> Result<ChannelSet> {
    let k_count = positions.len();
    let p_count = plan.subcarriers;
    let draws = if fading.independent_subcarrier_fading {
        p_count
    } else {
        1
    };
    let bs = geometry.bs_pos;
    let irs = geometry.irs_pos;

    let mut rng = rng_for(seed, STREAM_DIRECT);
    let mut h_d = Vec::with_capacity(k_count);
    for pos in positions {
        let gain = path_loss.gain(distance(bs, *pos), path_loss.kappa_bw)?;
        let los = DMatrix::from_column_slice(m, 1, steering(m, bs, *pos).as_slice());
        let per_draw: Vec<DVector<Complex64>> = (0..draws)
            .map(|_| rician_matrix(&los, fading.rice_bw, gain, &mut rng).column(0).into_owned())
            .collect();
        h_d.push(spread(per_draw, p_count));
    }

    let mut rng = rng_for(seed, STREAM_IRS);
    let (g, h_r) = if n == 0 {
        (
            vec![DMatrix::zeros(m, 0); p_count],
            vec![vec![DVector::zeros(0); p_count]; k_count],
        )
    } else {
        let gain_bi = path_loss.gain(distance(bs, irs), path_loss.kappa_bi)?;
        let los_bi = steering(m, bs, irs) * steering(n, irs, bs).adjoint();
        let g_draws: Vec<DMatrix<Complex64>> = (0..draws)
            .map(|_| rician_matrix(&los_bi, fading.rice_bi, gain_bi, &mut rng))
            .collect();
        let g = spread(g_draws, p_count);
        let mut h_r = Vec::with_capacity(k_count);
        for pos in positions {
            let gain = path_loss.gain(distance(irs, *pos), path_loss.kappa_iw)?;
            let los = DMatrix::from_column_slice(n, 1, steering(n, irs, *pos).as_slice());
            let per_draw: Vec<DVector<Complex64>> = (0..draws)
                .map(|_| rician_matrix(&los, fading.rice_iw, gain, &mut rng).column(0).into_owned())
                .collect();
            h_r.push(spread(per_draw, p_count));
        }
        (g, h_r)
    };

    let cs = ChannelSet {
        h_d,
        g,
        h_r,
        sigma2: power.sigma2_w,
        p_tx: power.p_tx_w,
        m,
        n,
    };
    cs.validate()?;
    Ok(cs)
}

/// Repeats a single draw over all subcarriers, or passes per-subcarrier draws through.
fn spread<T: Clone>(draws: Vec<T>, p_count: usize) -> Vec<T> {
    if draws.len() == p_count {
        draws
    } else {
        vec![draws[0].clone(); p_count]
    }
}

fn default_p_tx() -> f64 {
    1e-3
}
fn default_sigma2() -> f64 {
    3.98e-15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    #[serde(default = "default_p_tx")]
    pub p_tx_w: f64,
    #[serde(default = "default_sigma2")]
    pub sigma2_w: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            p_tx_w: default_p_tx(),
            sigma2_w: default_sigma2(),
        }
    }
}

fn default_fc() -> f64 {
    2.4e9
}
fn default_bandwidth() -> f64 {
    100e6
}
fn default_subcarriers() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierConfig {
    #[serde(default = "default_fc")]
    pub fc_hz: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "default_subcarriers")]
    pub subcarriers: usize,
    #[serde(default)]
    pub bandwidth_mode: BandwidthMode,
}

impl Default for CarrierConfig {
    fn default() -> Self {
        Self {
            fc_hz: default_fc(),
            bandwidth_hz: default_bandwidth(),
            subcarriers: default_subcarriers(),
            bandwidth_mode: BandwidthMode::default(),
        }
    }
}

impl CarrierConfig {
    pub fn plan(&self) -> Result<CarrierPlan> {
        CarrierPlan::new(
            self.fc_hz,
            self.bandwidth_hz,
            self.subcarriers,
            self.bandwidth_mode,
        )
    }
}

fn default_data_range() -> [f64; 2] {
    [250e3, 350e3]
}
fn default_complexity_range() -> [f64; 2] {
    [700.0, 800.0]
}
fn default_local_cpu_range() -> [f64; 2] {
    [4e8, 6e8]
}
fn default_edge_total() -> f64 {
    5e12
}

/// Ranges the per-device task parameters are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputingConfig {
    #[serde(default = "default_data_range")]
    pub data_bits: [f64; 2],
    #[serde(default = "default_complexity_range")]
    pub complexity: [f64; 2],
    #[serde(default = "default_local_cpu_range")]
    pub local_cpu: [f64; 2],
    #[serde(default = "default_edge_total")]
    pub edge_total: f64,
    /// Explicit latency weights; equal weights when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl Default for ComputingConfig {
    fn default() -> Self {
        Self {
            data_bits: default_data_range(),
            complexity: default_complexity_range(),
            local_cpu: default_local_cpu_range(),
            edge_total: default_edge_total(),
            weights: None,
        }
    }
}

impl ComputingConfig {
    /// Draws `k` task profiles from `rng`; `D` is rounded to whole bits.
    pub fn draw(&self, k: usize, rng: &mut ChaCha20Rng) -> Result<ComputeProfile> {
        for r in [self.data_bits, self.complexity, self.local_cpu] {
            if !(r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "computing range {r:?} must be positive and ordered"
                )));
            }
        }
        let mut uniform = |r: [f64; 2]| r[0] + (r[1] - r[0]) * rng.random::<f64>();
        let mut data = Vec::with_capacity(k);
        let mut complexity = Vec::with_capacity(k);
        let mut local = Vec::with_capacity(k);
        for _ in 0..k {
            data.push(uniform(self.data_bits).round().max(1.0) as u64);
            complexity.push(uniform(self.complexity));
            local.push(uniform(self.local_cpu));
        }
        match &self.weights {
            Some(w) => ComputeProfile::new(data, complexity, local, self.edge_total, w.clone()),
            None => ComputeProfile::with_equal_weights(data, complexity, local, self.edge_total),
        }
    }
}

/// Phase-shifter resolution as written in configs: a bit count or `"continuous"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolutionSetting(pub Resolution);

impl Serialize for ResolutionSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Resolution::Continuous => s.serialize_str("continuous"),
            Resolution::Discrete(b) => s.serialize_u32(b),
        }
    }
}

impl<'de> Deserialize<'de> for ResolutionSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ResolutionSetting;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive bit count or \"continuous\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                if v == 0 || v > 16 {
                    return Err(E::custom(format!("resolution must be 1..=16 bits, got {v}")));
                }
                Ok(ResolutionSetting(Resolution::Discrete(v as u32)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                if v < 0 {
                    return Err(E::custom("resolution must be positive"));
                }
                self.visit_u64(v as u64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                if v == "continuous" {
                    Ok(ResolutionSetting(Resolution::Continuous))
                } else {
                    Err(E::custom(format!("unknown resolution {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

fn default_m() -> usize {
    4
}
fn default_n() -> usize {
    20
}
fn default_resolution() -> ResolutionSetting {
    ResolutionSetting(Resolution::Discrete(3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    #[serde(default = "default_m")]
    pub bs_antennas: usize,
    #[serde(default = "default_n")]
    pub irs_elements: usize,
    #[serde(default = "default_resolution")]
    pub resolution: ResolutionSetting,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            bs_antennas: default_m(),
            irs_elements: default_n(),
            resolution: default_resolution(),
        }
    }
}

/// Everything needed to build a scenario for a seed. Missing blocks and
/// fields fall back to the default system parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default)]
    pub path_loss: PathLossModel,
    #[serde(default)]
    pub fading: FadingModel,
    #[serde(default)]
    pub carrier: CarrierConfig,
    #[serde(default)]
    pub power: PowerConfig,
    #[serde(default)]
    pub computing: ComputingConfig,
    #[serde(default)]
    pub array: ArrayConfig,
    /// Replacement coefficient table for the reflection model.
    #[serde(default)]
    pub reflection: Option<ReflectionParams>,
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self, seed: u64) -> Result<Scenario> {
        Scenario::new(self.clone(), seed)
    }
}

/// A fully realised problem instance.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub plan: CarrierPlan,
    pub channels: ChannelSet,
    pub profile: ComputeProfile,
    pub reflection: ReflectionParams,
    pub resolution: Resolution,
    pub positions: Vec<[f64; 3]>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig, seed: u64) -> Result<Self> {
        config.geometry.validate()?;
        config.path_loss.check();
        let plan = config.carrier.plan()?;
        let reflection = config.reflection.clone().unwrap_or_default();
        reflection.validate()?;
        if !(config.power.p_tx_w > 0.0 && config.power.sigma2_w > 0.0) {
            return Err(Error::InvalidConfig(
                "transmit and noise power must be positive".into(),
            ));
        }
        if config.array.bs_antennas == 0 {
            return Err(Error::InvalidConfig("the BS needs at least one antenna".into()));
        }
        let mut rng = rng_for(seed, STREAM_GEOMETRY);
        let positions = draw_positions(&config.geometry, &mut rng);
        let profile = config.computing.draw(config.geometry.devices, &mut rng)?;
        let channels = synth_channels(
            &config.geometry,
            &positions,
            &config.path_loss,
            &config.fading,
            &plan,
            config.array.bs_antennas,
            config.array.irs_elements,
            &config.power,
            seed,
        )?;
        Ok(Self {
            resolution: config.array.resolution.0,
            config,
            seed,
            plan,
            channels,
            profile,
            reflection,
            positions,
        })
    }

    /// Same instance with the IRS removed.
    pub fn without_irs(&self) -> Self {
        let mut s = self.clone();
        s.config.array.irs_elements = 0;
        s.channels = self.channels.without_irs();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::{build_reflection_matrices, BpsVector, ReflectionMode};
    use approx::assert_relative_eq;

    fn plan() -> CarrierPlan {
        CarrierConfig::default().plan().unwrap()
    }

    #[test]
    fn db_helper() {
        assert_relative_eq!(db_to_linear(-30.0), 1e-3, max_relative = 1e-14);
        assert_relative_eq!(db_to_linear(0.0), 1.0);
    }

    #[test]
    fn zero_distance_is_rejected() {
        assert!(PathLossModel::default().gain(0.0, 2.0).is_err());
        let geometry = Geometry {
            bs_pos: [290.0, 0.0, 0.0],
            wd_radius: 0.0,
            ..Geometry::default()
        };
        let out = synth_scenario(
            &geometry,
            &PathLossModel::default(),
            &FadingModel::default(),
            &plan(),
            2,
            3,
            &PowerConfig::default(),
            1,
        );
        assert!(out.is_err());
    }

    #[test]
    fn same_seed_same_channels() {
        let cfg = ScenarioConfig::default();
        let a = cfg.build(7).unwrap();
        let b = cfg.build(7).unwrap();
        assert_eq!(a.channels, b.channels);
        assert_eq!(a.profile, b.profile);
        let c = cfg.build(8).unwrap();
        assert_ne!(a.channels, c.channels);
    }

    #[test]
    fn irs_size_does_not_move_direct_links() {
        let mut cfg = ScenarioConfig::default();
        let a = cfg.build(3).unwrap();
        cfg.array.irs_elements = 40;
        let b = cfg.build(3).unwrap();
        assert_eq!(a.channels.h_d, b.channels.h_d);
        assert_eq!(a.profile, b.profile);
    }

    #[test]
    fn los_irs_link_is_scaled_steering_product() {
        let s = ScenarioConfig::default().build(11).unwrap();
        let g = &s.channels.g[0];
        let gain = PathLossModel::default()
            .gain(distance([0.0; 3], [300.0, 0.0, 10.0]), 2.2)
            .unwrap();
        for z in g.iter() {
            assert_relative_eq!(z.norm(), gain.sqrt(), max_relative = 1e-12);
        }
        let mut sv: Vec<f64> = g.clone().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        assert!(sv[1] <= 1e-9 * sv[0]);
        // one draw shared by all subcarriers by default
        assert_eq!(s.channels.g[0], s.channels.g[7]);
        assert_eq!(s.channels.h_d[1][0], s.channels.h_d[1][5]);
    }

    #[test]
    fn independent_fading_differs_per_subcarrier() {
        let mut cfg = ScenarioConfig::default();
        cfg.fading.independent_subcarrier_fading = true;
        let s = cfg.build(5).unwrap();
        assert_ne!(s.channels.h_d[0][0], s.channels.h_d[0][1]);
        assert_ne!(s.channels.h_r[0][0], s.channels.h_r[0][1]);
    }

    #[test]
    fn rayleigh_direct_power_matches_path_loss() {
        // Closed form: E||h_d||^2 = L(d) M for a unit-variance scattered part.
        let geometry = Geometry {
            wd_radius: 0.0,
            devices: 1,
            ..Geometry::default()
        };
        let pl = PathLossModel::default();
        let m = 4;
        let trials = 10_000;
        let mut acc = 0.0;
        for seed in 0..trials {
            let cs = synth_scenario(
                &geometry,
                &pl,
                &FadingModel::default(),
                &plan(),
                m,
                0,
                &PowerConfig::default(),
                seed,
            )
            .unwrap();
            acc += cs.h_d[0][0].norm_squared();
        }
        let expected = pl.gain(290.0, 3.5).unwrap() * m as f64;
        assert_relative_eq!(acc / trials as f64, expected, max_relative = 0.05);
    }

    #[test]
    fn distance_scaling_follows_exponent() {
        let pl = PathLossModel::default();
        let trials = 10_000;
        let mean_power = |center: f64| {
            let geometry = Geometry {
                wd_center: center,
                wd_radius: 0.0,
                devices: 1,
                ..Geometry::default()
            };
            (0..trials)
                .map(|seed| {
                    synth_scenario(
                        &geometry,
                        &pl,
                        &FadingModel::default(),
                        &plan(),
                        2,
                        0,
                        &PowerConfig::default(),
                        seed,
                    )
                    .unwrap()
                    .h_d[0][0]
                        .norm_squared()
                })
                .sum::<f64>()
                / trials as f64
        };
        let ratio = mean_power(200.0) / mean_power(100.0);
        assert_relative_eq!(ratio, 2f64.powf(-3.5), max_relative = 0.05);
    }

    #[test]
    fn positions_stay_in_disc() {
        let s = ScenarioConfig {
            geometry: Geometry {
                devices: 5,
                ..Geometry::default()
            },
            ..ScenarioConfig::default()
        }
        .build(2)
        .unwrap();
        for p in &s.positions {
            let r = ((p[0] - 290.0).powi(2) + p[1] * p[1]).sqrt();
            assert!(r <= 5.0 + 1e-12);
            assert_eq!(p[2], 0.0);
        }
    }

    fn small_set() -> ChannelSet {
        let mut cfg = ScenarioConfig::default();
        cfg.array.bs_antennas = 2;
        cfg.array.irs_elements = 3;
        cfg.carrier.subcarriers = 2;
        cfg.build(9).unwrap().channels
    }

    #[test]
    fn effective_channel_matches_dense_product() {
        let cs = small_set();
        let plan = CarrierConfig {
            subcarriers: 2,
            ..CarrierConfig::default()
        }
        .plan()
        .unwrap();
        let theta = BpsVector::new(vec![0.3, -1.2, 2.0], Resolution::Continuous).unwrap();
        let refl = build_reflection_matrices(
            &theta,
            &plan,
            &ReflectionParams::default(),
            ReflectionMode::Practical,
        )
        .unwrap();
        for k in 0..2 {
            for p in 0..2 {
                let diag = DMatrix::from_diagonal(&DVector::from_vec(refl.phi[p].clone()));
                let dense = &cs.h_d[k][p] + &cs.g[p] * diag * &cs.h_r[k][p];
                let h = effective_channel(&cs, &refl, k, p).unwrap();
                assert!((h - &dense).norm() <= 1e-12 * dense.norm());
                let via_cascade = &cs.h_d[k][p]
                    + cs.cascaded(k, p) * DVector::from_vec(refl.phi[p].clone());
                assert!((via_cascade - dense).norm() <= 1e-12 * cs.h_d[k][p].norm());
            }
        }
    }

    #[test]
    fn effective_channel_reductions() {
        let cs = small_set();
        let zero = ReflectionMatrixSet::zeros(2, 3);
        assert_eq!(effective_channel(&cs, &zero, 1, 1).unwrap(), cs.h_d[1][1]);
        let identity = ReflectionMatrixSet {
            phi: vec![vec![Complex64::new(1.0, 0.0); 3]; 2],
        };
        let expect = &cs.h_d[0][1] + &cs.g[1] * &cs.h_r[0][1];
        let got = effective_channel(&cs, &identity, 0, 1).unwrap();
        assert!((got - expect).norm() <= 1e-24);
        let bare = cs.without_irs();
        assert_eq!(
            effective_channel(&bare, &ReflectionMatrixSet::zeros(2, 0), 0, 0).unwrap(),
            cs.h_d[0][0]
        );
        assert!(effective_channel(&cs, &zero, 2, 0).is_err());
        assert!(effective_channel(&cs, &ReflectionMatrixSet::zeros(2, 1), 0, 0).is_err());
    }

    #[test]
    fn effective_channel_is_affine_in_phi() {
        let cs = small_set();
        let mk = |vals: [f64; 3]| ReflectionMatrixSet {
            phi: vec![vals.iter().map(|v| Complex64::from_polar(0.7, *v)).collect(); 2],
        };
        let a = mk([0.1, 0.9, -2.0]);
        let b = mk([1.4, -0.3, 0.5]);
        let sum = ReflectionMatrixSet {
            phi: a
                .phi
                .iter()
                .zip(&b.phi)
                .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect())
                .collect(),
        };
        let zero = ReflectionMatrixSet::zeros(2, 3);
        let h = |r: &ReflectionMatrixSet| effective_channel(&cs, r, 0, 0).unwrap();
        let resid = h(&sum) - h(&a) - h(&b) + h(&zero);
        assert!(resid.norm() <= 1e-12 * cs.h_d[0][0].norm());
    }

    #[test]
    fn config_parsing() {
        let cfg = ScenarioConfig::from_json_str(
            r#"{"fading": {"rice_bw": 3, "rice_bi": "los"}, "array": {"resolution": "continuous"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.fading.rice_bw, RicianFactor::Finite(3.0));
        assert_eq!(cfg.array.resolution.0, Resolution::Continuous);
        assert_eq!(cfg.array.bs_antennas, 4);
        assert!(ScenarioConfig::from_json_str(r#"{"geometry": {"bogus": 1}}"#).is_err());
        assert!(ScenarioConfig::from_json_str(r#"{"fading": {"rice_bw": -1}}"#).is_err());
        let round = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ScenarioConfig::from_json_str(&round).unwrap(), cfg);
    }

    #[test]
    fn default_profile_ranges() {
        let s = ScenarioConfig::default().build(4).unwrap();
        let p = &s.profile;
        assert_eq!(p.devices(), 2);
        for k in 0..2 {
            assert!((250_000..=350_000).contains(&p.data_bits[k]));
            assert!((700.0..=800.0).contains(&p.complexity[k]));
            assert!((4e8..=6e8).contains(&p.local_cpu[k]));
            assert_eq!(p.weights[k], 0.5);
        }
        assert_eq!(p.edge_total, 5e12);
    }
}
