//! Frequency-dependent IRS reflection response.
//!
//! The practical model couples the amplitude of an element to its phase, and
//! makes the phase an affine function of the incident frequency whose slope
//! and intercept depend on the basic phase shift (BPS) `theta`:
//!
//! ```text
//! B(theta, f) = F1(theta) * f + F2(theta)
//! A(theta, f) = a1 * B^2 + b1 * B + c1
//! F1(theta)   = a2 sin(b2 theta + c2) + a3 sin(b3 theta + c3)
//! F2(theta)   = a4 sin(b4 theta + c4) + a5 sin(b5 theta + c5)
//! ```
//!
//! The fitted coefficients expect `f` in GHz; every public function here takes
//! Hz and converts at the boundary. With the default table `B(theta, f_c)` is
//! within a few mrad of `theta` at 2.4 GHz, which is what makes `theta` the
//! phase at the carrier.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HZ_PER_GHZ: f64 = 1e9;

/// Coefficient table `{alpha_i, beta_i, ctilde_i}` of the practical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionParams {
    pub alpha: [f64; 5],
    pub beta: [f64; 5],
    pub ctilde: [f64; 5],
}

impl Default for ReflectionParams {
    /// Fit for a 2.4 GHz carrier with 100 MHz of bandwidth.
    fn default() -> Self {
        Self {
            alpha: [0.06, 11.27, 10.88, 89.64, 26.11],
            beta: [0.02, 0.008996, 0.9799, 0.01268, 0.9798],
            ctilde: [0.5736, -1.897, -1.471, 0.2899, 1.673],
        }
    }
}

impl ReflectionParams {
    pub fn validate(&self) -> Result<()> {
        let all = self.alpha.iter().chain(&self.beta).chain(&self.ctilde);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "reflection coefficients must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Parses the override file format: `{"alpha": [..5], "beta": [..5], "ctilde": [..5]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Slope `F1(theta)` of the phase-frequency line, in rad/GHz.
    pub fn slope(&self, theta: f64) -> f64 {
        let (a, b, c) = (&self.alpha, &self.beta, &self.ctilde);
        a[1] * (b[1] * theta + c[1]).sin() + a[2] * (b[2] * theta + c[2]).sin()
    }

    /// Intercept `F2(theta)` of the phase-frequency line, in rad.
    pub fn intercept(&self, theta: f64) -> f64 {
        let (a, b, c) = (&self.alpha, &self.beta, &self.ctilde);
        a[3] * (b[3] * theta + c[3]).sin() + a[4] * (b[4] * theta + c[4]).sin()
    }

    fn amplitude_of_phase(&self, phase: f64) -> f64 {
        self.alpha[0] * phase * phase + self.beta[0] * phase + self.ctilde[0]
    }

    /// The phase line of one element, evaluated once per `theta` and reused
    /// across subcarriers.
    pub fn phase_line(&self, theta: f64) -> PhaseLine<'_> {
        PhaseLine {
            params: self,
            slope: self.slope(theta),
            intercept: self.intercept(theta),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PhaseLine<'a> {
    params: &'a ReflectionParams,
    pub slope: f64,
    pub intercept: f64,
}

impl PhaseLine<'_> {
    #[inline]
    pub fn at_ghz(&self, f_ghz: f64) -> Response {
        let phase = self.slope * f_ghz + self.intercept;
        Response {
            amplitude: self.params.amplitude_of_phase(phase),
            phase,
        }
    }
}

/// Amplitude and (unwrapped) phase of one element at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub amplitude: f64,
    pub phase: f64,
}

impl Response {
    pub fn coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReflectionMode {
    /// Amplitude and phase follow the fitted frequency-dependent model.
    Practical,
    /// Unit amplitude, phase equal to `theta` on every subcarrier.
    Ideal,
}

/// Practical response of an element with BPS `theta` at `freq_hz`.
pub fn eval_response(theta: f64, freq_hz: f64, params: &ReflectionParams) -> Result<Response> {
    let r = params.phase_line(theta).at_ghz(freq_hz / HZ_PER_GHZ);
    if !(r.amplitude.is_finite() && r.phase.is_finite()) {
        return Err(Error::ModelEvaluation { theta, freq_hz });
    }
    Ok(r)
}

/// Response under either reflection mode.
pub fn response(
    theta: f64,
    freq_hz: f64,
    params: &ReflectionParams,
    mode: ReflectionMode,
) -> Result<Response> {
    match mode {
        ReflectionMode::Practical => eval_response(theta, freq_hz, params),
        ReflectionMode::Ideal => Ok(Response {
            amplitude: 1.0,
            phase: theta,
        }),
    }
}

/// How much bandwidth one subcarrier contributes to the rate sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BandwidthMode {
    /// Each subcarrier carries `B / P`.
    #[default]
    PhysicalSplit,
    /// Each subcarrier carries the full `B`.
    FullPerSubcarrier,
}

/// OFDM carrier layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierPlan {
    pub fc_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
    pub freqs_hz: Vec<f64>,
    pub bandwidth_mode: BandwidthMode,
}

impl CarrierPlan {
    /// Relative bandwidth must stay under 5% for the fitted model to apply.
    pub fn new(
        fc_hz: f64,
        bandwidth_hz: f64,
        subcarriers: usize,
        bandwidth_mode: BandwidthMode,
    ) -> Result<Self> {
        if subcarriers == 0 {
            return Err(Error::InvalidConfig("subcarrier count must be positive".into()));
        }
        if !(fc_hz > 0.0 && bandwidth_hz > 0.0 && fc_hz.is_finite() && bandwidth_hz.is_finite()) {
            return Err(Error::InvalidConfig(
                "carrier frequency and bandwidth must be positive".into(),
            ));
        }
        if bandwidth_hz / fc_hz >= 0.05 {
            return Err(Error::InvalidConfig(format!(
                "relative bandwidth {} is outside the model's validity region (< 0.05)",
                bandwidth_hz / fc_hz
            )));
        }
        let spacing = bandwidth_hz / subcarriers as f64;
        let center = (subcarriers as f64 + 1.0) / 2.0;
        let freqs_hz = (1..=subcarriers)
            .map(|p| fc_hz + (p as f64 - center) * spacing)
            .collect();
        Ok(Self {
            fc_hz,
            bandwidth_hz,
            subcarriers,
            freqs_hz,
            bandwidth_mode,
        })
    }

    /// Bandwidth multiplying each per-subcarrier spectral efficiency.
    pub fn subcarrier_bandwidth(&self) -> f64 {
        match self.bandwidth_mode {
            BandwidthMode::PhysicalSplit => self.bandwidth_hz / self.subcarriers as f64,
            BandwidthMode::FullPerSubcarrier => self.bandwidth_hz,
        }
    }

    pub fn freqs_ghz(&self) -> Vec<f64> {
        self.freqs_hz.iter().map(|f| f / HZ_PER_GHZ).collect()
    }
}

/// Phase-shifter resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Resolution {
    Continuous,
    Discrete(u32),
}

impl Resolution {
    pub fn bits(&self) -> Option<u32> {
        match self {
            Resolution::Continuous => None,
            Resolution::Discrete(b) => Some(*b),
        }
    }
}

/// Basic phase shifts of all IRS elements.
#[derive(Debug, Clone, PartialEq)]
pub struct BpsVector {
    pub theta: Vec<f64>,
    pub resolution: Resolution,
}

impl BpsVector {
    pub fn new(theta: Vec<f64>, resolution: Resolution) -> Result<Self> {
        let v = Self { theta, resolution };
        let violations = v.violations();
        if violations.is_empty() {
            Ok(v)
        } else {
            Err(Error::Infeasible(violations))
        }
    }

    /// Snaps every entry onto the resolution's phase set.
    pub fn quantized(theta: Vec<f64>, resolution: Resolution) -> Self {
        let theta = match resolution {
            Resolution::Continuous => theta.into_iter().map(|t| t.clamp(-PI, PI)).collect(),
            Resolution::Discrete(b) => theta.into_iter().map(|t| quantize_bps(t, b)).collect(),
        };
        Self { theta, resolution }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Resolution::Discrete(0) = self.resolution {
            out.push("discrete resolution needs at least one bit".to_string());
            return out;
        }
        let set = self.resolution.bits().map(discrete_phases);
        for (n, &t) in self.theta.iter().enumerate() {
            if !(-PI..=PI).contains(&t) {
                out.push(format!("theta[{n}] = {t} outside [-pi, pi]"));
            } else if let Some(set) = &set {
                if !set.contains(&t) {
                    out.push(format!("theta[{n}] = {t} is not a discrete phase"));
                }
            }
        }
        out
    }
}

/// Per-subcarrier reflection coefficients, indexed `phi[p][n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionMatrixSet {
    pub phi: Vec<Vec<Complex64>>,
}

impl ReflectionMatrixSet {
    pub fn zeros(subcarriers: usize, elements: usize) -> Self {
        Self {
            phi: vec![vec![Complex64::new(0.0, 0.0); elements]; subcarriers],
        }
    }

    pub fn elements(&self) -> usize {
        self.phi.first().map_or(0, Vec::len)
    }
}

pub fn build_reflection_matrices(
    theta: &BpsVector,
    plan: &CarrierPlan,
    params: &ReflectionParams,
    mode: ReflectionMode,
) -> Result<ReflectionMatrixSet> {
    let mut phi = vec![Vec::with_capacity(theta.len()); plan.subcarriers];
    for &t in &theta.theta {
        for (row, &f) in phi.iter_mut().zip(&plan.freqs_hz) {
            row.push(response(t, f, params, mode)?.coefficient());
        }
    }
    Ok(ReflectionMatrixSet { phi })
}

/// Amplitude and slope ranges of a model over the band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelReport {
    pub min_amp: f64,
    pub max_amp: f64,
    /// `(theta, f_hz)` where the minimum amplitude occurs.
    pub min_amp_at: (f64, f64),
    /// `(theta, f_hz)` where the maximum amplitude occurs.
    pub max_amp_at: (f64, f64),
    /// Range of the phase-frequency slope, rad/GHz.
    pub min_slope: f64,
    pub max_slope: f64,
}

impl ModelReport {
    pub fn is_passive(&self) -> bool {
        self.max_amp <= 1.0 + 1e-6 && self.min_amp > 0.0
    }
}

/// Evaluates the model on a `grid_size` x P grid of (theta, subcarrier) points.
pub fn model_report(
    params: &ReflectionParams,
    plan: &CarrierPlan,
    grid_size: usize,
    mode: ReflectionMode,
) -> Result<ModelReport> {
    if grid_size < 2 {
        return Err(Error::InvalidConfig("model grid needs at least 2 points".into()));
    }
    let mut report = ModelReport {
        min_amp: f64::INFINITY,
        max_amp: f64::NEG_INFINITY,
        min_amp_at: (0.0, 0.0),
        max_amp_at: (0.0, 0.0),
        min_slope: f64::INFINITY,
        max_slope: f64::NEG_INFINITY,
    };
    for i in 0..grid_size {
        let theta = -PI + 2.0 * PI * i as f64 / (grid_size - 1) as f64;
        let slope = match mode {
            ReflectionMode::Practical => params.slope(theta),
            ReflectionMode::Ideal => 0.0,
        };
        report.min_slope = report.min_slope.min(slope);
        report.max_slope = report.max_slope.max(slope);
        for &f in &plan.freqs_hz {
            let amp = response(theta, f, params, mode)?.amplitude;
            if amp < report.min_amp {
                report.min_amp = amp;
                report.min_amp_at = (theta, f);
            }
            if amp > report.max_amp {
                report.max_amp = amp;
                report.max_amp_at = (theta, f);
            }
        }
    }
    Ok(report)
}

/// Like [`model_report`], but a non-passive model is an error.
pub fn validate_model(
    params: &ReflectionParams,
    plan: &CarrierPlan,
    grid_size: usize,
    mode: ReflectionMode,
) -> Result<ModelReport> {
    let report = model_report(params, plan, grid_size, mode)?;
    if report.max_amp > 1.0 + 1e-6 {
        let (theta, freq_hz) = report.max_amp_at;
        return Err(Error::PassivityViolation {
            theta,
            freq_hz,
            amplitude: report.max_amp,
        });
    }
    if report.min_amp <= 0.0 {
        let (theta, freq_hz) = report.min_amp_at;
        return Err(Error::PassivityViolation {
            theta,
            freq_hz,
            amplitude: report.min_amp,
        });
    }
    Ok(report)
}

/// The `2^b` admissible phases `2 pi i / 2^b - pi`, ascending.
pub fn discrete_phases(bits: u32) -> Vec<f64> {
    let levels = 1usize << bits;
    (0..levels)
        .map(|i| 2.0 * PI * i as f64 / levels as f64 - PI)
        .collect()
}

/// Shortest-arc distance between two angles.
pub fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Nearest admissible phase under wrapped distance; ties go to the lower index.
pub fn quantize_bps(theta: f64, bits: u32) -> f64 {
    assert!(bits >= 1, "quantization needs at least one bit");
    let mut best = -PI;
    let mut best_dist = f64::INFINITY;
    for s in discrete_phases(bits) {
        let d = wrapped_distance(theta, s);
        if d < best_dist {
            best = s;
            best_dist = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn default_plan() -> CarrierPlan {
        CarrierPlan::new(2.4e9, 100e6, 8, BandwidthMode::PhysicalSplit).unwrap()
    }

    #[test]
    fn table_defaults() {
        let p = ReflectionParams::default();
        assert_eq!(p.alpha, [0.06, 11.27, 10.88, 89.64, 26.11]);
        assert_eq!(p.beta, [0.02, 0.008996, 0.9799, 0.01268, 0.9798]);
        assert_eq!(p.ctilde, [0.5736, -1.897, -1.471, 0.2899, 1.673]);
    }

    #[test]
    fn golden_response_at_carrier() {
        // Evaluated independently with numpy from the coefficient table.
        let r = eval_response(0.0, 2.4e9, &ReflectionParams::default()).unwrap();
        assert_relative_eq!(r.amplitude, 0.5734859677094576, max_relative = 1e-12);
        assert_relative_eq!(r.phase, -0.005802625930179772, max_relative = 1e-9);
    }

    #[test]
    fn ideal_response_is_unit_and_theta() {
        let params = ReflectionParams::default();
        for &theta in &[-PI, -1.0, 0.0, 0.3, PI] {
            for &f in &[2.35e9, 2.4e9, 2.45e9] {
                let r = response(theta, f, &params, ReflectionMode::Ideal).unwrap();
                assert_eq!(r.amplitude, 1.0);
                assert_eq!(r.phase, theta);
            }
        }
    }

    #[test]
    fn phase_is_affine_in_frequency() {
        let params = ReflectionParams::default();
        for &theta in &[-2.0, 0.0, 1.3] {
            let (f1, f2) = (2.36e9, 2.44e9);
            let mid = eval_response(theta, 0.5 * (f1 + f2), &params).unwrap().phase;
            let avg = 0.5
                * (eval_response(theta, f1, &params).unwrap().phase
                    + eval_response(theta, f2, &params).unwrap().phase);
            assert_relative_eq!(mid, avg, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_finite_coefficients_surface_as_model_error() {
        let mut params = ReflectionParams::default();
        params.alpha[0] = f64::INFINITY;
        assert!(matches!(
            eval_response(0.5, 2.4e9, &params),
            Err(Error::ModelEvaluation { .. })
        ));
        assert!(params.validate().is_err());
    }

    #[test]
    fn subcarrier_centres() {
        let plan = default_plan();
        assert_eq!(plan.freqs_hz.len(), 8);
        assert_relative_eq!(plan.freqs_hz[0], 2.4e9 - 3.5 * 12.5e6);
        assert_relative_eq!(plan.freqs_hz[7], 2.4e9 + 3.5 * 12.5e6);
        assert_relative_eq!(plan.subcarrier_bandwidth(), 12.5e6);
        let literal = CarrierPlan::new(2.4e9, 100e6, 8, BandwidthMode::FullPerSubcarrier).unwrap();
        assert_eq!(literal.subcarrier_bandwidth(), 100e6);
    }

    #[test]
    fn rejects_wide_relative_bandwidth() {
        assert!(CarrierPlan::new(2.4e9, 0.2e9, 8, BandwidthMode::PhysicalSplit).is_err());
        assert!(CarrierPlan::new(2.4e9, 100e6, 0, BandwidthMode::PhysicalSplit).is_err());
    }

    #[test]
    fn phase_difference_between_two_subcarriers_follows_slope() {
        let params = ReflectionParams::default();
        let plan = CarrierPlan::new(2.4e9, 100e6, 2, BandwidthMode::PhysicalSplit).unwrap();
        let theta = BpsVector::new(vec![0.7], Resolution::Continuous).unwrap();
        let set = build_reflection_matrices(&theta, &plan, &params, ReflectionMode::Practical)
            .unwrap();
        let d_phase = (set.phi[1][0] / set.phi[0][0]).arg();
        let expected = params.slope(0.7) * (plan.freqs_hz[1] - plan.freqs_hz[0]) / 1e9;
        assert_relative_eq!(
            d_phase,
            expected.sin().atan2(expected.cos()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn ideal_zero_theta_gives_all_ones() {
        let plan = default_plan();
        let theta = BpsVector::new(vec![0.0; 5], Resolution::Continuous).unwrap();
        let set = build_reflection_matrices(
            &theta,
            &plan,
            &ReflectionParams::default(),
            ReflectionMode::Ideal,
        )
        .unwrap();
        for row in &set.phi {
            for c in row {
                assert_eq!(*c, Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn practical_matrix_at_carrier_matches_golden() {
        let plan = CarrierPlan::new(2.4e9, 100e6, 1, BandwidthMode::PhysicalSplit).unwrap();
        let theta = BpsVector::new(vec![0.0], Resolution::Continuous).unwrap();
        let set = build_reflection_matrices(
            &theta,
            &plan,
            &ReflectionParams::default(),
            ReflectionMode::Practical,
        )
        .unwrap();
        assert_relative_eq!(set.phi[0][0].norm(), 0.5734859677094576, max_relative = 1e-12);
        assert_relative_eq!(set.phi[0][0].arg(), -0.005802625930179772, max_relative = 1e-9);
    }

    #[test]
    fn ideal_model_report_is_flat() {
        let r = validate_model(
            &ReflectionParams::default(),
            &default_plan(),
            64,
            ReflectionMode::Ideal,
        )
        .unwrap();
        assert_eq!((r.min_amp, r.max_amp), (1.0, 1.0));
    }

    #[test]
    fn default_table_grid_report() {
        // Grid oracle (numpy, 1024 thetas at f_c): min 0.571933..., max 1.240934...
        let plan = CarrierPlan::new(2.4e9, 100e6, 1, BandwidthMode::PhysicalSplit).unwrap();
        let params = ReflectionParams::default();
        let r = model_report(&params, &plan, 1024, ReflectionMode::Practical).unwrap();
        assert!(r.min_amp > 0.0);
        assert_relative_eq!(r.min_amp, 0.5719333453010692, max_relative = 1e-9);
        assert_relative_eq!(r.max_amp, 1.2409344353304002, max_relative = 1e-9);
        // The fitted quadratic exceeds unit amplitude near |theta| = pi.
        assert!(matches!(
            validate_model(&params, &plan, 1024, ReflectionMode::Practical),
            Err(Error::PassivityViolation { .. })
        ));
    }

    #[test]
    fn inflated_alpha_is_rejected() {
        let mut params = ReflectionParams::default();
        params.alpha[0] *= 100.0;
        let err = validate_model(&params, &default_plan(), 256, ReflectionMode::Practical);
        assert!(matches!(err, Err(Error::PassivityViolation { .. })));
    }

    #[test]
    fn grid_of_one_is_rejected() {
        let err = model_report(
            &ReflectionParams::default(),
            &default_plan(),
            1,
            ReflectionMode::Practical,
        );
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn quantization_examples() {
        assert_eq!(quantize_bps(-PI, 3), -PI);
        // S = {-pi, 0}; pi sits on -pi under wrapped distance.
        assert_eq!(quantize_bps(PI, 1), -PI);
        let q = quantize_bps(0.1, 8);
        assert!((q - 0.1).abs() <= PI / 256.0);
    }

    #[test]
    fn discrete_vector_membership() {
        assert!(BpsVector::new(vec![0.0, -PI], Resolution::Discrete(1)).is_ok());
        assert!(BpsVector::new(vec![0.1], Resolution::Discrete(1)).is_err());
        assert!(BpsVector::new(vec![4.0], Resolution::Continuous).is_err());
        let q = BpsVector::quantized(vec![0.1, 2.0, -3.0], Resolution::Discrete(3));
        assert!(q.violations().is_empty());
    }

    #[test]
    fn params_file_round_trip() {
        let json = r#"{"alpha":[0.06,11.27,10.88,89.64,26.11],
                       "beta":[0.02,0.008996,0.9799,0.01268,0.9798],
                       "ctilde":[0.5736,-1.897,-1.471,0.2899,1.673]}"#;
        assert_eq!(
            ReflectionParams::from_json_str(json).unwrap(),
            ReflectionParams::default()
        );
        assert!(ReflectionParams::from_json_str(r#"{"alpha":[1,2,3,4,5]}"#).is_err());
    }

    proptest! {
        #[test]
        fn quantized_value_is_member_and_close(theta in -PI..=PI, bits in 1u32..=10) {
            let q = quantize_bps(theta, bits);
            prop_assert!(discrete_phases(bits).contains(&q));
            prop_assert!(wrapped_distance(q, theta) <= PI / (1u64 << bits) as f64 + 1e-12);
        }

        #[test]
        fn practical_response_is_finite(theta in -PI..=PI, df in -50e6..=50e6f64) {
            let r = eval_response(theta, 2.4e9 + df, &ReflectionParams::default()).unwrap();
            prop_assert!(r.amplitude.is_finite() && r.phase.is_finite());
        }

        #[test]
        fn ideal_matrices_have_unit_modulus(thetas in proptest::collection::vec(-PI..=PI, 1..8)) {
            let theta = BpsVector::new(thetas, Resolution::Continuous).unwrap();
            let set = build_reflection_matrices(
                &theta, &default_plan(), &ReflectionParams::default(), ReflectionMode::Ideal,
            ).unwrap();
            for row in &set.phi {
                for c in row {
                    prop_assert!((c.norm() - 1.0).abs() < 1e-15);
                }
            }
        }
    }
}
