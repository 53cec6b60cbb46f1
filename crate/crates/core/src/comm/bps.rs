//! Phase-shift update. For fixed receivers and MMSE weights the objective in
//! the reflection vectors is `sum_p phi_p^H Lambda_p phi_p - 2 Re{phi_p^H nu_p} + zeta_p`,
//! minimised one element at a time. For element `n` only
//!
//! ```text
//! g3(theta) = sum_p 2 |omega_p| A(theta, f_p) cos(arg omega_p - B(theta, f_p))
//!                 + Lambda_p(n, n) A(theta, f_p)^2
//! ```
//!
//! depends on `theta`, with `omega_p = sum_{n' != n} Lambda_p(n, n') phi_{p,n'} - nu_p(n)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{CommProblem, DualState, ReceiveBank, ZERO};
use crate::error::{Error, Result};
use crate::reflection::{
    discrete_phases, response, BpsVector, CarrierPlan, ReflectionMatrixSet, ReflectionMode,
    ReflectionParams, Resolution,
};

/// Quadratic model of the phase-shift subproblem, per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct BpsSubproblemData {
    pub lambda: Vec<DMatrix<Complex64>>,
    pub nu: Vec<DVector<Complex64>>,
    pub zeta: Vec<f64>,
}

impl BpsSubproblemData {
    /// `sum_p phi^H Lambda phi - 2 Re{phi^H nu} + zeta`.
    pub fn objective(&self, refl: &ReflectionMatrixSet) -> f64 {
        self.lambda
            .iter()
            .zip(&self.nu)
            .zip(&self.zeta)
            .zip(&refl.phi)
            .map(|(((l, nu), z), phi)| {
                let phi = DVector::from_column_slice(phi);
                phi.dotc(&(l * &phi)).re - 2.0 * phi.dotc(nu).re + z
            })
            .sum()
    }

    /// `omega_{p,n}` for every subcarrier at the current reflection vectors.
    pub fn omega(&self, refl: &ReflectionMatrixSet, n: usize) -> Vec<Complex64> {
        self.lambda
            .iter()
            .zip(&self.nu)
            .zip(&refl.phi)
            .map(|((l, nu), phi)| {
                let mut acc = -nu[n];
                for (j, f) in phi.iter().enumerate() {
                    if j != n {
                        acc += l[(n, j)] * f;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn element(&self, refl: &ReflectionMatrixSet, n: usize) -> ElementProblem {
        ElementProblem {
            omega: self.omega(refl, n),
            diag: self.lambda.iter().map(|l| l[(n, n)].re).collect(),
        }
    }
}

/// Data of the single-element subproblem: `omega_{p,n}` and `Lambda_p(n, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementProblem {
    pub omega: Vec<Complex64>,
    pub diag: Vec<f64>,
}

/// Builds `Lambda_p`, `nu_p` and `zeta_p` from the receivers and MMSE weights.
///
/// With `c = w_k rho_{k,p}`, `s_{kjp} = G_p^H`-side row `u_{k,p}^H G_p diag(h_r[j][p])`
/// and `hbar_{kjp} = u_{k,p}^H h_d[j][p]`:
/// `Lambda_p = sum_k c |Ups|^2 p sum_j s^H s`,
/// `nu_p = sum_k c (Ups sqrt(p) s_kk^H - |Ups|^2 p sum_j s_kj^H hbar_kj)`,
/// `zeta_p = sum_k c (|Ups|^2 p sum_j |hbar_kj|^2 - 2 Re{Ups^* sqrt(p) hbar_kk})`.
pub fn assemble_bps_data(
    prob: &CommProblem,
    bank: &ReceiveBank,
    dual: &DualState,
    weights: &[f64],
) -> BpsSubproblemData {
    let (kk, pp, n) = (prob.devices(), prob.subcarriers(), prob.elements());
    let p_tx = prob.cs.p_tx;
    let sp = p_tx.sqrt();
    let mut lambda = Vec::with_capacity(pp);
    let mut nu = Vec::with_capacity(pp);
    let mut zeta = Vec::with_capacity(pp);
    for p in 0..pp {
        let mut l = DMatrix::<Complex64>::zeros(n, n);
        let mut v = DVector::<Complex64>::zeros(n);
        let mut z = 0.0;
        for k in 0..kk {
            let c = weights[k] * dual.rho[k][p];
            let ups = dual.upsilon[k][p];
            let u = &bank.u[k][p];
            if c == 0.0 || ups == ZERO {
                continue;
            }
            let quad = c * ups.norm_sqr() * p_tx;
            for j in 0..kk {
                // column form of s_{kjp}^H
                let s_h = prob.cascade(j, p).ad_mul(u);
                let hbar = u.dotc(&prob.cs.h_d[j][p]);
                l.gerc(Complex64::new(quad, 0.0), &s_h, &s_h, Complex64::new(1.0, 0.0));
                v.axpy(-hbar * quad, &s_h, Complex64::new(1.0, 0.0));
                z += quad * hbar.norm_sqr();
                if j == k {
                    v.axpy(ups * (c * sp), &s_h, Complex64::new(1.0, 0.0));
                    z -= 2.0 * c * (ups.conj() * sp * hbar).re;
                }
            }
        }
        let l = (&l + l.adjoint()).scale(0.5);
        lambda.push(l);
        nu.push(v);
        zeta.push(z);
    }
    BpsSubproblemData { lambda, nu, zeta }
}

/// Element objective at phase shift `theta`.
pub fn g3(
    theta: f64,
    elem: &ElementProblem,
    plan: &CarrierPlan,
    params: &ReflectionParams,
    mode: ReflectionMode,
) -> Result<f64> {
    let mut total = 0.0;
    for ((om, d), &f) in elem.omega.iter().zip(&elem.diag).zip(&plan.freqs_hz) {
        let r = response(theta, f, params, mode)?;
        total += 2.0 * om.norm() * r.amplitude * (om.arg() - r.phase).cos()
            + d * r.amplitude * r.amplitude;
    }
    Ok(total)
}

/// Same objective from precomputed coefficients `phi_p = A e^{jB}`.
fn g3_coeffs(elem: &ElementProblem, coeffs: &[Complex64]) -> f64 {
    elem.omega
        .iter()
        .zip(&elem.diag)
        .zip(coeffs)
        .map(|((om, d), c)| 2.0 * (om * c.conj()).re + d * c.norm_sqr())
        .sum()
}

/// Parameters of the three-phase continuous search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub step0: f64,
    pub shrink: f64,
    pub tol: f64,
    /// Start the march from the best of the incumbent and a grid with
    /// spacing `step0`, instead of from the incumbent alone.
    pub coarse_start: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            step0: PI / 16.0,
            shrink: 0.5,
            tol: 1e-4,
            coarse_start: true,
        }
    }
}

/// Bracketing march, sectioning, then a comparison against both ends of the
/// range and the start point. Returns `(theta, f(theta))`; the start point
/// wins ties, so the result is never worse than it.
pub fn three_phase_search(
    mut f: impl FnMut(f64) -> Result<f64>,
    start: f64,
    search: &SearchParams,
) -> Result<(f64, f64)> {
    let x0 = start.clamp(-PI, PI);
    let f0 = f(x0)?;
    let step = search.step0;

    // Phase 1: walk downhill until the objective rises.
    let (mut lo, mut mid, mut hi, mut fm);
    let xp = (x0 + step).min(PI);
    let fp = f(xp)?;
    if fp < f0 {
        let (mut a, mut b, mut fb) = (x0, xp, fp);
        let c = loop {
            if b >= PI {
                break b;
            }
            let c = (b + step).min(PI);
            let fc = f(c)?;
            if fc >= fb {
                break c;
            }
            a = b;
            b = c;
            fb = fc;
        };
        (lo, mid, hi, fm) = (a, b, c, fb);
    } else {
        let xm = (x0 - step).max(-PI);
        let fmn = f(xm)?;
        if fmn < f0 {
            let (mut a, mut b, mut fb) = (x0, xm, fmn);
            let c = loop {
                if b <= -PI {
                    break b;
                }
                let c = (b - step).max(-PI);
                let fc = f(c)?;
                if fc >= fb {
                    break c;
                }
                a = b;
                b = c;
                fb = fc;
            };
            (lo, mid, hi, fm) = (c, b, a, fb);
        } else {
            (lo, mid, hi, fm) = (xm, x0, xp, f0);
        }
    }

    // Phase 2: section the bracket around the best point.
    let mut guard = 0;
    while hi - lo > search.tol && guard < 400 {
        guard += 1;
        let l = mid - search.shrink * (mid - lo);
        if l < mid {
            let fl = f(l)?;
            if fl < fm {
                hi = mid;
                mid = l;
                fm = fl;
                continue;
            }
        }
        let r = mid + search.shrink * (hi - mid);
        if r > mid {
            let fr = f(r)?;
            if fr < fm {
                lo = mid;
                mid = r;
                fm = fr;
                continue;
            }
        }
        lo = l;
        hi = r;
    }

    // Phase 3: compare against the range ends; the start point guards
    // against a non-unimodal objective.
    let mut best = (x0, f0);
    for (x, fx) in [(mid, fm), (-PI, f(-PI)?), (PI, f(PI)?)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

/// Three-phase search from `incumbent`, or from the best grid point when
/// `search.coarse_start` is set. Never returns a value above `f(incumbent)`.
pub fn element_search(
    mut f: impl FnMut(f64) -> Result<f64>,
    incumbent: f64,
    search: &SearchParams,
) -> Result<(f64, f64)> {
    let mut start = incumbent.clamp(-PI, PI);
    if search.coarse_start && search.step0 > 0.0 {
        let mut best = f(start)?;
        let steps = (2.0 * PI / search.step0).ceil() as usize;
        for j in 0..=steps {
            let t = (-PI + j as f64 * search.step0).min(PI);
            let v = f(t)?;
            if v < best {
                best = v;
                start = t;
            }
        }
    }
    let (t, v) = three_phase_search(&mut f, start, search)?;
    if start != incumbent {
        let v0 = f(incumbent)?;
        if v0 <= v {
            return Ok((incumbent, v0));
        }
    }
    Ok((t, v))
}

/// Continuous update of one element, started from `start`.
pub fn optimize_bps_element_continuous(
    elem: &ElementProblem,
    plan: &CarrierPlan,
    params: &ReflectionParams,
    mode: ReflectionMode,
    start: f64,
    search: &SearchParams,
) -> Result<f64> {
    element_search(|t| g3(t, elem, plan, params, mode), start, search).map(|(t, _)| t)
}

/// Exhaustive update over the `2^bits` discrete phases; ties go to the smaller angle.
pub fn optimize_bps_element_discrete(
    elem: &ElementProblem,
    plan: &CarrierPlan,
    params: &ReflectionParams,
    mode: ReflectionMode,
    bits: u32,
) -> Result<f64> {
    let mut best = (f64::NAN, f64::INFINITY);
    for t in discrete_phases(bits) {
        let v = g3(t, elem, plan, params, mode)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    Ok(best.0)
}

/// Outcome of repeated element-wise sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub sweeps: usize,
    /// Largest phase change in the final sweep.
    pub last_change: f64,
}

/// Sweeps `n = 0..N` repeatedly until no element moves by more than `tol`
/// (any move in discrete mode) or `max_sweeps` is reached. `theta` and
/// `refl` are updated in place.
pub fn sweep_bps(
    prob: &CommProblem,
    data: &BpsSubproblemData,
    theta: &mut BpsVector,
    refl: &mut ReflectionMatrixSet,
    search: &SearchParams,
    tol: f64,
    max_sweeps: usize,
) -> Result<SweepOutcome> {
    let n_el = prob.elements();
    let pp = prob.subcarriers();
    if n_el == 0 {
        return Ok(SweepOutcome {
            sweeps: 0,
            last_change: 0.0,
        });
    }
    let mut y: Vec<DVector<Complex64>> = (0..pp)
        .map(|p| &data.lambda[p] * DVector::from_column_slice(&refl.phi[p]))
        .collect();
    let discrete = matches!(prob.resolution, Resolution::Discrete(_));
    let mut sweeps = 0;
    let mut last_change = 0.0;
    let mut elem = ElementProblem {
        omega: vec![ZERO; pp],
        diag: vec![0.0; pp],
    };
    let mut coeffs = vec![ZERO; pp];
    let line_cache = |t: f64, out: &mut Vec<Complex64>| -> Result<()> {
        for (o, c) in out.iter_mut().zip(prob.coefficients(t)?) {
            *o = c;
        }
        Ok(())
    };
    while sweeps < max_sweeps.max(1) {
        sweeps += 1;
        last_change = 0.0f64;
        for n in 0..n_el {
            for p in 0..pp {
                let d = data.lambda[p][(n, n)].re;
                elem.diag[p] = d;
                elem.omega[p] = y[p][n] - data.lambda[p][(n, n)] * refl.phi[p][n] - data.nu[p][n];
            }
            let old_t = theta.theta[n];
            let old_coeffs: Vec<Complex64> = (0..pp).map(|p| refl.phi[p][n]).collect();
            let old_val = g3_coeffs(&elem, &old_coeffs);
            let (new_t, new_val) = if let (true, Some(table)) = (discrete, prob.table()) {
                let bits = prob.resolution.bits().unwrap_or(1);
                let mut best = (old_t, f64::INFINITY);
                for (t, c) in discrete_phases(bits).into_iter().zip(table) {
                    let v = g3_coeffs(&elem, c);
                    if v < best.1 {
                        best = (t, v);
                    }
                }
                best
            } else {
                element_search(
                    |t| {
                        line_cache(t, &mut coeffs)?;
                        Ok(g3_coeffs(&elem, &coeffs))
                    },
                    old_t,
                    search,
                )?
            };
            if new_val > old_val + 1e-9 * old_val.abs().max(new_val.abs()) {
                return Err(Error::Monotonicity {
                    stage: "phase-shift element update",
                    before: old_val,
                    after: new_val,
                });
            }
            if new_t != old_t {
                let new_coeffs = prob.coefficients(new_t)?;
                for p in 0..pp {
                    let delta = new_coeffs[p] - old_coeffs[p];
                    if delta != ZERO {
                        y[p].axpy(delta, &data.lambda[p].column(n), Complex64::new(1.0, 0.0));
                    }
                    refl.phi[p][n] = new_coeffs[p];
                }
                theta.theta[n] = new_t;
                last_change = last_change.max((new_t - old_t).abs());
            }
        }
        let done = if discrete {
            last_change == 0.0
        } else {
            last_change <= tol
        };
        if done {
            break;
        }
    }
    Ok(SweepOutcome {
        sweeps,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::BandwidthMode;
    use approx::assert_relative_eq;

    fn plan1() -> CarrierPlan {
        CarrierPlan::new(2.4e9, 100e6, 1, BandwidthMode::PhysicalSplit).unwrap()
    }

    #[test]
    fn flat_objective_keeps_start() {
        let elem = ElementProblem {
            omega: vec![ZERO],
            diag: vec![0.0],
        };
        let p = ReflectionParams::default();
        let t = optimize_bps_element_continuous(
            &elem,
            &plan1(),
            &p,
            ReflectionMode::Practical,
            0.4,
            &SearchParams::default(),
        )
        .unwrap();
        let g = |t| g3(t, &elem, &plan1(), &p, ReflectionMode::Practical).unwrap();
        assert_eq!(g(t), g(-PI));
    }

    #[test]
    fn ideal_single_carrier_aligns_against_omega() {
        let p = ReflectionParams::default();
        for target in [-2.5, -0.3, 0.0, 1.1, 2.9] {
            let elem = ElementProblem {
                omega: vec![Complex64::from_polar(1.5, target)],
                diag: vec![0.7],
            };
            let t = optimize_bps_element_continuous(
                &elem,
                &plan1(),
                &p,
                ReflectionMode::Ideal,
                0.0,
                &SearchParams::default(),
            )
            .unwrap();
            let want = if target > 0.0 { target - PI } else { target + PI };
            let miss = crate::reflection::wrapped_distance(t, want);
            assert!(miss <= 2e-4, "target {target}: got {t}, want {want}");
        }
    }

    #[test]
    fn minimum_at_upper_end_is_found() {
        let search = SearchParams::default();
        let (t, _) = three_phase_search(|t| Ok(-t), 0.0, &search).unwrap();
        assert_eq!(t, PI);
        // the march ends at -pi, the endpoint comparison moves to +pi
        let (t, v) = three_phase_search(|t: f64| Ok(-t.abs() - 0.1 * t), -2.0, &search).unwrap();
        assert_eq!(t, PI);
        assert_relative_eq!(v, -1.1 * PI);
    }

    #[test]
    fn search_never_worse_than_start() {
        // two separated wells; starting in the shallow one must not end worse
        let f = |t: f64| Ok(-(-(t - 2.0).powi(2) * 8.0).exp() - 0.5 * (-(t + 2.0).powi(2) * 8.0).exp());
        let (t, v) = three_phase_search(f, -2.0, &SearchParams::default()).unwrap();
        assert!(v <= f(-2.0).unwrap());
        assert!((t + 2.0).abs() < 1e-3 || (t - 2.0).abs() < 1e-3);
    }

    #[test]
    fn discrete_is_brute_force() {
        let p = ReflectionParams::default();
        let plan = CarrierPlan::new(2.4e9, 100e6, 4, BandwidthMode::PhysicalSplit).unwrap();
        let elem = ElementProblem {
            omega: vec![
                Complex64::new(0.3, -1.0),
                Complex64::new(0.2, 0.4),
                Complex64::new(-0.5, 0.1),
                Complex64::new(0.0, 0.9),
            ],
            diag: vec![0.5, 0.2, 0.9, 0.1],
        };
        for bits in 1..=4 {
            let t = optimize_bps_element_discrete(&elem, &plan, &p, ReflectionMode::Practical, bits)
                .unwrap();
            let g = |t| g3(t, &elem, &plan, &p, ReflectionMode::Practical).unwrap();
            for s in discrete_phases(bits) {
                assert!(g(t) <= g(s));
            }
        }
    }

    #[test]
    fn g3_paths_agree() {
        let p = ReflectionParams::default();
        let plan = CarrierPlan::new(2.4e9, 100e6, 3, BandwidthMode::PhysicalSplit).unwrap();
        let elem = ElementProblem {
            omega: vec![
                Complex64::new(0.3, -1.0),
                Complex64::new(0.2, 0.4),
                Complex64::new(-0.5, 0.1),
            ],
            diag: vec![0.5, 0.2, 0.9],
        };
        for t in [-3.0, -1.0, 0.0, 0.5, 2.2] {
            let coeffs: Vec<Complex64> = plan
                .freqs_hz
                .iter()
                .map(|&f| response(t, f, &p, ReflectionMode::Practical).unwrap().coefficient())
                .collect();
            assert_relative_eq!(
                g3(t, &elem, &plan, &p, ReflectionMode::Practical).unwrap(),
                g3_coeffs(&elem, &coeffs),
                max_relative = 1e-12
            );
        }
    }
}
