//! One element's phase update on a synthetic subproblem: three-phase search
//! against a dense scan and the exhaustive discrete choice.

use std::f64::consts::PI;

use irs_mec::comm::bps::{g3, optimize_bps_element_continuous, optimize_bps_element_discrete, ElementProblem, SearchParams};
use irs_mec::reflection::{BandwidthMode, CarrierPlan, ReflectionMode, ReflectionParams};
use num_complex::Complex64;

fn main() -> irs_mec::Result<()> {
    let plan = CarrierPlan::new(2.4e9, 100e6, 8, BandwidthMode::PhysicalSplit)?;
    let params = ReflectionParams::default();
    let mode = ReflectionMode::Practical;
    let elem = ElementProblem {
        omega: (0..8).map(|p| Complex64::from_polar(1.0 + 0.1 * p as f64, 0.4 * p as f64 - 1.0)).collect(),
        diag: vec![0.3; 8],
    };
    let f = |t: f64| g3(t, &elem, &plan, &params, mode);
    let t = optimize_bps_element_continuous(&elem, &plan, &params, mode, 0.0, &SearchParams::default())?;
    println!("three-phase: theta = {t:+.5}, g3 = {:.6}", f(t)?);
    let mut best = (0.0, f64::INFINITY);
    for j in 0..=10_000 {
        let x = -PI + 2.0 * PI * j as f64 / 10_000.0;
        let v = f(x)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    println!("dense scan:  theta = {:+.5}, g3 = {:.6}", best.0, best.1);
    for bits in [1, 2, 3, 5] {
        let t = optimize_bps_element_discrete(&elem, &plan, &params, mode, bits)?;
        println!("{bits}-bit:       theta = {t:+.5}, g3 = {:.6}", f(t)?);
    }
    Ok(())
}
