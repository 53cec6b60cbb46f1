//! Amplitude and phase of one element across the band for a few control
//! angles, under the practical and the ideal model.

use irs_mec::reflection::{model_report, response, CarrierPlan, BandwidthMode, ReflectionMode, ReflectionParams};

fn main() -> irs_mec::Result<()> {
    let params = ReflectionParams::default();
    let plan = CarrierPlan::new(2.4e9, 100e6, 8, BandwidthMode::PhysicalSplit)?;
    for theta in [-2.0, -0.5, 0.0, 1.0, 2.5] {
        println!("theta = {theta:+.2} rad");
        for &f in &plan.freqs_hz {
            let r = response(theta, f, &params, ReflectionMode::Practical)?;
            println!("  {:.4} GHz  A = {:.4}  phase = {:+.4} rad", f / 1e9, r.amplitude, r.phase);
        }
    }
    for mode in [ReflectionMode::Practical, ReflectionMode::Ideal] {
        let rep = model_report(&params, &plan, 361, mode)?;
        println!(
            "{mode:?}: amplitude in [{:.4}, {:.4}], phase slope in [{:.3}, {:.3}] rad/GHz",
            rep.min_amp, rep.max_amp, rep.min_slope, rep.max_slope
        );
    }
    Ok(())
}
