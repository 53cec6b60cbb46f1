//! Offload split and edge CPU shares for three devices with fixed uplink rates.

use irs_mec::compute::{allocate_edge, latency, ComputeProfile};

fn main() -> irs_mec::Result<()> {
    let profile = ComputeProfile::with_equal_weights(
        vec![250_000, 300_000, 350_000],
        vec![700.0, 750.0, 800.0],
        vec![4e8, 5e8, 6e8],
        5e12,
    )?;
    let rates = [5e7, 2e8, 8e8];
    let out = allocate_edge(&rates, &profile, 1e-9, 20)?;
    let a = &out.allocation;
    for k in 0..profile.devices() {
        println!(
            "device {k}: R = {:.1e} bit/s, d = {:>6} of {}, F = {:.3e} cycles/s, T = {:.4} ms (all local {:.4} ms)",
            rates[k],
            a.d[k],
            profile.data_bits[k],
            a.edge_cpu[k],
            latency(k, a.d[k], a.edge_cpu[k], rates[k], &profile) * 1e3,
            profile.local_only_latency(k) * 1e3
        );
    }
    println!(
        "multiplier {:.3e}, {} iterations, stationarity residual {:.1e}, budget gap {:.1e}",
        a.eta, out.iterations, out.max_stationarity_residual, out.budget_gap
    );
    Ok(())
}
