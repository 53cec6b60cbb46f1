//! Joint design for one seeded scenario, printing per-level iteration counts.

use irs_mec::bcd::{solve, SolveOptions};
use irs_mec::scenario::ScenarioConfig;
use irs_mec::trace::TraceLevel;

fn main() -> irs_mec::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let scenario = ScenarioConfig::default().build(seed)?;
    let start = std::time::Instant::now();
    let report = solve(&scenario, &SolveOptions::default())?;
    let sol = &report.solution;
    println!("seed {seed}: {:.3} s", start.elapsed().as_secs_f64());
    println!("weighted latency {:.6e} s", sol.weighted_latency);
    println!("outer trace {:?}", report.outer_trace().values);
    for k in 0..sol.d.len() {
        println!(
            "device {k}: d = {} of {}, F = {:.3e}, R = {:.3e} bit/s, T = {:.4e} s",
            sol.d[k], scenario.profile.data_bits[k], sol.edge_cpu[k], sol.rates[k], sol.latency[k]
        );
    }
    let alg3: Vec<usize> = report.traces_at(TraceLevel::Alg3).map(|t| t.iterations).collect();
    let alg2: Vec<usize> = report.traces_at(TraceLevel::Alg2).map(|t| t.iterations).collect();
    println!("outer iterations {}, multiplier loops {alg2:?}", report.outer_iterations);
    println!("inner iterations {alg3:?}");
    Ok(())
}
