//! Mean latency of the proposed design against phase resolution, with the
//! longest inner-loop run seen at each resolution.

use irs_mec::bcd::{solve, SolveOptions};
use irs_mec::reflection::Resolution;
use irs_mec::scenario::{ResolutionSetting, ScenarioConfig};
use irs_mec::trace::TraceLevel;

fn main() -> irs_mec::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let levels = [
        Resolution::Discrete(1),
        Resolution::Discrete(2),
        Resolution::Discrete(3),
        Resolution::Discrete(5),
        Resolution::Discrete(8),
        Resolution::Continuous,
    ];
    for res in levels {
        let mut cfg = ScenarioConfig::default();
        cfg.array.resolution = ResolutionSetting(res);
        let (mut total, mut worst_inner, mut worst_outer) = (0.0, 0, 0);
        for seed in 1..=seeds {
            let report = solve(&cfg.build(seed)?, &SolveOptions::default())?;
            total += report.solution.weighted_latency;
            worst_outer = worst_outer.max(report.outer_iterations);
            let inner = report.traces_at(TraceLevel::Alg3).map(|t| t.iterations).max();
            worst_inner = worst_inner.max(inner.unwrap_or(0));
        }
        println!(
            "{res:?}: mean {:.5} ms, outer <= {worst_outer}, inner <= {worst_inner}",
            total / seeds as f64 * 1e3
        );
    }
    Ok(())
}
