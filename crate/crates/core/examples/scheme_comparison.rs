//! Mean weighted latency of the four schemes over paired seeds.

use irs_mec::bcd::{run_scheme, Scheme, SolveOptions};
use irs_mec::scenario::ScenarioConfig;

fn main() -> irs_mec::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let cfg = ScenarioConfig::default();
    let opts = SolveOptions::default();
    let mut table = vec![Vec::new(); Scheme::ALL.len()];
    for seed in 1..=seeds {
        let scenario = cfg.build(seed)?;
        for (i, scheme) in Scheme::ALL.iter().enumerate() {
            table[i].push(run_scheme(&scenario, *scheme, &opts)?.solution.weighted_latency);
        }
    }
    for (i, scheme) in Scheme::ALL.iter().enumerate() {
        let mean = table[i].iter().sum::<f64>() / seeds as f64;
        let wins = (0..seeds as usize).filter(|&s| table[0][s] < table[i][s]).count();
        println!("{:<18} {:.4} ms  (proposed lower in {wins}/{seeds})", scheme.as_str(), mean * 1e3);
    }
    Ok(())
}
