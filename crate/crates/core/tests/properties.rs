use proptest::prelude::*;

use irs_mec::bcd::{evaluate, run_scheme, solve, Scheme, SolveOptions};
use irs_mec::compute::{allocate_edge, ComputeProfile};
use irs_mec::reflection::{
    build_reflection_matrices, discrete_phases, BandwidthMode, BpsVector, CarrierPlan, ReflectionMode,
    ReflectionParams, Resolution,
};
use irs_mec::scenario::{ResolutionSetting, ScenarioConfig};
use irs_mec::trace::TraceLevel;

fn small_config(resolution: Resolution) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.array.irs_elements = 8;
    cfg.array.resolution = ResolutionSetting(resolution);
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn solutions_are_feasible_and_self_consistent(seed in 0u64..10_000, bits in 0u32..4) {
        let res = if bits == 0 { Resolution::Continuous } else { Resolution::Discrete(bits) };
        let s = small_config(res).build(seed).unwrap();
        let rep = solve(&s, &SolveOptions::default()).unwrap();
        let sol = &rep.solution;
        let again = evaluate(&s, &sol.d, &sol.edge_cpu, &sol.bank, &sol.theta, ReflectionMode::Practical).unwrap();
        prop_assert_eq!(&again, sol);
        prop_assert!(sol.edge_cpu.iter().sum::<f64>() <= s.profile.edge_total * (1.0 + 1e-9));
        for (d, total) in sol.d.iter().zip(&s.profile.data_bits) {
            prop_assert!(d <= total);
        }
        for row in &sol.bank.u {
            for u in row {
                prop_assert!(u.norm() <= 1.0 + 1e-9);
            }
        }
        if let Resolution::Discrete(b) = res {
            let set = discrete_phases(b);
            prop_assert!(sol.theta.theta.iter().all(|t| set.contains(t)));
        }
        let outer = rep.outer_trace();
        prop_assert!(outer.is_monotone(1e-9));
        prop_assert!(sol.weighted_latency <= outer.values[1]);
        for t in rep.traces_at(TraceLevel::Alg3).chain(rep.traces_at(TraceLevel::Alg1)) {
            prop_assert!(t.is_monotone(1e-8));
        }
    }

    #[test]
    fn no_irs_latency_ignores_irs_size(seed in 0u64..10_000, n in 1usize..40) {
        let base = ScenarioConfig::default();
        let mut other = base.clone();
        other.array.irs_elements = n;
        let a = run_scheme(&base.build(seed).unwrap(), Scheme::NoIrs, &SolveOptions::default()).unwrap();
        let b = run_scheme(&other.build(seed).unwrap(), Scheme::NoIrs, &SolveOptions::default()).unwrap();
        prop_assert_eq!(a.solution.weighted_latency, b.solution.weighted_latency);
    }

    #[test]
    fn random_phase_keeps_its_phases(seed in 0u64..10_000) {
        let s = small_config(Resolution::Discrete(3)).build(seed).unwrap();
        let rep = run_scheme(&s, Scheme::RandomPhase, &SolveOptions::default()).unwrap();
        let inner: Vec<_> = rep.traces_at(TraceLevel::Alg3).collect();
        prop_assert!(!inner.is_empty());
        let initial = solve(&s, &SolveOptions { l3_max: 0, ..SolveOptions::default() }).unwrap();
        prop_assert_eq!(&rep.solution.theta, &initial.solution.theta);
    }

    #[test]
    fn edge_shares_respect_budget(
        bits in prop::collection::vec(1u64..1_000_000, 1..5),
        seed in any::<u64>(),
    ) {
        let k = bits.len();
        let mix = |i: usize, lo: f64, hi: f64| {
            let x = ((seed.rotate_left(7 * i as u32) % 1000) as f64) / 1000.0;
            lo + x * (hi - lo)
        };
        let c: Vec<f64> = (0..k).map(|i| mix(i, 200.0, 1200.0)).collect();
        let fl: Vec<f64> = (0..k).map(|i| mix(i + 5, 1e8, 1e9)).collect();
        let rates: Vec<f64> = (0..k).map(|i| mix(i + 11, 1e6, 1e9)).collect();
        let p = ComputeProfile::with_equal_weights(bits, c, fl, 5e12).unwrap();
        let out = allocate_edge(&rates, &p, 1e-9, 20).unwrap();
        let used: f64 = out.allocation.edge_cpu.iter().sum();
        prop_assert!(used <= 5e12 * (1.0 + 1e-9));
        prop_assert!(out.allocation.edge_cpu.iter().all(|&f| f >= 0.0));
        prop_assert!(out.max_stationarity_residual <= 1e-6);
        prop_assert!(out.trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    }

    #[test]
    fn ideal_reflection_is_unit_modulus(
        theta in prop::collection::vec(-std::f64::consts::PI..std::f64::consts::PI, 1..16),
        subcarriers in 1usize..16,
    ) {
        let plan = CarrierPlan::new(2.4e9, 100e6, subcarriers, BandwidthMode::PhysicalSplit).unwrap();
        let v = BpsVector::new(theta, Resolution::Continuous).unwrap();
        let set = build_reflection_matrices(&v, &plan, &ReflectionParams::default(), ReflectionMode::Ideal).unwrap();
        for row in &set.phi {
            for c in row {
                prop_assert!((c.norm() - 1.0).abs() <= 1e-15);
            }
        }
    }
}
