use proptest::prelude::*;
use sirenv::dynamics::{gillespie_run, Selection, SimParams};
use sirenv::env::{DistSpec, Environment};
use sirenv::percolation::{
    edge_clock, er_giant_component, largest_component, per_edge_open_probability, percolation_final_size, recovery_clock, ArcSampling,
    PercolationOptions,
};
use sirenv::stats::chi_square_two_sample;

fn env(n: usize, xi: &str, rho: &str, seed: u64) -> Environment {
    Environment::new(n, seed, DistSpec::recovery(xi).unwrap(), DistSpec::weight(rho).unwrap()).unwrap()
}

fn opts(arcs: ArcSampling) -> PercolationOptions {
    PercolationOptions { arcs, record_layers: false }
}

/// Annealed final sizes: environment and run seeds both vary.
fn annealed_sizes(n: usize, xi: &str, rho: &str, lambda: f64, runs: u64, offset: u64, arcs: Option<ArcSampling>) -> Vec<u64> {
    (0..runs)
        .map(|k| {
            let e = env(n, xi, rho, offset + k);
            let r = match arcs {
                Some(a) => percolation_final_size(&e, lambda, offset + k, &opts(a)).r_infinity,
                None => gillespie_run(&e, &SimParams::new(lambda, offset + k)).unwrap().complete().unwrap().r_infinity,
            };
            r as u64
        })
        .collect()
}

#[test]
fn skip_and_clock_sampling_agree() {
    for (xi, rho, lambda) in [("constant:1", "constant:1", 1.5), ("two_point:1:0.5:2", "uniform:0:1", 6.0)] {
        let a = annealed_sizes(40, xi, rho, lambda, 10_000, 0, Some(ArcSampling::Clocks));
        let b = annealed_sizes(40, xi, rho, lambda, 10_000, 1 << 32, Some(ArcSampling::Skip));
        let t = chi_square_two_sample(&a, &b, 20);
        assert!(t.p_value > 0.01, "{xi} {rho} λ={lambda}: p = {}", t.p_value);
    }
}

#[test]
fn percolation_matches_dynamics_in_a_random_environment() {
    let a = annealed_sizes(20, "shifted:uniform:0:1:+1", "two_point:0.2:0.5:1", 5.0, 10_000, 0, None);
    let b = annealed_sizes(20, "shifted:uniform:0:1:+1", "two_point:0.2:0.5:1", 5.0, 10_000, 1 << 32, Some(ArcSampling::Skip));
    let t = chi_square_two_sample(&a, &b, 20);
    assert!(t.p_value > 0.01, "p = {}", t.p_value);
}

#[test]
fn quenched_engines_agree() {
    // one environment, varying run seeds only
    let e = env(15, "two_point:1:0.5:2", "uniform:0:1", 77);
    let dynamic: Vec<u64> = (0..10_000)
        .map(|s| gillespie_run(&e, &SimParams::new(8.0, s).with_selection(Selection::Direct)).unwrap().r_infinity as u64)
        .collect();
    let perc: Vec<u64> = (0..10_000).map(|s| percolation_final_size(&e, 8.0, s, &opts(ArcSampling::Clocks)).r_infinity as u64).collect();
    let t = chi_square_two_sample(&dynamic, &perc, 20);
    assert!(t.p_value > 0.01, "p = {}", t.p_value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupled_search_is_monotone_in_lambda(seed: u64, run: u64, n in 2usize..120, l1 in 0.0f64..8.0, dl in 0.0f64..4.0) {
        let e = env(n, "uniform:1:2", "uniform:0:1", seed);
        let low = percolation_final_size(&e, l1, run, &opts(ArcSampling::Clocks));
        let high = percolation_final_size(&e, l1 + dl, run, &opts(ArcSampling::Clocks));
        let mut hi_set = vec![false; n];
        high.reached.iter().for_each(|&v| hi_set[v] = true);
        prop_assert!(low.reached.iter().all(|&v| hi_set[v]));
        prop_assert!(low.r_infinity <= high.r_infinity);
    }

    #[test]
    fn clock_search_draws_only_explored_clocks(seed: u64, n in 1usize..150, lambda in 0.0f64..10.0) {
        let e = env(n, "constant:1", "uniform:0:1", seed);
        let r = percolation_final_size(&e, lambda, seed, &opts(ArcSampling::Clocks));
        prop_assert!(r.clocks_sampled <= (r.r_infinity * n) as u64);
        prop_assert_eq!(r.reached[0], 0);
    }
}

#[test]
fn clocks_are_pure_functions() {
    let e = env(10, "two_point:1:0.5:2", "uniform:0:1", 4);
    for i in 0..10 {
        assert_eq!(recovery_clock(&e, 3, i), recovery_clock(&e, 3, i));
        for j in (0..10).filter(|&j| j != i) {
            assert_eq!(edge_clock(&e, 2.0, 3, i, j), edge_clock(&e, 2.0, 3, i, j));
            // the clock scales as 1/λ under a fixed uniform
            let ratio = edge_clock(&e, 1.0, 3, i, j) / edge_clock(&e, 4.0, 3, i, j);
            assert!((ratio - 4.0).abs() < 1e-12 || !ratio.is_finite());
        }
    }
}

#[test]
fn arc_open_frequency_matches_analytic() {
    let (n, lambda) = (10, 3.0);
    for (xi, rho) in [("two_point:1:0.5:2", "uniform:0:1"), ("uniform:1:3", "uniform:0:1"), ("constant:1", "two_point:0:0.5:1")] {
        let runs = 40_000u64;
        let open = (0..runs)
            .filter(|&k| {
                let e = env(n, xi, rho, k);
                edge_clock(&e, lambda, k, 0, 1) <= recovery_clock(&e, k, 0)
            })
            .count() as f64;
        let p = per_edge_open_probability(&DistSpec::weight(rho).unwrap(), &DistSpec::recovery(xi).unwrap(), lambda, n).unwrap();
        let sd = (p * (1.0 - p) / runs as f64).sqrt();
        assert!((open / runs as f64 - p).abs() < 4.0 * sd, "{xi} {rho}: {} vs {p}", open / runs as f64);
    }
}

/// Positive root of `z = 1 − e^{−μ z}` by bisection.
fn giant_fraction(mu: f64) -> f64 {
    let (mut lo, mut hi) = (1e-9, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid < 1.0 - (-mu * mid).exp() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn erdos_renyi_giant_component() {
    let z = giant_fraction(2.0);
    assert!((z - 0.7968).abs() < 1e-4);
    let n = 100_000;
    let frac = er_giant_component(n, 2.0, 1) as f64 / n as f64;
    assert!((frac - z).abs() < 0.01, "{frac} vs {z}");
    let bound = 10.0 * (n as f64).ln();
    for seed in 0..20 {
        assert!((er_giant_component(n, 0.5, seed) as f64) <= bound);
    }
}

#[test]
fn erdos_renyi_edge_cases() {
    assert_eq!(er_giant_component(50, 50.0, 0), 50);
    assert_eq!(er_giant_component(50, 0.0, 0), 1);
    assert_eq!(er_giant_component(1, 3.0, 0), 1);
    assert_eq!(largest_component(6, [(0, 1), (1, 2), (4, 5)]), 3);
    assert_eq!(largest_component(3, []), 1);
}
