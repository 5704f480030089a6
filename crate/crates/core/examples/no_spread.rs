//! Probability that the first infective recovers before infecting anyone.
//!
//! `cargo run --example no_spread`

use sirenv::analytic::{no_spread_finite_n, no_spread_limit};
use sirenv::env::DistSpec;
use sirenv::experiment::{estimate_p_no_spread, BatchPoint, ExperimentConfig, Measure};

fn main() -> sirenv::Result<()> {
    let xi = DistSpec::recovery("two_point:1:0.5:2")?;
    let rho = DistSpec::weight("uniform:0:1")?;
    let lambda = 2.0;
    println!("limit E[ξ/(ξ + λ Eρ)] = {:.6}", no_spread_limit(&xi, &rho, lambda));
    for n in [2, 10, 100, 1_000, 10_000] {
        println!("n = {n:>5}: finite-n value {:.6}", no_spread_finite_n(&xi, &rho, lambda, n)?);
    }

    for measure in [Measure::Annealed, Measure::Quenched] {
        let mut cfg = ExperimentConfig::new(xi.clone(), rho.clone(), vec![100], vec![lambda], 20_000, 5);
        cfg.measure = measure;
        let est = estimate_p_no_spread(&cfg, BatchPoint { n: 100, lambda, grid_index: 0 })?;
        println!(
            "{measure:?}: estimate {:.4} [{:.4}, {:.4}], exact {:.4}",
            est.estimate.value, est.estimate.lo, est.estimate.hi, est.finite_n_analytic
        );
    }
    Ok(())
}
