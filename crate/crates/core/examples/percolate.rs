//! Final sizes from directed reachability, in a random environment.
//!
//! `cargo run --example percolate`

use sirenv::env::{DistSpec, Environment};
use sirenv::percolation::{percolation_final_size, ArcSampling, PercolationOptions};

fn main() -> sirenv::Result<()> {
    let xi = DistSpec::recovery("two_point:1:0.5:2")?;
    let rho = DistSpec::weight("uniform:0:1")?;
    let n = 100_000;
    let env = Environment::new(n, 1, xi, rho)?;
    let lambda_c = sirenv::critical_lambda(&env.moments())?;

    for mult in [0.5, 1.5, 3.0] {
        let lambda = mult * lambda_c;
        let opts = PercolationOptions { arcs: ArcSampling::Skip, record_layers: true };
        let sizes: Vec<usize> = (0..20).map(|s| percolation_final_size(&env, lambda, s, &opts).r_infinity).collect();
        let big = sizes.iter().filter(|&&r| r as f64 >= 0.05 * n as f64).count();
        println!("λ = {mult}·λc: {big}/20 runs reach 5% of n; sizes {sizes:?}");
    }

    // the clock-coupled search exposes every open arc decision
    let small = Environment::new(200, 1, DistSpec::recovery("constant:1")?, DistSpec::weight("constant:1")?)?;
    let opts = PercolationOptions { arcs: ArcSampling::Clocks, record_layers: true };
    let r = percolation_final_size(&small, 3.0, 5, &opts);
    println!("n = 200, λ = 3: layers {:?}, {} clocks drawn", r.frontier_history.unwrap_or_default(), r.clocks_sampled);
    Ok(())
}
