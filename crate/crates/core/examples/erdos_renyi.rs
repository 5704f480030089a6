//! Giant components of G(n, μ/n) against the root of z = 1 − e^{−μz}.
//!
//! `cargo run --example erdos_renyi`

use sirenv::meanfield::final_size_fixed_point;
use sirenv::percolation::er_giant_component;

fn main() -> sirenv::Result<()> {
    let n = 200_000;
    for mu in [0.5, 0.9, 1.1, 1.5, 2.0, 3.0] {
        let largest = er_giant_component(n, mu, 11);
        let z = final_size_fixed_point(mu, 1.0, 0.0)?.value;
        println!("μ = {mu}: largest/n = {:.4}, z(μ) = {z:.4}, ln n = {:.1}", largest as f64 / n as f64, (n as f64).ln());
    }
    Ok(())
}
