//! Builds a random environment, queries it, and prints its critical rate.
//!
//! `cargo run --example environment`

use sirenv::env::{critical_lambda, DistSpec, Environment};

fn main() -> sirenv::Result<()> {
    let xi = DistSpec::recovery("two_point:1:0.5:2")?;
    let rho = DistSpec::weight("uniform:0:1")?;
    let env = Environment::new(100_000, 42, xi, rho)?;

    let m = env.moments();
    println!("E rho = {}, E 1/xi = {}, E 1/xi^2 = {}", m.mean_rho, m.mean_inv_xi, m.mean_inv_xi_sq);
    println!("lambda_c = {}", critical_lambda(&m)?);

    // nothing is stored: every value is a pure function of (seed, index)
    for j in 0..5 {
        println!("xi({j}) = {}", env.xi_at(j)?);
    }
    println!("rho(3, 99999) = {} = rho(99999, 3) = {}", env.rho_at(3, 99_999)?, env.rho_at(99_999, 3)?);

    // shifted laws keep recovery rates at or above 1
    let heavy = DistSpec::recovery("shifted:uniform:0:4:+1")?;
    println!("{heavy}: mean 1/xi = {}", heavy.law().mean_inv());
    Ok(())
}
