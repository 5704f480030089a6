//! The deterministic limit of the homogeneous epidemic and its final size.
//!
//! `cargo run --example meanfield`

use sirenv::dynamics::{gillespie_run, SimParams};
use sirenv::env::{DistSpec, Environment};
use sirenv::meanfield::{
    aligned_sup_distance, final_size_fixed_point, infective_at, ode_solve, MeanFieldState, DEFAULT_HORIZON, DEFAULT_STEP,
};

fn main() -> sirenv::Result<()> {
    for lambda in [0.5, 1.5, 2.0, 4.0] {
        let traj = ode_solve(lambda, MeanFieldState::from_infective(1e-3), DEFAULT_HORIZON, DEFAULT_STEP)?;
        let end = traj.last().expect("non-empty");
        let classic = final_size_fixed_point(lambda, 1.0, 0.0)?;
        println!("λ = {lambda}: ODE r(∞) = {:.5}, final-size root = {:.5}, i(5) = {:.4}", end.r, classic.value, infective_at(&traj, 5.0));
    }

    // a single large run tracks the ODE once the outbreak has taken off
    let n = 20_000;
    let env = Environment::new(n, 0, DistSpec::recovery("constant:1")?, DistSpec::weight("constant:1")?)?;
    for seed in 0..5 {
        let run = gillespie_run(&env, &SimParams::new(2.0, seed).with_trajectory())?;
        match aligned_sup_distance(run.trajectory.as_deref().unwrap_or_default(), n, 2.0, 0.01, DEFAULT_STEP)? {
            Some(d) => println!("seed {seed}: r/n = {:.4}, sup |I/n − i| after take-off = {d:.4}", run.r_infinity as f64 / n as f64),
            None => println!("seed {seed}: died out early (r = {})", run.r_infinity),
        }
    }
    Ok(())
}
