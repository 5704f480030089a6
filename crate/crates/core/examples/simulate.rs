//! One event-driven epidemic, with its trajectory written as CSV.
//!
//! `cargo run --example simulate -- [n] [lambda] [runs]`

use std::fs::File;

use sirenv::dynamics::{gillespie_run, write_trajectory_csv, Selection, SimParams};
use sirenv::env::{DistSpec, Environment};

fn main() -> sirenv::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(2_000), |s| s.parse()).expect("n");
    let lambda: f64 = args.next().map_or(Ok(2.0), |s| s.parse()).expect("lambda");
    let runs: u64 = args.next().map_or(Ok(4), |s| s.parse()).expect("runs");

    let env = Environment::new(n, 0, DistSpec::recovery("constant:1")?, DistSpec::weight("constant:1")?)?;
    for (seed, selection) in (0..runs).flat_map(|s| [(s, Selection::Direct), (s, Selection::Thinning)]) {
        let params = SimParams::new(lambda, seed).with_selection(selection).with_trajectory();
        let run = gillespie_run(&env, &params)?.complete()?;
        println!(
            "seed {seed} {selection:?}: r_inf = {} ({:.3} of n), extinct at t = {:.3} after {} events",
            run.r_infinity,
            run.r_infinity as f64 / n as f64,
            run.extinction_time.unwrap_or(0.0),
            run.events_executed.unwrap_or(0)
        );
        if seed == 0 && selection == Selection::Thinning {
            let path = std::env::temp_dir().join("sirenv_trajectory.csv");
            write_trajectory_csv(run.trajectory.as_deref().unwrap_or_default(), File::create(&path)?)?;
            println!("trajectory: {}", path.display());
        }
    }
    Ok(())
}
