//! A λ-sweep across system sizes, written as sweep.csv and sweep.json.
//!
//! `cargo run --release --example sweep -- [out_dir]`

use std::fs::{self, File};
use std::path::PathBuf;

use sirenv::env::DistSpec;
use sirenv::experiment::{sweep, write_sweep_csv, write_sweep_json, ExperimentConfig, LambdaUnits};

fn main() -> sirenv::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("sirenv_sweep"), PathBuf::from);
    let mut cfg = ExperimentConfig::new(
        DistSpec::recovery("two_point:1:0.5:2")?,
        DistSpec::weight("uniform:0:1")?,
        vec![100, 1_000, 10_000],
        vec![0.5, 0.9, 1.1, 2.0],
        1_000,
        2024,
    );
    cfg.lambda_units = LambdaUnits::Critical;

    let res = sweep(&cfg)?;
    println!("λc = {:.4}", res.lambda_c);
    for r in &res.rows {
        println!(
            "n = {:>6}  λ/λc = {:.1}  E r = {:>9.2}  P(r/n ≥ ε) = {:.3}",
            r.n, r.lambda_over_lambda_c, r.mean_r_inf.value, r.exceed_probability.value
        );
    }
    for w in &res.supercritical_witnesses {
        println!("λ = {:.3}: witness c = {}, b = {:.3}", w.lambda, w.c, w.b);
    }
    for c in &res.subcritical_checks {
        println!("λ = {:.3}: decreasing in n: {}, Chebyshev chain holds: {}", c.lambda, c.decreasing_in_n, c.chebyshev_holds);
    }

    fs::create_dir_all(&out)?;
    write_sweep_csv(&res, File::create(out.join("sweep.csv"))?)?;
    write_sweep_json(&res, File::create(out.join("sweep.json"))?)?;
    fs::write(out.join("sweep.toml"), cfg.to_toml())?;
    println!("wrote {}", out.display());
    Ok(())
}
