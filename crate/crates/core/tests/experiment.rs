use sirenv::env::DistSpec;
use sirenv::experiment::{
    run_batch, sweep, write_sweep_csv, BatchPoint, Engine, ExperimentConfig, LambdaUnits, Measure, SWEEP_CSV_COLUMNS,
};

fn config(xi: &str, rho: &str, n: Vec<usize>, lambdas: Vec<f64>, reps: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(DistSpec::recovery(xi).unwrap(), DistSpec::weight(rho).unwrap(), n, lambdas, reps, seed)
}

#[test]
fn quenched_average_matches_annealed() {
    let (n, lambda) = (60, 2.0 * 8.0 / 3.0);
    let mut cfg = config("two_point:1:0.5:2", "uniform:0:1", vec![n], vec![lambda], 2000, 0);
    cfg.epsilon = 0.1;
    let point = BatchPoint { n, lambda, grid_index: 0 };

    cfg.measure = Measure::Quenched;
    let per_env: Vec<f64> = (0..50)
        .map(|s| {
            cfg.master_seed = 1000 + s;
            run_batch(&cfg, point).unwrap().exceed_probability.value
        })
        .collect();
    let k = per_env.len() as f64;
    let q_mean = per_env.iter().sum::<f64>() / k;
    let q_var = per_env.iter().map(|p| (p - q_mean).powi(2)).sum::<f64>() / (k - 1.0);
    let q_se = (q_var / k).sqrt();

    cfg.measure = Measure::Annealed;
    cfg.master_seed = 7;
    cfg.replications = 20_000;
    let a = run_batch(&cfg, point).unwrap().exceed_probability.value;
    let a_se = (a * (1.0 - a) / cfg.replications as f64).sqrt();
    assert!((q_mean - a).abs() <= 2.576 * (q_se * q_se + a_se * a_se).sqrt(), "quenched {q_mean} ± {q_se}, annealed {a} ± {a_se}");
    // environments really differ
    assert!(per_env.iter().any(|&p| (p - per_env[0]).abs() > 1e-9));
}

#[test]
fn no_spread_estimates_match_finite_n_values() {
    for (xi, rho) in [("constant:1", "constant:1"), ("two_point:1:0.5:2", "uniform:0:1")] {
        for n in [10, 1000] {
            for lambda in [0.5, 2.0] {
                for measure in [Measure::Annealed, Measure::Quenched] {
                    let mut cfg = config(xi, rho, vec![n], vec![lambda], 20_000, 3);
                    cfg.measure = measure;
                    let s = run_batch(&cfg, BatchPoint { n, lambda, grid_index: 0 }).unwrap();
                    let p = s.references.no_spread_finite_n;
                    let sd = (p * (1.0 - p) / 20_000.0).sqrt();
                    assert!(
                        (s.p_no_spread.value - p).abs() <= 4.0 * sd,
                        "{xi} {rho} n={n} λ={lambda} {measure:?}: {} vs {p}",
                        s.p_no_spread.value
                    );
                }
            }
        }
    }
}

#[test]
fn subcritical_chebyshev_chain() {
    for (xi, rho, units) in [("constant:1", "constant:1", 0.5), ("two_point:1:0.5:2", "uniform:0:1", 0.7)] {
        let mut cfg = config(xi, rho, vec![20, 80, 320], vec![units], 3000, 11);
        cfg.lambda_units = LambdaUnits::Critical;
        cfg.epsilon = 0.05;
        let res = sweep(&cfg).unwrap();
        assert_eq!(res.subcritical_checks.len(), 1);
        assert!(res.subcritical_checks[0].chebyshev_holds);
        for row in &res.rows {
            let bound = row.references.chebyshev_bound.unwrap();
            assert!(row.exceed_probability.value <= row.mean_r_inf.hi / (cfg.epsilon * row.n as f64));
            assert!(row.mean_r_inf.value <= row.references.subcritical_bound.unwrap() * 1.1);
            assert!(bound > 0.0);
        }
    }
}

#[test]
fn engines_agree_on_batch_means() {
    let mut cfg = config("shifted:uniform:0:1:+1", "uniform:0.5:1", vec![100], vec![4.0], 4000, 5);
    let point = BatchPoint { n: 100, lambda: 4.0, grid_index: 0 };
    let p = run_batch(&cfg, point).unwrap();
    cfg.engine = Engine::Dynamic;
    let d = run_batch(&cfg, point).unwrap();
    let se = |s: &sirenv::experiment::BatchStats| (s.mean_r_inf.hi - s.mean_r_inf.lo) / (2.0 * 1.96);
    let diff = (p.mean_r_inf.value - d.mean_r_inf.value).abs();
    assert!(diff <= 2.576 * (se(&p).powi(2) + se(&d).powi(2)).sqrt(), "{} vs {}", p.mean_r_inf.value, d.mean_r_inf.value);
}

#[test]
fn sweep_csv_layout() {
    let mut cfg = config("constant:1", "constant:1", vec![50, 100], vec![0.5, 1.0, 2.0], 100, 1);
    cfg.lambda_units = LambdaUnits::Critical;
    let res = sweep(&cfg).unwrap();
    assert_eq!(res.rows.len(), 6);
    assert_eq!(res.supercritical_witnesses.len(), 1);
    assert_eq!(res.subcritical_checks.len(), 1);
    let mut buf = Vec::new();
    write_sweep_csv(&res, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config_hash: "));
    assert!(lines[1].starts_with("# config: {"));
    assert_eq!(lines[2], SWEEP_CSV_COLUMNS.join(","));
    assert_eq!(lines.len(), 3 + 6);
    // the embedded config reproduces the sweep
    let again = ExperimentConfig::from_any_str(&text).unwrap();
    assert_eq!(again, cfg);
    let mut buf2 = Vec::new();
    write_sweep_csv(&sweep(&again).unwrap(), &mut buf2).unwrap();
    assert_eq!(text.as_bytes(), &buf2[..]);
    // the bound column is empty at and above λ_c
    for line in &lines[3..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), SWEEP_CSV_COLUMNS.len());
        let ratio: f64 = cols[2].parse().unwrap();
        assert_eq!(cols[11].is_empty(), ratio >= 1.0);
    }
}
