use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sirenv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sirenv")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Vec<String> {
    let out = sirenv(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().lines().map(str::to_string).collect()
}

fn read_all(dir: &Path, files: &[String]) -> Vec<Vec<u8>> {
    files.iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn simulate_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--n", "100", "--lambda", "2", "--xi", "constant:1", "--rho", "constant:1", "--seed", "7", "--trajectory"];
    let first = ok(dir.path(), &args);
    let a = read_all(dir.path(), &first);
    let second = ok(dir.path(), &args);
    assert_eq!(first, second);
    assert_eq!(a, read_all(dir.path(), &second));
    assert!(first.iter().all(|p| p.starts_with("out/")));
    let doc: serde_json::Value = serde_json::from_slice(&a[first.iter().position(|p| p.ends_with("simulate.json")).unwrap()]).unwrap();
    assert_eq!(doc["config"]["seed"], 7);
    assert_eq!(doc["config"]["xi_spec"], "constant:1");
    assert_eq!(doc["result"]["engine"], "dynamic");
}

#[test]
fn negative_lambda_names_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["simulate", "percolate", "no-spread"] {
        let out = sirenv(dir.path(), &[cmd, "--n", "10", "--lambda", "-1", "--xi", "constant:1", "--rho", "constant:1"]);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("lambda ≥ 0"), "{cmd}");
    }
    let out = sirenv(dir.path(), &["meanfield", "--lambda", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda ≥ 0"));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["simulate", "--n", "10", "--lambda", "1", "--xi", "uniform:0:2"],
        &["percolate", "--n", "10", "--lambda", "1", "--rho", "constant:0"],
        &["sweep", "--n", "10", "--lambda", "1", "--reps", "0", "--seed", "1", "--xi", "constant:1", "--rho", "constant:1"],
        &["meanfield", "--lambda", "2", "--i0", "2"],
        &["simulate", "--lambda", "1"],
    ];
    for args in cases {
        let out = sirenv(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = sirenv(dir.path(), &["meanfield", "--lambda", "2", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_from_config_file_and_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("phase.toml"),
        "xi_spec = \"two_point:1:0.5:2\"\nrho_spec = \"uniform:0:1\"\nn_grid = [20, 40]\nlambda_grid = [0.5, 2.0]\nlambda_units = \"critical\"\nreplications = 200\nmaster_seed = 3\n",
    )
    .unwrap();
    let files = ok(dir.path(), &["sweep", "--config", "phase.toml", "--jobs", "1"]);
    let csv_path = files.iter().find(|f| f.ends_with("sweep.csv")).unwrap().clone();
    let csv = fs::read_to_string(dir.path().join(&csv_path)).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);

    // flags override the file
    let over = ok(dir.path(), &["sweep", "--config", "phase.toml", "--reps", "100", "--out", "over"]);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join(&over[1])).unwrap()).unwrap();
    assert_eq!(json["provenance"]["config"]["replications"], 100);
    assert_eq!(json["provenance"]["config"]["n_grid"], serde_json::json!([20, 40]));

    // re-running from the embedded config reproduces the outputs at another worker count
    let again = ok(dir.path(), &["sweep", "--config", &csv_path, "--jobs", "3", "--out", "again"]);
    // the seed defaults to 0 when absent everywhere
    let unseeded = ok(dir.path(), &["sweep", "--n", "10", "--lambda", "1", "--reps", "10", "--out", "unseeded"]);
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join(&unseeded[1])).unwrap()).unwrap();
    assert_eq!(doc["provenance"]["config"]["master_seed"], 0);
    for (a, b) in files.iter().zip(&again) {
        assert_eq!(fs::read(dir.path().join(a)).unwrap(), fs::read(dir.path().join(b)).unwrap(), "{a} vs {b}");
    }
}

#[test]
fn every_subcommand_is_deterministic_at_any_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 6] = [
        &["simulate", "--n", "300", "--lambda", "3", "--xi", "uniform:1:2", "--rho", "uniform:0:1", "--seed", "4", "--selection", "direct"],
        &["percolate", "--n", "2000", "--lambda", "3", "--xi", "two_point:1:0.5:2", "--rho", "uniform:0:1", "--seed", "4", "--layers"],
        &[
            "sweep",
            "--n",
            "50,100",
            "--lambda",
            "0.5,2",
            "--lambda-units",
            "critical",
            "--reps",
            "300",
            "--seed",
            "9",
            "--engine",
            "dynamic",
        ],
        &["meanfield", "--lambda", "2", "--horizon", "20"],
        &["er", "--n", "5000", "--mu", "2", "--seed", "1"],
        &[
            "no-spread",
            "--n",
            "100",
            "--lambda",
            "2",
            "--reps",
            "2000",
            "--measure",
            "quenched",
            "--xi",
            "two_point:1:0.5:2",
            "--rho",
            "uniform:0:1",
        ],
    ];
    for args in commands {
        let mut outputs = Vec::new();
        for jobs in ["1", "2", "4"] {
            let mut full: Vec<&str> = args.to_vec();
            let out = format!("run-{jobs}");
            full.extend(["--jobs", jobs, "--out", &out]);
            let files = ok(dir.path(), &full);
            assert!(!files.is_empty());
            outputs.push(read_all(dir.path(), &files));
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{args:?}");
        // re-run from the first output file
        let first = ok(dir.path(), &{
            let mut f = args.to_vec();
            f.extend(["--out", "run-1"]);
            f
        });
        let again = ok(dir.path(), &[args[0], "--config", &first[0], "--out", "replay"]);
        assert_eq!(read_all(dir.path(), &first), read_all(dir.path(), &again), "{args:?}");
    }
}

#[test]
fn er_and_meanfield_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let files = ok(dir.path(), &["er", "--n", "100000", "--mu", "2", "--seed", "3", "--out", "er"]);
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join(&files[0])).unwrap()).unwrap();
    assert!((doc["result"]["fraction"].as_f64().unwrap() - 0.7968).abs() < 0.01);
    let files = ok(dir.path(), &["meanfield", "--lambda", "2", "--out", "mf"]);
    let json = files.iter().find(|f| f.ends_with(".json")).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join(json)).unwrap()).unwrap();
    assert!(doc["result"]["terminal_gap"].as_f64().unwrap() < 1e-3);
    assert!(doc["result"]["max_drift"].as_f64().unwrap() <= 1e-9);
    let csv = fs::read_to_string(dir.path().join(files.iter().find(|f| f.ends_with(".csv")).unwrap())).unwrap();
    assert_eq!(csv.lines().nth(2), Some("t,s,i,r"));
}
