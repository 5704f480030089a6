use proptest::prelude::*;
use sirenv::env::{DistSpec, Environment, Family, Role};
use sirenv::stats::{ks_critical, ks_statistic};

fn recovery_specs() -> impl Strategy<Value = DistSpec> {
    prop_oneof![
        (1.0f64..5.0).prop_map(|v| format!("constant:{v}")),
        (1.0f64..3.0, 0.0f64..3.0).prop_map(|(a, w)| format!("uniform:{a}:{}", a + w + 1e-3)),
        (1.0f64..3.0, 0.0f64..=1.0, 1.0f64..6.0).prop_map(|(a, p, b)| format!("two_point:{a}:{p}:{b}")),
        (0.0f64..2.0, 1.0f64..2.0).prop_map(|(w, o)| format!("shifted:uniform:0:{}:+{o}", w + 1e-3)),
    ]
    .prop_map(|s| DistSpec::recovery(&s).unwrap())
}

fn weight_specs() -> impl Strategy<Value = DistSpec> {
    prop_oneof![
        (1e-3f64..=1.0).prop_map(|v| format!("constant:{v}")),
        (0.0f64..0.5, 0.01f64..0.5).prop_map(|(a, w)| format!("uniform:{a}:{}", a + w)),
        (0.0f64..=1.0, 0.0f64..0.99, 0.5f64..=1.0).prop_map(|(a, p, b)| format!("two_point:{a}:{p}:{b}")),
    ]
    .prop_map(|s| DistSpec::weight(&s).unwrap())
}

proptest! {
    #[test]
    fn recovery_rates_are_at_least_one(xi in recovery_specs(), rho in weight_specs(), seed: u64, n in 1usize..5000, j in 0usize..5000) {
        let env = Environment::new(n, seed, xi, rho).unwrap();
        let x = env.xi_at(j % n).unwrap();
        prop_assert!(x >= 1.0);
    }

    #[test]
    fn weights_lie_in_unit_interval(xi in recovery_specs(), rho in weight_specs(), seed: u64, i in 0usize..500, j in 0usize..500) {
        prop_assume!(i != j);
        let env = Environment::new(500, seed, xi, rho).unwrap();
        let w = env.rho_at(i, j).unwrap();
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert_eq!(w, env.rho_at(j, i).unwrap());
    }

    #[test]
    fn spec_text_round_trips(xi in recovery_specs()) {
        let again = DistSpec::parse(&xi.to_string(), Role::Recovery).unwrap();
        prop_assert_eq!(again.law(), xi.law());
    }
}

#[test]
fn symmetry_exhaustive_up_to_100() {
    for n in [2usize, 17, 100] {
        let env = Environment::new(n, 9, DistSpec::recovery("uniform:1:2").unwrap(), DistSpec::weight("uniform:0:1").unwrap()).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert_eq!(env.rho_at(i, j).unwrap(), env.rho_at(j, i).unwrap());
                }
            }
        }
    }
}

#[test]
fn equal_inputs_give_equal_environments() {
    let make =
        || Environment::new(300, 77, DistSpec::recovery("two_point:1:0.5:2").unwrap(), DistSpec::weight("uniform:0:1").unwrap()).unwrap();
    let (a, b) = (make(), make());
    for i in 0..300 {
        assert_eq!(a.xi_at(i).unwrap(), b.xi_at(i).unwrap());
        for j in (0..300).filter(|&j| j != i).step_by(7) {
            assert_eq!(a.rho_at(i, j).unwrap(), b.rho_at(i, j).unwrap());
        }
    }
    let c = Environment::new(300, 78, a.xi_spec().clone(), a.rho_spec().clone()).unwrap();
    assert!((0..300).any(|i| a.xi_at(i).unwrap() != c.xi_at(i).unwrap()));
}

#[test]
fn invalid_queries_and_specs() {
    let env = Environment::new(5, 0, DistSpec::recovery("constant:1").unwrap(), DistSpec::weight("constant:1").unwrap()).unwrap();
    assert!(env.xi_at(5).is_err());
    assert!(env.rho_at(2, 2).is_err());
    assert!(env.rho_at(0, 9).is_err());
    assert!(DistSpec::recovery("uniform:0.5:2").unwrap_err().to_string().contains("xi >= 1"));
    assert!(DistSpec::weight("uniform:0:1.5").unwrap_err().to_string().contains("0 <= rho <= 1"));
    assert!(DistSpec::weight("constant:0").unwrap_err().to_string().contains("P(rho > 0) > 0"));
    assert!(DistSpec::weight("uniform:0.5:0.5").is_err());
    assert!(DistSpec::weight("two_point:0.2:1.5:1").is_err());
    assert!("lognormal:0:1".parse::<Family>().is_err());
}

const DRAWS: usize = 10_000;

fn ks_passes(samples: Vec<f64>, spec: &DistSpec) -> (f64, f64) {
    let law = spec.law();
    let d = ks_statistic(&samples, |x| law.cdf(x));
    (d, ks_critical(samples.len(), 0.01))
}

#[test]
fn recovery_draws_match_their_law() {
    let weight = DistSpec::weight("constant:1").unwrap();
    for (k, text) in
        ["constant:2", "uniform:1:3", "two_point:1:0.5:2", "shifted:uniform:0:1:+1", "shifted:two_point:0:0.3:4:+1"].iter().enumerate()
    {
        let spec = DistSpec::recovery(text).unwrap();
        let env = Environment::new(DRAWS, 1000 + k as u64, spec.clone(), weight.clone()).unwrap();
        let samples = (0..DRAWS).map(|j| env.xi_at(j).unwrap()).collect();
        let (d, crit) = ks_passes(samples, &spec);
        assert!(d <= crit, "{text}: D = {d}, critical {crit}");
    }
}

#[test]
fn weight_draws_match_their_law() {
    let rec = DistSpec::recovery("constant:1").unwrap();
    for (k, text) in ["constant:0.5", "uniform:0:1", "uniform:0.2:0.7", "two_point:0:0.4:1", "two_point:0.25:0.5:0.75"].iter().enumerate() {
        let spec = DistSpec::weight(text).unwrap();
        let env = Environment::new(DRAWS + 1, 2000 + k as u64, rec.clone(), spec.clone()).unwrap();
        // one weight per unordered pair along a star and a path
        let samples = (1..=DRAWS).map(|j| if j % 2 == 0 { env.rho_at(0, j).unwrap() } else { env.rho_at(j, j - 1).unwrap() }).collect();
        let (d, crit) = ks_passes(samples, &spec);
        assert!(d <= crit, "{text}: D = {d}, critical {crit}");
    }
}
