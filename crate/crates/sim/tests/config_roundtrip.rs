use mpox_sim::config::{
    AnalysisSpec, KnotList, LyapunovSpec, OutputSpec, PolicySpec, ScheduleSpec,
};
use mpox_sim::{parse_config, presets, ConfigError, RunSpec};
use proptest::prelude::*;

fn schedule(max: f64) -> impl Strategy<Value = ScheduleSpec> {
    prop_oneof![
        (0.0..=max).prop_map(ScheduleSpec::Constant),
        prop::collection::vec((0.01f64..100.0, 0.0..=max), 1..5).prop_map(|steps| {
            let mut t = 0.0;
            let knots = steps
                .into_iter()
                .map(|(dt, v)| {
                    let k = (t, v);
                    t += dt;
                    k
                })
                .collect();
            ScheduleSpec::Knots(KnotList { knots })
        }),
    ]
}

fn spec() -> impl Strategy<Value = RunSpec> {
    (
        schedule(1.0),
        schedule(0.5),
        prop::array::uniform8(schedule(0.3)),
        any::<u64>(),
        1u32..500,
        prop::option::of(1u64..100),
        prop::bool::ANY,
        prop::option::of(1.0f64..1e4),
        prop::option::of((0.0f64..1.0, 0.1f64..0.9)),
    )
        .prop_map(
            |(p, eta3, sigma, seed, n_paths, stride, reflect, kappa, custom)| {
                let mut s = presets::example_4_2();
                s.model.params.p = p;
                s.model.params.eta3 = eta3;
                s.model.sigma = sigma;
                s.sim.seed = seed;
                s.sim.n_paths = n_paths;
                s.sim.record_stride = stride;
                s.sim.positivity_policy = if reflect {
                    PolicySpec::Reflect
                } else {
                    PolicySpec::ProjectToZero
                };
                s.analysis = AnalysisSpec {
                    kappa,
                    lyapunov: match custom {
                        Some((a, b)) => LyapunovSpec::Custom {
                            sup_abs_f_prime: a,
                            c1_tilde: b,
                            c2_tilde: a * b,
                        },
                        None => LyapunovSpec::Log1p,
                    },
                    ..AnalysisSpec::default()
                };
                s.output = OutputSpec {
                    dir: Some("results/x".into()),
                    ..OutputSpec::default()
                };
                s
            },
        )
}

proptest! {
    #[test]
    fn parse_of_serialized_spec_is_identity(s in spec()) {
        let back = parse_config(&s.to_json()).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn presets_round_trip() {
    for s in [presets::example_4_2(), presets::example_4_3()] {
        assert_eq!(parse_config(&s.to_json()).unwrap(), s);
    }
}

#[test]
fn minimal_spec_gets_defaults() {
    let text = r#"{
        "model": {
            "params": {"theta_h": 10, "p": 0.041, "eta1": 0.009, "eta2": 0.002, "eta3": 0.0027,
                       "mu_h": 0.05, "delta_h": 0.003, "zeta": 0.5, "gamma_h": 0.2, "theta_q": 0.043,
                       "theta_r": 10, "mu_r": 0.02, "delta_r": 0.004},
            "sigma": [0, 0, 0, 0, 0, 0, 0, 0]
        },
        "init": {"s_h": 90, "i_h": 60, "q_h": 50, "r_h": 70, "s_r": 80, "i_r": 30},
        "sim": {"dt": 0.01, "t_end": 10, "seed": 1, "n_paths": 2}
    }"#;
    let s = parse_config(text).unwrap();
    assert_eq!(s.sim.positivity_policy, PolicySpec::ProjectToZero);
    assert_eq!(s.sim.guard_eps, 1e-12);
    assert_eq!(s.analysis, AnalysisSpec::default());
    assert_eq!(s.output, OutputSpec::default());
    assert_eq!(s.sim_config().record_stride, 1);
}

#[test]
fn schema_errors_carry_json_paths() {
    let cases: [(&str, serde_json::Value, &str); 4] = [
        ("/sim/dt", serde_json::Value::Null, "$.sim.dt"),
        ("/model/params/zeta", "fast".into(), "$.model.params.zeta"),
        ("/init/s_h", serde_json::json!([1]), "$.init.s_h"),
        ("/sim/seed", (-3).into(), "$.sim.seed"),
    ];
    for (pointer, value, expected) in cases {
        let mut v: serde_json::Value = serde_json::from_str(presets::EXAMPLE_4_3).unwrap();
        if value.is_null() {
            let (parent, key) = pointer.rsplit_once('/').unwrap();
            v.pointer_mut(parent)
                .unwrap()
                .as_object_mut()
                .unwrap()
                .remove(key);
        } else {
            *v.pointer_mut(pointer).unwrap() = value;
        }
        match parse_config(&v.to_string()) {
            Err(ConfigError::Schema(e)) => assert_eq!(e.path, expected, "{e}"),
            other => panic!("{pointer}: {other:?}"),
        }
    }
}

#[test]
fn validation_errors_name_invariants() {
    let cases: [(&str, serde_json::Value, &str); 6] = [
        ("/model/params/theta_q", 2.0.into(), "theta_q in [0, 1]"),
        ("/model/params/mu_r", (-0.1).into(), "mu_r >= 0"),
        ("/model/sigma/4", (-1.0).into(), "sigma_5 >= 0"),
        ("/sim/dt", 0.0.into(), "dt > 0"),
        ("/sim/n_paths", 0.into(), "n_paths >= 1"),
        ("/analysis/n_max", 3.into(), "n_max >= 4"),
    ];
    for (pointer, value, invariant) in cases {
        let mut v: serde_json::Value = serde_json::from_str(presets::EXAMPLE_4_2).unwrap();
        *v.pointer_mut(pointer).unwrap() = value;
        match parse_config(&v.to_string()) {
            Err(ConfigError::Validation(e)) => assert_eq!(e.invariant, invariant, "{e}"),
            other => panic!("{pointer}: {other:?}"),
        }
    }
}

#[test]
fn malformed_json_is_a_schema_error() {
    assert!(matches!(
        parse_config("{\"model\": "),
        Err(ConfigError::Schema(_))
    ));
}
